//! Command-line front end: `det`, `verify` and `dump`.
//!
//! Exit codes: 0 success (and, for `verify`, every row passed), 1 some
//! `verify` row failed, 2 usage, 3 numerical integrity, 4 I/O.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::asympt::{
    dyson_sine_prediction, fcet_fit, logsasy_prediction, logxasy_prediction, theorem1_prediction,
    theorem2_prediction,
};
use crate::error::Error;
use crate::fredholm::{
    dlogdet_ds, dlogdet_dx, kernel_matrix, log_det, log_det_converged, DetEvaluation,
};
use crate::kernels::KernelSpec;
use crate::painleve2::{HastingsMcLeodSolution, HmWindow};
use crate::psi::PsiField;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTEGRITY: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Step used for the finite-difference derivatives in `verify`.
pub const DERIVATIVE_STEP: f64 = 1e-3;
/// Accepted range of the fitted exponent in `verify --formula fcet`.
pub const FCET_RANGE: (f64, f64) = (5.5, 6.3);

#[derive(Parser, Debug)]
#[command(
    name = "gapdet",
    version,
    about = "Fredholm determinants of sine-type and Painlevé II kernels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate log det(I - K) on (-s, s).
    Det(CommonArgs),
    /// Compare determinants with their large-gap asymptotics.
    Verify {
        #[arg(long, value_enum)]
        formula: Formula,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write the Hastings–McLeod grid, Psi columns or a kernel matrix.
    Dump {
        #[arg(long, value_enum)]
        what: DumpTarget,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "sine")]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Comma-separated half-widths.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub s: Vec<f64>,
    /// Quadrature order; omitted means converge automatically.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the pass tolerance of `verify`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Hastings–McLeod window as L,R,H.
    #[arg(
        long = "hm-window",
        value_delimiter = ',',
        num_args = 1,
        allow_hyphen_values = true
    )]
    pub hm_window: Option<Vec<f64>>,
    #[arg(long = "psi-R", default_value_t = crate::psi::DEFAULT_RADIUS)]
    pub psi_r: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Sine,
    Csin,
    Pii,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    Dyson,
    Theorem1,
    Theorem2,
    Logsasy,
    Logxasy,
    Fcet,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpTarget {
    Hm,
    Psi,
    Kernel,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Numeric(_) => EXIT_INTEGRITY,
            Self::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Numeric(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            // bad arguments surface as range/domain errors from the library
            Error::Range { .. } | Error::Domain(_) | Error::Arity { .. } => {
                Self::Usage(e.to_string())
            }
            e => Self::Numeric(e),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Validated settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kernel: KernelKind,
    pub s_list: Vec<f64>,
    pub x: f64,
    pub t: f64,
    pub n: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub hm_window: HmWindow,
    pub psi_r: f64,
}

impl RunConfig {
    pub fn from_args(a: &CommonArgs, default_s: &[f64]) -> CliResult<Self> {
        let s_list = if a.s.is_empty() {
            default_s.to_vec()
        } else {
            a.s.clone()
        };
        if s_list.is_empty() {
            return Err(CliError::Usage("--s needs at least one value".into()));
        }
        if let Some(bad) = s_list.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(CliError::Usage(format!(
                "s = {bad} must be a nonnegative number"
            )));
        }
        if !(0.0..=1.0).contains(&a.t) {
            return Err(CliError::Usage(format!("t = {} must lie in [0, 1]", a.t)));
        }
        if !a.x.is_finite() {
            return Err(CliError::Usage("x must be finite".into()));
        }
        let hm_window = match &a.hm_window {
            None => HmWindow::default(),
            Some(v) if v.len() == 3 => HmWindow {
                x_left: v[0],
                x_right: v[1],
                h: v[2],
            },
            Some(v) => {
                return Err(CliError::Usage(format!(
                    "--hm-window needs L,R,H (got {} values)",
                    v.len()
                )))
            }
        };
        if let Some(tol) = a.tol {
            if tol.is_nan() || tol < 0.0 {
                return Err(CliError::Usage(format!("tol = {tol} must be nonnegative")));
            }
        }
        Ok(Self {
            kernel: a.kernel,
            s_list,
            x: a.x,
            t: a.t,
            n: a.n,
            format: a.format,
            out: a.out.clone(),
            tol: a.tol,
            hm_window,
            psi_r: a.psi_r,
        })
    }

    fn hm(&self) -> CliResult<Arc<HastingsMcLeodSolution>> {
        Ok(Arc::new(self.hm_window.solve()?))
    }

    fn kernel_spec(&self, kind: KernelKind) -> CliResult<KernelSpec> {
        Ok(match kind {
            KernelKind::Sine => KernelSpec::sine(self.x),
            KernelKind::Csin => KernelSpec::cubic_sine(self.t, self.x)?,
            KernelKind::Pii => KernelSpec::pii(self.hm()?, self.x, self.psi_r)?,
        })
    }

    fn evaluate(&self, spec: &KernelSpec, s: f64) -> CliResult<DetEvaluation> {
        Ok(match self.n {
            Some(n) => log_det(spec, s, n)?,
            None => log_det_converged(spec, s)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(v) => Value::Bool(*v),
        }
    }
}

/// 17 significant digits, enough to round-trip any binary64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write(&self, format: Format, w: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(w, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(w, "{}", cells.join(","))?;
                }
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .columns
                            .iter()
                            .cloned()
                            .zip(row.iter().map(Cell::json))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut *w, &rows)?;
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// Result of a subcommand: the table plus whether `verify` passed.
pub struct Outcome {
    pub table: Table,
    pub passed: bool,
}

pub fn cmd_det(cfg: &RunConfig) -> CliResult<Outcome> {
    let spec = cfg.kernel_spec(cfg.kernel)?;
    let evals = cfg
        .s_list
        .par_iter()
        .map(|&s| cfg.evaluate(&spec, s))
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(["s", "n", "log_det", "converged", "pivot_min"]);
    for e in evals {
        table.rows.push(vec![
            Cell::Num(e.s),
            Cell::Int(e.n),
            Cell::Num(e.log_det.to_f64()),
            Cell::Bool(e.converged),
            Cell::Num(e.pivot_min.to_f64()),
        ]);
    }
    Ok(Outcome {
        table,
        passed: true,
    })
}

pub fn default_s_list(formula: Formula) -> &'static [f64] {
    match formula {
        Formula::Dyson => &[4.0, 5.0, 6.0],
        Formula::Theorem1 | Formula::Theorem2 => &[1.6, 1.8, 2.0],
        Formula::Logsasy | Formula::Logxasy => &[2.0],
        Formula::Fcet => &[1.6, 1.8, 2.0, 2.1],
    }
}

/// Default pass tolerance of a verify row.
pub fn default_tolerance(formula: Formula, s: f64) -> f64 {
    match formula {
        Formula::Dyson => 0.25 / s,
        Formula::Theorem1 | Formula::Theorem2 => 1.0,
        Formula::Logsasy | Formula::Logxasy => 0.5,
        Formula::Fcet => f64::NAN,
    }
}

pub fn cmd_verify(formula: Formula, cfg: &RunConfig) -> CliResult<Outcome> {
    if formula == Formula::Fcet {
        return verify_fcet(cfg);
    }
    let hm = match formula {
        Formula::Theorem1 | Formula::Logsasy | Formula::Logxasy => Some(cfg.hm()?),
        _ => None,
    };
    let spec = match formula {
        Formula::Dyson => KernelSpec::sine(cfg.x),
        Formula::Theorem2 => KernelSpec::cubic_sine(1.0, cfg.x)?,
        _ => KernelSpec::pii(
            Arc::clone(hm.as_ref().expect("hm solved")),
            cfg.x,
            cfg.psi_r,
        )?,
    };
    let rows = cfg
        .s_list
        .par_iter()
        .map(|&s| -> CliResult<[f64; 3]> {
            let (computed, predicted) = match formula {
                Formula::Dyson => (
                    cfg.evaluate(&spec, s)?.log_det.to_f64(),
                    dyson_sine_prediction(s, cfg.x)?.value,
                ),
                Formula::Theorem2 => (
                    cfg.evaluate(&spec, s)?.log_det.to_f64(),
                    theorem2_prediction(s, cfg.x)?.value,
                ),
                Formula::Theorem1 => (
                    cfg.evaluate(&spec, s)?.log_det.to_f64(),
                    theorem1_prediction(s, cfg.x, hm.as_ref().expect("hm solved"))?.value,
                ),
                Formula::Logsasy => (
                    dlogdet_ds(&spec, s, DERIVATIVE_STEP)?,
                    logsasy_prediction(s, cfg.x)?,
                ),
                Formula::Logxasy => {
                    let v = hm.as_ref().expect("hm solved").v_at(cfg.x)?;
                    (
                        dlogdet_dx(&spec, s, DERIVATIVE_STEP)?,
                        logxasy_prediction(s, cfg.x, v)?,
                    )
                }
                Formula::Fcet => unreachable!(),
            };
            Ok([s, computed, predicted])
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut table = Table::new(["s", "computed", "predicted", "abs_err", "tol", "pass"]);
    let mut passed = true;
    for [s, computed, predicted] in rows {
        let err = (computed - predicted).abs();
        let tol = cfg.tol.unwrap_or_else(|| default_tolerance(formula, s));
        let ok = err <= tol;
        passed &= ok;
        table.rows.push(vec![
            Cell::Num(s),
            Cell::Num(computed),
            Cell::Num(predicted),
            Cell::Num(err),
            Cell::Num(tol),
            Cell::Bool(ok),
        ]);
    }
    Ok(Outcome { table, passed })
}

fn verify_fcet(cfg: &RunConfig) -> CliResult<Outcome> {
    let spec = KernelSpec::pii(cfg.hm()?, cfg.x, cfg.psi_r)?;
    let samples = cfg
        .s_list
        .par_iter()
        .map(|&s| Ok((s, cfg.evaluate(&spec, s)?.log_det.to_f64())))
        .collect::<CliResult<Vec<_>>>()?;
    let fit = fcet_fit(&samples)?;
    let (lo, hi) = match cfg.tol {
        Some(tol) => (6.0 - tol, 6.0 + tol),
        None => FCET_RANGE,
    };
    let ok = fit.exponent >= lo && fit.exponent <= hi;
    let mut table = Table::new(["samples", "exponent", "prefactor", "lower", "upper", "pass"]);
    table.rows.push(vec![
        Cell::Int(samples.len()),
        Cell::Num(fit.exponent),
        Cell::Num(fit.prefactor),
        Cell::Num(lo),
        Cell::Num(hi),
        Cell::Bool(ok),
    ]);
    Ok(Outcome { table, passed: ok })
}

pub fn cmd_dump(what: DumpTarget, cfg: &RunConfig) -> CliResult<Outcome> {
    let table = match what {
        DumpTarget::Hm => {
            let hm = cfg.hm()?;
            let mut t = Table::new(["x", "u", "u_x", "v"]);
            for (i, x) in hm.grid().enumerate() {
                t.rows.push(vec![
                    Cell::Num(x),
                    Cell::Num(hm.u[i]),
                    Cell::Num(hm.u_x[i]),
                    Cell::Num(hm.v[i]),
                ]);
            }
            t
        }
        DumpTarget::Psi => {
            let field = PsiField::new(cfg.hm()?, cfg.x, cfg.psi_r)?;
            let half = cfg.s_list.iter().cloned().fold(0.0, f64::max);
            let half = if half > 0.0 { half } else { 1.0 };
            let points = cfg.n.unwrap_or(40);
            let lambdas: Vec<f64> = (0..=points)
                .map(|i| -half + 2.0 * half * i as f64 / points as f64)
                .collect();
            field.precompute(&lambdas)?;
            let mut t = Table::new([
                "lambda",
                "re_psi11",
                "im_psi11",
                "re_psi21",
                "im_psi21",
                "abs_phi1_minus_1",
            ]);
            for &l in &lambdas {
                let c = field.psi_column(l)?;
                let (p11, p21) = (c.psi11(), c.psi21());
                t.rows.push(vec![
                    Cell::Num(l),
                    Cell::Num(p11.re),
                    Cell::Num(p11.im),
                    Cell::Num(p21.re),
                    Cell::Num(p21.im),
                    Cell::Num((c.phi1 - 1.0).norm()),
                ]);
            }
            t
        }
        DumpTarget::Kernel => {
            let spec = cfg.kernel_spec(cfg.kernel)?;
            let s = cfg.s_list[0];
            let n = cfg.n.unwrap_or(16);
            let (nodes, weights, k) = kernel_matrix(&spec, s, n)?;
            let mut cols = vec!["node".to_string(), "weight".to_string()];
            cols.extend((0..n).map(|j| format!("k{j}")));
            let mut t = Table::new(cols);
            for i in 0..n {
                let mut row = vec![Cell::Num(nodes[i]), Cell::Num(weights[i])];
                row.extend(k[i].iter().map(|&v| Cell::Num(v)));
                t.rows.push(row);
            }
            t
        }
    };
    Ok(Outcome {
        table,
        passed: true,
    })
}

fn execute(cli: &Cli) -> CliResult<(Outcome, Format, Option<PathBuf>)> {
    let (outcome, common) = match &cli.command {
        Command::Det(a) => {
            if a.s.is_empty() {
                return Err(CliError::Usage("det needs --s".into()));
            }
            let cfg = RunConfig::from_args(a, &[])?;
            (cmd_det(&cfg)?, a)
        }
        Command::Verify { formula, common } => {
            let cfg = RunConfig::from_args(common, default_s_list(*formula))?;
            (cmd_verify(*formula, &cfg)?, common)
        }
        Command::Dump { what, common } => {
            let cfg = RunConfig::from_args(common, &[1.0])?;
            (cmd_dump(*what, &cfg)?, common)
        }
    };
    Ok((outcome, common.format, common.out.clone()))
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let result = execute(&cli).and_then(|(outcome, format, out)| {
        match out {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                outcome.table.write(format, &mut w)?;
                w.flush()?;
            }
            None => outcome.table.write(format, stdout)?,
        }
        Ok(outcome.passed)
    });
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        // reader went away (e.g. `| head`); nothing useful to report
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "gapdet: {e}");
            e.exit_code()
        }
    }
}

/// Applies `GAPDET_THREADS` to the global worker pool.
pub fn configure_threads(value: Option<&str>) -> std::result::Result<(), String> {
    let Some(value) = value else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("GAPDET_THREADS = {value:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

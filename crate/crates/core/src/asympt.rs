//! Large-gap asymptotic formulas and the power-law exponent fit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::painleve2::HastingsMcLeodSolution;
use crate::specfun::constants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    Theorem1,
    Theorem2,
    DysonSine,
    Logsasy,
    Logxasy,
}

impl FormulaId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Theorem1 => "theorem1",
            Self::Theorem2 => "theorem2",
            Self::DysonSine => "dyson_sine",
            Self::Logsasy => "logsasy",
            Self::Logxasy => "logxasy",
        }
    }
}

/// A prediction split into the `s`-dependent part, the constant and the
/// Tracy–Widom term, so a mismatch can be attributed to one of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub value: f64,
    pub leading: f64,
    pub constant: f64,
    pub tw_term: f64,
    pub formula_id: FormulaId,
}

impl AsymptoticPrediction {
    fn new(leading: f64, constant: f64, tw_term: f64, formula_id: FormulaId) -> Self {
        Self {
            value: leading + constant + tw_term,
            leading,
            constant,
            tw_term,
            formula_id,
        }
    }
}

fn check_positive(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("s = {s} must be positive")))
    }
}

/// `A(s, x) = -(2/3) s^6 - s^4 x - (s x)^2 / 2 - (3/4) ln s`.
pub fn leading_term(s: f64, x: f64) -> f64 {
    let s2 = s * s;
    -(2.0 / 3.0) * s2 * s2 * s2 - s2 * s2 * x - 0.5 * s2 * x * x - 0.75 * s.ln()
}

/// Cubic-sine determinant: `A(s, x) + omega_0`.
pub fn theorem2_prediction(s: f64, x: f64) -> Result<AsymptoticPrediction> {
    check_positive(s)?;
    Ok(AsymptoticPrediction::new(
        leading_term(s, x),
        constants().omega0.to_f64(),
        0.0,
        FormulaId::Theorem2,
    ))
}

/// Painlevé II determinant: `A(s, x) + int_x^inf (y - x) u^2 dy + omega_0`.
pub fn theorem1_prediction(
    s: f64,
    x: f64,
    sol: &HastingsMcLeodSolution,
) -> Result<AsymptoticPrediction> {
    check_positive(s)?;
    Ok(AsymptoticPrediction::new(
        leading_term(s, x),
        constants().omega0.to_f64(),
        sol.tw_integral(x)?,
        FormulaId::Theorem1,
    ))
}

/// Sine kernel: `-(s x)^2 / 2 - (1/4) ln(s x) + (1/12) ln 2 + 3 zeta'(-1)`.
pub fn dyson_sine_prediction(s: f64, x: f64) -> Result<AsymptoticPrediction> {
    let sx = s * x;
    if !(sx > 0.0 && sx.is_finite()) {
        return Err(Error::Domain(format!("s x = {sx} must be positive")));
    }
    Ok(AsymptoticPrediction::new(
        -0.5 * sx * sx - 0.25 * sx.ln(),
        constants().dyson_const.to_f64(),
        0.0,
        FormulaId::DysonSine,
    ))
}

/// `d/ds log det ~ -4 s^5 - 4 x s^3 - x^2 s - 3 / (4 s)`.
pub fn logsasy_prediction(s: f64, x: f64) -> Result<f64> {
    check_positive(s)?;
    Ok(-4.0 * s.powi(5) - 4.0 * x * s.powi(3) - x * x * s - 0.75 / s)
}

/// `d/dx log det ~ -s^4 - s^2 x - v(x) - 1 / (8 s^2)`.
pub fn logxasy_prediction(s: f64, x: f64, v: f64) -> Result<f64> {
    check_positive(s)?;
    Ok(-s.powi(4) - s * s * x - v - 0.125 / (s * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
}

pub const FCET_MIN_SAMPLES: usize = 4;
pub const FCET_MIN_S: f64 = 1.4;

/// Least-squares fit of `-log_det = C s^p` on log-log axes.
pub fn fcet_fit(samples: &[(f64, f64)]) -> Result<PowerLawFit> {
    if samples.len() < FCET_MIN_SAMPLES {
        return Err(Error::Arity {
            needed: FCET_MIN_SAMPLES,
            got: samples.len(),
        });
    }
    for (i, &(s, l)) in samples.iter().enumerate() {
        if s.is_nan() || s < FCET_MIN_S || l.is_nan() || l >= 0.0 {
            return Err(Error::Domain(format!(
                "sample (s = {s}, log_det = {l}) needs s >= {FCET_MIN_S} and log_det < 0"
            )));
        }
        if samples[..i].iter().any(|&(t, _)| t == s) {
            return Err(Error::Domain(format!("duplicate sample at s = {s}")));
        }
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(s, l)| (s.ln(), (-l).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let exponent = sxy / sxx;
    Ok(PowerLawFit {
        exponent,
        prefactor: (my - exponent * mx).exp(),
    })
}

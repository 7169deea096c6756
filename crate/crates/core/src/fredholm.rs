//! `log det(I - K)` on `(-s, s)` by Nyström discretization with
//! Gauss–Legendre nodes and symmetrized weights, factored in double-double.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::kernels::{kernel_diag, kernel_eval, KernelSpec};
use crate::mpnum::{gauss_legendre, log_det_lu, DdMatrix, ExtendedReal, QuadratureRule};

pub const MIN_ORDER: usize = 8;
pub const MAX_ORDER: usize = 400;
/// Orders tried by [`log_det_converged`].
pub const ORDER_LADDER: [usize; 5] = [32, 64, 128, 256, 400];
pub const CONVERGENCE_TOL: f64 = 1e-8;
/// Beyond this half-width the sextic-growth kernels lose most of the
/// double-double budget; results there need healthy pivots to count.
pub const PRECISION_S: f64 = 2.1;
pub const PIVOT_FLOOR: f64 = 1e-28;

#[derive(Debug, Clone)]
pub struct DetEvaluation {
    pub spec: KernelSpec,
    pub s: f64,
    pub n: usize,
    pub log_det: ExtendedReal,
    pub pivot_min: ExtendedReal,
    pub converged: bool,
    /// `|log_det(n) - log_det(previous n)|`, zero for a single evaluation.
    pub delta: f64,
}

fn rule(n: usize) -> Result<Arc<QuadratureRule>> {
    static RULES: OnceLock<RwLock<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let rules = RULES.get_or_init(Default::default);
    if let Some(r) = rules.read().expect("rule cache poisoned").get(&n) {
        return Ok(Arc::clone(r));
    }
    let r = Arc::new(gauss_legendre(n)?);
    rules
        .write()
        .expect("rule cache poisoned")
        .insert(n, Arc::clone(&r));
    Ok(r)
}

fn check_inputs(spec: &KernelSpec, s: f64, n: usize) -> Result<()> {
    check_range("s", s, 0.0, spec.max_half_width())?;
    check_range("n", n as f64, MIN_ORDER as f64, MAX_ORDER as f64)
}

/// Nodes, weights and rows of `K(x_i, x_j)`.
pub type KernelMatrix = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

/// Nodes, weights and the kernel matrix `K(x_i, x_j)` on `(-s, s)`.
pub fn kernel_matrix(spec: &KernelSpec, s: f64, n: usize) -> Result<KernelMatrix> {
    check_inputs(spec, s, n)?;
    let (nodes, weights) = rule(n)?.scaled(s);
    spec.prepare(&nodes)?;
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        kernel_diag(spec, nodes[i])
                    } else {
                        kernel_eval(spec, nodes[i], nodes[j])
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((nodes, weights, rows))
}

/// `log det(I - K)` on `(-s, s)` with an `n`-point rule.
pub fn log_det(spec: &KernelSpec, s: f64, n: usize) -> Result<DetEvaluation> {
    check_inputs(spec, s, n)?;
    if s == 0.0 {
        return Ok(DetEvaluation {
            spec: spec.clone(),
            s,
            n,
            log_det: ExtendedReal::ZERO,
            pivot_min: ExtendedReal::ONE,
            converged: true,
            delta: 0.0,
        });
    }
    let (nodes, weights) = rule(n)?.scaled(s);
    spec.prepare(&nodes)?;
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();

    // upper triangle only; M is symmetric by construction
    let upper = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    let k = if i == j {
                        kernel_diag(spec, nodes[i])?
                    } else {
                        kernel_eval(spec, nodes[i], nodes[j])?
                    };
                    Ok(sqrt_w[i] * sqrt_w[j] * k)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut m = DdMatrix::zeros(n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &wk) in row.iter().enumerate() {
            let j = i + off;
            let entry = if i == j {
                ExtendedReal::ONE - wk
            } else {
                ExtendedReal::from_f64(-wk)
            };
            m[(i, j)] = entry;
            m[(j, i)] = entry;
        }
    }

    let lu = log_det_lu(&m)?;
    if lu.sign < 0.0 || lu.log_abs_det.hi > 0.0 {
        return Err(Error::Integrity(format!(
            "det(I - K) = {}exp({}) for {} kernel at s = {s}, n = {n}; expected a value in (0, 1]",
            if lu.sign < 0.0 { "-" } else { "" },
            lu.log_abs_det.to_f64(),
            spec.name()
        )));
    }
    Ok(DetEvaluation {
        spec: spec.clone(),
        s,
        n,
        log_det: lu.log_abs_det,
        pivot_min: lu.pivot_min,
        converged: true,
        delta: 0.0,
    })
}

fn trustworthy(spec: &KernelSpec, eval: &DetEvaluation) -> bool {
    spec.max_half_width() > 2.4 || eval.s <= PRECISION_S || eval.pivot_min.to_f64() > PIVOT_FLOOR
}

/// Runs `n` up the order ladder until successive values agree within
/// [`CONVERGENCE_TOL`]; otherwise returns the `n = 400` value unconverged.
pub fn log_det_converged(spec: &KernelSpec, s: f64) -> Result<DetEvaluation> {
    check_range("s", s, 0.0, spec.max_half_width())?;
    let mut prev = log_det(spec, s, ORDER_LADDER[0])?;
    if s == 0.0 {
        return Ok(prev);
    }
    for &n in &ORDER_LADDER[1..] {
        let mut next = log_det(spec, s, n)?;
        next.delta = (next.log_det - prev.log_det).to_f64().abs();
        if next.delta <= CONVERGENCE_TOL {
            next.converged = trustworthy(spec, &next);
            return Ok(next);
        }
        prev = next;
    }
    prev.converged = false;
    Ok(prev)
}

fn check_step(s: f64, h: f64) -> Result<()> {
    check_range("h", h, f64::MIN_POSITIVE, 1e-3)?;
    if s - h <= 0.0 {
        return Err(Error::Domain(format!("s - h = {} must be positive", s - h)));
    }
    Ok(())
}

/// Central difference of `log_det` in `s`, both sides at the converged order.
pub fn dlogdet_ds(spec: &KernelSpec, s: f64, h: f64) -> Result<f64> {
    check_step(s, h)?;
    let n = log_det_converged(spec, s)?.n;
    let plus = log_det(spec, s + h, n)?.log_det;
    let minus = log_det(spec, s - h, n)?.log_det;
    Ok((plus - minus).to_f64() / (2.0 * h))
}

/// Central difference of `log_det` in the kernel parameter `x`.
pub fn dlogdet_dx(spec: &KernelSpec, s: f64, h: f64) -> Result<f64> {
    check_step(s, h)?;
    let n = log_det_converged(spec, s)?.n;
    let x = spec.x();
    let plus = log_det(&spec.with_x(x + h)?, s, n)?.log_det;
    let minus = log_det(&spec.with_x(x - h)?, s, n)?.log_det;
    Ok((plus - minus).to_f64() / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn empty_interval() {
        let r = log_det_converged(&KernelSpec::sine(1.0), 0.0).unwrap();
        assert_eq!(r.log_det, ExtendedReal::ZERO);
        assert_eq!(r.n, 32);
        assert!(r.converged);
    }

    #[test]
    fn small_interval_trace_expansion() {
        let spec = KernelSpec::sine(1.0);
        let s = 0.01;
        let r = log_det(&spec, s, 16).unwrap();
        // log det = -tr K - tr K^2 / 2 - ...
        let tr = 2.0 * s / PI;
        assert!((r.log_det.to_f64() + tr + tr * tr / 2.0).abs() < 1e-6);
        // with tr K^2 = (2 s x / pi)^2 the derivatives carry a second term
        let d = dlogdet_ds(&spec, s, 1e-4).unwrap();
        assert!((d + 2.0 / PI).abs() < 5e-3);
        assert!((d + 2.0 / PI + 4.0 * s / (PI * PI)).abs() < 1e-4, "{d}");
        let dx = dlogdet_dx(&spec, s, 1e-4).unwrap();
        assert!(
            (dx + 2.0 * s / PI + 4.0 * s * s / (PI * PI)).abs() < 1e-6,
            "{dx}"
        );
    }

    #[test]
    fn cubic_sine_spectral_convergence() {
        let spec = KernelSpec::cubic_sine(1.0, 1.0).unwrap();
        let a = log_det(&spec, 1.0, 64).unwrap().log_det;
        let b = log_det(&spec, 1.0, 128).unwrap().log_det;
        assert!((a - b).to_f64().abs() < 1e-10);
    }

    #[test]
    fn t0_matches_sine_bitwise() {
        let a = log_det(&KernelSpec::sine(1.3), 1.7, 48).unwrap();
        let b = log_det(&KernelSpec::cubic_sine(0.0, 1.3).unwrap(), 1.7, 48).unwrap();
        assert_eq!(a.log_det, b.log_det);
        let da = dlogdet_dx(&KernelSpec::sine(1.3), 1.0, 1e-3).unwrap();
        let db = dlogdet_dx(&KernelSpec::cubic_sine(0.0, 1.3).unwrap(), 1.0, 1e-3).unwrap();
        assert_eq!(da.to_bits(), db.to_bits());
    }

    #[test]
    fn decreasing_in_s() {
        let spec = KernelSpec::cubic_sine(1.0, 0.5).unwrap();
        let vals: Vec<f64> = [0.5, 1.0, 1.5, 2.0]
            .iter()
            .map(|&s| log_det_converged(&spec, s).unwrap().log_det.to_f64())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    }

    #[test]
    fn input_checks() {
        let spec = KernelSpec::cubic_sine(1.0, 0.0).unwrap();
        assert!(log_det(&spec, 2.5, 32).is_err());
        assert!(log_det(&spec, 1.0, 4).is_err());
        assert!(log_det(&spec, 1.0, 401).is_err());
        assert!(log_det(&spec, -0.1, 32).is_err());
        assert!(dlogdet_ds(&spec, 1.0, 1e-2).is_err());
        assert!(dlogdet_ds(&spec, 1e-4, 1e-3).is_err());
        // the sine kernel reaches much wider intervals
        assert!(log_det(&KernelSpec::sine(1.0), 6.0, 64).is_ok());
    }

    #[test]
    fn negative_kernel_is_an_integrity_error() {
        let r = log_det(&KernelSpec::sine(-1.0), 0.5, 16);
        assert!(matches!(r, Err(Error::Integrity(_))));
    }
}

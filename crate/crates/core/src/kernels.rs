//! Sine, cubic-sine and Painlevé II kernels.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::painleve2::HastingsMcLeodSolution;
use crate::psi::{PsiField, LAMBDA_MAX};

/// Below this separation the kernel is read off the diagonal at the midpoint.
pub const TAYLOR_RADIUS: f64 = 1e-6;
/// Largest imaginary residue tolerated in a PII kernel value.
pub const IMAG_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone)]
pub enum KernelSpec {
    Sine { x: f64 },
    CubicSine { t: f64, x: f64 },
    Pii { field: Arc<PsiField> },
}

impl KernelSpec {
    pub fn sine(x: f64) -> Self {
        Self::Sine { x }
    }

    pub fn cubic_sine(t: f64, x: f64) -> Result<Self> {
        check_range("t", t, 0.0, 1.0)?;
        Ok(Self::CubicSine { t, x })
    }

    pub fn pii(hm: Arc<HastingsMcLeodSolution>, x: f64, radius: f64) -> Result<Self> {
        Ok(Self::Pii {
            field: Arc::new(PsiField::new(hm, x, radius)?),
        })
    }

    pub fn x(&self) -> f64 {
        match self {
            Self::Sine { x } | Self::CubicSine { x, .. } => *x,
            Self::Pii { field } => field.x(),
        }
    }

    /// The same family at a shifted `x`.
    pub fn with_x(&self, x: f64) -> Result<Self> {
        Ok(match self {
            Self::Sine { .. } => Self::Sine { x },
            Self::CubicSine { t, .. } => Self::CubicSine { t: *t, x },
            Self::Pii { field } => Self::Pii {
                field: Arc::new(field.at_x(x)?),
            },
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sine { .. } => "sine",
            Self::CubicSine { .. } => "csin",
            Self::Pii { .. } => "pii",
        }
    }

    /// Largest half-width at which a determinant is evaluated.
    ///
    /// The sine kernel's log-determinant only grows like `s^2`, so it gets a
    /// much wider range than the sextic-growth kernels.
    pub fn max_half_width(&self) -> f64 {
        match self {
            Self::Sine { .. } | Self::CubicSine { t: 0.0, .. } => 12.0,
            _ => 2.4,
        }
    }

    /// Computes whatever per-node data the kernel needs, in parallel.
    pub fn prepare(&self, nodes: &[f64]) -> Result<()> {
        match self {
            Self::Pii { field } => field.precompute(nodes),
            _ => Ok(()),
        }
    }
}

fn check_point(spec: &KernelSpec, lambda: f64) -> Result<()> {
    let max = match spec {
        KernelSpec::Pii { .. } => LAMBDA_MAX,
        _ => spec.max_half_width(),
    };
    check_range("lambda", lambda.abs(), 0.0, max)
}

/// `(4/3) t (l^2 + l m + m^2) + x`, the phase divided by `l - m`.
/// Grouped so that swapping the arguments is bitwise neutral.
#[inline]
fn cubic_phase_factor(t: f64, x: f64, lambda: f64, mu: f64) -> f64 {
    (4.0 / 3.0) * t * ((lambda * lambda + mu * mu) + lambda * mu) + x
}

fn real_part_checked(z: Complex64, scale: f64) -> Result<f64> {
    if (z.im / scale).abs() > IMAG_TOLERANCE || !z.re.is_finite() {
        return Err(Error::Integrity(format!(
            "PII kernel value {} + {}i is not real",
            z.re / scale,
            z.im / scale
        )));
    }
    Ok(z.re / scale)
}

pub fn kernel_eval(spec: &KernelSpec, lambda: f64, mu: f64) -> Result<f64> {
    check_point(spec, lambda)?;
    check_point(spec, mu)?;
    let d = lambda - mu;
    if d.abs() < TAYLOR_RADIUS {
        return kernel_diag(spec, 0.5 * (lambda + mu));
    }
    match spec {
        KernelSpec::Sine { x } => {
            Ok((d * cubic_phase_factor(0.0, *x, lambda, mu)).sin() / (PI * d))
        }
        KernelSpec::CubicSine { t, x } => {
            Ok((d * cubic_phase_factor(*t, *x, lambda, mu)).sin() / (PI * d))
        }
        KernelSpec::Pii { field } => real_part_checked(pii_kernel_complex(field, lambda, mu)?, 1.0),
    }
}

/// The PII kernel before taking the real part; off the diagonal only.
pub fn pii_kernel_complex(field: &PsiField, lambda: f64, mu: f64) -> Result<Complex64> {
    let a = field.psi_column(lambda)?;
    let b = field.psi_column(mu)?;
    // psi21(l) psi11(m) - psi21(m) psi11(l), sharing e^{-i(theta_l + theta_m)}
    let num = a.phi2 * b.phi1 - b.phi2 * a.phi1;
    let phase = (Complex64::new(0.0, -1.0) * (a.theta + b.theta)).exp();
    Ok(num * phase / (2.0 * PI * (lambda - mu)))
}

pub fn kernel_diag(spec: &KernelSpec, lambda: f64) -> Result<f64> {
    check_point(spec, lambda)?;
    match spec {
        KernelSpec::Sine { x } => Ok(x / PI),
        KernelSpec::CubicSine { t, x } => Ok((4.0 * t * lambda * lambda + x) / PI),
        KernelSpec::Pii { field } => {
            let col = field.psi_column(lambda)?;
            let d = field.phi_derivative(&col);
            // the theta' terms cancel in psi21' psi11 - psi11' psi21
            let num = d[1] * col.phi1 - d[0] * col.phi2;
            let phase = (Complex64::new(0.0, -2.0) * col.theta).exp();
            real_part_checked(num * phase, 2.0 * PI)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::painleve2::HmWindow;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn hm() -> Arc<HastingsMcLeodSolution> {
        static HM: OnceLock<Arc<HastingsMcLeodSolution>> = OnceLock::new();
        HM.get_or_init(|| Arc::new(HmWindow::default().solve().unwrap()))
            .clone()
    }

    fn pii(x: f64) -> KernelSpec {
        KernelSpec::pii(hm(), x, 8.0).unwrap()
    }

    #[test]
    fn cubic_sine_zero_at_pi() {
        let k = KernelSpec::cubic_sine(0.0, PI).unwrap();
        assert!(kernel_eval(&k, 0.5, -0.5).unwrap().abs() < 1e-16);
    }

    #[test]
    fn diagonal_values() {
        assert_eq!(kernel_diag(&KernelSpec::sine(PI), 0.3).unwrap(), 1.0);
        let k = KernelSpec::cubic_sine(1.0, 0.0).unwrap();
        assert_eq!(kernel_diag(&k, 1.0).unwrap(), 4.0 / PI);
    }

    #[test]
    fn taylor_switch_is_continuous() {
        let k = KernelSpec::cubic_sine(1.0, 1.3).unwrap();
        for &l in &[-1.7, 0.0, 0.4, 2.2] {
            let near = kernel_eval(&k, l + 5e-8, l - 5e-8).unwrap();
            assert!((near - kernel_diag(&k, l).unwrap()).abs() < 1e-9);
            let inside = kernel_eval(&k, l + 0.4995e-6, l - 0.4995e-6).unwrap();
            let outside = kernel_eval(&k, l + 0.5005e-6, l - 0.5005e-6).unwrap();
            assert!((inside - outside).abs() < 1e-9);
        }
        let p = pii(0.0);
        let inside = kernel_eval(&p, 0.5 + 0.4995e-6, 0.5 - 0.4995e-6).unwrap();
        let outside = kernel_eval(&p, 0.5 + 0.5005e-6, 0.5 - 0.5005e-6).unwrap();
        assert!((inside - outside).abs() < 1e-9, "{inside} {outside}");
    }

    #[test]
    fn cubic_sine_t0_is_sine_bitwise() {
        let a = KernelSpec::sine(1.7);
        let b = KernelSpec::cubic_sine(0.0, 1.7).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let (l, m) = (-2.0 + 0.21 * i as f64, -1.9 + 0.2 * j as f64);
                let ka = kernel_eval(&a, l, m).unwrap();
                let kb = kernel_eval(&b, l, m).unwrap();
                assert_eq!(ka.to_bits(), kb.to_bits());
            }
        }
    }

    #[test]
    fn pii_degenerates_to_cubic_sine_at_large_x() {
        let p = pii(8.0);
        let c = KernelSpec::cubic_sine(1.0, 8.0).unwrap();
        let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
        for &l in &grid {
            for &m in &grid {
                let kp = kernel_eval(&p, l, m).unwrap();
                let kc = kernel_eval(&c, l, m).unwrap();
                assert!((kp - kc).abs() <= 1e-4, "{l} {m}: {kp} {kc}");
            }
        }
        assert!((kernel_diag(&p, 0.0).unwrap() - 8.0 / PI).abs() <= 1e-4);
    }

    #[test]
    fn pii_diagonal_is_nonnegative() {
        for x in [-2.0, -1.0, 0.0, 1.0, 4.0, 8.0] {
            let p = pii(x);
            for i in 0..=20 {
                let l = -2.0 + 0.2 * i as f64;
                let d = kernel_diag(&p, l).unwrap();
                assert!(d >= 0.0, "x = {x}, lambda = {l}: {d}");
            }
        }
    }

    #[test]
    fn with_x_and_ranges() {
        let p = pii(0.0);
        let q = p.with_x(0.5).unwrap();
        assert_eq!(q.x(), 0.5);
        assert!(KernelSpec::cubic_sine(1.5, 0.0).is_err());
        assert!(kernel_eval(&KernelSpec::sine(1.0), 12.5, 0.0).is_err());
        assert!(kernel_eval(&KernelSpec::cubic_sine(1.0, 0.0).unwrap(), 4.5, 0.0).is_err());
        assert!(kernel_eval(&p, 4.5, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn symmetric(l in -2.4f64..2.4, m in -2.4f64..2.4, x in -2.0f64..4.0, t in 0.0f64..1.0) {
            let c = KernelSpec::cubic_sine(t, x).unwrap();
            prop_assert_eq!(kernel_eval(&c, l, m).unwrap(), kernel_eval(&c, m, l).unwrap());
            let s = KernelSpec::sine(x);
            prop_assert_eq!(kernel_eval(&s, l, m).unwrap(), kernel_eval(&s, m, l).unwrap());
        }

        #[test]
        fn pii_symmetric(l in -2.4f64..2.4, m in -2.4f64..2.4) {
            static P: OnceLock<KernelSpec> = OnceLock::new();
            let p = P.get_or_init(|| pii(0.5));
            let a = kernel_eval(p, l, m).unwrap();
            let b = kernel_eval(p, m, l).unwrap();
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }
}

//! First column of the Painlevé II Lax-pair solution `Psi(lambda, x)` at
//! real `lambda`.
//!
//! With `theta = (4/3) lambda^3 + x lambda` the column is carried in the
//! phase-extracted form `phi = psi e^{i theta}`, which satisfies
//! `phi' = B phi` with
//!
//! ```text
//! B = [ -2i u^2              4i lambda u - 2 u_x          ]
//!     [ -4i lambda u - 2 u_x  8i lambda^2 + 2i x + 2i u^2 ]
//! ```
//!
//! It is started at `lambda = iR`, where it is recessive, from the formal
//! expansion `phi ~ sum a_k lambda^{-k}`, `a_0 = (1, 0)`, and integrated
//! to the origin and then along the real axis.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::ode::{self, Tolerance};
use crate::painleve2::HastingsMcLeodSolution;

pub const DEFAULT_RADIUS: f64 = 8.0;
pub const LAMBDA_MAX: f64 = 4.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const SERIES_TERMS: usize = 80;

type Pair = [Complex64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseExtractedColumn {
    pub lambda: Complex64,
    pub phi1: Complex64,
    pub phi2: Complex64,
    pub theta: Complex64,
}

impl PhaseExtractedColumn {
    fn phase(&self) -> Complex64 {
        (-I * self.theta).exp()
    }

    pub fn psi11(&self) -> Complex64 {
        self.phi1 * self.phase()
    }

    pub fn psi21(&self) -> Complex64 {
        self.phi2 * self.phase()
    }
}

pub fn theta(lambda: Complex64, x: f64) -> Complex64 {
    lambda * (lambda * lambda * (4.0 / 3.0) + x)
}

/// Lax data at one `x` plus a cache of evaluated columns.
pub struct PsiField {
    x: f64,
    u: f64,
    u_x: f64,
    v: f64,
    radius: f64,
    tol: Tolerance,
    hm: Option<Arc<HastingsMcLeodSolution>>,
    series: Vec<Complex64>,
    origin: OnceLock<Result<Pair>>,
    origin_second: OnceLock<Result<Pair>>,
    cache: RwLock<HashMap<u64, PhaseExtractedColumn>>,
}

impl std::fmt::Debug for PsiField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PsiField")
            .field("x", &self.x)
            .field("u", &self.u)
            .field("u_x", &self.u_x)
            .field("v", &self.v)
            .field("radius", &self.radius)
            .finish_non_exhaustive()
    }
}

impl PsiField {
    /// Field at `x` with `u`, `u_x`, `v` read off the Hastings–McLeod solution.
    pub fn new(hm: Arc<HastingsMcLeodSolution>, x: f64, radius: f64) -> Result<Self> {
        check_range("x", x, hm.x_left + 2.0, hm.x_right)?;
        let (u, u_x, v) = (hm.u_at(x)?, hm.u_x_at(x)?, hm.v_at(x)?);
        let mut field = Self::from_values(x, u, u_x, v, radius)?;
        field.hm = Some(hm);
        Ok(field)
    }

    /// Field from raw Painlevé data; `u = u_x = v = 0` gives the free case.
    pub fn from_values(x: f64, u: f64, u_x: f64, v: f64, radius: f64) -> Result<Self> {
        check_range("psi radius", radius, 4.0, 64.0)?;
        for (what, value) in [("x", x), ("u", u), ("u_x", u_x), ("v", v)] {
            if !value.is_finite() {
                return Err(Error::Domain(format!("{what} is not finite")));
            }
        }
        Ok(Self {
            x,
            u,
            u_x,
            v,
            radius,
            tol: Tolerance::default(),
            hm: None,
            series: formal_series(x, u, u_x, SERIES_TERMS),
            origin: OnceLock::new(),
            origin_second: OnceLock::new(),
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// The same Hastings–McLeod data at another `x`.
    pub fn at_x(&self, x: f64) -> Result<Self> {
        match &self.hm {
            Some(hm) => Self::new(Arc::clone(hm), x, self.radius),
            None => Err(Error::Domain("field was built from raw values".into())),
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn u_x(&self) -> f64 {
        self.u_x
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn hm(&self) -> Option<&Arc<HastingsMcLeodSolution>> {
        self.hm.as_ref()
    }

    fn b_matrix(&self, lambda: Complex64) -> [[Complex64; 2]; 2] {
        let u = self.u;
        let u2 = u * u;
        [
            [I * (-2.0 * u2), I * lambda * (4.0 * u) - 2.0 * self.u_x],
            [
                -I * lambda * (4.0 * u) - 2.0 * self.u_x,
                I * (lambda * lambda * 8.0 + 2.0 * self.x + 2.0 * u2),
            ],
        ]
    }

    /// `phi' = B phi` for the first column.
    pub fn phi_rhs(&self, lambda: Complex64, phi: &Pair) -> Pair {
        let b = self.b_matrix(lambda);
        [
            b[0][0] * phi[0] + b[0][1] * phi[1],
            b[1][0] * phi[0] + b[1][1] * phi[1],
        ]
    }

    /// `chi' = (B - 2i(4 lambda^2 + x)) chi` for `chi = psi_2 e^{-i theta}`.
    fn chi_rhs(&self, lambda: Complex64, chi: &Pair) -> Pair {
        let mut r = self.phi_rhs(lambda, chi);
        let shift = I * (lambda * lambda * 4.0 + self.x) * 2.0;
        r[0] -= shift * chi[0];
        r[1] -= shift * chi[1];
        r
    }

    /// Formal expansion of the first column at `lambda`, summed to its
    /// smallest term.
    fn series_first(&self, lambda: Complex64) -> Pair {
        sum_series(&self.series, lambda, false)
    }

    /// Second column, `b_k = swap(conj(a_k))`.
    fn series_second(&self, lambda: Complex64) -> Pair {
        sum_series(&self.series, lambda, true)
    }

    fn segment(&self, second: bool, from: Complex64, to: Complex64, start: Pair) -> Result<Pair> {
        let d = to - from;
        let rhs = |t: f64, y: &Pair| {
            let lambda = from + d * t;
            let r = if second {
                self.chi_rhs(lambda, y)
            } else {
                self.phi_rhs(lambda, y)
            };
            [r[0] * d, r[1] * d]
        };
        match ode::integrate(rhs, 0.0, 1.0, start, self.tol) {
            Ok(sol) => Ok(sol.y),
            Err(e) => {
                let at = from + d * e.t;
                Err(Error::Stiffness {
                    re: at.re,
                    im: at.im,
                })
            }
        }
    }

    fn start_first(&self) -> Complex64 {
        I * self.radius
    }

    fn start_second(&self) -> Complex64 {
        Complex64::from_polar(self.radius, std::f64::consts::FRAC_PI_6)
    }

    /// First column integrated from `iR` through the given waypoints.
    pub fn column_along(&self, waypoints: &[Complex64]) -> Result<Pair> {
        let mut at = self.start_first();
        let mut y = self.series_first(at);
        for &w in waypoints {
            y = self.segment(false, at, w, y)?;
            at = w;
        }
        Ok(y)
    }

    /// Second column (`chi = psi_2 e^{-i theta}`) integrated from
    /// `R e^{i pi/6}`, where it is recessive, through the waypoints.
    pub fn second_column_along(&self, waypoints: &[Complex64]) -> Result<Pair> {
        let mut at = self.start_second();
        let mut y = self.series_second(at);
        for &w in waypoints {
            y = self.segment(true, at, w, y)?;
            at = w;
        }
        Ok(y)
    }

    fn origin(&self) -> Result<Pair> {
        self.origin
            .get_or_init(|| self.column_along(&[Complex64::new(0.0, 0.0)]))
            .clone()
    }

    fn origin_second(&self) -> Result<Pair> {
        self.origin_second
            .get_or_init(|| self.second_column_along(&[Complex64::new(0.0, 0.0)]))
            .clone()
    }

    fn solve_column(&self, lambda: f64) -> Result<PhaseExtractedColumn> {
        let phi0 = self.origin()?;
        let l = Complex64::new(lambda, 0.0);
        let phi = self.segment(false, Complex64::new(0.0, 0.0), l, phi0)?;
        Ok(PhaseExtractedColumn {
            lambda: l,
            phi1: phi[0],
            phi2: phi[1],
            theta: theta(l, self.x),
        })
    }

    /// Phase-extracted first column at real `lambda`, cached by exact value.
    pub fn psi_column(&self, lambda: f64) -> Result<PhaseExtractedColumn> {
        check_range("lambda", lambda.abs(), 0.0, LAMBDA_MAX)?;
        let key = lambda.to_bits();
        if let Some(col) = self.cache.read().expect("psi cache poisoned").get(&key) {
            return Ok(*col);
        }
        let col = self.solve_column(lambda)?;
        self.cache
            .write()
            .expect("psi cache poisoned")
            .insert(key, col);
        Ok(col)
    }

    /// Same as [`psi_column`](Self::psi_column) but never touches the cache.
    pub fn psi_column_fresh(&self, lambda: f64) -> Result<PhaseExtractedColumn> {
        check_range("lambda", lambda.abs(), 0.0, LAMBDA_MAX)?;
        self.solve_column(lambda)
    }

    /// Fills the cache for many points in parallel.
    pub fn precompute(&self, lambdas: &[f64]) -> Result<()> {
        lambdas
            .par_iter()
            .try_for_each(|&l| self.psi_column(l).map(|_| ()))
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().expect("psi cache poisoned").len()
    }

    /// `phi' = B phi` at a cached column.
    pub fn phi_derivative(&self, col: &PhaseExtractedColumn) -> Pair {
        self.phi_rhs(col.lambda, &[col.phi1, col.phi2])
    }

    /// `d/d lambda (psi11, psi21)` from the Lax equation `psi' = A psi`.
    pub fn psi_column_derivative(&self, lambda: f64) -> Result<(Complex64, Complex64)> {
        let col = self.psi_column(lambda)?;
        let d = self.phi_derivative(&col);
        // psi' = (phi' - i theta' phi) e^{-i theta}
        let theta_p = col.lambda * col.lambda * 4.0 + self.x;
        let phase = col.phase();
        Ok((
            (d[0] - I * theta_p * col.phi1) * phase,
            (d[1] - I * theta_p * col.phi2) * phase,
        ))
    }

    /// `det Psi(lambda)` from both columns propagated independently.
    pub fn determinant(&self, lambda: f64) -> Result<Complex64> {
        let col = self.psi_column(lambda)?;
        let l = Complex64::new(lambda, 0.0);
        let chi0 = self.origin_second()?;
        let chi = self.segment(true, Complex64::new(0.0, 0.0), l, chi0)?;
        Ok(col.phi1 * chi[1] - col.phi2 * chi[0])
    }
}

/// Coefficients `a_k` of the formal solution `phi = sum a_k lambda^{-k}`,
/// stored interleaved as `[a_0^1, a_0^2, a_1^1, ...]`.
fn formal_series(x: f64, u: f64, u_x: f64, terms: usize) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut a1 = vec![zero; terms];
    let mut a2 = vec![zero; terms];
    a1[0] = Complex64::new(1.0, 0.0);
    let get = |v: &[Complex64], k: isize| if k < 0 { zero } else { v[k as usize] };
    let q = x + u * u;
    for j in 1..terms {
        let jj = j as isize;
        let rhs2 = -get(&a2, jj - 3) * (j as f64 - 3.0)
            + I * (4.0 * u) * a1[j - 1]
            + get(&a1, jj - 2) * (2.0 * u_x)
            - I * (2.0 * q) * get(&a2, jj - 2);
        a2[j] = rhs2 / (I * 8.0);
        let bracket = -get(&a2, jj - 2) * (j as f64 - 2.0) + a1[j - 1] * (2.0 * u_x)
            - I * (2.0 * q) * a2[j - 1];
        let rhs1 = a2[j - 1] * (0.5 * u * (j as f64 - 1.0))
            + I * (u * q) * a2[j]
            + bracket * u_x / (I * 4.0);
        a1[j] = rhs1 / j as f64;
    }
    a1.into_iter().zip(a2).flat_map(|(p, q)| [p, q]).collect()
}

fn sum_series(coeffs: &[Complex64], lambda: Complex64, swap_conj: bool) -> Pair {
    let inv = lambda.inv();
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = [Complex64::new(0.0, 0.0); 2];
    let mut last = f64::INFINITY;
    for k in coeffs.chunks_exact(2) {
        let (c1, c2) = if swap_conj {
            (k[1].conj(), k[0].conj())
        } else {
            (k[0], k[1])
        };
        let t1 = c1 * power;
        let t2 = c2 * power;
        let size = t1.norm().max(t2.norm());
        if size > last {
            break;
        }
        sum[0] += t1;
        sum[1] += t2;
        if size < 1e-18 {
            break;
        }
        last = size.max(f64::MIN_POSITIVE);
        power *= inv;
    }
    sum
}

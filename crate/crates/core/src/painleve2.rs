//! The Hastings–McLeod solution of Painlevé II, `u'' = x u + 2 u^3`,
//! with `u ~ Ai(x)` at `+inf` and `u ~ sqrt(-x/2)` at `-inf`.
//!
//! The boundary-value problem is discretized on a uniform grid with the
//! fourth-order Numerov scheme and solved by damped Newton iteration
//! (the Jacobian is tridiagonal). Boundary values are `Ai(x_right)` on the
//! right and the leading asymptote `sqrt(-x_left/2)` on the left; the
//! truncation error of the latter decays like `exp(-sqrt(-2 x_left) d)` at
//! distance `d` from the left end, so results are meant to be read on
//! `[x_left + 2, x_right]`.

use crate::error::{check_range, Error, Result};
use crate::mpnum::ExtendedReal;
use crate::specfun::{airy_ai, airy_ai_prime};

/// Domain and spacing of a Hastings–McLeod solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmWindow {
    pub x_left: f64,
    pub x_right: f64,
    pub h: f64,
}

impl Default for HmWindow {
    fn default() -> Self {
        Self {
            x_left: -10.0,
            x_right: 8.0,
            h: 1.0 / 200.0,
        }
    }
}

impl HmWindow {
    pub fn solve(&self) -> Result<HastingsMcLeodSolution> {
        solve_hm(self.x_left, self.x_right, self.h)
    }
}

/// Converged grid solution with `u`, `u_x` and `v = u_x^2 - x u^2 - u^4`.
#[derive(Debug, Clone)]
pub struct HastingsMcLeodSolution {
    pub x_left: f64,
    pub x_right: f64,
    /// Actual grid spacing, `(x_right - x_left) / n_cells`.
    pub h: f64,
    pub u: Vec<f64>,
    pub u_x: Vec<f64>,
    pub v: Vec<f64>,
    /// `int_{x_i}^{x_right} u^2` and `int_{x_i}^{x_right} y u^2` on the grid.
    mass: Vec<f64>,
    moment: Vec<f64>,
    /// The same integrals over `[x_right, inf)` with `u = Ai`.
    tail_mass: f64,
    tail_moment: f64,
    /// Max-norm of the discrete residual in `u'' - x u - 2 u^3` units.
    pub residual: f64,
    pub newton_iterations: usize,
}

const NEWTON_MAX_ITER: usize = 60;
const NEWTON_TOL: f64 = 1e-10;

#[inline]
fn rhs(x: f64, u: f64) -> f64 {
    x * u + 2.0 * u * u * u
}

#[inline]
fn rhs_du(x: f64, u: f64) -> f64 {
    x + 6.0 * u * u
}

/// Numerov residual `F_i / h^2` at the interior nodes. The second
/// difference is formed exactly so the residual floor does not grow
/// like `eps / h^2`.
fn numerov_residual(x: &[f64], u: &[f64], h: f64, out: &mut [f64]) {
    let c = h * h / 12.0;
    let f: Vec<f64> = x.iter().zip(u).map(|(&xi, &ui)| rhs(xi, ui)).collect();
    for i in 1..u.len() - 1 {
        let d2 = (ExtendedReal::from_f64(u[i + 1]) + u[i - 1] - 2.0 * u[i]).to_f64();
        out[i] = (d2 - c * (f[i + 1] + 10.0 * f[i] + f[i - 1])) / (h * h);
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &a| m.max(a.abs()))
}

/// Solves `sub[i] y[i-1] + diag[i] y[i] + sup[i] y[i+1] = rhs[i]` in place.
fn solve_tridiagonal(sub: &[f64], diag: &mut [f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    }
}

fn initial_guess(x: f64) -> f64 {
    // sqrt(-x/2) on the left, smoothly continued to a positive tail
    let left = ((x * x + 1.0).sqrt() - x) / 4.0;
    let sigma = 1.0 / (1.0 + (-2.0 * x).exp());
    let ai = airy_ai(x.clamp(-10.0, 40.0)).unwrap_or(0.0);
    (1.0 - sigma) * left.sqrt() + sigma * ai
}

/// Solves the Hastings–McLeod boundary-value problem on `[x_left, x_right]`.
pub fn solve_hm(x_left: f64, x_right: f64, h: f64) -> Result<HastingsMcLeodSolution> {
    check_range("x_left", x_left, f64::MIN, -8.0)?;
    check_range("x_right", x_right, 6.0, 40.0)?;
    check_range("h", h, f64::MIN_POSITIVE, 0.01)?;
    let cells = ((x_right - x_left) / h).round() as usize;
    let h = (x_right - x_left) / cells as f64;
    let n = cells + 1;
    let x: Vec<f64> = (0..n).map(|i| x_left + i as f64 * h).collect();

    let mut u: Vec<f64> = x.iter().map(|&xi| initial_guess(xi)).collect();
    u[0] = (-x_left / 2.0).sqrt();
    u[n - 1] = airy_ai(x_right)?;

    let c = h * h / 12.0;
    let mut res = vec![0.0; n];
    numerov_residual(&x, &u, h, &mut res);
    let mut norm = max_abs(&res[1..n - 1]);
    let mut trace = vec![norm];
    let mut growth = 0;
    let mut iterations = 0;
    // one ulp of u moves the residual by ~eps |u| / h^2; below that Newton stalls
    let floor = NEWTON_TOL.max(64.0 * f64::EPSILON * u[0].max(1.0) / (h * h));

    let m = n - 2;
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    let mut delta = vec![0.0; m];
    let mut trial = u.clone();

    while iterations < NEWTON_MAX_ITER {
        iterations += 1;
        for k in 0..m {
            let i = k + 1;
            sub[k] = 1.0 - c * rhs_du(x[i - 1], u[i - 1]);
            diag[k] = -2.0 - 10.0 * c * rhs_du(x[i], u[i]);
            sup[k] = 1.0 - c * rhs_du(x[i + 1], u[i + 1]);
            delta[k] = -res[i] * h * h;
        }
        solve_tridiagonal(&sub, &mut diag, &sup, &mut delta);
        let step_size = max_abs(&delta);

        // damping by step halving
        let mut lambda = 1.0;
        let mut new_norm = f64::INFINITY;
        for _ in 0..30 {
            for k in 0..m {
                trial[k + 1] = u[k + 1] + lambda * delta[k];
            }
            numerov_residual(&x, &trial, h, &mut res);
            new_norm = max_abs(&res[1..n - 1]);
            if new_norm < norm || new_norm <= NEWTON_TOL * 1e-2 {
                break;
            }
            lambda *= 0.5;
        }
        trace.push(new_norm);
        if new_norm >= norm {
            // stalled at the rounding floor: accept the current iterate
            if norm <= floor {
                break;
            }
            growth += 1;
        } else {
            growth = 0;
        }
        if !new_norm.is_finite() || growth >= 5 {
            return Err(Error::NewtonDivergence { trace });
        }
        if new_norm < norm {
            std::mem::swap(&mut u, &mut trial);
            norm = new_norm;
        }
        // converged once the residual is small and Newton has stopped moving
        if norm <= NEWTON_TOL && lambda * step_size <= 1e-13 {
            break;
        }
    }
    if norm > floor {
        return Err(Error::NewtonDivergence { trace });
    }
    if let Some(i) = u.iter().position(|&ui| ui <= 0.0) {
        return Err(Error::WrongBranch {
            x: x[i],
            value: u[i],
        });
    }

    let u_x = derivative_4th_order(&u, h);
    let v: Vec<f64> = (0..n)
        .map(|i| u_x[i] * u_x[i] - x[i] * u[i] * u[i] - u[i].powi(4))
        .collect();
    let sq: Vec<f64> = u.iter().map(|&ui| ui * ui).collect();
    let ysq: Vec<f64> = x.iter().zip(&sq).map(|(&xi, &s)| xi * s).collect();
    let mass = cumulative_from_right(&sq, h);
    let moment = cumulative_from_right(&ysq, h);

    let ai = airy_ai(x_right)?;
    let aip = airy_ai_prime(x_right)?;
    // int_X^inf Ai^2 = Ai'(X)^2 - X Ai(X)^2
    // int_X^inf y Ai^2 = -(X^2 Ai^2 - X Ai'^2 + Ai Ai') / 3
    let tail_mass = aip * aip - x_right * ai * ai;
    let tail_moment = -(x_right * x_right * ai * ai - x_right * aip * aip + ai * aip) / 3.0;

    Ok(HastingsMcLeodSolution {
        x_left,
        x_right,
        h,
        u,
        u_x,
        v,
        mass,
        moment,
        tail_mass,
        tail_moment,
        residual: norm,
        newton_iterations: iterations,
    })
}

/// Five-point derivative, one-sided at the two nodes next to each end.
fn derivative_4th_order(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let mut d = vec![0.0; n];
    let s = 12.0 * h;
    for i in 2..n - 2 {
        d[i] = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / s;
    }
    d[0] = (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) / s;
    d[1] = (-3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]) / s;
    d[n - 1] = (25.0 * u[n - 1] - 48.0 * u[n - 2] + 36.0 * u[n - 3] - 16.0 * u[n - 4]
        + 3.0 * u[n - 5])
        / s;
    d[n - 2] = (3.0 * u[n - 1] + 10.0 * u[n - 2] - 18.0 * u[n - 3] + 6.0 * u[n - 4] - u[n - 5]) / s;
    d
}

/// Fourth-order integral of one grid cell `[x_i, x_{i+1}]`.
fn cell_integral(f: &[f64], i: usize, h: f64) -> f64 {
    let n = f.len();
    if i == 0 {
        h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
    } else if i == n - 2 {
        h / 24.0 * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1])
    } else {
        h / 24.0 * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2])
    }
}

/// `out[i] = int_{x_i}^{x_last} f`.
fn cumulative_from_right(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in (0..n - 1).rev() {
        out[i] = out[i + 1] + cell_integral(f, i, h);
    }
    out
}

impl HastingsMcLeodSolution {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x_left + i as f64 * self.h
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.x_at(i))
    }

    fn check_window(&self, x: f64) -> Result<()> {
        check_range("x", x, self.x_left, self.x_right)
    }

    /// Four-point Lagrange interpolation of a grid column.
    fn interpolate(&self, col: &[f64], x: f64) -> f64 {
        let n = col.len();
        let t = (x - self.x_left) / self.h;
        let i = (t.floor() as isize).clamp(1, n as isize - 3) as usize;
        let s = t - i as f64;
        let (a, b, c, d) = (col[i - 1], col[i], col[i + 1], col[i + 2]);
        // nodes at s = -1, 0, 1, 2
        -s * (s - 1.0) * (s - 2.0) / 6.0 * a + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * b
            - (s + 1.0) * s * (s - 2.0) / 2.0 * c
            + (s + 1.0) * s * (s - 1.0) / 6.0 * d
    }

    pub fn u_at(&self, x: f64) -> Result<f64> {
        self.check_window(x)?;
        Ok(self.interpolate(&self.u, x))
    }

    pub fn u_x_at(&self, x: f64) -> Result<f64> {
        self.check_window(x)?;
        Ok(self.interpolate(&self.u_x, x))
    }

    /// `v(x) = u_x^2 - x u^2 - u^4`, cubically interpolated from the grid.
    pub fn v_at(&self, x: f64) -> Result<f64> {
        self.check_window(x)?;
        Ok(self.interpolate(&self.v, x))
    }

    /// `int_x^inf u(y)^2 dy`, grid quadrature plus the Airy tail.
    pub fn mass_at(&self, x: f64) -> Result<f64> {
        self.check_window(x)?;
        let (i, partial) = self.partial_cell(x, |_, u2| u2);
        Ok(partial + self.mass[i + 1] + self.tail_mass)
    }

    /// The Tracy–Widom integral `int_x^inf (y - x) u(y)^2 dy`.
    pub fn tw_integral(&self, x: f64) -> Result<f64> {
        check_range("x", x, self.x_left + 1.0, self.x_right - 1.0)?;
        let (i, partial) = self.partial_cell(x, |y, u2| (y - x) * u2);
        let grid = self.moment[i + 1] - x * self.mass[i + 1];
        let tail = self.tail_moment - x * self.tail_mass;
        Ok((partial + grid + tail).max(0.0))
    }

    /// Integral of `g(y, u(y)^2)` from `x` to the next grid node, by
    /// four-point Gauss–Legendre on the interpolated `u`.
    fn partial_cell(&self, x: f64, g: impl Fn(f64, f64) -> f64) -> (usize, f64) {
        let n = self.len();
        let t = (x - self.x_left) / self.h;
        let i = (t.floor() as usize).min(n - 2);
        let b = self.x_at(i + 1);
        if b <= x {
            return (i, 0.0);
        }
        const NODES: [f64; 4] = [
            -0.861_136_311_594_052_6,
            -0.339_981_043_584_856_3,
            0.339_981_043_584_856_3,
            0.861_136_311_594_052_6,
        ];
        const WEIGHTS: [f64; 4] = [
            0.347_854_845_137_453_85,
            0.652_145_154_862_546_1,
            0.652_145_154_862_546_1,
            0.347_854_845_137_453_85,
        ];
        let half = 0.5 * (b - x);
        let mid = 0.5 * (b + x);
        let sum: f64 = NODES
            .iter()
            .zip(WEIGHTS)
            .map(|(&z, w)| {
                let y = mid + half * z;
                let uy = self.interpolate(&self.u, y);
                w * g(y, uy * uy)
            })
            .sum();
        (i, sum * half)
    }

    /// Recomputes the Numerov residual of the stored grid values.
    pub fn discrete_residual(&self) -> f64 {
        let x: Vec<f64> = self.grid().collect();
        let mut res = vec![0.0; self.len()];
        numerov_residual(&x, &self.u, self.h, &mut res);
        max_abs(&res[1..self.len() - 1])
    }
}

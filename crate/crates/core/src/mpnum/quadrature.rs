//! Gauss–Legendre rules with nodes and weights in double-double.

use super::ExtendedReal;
use crate::error::{check_range, Error, Result};

pub const MAX_ORDER: usize = 2000;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<ExtendedReal>,
    weights: Vec<ExtendedReal>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[ExtendedReal] {
        &self.nodes
    }

    pub fn weights(&self) -> &[ExtendedReal] {
        &self.weights
    }

    /// Nodes and weights mapped affinely to `(-s, s)`, rounded to binary64.
    pub fn scaled(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let nodes = self.nodes.iter().map(|x| (*x * s).to_f64()).collect();
        let weights = self.weights.iter().map(|w| (*w * s).to_f64()).collect();
        (nodes, weights)
    }

    /// Integrates `f` over `[a, b]` in double-double.
    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> ExtendedReal
    where
        F: FnMut(ExtendedReal) -> ExtendedReal,
    {
        let half = (ExtendedReal::from_f64(b) - a) * 0.5;
        let mid = (ExtendedReal::from_f64(b) + a) * 0.5;
        let sum: ExtendedReal = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        sum * half
    }
}

/// `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair_f64(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

fn legendre_pair(n: usize, x: ExtendedReal) -> (ExtendedReal, ExtendedReal) {
    let mut p_prev = ExtendedReal::ONE;
    let mut p = x;
    for k in 1..n {
        let next = (x * p * (2 * k + 1) as f64 - p_prev * k as f64) / (k + 1) as f64;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Generates the `n`-point Gauss–Legendre rule.
///
/// Roots are polished by Newton's method in binary64 from the usual
/// cosine guesses, then refined by three Newton steps in double-double.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    check_range("quadrature order", n as f64, 1.0, MAX_ORDER as f64)?;
    let mut nodes = vec![ExtendedReal::ZERO; n];
    let mut weights = vec![ExtendedReal::ZERO; n];
    let nf = n as f64;
    let half = n.div_ceil(2);
    for i in 0..half {
        // i-th largest root
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let is_middle = n % 2 == 1 && i == half - 1;
        if is_middle {
            x = 0.0;
        } else {
            let mut converged = false;
            for _ in 0..100 {
                let (p, pm1) = legendre_pair_f64(n, x);
                let dp = nf * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-3) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::QuadratureNewton { root: i, order: n });
            }
        }
        let mut xe = ExtendedReal::from_f64(x);
        for _ in 0..3 {
            let (p, pm1) = legendre_pair(n, xe);
            let dp = (xe * p - pm1) * nf / (xe * xe - 1.0);
            xe -= p / dp;
        }
        let (p, pm1) = legendre_pair(n, xe);
        let dp = (xe * p - pm1) * nf / (xe * xe - 1.0);
        let w = ExtendedReal::from_f64(2.0) / ((ExtendedReal::ONE - xe * xe) * dp * dp);
        nodes[n - 1 - i] = xe;
        nodes[i] = -xe;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok(QuadratureRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_rule() {
        let r = gauss_legendre(1).unwrap();
        assert_eq!(r.nodes(), &[ExtendedReal::ZERO]);
        assert!((r.weights()[0] - 2.0).to_f64().abs() < 1e-30);
    }

    #[test]
    fn two_point_rule() {
        let r = gauss_legendre(2).unwrap();
        let root = (ExtendedReal::ONE / 3.0).sqrt();
        assert!((r.nodes()[1] - root).to_f64().abs() < 1e-31);
        assert!((r.nodes()[0] + root).to_f64().abs() < 1e-31);
        assert!((r.weights()[0] - 1.0).to_f64().abs() < 1e-30);
        assert!((r.weights()[1] - 1.0).to_f64().abs() < 1e-30);
        assert!((r.nodes()[1].to_f64() - 0.577_350_269_189_625_8).abs() <= f64::EPSILON);
    }

    #[test]
    fn forty_point_weight_sum_and_high_moment() {
        let r = gauss_legendre(40).unwrap();
        let total: ExtendedReal = r.weights().iter().copied().sum();
        assert!((total - 2.0).to_f64().abs() < 1e-28);
        let moment: ExtendedReal = r
            .nodes()
            .iter()
            .zip(r.weights())
            .map(|(&x, &w)| w * x.powi(78))
            .sum();
        let exact = ExtendedReal::from_f64(2.0) / 79.0;
        assert!((moment - exact).to_f64().abs() < 1e-26);
    }

    #[test]
    fn symmetric_and_increasing() {
        for n in [3, 8, 33, 100, 401] {
            let r = gauss_legendre(n).unwrap();
            for i in 0..n {
                assert_eq!(r.nodes()[i], -r.nodes()[n - 1 - i]);
                assert_eq!(r.weights()[i], r.weights()[n - 1 - i]);
                assert!(r.weights()[i].hi > 0.0);
            }
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(r.nodes()[0].hi > -1.0);
        }
    }

    #[test]
    fn exactness_up_to_degree_2n_minus_1() {
        for n in [5, 12, 40] {
            let r = gauss_legendre(n).unwrap();
            for k in 0..2 * n {
                let q: ExtendedReal = r
                    .nodes()
                    .iter()
                    .zip(r.weights())
                    .map(|(&x, &w)| w * x.powi(k as i32))
                    .sum();
                let exact = if k % 2 == 1 {
                    ExtendedReal::ZERO
                } else {
                    ExtendedReal::from_f64(2.0) / (k + 1) as f64
                };
                assert!((q - exact).to_f64().abs() < 1e-26, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn exponential_integral() {
        let r = gauss_legendre(20).unwrap();
        let q = r.integrate(-1.0, 1.0, |x| x.exp());
        let e = ExtendedReal::ONE.exp();
        let exact = e - ExtendedReal::ONE / e;
        assert!((q - exact).to_f64().abs() < 1e-25);
    }

    #[test]
    fn large_order_weight_sum() {
        let r = gauss_legendre(2000).unwrap();
        let total: ExtendedReal = r.weights().iter().copied().sum();
        assert!((total - 2.0).to_f64().abs() < 1e-28);
    }

    #[test]
    fn rejects_bad_order() {
        assert!(matches!(gauss_legendre(0), Err(Error::Range { .. })));
        assert!(matches!(gauss_legendre(2001), Err(Error::Range { .. })));
    }
}

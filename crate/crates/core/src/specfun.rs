//! Airy function of the first kind on the real line, and the constants
//! appearing in the large-gap expansions.

use crate::error::{check_range, Result};
use crate::mpnum::ExtendedReal;

/// Lower end of the supported argument range.
pub const AIRY_X_MIN: f64 = -10.0;
/// Upper end of the supported argument range.
pub const AIRY_X_MAX: f64 = 40.0;
/// Arguments above this use the exponential asymptotic expansion.
pub const AIRY_SWITCH: f64 = 7.0;

// Ai(0) and -Ai'(0)
const AI0: ExtendedReal = ExtendedReal::from_parts(0.3550280538878172, 2.05233632436212e-17);
const MINUS_AIP0: ExtendedReal =
    ExtendedReal::from_parts(0.2588194037928068, -2.522243111610832e-17);

/// `(Ai(x), Ai'(x))` from the two Maclaurin branches, summed in double-double.
pub fn airy_series(x: f64) -> (ExtendedReal, ExtendedReal) {
    let xe = ExtendedReal::from_f64(x);
    let x3 = xe * xe * xe;
    // f = sum a_k x^{3k}, g = sum b_k x^{3k+1}; df, dg are the term-wise derivatives
    let mut f_term = ExtendedReal::ONE;
    let mut g_term = xe;
    let mut df_term = xe * xe * 0.5;
    let mut dg_term = ExtendedReal::ONE;
    let (mut f, mut g) = (f_term, g_term);
    let (mut df, mut dg) = (ExtendedReal::ZERO, dg_term);
    for k in 1..200 {
        let kf = k as f64;
        f_term = f_term * x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        g_term = g_term * x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        dg_term = dg_term * x3 / ((3.0 * kf - 2.0) * (3.0 * kf));
        f += f_term;
        g += g_term;
        df += df_term;
        dg += dg_term;
        df_term = df_term * x3 / ((3.0 * kf) * (3.0 * kf + 2.0));
        let scale = f.abs().hi.max(g.abs().hi).max(1.0);
        let largest = f_term.abs().hi.max(g_term.abs().hi).max(df_term.abs().hi);
        if k > 3 && largest < 1e-34 * scale {
            break;
        }
    }
    (AI0 * f - MINUS_AIP0 * g, AI0 * df - MINUS_AIP0 * dg)
}

/// Sums the alternating asymptotic series `sum (-1)^k c_k z^{-k}` up to its
/// smallest term, then adds half of the first omitted term.
fn asymptotic_sum(coeffs: &[f64], zeta: f64) -> f64 {
    let mut sum = 0.0;
    let mut prev_abs = f64::INFINITY;
    let mut zpow = 1.0;
    for (k, &c) in coeffs.iter().enumerate() {
        let term = if k % 2 == 0 { c * zpow } else { -c * zpow };
        if term.abs() >= prev_abs {
            return sum + 0.5 * term;
        }
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        prev_abs = term.abs();
        zpow /= zeta;
    }
    sum
}

const ASYMPTOTIC_TERMS: usize = 64;

/// `(u_k, v_k)` of the exponential expansions of Ai and Ai'.
fn airy_asymptotic_coeffs() -> (Vec<f64>, Vec<f64>) {
    let mut u = Vec::with_capacity(ASYMPTOTIC_TERMS);
    let mut v = Vec::with_capacity(ASYMPTOTIC_TERMS);
    u.push(1.0);
    v.push(1.0);
    for k in 1..ASYMPTOTIC_TERMS {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(next);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * next);
    }
    (u, v)
}

fn airy_asymptotic(x: f64) -> (f64, f64) {
    static COEFFS: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    let (u, v) = COEFFS.get_or_init(airy_asymptotic_coeffs);
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let pref = (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt());
    let q = x.powf(0.25);
    let su = asymptotic_sum(u, zeta);
    let sv = asymptotic_sum(v, zeta);
    (pref / q * su, -pref * q * sv)
}

/// Ai(x) for `-10 <= x <= 40`.
pub fn airy_ai(x: f64) -> Result<f64> {
    check_range("airy argument", x, AIRY_X_MIN, AIRY_X_MAX)?;
    Ok(if x <= AIRY_SWITCH {
        airy_series(x).0.to_f64()
    } else {
        airy_asymptotic(x).0
    })
}

/// Ai'(x) for `-10 <= x <= 40`.
pub fn airy_ai_prime(x: f64) -> Result<f64> {
    check_range("airy argument", x, AIRY_X_MIN, AIRY_X_MAX)?;
    Ok(if x <= AIRY_SWITCH {
        airy_series(x).1.to_f64()
    } else {
        airy_asymptotic(x).1
    })
}

/// The asymptotic branch evaluated at any `x > 0`, exposed for overlap checks.
pub fn airy_asymptotic_branch(x: f64) -> (f64, f64) {
    airy_asymptotic(x)
}

/// Constants entering the large-gap expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// zeta'(-1) = 1/12 - ln A, A the Glaisher–Kinkelin constant.
    pub zeta_prime_minus1: ExtendedReal,
    pub ln2: ExtendedReal,
    /// -(1/6) ln 2 + 3 zeta'(-1)
    pub omega0: ExtendedReal,
    /// (1/12) ln 2 + 3 zeta'(-1)
    pub dyson_const: ExtendedReal,
}

const ZETA_PRIME_MINUS1: ExtendedReal =
    ExtendedReal::from_parts(-0.16542114370045094, 1.0747835010305763e-17);

pub fn zeta_prime_minus1() -> ExtendedReal {
    ZETA_PRIME_MINUS1
}

pub fn constants() -> Constants {
    let ln2 = ExtendedReal::LN_2;
    let three_zeta = ZETA_PRIME_MINUS1 * 3.0;
    Constants {
        zeta_prime_minus1: ZETA_PRIME_MINUS1,
        ln2,
        omega0: three_zeta - ln2 / 6.0,
        dyson_const: three_zeta + ln2 / 12.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// 1/Gamma(z) from the Lanczos-free reflection-free route:
    /// Gamma(z) = Gamma(z + m) / (z (z+1) ... (z+m-1)) with Stirling at z + m.
    fn gamma_oracle(z: f64) -> f64 {
        let m = 30;
        let w = z + m as f64;
        let ln_gamma_w =
            (w - 0.5) * w.ln() - w + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * w)
                - 1.0 / (360.0 * w.powi(3))
                + 1.0 / (1260.0 * w.powi(5))
                - 1.0 / (1680.0 * w.powi(7));
        let mut g = ln_gamma_w.exp();
        for i in 0..m {
            g /= z + i as f64;
        }
        g
    }

    /// Fixed-step RK4 on Ai'' = x Ai starting from x = 0.
    fn ode_oracle(x_end: f64) -> f64 {
        let steps = 20_000;
        let h = x_end / steps as f64;
        let (mut y, mut yp) = (AI0.to_f64(), -MINUS_AIP0.to_f64());
        let mut x = 0.0;
        for _ in 0..steps {
            let f = |x: f64, y: f64, yp: f64| (yp, x * y);
            let k1 = f(x, y, yp);
            let k2 = f(x + h / 2.0, y + h / 2.0 * k1.0, yp + h / 2.0 * k1.1);
            let k3 = f(x + h / 2.0, y + h / 2.0 * k2.0, yp + h / 2.0 * k2.1);
            let k4 = f(x + h, y + h * k3.0, yp + h * k3.1);
            y += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            yp += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            x += h;
        }
        y
    }

    #[test]
    fn value_at_zero_matches_gamma_closed_form() {
        let oracle = 3f64.powf(-2.0 / 3.0) / gamma_oracle(2.0 / 3.0);
        let ai0 = airy_ai(0.0).unwrap();
        assert!(rel(ai0, oracle) < 1e-12);
        assert!(rel(ai0, 0.355_028_053_887_817_2) < 1e-15);
        let oracle_p = -(3f64.powf(-1.0 / 3.0)) / gamma_oracle(1.0 / 3.0);
        assert!(rel(airy_ai_prime(0.0).unwrap(), oracle_p) < 1e-12);
    }

    #[test]
    fn value_at_one() {
        let ai1 = airy_ai(1.0).unwrap();
        assert!(rel(ai1, 0.135_292_416_312_881_4) < 1e-14);
        assert!(rel(ai1, ode_oracle(1.0)) < 1e-12);
    }

    #[test]
    fn reference_values() {
        // (x, Ai(x), Ai'(x))
        let table = [
            (-10.0, 0.040_241_238_486_443_19, 0.996_265_044_132_790),
            (-5.0, 0.350_761_009_024_114_3, 0.327_192_818_554_443_1),
            (-2.0, 0.227_407_428_201_685_6, 0.618_259_020_741_691),
            (2.0, 0.034_924_130_423_274_38, -0.053_090_384_433_653_63),
            (5.0, 1.083_444_281_360_744e-4, -2.474_138_908_684_625e-4),
            (6.0, 9.947_694_360_252_89e-6, -2.476_520_039_703_495e-5),
            (7.0, 7.492_128_863_997_167e-7, -2.008_150_894_738_792e-6),
            (8.0, 4.692_207_616_099_232e-8, -1.341_439_297_906_787e-7),
            (10.0, 1.104_753_255_289_869e-10, -3.520_633_676_738_924e-10),
            (20.0, 1.691_672_868_670_54e-27, -7.586_391_625_748_355e-27),
            (40.0, 6.365_742_658_552_915e-75, -4.030_017_977_600_678e-74),
        ];
        for (x, ai, aip) in table {
            // relative accuracy degrades near the oscillatory zeros on x < 0
            let tol = if x < 0.0 { 1e-11 } else { 1e-12 };
            assert!(rel(airy_ai(x).unwrap(), ai) < tol, "Ai({x})");
            assert!(rel(airy_ai_prime(x).unwrap(), aip) < tol, "Ai'({x})");
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        let (s, sp) = airy_series(AIRY_SWITCH);
        let (a, ap) = airy_asymptotic_branch(AIRY_SWITCH);
        assert!(rel(a, s.to_f64()) < 1e-12);
        assert!(rel(ap, sp.to_f64()) < 1e-12);
    }

    #[test]
    fn satisfies_airy_equation() {
        let h = 1e-3;
        let mut x = -2.0;
        while x <= 6.0 {
            let d2 = (airy_ai(x + h).unwrap() - 2.0 * airy_ai(x).unwrap()
                + airy_ai(x - h).unwrap())
                / (h * h);
            assert!((d2 - x * airy_ai(x).unwrap()).abs() < 1e-6, "x = {x}");
            x += 0.25;
        }
    }

    #[test]
    fn positive_and_decreasing_on_positive_axis() {
        let mut prev = airy_ai(0.0).unwrap();
        for i in 1..=800 {
            let x = i as f64 * 0.05;
            let v = airy_ai(x).unwrap();
            assert!(v > 0.0 && v < prev, "x = {x}");
            prev = v;
        }
    }

    #[test]
    fn out_of_range_is_an_error() {
        assert!(airy_ai(-10.5).is_err());
        assert!(airy_ai_prime(41.0).is_err());
        assert!(airy_ai(f64::NAN).is_err());
    }

    /// ln A by Euler–Maclaurin on sum k ln k, entirely in double-double.
    fn glaisher_log_oracle() -> ExtendedReal {
        let n = 60u32;
        let mut sum = ExtendedReal::ZERO;
        for k in 2..=n {
            let kk = ExtendedReal::from_f64(k as f64);
            sum += kk * kk.ln();
        }
        let nn = ExtendedReal::from_f64(n as f64);
        let ln_n = nn.ln();
        let mut ln_a =
            sum - (nn * nn * 0.5 + nn * 0.5 + ExtendedReal::ONE / 12.0) * ln_n + nn * nn * 0.25;
        // + sum_{j>=2} B_{2j} (2j-3)! / ((2j)! N^{2j-2})
        let bernoulli: [(f64, f64); 7] = [
            (-1.0, 30.0),
            (1.0, 42.0),
            (-1.0, 30.0),
            (5.0, 66.0),
            (-691.0, 2730.0),
            (7.0, 6.0),
            (-3617.0, 510.0),
        ];
        for (idx, &(num, den)) in bernoulli.iter().enumerate() {
            let j = idx as i32 + 2;
            // (2j-3)!/(2j)! = 1 / ((2j-2)(2j-1)(2j))
            let falling = ((2 * j - 2) * (2 * j - 1) * (2 * j)) as f64;
            let b = ExtendedReal::from_f64(num) / den;
            ln_a += b / falling / nn.powi(2 * j - 2);
        }
        ln_a
    }

    #[test]
    fn zeta_prime_literal_matches_euler_maclaurin() {
        let oracle = ExtendedReal::ONE / 12.0 - glaisher_log_oracle();
        let d = (oracle - zeta_prime_minus1()).to_f64();
        assert!(d.abs() < 1e-25, "{d:e}");
        assert!((zeta_prime_minus1().to_f64() + 0.165_421_143_700_450_93).abs() < 1e-17);
    }

    #[test]
    fn derived_constants() {
        let c = constants();
        assert!((c.omega0.to_f64() + 0.611_787_961_194_677).abs() < 1e-14);
        assert!((c.dyson_const.to_f64() + 0.438_501_166_054_690_7).abs() < 1e-14);
        let diff = c.omega0 - c.dyson_const + c.ln2 / 4.0;
        assert!(diff.to_f64().abs() < 1e-28);
        assert!((c.ln2 - ExtendedReal::from_f64(2.0).ln()).to_f64().abs() < 1e-31);
    }
}

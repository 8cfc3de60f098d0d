//! Exponential integrals `E_n(x) = ∫_1^∞ e^{-xt} t^{-n} dt` for real `x ≥ 0`.
//!
//! `E_1` uses its power series for `x ≤ 1` and a Lentz-evaluated continued
//! fraction above. Higher orders follow from the upward recurrence
//! `n E_{n+1}(x) = e^{-x} - x E_n(x)`, which is well conditioned for the
//! small orders and moderate arguments used by the slab solvers.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_TERMS: usize = 200;

/// Beyond this argument every `E_n` is below the smallest subnormal.
const UNDERFLOW_X: f64 = 745.0;

/// `E_n(x)` for `n ≥ 1`, `x ≥ 0`.
pub fn expint(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("expint order must be >= 1".into()));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("expint argument {x} must be >= 0")));
    }
    if x == 0.0 {
        if n == 1 {
            return Err(Error::Domain("E_1(0) diverges logarithmically".into()));
        }
        return Ok(1.0 / (n - 1) as f64);
    }
    if x > UNDERFLOW_X {
        return Ok(0.0);
    }
    let mut e = e1_positive(x);
    let ex = (-x).exp();
    for k in 1..n {
        e = (ex - x * e) / k as f64;
    }
    Ok(e)
}

/// `E_1(x)` for `x > 0` without domain checks. Hot path of the kernels.
#[inline]
pub(crate) fn e1_positive(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x > UNDERFLOW_X {
        return 0.0;
    }
    if x <= 1.0 {
        // -γ - ln x - Σ_{k≥1} (-x)^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..MAX_TERMS {
            term *= -x / k as f64;
            let contrib = term / k as f64;
            sum += contrib;
            if contrib.abs() < EPS * sum.abs().max(EPS) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // Modified Lentz on e^{x} E_1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...)))
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_TERMS {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `E_2(x)` for `x ≥ 0` without domain checks.
#[inline]
pub(crate) fn e2(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x > UNDERFLOW_X {
        0.0
    } else {
        (-x).exp() - x * e1_positive(x)
    }
}

/// `E_3(x)` for `x ≥ 0` without domain checks.
#[cfg(test)]
pub(crate) fn e3(x: f64) -> f64 {
    if x == 0.0 {
        0.5
    } else if x > UNDERFLOW_X {
        0.0
    } else {
        0.5 * ((-x).exp() - x * e2(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Adaptive Simpson on ∫_1^∞ e^{-xt} t^{-n} dt after t = 1/u, u ∈ (0, 1].
    fn quad_oracle(n: u32, x: f64) -> f64 {
        fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        // integrand in u: e^{-x/u} u^{n-2}
        let f = |u: f64| if u <= 0.0 { 0.0 } else { (-x / u).exp() * u.powi(n as i32 - 2) };
        let (a, b) = (0.0, 1.0);
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5);
        let whole = (fa + 4.0 * fm + fb) / 6.0;
        simpson(&f, a, b, fa, fm, fb, whole, 1e-14, 50)
    }

    #[test]
    fn e_n_at_zero() {
        assert_eq!(expint(2, 0.0).unwrap(), 1.0);
        assert_eq!(expint(3, 0.0).unwrap(), 0.5);
        assert_eq!(expint(5, 0.0).unwrap(), 0.25);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(expint(1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(expint(2, -0.1), Err(Error::Domain(_))));
        assert!(matches!(expint(0, 1.0), Err(Error::Domain(_))));
        assert!(expint(1, f64::NAN).is_err());
    }

    #[test]
    fn e1_of_one_matches_quadrature() {
        let oracle = quad_oracle(1, 1.0);
        assert!((oracle - 0.219_383_934_395_520_3).abs() < 1e-11, "oracle {oracle}");
        let v = expint(1, 1.0).unwrap();
        assert!((v - oracle).abs() < 1e-12, "{v} vs {oracle}");
    }

    #[test]
    fn matches_quadrature_across_branches() {
        for &n in &[1u32, 2, 3, 4] {
            for &x in &[0.01, 0.3, 0.999, 1.001, 2.5, 7.0, 20.0, 45.0] {
                let v = expint(n, x).unwrap();
                let o = quad_oracle(n, x);
                assert!((v - o).abs() <= 1e-12, "E_{n}({x}) = {v}, oracle {o}");
            }
        }
    }

    #[test]
    fn recurrence_e2_at_07() {
        let x = 0.7;
        let lhs = expint(2, x).unwrap();
        let rhs = (-x).exp() - x * expint(1, x).unwrap();
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn derivative_is_minus_lower_order() {
        for n in 2..=4u32 {
            for i in 0..40 {
                let x = 0.1 + i as f64 * (9.9 / 39.0);
                let h = 1e-5 * x.max(1.0);
                let fd = (expint(n, x + h).unwrap() - expint(n, x - h).unwrap()) / (2.0 * h);
                let exact = -expint(n - 1, x).unwrap();
                assert!(((fd - exact) / exact).abs() < 1e-6, "n={n} x={x}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn underflow_is_zero() {
        assert_eq!(expint(1, 800.0).unwrap(), 0.0);
        assert_eq!(expint(3, 1e6).unwrap(), 0.0);
        assert!(expint(1, 700.0).unwrap() >= 0.0);
    }

    #[test]
    fn private_helpers_agree() {
        for &x in &[1e-8, 0.2, 1.0, 3.0, 30.0] {
            assert!((e2(x) - expint(2, x).unwrap()).abs() < 1e-15);
            assert!((e3(x) - expint(3, x).unwrap()).abs() < 1e-15);
        }
    }
}

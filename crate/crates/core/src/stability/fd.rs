//! Finite-difference derivative matrices on an ordered 1-D grid.

use faer::Mat;

/// Weights for derivatives `0..=m` at `x0` from nodes `x` (Fornberg's
/// recursion). Entry `[d][j]` multiplies `f(x[j])` in the `d`-th derivative.
pub fn fornberg_weights(x0: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

/// Stencil `[start, start + width)` for the `m`-th derivative at node `i`
/// with formal accuracy `order`: centred where it fits, one-sided near the
/// ends.
fn stencil(i: usize, n: usize, m: usize, order: usize) -> (usize, usize) {
    let centred = if (m + order) % 2 == 0 { m + order - 1 } else { m + order };
    let half = centred / 2;
    if i >= half && i + half < n {
        return (i - half, centred);
    }
    let width = (m + order).min(n);
    let start = if i < half { 0 } else { n - width };
    (start, width)
}

/// Dense `m`-th derivative matrix of accuracy `order` on the grid `z`.
pub fn derivative_matrix(z: &[f64], m: usize, order: usize) -> Mat<f64> {
    let n = z.len();
    let mut d = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let (s, w) = stencil(i, n, m, order);
        let wts = fornberg_weights(z[i], &z[s..s + w], m);
        for (j, &v) in wts[m].iter().enumerate() {
            d[(i, s + j)] = v;
        }
    }
    d
}

/// Derivative matrices shared by every row block.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub d1: Mat<f64>,
    pub d2: Mat<f64>,
    pub d4: Mat<f64>,
}

impl Derivatives {
    pub fn new(z: &[f64], order: usize) -> Self {
        Derivatives {
            d1: derivative_matrix(z, 1, order),
            d2: derivative_matrix(z, 2, order),
            d4: derivative_matrix(z, 4, order),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_centred_weights() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[2].iter().zip(d2) {
            assert!((a - b).abs() < 1e-13);
        }
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[1].iter().zip(d1) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_on_quartics_at_every_node() {
        let n = 21;
        let z: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let f = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x.powi(3) + 0.3 * x.powi(4);
        let derivs = [
            |x: f64| 1.0 - 4.0 * x + 1.5 * x * x + 1.2 * x.powi(3),
            |x: f64| -4.0 + 3.0 * x + 3.6 * x * x,
            |x: f64| 3.0 + 7.2 * x,
            |_: f64| 7.2,
        ];
        for (m, df) in derivs.iter().enumerate() {
            let d = derivative_matrix(&z, m + 1, 4);
            for i in 0..n {
                let v: f64 = (0..n).map(|j| d[(i, j)] * f(z[j])).sum();
                assert!((v - df(z[i])).abs() < 1e-7 * (1.0 + df(z[i]).abs()), "m {} i {i}: {v}", m + 1);
            }
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |n: usize| {
            let z: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let d = derivative_matrix(&z, 2, 4);
            (0..n)
                .map(|i| {
                    let v: f64 = (0..n).map(|j| d[(i, j)] * z[j].sin()).sum();
                    (v + z[i].sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let rate = (err(33) / err(65)).log2();
        assert!(rate > 3.7, "rate {rate}");
    }
}

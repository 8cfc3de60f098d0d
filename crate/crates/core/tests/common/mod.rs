//! Independent reference solvers shared by the integration tests.
#![allow(dead_code)]

use biostab_core::equilib::SuspensionParams;
use biostab_core::radlight::IntensityProfile;
use biostab_core::specfun::{expint, gauss_legendre};

fn e(n: u32, x: f64) -> f64 {
    expint(n, x).unwrap()
}

/// `∫_0^d (α + β u) E_1(u) du` in closed form.
fn lin_e1_moment(alpha: f64, beta: f64, d0: f64, d1: f64) -> f64 {
    let prim = |u: f64| {
        let e2 = if u == 0.0 { 1.0 } else { e(2, u) };
        let e3 = if u == 0.0 { 0.5 } else { e(3, u) };
        -alpha * e2 + beta * (-u * e2 - e3)
    };
    prim(d1) - prim(d0)
}

/// Λ(τ) on a uniform grid by product integration (piecewise-linear Λ
/// against the exact E_1 kernel moments) and Picard iteration.
pub fn fie_product_integration(kappa: f64, omega: f64, mu0: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = kappa / (n - 1) as f64;
    let tau: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    // weight of node j for the row at offset m = j - i (cells either side)
    // Row i: sum over cells c=[t_c, t_{c+1}], Λ linear between nodes c, c+1.
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for c in 0..n - 1 {
            let (a, b) = (tau[c], tau[c + 1]);
            // Λ = Λ_c (b - t)/h + Λ_{c+1} (t - a)/h
            if a >= tau[i] {
                let (d0, d1) = (a - tau[i], b - tau[i]);
                // t = tau_i + u
                // (b - t)/h = (b - tau_i)/h - u/h ; (t - a)/h = (tau_i - a)/h + u/h
                w[i * n + c] += lin_e1_moment((b - tau[i]) / h, -1.0 / h, d0, d1);
                w[i * n + c + 1] += lin_e1_moment((tau[i] - a) / h, 1.0 / h, d0, d1);
            } else {
                let (d0, d1) = (tau[i] - b, tau[i] - a);
                // t = tau_i - u
                w[i * n + c] += lin_e1_moment((b - tau[i]) / h, 1.0 / h, d0, d1);
                w[i * n + c + 1] += lin_e1_moment((tau[i] - a) / h, -1.0 / h, d0, d1);
            }
        }
    }
    let f: Vec<f64> = tau.iter().map(|t| (-t / mu0).exp()).collect();
    let mut lam = f.clone();
    for _ in 0..100_000 {
        let next: Vec<f64> = (0..n)
            .map(|i| f[i] + 0.5 * omega * (0..n).map(|j| w[i * n + j] * lam[j]).sum::<f64>())
            .collect();
        let res = next.iter().zip(&lam).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        lam = next;
        if res < 1e-13 {
            break;
        }
    }
    (tau, lam)
}

/// `∫_0^a E_1(u) du` by graded Gauss–Legendre panels (log singularity at 0).
pub fn e1_integral(a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let g = gauss_legendre(20, 0.0, 1.0).unwrap();
    let mut total = 0.0;
    let mut hi = a;
    for _ in 0..60 {
        let lo = hi * 0.25;
        total += g.mapped(lo, hi).integrate(|u| e(1, u));
        hi = lo;
    }
    // remainder ∫_0^hi E_1 ≈ hi (1 - γ - ln hi)
    total + hi * (1.0 - 0.577_215_664_901_532_9 - hi.ln())
}

/// Diffuse vertical flux by discrete ordinates: the formal solution of the
/// transfer equation integrated along `n_mu` Gauss directions per hemisphere.
pub fn diffuse_flux_ordinates<F: Fn(f64) -> f64>(
    lambda: F,
    kappa: f64,
    omega: f64,
    g_t: f64,
    tau: f64,
    n_mu: usize,
) -> f64 {
    let mu = gauss_legendre(n_mu, 0.0, 1.0).unwrap();
    let along = |a: f64, b: f64, m: f64| -> f64 {
        // ∫_a^b S(t) e^{-|t - tau|/m} dt / m with S = ω G_t Λ / (4π)
        if b <= a {
            return 0.0;
        }
        let mut s = 0.0;
        let panels = 400;
        let g = gauss_legendre(10, 0.0, 1.0).unwrap();
        for p in 0..panels {
            // grade panels towards tau where the exponential is steepest
            let x0 = (p as f64 / panels as f64).powi(2);
            let x1 = ((p + 1) as f64 / panels as f64).powi(2);
            let (l, r) = if a >= tau {
                (a + (b - a) * x0, a + (b - a) * x1)
            } else {
                (b - (b - a) * x1, b - (b - a) * x0)
            };
            s += g.mapped(l, r).integrate(|t| lambda(t) * (-(t - tau).abs() / m).exp() / m);
        }
        omega * g_t * s / (4.0 * std::f64::consts::PI)
    };
    let mut q = 0.0;
    for (&m, &w) in mu.nodes.iter().zip(&mu.weights) {
        let up = along(tau, kappa, m);
        let down = along(0.0, tau, m);
        q += 2.0 * std::f64::consts::PI * w * m * (up - down);
    }
    q
}

/// Dense real solve by Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap()).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let m = a[r][c] / a[c][c];
            if m != 0.0 {
                for k in c..n {
                    a[r][k] -= m * a[c][k];
                }
                b[r] -= m * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Chebyshev–Gauss–Lobatto points on [0, 1] (ascending) and the first
/// derivative matrix.
pub fn chebyshev(n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let pi = std::f64::consts::PI;
    // x_j = cos(jπ/n) on [-1,1] descending; map z = (1 - x)/2 ascending
    let x: Vec<f64> = (0..=n).map(|j| (j as f64 * pi / n as f64).cos()).collect();
    let c: Vec<f64> = (0..=n)
        .map(|j| if j == 0 || j == n { 2.0 } else { 1.0 } * if j % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let mut d = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[i][j] = c[i] / c[j] / (x[i] - x[j]);
            }
        }
        d[i][i] = -(0..=n).filter(|&j| j != i).map(|j| d[i][j]).sum::<f64>();
    }
    // dz = -dx/2 ⇒ d/dz = -2 d/dx
    let z = x.iter().map(|v| 0.5 * (1.0 - v)).collect();
    for row in d.iter_mut() {
        for v in row.iter_mut() {
            *v *= -2.0;
        }
    }
    (z, d)
}

/// Barycentric interpolation through Chebyshev–Lobatto data.
pub fn chebyshev_interp(z: &[f64], f: &[f64], at: f64) -> f64 {
    let n = z.len() - 1;
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..=n {
        if (at - z[j]).abs() < 1e-15 {
            return f[j];
        }
        let w = if j == 0 || j == n { 0.5 } else { 1.0 } * if j % 2 == 0 { 1.0 } else { -1.0 };
        let t = w / (at - z[j]);
        num += t * f[j];
        den += t;
    }
    num / den
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Second-derivative matrix from a first-derivative one.
fn square(d: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = d.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|m| d[i][m] * d[m][j]).sum()).collect())
        .collect()
}

/// Neutral Rayleigh number of stationary rigid–free convection driven by a
/// unit gradient with `N = 0` at both walls, by Chebyshev collocation: the
/// smallest positive `R` with `L²W + R k² N = 0`, `L N = W`, `L = D² − k²`.
pub fn benard_neutral_r(k: f64, n: usize) -> f64 {
    let (_, d1) = chebyshev(n);
    let d2 = square(&d1);
    let d4 = square(&d2);
    let m = n + 1;
    let k2 = k * k;
    let mut a = faer::Mat::<f64>::zeros(2 * m, 2 * m);
    let mut b = faer::Mat::<f64>::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let id = if i == j { 1.0 } else { 0.0 };
            a[(i, j)] = d4[i][j] - 2.0 * k2 * d2[i][j] + k2 * k2 * id;
            b[(i, m + j)] = -k2 * id;
            a[(m + i, m + j)] = d2[i][j] - k2 * id;
            a[(m + i, j)] = -id;
        }
    }
    // z = 0 is node 0, z = 1 is node n
    let clear = |a: &mut faer::Mat<f64>, b: &mut faer::Mat<f64>, r: usize| {
        for j in 0..2 * m {
            a[(r, j)] = 0.0;
            b[(r, j)] = 0.0;
        }
    };
    for r in [0, 1, n - 1, n, m, m + n] {
        clear(&mut a, &mut b, r);
    }
    a[(0, 0)] = 1.0;
    for j in 0..m {
        a[(1, j)] = d1[0][j];
        a[(n - 1, j)] = d2[n][j];
    }
    a[(n, n)] = 1.0;
    a[(m, m)] = 1.0;
    a[(m + n, m + n)] = 1.0;
    let g = a.generalized_eigen(&b).unwrap();
    (0..2 * m)
        .filter_map(|i| {
            let (al, be) = (g.S_a()[i], g.S_b()[i]);
            if be.norm() < 1e-12 * al.norm().max(1.0) {
                return None;
            }
            let r = al / be;
            (r.im.abs() < 1e-6 * r.norm() && r.re > 0.0).then_some(r.re)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Golden-section minimum of `f` on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `ν'' = V_c T(G_t Λ(κ(1-ν))) ν'` with `ν(0)=0, ν(1)=1` by Chebyshev
/// collocation and Newton, continued in `V_c` from zero.
pub fn collocation_oracle(p: &SuspensionParams, lam: &IntensityProfile, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (z, d1) = chebyshev(n);
    let d2: Vec<Vec<f64>> = (0..=n)
        .map(|i| (0..=n).map(|j| (0..=n).map(|k| d1[i][k] * d1[k][j]).sum()).collect())
        .collect();
    let kappa = p.optics.kappa;
    let rate = |vc: f64, nu: f64| {
        let tau = (kappa * (1.0 - nu)).clamp(0.0, kappa);
        vc * p.taxis.eval(p.optics.g_t * lam.eval_clamped(tau)).0
    };
    let mut u = z.clone();
    for step in 1..=30 {
        let vc = p.vc * step as f64 / 30.0;
        for _ in 0..50 {
            let du = matvec(&d1, &u);
            let d2u = matvec(&d2, &u);
            let mut res: Vec<f64> = (0..=n).map(|i| d2u[i] - rate(vc, u[i]) * du[i]).collect();
            let mut jac: Vec<Vec<f64>> = (0..=n)
                .map(|i| {
                    let r = rate(vc, u[i]);
                    let e = 1e-7;
                    let dr = (rate(vc, u[i] + e) - rate(vc, u[i] - e)) / (2.0 * e);
                    (0..=n)
                        .map(|j| d2[i][j] - r * d1[i][j] - if i == j { dr * du[i] } else { 0.0 })
                        .collect()
                })
                .collect();
            for (i, target) in [(0usize, 0.0), (n, 1.0)] {
                jac[i] = (0..=n).map(|j| if j == i { 1.0 } else { 0.0 }).collect();
                res[i] = u[i] - target;
            }
            let delta = dense_solve(jac, res);
            let mut change: f64 = 0.0;
            for (ui, di) in u.iter_mut().zip(&delta) {
                *ui -= di;
                change = change.max(di.abs());
            }
            if change < 1e-13 {
                break;
            }
        }
    }
    let ns = matvec(&d1, &u);
    (z, ns)
}

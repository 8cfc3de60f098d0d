//! Linear maps from a concentration perturbation `N(z)` (with
//! `Φ(z) = ∫_1^z N dz'`) to the perturbed collimated and diffuse intensities
//! and the horizontal diffuse flux, at horizontal wavenumber `k` with the
//! wavevector along `x` (`l = k`, `m = 0`).
//!
//! Along each discrete direction `(ξ, η, ν)` the diffuse amplitude obeys
//!
//! ```text
//! dΨ/dz + (i k ξ + κ n_s)/ν Ψ = S/ν,
//! S = (ωκ/4π)(n_s (ℐ^c + ℐ^d) + I_s N) − κ G_s^d N,
//! ```
//!
//! with zero inflow at the wall each ray leaves from. Each cell is crossed
//! exactly through the integrating factor; the source is cubic between nodes.

use crate::equilib::{BasicState, SuspensionParams};
use crate::error::{Error, Result};
use crate::specfun::gauss_legendre;
use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    /// Downward hemisphere first (`μ < 0`), then upward.
    pub mu: Vec<f64>,
    pub mu_weights: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub mu: f64,
    pub xi: f64,
    pub eta: f64,
    /// Solid-angle weight.
    pub weight: f64,
}

pub const DEFAULT_N_MU: usize = 8;
pub const DEFAULT_N_PHI: usize = 8;

impl AngularGrid {
    /// `n_mu` Gauss–Legendre nodes per hemisphere, `n_phi` uniform azimuths.
    pub fn new(n_mu: usize, n_phi: usize) -> Result<Self> {
        if n_mu == 0 || n_phi == 0 {
            return Err(Error::InvalidParameter(format!("angular grid {n_mu} x {n_phi}")));
        }
        let g = gauss_legendre(n_mu, 0.0, 1.0)?;
        let mut mu: Vec<f64> = g.nodes.iter().rev().map(|m| -m).collect();
        let mut mu_weights: Vec<f64> = g.weights.iter().rev().copied().collect();
        mu.extend_from_slice(&g.nodes);
        mu_weights.extend_from_slice(&g.weights);
        let dphi = 2.0 * PI / n_phi as f64;
        Ok(Self {
            mu,
            mu_weights,
            phi: (0..n_phi).map(|j| j as f64 * dphi).collect(),
            phi_weights: vec![dphi; n_phi],
        })
    }

    pub fn n_mu(&self) -> usize {
        self.mu.len() / 2
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    /// `∫ dΩ` under the grid, nominally `4π`.
    pub fn total_solid_angle(&self) -> f64 {
        self.mu_weights.iter().sum::<f64>() * self.phi_weights.iter().sum::<f64>()
    }

    pub fn directions(&self) -> Vec<Direction> {
        let mut out = Vec::with_capacity(self.mu.len() * self.phi.len());
        for (&mu, &wm) in self.mu.iter().zip(&self.mu_weights) {
            let st = (1.0 - mu * mu).sqrt();
            for (&phi, &wp) in self.phi.iter().zip(&self.phi_weights) {
                out.push(Direction {
                    mu,
                    xi: st * phi.cos(),
                    eta: st * phi.sin(),
                    weight: wm * wp,
                });
            }
        }
        out
    }
}

impl Default for AngularGrid {
    fn default() -> Self {
        Self::new(DEFAULT_N_MU, DEFAULT_N_PHI).expect("default grid")
    }
}

/// First node of the four-point stencil used on cell `[z_c, z_{c+1}]`.
fn stencil_start(c: usize, n: usize) -> usize {
    c.saturating_sub(1).min(n - 4)
}

fn lagrange4(x: &[f64], t: f64) -> [f64; 4] {
    let mut l = [1.0; 4];
    for m in 0..4 {
        for j in 0..4 {
            if j != m {
                l[m] *= (t - x[j]) / (x[m] - x[j]);
            }
        }
    }
    l
}

/// Matrix `C` with `(C N)_i = ∫_1^{z_i} N dz'`, integrating the cubic
/// interpolant of `N` cell by cell.
pub fn cumulative_matrix(z: &[f64]) -> Result<Mat<f64>> {
    let n = z.len();
    if n < 4 {
        return Err(Error::Dimension(format!("need at least 4 nodes, got {n}")));
    }
    let g = gauss_legendre(4, 0.0, 1.0)?;
    let mut c = Mat::<f64>::zeros(n, n);
    for i in (0..n - 1).rev() {
        for j in 0..n {
            c[(i, j)] = c[(i + 1, j)];
        }
        let s = stencil_start(i, n);
        let (a, b) = (z[i], z[i + 1]);
        for (&x, &w) in g.nodes.iter().zip(&g.weights) {
            let t = a + (b - a) * x;
            let l = lagrange4(&z[s..s + 4], t);
            for m in 0..4 {
                c[(i, s + m)] -= w * (b - a) * l[m];
            }
        }
    }
    Ok(c)
}

#[derive(Debug, Clone)]
struct CellStep {
    from: usize,
    to: usize,
    decay: C64,
    start: usize,
    coef: [C64; 4],
}

/// Precomputed cell propagators for every direction at one `k`.
#[derive(Debug, Clone)]
pub(crate) struct RaySweeper {
    n_z: usize,
    steps: Vec<Vec<CellStep>>,
}

const GAUSS_PER_PANEL: usize = 8;

impl RaySweeper {
    /// `refine` multiplies the number of quadrature panels per cell.
    pub fn new(b: &BasicState, dirs: &[Direction], k: f64, refine: usize) -> Result<Self> {
        let n = b.len();
        if n < 5 {
            return Err(Error::Dimension(format!("need at least 5 z nodes, got {n}")));
        }
        let kappa = b.optics.kappa;
        let g = gauss_legendre(GAUSS_PER_PANEL, 0.0, 1.0)?;
        let z = &b.z;
        // τ on a cell by cubic Hermite with dτ/dz = -κ n_s
        let tau_at = |c: usize, t: f64| -> f64 {
            let h = z[c + 1] - z[c];
            let s = (t - z[c]) / h;
            let (s2, s3) = (s * s, s * s * s);
            (2.0 * s3 - 3.0 * s2 + 1.0) * b.tau[c]
                + (s3 - 2.0 * s2 + s) * h * (-kappa * b.n_s[c])
                + (-2.0 * s3 + 3.0 * s2) * b.tau[c + 1]
                + (s3 - s2) * h * (-kappa * b.n_s[c + 1])
        };
        let mut steps = Vec::with_capacity(dirs.len());
        for d in dirs {
            let order: Vec<(usize, usize)> = if d.mu > 0.0 {
                (0..n - 1).map(|c| (c, c + 1)).collect()
            } else {
                (0..n - 1).rev().map(|c| (c + 1, c)).collect()
            };
            let a_exp = |c: usize, t: f64| C64::new(-tau_at(c, t), k * d.xi * t) / d.mu;
            let mut ds = Vec::with_capacity(n - 1);
            for (from, to) in order {
                let c = from.min(to);
                let (za, zb) = (z[from], z[to]);
                let ab = C64::new(-b.tau[to], k * d.xi * zb) / d.mu;
                let aa = C64::new(-b.tau[from], k * d.xi * za) / d.mu;
                let decay = (-(ab - aa)).exp();
                let span = (ab - aa).norm();
                let panels = refine * (1 + span.ceil() as usize);
                let start = stencil_start(c, n);
                let mut coef = [C64::new(0.0, 0.0); 4];
                let hp = (zb - za) / panels as f64;
                for p in 0..panels {
                    let z0 = za + p as f64 * hp;
                    for (&x, &w) in g.nodes.iter().zip(&g.weights) {
                        let t = z0 + hp * x;
                        let kern = (-(ab - a_exp(c, t))).exp() * (w * hp / d.mu);
                        let l = lagrange4(&z[start..start + 4], t);
                        for m in 0..4 {
                            coef[m] += kern * l[m];
                        }
                    }
                }
                ds.push(CellStep {
                    from,
                    to,
                    decay,
                    start,
                    coef,
                });
            }
            steps.push(ds);
        }
        Ok(Self { n_z: n, steps })
    }

    /// `Ψ` at the nodes for direction `d` and source `S` (without `1/ν`).
    pub fn sweep(&self, d: usize, src: &[C64], out: &mut [C64]) {
        let first = self.steps[d][0].from;
        out[first] = C64::new(0.0, 0.0);
        for s in &self.steps[d] {
            let mut v = s.decay * out[s.from];
            for m in 0..4 {
                v += s.coef[m] * src[s.start + m];
            }
            out[s.to] = v;
        }
    }

    /// Transport matrix `T_d` with `Ψ = T_d S`, row-major.
    pub fn sweep_matrix(&self, d: usize) -> Vec<C64> {
        let n = self.n_z;
        let mut t = vec![C64::new(0.0, 0.0); n * n];
        for s in &self.steps[d] {
            for j in 0..n {
                t[s.to * n + j] = s.decay * t[s.from * n + j];
            }
            for m in 0..4 {
                t[s.to * n + s.start + m] += s.coef[m];
            }
        }
        t
    }
}

/// `(κ/cos θ_i) I_s^c(z)`: the diagonal of the map `Φ ↦ ℐ^c`.
pub fn collimated_operator(b: &BasicState, p: &SuspensionParams) -> Vec<f64> {
    let scale = p.optics.kappa / p.optics.mu0();
    b.i_s_c.iter().map(|ic| scale * ic).collect()
}

/// Per-basic-state data shared by every wavenumber.
#[derive(Debug, Clone)]
pub struct PerturbSetup {
    pub grid: AngularGrid,
    dirs: Vec<Direction>,
    /// Basic diffuse radiance `G_s^d(z, μ)` per direction.
    pub g_diffuse: Vec<Vec<f64>>,
    pub ic_scale: Vec<f64>,
    pub cumulative: Mat<f64>,
    n_s: Vec<f64>,
    i_s: Vec<f64>,
    alpha: f64,
    kappa: f64,
    omega: f64,
    basic: BasicState,
    refine: usize,
}

#[derive(Debug, Clone)]
pub struct DiffuseSolution {
    pub i_d: Vec<C64>,
    pub p: Vec<C64>,
    pub q: Vec<C64>,
    pub iterations: usize,
    /// Ratios of successive sup-norm updates.
    pub contraction: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PerturbOperators {
    pub k: f64,
    /// Diagonal map `Φ ↦ ℐ^c`.
    pub m_ic: Mat<C64>,
    pub m_id: Mat<C64>,
    pub m_p: Mat<C64>,
    pub m_q: Mat<C64>,
}

const SOURCE_TOL: f64 = 1e-10;
const SOURCE_MAX_ITER: usize = 10_000;

impl PerturbSetup {
    pub fn new(b: &BasicState, p: &SuspensionParams, grid: &AngularGrid) -> Result<Self> {
        Self::with_refinement(b, p, grid, 1)
    }

    pub fn with_refinement(b: &BasicState, p: &SuspensionParams, grid: &AngularGrid, refine: usize) -> Result<Self> {
        if grid.mu.iter().any(|&m| m == 0.0) {
            return Err(Error::InvalidParameter("grazing direction μ = 0 in angular grid".into()));
        }
        if !(p.optics.omega < 1.0) {
            return Err(Error::InvalidParameter(format!("ω = {} must be below 1", p.optics.omega)));
        }
        let o = &p.optics;
        let alpha = o.omega * o.kappa / (4.0 * PI);
        let dirs = grid.directions();
        let sweeper = RaySweeper::new(b, &dirs, 0.0, refine)?;
        let src: Vec<C64> = b
            .n_s
            .iter()
            .zip(&b.i_s)
            .map(|(n, i)| C64::new(alpha * n * i, 0.0))
            .collect();
        let mut buf = vec![C64::new(0.0, 0.0); b.len()];
        let mut g_diffuse = Vec::with_capacity(dirs.len());
        for d in 0..dirs.len() {
            sweeper.sweep(d, &src, &mut buf);
            g_diffuse.push(buf.iter().map(|v| v.re).collect());
        }
        Ok(Self {
            grid: grid.clone(),
            dirs,
            g_diffuse,
            ic_scale: collimated_operator(b, p),
            cumulative: cumulative_matrix(&b.z)?,
            n_s: b.n_s.clone(),
            i_s: b.i_s.clone(),
            alpha,
            kappa: o.kappa,
            omega: o.omega,
            basic: b.clone(),
            refine,
        })
    }

    pub fn n_z(&self) -> usize {
        self.n_s.len()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.dirs
    }

    /// `∫ G_s^d dΩ` on the grid; approximates `I_s^d`.
    pub fn basic_diffuse_intensity(&self) -> Vec<f64> {
        let n = self.n_z();
        (0..n)
            .map(|j| self.dirs.iter().zip(&self.g_diffuse).map(|(d, g)| d.weight * g[j]).sum())
            .collect()
    }

    fn sweeper(&self, k: f64) -> Result<RaySweeper> {
        RaySweeper::new(&self.basic, &self.dirs, k, self.refine)
    }

    /// Source iteration for `(ℐ^d, P, Q)` given `N` and `Φ`.
    pub fn diffuse_solve(&self, k: f64, n_vec: &[C64], phi: &[C64]) -> Result<DiffuseSolution> {
        let n = self.n_z();
        if n_vec.len() != n || phi.len() != n {
            return Err(Error::Dimension(format!("vectors of length {} and {}, grid {n}", n_vec.len(), phi.len())));
        }
        let zero = C64::new(0.0, 0.0);
        if self.omega == 0.0 {
            return Ok(DiffuseSolution {
                i_d: vec![zero; n],
                p: vec![zero; n],
                q: vec![zero; n],
                iterations: 0,
                contraction: vec![],
            });
        }
        let sw = self.sweeper(k)?;
        let ic: Vec<C64> = (0..n).map(|j| phi[j] * self.ic_scale[j]).collect();
        let mut i_d = vec![zero; n];
        let mut psi = vec![zero; n];
        let mut src = vec![zero; n];
        let mut contraction = Vec::new();
        let mut last_change = f64::NAN;
        for it in 1..=SOURCE_MAX_ITER {
            let mut next = vec![zero; n];
            let mut p = vec![zero; n];
            let mut q = vec![zero; n];
            let iso: Vec<C64> = (0..n)
                .map(|j| self.alpha * (self.n_s[j] * (ic[j] + i_d[j]) + self.i_s[j] * n_vec[j]))
                .collect();
            for (di, d) in self.dirs.iter().enumerate() {
                for j in 0..n {
                    src[j] = iso[j] - self.kappa * self.g_diffuse[di][j] * n_vec[j];
                }
                sw.sweep(di, &src, &mut psi);
                for j in 0..n {
                    next[j] += d.weight * psi[j];
                    p[j] += d.weight * d.xi * psi[j];
                    q[j] += d.weight * d.eta * psi[j];
                }
            }
            let change = next.iter().zip(&i_d).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if it > 1 && last_change > 0.0 {
                contraction.push(change / last_change);
            }
            last_change = change;
            i_d = next;
            if change <= SOURCE_TOL {
                return Ok(DiffuseSolution {
                    i_d,
                    p,
                    q,
                    iterations: it,
                    contraction,
                });
            }
        }
        Err(Error::NonConvergence {
            what: "diffuse source iteration",
            iterations: SOURCE_MAX_ITER,
            residual: last_change,
        })
    }

    /// Dense operators at wavenumber `k`.
    ///
    /// Equivalent to applying [`Self::diffuse_solve`] to each `(e_j, C e_j)`
    /// but solved directly: with transport matrices `T_d`,
    /// `J = Σ w_d T_d` and `H = -κ Σ w_d T_d diag(G_d)`, the diffuse response
    /// is `(I - αJ D_n)^{-1} [αJ (D_n D_c C + D_I) + H]`.
    pub fn assemble(&self, k: f64) -> Result<PerturbOperators> {
        let n = self.n_z();
        let zero = C64::new(0.0, 0.0);
        let mut m_ic = Mat::<C64>::zeros(n, n);
        for j in 0..n {
            m_ic[(j, j)] = C64::new(self.ic_scale[j], 0.0);
        }
        if self.omega == 0.0 {
            let z = Mat::<C64>::zeros(n, n);
            return Ok(PerturbOperators {
                k,
                m_ic,
                m_id: z.clone(),
                m_p: z.clone(),
                m_q: z,
            });
        }
        let sw = self.sweeper(k)?;
        let mut j_iso = Mat::<C64>::zeros(n, n);
        let mut j_p = Mat::<C64>::zeros(n, n);
        let mut j_q = Mat::<C64>::zeros(n, n);
        let mut h = Mat::<C64>::zeros(n, n);
        let mut h_p = Mat::<C64>::zeros(n, n);
        let mut h_q = Mat::<C64>::zeros(n, n);
        for (di, d) in self.dirs.iter().enumerate() {
            let t = sw.sweep_matrix(di);
            let g = &self.g_diffuse[di];
            for r in 0..n {
                for c in 0..n {
                    let v = t[r * n + c];
                    if v == zero {
                        continue;
                    }
                    let wv = v * d.weight;
                    let hv = wv * (-self.kappa * g[c]);
                    j_iso[(r, c)] += wv;
                    j_p[(r, c)] += wv * d.xi;
                    j_q[(r, c)] += wv * d.eta;
                    h[(r, c)] += hv;
                    h_p[(r, c)] += hv * d.xi;
                    h_q[(r, c)] += hv * d.eta;
                }
            }
        }
        // G = D_n D_c C + D_I : the isotropic source per unit N, less the ℐ^d part
        let mut g_mat = Mat::<C64>::zeros(n, n);
        for r in 0..n {
            let s = self.n_s[r] * self.ic_scale[r];
            for c in 0..n {
                g_mat[(r, c)] = C64::new(s * self.cumulative[(r, c)], 0.0);
            }
            g_mat[(r, r)] += C64::new(self.i_s[r], 0.0);
        }
        let a = C64::new(self.alpha, 0.0);
        let mut lhs = Mat::<C64>::identity(n, n);
        for r in 0..n {
            for c in 0..n {
                lhs[(r, c)] -= a * j_iso[(r, c)] * self.n_s[c];
            }
        }
        let rhs = &(&j_iso * &g_mat) * faer::Scale(a) + &h;
        let m_id = lhs.partial_piv_lu().solve(&rhs);
        // isotropic source per unit N including the solved ℐ^d
        let mut s_full = g_mat;
        for r in 0..n {
            for c in 0..n {
                s_full[(r, c)] += m_id[(r, c)] * self.n_s[r];
            }
        }
        let s_full = &s_full * faer::Scale(a);
        let m_p = &(&j_p * &s_full) + &h_p;
        let m_q = &(&j_q * &s_full) + &h_q;
        Ok(PerturbOperators {
            k,
            m_ic,
            m_id,
            m_p,
            m_q,
        })
    }
}

pub fn diffuse_solve(
    b: &BasicState,
    p: &SuspensionParams,
    grid: &AngularGrid,
    k: f64,
    n_vec: &[C64],
    phi: &[C64],
) -> Result<DiffuseSolution> {
    PerturbSetup::new(b, p, grid)?.diffuse_solve(k, n_vec, phi)
}

pub fn assemble_operators(b: &BasicState, p: &SuspensionParams, grid: &AngularGrid, k: f64) -> Result<PerturbOperators> {
    PerturbSetup::new(b, p, grid)?.assemble(k)
}

/// Largest singular value by power iteration on `MᴴM`.
pub fn operator_norm(m: &Mat<C64>) -> f64 {
    let n = m.ncols();
    let mut x = Mat::<C64>::from_fn(n, 1, |i, _| C64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64));
    let mut est = 0.0;
    for _ in 0..500 {
        let y = m * &x;
        let z = m.adjoint() * &y;
        let nz = z.norm_l2();
        if nz == 0.0 {
            return 0.0;
        }
        let new = nz.sqrt() / x.norm_l2().sqrt();
        x = &z * faer::Scale(C64::new(1.0 / nz, 0.0));
        if (new - est).abs() <= 1e-13 * new {
            est = new;
            break;
        }
        est = new;
    }
    est
}

/// `sqrt(‖M‖₁ ‖M‖_∞)`, an upper bound on the spectral norm.
pub fn holder_bound(m: &Mat<C64>) -> f64 {
    let (r, c) = (m.nrows(), m.ncols());
    let one = (0..c).map(|j| (0..r).map(|i| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let inf = (0..r).map(|i| (0..c).map(|j| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    (one * inf).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angular_grid_covers_sphere() {
        for (a, b) in [(8, 8), (3, 5), (16, 16)] {
            let g = AngularGrid::new(a, b).unwrap();
            assert!((g.total_solid_angle() - 4.0 * PI).abs() < 1e-10);
            let s: f64 = g.directions().iter().map(|d| d.weight).sum();
            assert!((s - 4.0 * PI).abs() < 1e-10);
            assert!(g.mu.iter().all(|&m| m != 0.0));
            assert_eq!(g.mu.len(), 2 * a);
        }
    }

    #[test]
    fn first_moments_vanish_and_second_moment_is_4pi_over_3() {
        let g = AngularGrid::default();
        let d = g.directions();
        let mx: f64 = d.iter().map(|d| d.weight * d.xi).sum();
        let mz: f64 = d.iter().map(|d| d.weight * d.mu).sum();
        let m2: f64 = d.iter().map(|d| d.weight * d.mu * d.mu).sum();
        assert!(mx.abs() < 1e-12 && mz.abs() < 1e-12);
        assert!((m2 - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cumulative_matrix_integrates_cubics_exactly() {
        let z: Vec<f64> = (0..9).map(|j| j as f64 / 8.0).collect();
        let c = cumulative_matrix(&z).unwrap();
        let f: Vec<f64> = z.iter().map(|x| 1.0 + x - 3.0 * x * x + 2.0 * x * x * x).collect();
        let prim = |x: f64| x + 0.5 * x * x - x * x * x + 0.5 * x * x * x * x;
        for i in 0..9 {
            let v: f64 = (0..9).map(|j| c[(i, j)] * f[j]).sum();
            assert!((v - (prim(z[i]) - prim(1.0))).abs() < 1e-14);
        }
    }

    fn uniform_state(n_z: usize) -> BasicState {
        use crate::equilib::{solve_basic_state_with, TaxisModel};
        use crate::radlight::{solve_lambda, OpticsParams};
        let o = OpticsParams::new(0.8, 0.5, 0.0, 1.0).unwrap();
        let lam = solve_lambda(&o, 101).unwrap();
        let p = SuspensionParams::new(20.0, 0.0, 0.0, o, TaxisModel::tanh(1.0, 1.0).unwrap()).unwrap();
        solve_basic_state_with(&p, n_z, &lam, 4).unwrap()
    }

    /// RK4 on the ray equation with analytic coefficients (n_s ≡ 1).
    fn ray_rk4(mu: f64, xi: f64, k: f64, kappa: f64, s: impl Fn(f64) -> f64, steps: usize) -> Vec<(f64, C64)> {
        let f = |z: f64, psi: C64| (C64::new(s(z), 0.0) - C64::new(kappa, k * xi) * psi) / mu;
        let h = if mu > 0.0 { 1.0 } else { -1.0 } / steps as f64;
        let mut z = if mu > 0.0 { 0.0 } else { 1.0 };
        let mut psi = C64::new(0.0, 0.0);
        let mut out = vec![(z, psi)];
        for _ in 0..steps {
            let k1 = f(z, psi);
            let k2 = f(z + 0.5 * h, psi + k1 * (0.5 * h));
            let k3 = f(z + 0.5 * h, psi + k2 * (0.5 * h));
            let k4 = f(z + h, psi + k3 * h);
            psi += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            z += h;
            out.push((z, psi));
        }
        out
    }

    #[test]
    fn sweep_matches_fine_rk4_on_uniform_layer() {
        let b = uniform_state(17);
        let s = |z: f64| 0.3 + z - 0.7 * z * z + 0.4 * z * z * z;
        let src: Vec<C64> = b.z.iter().map(|&z| C64::new(s(z), 0.0)).collect();
        for &(mu, xi) in &[(0.7, 0.5), (-0.3, 0.9), (0.05, -0.99)] {
            let d = Direction { mu, xi, eta: 0.0, weight: 1.0 };
            let sw = RaySweeper::new(&b, &[d], 4.0, 1).unwrap();
            let mut psi = vec![C64::new(0.0, 0.0); 17];
            sw.sweep(0, &src, &mut psi);
            let fine = ray_rk4(mu, xi, 4.0, 0.8, s, 16 * 4096);
            for (zf, v) in fine.iter().step_by(4096) {
                let j = (zf * 16.0).round() as usize;
                assert!((psi[j] - v).norm() < 1e-10, "mu {mu} z {zf}: {} vs {}", psi[j], v);
            }
            let t = sw.sweep_matrix(0);
            for r in 0..17 {
                let tv: C64 = (0..17).map(|c| t[r * 17 + c] * src[c]).sum();
                assert!((tv - psi[r]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn lagrange_basis_partitions_unity() {
        let x = [0.0, 0.25, 0.5, 0.75];
        for t in [0.1, 0.3, 0.6] {
            let l = lagrange4(&x, t);
            assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }
}

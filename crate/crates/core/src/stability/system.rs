//! Discretised `(W, Z, N)` eigenproblem `A x = σ B x`.
//!
//! The third block carries `N = DΦ` at every node; `Φ` is recovered as
//! `C N` with the cumulative matrix of [`crate::perturb`], which builds
//! `Φ(1) = 0` into the unknowns and leaves a square system.

use faer::Mat;
use num_complex::Complex64 as C64;

use super::fd::Derivatives;
use crate::equilib::{BasicState, SuspensionParams};
use crate::error::{Error, Result};
use crate::perturb::{cumulative_matrix, PerturbOperators};

pub const FD_ORDER: usize = 4;

/// Coefficient profiles of the concentration equation.
#[derive(Debug, Clone, PartialEq)]
pub struct XiProfiles {
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub xi3: Vec<f64>,
}

/// `Ξ₁, Ξ₂, Ξ₃` expanded from the perturbed flux term with the collimated
/// perturbation `ℐ^c = (κ I_s^c / μ₀) Φ`.
pub fn xi_profiles(b: &BasicState, p: &SuspensionParams) -> XiProfiles {
    let kappa = p.optics.kappa;
    let mu0 = p.optics.mu0();
    let vc = p.vc;
    let n = b.len();
    let mut xi1 = vec![0.0; n];
    let mut xi2 = vec![0.0; n];
    let mut xi3 = vec![0.0; n];
    for i in 0..n {
        let (ns, ic) = (b.n_s[i], b.i_s_c[i]);
        let (t1, t2) = (b.dt_di[i], b.d2t_di2[i]);
        let dic = kappa * ns * ic / mu0;
        let di = dic + b.d_isd_dz[i];
        xi3[i] = vc * b.t_s[i];
        xi2[i] = 2.0 * kappa * vc * ns * ic * t1 / mu0 + vc * t1 * b.d_isd_dz[i];
        // D(n_s I^c T') by the product rule
        let d = b.dns_dz[i] * ic * t1 + ns * dic * t1 + ns * ic * t2 * di;
        xi1[i] = kappa * vc / mu0 * d;
    }
    XiProfiles { xi1, xi2, xi3 }
}

/// Boundary treatment of the surrogate concentration equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurrogateWalls {
    /// `N = 0` at both walls.
    Fixed,
    /// `DN = 0` at both walls.
    Insulated,
}

#[derive(Debug, Clone)]
pub struct DiscretizedSystem {
    pub k: f64,
    pub r: f64,
    pub n_z: usize,
    pub a: Mat<C64>,
    pub b: Mat<C64>,
}

impl DiscretizedSystem {
    pub fn dim(&self) -> usize {
        3 * self.n_z
    }
}

/// `A(R) = A₀ + R A₁` with `A₁` holding only the `R k² N` forcing of the
/// momentum rows.
#[derive(Debug, Clone)]
pub struct SystemTemplate {
    pub k: f64,
    pub n_z: usize,
    a0: Mat<C64>,
    forcing: Vec<(usize, usize, f64)>,
    b: Mat<C64>,
}

impl SystemTemplate {
    /// System at Rayleigh number `r`, rows equilibrated by their largest
    /// entry.
    pub fn at(&self, r: f64) -> DiscretizedSystem {
        let mut a = self.a0.clone();
        for &(i, j, v) in &self.forcing {
            a[(i, j)] += C64::new(r * v, 0.0);
        }
        let mut b = self.b.clone();
        for i in 0..a.nrows() {
            let mut m = 0.0f64;
            for j in 0..a.ncols() {
                m = m.max(a[(i, j)].norm()).max(b[(i, j)].norm());
            }
            if m > 0.0 {
                let s = 1.0 / m;
                for j in 0..a.ncols() {
                    a[(i, j)] *= s;
                    b[(i, j)] *= s;
                }
            }
        }
        DiscretizedSystem {
            k: self.k,
            r,
            n_z: self.n_z,
            a,
            b,
        }
    }

    /// Unit-R forcing entries `(row, col, coefficient)`.
    pub fn forcing(&self) -> &[(usize, usize, f64)] {
        &self.forcing
    }
}

/// Momentum and vorticity rows common to both concentration models.
struct Builder {
    n: usize,
    k: f64,
    a: Mat<C64>,
    b: Mat<C64>,
    forcing: Vec<(usize, usize, f64)>,
}

impl Builder {
    fn new(n: usize, k: f64, sc: f64, ta: f64, d: &Derivatives) -> Self {
        let dim = 3 * n;
        let mut a = Mat::<C64>::zeros(dim, dim);
        let mut b = Mat::<C64>::zeros(dim, dim);
        let mut forcing = Vec::new();
        let (w, z, c) = (0, n, 2 * n);
        let k2 = k * k;
        let rt = ta.sqrt();
        let re = |v: f64| C64::new(v, 0.0);
        // rigid bottom: W = DW = 0; stress-free top: W = D²W = 0
        a[(w, w)] = re(1.0);
        for j in 0..n {
            a[(w + 1, w + j)] = re(d.d1[(0, j)]);
            a[(w + n - 1, w + j)] = re(d.d2[(n - 1, j)]);
        }
        a[(w + n - 2, w + n - 1)] = re(1.0);
        // (σ/Sc) L W = L² W + R k² N − √Ta DZ with L = D² − k²
        for i in 2..n - 2 {
            let row = w + i;
            for j in 0..n {
                let l2 = d.d4[(i, j)] - 2.0 * k2 * d.d2[(i, j)] + if i == j { k2 * k2 } else { 0.0 };
                a[(row, w + j)] = re(l2);
                a[(row, z + j)] = re(-rt * d.d1[(i, j)]);
                b[(row, w + j)] = re((d.d2[(i, j)] - if i == j { k2 } else { 0.0 }) / sc);
            }
            forcing.push((row, c + i, k2));
        }
        // Z = 0 at the bottom, DZ = 0 at the top
        a[(z, z)] = re(1.0);
        for j in 0..n {
            a[(z + n - 1, z + j)] = re(d.d1[(n - 1, j)]);
        }
        // (σ/Sc) Z = (D² − k²) Z + √Ta DW
        for i in 1..n - 1 {
            for j in 0..n {
                a[(z + i, z + j)] = re(d.d2[(i, j)] - if i == j { k2 } else { 0.0 });
                a[(z + i, w + j)] = re(rt * d.d1[(i, j)]);
            }
            b[(z + i, z + i)] = re(1.0 / sc);
        }
        Builder { n, k, a, b, forcing }
    }

    fn finish(self) -> SystemTemplate {
        SystemTemplate {
            k: self.k,
            n_z: self.n,
            a0: self.a,
            forcing: self.forcing,
            b: self.b,
        }
    }
}

/// The phototactic system at the wavenumber of `ops`.
pub fn assemble_template(
    b: &BasicState,
    p: &SuspensionParams,
    ops: &PerturbOperators,
    d: &Derivatives,
    xi: &XiProfiles,
) -> Result<SystemTemplate> {
    let n = b.len();
    for (name, m) in [("M_Id", &ops.m_id), ("M_P", &ops.m_p), ("M_Ic", &ops.m_ic)] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!("{name} is {}×{}, grid has {n} nodes", m.nrows(), m.ncols())));
        }
    }
    if d.d1.nrows() != n || xi.xi1.len() != n {
        return Err(Error::Dimension("derivative matrices or profiles off the basic-state grid".into()));
    }
    let k = ops.k;
    let cum = cumulative_matrix(&b.z)?;
    let mut bl = Builder::new(n, k, p.sc, p.ta, d);
    let (w, c) = (0, 2 * n);
    let vc = p.vc;
    let re = |v: f64| C64::new(v, 0.0);
    // Ξ₀ N = V_c D(n_s T' ℐ^d) − i k V_c (n_s T / |q_s|) P
    let mut weighted = ops.m_id.clone();
    for i in 0..n {
        let s = b.n_s[i] * b.dt_di[i];
        for j in 0..n {
            weighted[(i, j)] *= s;
        }
    }
    let d1c = Mat::<C64>::from_fn(n, n, |i, j| re(d.d1[(i, j)]));
    let mut xi0 = &d1c * &weighted * faer::Scale(re(vc));
    for i in 0..n {
        let s = C64::new(0.0, -k * vc * b.n_s[i] * b.t_s[i] / b.q_mag[i]);
        for j in 0..n {
            xi0[(i, j)] += s * ops.m_p[(i, j)];
        }
    }
    // σ N = D²N − Ξ₃ DN − (k² + Ξ₂) N − Ξ₁ C N − Ξ₀ N − Dn_s W
    for i in 1..n - 1 {
        let row = c + i;
        for j in 0..n {
            let mut v = re(d.d2[(i, j)] - xi.xi3[i] * d.d1[(i, j)] - xi.xi1[i] * cum[(i, j)]) - xi0[(i, j)];
            if i == j {
                v -= re(k * k + xi.xi2[i]);
            }
            bl.a[(row, c + j)] = v;
        }
        bl.a[(row, w + i)] = re(-b.dns_dz[i]);
        bl.b[(row, c + i)] = re(1.0);
    }
    // zero cell flux: DN − V_c T N − n_s V_c T' (ℐ^c + ℐ^d) = 0
    for (row, wall) in [(c, 0), (c + n - 1, n - 1)] {
        let g = b.n_s[wall] * vc * b.dt_di[wall];
        let ic = ops.m_ic[(wall, wall)];
        for j in 0..n {
            let mut v = re(d.d1[(wall, j)]) - g * (ic * cum[(wall, j)] + ops.m_id[(wall, j)]);
            if j == wall {
                v -= re(vc * b.t_s[wall]);
            }
            bl.a[(row, c + j)] = v;
        }
    }
    Ok(bl.finish())
}

pub fn assemble(
    b: &BasicState,
    p: &SuspensionParams,
    ops: &PerturbOperators,
    r: f64,
) -> Result<DiscretizedSystem> {
    let d = Derivatives::new(&b.z, FD_ORDER);
    let xi = xi_profiles(b, p);
    Ok(assemble_template(b, p, ops, &d, &xi)?.at(r))
}

/// Rotating convection with the concentration equation replaced by
/// `(σ + k² − D²) N = −DW` (unit gradient), on a uniform grid of `n_z` nodes.
pub fn benard_template(n_z: usize, k: f64, sc: f64, ta: f64, walls: SurrogateWalls) -> Result<SystemTemplate> {
    if n_z < 9 {
        return Err(Error::Dimension(format!("need at least 9 nodes, got {n_z}")));
    }
    let z: Vec<f64> = (0..n_z).map(|i| i as f64 / (n_z - 1) as f64).collect();
    let d = Derivatives::new(&z, FD_ORDER);
    let n = n_z;
    let mut bl = Builder::new(n, k, sc, ta, &d);
    let c = 2 * n;
    let re = |v: f64| C64::new(v, 0.0);
    for i in 1..n - 1 {
        for j in 0..n {
            bl.a[(c + i, c + j)] = re(d.d2[(i, j)] - if i == j { k * k } else { 0.0 });
        }
        bl.a[(c + i, i)] = re(-1.0);
        bl.b[(c + i, c + i)] = re(1.0);
    }
    for wall in [0, n - 1] {
        match walls {
            SurrogateWalls::Fixed => bl.a[(c + wall, c + wall)] = re(1.0),
            SurrogateWalls::Insulated => {
                for j in 0..n {
                    bl.a[(c + wall, c + j)] = re(d.d1[(wall, j)]);
                }
            }
        }
    }
    Ok(bl.finish())
}

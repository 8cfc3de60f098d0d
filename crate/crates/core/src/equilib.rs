//! Taxis response and the equilibrium concentration profile.
//!
//! The basic state solves `dn_s/dz = V_c T(I_s) n_s` with `∫_0^1 n_s dz = 1`,
//! where `I_s = G_t Λ(τ)` and `τ(z) = κ ∫_z^1 n_s dz'`. Writing
//! `ν(z) = ∫_0^z n_s` turns this into an initial-value problem in `(ν, n_s)`
//! that is shot on `n_s(0)` until `ν(1) = 1`.

use crate::error::{Error, Result};
use crate::radlight::{solve_lambda, DiffuseFields, IntensityProfile, OpticsParams};
use crate::specfun::{InterpScheme, Interpolant1D};

#[derive(Debug, Clone, PartialEq)]
pub enum TaxisKind {
    /// `T(I) = tanh(s (1 - I/I_c))`.
    Tanh { steepness: f64 },
    /// Tabulated response, monotone-cubic in `I`, held constant beyond the table.
    Table(Interpolant1D),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaxisModel {
    pub kind: TaxisKind,
    pub i_c: f64,
}

impl TaxisModel {
    pub fn tanh(steepness: f64, i_c: f64) -> Result<Self> {
        if !(steepness > 0.0 && steepness.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "taxis steepness must be positive, got {steepness}"
            )));
        }
        check_ic(i_c)?;
        Ok(Self {
            kind: TaxisKind::Tanh { steepness },
            i_c,
        })
    }

    /// Tabulated taxis. Values must lie in `(-1, 1)`, be non-negative below
    /// `I_c` and non-positive above it.
    pub fn table(intensity: Vec<f64>, response: Vec<f64>, i_c: f64) -> Result<Self> {
        check_ic(i_c)?;
        for (&i, &t) in intensity.iter().zip(&response) {
            if !(i > 0.0) {
                return Err(Error::InvalidParameter(format!("table intensity {i} must be positive")));
            }
            if !(t.abs() < 1.0) {
                return Err(Error::InvalidParameter(format!("|T| = {} must be below 1", t.abs())));
            }
            if (i < i_c && t < 0.0) || (i > i_c && t > 0.0) || (i == i_c && t != 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "T({i}) = {t} breaks the sign structure about I_c = {i_c}"
                )));
            }
        }
        let interp = Interpolant1D::new(intensity, response, InterpScheme::MonotoneCubic)?;
        Ok(Self {
            kind: TaxisKind::Table(interp),
            i_c,
        })
    }

    /// `(T(I), dT/dI)`.
    pub fn eval(&self, i: f64) -> (f64, f64) {
        match &self.kind {
            TaxisKind::Tanh { steepness: s } => {
                let u = s * (1.0 - i / self.i_c);
                let t = u.tanh();
                (t, -(s / self.i_c) * (1.0 - t * t))
            }
            TaxisKind::Table(f) => {
                let (lo, hi) = f.domain();
                let x = i.clamp(lo, hi);
                let t = f.eval(x).expect("clamped into table");
                let d = if i < lo || i > hi { 0.0 } else { f.derivative(x).expect("clamped") };
                (t, d)
            }
        }
    }

    /// `d²T/dI²`.
    pub fn second_derivative(&self, i: f64) -> f64 {
        match &self.kind {
            TaxisKind::Tanh { steepness: s } => {
                let t = (s * (1.0 - i / self.i_c)).tanh();
                let a = s / self.i_c;
                -2.0 * a * a * (1.0 - t * t) * t
            }
            TaxisKind::Table(f) => {
                let (lo, hi) = f.domain();
                if i < lo || i > hi {
                    0.0
                } else {
                    f.second_derivative(i).expect("inside table")
                }
            }
        }
    }
}

fn check_ic(i_c: f64) -> Result<()> {
    if !(i_c > 0.0 && i_c.is_finite()) {
        return Err(Error::InvalidParameter(format!("critical intensity must be positive, got {i_c}")));
    }
    Ok(())
}

pub fn taxis_eval(m: &TaxisModel, i: f64) -> (f64, f64) {
    m.eval(i)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuspensionParams {
    pub sc: f64,
    pub ta: f64,
    pub vc: f64,
    pub optics: OpticsParams,
    pub taxis: TaxisModel,
}

pub const DEFAULT_SC: f64 = 20.0;
pub const DEFAULT_I_C: f64 = 1.0;

impl SuspensionParams {
    pub fn new(sc: f64, ta: f64, vc: f64, optics: OpticsParams, taxis: TaxisModel) -> Result<Self> {
        let p = Self { sc, ta, vc, optics, taxis };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sc > 0.0 && self.sc.is_finite()) {
            return Err(Error::InvalidParameter(format!("Sc must be positive, got {}", self.sc)));
        }
        if !(self.ta >= 0.0 && self.ta.is_finite()) {
            return Err(Error::InvalidParameter(format!("Ta must be non-negative, got {}", self.ta)));
        }
        if !(self.vc >= 0.0 && self.vc.is_finite()) {
            return Err(Error::InvalidParameter(format!("V_c must be non-negative, got {}", self.vc)));
        }
        self.optics.validate()
    }
}

/// Equilibrium profiles on a uniform grid `z_j = j/(N_z-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicState {
    pub z: Vec<f64>,
    pub n_s: Vec<f64>,
    /// Cumulative content `ν(z) = ∫_0^z n_s dz'` from the integrator.
    pub nu: Vec<f64>,
    pub tau: Vec<f64>,
    pub i_s: Vec<f64>,
    pub i_s_c: Vec<f64>,
    pub i_s_d: Vec<f64>,
    /// `dI_s^d/dz`. The slope is log-singular at the walls, so the two end
    /// entries hold the value half a cell inside.
    pub d_isd_dz: Vec<f64>,
    pub q_mag: Vec<f64>,
    pub t_s: Vec<f64>,
    pub dt_di: Vec<f64>,
    pub d2t_di2: Vec<f64>,
    pub dns_dz: Vec<f64>,
    /// Shooting parameter `n_s(0)` and final residual `|ν(1) - 1|`.
    pub n_s0: f64,
    pub shooting_residual: f64,
    pub optics: OpticsParams,
}

impl BasicState {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    /// Height of the concentration maximum, from the sign change of `T(I_s)`
    /// (linear between nodes); the grid argmax when `T` keeps one sign.
    pub fn peak_height(&self) -> f64 {
        for j in 0..self.len() - 1 {
            let (a, b) = (self.t_s[j], self.t_s[j + 1]);
            if a > 0.0 && b <= 0.0 {
                return self.z[j] + (self.z[j + 1] - self.z[j]) * a / (a - b);
            }
        }
        let (j, _) = self
            .n_s
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
        self.z[j]
    }

    pub fn argmax_n_s(&self) -> f64 {
        let (j, _) = self
            .n_s
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
        self.z[j]
    }

    /// `∫_0^1 n_s dz` as carried by the integrator.
    pub fn mass(&self) -> f64 {
        *self.nu.last().unwrap()
    }

    pub const CSV_HEADER: &'static str = "z,n_s,tau,I_s,I_s^c,I_s^d,q_mag,T_s";

    /// One CSV row per node.
    pub fn csv_rows(&self) -> Vec<[f64; 8]> {
        (0..self.len())
            .map(|j| {
                [
                    self.z[j],
                    self.n_s[j],
                    self.tau[j],
                    self.i_s[j],
                    self.i_s_c[j],
                    self.i_s_d[j],
                    self.q_mag[j],
                    self.t_s[j],
                ]
            })
            .collect()
    }
}

pub const MIN_NZ: usize = 65;
/// RK4 steps per grid cell.
pub const DEFAULT_SUBSTEPS: usize = 16;
const SHOOT_LO: f64 = 1e-4;
const SHOOT_HI: f64 = 50.0;
const SHOOT_TOL: f64 = 1e-10;

pub fn solve_basic_state(p: &SuspensionParams, n_z: usize, lam: &IntensityProfile) -> Result<BasicState> {
    if n_z < MIN_NZ {
        return Err(Error::InvalidParameter(format!("N_z = {n_z} below the minimum {MIN_NZ}")));
    }
    solve_basic_state_with(p, n_z, lam, DEFAULT_SUBSTEPS)
}

/// As [`solve_basic_state`] with an explicit RK4 substep count and no lower
/// bound on `N_z` beyond 5.
pub fn solve_basic_state_with(
    p: &SuspensionParams,
    n_z: usize,
    lam: &IntensityProfile,
    substeps: usize,
) -> Result<BasicState> {
    p.validate()?;
    if n_z < 5 || substeps == 0 {
        return Err(Error::InvalidParameter(format!("N_z = {n_z}, substeps = {substeps}")));
    }
    if (lam.kappa() - p.optics.kappa).abs() > 1e-14 || lam.optics().omega != p.optics.omega {
        return Err(Error::InvalidParameter("intensity profile solved for different optics".into()));
    }
    let shooter = Shooter {
        lam,
        kappa: p.optics.kappa,
        g_t: p.optics.g_t,
        vc: p.vc,
        taxis: &p.taxis,
        n_z,
        substeps,
    };
    let (n0, nu, n) = shooter.shoot()?;
    let residual = (nu[n_z - 1] - 1.0).abs();
    fill_state(p, lam, n0, residual, &nu, &n)
}

struct Shooter<'a> {
    lam: &'a IntensityProfile,
    kappa: f64,
    g_t: f64,
    vc: f64,
    taxis: &'a TaxisModel,
    n_z: usize,
    substeps: usize,
}

impl Shooter<'_> {
    fn rate(&self, nu: f64) -> f64 {
        if self.vc == 0.0 {
            return 0.0;
        }
        let tau = (self.kappa * (1.0 - nu)).clamp(0.0, self.kappa);
        self.vc * self.taxis.eval(self.g_t * self.lam.eval_clamped(tau)).0
    }

    /// RK4 from `z = 0`; returns `(ν, n)` at the grid nodes.
    fn integrate(&self, n0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let cells = self.n_z - 1;
        let h = 1.0 / (cells * self.substeps) as f64;
        let mut nu_out = Vec::with_capacity(self.n_z);
        let mut n_out = Vec::with_capacity(self.n_z);
        let (mut nu, mut n) = (0.0f64, n0);
        nu_out.push(nu);
        n_out.push(n);
        for c in 0..cells {
            for _ in 0..self.substeps {
                let k1 = (n, self.rate(nu) * n);
                let (a, b) = (nu + 0.5 * h * k1.0, n + 0.5 * h * k1.1);
                let k2 = (b, self.rate(a) * b);
                let (a, b) = (nu + 0.5 * h * k2.0, n + 0.5 * h * k2.1);
                let k3 = (b, self.rate(a) * b);
                let (a, b) = (nu + h * k3.0, n + h * k3.1);
                let k4 = (b, self.rate(a) * b);
                nu += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                n += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            }
            if !(n.is_finite() && nu.is_finite()) {
                return Err(Error::Integration(format!(
                    "non-finite state at z = {} from n_s(0) = {n0}",
                    (c + 1) as f64 / cells as f64
                )));
            }
            if n <= 0.0 {
                return Err(Error::NonPositiveConcentration {
                    z: (c + 1) as f64 / cells as f64,
                    value: n,
                });
            }
            nu_out.push(nu);
            n_out.push(n);
        }
        Ok((nu_out, n_out))
    }

    fn miss(&self, n0: f64) -> Result<f64> {
        let (nu, _) = self.integrate(n0)?;
        Ok(nu[self.n_z - 1] - 1.0)
    }

    fn shoot(&self) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let (mut lo, mut hi) = (SHOOT_LO, SHOOT_HI);
        let mut f_lo = self.miss(lo)?;
        let mut f_hi = self.miss(hi)?;
        // a one-signed taxis can push n_s(0) far outside the initial bracket
        let mut widen = 0;
        while f_lo >= 0.0 && widen < 60 && lo > 1e-280 {
            hi = lo;
            f_hi = f_lo;
            lo *= 1e-4;
            f_lo = self.miss(lo)?;
            widen += 1;
        }
        while f_hi <= 0.0 && widen < 60 && hi < 1e6 {
            lo = hi;
            f_lo = f_hi;
            hi *= 10.0;
            f_hi = self.miss(hi)?;
            widen += 1;
        }
        if !(f_lo < 0.0 && f_hi > 0.0) {
            return Err(Error::BracketNotFound {
                what: "shooting parameter n_s(0)",
                lo,
                hi,
                trace: format!("nu(1)-1 = {f_lo:e} at lo, {f_hi:e} at hi"),
            });
        }
        // geometric bisection until the bracket is narrow, then Illinois
        while hi / lo > 1.05 {
            let mid = (lo * hi).sqrt();
            let f = self.miss(mid)?;
            if f == 0.0 {
                let (nu, n) = self.integrate(mid)?;
                return Ok((mid, nu, n));
            }
            if f < 0.0 {
                lo = mid;
                f_lo = f;
            } else {
                hi = mid;
                f_hi = f;
            }
        }
        let mut side = 0i8;
        let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
        for _ in 0..200 {
            if best.1.abs() <= SHOOT_TOL * 0.01 {
                break;
            }
            let x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            let f = self.miss(x)?;
            if f.abs() < best.1.abs() {
                best = (x, f);
            }
            if f < 0.0 {
                lo = x;
                f_lo = f;
                if side == -1 {
                    f_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = x;
                f_hi = f;
                if side == 1 {
                    f_lo *= 0.5;
                }
                side = 1;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        if best.1.abs() > SHOOT_TOL {
            return Err(Error::NonConvergence {
                what: "basic-state shooting",
                iterations: 200,
                residual: best.1.abs(),
            });
        }
        let (nu, n) = self.integrate(best.0)?;
        Ok((best.0, nu, n))
    }
}

fn fill_state(
    p: &SuspensionParams,
    lam: &IntensityProfile,
    n0: f64,
    residual: f64,
    nu: &[f64],
    n: &[f64],
) -> Result<BasicState> {
    let o = &p.optics;
    let kappa = o.kappa;
    let n_z = n.len();
    let z: Vec<f64> = (0..n_z).map(|j| j as f64 / (n_z - 1) as f64).collect();
    let mut tau: Vec<f64> = nu.iter().map(|v| (kappa * (1.0 - v)).clamp(0.0, kappa)).collect();
    tau[0] = kappa;
    tau[n_z - 1] = tau[n_z - 1].min(kappa * residual);
    let diffuse = DiffuseFields::new(lam);
    let i_s: Vec<f64> = tau.iter().map(|&t| o.g_t * lam.eval_clamped(t)).collect();
    let i_s_c: Vec<f64> = tau.iter().map(|&t| o.g_t * o.collimated(t)).collect();
    let i_s_d = tau.iter().map(|&t| diffuse.intensity(t)).collect::<Result<Vec<_>>>()?;
    let slope_at = |t: f64, nn: f64| -> Result<f64> { Ok(-kappa * nn * diffuse.intensity_slope(t)?) };
    let mut d_isd_dz = vec![0.0; n_z];
    for j in 1..n_z - 1 {
        d_isd_dz[j] = slope_at(tau[j], n[j])?;
    }
    // wall entries from half a cell inside; τ and n_s there by cubic interpolation
    let tau_i = Interpolant1D::new(z.clone(), tau.clone(), InterpScheme::CubicSpline)?;
    let n_i = Interpolant1D::new(z.clone(), n.to_vec(), InterpScheme::CubicSpline)?;
    let hh = 0.5 * (z[1] - z[0]);
    for (j, zz) in [(0, hh), (n_z - 1, 1.0 - hh)] {
        let t = tau_i.eval(zz)?.clamp(0.0, kappa);
        d_isd_dz[j] = slope_at(t, n_i.eval(zz)?)?;
    }
    let mu0 = o.mu0();
    let q_mag = tau
        .iter()
        .map(|&t| Ok((diffuse.flux(t)? - o.g_t * mu0 * o.collimated(t)).abs()))
        .collect::<Result<Vec<_>>>()?;
    let (t_s, dt_di): (Vec<f64>, Vec<f64>) = i_s.iter().map(|&i| p.taxis.eval(i)).unzip();
    let d2t_di2 = i_s.iter().map(|&i| p.taxis.second_derivative(i)).collect();
    let dns_dz = n.iter().zip(&t_s).map(|(nn, t)| p.vc * t * nn).collect();
    Ok(BasicState {
        z,
        n_s: n.to_vec(),
        nu: nu.to_vec(),
        tau,
        i_s,
        i_s_c,
        i_s_d,
        d_isd_dz,
        q_mag,
        t_s,
        dt_di,
        d2t_di2,
        dns_dz,
        n_s0: n0,
        shooting_residual: residual,
        optics: *o,
    })
}

/// Outcome of [`calibrate_steepness`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub steepness: f64,
    /// Peak height reached with this steepness.
    pub peak_height: f64,
    /// Whether the peak sits at mid-height (otherwise within [`CALIBRATION_BAND`]).
    pub exact: bool,
}

/// Half-width of the accepted band about mid-height when 1/2 itself is
/// out of reach.
pub const CALIBRATION_BAND: f64 = 0.05;

/// Steepness `s` of the tanh taxis that puts the concentration maximum at
/// mid-height under normal incidence for the given `(κ, ω, G_t, V_c, I_c)`.
///
/// Scans `s` log-uniformly over `[0.05, 200]` and bisects on the first
/// crossing of 1/2. Some `(κ, ω)` pairs never place the peak exactly at
/// mid-height; then the largest `s` whose peak stays within
/// [`CALIBRATION_BAND`] of 1/2 is used.
pub fn calibrate_steepness(
    kappa: f64,
    omega: f64,
    g_t: f64,
    vc: f64,
    i_c: f64,
    n_z: usize,
    fie_nodes: usize,
) -> Result<Calibration> {
    let optics = OpticsParams::new(kappa, omega, 0.0, g_t)?;
    let lam = solve_lambda(&optics, fie_nodes)?;
    let peak = |s: f64| -> Result<f64> {
        let p = SuspensionParams::new(DEFAULT_SC, 0.0, vc, optics, TaxisModel::tanh(s, i_c)?)?;
        Ok(solve_basic_state(&p, n_z, &lam)?.peak_height() - 0.5)
    };
    let grid: Vec<f64> = (0..=24).map(|i| 0.05 * (4000.0f64).powf(i as f64 / 24.0)).collect();
    let vals = grid.iter().map(|&s| peak(s)).collect::<Result<Vec<_>>>()?;
    let bisect = |lo: f64, hi: f64, f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let (mut lo, mut hi) = (lo, hi);
        let mut f_lo = f(lo)?;
        for _ in 0..80 {
            let mid = (lo * hi).sqrt();
            let fm = f(mid)?;
            if fm.signum() == f_lo.signum() {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
            }
            if hi / lo < 1.0 + 1e-10 {
                break;
            }
        }
        Ok((lo * hi).sqrt())
    };
    if let Some(i) = (0..grid.len() - 1).find(|&i| vals[i].signum() != vals[i + 1].signum()) {
        let s = bisect(grid[i], grid[i + 1], &peak)?;
        return Ok(Calibration {
            steepness: s,
            peak_height: peak(s)? + 0.5,
            exact: true,
        });
    }
    let inside: Vec<usize> = (0..grid.len()).filter(|&i| vals[i].abs() <= CALIBRATION_BAND).collect();
    let Some(&last) = inside.last() else {
        let (j, _) = vals
            .iter()
            .enumerate()
            .fold((0, f64::MAX), |acc, (j, v)| if v.abs() < acc.1 { (j, v.abs()) } else { acc });
        log::warn!("peak height stays outside 1/2 ± {CALIBRATION_BAND}; closest {:.4}", vals[j] + 0.5);
        return Ok(Calibration {
            steepness: grid[j],
            peak_height: vals[j] + 0.5,
            exact: false,
        });
    };
    let s = if last + 1 < grid.len() {
        let edge = |s: f64| -> Result<f64> { Ok(peak(s)?.abs() - CALIBRATION_BAND) };
        bisect(grid[last], grid[last + 1], &edge)?
    } else {
        grid[last]
    };
    Ok(Calibration {
        steepness: s,
        peak_height: peak(s)? + 0.5,
        exact: false,
    })
}

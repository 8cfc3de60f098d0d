//! Basic-state radiative transfer in the optical-depth coordinate.
//!
//! The scaled total intensity `Λ(τ) = I_s/G_t` obeys the second-kind
//! Fredholm equation
//!
//! ```text
//! Λ(τ) = exp(-τ/μ₀) + (ω/2) ∫_0^κ Λ(τ') E_1(|τ - τ'|) dτ'
//! ```
//!
//! with `μ₀ = cos θ_i`. The logarithmic kernel singularity is removed by
//! subtracting `Λ(τ)` under the integral and adding back the closed form
//! `∫_0^κ E_1(|τ - τ'|) dτ' = 2 - E_2(τ) - E_2(κ - τ)`; the remaining
//! continuous integrand is discretised by the composite trapezoid rule on a
//! uniform grid (Nyström). The profile depends on `τ` only, so it is solved
//! once per `(κ, ω, θ_i)` and composed with `τ(z)` afterwards.

use faer::prelude::*;
use faer::Mat;

use crate::error::{Error, Result};
use crate::specfun::{e1_positive, e2, gauss_legendre, InterpScheme, Interpolant1D};

/// Optical parameters of the illuminated layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticsParams {
    /// Extinction optical depth of the full layer.
    pub kappa: f64,
    /// Single-scattering albedo, `0 ≤ ω < 1`.
    pub omega: f64,
    /// Incidence angle from the inward vertical, radians.
    pub theta_i: f64,
    /// Magnitude of the collimated top irradiation.
    pub g_t: f64,
}

impl OpticsParams {
    pub fn new(kappa: f64, omega: f64, theta_i: f64, g_t: f64) -> Result<Self> {
        let p = Self {
            kappa,
            omega,
            theta_i,
            g_t,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_degrees(kappa: f64, omega: f64, theta_deg: f64, g_t: f64) -> Result<Self> {
        Self::new(kappa, omega, theta_deg.to_radians(), g_t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa = {} must be > 0", self.kappa)));
        }
        if !(0.0..1.0).contains(&self.omega) {
            return Err(Error::InvalidParameter(format!(
                "omega = {} must lie in [0, 1)",
                self.omega
            )));
        }
        if !(self.theta_i >= 0.0 && self.theta_i < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "theta_i = {} rad must lie in [0, pi/2)",
                self.theta_i
            )));
        }
        if !(self.g_t > 0.0 && self.g_t.is_finite()) {
            return Err(Error::InvalidParameter(format!("G_t = {} must be > 0", self.g_t)));
        }
        Ok(())
    }

    /// Cosine of the incidence angle; the slant factor of the beam.
    pub fn mu0(&self) -> f64 {
        self.theta_i.cos()
    }

    /// Scaled collimated intensity `exp(-τ/μ₀)`.
    pub fn collimated(&self, tau: f64) -> f64 {
        (-tau / self.mu0()).exp()
    }
}

/// Outer solver for the discrete Fredholm system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieMethod {
    /// Fixed-point (source) iteration; contracts at a rate no worse than ω.
    #[default]
    Picard,
    /// Direct dense LU solve of `(I - ω/2 K) Λ = f`.
    Dense,
}

/// Solved total-intensity profile `Λ(τ)` on a uniform optical-depth grid.
#[derive(Debug, Clone)]
pub struct IntensityProfile {
    optics: OpticsParams,
    tau: Vec<f64>,
    lambda: Vec<f64>,
    interp: Interpolant1D,
    residual: f64,
    iterations: usize,
}

impl IntensityProfile {
    pub fn optics(&self) -> &OpticsParams {
        &self.optics
    }

    pub fn tau_nodes(&self) -> &[f64] {
        &self.tau
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn kappa(&self) -> f64 {
        self.optics.kappa
    }

    /// Sup-norm residual of the discrete equation at the returned solution.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `Λ(τ)` by cubic-spline interpolation; errors outside `[0, κ]`.
    pub fn eval(&self, tau: f64) -> Result<f64> {
        self.interp.eval(tau)
    }

    /// `Λ` at `τ` clamped into `[0, κ]`, for callers whose `τ` carries
    /// round-off or is a trial value during shooting.
    pub fn eval_clamped(&self, tau: f64) -> f64 {
        let t = tau.clamp(0.0, self.optics.kappa);
        self.interp.eval(t).expect("clamped argument is inside the grid")
    }

    pub fn max_lambda(&self) -> f64 {
        self.lambda.iter().cloned().fold(f64::MIN, f64::max)
    }
}

/// Discrete Nyström operator `(K Λ)_i ≈ ∫_0^κ Λ(τ') E_1(|τ_i - τ'|) dτ'`.
#[derive(Debug, Clone)]
pub(crate) struct NystromKernel {
    pub tau: Vec<f64>,
    /// Row-major `n × n`.
    pub k: Vec<f64>,
    pub n: usize,
}

impl NystromKernel {
    pub fn new(kappa: f64, n: usize) -> Self {
        let h = kappa / (n - 1) as f64;
        let tau: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let e1_by_offset: Vec<f64> = (0..n)
            .map(|m| if m == 0 { 0.0 } else { e1_positive(m as f64 * h) })
            .collect();
        let weight = |j: usize| if j == 0 || j == n - 1 { 0.5 * h } else { h };
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            let row = &mut k[i * n..(i + 1) * n];
            let mut off_sum = 0.0;
            for j in 0..n {
                if j != i {
                    let v = weight(j) * e1_by_offset[i.abs_diff(j)];
                    row[j] = v;
                    off_sum += v;
                }
            }
            let exact = 2.0 - e2(tau[i]) - e2(kappa - tau[i]);
            row[i] = exact - off_sum;
        }
        Self { tau, k, n }
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.k[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

pub fn solve_lambda(p: &OpticsParams, n_nodes: usize) -> Result<IntensityProfile> {
    solve_lambda_with(p, n_nodes, FieMethod::Picard)
}

pub fn solve_lambda_with(
    p: &OpticsParams,
    n_nodes: usize,
    method: FieMethod,
) -> Result<IntensityProfile> {
    p.validate()?;
    if n_nodes < 33 {
        return Err(Error::InvalidParameter(format!(
            "FIE grid needs at least 33 nodes, got {n_nodes}"
        )));
    }
    let kernel = NystromKernel::new(p.kappa, n_nodes);
    let n = n_nodes;
    let source: Vec<f64> = kernel.tau.iter().map(|&t| p.collimated(t)).collect();
    let half_omega = 0.5 * p.omega;

    let (lambda, iterations) = if p.omega == 0.0 {
        (source.clone(), 0)
    } else {
        match method {
            FieMethod::Picard => picard(&kernel, &source, half_omega)?,
            FieMethod::Dense => (dense(&kernel, &source, half_omega)?, 1),
        }
    };

    let mut scratch = vec![0.0; n];
    kernel.apply(&lambda, &mut scratch);
    let residual = (0..n)
        .map(|i| (lambda[i] - source[i] - half_omega * scratch[i]).abs())
        .fold(0.0, f64::max);
    if residual > 1e-10 {
        return Err(Error::NonConvergence {
            what: "Fredholm intensity equation",
            iterations,
            residual,
        });
    }
    let interp = Interpolant1D::new(kernel.tau.clone(), lambda.clone(), InterpScheme::CubicSpline)?;
    Ok(IntensityProfile {
        optics: *p,
        tau: kernel.tau,
        lambda,
        interp,
        residual,
        iterations,
    })
}

const PICARD_MAX_ITER: usize = 20_000;

fn picard(kernel: &NystromKernel, source: &[f64], half_omega: f64) -> Result<(Vec<f64>, usize)> {
    let n = source.len();
    let mut lam = source.to_vec();
    let mut k_lam = vec![0.0; n];
    let mut change = f64::INFINITY;
    for it in 1..=PICARD_MAX_ITER {
        kernel.apply(&lam, &mut k_lam);
        change = 0.0;
        for i in 0..n {
            let next = source[i] + half_omega * k_lam[i];
            change = f64::max(change, (next - lam[i]).abs());
            lam[i] = next;
        }
        if change <= 1e-14 {
            return Ok((lam, it));
        }
    }
    Err(Error::NonConvergence {
        what: "Picard iteration for the intensity equation",
        iterations: PICARD_MAX_ITER,
        residual: change,
    })
}

fn dense(kernel: &NystromKernel, source: &[f64], half_omega: f64) -> Result<Vec<f64>> {
    let n = source.len();
    let a = Mat::<f64>::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - half_omega * kernel.k[i * n + j]
    });
    let b = Mat::<f64>::from_fn(n, 1, |i, _| source[i]);
    let x = a.partial_piv_lu().solve(&b);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence {
            what: "dense solve of the intensity equation",
            iterations: 1,
            residual: f64::INFINITY,
        });
    }
    Ok(out)
}

/// Signed vertical fluxes of the basic state at the profile's τ nodes.
/// Positive values point upward (towards decreasing τ).
#[derive(Debug, Clone)]
pub struct FluxProfile {
    pub tau_nodes: Vec<f64>,
    pub q_collimated: Vec<f64>,
    pub q_diffuse: Vec<f64>,
    pub q_total_magnitude: Vec<f64>,
}

const GAUSS_PER_PANEL: usize = 8;
const GRADING_LEVELS: usize = 8;

/// Diffuse intensity, its τ-slope and the diffuse vertical flux, evaluated
/// from integral representations over the solved `Λ`.
///
/// ```text
/// I_d(τ)   = (ω G_t/2) ∫ Λ(τ') E_1(|τ-τ'|) dτ'
/// I_d'(τ)  = (ω G_t/2) [ ∫ (Λ(τ')-Λ(τ)) e^{-|τ'-τ|}/(τ'-τ) dτ' + Λ(τ)(E_1(τ) - E_1(κ-τ)) ]
/// q_d(τ)   = (ω G_t/2) [ ∫_τ^κ Λ E_2(τ'-τ) dτ' - ∫_0^τ Λ E_2(τ-τ') dτ' ]
/// ```
///
/// The slope is logarithmically infinite at `τ = 0` and `τ = κ` when `ω > 0`.
#[derive(Debug, Clone)]
pub struct DiffuseFields<'a> {
    profile: &'a IntensityProfile,
    gauss: (Vec<f64>, Vec<f64>),
    /// Per panel: Gauss abscissae, weights and Λ values.
    panels: Vec<Vec<(f64, f64, f64)>>,
}

impl<'a> DiffuseFields<'a> {
    pub fn new(profile: &'a IntensityProfile) -> Self {
        let g = gauss_legendre(GAUSS_PER_PANEL, 0.0, 1.0).expect("static rule");
        let tau = profile.tau_nodes();
        let panels = tau
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                g.nodes
                    .iter()
                    .zip(&g.weights)
                    .map(|(&x, &wt)| {
                        let t = a + (b - a) * x;
                        (t, wt * (b - a), profile.eval(t).expect("inside grid"))
                    })
                    .collect()
            })
            .collect();
        Self {
            profile,
            gauss: (g.nodes, g.weights),
            panels,
        }
    }

    fn omega_gt_half(&self) -> f64 {
        let o = self.profile.optics();
        0.5 * o.omega * o.g_t
    }

    /// Integrate `f(τ', Λ(τ'))` over `[0, κ]` with a break at `τ` and
    /// geometric grading towards it on both sides.
    fn integrate_split<F: Fn(f64, f64) -> f64>(&self, tau: f64, f: F) -> f64 {
        let nodes = self.profile.tau_nodes();
        let np = self.panels.len();
        let p = nodes.partition_point(|&t| t <= tau).saturating_sub(1).min(np - 1);
        let lo_panel = p.saturating_sub(1);
        let hi_panel = (p + 1).min(np - 1);
        let mut total = 0.0;
        for (ip, panel) in self.panels.iter().enumerate() {
            if ip < lo_panel || ip > hi_panel {
                total += panel.iter().map(|&(t, w, lam)| w * f(t, lam)).sum::<f64>();
            }
        }
        let a = nodes[lo_panel];
        let b = nodes[hi_panel + 1];
        let mut breaks = nodes[lo_panel..=hi_panel + 1].to_vec();
        let h = nodes[1] - nodes[0];
        let mut d = h;
        for _ in 0..GRADING_LEVELS {
            d *= 0.5;
            for cand in [tau - d, tau + d] {
                if cand > a && cand < b {
                    breaks.push(cand);
                }
            }
        }
        if tau > a && tau < b {
            breaks.push(tau);
        }
        breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
        breaks.dedup();
        let (gx, gw) = &self.gauss;
        for w in breaks.windows(2) {
            let (l, r) = (w[0], w[1]);
            if r - l <= 0.0 {
                continue;
            }
            for (&x, &wt) in gx.iter().zip(gw) {
                let t = l + (r - l) * x;
                let lam = self.profile.eval(t).expect("inside grid");
                total += wt * (r - l) * f(t, lam);
            }
        }
        total
    }

    /// Diffuse total intensity `I_s^d(τ) = G_t (Λ(τ) - e^{-τ/μ₀})`, which the
    /// integral equation makes identical to the scattering integral.
    pub fn intensity(&self, tau: f64) -> Result<f64> {
        let o = self.profile.optics();
        if o.omega == 0.0 {
            self.check(tau)?;
            return Ok(0.0);
        }
        Ok(o.g_t * (self.profile.eval(tau)? - o.collimated(tau)))
    }

    /// The scattering integral `(ωG_t/2)∫ΛE_1` evaluated by quadrature.
    pub fn intensity_by_quadrature(&self, tau: f64) -> Result<f64> {
        self.check(tau)?;
        let s = self.integrate_split(tau, |t, lam| {
            let d = (t - tau).abs();
            if d == 0.0 {
                0.0
            } else {
                lam * e1_positive(d)
            }
        });
        Ok(self.omega_gt_half() * s)
    }

    /// `dI_s^d/dτ`; `±∞` at the layer faces when scattering is present.
    pub fn intensity_slope(&self, tau: f64) -> Result<f64> {
        self.check(tau)?;
        if self.profile.optics().omega == 0.0 {
            return Ok(0.0);
        }
        let kappa = self.profile.kappa();
        let lam_here = self.profile.eval(tau)?;
        let s = self.integrate_split(tau, |t, lam| {
            let d = t - tau;
            if d == 0.0 {
                0.0
            } else {
                (lam - lam_here) * (-d.abs()).exp() / d
            }
        });
        let edge = if tau == 0.0 {
            f64::INFINITY
        } else if tau == kappa {
            f64::NEG_INFINITY
        } else {
            lam_here * (e1_positive(tau) - e1_positive(kappa - tau))
        };
        Ok(self.omega_gt_half() * (s + edge))
    }

    /// Signed diffuse vertical flux, positive upward.
    pub fn flux(&self, tau: f64) -> Result<f64> {
        self.check(tau)?;
        if self.profile.optics().omega == 0.0 {
            return Ok(0.0);
        }
        let s = self.integrate_split(tau, |t, lam| {
            if t >= tau {
                lam * e2(t - tau)
            } else {
                -lam * e2(tau - t)
            }
        });
        Ok(self.omega_gt_half() * s)
    }

    fn check(&self, tau: f64) -> Result<()> {
        let kappa = self.profile.kappa();
        if !(0.0..=kappa).contains(&tau) {
            return Err(Error::OutOfRange {
                x: tau,
                lo: 0.0,
                hi: kappa,
            });
        }
        Ok(())
    }

    pub fn flux_profile(&self) -> Result<FluxProfile> {
        let o = self.profile.optics();
        let mu0 = o.mu0();
        let tau = self.profile.tau_nodes().to_vec();
        let q_collimated: Vec<f64> = tau.iter().map(|&t| -o.g_t * mu0 * o.collimated(t)).collect();
        let q_diffuse = tau.iter().map(|&t| self.flux(t)).collect::<Result<Vec<_>>>()?;
        let q_total_magnitude = q_collimated
            .iter()
            .zip(&q_diffuse)
            .map(|(c, d)| (c + d).abs())
            .collect();
        Ok(FluxProfile {
            tau_nodes: tau,
            q_collimated,
            q_diffuse,
            q_total_magnitude,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optics(kappa: f64, omega: f64, deg: f64) -> OpticsParams {
        OpticsParams::with_degrees(kappa, omega, deg, 1.0).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(OpticsParams::new(0.0, 0.5, 0.0, 1.0).is_err());
        assert!(OpticsParams::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(OpticsParams::new(1.0, -0.1, 0.0, 1.0).is_err());
        assert!(OpticsParams::new(1.0, 0.5, std::f64::consts::FRAC_PI_2, 1.0).is_err());
        assert!(OpticsParams::new(1.0, 0.5, 0.0, 0.0).is_err());
        assert!(solve_lambda(&optics(1.0, 0.5, 0.0), 32).is_err());
    }

    #[test]
    fn lambert_beer_without_scattering() {
        let prof = solve_lambda(&optics(1.0, 0.0, 0.0), 65).unwrap();
        assert!((prof.eval(0.5).unwrap() - (-0.5f64).exp()).abs() < 1e-6);
        for (t, l) in prof.tau_nodes().iter().zip(prof.lambda()) {
            assert_eq!(*l, (-t).exp());
        }
    }

    #[test]
    fn kernel_rows_reproduce_closed_form_on_constants() {
        let kappa = 0.7;
        let k = NystromKernel::new(kappa, 41);
        let ones = vec![1.0; 41];
        let mut out = vec![0.0; 41];
        k.apply(&ones, &mut out);
        for (i, &t) in k.tau.iter().enumerate() {
            let half = 0.5 * out[i];
            let expected = 1.0 - 0.5 * (e2(t) + e2(kappa - t));
            assert!((half - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn scattering_lifts_intensity_above_beam() {
        let p = optics(0.5, 0.475, 0.0);
        let prof = solve_lambda(&p, 201).unwrap();
        assert!(prof.residual() <= 1e-10);
        for (t, l) in prof.tau_nodes().iter().zip(prof.lambda()) {
            assert!(*l > p.collimated(*t));
            assert!(*l > 0.0);
        }
    }

    #[test]
    fn picard_and_dense_agree() {
        let p = optics(1.0, 0.61, 40.0);
        let a = solve_lambda_with(&p, 201, FieMethod::Picard).unwrap();
        let b = solve_lambda_with(&p, 201, FieMethod::Dense).unwrap();
        let diff = a
            .lambda()
            .iter()
            .zip(b.lambda())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-9, "{diff}");
    }

    #[test]
    fn monotone_in_albedo_and_obliquity() {
        let lo = solve_lambda(&optics(1.0, 0.3, 0.0), 101).unwrap();
        let hi = solve_lambda(&optics(1.0, 0.6, 0.0), 101).unwrap();
        for (a, b) in lo.lambda().iter().zip(hi.lambda()) {
            assert!(b >= a);
        }
        let oblique = solve_lambda(&optics(1.0, 0.6, 80.0), 101).unwrap();
        for i in 1..101 {
            assert!(oblique.lambda()[i] < hi.lambda()[i]);
        }
    }

    #[test]
    fn no_scattering_means_no_diffuse_field() {
        let prof = solve_lambda(&optics(0.5, 0.0, 30.0), 65).unwrap();
        let d = DiffuseFields::new(&prof);
        for &t in &[0.0, 0.1, 0.25, 0.5] {
            assert_eq!(d.intensity(t).unwrap(), 0.0);
            assert_eq!(d.flux(t).unwrap(), 0.0);
            assert_eq!(d.intensity_slope(t).unwrap(), 0.0);
        }
        let f = d.flux_profile().unwrap();
        for (i, t) in f.tau_nodes.iter().enumerate() {
            let mu = prof.optics().mu0();
            assert_eq!(f.q_collimated[i], -mu * (-t / mu).exp());
            assert!(f.q_total_magnitude[i] > 0.0);
        }
    }

    #[test]
    fn quadrature_intensity_matches_equation() {
        let prof = solve_lambda(&optics(0.5, 0.475, 0.0), 401).unwrap();
        let d = DiffuseFields::new(&prof);
        for &t in &[0.0, 0.0371, 0.25, 0.4, 0.5] {
            let a = d.intensity(t).unwrap();
            let b = d.intensity_by_quadrature(t).unwrap();
            assert!((a - b).abs() < 1e-6, "tau {t}: {a} vs {b}");
        }
    }

    #[test]
    fn slope_is_infinite_only_at_faces() {
        let prof = solve_lambda(&optics(1.0, 0.5, 0.0), 101).unwrap();
        let d = DiffuseFields::new(&prof);
        assert_eq!(d.intensity_slope(0.0).unwrap(), f64::INFINITY);
        assert_eq!(d.intensity_slope(1.0).unwrap(), f64::NEG_INFINITY);
        assert!(d.intensity_slope(0.5).unwrap().is_finite());
        assert!(d.intensity_slope(1.5).is_err());
    }
}

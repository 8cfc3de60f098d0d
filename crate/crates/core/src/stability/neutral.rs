//! Neutral curves `R(k)` and the critical point.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::eigen::leading_sigma;
use super::fd::Derivatives;
use super::system::{assemble_template, benard_template, xi_profiles, SurrogateWalls, SystemTemplate, XiProfiles, FD_ORDER};
use crate::equilib::{BasicState, SuspensionParams};
use crate::error::{Error, Result};
use crate::perturb::{AngularGrid, PerturbOperators, PerturbSetup};

/// `|Im σ|` above which a neutral point is oscillatory.
pub const OSCILLATORY_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Stationary,
    Oscillatory,
}

impl Branch {
    pub fn of(im_sigma: f64) -> Self {
        if im_sigma.abs() > OSCILLATORY_THRESHOLD {
            Branch::Oscillatory
        } else {
            Branch::Stationary
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Stationary => "stationary",
            Branch::Oscillatory => "oscillatory",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeutralPoint {
    pub k: f64,
    pub r: f64,
    /// `|Im σ|` of the neutral mode.
    pub im_sigma: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalResult {
    pub k_c: f64,
    pub r_c: f64,
    pub lambda_c: f64,
    pub im_sigma_c: f64,
    pub overstable: bool,
    pub branch_points: Vec<f64>,
    /// Scanned wavenumbers that grow already at the bottom of the Rayleigh
    /// bracket, so they have no neutral point.
    pub unstable_at_rest: Vec<f64>,
    /// Scanned neutral points, sorted by `k`.
    pub curve: Vec<NeutralPoint>,
}

/// Search interval for the neutral Rayleigh number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub guess: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for Bracket {
    fn default() -> Self {
        Bracket {
            guess: 500.0,
            min: 1e-2,
            max: 1e7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub k_min: f64,
    pub k_max: f64,
    pub n_scan: usize,
    pub bracket: Bracket,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            k_min: 0.5,
            k_max: 10.0,
            n_scan: 24,
            bracket: Bracket::default(),
        }
    }
}

/// Anything that can produce the eigenproblem at a given wavenumber.
pub trait TemplateSource: Sync {
    fn template(&self, k: f64) -> Result<SystemTemplate>;
}

/// Growth rate at `(k, R)` with `Re σ` and `|Im σ|`.
fn growth(t: &SystemTemplate, r: f64) -> Result<(f64, f64)> {
    let s = leading_sigma(&t.at(r))?;
    Ok((s.re, s.im.abs()))
}

fn converged(re: f64, im: f64) -> bool {
    re.abs() <= 1e-6 * im.max(1.0)
}

/// Neutral Rayleigh number at the template's wavenumber.
pub fn neutral_r(t: &SystemTemplate, bracket: &Bracket) -> Result<NeutralPoint> {
    let finish = |r: f64, im: f64| NeutralPoint {
        k: t.k,
        r,
        im_sigma: im,
        branch: Branch::of(im),
    };
    let mut trace = Vec::new();
    let mut r = bracket.guess.clamp(bracket.min, bracket.max);
    let (mut f, im) = growth(t, r)?;
    trace.push((r, f));
    if converged(f, im) {
        return Ok(finish(r, im));
    }
    // Re σ is expected to grow with R: step towards the sign change
    let up = f < 0.0;
    let mut other = None;
    loop {
        let next = if up { r * 2.0 } else { r * 0.5 };
        if next > bracket.max * (1.0 + 1e-12) || next < bracket.min * (1.0 - 1e-12) {
            break;
        }
        let (g, gi) = growth(t, next)?;
        trace.push((next, g));
        if converged(g, gi) {
            return Ok(finish(next, gi));
        }
        if (g > 0.0) == up {
            other = Some((next, g));
            break;
        }
        r = next;
        f = g;
    }
    let ((mut lo, mut f_lo), (mut hi, mut f_hi)) = match other {
        Some(o) => {
            if up {
                ((r, f), o)
            } else {
                (o, (r, f))
            }
        }
        None => fine_scan(t, bracket, &mut trace)?,
    };
    // Illinois regula falsi on Re σ(R)
    let mut side = 0i8;
    for _ in 0..200 {
        let x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let x = if x > lo && x < hi { x } else { 0.5 * (lo + hi) };
        let (g, gi) = growth(t, x)?;
        if converged(g, gi) || (hi - lo) <= 1e-13 * hi {
            return Ok(finish(x, gi));
        }
        if g < 0.0 {
            lo = x;
            f_lo = g;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = g;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NonConvergence {
        what: "neutral Rayleigh number",
        iterations: 200,
        residual: f_lo.abs().min(f_hi.abs()),
    })
}

type Sample = (f64, f64);

/// Log-uniform scan of the whole bracket for the first upward crossing.
fn fine_scan(t: &SystemTemplate, bracket: &Bracket, trace: &mut Vec<Sample>) -> Result<(Sample, Sample)> {
    log::debug!("k = {}: no bracket by expansion, scanning", t.k);
    let n = 64;
    let ratio = (bracket.max / bracket.min).ln();
    let mut prev: Option<Sample> = None;
    for i in 0..=n {
        let r = bracket.min * (ratio * i as f64 / n as f64).exp();
        let (g, _) = growth(t, r)?;
        trace.push((r, g));
        if let Some(p) = prev {
            if p.1 < 0.0 && g >= 0.0 {
                return Ok((p, (r, g)));
            }
        }
        prev = Some((r, g));
    }
    Err(Error::BracketNotFound {
        what: "neutral Rayleigh number",
        lo: bracket.min,
        hi: bracket.max,
        trace: trace
            .iter()
            .map(|(r, g)| format!("R={r:.4e}:Reσ={g:.3e}"))
            .collect::<Vec<_>>()
            .join(" "),
    })
}

/// Neutral points at each `k`, in parallel and in input order.
pub fn neutral_curve(src: &dyn TemplateSource, ks: &[f64], bracket: &Bracket) -> Vec<Result<NeutralPoint>> {
    ks.par_iter().map(|&k| neutral_r(&src.template(k)?, bracket)).collect()
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
        .collect()
}

const GOLDEN_TOL: f64 = 1e-5;
const BRANCH_BISECTIONS: usize = 6;

pub fn critical_point(src: &dyn TemplateSource, opts: &ScanOptions) -> Result<CriticalResult> {
    if !(opts.k_min > 0.0 && opts.k_max > opts.k_min) {
        return Err(Error::InvalidParameter(format!("k range [{}, {}]", opts.k_min, opts.k_max)));
    }
    if opts.n_scan < 16 {
        return Err(Error::InvalidParameter(format!("n_scan = {} below 16", opts.n_scan)));
    }
    let ks = log_space(opts.k_min, opts.k_max, opts.n_scan);
    let mut curve = Vec::new();
    let mut unstable_at_rest = Vec::new();
    for (&k, res) in ks.iter().zip(neutral_curve(src, &ks, &opts.bracket)) {
        match res {
            Ok(p) => curve.push(p),
            Err(Error::BracketNotFound { .. }) => {
                if growth(&src.template(k)?, opts.bracket.min)?.0 > 0.0 {
                    unstable_at_rest.push(k);
                }
            }
            Err(e) => return Err(e),
        }
    }
    if curve.is_empty() {
        return Err(Error::EmptyFeasibleSet);
    }
    let at = |k: f64, guess: f64| -> Result<NeutralPoint> {
        let b = Bracket { guess, ..opts.bracket };
        neutral_r(&src.template(k)?, &b)
    };
    let mut branch_points = Vec::new();
    for w in curve.windows(2) {
        if w[0].branch != w[1].branch {
            let (mut a, mut b) = (w[0], w[1]);
            for _ in 0..BRANCH_BISECTIONS {
                let m = at((a.k * b.k).sqrt(), 0.5 * (a.r + b.r))?;
                if m.branch == a.branch {
                    a = m;
                } else {
                    b = m;
                }
            }
            branch_points.push((a.k * b.k).sqrt());
        }
    }
    let i = (0..curve.len()).min_by(|&a, &b| curve[a].r.total_cmp(&curve[b].r)).unwrap();
    let lo = curve[i.saturating_sub(1)].k.ln();
    let hi = curve[(i + 1).min(curve.len() - 1)].k.ln();
    let mut best = curve[i];
    let (mut a, mut b) = (lo, hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = at(x1.exp(), best.r)?;
    let mut f2 = at(x2.exp(), best.r)?;
    while b - a > GOLDEN_TOL {
        if f1.r < f2.r {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = at(x1.exp(), f2.r)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = at(x2.exp(), f1.r)?;
        }
    }
    for p in [f1, f2] {
        if p.r < best.r {
            best = p;
        }
    }
    Ok(CriticalResult {
        k_c: best.k,
        r_c: best.r,
        lambda_c: 2.0 * std::f64::consts::PI / best.k,
        im_sigma_c: best.im_sigma,
        overstable: best.branch == Branch::Oscillatory,
        branch_points,
        unstable_at_rest,
        curve,
    })
}

/// Phototactic problem over one basic state, caching the perturbed-light
/// operators per wavenumber so that Taylor-number sweeps reuse them.
pub struct PhototacticProblem {
    pub basic: BasicState,
    pub params: SuspensionParams,
    setup: PerturbSetup,
    derivs: Derivatives,
    xi: XiProfiles,
    cache: Mutex<HashMap<u64, Arc<PerturbOperators>>>,
}

impl PhototacticProblem {
    pub fn new(basic: BasicState, params: SuspensionParams, grid: &AngularGrid) -> Result<Self> {
        let setup = PerturbSetup::new(&basic, &params, grid)?;
        let derivs = Derivatives::new(&basic.z, FD_ORDER);
        let xi = xi_profiles(&basic, &params);
        Ok(PhototacticProblem {
            basic,
            params,
            setup,
            derivs,
            xi,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn xi(&self) -> &XiProfiles {
        &self.xi
    }

    pub fn operators(&self, k: f64) -> Result<Arc<PerturbOperators>> {
        let key = k.to_bits();
        if let Some(ops) = self.cache.lock().unwrap().get(&key) {
            return Ok(ops.clone());
        }
        let ops = Arc::new(self.setup.assemble(k)?);
        self.cache.lock().unwrap().entry(key).or_insert_with(|| ops.clone());
        Ok(ops)
    }

    pub fn template_with_ta(&self, k: f64, ta: f64) -> Result<SystemTemplate> {
        let ops = self.operators(k)?;
        let p = SuspensionParams {
            ta,
            ..self.params.clone()
        };
        assemble_template(&self.basic, &p, &ops, &self.derivs, &self.xi)
    }

    /// View of the same problem at another Taylor number.
    pub fn at_taylor(&self, ta: f64) -> AtTaylor<'_> {
        AtTaylor { problem: self, ta }
    }
}

impl TemplateSource for PhototacticProblem {
    fn template(&self, k: f64) -> Result<SystemTemplate> {
        self.template_with_ta(k, self.params.ta)
    }
}

pub struct AtTaylor<'a> {
    problem: &'a PhototacticProblem,
    ta: f64,
}

impl TemplateSource for AtTaylor<'_> {
    fn template(&self, k: f64) -> Result<SystemTemplate> {
        self.problem.template_with_ta(k, self.ta)
    }
}

/// Rotating convection driven by a unit concentration gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenardSurrogate {
    pub n_z: usize,
    pub sc: f64,
    pub ta: f64,
    pub walls: SurrogateWalls,
}

impl TemplateSource for BenardSurrogate {
    fn template(&self, k: f64) -> Result<SystemTemplate> {
        benard_template(self.n_z, k, self.sc, self.ta, self.walls)
    }
}

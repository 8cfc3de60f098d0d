//! Sweeps of the phototactic stability problem with CSV, JSON and SVG
//! output.

pub mod config;
pub mod output;
pub mod svg;

use std::path::PathBuf;
use std::time::Instant;

use biostab_core::equilib::{calibrate_steepness, solve_basic_state, BasicState, SuspensionParams};
use biostab_core::radlight::solve_lambda;
use biostab_core::stability::{
    critical_point, log_space, neutral_curve, Branch, CriticalResult, NeutralPoint, PhototacticProblem,
};
use biostab_core::Error as CoreError;
use rayon::prelude::*;

pub use config::{Format, RunConfig};
pub use output::{ResultRow, TableDoc};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("solver: {0}")]
    Solver(CoreError),
    #[error("I/O: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if e.is_convergence_failure() {
            CliError::Solver(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

/// A validated configuration with its output directory and resolved
/// taxis steepness.
pub struct Session {
    pub cfg: RunConfig,
    pub out: PathBuf,
    steepness: f64,
}

impl Session {
    /// `out` overrides the configured directory, which must already exist.
    pub fn new(cfg: RunConfig, out: Option<PathBuf>) -> Result<Self, CliError> {
        cfg.validate()?;
        let out = out.unwrap_or_else(|| cfg.outputs.dir.clone());
        if !out.is_dir() {
            return Err(CliError::Config(format!("output directory {} does not exist", out.display())));
        }
        let steepness = if cfg.needs_calibration() && cfg.params.vc > 0.0 {
            let p = &cfg.params;
            let i_c = match p.taxis {
                config::TaxisConfig::Tanh { i_c, .. } => i_c,
                _ => unreachable!(),
            };
            let n = &cfg.numerics;
            let cal = calibrate_steepness(p.kappa, p.omega, p.g_t, p.vc, i_c, n.calibration_n_z, n.fie_nodes)?;
            log::info!(
                "calibrated taxis steepness {:.6} (peak at z = {:.4}{})",
                cal.steepness,
                cal.peak_height,
                if cal.exact { "" } else { ", band edge" }
            );
            cal.steepness
        } else {
            1.0
        };
        Ok(Session { cfg, out, steepness })
    }

    pub fn steepness(&self) -> f64 {
        self.steepness
    }

    pub fn params(&self, theta_deg: f64, ta: f64) -> Result<SuspensionParams, CliError> {
        self.cfg.suspension(theta_deg, ta, self.steepness)
    }

    pub fn basic_state(&self, theta_deg: f64) -> Result<(SuspensionParams, BasicState), CliError> {
        let p = self.params(theta_deg, self.cfg.params.ta)?;
        let lam = solve_lambda(&p.optics, self.cfg.numerics.fie_nodes)?;
        let b = solve_basic_state(&p, self.cfg.numerics.n_z, &lam)?;
        Ok((p, b))
    }

    /// Stability problem at incidence `theta_deg`; the Taylor number is
    /// chosen per query.
    pub fn problem(&self, theta_deg: f64) -> Result<PhototacticProblem, CliError> {
        let (p, b) = self.basic_state(theta_deg)?;
        Ok(PhototacticProblem::new(b, p, &self.cfg.grid())?)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn cmd_basic_state(&self) -> Result<PathBuf, CliError> {
        let (_, b) = self.basic_state(self.cfg.params.theta_i_deg)?;
        let path = self.path("basic_state.csv");
        output::write_basic_state_csv(&path, &b)?;
        Ok(path)
    }

    /// Neutral curve sorted by `k`; wavenumbers without a neutral point are
    /// skipped with a warning.
    pub fn neutral_points(&self, theta_deg: f64, ta: f64) -> Result<Vec<NeutralPoint>, CliError> {
        let prob = self.problem(theta_deg)?;
        let s = &self.cfg.sweep;
        let ks = log_space(s.k_min, s.k_max, s.n_k);
        let src = prob.at_taylor(ta);
        let mut pts = Vec::new();
        for (k, res) in ks.iter().zip(neutral_curve(&src, &ks, &self.cfg.scan().bracket)) {
            match res {
                Ok(p) => pts.push(p),
                Err(e) if e.is_convergence_failure() => log::warn!("k = {k}: {e}"),
                Err(e) => return Err(e.into()),
            }
        }
        if pts.is_empty() {
            return Err(CliError::Solver(CoreError::EmptyFeasibleSet));
        }
        pts.sort_by(|a, b| a.k.total_cmp(&b.k));
        Ok(pts)
    }

    pub fn cmd_neutral_curve(&self, theta_deg: f64, ta: f64) -> Result<Vec<PathBuf>, CliError> {
        let pts = self.neutral_points(theta_deg, ta)?;
        let mut written = Vec::new();
        let csv = self.path("neutral_curve.csv");
        output::write_curve_csv(&csv, &pts)?;
        written.push(csv);
        if self.cfg.outputs.wants(Format::Svg) {
            let svg = self.path("neutral_curve.svg");
            let title = format!("neutral curve, theta_i = {theta_deg} deg, Ta = {ta}");
            output::write_text(&svg, &svg::neutral_curve_svg(&pts, self.cfg.outputs.log_r, &title))?;
            written.push(svg);
        }
        Ok(written)
    }

    fn row(&self, res: Result<CriticalResult, CliError>, theta_deg: f64, ta: f64, started: Instant) -> ResultRow {
        let p = &self.cfg.params;
        let mut row = ResultRow {
            theta_i_deg: theta_deg,
            ta,
            kappa: p.kappa,
            omega: p.omega,
            vc: p.vc,
            lambda_c: None,
            r_c: None,
            im_sigma: None,
            branch: "error".into(),
            wall_time_s: 0.0,
            error: None,
        };
        match res {
            Ok(c) => {
                row.lambda_c = Some(c.lambda_c);
                row.r_c = Some(c.r_c);
                row.im_sigma = Some(c.im_sigma_c);
                row.branch = Branch::of(c.im_sigma_c).as_str().into();
                if !c.unstable_at_rest.is_empty() {
                    log::warn!(
                        "theta {theta_deg} Ta {ta}: unstable at every Rayleigh number for k = {:?}; the minimum sits at the edge of the neutral curve",
                        c.unstable_at_rest
                    );
                }
                if !c.branch_points.is_empty() {
                    log::info!("theta {theta_deg} Ta {ta}: branch points at k = {:?}", c.branch_points);
                }
            }
            Err(e) => {
                log::warn!("theta {theta_deg} Ta {ta}: {e}");
                row.error = Some(e.to_string());
            }
        }
        row.wall_time_s = started.elapsed().as_secs_f64();
        row
    }

    fn critical(&self, prob: &PhototacticProblem, ta: f64) -> Result<CriticalResult, CliError> {
        Ok(critical_point(&prob.at_taylor(ta), &self.cfg.scan())?)
    }

    /// One row per `(θ_i, Ta)` pair in sweep order. Failed rows are kept as
    /// error rows.
    pub fn table_rows(&self, thetas: &[f64], tas: &[f64]) -> Vec<ResultRow> {
        let problems: Vec<Result<PhototacticProblem, CliError>> = thetas.par_iter().map(|&t| self.problem(t)).collect();
        let pairs: Vec<(usize, f64)> = (0..thetas.len()).flat_map(|i| tas.iter().map(move |&ta| (i, ta))).collect();
        pairs
            .par_iter()
            .map(|&(i, ta)| {
                let t = Instant::now();
                let res = match &problems[i] {
                    Ok(prob) => self.critical(prob, ta),
                    Err(e) => Err(CliError::Config(e.to_string())),
                };
                self.row(res, thetas[i], ta, t)
            })
            .collect()
    }

    fn write_rows(&self, stem: &str, rows: &[ResultRow]) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::new();
        if self.cfg.outputs.wants(Format::Csv) {
            let p = self.path(&format!("{stem}.csv"));
            output::write_table_csv(&p, rows)?;
            written.push(p);
        }
        if self.cfg.outputs.wants(Format::Json) {
            let p = self.path(&format!("{stem}.json"));
            output::write_text(&p, &TableDoc::new(rows.to_vec()).to_json())?;
            written.push(p);
        }
        Ok(written)
    }

    pub fn cmd_critical(&self, theta_deg: f64, ta: f64) -> Result<(ResultRow, Vec<PathBuf>), CliError> {
        let t = Instant::now();
        let prob = self.problem(theta_deg)?;
        let res = self.critical(&prob, ta)?;
        let row = self.row(Ok(res), theta_deg, ta, t);
        let written = self.write_rows("critical", std::slice::from_ref(&row))?;
        Ok((row, written))
    }

    pub fn cmd_table(&self) -> Result<(Vec<ResultRow>, Vec<PathBuf>), CliError> {
        let s = &self.cfg.sweep;
        let rows = self.table_rows(&s.theta_i_deg, &s.ta);
        let written = self.write_rows("table", &rows)?;
        if rows.iter().all(ResultRow::is_error) {
            return Err(CliError::Solver(CoreError::EmptyFeasibleSet));
        }
        Ok((rows, written))
    }
}

/// Builds a worker pool of `jobs` threads (all processors when `None`).
pub fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let n = jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if n == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

pub fn describe(paths: &[PathBuf]) -> String {
    paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ")
}

//! JSON run configuration. Angles are given in degrees.

use std::path::{Path, PathBuf};

use biostab_core::equilib::{SuspensionParams, TaxisModel};
use biostab_core::perturb::AngularGrid;
use biostab_core::radlight::OpticsParams;
use biostab_core::stability::{Bracket, ScanOptions};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "default_sc")]
    pub sc: f64,
    #[serde(default)]
    pub ta: f64,
    pub vc: f64,
    pub kappa: f64,
    pub omega: f64,
    #[serde(default)]
    pub theta_i_deg: f64,
    #[serde(default = "one")]
    pub g_t: f64,
    #[serde(default)]
    pub taxis: TaxisConfig,
}

fn default_sc() -> f64 {
    20.0
}

fn one() -> f64 {
    1.0
}

/// Taxis response. A `tanh` model without `steepness` is calibrated so that
/// the concentration peak sits at mid-height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TaxisConfig {
    Tanh {
        #[serde(default)]
        steepness: Option<f64>,
        #[serde(default = "one")]
        i_c: f64,
    },
    Table {
        intensity: Vec<f64>,
        response: Vec<f64>,
        #[serde(default = "one")]
        i_c: f64,
    },
}

impl Default for TaxisConfig {
    fn default() -> Self {
        TaxisConfig::Tanh { steepness: None, i_c: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub n_z: usize,
    pub n_mu: usize,
    pub n_phi: usize,
    pub fie_nodes: usize,
    /// Grid used when calibrating the taxis steepness.
    pub calibration_n_z: usize,
    pub r_guess: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let b = Bracket::default();
        Numerics {
            n_z: 65,
            n_mu: 8,
            n_phi: 8,
            fie_nodes: 401,
            calibration_n_z: 129,
            r_guess: b.guess,
            r_min: b.min,
            r_max: b.max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    pub ta: Vec<f64>,
    pub theta_i_deg: Vec<f64>,
    pub k_min: f64,
    pub k_max: f64,
    pub n_k: usize,
}

impl Default for Sweep {
    fn default() -> Self {
        let s = ScanOptions::default();
        Sweep {
            ta: vec![0.0],
            theta_i_deg: vec![0.0],
            k_min: s.k_min,
            k_max: s.k_max,
            n_k: s.n_scan,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
    /// Logarithmic Rayleigh axis in plots.
    pub log_r: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            dir: PathBuf::from("."),
            formats: vec![Format::Csv, Format::Json, Format::Svg],
            log_r: false,
        }
    }
}

impl Outputs {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every value before any solve starts.
    pub fn validate(&self) -> Result<(), CliError> {
        self.suspension(self.params.theta_i_deg, self.params.ta, 1.0)?;
        for &t in &self.sweep.theta_i_deg {
            self.optics(t)?;
        }
        if self.sweep.ta.is_empty() || self.sweep.theta_i_deg.is_empty() {
            return Err(usage("sweep lists must not be empty"));
        }
        if let Some(ta) = self.sweep.ta.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(usage(format!("Taylor number must be non-negative, got {ta}")));
        }
        let s = &self.sweep;
        if !(s.k_min > 0.0 && s.k_max > s.k_min && s.k_max.is_finite()) {
            return Err(usage(format!("k range [{}, {}]", s.k_min, s.k_max)));
        }
        if s.n_k < 16 {
            return Err(usage(format!("n_k must be at least 16, got {}", s.n_k)));
        }
        let n = &self.numerics;
        AngularGrid::new(n.n_mu, n.n_phi).map_err(|e| usage(e.to_string()))?;
        if n.n_z < 65 || n.calibration_n_z < 65 {
            return Err(usage("n_z and calibration_n_z must be at least 65"));
        }
        if n.fie_nodes < 33 {
            return Err(usage(format!("fie_nodes must be at least 33, got {}", n.fie_nodes)));
        }
        if !(n.r_min > 0.0 && n.r_min <= n.r_guess && n.r_guess <= n.r_max && n.r_max.is_finite()) {
            return Err(usage(format!("Rayleigh bracket {} ≤ {} ≤ {}", n.r_min, n.r_guess, n.r_max)));
        }
        if self.outputs.formats.is_empty() {
            return Err(usage("no output formats requested"));
        }
        Ok(())
    }

    pub fn optics(&self, theta_deg: f64) -> Result<OpticsParams, CliError> {
        let p = &self.params;
        OpticsParams::with_degrees(p.kappa, p.omega, theta_deg, p.g_t).map_err(|e| usage(e.to_string()))
    }

    /// Physical parameters at incidence `theta_deg` and Taylor number `ta`,
    /// with `steepness` standing in for an uncalibrated tanh model.
    pub fn suspension(&self, theta_deg: f64, ta: f64, steepness: f64) -> Result<SuspensionParams, CliError> {
        let taxis = match &self.params.taxis {
            TaxisConfig::Tanh { steepness: s, i_c } => TaxisModel::tanh(s.unwrap_or(steepness), *i_c),
            TaxisConfig::Table { intensity, response, i_c } => {
                TaxisModel::table(intensity.clone(), response.clone(), *i_c)
            }
        }
        .map_err(|e| usage(e.to_string()))?;
        let p = &self.params;
        SuspensionParams::new(p.sc, ta, p.vc, self.optics(theta_deg)?, taxis).map_err(|e| usage(e.to_string()))
    }

    pub fn needs_calibration(&self) -> bool {
        matches!(self.params.taxis, TaxisConfig::Tanh { steepness: None, .. })
    }

    pub fn grid(&self) -> AngularGrid {
        AngularGrid::new(self.numerics.n_mu, self.numerics.n_phi).expect("validated")
    }

    pub fn scan(&self) -> ScanOptions {
        let n = &self.numerics;
        ScanOptions {
            k_min: self.sweep.k_min,
            k_max: self.sweep.k_max,
            n_scan: self.sweep.n_k,
            bracket: Bracket {
                guess: n.r_guess,
                min: n.r_min,
                max: n.r_max,
            },
        }
    }
}

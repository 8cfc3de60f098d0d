//! Result rows and their CSV/JSON forms.
//!
//! CSV is for people: every float carries 6 significant digits. JSON is
//! for machines: 17 significant digits, enough to round-trip any `f64`.

use std::io::Write;
use std::path::Path;

use biostab_core::equilib::BasicState;
use biostab_core::stability::NeutralPoint;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const TABLE_HEADER: [&str; 11] = [
    "theta_i_deg",
    "Ta",
    "kappa",
    "omega",
    "Vc",
    "lambda_c",
    "R_c",
    "im_sigma",
    "branch",
    "wall_time_s",
    "error",
];

pub const CURVE_HEADER: [&str; 4] = ["k", "R", "im_sigma", "branch"];

/// One critical point of the sweep. Failed rows keep their inputs, carry
/// `branch = "error"` and leave the results empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    #[serde(serialize_with = "sig17")]
    pub theta_i_deg: f64,
    #[serde(rename = "Ta", serialize_with = "sig17")]
    pub ta: f64,
    #[serde(serialize_with = "sig17")]
    pub kappa: f64,
    #[serde(serialize_with = "sig17")]
    pub omega: f64,
    #[serde(rename = "Vc", serialize_with = "sig17")]
    pub vc: f64,
    #[serde(serialize_with = "sig17_opt")]
    pub lambda_c: Option<f64>,
    #[serde(rename = "R_c", serialize_with = "sig17_opt")]
    pub r_c: Option<f64>,
    #[serde(serialize_with = "sig17_opt")]
    pub im_sigma: Option<f64>,
    pub branch: String,
    #[serde(serialize_with = "sig17")]
    pub wall_time_s: f64,
    pub error: Option<String>,
}

impl ResultRow {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }

    /// Everything except the timing column.
    pub fn numeric_key(&self) -> (Vec<Option<f64>>, &str) {
        let v = vec![
            Some(self.theta_i_deg),
            Some(self.ta),
            Some(self.kappa),
            Some(self.omega),
            Some(self.vc),
            self.lambda_c,
            self.r_c,
            self.im_sigma,
        ];
        (v, &self.branch)
    }

    fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(sig6).unwrap_or_default();
        vec![
            sig6(self.theta_i_deg),
            sig6(self.ta),
            sig6(self.kappa),
            sig6(self.omega),
            sig6(self.vc),
            opt(self.lambda_c),
            opt(self.r_c),
            opt(self.im_sigma),
            self.branch.clone(),
            sig6(self.wall_time_s),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDoc {
    pub schema_version: u32,
    pub rows: Vec<ResultRow>,
}

impl TableDoc {
    pub fn new(rows: Vec<ResultRow>) -> Self {
        TableDoc {
            schema_version: SCHEMA_VERSION,
            rows,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rows serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: TableDoc = serde_json::from_str(text).map_err(|e| CliError::Config(format!("table JSON: {e}")))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!("unsupported schema_version {}", doc.schema_version)));
        }
        Ok(doc)
    }
}

/// Float with 6 significant digits.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..6).contains(&e) {
        // rounding can carry into the next decade; re-derive from the text
        let s = format!("{:.*}", (5 - e).max(0) as usize, x);
        let digits = s.trim_start_matches('-').replace('.', "").trim_start_matches('0').len();
        if digits > 6 {
            return if e + 1 < 6 {
                format!("{:.*}", (4 - e).max(0) as usize, x)
            } else {
                format!("{x:.5e}")
            };
        }
        s
    } else {
        format!("{x:.5e}")
    }
}

fn raw17(x: f64) -> Option<Box<RawValue>> {
    x.is_finite()
        .then(|| RawValue::from_string(format!("{x:.16e}")).expect("numeric literal"))
}

fn sig17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw17(*x).serialize(s)
}

fn sig17_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    x.and_then(raw17).serialize(s)
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    w.write_record(header).map_err(|e| io(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path).map_err(|e| io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io(path, e))
}

pub fn write_table_csv(path: &Path, rows: &[ResultRow]) -> Result<(), CliError> {
    write_csv(path, &TABLE_HEADER, rows.iter().map(ResultRow::csv_record))
}

pub fn write_curve_csv(path: &Path, curve: &[NeutralPoint]) -> Result<(), CliError> {
    let recs = curve
        .iter()
        .map(|p| vec![sig6(p.k), sig6(p.r), sig6(p.im_sigma), p.branch.as_str().to_string()]);
    write_csv(path, &CURVE_HEADER, recs)
}

pub fn write_basic_state_csv(path: &Path, b: &BasicState) -> Result<(), CliError> {
    let header: Vec<&str> = BasicState::CSV_HEADER.split(',').collect();
    write_csv(path, &header, b.csv_rows().iter().map(|r| r.iter().map(|&v| sig6(v)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(1100.6506), "1100.65");
        assert_eq!(sig6(2.6830212), "2.68302");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(-0.000123456789), "-0.000123457");
        assert_eq!(sig6(9.999996), "10.0000");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(999999.7), "1.00000e6");
        assert_eq!(sig6(0.0), "0");
    }

    fn row() -> ResultRow {
        ResultRow {
            theta_i_deg: 40.0,
            ta: 100.0,
            kappa: 0.5,
            omega: 0.475,
            vc: 15.0,
            lambda_c: Some(std::f64::consts::PI / 3.0),
            r_c: Some(622.708_123_456_789_1),
            im_sigma: Some(0.0),
            branch: "stationary".into(),
            wall_time_s: 1.25,
            error: None,
        }
    }

    #[test]
    fn json_round_trips_exactly() {
        let mut failed = row();
        failed.lambda_c = None;
        failed.r_c = None;
        failed.im_sigma = None;
        failed.branch = "error".into();
        failed.error = Some("no sign change".into());
        let doc = TableDoc::new(vec![row(), failed]);
        let text = doc.to_json();
        assert!(text.contains("\"schema_version\": 1"));
        assert!(text.contains("1.0471975511965976e0"));
        let back = TableDoc::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn csv_header_is_fixed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_table_csv(&p, &[row()]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TABLE_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "40.0000,100.000,0.500000,0.475000,15.0000,1.04720,622.708,0,stationary,1.25000,");
    }
}

//! Tables written as CSV or as a JSON document with `config`, `rows` and
//! `meta`.

use serde::Serialize;

use crate::config::OutputFormat;

/// Round to 15 significant digits, so CSV and JSON carry the same value.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().expect("formatted float parses")
}

pub enum Cell {
    Int(i64),
    Num(f64),
    Missing,
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => v.to_string(),
            Cell::Missing => String::new(),
        }
    }
}

pub trait Row: Serialize {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<Cell>;
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub seed: u64,
    pub wall_ms: u64,
    pub redraws: u64,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl Meta {
    pub fn new(seed: u64, wall_ms: u64, redraws: u64) -> Self {
        Self {
            seed,
            wall_ms,
            redraws,
            version: env!("CARGO_PKG_VERSION"),
            warning: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<C, R> {
    pub config: C,
    pub rows: Vec<R>,
    pub meta: Meta,
}

impl<C: Serialize, R: Row> Report<C, R> {
    pub fn to_csv(&self) -> String {
        let mut out = R::HEADER.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.cells().iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryRow {
    pub i: usize,
    pub mu: f64,
    pub n_sigma2: Option<f64>,
}

impl Row for TheoryRow {
    const HEADER: &'static [&'static str] = &["i", "mu", "n_sigma2"];

    fn cells(&self) -> Vec<Cell> {
        vec![Cell::Int(self.i as i64), Cell::Num(self.mu), self.n_sigma2.into()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRow {
    pub i: usize,
    pub mu_mc: f64,
    pub se_mu: f64,
    pub n_sigma2_mc: f64,
    pub partial_sum_mu: f64,
    pub partial_sum_n_sigma2: f64,
}

impl Row for SimulationRow {
    const HEADER: &'static [&'static str] = &[
        "i",
        "mu_mc",
        "se_mu",
        "n_sigma2_mc",
        "partial_sum_mu",
        "partial_sum_n_sigma2",
    ];

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.i as i64),
            Cell::Num(self.mu_mc),
            Cell::Num(self.se_mu),
            Cell::Num(self.n_sigma2_mc),
            Cell::Num(self.partial_sum_mu),
            Cell::Num(self.partial_sum_n_sigma2),
        ]
    }
}

/// Theory next to simulation for one index, `z = (μ̂ − μ)/SE`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub i: usize,
    pub mu_theory: f64,
    pub n_sigma2_theory: Option<f64>,
    pub mu_mc: f64,
    pub se_mu: f64,
    pub n_sigma2_mc: f64,
    pub z: f64,
}

impl Row for ComparisonRow {
    const HEADER: &'static [&'static str] = &["i", "mu_theory", "n_sigma2_theory", "mu_mc", "se_mu", "n_sigma2_mc", "z"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.i as i64),
            Cell::Num(self.mu_theory),
            self.n_sigma2_theory.into(),
            Cell::Num(self.mu_mc),
            Cell::Num(self.se_mu),
            Cell::Num(self.n_sigma2_mc),
            Cell::Num(self.z),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub beta: u32,
    pub d: usize,
    pub samples: usize,
    pub mean_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub sqrt2: f64,
}

impl Row for RatioRow {
    const HEADER: &'static [&'static str] = &["beta", "d", "samples", "mean_ratio", "min_ratio", "max_ratio", "sqrt2"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.beta as i64),
            Cell::Int(self.d as i64),
            Cell::Int(self.samples as i64),
            Cell::Num(self.mean_ratio),
            Cell::Num(self.min_ratio),
            Cell::Num(self.max_ratio),
            Cell::Num(self.sqrt2),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_fifteen_digits() {
        assert_eq!(round15(-5.0 / 12.0), -0.416666666666667);
        assert_eq!(round15(0.1 + 0.2), 0.3);
        assert_eq!(round15(0.0), 0.0);
        assert_eq!(round15(1e-30 / 3.0), 3.33333333333333e-31);
        assert!(round15(f64::NAN).is_nan());
    }

    #[test]
    fn csv_layout() {
        let report = Report {
            config: (),
            rows: vec![ComparisonRow {
                i: 1,
                mu_theory: -0.5,
                n_sigma2_theory: None,
                mu_mc: -0.25,
                se_mu: 0.125,
                n_sigma2_mc: 2.0,
                z: 2.0,
            }],
            meta: Meta::new(1, 0, 0),
        };
        assert_eq!(
            report.to_csv(),
            "i,mu_theory,n_sigma2_theory,mu_mc,se_mu,n_sigma2_mc,z\n1,-0.5,,-0.25,0.125,2,2\n"
        );
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert!(json["rows"][0]["n_sigma2_theory"].is_null());
        assert_eq!(json["meta"]["version"], env!("CARGO_PKG_VERSION"));
    }
}

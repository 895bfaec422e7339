//! JSON run report and TSV plot table written by `tvpoint fit`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub l_hat: usize,
    /// `j / m` for every one-based jump index `j`.
    pub tau_hat: Vec<f64>,
    /// `(j - 1) / m`, where the new plateau starts.
    pub tau_boundary: Vec<f64>,
    pub jump_set: Vec<usize>,
    pub kkt_residual: f64,
    pub clamped: bool,
    pub beta: Vec<f64>,
    pub beta_unclamped: Vec<f64>,
    pub weights: Vec<f64>,
    pub bins: Vec<BinRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input: String,
    pub format: String,
    pub replicates: usize,
    pub events: usize,
    pub bins: usize,
    pub x: f64,
    pub weighting: String,
    pub scale: f64,
    pub scale_source: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv: Option<CvEcho>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvEcho {
    pub folds: usize,
    /// `[scale, summed test risk]` pairs.
    pub curve: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub bin: usize,
    pub left: f64,
    pub right: f64,
    pub count: u64,
    /// Fitted intensity on the bin.
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub cv_seconds: f64,
    pub fit_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is always serializable");
        s.push('\n');
        s
    }

    pub fn table_tsv(&self) -> String {
        let mut out = String::from("bin\tleft\tright\tcount\tlevel\n");
        for b in &self.bins {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                b.bin, b.left, b.right, b.count, b.level
            );
        }
        out
    }
}

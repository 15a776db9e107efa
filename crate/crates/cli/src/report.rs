//! Run reports and CSV artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub metric: String,
    /// `<=`, `>=`, `<` or `>`, or `monotone` for sequences.
    pub op: String,
    pub threshold: f64,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: String,
    pub status: Status,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub files: Vec<String>,
}

impl TaskReport {
    pub fn new(task: &str) -> Self {
        Self { task: task.into(), status: Status::Pass, metrics: BTreeMap::new(), checks: vec![], message: None, files: vec![] }
    }

    pub fn metric(&mut self, name: impl Into<String>, v: f64) {
        self.metrics.insert(name.into(), v);
    }

    fn push(&mut self, metric: &str, op: &str, threshold: f64, value: f64, pass: bool) {
        let pass = pass && value.is_finite();
        if !pass {
            self.status = Status::Fail;
        }
        self.checks.push(Check { metric: metric.into(), op: op.into(), threshold, value, pass });
    }

    pub fn at_most(&mut self, metric: &str, value: f64, threshold: f64) {
        self.push(metric, "<=", threshold, value, value <= threshold);
    }

    pub fn at_least(&mut self, metric: &str, value: f64, threshold: f64) {
        self.push(metric, ">=", threshold, value, value >= threshold);
    }

    pub fn above(&mut self, metric: &str, value: f64, threshold: f64) {
        self.push(metric, ">", threshold, value, value > threshold);
    }

    /// Strict decrease; the value recorded is the largest ratio of successive terms.
    pub fn decreasing(&mut self, metric: &str, seq: &[f64]) {
        let worst = seq.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        let pass = seq.windows(2).all(|w| w[1] < w[0]);
        self.push(metric, "monotone", 1.0, worst, pass);
    }

    pub fn error(task: &str, message: String) -> Self {
        Self { status: Status::Error, message: Some(message), ..Self::new(task) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub config_hash: String,
    pub status: Status,
    pub wall_time_s: f64,
    pub output_dir: String,
    pub tasks: Vec<TaskReport>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// SHA-256 of the config re-serialized with sorted keys.
pub fn config_hash(value: &serde_json::Value) -> String {
    let canonical = serde_json::to_vec(value).expect("JSON values serialize");
    let digest = Sha256::digest(&canonical);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Fixed scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes CSV with a `# config_hash` comment line, returning the file name.
pub fn write_csv(dir: &Path, name: &str, hash: &str, header: &[&str], rows: &[Vec<f64>]) -> std::io::Result<String> {
    let mut s = format!("# config_hash={hash}\n{}\n", header.join(","));
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    std::fs::write(dir.join(name), s)?;
    Ok(name.to_string())
}

pub const OUTPUT_ENV: &str = "GAUGE_TOMO_OUTPUT_ROOT";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("gauge-tomo-output"))
}

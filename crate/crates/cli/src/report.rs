//! Report rows, exit codes and output files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cvxgauss::ibp::verdict;
use cvxgauss::{EstimateWithError, Verdict, VerificationReport};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// How a row compares `lhs` with `rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|lhs - rhs| <= tol`, inconclusive when the tolerance dominates.
    Equal,
    /// `lhs <= rhs + tol`, inconclusive when the tolerance dominates.
    AtMost,
    /// `lhs <= tol` for a fixed threshold; `rhs` is unused.
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub se_l: f64,
    pub se_r: f64,
    pub diff: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub relation: Relation,
}

impl ResultRow {
    pub fn equal(name: impl Into<String>, lhs: &EstimateWithError, rhs: &EstimateWithError, tol: f64) -> Self {
        Self {
            name: name.into(),
            lhs: lhs.value,
            rhs: rhs.value,
            se_l: lhs.std_error,
            se_r: rhs.std_error,
            diff: (lhs.value - rhs.value).abs(),
            tol,
            verdict: verdict(lhs.value, rhs.value, tol),
            relation: Relation::Equal,
        }
    }

    pub fn at_most(name: impl Into<String>, lhs: &EstimateWithError, rhs: &EstimateWithError, tol: f64) -> Self {
        let diff = (lhs.value - rhs.value).max(0.0);
        let v = match verdict(lhs.value, rhs.value, tol) {
            Verdict::Inconclusive => Verdict::Inconclusive,
            _ if diff <= tol => Verdict::Pass,
            _ => Verdict::Fail,
        };
        Self {
            name: name.into(),
            lhs: lhs.value,
            rhs: rhs.value,
            se_l: lhs.std_error,
            se_r: rhs.std_error,
            diff,
            tol,
            verdict: v,
            relation: Relation::AtMost,
        }
    }

    pub fn threshold(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            lhs: value,
            rhs: 0.0,
            se_l: 0.0,
            se_r: 0.0,
            diff: value,
            tol,
            verdict: if value <= tol { Verdict::Pass } else { Verdict::Fail },
            relation: Relation::Threshold,
        }
    }

    pub fn from_report(name: impl Into<String>, r: &VerificationReport) -> Self {
        Self {
            name: name.into(),
            lhs: r.lhs.value,
            rhs: r.rhs.value,
            se_l: r.lhs.std_error,
            se_r: r.rhs.std_error,
            diff: r.abs_diff,
            tol: r.tolerance,
            verdict: r.verdict,
            relation: Relation::Equal,
        }
    }
}

/// A plot-ready table, written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }
}

/// What a subcommand produced, before it is written out.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub results: Vec<ResultRow>,
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
    /// Wall time in seconds per named step; written to the timing sidecar only.
    pub timing: Vec<(String, f64)>,
}

impl Outcome {
    /// 0 when every verdict passes, 2 when some are inconclusive and none fail,
    /// 1 when any fails.
    pub fn exit_code(&self) -> i32 {
        exit_code(self.results.iter().map(|r| r.verdict))
    }
}

pub fn exit_code(verdicts: impl IntoIterator<Item = Verdict>) -> i32 {
    let mut code = 0;
    for v in verdicts {
        match v {
            Verdict::Fail => return 1,
            Verdict::Inconclusive => code = 2,
            Verdict::Pass => {}
        }
    }
    code
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub results: Vec<ResultRow>,
    pub tables: Vec<String>,
    pub warnings: Vec<String>,
    pub versions: BTreeMap<String, String>,
}

impl Report {
    pub fn new(command: &str, config_hash: String, seed: u64, outcome: &Outcome) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("cvxgauss".into(), cvxgauss::VERSION.into());
        versions.insert("cvxgauss-cli".into(), env!("CARGO_PKG_VERSION").into());
        versions.insert("report_schema".into(), SCHEMA_VERSION.to_string());
        Self {
            command: command.into(),
            config_hash,
            seed,
            results: outcome.results.clone(),
            tables: outcome.tables.iter().map(|t| format!("{}.csv", t.name)).collect(),
            warnings: outcome.warnings.clone(),
            versions,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// Writes `report.json`, `timing.json` and (optionally) the CSV tables into `dir`.
/// Returns the report path.
pub fn write_outputs(dir: &Path, report: &Report, outcome: &Outcome, csv: bool) -> Result<PathBuf, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join("report.json");
    std::fs::write(&path, report.to_json()).map_err(io)?;
    let timing: BTreeMap<&str, f64> = outcome.timing.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let sidecar = serde_json::json!({ "report_sha256": report.hash(), "seconds": timing });
    std::fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&sidecar).unwrap() + "\n").map_err(io)?;
    if csv {
        for t in &outcome.tables {
            let p = dir.join(format!("{}.csv", t.name));
            let mut w = csv::Writer::from_path(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            let ce = |e: csv::Error| CliError::Io(format!("{}: {e}", p.display()));
            w.write_record(&t.header).map_err(ce)?;
            for r in &t.rows {
                w.write_record(r).map_err(ce)?;
            }
            w.flush().map_err(io)?;
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_contract() {
        use Verdict::*;
        assert_eq!(exit_code([]), 0);
        assert_eq!(exit_code([Pass, Pass]), 0);
        assert_eq!(exit_code([Pass, Inconclusive]), 2);
        assert_eq!(exit_code([Inconclusive, Fail, Pass]), 1);
        assert_eq!(exit_code([Fail, Inconclusive]), 1);
    }

    #[test]
    fn at_most_rows() {
        let a = EstimateWithError { value: 0.50, std_error: 0.001, ..EstimateWithError::closed_form(0.0) };
        let b = EstimateWithError { value: 0.49, std_error: 0.001, ..EstimateWithError::closed_form(0.0) };
        assert_eq!(ResultRow::at_most("x", &b, &a, 0.006).verdict, Verdict::Pass);
        assert_eq!(ResultRow::at_most("x", &a, &b, 0.006).verdict, Verdict::Fail);
        assert_eq!(ResultRow::at_most("x", &a, &b, 0.2).verdict, Verdict::Inconclusive);
    }
}

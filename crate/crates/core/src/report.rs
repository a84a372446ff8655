//! Check reports: one record per verified property, with the measured
//! residual, the tolerance it was judged against and, on failure, the
//! matrices that witness the violation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::linalg::CMatrix;
use crate::random::SeedPath;

/// Named matrices attached to a failing case.
pub type Witness = BTreeMap<String, CMatrix>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Option<Witness>,
}

impl CaseResult {
    /// Case judged by `residual <= tolerance`. Non-finite residuals fail and
    /// are stored as `f64::MAX` so the report stays valid JSON.
    pub fn judged(
        name: impl Into<String>,
        params: BTreeMap<String, Value>,
        residual: f64,
        tolerance: f64,
        witness: Option<Witness>,
    ) -> Self {
        let residual = if residual.is_finite() {
            residual
        } else {
            f64::MAX
        };
        let pass = residual <= tolerance;
        CaseResult {
            name: name.into(),
            params,
            residual,
            tolerance,
            pass,
            witness: if pass { None } else { witness },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub max_residual: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub config: BTreeMap<String, Value>,
    pub cases: Vec<CaseResult>,
    pub summary: Summary,
}

impl CheckReport {
    pub fn new(suite: impl Into<String>) -> Self {
        CheckReport {
            suite: suite.into(),
            config: BTreeMap::new(),
            cases: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn push(&mut self, case: CaseResult) {
        self.cases.push(case);
        self.summarize();
    }

    /// Appends another report's cases, prefixing their names with `prefix/`.
    pub fn absorb(&mut self, prefix: &str, other: CheckReport) {
        for mut case in other.cases {
            case.name = format!("{prefix}/{}", case.name);
            self.cases.push(case);
        }
        self.summarize();
    }

    /// True when every case passed (vacuously true for an empty report).
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn case(&self, name: &str) -> Option<&CaseResult> {
        self.cases.iter().find(|c| c.name == name)
    }

    /// Largest residual over the cases whose name starts with `prefix`.
    pub fn max_residual_of(&self, prefix: &str) -> f64 {
        self.cases
            .iter()
            .filter(|c| c.name.starts_with(prefix))
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseResult> {
        self.cases.iter().filter(|c| !c.pass)
    }

    /// Sorts cases by name; ties keep insertion order.
    pub fn sort_cases(&mut self) {
        self.cases.sort_by(|a, b| a.name.cmp(&b.name));
    }

    pub fn set_elapsed(&mut self, elapsed: Duration) {
        self.summary.seconds = elapsed.as_secs_f64();
    }

    fn summarize(&mut self) {
        let passed = self.cases.iter().filter(|c| c.pass).count();
        self.summary.passed = passed;
        self.summary.failed = self.cases.len() - passed;
        self.summary.max_residual = self.cases.iter().map(|c| c.residual).fold(0.0, f64::max);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned table followed by a one-line summary.
    pub fn to_text(&self) -> String {
        let width = self
            .cases
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        let mut out = String::new();
        let _ = writeln!(out, "suite: {}", self.suite);
        let _ = writeln!(
            out,
            "{:<width$}  {:>12}  {:>12}  status",
            "case", "residual", "tolerance"
        );
        for case in &self.cases {
            let _ = writeln!(
                out,
                "{:<width$}  {:>12.3e}  {:>12.3e}  {}",
                case.name,
                case.residual,
                case.tolerance,
                if case.pass { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "summary: {} passed, {} failed, max residual {:.3e}, {:.3}s",
            self.summary.passed,
            self.summary.failed,
            self.summary.max_residual,
            self.summary.seconds
        );
        out
    }
}

/// Running maximum of a residual over many samples, remembering the witness
/// of the worst sample.
#[derive(Debug)]
pub struct Tracker {
    name: String,
    tolerance: f64,
    params: BTreeMap<String, Value>,
    max: f64,
    witness: Option<Witness>,
    samples: usize,
}

impl Tracker {
    pub fn new(name: impl Into<String>, tolerance: f64, seed: &SeedPath) -> Self {
        let mut params = BTreeMap::new();
        params.insert("seed".into(), Value::from(seed.master));
        params.insert("path".into(), Value::from(seed.path.clone()));
        Tracker {
            name: name.into(),
            tolerance,
            params,
            max: 0.0,
            witness: None,
            samples: 0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    /// Records one sample. The witness closure only runs when the sample is
    /// the new worst case.
    pub fn observe(&mut self, residual: f64, witness: impl FnOnce() -> Witness) {
        self.samples += 1;
        let r = if residual.is_nan() {
            f64::INFINITY
        } else {
            residual
        };
        if r > self.max || (self.witness.is_none() && r > self.tolerance) {
            self.max = self.max.max(r);
            self.witness = Some(witness());
        }
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn finish(mut self) -> CaseResult {
        self.params
            .insert("samples".into(), Value::from(self.samples));
        CaseResult::judged(
            self.name,
            self.params,
            self.max,
            self.tolerance,
            self.witness,
        )
    }
}

/// Builds a witness from `(name, matrix)` pairs.
pub fn witness<const N: usize>(items: [(&str, &CMatrix); N]) -> Witness {
    items
        .into_iter()
        .map(|(k, m)| (k.to_string(), m.clone()))
        .collect()
}

/// `residual / scale`, with `0/0 = 0`.
pub fn scaled(residual: f64, scale: f64) -> f64 {
    if residual == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        residual / scale
    }
}

//! Deterministic JSON reports and the stdout summary table.
//!
//! Reports contain no timestamps or timings, so identical config and seed
//! give byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use pcmlax_core::algebra::LieAlgebraData;
use pcmlax_core::dense::DenseArray;
use pcmlax_core::geometry::LatticeConfig;
use pcmlax_core::residual::ResidualReport;

use crate::error::{exit, CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Measured quantity compared against `tolerance`.
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<ResidualReport<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Exit code contributed when this check fails.
    #[serde(skip)]
    pub fail_code: i32,
}

impl Check {
    /// Passes when `value <= tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::judged(name, value <= tolerance, Some(value), Some(tolerance))
    }

    pub fn judged(name: impl Into<String>, ok: bool, value: Option<f64>, tolerance: Option<f64>) -> Self {
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            tolerance,
            residual: None,
            note: None,
            fail_code: exit::CHECK_FAILED,
        }
    }

    pub fn skipped(name: impl Into<String>, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Skipped,
            value: None,
            tolerance: None,
            residual: None,
            note: Some(note.into()),
            fail_code: exit::CHECK_FAILED,
        }
    }

    pub fn with_residual(mut self, r: ResidualReport<f64>) -> Self {
        self.residual = Some(r);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_fail_code(mut self, code: i32) -> Self {
        self.fail_code = code;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub indices: &'static str,
    pub hodge: &'static str,
    pub top_form: &'static str,
    pub contraction: &'static str,
    pub curvature: &'static str,
    pub trace_metric: String,
    pub field_storage: &'static str,
}

impl Conventions {
    pub fn for_algebra(alg: &LieAlgebraData<f64>) -> Self {
        Self {
            indices: "0-based; C^k_{ln} stored as [k][l][n]",
            hodge: "(*w)_a = w^b eps_ba; Minkowski *dx0 = -dx1, *dx1 = -dx0",
            top_form: "densities are coefficients of dx0^dx1 with eps~_01 = +1, a^b = a0 b1 - a1 b0",
            contraction: "C_ln = sum_k C^k_ln A_k; lambda = C T^-1; K = T^-1 (1 - lambda^2)^-1",
            curvature: "dw + C w0 w1 (x0 then x1 slot)",
            trace_metric: format!("{:?}", alg.convention()).to_lowercase(),
            field_storage: "site-major (i0, i1), then form slot, then generator; little-endian f64",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraSummary {
    pub name: String,
    pub dim: usize,
    pub validated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub config_digest: String,
    pub seed: u64,
    pub algebra: AlgebraSummary,
    pub lattice: LatticeConfig,
    pub conventions: Conventions,
    pub checks: Vec<Check>,
    /// Command-specific results.
    pub data: Map<String, Value>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub passed: bool,
    pub exit_code: i32,
}

impl Report {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn insert(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.data.insert(key.to_string(), v);
    }

    /// Settles `passed` and `exit_code` from the checks: the first failing
    /// check decides the code.
    pub fn finish(&mut self) {
        let failed = self.checks.iter().find(|c| c.status == Status::Fail);
        self.passed = failed.is_none() && self.error.is_none();
        if self.error.is_none() {
            self.exit_code = failed.map_or(exit::PASS, |c| c.fail_code);
        }
    }

    pub fn fail_with(&mut self, err: &CliError) {
        self.error = Some(err.to_string());
        self.exit_code = err.exit_code();
        self.passed = false;
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, dir: &Path) -> CliResult<std::path::PathBuf> {
        let path = dir.join(format!("{}.report.json", self.command));
        std::fs::write(&path, self.to_json()).map_err(|source| CliError::File {
            path: path.display().to_string(),
            source,
        })?;
        Ok(path)
    }

    pub fn print_summary(&self, out: &mut impl Write, verbose: bool) -> std::io::Result<()> {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        writeln!(out, "pcmlax {}  [{}]", self.command, self.config_digest)?;
        writeln!(out, "{:<width$}  {:<7}  {:>12}  {:>12}", "check", "status", "value", "tolerance")?;
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            writeln!(out, "{:<width$}  {:<7}  {:>12}  {:>12}", c.name, status, num(c.value), num(c.tolerance))?;
            if verbose {
                if let Some(n) = &c.note {
                    writeln!(out, "{:<width$}    {n}", "")?;
                }
                if let Some(r) = &c.residual {
                    writeln!(
                        out,
                        "{:<width$}    max {:.3e}  l2 {:.3e}  scale {:.3e}  worst {:?}",
                        "", r.max_norm, r.l2_norm, r.scale, r.worst_site
                    )?;
                }
            }
        }
        if let Some(e) = &self.error {
            writeln!(out, "error: {e}")?;
        }
        writeln!(out, "result: {}", if self.passed { "PASS" } else { "FAIL" })
    }
}

fn num(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.3e}"),
        None => "-".into(),
    }
}

/// Dense output queued by a command, written next to the report.
pub struct Artifact {
    pub file: String,
    pub array: DenseArray,
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> CliResult<()> {
    for a in artifacts {
        a.array.write_file(dir.join(&a.file))?;
    }
    Ok(())
}

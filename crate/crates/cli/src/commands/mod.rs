mod frobenius;
mod integrate;
mod lagrangian;
mod residuals;
mod verify;

use serde_json::Map;

use pcmlax_core::dense::{DType, DenseArray};
use pcmlax_core::geometry::{FieldSet, LieOneForm};

use crate::config::Loaded;
use crate::error::{exit, CliResult};
use crate::report::{AlgebraSummary, Artifact, Conventions, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    VerifyIdentities,
    Residuals,
    Integrate,
    Lagrangian,
    Frobenius,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyIdentities => "verify-identities",
            Command::Residuals => "residuals",
            Command::Integrate => "integrate",
            Command::Lagrangian => "lagrangian",
            Command::Frobenius => "frobenius",
        }
    }
}

/// Settings that come from flags rather than the config file.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub seed: u64,
    pub resolution_factor: usize,
    pub terms: bool,
}

pub struct Run<'a> {
    pub cfg: &'a Loaded,
    pub settings: RunSettings,
    pub report: Report,
    pub artifacts: Vec<Artifact>,
}

impl<'a> Run<'a> {
    fn new(command: Command, cfg: &'a Loaded, settings: RunSettings) -> Self {
        let report = Report {
            schema_version: crate::report::SCHEMA_VERSION,
            command: command.name(),
            config_digest: cfg.digest.clone(),
            seed: settings.seed,
            algebra: AlgebraSummary {
                name: cfg.algebra.name().to_string(),
                dim: cfg.algebra.dim(),
                validated: cfg.algebra_validated,
            },
            lattice: cfg.config.lattice.clone(),
            conventions: Conventions::for_algebra(&cfg.algebra),
            checks: Vec::new(),
            data: Map::new(),
            outputs: Vec::new(),
            error: None,
            passed: false,
            exit_code: exit::PASS,
        };
        Self {
            cfg,
            settings,
            report,
            artifacts: Vec::new(),
        }
    }

    fn emit(&mut self, file: impl Into<String>, array: DenseArray) {
        let file = file.into();
        self.report.outputs.push(file.clone());
        self.artifacts.push(Artifact { file, array });
    }

    /// Header metadata shared by every emitted array.
    fn tag(&self, array: DenseArray, method: &str) -> DenseArray {
        let c = &self.report.conventions;
        array
            .with_meta("algebra", self.cfg.algebra.name())
            .with_meta("method", method)
            .with_meta("hodge", c.hodge)
            .with_meta("top_form", c.top_form)
            .with_meta("trace_metric", c.trace_metric.clone())
            .with_meta("config_digest", self.cfg.digest.clone())
    }

    fn field_array(&self, f: &FieldSet<f64>, method: &str) -> CliResult<DenseArray> {
        let [n0, n1] = f.lattice().extents();
        let a = DenseArray::new(DType::F64, vec![n0, n1, f.dim()], "site-major i0 i1 generator", f.as_slice().to_vec())?;
        Ok(self.tag(a, method))
    }

    fn form_array(&self, f: &LieOneForm<f64>, method: &str) -> CliResult<DenseArray> {
        let [n0, n1] = f.lattice().extents();
        let a = DenseArray::new(DType::F64, vec![n0, n1, 2, f.dim()], "site-major i0 i1 slot generator", f.as_slice().to_vec())?;
        Ok(self.tag(a, method))
    }

    fn density_array(&self, values: &[f64], method: &str) -> CliResult<DenseArray> {
        let [n0, n1] = self.cfg.lattice.extents();
        let a = DenseArray::new(DType::F64, vec![n0, n1], "site-major i0 i1", values.to_vec())?;
        Ok(self.tag(a, method))
    }
}

/// Runs a command. Errors after configuration loading are recorded in the
/// report rather than propagated, so a report is always produced.
pub fn execute(command: Command, cfg: &Loaded, settings: RunSettings) -> (Report, Vec<Artifact>) {
    let mut run = Run::new(command, cfg, settings);
    let result = match command {
        Command::VerifyIdentities => verify::run(&mut run),
        Command::Residuals => residuals::run(&mut run),
        Command::Integrate => integrate::run(&mut run),
        Command::Lagrangian => lagrangian::run(&mut run),
        Command::Frobenius => frobenius::run(&mut run),
    };
    match result {
        Ok(()) => run.report.finish(),
        Err(e) => {
            run.artifacts.clear();
            run.report.outputs.clear();
            run.report.fail_with(&e);
        }
    }
    (run.report, run.artifacts)
}

/// `max |a - b| / max |a|`, zero when both vanish.
pub(crate) fn relative_diff(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

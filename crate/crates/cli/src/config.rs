//! Run configuration: one JSON file describing the algebra, the lattice and
//! metric, the fields, and command options. Relative file paths are
//! resolved against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pcmlax_core::algebra::{validate_algebra, AlgebraConfig, LieAlgebraData};
use pcmlax_core::dense::{DType, DenseArray};
use pcmlax_core::expr::{sample_field, FieldExpr};
use pcmlax_core::frobenius::FrobeniusThresholds;
use pcmlax_core::geometry::{FieldRole, FieldSet, LatticeConfig, LieOneForm};
use pcmlax_core::lax::LatticePath;
use pcmlax_core::{FrameF64, LatticeF64};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub algebra: AlgebraConfig,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub fields: FieldsConfig,
    #[serde(default)]
    pub options: Options,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    /// Dual multiplet `A_k`.
    #[serde(default)]
    pub dual: Option<FieldSource>,
    /// Exponential coordinates `phi^m` of the group field.
    #[serde(default)]
    pub original: Option<FieldSource>,
    /// Externally prescribed Lax connection, for transport experiments.
    #[serde(default)]
    pub lax: Option<LaxSource>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    /// One expression over `(x0, x1)` per generator.
    Expressions(Vec<String>),
    /// Dense array file of shape `[N0, N1, dim]`.
    File(PathBuf),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LaxSource {
    pub alpha0: Vec<String>,
    pub alpha1: Vec<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub start: (usize, usize),
    pub moves: Vec<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    pub start: (usize, usize),
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub hodge: f64,
    pub scalar: f64,
    pub closed_direct: f64,
    pub closed_series: f64,
    pub substitution: f64,
    pub binomial: f64,
    pub lagrangian: f64,
    pub transport: f64,
    /// Allowed deviation of a refinement ratio from 4 (rescaled for other
    /// resolution factors).
    pub ratio: f64,
    /// Relative residuals at or below this count as identically zero, in
    /// which case no ratio is formed.
    pub zero_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hodge: 1e-14,
            scalar: 1e-10,
            closed_direct: 1e-10,
            closed_series: 1e-9,
            substitution: 1e-12,
            binomial: 1e-10,
            lagrangian: 1e-12,
            transport: 1e-12,
            ratio: 0.5,
            zero_floor: 1e-12,
        }
    }
}

/// Sizes of the seeded ensembles in `verify-identities`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSizes {
    pub metrics: usize,
    pub hodge_extent: usize,
    pub fields: usize,
    pub field_extent: usize,
    pub matrix_pairs: usize,
    pub matrix_dim: usize,
}

impl Default for EnsembleSizes {
    fn default() -> Self {
        Self {
            metrics: 100,
            hodge_extent: 32,
            fields: 50,
            field_extent: 32,
            matrix_pairs: 1000,
            matrix_dim: 3,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub seed: u64,
    pub series_order: usize,
    pub target_radius: f64,
    pub scalar_values: Vec<f64>,
    pub resolution_factor: usize,
    pub pcm_scale: f64,
    pub base_site: (usize, usize),
    pub thresholds: FrobeniusThresholds,
    pub tolerances: Tolerances,
    pub ensemble: EnsembleSizes,
    pub paths: Vec<PathSpec>,
    pub loop_pairs: Vec<LoopSpec>,
    pub random_loop_pairs: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: 0,
            series_order: 60,
            target_radius: 0.6,
            scalar_values: vec![0.9, -0.9, 0.5, -0.5, 0.1],
            resolution_factor: 2,
            pcm_scale: 1.0,
            base_site: (0, 0),
            thresholds: FrobeniusThresholds::default(),
            tolerances: Tolerances::default(),
            ensemble: EnsembleSizes::default(),
            paths: Vec::new(),
            loop_pairs: Vec::new(),
            random_loop_pairs: 0,
        }
    }
}

/// A parsed and validated configuration.
#[derive(Debug)]
pub struct Loaded {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    /// `sha256:` digest of the config file bytes.
    pub digest: String,
    pub algebra: LieAlgebraData<f64>,
    /// False for the formal scalar preset, which is exempt from the Lie
    /// algebra invariants.
    pub algebra_validated: bool,
    pub lattice: LatticeF64,
    pub frame: FrameF64,
    pub paths: Vec<LatticePath>,
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::File {
        path: path.display().to_string(),
        source,
    })
}

impl Loaded {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let bytes = read(path)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_bytes(&bytes, base_dir)
    }

    pub fn from_bytes(bytes: &[u8], base_dir: PathBuf) -> CliResult<Self> {
        let config: RunConfig = serde_json::from_slice(bytes).map_err(|e| CliError::Config(e.to_string()))?;
        let hex: String = Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect();
        let digest = format!("sha256:{hex}");

        let algebra = config.algebra.build::<f64>()?;
        let algebra_validated = config.algebra.preset.as_deref() != Some("scalar");
        if algebra_validated {
            let violations = validate_algebra(&algebra);
            if !violations.is_empty() {
                return Err(CliError::InvalidAlgebra {
                    name: algebra.name().to_string(),
                    violations,
                });
            }
        }
        let (lattice, frame) = config.lattice.build::<f64>()?;

        let opts = &config.options;
        if opts.resolution_factor < 2 {
            return Err(CliError::Config("resolution_factor must be at least 2".into()));
        }
        let [n0, n1] = lattice.extents();
        if opts.base_site.0 >= n0 || opts.base_site.1 >= n1 {
            return Err(CliError::Config(format!("base_site {:?} lies outside the lattice", opts.base_site)));
        }
        let paths = opts
            .paths
            .iter()
            .map(|p| {
                let moves: Vec<&str> = p.moves.iter().map(String::as_str).collect();
                let path = LatticePath::parse(p.start, &moves)?;
                path.sites(&lattice)?;
                Ok(path)
            })
            .collect::<CliResult<Vec<_>>>()?;
        for l in &opts.loop_pairs {
            if l.start.0 + l.width >= n0 || l.start.1 + l.height >= n1 || l.width == 0 || l.height == 0 {
                return Err(CliError::Config(format!("loop pair {l:?} does not fit inside the lattice")));
            }
        }

        let loaded = Self {
            config,
            base_dir,
            digest,
            algebra,
            algebra_validated,
            lattice,
            frame,
            paths,
        };
        // Parse every expression and open every file now, so that a bad
        // config fails before any computation.
        for (role, src) in loaded.sources() {
            loaded.field(src, role, lattice)?;
        }
        if let Some(lax) = &loaded.config.fields.lax {
            loaded.lax_form(lax, lattice)?;
        }
        Ok(loaded)
    }

    fn sources(&self) -> Vec<(FieldRole, &FieldSource)> {
        let f = &self.config.fields;
        let mut out = Vec::new();
        if let Some(s) = &f.dual {
            out.push((FieldRole::Dual, s));
        }
        if let Some(s) = &f.original {
            out.push((FieldRole::Original, s));
        }
        out
    }

    pub fn options(&self) -> &Options {
        &self.config.options
    }

    /// Samples or loads a field on `lattice`. File sources exist only at
    /// the configured resolution and yield `None` elsewhere.
    pub fn field(&self, src: &FieldSource, role: FieldRole, lattice: LatticeF64) -> CliResult<Option<FieldSet<f64>>> {
        let dim = self.algebra.dim();
        match src {
            FieldSource::Expressions(exprs) => {
                if exprs.len() != dim {
                    return Err(CliError::Config(format!(
                        "{role:?} field has {} expressions, algebra dimension is {dim}",
                        exprs.len()
                    )));
                }
                Ok(Some(sample_field(lattice, exprs, role)?))
            }
            FieldSource::File(path) => {
                if lattice != self.lattice {
                    return Ok(None);
                }
                let path = self.base_dir.join(path);
                read(&path)?;
                let array = DenseArray::read_file(&path)?;
                let [n0, n1] = lattice.extents();
                if array.dtype != DType::F64 || array.shape != [n0, n1, dim] {
                    return Err(CliError::Config(format!(
                        "{}: expected f64 array of shape [{n0}, {n1}, {dim}], found {:?} {:?}",
                        path.display(),
                        array.dtype,
                        array.shape
                    )));
                }
                Ok(Some(FieldSet::from_vec(lattice, dim, role, array.data)?))
            }
        }
    }

    pub fn dual(&self, lattice: LatticeF64) -> CliResult<Option<FieldSet<f64>>> {
        match &self.config.fields.dual {
            Some(src) => self.field(src, FieldRole::Dual, lattice),
            None => Ok(None),
        }
    }

    pub fn require_dual(&self, command: &str) -> CliResult<FieldSet<f64>> {
        self.dual(self.lattice)?
            .ok_or_else(|| CliError::Config(format!("`{command}` needs `fields.dual`")))
    }

    pub fn original(&self, lattice: LatticeF64) -> CliResult<Option<FieldSet<f64>>> {
        match &self.config.fields.original {
            Some(src) => self.field(src, FieldRole::Original, lattice),
            None => Ok(None),
        }
    }

    pub fn lax_form(&self, lax: &LaxSource, lattice: LatticeF64) -> CliResult<LieOneForm<f64>> {
        let dim = self.algebra.dim();
        if lax.alpha0.len() != dim || lax.alpha1.len() != dim {
            return Err(CliError::Config(format!("lax components need {dim} expressions each")));
        }
        let parse = |v: &[String]| v.iter().map(|s| FieldExpr::parse(s)).collect::<pcmlax_core::Result<Vec<_>>>();
        let (e0, e1) = (parse(&lax.alpha0)?, parse(&lax.alpha1)?);
        let form = LieOneForm::from_fn(lattice, dim, |x0, x1| {
            [e0.iter().map(|e| e.eval(x0, x1)).collect(), e1.iter().map(|e| e.eval(x0, x1)).collect()]
        });
        if form.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config("lax expressions evaluate to non-finite values".into()));
        }
        Ok(form)
    }
}

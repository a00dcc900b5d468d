use std::fmt;

use serde::Serialize;

/// Lattice coordinates `(i0, i1)` of a site together with the diagnostic
/// that disqualified it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSite {
    pub site: (usize, usize),
    /// Condition estimate, determinant or pole distance depending on the
    /// failing operation.
    pub diagnostic: f64,
}

impl fmt::Display for SingularSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}) [{:.3e}]", self.site.0, self.site.1, self.diagnostic)
    }
}

fn list_sites(sites: &[SingularSite]) -> String {
    const SHOWN: usize = 8;
    let mut out: Vec<String> = sites.iter().take(SHOWN).map(|s| s.to_string()).collect();
    if sites.len() > SHOWN {
        out.push(format!("... {} more", sites.len() - SHOWN));
    }
    out.join(", ")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} is singular or ill-conditioned (condition estimate {condition:.3e})")]
    SingularMatrix { what: &'static str, condition: f64 },

    #[error("solve kernel (1 - lambda^2) singular at A = {a:?} (condition estimate {condition:.3e})")]
    KernelSingular { a: Vec<f64>, condition: f64 },

    #[error("{what} singular at {} site(s): {}", sites.len(), list_sites(sites))]
    SingularSites {
        what: &'static str,
        sites: Vec<SingularSite>,
    },

    #[error("scalar pole |A| = 1 hit at {} site(s): {}", sites.len(), list_sites(sites))]
    Pole { sites: Vec<SingularSite> },

    #[error("series does not converge: spectral radius {max_radius:.6} >= 1 at {} site(s)", sites.len())]
    SeriesDivergent {
        max_radius: f64,
        sites: Vec<SingularSite>,
    },

    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    #[error("algebra `{0}` has no matrix representation")]
    MissingRepresentation(String),

    #[error("paths do not share endpoints: {a:?} vs {b:?}")]
    EndpointMismatch {
        a: ((usize, usize), (usize, usize)),
        b: ((usize, usize), (usize, usize)),
    },

    #[error("path leaves the lattice at step {step} from site {site:?}")]
    PathOutOfBounds { step: usize, site: (usize, usize) },

    #[error("{stage} precondition violated: relative residual {residual:.3e} exceeds threshold {threshold:.3e}")]
    Precondition {
        stage: &'static str,
        residual: f64,
        threshold: f64,
    },

    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("metric is not Lorentzian: det h = {0:.6e}")]
    NotLorentzian(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("expression `{expr}`: {message}")]
    Expression { expr: String, message: String },

    #[error("dense file: {0}")]
    Dense(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for the singular-locus family (kernel, pole, direct operator).
    pub fn is_singularity(&self) -> bool {
        matches!(
            self,
            Error::KernelSingular { .. }
                | Error::SingularSites { .. }
                | Error::Pole { .. }
                | Error::SingularMatrix { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

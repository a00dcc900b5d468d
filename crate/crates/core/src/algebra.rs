//! Finite-dimensional Lie algebras with a trace metric, and the pointwise
//! matrices built from them: the contraction `C(A)`, the spectral matrix
//! `lambda = C T^-1` and the solve kernel `K = T^-1 (1 - lambda^2)^-1`.
//!
//! Index conventions: `structure_constant(k, l, n)` is `C^k_{ln}`, so that
//! `[T_l, T_n] = C^k_{ln} T_k`. All indices are zero-based.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// How the trace metric was chosen. Recorded in every report header since
/// the normalization of `T` is a convention, not a derived quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricConvention {
    Identity,
    Killing,
    Explicit,
}

#[derive(Debug, Clone)]
pub struct LieAlgebraData<R: Real> {
    name: String,
    dim: usize,
    structure_constants: Vec<R>,
    trace_metric: Matrix<R>,
    metric_inverse: Matrix<R>,
    metric_condition: R,
    convention: MetricConvention,
    representation: Option<Vec<Matrix<Complex<R>>>>,
}

impl<R: Real> LieAlgebraData<R> {
    /// Builds algebra data from dense structure constants laid out as
    /// `[k][l][n]`. Only shapes and the invertibility of `T` are enforced
    /// here; the algebraic invariants are checked by [`validate_algebra`].
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        structure_constants: Vec<R>,
        trace_metric: Matrix<R>,
        convention: MetricConvention,
        representation: Option<Vec<Matrix<Complex<R>>>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("algebra dimension must be positive".into()));
        }
        if structure_constants.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                what: "structure constants",
                expected: dim * dim * dim,
                found: structure_constants.len(),
            });
        }
        if trace_metric.dim() != dim {
            return Err(Error::DimensionMismatch {
                what: "trace metric",
                expected: dim,
                found: trace_metric.dim(),
            });
        }
        if let Some(rep) = &representation {
            if rep.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "representation generators",
                    expected: dim,
                    found: rep.len(),
                });
            }
            let size = rep[0].dim();
            if let Some(bad) = rep.iter().find(|m| m.dim() != size) {
                return Err(Error::DimensionMismatch {
                    what: "representation matrix size",
                    expected: size,
                    found: bad.dim(),
                });
            }
        }
        if structure_constants.iter().any(|c| !c.is_finite()) || !trace_metric.is_finite() {
            return Err(Error::NonFinite("algebra data"));
        }
        let (metric_inverse, metric_condition) = trace_metric.inverse_checked("trace metric")?;
        Ok(Self {
            name: name.into(),
            dim,
            structure_constants,
            trace_metric,
            metric_inverse,
            metric_condition,
            convention,
            representation,
        })
    }

    /// The formal one-dimensional "algebra" with `C^0_{00} = 1` and `T = 1`.
    /// It is not a Lie algebra (the bracket is not antisymmetric); it
    /// reproduces the index-free scalar dual equation through the matrix
    /// solvers.
    pub fn formal_scalar() -> Self {
        Self::new("scalar", 1, vec![R::one()], Matrix::identity(1), MetricConvention::Identity, None)
            .expect("formal scalar data is well formed")
    }

    /// `u(1)^n`: vanishing structure constants, identity metric, and the
    /// diagonal representation `T_m = i e_mm`.
    pub fn abelian(dim: usize) -> Self {
        let rep = (0..dim)
            .map(|m| {
                Matrix::from_fn(dim, |r, c| {
                    if r == m && c == m {
                        Complex::new(R::zero(), R::one())
                    } else {
                        Complex::new(R::zero(), R::zero())
                    }
                })
            })
            .collect();
        Self::new(
            format!("u1^{dim}"),
            dim,
            vec![R::zero(); dim * dim * dim],
            Matrix::identity(dim),
            MetricConvention::Identity,
            Some(rep),
        )
        .expect("abelian preset is well formed")
    }

    /// `su(2)` with `C^k_{ln} = eps_{kln}`, identity metric and the
    /// defining representation `T_m = -(i/2) sigma_m`.
    pub fn su2() -> Self {
        let mut c = vec![R::zero(); 27];
        for k in 0..3 {
            for l in 0..3 {
                for n in 0..3 {
                    c[(k * 3 + l) * 3 + n] = R::lit(levi_civita(k, l, n));
                }
            }
        }
        Self::new(
            "su2",
            3,
            c,
            Matrix::identity(3),
            MetricConvention::Identity,
            Some(su2_generators()),
        )
        .expect("su2 preset is well formed")
    }

    /// Replaces the trace metric by the Killing form `C^r_{ms} C^s_{nr}`.
    /// Fails for algebras whose Killing form is degenerate (e.g. abelian).
    pub fn with_killing_metric(self) -> Result<Self> {
        let killing = self.killing_form();
        Self::new(
            self.name,
            self.dim,
            self.structure_constants,
            killing,
            MetricConvention::Killing,
            self.representation,
        )
    }

    pub fn with_metric(self, metric: Matrix<R>) -> Result<Self> {
        Self::new(
            self.name,
            self.dim,
            self.structure_constants,
            metric,
            MetricConvention::Explicit,
            self.representation,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn convention(&self) -> MetricConvention {
        self.convention
    }

    /// `C^k_{ln}`.
    #[inline]
    pub fn structure_constant(&self, k: usize, l: usize, n: usize) -> R {
        self.structure_constants[(k * self.dim + l) * self.dim + n]
    }

    pub fn structure_constants(&self) -> &[R] {
        &self.structure_constants
    }

    pub fn trace_metric(&self) -> &Matrix<R> {
        &self.trace_metric
    }

    pub fn metric_inverse(&self) -> &Matrix<R> {
        &self.metric_inverse
    }

    /// 1-norm condition estimate of `T`.
    pub fn metric_condition(&self) -> R {
        self.metric_condition
    }

    pub fn representation(&self) -> Option<&[Matrix<Complex<R>>]> {
        self.representation.as_deref()
    }

    pub fn require_representation(&self) -> Result<&[Matrix<Complex<R>>]> {
        self.representation()
            .ok_or_else(|| Error::MissingRepresentation(self.name.clone()))
    }

    pub fn is_abelian(&self) -> bool {
        self.structure_constants.iter().all(|c| *c == R::zero())
    }

    pub fn killing_form(&self) -> Matrix<R> {
        let n = self.dim;
        Matrix::from_fn(n, |m, q| {
            let mut acc = R::zero();
            for r in 0..n {
                for s in 0..n {
                    acc += self.structure_constant(r, m, s) * self.structure_constant(s, q, r);
                }
            }
            acc
        })
    }

    /// Lie bracket of coefficient vectors: `[x, y]^k = C^k_{mn} x^m y^n`.
    pub fn bracket(&self, x: &[R], y: &[R]) -> Vec<R> {
        let n = self.dim;
        let mut out = vec![R::zero(); n];
        for (k, o) in out.iter_mut().enumerate() {
            for (m, &xm) in x.iter().enumerate() {
                if xm == R::zero() {
                    continue;
                }
                for (q, &yq) in y.iter().enumerate() {
                    *o += self.structure_constant(k, m, q) * xm * yq;
                }
            }
        }
        out
    }

    /// `sum_m x^m T_m` in the matrix representation.
    pub fn compose(&self, coeffs: &[R]) -> Result<Matrix<Complex<R>>> {
        let rep = self.require_representation()?;
        let size = rep[0].dim();
        let mut out = Matrix::zeros(size);
        for (g, &x) in rep.iter().zip(coeffs) {
            out = &out + &g.scale(Complex::new(x, R::zero()));
        }
        Ok(out)
    }

    /// Least-squares coefficients of a representation matrix on the
    /// generators, using the real inner product `Re tr(X^dagger Y)`.
    pub fn decompose(&self, x: &Matrix<Complex<R>>) -> Result<Vec<R>> {
        let rep = self.require_representation()?;
        let inner = |a: &Matrix<Complex<R>>, b: &Matrix<Complex<R>>| -> R {
            a.as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(p, q)| (p.conj() * q).re)
                .sum()
        };
        let gram = Matrix::from_fn(self.dim, |m, q| inner(&rep[m], &rep[q]));
        let rhs: Vec<R> = rep.iter().map(|g| inner(g, x)).collect();
        let (coeffs, _) = gram.solve_checked(&rhs, "representation Gram matrix")?;
        Ok(coeffs)
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn su2_generators<R: Real>() -> Vec<Matrix<Complex<R>>> {
    let z = Complex::new(R::zero(), R::zero());
    let h = R::lit(0.5);
    // -(i/2) sigma_1, -(i/2) sigma_2, -(i/2) sigma_3
    let t1 = vec![
        vec![z, Complex::new(R::zero(), -h)],
        vec![Complex::new(R::zero(), -h), z],
    ];
    let t2 = vec![
        vec![z, Complex::new(-h, R::zero())],
        vec![Complex::new(h, R::zero()), z],
    ];
    let t3 = vec![
        vec![Complex::new(R::zero(), -h), z],
        vec![z, Complex::new(R::zero(), h)],
    ];
    [t1, t2, t3]
        .iter()
        .map(|rows| Matrix::from_rows(rows).expect("2x2"))
        .collect()
}

/// One violated invariant, with the offending indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `C^k_{ln} + C^k_{nl} != 0`.
    Antisymmetry { k: usize, l: usize, n: usize, value: f64 },
    /// Jacobi sum for `(l, m, n)` projected on `q`.
    Jacobi {
        l: usize,
        m: usize,
        n: usize,
        q: usize,
        value: f64,
    },
    MetricAsymmetric { m: usize, l: usize, value: f64 },
    MetricConditioning { condition: f64, limit: f64 },
    /// `T_{kp} C^k_{mn}` fails total antisymmetry under `p <-> m`.
    AdInvariance { p: usize, m: usize, n: usize, value: f64 },
    /// `[T_l, T_n] - C^k_{ln} T_k` has an entry of this size.
    Representation { l: usize, n: usize, value: f64 },
}

/// Evaluates every algebra invariant; an empty list means valid.
///
/// Entries are normalized by the largest structure constant (and metric
/// entry where the metric enters) before comparing against the absolute
/// tolerance `1e-12`.
pub fn validate_algebra<R: Real>(data: &LieAlgebraData<R>) -> Vec<Violation> {
    let n = data.dim;
    let tol = R::identity_tol();
    let c = |k, l, q| data.structure_constant(k, l, q);
    let c_scale = data
        .structure_constants
        .iter()
        .fold(R::zero(), |a, &b| a.max(b.abs()));
    let c_unit = if c_scale > R::zero() { c_scale } else { R::one() };
    let t_scale = data.trace_metric.max_abs();
    let mut out = Vec::new();

    for k in 0..n {
        for l in 0..n {
            for q in l..n {
                let v = (c(k, l, q) + c(k, q, l)) / c_unit;
                if v.abs() > tol {
                    out.push(Violation::Antisymmetry {
                        k,
                        l,
                        n: q,
                        value: v.as_f64(),
                    });
                }
            }
        }
    }

    for l in 0..n {
        for m in 0..n {
            for q3 in 0..n {
                for q in 0..n {
                    let mut s = R::zero();
                    for p in 0..n {
                        s += c(p, l, m) * c(q, p, q3)
                            + c(p, m, q3) * c(q, p, l)
                            + c(p, q3, l) * c(q, p, m);
                    }
                    let v = s / (c_unit * c_unit);
                    if v.abs() > tol {
                        out.push(Violation::Jacobi {
                            l,
                            m,
                            n: q3,
                            q,
                            value: v.as_f64(),
                        });
                    }
                }
            }
        }
    }

    let t = &data.trace_metric;
    for m in 0..n {
        for l in m + 1..n {
            let v = (t[(m, l)] - t[(l, m)]) / t_scale;
            if v.abs() > tol {
                out.push(Violation::MetricAsymmetric {
                    m,
                    l,
                    value: v.as_f64(),
                });
            }
        }
    }
    if data.metric_condition > R::cond_limit() {
        out.push(Violation::MetricConditioning {
            condition: data.metric_condition.as_f64(),
            limit: R::cond_limit().as_f64(),
        });
    }

    // X_{pmn} = T_{kp} C^k_{mn}; antisymmetry in (m, n) is inherited from C,
    // so the remaining generator of S_3 is the swap p <-> m.
    let x = |p, m, q| (0..n).fold(R::zero(), |acc, k| acc + t[(k, p)] * c(k, m, q));
    for p in 0..n {
        for m in p..n {
            for q in 0..n {
                let v = (x(p, m, q) + x(m, p, q)) / (c_unit * t_scale);
                if v.abs() > tol {
                    out.push(Violation::AdInvariance {
                        p,
                        m,
                        n: q,
                        value: v.as_f64(),
                    });
                }
            }
        }
    }

    if let Some(rep) = &data.representation {
        let r_scale = rep
            .iter()
            .fold(R::zero(), |a, g| a.max(g.max_abs()))
            .max(R::min_positive_value());
        for l in 0..n {
            for q in 0..n {
                let mut d = rep[l].commutator(&rep[q]);
                for (k, g) in rep.iter().enumerate() {
                    let ck = c(k, l, q);
                    if ck != R::zero() {
                        d = &d - &g.scale(Complex::new(ck, R::zero()));
                    }
                }
                let v = d.max_abs() / (r_scale * r_scale);
                if v > tol {
                    out.push(Violation::Representation {
                        l,
                        n: q,
                        value: v.as_f64(),
                    });
                }
            }
        }
    }
    out
}

/// Which pointwise matrix a [`SiteMatrix`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixRole {
    Contraction,
    Spectral,
    Kernel,
}

#[derive(Debug, Clone)]
pub struct SiteMatrix<R: Real> {
    pub matrix: Matrix<R>,
    pub role: MatrixRole,
    /// Condition estimate of the matrix inverted during construction.
    pub condition: Option<R>,
    pub spectral_radius: Option<R>,
}

fn check_len<R: Real>(data: &LieAlgebraData<R>, a: &[R]) -> Result<()> {
    if a.len() != data.dim {
        return Err(Error::DimensionMismatch {
            what: "dual field multiplet",
            expected: data.dim,
            found: a.len(),
        });
    }
    Ok(())
}

/// `(C)_{ln} = C^k_{ln} A_k`.
pub fn contraction_matrix<R: Real>(data: &LieAlgebraData<R>, a: &[R]) -> Result<SiteMatrix<R>> {
    check_len(data, a)?;
    let n = data.dim;
    let matrix = Matrix::from_fn(n, |l, q| {
        a.iter()
            .enumerate()
            .fold(R::zero(), |acc, (k, &ak)| acc + data.structure_constant(k, l, q) * ak)
    });
    Ok(SiteMatrix {
        matrix,
        role: MatrixRole::Contraction,
        condition: None,
        spectral_radius: None,
    })
}

/// Iterations of the power method in [`spectral_radius_estimate`].
pub const POWER_ITERATIONS: usize = 50;

/// Spectral radius estimate: power iteration, read off as
/// `sqrt(|X^2 v| / |v|)` so that a dominant complex-conjugate pair is
/// measured as accurately as a dominant real eigenvalue. Falls back to the
/// infinity-norm bound when the iterate collapses, and never exceeds it.
pub fn spectral_radius_estimate<R: Real>(x: &Matrix<R>) -> R {
    let bound = x.norm_inf();
    let n = x.dim();
    if bound == R::zero() {
        return R::zero();
    }
    let norm = |v: &[R]| v.iter().map(|e| *e * *e).sum::<R>().sqrt();
    let mut v: Vec<R> = (0..n)
        .map(|i| R::one() + R::lit(0.1) * R::from_usize_lossy(i) + R::lit(0.0137) * R::from_usize_lossy(i * i))
        .collect();
    for _ in 0..POWER_ITERATIONS {
        let w = x.mul_vec(&v);
        let s = norm(&w);
        if !(s > R::zero()) || !s.is_finite() {
            return bound;
        }
        v = w.into_iter().map(|e| e / s).collect();
    }
    let w2 = x.mul_vec(&x.mul_vec(&v));
    let est = (norm(&w2) / norm(&v)).sqrt();
    if est.is_finite() {
        est.min(bound)
    } else {
        bound
    }
}

/// `lambda(A) = C(A) T^-1`, with a spectral radius estimate attached.
pub fn spectral_matrix<R: Real>(data: &LieAlgebraData<R>, a: &[R]) -> Result<SiteMatrix<R>> {
    let c = contraction_matrix(data, a)?;
    let matrix = &c.matrix * &data.metric_inverse;
    let rho = spectral_radius_estimate(&matrix);
    Ok(SiteMatrix {
        matrix,
        role: MatrixRole::Spectral,
        condition: None,
        spectral_radius: Some(rho),
    })
}

/// `K = T^-1 (1 - lambda^2)^-1`. Errors if `1 - lambda^2` is singular or its
/// condition estimate exceeds the precision's ceiling.
pub fn solve_kernel<R: Real>(data: &LieAlgebraData<R>, a: &[R]) -> Result<SiteMatrix<R>> {
    let lambda = spectral_matrix(data, a)?;
    kernel_from_spectral(data, a, &lambda)
}

pub(crate) fn kernel_from_spectral<R: Real>(
    data: &LieAlgebraData<R>,
    a: &[R],
    lambda: &SiteMatrix<R>,
) -> Result<SiteMatrix<R>> {
    let n = data.dim;
    let inner = &Matrix::identity(n) - &(&lambda.matrix * &lambda.matrix);
    let (inv, cond) = inner.inverse_checked("solve kernel").map_err(|e| match e {
        Error::SingularMatrix { condition, .. } => Error::KernelSingular {
            a: a.iter().map(|x| x.as_f64()).collect(),
            condition,
        },
        other => other,
    })?;
    Ok(SiteMatrix {
        matrix: &data.metric_inverse * &inv,
        role: MatrixRole::Kernel,
        condition: Some(cond),
        spectral_radius: lambda.spectral_radius,
    })
}

// ---------------------------------------------------------------------------
// Configuration block
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    Named(String),
    Rows(Vec<Vec<f64>>),
}

/// JSON algebra block. Either a `preset` (`"su2"`, `"abelian"`, `"scalar"`) or explicit
/// data; explicit fields override the preset's.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub dim: Option<usize>,
    /// Sparse `[k, l, n, value]` entries of `C^k_{ln}`; unlisted entries are 0.
    #[serde(default)]
    pub structure_constants: Option<Vec<(usize, usize, usize, f64)>>,
    #[serde(default)]
    pub trace_metric: Option<MetricSpec>,
    /// Dense complex matrices, each entry an `[re, im]` pair.
    #[serde(default)]
    pub representation: Option<Vec<Vec<Vec<[f64; 2]>>>>,
}

impl AlgebraConfig {
    pub fn build<R: Real>(&self) -> Result<LieAlgebraData<R>> {
        let base: Option<LieAlgebraData<R>> = match self.preset.as_deref() {
            None => None,
            Some("su2") => Some(LieAlgebraData::su2()),
            Some("scalar") => Some(LieAlgebraData::formal_scalar()),
            Some("abelian") | Some("u1") => {
                let dim = self
                    .dim
                    .ok_or_else(|| Error::Config("abelian preset needs `dim`".into()))?;
                if dim == 0 {
                    return Err(Error::Config("algebra dimension must be positive".into()));
                }
                Some(LieAlgebraData::abelian(dim))
            }
            Some(other) => return Err(Error::Config(format!("unknown algebra preset `{other}`"))),
        };

        let dim = match (&base, self.dim) {
            (Some(b), Some(d)) if d != b.dim => {
                return Err(Error::Config(format!(
                    "preset `{}` has dim {}, config says {d}",
                    b.name, b.dim
                )))
            }
            (Some(b), _) => b.dim,
            (None, Some(d)) => d,
            (None, None) => return Err(Error::Config("algebra block needs `dim` or `preset`".into())),
        };

        let sc = match &self.structure_constants {
            Some(entries) => {
                let mut c = vec![R::zero(); dim * dim * dim];
                for &(k, l, n, v) in entries {
                    if k >= dim || l >= dim || n >= dim {
                        return Err(Error::Config(format!(
                            "structure constant index ({k}, {l}, {n}) out of range for dim {dim}"
                        )));
                    }
                    c[(k * dim + l) * dim + n] = R::lit(v);
                }
                c
            }
            None => match &base {
                Some(b) => b.structure_constants.clone(),
                None => return Err(Error::Config("missing `structure_constants`".into())),
            },
        };

        let representation = match &self.representation {
            Some(mats) => Some(
                mats.iter()
                    .map(|rows| {
                        let rows: Vec<Vec<Complex<R>>> = rows
                            .iter()
                            .map(|r| r.iter().map(|[re, im]| Complex::new(R::lit(*re), R::lit(*im))).collect())
                            .collect();
                        Matrix::from_rows(&rows)
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => base.as_ref().and_then(|b| b.representation.clone()),
        };

        let name = self
            .name
            .clone()
            .or_else(|| base.as_ref().map(|b| b.name.clone()))
            .unwrap_or_else(|| "custom".to_string());

        let identity = || (Matrix::identity(dim), MetricConvention::Identity);
        let (metric, convention) = match &self.trace_metric {
            None => match &base {
                Some(b) => (b.trace_metric.clone(), b.convention),
                None => identity(),
            },
            Some(MetricSpec::Named(s)) if s == "identity" => identity(),
            Some(MetricSpec::Named(s)) if s == "killing" => {
                let tmp = LieAlgebraData::new(
                    name.clone(),
                    dim,
                    sc.clone(),
                    Matrix::identity(dim),
                    MetricConvention::Identity,
                    None,
                )?;
                (tmp.killing_form(), MetricConvention::Killing)
            }
            Some(MetricSpec::Named(s)) => {
                return Err(Error::Config(format!("unknown trace metric `{s}`")))
            }
            Some(MetricSpec::Rows(rows)) => {
                let rows: Vec<Vec<R>> = rows.iter().map(|r| r.iter().map(|&x| R::lit(x)).collect()).collect();
                (Matrix::from_rows(&rows)?, MetricConvention::Explicit)
            }
        };

        LieAlgebraData::new(name, dim, sc, metric, convention, representation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force `sum_k C^k_{ln} A_k` straight from the flat array.
    fn contraction_oracle(data: &LieAlgebraData<f64>, a: &[f64]) -> Vec<Vec<f64>> {
        let n = data.dim();
        let flat = data.structure_constants();
        let mut out = vec![vec![0.0; n]; n];
        for (idx, &c) in flat.iter().enumerate() {
            let k = idx / (n * n);
            let l = (idx / n) % n;
            let q = idx % n;
            out[l][q] += c * a[k];
        }
        out
    }

    #[test]
    fn presets_are_valid() {
        assert!(validate_algebra(&LieAlgebraData::<f64>::abelian(4)).is_empty());
        let v = validate_algebra(&LieAlgebraData::<f64>::su2());
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn flipped_sign_breaks_jacobi() {
        let su2 = LieAlgebraData::<f64>::su2();
        let mut c = su2.structure_constants().to_vec();
        // C^3_{12} in one-based notation.
        c[(2 * 3) * 3 + 1] = -c[(2 * 3) * 3 + 1];
        let bad = LieAlgebraData::new("bad", 3, c, Matrix::identity(3), MetricConvention::Identity, None).unwrap();
        let v = validate_algebra(&bad);
        assert!(v.contains(&Violation::Antisymmetry {
            k: 2,
            l: 0,
            n: 1,
            value: -2.0
        }));
        let jacobi: Vec<_> = v
            .iter()
            .filter_map(|x| match x {
                Violation::Jacobi { l, m, n, .. } => Some((*l, *m, *n)),
                _ => None,
            })
            .collect();
        assert!(!jacobi.is_empty());
        // every reported Jacobi triple touches the flipped pair (1, 2)
        assert!(jacobi
            .iter()
            .all(|&(l, m, n)| [l, m, n].contains(&0) && [l, m, n].contains(&1)));
    }

    #[test]
    fn representation_mismatch_is_reported() {
        let su2 = LieAlgebraData::<f64>::su2();
        let mut rep = su2.representation().unwrap().to_vec();
        rep.swap(0, 1);
        let bad = LieAlgebraData::new(
            "swapped",
            3,
            su2.structure_constants().to_vec(),
            Matrix::identity(3),
            MetricConvention::Identity,
            Some(rep),
        )
        .unwrap();
        assert!(validate_algebra(&bad)
            .iter()
            .any(|v| matches!(v, Violation::Representation { .. })));
    }

    #[test]
    fn su2_representation_brackets() {
        let su2 = LieAlgebraData::<f64>::su2();
        let rep = su2.representation().unwrap();
        for l in 0..3 {
            for n in 0..3 {
                let mut d = rep[l].commutator(&rep[n]);
                for (k, g) in rep.iter().enumerate() {
                    d = &d - &g.scale(Complex::new(su2.structure_constant(k, l, n), 0.0));
                }
                assert!(d.max_abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn killing_form_of_su2() {
        let k = LieAlgebraData::<f64>::su2().killing_form();
        assert_eq!(k, Matrix::identity(3).scale(-2.0));
        assert!(LieAlgebraData::<f64>::abelian(2).with_killing_metric().is_err());
    }

    #[test]
    fn contraction_examples() {
        let su2 = LieAlgebraData::<f64>::su2();
        let a = [0.0, 0.0, 0.7];
        let m = contraction_matrix(&su2, &a).unwrap().matrix;
        let expected = Matrix::from_rows(&[vec![0.0, 0.7, 0.0], vec![-0.7, 0.0, 0.0], vec![0.0; 3]]).unwrap();
        assert_eq!(m, expected);
        assert_eq!(
            contraction_matrix(&su2, &[0.0; 3]).unwrap().matrix,
            Matrix::zeros(3)
        );
        let ab = LieAlgebraData::<f64>::abelian(3);
        assert_eq!(
            contraction_matrix(&ab, &[1.0, -2.0, 3.0]).unwrap().matrix,
            Matrix::zeros(3)
        );
        assert!(matches!(
            contraction_matrix(&su2, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spectral_examples() {
        let su2 = LieAlgebraData::<f64>::su2();
        for a in [0.3, 0.9, 1.7] {
            let s = spectral_matrix(&su2, &[0.0, 0.0, a]).unwrap();
            let c = contraction_matrix(&su2, &[0.0, 0.0, a]).unwrap();
            assert_eq!(s.matrix, c.matrix);
            assert!((s.spectral_radius.unwrap() - a).abs() < 1e-14);
        }
        let z = spectral_matrix(&su2, &[0.0; 3]).unwrap();
        assert_eq!(z.spectral_radius, Some(0.0));
        let ab = spectral_matrix(&LieAlgebraData::<f64>::abelian(2), &[3.0, 1.0]).unwrap();
        assert_eq!(ab.matrix, Matrix::zeros(2));
    }

    #[test]
    fn spectral_radius_of_generic_su2_field_is_norm() {
        // eigenvalues of an so(3) generator are 0, +-i|A|
        let su2 = LieAlgebraData::<f64>::su2();
        let a = [0.2, -0.4, 0.1];
        let norm = (0.04f64 + 0.16 + 0.01).sqrt();
        let rho = spectral_matrix(&su2, &a).unwrap().spectral_radius.unwrap();
        assert!((rho - norm).abs() < 1e-12, "{rho} vs {norm}");
    }

    #[test]
    fn kernel_examples() {
        let su2 = LieAlgebraData::<f64>::su2();
        let k0 = solve_kernel(&su2, &[0.0; 3]).unwrap();
        assert_eq!(k0.matrix, Matrix::identity(3));
        let a = 0.8;
        let k = solve_kernel(&su2, &[0.0, 0.0, a]).unwrap().matrix;
        let d = 1.0 / (1.0 + a * a);
        let expected = Matrix::from_rows(&[vec![d, 0.0, 0.0], vec![0.0, d, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!((&k - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn kernel_singularity_carries_field() {
        // formal one-dimensional "algebra" with self-contraction C = 1 so that
        // lambda = A and the kernel blows up at A = 1.
        let formal = LieAlgebraData::new("formal", 1, vec![1.0], Matrix::identity(1), MetricConvention::Identity, None).unwrap();
        match solve_kernel(&formal, &[1.0]) {
            Err(Error::KernelSingular { a, .. }) => assert_eq!(a, vec![1.0]),
            other => panic!("expected singular kernel, got {other:?}"),
        }
    }

    #[test]
    fn config_presets_and_overrides() {
        let cfg: AlgebraConfig = serde_json::from_str(r#"{"preset": "su2"}"#).unwrap();
        let a = cfg.build::<f64>().unwrap();
        assert_eq!(a.dim(), 3);
        assert!(a.representation().is_some());

        let cfg: AlgebraConfig = serde_json::from_str(
            r#"{"name": "so3", "dim": 3,
                "structure_constants": [[2,0,1,1],[2,1,0,-1],[0,1,2,1],[0,2,1,-1],[1,2,0,1],[1,0,2,-1]],
                "trace_metric": "killing"}"#,
        )
        .unwrap();
        let b = cfg.build::<f64>().unwrap();
        assert_eq!(b.convention(), MetricConvention::Killing);
        assert_eq!(b.trace_metric(), &Matrix::identity(3).scale(-2.0));
        assert!(validate_algebra(&b).is_empty());

        let cfg: AlgebraConfig = serde_json::from_str(r#"{"preset": "abelian", "dim": 2, "trace_metric": [[2, 0], [0, 1]]}"#).unwrap();
        let c = cfg.build::<f64>().unwrap();
        assert_eq!(c.convention(), MetricConvention::Explicit);
        assert_eq!(c.metric_inverse()[(0, 0)], 0.5);
    }

    #[test]
    fn config_representation_pairs() {
        let cfg: AlgebraConfig = serde_json::from_str(
            r#"{"dim": 1, "structure_constants": [], "representation": [[[[0, 1]]]]}"#,
        )
        .unwrap();
        let a = cfg.build::<f64>().unwrap();
        assert_eq!(a.representation().unwrap()[0][(0, 0)], Complex::new(0.0, 1.0));
    }

    #[test]
    fn decompose_inverts_compose() {
        let su2 = LieAlgebraData::<f64>::su2();
        let x = [0.3, -1.2, 0.5];
        let m = su2.compose(&x).unwrap();
        let back = su2.decompose(&m).unwrap();
        for (p, q) in back.iter().zip(x) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    fn algebra() -> impl Strategy<Value = LieAlgebraData<f64>> {
        prop_oneof![
            Just(LieAlgebraData::su2()),
            Just(LieAlgebraData::abelian(3)),
            Just(LieAlgebraData::su2().with_killing_metric().unwrap()),
            Just(
                LieAlgebraData::su2()
                    .with_metric(Matrix::from_rows(&[vec![2.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap())
                    .unwrap()
            ),
        ]
    }

    proptest! {
        #[test]
        fn contraction_is_linear(
            data in algebra(),
            a in proptest::collection::vec(-2.0..2.0f64, 3),
            b in proptest::collection::vec(-2.0..2.0f64, 3),
            s in -3.0..3.0f64,
        ) {
            let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + y).collect();
            let lhs = contraction_matrix(&data, &combo).unwrap().matrix;
            let rhs = &contraction_matrix(&data, &a).unwrap().matrix.scale(s)
                + &contraction_matrix(&data, &b).unwrap().matrix;
            prop_assert!((&lhs - &rhs).max_abs() <= 1e-12 * (1.0 + lhs.max_abs()));
            let oracle = contraction_oracle(&data, &a);
            let m = contraction_matrix(&data, &a).unwrap().matrix;
            for l in 0..3 { for q in 0..3 {
                prop_assert!((m[(l, q)] - oracle[l][q]).abs() <= 1e-15);
            }}
        }

        #[test]
        fn spectral_times_metric_is_contraction(
            data in algebra(),
            a in proptest::collection::vec(-2.0..2.0f64, 3),
        ) {
            let lam = spectral_matrix(&data, &a).unwrap().matrix;
            let c = contraction_matrix(&data, &a).unwrap().matrix;
            let back = &lam * data.trace_metric();
            prop_assert!((&back - &c).max_abs() <= 1e-12 * c.max_abs().max(1.0));
        }

        #[test]
        fn kernel_inverts_inner_matrix(
            data in algebra(),
            a in proptest::collection::vec(-2.0..2.0f64, 3),
        ) {
            let lam = spectral_matrix(&data, &a).unwrap().matrix;
            let k = solve_kernel(&data, &a).unwrap().matrix;
            let inner = &Matrix::identity(3) - &(&lam * &lam);
            let prod = &inner * &(data.trace_metric() * &k);
            prop_assert!((&prod - &Matrix::identity(3)).max_abs() <= 1e-10);
        }
    }
}

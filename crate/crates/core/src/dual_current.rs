//! Current components `F^m` in terms of the dual scalars `A_k`.
//!
//! The defining first-order equation in two dimensions is
//! `T *F = -dA - C(A) F`, equivalently `*F = -T^-1 dA - T^-1 C F`.
//! Its closed-form solution is
//!
//! ```text
//! F = -K *dA + T^-1 C K dA,      K = T^-1 (1 - lambda^2)^-1,  lambda = C T^-1
//! ```
//!
//! Four routes are provided: the scalar closed form for the index-free
//! equation `*F = -dA - F A`, the matrix power series, the matrix closed
//! form, and a direct `2n x 2n` linear solve of the defining equation that
//! serves as an oracle for the other two and decides uniqueness per site.
//!
//! Derivatives always come from the geometry stencils via [`DualData`];
//! nothing here differentiates.

use serde::Serialize;

use crate::algebra::{contraction_matrix, kernel_from_spectral, spectral_matrix, LieAlgebraData};
use crate::error::{Error, Result, SingularSite};
use crate::geometry::{d_scalar, max_abs, FieldSet, LieOneForm, LorentzFrame};
use crate::matrix::Matrix;
use crate::residual::ResidualReport;
use crate::scalar::Real;

/// Distance from `|A| = 1` treated as hitting the scalar pole.
pub const POLE_TOLERANCE: f64 = 1e-8;

/// Dual multiplet together with its lattice derivative.
#[derive(Debug, Clone)]
pub struct DualData<R: Real> {
    pub field: FieldSet<R>,
    pub derivative: LieOneForm<R>,
}

impl<R: Real> DualData<R> {
    /// Differentiates with the geometry stencils.
    pub fn from_field(field: FieldSet<R>) -> Self {
        let derivative = d_scalar(&field);
        Self { field, derivative }
    }

    /// Pairs a field with an externally supplied derivative (e.g. analytic).
    pub fn with_derivative(field: FieldSet<R>, derivative: LieOneForm<R>) -> Result<Self> {
        if field.lattice() != derivative.lattice() || field.dim() != derivative.dim() {
            return Err(Error::DimensionMismatch {
                what: "dual field derivative",
                expected: field.as_slice().len() * 2,
                found: derivative.as_slice().len(),
            });
        }
        Ok(Self { field, derivative })
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SolutionMethod {
    ScalarClosed,
    Series { order: usize },
    Closed,
    DirectSolve,
}

impl SolutionMethod {
    pub fn tag(&self) -> String {
        match self {
            SolutionMethod::ScalarClosed => "scalar_closed".into(),
            SolutionMethod::Series { order } => format!("series({order})"),
            SolutionMethod::Closed => "closed".into(),
            SolutionMethod::DirectSolve => "direct_solve".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CurrentSolution<R: Real> {
    pub current: LieOneForm<R>,
    pub method: SolutionMethod,
    /// Per-site diagnostic: `|1 - A^2|` (scalar), spectral radius (series),
    /// kernel condition (closed) or operator condition (direct).
    pub site_diagnostics: Vec<R>,
    /// Series only: `rho^(N+1) / (1 - rho)` at the worst site.
    pub tail_bound: Option<R>,
}

fn check_dual<R: Real>(algebra: &LieAlgebraData<R>, dual: &DualData<R>) -> Result<()> {
    if dual.dim() != algebra.dim() {
        return Err(Error::DimensionMismatch {
            what: "dual field vs algebra",
            expected: algebra.dim(),
            found: dual.dim(),
        });
    }
    Ok(())
}

/// Index-free closed form `F = -(1/(1-A^2)) *dA + (A/(1-A^2)) dA`.
pub fn solve_scalar<R: Real>(a: &FieldSet<R>, da: &LieOneForm<R>, frame: &LorentzFrame<R>) -> Result<CurrentSolution<R>> {
    if a.dim() != 1 || da.dim() != 1 {
        return Err(Error::DimensionMismatch {
            what: "scalar dual field",
            expected: 1,
            found: a.dim(),
        });
    }
    let lat = *a.lattice();
    let tol = R::lit(POLE_TOLERANCE);
    let poles: Vec<SingularSite> = (0..lat.sites())
        .filter_map(|s| {
            let v = a.at(s)[0];
            let dist = (v.abs() - R::one()).abs();
            (dist < tol).then(|| SingularSite {
                site: lat.site_coords(s),
                diagnostic: dist.as_f64(),
            })
        })
        .collect();
    if !poles.is_empty() {
        return Err(Error::Pole { sites: poles });
    }
    let mut diag = Vec::with_capacity(lat.sites());
    let current = da.map_sites(|s, d0, d1| {
        let v = a.at(s)[0];
        let denom = R::one() - v * v;
        diag.push(denom.abs());
        let star = frame.hodge_components([d0[0], d1[0]]);
        [
            vec![(-star[0] + v * d0[0]) / denom],
            vec![(-star[1] + v * d1[0]) / denom],
        ]
    });
    Ok(CurrentSolution {
        current,
        method: SolutionMethod::ScalarClosed,
        site_diagnostics: diag,
        tail_bound: None,
    })
}

/// Residual of the index-free equation: `*F + dA + A F`.
pub fn scalar_residual<R: Real>(f: &LieOneForm<R>, a: &FieldSet<R>, da: &LieOneForm<R>, frame: &LorentzFrame<R>) -> ResidualReport<R> {
    let lat = *a.lattice();
    let mut values = Vec::with_capacity(lat.sites() * 2);
    let mut scale = R::zero();
    for s in 0..lat.sites() {
        let v = a.at(s)[0];
        let ff = [f.component(s, 0)[0], f.component(s, 1)[0]];
        let star = frame.hodge_components(ff);
        for alpha in 0..2 {
            let d = da.component(s, alpha)[0];
            scale = scale.max(star[alpha].abs()).max(d.abs()).max((v * ff[alpha]).abs());
            values.push(star[alpha] + d + v * ff[alpha]);
        }
    }
    ResidualReport::from_field("scalar_first_order", &lat, 2, values, scale)
}

/// Applies a per-site matrix to both form components.
fn apply<R: Real>(m: &Matrix<R>, d0: &[R], d1: &[R]) -> [Vec<R>; 2] {
    [m.mul_vec(d0), m.mul_vec(d1)]
}

fn hodge_pair<R: Real>(frame: &LorentzFrame<R>, w: &[Vec<R>; 2]) -> [Vec<R>; 2] {
    let s = frame.hodge_matrix();
    let a = w[0].iter().zip(&w[1]).map(|(&x, &y)| s[0][0] * x + s[0][1] * y).collect();
    let b = w[0].iter().zip(&w[1]).map(|(&x, &y)| s[1][0] * x + s[1][1] * y).collect();
    [a, b]
}

/// Partial sums of the power series through `lambda^order`:
/// `F = -T^-1 (sum_even lambda^j) *dA + T^-1 (sum_odd lambda^j) dA`.
///
/// Refuses when any site has spectral radius `>= 1`.
pub fn solve_series<R: Real>(algebra: &LieAlgebraData<R>, dual: &DualData<R>, frame: &LorentzFrame<R>, order: usize) -> Result<CurrentSolution<R>> {
    check_dual(algebra, dual)?;
    let lat = *dual.field.lattice();
    let n = algebra.dim();
    let mut lambdas = Vec::with_capacity(lat.sites());
    let mut radii = Vec::with_capacity(lat.sites());
    let mut divergent = Vec::new();
    let mut worst = R::zero();
    for s in 0..lat.sites() {
        let lam = spectral_matrix(algebra, dual.field.at(s))?;
        let rho = lam.spectral_radius.unwrap_or_else(R::zero);
        worst = worst.max(rho);
        if rho >= R::one() {
            divergent.push(SingularSite {
                site: lat.site_coords(s),
                diagnostic: rho.as_f64(),
            });
        }
        radii.push(rho);
        lambdas.push(lam.matrix);
    }
    if !divergent.is_empty() {
        return Err(Error::SeriesDivergent {
            max_radius: worst.as_f64(),
            sites: divergent,
        });
    }
    let tinv = algebra.metric_inverse();
    let current = dual.derivative.map_sites(|s, d0, d1| {
        let lam = &lambdas[s];
        let mut even = Matrix::identity(n);
        let mut odd = Matrix::zeros(n);
        let mut power = Matrix::identity(n);
        for j in 1..=order {
            power = &power * lam;
            if j % 2 == 0 {
                even = &even + &power;
            } else {
                odd = &odd + &power;
            }
        }
        let e = tinv * &even;
        let o = tinv * &odd;
        let star = hodge_pair(frame, &[d0.to_vec(), d1.to_vec()]);
        let a = apply(&e, &star[0], &star[1]);
        let b = apply(&o, d0, d1);
        [
            a[0].iter().zip(&b[0]).map(|(&x, &y)| y - x).collect(),
            a[1].iter().zip(&b[1]).map(|(&x, &y)| y - x).collect(),
        ]
    });
    let tail = worst.powi(order as i32 + 1) / (R::one() - worst);
    Ok(CurrentSolution {
        current,
        method: SolutionMethod::Series { order },
        site_diagnostics: radii,
        tail_bound: Some(tail),
    })
}

/// Per-site closed-form pieces: `G = K dA` and `P = T^-1 C G`, so that
/// `F = -*G + P`.
pub(crate) struct ClosedSite<R: Real> {
    pub g: [Vec<R>; 2],
    pub p: [Vec<R>; 2],
    pub contraction: Matrix<R>,
    pub condition: R,
}

pub(crate) fn closed_site<R: Real>(algebra: &LieAlgebraData<R>, a: &[R], d0: &[R], d1: &[R]) -> Result<ClosedSite<R>> {
    let lam = spectral_matrix(algebra, a)?;
    let kernel = kernel_from_spectral(algebra, a, &lam)?;
    let c = contraction_matrix(algebra, a)?.matrix;
    let g = apply(&kernel.matrix, d0, d1);
    let tc = algebra.metric_inverse() * &c;
    let p = apply(&tc, &g[0], &g[1]);
    Ok(ClosedSite {
        g,
        p,
        contraction: c,
        condition: kernel.condition.unwrap_or_else(R::zero),
    })
}

/// Runs `f` at every site, collecting singular-kernel sites into a single
/// error instead of stopping at the first.
pub(crate) fn for_each_regular_site<R: Real, T>(
    algebra: &LieAlgebraData<R>,
    dual: &DualData<R>,
    mut f: impl FnMut(usize) -> Result<T>,
) -> Result<Vec<T>> {
    check_dual(algebra, dual)?;
    let lat = *dual.field.lattice();
    let mut out = Vec::with_capacity(lat.sites());
    let mut singular = Vec::new();
    for s in 0..lat.sites() {
        match f(s) {
            Ok(v) => out.push(v),
            Err(Error::KernelSingular { condition, .. }) => singular.push(SingularSite {
                site: lat.site_coords(s),
                diagnostic: condition,
            }),
            Err(e) => return Err(e),
        }
    }
    if singular.is_empty() {
        Ok(out)
    } else {
        Err(Error::SingularSites {
            what: "solve kernel",
            sites: singular,
        })
    }
}

/// Closed form `F = -K *dA + T^-1 C K dA`, valid wherever the kernel is
/// invertible (including where the series diverges).
pub fn solve_closed<R: Real>(algebra: &LieAlgebraData<R>, dual: &DualData<R>, frame: &LorentzFrame<R>) -> Result<CurrentSolution<R>> {
    let sites = for_each_regular_site(algebra, dual, |s| {
        closed_site(
            algebra,
            dual.field.at(s),
            dual.derivative.component(s, 0),
            dual.derivative.component(s, 1),
        )
    })?;
    let mut diag = Vec::with_capacity(sites.len());
    let current = dual.derivative.map_sites(|s, _, _| {
        let site = &sites[s];
        diag.push(site.condition);
        let star = hodge_pair(frame, &site.g);
        [
            site.p[0].iter().zip(&star[0]).map(|(&p, &g)| p - g).collect(),
            site.p[1].iter().zip(&star[1]).map(|(&p, &g)| p - g).collect(),
        ]
    });
    Ok(CurrentSolution {
        current,
        method: SolutionMethod::Closed,
        site_diagnostics: diag,
        tail_bound: None,
    })
}

/// Assembles the `2n x 2n` operator `F -> T *F + C F` acting on the unknowns
/// ordered `(alpha, l)`.
pub fn direct_operator<R: Real>(algebra: &LieAlgebraData<R>, a: &[R], frame: &LorentzFrame<R>) -> Result<Matrix<R>> {
    let n = algebra.dim();
    let c = contraction_matrix(algebra, a)?.matrix;
    let t = algebra.trace_metric();
    let s = frame.hodge_matrix();
    Ok(Matrix::from_fn(2 * n, |row, col| {
        let (alpha, l) = (row / n, row % n);
        let (gamma, m) = (col / n, col % n);
        let mut v = s[alpha][gamma] * t[(l, m)];
        if alpha == gamma {
            v += c[(l, m)];
        }
        v
    }))
}

/// Oracle: solves `T *F + C F = -dA` site by site as a dense linear system.
/// Invertibility of the operator is exactly uniqueness of the solution at
/// that site; singular sites are reported with a determinant estimate.
pub fn solve_direct<R: Real>(algebra: &LieAlgebraData<R>, dual: &DualData<R>, frame: &LorentzFrame<R>) -> Result<CurrentSolution<R>> {
    check_dual(algebra, dual)?;
    let lat = *dual.field.lattice();
    let n = algebra.dim();
    let mut singular = Vec::new();
    let mut solutions = Vec::with_capacity(lat.sites());
    let mut diag = Vec::with_capacity(lat.sites());
    for s in 0..lat.sites() {
        let op = direct_operator(algebra, dual.field.at(s), frame)?;
        let rhs: Vec<R> = dual
            .derivative
            .component(s, 0)
            .iter()
            .chain(dual.derivative.component(s, 1))
            .map(|&x| -x)
            .collect();
        match op.solve_checked(&rhs, "direct operator") {
            Ok((x, cond)) => {
                diag.push(cond);
                solutions.push(x);
            }
            Err(Error::SingularMatrix { .. }) => {
                singular.push(SingularSite {
                    site: lat.site_coords(s),
                    diagnostic: op.lu().determinant().as_f64(),
                });
                solutions.push(vec![R::zero(); 2 * n]);
            }
            Err(e) => return Err(e),
        }
    }
    if !singular.is_empty() {
        return Err(Error::SingularSites {
            what: "direct operator",
            sites: singular,
        });
    }
    let current = dual
        .derivative
        .map_sites(|s, _, _| [solutions[s][..n].to_vec(), solutions[s][n..].to_vec()]);
    Ok(CurrentSolution {
        current,
        method: SolutionMethod::DirectSolve,
        site_diagnostics: diag,
        tail_bound: None,
    })
}

/// Residual of `*F = -T^-1 dA - T^-1 C F`, i.e. `*F + T^-1 dA + T^-1 C F`.
/// Scale is the largest of the three terms' max-norms.
pub fn first_order_residual<R: Real>(f: &LieOneForm<R>, dual: &DualData<R>, algebra: &LieAlgebraData<R>, frame: &LorentzFrame<R>) -> Result<ResidualReport<R>> {
    check_dual(algebra, dual)?;
    let lat = *dual.field.lattice();
    let n = algebra.dim();
    let tinv = algebra.metric_inverse();
    let mut values = Vec::with_capacity(lat.sites() * 2 * n);
    let (mut s1, mut s2, mut s3) = (R::zero(), R::zero(), R::zero());
    for s in 0..lat.sites() {
        let c = contraction_matrix(algebra, dual.field.at(s))?.matrix;
        let tc = tinv * &c;
        let star = hodge_pair(frame, &[f.component(s, 0).to_vec(), f.component(s, 1).to_vec()]);
        for alpha in 0..2 {
            let td = tinv.mul_vec(dual.derivative.component(s, alpha));
            let tcf = tc.mul_vec(f.component(s, alpha));
            s1 = s1.max(max_abs(&star[alpha]));
            s2 = s2.max(max_abs(&td));
            s3 = s3.max(max_abs(&tcf));
            for m in 0..n {
                values.push(star[alpha][m] + td[m] + tcf[m]);
            }
        }
    }
    Ok(ResidualReport::from_field("first_order", &lat, 2 * n, values, s1.max(s2).max(s3)))
}

/// Both sides of the binomial inverse theorem
/// `(A + B)^-1 = A^-1 - A^-1 B (B + B A^-1 B)^-1 B A^-1`; residual is the
/// entrywise difference, scaled by the left side's largest entry.
pub fn binomial_identity_check<R: Real>(a: &Matrix<R>, b: &Matrix<R>) -> Result<ResidualReport<R>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            what: "binomial identity operands",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (lhs, _) = (a + b).inverse_checked("A + B")?;
    let (ainv, _) = a.inverse_checked("A")?;
    let _ = b.inverse_checked("B")?;
    let inner = b + &(&(b * &ainv) * b);
    let (inner_inv, _) = inner.inverse_checked("B + B A^-1 B")?;
    let rhs = &ainv - &(&(&(&(&ainv * b) * &inner_inv) * b) * &ainv);
    let diff = &lhs - &rhs;
    Ok(ResidualReport::from_values("binomial_inverse", diff.as_slice().to_vec(), lhs.max_abs()))
}

/// Specialization to the solve kernel: with `X = (C T^-1)^2`,
/// `(1 - X)^-1 = -T C^-1 T C^-1 + X^-1 (1 - X)^-1`.
pub fn kernel_identity_check<R: Real>(c: &Matrix<R>, t: &Matrix<R>) -> Result<ResidualReport<R>> {
    let n = c.dim();
    let (tinv, _) = t.inverse_checked("T")?;
    let (cinv, _) = c.inverse_checked("C")?;
    let lam = c * &tinv;
    let x = &lam * &lam;
    let (lhs, _) = (&Matrix::identity(n) - &x).inverse_checked("1 - X")?;
    let (xinv, _) = x.inverse_checked("X")?;
    let tc = t * &cinv;
    let rhs = &(&xinv * &lhs) - &(&tc * &tc);
    let diff = &lhs - &rhs;
    Ok(ResidualReport::from_values("kernel_inverse", diff.as_slice().to_vec(), lhs.max_abs()))
}

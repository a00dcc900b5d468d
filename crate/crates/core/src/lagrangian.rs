//! Exponential parametrization, Bianchi residual and the Lagrangian
//! densities.
//!
//! Densities are coefficients of `dx^0 ^ dx^1` (coordinate orientation,
//! no volume factor), with the wedge of one-forms `a ^ b = a_0 b_1 - a_1 b_0`.
//! With that convention the PCM density of an abelian field on Minkowski
//! space is `-1/2 ((d_0 phi)^2 - (d_1 phi)^2)`.
//!
//! The adjoint contraction `M^n_m = C^n_{lm} phi^l` is kept distinct from the
//! solve kernel `K` of the dual current.

use num_complex::Complex;
use serde::Serialize;

use crate::algebra::LieAlgebraData;
use crate::dual_current::{closed_site, for_each_regular_site, DualData};
use crate::error::{Error, Result};
use crate::geometry::{d_oneform, d_scalar, hodge_oneform, FieldRole, FieldSet, Lattice2D, LieOneForm, LorentzFrame};
use crate::lax::curvature_report;
use crate::matrix::{matrix_exp, Matrix};
use crate::residual::ResidualReport;
use crate::scalar::Real;

/// Absolute term-norm cutoff of the `W` power series.
pub const W_SERIES_CUTOFF: f64 = 1e-16;
const W_SERIES_MAX_TERMS: usize = 400;

/// `M^n_m = C^n_{lm} phi^l`; row `n`, column `m`.
pub fn adjoint_contraction<R: Real>(algebra: &LieAlgebraData<R>, phi: &[R]) -> Result<Matrix<R>> {
    let n = algebra.dim();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            what: "exponential coordinates",
            expected: n,
            found: phi.len(),
        });
    }
    Ok(Matrix::from_fn(n, |row, col| {
        phi.iter()
            .enumerate()
            .fold(R::zero(), |acc, (l, &p)| acc + algebra.structure_constant(row, l, col) * p)
    }))
}

/// Plain power series `sum_k (-M)^k / (k+1)!`, stopped once a term's max
/// entry drops below [`W_SERIES_CUTOFF`]. Accurate only for modest `|M|`:
/// the alternating terms cancel catastrophically for large norms.
pub fn w_series<R: Real>(m: &Matrix<R>) -> Matrix<R> {
    let n = m.dim();
    let neg = -m;
    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    let cutoff = R::lit(W_SERIES_CUTOFF);
    for k in 1..W_SERIES_MAX_TERMS {
        term = (&term * &neg).scale(R::one() / R::from_usize_lossy(k + 1));
        sum = &sum + &term;
        if term.max_abs() < cutoff {
            break;
        }
    }
    sum
}

/// `W = (1 - e^-M) M^-1`, evaluated without inverting `M`.
///
/// For `|M|_1 > 1` the argument is halved `s` times, the series is summed,
/// and the result is doubled back with `W(M) = W(M/2) (1 + e^{-M/2}) / 2`,
/// where `e^{-X} = 1 - X W(X)`.
pub fn w_from_contraction<R: Real>(m: &Matrix<R>) -> Result<Matrix<R>> {
    if !m.is_finite() {
        return Err(Error::NonFinite("adjoint contraction"));
    }
    let n = m.dim();
    let mut halvings = 0;
    let mut norm = m.norm_1();
    while norm > R::one() {
        norm = norm * R::lit(0.5);
        halvings += 1;
    }
    let small = m.scale(R::lit(0.5).powi(halvings));
    let mut w = w_series(&small);
    let id = Matrix::identity(n);
    let mut e = &id - &(&small * &w);
    let half = R::lit(0.5);
    for _ in 0..halvings {
        w = (&w * &(&id + &e)).scale(half);
        e = &e * &e;
    }
    Ok(w)
}

pub fn w_matrix<R: Real>(algebra: &LieAlgebraData<R>, phi: &[R]) -> Result<Matrix<R>> {
    w_from_contraction(&adjoint_contraction(algebra, phi)?)
}

/// `F = W(phi) d phi` with `d phi` from the lattice stencils.
pub fn maurer_cartan_current<R: Real>(algebra: &LieAlgebraData<R>, phi: &FieldSet<R>) -> Result<LieOneForm<R>> {
    let dphi = d_scalar(phi);
    current_from_derivative(algebra, phi, &dphi)
}

/// `W(phi) d phi` for a supplied derivative (e.g. analytic).
pub fn current_from_derivative<R: Real>(algebra: &LieAlgebraData<R>, phi: &FieldSet<R>, dphi: &LieOneForm<R>) -> Result<LieOneForm<R>> {
    if phi.dim() != algebra.dim() || dphi.dim() != algebra.dim() || phi.lattice() != dphi.lattice() {
        return Err(Error::DimensionMismatch {
            what: "exponential coordinates vs algebra",
            expected: algebra.dim(),
            found: phi.dim(),
        });
    }
    let ws = (0..phi.lattice().sites())
        .map(|s| w_matrix(algebra, phi.at(s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(dphi.map_sites(|s, d0, d1| [ws[s].mul_vec(d0), ws[s].mul_vec(d1)]))
}

/// Representation-side current `g^-1 dg` with `g = exp(phi . T)`, the
/// derivative of `g` taken by the same lattice stencils, decomposed back on
/// the generators. Independent of the `W` machinery.
pub fn representation_current<R: Real>(algebra: &LieAlgebraData<R>, phi: &FieldSet<R>) -> Result<LieOneForm<R>> {
    let lat = *phi.lattice();
    let size = algebra.require_representation()?[0].dim();
    let block = size * size;
    let mut groups = Vec::with_capacity(lat.sites());
    let mut flat = Vec::with_capacity(lat.sites() * 2 * block);
    for s in 0..lat.sites() {
        let g = matrix_exp(&algebra.compose(phi.at(s))?)?;
        for z in g.as_slice() {
            flat.push(z.re);
            flat.push(z.im);
        }
        groups.push(g);
    }
    let dg = d_scalar(&FieldSet::from_vec(lat, 2 * block, FieldRole::Original, flat)?);
    let unpack = |v: &[R]| {
        Matrix::from_row_major(size, v.chunks(2).map(|c| Complex::new(c[0], c[1])).collect()).expect("square block")
    };
    let mut out = LieOneForm::zeros(lat, algebra.dim());
    for (s, g) in groups.iter().enumerate() {
        let (ginv, _) = g.inverse_checked("group element")?;
        for alpha in 0..2 {
            let coeffs = algebra.decompose(&(&ginv * &unpack(dg.component(s, alpha))))?;
            out.component_mut(s, alpha).copy_from_slice(&coeffs);
        }
    }
    Ok(out)
}

/// Curvature `dF + 1/2 [F ^ F]` of a current, scaled by `|F| + |F|^2`.
pub fn bianchi_residual<R: Real>(f: &LieOneForm<R>, algebra: &LieAlgebraData<R>) -> Result<ResidualReport<R>> {
    curvature_report("bianchi", f, algebra)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    DualDirect,
    DualSplit,
    Pcm,
}

/// Per-site `dx^0 ^ dx^1` coefficient, plus the named terms that sum to it.
#[derive(Debug, Clone)]
pub struct LagrangianDensity<R: Real> {
    pub kind: DensityKind,
    pub lattice: Lattice2D<R>,
    pub values: Vec<R>,
    pub terms: Vec<(String, Vec<R>)>,
}

impl<R: Real> LagrangianDensity<R> {
    fn from_terms(kind: DensityKind, lattice: Lattice2D<R>, terms: Vec<(String, Vec<R>)>) -> Self {
        let mut values = vec![R::zero(); lattice.sites()];
        for (_, t) in &terms {
            for (v, &x) in values.iter_mut().zip(t) {
                *v += x;
            }
        }
        Self {
            kind,
            lattice,
            values,
            terms,
        }
    }

    /// Largest magnitude among the density and its individual terms.
    pub fn magnitude(&self) -> R {
        self.terms
            .iter()
            .flat_map(|(_, t)| t.iter())
            .chain(&self.values)
            .fold(R::zero(), |a, &b| a.max(b.abs()))
    }

    pub fn term(&self, name: &str) -> Option<&[R]> {
        self.terms.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_slice())
    }
}

/// Pointwise difference of two densities, scaled by the larger magnitude
/// (so cancellations between large terms are judged against those terms).
pub fn compare_densities<R: Real>(a: &LagrangianDensity<R>, b: &LagrangianDensity<R>) -> Result<ResidualReport<R>> {
    if a.lattice != b.lattice {
        return Err(Error::Lattice("densities live on different lattices".into()));
    }
    let diff = a.values.iter().zip(&b.values).map(|(&x, &y)| x - y).collect();
    Ok(ResidualReport::from_field(
        "density_difference",
        &a.lattice,
        1,
        diff,
        a.magnitude().max(b.magnitude()),
    ))
}

/// `g_{mn} a^m ^ b^n` at one site.
fn contracted_wedge<R: Real>(g: &Matrix<R>, a: [&[R]; 2], b: [&[R]; 2]) -> R {
    let n = g.dim();
    let mut acc = R::zero();
    for m in 0..n {
        for q in 0..n {
            let w = a[0][m] * b[1][q] - a[1][m] * b[0][q];
            acc += g[(m, q)] * w;
        }
    }
    acc
}

fn pair<R: Real>(w: &LieOneForm<R>, s: usize) -> [&[R]; 2] {
    [w.component(s, 0), w.component(s, 1)]
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn check_dims<R: Real>(algebra: &LieAlgebraData<R>, dual: &DualData<R>) -> Result<()> {
    if dual.dim() != algebra.dim() {
        return Err(Error::DimensionMismatch {
            what: "dual field vs algebra",
            expected: algebra.dim(),
            found: dual.dim(),
        });
    }
    Ok(())
}

/// `-1/2 T_{mn} *F^m ^ F^n + A_l (dF + 1/2 [F ^ F])^l` with `F` the closed
/// current.
pub fn dual_lagrangian_direct<R: Real>(algebra: &LieAlgebraData<R>, dual: &DualData<R>, frame: &LorentzFrame<R>) -> Result<LagrangianDensity<R>> {
    check_dims(algebra, dual)?;
    let f = crate::dual_current::solve_closed(algebra, dual, frame)?.current;
    let star = hodge_oneform(&f, frame);
    let curv = bianchi_residual(&f, algebra)?;
    let lat = *dual.field.lattice();
    let n = algebra.dim();
    let t = algebra.trace_metric();
    let half = R::lit(0.5);
    let kinetic = (0..lat.sites())
        .map(|s| -half * contracted_wedge(t, pair(&star, s), pair(&f, s)))
        .collect();
    let coupling = (0..lat.sites())
        .map(|s| dot(dual.field.at(s), &curv.pointwise[s * n..(s + 1) * n]))
        .collect();
    Ok(LagrangianDensity::from_terms(
        DensityKind::DualDirect,
        lat,
        vec![("kinetic".into(), kinetic), ("bianchi_coupling".into(), coupling)],
    ))
}

/// Closed-form pieces over the lattice: `G = K dA` and `Gt = T^-1 C G`.
struct SplitFields<R: Real> {
    g: LieOneForm<R>,
    gt: LieOneForm<R>,
    contractions: Vec<Matrix<R>>,
}

fn split_fields<R: Real>(algebra: &LieAlgebraData<R>, dual: &DualData<R>) -> Result<SplitFields<R>> {
    let sites = for_each_regular_site(algebra, dual, |s| {
        closed_site(
            algebra,
            dual.field.at(s),
            dual.derivative.component(s, 0),
            dual.derivative.component(s, 1),
        )
    })?;
    let g = dual.derivative.map_sites(|s, _, _| sites[s].g.clone());
    let gt = dual.derivative.map_sites(|s, _, _| sites[s].p.clone());
    let contractions = sites.into_iter().map(|c| c.contraction).collect();
    Ok(SplitFields { g, gt, contractions })
}

/// The six-term form over `G` and `Gt = T^-1 C G` (so `F = -*G + Gt`):
///
/// ```text
/// -1/2 T G ^ *G  - 1/2 T Gt ^ *Gt  + 1/2 C G ^ G  + 1/2 C Gt ^ Gt
///   - A . d(*G)  + A . d(Gt)
/// ```
///
/// with `C_{mn} = C^l_{mn} A_l`.
pub fn dual_lagrangian_split<R: Real>(algebra: &LieAlgebraData<R>, dual: &DualData<R>, frame: &LorentzFrame<R>) -> Result<LagrangianDensity<R>> {
    check_dims(algebra, dual)?;
    let SplitFields { g, gt, contractions } = split_fields(algebra, dual)?;
    let star_g = hodge_oneform(&g, frame);
    let star_gt = hodge_oneform(&gt, frame);
    let d_star_g = d_oneform(&star_g);
    let d_gt = d_oneform(&gt);
    let lat = *dual.field.lattice();
    let t = algebra.trace_metric();
    let half = R::lit(0.5);
    let per_site = |f: &dyn Fn(usize) -> R| (0..lat.sites()).map(f).collect::<Vec<R>>();
    let terms = vec![
        ("g_kinetic".to_string(), per_site(&|s| -half * contracted_wedge(t, pair(&g, s), pair(&star_g, s)))),
        ("gt_kinetic".to_string(), per_site(&|s| -half * contracted_wedge(t, pair(&gt, s), pair(&star_gt, s)))),
        ("g_bracket".to_string(), per_site(&|s| half * contracted_wedge(&contractions[s], pair(&g, s), pair(&g, s)))),
        ("gt_bracket".to_string(), per_site(&|s| half * contracted_wedge(&contractions[s], pair(&gt, s), pair(&gt, s)))),
        ("g_coupling".to_string(), per_site(&|s| -dot(dual.field.at(s), d_star_g.at(s)))),
        ("gt_coupling".to_string(), per_site(&|s| dot(dual.field.at(s), d_gt.at(s)))),
    ];
    Ok(LagrangianDensity::from_terms(DensityKind::DualSplit, lat, terms))
}

/// Intermediate identities behind the split, as residuals:
/// `T_{mn} G^m ^ Gt^n = C_{mn} G^m ^ G^n` and
/// `C_{mn} G^m ^ *Gt^n = -T_{mn} Gt^m ^ *Gt^n`.
/// Both follow from the antisymmetry of `C` and the symmetry of `T`.
pub fn split_identity_residuals<R: Real>(algebra: &LieAlgebraData<R>, dual: &DualData<R>, frame: &LorentzFrame<R>) -> Result<[ResidualReport<R>; 2]> {
    check_dims(algebra, dual)?;
    let SplitFields { g, gt, contractions } = split_fields(algebra, dual)?;
    let star_gt = hodge_oneform(&gt, frame);
    let lat = *dual.field.lattice();
    let t = algebra.trace_metric();
    let (mut first, mut second) = (Vec::new(), Vec::new());
    let (mut s1, mut s2) = (R::zero(), R::zero());
    for s in 0..lat.sites() {
        let a = contracted_wedge(t, pair(&g, s), pair(&gt, s));
        let b = contracted_wedge(&contractions[s], pair(&g, s), pair(&g, s));
        let c = contracted_wedge(&contractions[s], pair(&g, s), pair(&star_gt, s));
        let d = contracted_wedge(t, pair(&gt, s), pair(&star_gt, s));
        s1 = s1.max(a.abs()).max(b.abs());
        s2 = s2.max(c.abs()).max(d.abs());
        first.push(a - b);
        second.push(c + d);
    }
    Ok([
        ResidualReport::from_field("cross_term_gt", &lat, 1, first, s1),
        ResidualReport::from_field("cross_term_star", &lat, 1, second, s2),
    ])
}

/// `-scale/2 T_{mn} *G'^m ^ G'^n`.
pub fn pcm_lagrangian<R: Real>(gp: &LieOneForm<R>, algebra: &LieAlgebraData<R>, frame: &LorentzFrame<R>, scale: R) -> Result<LagrangianDensity<R>> {
    if gp.dim() != algebra.dim() {
        return Err(Error::DimensionMismatch {
            what: "current vs algebra",
            expected: algebra.dim(),
            found: gp.dim(),
        });
    }
    let star = hodge_oneform(gp, frame);
    let t = algebra.trace_metric();
    let c = -R::lit(0.5) * scale;
    let lat = *gp.lattice();
    let kinetic = (0..lat.sites())
        .map(|s| c * contracted_wedge(t, pair(&star, s), pair(gp, s)))
        .collect();
    Ok(LagrangianDensity::from_terms(DensityKind::Pcm, lat, vec![("kinetic".into(), kinetic)]))
}

//! Integrated Lax connection and its transport.
//!
//! `L_alpha = [T^-1 lambda (1 - lambda^2)^-1] d_alpha A
//!          - [T^-1 (1 - lambda^2)^-1] d^beta A eps_{beta alpha}`,
//! assembled here with an explicit inverse metric and epsilon contraction so
//! that it is an independent check of the closed-form current. The Lax pair
//! `d_alpha g = g L_alpha` is integrated link by link with midpoint-rule
//! exponentials in the algebra's matrix representation.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::algebra::{spectral_matrix, LieAlgebraData};
use crate::dual_current::{for_each_regular_site, DualData};
use crate::error::{Error, Result};
use crate::geometry::{d_oneform, wedge_bracket, Lattice2D, LieOneForm, LorentzFrame};
use crate::matrix::{matrix_exp, Matrix};
use crate::residual::ResidualReport;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LaxProvenance {
    /// Built by [`build_lax`] from a dual multiplet.
    Dual { algebra: String, metric: [[f64; 2]; 2] },
    /// Supplied by hand; only for tests and diagnostics.
    External { label: String },
}

#[derive(Debug, Clone)]
pub struct LaxConnection<R: Real> {
    form: LieOneForm<R>,
    provenance: LaxProvenance,
}

impl<R: Real> LaxConnection<R> {
    /// Wraps an arbitrary one-form. The result is tagged external so reports
    /// never present it as a dual-field connection.
    pub fn external(form: LieOneForm<R>, label: impl Into<String>) -> Result<Self> {
        if !form.as_slice().iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("external Lax connection"));
        }
        Ok(Self {
            form,
            provenance: LaxProvenance::External { label: label.into() },
        })
    }

    pub fn form(&self) -> &LieOneForm<R> {
        &self.form
    }

    pub fn provenance(&self) -> &LaxProvenance {
        &self.provenance
    }

    pub fn is_dual(&self) -> bool {
        matches!(self.provenance, LaxProvenance::Dual { .. })
    }

    pub fn lattice(&self) -> &Lattice2D<R> {
        self.form.lattice()
    }
}

/// Builds `L` from the dual multiplet. Singular-kernel sites are collected
/// and reported together.
pub fn build_lax<R: Real>(algebra: &LieAlgebraData<R>, dual: &DualData<R>, frame: &LorentzFrame<R>) -> Result<LaxConnection<R>> {
    let n = algebra.dim();
    let hinv = frame.inverse();
    let eps = frame.epsilon();
    let tinv = algebra.metric_inverse();
    let id = Matrix::identity(n);
    let per_site = for_each_regular_site(algebra, dual, |s| {
        let a = dual.field.at(s);
        let lam = spectral_matrix(algebra, a)?.matrix;
        let inner = &id - &(&lam * &lam);
        let (inv, _) = inner.inverse_checked("1 - lambda^2").map_err(|e| match e {
            Error::SingularMatrix { condition, .. } => Error::KernelSingular {
                a: a.iter().map(|x| x.as_f64()).collect(),
                condition,
            },
            other => other,
        })?;
        let odd = &(tinv * &lam) * &inv;
        let even = tinv * &inv;
        let d = [dual.derivative.component(s, 0), dual.derivative.component(s, 1)];
        let mut out: [Vec<R>; 2] = [vec![R::zero(); n], vec![R::zero(); n]];
        for (alpha, slot) in out.iter_mut().enumerate() {
            // d^beta A eps_{beta alpha} with d^beta = h^{beta gamma} d_gamma
            let raised: Vec<R> = (0..n)
                .map(|m| {
                    (0..2)
                        .map(|beta| (0..2).map(|gamma| hinv[beta][gamma] * d[gamma][m]).sum::<R>() * eps[beta][alpha])
                        .sum()
                })
                .collect();
            let p = odd.mul_vec(d[alpha]);
            let q = even.mul_vec(&raised);
            for m in 0..n {
                slot[m] = p[m] - q[m];
            }
        }
        Ok(out)
    })?;
    let form = dual.derivative.map_sites(|s, _, _| per_site[s].clone());
    let h = frame.metric();
    Ok(LaxConnection {
        form,
        provenance: LaxProvenance::Dual {
            algebra: algebra.name().to_string(),
            metric: [[h[0][0].as_f64(), h[0][1].as_f64()], [h[1][0].as_f64(), h[1][1].as_f64()]],
        },
    })
}

/// Curvature `dL + L ^ L`, component `d_0 L_1 - d_1 L_0 + [L_0, L_1]`.
///
/// Scale is `|L| + |L|^2` (max norms), which makes the relative value
/// comparable across lattices of the same physical size.
pub fn flatness_residual<R: Real>(l: &LaxConnection<R>, algebra: &LieAlgebraData<R>) -> Result<ResidualReport<R>> {
    curvature_report("flatness", l.form(), algebra)
}

pub(crate) fn curvature_report<R: Real>(name: &str, w: &LieOneForm<R>, algebra: &LieAlgebraData<R>) -> Result<ResidualReport<R>> {
    let curv = d_oneform(w).add(&wedge_bracket(w, w, algebra)?);
    let m = w.max_abs();
    Ok(ResidualReport::from_field(
        name,
        w.lattice(),
        w.dim(),
        curv.as_slice().to_vec(),
        m + m * m,
    ))
}

/// One unit link along a lattice axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Move {
    pub axis: usize,
    pub forward: bool,
}

impl TryFrom<String> for Move {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Move> for String {
    fn from(m: Move) -> String {
        m.to_string()
    }
}

impl std::str::FromStr for Move {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+0" => Ok(Move { axis: 0, forward: true }),
            "-0" => Ok(Move { axis: 0, forward: false }),
            "+1" => Ok(Move { axis: 1, forward: true }),
            "-1" => Ok(Move { axis: 1, forward: false }),
            other => Err(Error::Config(format!("unknown path move {other:?}; expected +0, -0, +1 or -1"))),
        }
    }
}

impl std::fmt::Display for Move {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", if self.forward { '+' } else { '-' }, self.axis)
    }
}

impl Move {
    fn reversed(self) -> Self {
        Move {
            axis: self.axis,
            forward: !self.forward,
        }
    }
}

/// Axis-aligned path of unit links from a start site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticePath {
    pub start: (usize, usize),
    pub moves: Vec<Move>,
}

impl LatticePath {
    pub fn new(start: (usize, usize), moves: Vec<Move>) -> Self {
        Self { start, moves }
    }

    pub fn parse(start: (usize, usize), moves: &[&str]) -> Result<Self> {
        Ok(Self::new(start, moves.iter().map(|m| m.parse()).collect::<Result<_>>()?))
    }

    /// Straight run of `count` links.
    pub fn straight(start: (usize, usize), axis: usize, count: usize) -> Self {
        Self::new(start, vec![Move { axis, forward: true }; count])
    }

    /// The two monotone paths around a `w x h` rectangle: x0 leg first, and
    /// x1 leg first. They share both endpoints.
    pub fn rectangle_pair(start: (usize, usize), w: usize, h: usize) -> (Self, Self) {
        let e0 = Move { axis: 0, forward: true };
        let e1 = Move { axis: 1, forward: true };
        let mut a = vec![e0; w];
        a.extend(vec![e1; h]);
        let mut b = vec![e1; h];
        b.extend(vec![e0; w]);
        (Self::new(start, a), Self::new(start, b))
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Sites visited, including the start. Fails if a clamped boundary is
    /// crossed.
    pub fn sites<R: Real>(&self, lattice: &Lattice2D<R>) -> Result<Vec<(usize, usize)>> {
        let ext = lattice.extents();
        if self.start.0 >= ext[0] || self.start.1 >= ext[1] {
            return Err(Error::PathOutOfBounds { step: 0, site: self.start });
        }
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        let mut cur = self.start;
        out.push(cur);
        for (step, m) in self.moves.iter().enumerate() {
            cur = lattice
                .neighbor(cur, m.axis, m.forward)
                .ok_or(Error::PathOutOfBounds { step: step + 1, site: cur })?;
            out.push(cur);
        }
        Ok(out)
    }

    pub fn end<R: Real>(&self, lattice: &Lattice2D<R>) -> Result<(usize, usize)> {
        Ok(*self.sites(lattice)?.last().expect("path has a start"))
    }

    /// This path followed by `other` (which must start where this ends).
    pub fn concat<R: Real>(&self, other: &Self, lattice: &Lattice2D<R>) -> Result<Self> {
        let end = self.end(lattice)?;
        if end != other.start {
            return Err(Error::EndpointMismatch {
                a: (self.start, end),
                b: (other.start, other.end(lattice)?),
            });
        }
        let mut moves = self.moves.clone();
        moves.extend_from_slice(&other.moves);
        Ok(Self::new(self.start, moves))
    }

    /// Unwrapped integer displacements of the visited vertices.
    fn offsets(&self) -> Vec<(i64, i64)> {
        let mut p = (0i64, 0i64);
        let mut out = vec![p];
        for m in &self.moves {
            let d = if m.forward { 1 } else { -1 };
            if m.axis == 0 {
                p.0 += d;
            } else {
                p.1 += d;
            }
            out.push(p);
        }
        out
    }
}

/// Signed number of plaquettes enclosed by `a` followed by reversed `b`
/// (shoelace formula on unwrapped coordinates).
pub fn enclosed_plaquettes(a: &LatticePath, b: &LatticePath) -> f64 {
    let mut loop_moves = a.moves.clone();
    loop_moves.extend(b.moves.iter().rev().map(|m| m.reversed()));
    let pts = LatticePath::new(a.start, loop_moves).offsets();
    let twice: i64 = pts.windows(2).map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1).sum();
    twice as f64 / 2.0
}

/// Transports `g0` along `path`: each link multiplies on the right by
/// `exp(+-Delta * (L(s) + L(s'))/2 . T)`.
pub fn integrate_lax<R: Real>(
    l: &LaxConnection<R>,
    algebra: &LieAlgebraData<R>,
    g0: &Matrix<Complex<R>>,
    path: &LatticePath,
) -> Result<Matrix<Complex<R>>> {
    transport_form(l.form(), algebra, g0, path)
}

pub(crate) fn transport_form<R: Real>(
    form: &LieOneForm<R>,
    algebra: &LieAlgebraData<R>,
    g0: &Matrix<Complex<R>>,
    path: &LatticePath,
) -> Result<Matrix<Complex<R>>> {
    let rep = algebra.require_representation()?;
    if g0.dim() != rep[0].dim() {
        return Err(Error::DimensionMismatch {
            what: "initial group element",
            expected: rep[0].dim(),
            found: g0.dim(),
        });
    }
    let lat = *form.lattice();
    let sites = path.sites(&lat)?;
    let spacing = lat.spacing();
    let half = R::lit(0.5);
    let mut g = g0.clone();
    for (m, pair) in path.moves.iter().zip(sites.windows(2)) {
        let s = lat.site_index(pair[0].0, pair[0].1);
        let t = lat.site_index(pair[1].0, pair[1].1);
        let step = if m.forward { spacing[m.axis] } else { -spacing[m.axis] };
        let coeffs: Vec<R> = form
            .component(s, m.axis)
            .iter()
            .zip(form.component(t, m.axis))
            .map(|(&a, &b)| (a + b) * half * step)
            .collect();
        g = &g * &matrix_exp(&algebra.compose(&coeffs)?)?;
    }
    Ok(g)
}

#[derive(Debug, Clone, Serialize)]
pub struct PathGap<R: Real> {
    /// Largest entry of `g_A - g_B`.
    pub gap: R,
    /// `10 * residual_max * |plaquettes| * Delta0 * Delta1 + roundoff_floor`.
    pub bound: R,
    pub plaquettes: f64,
    pub residual_max: R,
    /// `64 eps * (links in both paths) * |g0|`: the size of a gap that is
    /// pure accumulated rounding.
    pub roundoff_floor: R,
    pub end: (usize, usize),
}

impl<R: Real> PathGap<R> {
    pub fn within_bound(&self) -> bool {
        self.gap <= self.bound
    }
}

/// Difference of the transports along two paths with common endpoints,
/// reported against the plaquette bound from the flatness residual.
pub fn path_dependence_gap<R: Real>(
    l: &LaxConnection<R>,
    algebra: &LieAlgebraData<R>,
    g0: &Matrix<Complex<R>>,
    a: &LatticePath,
    b: &LatticePath,
) -> Result<PathGap<R>> {
    let lat = *l.lattice();
    let (ea, eb) = (a.end(&lat)?, b.end(&lat)?);
    if a.start != b.start || ea != eb {
        return Err(Error::EndpointMismatch {
            a: (a.start, ea),
            b: (b.start, eb),
        });
    }
    let ga = integrate_lax(l, algebra, g0, a)?;
    let gb = integrate_lax(l, algebra, g0, b)?;
    let gap = (&ga - &gb).max_abs();
    let residual_max = flatness_residual(l, algebra)?.max_norm;
    let plaquettes = enclosed_plaquettes(a, b);
    let sp = lat.spacing();
    let floor = R::lit(64.0) * R::epsilon() * R::from_usize_lossy(a.len() + b.len()) * g0.max_abs().max(R::one());
    let bound = R::lit(10.0) * residual_max * R::lit(plaquettes.abs()) * sp[0] * sp[1] + floor;
    Ok(PathGap {
        gap,
        bound,
        plaquettes,
        residual_max,
        roundoff_floor: floor,
        end: ea,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual_current::solve_closed;
    use crate::geometry::{hodge_oneform, Boundary, FieldRole, FieldSet};

    fn periodic(n: usize, lengths: [f64; 2]) -> Lattice2D<f64> {
        Lattice2D::periodic_square(n, lengths).unwrap()
    }

    fn su2_dual(lat: Lattice2D<f64>, f: impl Fn(f64, f64) -> Vec<f64>) -> DualData<f64> {
        DualData::from_field(FieldSet::from_fn(lat, 3, FieldRole::Dual, f).unwrap())
    }

    #[test]
    fn constant_field_gives_zero_connection() {
        let su2 = LieAlgebraData::su2();
        let dual = su2_dual(periodic(6, [1.0, 1.0]), |_, _| vec![0.2, -0.1, 0.3]);
        let l = build_lax(&su2, &dual, &LorentzFrame::minkowski()).unwrap();
        assert!(l.form().max_abs() < 1e-14);
        assert!(l.is_dual());
    }

    #[test]
    fn abelian_is_pure_hodge_term() {
        let ab = LieAlgebraData::abelian(2);
        let lat = periodic(8, [1.0, 2.0]);
        let dual = DualData::from_field(
            FieldSet::from_fn(lat, 2, FieldRole::Dual, |x0, x1| vec![(3.0 * x0).sin() * x1.cos(), x0 - x1]).unwrap(),
        );
        let frame = LorentzFrame::new([[-1.5, 0.2], [0.2, 0.8]]).unwrap();
        let l = build_lax(&ab, &dual, &frame).unwrap();
        let expect = hodge_oneform(&dual.derivative, &frame).scale(-1.0);
        assert!(l.form().zip_with(&expect, |a, b| a - b).max_abs() < 1e-14);
    }

    #[test]
    fn matches_closed_current_on_generic_field() {
        let su2 = LieAlgebraData::su2().with_killing_metric().unwrap();
        let frame = LorentzFrame::new([[-2.0, 0.4], [0.4, 1.0]]).unwrap();
        let dual = su2_dual(periodic(10, [1.0, 1.0]), |x0, x1| {
            vec![0.7 * (6.0 * x0).sin(), 0.5 * (6.0 * x1).cos(), 0.4 * (x0 + x1)]
        });
        let l = build_lax(&su2, &dual, &frame).unwrap();
        let f = solve_closed(&su2, &dual, &frame).unwrap().current;
        let scale = f.max_abs();
        assert!(l.form().zip_with(&f, |a, b| a - b).max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn hand_built_connection_has_unit_curvature() {
        let su2 = LieAlgebraData::su2();
        let lat = Lattice2D::new([5, 6], [0.2f64, 0.3], Boundary::Clamped).unwrap();
        let form = LieOneForm::from_fn(lat, 3, |_, x1| [vec![x1, 0.0, 0.0], vec![0.0; 3]]);
        let l = LaxConnection::external(form, "x1 T1").unwrap();
        assert!(!l.is_dual());
        let r = flatness_residual(&l, &su2).unwrap();
        for chunk in r.pointwise.chunks(3) {
            assert!((chunk[0] + 1.0).abs() < 1e-13);
            assert_eq!((chunk[1], chunk[2]), (0.0, 0.0));
        }
    }

    #[test]
    fn zero_connection_is_flat_and_trivial() {
        let su2 = LieAlgebraData::su2();
        let lat = periodic(5, [1.0, 1.0]);
        let l = LaxConnection::external(LieOneForm::zeros(lat, 3), "zero").unwrap();
        assert_eq!(flatness_residual(&l, &su2).unwrap().max_norm, 0.0);
        let g0 = su2.compose(&[0.3, 0.1, 0.0]).unwrap();
        let g0 = matrix_exp(&g0).unwrap();
        let p = LatticePath::parse((1, 1), &["+0", "+1", "-0", "-0"]).unwrap();
        assert_eq!(integrate_lax(&l, &su2, &g0, &p).unwrap(), g0);
        let (a, b) = LatticePath::rectangle_pair((0, 0), 2, 3);
        let gap = path_dependence_gap(&l, &su2, &g0, &a, &b).unwrap();
        assert_eq!(gap.gap, 0.0);
        assert_eq!(gap.plaquettes, 6.0);
    }

    #[test]
    fn constant_commuting_connection_matches_exponential() {
        let su2 = LieAlgebraData::su2();
        let lat = periodic(16, [2.0, 1.0]);
        let mu = 1.7;
        let form = LieOneForm::from_fn(lat, 3, |_, _| [vec![0.0, 0.0, mu], vec![0.0; 3]]);
        let l = LaxConnection::external(form, "mu T3").unwrap();
        let g0 = matrix_exp(&su2.compose(&[0.2, -0.4, 0.1]).unwrap()).unwrap();
        let steps = 11;
        let t = steps as f64 * lat.spacing()[0];
        let g = integrate_lax(&l, &su2, &g0, &LatticePath::straight((2, 3), 0, steps)).unwrap();
        // exp(mu t T3) with T3 = -(i/2) sigma3 is diag(e^{-i mu t/2}, e^{i mu t/2})
        let th = mu * t / 2.0;
        let mut e = Matrix::zeros(2);
        e[(0, 0)] = Complex::new(th.cos(), -th.sin());
        e[(1, 1)] = Complex::new(th.cos(), th.sin());
        assert!((&g - &(&g0 * &e)).max_abs() < 1e-12);
    }

    #[test]
    fn noncommuting_constant_l_shape_is_exact() {
        let su2 = LieAlgebraData::su2();
        let lat = periodic(8, [1.0, 1.0]);
        let (p, q) = ([0.4, 1.1, 0.0], [0.0, -0.3, 0.9]);
        let form = LieOneForm::from_fn(lat, 3, |_, _| [p.to_vec(), q.to_vec()]);
        let l = LaxConnection::external(form, "const").unwrap();
        let id = Matrix::identity(2);
        let path = LatticePath::rectangle_pair((0, 0), 3, 5).0;
        let g = integrate_lax(&l, &su2, &id, &path).unwrap();
        let d = lat.spacing()[0];
        let sc = |v: [f64; 3], s: f64| v.map(|x| x * s);
        let oracle = &matrix_exp(&su2.compose(&sc(p, 3.0 * d)).unwrap()).unwrap()
            * &matrix_exp(&su2.compose(&sc(q, 5.0 * d)).unwrap()).unwrap();
        assert!((&g - &oracle).max_abs() < 1e-13);
    }

    /// Coefficients of an analytic, non-commuting connection.
    fn analytic_l(x0: f64, x1: f64) -> [Vec<f64>; 2] {
        [
            vec![(2.0 * x1).cos(), x0, 0.5],
            vec![0.3, (x0 - x1).sin(), x0 * x1],
        ]
    }

    /// RK4 solution of g' = g (sum_m L^m(x(t)) T_m) along a straight segment.
    fn rk4_segment(su2: &LieAlgebraData<f64>, g: &Matrix<Complex<f64>>, from: [f64; 2], axis: usize, len: f64, substeps: usize) -> Matrix<Complex<f64>> {
        let h = len / substeps as f64;
        let rhs = |g: &Matrix<Complex<f64>>, t: f64| {
            let mut x = from;
            x[axis] += t;
            let c = analytic_l(x[0], x[1]);
            g * &su2.compose(&c[axis]).unwrap()
        };
        let mut g = g.clone();
        for k in 0..substeps {
            let t = k as f64 * h;
            let hc = Complex::new(h, 0.0);
            let k1 = rhs(&g, t);
            let k2 = rhs(&(&g + &k1.scale(hc * 0.5)), t + h / 2.0);
            let k3 = rhs(&(&g + &k2.scale(hc * 0.5)), t + h / 2.0);
            let k4 = rhs(&(&g + &k3.scale(hc)), t + h);
            let inc = &(&k1 + &k2.scale(Complex::new(2.0, 0.0))) + &(&k3.scale(Complex::new(2.0, 0.0)) + &k4);
            g = &g + &inc.scale(hc / 6.0);
        }
        g
    }

    #[test]
    fn l_shaped_transport_converges_quadratically_to_substep_oracle() {
        let su2 = LieAlgebraData::su2();
        let id = Matrix::identity(2);
        let leg0 = rk4_segment(&su2, &id, [0.0, 0.0], 0, 0.5, 400);
        let oracle = rk4_segment(&su2, &leg0, [0.5, 0.0], 1, 0.5, 400);
        let mut errs = Vec::new();
        for n in [8usize, 16, 32] {
            let lat = Lattice2D::new([n + 1, n + 1], [1.0 / n as f64, 1.0 / n as f64], Boundary::Clamped).unwrap();
            let form = LieOneForm::from_fn(lat, 3, analytic_l);
            let l = LaxConnection::external(form, "analytic").unwrap();
            let path = LatticePath::rectangle_pair((0, 0), n / 2, n / 2).0;
            errs.push((&integrate_lax(&l, &su2, &id, &path).unwrap() - &oracle).max_abs());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..4.5).contains(&ratio), "{errs:?}");
        }
    }

    #[test]
    fn transport_is_multiplicative() {
        let su2 = LieAlgebraData::su2();
        let lat = periodic(9, [1.0, 1.0]);
        let l = LaxConnection::external(LieOneForm::from_fn(lat, 3, analytic_l), "analytic").unwrap();
        let a = LatticePath::parse((1, 2), &["+0", "+0", "+1", "-0"]).unwrap();
        let b = LatticePath::parse((2, 3), &["+1", "+1", "+0", "-1", "+0"]).unwrap();
        let g0 = matrix_exp(&su2.compose(&[0.1, 0.2, 0.3]).unwrap()).unwrap();
        let whole = integrate_lax(&l, &su2, &g0, &a.concat(&b, &lat).unwrap()).unwrap();
        let ga = integrate_lax(&l, &su2, &g0, &a).unwrap();
        let id = Matrix::identity(2);
        let gb = integrate_lax(&l, &su2, &id, &b).unwrap();
        assert!((&whole - &(&ga * &gb)).max_abs() < 1e-14);
    }

    #[test]
    fn paths_must_share_endpoints() {
        let su2 = LieAlgebraData::su2();
        let lat = periodic(5, [1.0, 1.0]);
        let l = LaxConnection::external(LieOneForm::zeros(lat, 3), "zero").unwrap();
        let a = LatticePath::straight((0, 0), 0, 2);
        let b = LatticePath::straight((0, 0), 1, 2);
        assert!(matches!(
            path_dependence_gap(&l, &su2, &Matrix::identity(2), &a, &b),
            Err(Error::EndpointMismatch { .. })
        ));
    }

    #[test]
    fn clamped_paths_cannot_leave_the_lattice() {
        let lat = Lattice2D::<f64>::new([3, 3], [1.0, 1.0], Boundary::Clamped).unwrap();
        let p = LatticePath::parse((2, 0), &["-0", "+0", "+0"]).unwrap();
        assert!(matches!(p.sites(&lat), Err(Error::PathOutOfBounds { step: 3, .. })));
        assert!("+2".parse::<Move>().is_err());
    }

    #[test]
    fn non_flat_gap_tracks_curvature_times_area() {
        // L_0 = x1 T1 has curvature -T1: the loop holonomy is exp(area T1).
        let su2 = LieAlgebraData::su2();
        let lat = Lattice2D::new([21, 21], [0.05, 0.05], Boundary::Clamped).unwrap();
        let form = LieOneForm::from_fn(lat, 3, |_, x1| [vec![x1, 0.0, 0.0], vec![0.0; 3]]);
        let l = LaxConnection::external(form, "x1 T1").unwrap();
        let id = Matrix::identity(2);
        for (w, h) in [(4, 4), (10, 6), (16, 20)] {
            let (a, b) = LatticePath::rectangle_pair((0, 0), w, h);
            let gap = path_dependence_gap(&l, &su2, &id, &a, &b).unwrap();
            let area = gap.plaquettes.abs() * 0.05 * 0.05;
            let ratio = gap.gap / (gap.residual_max * area);
            assert!((0.1..=10.0).contains(&ratio), "{ratio}");
            assert!(gap.within_bound());
        }
    }

    #[test]
    fn shoelace_counts_plaquettes_with_sign() {
        let (a, b) = LatticePath::rectangle_pair((0, 0), 3, 2);
        assert_eq!(enclosed_plaquettes(&a, &b), 6.0);
        assert_eq!(enclosed_plaquettes(&b, &a), -6.0);
        assert_eq!(enclosed_plaquettes(&a, &a), 0.0);
    }

    #[test]
    fn moves_round_trip_through_json() {
        let p = LatticePath::parse((1, 0), &["+0", "-1"]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"start":[1,0],"moves":["+0","-1"]}"#);
        assert_eq!(serde_json::from_str::<LatticePath>(&s).unwrap(), p);
    }
}

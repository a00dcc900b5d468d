//! Coupled original/dual first-order system and the Frobenius pipeline.
//!
//! The transformation between the fields is `W(phi) d phi = G'` with
//! `G' = -*G + T^-1 C G`, `G = K dA`, i.e. the closed current of the dual
//! multiplet. Componentwise this is
//!
//! ```text
//! W^m_n d_alpha phi^n = -(S_alpha^gamma) G^m_gamma + (T^-1 C K)^m_n d_alpha A^n
//! ```
//!
//! with `S` the Hodge matrix of the frame (`(*w)_alpha = S_alpha^gamma w_gamma`).
//! The component pattern is generated from that form rather than written out
//! index by index.
//!
//! When `G'` is closed it is locally `d omega`; if moreover `[omega, G'] = 0`
//! then `phi = omega` solves the system, because `W(omega) d omega = d omega`
//! whenever `omega` commutes with its own derivative.

use serde::{Deserialize, Serialize};

use crate::algebra::LieAlgebraData;
use crate::dual_current::{solve_closed, DualData};
use crate::error::{Error, Result};
use crate::geometry::{d_oneform, wedge_bracket, FieldRole, FieldSet, Lattice2D, LieOneForm, LorentzFrame};
use crate::lagrangian::maurer_cartan_current;
use crate::lax::curvature_report;
use crate::residual::ResidualReport;
use crate::scalar::Real;

/// Residual of `W(phi) d phi - G'(A)`, per site, per slot, per generator.
#[derive(Debug, Clone, Serialize)]
pub struct SystemResidual<R: Real> {
    pub residual: ResidualReport<R>,
    /// Max norm of `W(phi) d phi`.
    pub original_norm: R,
    /// Max norm of `G'(A)`.
    pub dual_norm: R,
}

pub fn system_residual<R: Real>(
    algebra: &LieAlgebraData<R>,
    phi: &FieldSet<R>,
    dual: &DualData<R>,
    frame: &LorentzFrame<R>,
) -> Result<SystemResidual<R>> {
    if phi.lattice() != dual.field.lattice() {
        return Err(Error::Lattice("original and dual fields live on different lattices".into()));
    }
    let lhs = maurer_cartan_current(algebra, phi)?;
    let rhs = solve_closed(algebra, dual, frame)?.current;
    let (a, b) = (lhs.max_abs(), rhs.max_abs());
    let diff = lhs.zip_with(&rhs, |x, y| x - y);
    Ok(SystemResidual {
        residual: ResidualReport::from_field("system", phi.lattice(), 2 * algebra.dim(), diff.as_slice().to_vec(), a.max(b)),
        original_norm: a,
        dual_norm: b,
    })
}

/// `dG'` by stencils, scaled by `|G'|`.
pub fn closedness_residual<R: Real>(gp: &LieOneForm<R>) -> ResidualReport<R> {
    let d = d_oneform(gp);
    ResidualReport::from_field("closedness", gp.lattice(), gp.dim(), d.as_slice().to_vec(), gp.max_abs())
}

/// Which leg is walked first when integrating from the base site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathConvention {
    AxisFirst,
}

#[derive(Debug, Clone, Serialize)]
pub struct OmegaField<R: Real> {
    #[serde(skip)]
    pub values: FieldSet<R>,
    pub base: (usize, usize),
    pub convention: PathConvention,
    /// Largest difference between the x0-first and x1-first integrals.
    pub path_gap: R,
    /// `10 * |dG'|_max * (largest enclosed area) + roundoff floor`.
    pub path_bound: R,
}

impl<R: Real> OmegaField<R> {
    pub fn path_consistent(&self) -> bool {
        self.path_gap <= self.path_bound
    }
}

/// Signed index steps from `from` to `to` along one axis without wrapping.
fn steps(from: usize, to: usize) -> (usize, bool) {
    if to >= from {
        (to - from, true)
    } else {
        (from - to, false)
    }
}

/// Trapezoid integral of one slot of `G'` along a straight axis run.
fn integrate_leg<R: Real>(gp: &LieOneForm<R>, lat: &Lattice2D<R>, from: (usize, usize), axis: usize, count: usize, forward: bool, acc: &mut [R]) {
    let h = lat.spacing()[axis] * R::lit(0.5);
    let h = if forward { h } else { -h };
    let mut cur = from;
    for _ in 0..count {
        let next = if axis == 0 {
            (if forward { cur.0 + 1 } else { cur.0 - 1 }, cur.1)
        } else {
            (cur.0, if forward { cur.1 + 1 } else { cur.1 - 1 })
        };
        let a = gp.component(lat.site_index(cur.0, cur.1), axis);
        let b = gp.component(lat.site_index(next.0, next.1), axis);
        for ((o, &x), &y) in acc.iter_mut().zip(a).zip(b) {
            *o += h * (x + y);
        }
        cur = next;
    }
}

fn integrate_from<R: Real>(gp: &LieOneForm<R>, base: (usize, usize), target: (usize, usize), first_axis: usize) -> Vec<R> {
    let lat = *gp.lattice();
    let mut acc = vec![R::zero(); gp.dim()];
    let (n0, f0) = steps(base.0, target.0);
    let (n1, f1) = steps(base.1, target.1);
    if first_axis == 0 {
        integrate_leg(gp, &lat, base, 0, n0, f0, &mut acc);
        integrate_leg(gp, &lat, (target.0, base.1), 1, n1, f1, &mut acc);
    } else {
        integrate_leg(gp, &lat, base, 1, n1, f1, &mut acc);
        integrate_leg(gp, &lat, (base.0, target.1), 0, n0, f0, &mut acc);
    }
    acc
}

/// Integrates `G'` to `omega` with `d omega = G'`, walking from `base` along
/// x0 and then x1 (never across a periodic seam). Refuses when the relative
/// closedness residual exceeds `threshold`.
pub fn reconstruct_omega<R: Real>(gp: &LieOneForm<R>, base: (usize, usize), threshold: R) -> Result<OmegaField<R>> {
    let lat = *gp.lattice();
    let [n0, n1] = lat.extents();
    if base.0 >= n0 || base.1 >= n1 {
        return Err(Error::PathOutOfBounds { step: 0, site: base });
    }
    let closed = closedness_residual(gp);
    if !(closed.relative <= threshold) {
        return Err(Error::Precondition {
            stage: "omega reconstruction (closedness)",
            residual: closed.relative.as_f64(),
            threshold: threshold.as_f64(),
        });
    }
    let n = gp.dim();
    let mut data = Vec::with_capacity(lat.sites() * n);
    let mut gap = R::zero();
    let mut max_area = R::zero();
    for s in 0..lat.sites() {
        let target = lat.site_coords(s);
        let a = integrate_from(gp, base, target, 0);
        let b = integrate_from(gp, base, target, 1);
        for (x, y) in a.iter().zip(&b) {
            gap = gap.max((*x - *y).abs());
        }
        let area = R::from_usize_lossy(steps(base.0, target.0).0 * steps(base.1, target.1).0);
        max_area = max_area.max(area);
        data.extend(a);
    }
    let sp = lat.spacing();
    let floor = R::lit(64.0) * R::epsilon() * R::from_usize_lossy(n0 + n1) * sp[0].max(sp[1]) * gp.max_abs();
    let bound = R::lit(10.0) * closed.max_norm * max_area * sp[0] * sp[1] + floor;
    Ok(OmegaField {
        values: FieldSet::from_vec(lat, n, FieldRole::Original, data)?,
        base,
        convention: PathConvention::AxisFirst,
        path_gap: gap,
        path_bound: bound,
    })
}

/// `C^k_{mn} omega^m G'^n_alpha`, scaled by `|omega| |G'|`.
pub fn commutation_residual<R: Real>(omega: &OmegaField<R>, gp: &LieOneForm<R>, algebra: &LieAlgebraData<R>) -> Result<ResidualReport<R>> {
    let w = &omega.values;
    if w.lattice() != gp.lattice() || w.dim() != gp.dim() || gp.dim() != algebra.dim() {
        return Err(Error::DimensionMismatch {
            what: "omega vs G'",
            expected: gp.dim(),
            found: w.dim(),
        });
    }
    let lat = *gp.lattice();
    let mut values = Vec::with_capacity(gp.as_slice().len());
    for s in 0..lat.sites() {
        for alpha in 0..2 {
            values.extend(algebra.bracket(w.at(s), gp.component(s, alpha)));
        }
    }
    Ok(ResidualReport::from_field(
        "commutation",
        &lat,
        2 * gp.dim(),
        values,
        w.max_abs() * gp.max_abs(),
    ))
}

/// `G' ^ G'` (half bracket, the curvature's quadratic term), scaled by
/// `|G'|^2`.
pub fn nilpotency_residual<R: Real>(gp: &LieOneForm<R>, algebra: &LieAlgebraData<R>) -> Result<ResidualReport<R>> {
    let w = wedge_bracket(gp, gp, algebra)?;
    let m = gp.max_abs();
    Ok(ResidualReport::from_field("nilpotency", gp.lattice(), gp.dim(), w.as_slice().to_vec(), m * m))
}

/// Takes `phi = omega` and reports `W(phi) d phi - G'` scaled by `|G'|`.
/// Refuses when the relative commutation residual exceeds `threshold`.
pub fn solution_from_omega<R: Real>(
    omega: &OmegaField<R>,
    gp: &LieOneForm<R>,
    algebra: &LieAlgebraData<R>,
    threshold: R,
) -> Result<(FieldSet<R>, ResidualReport<R>)> {
    let comm = commutation_residual(omega, gp, algebra)?;
    if !(comm.relative <= threshold) {
        return Err(Error::Precondition {
            stage: "solution recovery (commutation)",
            residual: comm.relative.as_f64(),
            threshold: threshold.as_f64(),
        });
    }
    let phi = omega.values.clone();
    let current = maurer_cartan_current(algebra, &phi)?;
    let diff = current.zip_with(gp, |a, b| a - b);
    let report = ResidualReport::from_field("recovery", gp.lattice(), 2 * gp.dim(), diff.as_slice().to_vec(), gp.max_abs());
    Ok((phi, report))
}

/// Relative thresholds for each stage. The recovery stage passes when its
/// relative residual is at most
/// `recovery_factor * (closedness + commutation + max(Delta)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrobeniusThresholds {
    pub closedness: f64,
    pub commutation: f64,
    pub nilpotency: f64,
    pub flatness: f64,
    pub recovery_factor: f64,
}

impl Default for FrobeniusThresholds {
    fn default() -> Self {
        Self {
            closedness: 1e-6,
            commutation: 1e-6,
            nilpotency: 1e-6,
            flatness: 1e-6,
            recovery_factor: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport<R: Real> {
    pub stage: &'static str,
    pub status: StageStatus,
    pub threshold: f64,
    pub residual: Option<ResidualReport<R>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl<R: Real> StageReport<R> {
    fn judged(stage: &'static str, residual: ResidualReport<R>, threshold: f64) -> Self {
        let ok = residual.relative.as_f64() <= threshold;
        Self {
            stage,
            status: if ok { StageStatus::Pass } else { StageStatus::Fail },
            threshold,
            residual: Some(residual),
            note: None,
        }
    }

    fn skipped(stage: &'static str, threshold: f64, note: impl Into<String>) -> Self {
        Self {
            stage,
            status: StageStatus::Skipped,
            threshold,
            residual: None,
            note: Some(note.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == StageStatus::Pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusReport<R: Real> {
    pub thresholds: FrobeniusThresholds,
    pub base: (usize, usize),
    pub stages: Vec<StageReport<R>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<OmegaField<R>>,
    #[serde(skip)]
    pub g_prime: LieOneForm<R>,
    #[serde(skip)]
    pub phi: Option<FieldSet<R>>,
}

impl<R: Real> FrobeniusReport<R> {
    pub fn stage(&self, name: &str) -> Option<&StageReport<R>> {
        self.stages.iter().find(|s| s.stage == name)
    }

    pub fn all_passed(&self) -> bool {
        self.stages.iter().all(|s| s.passed())
    }
}

/// Runs every stage on `G' = F_closed(A)`: closedness, omega path
/// consistency, commutation, nilpotency, flatness and recovery. Stages that
/// need `omega` are skipped when reconstruction is refused.
pub fn run_pipeline<R: Real>(
    algebra: &LieAlgebraData<R>,
    dual: &DualData<R>,
    frame: &LorentzFrame<R>,
    thresholds: FrobeniusThresholds,
    base: (usize, usize),
) -> Result<FrobeniusReport<R>> {
    let gp = solve_closed(algebra, dual, frame)?.current;
    let lat = *gp.lattice();
    let mut stages = Vec::new();

    let closed = closedness_residual(&gp);
    let closed_rel = closed.relative.as_f64();
    stages.push(StageReport::judged("closedness", closed, thresholds.closedness));

    let omega = match reconstruct_omega(&gp, base, R::lit(thresholds.closedness)) {
        Ok(w) => {
            let path = ResidualReport::from_values("omega_path_gap", vec![w.path_gap], w.path_bound);
            stages.push(StageReport::judged("omega_path_consistency", path, 1.0));
            Some(w)
        }
        Err(Error::Precondition { .. }) => {
            stages.push(StageReport::skipped("omega_path_consistency", 1.0, "reconstruction refused: G' not closed"));
            None
        }
        Err(e) => return Err(e),
    };

    let comm_rel = match &omega {
        Some(w) => {
            let comm = commutation_residual(w, &gp, algebra)?;
            let rel = comm.relative.as_f64();
            stages.push(StageReport::judged("commutation", comm, thresholds.commutation));
            Some(rel)
        }
        None => {
            stages.push(StageReport::skipped("commutation", thresholds.commutation, "no omega"));
            None
        }
    };

    stages.push(StageReport::judged("nilpotency", nilpotency_residual(&gp, algebra)?, thresholds.nilpotency));
    stages.push(StageReport::judged("flatness", curvature_report("flatness", &gp, algebra)?, thresholds.flatness));

    let sp = lat.spacing();
    let h2 = sp[0].max(sp[1]).as_f64().powi(2);
    let mut phi = None;
    match (&omega, comm_rel) {
        (Some(w), Some(c)) => {
            let allowed = thresholds.recovery_factor * (closed_rel + c + h2);
            match solution_from_omega(w, &gp, algebra, R::lit(thresholds.commutation)) {
                Ok((p, rec)) => {
                    stages.push(StageReport::judged("recovery", rec, allowed));
                    phi = Some(p);
                }
                Err(Error::Precondition { .. }) => {
                    stages.push(StageReport::skipped("recovery", allowed, "omega does not commute with G'"));
                }
                Err(e) => return Err(e),
            }
        }
        _ => stages.push(StageReport::skipped("recovery", f64::NAN, "no omega")),
    }

    Ok(FrobeniusReport {
        thresholds,
        base,
        stages,
        omega,
        g_prime: gp,
        phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{d_scalar, Boundary};
    use std::f64::consts::TAU;

    fn abelian1() -> LieAlgebraData<f64> {
        LieAlgebraData::abelian(1)
    }

    #[test]
    fn abelian_duality_pair_has_zero_system_residual() {
        let lat = Lattice2D::new([6, 5], [0.2, 0.3], Boundary::Clamped).unwrap();
        let phi = FieldSet::from_fn(lat, 1, FieldRole::Original, |x0, _| vec![x0]).unwrap();
        let a = FieldSet::from_fn(lat, 1, FieldRole::Dual, |_, x1| vec![x1]).unwrap();
        let r = system_residual(&abelian1(), &phi, &DualData::from_field(a), &LorentzFrame::minkowski()).unwrap();
        assert!(r.residual.max_norm < 1e-14);
        // swapping the roles breaks it
        let phi = FieldSet::from_fn(lat, 1, FieldRole::Original, |_, x1| vec![x1]).unwrap();
        let a = FieldSet::from_fn(lat, 1, FieldRole::Dual, |_, x1| vec![x1]).unwrap();
        let r = system_residual(&abelian1(), &phi, &DualData::from_field(a), &LorentzFrame::minkowski()).unwrap();
        assert!((r.residual.max_norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn abelian_wave_pair_converges() {
        // a = sin(k(x0 - x1)) pairs with phi = -a; unequal spacings leave an
        // O(Delta^2) stencil residual
        let mut errs = Vec::new();
        for n in [16usize, 32, 64] {
            let lat = Lattice2D::periodic_square(n, [1.0, 2.0]).unwrap();
            let f = |x0: f64, x1: f64| (TAU * (x0 - x1)).sin();
            let phi = FieldSet::from_fn(lat, 1, FieldRole::Original, |a, b| vec![-f(a, b)]).unwrap();
            let a = FieldSet::from_fn(lat, 1, FieldRole::Dual, |a, b| vec![f(a, b)]).unwrap();
            let r = system_residual(&abelian1(), &phi, &DualData::from_field(a), &LorentzFrame::minkowski()).unwrap();
            errs.push(r.residual.max_norm);
        }
        assert!(errs[0] > 1e-3);
        for p in errs.windows(2) {
            assert!((p[0] / p[1] - 4.0).abs() < 0.5, "{errs:?}");
        }
    }

    #[test]
    fn constant_fields_have_zero_system_residual() {
        let su2 = LieAlgebraData::su2();
        let lat = Lattice2D::periodic_square(5, [1.0, 1.0]).unwrap();
        let phi = FieldSet::from_fn(lat, 3, FieldRole::Original, |_, _| vec![0.3, 0.1, 2.0]).unwrap();
        let a = FieldSet::from_fn(lat, 3, FieldRole::Dual, |_, _| vec![0.2, -0.1, 0.4]).unwrap();
        let r = system_residual(&su2, &phi, &DualData::from_field(a), &LorentzFrame::minkowski()).unwrap();
        assert!(r.residual.max_norm < 1e-14);
    }

    #[test]
    fn closedness_of_test_forms() {
        let lat = Lattice2D::new([5, 5], [0.25f64, 0.25], Boundary::Clamped).unwrap();
        let gp = LieOneForm::from_fn(lat, 3, |_, x1| [vec![x1, 0.0, 0.0], vec![0.0; 3]]);
        let r = closedness_residual(&gp);
        assert!(r.pointwise.chunks(3).all(|c| (c[0] + 1.0).abs() < 1e-14 && c[1] == 0.0 && c[2] == 0.0));
        let f = FieldSet::from_fn(lat, 1, FieldRole::Original, |a, b| vec![a * a * b]).unwrap();
        let exact = d_scalar(&f).embed(3, 1);
        assert!(closedness_residual(&exact).max_norm < 1e-12);
    }

    #[test]
    fn omega_inverts_d_scalar() {
        let mut errs = Vec::new();
        for n in [16usize, 32, 64] {
            let lat = Lattice2D::periodic_square(n, [1.0, 1.0]).unwrap();
            let f = FieldSet::from_fn(lat, 1, FieldRole::Original, |a, b| vec![(TAU * a).sin() * (TAU * b).cos()]).unwrap();
            let gp = d_scalar(&f);
            let w = reconstruct_omega(&gp, (2, 3), 1.0).unwrap();
            let off = f.at(lat.site_index(2, 3))[0];
            assert_eq!(w.values.at(lat.site_index(2, 3))[0], 0.0);
            let err = (0..lat.sites())
                .map(|s| (w.values.at(s)[0] - (f.at(s)[0] - off)).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        for p in errs.windows(2) {
            assert!((p[0] / p[1] - 4.0).abs() < 0.5, "{errs:?}");
        }
    }

    #[test]
    fn zero_form_gives_zero_omega_and_full_recovery_residual() {
        let su2 = LieAlgebraData::su2();
        let lat = Lattice2D::periodic_square(6, [1.0, 1.0]).unwrap();
        let w = reconstruct_omega(&LieOneForm::zeros(lat, 3), (0, 0), 1e-6).unwrap();
        assert_eq!(w.values.max_abs(), 0.0);
        let gp = LieOneForm::from_fn(lat, 3, |_, _| [vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.5]]);
        let (phi, rec) = solution_from_omega(&w, &gp, &su2, 1e-6).unwrap();
        assert_eq!(phi.max_abs(), 0.0);
        assert_eq!(rec.relative, 1.0);
    }

    #[test]
    fn reconstruction_refuses_non_closed_input() {
        let lat = Lattice2D::new([5, 5], [0.25f64, 0.25], Boundary::Clamped).unwrap();
        let gp = LieOneForm::from_fn(lat, 1, |_, x1| [vec![x1 + 1.0], vec![0.0]]);
        match reconstruct_omega(&gp, (0, 0), 1e-6) {
            Err(Error::Precondition { residual, .. }) => assert!(residual > 0.1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn path_gap_tracks_curl_on_clamped_lattice() {
        // G' = x1 dx0 + 0 dx1 has curl -1: the two paths to (i0, i1) differ
        // by exactly the enclosed area
        let lat = Lattice2D::new([9, 9], [0.125f64, 0.125], Boundary::Clamped).unwrap();
        let gp = LieOneForm::from_fn(lat, 1, |_, x1| [vec![x1], vec![0.0]]);
        let w = reconstruct_omega(&gp, (0, 0), 10.0).unwrap();
        assert!((w.path_gap - 1.0).abs() < 1e-14);
        assert!(w.path_consistent());
    }

    #[test]
    fn commutation_examples() {
        let su2 = LieAlgebraData::su2();
        let lat = Lattice2D::periodic_square(4, [1.0, 1.0]).unwrap();
        let omega = |v: [f64; 3]| OmegaField {
            values: FieldSet::from_fn(lat, 3, FieldRole::Original, |_, _| v.to_vec()).unwrap(),
            base: (0, 0),
            convention: PathConvention::AxisFirst,
            path_gap: 0.0,
            path_bound: 0.0,
        };
        let g3 = LieOneForm::from_fn(lat, 3, |_, _| [vec![0.0, 0.0, 2.0], vec![0.0, 0.0, -1.0]]);
        assert_eq!(commutation_residual(&omega([0.0, 0.0, 0.7]), &g3, &su2).unwrap().max_norm, 0.0);
        let g2 = LieOneForm::from_fn(lat, 3, |_, _| [vec![0.0, 3.0, 0.0], vec![0.0; 3]]);
        let r = commutation_residual(&omega([0.5, 0.0, 0.0]), &g2, &su2).unwrap();
        assert_eq!(r.max_norm, 1.5);
        assert_eq!(r.worst_entry, Some(2));
        assert_eq!(r.relative, 1.0);
    }

    #[test]
    fn nilpotency_examples() {
        let su2 = LieAlgebraData::su2();
        let lat = Lattice2D::periodic_square(4, [1.0f64, 1.0]).unwrap();
        let single = LieOneForm::from_fn(lat, 3, |a, b| [vec![a, 0.0, 0.0], vec![b * b, 0.0, 0.0]]);
        assert_eq!(nilpotency_residual(&single, &su2).unwrap().max_norm, 0.0);
        let mixed = LieOneForm::from_fn(lat, 3, |_, _| [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let r = nilpotency_residual(&mixed, &su2).unwrap();
        assert!(r.pointwise.chunks(3).all(|c| c == [0.0, 0.0, 1.0]));
    }

    fn wave_family(n: usize, amp: f64) -> (LieAlgebraData<f64>, DualData<f64>) {
        let lat = Lattice2D::periodic_square(n, [1.0, 1.0]).unwrap();
        let a = FieldSet::from_fn(lat, 3, FieldRole::Dual, |x0, x1| vec![0.0, 0.0, amp * (TAU * (x0 - x1)).sin()]).unwrap();
        (LieAlgebraData::su2(), DualData::from_field(a))
    }

    #[test]
    fn effective_abelian_family_passes_every_stage() {
        let (su2, dual) = wave_family(32, 0.8);
        let rep = run_pipeline(&su2, &dual, &LorentzFrame::minkowski(), FrobeniusThresholds::default(), (0, 0)).unwrap();
        for s in &rep.stages {
            assert!(s.passed(), "{}: {:?}", s.stage, s.residual.as_ref().map(|r| r.relative));
        }
        assert!(rep.phi.is_some());
    }

    #[test]
    fn recovery_residual_is_second_order() {
        let mut errs = Vec::new();
        for n in [16usize, 32, 64] {
            let (su2, dual) = wave_family(n, 0.8);
            let rep = run_pipeline(&su2, &dual, &LorentzFrame::minkowski(), FrobeniusThresholds::default(), (0, 0)).unwrap();
            errs.push(rep.stage("recovery").unwrap().residual.as_ref().unwrap().max_norm);
        }
        for p in errs.windows(2) {
            assert!((p[0] / p[1] - 4.0).abs() < 0.5, "{errs:?}");
        }
    }

    #[test]
    fn generic_field_fails_closedness_and_skips_dependent_stages() {
        let lat = Lattice2D::periodic_square(16, [1.0, 1.0]).unwrap();
        let a = FieldSet::from_fn(lat, 3, FieldRole::Dual, |x0, x1| {
            vec![0.3 * (TAU * x0).sin(), 0.2 * (TAU * x1).cos(), 0.1 * (TAU * (x0 + x1)).sin()]
        })
        .unwrap();
        let su2 = LieAlgebraData::su2();
        let rep = run_pipeline(&su2, &DualData::from_field(a), &LorentzFrame::minkowski(), FrobeniusThresholds::default(), (0, 0)).unwrap();
        assert_eq!(rep.stage("closedness").unwrap().status, StageStatus::Fail);
        assert_eq!(rep.stage("commutation").unwrap().status, StageStatus::Skipped);
        assert_eq!(rep.stage("recovery").unwrap().status, StageStatus::Skipped);
        assert!(rep.omega.is_none());
    }

    #[test]
    fn flatness_is_bounded_by_its_two_parts() {
        let (su2, dual) = wave_family(16, 0.5);
        let frame = LorentzFrame::minkowski();
        let gp = solve_closed(&su2, &dual, &frame).unwrap().current;
        let closed = closedness_residual(&gp);
        let nil = nilpotency_residual(&gp, &su2).unwrap();
        let flat = curvature_report("flatness", &gp, &su2).unwrap();
        assert!(flat.max_norm <= closed.max_norm + nil.max_norm + 1e-15);
    }
}

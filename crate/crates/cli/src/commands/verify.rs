//! Identity suites over seeded random ensembles.

use pcmlax_core::algebra::LieAlgebraData;
use pcmlax_core::dual_current::{
    binomial_identity_check, first_order_residual, kernel_identity_check, solve_closed, solve_direct, solve_scalar,
    solve_series, DualData,
};
use pcmlax_core::ensemble::{
    random_binomial_pair, random_kernel_pair, random_metric, random_oneform, random_smooth_field, seeded,
};
use pcmlax_core::geometry::{hodge_oneform, Boundary, FieldRole, FieldSet, Lattice2D, LieOneForm, LorentzFrame};
use pcmlax_core::Error;
use serde_json::json;

use super::{relative_diff, Run};
use crate::error::CliResult;
use crate::report::Check;

pub(super) fn run(run: &mut Run) -> CliResult<()> {
    hodge(run)?;
    scalar(run)?;
    three_way(run)?;
    binomial(run)?;
    Ok(())
}

fn hodge(run: &mut Run) -> CliResult<()> {
    let sizes = &run.cfg.options().ensemble;
    let tol = run.cfg.options().tolerances.hodge;
    let mut rng = seeded(run.settings.seed);
    let lat = Lattice2D::periodic_square(sizes.hodge_extent, [1.0, 1.0])?;
    let mut worst = 0.0_f64;
    for _ in 0..sizes.metrics {
        let frame = random_metric::<f64>(&mut rng)?;
        let w = random_oneform(&mut rng, lat, run.cfg.algebra.dim())?;
        let back = hodge_oneform(&hodge_oneform(&w, &frame), &frame);
        worst = worst.max(relative_diff(w.as_slice(), back.as_slice()));
    }
    run.report.push(
        Check::at_most("hodge_involution", worst, tol).with_note(format!("{} random metrics on {0}x{0}", sizes.hodge_extent)),
    );
    Ok(())
}

fn scalar(run: &mut Run) -> CliResult<()> {
    let opts = run.cfg.options();
    let order = opts.series_order;
    let tol = opts.tolerances.scalar;
    let formal = LieAlgebraData::<f64>::formal_scalar();
    let frame = LorentzFrame::minkowski();
    let lat = Lattice2D::new([3, 3], [1.0, 1.0], Boundary::Clamped)?;
    let da = LieOneForm::from_fn(lat, 1, |_, _| [vec![0.7], vec![-0.3]]);
    let mut rows = Vec::new();
    for &v in &opts.scalar_values {
        let a = FieldSet::from_fn(lat, 1, FieldRole::Dual, |_, _| vec![v])?;
        let closed = solve_scalar(&a, &da, &frame)?;
        let series = solve_series(&formal, &DualData::with_derivative(a, da.clone())?, &frame, order)?;
        let rel = relative_diff(closed.current.as_slice(), series.current.as_slice());
        // A truncated series can only match to its own tail.
        let tail = series.tail_bound.unwrap_or(0.0);
        run.report.push(
            Check::at_most(format!("scalar_series_vs_closed[{v}]"), rel, tol + tail)
                .with_note(format!("order {order}, tolerance {tol:e} + tail bound {tail:.3e}")),
        );
        rows.push(json!({"a": v, "relative": rel, "tail_bound": tail}));
    }
    run.report.insert("scalar", rows);

    let one = FieldSet::from_fn(lat, 1, FieldRole::Dual, |_, _| vec![1.0])?;
    let pole = matches!(solve_scalar(&one, &da, &frame), Err(Error::Pole { .. }));
    run.report.push(Check::judged("scalar_pole_detected", pole, None, None).with_note("A = 1 must raise the pole error"));
    Ok(())
}

fn three_way(run: &mut Run) -> CliResult<()> {
    let opts = run.cfg.options();
    let tol = &opts.tolerances;
    let sizes = &opts.ensemble;
    let alg = &run.cfg.algebra;
    let frame = LorentzFrame::minkowski();
    let lat = Lattice2D::periodic_square(sizes.field_extent, [1.0, 1.0])?;
    // Separate stream from the Hodge ensemble so sizes can change
    // independently.
    let mut rng = seeded(run.settings.seed ^ 0x5eed_0003);
    let (mut cd, mut cs, mut sub) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..sizes.fields {
        let a = random_smooth_field(&mut rng, lat, alg, opts.target_radius)?;
        let dual = DualData::from_field(a);
        let closed = solve_closed(alg, &dual, &frame)?.current;
        let direct = solve_direct(alg, &dual, &frame)?.current;
        let series = solve_series(alg, &dual, &frame, opts.series_order)?.current;
        cd = cd.max(relative_diff(closed.as_slice(), direct.as_slice()));
        cs = cs.max(relative_diff(closed.as_slice(), series.as_slice()));
        sub = sub.max(first_order_residual(&closed, &dual, alg, &frame)?.relative);
    }
    let note = format!("{} smooth fields on {1}x{1}, max spectral radius {2}", sizes.fields, sizes.field_extent, opts.target_radius);
    run.report.push(Check::at_most("closed_vs_direct", cd, tol.closed_direct).with_note(note.clone()));
    run.report.push(
        Check::at_most("closed_vs_series", cs, tol.closed_series).with_note(format!("{note}, order {}", opts.series_order)),
    );
    run.report.push(Check::at_most("substitution_residual", sub, tol.substitution).with_note(note));
    Ok(())
}

fn binomial(run: &mut Run) -> CliResult<()> {
    let opts = run.cfg.options();
    let (n, count, tol) = (opts.ensemble.matrix_dim, opts.ensemble.matrix_pairs, opts.tolerances.binomial);
    let mut rng = seeded(run.settings.seed ^ 0x5eed_0005);
    let (mut worst, mut worst_kernel) = (0.0_f64, 0.0_f64);
    for _ in 0..count {
        let (a, b) = random_binomial_pair::<f64>(&mut rng, n)?;
        worst = worst.max(binomial_identity_check(&a, &b)?.relative);
        let (c, t) = random_kernel_pair::<f64>(&mut rng, n)?;
        worst_kernel = worst_kernel.max(kernel_identity_check(&c, &t)?.relative);
    }
    let note = format!("{count} random {n}x{n} pairs");
    run.report.push(Check::at_most("binomial_inverse", worst, tol).with_note(note.clone()));
    run.report.push(Check::at_most("kernel_inverse", worst_kernel, tol).with_note(note));
    Ok(())
}

//! Path-ordered transport of the Lax connection.

use pcmlax_core::dense::{DType, DenseArray};
use pcmlax_core::dual_current::DualData;
use pcmlax_core::ensemble::{random_rectangle, seeded};
use pcmlax_core::lax::{build_lax, flatness_residual, integrate_lax, path_dependence_gap, LatticePath, LaxConnection};
use pcmlax_core::matrix::{matrix_exp, Matrix};
use pcmlax_core::ComplexMatrixF64;
use serde_json::json;

use super::Run;
use crate::error::{CliError, CliResult};
use crate::report::Check;

fn connection(run: &Run) -> CliResult<LaxConnection<f64>> {
    let cfg = run.cfg;
    if let Some(src) = &cfg.config.fields.lax {
        return Ok(LaxConnection::external(cfg.lax_form(src, cfg.lattice)?, "config expressions")?);
    }
    match cfg.dual(cfg.lattice)? {
        Some(a) => Ok(build_lax(&cfg.algebra, &DualData::from_field(a), &cfg.frame)?),
        None => Err(CliError::Config("`integrate` needs `fields.lax` or `fields.dual`".into())),
    }
}

/// Closed form for a constant connection with commuting slots:
/// `exp(sum_a displacement_a * L_a . T)`.
fn constant_commuting_transport(run: &Run, l: &LaxConnection<f64>, path: &LatticePath) -> CliResult<Option<ComplexMatrixF64>> {
    let alg = &run.cfg.algebra;
    let form = l.form();
    let lat = *form.lattice();
    let (l0, l1) = (form.component(0, 0), form.component(0, 1));
    let constant = (0..lat.sites()).all(|s| form.component(s, 0) == l0 && form.component(s, 1) == l1);
    let scale = l0.iter().chain(l1).fold(0.0_f64, |m, x| m.max(x.abs()));
    let commuting = alg.bracket(l0, l1).iter().all(|x| x.abs() <= 1e-14 * scale * scale);
    if !constant || !commuting {
        return Ok(None);
    }
    let mut disp = [0.0_f64; 2];
    for m in &path.moves {
        disp[m.axis] += if m.forward { 1.0 } else { -1.0 };
    }
    let sp = lat.spacing();
    let coeffs: Vec<f64> = l0.iter().zip(l1).map(|(a, b)| disp[0] * sp[0] * a + disp[1] * sp[1] * b).collect();
    Ok(Some(matrix_exp(&alg.compose(&coeffs)?)?))
}

pub(super) fn run(run: &mut Run) -> CliResult<()> {
    let cfg = run.cfg;
    let alg = &cfg.algebra;
    let size = alg.require_representation()?[0].dim();
    let g0 = Matrix::identity(size);
    let l = connection(run)?;
    let tol = cfg.options().tolerances.transport;

    let flat = flatness_residual(&l, alg)?;
    run.report.insert("lax_provenance", l.provenance());
    run.report.insert("flatness", &flat);

    let mut payload = Vec::new();
    let mut records = Vec::new();
    for (i, path) in cfg.paths.iter().enumerate() {
        let g = integrate_lax(&l, alg, &g0, path)?;
        for z in g.as_slice() {
            payload.extend([z.re, z.im]);
        }
        records.push(json!({"start": path.start, "moves": path.moves, "end": path.end(&cfg.lattice)?}));
        match constant_commuting_transport(run, &l, path)? {
            Some(exact) => {
                let err = (&g - &exact).max_abs() / exact.max_abs().max(1.0);
                run.report.push(
                    Check::at_most(format!("transport_closed_form[{i}]"), err, tol)
                        .with_note("constant commuting connection: exponential of the displacement"),
                );
            }
            None => run.report.push(Check::skipped(
                format!("transport_closed_form[{i}]"),
                "connection is not constant and commuting; no closed form",
            )),
        }
    }
    run.report.insert("paths", records);
    if !cfg.paths.is_empty() {
        let array = DenseArray::new(DType::C64, vec![cfg.paths.len(), size, size], "path row column; (re, im) pairs", payload)?;
        let tagged = run.tag(array, "path-ordered trapezoid links").with_meta("initial", "identity");
        run.emit("transport.dense", tagged);
    }

    let mut loops: Vec<_> = cfg.options().loop_pairs.iter().map(|p| (p.start, p.width, p.height)).collect();
    let mut rng = seeded(run.settings.seed ^ 0x5eed_0009);
    for _ in 0..cfg.options().random_loop_pairs {
        loops.push(random_rectangle(&mut rng, &cfg.lattice));
    }
    let mut gaps = Vec::new();
    for (i, &(start, w, h)) in loops.iter().enumerate() {
        let (a, b) = LatticePath::rectangle_pair(start, w, h);
        let gap = path_dependence_gap(&l, alg, &g0, &a, &b)?;
        run.report.push(
            Check::judged(format!("path_gap[{i}]"), gap.within_bound(), Some(gap.gap), Some(gap.bound))
                .with_note(format!("{w}x{h} rectangle from {start:?}; bound from flatness residual x enclosed area")),
        );
        gaps.push(json!({"start": start, "width": w, "height": h, "gap": gap}));
    }
    run.report.insert("loop_pairs", gaps);
    Ok(())
}

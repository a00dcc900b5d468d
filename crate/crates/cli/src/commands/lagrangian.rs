//! Direct, split and PCM Lagrangian densities.

use pcmlax_core::dual_current::{solve_closed, DualData};
use pcmlax_core::lagrangian::{
    compare_densities, dual_lagrangian_direct, dual_lagrangian_split, maurer_cartan_current, pcm_lagrangian,
    split_identity_residuals, LagrangianDensity,
};
use serde_json::{json, Map, Value};

use super::Run;
use crate::error::CliResult;
use crate::report::Check;

fn term_maxima(d: &LagrangianDensity<f64>) -> Value {
    let mut m = Map::new();
    for (name, t) in &d.terms {
        m.insert(name.clone(), json!(t.iter().fold(0.0_f64, |a, x| a.max(x.abs()))));
    }
    Value::Object(m)
}

fn emit_density(run: &mut Run, label: &str, d: &LagrangianDensity<f64>) -> CliResult<()> {
    let a = run.density_array(&d.values, label)?;
    run.emit(format!("lagrangian_{label}.dense"), a);
    if run.settings.terms {
        for (name, t) in &d.terms {
            let a = run.density_array(t, &format!("{label}:{name}"))?;
            run.emit(format!("lagrangian_{label}_{name}.dense"), a);
        }
    }
    Ok(())
}

pub(super) fn run(run: &mut Run) -> CliResult<()> {
    let cfg = run.cfg;
    let (alg, frame) = (&cfg.algebra, &cfg.frame);
    let tol = cfg.options().tolerances.lagrangian;
    let dual = DualData::from_field(cfg.require_dual("lagrangian")?);

    let direct = dual_lagrangian_direct(alg, &dual, frame)?;
    let split = dual_lagrangian_split(alg, &dual, frame)?;
    let diff = compare_densities(&direct, &split)?;
    run.report
        .push(Check::at_most("direct_vs_split", diff.relative, tol).with_residual(diff.clone()));
    for r in split_identity_residuals(alg, &dual, frame)? {
        run.report
            .push(Check::at_most(r.name.clone(), r.relative, tol).with_residual(r));
    }

    // PCM density from the configured group field, else from the on-shell
    // current G' = F(A).
    let (gp, source) = match cfg.original(cfg.lattice)? {
        Some(phi) => (maurer_cartan_current(alg, &phi)?, "W(phi) dphi"),
        None => (solve_closed(alg, &dual, frame)?.current, "F_closed(A)"),
    };
    let pcm = pcm_lagrangian(&gp, alg, frame, cfg.options().pcm_scale)?;

    run.report.insert(
        "densities",
        json!({
            "direct": {"max_abs": direct.magnitude(), "terms": term_maxima(&direct)},
            "split": {"max_abs": split.magnitude(), "terms": term_maxima(&split)},
            "pcm": {"max_abs": pcm.magnitude(), "terms": term_maxima(&pcm), "current": source},
            "direct_minus_split_max": diff.max_norm,
        }),
    );
    emit_density(run, "direct", &direct)?;
    emit_density(run, "split", &split)?;
    emit_density(run, "pcm", &pcm)?;
    Ok(())
}

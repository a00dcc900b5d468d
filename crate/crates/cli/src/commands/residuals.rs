//! First-order, flatness and Bianchi residuals at two resolutions.

use pcmlax_core::dual_current::{first_order_residual, solve_closed, DualData};
use pcmlax_core::lagrangian::{bianchi_residual, maurer_cartan_current};
use pcmlax_core::lax::{build_lax, flatness_residual};
use pcmlax_core::residual::ResidualReport;
use pcmlax_core::LatticeF64;
use serde_json::json;

use super::Run;
use crate::error::CliResult;
use crate::report::Check;

struct Level {
    lattice: LatticeF64,
    first_order: ResidualReport<f64>,
    flatness: ResidualReport<f64>,
    bianchi: Option<ResidualReport<f64>>,
}

fn level(run: &mut Run, lattice: LatticeF64) -> CliResult<Option<Level>> {
    let cfg = run.cfg;
    let Some(a) = cfg.dual(lattice)? else {
        return Ok(None);
    };
    let dual = DualData::from_field(a);
    let closed = solve_closed(&cfg.algebra, &dual, &cfg.frame)?;
    let first_order = first_order_residual(&closed.current, &dual, &cfg.algebra, &cfg.frame)?;
    let flatness = flatness_residual(&build_lax(&cfg.algebra, &dual, &cfg.frame)?, &cfg.algebra)?;
    let bianchi = match cfg.original(lattice)? {
        Some(phi) => Some(bianchi_residual(&maurer_cartan_current(&cfg.algebra, &phi)?, &cfg.algebra)?),
        None => None,
    };
    if lattice == cfg.lattice {
        let f = run.form_array(&closed.current, &closed.method.tag())?;
        run.emit("current.dense", f);
    }
    Ok(Some(Level {
        lattice,
        first_order,
        flatness,
        bianchi,
    }))
}

/// Judges a refinement pair: either both levels vanish to roundoff, or the
/// max-norm ratio is `k^2` within the configured tolerance.
fn convergence(name: &str, coarse: &ResidualReport<f64>, fine: &ResidualReport<f64>, k: usize, tol: f64, floor: f64) -> Check {
    let expected = (k * k) as f64;
    let allowed = tol * expected / 4.0;
    if coarse.relative <= floor && fine.relative <= floor {
        return Check::at_most(format!("{name}_convergence"), coarse.relative.max(fine.relative), floor)
            .with_note("identically zero to roundoff; no ratio formed");
    }
    let ratio = coarse.max_norm / fine.max_norm;
    Check::judged(format!("{name}_convergence"), (ratio - expected).abs() <= allowed, Some(ratio), Some(allowed))
        .with_note(format!("max-norm ratio under refinement by {k}; expected {expected} +- {allowed}"))
}

pub(super) fn run(run: &mut Run) -> CliResult<()> {
    let cfg = run.cfg;
    cfg.require_dual("residuals")?;
    let tol = &cfg.options().tolerances;
    let k = run.settings.resolution_factor;
    let coarse = level(run, cfg.lattice)?.expect("dual field present at base resolution");
    let fine = level(run, cfg.lattice.refined(k)?)?;

    let mut levels = vec![&coarse];
    levels.extend(fine.as_ref());
    let summary: Vec<_> = levels
        .iter()
        .map(|l| {
            json!({
                "extents": l.lattice.extents(),
                "spacing": l.lattice.spacing(),
                "first_order": l.first_order,
                "flatness": l.flatness,
                "bianchi": l.bianchi,
            })
        })
        .collect();
    run.report.insert("levels", summary);
    run.report.insert("resolution_factor", k);

    for l in &levels {
        let [n0, n1] = l.lattice.extents();
        run.report.push(
            Check::at_most(format!("first_order[{n0}x{n1}]"), l.first_order.relative, tol.substitution)
                .with_residual(l.first_order.clone()),
        );
    }
    match &fine {
        Some(fine) => {
            run.report
                .push(convergence("flatness", &coarse.flatness, &fine.flatness, k, tol.ratio, tol.zero_floor));
            match (&coarse.bianchi, &fine.bianchi) {
                (Some(c), Some(f)) => run.report.push(convergence("bianchi", c, f, k, tol.ratio, tol.zero_floor)),
                _ => run.report.push(Check::skipped("bianchi_convergence", "no `fields.original` configured")),
            }
        }
        None => {
            let why = "field given as a dense file; no refined resolution available";
            run.report.push(Check::skipped("flatness_convergence", why));
            run.report.push(Check::skipped("bianchi_convergence", why));
        }
    }
    Ok(())
}

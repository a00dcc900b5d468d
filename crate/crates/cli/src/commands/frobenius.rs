//! Staged reconstruction of the group field from the dual current.

use pcmlax_core::dual_current::DualData;
use pcmlax_core::frobenius::{run_pipeline, StageStatus};

use super::Run;
use crate::error::{exit, CliResult};
use crate::report::{Check, Status};

pub(super) fn run(run: &mut Run) -> CliResult<()> {
    let cfg = run.cfg;
    let opts = cfg.options();
    let dual = DualData::from_field(cfg.require_dual("frobenius")?);
    let report = run_pipeline(&cfg.algebra, &dual, &cfg.frame, opts.thresholds, opts.base_site)?;

    for s in &report.stages {
        let code = match s.stage {
            "commutation" => exit::COMMUTATION,
            "nilpotency" => exit::NILPOTENCY,
            _ => exit::CHECK_FAILED,
        };
        let mut check = Check::judged(s.stage, s.passed(), s.residual.as_ref().map(|r| r.relative), Some(s.threshold))
            .with_fail_code(code);
        if s.status == StageStatus::Skipped {
            check.status = Status::Skipped;
        }
        check.residual = s.residual.clone();
        check.note = s.note.clone();
        run.report.push(check);
    }
    run.report.insert("thresholds", report.thresholds);
    run.report.insert("base_site", report.base);
    run.report.insert("omega", &report.omega);

    let g = run.form_array(&report.g_prime, "closed")?;
    run.emit("g_prime.dense", g);
    if let (true, Some(phi)) = (report.all_passed(), &report.phi) {
        let a = run.field_array(phi, "frobenius omega")?;
        run.emit("phi.dense", a);
    }
    Ok(())
}

use coherence::measures::{c_l1, c_rel_entropy, c_tr_family_closed, c_tr_qubit_report};
use coherence::solver::{closest_incoherent, SolverConfig};
use coherence::{FamilyState, MeasureKind, MeasureReport, StateDocument};
use serde::Serialize;

use crate::args::MeasureArgs;
use crate::error::{exit, CliError, CliResult};
use crate::report::{emit, RunManifest};

/// Evaluates `kind` on a parsed state document.
///
/// `family_tol` is the entrywise tolerance used to recognize a general
/// density matrix as a constant-off-diagonal state for the closed form.
pub fn evaluate(
    doc: &StateDocument,
    kind: MeasureKind,
    family_tol: f64,
    cfg: &SolverConfig,
) -> CliResult<MeasureReport> {
    let rho = doc.to_density();
    let report = match kind {
        MeasureKind::L1 => MeasureReport::scalar(kind, c_l1(&rho)),
        MeasureKind::RelEntropy => MeasureReport::scalar(kind, c_rel_entropy(&rho)?),
        MeasureKind::TraceDistClosed => match doc {
            StateDocument::Family(f) => c_tr_family_closed(f),
            StateDocument::Diagonal(p) => c_tr_family_closed(&FamilyState::new(p.p().to_vec(), 0.0)?),
            StateDocument::Density(rho) if rho.dim() == 2 => c_tr_qubit_report(rho)?,
            StateDocument::Density(rho) => {
                let f = FamilyState::from_density(rho, family_tol).ok_or_else(|| {
                    CliError::State(format!(
                        "no closed form: the {d}×{d} state does not have one real off-diagonal value \
                         (within {family_tol:e}); use trace_dist_numeric",
                        d = rho.dim()
                    ))
                })?;
                c_tr_family_closed(&f)
            }
        },
        MeasureKind::TraceDistNumeric => closest_incoherent(&rho, cfg)?,
    };
    Ok(report)
}

/// The report's own fields followed by a `manifest` key.
#[derive(Serialize)]
struct MeasureOutput<'a> {
    #[serde(flatten)]
    report: &'a MeasureReport,
    manifest: &'a RunManifest,
}

pub fn run(args: &MeasureArgs) -> CliResult<i32> {
    let path = &args.state_file;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let doc = StateDocument::from_json(&text)?;
    let cfg = args.solver.config();
    cfg.validate()?;
    let kind = MeasureKind::from(args.measure);
    let report = evaluate(&doc, kind, args.common.tol, &cfg)?;

    let manifest = RunManifest::new("measure", args.common.seed)
        .with("state_file", path.display().to_string())
        .with("measure", kind)
        .with("tol", args.common.tol)
        .with("solver", cfg);
    let output = MeasureOutput {
        report: &report,
        manifest: &manifest,
    };
    let text = coherence::json::to_json(&output).expect("report serializes") + "\n";
    emit(args.common.out.as_deref(), &text)?;
    Ok(exit::SUCCESS)
}

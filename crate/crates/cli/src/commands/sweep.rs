use coherence::measures::{c_l1, c_rel_entropy, c_tr_family_closed};
use coherence::solver::{closest_incoherent, SolverConfig};
use coherence::FamilyState;

use crate::args::{SweepArgs, Vary};
use crate::error::{exit, CliError, CliResult};
use crate::report::{emit, fmt_f64, CsvReport, RunManifest};
use crate::trials::ordered_map;

use super::summary_sink;

pub const MEASURE_COLUMNS: [&str; 5] = ["skipped", "c_l1", "c_rel_entropy", "c_tr_closed", "c_tr_numeric"];

/// Largest dimension accepted when varying d.
pub const MAX_DIM: usize = 32;

/// One family state to evaluate; `x` and `a` are the template after substitution.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub x: Vec<f64>,
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepValues {
    pub c_l1: f64,
    pub c_rel_entropy: f64,
    pub c_tr_closed: f64,
    pub c_tr_numeric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// `None` when the point lies outside the positive-semidefinite region.
    pub values: Option<SweepValues>,
}

fn uniform(d: usize) -> Vec<f64> {
    vec![1.0 / d as f64; d]
}

/// Expands the sweep arguments into the list of points, in sweep order.
pub fn points(args: &SweepArgs) -> CliResult<Vec<SweepPoint>> {
    if !(args.from.is_finite() && args.to.is_finite()) {
        return Err(CliError::Usage("--from and --to must be finite".into()));
    }
    match args.vary {
        Vary::A => {
            if args.steps == 0 {
                return Err(CliError::Usage("--steps must be at least 1".into()));
            }
            let x = match &args.x {
                Some(x) => x.clone(),
                None if args.d >= 2 => uniform(args.d),
                None => return Err(CliError::Usage(format!("--d must be at least 2, got {}", args.d))),
            };
            let n = args.steps as f64;
            Ok((0..=args.steps)
                .map(|k| {
                    // Symmetric interpolation keeps both endpoints exact.
                    let a = (args.from * (n - k as f64) + args.to * k as f64) / n;
                    SweepPoint {
                        value: a,
                        x: x.clone(),
                        a,
                    }
                })
                .collect())
        }
        Vary::D => {
            if args.x.is_some() {
                return Err(CliError::Usage("--x cannot be combined with --vary d".into()));
            }
            let (from, to) = (args.from, args.to);
            let integral = |v: f64| v.fract() == 0.0 && (2.0..=MAX_DIM as f64).contains(&v);
            if !(integral(from) && integral(to) && from <= to) {
                return Err(CliError::Usage(format!(
                    "--vary d needs integers 2 <= from <= to <= {MAX_DIM}, got {from}..{to}"
                )));
            }
            Ok((from as usize..=to as usize)
                .map(|d| SweepPoint {
                    value: d as f64,
                    x: uniform(d),
                    a: args.a,
                })
                .collect())
        }
    }
}

/// Evaluates one point. Infeasible templates are skipped; solver failures are errors.
pub fn evaluate(point: &SweepPoint, cfg: &SolverConfig) -> CliResult<SweepRow> {
    let Ok(f) = FamilyState::new(point.x.clone(), point.a) else {
        return Ok(SweepRow {
            value: point.value,
            values: None,
        });
    };
    let rho = f.to_density();
    Ok(SweepRow {
        value: point.value,
        values: Some(SweepValues {
            c_l1: c_l1(&rho),
            c_rel_entropy: c_rel_entropy(&rho)?,
            c_tr_closed: c_tr_family_closed(&f).value,
            c_tr_numeric: closest_incoherent(&rho, cfg)?.value,
        }),
    })
}

pub fn table(vary: Vary, rows: &[SweepRow]) -> CsvReport {
    let name = match vary {
        Vary::A => "a",
        Vary::D => "d",
    };
    let mut header = vec![name];
    header.extend(MEASURE_COLUMNS);
    let mut report = CsvReport::new(&header);
    for row in rows {
        let value = match vary {
            Vary::A => fmt_f64(row.value),
            Vary::D => (row.value as usize).to_string(),
        };
        let mut record = vec![value];
        match row.values {
            Some(v) => {
                record.push("false".into());
                record.extend([v.c_l1, v.c_rel_entropy, v.c_tr_closed, v.c_tr_numeric].map(fmt_f64));
            }
            None => {
                record.push("true".into());
                record.extend(std::iter::repeat_n(String::new(), 4));
            }
        }
        report.push(record);
    }
    report
}

pub fn run(args: &SweepArgs) -> CliResult<i32> {
    let cfg = args.solver.config();
    cfg.validate()?;
    let points = points(args)?;
    let rows = ordered_map(&points, args.common.threads, |p| evaluate(p, &cfg))?
        .into_iter()
        .collect::<CliResult<Vec<_>>>()?;

    let vary = match args.vary {
        Vary::A => "a",
        Vary::D => "d",
    };
    let mut manifest = RunManifest::new("sweep", args.common.seed)
        .with("vary", vary)
        .with("from", args.from)
        .with("to", args.to)
        .with("tol", args.common.tol)
        .with("solver", cfg);
    manifest = match args.vary {
        Vary::A => manifest
            .with("steps", args.steps)
            .with("x", points.first().map(|p| p.x.clone())),
        Vary::D => manifest.with("a", args.a),
    };
    emit(args.common.out.as_deref(), &table(args.vary, &rows).render(&manifest))?;

    let feasible: Vec<&SweepValues> = rows.iter().filter_map(|r| r.values.as_ref()).collect();
    let max_gap = feasible
        .iter()
        .map(|v| (v.c_tr_numeric - v.c_tr_closed).abs())
        .fold(0.0, f64::max);
    summary_sink(
        args.common.out.is_some(),
        &format!(
            "sweep: {} points, {} skipped, max |numeric - closed| {max_gap:.3e} (tol {:e})",
            rows.len(),
            rows.len() - feasible.len(),
            args.common.tol
        ),
    );
    Ok(if max_gap <= args.common.tol {
        exit::SUCCESS
    } else {
        exit::VERIFICATION_FAILURE
    })
}

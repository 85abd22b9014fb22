use coherence::solver::{verify_theorem2, SolverConfig, Theorem2Check};
use coherence::states::random_family_state;

use crate::args::Theorem2Args;
use crate::error::{exit, CliError, CliResult};
use crate::report::{emit, fmt_f64, CsvReport, RunManifest};
use crate::trials::{ordered_map, trial_seed};

use super::{check_dimension_range, error_status, summary_sink};

pub const MAX_DIM: usize = 8;

pub const HEADER: [&str; 9] = [
    "d",
    "trial",
    "seed",
    "a",
    "closed",
    "numeric",
    "abs_gap",
    "argmin_gap",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Params {
    pub d_min: usize,
    pub d_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct Theorem2Row {
    pub d: usize,
    pub trial: usize,
    pub seed: u64,
    /// Off-diagonal value, absent when the state could not be generated.
    pub a: Option<f64>,
    pub outcome: Result<Theorem2Check, coherence::Error>,
}

impl Theorem2Row {
    pub fn passed(&self, tol: f64) -> bool {
        matches!(&self.outcome, Ok(check) if check.abs_gap() <= tol)
    }

    fn record(&self, tol: f64) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let check = self.outcome.as_ref().ok();
        let status = match &self.outcome {
            Ok(c) if c.abs_gap() <= tol => "ok",
            Ok(_) => "gap_exceeded",
            Err(e) => error_status(e),
        };
        vec![
            self.d.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            opt(self.a),
            opt(self.a.map(|a| 2.0 * (self.d as f64 - 1.0) * a.abs())),
            opt(check.map(|c| c.numeric)),
            opt(check.map(|c| c.abs_gap())),
            opt(check.map(|c| c.argmin_gap)),
            status.to_string(),
        ]
    }
}

pub fn validate(p: &Theorem2Params) -> CliResult<()> {
    check_dimension_range(p.d_min, p.d_max, MAX_DIM)?;
    if p.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if !(p.tol >= 0.0 && p.tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "--tol must be a nonnegative number, got {}",
            p.tol
        )));
    }
    Ok(())
}

fn run_one(d: usize, trial: usize, base: u64, cfg: &SolverConfig) -> Theorem2Row {
    let seed = trial_seed(base, d, trial);
    match random_family_state(d, seed) {
        Ok(f) => Theorem2Row {
            d,
            trial,
            seed,
            a: Some(f.a()),
            outcome: verify_theorem2(&f, cfg),
        },
        Err(e) => Theorem2Row {
            d,
            trial,
            seed,
            a: None,
            outcome: Err(e),
        },
    }
}

/// All trials in `(d, trial)` order.
pub fn run_trials(p: &Theorem2Params, cfg: &SolverConfig, threads: usize) -> CliResult<Vec<Theorem2Row>> {
    validate(p)?;
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (p.d_min..=p.d_max)
        .flat_map(|d| (0..p.trials).map(move |t| (d, t)))
        .collect();
    ordered_map(&jobs, threads, |&(d, t)| run_one(d, t, p.seed, cfg))
}

pub fn table(rows: &[Theorem2Row], tol: f64) -> CsvReport {
    let mut report = CsvReport::new(&HEADER);
    for row in rows {
        report.push(row.record(tol));
    }
    report
}

pub fn run(args: &Theorem2Args) -> CliResult<i32> {
    let params = Theorem2Params {
        d_min: args.d_min,
        d_max: args.d_max,
        trials: args.trials,
        seed: args.common.seed,
        tol: args.common.tol,
    };
    let cfg = args.solver.config();
    let rows = run_trials(&params, &cfg, args.common.threads)?;
    let manifest = RunManifest::new("verify-theorem2", params.seed)
        .with("d_min", params.d_min)
        .with("d_max", params.d_max)
        .with("trials", params.trials)
        .with("tol", params.tol)
        .with("solver", cfg);
    emit(args.common.out.as_deref(), &table(&rows, params.tol).render(&manifest))?;

    let failed = rows.iter().filter(|r| !r.passed(params.tol)).count();
    let checks: Vec<&Theorem2Check> = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let max_gap = checks.iter().map(|c| c.abs_gap()).fold(0.0, f64::max);
    let max_argmin = checks.iter().map(|c| c.argmin_gap).fold(0.0, f64::max);
    summary_sink(args.common.out.is_some(), &format!(
        "verify-theorem2: {} trials, {failed} failed, max abs_gap {max_gap:.3e}, max argmin_gap {max_argmin:.3e} (tol {:e})",
        rows.len(),
        params.tol
    ));
    Ok(if failed == 0 {
        exit::SUCCESS
    } else {
        exit::VERIFICATION_FAILURE
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use coherence::measures::c_tr_qubit;

    #[test]
    fn single_qubit_trial_matches_closed_form() {
        let p = Theorem2Params {
            d_min: 2,
            d_max: 2,
            trials: 1,
            seed: 0,
            tol: 1e-6,
        };
        let rows = run_trials(&p, &SolverConfig::default(), 1).unwrap();
        assert_eq!(rows.len(), 1);
        let f = random_family_state(2, rows[0].seed).unwrap();
        let check = rows[0].outcome.as_ref().unwrap();
        assert!((check.numeric - c_tr_qubit(&f.to_density()).unwrap()).abs() <= 1e-6);
        assert!(rows[0].passed(1e-6));
    }

    #[test]
    fn argument_validation() {
        let ok = Theorem2Params {
            d_min: 2,
            d_max: 8,
            trials: 1,
            seed: 0,
            tol: 1e-6,
        };
        assert!(validate(&ok).is_ok());
        for bad in [
            Theorem2Params { trials: 0, ..ok },
            Theorem2Params { d_min: 1, ..ok },
            Theorem2Params { d_max: 9, ..ok },
            Theorem2Params {
                d_min: 5,
                d_max: 4,
                ..ok
            },
        ] {
            assert_eq!(validate(&bad).unwrap_err().exit_code(), exit::USAGE);
        }
    }

    #[test]
    fn convergence_failures_are_recorded_not_raised() {
        let p = Theorem2Params {
            d_min: 4,
            d_max: 4,
            trials: 2,
            seed: 3,
            tol: 1e-6,
        };
        let starved = SolverConfig {
            max_iters: 5,
            restarts: 1,
            ..Default::default()
        };
        let rows = run_trials(&p, &starved, 1).unwrap();
        let report = table(&rows, p.tol);
        assert!(rows.iter().all(|r| !r.passed(p.tol)));
        assert!(report.body().lines().skip(1).all(|l| l.ends_with(",convergence_error")));
    }
}

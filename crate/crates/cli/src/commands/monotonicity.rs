use coherence::channels::{check_c2b_family, random_sio_instrument, C2bCheck};
use coherence::states::random_family_state;

use crate::args::{KrausPolicy, MonotonicityArgs};
use crate::error::{exit, CliError, CliResult};
use crate::report::{emit, fmt_f64, CsvReport, RunManifest};
use crate::trials::{companion_seed, ordered_map, trial_seed};

use super::{check_dimension_range, error_status, summary_sink};

pub const MAX_DIM: usize = 8;

pub const HEADER: [&str; 10] = [
    "d", "trial", "seed", "a", "n_kraus", "avg", "d_abs_a", "ctr", "holds", "status",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityParams {
    pub d_min: usize,
    pub d_max: usize,
    pub trials: usize,
    pub n_kraus: KrausPolicy,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct MonotonicityRow {
    pub d: usize,
    pub trial: usize,
    pub seed: u64,
    pub a: Option<f64>,
    pub n_kraus: usize,
    pub outcome: Result<C2bCheck, coherence::Error>,
}

impl MonotonicityRow {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Ok(check) if check.holds)
    }

    fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let check = self.outcome.as_ref().ok();
        let status = match &self.outcome {
            Ok(c) if c.holds => "ok",
            Ok(_) => "violated",
            Err(e) => error_status(e),
        };
        vec![
            self.d.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            opt(self.a),
            self.n_kraus.to_string(),
            opt(check.map(|c| c.avg)),
            opt(check.map(|c| c.bound_da)),
            opt(check.map(|c| c.ctr)),
            check.map(|c| c.holds.to_string()).unwrap_or_else(|| "false".into()),
            status.to_string(),
        ]
    }
}

/// Operator count for one trial. The automatic policy draws uniformly from
/// `[ceil(d/2), d + 2]`, the smallest count that can cover all columns up to
/// a few spare operators.
pub fn kraus_count(policy: KrausPolicy, d: usize, seed: u64) -> usize {
    match policy {
        KrausPolicy::Fixed(n) => n,
        KrausPolicy::Auto => {
            let lo = d.div_ceil(2);
            let span = (d + 3 - lo) as u64;
            lo + (companion_seed(companion_seed(seed)) % span) as usize
        }
    }
}

pub fn validate(p: &MonotonicityParams) -> CliResult<()> {
    check_dimension_range(p.d_min, p.d_max, MAX_DIM)?;
    if p.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    Ok(())
}

fn run_one(d: usize, trial: usize, p: &MonotonicityParams) -> MonotonicityRow {
    let seed = trial_seed(p.seed, d, trial);
    let n_kraus = kraus_count(p.n_kraus, d, seed);
    let mut a = None;
    let outcome = random_family_state(d, seed).and_then(|f| {
        a = Some(f.a());
        let inst = random_sio_instrument(d, n_kraus, companion_seed(seed))?;
        check_c2b_family(&f, &inst)
    });
    MonotonicityRow {
        d,
        trial,
        seed,
        a,
        n_kraus,
        outcome,
    }
}

pub fn run_trials(p: &MonotonicityParams, threads: usize) -> CliResult<Vec<MonotonicityRow>> {
    validate(p)?;
    let jobs: Vec<(usize, usize)> = (p.d_min..=p.d_max)
        .flat_map(|d| (0..p.trials).map(move |t| (d, t)))
        .collect();
    ordered_map(&jobs, threads, |&(d, t)| run_one(d, t, p))
}

pub fn table(rows: &[MonotonicityRow]) -> CsvReport {
    let mut report = CsvReport::new(&HEADER);
    for row in rows {
        report.push(row.record());
    }
    report
}

pub fn run(args: &MonotonicityArgs) -> CliResult<i32> {
    let params = MonotonicityParams {
        d_min: args.d_min,
        d_max: args.d_max,
        trials: args.trials,
        n_kraus: args.n_kraus,
        seed: args.common.seed,
    };
    let rows = run_trials(&params, args.common.threads)?;
    let manifest = RunManifest::new("verify-monotonicity", params.seed)
        .with("d_min", params.d_min)
        .with("d_max", params.d_max)
        .with("trials", params.trials)
        .with("n_kraus", params.n_kraus.to_string());
    emit(args.common.out.as_deref(), &table(&rows).render(&manifest))?;

    let failed = rows.iter().filter(|r| !r.passed()).count();
    let max_ratio = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .filter(|c| c.bound_da > 0.0)
        .map(|c| c.avg / c.bound_da)
        .fold(0.0, f64::max);
    summary_sink(
        args.common.out.is_some(),
        &format!(
            "verify-monotonicity: {} trials, {failed} failed, max avg/(d|a|) {max_ratio:.6}",
            rows.len()
        ),
    );
    Ok(if failed == 0 {
        exit::SUCCESS
    } else {
        exit::VERIFICATION_FAILURE
    })
}

use coherence::measures::{measure_ordering_mc, MaxCoherentOrdering};

use crate::args::OrderingArgs;
use crate::error::{exit, CliError, CliResult};
use crate::report::{emit, fmt_f64, CsvReport, RunManifest};

use super::summary_sink;

pub const HEADER: [&str; 5] = ["d", "ctr", "cr", "cl1", "ordered"];

pub fn rows(d_max: usize) -> CliResult<Vec<MaxCoherentOrdering>> {
    if d_max < 2 {
        return Err(CliError::Usage(format!("--d-max must be at least 2, got {d_max}")));
    }
    Ok((2..=d_max).map(|d| measure_ordering_mc(d).expect("d >= 2")).collect())
}

pub fn table(rows: &[MaxCoherentOrdering]) -> CsvReport {
    let mut report = CsvReport::new(&HEADER);
    for r in rows {
        report.push(vec![
            r.d.to_string(),
            fmt_f64(r.ctr),
            fmt_f64(r.cr),
            fmt_f64(r.cl1),
            r.ordered.to_string(),
        ]);
    }
    report
}

pub fn run(args: &OrderingArgs) -> CliResult<i32> {
    let rows = rows(args.d_max)?;
    let manifest = RunManifest::new("ordering", args.common.seed).with("d_max", args.d_max);
    emit(args.common.out.as_deref(), &table(&rows).render(&manifest))?;
    let unordered = rows.iter().filter(|r| !r.ordered).count();
    summary_sink(
        args.common.out.is_some(),
        &format!("ordering: d = 2..{}, {unordered} rows out of order", args.d_max),
    );
    Ok(if unordered == 0 {
        exit::SUCCESS
    } else {
        exit::VERIFICATION_FAILURE
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tables() {
        let body = table(&rows(2).unwrap()).body();
        assert_eq!(
            body,
            "d,ctr,cr,cl1,ordered\n2,1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0,true\n"
        );
        let r = rows(4).unwrap();
        assert_eq!((r[2].d, r[2].ctr, r[2].cr, r[2].cl1), (4, 1.5, 2.0, 3.0));
        assert!(rows(64).unwrap().iter().all(|r| r.ordered));
        assert_eq!(rows(1).unwrap_err().exit_code(), exit::USAGE);
    }
}

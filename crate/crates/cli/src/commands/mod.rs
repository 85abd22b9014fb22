pub mod measure;
pub mod monotonicity;
pub mod ordering;
pub mod sweep;
pub mod theorem2;

use crate::error::{CliError, CliResult};

fn check_dimension_range(d_min: usize, d_max: usize, limit: usize) -> CliResult<()> {
    if !(2 <= d_min && d_min <= d_max && d_max <= limit) {
        return Err(CliError::Usage(format!(
            "need 2 <= d_min <= d_max <= {limit}, got d_min = {d_min}, d_max = {d_max}"
        )));
    }
    Ok(())
}

/// Short CSV status for a trial that ended in an error.
fn error_status(e: &coherence::Error) -> &'static str {
    use coherence::Error as E;
    match e {
        E::Convergence { .. } | E::EigenConvergence { .. } => "convergence_error",
        E::Generation(_) => "generation_error",
        E::NotStrictlyIncoherent { .. } => "sio_error",
        _ => "error",
    }
}

/// The summary goes to standard output when the report went to a file, and to
/// standard error otherwise so that standard output stays pure CSV.
fn summary_sink(report_in_file: bool, line: &str) {
    if report_in_file {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

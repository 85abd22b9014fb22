//! Closed-form coherence measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{dephase, DensityMatrix, DiagonalState, FamilyState};

/// Eigenvalues below this contribute nothing to the von Neumann entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    L1,
    RelEntropy,
    TraceDistClosed,
    TraceDistNumeric,
}

impl MeasureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::L1 => "l1",
            MeasureKind::RelEntropy => "rel_entropy",
            MeasureKind::TraceDistClosed => "trace_dist_closed",
            MeasureKind::TraceDistNumeric => "trace_dist_numeric",
        }
    }

    pub fn is_trace_distance(self) -> bool {
        matches!(self, MeasureKind::TraceDistClosed | MeasureKind::TraceDistNumeric)
    }
}

impl std::fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(MeasureKind::L1),
            "rel_entropy" => Ok(MeasureKind::RelEntropy),
            "trace_dist_closed" => Ok(MeasureKind::TraceDistClosed),
            "trace_dist_numeric" => Ok(MeasureKind::TraceDistNumeric),
            other => Err(Error::Config(format!("unknown measure {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub residual: f64,
}

/// A measure value, plus the minimizing incoherent state for trace-distance measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub measure: MeasureKind,
    pub value: f64,
    pub argmin: Option<DiagonalState>,
    pub diagnostics: Option<SolverDiagnostics>,
}

impl MeasureReport {
    pub fn scalar(measure: MeasureKind, value: f64) -> Self {
        debug_assert!(!measure.is_trace_distance());
        Self {
            measure,
            value,
            argmin: None,
            diagnostics: None,
        }
    }

    pub fn to_json(&self) -> String {
        crate::json::to_json(self).expect("report serializes")
    }
}

/// Sum of off-diagonal magnitudes.
pub fn c_l1(rho: &DensityMatrix) -> f64 {
    let n = rho.dim();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += rho[(i, j)].norm();
            }
        }
    }
    total
}

fn entropy_bits(spectrum: impl IntoIterator<Item = f64>) -> f64 {
    // Summation order is fixed (descending) so that equal spectra give bitwise-equal entropies.
    let mut terms: Vec<f64> = spectrum.into_iter().filter(|&l| l >= ENTROPY_CUTOFF).collect();
    terms.sort_by(|a, b| b.partial_cmp(a).expect("finite spectrum"));
    terms.into_iter().map(|l| -l * l.log2()).sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_bits(rho.hermitian().eigenvalues()?))
}

/// `S(diag ρ) − S(ρ)` in bits.
pub fn c_rel_entropy(rho: &DensityMatrix) -> Result<f64> {
    let dephased = entropy_bits(dephase(rho).p().iter().copied());
    Ok((dephased - von_neumann_entropy(rho)?).max(0.0))
}

/// Trace-distance coherence of a constant-off-diagonal state: `2(d−1)|a|`,
/// attained at the dephased state.
pub fn c_tr_family_closed(f: &FamilyState) -> MeasureReport {
    MeasureReport {
        measure: MeasureKind::TraceDistClosed,
        value: 2.0 * (f.dim() as f64 - 1.0) * f.a().abs(),
        argmin: Some(DiagonalState::new_unchecked(f.x().to_vec())),
        diagnostics: None,
    }
}

/// Trace-distance coherence of a qubit, `2|ρ01|`.
pub fn c_tr_qubit(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::Dimension(format!(
            "qubit closed form needs dim 2, got {}",
            rho.dim()
        )));
    }
    Ok(2.0 * rho[(0, 1)].norm())
}

/// [`c_tr_qubit`] packaged with its minimizer, the dephased state.
pub fn c_tr_qubit_report(rho: &DensityMatrix) -> Result<MeasureReport> {
    Ok(MeasureReport {
        measure: MeasureKind::TraceDistClosed,
        value: c_tr_qubit(rho)?,
        argmin: Some(dephase(rho)),
        diagnostics: None,
    })
}

/// The three measures evaluated on the maximally coherent state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxCoherentOrdering {
    pub d: usize,
    pub ctr: f64,
    pub cr: f64,
    pub cl1: f64,
    pub ordered: bool,
}

/// `(2(d−1)/d, log2 d, d−1)` with the flag `ctr ≤ cr ≤ cl1`.
pub fn measure_ordering_mc(d: usize) -> Result<MaxCoherentOrdering> {
    if d < 2 {
        return Err(Error::Dimension(format!("ordering needs d >= 2, got {d}")));
    }
    let df = d as f64;
    let ctr = 2.0 * (df - 1.0) / df;
    let cr = df.log2();
    let cl1 = df - 1.0;
    Ok(MaxCoherentOrdering {
        d,
        ctr,
        cr,
        cl1,
        ordered: ctr <= cr && cr <= cl1,
    })
}

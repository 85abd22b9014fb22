//! Kraus instruments, incoherence predicates, and the monotonicity and
//! convexity checks for the trace-distance coherence measure.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, HermitianMatrix};
use crate::measures::{c_l1, c_rel_entropy, c_tr_qubit};
use crate::solver::{closest_incoherent, SolverConfig};
use crate::states::{
    complex_from_parts, complex_to_parts, sample_flat_dirichlet, seeded_rng, DensityMatrix, FamilyState,
};

/// Entries at or below this magnitude count as zero in the incoherence predicates.
pub const NONZERO_THRESHOLD: f64 = 1e-12;
/// Allowed entrywise deviation of `Σ K†K` from the identity.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Branches with smaller probability carry no post-measurement state.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-12;

const C2B_AVG_SLACK: f64 = 1e-9;
const C2B_CHAIN_SLACK: f64 = 1e-12;
const C3_SLACK: f64 = 1e-9;
const C2A_SLACK: f64 = 1e-6;
const NUMERIC_TRACE_DISTANCE_MAX_DIM: usize = 4;

/// One Kraus operator, `out_dim × in_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausOperator {
    matrix: ComplexMatrix,
}

impl KrausOperator {
    pub fn new(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn from_real(out_dim: usize, in_dim: usize, entries: &[f64]) -> Result<Self> {
        Ok(Self::new(ComplexMatrix::from_real(out_dim, in_dim, entries)?))
    }

    pub fn out_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn in_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    fn nonzero(&self, i: usize, j: usize) -> bool {
        self.matrix[(i, j)].norm() > NONZERO_THRESHOLD
    }

    fn column_nonzeros(&self, j: usize) -> usize {
        (0..self.out_dim()).filter(|&i| self.nonzero(i, j)).count()
    }

    fn row_nonzeros(&self, i: usize) -> usize {
        (0..self.in_dim()).filter(|&j| self.nonzero(i, j)).count()
    }

    /// `K ρ K†`
    fn sandwich(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        &(&self.matrix * rho) * &self.matrix.adjoint()
    }
}

/// At most one nonzero per column, so diagonal states map to diagonal states.
pub fn is_incoherent_kraus(k: &KrausOperator) -> bool {
    (0..k.in_dim()).all(|j| k.column_nonzeros(j) <= 1)
}

/// Incoherent in both directions: at most one nonzero per column and per row.
pub fn is_strictly_incoherent(k: &KrausOperator) -> bool {
    is_incoherent_kraus(k) && (0..k.out_dim()).all(|i| k.row_nonzeros(i) <= 1)
}

/// A nonempty, shape-consistent Kraus family satisfying `Σ K†K = I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstrumentJson", into = "InstrumentJson")]
pub struct Instrument {
    kraus: Vec<KrausOperator>,
}

impl Instrument {
    pub fn kraus(&self) -> &[KrausOperator] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    pub fn out_dim(&self) -> usize {
        self.kraus[0].out_dim()
    }

    pub fn in_dim(&self) -> usize {
        self.kraus[0].in_dim()
    }

    pub fn is_strictly_incoherent(&self) -> bool {
        self.kraus.iter().all(is_strictly_incoherent)
    }

    pub fn is_incoherent(&self) -> bool {
        self.kraus.iter().all(is_incoherent_kraus)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        crate::json::to_json(self).expect("instrument serializes")
    }

    fn check_input(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.in_dim() {
            return Err(Error::Shape(format!(
                "instrument acts on dim {}, state has dim {}",
                self.in_dim(),
                rho.dim()
            )));
        }
        Ok(())
    }
}

/// Validates shapes and the completeness relation.
pub fn validate_instrument(kraus: Vec<KrausOperator>) -> Result<Instrument> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::Shape("instrument has no Kraus operators".into()))?;
    let shape = (first.out_dim(), first.in_dim());
    if let Some(bad) = kraus.iter().find(|k| (k.out_dim(), k.in_dim()) != shape) {
        return Err(Error::Shape(format!(
            "Kraus operators have shapes {}x{} and {}x{}",
            shape.0,
            shape.1,
            bad.out_dim(),
            bad.in_dim()
        )));
    }
    let n = shape.1;
    let mut sum = ComplexMatrix::zeros(n, n);
    for k in &kraus {
        sum = &sum + &(&k.matrix.adjoint() * &k.matrix);
    }
    let deviation = sum.max_abs_diff(&ComplexMatrix::identity(n));
    if deviation > COMPLETENESS_TOL {
        return Err(Error::Completeness { deviation });
    }
    Ok(Instrument { kraus })
}

/// Outcome `n` of a selective measurement: `p_n = tr(K_n ρ K_n†)` and `ρ_n = K_n ρ K_n† / p_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveOutcome {
    pub probability: f64,
    /// Absent when `probability < MIN_BRANCH_PROBABILITY`.
    pub state: Option<DensityMatrix>,
}

pub fn apply_selective(inst: &Instrument, rho: &DensityMatrix) -> Result<Vec<SelectiveOutcome>> {
    inst.check_input(rho)?;
    let outcomes = inst
        .kraus
        .iter()
        .map(|k| {
            let unnormalized = k.sandwich(rho.matrix());
            let probability = unnormalized.trace().re.max(0.0);
            let state = (probability >= MIN_BRANCH_PROBABILITY).then(|| {
                let scaled = unnormalized.scale(Complex64::new(1.0 / probability, 0.0));
                positive_by_construction(scaled)
            });
            SelectiveOutcome { probability, state }
        })
        .collect();
    Ok(outcomes)
}

/// `Λ(ρ) = Σ_n K_n ρ K_n†`.
pub fn apply_channel(inst: &Instrument, rho: &DensityMatrix) -> Result<DensityMatrix> {
    inst.check_input(rho)?;
    let n = inst.out_dim();
    let mut total = ComplexMatrix::zeros(n, n);
    for k in &inst.kraus {
        total = &total + &k.sandwich(rho.matrix());
    }
    Ok(positive_by_construction(total))
}

/// `K ρ K†` sums are PSD exactly; only round-off separates them from Hermitian.
fn positive_by_construction(m: ComplexMatrix) -> DensityMatrix {
    let h = HermitianMatrix::with_tolerance(m, 1e-9).expect("K ρ K† is Hermitian up to round-off");
    DensityMatrix::from_hermitian_unchecked(h)
}

fn random_phase(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>())
}

/// Random `2×d` strictly incoherent instrument with `n_kraus` operators.
///
/// Every column is placed in one (operator, row) slot of a seeded random
/// matching; leftover slots are either left empty or host a further column
/// not yet present in that operator. Each column's squared magnitudes are a
/// flat Dirichlet split over its slots, with independent random phases.
pub fn random_sio_instrument(d: usize, n_kraus: usize, seed: u64) -> Result<Instrument> {
    const OUT_DIM: usize = 2;
    if d < 2 {
        return Err(Error::Dimension(format!("instrument needs d >= 2, got {d}")));
    }
    if n_kraus == 0 || OUT_DIM * n_kraus < d {
        return Err(Error::Generation(format!(
            "{n_kraus} operators with {OUT_DIM} rows cannot host {d} columns"
        )));
    }
    let mut rng = seeded_rng(seed);

    let mut slots: Vec<(usize, usize)> = (0..n_kraus)
        .flat_map(|op| (0..OUT_DIM).map(move |row| (op, row)))
        .collect();
    slots.shuffle(&mut rng);

    // placement[j] lists the (operator, row) slots that carry column j.
    let mut placement: Vec<Vec<(usize, usize)>> = vec![Vec::new(); d];
    for (j, &slot) in slots.iter().take(d).enumerate() {
        placement[j].push(slot);
    }
    for &(op, row) in &slots[d..] {
        if rng.random_bool(0.5) {
            continue;
        }
        let free: Vec<usize> = (0..d).filter(|&j| placement[j].iter().all(|&(o, _)| o != op)).collect();
        if let Some(&j) = free.get(rng.random_range(0..free.len().max(1))) {
            placement[j].push((op, row));
        }
    }

    let mut mats = vec![ComplexMatrix::zeros(OUT_DIM, d); n_kraus];
    for (j, slots) in placement.iter().enumerate() {
        let weights = sample_flat_dirichlet(&mut rng, slots.len());
        for (&(op, row), w) in slots.iter().zip(weights) {
            mats[op][(row, j)] = random_phase(&mut rng) * w.sqrt();
        }
    }
    let inst = validate_instrument(mats.into_iter().map(KrausOperator::new).collect())?;
    debug_assert!(inst.is_strictly_incoherent());
    Ok(inst)
}

/// Random square incoherent instrument that is generally not strictly incoherent.
///
/// A weight `q` goes to `d` operators that share one random (typically
/// non-injective) map of columns to rows, with discrete-Fourier amplitudes so
/// their cross terms cancel in `Σ K†K`. The remaining `1 − q` goes to
/// `n_perm` operators that are random permutations with Dirichlet-split
/// column weights.
pub fn random_incoherent_instrument(d: usize, n_perm: usize, seed: u64) -> Result<Instrument> {
    if d < 2 {
        return Err(Error::Dimension(format!("instrument needs d >= 2, got {d}")));
    }
    if n_perm == 0 {
        return Err(Error::Generation("need at least one permutation operator".into()));
    }
    let mut rng = seeded_rng(seed);
    let q: f64 = rng.random();
    let mut ops = Vec::with_capacity(d + n_perm);

    let target: Vec<usize> = (0..d).map(|_| rng.random_range(0..d)).collect();
    let phases: Vec<Complex64> = (0..d).map(|_| random_phase(&mut rng)).collect();
    for n in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            let fourier = Complex64::from_polar(1.0, 2.0 * PI * (n * j) as f64 / d as f64);
            m[(target[j], j)] = fourier * phases[j] * (q / d as f64).sqrt();
        }
        ops.push(m);
    }

    let column_weights: Vec<Vec<f64>> = (0..d).map(|_| sample_flat_dirichlet(&mut rng, n_perm)).collect();
    for n in 0..n_perm {
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(&mut rng);
        let mut m = ComplexMatrix::zeros(d, d);
        for (j, (&row, weights)) in perm.iter().zip(&column_weights).enumerate() {
            m[(row, j)] = random_phase(&mut rng) * ((1.0 - q) * weights[n]).sqrt();
        }
        ops.push(m);
    }
    let inst = validate_instrument(ops.into_iter().map(KrausOperator::new).collect())?;
    debug_assert!(inst.is_incoherent());
    Ok(inst)
}

/// `Σ_n p_n C_tr(ρ_n)` for a qubit-output instrument, zero-probability branches skipped.
pub fn avg_coherence_selective(inst: &Instrument, rho: &DensityMatrix) -> Result<f64> {
    if inst.out_dim() != 2 {
        return Err(Error::Dimension(format!(
            "selective average needs qubit outputs, got out_dim {}",
            inst.out_dim()
        )));
    }
    let mut total = 0.0;
    for outcome in apply_selective(inst, rho)? {
        if let Some(state) = &outcome.state {
            total += outcome.probability * c_tr_qubit(state)?;
        }
    }
    Ok(total)
}

/// The chain `avg ≤ d|a| ≤ 2(d−1)|a|` for one family state and one instrument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C2bCheck {
    pub avg: f64,
    pub bound_da: f64,
    pub ctr: f64,
    pub holds: bool,
}

pub fn check_c2b_family(f: &FamilyState, inst: &Instrument) -> Result<C2bCheck> {
    if let Some(index) = inst.kraus.iter().position(|k| !is_strictly_incoherent(k)) {
        return Err(Error::NotStrictlyIncoherent { index });
    }
    let avg = avg_coherence_selective(inst, &f.to_density())?;
    let d = f.dim() as f64;
    let bound_da = d * f.a().abs();
    let ctr = 2.0 * (d - 1.0) * f.a().abs();
    let holds = avg <= bound_da + C2B_AVG_SLACK && bound_da <= ctr + C2B_CHAIN_SLACK;
    Ok(C2bCheck {
        avg,
        bound_da,
        ctr,
        holds,
    })
}

/// Which measure a convexity check evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityMeasure {
    L1,
    RelEntropy,
    TraceDistance,
}

/// Trace-distance coherence: the qubit closed form at d = 2, the numeric solver up to d = 4.
pub fn trace_distance_coherence(rho: &DensityMatrix, cfg: &SolverConfig) -> Result<f64> {
    match rho.dim() {
        2 => c_tr_qubit(rho),
        d if d <= NUMERIC_TRACE_DISTANCE_MAX_DIM => Ok(closest_incoherent(rho, cfg)?.value),
        d => Err(Error::Dimension(format!(
            "numeric trace-distance checks are limited to dim <= {NUMERIC_TRACE_DISTANCE_MAX_DIM}, got {d}"
        ))),
    }
}

fn evaluate(measure: ConvexityMeasure, rho: &DensityMatrix, cfg: &SolverConfig) -> Result<f64> {
    match measure {
        ConvexityMeasure::L1 => Ok(c_l1(rho)),
        ConvexityMeasure::RelEntropy => c_rel_entropy(rho),
        ConvexityMeasure::TraceDistance => trace_distance_coherence(rho, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C3Check {
    /// `Σ p_n C(ρ_n)`
    pub lhs: f64,
    /// `C(Σ p_n ρ_n)`
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_c3_convexity(
    measure: ConvexityMeasure,
    ensemble: &[(f64, DensityMatrix)],
    cfg: &SolverConfig,
) -> Result<C3Check> {
    let (_, first) = ensemble
        .first()
        .ok_or_else(|| Error::Dimension("empty ensemble".into()))?;
    let d = first.dim();
    if ensemble.iter().any(|(_, rho)| rho.dim() != d) {
        return Err(Error::Shape("ensemble members differ in dimension".into()));
    }
    if let Some((w, _)) = ensemble.iter().find(|(w, _)| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidDistribution(format!("weight {w}")));
    }
    let total: f64 = ensemble.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > COMPLETENESS_TOL {
        return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
    }

    let mut lhs = 0.0;
    let mut mixture = ComplexMatrix::zeros(d, d);
    for (w, rho) in ensemble {
        lhs += w * evaluate(measure, rho, cfg)?;
        mixture = &mixture + &rho.matrix().scale(Complex64::new(*w, 0.0));
    }
    let rhs = if ensemble.len() == 1 {
        evaluate(measure, first, cfg)?
    } else {
        evaluate(measure, &positive_by_construction(mixture), cfg)?
    };
    Ok(C3Check {
        lhs,
        rhs,
        holds: lhs >= rhs - C3_SLACK,
    })
}

/// Nonselective monotonicity `C_tr(Λ(ρ)) ≤ C_tr(ρ)` for square incoherent instruments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C2aCheck {
    pub before: f64,
    pub after: f64,
    pub holds: bool,
}

pub fn check_c2a_trace_distance(inst: &Instrument, rho: &DensityMatrix, cfg: &SolverConfig) -> Result<C2aCheck> {
    if let Some(index) = inst.kraus.iter().position(|k| !is_incoherent_kraus(k)) {
        return Err(Error::Precondition(format!("Kraus operator {index} is not incoherent")));
    }
    let before = trace_distance_coherence(rho, cfg)?;
    let after = trace_distance_coherence(&apply_channel(inst, rho)?, cfg)?;
    Ok(C2aCheck {
        before,
        after,
        holds: after <= before + C2A_SLACK,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KrausJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstrumentJson {
    out_dim: usize,
    in_dim: usize,
    kraus: Vec<KrausJson>,
}

impl TryFrom<InstrumentJson> for Instrument {
    type Error = Error;

    fn try_from(raw: InstrumentJson) -> Result<Self> {
        let ops = raw
            .kraus
            .iter()
            .map(|k| complex_from_parts(raw.out_dim, raw.in_dim, &k.re, &k.im).map(KrausOperator::new))
            .collect::<Result<Vec<_>>>()?;
        validate_instrument(ops)
    }
}

impl From<Instrument> for InstrumentJson {
    fn from(inst: Instrument) -> Self {
        Self {
            out_dim: inst.out_dim(),
            in_dim: inst.in_dim(),
            kraus: inst
                .kraus
                .iter()
                .map(|k| {
                    let (re, im) = complex_to_parts(&k.matrix);
                    KrausJson { re, im }
                })
                .collect(),
        }
    }
}

//! Density matrices, the constant-off-diagonal family, incoherent states, and
//! seeded random generators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, HermitianMatrix, DEFAULT_TOL};

/// Allowed deviation of a density matrix trace from 1.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed deviation of a probability vector sum from 1.
pub const SUM_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as positive semidefinite is `-PSD_TOL`.
pub const PSD_TOL: f64 = 1e-10;

const FAMILY_REJECTION_CAP: usize = 1000;
const FAMILY_SHRINK: f64 = 0.9;

/// Deterministic RNG used by every seeded generator in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityMatrixJson", into = "DensityMatrixJson")]
pub struct DensityMatrix {
    inner: HermitianMatrix,
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::from_hermitian(HermitianMatrix::new(m)?)
    }

    pub fn from_hermitian(h: HermitianMatrix) -> Result<Self> {
        let trace: f64 = h.real_diagonal().iter().sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::Normalization { trace });
        }
        let min_eigenvalue = *h.eigenvalues()?.last().expect("matrix has at least one eigenvalue");
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NotAState { min_eigenvalue });
        }
        Ok(Self { inner: h })
    }

    /// For matrices that are states by construction (e.g. `K ρ K†` sums).
    pub(crate) fn from_hermitian_unchecked(h: HermitianMatrix) -> Self {
        Self { inner: h }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.inner
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.inner.matrix()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.inner[(i, j)].norm() <= tol))
    }

    /// Reads a `{"dim", "re", "im"}` document. Malformed JSON is reported as
    /// [`Error::Json`]; a well-formed matrix that is not a state keeps its
    /// specific validation error.
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<DensityMatrixJson>(s)?.try_into()
    }

    pub fn to_json(&self) -> String {
        crate::json::to_json(self).expect("density matrix serializes")
    }
}

impl std::ops::Index<(usize, usize)> for DensityMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

/// `d×d` state with populations `x` on the diagonal and the same real value
/// `a` in every off-diagonal slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyStateJson", into = "FamilyStateJson")]
pub struct FamilyState {
    x: Vec<f64>,
    a: f64,
}

impl FamilyState {
    pub fn new(x: Vec<f64>, a: f64) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::Dimension(format!("family state needs d >= 2, got {}", x.len())));
        }
        if !a.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let trace: f64 = x.iter().sum();
        if (trace - 1.0).abs() > SUM_TOL {
            return Err(Error::Normalization { trace });
        }
        let candidate = Self { x, a };
        let min_eigenvalue = candidate.min_eigenvalue()?;
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NotAState { min_eigenvalue });
        }
        Ok(candidate)
    }

    /// Uniform populations `1/d` with off-diagonal value `a`.
    pub fn uniform(d: usize, a: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Dimension(format!("family state needs d >= 2, got {d}")));
        }
        Self::new(vec![1.0 / d as f64; d], a)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// The assembled matrix, exactly `x` on the diagonal and `a` elsewhere.
    pub fn hermitian(&self) -> HermitianMatrix {
        let d = self.dim();
        let entries: Vec<f64> = (0..d * d)
            .map(|k| if k / d == k % d { self.x[k / d] } else { self.a })
            .collect();
        HermitianMatrix::from_real(d, &entries).expect("real symmetric by construction")
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            inner: self.hermitian(),
        }
    }

    fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*self.hermitian().eigenvalues()?.last().expect("d >= 2"))
    }

    /// Recognizes a density matrix with one common real off-diagonal value.
    pub fn from_density(rho: &DensityMatrix, tol: f64) -> Option<Self> {
        let d = rho.dim();
        if d < 2 {
            return None;
        }
        let a = rho[(0, 1)].re;
        let matches = (0..d).all(|i| (0..d).all(|j| i == j || (rho[(i, j)] - Complex64::new(a, 0.0)).norm() <= tol));
        if !matches {
            return None;
        }
        let mut x = rho.hermitian().real_diagonal();
        let sum: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v /= sum);
        Self::new(x, a).ok()
    }
}

/// Checked constructor matching the family's defining constraints.
pub fn make_family_state(x: Vec<f64>, a: f64) -> Result<FamilyState> {
    FamilyState::new(x, a)
}

/// Any of the accepted state file layouts.
#[derive(Debug, Clone, PartialEq)]
pub enum StateDocument {
    Density(DensityMatrix),
    Family(FamilyState),
    Diagonal(DiagonalState),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawStateDocument {
    Density(DensityMatrixJson),
    Family(FamilyStateJson),
    Diagonal(DiagonalStateJson),
}

impl StateDocument {
    /// Parses `{"dim", "re", "im"}`, `{"x", "a"}` or `{"p"}`. Documents matching
    /// none of the layouts give [`Error::Json`]; layouts whose content violates
    /// a state invariant give the corresponding validation error.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawStateDocument = serde_json::from_str(s)
            .map_err(|e| Error::Json(format!("expected {{dim, re, im}}, {{x, a}} or {{p}}: {e}")))?;
        Ok(match raw {
            RawStateDocument::Density(raw) => StateDocument::Density(raw.try_into()?),
            RawStateDocument::Family(raw) => StateDocument::Family(raw.try_into()?),
            RawStateDocument::Diagonal(raw) => StateDocument::Diagonal(raw.try_into()?),
        })
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            StateDocument::Density(rho) => rho.clone(),
            StateDocument::Family(f) => f.to_density(),
            StateDocument::Diagonal(p) => p.to_density(),
        }
    }
}

/// Probability vector read as the incoherent state `Σ p_i |i⟩⟨i|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiagonalStateJson", into = "DiagonalStateJson")]
pub struct DiagonalState {
    p: Vec<f64>,
}

impl DiagonalState {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Dimension("empty probability vector".into()));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(neg) = p.iter().find(|&&v| v < 0.0) {
            return Err(Error::InvalidDistribution(format!("negative entry {neg}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self { p })
    }

    /// Skips validation; callers guarantee the simplex invariants.
    pub(crate) fn new_unchecked(p: Vec<f64>) -> Self {
        debug_assert!(p.iter().all(|&v| v >= 0.0));
        Self { p }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            inner: HermitianMatrix::from_diagonal(&self.p),
        }
    }

    /// Largest coordinate difference to `other`.
    pub fn linf_distance(&self, other: &[f64]) -> f64 {
        assert_eq!(self.dim(), other.len());
        self.p.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// The pure state with every amplitude `1/√d`, as a density matrix.
pub fn maximally_coherent(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::Dimension(format!(
            "maximally coherent state needs d >= 2, got {d}"
        )));
    }
    let v = 1.0 / d as f64;
    Ok(DensityMatrix {
        inner: HermitianMatrix::from_real(d, &vec![v; d * d]).expect("constant matrix is symmetric"),
    })
}

/// Deletes every off-diagonal element.
///
/// Diagonal entries of a valid state are nonnegative up to [`PSD_TOL`]; such
/// round-off negatives are clamped to zero.
pub fn dephase(rho: &DensityMatrix) -> DiagonalState {
    DiagonalState::new_unchecked(
        rho.hermitian()
            .real_diagonal()
            .into_iter()
            .map(|v| v.max(0.0))
            .collect(),
    )
}

/// `G·G† / tr(G·G†)` with `G` a matrix of seeded standard complex Gaussians.
pub fn random_density_matrix(d: usize, seed: u64) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::Dimension(format!("random state needs d >= 2, got {d}")));
    }
    let mut rng = seeded_rng(seed);
    let g = ComplexMatrix::new(
        d,
        d,
        (0..d * d)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect(),
    )?;
    let gram = &g * &g.adjoint();
    let trace = gram.trace().re;
    DensityMatrix::new(gram.scale(Complex64::new(1.0 / trace, 0.0)))
}

/// Flat Dirichlet sample of length `n`.
pub(crate) fn sample_flat_dirichlet(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|v| v / total).collect()
}

/// Random member of the constant-off-diagonal family.
///
/// Populations follow a flat Dirichlet. The magnitude of `a` starts uniform in
/// `[0, 1)` and shrinks geometrically until the matrix is positive
/// semidefinite; the sign is a fair coin.
pub fn random_family_state(d: usize, seed: u64) -> Result<FamilyState> {
    if d < 2 {
        return Err(Error::Dimension(format!("family state needs d >= 2, got {d}")));
    }
    let mut rng = seeded_rng(seed);
    let mut x = sample_flat_dirichlet(&mut rng, d);
    // Push any rounding residue onto the largest entry so the sum is 1 to the last bit available.
    let residue = 1.0 - x.iter().sum::<f64>();
    let largest = (0..d)
        .max_by(|&i, &j| x[i].partial_cmp(&x[j]).expect("finite"))
        .expect("d >= 2");
    x[largest] += residue;

    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut magnitude: f64 = rng.random();
    for _ in 0..FAMILY_REJECTION_CAP {
        let candidate = FamilyState {
            x: x.clone(),
            a: sign * magnitude,
        };
        if candidate.min_eigenvalue()? >= -PSD_TOL {
            return Ok(candidate);
        }
        magnitude *= FAMILY_SHRINK;
    }
    Err(Error::Generation(format!(
        "no PSD off-diagonal value found within {FAMILY_REJECTION_CAP} attempts (d = {d}, seed = {seed})"
    )))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityMatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(raw: DensityMatrixJson) -> Result<Self> {
        let m = complex_from_parts(raw.dim, raw.dim, &raw.re, &raw.im)?;
        DensityMatrix::new(m)
    }
}

impl From<DensityMatrix> for DensityMatrixJson {
    fn from(rho: DensityMatrix) -> Self {
        let (re, im) = complex_to_parts(rho.matrix());
        Self { dim: rho.dim(), re, im }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyStateJson {
    x: Vec<f64>,
    a: f64,
}

impl TryFrom<FamilyStateJson> for FamilyState {
    type Error = Error;

    fn try_from(raw: FamilyStateJson) -> Result<Self> {
        FamilyState::new(raw.x, raw.a)
    }
}

impl From<FamilyState> for FamilyStateJson {
    fn from(f: FamilyState) -> Self {
        Self { x: f.x, a: f.a }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagonalStateJson {
    p: Vec<f64>,
}

impl TryFrom<DiagonalStateJson> for DiagonalState {
    type Error = Error;

    fn try_from(raw: DiagonalStateJson) -> Result<Self> {
        DiagonalState::new(raw.p)
    }
}

impl From<DiagonalState> for DiagonalStateJson {
    fn from(s: DiagonalState) -> Self {
        Self { p: s.p }
    }
}

/// Assembles a matrix from separate real and imaginary row lists.
pub fn complex_from_parts(rows: usize, cols: usize, re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<ComplexMatrix> {
    let shape_ok = |parts: &[Vec<f64>]| parts.len() == rows && parts.iter().all(|r| r.len() == cols);
    if !shape_ok(re) || !shape_ok(im) {
        return Err(Error::Shape(format!(
            "re/im arrays do not describe a {rows}x{cols} matrix"
        )));
    }
    let data = re
        .iter()
        .flatten()
        .zip(im.iter().flatten())
        .map(|(&r, &i)| Complex64::new(r, i))
        .collect();
    ComplexMatrix::new(rows, cols, data)
}

/// Splits a matrix into real and imaginary row lists.
pub fn complex_to_parts(m: &ComplexMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = (0..m.rows()).map(|i| m.row(i).iter().map(|z| z.re).collect()).collect();
    let im = (0..m.rows()).map(|i| m.row(i).iter().map(|z| z.im).collect()).collect();
    (re, im)
}

/// Entrywise comparison of two states with the default absolute tolerance.
pub fn approx_eq(a: &DensityMatrix, b: &DensityMatrix) -> bool {
    a.dim() == b.dim() && a.matrix().max_abs_diff(b.matrix()) <= DEFAULT_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximally_coherent_qubit_is_family_member() {
        let f = make_family_state(vec![0.5, 0.5], 0.5).unwrap();
        let rho = maximally_coherent(2).unwrap();
        assert_eq!(f.to_density(), rho);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(rho[(i, j)], Complex64::new(0.5, 0.0));
            }
        }
    }

    #[test]
    fn uniform_family_beyond_psd_boundary_is_rejected() {
        let third = 1.0 / 3.0;
        match make_family_state(vec![third, third, third], 0.5) {
            Err(Error::NotAState { min_eigenvalue }) => {
                assert!((min_eigenvalue - (third - 0.5)).abs() < 1e-12)
            }
            other => panic!("expected NotAState, got {other:?}"),
        }
    }

    #[test]
    fn diagonal_family_member_is_incoherent() {
        let f = make_family_state(vec![0.5, 0.3, 0.2], 0.0).unwrap();
        assert!(f.to_density().is_diagonal(0.0));
    }

    #[test]
    fn family_constructor_errors() {
        assert!(matches!(make_family_state(vec![1.0], 0.0), Err(Error::Dimension(_))));
        assert!(matches!(
            make_family_state(vec![0.5, 0.6], 0.0),
            Err(Error::Normalization { .. })
        ));
        assert!(matches!(
            make_family_state(vec![0.5, 0.5], f64::NAN),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn maximally_coherent_examples() {
        assert!(matches!(maximally_coherent(1), Err(Error::Dimension(_))));
        let rho3 = maximally_coherent(3).unwrap();
        assert!(rho3
            .matrix()
            .as_slice()
            .iter()
            .all(|z| z.re == 1.0 / 3.0 && z.im == 0.0));
        let rho4 = maximally_coherent(4).unwrap();
        let f4 = FamilyState::uniform(4, 0.25).unwrap();
        assert!(rho4.matrix().max_abs_diff(f4.to_density().matrix()) == 0.0);
        // rank one
        let eig = rho4.hermitian().eigenvalues().unwrap();
        assert!((eig[0] - 1.0).abs() < 1e-14);
        assert!(eig[1..].iter().all(|l| l.abs() < 1e-14));
    }

    #[test]
    fn dephase_examples() {
        let third = 1.0 / 3.0;
        assert_eq!(dephase(&maximally_coherent(3).unwrap()).p(), &[third, third, third]);
        let f = make_family_state(vec![0.5, 0.3, 0.2], 0.1).unwrap();
        assert_eq!(dephase(&f.to_density()).p(), &[0.5, 0.3, 0.2]);
        let diag = DiagonalState::new(vec![0.6, 0.4]).unwrap().to_density();
        assert_eq!(dephase(&diag).p(), &[0.6, 0.4]);
    }

    #[test]
    fn random_density_matrix_examples() {
        assert_eq!(
            random_density_matrix(2, 7).unwrap(),
            random_density_matrix(2, 7).unwrap()
        );
        let rho = random_density_matrix(5, 1).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let rho = random_density_matrix(3, 42).unwrap();
        let min = *rho.hermitian().eigenvalues().unwrap().last().unwrap();
        assert!(min >= 0.0, "min eigenvalue {min}");
    }

    #[test]
    fn random_family_state_is_deterministic_and_valid() {
        let f = random_family_state(3, 9).unwrap();
        assert_eq!(f, random_family_state(3, 9).unwrap());
        assert!((f.x().iter().sum::<f64>() - 1.0).abs() < SUM_TOL);
        assert!(FamilyState::new(f.x().to_vec(), f.a()).is_ok());
    }

    #[test]
    fn random_family_state_never_exhausts_rejection_at_d4() {
        for seed in 0..1000 {
            random_family_state(4, seed).unwrap();
        }
    }

    #[test]
    fn diagonal_state_validation() {
        assert!(DiagonalState::new(vec![0.5, 0.5]).is_ok());
        assert!(matches!(
            DiagonalState::new(vec![1.2, -0.2]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            DiagonalState::new(vec![0.5, 0.4]),
            Err(Error::InvalidDistribution(_))
        ));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let rho = random_density_matrix(3, 5).unwrap();
        let back = DensityMatrix::from_json(&rho.to_json()).unwrap();
        assert_eq!(rho, back);

        let f: FamilyState = serde_json::from_str(r#"{"x": [0.5, 0.3, 0.2], "a": 0.1}"#).unwrap();
        assert_eq!(f.a(), 0.1);
        let bad = serde_json::from_str::<FamilyState>(r#"{"x": [0.5, 0.6], "a": 0.0}"#);
        assert!(bad.is_err());

        let d: DiagonalState = serde_json::from_str(r#"{"p": [0.25, 0.75]}"#).unwrap();
        assert_eq!(
            crate::json::to_json(&d).unwrap(),
            r#"{"p":[2.5000000000000000e-1,7.5000000000000000e-1]}"#
        );

        let ragged = r#"{"dim": 2, "re": [[1.0, 0.0], [0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}"#;
        assert!(DensityMatrix::from_json(ragged).is_err());
    }

    #[test]
    fn family_recognized_from_density() {
        let f = make_family_state(vec![0.5, 0.3, 0.2], -0.05).unwrap();
        let back = FamilyState::from_density(&f.to_density(), 1e-12).unwrap();
        assert_eq!(back, f);
        assert!(FamilyState::from_density(&random_density_matrix(3, 1).unwrap(), 1e-12).is_none());
    }

    #[test]
    fn state_documents_keep_error_categories() {
        let fam = StateDocument::from_json(r#"{"x": [0.5, 0.3, 0.2], "a": 0.1}"#).unwrap();
        assert!(matches!(fam, StateDocument::Family(_)));
        let diag = StateDocument::from_json(r#"{"p": [0.25, 0.75]}"#).unwrap();
        assert!(diag.to_density().is_diagonal(0.0));
        let rho = maximally_coherent(3).unwrap();
        assert_eq!(StateDocument::from_json(&rho.to_json()).unwrap().to_density(), rho);

        assert!(matches!(StateDocument::from_json("{not json"), Err(Error::Json(_))));
        assert!(matches!(StateDocument::from_json(r#"{"q": 1}"#), Err(Error::Json(_))));
        assert!(matches!(
            StateDocument::from_json(r#"{"x": [0.5, 0.6], "a": 0.0}"#),
            Err(Error::Normalization { .. })
        ));
        let unnormalized = r#"{"dim": 2, "re": [[1.0, 0.0], [0.0, 1.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}"#;
        assert!(matches!(
            StateDocument::from_json(unnormalized),
            Err(Error::Normalization { .. })
        ));
        assert!(matches!(
            DensityMatrix::from_json(unnormalized),
            Err(Error::Normalization { .. })
        ));
    }
}

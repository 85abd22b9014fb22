use num_complex::Complex64;

use super::{ComplexMatrix, HermitianMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Eigenvalues (descending) and the unitary whose columns are the matching eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// U·diag(λ)·U†
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n)
                    .map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)].conj())
                    .sum();
            }
        }
        out
    }
}

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn eig_hermitian(m: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a = m.matrix().as_slice().to_vec();
    let mut v = ComplexMatrix::identity(n).as_slice().to_vec();
    jacobi(n, &mut a, Some(&mut v))?;

    let raw: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let order = descending_order(&raw);
    let values = order.iter().map(|&k| raw[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[row * n + k];
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues only, descending. Skips the eigenvector accumulation.
pub fn eigenvalues_hermitian(m: &HermitianMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    let mut a = m.matrix().as_slice().to_vec();
    jacobi(n, &mut a, None)?;
    let mut values: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    super::sort_descending(&mut values);
    Ok(values)
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).expect("finite eigenvalues"));
    idx
}

fn off_diagonal_norm(n: usize, a: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(n: usize, a: &mut [Complex64], mut v: Option<&mut Vec<Complex64>>) -> Result<()> {
    let frob = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n == 1 || frob == 0.0 {
        return Ok(());
    }
    let threshold = f64::EPSILON * frob;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(n, a) <= threshold {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = apq.norm();
                if g <= f64::MIN_POSITIVE {
                    continue;
                }
                // Phase-rotate so the (p, q) entry is real, then apply a real rotation.
                let phase_conj = (apq / g).conj();
                let alpha = a[p * n + p].re;
                let beta = a[q * n + q].re;
                let tau = (beta - alpha) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // A <- A J, with J = [[c, s], [-s·ē, c·ē]] on the (p, q) block.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * phase_conj * s;
                    a[k * n + q] = akp * s + akq * phase_conj * c;
                }
                // A <- J† A
                let phase = phase_conj.conj();
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * phase * s;
                    a[q * n + k] = apk * s + aqk * phase * c;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;

                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * c - vkq * phase_conj * s;
                        v[k * n + q] = vkp * s + vkq * phase_conj * c;
                    }
                }
            }
        }
    }

    let residual = off_diagonal_norm(n, a);
    if residual <= threshold {
        Ok(())
    } else {
        Err(Error::EigenConvergence { dim: n, residual })
    }
}

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Singular values in descending order, `min(rows, cols)` of them.
///
/// One-sided Jacobi: columns are rotated pairwise until mutually orthogonal,
/// after which their norms are the singular values.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let work = if m.rows() < m.cols() { m.adjoint() } else { m.clone() };
    let (rows, cols) = (work.rows(), work.cols());
    let mut columns: Vec<Vec<Complex64>> = (0..cols).map(|j| (0..rows).map(|i| work[(i, j)]).collect()).collect();

    let mut converged = cols == 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..cols - 1 {
            for q in (p + 1)..cols {
                rotated |= rotate_pair(&mut columns, p, q);
            }
        }
        converged = !rotated;
    }
    if !converged {
        let residual = worst_coupling(&columns);
        return Err(Error::EigenConvergence {
            dim: rows.max(cols),
            residual,
        });
    }

    let mut sigma: Vec<f64> = columns.iter().map(|c| norm_sqr(c).sqrt()).collect();
    super::sort_descending(&mut sigma);
    Ok(sigma)
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn rotate_pair(columns: &mut [Vec<Complex64>], p: usize, q: usize) -> bool {
    let alpha = norm_sqr(&columns[p]);
    let beta = norm_sqr(&columns[q]);
    let gamma = inner(&columns[p], &columns[q]);
    let g = gamma.norm();
    if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
        return false;
    }
    let phase_conj = (gamma / g).conj();
    let zeta = (beta - alpha) / (2.0 * g);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;

    let (head, tail) = columns.split_at_mut(q);
    let (cp, cq) = (&mut head[p], &mut tail[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let b = *y * phase_conj;
        let a = *x;
        *x = a * c - b * s;
        *y = a * s + b * c;
    }
    true
}

fn worst_coupling(columns: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for p in 0..columns.len() {
        for q in (p + 1)..columns.len() {
            let denom = (norm_sqr(&columns[p]) * norm_sqr(&columns[q])).sqrt();
            if denom > 0.0 {
                worst = worst.max(inner(&columns[p], &columns[q]).norm() / denom);
            }
        }
    }
    worst
}

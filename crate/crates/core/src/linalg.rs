//! Dense complex linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{validation, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `|u⟩⟨v|`
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// `|u⟩⟨u|` accumulated with weight `w` into `acc`.
pub fn add_projector(acc: &mut CMatrix, u: &CVector, w: f64) {
    let n = u.len();
    for j in 0..n {
        let uj = u[j].conj() * w;
        if uj == ZERO {
            continue;
        }
        for i in 0..n {
            acc[(i, j)] += u[i] * uj;
        }
    }
}

/// Largest deviation `|A_ij - conj(A_ji)|`.
pub fn hermiticity_error(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Real eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Spectral norm of a Hermitian matrix (largest absolute eigenvalue).
pub fn hermitian_spectral_norm(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a)
        .into_iter()
        .fold(0.0, |m, x| m.max(x.abs()))
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Frobenius norm of `a - b`.
pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Row-major `[[ [re, im], ... ], ...]` form used by the JSON interfaces.
pub fn matrix_to_pairs(a: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..a.nrows())
        .map(|i| {
            (0..a.ncols())
                .map(|j| [a[(i, j)].re, a[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(validation("ragged matrix rows"));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

pub fn vector_to_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_pairs(pairs: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(
        pairs.len(),
        pairs.iter().map(|p| Complex64::new(p[0], p[1])),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.75, 0.0),
        ]));
        assert!((hermitian_spectral_norm(&a) - 0.75).abs() < 1e-15);
        assert!((min_eigenvalue(&a) + 0.75).abs() < 1e-15);
    }

    #[test]
    fn pairs_round_trip() {
        let a = CMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64 - 0.5));
        let back = matrix_from_pairs(&matrix_to_pairs(&a)).unwrap();
        assert_eq!(a, back);
        assert!(matrix_from_pairs(&[vec![[0.0, 0.0]], vec![]]).is_err());
    }

    #[test]
    fn trace_product_matches_product_trace() {
        let a = CMatrix::from_fn(3, 3, |i, j| Complex64::new((i * 3 + j) as f64, 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| Complex64::new(1.0, (i + 2 * j) as f64));
        assert!((trace_product(&a, &b) - trace(&(&a * &b))).norm() < 1e-12);
    }
}

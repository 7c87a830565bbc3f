//! Brute-force full tensor-product representation, used to cross-check the
//! symmetric-coordinate routines.
//!
//! Tensor indices are row-major over copies: copy 0 is the most significant
//! digit of the `d^M`-dimensional index.

use num_complex::Complex64;

use super::{PureState, SymBasis, SymmetricOperator};
use crate::error::{validation, Error, Result};
use crate::linalg::{CMatrix, CVector};

/// Default cap on `d^M` for the oracle.
pub const DEFAULT_TENSOR_CAP: u64 = 4096;
/// Environment variable overriding [`DEFAULT_TENSOR_CAP`].
pub const TENSOR_CAP_ENV: &str = "CQSR_MAX_TENSOR_DIM";

/// The cap from `CQSR_MAX_TENSOR_DIM`, falling back to the default.
pub fn tensor_cap_from_env() -> Result<u64> {
    match std::env::var(TENSOR_CAP_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| {
            validation(format!(
                "{TENSOR_CAP_ENV} must be a positive integer, got {s:?}"
            ))
        }),
        Err(_) => Ok(DEFAULT_TENSOR_CAP),
    }
}

fn tensor_dim(d: usize, copies: usize, cap: u64) -> Result<usize> {
    let dim = (d as u128).checked_pow(copies as u32).unwrap_or(u128::MAX);
    if dim > cap as u128 {
        return Err(Error::SizeLimit {
            what: "tensor dimension d^M",
            value: dim,
            limit: cap.into(),
        });
    }
    Ok(dim as usize)
}

/// Isometry `V: ℋ₊ᴹ → ℋ^{⊗M}` whose columns are the symmetric basis states.
#[derive(Clone, Debug)]
pub struct TensorOracle {
    basis: SymBasis,
    isometry: CMatrix,
}

impl TensorOracle {
    pub fn new(d: usize, copies: usize) -> Result<Self> {
        Self::with_cap(d, copies, DEFAULT_TENSOR_CAP)
    }

    pub fn with_cap(d: usize, copies: usize, cap: u64) -> Result<Self> {
        let n = tensor_dim(d, copies, cap)?;
        let basis = SymBasis::new(d, copies)?;
        let mut isometry = CMatrix::zeros(n, basis.len());
        let mut occ = vec![0u32; d];
        for s in 0..n {
            occ.iter_mut().for_each(|x| *x = 0);
            let mut rest = s;
            for _ in 0..copies {
                occ[rest % d] += 1;
                rest /= d;
            }
            let m = super::Composition {
                entries: occ.clone(),
            };
            let col = basis.index_of(&m).expect("occupation is a composition");
            isometry[(s, col)] = Complex64::new(1.0 / m.multinomial().sqrt(), 0.0);
        }
        Ok(Self { basis, isometry })
    }

    pub fn basis(&self) -> &SymBasis {
        &self.basis
    }

    pub fn isometry(&self) -> &CMatrix {
        &self.isometry
    }

    pub fn tensor_dim(&self) -> usize {
        self.isometry.nrows()
    }

    /// `V A V†`
    pub fn to_tensor(&self, op: &CMatrix) -> CMatrix {
        &self.isometry * op * self.isometry.adjoint()
    }

    /// `V† A V`
    pub fn to_symmetric(&self, op: &CMatrix) -> CMatrix {
        self.isometry.adjoint() * op * &self.isometry
    }

    pub fn vector_to_symmetric(&self, v: &CVector) -> CVector {
        self.isometry.adjoint() * v
    }

    /// `|ψ⟩^{⊗M}` as a `d^M` vector, built by repeated Kronecker products.
    pub fn product_vector(&self, psi: &PureState) -> CVector {
        let mut v = CVector::from_element(1, Complex64::new(1.0, 0.0));
        for _ in 0..self.basis.copies() {
            v = v.kronecker(psi.amplitudes());
        }
        v
    }

    /// Symmetric operator lifted to the full tensor space.
    pub fn lift(&self, op: &SymmetricOperator) -> Result<CMatrix> {
        if op.dimension() != self.basis.dimension() || op.copies() != self.basis.copies() {
            return Err(validation("operator does not match the oracle's (d, M)"));
        }
        Ok(self.to_tensor(op.matrix()))
    }
}

/// Partial trace of a `d^total` operator over its first `total − keep`
/// factors.
pub fn tensor_partial_trace(op: &CMatrix, d: usize, total: usize, keep: usize) -> Result<CMatrix> {
    if keep > total {
        return Err(validation("keep exceeds total copies"));
    }
    let kept = d.pow(keep as u32);
    let traced = d.pow((total - keep) as u32);
    if op.nrows() != kept * traced || op.ncols() != kept * traced {
        return Err(validation("operator size does not match d^total"));
    }
    Ok(CMatrix::from_fn(kept, kept, |i, j| {
        (0..traced).map(|t| op[(t * kept + i, t * kept + j)]).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn single_copy_is_identity_map() {
        let o = TensorOracle::new(2, 1).unwrap();
        assert!(linalg::max_abs_diff(o.isometry(), &CMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn isometry_property() {
        let o = TensorOracle::new(2, 3).unwrap();
        let vtv = o.isometry().adjoint() * o.isometry();
        assert!(linalg::max_abs_diff(&vtv, &CMatrix::identity(4, 4)) < 1e-12);
    }

    #[test]
    fn symmetrizer_for_two_qubits() {
        let o = TensorOracle::new(2, 2).unwrap();
        let p = o.isometry() * o.isometry().adjoint();
        // Symmetrizer (I + SWAP)/2 on two qubits.
        let mut sym = CMatrix::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                sym[(2 * a + b, 2 * a + b)] += Complex64::new(0.5, 0.0);
                sym[(2 * a + b, 2 * b + a)] += Complex64::new(0.5, 0.0);
            }
        }
        assert!(linalg::max_abs_diff(&p, &sym) < 1e-12);
        let ev = linalg::hermitian_eigenvalues(&p);
        let rank = ev.iter().filter(|&&x| x > 0.5).count();
        assert_eq!(rank, 3);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            TensorOracle::new(4, 7),
            Err(Error::SizeLimit { .. })
        ));
        assert!(TensorOracle::with_cap(4, 7, 1 << 14).is_ok());
    }

    #[test]
    fn round_trip_symmetric_tensor_symmetric() {
        let o = TensorOracle::new(3, 2).unwrap();
        let a = CMatrix::from_fn(6, 6, |i, j| {
            Complex64::new((i + j) as f64, i as f64 - j as f64)
        });
        let back = o.to_symmetric(&o.to_tensor(&a));
        assert!(linalg::max_abs_diff(&a, &back) < 1e-12);
    }
}

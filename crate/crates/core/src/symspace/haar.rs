use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{PureState, SymBasis, SymmetricOperator};
use crate::error::Result;
use crate::linalg::{CMatrix, CVector};

/// Haar-random pure state: a normalized vector of i.i.d. standard complex
/// Gaussians.
pub fn haar_random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    loop {
        let v = CVector::from_fn(d, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        // A zero draw has probability zero but would not normalize.
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// `∫ dφ (|φ⟩⟨φ|)^{⊗M} = 𝕀₊ᴹ / d_M⁺`.
pub fn haar_moment(d: usize, copies: usize) -> Result<SymmetricOperator> {
    let basis = SymBasis::new(d, copies)?;
    let n = basis.len();
    SymmetricOperator::new(
        d,
        copies,
        CMatrix::identity(n, n) / Complex64::new(n as f64, 0.0),
    )
}

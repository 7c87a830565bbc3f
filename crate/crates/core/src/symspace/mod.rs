//! The `M`-copy symmetric subspace of a `d`-level system.
//!
//! Basis states `|m⟩` are labelled by occupation vectors (compositions)
//! `m = (m_0, …, m_{d-1})` with `Σ m_i = M`. Every matrix in this crate that
//! lives on the symmetric subspace uses the order produced by
//! [`enumerate_compositions`]: lexicographically descending, so for `d = 2`,
//! `M = 2` the order is `(2,0), (1,1), (0,2)`.

mod embed;
mod haar;
pub mod oracle;

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::linalg::{self, CMatrix, CVector};

pub(crate) use embed::append_level;
pub use embed::{
    embed_product_state, partial_trace_copies, partial_trace_operator, partial_trace_to_single,
    split_symmetric_basis, SplitTerm,
};
pub use haar::{haar_moment, haar_random_state};

/// Tolerance on `| ‖ψ‖ − 1 |` for [`PureState`].
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance for trace, Hermiticity and positivity of density operators.
pub const DENSITY_TOL: f64 = 1e-10;
/// Largest symmetric-subspace dimension handled by the dense routines.
pub const MAX_BASIS_DIM: u64 = 2048;

/// Dimension of the `copies`-fold symmetric subspace of a `d`-level system,
/// `C(M + d − 1, M)`. Fails if the result does not fit below `2^63`.
pub fn dim_sym(d: usize, copies: usize) -> Result<u64> {
    if d == 0 {
        return Err(validation("dimension d must be at least 1"));
    }
    let n = (copies + d - 1) as u128;
    let k = copies.min(d - 1) as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (n - k + i) is divisible by i at every step.
        acc = acc.checked_mul(n - k + i).ok_or(Error::SizeLimit {
            what: "symmetric dimension",
            value: u128::MAX,
            limit: 1 << 63,
        })? / i;
        if acc >= 1 << 63 {
            return Err(Error::SizeLimit {
                what: "symmetric dimension",
                value: acc,
                limit: 1 << 63,
            });
        }
    }
    Ok(acc as u64)
}

/// Binomial coefficient as a float; exact for the small arguments used here.
pub(crate) fn binomial_f64(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * f64::from(n - k + i) / f64::from(i))
}

/// Occupation vector labelling a symmetric basis state.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Composition {
    entries: Vec<u32>,
}

impl Composition {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(validation("composition needs at least one level"));
        }
        Ok(Self { entries })
    }

    /// The composition `M·e_level`, i.e. `|level⟩^{⊗M}`.
    pub fn pure(d: usize, level: usize, copies: u32) -> Self {
        let mut entries = vec![0; d];
        entries[level] = copies;
        Self { entries }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    /// Total number of copies, `Σ m_i`.
    pub fn copies(&self) -> u32 {
        self.entries.iter().sum()
    }

    /// `M! / Π m_i!`, the number of tensor strings with this occupation.
    pub fn multinomial(&self) -> f64 {
        let mut total = 0u32;
        let mut acc = 1.0;
        for &m in &self.entries {
            total += m;
            acc *= binomial_f64(total, m);
        }
        acc
    }

    /// `self + e_level`
    pub fn raised(&self, level: usize) -> Self {
        let mut entries = self.entries.clone();
        entries[level] += 1;
        Self { entries }
    }

    /// `self − e_level`, or `None` if that level is empty.
    pub fn lowered(&self, level: usize) -> Option<Self> {
        let mut entries = self.entries.clone();
        entries[level] = entries[level].checked_sub(1)?;
        Some(Self { entries })
    }

    pub(crate) fn add(&self, other: &Composition) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl fmt::Debug for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, m) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}

/// All compositions of `copies` into `d` parts, lexicographically descending.
pub fn enumerate_compositions(d: usize, copies: usize) -> Result<Vec<Composition>> {
    let n = dim_sym(d, copies)?;
    let mut out = Vec::with_capacity(n as usize);
    let mut current = vec![0u32; d];
    fill_compositions(&mut current, 0, copies as u32, &mut out);
    debug_assert_eq!(out.len() as u64, n);
    Ok(out)
}

fn fill_compositions(
    current: &mut Vec<u32>,
    pos: usize,
    remaining: u32,
    out: &mut Vec<Composition>,
) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(Composition {
            entries: current.clone(),
        });
        return;
    }
    for m in (0..=remaining).rev() {
        current[pos] = m;
        fill_compositions(current, pos + 1, remaining - m, out);
    }
    current[pos] = 0;
}

/// Indexed composition basis of one symmetric subspace.
#[derive(Clone, Debug)]
pub struct SymBasis {
    d: usize,
    copies: usize,
    comps: Vec<Composition>,
    index: HashMap<Composition, usize>,
}

impl SymBasis {
    pub fn new(d: usize, copies: usize) -> Result<Self> {
        let n = dim_sym(d, copies)?;
        if n > MAX_BASIS_DIM {
            return Err(Error::SizeLimit {
                what: "symmetric dimension",
                value: n.into(),
                limit: MAX_BASIS_DIM.into(),
            });
        }
        let comps = enumerate_compositions(d, copies)?;
        let index = comps
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        Ok(Self {
            d,
            copies,
            comps,
            index,
        })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// `d_M^+`
    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn compositions(&self) -> &[Composition] {
        &self.comps
    }

    pub fn index_of(&self, m: &Composition) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Coordinates of `|ψ⟩^{⊗M}`: `⟨m|ψ^{⊗M}⟩ = √(M!/Π m_i!) Π a_i^{m_i}`.
    pub fn embed(&self, psi: &PureState) -> Result<CVector> {
        if psi.dimension() != self.d {
            return Err(validation(format!(
                "state dimension {} does not match basis dimension {}",
                psi.dimension(),
                self.d
            )));
        }
        Ok(self.embed_amplitudes(psi.amplitudes()))
    }

    pub(crate) fn embed_amplitudes(&self, a: &CVector) -> CVector {
        CVector::from_iterator(
            self.comps.len(),
            self.comps.iter().map(|m| {
                let mut z = Complex64::new(m.multinomial().sqrt(), 0.0);
                for (amp, &k) in a.iter().zip(m.entries()) {
                    if k > 0 {
                        z *= amp.powu(k);
                    }
                }
                z
            }),
        )
    }

    pub fn identity(&self) -> SymmetricOperator {
        SymmetricOperator {
            d: self.d,
            copies: self.copies,
            matrix: CMatrix::identity(self.len(), self.len()),
        }
    }
}

/// Normalized pure state of one `d`-level system.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Checks `| ‖ψ‖ − 1 | ≤ 1e-12`.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(validation("pure state needs at least one amplitude"));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(validation(format!("state is not normalized (norm {norm})")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(validation("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    /// Computational basis state `|level⟩`.
    pub fn basis(d: usize, level: usize) -> Self {
        let mut a = CVector::zeros(d);
        a[level] = linalg::ONE;
        Self { amplitudes: a }
    }

    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        Self::new(linalg::vector_from_pairs(pairs))
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: linalg::outer(&self.amplitudes, &self.amplitudes),
        }
    }

    pub fn with_global_phase(&self, theta: f64) -> Self {
        Self {
            amplitudes: &self.amplitudes * Complex64::from_polar(1.0, theta),
        }
    }

    /// Applies a unitary; the caller guarantees unitarity.
    pub fn transformed(&self, unitary: &CMatrix) -> Result<Self> {
        Self::new(unitary * &self.amplitudes)
    }
}

/// Operator on the symmetric subspace in the composition basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricOperator {
    d: usize,
    copies: usize,
    matrix: CMatrix,
}

impl SymmetricOperator {
    pub fn new(d: usize, copies: usize, matrix: CMatrix) -> Result<Self> {
        let n = dim_sym(d, copies)? as usize;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(validation(format!(
                "operator is {}x{}, expected {n}x{n} for d = {d}, M = {copies}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { d, copies, matrix })
    }

    /// `|v⟩⟨v|` for a symmetric-coordinate vector `v`.
    pub fn projector(d: usize, copies: usize, v: &CVector) -> Result<Self> {
        Self::new(d, copies, linalg::outer(v, v))
    }

    /// `(|ψ⟩⟨ψ|)^{⊗M}` in symmetric coordinates.
    pub fn product_state(psi: &PureState, copies: usize) -> Result<Self> {
        let basis = SymBasis::new(psi.dimension(), copies)?;
        let v = basis.embed(psi)?;
        Self::projector(psi.dimension(), copies, &v)
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.matrix)
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.matrix)
    }

    pub fn validate_hermitian(&self) -> Result<()> {
        let err = self.hermiticity_error();
        if err > 1e-12 {
            return Err(validation(format!(
                "operator is not Hermitian (deviation {err:e})"
            )));
        }
        Ok(())
    }

    pub fn validate_density(&self) -> Result<()> {
        check_density(&self.matrix)
    }

    /// Spectral norm; assumes the operator is Hermitian.
    pub fn spectral_norm(&self) -> f64 {
        linalg::hermitian_spectral_norm(&self.matrix)
    }
}

fn check_density(m: &CMatrix) -> Result<()> {
    let herm = linalg::hermiticity_error(m);
    if herm > DENSITY_TOL {
        return Err(validation(format!(
            "density operator is not Hermitian (deviation {herm:e})"
        )));
    }
    let tr = linalg::trace(m);
    if (tr - linalg::ONE).norm() > DENSITY_TOL {
        return Err(validation(format!(
            "density operator trace is {tr}, expected 1"
        )));
    }
    let min = linalg::min_eigenvalue(m);
    if min < -DENSITY_TOL {
        return Err(validation(format!(
            "density operator is not positive semidefinite (min eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// Single-system density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(validation("density matrix must be square and nonempty"));
        }
        check_density(&matrix)?;
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// Overlap `Tr[ρ σ]`, the fidelity figure of merit for the protocol.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        linalg::trace_product(&self.matrix, &other.matrix).re
    }
}

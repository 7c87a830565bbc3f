//! Weighted state sets and completely symmetric sets (CSS).
//!
//! A weighted set `{|φ_r⟩, c_r}` is an `M`-copy CSS when its frame operator
//! `Σ_r c_r (|φ_r⟩⟨φ_r|)^{⊗M}` equals `𝕀₊ᴹ / d_M⁺`. The distance from that
//! identity, measured in spectral norm, is the *defect*.

mod nnls;
mod solve;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{validation, Result};
use crate::linalg::{self, CMatrix};
use crate::symspace::oracle::TensorOracle;
use crate::symspace::{
    haar_random_state, partial_trace_operator, PureState, SymBasis, SymmetricOperator,
};

pub use nnls::{nnls, NnlsSolution};
pub use solve::{css_solve, InfeasibilityReport, SolveOptions, SolveOutcome};

/// Default threshold on the defect for declaring a set a CSS.
pub const DEFAULT_CSS_TOL: f64 = 1e-8;
/// Tolerance on `|Σ c_r − 1|`.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;

/// Pure states with nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedStateSet {
    d: usize,
    states: Vec<PureState>,
    weights: Vec<f64>,
}

/// On-disk form: `{"d": 2, "states": [[[re, im], ...], ...], "weights": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedStateSetFile {
    pub d: usize,
    pub states: Vec<Vec<[f64; 2]>>,
    pub weights: Vec<f64>,
}

impl WeightedStateSet {
    pub fn new(d: usize, states: Vec<PureState>, weights: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(validation("a weighted state set needs at least one state"));
        }
        if states.len() != weights.len() {
            return Err(validation(format!(
                "{} states but {} weights",
                states.len(),
                weights.len()
            )));
        }
        if let Some(bad) = states.iter().position(|s| s.dimension() != d) {
            return Err(validation(format!(
                "state {bad} has dimension {}, expected {d}",
                states[bad].dimension()
            )));
        }
        if let Some(bad) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(validation(format!(
                "weight {bad} is negative or not finite"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(validation(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self { d, states, weights })
    }

    /// Equal weights `1/R`.
    pub fn uniform(d: usize, states: Vec<PureState>) -> Result<Self> {
        let r = states.len().max(1);
        Self::new(d, states, vec![1.0 / r as f64; r])
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PureState, f64)> {
        self.states.iter().zip(self.weights.iter().copied())
    }

    /// Same weights, states replaced by `f(state)`.
    pub fn map_states(&self, f: impl Fn(&PureState) -> PureState) -> Result<Self> {
        Self::new(
            self.d,
            self.states.iter().map(f).collect(),
            self.weights.clone(),
        )
    }

    pub fn to_file(&self) -> WeightedStateSetFile {
        WeightedStateSetFile {
            d: self.d,
            states: self
                .states
                .iter()
                .map(|s| linalg::vector_to_pairs(s.amplitudes()))
                .collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn from_file(file: &WeightedStateSetFile) -> Result<Self> {
        let states = file
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                PureState::from_pairs(s).map_err(|e| validation(format!("state {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.d, states, file.weights.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightedStateSetFile =
            serde_json::from_str(text).map_err(|e| crate::Error::Parse {
                offset: crate::protocol::byte_offset(text, e.line(), e.column()),
                message: e.to_string(),
            })?;
        Self::from_file(&file)
    }

    /// SHA-256 (hex) of the canonical JSON serialization.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// Result of a CSS check at one copy number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CssReport {
    pub copies_tested: usize,
    pub defect: f64,
    pub is_css: bool,
    pub tolerance: f64,
}

impl CssReport {
    fn new(copies: usize, defect: f64, tolerance: f64) -> Self {
        Self {
            copies_tested: copies,
            defect,
            is_css: defect <= tolerance,
            tolerance,
        }
    }
}

/// `Σ_r c_r (|φ_r⟩⟨φ_r|)^{⊗M}` in symmetric coordinates.
pub fn frame_operator(set: &WeightedStateSet, copies: usize) -> Result<SymmetricOperator> {
    let basis = SymBasis::new(set.dimension(), copies)?;
    let mut acc = CMatrix::zeros(basis.len(), basis.len());
    for (psi, c) in set.iter() {
        if c == 0.0 {
            continue;
        }
        linalg::add_projector(&mut acc, &basis.embed(psi)?, c);
    }
    SymmetricOperator::new(set.dimension(), copies, acc)
}

/// `frame − 𝕀₊ᴹ / d_M⁺`.
pub fn frame_deviation(set: &WeightedStateSet, copies: usize) -> Result<SymmetricOperator> {
    deviation_from_identity(frame_operator(set, copies)?)
}

fn deviation_from_identity(op: SymmetricOperator) -> Result<SymmetricOperator> {
    let (d, copies) = (op.dimension(), op.copies());
    let mut m = op.into_matrix();
    let n = m.nrows();
    let scale = Complex64::new(1.0 / n as f64, 0.0);
    for i in 0..n {
        m[(i, i)] -= scale;
    }
    SymmetricOperator::new(d, copies, m)
}

/// Spectral-norm distance of the `M`-copy frame operator from `𝕀₊ᴹ/d_M⁺`,
/// judged against [`DEFAULT_CSS_TOL`].
pub fn css_defect(set: &WeightedStateSet, copies: usize) -> Result<CssReport> {
    css_defect_with_tol(set, copies, DEFAULT_CSS_TOL)
}

pub fn css_defect_with_tol(
    set: &WeightedStateSet,
    copies: usize,
    tolerance: f64,
) -> Result<CssReport> {
    if copies == 0 {
        return Err(validation("copy number must be at least 1"));
    }
    let defect = frame_deviation(set, copies)?.spectral_norm();
    Ok(CssReport::new(copies, defect, tolerance))
}

/// The same defect computed on the full `d^M` tensor space: the spectral norm
/// of `Σ_r c_r (|φ_r⟩⟨φ_r|)^{⊗M} − Π₊/d_M⁺` with `Π₊` the symmetrizer.
/// `cap` bounds `d^M`.
pub fn css_defect_tensor(set: &WeightedStateSet, copies: usize, cap: u64) -> Result<f64> {
    if copies == 0 {
        return Err(validation("copy number must be at least 1"));
    }
    let oracle = TensorOracle::with_cap(set.dimension(), copies, cap)?;
    let n = oracle.tensor_dim();
    let mut acc = CMatrix::zeros(n, n);
    for (psi, c) in set.iter() {
        linalg::add_projector(&mut acc, &oracle.product_vector(psi), c);
    }
    let v = oracle.isometry();
    acc -= (v * v.adjoint()) / Complex64::new(oracle.basis().len() as f64, 0.0);
    Ok(linalg::hermitian_spectral_norm(&acc))
}

/// Defects at `M, M−1, …, 1`, obtained by tracing the `M`-copy frame
/// operator down one copy at a time. If the set is an `M`-copy CSS every lower
/// level is one too.
pub fn lemma1_reduce(
    set: &WeightedStateSet,
    copies: usize,
    tolerance: f64,
) -> Result<Vec<CssReport>> {
    if copies == 0 {
        return Err(validation("copy number must be at least 1"));
    }
    let mut frame = frame_operator(set, copies)?;
    let mut out = Vec::with_capacity(copies);
    for level in (1..=copies).rev() {
        if level < frame.copies() {
            frame = partial_trace_operator(&frame, level)?;
        }
        let defect = deviation_from_identity(frame.clone())?.spectral_norm();
        out.push(CssReport::new(level, defect, tolerance));
    }
    Ok(out)
}

/// `count` Haar-random candidate states.
pub fn random_candidate_pool<R: Rng + ?Sized>(
    d: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<PureState>> {
    if count == 0 {
        return Err(validation("candidate pool must contain at least one state"));
    }
    if d == 0 {
        return Err(validation("dimension must be at least 1"));
    }
    Ok((0..count).map(|_| haar_random_state(d, rng)).collect())
}

//! Measure-and-prepare estimation on the symmetric subspace.
//!
//! A POVM `{O_r}` acts on `M` copies; outcome `r` is answered by preparing the
//! product state `|φ_r⟩^{⊗N}`. For a POVM derived from a CSS,
//! `O_r = c_r d_M⁺ (|φ_r⟩⟨φ_r|)^{⊗M}`.

mod fidelity;
mod universality;

use num_complex::Complex64;
use serde::Serialize;

use crate::css::{css_defect, WeightedStateSet, DEFAULT_CSS_TOL};
use crate::error::{validation, Result};
use crate::linalg::{self, CMatrix};
use crate::symspace::{
    partial_trace_to_single, DensityMatrix, PureState, SymBasis, SymmetricOperator, DENSITY_TOL,
};

pub use fidelity::{
    build_f_operator, exact_fidelity, f_operator_by_contraction, f_operator_max_diag_rational,
    mean_fidelity_monte_carlo, mean_fidelity_monte_carlo_partitioned, optimal_fidelity_rational,
    optimal_mean_fidelity, FidelityEstimate, Welford,
};
pub use universality::{
    universality_defect, DeltaProbe, ProbeScan, UniversalityReport, PROBE_SCHEDULE,
};

/// Largest tolerated `‖Σ O_r − 𝕀₊ᴹ‖` for a POVM to be usable.
pub const COMPLETENESS_TOL: f64 = 1e-6;
/// Negative probabilities down to this value are rounding noise.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Povm {
    effects: Vec<SymmetricOperator>,
    prepare_states: Vec<PureState>,
    d: usize,
    copies: usize,
    completeness_error: f64,
}

impl Povm {
    /// Checks shapes and positivity; completeness is measured and stored.
    pub fn new(effects: Vec<SymmetricOperator>, prepare_states: Vec<PureState>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| validation("POVM needs at least one effect"))?;
        let (d, copies) = (first.dimension(), first.copies());
        if effects.len() != prepare_states.len() {
            return Err(validation("one preparation state is needed per effect"));
        }
        if effects
            .iter()
            .any(|e| e.dimension() != d || e.copies() != copies)
            || prepare_states.iter().any(|s| s.dimension() != d)
        {
            return Err(validation("POVM effects and states must share d and M"));
        }
        let n = first.matrix().nrows();
        let mut sum = CMatrix::zeros(n, n);
        for (r, e) in effects.iter().enumerate() {
            if e.hermiticity_error() > DENSITY_TOL {
                return Err(validation(format!("effect {r} is not Hermitian")));
            }
            let min = linalg::min_eigenvalue(e.matrix());
            if min < -DENSITY_TOL {
                return Err(validation(format!(
                    "effect {r} is not positive (min eigenvalue {min:e})"
                )));
            }
            sum += e.matrix();
        }
        let completeness_error = linalg::hermitian_spectral_norm(&(sum - CMatrix::identity(n, n)));
        Ok(Self {
            effects,
            prepare_states,
            d,
            copies,
            completeness_error,
        })
    }

    pub fn effects(&self) -> &[SymmetricOperator] {
        &self.effects
    }

    pub fn prepare_states(&self) -> &[PureState] {
        &self.prepare_states
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// `‖Σ_r O_r − 𝕀₊ᴹ‖` (spectral norm).
    pub fn completeness_error(&self) -> f64 {
        self.completeness_error
    }

    pub fn ensure_complete(&self) -> Result<()> {
        if self.completeness_error > COMPLETENESS_TOL {
            return Err(validation(format!(
                "POVM is incomplete: ‖Σ O_r − I‖ = {:e}",
                self.completeness_error
            )));
        }
        Ok(())
    }

    /// `Tr[O_r (|ψ⟩⟨ψ|)^{⊗M}]` for every outcome.
    pub fn outcome_probabilities(&self, psi: &PureState) -> Result<Vec<f64>> {
        let basis = SymBasis::new(self.d, self.copies)?;
        let v = basis.embed(psi)?;
        let raw = self
            .effects
            .iter()
            .map(|e| v.dotc(&(e.matrix() * &v)).re)
            .collect();
        normalize_probabilities(raw)
    }
}

/// Clamps rounding-level negatives and renormalizes.
pub(crate) fn normalize_probabilities(mut p: Vec<f64>) -> Result<Vec<f64>> {
    for (r, x) in p.iter_mut().enumerate() {
        if *x < 0.0 {
            if *x < -PROBABILITY_CLAMP {
                return Err(validation(format!(
                    "outcome {r} has negative probability {x:e}"
                )));
            }
            *x = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(validation("outcome probabilities vanish"));
    }
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

/// `O_r = c_r d_M⁺ (|φ_r⟩⟨φ_r|)^{⊗M}`; the set must be an `M`-copy CSS.
pub fn povm_from_css(set: &WeightedStateSet, copies: usize) -> Result<Povm> {
    let report = css_defect(set, copies)?;
    if report.defect > DEFAULT_CSS_TOL {
        return Err(validation(format!(
            "set is not a {copies}-copy CSS (defect {:e})",
            report.defect
        )));
    }
    let basis = SymBasis::new(set.dimension(), copies)?;
    let n = basis.len() as f64;
    let effects = set
        .iter()
        .map(|(psi, c)| {
            let v = basis.embed(psi)?;
            let mut m = CMatrix::zeros(basis.len(), basis.len());
            linalg::add_projector(&mut m, &v, c * n);
            SymmetricOperator::new(set.dimension(), copies, m)
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects, set.states().to_vec())
}

/// Result of one channel application.
#[derive(Clone, Debug)]
pub struct ChannelOutput {
    pub outcome_probabilities: Vec<f64>,
    /// `ρ⁽¹⁾` of the input.
    pub input_single_copy: DensityMatrix,
    /// `ρ̃⁽¹⁾ = Σ_r p_r |φ_r⟩⟨φ_r|`
    pub single_copy_state: DensityMatrix,
    /// `Tr[ρ⁽¹⁾ ρ̃⁽¹⁾]`
    pub fidelity_vs_input: f64,
}

fn check_input(rho: &SymmetricOperator, povm: &Povm) -> Result<()> {
    if rho.dimension() != povm.dimension() || rho.copies() != povm.copies() {
        return Err(validation(format!(
            "input is (d={}, M={}), POVM is (d={}, M={})",
            rho.dimension(),
            rho.copies(),
            povm.dimension(),
            povm.copies()
        )));
    }
    povm.ensure_complete()?;
    rho.validate_density()
}

/// Measures `ρ` with the POVM and returns the single-copy output of the
/// product-state preparation.
pub fn apply_channel(rho: &SymmetricOperator, povm: &Povm) -> Result<ChannelOutput> {
    check_input(rho, povm)?;
    let raw = povm
        .effects()
        .iter()
        .map(|e| linalg::trace_product(e.matrix(), rho.matrix()).re)
        .collect();
    let p = normalize_probabilities(raw)?;
    let d = povm.dimension();
    let mut out = CMatrix::zeros(d, d);
    for (phi, &pr) in povm.prepare_states().iter().zip(&p) {
        linalg::add_projector(&mut out, phi.amplitudes(), pr);
    }
    let single_copy_state = DensityMatrix::new(out)?;
    let input_single_copy = partial_trace_to_single(rho)?;
    let fidelity_vs_input = input_single_copy.overlap(&single_copy_state);
    Ok(ChannelOutput {
        outcome_probabilities: p,
        input_single_copy,
        single_copy_state,
        fidelity_vs_input,
    })
}

/// Full output `Σ_r Tr[O_r ρ] (|φ_r⟩⟨φ_r|)^{⊗N}` on `N` user copies.
pub fn channel_output_symmetric(
    rho: &SymmetricOperator,
    povm: &Povm,
    users: usize,
) -> Result<SymmetricOperator> {
    let out = apply_channel(rho, povm)?;
    let basis = SymBasis::new(povm.dimension(), users)?;
    let mut acc = CMatrix::zeros(basis.len(), basis.len());
    for (phi, &pr) in povm.prepare_states().iter().zip(&out.outcome_probabilities) {
        linalg::add_projector(&mut acc, &basis.embed(phi)?, pr);
    }
    SymmetricOperator::new(povm.dimension(), users, acc)
}

/// `(M/(M+d)) ρ⁽¹⁾ + (1/(M+d)) 𝕀`: the single-copy output of an
/// `(M+1)`-copy CSS estimator.
pub fn depolarized_output(rho1: &DensityMatrix, copies: usize) -> DensityMatrix {
    let d = rho1.dimension();
    let denom = (copies + d) as f64;
    let m = rho1.matrix() * Complex64::new(copies as f64 / denom, 0.0)
        + CMatrix::identity(d, d) * Complex64::new(1.0 / denom, 0.0);
    DensityMatrix::new(m).expect("convex mixture of density matrices")
}

/// Least-squares fit `ρ_out ≈ s ρ_in + ((1 − s)/d) 𝕀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DepolarizingFit {
    pub shrink: f64,
    /// Frobenius norm of the fit mismatch.
    pub residual: f64,
}

/// Fits the shrink factor `s`. When `ρ_in` is maximally mixed every `s`
/// fits equally well and `s = 1` is reported.
pub fn depolarizing_decompose(
    rho_in: &DensityMatrix,
    rho_out: &DensityMatrix,
) -> Result<DepolarizingFit> {
    let d = rho_in.dimension();
    if rho_out.dimension() != d {
        return Err(validation("input and output dimensions differ"));
    }
    let mixed = DensityMatrix::maximally_mixed(d);
    let x = rho_in.matrix() - mixed.matrix();
    let y = rho_out.matrix() - mixed.matrix();
    let xx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    let shrink = if xx < 1e-28 {
        1.0
    } else {
        x.iter()
            .zip(y.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>()
            / xx
    };
    let residual = (y - x * Complex64::new(shrink, 0.0))
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(DepolarizingFit { shrink, residual })
}

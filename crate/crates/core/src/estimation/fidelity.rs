use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::Povm;
use crate::error::{validation, Result};
use crate::linalg::CMatrix;
use crate::symspace::{
    dim_sym, haar_random_state, split_symmetric_basis, PureState, SymBasis, SymmetricOperator,
};

/// `F̂ = ∫dψ (|ψ⟩⟨ψ|)^{⊗M} |⟨0|ψ⟩|²` in closed form: diagonal with entries
/// `(m_0 + 1) / ((M + 1) d_{M+1}⁺)`.
pub fn build_f_operator(d: usize, copies: usize) -> Result<SymmetricOperator> {
    let basis = SymBasis::new(d, copies)?;
    let next = dim_sym(d, copies + 1)? as f64;
    let diag = basis.compositions().iter().map(|m| {
        Complex64::new(
            f64::from(m.entries()[0] + 1) / ((copies + 1) as f64 * next),
            0.0,
        )
    });
    let n = basis.len();
    SymmetricOperator::new(
        d,
        copies,
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, diag)),
    )
}

/// `F̂` via the `(M+1)`-copy Haar moment: `F_{mn} = (1/d_{M+1}⁺) Σ_s ⟨m,0|s⟩⟨s|n,0⟩`,
/// with the overlaps read off the split of each `|s⟩` into `M` copies and one.
pub fn f_operator_by_contraction(d: usize, copies: usize) -> Result<SymmetricOperator> {
    let basis = SymBasis::new(d, copies)?;
    let upper = SymBasis::new(d, copies + 1)?;
    let n = basis.len();
    let mut f = CMatrix::zeros(n, n);
    for s in upper.compositions() {
        // ⟨m, 0|s⟩ for every m with nonzero overlap.
        let overlaps: Vec<(usize, f64)> = split_symmetric_basis(s, 1)?
            .into_iter()
            .filter(|t| t.block.entries()[0] == 1)
            .map(|t| {
                (
                    basis
                        .index_of(&t.rest)
                        .expect("rest is an M-copy composition"),
                    t.weight,
                )
            })
            .collect();
        for &(i, wi) in &overlaps {
            for &(j, wj) in &overlaps {
                f[(i, j)] += Complex64::new(wi * wj, 0.0);
            }
        }
    }
    f /= Complex64::new(upper.len() as f64, 0.0);
    SymmetricOperator::new(d, copies, f)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Largest diagonal entry of `F̂`, `1/d_{M+1}⁺`, as a reduced fraction.
pub fn f_operator_max_diag_rational(d: usize, copies: usize) -> Result<(u128, u128)> {
    // Entry at m = (M, 0, …): (M + 1) / ((M + 1) d_{M+1}⁺).
    let num = (copies + 1) as u128;
    let den = (copies + 1) as u128 * u128::from(dim_sym(d, copies + 1)?);
    let g = gcd(num, den);
    Ok((num / g, den / g))
}

/// `(M + 1)/(M + d)` as a reduced fraction.
pub fn optimal_fidelity_rational(d: usize, copies: usize) -> (u128, u128) {
    let num = (copies + 1) as u128;
    let den = (copies + d) as u128;
    let g = gcd(num, den);
    (num / g, den / g)
}

/// Optimal mean (and, with an `(M+1)`-copy CSS, universal) single-copy
/// fidelity `(M + 1)/(M + d)`.
pub fn optimal_mean_fidelity(d: usize, copies: usize) -> f64 {
    (copies + 1) as f64 / (copies + d) as f64
}

/// `f(ψ) = Σ_r Tr[O_r (|ψ⟩⟨ψ|)^{⊗M}] |⟨φ_r|ψ⟩|²`.
pub fn exact_fidelity(povm: &Povm, psi: &PureState) -> Result<f64> {
    let p = povm.outcome_probabilities(psi)?;
    Ok(p.iter()
        .zip(povm.prepare_states())
        .map(|(pr, phi)| pr * phi.inner(psi).norm_sqr())
        .sum())
}

/// Streaming mean and variance; partitions merge with Chan's formula.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Welford) -> Welford {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Welford { count, mean, m2 }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count.max(1) as f64).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Per-sample variance of `f(ψ)`; zero for a universal estimator.
    pub variance: f64,
    pub samples: u64,
}

impl From<Welford> for FidelityEstimate {
    fn from(w: Welford) -> Self {
        Self {
            mean: w.mean,
            stderr: w.stderr(),
            variance: w.variance(),
            samples: w.count,
        }
    }
}

fn accumulate<R: Rng + ?Sized>(povm: &Povm, samples: u64, rng: &mut R) -> Result<Welford> {
    let mut acc = Welford::default();
    for _ in 0..samples {
        let psi = haar_random_state(povm.dimension(), rng);
        acc.push(exact_fidelity(povm, &psi)?);
    }
    Ok(acc)
}

/// Haar-averaged `f(ψ)` from `samples` draws.
pub fn mean_fidelity_monte_carlo<R: Rng + ?Sized>(
    povm: &Povm,
    samples: u64,
    rng: &mut R,
) -> Result<FidelityEstimate> {
    if samples == 0 {
        return Err(validation("at least one sample is required"));
    }
    povm.ensure_complete()?;
    Ok(accumulate(povm, samples, rng)?.into())
}

/// Same estimate split over `partitions` independent ChaCha streams derived
/// from `master_seed`. Deterministic for a fixed seed and partition count.
pub fn mean_fidelity_monte_carlo_partitioned(
    povm: &Povm,
    samples: u64,
    master_seed: u64,
    partitions: usize,
) -> Result<FidelityEstimate> {
    if samples == 0 || partitions == 0 {
        return Err(validation("samples and partitions must be positive"));
    }
    povm.ensure_complete()?;
    let per = samples / partitions as u64;
    let extra = samples % partitions as u64;
    let parts = (0..partitions)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(i as u64);
            let n = per + u64::from((i as u64) < extra);
            accumulate(povm, n, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts
        .iter()
        .fold(Welford::default(), |acc, w| acc.merge(w))
        .into())
}

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{css_defect_with_tol, nnls, CssReport, WeightedStateSet, DEFAULT_CSS_TOL};
use crate::error::{validation, Result};
use crate::symspace::{PureState, SymBasis};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Bound on both the least-squares residual and the verified defect.
    pub tolerance: f64,
    /// Lawson–Hanson iteration budget; `None` uses `10 R + 100`.
    pub max_iterations: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_CSS_TOL,
            max_iterations: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityReport {
    pub copies: usize,
    pub candidates: usize,
    /// Frobenius residual `‖Σ c_r P_r − 𝕀₊ᴹ/d_M⁺‖_F` at the best `c ≥ 0`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub tolerance: f64,
}

#[derive(Clone, Debug)]
pub enum SolveOutcome {
    Feasible {
        set: WeightedStateSet,
        report: CssReport,
        residual: f64,
    },
    Infeasible(InfeasibilityReport),
}

impl SolveOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveOutcome::Feasible { .. })
    }
}

/// Finds `c_r ≥ 0` with `Σ_r c_r (|φ_r⟩⟨φ_r|)^{⊗M} = 𝕀₊ᴹ / d_M⁺`.
///
/// The Hermitian constraint is flattened into `(d_M⁺)²` real rows (diagonal,
/// then `√2·Re` and `√2·Im` of the strict upper triangle) so that the
/// Euclidean residual equals the Frobenius norm of the operator mismatch.
/// Any solution is re-verified with the spectral-norm defect before it is
/// reported feasible.
pub fn css_solve(
    candidates: &[PureState],
    d: usize,
    copies: usize,
    options: &SolveOptions,
) -> Result<SolveOutcome> {
    if candidates.is_empty() {
        return Err(validation("at least one candidate state is required"));
    }
    if copies == 0 {
        return Err(validation("copy number must be at least 1"));
    }
    let basis = SymBasis::new(d, copies)?;
    let n = basis.len();
    let rows = n * n;
    let r = candidates.len();

    let mut a = DMatrix::<f64>::zeros(rows, r);
    for (col, psi) in candidates.iter().enumerate() {
        let v = basis.embed(psi)?;
        let mut row = 0;
        for i in 0..n {
            a[(row, col)] = v[i].norm_sqr();
            row += 1;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let p = v[i] * v[j].conj();
                a[(row, col)] = std::f64::consts::SQRT_2 * p.re;
                a[(row + 1, col)] = std::f64::consts::SQRT_2 * p.im;
                row += 2;
            }
        }
    }
    let mut b = DVector::<f64>::zeros(rows);
    for i in 0..n {
        b[i] = 1.0 / n as f64;
    }

    let budget = options.max_iterations.unwrap_or(10 * r + 100);
    let sol = nnls(&a, &b, budget);
    let infeasible = |residual: f64| {
        SolveOutcome::Infeasible(InfeasibilityReport {
            copies,
            candidates: r,
            residual,
            iterations: sol.iterations,
            converged: sol.converged,
            tolerance: options.tolerance,
        })
    };
    if sol.residual > options.tolerance {
        return Ok(infeasible(sol.residual));
    }
    let sum: f64 = sol.x.iter().sum();
    if sum <= 0.0 {
        return Ok(infeasible(sol.residual));
    }
    let weights: Vec<f64> = sol.x.iter().map(|c| c / sum).collect();
    let set = WeightedStateSet::new(d, candidates.to_vec(), weights)?;
    let report = css_defect_with_tol(&set, copies, options.tolerance)?;
    if !report.is_css {
        return Ok(infeasible(sol.residual));
    }
    Ok(SolveOutcome::Feasible {
        set,
        report,
        residual: sol.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::css::{css_defect, random_candidate_pool};
    use crate::mub::mub_as_css;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn six_state_candidates_are_feasible_at_three_copies() {
        let states = mub_as_css(2).unwrap().states().to_vec();
        match css_solve(&states, 2, 3, &SolveOptions::default()).unwrap() {
            SolveOutcome::Feasible { set, report, .. } => {
                assert!(report.defect < 1e-8);
                assert!(set.weights().iter().all(|&c| c >= 0.0));
                assert!(css_defect(&set, 3).unwrap().defect < 1e-8);
            }
            SolveOutcome::Infeasible(r) => panic!("unexpectedly infeasible: {r:?}"),
        }
    }

    #[test]
    fn two_basis_states_are_infeasible() {
        let states = vec![PureState::basis(2, 0), PureState::basis(2, 1)];
        match css_solve(&states, 2, 2, &SolveOptions::default()).unwrap() {
            SolveOutcome::Infeasible(r) => {
                // The (1,1) diagonal entry cannot be produced: residual ≥ 1/3.
                assert!(r.residual >= 1.0 / 3.0 - 1e-12, "{r:?}");
            }
            SolveOutcome::Feasible { .. } => panic!("two projectors cannot span the identity"),
        }
    }

    #[test]
    fn random_pool_is_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pool = random_candidate_pool(2, 40, &mut rng).unwrap();
        let out = css_solve(&pool, 2, 3, &SolveOptions::default()).unwrap();
        let SolveOutcome::Feasible { set, .. } = out else {
            panic!("expected a feasible pool");
        };
        assert!(css_defect(&set, 3).unwrap().defect < 1e-8);
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        assert!(css_solve(&[], 2, 2, &SolveOptions::default()).is_err());
        assert!(css_solve(&[PureState::basis(3, 0)], 2, 2, &SolveOptions::default()).is_err());
    }
}

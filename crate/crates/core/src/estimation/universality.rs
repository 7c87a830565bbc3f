//! Probing `P̂ = Σ_r c_r (|φ_r⟩⟨φ_r|)^{⊗(M+1)} − 𝕀₊^{M+1}/d_{M+1}⁺` through
//! `Δ_lk(ρ) = Tr[(ρ ⊗ |l⟩⟨k|) P̂]` with `ρ` on `M` copies.
//!
//! The scan touches diagonal probes `ρ = |r − e_k⟩⟨r − e_k|` for every `P_rr`
//! and, for each `P_rs`, pure probes on `|m⟩ = |r − e_k⟩`, `|n⟩ = |s − e_l⟩`
//! together with superpositions `(λ₁|m⟩ + λ₂ e^{iφ}|n⟩)/√(λ₁² + λ₂²)`. Every
//! element of `P̂` is rebuilt from the probe values, so a vanishing probe family
//! forces `P̂ = 0`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::css::{frame_deviation, WeightedStateSet};
use crate::error::{validation, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::symspace::{append_level, Composition, SymBasis, SymmetricOperator};

/// `(λ₁, λ₂, φ)` for the superposition probes.
pub const PROBE_SCHEDULE: [(f64, f64, f64); 4] = [
    (1.0, 1.0, 0.0),
    (1.0, 1.0, FRAC_PI_2),
    (1.0, 2.0, 0.0),
    (1.0, 2.0, FRAC_PI_2),
];

type Sparse = Vec<(usize, Complex64)>;

/// Evaluates `Δ_lk` against a fixed `(M+1)`-copy operator.
#[derive(Clone, Debug)]
pub struct DeltaProbe {
    phat: CMatrix,
    lower: SymBasis,
    upper: SymBasis,
}

/// Outcome of the full probe schedule.
#[derive(Clone, Debug)]
pub struct ProbeScan {
    /// Largest `|Δ_lk|` over every probe evaluated.
    pub delta_max: f64,
    pub probes: usize,
    /// `P̂` rebuilt from probe values alone.
    pub reconstructed: CMatrix,
    /// Largest mismatch between the `λ₁ ≠ λ₂` probes and the values predicted
    /// from the pure and `λ₁ = λ₂` probes.
    pub consistency_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniversalityReport {
    pub copies: usize,
    /// `‖P̂‖` (spectral norm).
    pub phat_norm: f64,
    pub delta_max: f64,
    /// Upper bound on `‖P̂‖` implied by `delta_max`: `4 (M+1) d_{M+1}⁺ δ`.
    pub necessity_bound: f64,
    /// Largest entrywise gap between `P̂` and its probe reconstruction.
    pub reconstruction_error: f64,
    pub consistency_residual: f64,
    pub probes: usize,
}

impl DeltaProbe {
    /// `phat` lives on `M + 1 ≥ 2` copies.
    pub fn new(phat: &SymmetricOperator) -> Result<Self> {
        if phat.copies() < 2 {
            return Err(validation("probing needs an operator on at least 2 copies"));
        }
        let d = phat.dimension();
        Ok(Self {
            phat: phat.matrix().clone(),
            lower: SymBasis::new(d, phat.copies() - 1)?,
            upper: SymBasis::new(d, phat.copies())?,
        })
    }

    /// Copy number `M` of the probe states.
    pub fn copies(&self) -> usize {
        self.lower.copies()
    }

    /// Projection of `|v⟩ ⊗ |level⟩` onto the `(M+1)`-copy symmetric subspace.
    fn raise(&self, v: &[(Composition, Complex64)], level: usize) -> Sparse {
        let denom = (self.lower.copies() + 1) as f64;
        let mut out: Sparse = Vec::with_capacity(v.len());
        for (m, a) in v {
            let up = m.raised(level);
            let w = (f64::from(up.entries()[level]) / denom).sqrt();
            let idx = self.upper.index_of(&up).expect("raised composition");
            match out.iter_mut().find(|(i, _)| *i == idx) {
                Some((_, x)) => *x += a * w,
                None => out.push((idx, a * w)),
            }
        }
        out
    }

    /// `⟨w ⊗ k| P̂ |v ⊗ l⟩`, i.e. `Tr[(|v⟩⟨w| ⊗ |l⟩⟨k|) P̂]`.
    fn sandwich(
        &self,
        v: &[(Composition, Complex64)],
        w: &[(Composition, Complex64)],
        l: usize,
        k: usize,
    ) -> Complex64 {
        let ket = self.raise(v, l);
        let bra = self.raise(w, k);
        let mut acc = ZERO;
        for &(i, b) in &bra {
            for &(j, a) in &ket {
                acc += b.conj() * self.phat[(i, j)] * a;
            }
        }
        acc
    }

    fn check_levels(&self, l: usize, k: usize) -> Result<()> {
        let d = self.lower.dimension();
        if l >= d || k >= d {
            return Err(validation(format!(
                "levels ({l}, {k}) out of range for d = {d}"
            )));
        }
        Ok(())
    }

    /// `Δ_lk` for the pure probe `ρ = |v⟩⟨v|`.
    pub fn delta(&self, v: &CVector, l: usize, k: usize) -> Result<Complex64> {
        self.check_levels(l, k)?;
        if v.len() != self.lower.len() {
            return Err(validation("probe vector has the wrong length"));
        }
        let ket = append_level(v, &self.lower, &self.upper, l);
        let bra = append_level(v, &self.lower, &self.upper, k);
        Ok(bra.dotc(&(&self.phat * &ket)))
    }

    /// `Δ_lk` for an arbitrary `M`-copy operator `ρ`.
    pub fn delta_operator(&self, rho: &SymmetricOperator, l: usize, k: usize) -> Result<Complex64> {
        self.check_levels(l, k)?;
        if rho.matrix().nrows() != self.lower.len() {
            return Err(validation("probe operator has the wrong size"));
        }
        let comps = self.lower.compositions();
        let mut acc = ZERO;
        for (i, mi) in comps.iter().enumerate() {
            for (j, mj) in comps.iter().enumerate() {
                let r = rho.matrix()[(i, j)];
                if r != ZERO {
                    acc += r * self.sandwich(
                        &[(mi.clone(), Complex64::new(1.0, 0.0))],
                        &[(mj.clone(), Complex64::new(1.0, 0.0))],
                        l,
                        k,
                    );
                }
            }
        }
        Ok(acc)
    }

    /// Runs the diagonal-then-off-diagonal schedule and rebuilds `P̂`.
    pub fn scan(&self) -> ProbeScan {
        let upper = self.upper.compositions();
        let n = upper.len();
        let scale = (self.lower.copies() + 1) as f64;
        let one = Complex64::new(1.0, 0.0);
        let mut reconstructed = CMatrix::zeros(n, n);
        let mut delta_max = 0.0f64;
        let mut probes = 0usize;
        let mut consistency = 0.0f64;
        let mut record = |x: Complex64, probes: &mut usize| {
            *probes += 1;
            delta_max = delta_max.max(x.norm());
            x
        };
        let first_occupied =
            |c: &Composition| c.entries().iter().position(|&x| x > 0).expect("nonempty");

        for (ri, r) in upper.iter().enumerate() {
            let k = first_occupied(r);
            let m = r.lowered(k).expect("occupied level");
            let rk = f64::from(r.entries()[k]);
            let pm = [(m.clone(), one)];
            let a_diag = record(self.sandwich(&pm, &pm, k, k), &mut probes);
            reconstructed[(ri, ri)] = a_diag * scale / rk;

            for (si, s) in upper.iter().enumerate() {
                if si == ri {
                    continue;
                }
                let l = first_occupied(s);
                let nn = s.lowered(l).expect("occupied level");
                let sl = f64::from(s.entries()[l]);
                let pn = [(nn.clone(), one)];
                let a = record(self.sandwich(&pm, &pm, l, k), &mut probes);
                let c = if m == nn {
                    a
                } else {
                    let b = record(self.sandwich(&pn, &pn, l, k), &mut probes);
                    let sup = |lam1: f64, lam2: f64, phi: f64| {
                        let norm = (lam1 * lam1 + lam2 * lam2).sqrt();
                        vec![
                            (m.clone(), Complex64::new(lam1 / norm, 0.0)),
                            (nn.clone(), Complex64::from_polar(lam2 / norm, phi)),
                        ]
                    };
                    let x: Vec<Complex64> = PROBE_SCHEDULE
                        .iter()
                        .map(|&(l1, l2, phi)| {
                            let v = sup(l1, l2, phi);
                            record(self.sandwich(&v, &v, l, k), &mut probes)
                        })
                        .collect();
                    let (x1, x2) = (x[0], x[1]);
                    // C + D and C − D from the equal-weight probes.
                    let sum = x1 * 2.0 - a - b;
                    let diff = (x2 * 2.0 - a - b) * Complex64::new(0.0, -1.0);
                    let c = (sum + diff) * 0.5;
                    let dd = (sum - diff) * 0.5;
                    for (&(l1, l2, phi), &xi) in PROBE_SCHEDULE.iter().zip(&x).skip(2) {
                        let w = l1 * l1 + l2 * l2;
                        let e = Complex64::from_polar(1.0, phi);
                        let predicted =
                            (a * (l1 * l1) + b * (l2 * l2) + (c * e + dd * e.conj()) * (l1 * l2))
                                / w;
                        consistency = consistency.max((predicted - xi).norm());
                    }
                    c
                };
                reconstructed[(ri, si)] = c * scale / (rk * sl).sqrt();
            }
        }
        ProbeScan {
            delta_max,
            probes,
            reconstructed,
            consistency_residual: consistency,
        }
    }

    /// Entrywise gap between `P̂` and a reconstruction.
    pub fn reconstruction_error(&self, scan: &ProbeScan) -> f64 {
        linalg::max_abs_diff(&self.phat, &scan.reconstructed)
    }

    pub fn report(&self) -> UniversalityReport {
        let scan = self.scan();
        let m = self.lower.copies();
        UniversalityReport {
            copies: m,
            phat_norm: linalg::hermitian_spectral_norm(&self.phat),
            delta_max: scan.delta_max,
            necessity_bound: 4.0 * (m + 1) as f64 * self.upper.len() as f64 * scan.delta_max,
            reconstruction_error: self.reconstruction_error(&scan),
            consistency_residual: scan.consistency_residual,
            probes: scan.probes,
        }
    }
}

/// `‖P̂‖` and the probe scan for a set used on `M` copies.
pub fn universality_defect(set: &WeightedStateSet, copies: usize) -> Result<UniversalityReport> {
    if copies == 0 {
        return Err(validation("copy number must be at least 1"));
    }
    let phat = frame_deviation(set, copies + 1)?;
    Ok(DeltaProbe::new(&phat)?.report())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mub::mub_as_css;
    use crate::symspace::{haar_random_state, PureState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qubit_six_states_are_universal_at_two_copies() {
        let r = universality_defect(&mub_as_css(2).unwrap(), 2).unwrap();
        assert!(r.phat_norm < 1e-12, "{r:?}");
        assert!(r.delta_max < 1e-12);
    }

    #[test]
    fn qutrit_mub_is_not_universal_at_two_copies() {
        let r = universality_defect(&mub_as_css(3).unwrap(), 2).unwrap();
        assert!(r.phat_norm > 0.01, "{r:?}");
        assert!(r.reconstruction_error < 1e-12);
        assert!(r.necessity_bound >= r.phat_norm);
    }

    #[test]
    fn single_state_defect() {
        let set = WeightedStateSet::uniform(2, vec![PureState::basis(2, 0)]).unwrap();
        let r = universality_defect(&set, 1).unwrap();
        // diag(1, 0, 0) − 𝕀/3 has norm 2/3.
        assert!((r.phat_norm - 2.0 / 3.0).abs() < 1e-12);
        assert!(r.phat_norm > 0.3);
        assert!(r.delta_max > 0.0);
    }

    #[test]
    fn reconstruction_is_exact_for_random_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (d, m) in [(2, 1), (2, 3), (3, 2), (4, 1)] {
            let upper = SymBasis::new(d, m + 1).unwrap();
            let psi = haar_random_state(upper.len(), &mut rng);
            let phi = haar_random_state(upper.len(), &mut rng);
            // Non-Hermitian on purpose: every entry is rebuilt independently.
            let p = linalg::outer(psi.amplitudes(), phi.amplitudes());
            let probe = DeltaProbe::new(&SymmetricOperator::new(d, m + 1, p).unwrap()).unwrap();
            let scan = probe.scan();
            assert!(probe.reconstruction_error(&scan) < 1e-12, "d={d} M={m}");
            assert!(scan.consistency_residual < 1e-12);
        }
    }

    #[test]
    fn sparse_and_operator_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let upper = SymBasis::new(3, 3).unwrap();
        let w = haar_random_state(upper.len(), &mut rng);
        let op = SymmetricOperator::projector(3, 3, w.amplitudes()).unwrap();
        let probe = DeltaProbe::new(&op).unwrap();
        let lower = SymBasis::new(3, 2).unwrap();
        let v = haar_random_state(lower.len(), &mut rng);
        let rho = SymmetricOperator::projector(3, 2, v.amplitudes()).unwrap();
        for (l, k) in [(0, 0), (1, 2), (2, 0)] {
            let a = probe.delta(v.amplitudes(), l, k).unwrap();
            let b = probe.delta_operator(&rho, l, k).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
        assert!(probe.delta(v.amplitudes(), 3, 0).is_err());
    }

    #[test]
    fn rejects_single_copy_operator() {
        let op = SymBasis::new(2, 1).unwrap().identity();
        assert!(DeltaProbe::new(&op).is_err());
        assert!(universality_defect(&mub_as_css(2).unwrap(), 0).is_err());
    }
}

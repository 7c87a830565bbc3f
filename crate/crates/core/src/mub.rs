//! Mutually unbiased bases for `d = 2` and odd prime `d`.
//!
//! For odd prime `d` the bases are `|ψ_t^0⟩ = |t⟩` and, for `k = 1..d`,
//!
//! `|ψ_t^k⟩ = d^{-1/2} Σ_j ω^{t(d−j) − k s_j} |j⟩`, with `ω = e^{2πi/d}` and
//! `s_j = j + (j+1) + … + (d−1)`.
//!
//! Qubits use the six eigenstates of the Pauli operators. The uniform mixture
//! of all `d(d+1)` states is a 2-copy CSS; for qubits it is also a 3-copy CSS.

use num_complex::Complex64;

use crate::css::{frame_operator, WeightedStateSet};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::symspace::{PureState, SymmetricOperator};

#[derive(Clone, Debug)]
pub struct MubFamily {
    d: usize,
    /// `bases[k][t] = |ψ_t^k⟩`
    bases: Vec<Vec<PureState>>,
    s_table: Vec<u64>,
}

pub fn is_supported_dimension(d: usize) -> bool {
    d == 2 || (d > 2 && d % 2 == 1 && is_prime(d))
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    (2..).take_while(|i| i * i <= n).all(|i| !n.is_multiple_of(i))
}

/// `s_j = j + (j+1) + … + (d−1) = (d−1+j)(d−j)/2`.
pub fn s_table(d: usize) -> Vec<u64> {
    (0..d as u64)
        .map(|j| (d as u64 - 1 + j) * (d as u64 - j) / 2)
        .collect()
}

/// `ω^e` with the exponent reduced mod `d` first.
fn root_power(d: usize, exponent: i64) -> Complex64 {
    let e = exponent.rem_euclid(d as i64);
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * e as f64 / d as f64)
}

/// Integer phase exponent of `⟨j|ψ_t^k⟩` (in units of `2π/d`), for `k ≥ 1`.
pub fn phase_exponent(d: usize, t: usize, k: usize, j: usize, s: &[u64]) -> i64 {
    let d = d as i64;
    (t as i64 * (d - j as i64) - k as i64 * s[j] as i64).rem_euclid(d)
}

pub fn mub_generate(d: usize) -> Result<MubFamily> {
    if !is_supported_dimension(d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let s_tab = s_table(d);
    let bases = if d == 2 {
        qubit_bases()
    } else {
        let norm = 1.0 / (d as f64).sqrt();
        let mut bases = vec![(0..d).map(|t| PureState::basis(d, t)).collect::<Vec<_>>()];
        for k in 1..=d {
            let basis = (0..d)
                .map(|t| {
                    let amps = CVector::from_fn(d, |j, _| {
                        root_power(d, phase_exponent(d, t, k, j, &s_tab)) * norm
                    });
                    PureState::normalized(amps).expect("unit-modulus amplitudes")
                })
                .collect();
            bases.push(basis);
        }
        bases
    };
    Ok(MubFamily {
        d,
        bases,
        s_table: s_tab,
    })
}

/// `{|0⟩, |1⟩}`, `{|+⟩, |−⟩}`, `{|+̃⟩, |−̃⟩}` with
/// `|±⟩ = (|1⟩ ± |0⟩)/√2` and `|±̃⟩ = (|1⟩ ± i|0⟩)/√2`.
fn qubit_bases() -> Vec<Vec<PureState>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let st = |a: Complex64| {
        PureState::normalized(CVector::from_vec(vec![a * s, Complex64::new(s, 0.0)]))
            .expect("nonzero")
    };
    vec![
        vec![PureState::basis(2, 0), PureState::basis(2, 1)],
        vec![st(Complex64::new(1.0, 0.0)), st(Complex64::new(-1.0, 0.0))],
        vec![st(Complex64::new(0.0, 1.0)), st(Complex64::new(0.0, -1.0))],
    ]
}

impl MubFamily {
    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn bases(&self) -> &[Vec<PureState>] {
        &self.bases
    }

    pub fn omega(&self) -> Complex64 {
        root_power(self.d, 1)
    }

    pub fn s_table(&self) -> &[u64] {
        &self.s_table
    }

    /// All `d(d+1)` states, basis by basis.
    pub fn states(&self) -> impl Iterator<Item = &PureState> {
        self.bases.iter().flatten()
    }

    /// Largest `|⟨ψ_t^k|ψ_{t'}^k⟩ − δ_{tt'}|` within a basis.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for basis in &self.bases {
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((a.inner(b) - Complex64::new(target, 0.0)).norm());
                }
            }
        }
        worst
    }

    /// Largest `| |⟨ψ_t^k|ψ_{t'}^{k'}⟩| − 1/√d |` across different bases.
    pub fn unbiasedness_error(&self) -> f64 {
        let target = 1.0 / (self.d as f64).sqrt();
        let mut worst = 0.0f64;
        for (k, bk) in self.bases.iter().enumerate() {
            for bl in &self.bases[k + 1..] {
                for a in bk {
                    for b in bl {
                        worst = worst.max((a.inner(b).norm() - target).abs());
                    }
                }
            }
        }
        worst
    }
}

/// The MUB states with uniform weights `1/(d(d+1))`.
pub fn mub_as_css(d: usize) -> Result<WeightedStateSet> {
    let family = mub_generate(d)?;
    WeightedStateSet::uniform(d, family.states().cloned().collect())
}

/// Two-copy MUB frame operator and the classes of its matrix elements.
#[derive(Clone, Debug)]
pub struct QhatSummary {
    pub operator: SymmetricOperator,
    /// `⟨jj|Q̂|jj⟩` for every `j`.
    pub doubled_diagonal: Vec<f64>,
    /// `⟨j₁j₂|Q̂|j₁j₂⟩` for `j₁ < j₂` (symmetrized states).
    pub mixed_diagonal: Vec<f64>,
    /// max `|⟨j₁j₁|Q̂|j₂j₂⟩|`, `j₁ ≠ j₂`.
    pub doubled_offdiag_max: f64,
    /// max `|⟨j₁j₂|Q̂|jj⟩|`, `j₁ ≠ j₂`.
    pub mixed_doubled_max: f64,
    /// max `|⟨j₁j₂|Q̂|j₃j₄⟩|` over distinct unordered pairs.
    pub mixed_offdiag_max: f64,
}

impl QhatSummary {
    pub fn offdiag_max(&self) -> f64 {
        self.doubled_offdiag_max
            .max(self.mixed_doubled_max)
            .max(self.mixed_offdiag_max)
    }

    pub fn diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        self.doubled_diagonal
            .iter()
            .chain(&self.mixed_diagonal)
            .copied()
    }
}

/// `Q̂ = (1/(d(d+1))) (Σ_j |jj⟩⟨jj| + Σ_{k≥1,t} (|ψ_t^k⟩⟨ψ_t^k|)^{⊗2})`,
/// classified by element type. Expected: diagonal, with every diagonal entry
/// equal to `2/(d(d+1))`.
pub fn qhat_matrix_elements(d: usize) -> Result<QhatSummary> {
    let set = mub_as_css(d)?;
    let operator = frame_operator(&set, 2)?;
    let basis = crate::symspace::SymBasis::new(d, 2)?;
    let q = operator.matrix();
    let doubled: Vec<usize> = basis
        .compositions()
        .iter()
        .enumerate()
        .filter(|(_, m)| m.entries().contains(&2))
        .map(|(i, _)| i)
        .collect();
    let mixed: Vec<usize> = (0..basis.len()).filter(|i| !doubled.contains(i)).collect();

    let max_over = |rows: &[usize], cols: &[usize]| {
        let mut worst = 0.0f64;
        for &i in rows {
            for &j in cols {
                if i != j {
                    worst = worst.max(q[(i, j)].norm());
                }
            }
        }
        worst
    };
    Ok(QhatSummary {
        doubled_diagonal: doubled.iter().map(|&i| q[(i, i)].re).collect(),
        mixed_diagonal: mixed.iter().map(|&i| q[(i, i)].re).collect(),
        doubled_offdiag_max: max_over(&doubled, &doubled),
        mixed_doubled_max: max_over(&mixed, &doubled).max(max_over(&doubled, &mixed)),
        mixed_offdiag_max: max_over(&mixed, &mixed),
        operator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::css::{css_defect, lemma1_reduce};

    #[test]
    fn s_table_values() {
        assert_eq!(s_table(3), vec![3, 3, 2]);
        assert_eq!(s_table(5), vec![10, 10, 9, 7, 4]);
        for d in [3usize, 5, 7] {
            let s = s_table(d);
            for (j, &sj) in s.iter().enumerate() {
                assert_eq!(sj, (j..d).map(|i| i as u64).sum::<u64>());
            }
        }
    }

    #[test]
    fn qubit_family_matches_listing() {
        let f = mub_generate(2).unwrap();
        assert_eq!(f.bases().len(), 3);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus_tilde = f.bases()[2][0].amplitudes();
        assert!((plus_tilde[0] - Complex64::new(0.0, s)).norm() < 1e-15);
        assert!((plus_tilde[1] - Complex64::new(s, 0.0)).norm() < 1e-15);
        let minus = f.bases()[1][1].amplitudes();
        assert!((minus[0] + Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!(f.orthonormality_error() < 1e-12);
        assert!(f.unbiasedness_error() < 1e-12);
    }

    #[test]
    fn prime_families_are_unbiased() {
        for d in [3, 5, 7, 11] {
            let f = mub_generate(d).unwrap();
            assert_eq!(f.bases().len(), d + 1);
            assert_eq!(f.states().count(), d * (d + 1));
            assert!(f.orthonormality_error() < 1e-12, "d={d}");
            assert!(f.unbiasedness_error() < 1e-10, "d={d}");
        }
    }

    #[test]
    fn unsupported_dimensions() {
        for d in [0, 1, 4, 6, 8, 9, 15] {
            assert_eq!(mub_generate(d).unwrap_err(), Error::UnsupportedDimension(d));
        }
    }

    #[test]
    fn mub_css_copy_numbers() {
        let three = mub_as_css(3).unwrap();
        assert_eq!(three.len(), 12);
        assert!(three
            .weights()
            .iter()
            .all(|&w| (w - 1.0 / 12.0).abs() < 1e-15));
        assert!(css_defect(&three, 2).unwrap().defect < 1e-12);

        let two = mub_as_css(2).unwrap();
        assert!(css_defect(&two, 3).unwrap().defect < 1e-12);
        assert!(css_defect(&two, 4).unwrap().defect > 0.01);
        for d in [2, 3, 5] {
            let set = mub_as_css(d).unwrap();
            assert!(lemma1_reduce(&set, 2, 1e-10)
                .unwrap()
                .iter()
                .all(|r| r.is_css));
        }
    }

    #[test]
    fn qhat_is_scaled_identity() {
        for d in [3usize, 5] {
            let q = qhat_matrix_elements(d).unwrap();
            let target = 2.0 / (d * (d + 1)) as f64;
            assert_eq!(q.operator.matrix().nrows(), d * (d + 1) / 2);
            assert!(q.offdiag_max() < 1e-12, "d={d}: {}", q.offdiag_max());
            assert!(q.diagonal().all(|x| (x - target).abs() < 1e-10));
        }
    }
}

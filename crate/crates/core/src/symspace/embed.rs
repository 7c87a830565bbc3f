use num_complex::Complex64;

use super::{binomial_f64, Composition, DensityMatrix, PureState, SymBasis, SymmetricOperator};
use crate::error::{validation, Result};
use crate::linalg::{CMatrix, CVector, ZERO};

/// Coordinates of `|ψ⟩^{⊗M}` in the composition basis.
pub fn embed_product_state(psi: &PureState, copies: usize) -> Result<CVector> {
    SymBasis::new(psi.dimension(), copies)?.embed(psi)
}

/// One term `weight · |rest⟩ ⊗ |block⟩` of a split basis state.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitTerm {
    /// Occupation of the first `M − L` copies.
    pub rest: Composition,
    /// Occupation of the last `L` copies.
    pub block: Composition,
    pub weight: f64,
}

/// Expands `|m⟩` on `M` copies over `|m − k⟩ ⊗ |k⟩`, where `|k⟩` occupies
/// the last `block_copies = L` copies:
///
/// `|m⟩ = Σ_{Σk = L} √(Π_j C(m_j, k_j) / C(M, L)) |m − k⟩|k⟩`.
///
/// Terms come out with `k` in lexicographically descending order.
pub fn split_symmetric_basis(m: &Composition, block_copies: usize) -> Result<Vec<SplitTerm>> {
    let total = m.copies();
    if block_copies as u32 > total {
        return Err(validation(format!(
            "cannot split {block_copies} copies off a {total}-copy basis state"
        )));
    }
    let norm = binomial_f64(total, block_copies as u32);
    let mut out = Vec::new();
    let mut k = vec![0u32; m.dimension()];
    split_rec(m.entries(), &mut k, 0, block_copies as u32, &mut |k| {
        let weight = m
            .entries()
            .iter()
            .zip(k)
            .map(|(&mj, &kj)| binomial_f64(mj, kj))
            .product::<f64>()
            / norm;
        out.push(SplitTerm {
            rest: Composition {
                entries: m.entries().iter().zip(k).map(|(a, b)| a - b).collect(),
            },
            block: Composition {
                entries: k.to_vec(),
            },
            weight: weight.sqrt(),
        });
    });
    Ok(out)
}

fn split_rec(
    m: &[u32],
    k: &mut Vec<u32>,
    pos: usize,
    remaining: u32,
    emit: &mut dyn FnMut(&[u32]),
) {
    if pos == m.len() {
        if remaining == 0 {
            emit(k);
        }
        return;
    }
    let tail: u32 = m[pos + 1..].iter().sum();
    let hi = m[pos].min(remaining);
    let lo = remaining.saturating_sub(tail);
    for kj in (lo..=hi).rev() {
        k[pos] = kj;
        split_rec(m, k, pos + 1, remaining - kj, emit);
    }
    k[pos] = 0;
}

/// Traces out all but the last `keep` copies of a symmetric operator without
/// validating it. The result is expressed in the `keep`-copy composition basis.
pub fn partial_trace_operator(op: &SymmetricOperator, keep: usize) -> Result<SymmetricOperator> {
    let copies = op.copies();
    if keep > copies {
        return Err(validation(format!("cannot keep {keep} of {copies} copies")));
    }
    let d = op.dimension();
    let full = SymBasis::new(d, copies)?;
    let kept = SymBasis::new(d, keep)?;
    let traced = SymBasis::new(d, copies - keep)?;
    let norm = binomial_f64(copies as u32, keep as u32);
    let a = op.matrix();

    let mut out = CMatrix::zeros(kept.len(), kept.len());
    // For each traced-out occupation j: ⟨j|_rest |j + k⟩ = w(j + k; k) |k⟩.
    let mut column: Vec<(usize, usize, f64)> = Vec::with_capacity(kept.len());
    for j in traced.compositions() {
        column.clear();
        for (ki, k) in kept.compositions().iter().enumerate() {
            let m = j.add(k);
            let w = m
                .entries()
                .iter()
                .zip(k.entries())
                .map(|(&mi, &kj)| binomial_f64(mi, kj))
                .product::<f64>()
                / norm;
            let mi = full.index_of(&m).expect("composition in full basis");
            column.push((ki, mi, w.sqrt()));
        }
        for &(kr, mr, wr) in &column {
            for &(kc, mc, wc) in &column {
                out[(kr, kc)] += a[(mr, mc)] * (wr * wc);
            }
        }
    }
    SymmetricOperator::new(d, keep, out)
}

/// Reduced state of the last `keep` copies of a symmetric density operator.
pub fn partial_trace_copies(op: &SymmetricOperator, keep: usize) -> Result<SymmetricOperator> {
    op.validate_density()?;
    partial_trace_operator(op, keep)
}

/// Single-copy reduction
/// `ρ⁽¹⁾ = (1/M) Σ_{m,n} A_{mn} √(m_α n_β) |α⟩⟨β| δ_{m−α, n−β}`.
pub fn partial_trace_to_single(op: &SymmetricOperator) -> Result<DensityMatrix> {
    op.validate_density()?;
    let copies = op.copies();
    if copies == 0 {
        return Err(validation("cannot reduce a zero-copy operator"));
    }
    DensityMatrix::new(single_copy_matrix(op)?)
}

pub(crate) fn single_copy_matrix(op: &SymmetricOperator) -> Result<CMatrix> {
    let d = op.dimension();
    let copies = op.copies();
    let full = SymBasis::new(d, copies)?;
    let rest = SymBasis::new(d, copies - 1)?;
    let a = op.matrix();
    let mut out = CMatrix::zeros(d, d);
    let mut idx = vec![0usize; d];
    let mut amp = vec![0.0f64; d];
    for j in rest.compositions() {
        for level in 0..d {
            let m = j.raised(level);
            idx[level] = full.index_of(&m).expect("composition in full basis");
            amp[level] = f64::from(m.entries()[level]).sqrt();
        }
        for alpha in 0..d {
            for beta in 0..d {
                out[(alpha, beta)] += a[(idx[alpha], idx[beta])] * (amp[alpha] * amp[beta]);
            }
        }
    }
    Ok(out / Complex64::new(copies as f64, 0.0))
}

/// `Σ_m v_m √((m_l + 1)/(M + 1)) |m + e_l⟩`: the symmetric component of
/// `|v⟩ ⊗ |l⟩` on `M + 1` copies.
pub(crate) fn append_level(v: &CVector, from: &SymBasis, to: &SymBasis, level: usize) -> CVector {
    let mut out = CVector::from_element(to.len(), ZERO);
    let denom = (from.copies() + 1) as f64;
    for (i, m) in from.compositions().iter().enumerate() {
        if v[i] == ZERO {
            continue;
        }
        let up = m.raised(level);
        let w = (f64::from(up.entries()[level]) / denom).sqrt();
        out[to.index_of(&up).expect("composition in raised basis")] += v[i] * w;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symspace::haar_random_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn comp(e: &[u32]) -> Composition {
        Composition::new(e.to_vec()).unwrap()
    }

    #[test]
    fn split_examples() {
        let t = split_symmetric_basis(&comp(&[2, 0]), 1).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].rest, comp(&[1, 0]));
        assert_eq!(t[0].block, comp(&[1, 0]));
        assert!((t[0].weight - 1.0).abs() < 1e-15);

        let t = split_symmetric_basis(&comp(&[1, 1]), 1).unwrap();
        assert_eq!(t.len(), 2);
        for term in &t {
            assert!((term.weight - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
        assert_eq!(
            (t[0].rest.clone(), t[0].block.clone()),
            (comp(&[0, 1]), comp(&[1, 0]))
        );
        assert_eq!(
            (t[1].rest.clone(), t[1].block.clone()),
            (comp(&[1, 0]), comp(&[0, 1]))
        );

        let t = split_symmetric_basis(&comp(&[2, 1]), 1).unwrap();
        let by_block: Vec<_> = t
            .iter()
            .map(|x| (x.block.entries().to_vec(), x.weight))
            .collect();
        assert_eq!(by_block[0].0, vec![1, 0]);
        assert!((by_block[0].1 - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(by_block[1].0, vec![0, 1]);
        assert!((by_block[1].1 - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn split_out_of_range() {
        assert!(split_symmetric_basis(&comp(&[1, 1]), 3).is_err());
        let whole = split_symmetric_basis(&comp(&[1, 1]), 2).unwrap();
        assert_eq!(whole.len(), 1);
        assert!((whole[0].weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn split_weights_exhaustive() {
        for d in 1..=4 {
            for m in 0..=5 {
                for c in crate::symspace::enumerate_compositions(d, m).unwrap() {
                    for l in 0..=m {
                        let terms = split_symmetric_basis(&c, l).unwrap();
                        assert!(terms.iter().all(|t| t.weight >= 0.0));
                        let s: f64 = terms.iter().map(|t| t.weight * t.weight).sum();
                        assert!((s - 1.0).abs() < 1e-12, "d={d} m={c:?} L={l}: {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn product_state_reduces_to_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=3 {
            for m in 1..=4 {
                let psi = haar_random_state(d, &mut rng);
                let op = SymmetricOperator::product_state(&psi, m).unwrap();
                let r1 = partial_trace_to_single(&op).unwrap();
                let diff = crate::linalg::max_abs_diff(r1.matrix(), psi.projector().matrix());
                assert!(diff < 1e-10, "d={d} M={m}: {diff}");
            }
        }
    }

    #[test]
    fn maximally_mixed_symmetric_reduces_to_maximally_mixed() {
        let basis = SymBasis::new(2, 2).unwrap();
        let op = SymmetricOperator::new(
            2,
            2,
            basis.identity().into_matrix() / Complex64::new(3.0, 0.0),
        )
        .unwrap();
        let r1 = partial_trace_to_single(&op).unwrap();
        let half = DensityMatrix::maximally_mixed(2);
        assert!(crate::linalg::max_abs_diff(r1.matrix(), half.matrix()) < 1e-12);
    }

    #[test]
    fn general_trace_agrees_with_single_copy_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = haar_random_state(3, &mut rng);
        let phi = haar_random_state(3, &mut rng);
        let mut a = SymmetricOperator::product_state(&psi, 3)
            .unwrap()
            .into_matrix()
            * Complex64::new(0.3, 0.0);
        a += SymmetricOperator::product_state(&phi, 3)
            .unwrap()
            .into_matrix()
            * Complex64::new(0.7, 0.0);
        let op = SymmetricOperator::new(3, 3, a).unwrap();
        let general = partial_trace_copies(&op, 1).unwrap();
        let single = partial_trace_to_single(&op).unwrap();
        assert!(crate::linalg::max_abs_diff(general.matrix(), single.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_non_density() {
        let basis = SymBasis::new(2, 2).unwrap();
        assert!(partial_trace_copies(&basis.identity(), 1).is_err());
        assert!(partial_trace_to_single(&basis.identity()).is_err());
    }

    #[test]
    fn append_level_matches_split_weights() {
        let from = SymBasis::new(2, 1).unwrap();
        let to = SymBasis::new(2, 2).unwrap();
        let v = from.embed(&PureState::basis(2, 0)).unwrap();
        // |0⟩⊗|1⟩ has overlap 1/√2 with |(1,1)⟩.
        let u = append_level(&v, &from, &to, 1);
        assert!((u[1].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(u[0].norm() < 1e-15 && u[2].norm() < 1e-15);
    }
}

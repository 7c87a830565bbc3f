use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use cqsr_core::css::{
    css_defect, css_solve, random_candidate_pool, SolveOptions, SolveOutcome, WeightedStateSet,
};
use cqsr_core::estimation::{
    apply_channel, exact_fidelity, mean_fidelity_monte_carlo,
    mean_fidelity_monte_carlo_partitioned, optimal_mean_fidelity, povm_from_css,
    universality_defect,
};
use cqsr_core::linalg::{self, CMatrix};
use cqsr_core::mub::mub_as_css;
use cqsr_core::symspace::oracle::{tensor_partial_trace, TensorOracle};
use cqsr_core::symspace::{
    haar_random_state, partial_trace_copies, partial_trace_operator, PureState, SymBasis,
    SymmetricOperator,
};

fn haar_unitary(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(
            StandardNormal.sample(&mut *rng),
            StandardNormal.sample(&mut *rng),
        )
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // Diagonal phases of R folded into Q.
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            r[(i, i)] / r[(i, i)].norm()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    q * phases
}

fn random_set(d: usize, count: usize, rng: &mut ChaCha8Rng) -> WeightedStateSet {
    let states = random_candidate_pool(d, count, rng).unwrap();
    let raw: Vec<f64> = (0..count).map(|i| 1.0 + (i % 3) as f64).collect();
    let total: f64 = raw.iter().sum();
    WeightedStateSet::new(d, states, raw.iter().map(|w| w / total).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn defect_is_invariant_under_phases_and_unitaries(seed in any::<u64>(), d in 2usize..4, m in 1usize..4, count in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = random_set(d, count, &mut rng);
        let base = css_defect(&set, m).unwrap().defect;

        let phased = set.map_states(|s| s.with_global_phase(1.234)).unwrap();
        prop_assert!((css_defect(&phased, m).unwrap().defect - base).abs() < 1e-10);

        let u = haar_unitary(d, &mut rng);
        let rotated = set.map_states(|s| s.transformed(&u).unwrap()).unwrap();
        prop_assert!((css_defect(&rotated, m).unwrap().defect - base).abs() < 1e-10);
    }

    #[test]
    fn partial_traces_compose(seed in any::<u64>(), d in 2usize..4, m in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = SymBasis::new(d, m).unwrap().len();
        let v = haar_random_state(n, &mut rng);
        let rho = SymmetricOperator::projector(d, m, v.amplitudes()).unwrap();
        for keep in 1..m {
            for inner in 1..=keep {
                let two_step = partial_trace_copies(&partial_trace_copies(&rho, keep).unwrap(), inner).unwrap();
                let direct = partial_trace_copies(&rho, inner).unwrap();
                prop_assert!(linalg::max_abs_diff(two_step.matrix(), direct.matrix()) < 1e-12);
                prop_assert!((two_step.trace().re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn embedding_is_normalized_and_matches_tensor(seed in any::<u64>(), d in 1usize..4, m in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = haar_random_state(d, &mut rng);
        let oracle = TensorOracle::new(d, m).unwrap();
        let v = oracle.basis().embed(&psi).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        let back = oracle.vector_to_symmetric(&oracle.product_vector(&psi));
        prop_assert!((back - v).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn unvalidated_trace_agrees_with_tensor(seed in any::<u64>(), d in 2usize..4, m in 2usize..4) {
        // Arbitrary (non-density) symmetric operator.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let oracle = TensorOracle::new(d, m).unwrap();
        let n = oracle.basis().len();
        let a = haar_random_state(n, &mut rng);
        let b = haar_random_state(n, &mut rng);
        let op = SymmetricOperator::new(d, m, linalg::outer(a.amplitudes(), b.amplitudes())).unwrap();
        let sym = partial_trace_operator(&op, 1).unwrap();
        let tensor = tensor_partial_trace(&oracle.lift(&op).unwrap(), d, m, 1).unwrap();
        prop_assert!(linalg::max_abs_diff(sym.matrix(), &tensor) < 1e-12);
    }
}

#[test]
fn universal_sets_give_constant_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut cases = vec![(mub_as_css(2).unwrap(), 2), (mub_as_css(2).unwrap(), 1)];
    for d in [3, 5] {
        cases.push((mub_as_css(d).unwrap(), 1));
    }
    for (set, m) in cases {
        let d = set.dimension();
        let povm = povm_from_css(&set, m).unwrap();
        let target = optimal_mean_fidelity(d, m);
        let values: Vec<f64> = (0..100)
            .map(|_| exact_fidelity(&povm, &haar_random_state(d, &mut rng)).unwrap())
            .collect();
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min < 1e-9, "d={d} M={m}");
        assert!((max - target).abs() < 1e-9);
    }
}

#[test]
fn solved_sets_are_complete_and_universal() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let pool = random_candidate_pool(3, 300, &mut rng).unwrap();
    let SolveOutcome::Feasible { set, .. } =
        css_solve(&pool, 3, 3, &SolveOptions::default()).unwrap()
    else {
        panic!("qutrit 3-copy pool infeasible");
    };
    // Two-copy POVM from a three-copy CSS is universal.
    let povm = povm_from_css(&set, 2).unwrap();
    assert!(povm.completeness_error() < 1e-10);
    let r = universality_defect(&set, 2).unwrap();
    assert!(r.phat_norm < 1e-10);
    let f: Vec<f64> = (0..50)
        .map(|_| exact_fidelity(&povm, &haar_random_state(3, &mut rng)).unwrap())
        .collect();
    assert!(f.iter().all(|x| (x - 0.6).abs() < 1e-9));
}

#[test]
fn channel_output_is_a_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let povm = povm_from_css(&mub_as_css(3).unwrap(), 2).unwrap();
    for _ in 0..20 {
        let n = SymBasis::new(3, 2).unwrap().len();
        let v = haar_random_state(n, &mut rng);
        let rho = SymmetricOperator::projector(3, 2, v.amplitudes()).unwrap();
        let out = apply_channel(&rho, &povm).unwrap();
        assert!((linalg::trace(out.single_copy_state.matrix()).re - 1.0).abs() < 1e-12);
        assert!(out.outcome_probabilities.iter().all(|&p| p >= 0.0));
        assert!(linalg::min_eigenvalue(out.single_copy_state.matrix()) > -1e-12);
    }
}

#[test]
fn monte_carlo_routes_agree() {
    let povm = povm_from_css(&mub_as_css(3).unwrap(), 2).unwrap();
    let seq = mean_fidelity_monte_carlo(&povm, 20_000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let par = mean_fidelity_monte_carlo_partitioned(&povm, 20_000, 1, 8).unwrap();
    let target = optimal_mean_fidelity(3, 2);
    assert!((seq.mean - target).abs() <= 3.0 * seq.stderr);
    assert!((par.mean - target).abs() <= 3.0 * par.stderr);
    assert!((seq.variance - par.variance).abs() < 0.2 * seq.variance);
}

#[test]
fn basis_states_of_unit_dimension() {
    let psi = PureState::basis(1, 0);
    let set = WeightedStateSet::uniform(1, vec![psi]).unwrap();
    for m in 1..4 {
        assert!(css_defect(&set, m).unwrap().defect < 1e-15);
    }
}

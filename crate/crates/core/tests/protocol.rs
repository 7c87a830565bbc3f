use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cqsr_core::css::WeightedStateSet;
use cqsr_core::estimation::{exact_fidelity, povm_from_css};
use cqsr_core::mub::mub_as_css;
use cqsr_core::protocol::{
    cloud_measure, parse_record, parse_record_checked, run_session, serialize_record, user_prepare,
    InputSpec, SessionConfig, StateSetSpec,
};
use cqsr_core::symspace::haar_random_state;
use cqsr_core::Error;

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    max - min
}

#[test]
fn universality_at_protocol_level() {
    let set = mub_as_css(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let inputs: Vec<_> = (0..50).map(|_| haar_random_state(2, &mut rng)).collect();

    let two = povm_from_css(&set, 2).unwrap();
    let f2: Vec<f64> = inputs
        .iter()
        .map(|p| exact_fidelity(&two, p).unwrap())
        .collect();
    assert!(spread(&f2) < 1e-10);

    let three = povm_from_css(&set, 3).unwrap();
    let f3: Vec<f64> = inputs
        .iter()
        .map(|p| exact_fidelity(&three, p).unwrap())
        .collect();
    assert!(spread(&f3) > 1e-3, "spread {}", spread(&f3));
}

#[test]
fn wire_round_trip_through_users() {
    let set = mub_as_css(3).unwrap();
    let povm = povm_from_css(&set, 2).unwrap();
    let digest = set.digest();
    let psi = haar_random_state(3, &mut ChaCha8Rng::seed_from_u64(1));
    for record in cloud_measure(&psi, &povm, &digest, 200, 9).unwrap() {
        let line = serialize_record(&record);
        let parsed = parse_record_checked(&line, &digest, set.len()).unwrap();
        assert_eq!(parsed, record);
        let descriptors: Vec<_> = (0..4)
            .map(|_| user_prepare(&parsed, &set, 3).unwrap())
            .collect();
        assert!(descriptors.iter().all(|d| d == &descriptors[0]));
        assert_eq!(descriptors[0].state(&set), &set.states()[record.r]);
    }
    let stream_a: Vec<_> = cloud_measure(&psi, &povm, &digest, 50, 9)
        .unwrap()
        .collect();
    let stream_b: Vec<_> = cloud_measure(&psi, &povm, &digest, 50, 9)
        .unwrap()
        .collect();
    assert_eq!(stream_a, stream_b);
}

#[test]
fn stale_set_is_rejected() {
    let set = mub_as_css(2).unwrap();
    let other = WeightedStateSet::new(2, set.states().to_vec(), {
        let mut w = set.weights().to_vec();
        w[0] += 0.01;
        w[1] -= 0.01;
        w
    })
    .unwrap();
    let povm = povm_from_css(&set, 1).unwrap();
    let record = cloud_measure(&set.states()[0], &povm, &set.digest(), 1, 0)
        .unwrap()
        .next()
        .unwrap();
    assert!(matches!(
        user_prepare(&record, &other, 1),
        Err(Error::Protocol(_))
    ));
    let line = serialize_record(&record);
    assert!(matches!(
        parse_record_checked(&line, &other.digest(), 6),
        Err(Error::Protocol(_))
    ));
    assert!(matches!(
        parse_record(&line[..10]),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn session_report_json_is_stable() {
    let cfg = SessionConfig {
        dimension: 3,
        copies: 1,
        users: 2,
        trials: 30_000,
        seed: 8,
        state_set: StateSetSpec::Mub(3),
        input: InputSpec::Haar,
    };
    let a = run_session(&cfg).unwrap();
    assert_eq!(a.to_json(), run_session(&cfg).unwrap().to_json());
    assert!((a.exact_fidelity - 0.5).abs() < 1e-12);
    assert!(a.gap.abs() <= 3.0 * a.stderr);
    assert_eq!(a.histogram.iter().sum::<u64>(), 30_000);
    let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    for key in [
        "exact_fidelity",
        "empirical_fidelity",
        "stderr",
        "histogram",
        "config",
        "gap",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

use num_complex::Complex64;
use proptest::prelude::*;
use sampling_recovery::classes::{generate_w, membership_w, ClassParamsW, Profile};
use sampling_recovery::discretization::{draw_points, verify_ud, UdMode};
use sampling_recovery::greedy::{womp, DictionaryOnPoints};
use sampling_recovery::index_sets::{hyperbolic_cross, MultiIndex};
use sampling_recovery::recovery::{layered_approx, recover, continuous_error, Algorithm, MSpec, RecoveryConfig};
use sampling_recovery::trig::{sample, SparseCoefFn};

#[test]
fn class_member_recovery_improves_with_v() {
    let params = ClassParamsW::new(1.0, 0.0, 1.0).unwrap();
    let f = generate_w(&params, 2, 7, 3, Profile::SaturatingUniform).unwrap();
    assert!(membership_w(&f, &params).is_member());
    let errors: Vec<f64> = [2, 8, 32]
        .iter()
        .map(|&v| {
            let cfg = RecoveryConfig {
                d: 2,
                v,
                verify_ud: false,
                oracle: false,
                seed: 9,
                ..RecoveryConfig::default()
            };
            recover(&f, &cfg, None).unwrap().1.err_lp
        })
        .collect();
    assert!(errors[2] < errors[0], "{errors:?}");
}

#[test]
fn layered_and_womp_agree_on_low_frequencies() {
    let f = SparseCoefFn::from_real(2, [([0i64, 0], 1.0), ([1, -1], 0.5), ([-2, 0], 0.25)]).unwrap();
    let layered = layered_approx(&f, 64, 2.0, None).unwrap();
    assert!(continuous_error(&f, &layered, 2.0).unwrap() < 1e-12);
    let cfg = RecoveryConfig {
        d: 2,
        v: 3,
        m_rule: MSpec::Explicit(120),
        algorithm: Algorithm::Womp,
        seed: 4,
        ..RecoveryConfig::default()
    };
    let (g, report) = recover(&f, &cfg, None).unwrap();
    assert_eq!(report.ud_pass(), Some(true));
    assert!(continuous_error(&f, &g, 2.0).unwrap() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Sparse inputs on a discretizing point set are recovered exactly.
    #[test]
    fn womp_recovers_sparse_inputs(seed in 0u64..1000, picks in proptest::collection::btree_set(0usize..13, 1..4)) {
        let set = hyperbolic_cross(2, 2).unwrap();
        let xi = draw_points(80, 2, seed).unwrap();
        prop_assume!(verify_ud(&xi, &set, 2 * picks.len(), UdMode::Exhaustive).unwrap().pass);
        let f = SparseCoefFn::from_pairs(
            2,
            picks.iter().map(|&i| (set.members()[i].clone(), Complex64::new(1.0 + i as f64, -0.5))),
        ).unwrap();
        let dict = DictionaryOnPoints::new(set.clone(), xi.clone()).unwrap();
        let trace = womp(&sample(&f, &xi).unwrap(), &dict, 1.0, picks.len()).unwrap();
        let g = trace.approximant(&dict);
        for &i in &picks {
            let k: &MultiIndex = &set.members()[i];
            prop_assert!((g.get(k) - f.get(k)).norm() < 1e-8);
        }
    }
}

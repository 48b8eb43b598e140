use curvlab::bundle::MetricField;
use curvlab::field::{GridDomain, MatrixPolyField};
use curvlab::homomorphism::{hypothesis_check, HomomorphismField, HypothesisMode};
use curvlab::random::{prng, random_holomorphic, random_metric, random_vector};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

/// Fixed seed so the suite is reproducible; failures print the offending input.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x00c0_ffee),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn domain() -> GridDomain {
    GridDomain::square(Complex64::new(0.0, 0.0), 0.5, 17).unwrap()
}

fn random_pair(seed: u64, n: usize, m: usize) -> HomomorphismField {
    let d = domain();
    let mut rng = prng(seed);
    let source = MetricField::validate(random_metric(&mut rng, n, 1, 0.5), &d).unwrap();
    let target = MetricField::validate(random_metric(&mut rng, m, 1, 0.5), &d).unwrap();
    let a: MatrixPolyField = random_holomorphic(&mut rng, m, n, 1, 1.0);
    HomomorphismField::new(a, source, target).unwrap()
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn operator_norm_bounds_every_ratio(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
        let h = random_pair(seed, n, m);
        let mut rng = prng(seed ^ 7);
        for s in domain().nodes().step_by(5) {
            let top = h.norm_at(s).unwrap();
            for _ in 0..20 {
                let v = random_vector(&mut rng, n);
                let ratio = h.ratio_at(s, &v).unwrap();
                prop_assert!(ratio <= top.norm + 1e-10);
            }
            if top.norm > 0.0 {
                let attained = h.ratio_at(s, &top.top_vector).unwrap();
                prop_assert!((attained - top.norm).abs() < 1e-8 * (1.0 + top.norm));
            }
        }
    }

    #[test]
    fn scaling_the_map_shifts_the_log_norm(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let lambda = Complex64::new(re, im);
        prop_assume!(lambda.norm() > 1e-3);
        let h = random_pair(seed, 2, 2);
        let scaled = h.scaled(lambda);
        let d = domain();
        let u = h.log_norm_field(&d);
        let v = scaled.log_norm_field(&d);
        for (a, b) in u.values().iter().zip(v.values()) {
            prop_assert!((b - a - lambda.norm().ln()).abs() < 1e-12 * (1.0 + a.abs()));
        }
        let mode = HypothesisMode::Exhaustive;
        let r1 = hypothesis_check(&h, &d, 2, seed, mode).unwrap();
        let r2 = hypothesis_check(&scaled, &d, 2, seed, mode).unwrap();
        prop_assert_eq!(r1.outcome, r2.outcome);
        prop_assert!((r1.residual - r2.residual).abs() < 1e-6 * (1.0 + r1.residual.abs()));
    }
}

#[test]
fn hypothesis_reports_are_reproducible() {
    let h = random_pair(5, 3, 2);
    let d = domain();
    for mode in [HypothesisMode::Sampled, HypothesisMode::Exhaustive] {
        let a = hypothesis_check(&h, &d, 3, 99, mode).unwrap();
        let b = hypothesis_check(&h, &d, 3, 99, mode).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.seed, Some(99));
    }
}

#[test]
fn exhaustive_search_never_reports_a_smaller_gap() {
    for seed in 0..4 {
        let h = random_pair(seed, 3, 3);
        let d = domain();
        let sampled = hypothesis_check(&h, &d, 4, 1, HypothesisMode::Sampled).unwrap();
        let exhaustive = hypothesis_check(&h, &d, 4, 1, HypothesisMode::Exhaustive).unwrap();
        assert!(exhaustive.residual >= sampled.residual - 1e-12);
    }
}

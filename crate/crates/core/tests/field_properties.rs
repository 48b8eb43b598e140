use curvlab::field::{circle_average, fd_derivative, CMatrix, FdKind, GridDomain, MatrixPolyField, Wirtinger};
use curvlab::random::{prng, random_holomorphic, random_matrix, random_real_poly};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;

/// Fixed seed so the suite is reproducible; failures print the offending input.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x00c0_ffee),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn random_field(seed: u64) -> MatrixPolyField {
    let mut rng = prng(seed);
    let mut f = random_holomorphic(&mut rng, 2, 3, 3, 1.0);
    for (j, k) in [(0, 1), (1, 1), (2, 1), (0, 3)] {
        f.add_term(j, k, &random_matrix(&mut rng, 2, 3, 0.5));
    }
    f
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn exact_derivatives_match_finite_differences(seed in any::<u64>()) {
        let f = random_field(seed);
        let domain = GridDomain::square(Complex64::new(0.1, -0.2), 0.8, 33).unwrap();
        let step = domain.default_fd_step();
        let sup = f.sup_norm_on(domain.nodes());
        let tol = 10.0 * step * step * (1.0 + sup);
        let mut rng = prng(seed ^ 1);
        for _ in 0..100 {
            let s = domain.center() + Complex64::new(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7));
            for (kind, exact) in [
                (FdKind::Ds, f.d_s()),
                (FdKind::DsBar, f.d_sbar()),
                (FdKind::Levi, f.d_s().d_sbar()),
            ] {
                let fd: CMatrix = fd_derivative(|z| f.eval(z), s, kind, step, Some(&domain)).unwrap();
                prop_assert!((fd - exact.eval(s)).norm() <= tol);
            }
        }
    }

    #[test]
    fn wirtinger_derivatives_commute(seed in any::<u64>()) {
        let f = random_field(seed);
        let a = f.wirtinger(Wirtinger::Holomorphic).wirtinger(Wirtinger::AntiHolomorphic);
        let b = f.wirtinger(Wirtinger::AntiHolomorphic).wirtinger(Wirtinger::Holomorphic);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn trapezoid_is_spectrally_accurate(seed in any::<u64>(), nodes in prop::sample::select(vec![16usize, 32, 64])) {
        let mut rng = prng(seed);
        let u = random_real_poly(&mut rng, nodes / 4, 0.5);
        let z0 = Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let r = rng.random_range(0.05..0.5);
        let value = |z: Complex64| u.eval_scalar(z).re;
        let coarse = circle_average(value, z0, r, nodes).unwrap();
        let fine = circle_average(value, z0, r, 2 * nodes).unwrap();
        prop_assert!((coarse - fine).abs() < 1e-10 * (1.0 + fine.abs()));
    }
}

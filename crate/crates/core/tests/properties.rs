use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use weakmix::channels::QuantumChannel;
use weakmix::config::{RunConfig, SetupSpec};
use weakmix::engine::{evolve_exact, monte_carlo, noisy_pipeline, weak_value, weak_value_mixed};
use weakmix::state::{partial_trace_measured, tensor_states, variance};
use weakmix::{random, tensor, ComplexMatrix};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_mixed_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let (a, c) = (random::hermitian(&mut r, da), random::hermitian(&mut r, da));
        let (b, d) = (random::hermitian(&mut r, db), random::hermitian(&mut r, db));
        let lhs = &tensor(&a, &b) * &tensor(&c, &d);
        let rhs = tensor(&(&a * &c), &(&b * &d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-9);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let rho = random::density(&mut r, da);
        let sigma = random::density(&mut r, db);
        let reduced = partial_trace_measured(&tensor_states(&rho, &sigma), da, db).unwrap();
        prop_assert!(reduced.approx_eq(&sigma, 1e-12));
    }

    #[test]
    fn channels_preserve_states(seed in any::<u64>(), terms in 1usize..4, p in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let sigma = random::density(&mut r, 2);
        let chan = random::unital_channel(&mut r, 2, terms)
            .compose(&QuantumChannel::amplitude_damping(p).unwrap())
            .unwrap();
        prop_assert!(chan.completeness_deviation() < 1e-10);
        let out = chan.apply(&sigma).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        let (values, _) = out.matrix().eigh().unwrap();
        prop_assert!(values[0] > -1e-12);
    }

    #[test]
    fn variance_is_nonnegative(seed in any::<u64>(), dim in 2usize..5) {
        let mut r = rng(seed);
        let v = variance(&random::density(&mut r, dim), &random::observable(&mut r, dim)).unwrap();
        prop_assert!(v >= -1e-12);
    }

    #[test]
    fn pure_and_mixed_weak_values_agree(seed in any::<u64>(), dim in 2usize..4) {
        let mut r = rng(seed);
        let (i, f) = (random::pure_state(&mut r, dim), random::pure_state(&mut r, dim));
        prop_assume!(i.inner(&f).norm_sqr() > 1e-3);
        let a = random::observable(&mut r, dim);
        let w = weak_value(&i, &f, &a).unwrap();
        let wm = weak_value_mixed(&i.to_density(), &f.to_density(), &a).unwrap();
        prop_assert!((w - wm).norm() < 1e-9 * (1.0 + w.norm()));
    }

    #[test]
    fn zero_coupling_keeps_probe(seed in any::<u64>()) {
        let mut r = rng(seed);
        let setup = random::setup(&mut r, 2, 3, 0.0, 0.05).unwrap();
        let (sigma_f, tr) = evolve_exact(&setup).unwrap();
        prop_assert!((tr - setup.success_probability()).abs() < 1e-12);
        prop_assert!(sigma_f.normalized().unwrap().approx_eq(setup.probe(), 1e-12));
    }

    #[test]
    fn post_selected_trace_is_a_probability(seed in any::<u64>(), theta in -3.0f64..3.0) {
        let mut r = rng(seed);
        let setup = random::setup(&mut r, 2, 2, theta, 0.0).unwrap();
        let (_, tr) = evolve_exact(&setup).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&tr));
    }

    #[test]
    fn phase_noise_invariance(seed in any::<u64>(), dim in 2usize..4, theta in -1.0f64..1.0) {
        let mut r = rng(seed);
        let setup = random::setup(&mut r, 2, dim, theta, 0.1).unwrap();
        let before = random::phase_noise(&mut r, setup.k(), 3);
        let after = random::phase_noise(&mut r, setup.k(), 2);
        prop_assert!(before.is_phase_noise(setup.k()));
        let id = QuantumChannel::identity(dim);
        let noisy = noisy_pipeline(&setup, &before, &after).unwrap();
        let clean = noisy_pipeline(&setup, &id, &id).unwrap();
        for (x, y) in noisy.iter().zip(&clean) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn interferometer_config_round_trip(
        seed in any::<u64>(),
        delta in -6.0f64..6.0,
        visibility in 0.0f64..=1.0,
        theta in -0.1f64..0.1,
    ) {
        let cfg = RunConfig {
            seed,
            setup: Some(SetupSpec::MachZehnder { delta, visibility, theta, probe: None }),
            ..RunConfig::default()
        };
        let text = cfg.to_toml().unwrap();
        prop_assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }
}

#[test]
fn monte_carlo_independent_of_thread_count() {
    let mut r = rng(9);
    let setup = random::setup(&mut r, 2, 2, 0.1, 0.2).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo(&setup, setup.k(), 300_000, 77).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn matrix_exponential_of_hermitian_generator_is_unitary() {
    let mut r = rng(3);
    let h = random::hermitian(&mut r, 4);
    let u = h.exp_hermitian(Complex64::new(0.0, -0.7)).unwrap();
    let id = ComplexMatrix::identity(4);
    assert!((&u * &u.dagger()).max_abs_diff(&id) < 1e-12);
}

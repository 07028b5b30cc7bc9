//! Predicted signal-to-noise ratio against shot-level simulation, and the
//! completely mixed probe beating every other qubit probe.

use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weakmix::engine::{monte_carlo, predicted_snr};
use weakmix::verify::interferometer_setup;
use weakmix::{random, DensityOperator, Result};

fn main() -> Result<()> {
    let n = 1_000_000;
    let setup = interferometer_setup(FRAC_PI_2, 0.01)?;
    let predicted = predicted_snr(&setup, n)?;
    println!("predicted SNR {predicted:.4}");
    for seed in 0..5 {
        let mc = monte_carlo(&setup, setup.k(), n, seed)?;
        println!(
            "seed {seed}: empirical {:.4} ({} of {} accepted)",
            mc.empirical_snr, mc.accepted, mc.shots
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let best = (0..1000)
        .map(|_| {
            let probe = random::density(&mut rng, 2);
            predicted_snr(&setup.with_probe(probe).unwrap(), n).unwrap()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let mixed = predicted_snr(&setup.with_probe(DensityOperator::maximally_mixed(2))?, n)?;
    println!("best of 1000 random probes {best:.4}, completely mixed {mixed:.4}");
    Ok(())
}

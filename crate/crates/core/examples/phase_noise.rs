//! Phase noise on the probe leaves the final distribution of `K` unchanged,
//! while a bit flip does not.

use weakmix::channels::QuantumChannel;
use weakmix::engine::{noisy_pipeline, Selection, WeakSetup};
use weakmix::{DensityOperator, Observable, PureState, Result};

fn main() -> Result<()> {
    let plus = PureState::normalized(vec![1.0.into(), 1.0.into()])?;
    let post = PureState::normalized(vec![1.0.into(), num_complex::Complex64::new(0.3, 0.8)])?;
    let k = Observable::pauli_z();
    let setup = WeakSetup::new(
        Selection::Pure(plus),
        Selection::Pure(post),
        Observable::pauli_x(),
        k.clone(),
        0.2,
        DensityOperator::diagonal(&[0.7, 0.3])?,
    )?;

    let id = QuantumChannel::identity(2);
    let clean = noisy_pipeline(&setup, &id, &id)?;
    println!("no noise:      {clean:?}");

    let dephasing = QuantumChannel::phase_flip(0.4)?.compose(&QuantumChannel::z_rotation(0.9))?;
    println!("is phase noise: {}", dephasing.is_phase_noise(&k));
    println!(
        "phase noise:   {:?}",
        noisy_pipeline(&setup, &dephasing, &dephasing)?
    );

    let flip = QuantumChannel::bit_flip(0.2)?;
    println!("is phase noise: {}", flip.is_phase_noise(&k));
    println!("bit flip:      {:?}", noisy_pipeline(&setup, &flip, &flip)?);
    Ok(())
}

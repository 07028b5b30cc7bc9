//! First-order cumulant shifts of the probe against exact evolution.

use weakmix::cumulants::{cumulants_of, exact_cumulant_shift, predict_cumulant_shift};
use weakmix::engine::{Selection, WeakSetup};
use weakmix::{DensityOperator, Observable, PureState, Result};

fn main() -> Result<()> {
    let pre = PureState::normalized(vec![1.0.into(), 1.0.into(), 0.5.into()])?;
    let post = PureState::normalized(vec![
        1.0.into(),
        num_complex::Complex64::new(0.0, 1.0),
        1.0.into(),
    ])?;
    let probe = DensityOperator::diagonal(&[0.5, 0.3, 0.2])?;
    let k = Observable::from_real_diag(&[-1.0, 0.0, 1.0]);
    let base = WeakSetup::new(
        Selection::Pure(pre),
        Selection::Pure(post),
        Observable::from_real_diag(&[1.0, 0.0, -1.0]),
        k.clone(),
        0.0,
        probe.clone(),
    )?;

    println!(
        "initial cumulants {:?}",
        cumulants_of(&probe, &k, 4)?.as_slice()
    );
    for theta in [1e-1, 1e-2, 1e-3] {
        let s = base.with_theta(theta);
        for n in 1..=3 {
            let exact = exact_cumulant_shift(&s, n)?;
            let predicted = predict_cumulant_shift(&s, n)?;
            println!(
                "theta {theta:.0e} n={n}: exact {exact:+.6e} first order {predicted:+.6e} residual {:.2e}",
                (exact - predicted).abs()
            );
        }
    }
    Ok(())
}

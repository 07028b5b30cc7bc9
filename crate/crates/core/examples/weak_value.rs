//! Weak values for pure and mixed selections.
//!
//! Run with `cargo run --example weak_value`.

use std::f64::consts::FRAC_PI_2;

use weakmix::engine::{weak_value, weak_value_mixed};
use weakmix::experiment::{ideal_post_selection, post_selection, pre_selection};
use weakmix::{Observable, Result};

fn main() -> Result<()> {
    let a = Observable::basis_projector(2, 0);
    let pre = pre_selection();

    println!("{:>8} {:>12} {:>12}", "delta", "Re w", "Im w");
    for delta in [0.0, 0.5, 1.0, FRAC_PI_2, 2.5, 3.0] {
        let w = weak_value(&pre, &ideal_post_selection(delta), &a)?;
        println!("{delta:>8.3} {:>12.6} {:>12.6}", w.re, w.im);
    }

    // Imperfect post-selection: the projector blended with I/2.
    println!("\nvisibility 0.977:");
    for delta in [FRAC_PI_2, 2.5, 2.93] {
        let post = post_selection(delta, 0.977)?.density();
        let w = weak_value_mixed(&pre.to_density(), &post, &a)?;
        println!("{delta:>8.3} {:>12.6} {:>12.6}", w.re, w.im);
    }

    // Orthogonal selections have no weak value.
    let err = weak_value(&pre, &ideal_post_selection(std::f64::consts::PI), &a).unwrap_err();
    println!("\ndelta = pi: {err}");

    Ok(())
}

//! Interferometer sweep: extracted imaginary weak value of `|0⟩⟨0|` against
//! the visibility-corrected analytic curve.

use weakmix::experiment::{analytic_im_weak_value, linspace, sweep, MzConfig};
use weakmix::Result;

fn main() -> Result<()> {
    let visibility = 0.977;
    let records = sweep(&linspace(0.0, 2.8, 15), &MzConfig::new(0.0, visibility))?;
    println!(
        "{:>6} {:>10} {:>10} {:>10}",
        "delta", "extracted", "analytic", "stderr"
    );
    for r in &records {
        println!(
            "{:>6.3} {:>10.5} {:>10.5} {:>10.2e}",
            r.delta, r.extracted_im_weak_value, r.analytic_im_weak_value, r.fit_stderr
        );
    }

    let delta_max = (-visibility).acos();
    println!(
        "analytic maximum {:.4} at delta {delta_max:.4}",
        analytic_im_weak_value(delta_max, visibility)
    );
    Ok(())
}

//! Flow of a qubit probe through the Bloch ball under a complex weak value.
//! Prints CSV suitable for a quiver plot.

use std::f64::consts::FRAC_PI_2;

use weakmix::engine::bloch_flow_field;
use weakmix::experiment::{ideal_post_selection, pre_selection};
use weakmix::state::from_bloch;
use weakmix::{Observable, Result};

fn main() -> Result<()> {
    let mut grid = Vec::new();
    for i in -2..=2 {
        for j in -2..=2 {
            let (x, z) = (0.4 * i as f64, 0.4 * j as f64);
            if x * x + z * z <= 1.0 {
                grid.push(from_bloch([x, 0.0, z])?);
            }
        }
    }
    let flow = bloch_flow_field(
        &Observable::basis_projector(2, 0),
        &Observable::pauli_z(),
        &pre_selection(),
        &ideal_post_selection(FRAC_PI_2),
        &grid,
    )?;
    // The real part rotates the state about z, out of the plotted plane.
    println!("x,z,vy_re,vx_im,vz_im");
    for v in flow {
        println!(
            "{:.2},{:.2},{:.4},{:.4},{:.4}",
            v.point[0], v.point[2], v.real_part[1], v.imag_part[0], v.imag_part[2]
        );
    }
    Ok(())
}

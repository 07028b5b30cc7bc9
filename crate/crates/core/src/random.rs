//! Seeded generators for random states, observables, unitaries and channels.
//!
//! Used by the invariant battery (`verify`) and the test suites.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channels::QuantumChannel;
use crate::engine::{Selection, WeakSetup};
use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::state::{DensityOperator, Observable, PureState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let data = (0..dim * dim).map(|_| gaussian(rng)).collect();
    ComplexMatrix::new(dim, data).unwrap()
}

/// Haar-random pure state.
pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    let amps = (0..dim).map(|_| gaussian(rng)).collect();
    PureState::normalized(amps).unwrap()
}

/// Full-rank mixed state from the Hilbert–Schmidt ensemble.
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let g = ginibre(rng, dim);
    let m = &g * &g.dagger();
    let tr = m.trace().re;
    DensityOperator::new(m.scale_real(1.0 / tr)).unwrap()
}

/// Hermitian matrix with i.i.d. Gaussian entries (GUE up to scale).
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ginibre(rng, dim).hermitian_part()
}

/// Random observable scaled to unit spectral norm.
pub fn observable<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Observable {
    let h = hermitian(rng, dim);
    let (values, _) = h.eigh().unwrap();
    let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Observable::new(h.scale_real(1.0 / norm)).unwrap()
}

/// Haar-random unitary by Gram–Schmidt on a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v: Vec<Complex64> = (0..dim).map(|i| g[(i, j)]).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|x| x / n).collect());
    }
    let mut u = ComplexMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            u[(i, j)] = x;
        }
    }
    u
}

/// Random phase noise with respect to `k` built from `kraus_count` Kraus operators.
pub fn phase_noise<R: Rng + ?Sized>(
    rng: &mut R,
    k: &Observable,
    kraus_count: usize,
) -> QuantumChannel {
    let columns: Vec<Vec<Complex64>> = (0..k.dim())
        .map(|_| {
            let column: Vec<Complex64> = (0..kraus_count).map(|_| gaussian(rng)).collect();
            let norm = column.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            column.into_iter().map(|c| c / norm).collect()
        })
        .collect();
    let coeffs: Vec<Vec<Complex64>> = (0..kraus_count)
        .map(|n| columns.iter().map(|col| col[n]).collect())
        .collect();
    QuantumChannel::phase_noise(k, &coeffs).unwrap()
}

/// Random unital channel: a convex mixture of random unitaries.
pub fn unital_channel<R: Rng + ?Sized>(rng: &mut R, dim: usize, terms: usize) -> QuantumChannel {
    let weights: Vec<f64> = (0..terms).map(|_| rng.next_u64() as f64 + 1.0).collect();
    let total: f64 = weights.iter().sum();
    let kraus = weights
        .iter()
        .map(|w| unitary(rng, dim).scale_real((w / total).sqrt()))
        .collect();
    QuantumChannel::new(kraus).unwrap()
}

/// Random pure-selection setup with `P(f|i) ≥ min_overlap`.
///
/// The probe state and both observables are random; `A` lives on the measured
/// system of dimension `dim_a`, `K` on the probe of dimension `dim_b`.
pub fn setup<R: Rng + ?Sized>(
    rng: &mut R,
    dim_a: usize,
    dim_b: usize,
    theta: f64,
    min_overlap: f64,
) -> Result<WeakSetup> {
    let (pre, post) = loop {
        let pre = pure_state(rng, dim_a);
        let post = pure_state(rng, dim_a);
        if pre.inner(&post).norm_sqr() >= min_overlap {
            break (pre, post);
        }
    };
    WeakSetup::new(
        Selection::Pure(pre),
        Selection::Pure(post),
        observable(rng, dim_a),
        observable(rng, dim_b),
        theta,
        density(rng, dim_b),
    )
}

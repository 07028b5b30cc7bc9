//! Cumulants of the probe coupling observable and their first-order shift
//! under weak measurement.

use serde::Serialize;

use crate::engine::{evolve_exact, WeakSetup};
use crate::error::{Error, Result};
use crate::matrix::TOL;
use crate::state::{expectation, DensityOperator, Observable};

/// Largest cumulant order computed; higher orders lose too much to cancellation.
pub const MAX_ORDER: usize = 6;

/// Cumulants `κ_1 ..= κ_max_order`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CumulantSeries {
    orders: Vec<f64>,
}

impl CumulantSeries {
    pub fn max_order(&self) -> usize {
        self.orders.len()
    }

    /// `κ_n` for `1 ≤ n ≤ max_order`.
    pub fn get(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.orders.get(i)).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.orders
    }
}

fn check_trace(sigma: &DensityOperator) -> Result<f64> {
    let tr = sigma.trace();
    if tr <= TOL {
        return Err(Error::DegeneratePostSelection { trace: tr });
    }
    Ok(tr)
}

/// `Φ(s) = log[tr(σ e^{sK}) / tr σ]`, evaluated in the eigenbasis of `K`.
pub fn cgf(sigma: &DensityOperator, k: &Observable, s: f64) -> Result<f64> {
    let tr = check_trace(sigma)?;
    let mgf: f64 = k
        .distribution(sigma)
        .iter()
        .zip(k.eigenvalues())
        .map(|(p, lambda)| p * (s * lambda).exp())
        .sum();
    Ok((mgf / tr).ln())
}

/// Raw moments `tr(σKⁿ)/tr σ` for `n = 1..=max_order`.
pub fn raw_moments(sigma: &DensityOperator, k: &Observable, max_order: usize) -> Result<Vec<f64>> {
    let tr = check_trace(sigma)?;
    let dist = k.distribution(sigma);
    Ok((1..=max_order as i32)
        .map(|n| {
            dist.iter()
                .zip(k.eigenvalues())
                .map(|(p, lambda)| p * lambda.powi(n))
                .sum::<f64>()
                / tr
        })
        .collect())
}

/// `κ_n = m_n − Σ_{j=1}^{n−1} C(n−1, j−1) κ_j m_{n−j}`.
pub fn moments_to_cumulants(moments: &[f64]) -> Vec<f64> {
    let mut kappa: Vec<f64> = Vec::with_capacity(moments.len());
    for n in 1..=moments.len() {
        let mut value = moments[n - 1];
        let mut binom = 1.0; // C(n-1, j-1) starting at j = 1
        for j in 1..n {
            value -= binom * kappa[j - 1] * moments[n - j - 1];
            binom = binom * (n - j) as f64 / j as f64;
        }
        kappa.push(value);
    }
    kappa
}

/// Cumulants of `K` in the state `σ` from exact moments.
pub fn cumulants_of(
    sigma: &DensityOperator,
    k: &Observable,
    max_order: usize,
) -> Result<CumulantSeries> {
    if max_order == 0 || max_order > MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "cumulant order must be in 1..={MAX_ORDER}, got {max_order}"
        )));
    }
    let moments = raw_moments(sigma, k, max_order)?;
    Ok(CumulantSeries {
        orders: moments_to_cumulants(&moments),
    })
}

/// First-order change of `κ_n`: `2θ Im⟨A⟩_w κ_{n+1}` of the initial probe.
pub fn predict_cumulant_shift(setup: &WeakSetup, n: usize) -> Result<f64> {
    if n == 0 || n >= MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "cumulant shift order must be in 1..{MAX_ORDER}, got {n}"
        )));
    }
    let w = setup.weak_value()?;
    let series = cumulants_of(setup.probe(), setup.k(), n + 1)?;
    Ok(2.0 * setup.theta() * w.im * series.get(n + 1).unwrap())
}

/// Exact change `κ_n(σ_f) − κ_n(σ_i)` from full evolution.
pub fn exact_cumulant_shift(setup: &WeakSetup, n: usize) -> Result<f64> {
    let (sigma_f, _) = evolve_exact(setup)?;
    let before = cumulants_of(setup.probe(), setup.k(), n)?;
    let after = cumulants_of(&sigma_f, setup.k(), n)?;
    Ok(after.get(n).unwrap() - before.get(n).unwrap())
}

/// Largest deviation over `s_grid` between the exact final CGF and
/// `Φ_i(s + 2θ Im⟨A⟩_w) − 2θ Im⟨A⟩_w ⟨K⟩_i`.
pub fn verify_cgf_relation(setup: &WeakSetup, s_grid: &[f64]) -> Result<f64> {
    let w = setup.weak_value()?;
    let shift = 2.0 * setup.theta() * w.im;
    let (sigma_f, _) = evolve_exact(setup)?;
    let k_mean = expectation(setup.probe(), setup.k())?;
    s_grid.iter().try_fold(0.0f64, |worst, &s| {
        let exact = cgf(&sigma_f, setup.k(), s)?;
        let predicted = cgf(setup.probe(), setup.k(), s + shift)? - shift * k_mean;
        Ok(worst.max((exact - predicted).abs()))
    })
}

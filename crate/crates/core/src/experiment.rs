//! Numerical model of the Mach–Zehnder polarization-rotation experiment.
//!
//! The path of the photon is the measured system (`|0⟩` upper arm, `|1⟩`
//! lower arm) and its polarization is the probe. The first beam splitter
//! prepares `(|0⟩+|1⟩)/√2`; observing one output port post-selects
//! `(|0⟩+e^{iδ}|1⟩)/√2`, blended with `I/2` when the fringe visibility `V` is
//! below one. A half-wave plate at angle `θ` in the upper arm realizes
//! `exp(2iθ P₀⊗Z)`, which the engine sees as coupling `−2θ` with `A = P₀`,
//! `K = Z`. The common plate rotation is absorbed into the polarization
//! measurement basis and never simulated.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{evolve_exact, Selection, WeakSetup};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, TOL};
use crate::state::{expectation, DensityOperator, Observable, PureState};

/// Half-width of the default fit window, 2 degrees.
pub const FIT_HALF_WIDTH: f64 = 2.0 * std::f64::consts::PI / 180.0;
/// Number of evenly spaced plate angles in the default fit window.
pub const FIT_POINTS: usize = 9;

/// `FIT_POINTS` evenly spaced angles over `±FIT_HALF_WIDTH`.
pub fn default_theta_grid() -> Vec<f64> {
    let step = 2.0 * FIT_HALF_WIDTH / (FIT_POINTS - 1) as f64;
    (0..FIT_POINTS)
        .map(|i| -FIT_HALF_WIDTH + step * i as f64)
        .collect()
}

#[derive(Clone, Debug)]
pub struct MzConfig {
    /// Relative phase of the post-selected path state, radians.
    pub delta: f64,
    /// Fringe visibility in `[0, 1]`.
    pub visibility: f64,
    /// Half-wave plate angles used for the linear fit, radians.
    pub theta_grid: Vec<f64>,
    /// Polarization state entering the interferometer.
    pub probe: DensityOperator,
}

impl MzConfig {
    /// Unpolarized light, the default ±2° nine-point fit window.
    pub fn new(delta: f64, visibility: f64) -> Self {
        Self {
            delta,
            visibility,
            theta_grid: default_theta_grid(),
            probe: DensityOperator::maximally_mixed(2),
        }
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self {
            delta,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::InvalidParameter(format!(
                "visibility must lie in [0, 1], got {}",
                self.visibility
            )));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta must be finite, got {}",
                self.delta
            )));
        }
        if self.theta_grid.is_empty() {
            return Err(Error::InvalidParameter("theta grid is empty".into()));
        }
        let mut sorted = self.theta_grid.clone();
        sorted.sort_by(f64::total_cmp);
        let symmetric = sorted
            .iter()
            .zip(sorted.iter().rev())
            .all(|(a, b)| (a + b).abs() <= TOL);
        if !symmetric {
            return Err(Error::InvalidParameter(
                "theta grid must be symmetric about 0".into(),
            ));
        }
        if self.probe.dim() != 2 {
            return Err(Error::NotQubit(self.probe.dim()));
        }
        Ok(())
    }
}

/// `(|0⟩ + |1⟩)/√2`.
pub fn pre_selection() -> PureState {
    PureState::normalized(vec![Complex64::new(1.0, 0.0); 2]).unwrap()
}

/// `(|0⟩ + e^{iδ}|1⟩)/√2`.
pub fn ideal_post_selection(delta: f64) -> PureState {
    PureState::normalized(vec![
        Complex64::new(1.0, 0.0),
        Complex64::from_polar(1.0, delta),
    ])
    .unwrap()
}

/// `V |ψ_f⟩⟨ψ_f| + (1−V) I/2`, kept as a pure selection when `V = 1`.
pub fn post_selection(delta: f64, visibility: f64) -> Result<Selection> {
    let ideal = ideal_post_selection(delta);
    if visibility == 1.0 {
        return Ok(Selection::Pure(ideal));
    }
    let blend = &ideal.projector().scale_real(visibility)
        + &ComplexMatrix::identity(2).scale_real((1.0 - visibility) / 2.0);
    Ok(Selection::Mixed(DensityOperator::new(blend)?))
}

/// Engine setup for plate angle `hwp_angle`.
pub fn mz_setup(cfg: &MzConfig, hwp_angle: f64) -> Result<WeakSetup> {
    cfg.validate()?;
    WeakSetup::new(
        Selection::Pure(pre_selection()),
        post_selection(cfg.delta, cfg.visibility)?,
        Observable::basis_projector(2, 0),
        Observable::pauli_z(),
        -2.0 * hwp_angle,
        cfg.probe.clone(),
    )
}

/// Closed-form `(tr σ_f, tr σ_f Z)` for unpolarized input light.
pub fn analytic_outputs(cfg: &MzConfig, theta: f64) -> (f64, f64) {
    let (v, d) = (cfg.visibility, cfg.delta);
    let ideal_power = 0.5 * (1.0 + d.cos() * (2.0 * theta).cos());
    let ideal_z = -0.5 * d.sin() * (2.0 * theta).sin();
    (v * ideal_power + (1.0 - v) * 0.5, v * ideal_z)
}

/// `Im⟨P₀⟩_w = V sin δ / (2(1 + V cos δ))`.
pub fn analytic_im_weak_value(delta: f64, visibility: f64) -> f64 {
    visibility * delta.sin() / (2.0 * (1.0 + visibility * delta.cos()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero when only two points are fitted.
    pub slope_stderr: f64,
}

/// Unweighted ordinary least squares.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    assert_eq!(xs.len(), ys.len());
    let mut distinct = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::SingularFit {
            distinct: distinct.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if xs.len() > 2 {
        let ssr: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extraction {
    pub im_weak_value: f64,
    /// Standard error of the fitted slope of `⟨Z⟩_f` against `θ`.
    pub fit_stderr: f64,
}

/// Runs the exact interferometer over the plate-angle grid.
fn simulate_grid(cfg: &MzConfig) -> Result<Vec<(f64, f64, f64)>> {
    let z = Observable::pauli_z();
    cfg.theta_grid
        .iter()
        .map(|&theta| {
            let (sigma_f, power) = evolve_exact(&mz_setup(cfg, theta)?)?;
            Ok((theta, power, expectation(&sigma_f, &z)?))
        })
        .collect()
}

/// Fits the normalized polarization `⟨Z⟩_f` against the plate angle and
/// returns `−slope/4`.
pub fn extract_weak_value(cfg: &MzConfig) -> Result<Extraction> {
    let points = simulate_grid(cfg)?;
    extraction_from(&points)
}

fn extraction_from(points: &[(f64, f64, f64)]) -> Result<Extraction> {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.2).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(Extraction {
        im_weak_value: -fit.slope / 4.0,
        fit_stderr: fit.slope_stderr,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub delta: f64,
    pub extracted_im_weak_value: f64,
    pub analytic_im_weak_value: f64,
    pub fit_stderr: f64,
    /// `(θ, tr σ_f)` over the fit grid.
    pub power_curve: Vec<(f64, f64)>,
    /// `(θ, ⟨Z⟩_f)` over the fit grid.
    pub polarization_curve: Vec<(f64, f64)>,
}

pub fn sweep_point(cfg: &MzConfig) -> Result<SweepRecord> {
    let points = simulate_grid(cfg)?;
    let extraction = extraction_from(&points)?;
    Ok(SweepRecord {
        delta: cfg.delta,
        extracted_im_weak_value: extraction.im_weak_value,
        analytic_im_weak_value: analytic_im_weak_value(cfg.delta, cfg.visibility),
        fit_stderr: extraction.fit_stderr,
        power_curve: points.iter().map(|p| (p.0, p.1)).collect(),
        polarization_curve: points.iter().map(|p| (p.0, p.2)).collect(),
    })
}

/// One record per `δ`, in input order.
pub fn sweep(deltas: &[f64], template: &MzConfig) -> Result<Vec<SweepRecord>> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one delta".into(),
        ));
    }
    template.validate()?;
    deltas
        .par_iter()
        .map(|&delta| sweep_point(&template.with_delta(delta)))
        .collect()
}

/// `count` evenly spaced values over `[start, stop]`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count).map(|i| start + step * i as f64).collect()
        }
    }
}

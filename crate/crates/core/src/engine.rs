//! Weak values, exact pre/post-selected evolution of the probe, first-order
//! shift predictions, signal-to-noise ratios and shot-level Monte Carlo.
//!
//! The interaction is `U(θ) = exp(−iθ A⊗K)` with the measured system as the
//! left tensor factor. Exact results always come from [`evolve_exact`], which
//! never linearizes in `θ`; the `predict_*` functions return strictly the
//! first-order expressions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, TOL};
use crate::state::{
    expectation, normalized_trace, variance, DensityOperator, Observable, PureState,
};

/// Smallest acceptable overlap `|⟨f|i⟩|²` (or `tr(ρ_i ρ_f)`) between the
/// pre- and post-selection.
pub const OVERLAP_FLOOR: f64 = 1e-12;

/// A pre- or post-selection of the measured system.
///
/// A mixed post-selection is used directly as the effect operator of the
/// post-selecting measurement.
#[derive(Clone, Debug)]
pub enum Selection {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl Selection {
    pub fn dim(&self) -> usize {
        match self {
            Selection::Pure(s) => s.dim(),
            Selection::Mixed(rho) => rho.dim(),
        }
    }

    pub fn density(&self) -> DensityOperator {
        match self {
            Selection::Pure(s) => s.to_density(),
            Selection::Mixed(rho) => rho.clone(),
        }
    }

    pub fn operator(&self) -> ComplexMatrix {
        match self {
            Selection::Pure(s) => s.projector(),
            Selection::Mixed(rho) => rho.matrix().clone(),
        }
    }
}

impl From<PureState> for Selection {
    fn from(s: PureState) -> Self {
        Selection::Pure(s)
    }
}

impl From<DensityOperator> for Selection {
    fn from(rho: DensityOperator) -> Self {
        Selection::Mixed(rho)
    }
}

/// Everything needed to describe one weak measurement.
#[derive(Clone, Debug)]
pub struct WeakSetup {
    pre: Selection,
    post: Selection,
    a: Observable,
    k: Observable,
    theta: f64,
    probe: DensityOperator,
}

impl WeakSetup {
    pub fn new(
        pre: Selection,
        post: Selection,
        a: Observable,
        k: Observable,
        theta: f64,
        probe: DensityOperator,
    ) -> Result<Self> {
        for dim in [pre.dim(), post.dim()] {
            if dim != a.dim() {
                return Err(Error::DimensionMismatch {
                    expected: a.dim(),
                    found: dim,
                });
            }
        }
        if probe.dim() != k.dim() {
            return Err(Error::DimensionMismatch {
                expected: k.dim(),
                found: probe.dim(),
            });
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling must be finite, got {theta}"
            )));
        }
        Ok(Self {
            pre,
            post,
            a,
            k,
            theta,
            probe,
        })
    }

    pub fn pre(&self) -> &Selection {
        &self.pre
    }

    pub fn post(&self) -> &Selection {
        &self.post
    }

    pub fn a(&self) -> &Observable {
        &self.a
    }

    pub fn k(&self) -> &Observable {
        &self.k
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn probe(&self) -> &DensityOperator {
        &self.probe
    }

    pub fn dim_measured(&self) -> usize {
        self.a.dim()
    }

    pub fn dim_probe(&self) -> usize {
        self.k.dim()
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        Self {
            theta,
            ..self.clone()
        }
    }

    pub fn with_probe(&self, probe: DensityOperator) -> Result<Self> {
        Self::new(
            self.pre.clone(),
            self.post.clone(),
            self.a.clone(),
            self.k.clone(),
            self.theta,
            probe,
        )
    }

    /// Weak value of `A`; uses the mixed-state formula unless both
    /// selections are pure.
    pub fn weak_value(&self) -> Result<Complex64> {
        match (&self.pre, &self.post) {
            (Selection::Pure(i), Selection::Pure(f)) => weak_value(i, f, &self.a),
            (pre, post) => weak_value_mixed(&pre.density(), &post.density(), &self.a),
        }
    }

    /// Post-selection probability at zero coupling: `|⟨f|i⟩|²`, or
    /// `tr(ρ_i ρ_f)` when either selection is mixed.
    pub fn success_probability(&self) -> f64 {
        match (&self.pre, &self.post) {
            (Selection::Pure(i), Selection::Pure(f)) => f.inner(i).norm_sqr(),
            (pre, post) => (pre.density().matrix() * &post.operator()).trace().re,
        }
    }
}

/// `⟨f|A|i⟩ / ⟨f|i⟩`.
pub fn weak_value(pre: &PureState, post: &PureState, a: &Observable) -> Result<Complex64> {
    if pre.dim() != a.dim() || post.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: if pre.dim() != a.dim() {
                pre.dim()
            } else {
                post.dim()
            },
        });
    }
    let overlap = post.inner(pre);
    if overlap.norm_sqr() <= OVERLAP_FLOOR {
        return Err(Error::OrthogonalSelection {
            overlap: overlap.norm_sqr(),
            floor: OVERLAP_FLOOR,
        });
    }
    let a_pre = a.matrix().apply(pre.amplitudes());
    let numerator: Complex64 = post
        .amplitudes()
        .iter()
        .zip(&a_pre)
        .map(|(f, x)| f.conj() * x)
        .sum();
    Ok(numerator / overlap)
}

/// `tr(ρ_f A ρ_i) / tr(ρ_i ρ_f)`.
pub fn weak_value_mixed(
    rho_i: &DensityOperator,
    rho_f: &DensityOperator,
    a: &Observable,
) -> Result<Complex64> {
    for dim in [rho_i.dim(), rho_f.dim()] {
        if dim != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: dim,
            });
        }
    }
    let denominator = (rho_i.matrix() * rho_f.matrix()).trace().re;
    if denominator <= OVERLAP_FLOOR {
        return Err(Error::OrthogonalSelection {
            overlap: denominator,
            floor: OVERLAP_FLOOR,
        });
    }
    let numerator = (&(rho_f.matrix() * a.matrix()) * rho_i.matrix()).trace();
    Ok(numerator / denominator)
}

/// `exp(−iθ A⊗K)` from the eigendecomposition of `A⊗K`.
pub fn interaction_unitary(a: &Observable, k: &Observable, theta: f64) -> Result<ComplexMatrix> {
    a.matrix()
        .kron(k.matrix())
        .exp_hermitian(Complex64::new(0.0, -theta))
}

/// Exact final probe state after interaction and post-selection.
///
/// Returns the sub-normalized probe state `σ_f` and its trace, the success
/// probability of the post-selection at this coupling.
pub fn evolve_exact(setup: &WeakSetup) -> Result<(DensityOperator, f64)> {
    let (dim_a, dim_b) = (setup.dim_measured(), setup.dim_probe());
    let u = interaction_unitary(&setup.a, &setup.k, setup.theta)?;
    let joint = setup.pre.density().matrix().kron(setup.probe.matrix());
    let evolved = &(&u * &joint) * &u.dagger();
    let effect = setup.post.operator().kron(&ComplexMatrix::identity(dim_b));
    let reduced = (&effect * &evolved).partial_trace_left(dim_a, dim_b)?;
    let sigma_f = DensityOperator::from_matrix_unchecked(reduced);
    let trace = sigma_f.trace();
    Ok((sigma_f, trace))
}

/// `⟨f|U|i⟩` as an operator on the probe.
pub fn conditional_probe_operator(
    pre: &PureState,
    post: &PureState,
    u: &ComplexMatrix,
    dim_probe: usize,
) -> Result<ComplexMatrix> {
    let dim_a = pre.dim();
    if u.dim() != dim_a * dim_probe || post.dim() != dim_a {
        return Err(Error::DimensionMismatch {
            expected: dim_a * dim_probe,
            found: u.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(dim_probe);
    for (a, fa) in post.amplitudes().iter().enumerate() {
        for (b, ib) in pre.amplitudes().iter().enumerate() {
            let w = fa.conj() * ib;
            for k in 0..dim_probe {
                for l in 0..dim_probe {
                    out[(k, l)] += w * u[(a * dim_probe + k, b * dim_probe + l)];
                }
            }
        }
    }
    Ok(out)
}

/// `U_eff(θ) = exp(−iθ⟨A⟩_w K)`, non-unitary whenever `Im⟨A⟩_w ≠ 0`.
pub fn effective_evolution(
    pre: &PureState,
    post: &PureState,
    a: &Observable,
    k: &Observable,
    theta: f64,
) -> Result<ComplexMatrix> {
    let w = weak_value(pre, post, a)?;
    let generator = k.matrix().scale(Complex64::new(0.0, -theta) * w);
    Ok(generator.expm())
}

/// First-order shift of `⟨M⟩`:
/// `θ Re⟨A⟩_w ⟨i[K,M]⟩_i + θ Im⟨A⟩_w ⟨{δK, δM}⟩_i`.
pub fn predict_shift(setup: &WeakSetup, m: &Observable) -> Result<f64> {
    let w = setup.weak_value()?;
    let (k, probe) = (&setup.k, &setup.probe);
    let commutator = k.matrix().commutator(m.matrix()).scale(Complex64::i());
    let real_term = normalized_trace(probe, &commutator)?.re;
    let anti = normalized_trace(probe, &k.matrix().anticommutator(m.matrix()))?.re;
    let correlation = anti - 2.0 * expectation(probe, k)? * expectation(probe, m)?;
    Ok(setup.theta * (w.re * real_term + w.im * correlation))
}

/// Exact shift `⟨M⟩_f − ⟨M⟩_i`.
pub fn exact_shift(setup: &WeakSetup, m: &Observable) -> Result<f64> {
    let (sigma_f, _) = evolve_exact(setup)?;
    Ok(expectation(&sigma_f, m)? - expectation(&setup.probe, m)?)
}

/// Predicted SNR after `n` runs: `2θ Im⟨A⟩_w √(N P(f|i) Var_i(K))`.
pub fn predicted_snr(setup: &WeakSetup, n: u64) -> Result<f64> {
    let w = setup.weak_value()?;
    let var = variance(&setup.probe, &setup.k)?.max(0.0);
    let p = setup.success_probability();
    Ok(2.0 * setup.theta * w.im * (n as f64 * p * var).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftReport {
    pub exact_shift: f64,
    pub first_order_shift: f64,
    pub success_probability: f64,
    pub snr_predicted: f64,
}

pub fn shift_report(setup: &WeakSetup, m: &Observable, n: u64) -> Result<ShiftReport> {
    let (sigma_f, trace) = evolve_exact(setup)?;
    Ok(ShiftReport {
        exact_shift: expectation(&sigma_f, m)? - expectation(&setup.probe, m)?,
        first_order_shift: predict_shift(setup, m)?,
        success_probability: trace,
        snr_predicted: predicted_snr(setup, n)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub mean_shift: f64,
    pub empirical_snr: f64,
    pub accepted: u64,
    pub shots: u64,
}

const SHOTS_PER_CHUNK: u64 = 1 << 16;
// Each shot draws two u64 values, i.e. four 32-bit ChaCha words.
const WORDS_PER_SHOT: u128 = 4;

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Shot-level simulation of `n` runs.
///
/// Each shot is accepted with probability `tr σ_f`; accepted shots sample an
/// eigenvalue of `M` from the normalized final probe state. Shot `j` always
/// reads the same position of the ChaCha stream keyed by `seed`, so the result
/// does not depend on how the shots are split across threads.
pub fn monte_carlo(
    setup: &WeakSetup,
    m: &Observable,
    n: u64,
    seed: u64,
) -> Result<MonteCarloResult> {
    let id = QuantumChannel::identity(setup.dim_probe());
    monte_carlo_noisy(setup, &id, &id, m, n, seed)
}

/// [`monte_carlo`] with probe noise before and after the interaction. The
/// shift is measured from `⟨M⟩` of the probe after `pre_noise`.
pub fn monte_carlo_noisy(
    setup: &WeakSetup,
    pre_noise: &QuantumChannel,
    post_noise: &QuantumChannel,
    m: &Observable,
    n: u64,
    seed: u64,
) -> Result<MonteCarloResult> {
    if m.dim() != setup.dim_probe() {
        return Err(Error::DimensionMismatch {
            expected: setup.dim_probe(),
            found: m.dim(),
        });
    }
    let setup = setup.with_probe(pre_noise.apply(&setup.probe)?)?;
    let (sigma_f, accept) = evolve_exact(&setup)?;
    let sigma_f = post_noise.apply(&sigma_f)?;
    let mut probs: Vec<f64> = m
        .distribution(&sigma_f)
        .into_iter()
        .map(|p| p.max(0.0))
        .collect();
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    let cdf: Vec<f64> = probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let outcomes = m.dim();
    let chunks = n.div_ceil(SHOTS_PER_CHUNK);

    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * SHOTS_PER_CHUNK;
            let end = (start + SHOTS_PER_CHUNK).min(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_word_pos(start as u128 * WORDS_PER_SHOT);
            let mut counts = vec![0u64; outcomes];
            for _ in start..end {
                let u_accept = uniform(&mut rng);
                let u_sample = uniform(&mut rng);
                if u_accept < accept {
                    let idx = cdf.partition_point(|&c| c <= u_sample).min(outcomes - 1);
                    counts[idx] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; outcomes],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let accepted: u64 = counts.iter().sum();
    if accepted == 0 {
        return Err(Error::InsufficientStatistics { accepted });
    }
    let values = m.eigenvalues();
    let nf = accepted as f64;
    let mean = counts
        .iter()
        .zip(values)
        .map(|(&c, v)| c as f64 * v)
        .sum::<f64>()
        / nf;
    let var = counts
        .iter()
        .zip(values)
        .map(|(&c, v)| c as f64 * (v - mean).powi(2))
        .sum::<f64>()
        / nf;
    let mean_shift = mean - expectation(setup.probe(), m)?;
    let sd = var.sqrt();
    let empirical_snr = if sd > 0.0 {
        mean_shift * nf.sqrt() / sd
    } else if mean_shift.abs() <= TOL {
        0.0
    } else {
        mean_shift.signum() * f64::INFINITY
    };
    Ok(MonteCarloResult {
        mean_shift,
        empirical_snr,
        accepted,
        shots: n,
    })
}

/// Probe noise `E_i` before and `E_f` after the interaction; returns the
/// sub-normalized final distribution `p'_f(k)` over the eigenbasis of `K`.
pub fn noisy_pipeline(
    setup: &WeakSetup,
    pre_noise: &QuantumChannel,
    post_noise: &QuantumChannel,
) -> Result<Vec<f64>> {
    let noisy_probe = pre_noise.apply(&setup.probe)?;
    let (sigma_f, _) = evolve_exact(&setup.with_probe(noisy_probe)?)?;
    let sigma_f = post_noise.apply(&sigma_f)?;
    Ok(setup.k.distribution(&sigma_f))
}

/// One arrow of the Bloch-ball flow at a probe state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowVector {
    pub point: [f64; 3],
    /// Unitary flow driven by `Re⟨A⟩_w`.
    pub real_part: [f64; 3],
    /// Non-unitary flow driven by `Im⟨A⟩_w`.
    pub imag_part: [f64; 3],
}

/// `d/dθ` at `θ = 0` of the normalized final Bloch vector for each qubit
/// probe state in `grid`, split by the real and imaginary parts of the weak
/// value.
pub fn bloch_flow_field(
    a: &Observable,
    k: &Observable,
    pre: &PureState,
    post: &PureState,
    grid: &[DensityOperator],
) -> Result<Vec<FlowVector>> {
    flow_field_for_weak_value(weak_value(pre, post, a)?, k, grid)
}

/// The flow for an arbitrary weak value `w`, e.g. one from mixed selections.
pub fn flow_field_for_weak_value(
    w: Complex64,
    k: &Observable,
    grid: &[DensityOperator],
) -> Result<Vec<FlowVector>> {
    if k.dim() != 2 {
        return Err(Error::NotQubit(k.dim()));
    }
    let paulis = [
        ComplexMatrix::pauli_x(),
        ComplexMatrix::pauli_y(),
        ComplexMatrix::pauli_z(),
    ];
    let bloch = |m: &ComplexMatrix| -> [f64; 3] {
        let mut out = [0.0; 3];
        for (o, p) in out.iter_mut().zip(&paulis) {
            *o = (p * m).trace().re;
        }
        out
    };
    grid.iter()
        .map(|sigma| {
            if sigma.dim() != 2 {
                return Err(Error::NotQubit(sigma.dim()));
            }
            let sigma = sigma.normalized()?;
            let s = sigma.matrix();
            let k_mean = expectation(&sigma, k)?;
            let unitary = k.matrix().commutator(s).scale(Complex64::new(0.0, -w.re));
            let nonunitary = &k.matrix().anticommutator(s) - &s.scale_real(2.0 * k_mean);
            Ok(FlowVector {
                point: bloch(s),
                real_part: bloch(&unitary),
                imag_part: bloch(&nonunitary.scale_real(w.im)),
            })
        })
        .collect()
}

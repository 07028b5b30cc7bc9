//! Pure states, density operators and observables.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, EIG_TOL, TOL};

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter(
                "state must have at least one amplitude".into(),
            ));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `amplitudes` before construction.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm <= TOL {
            return Err(Error::NotNormalized(norm * norm));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            matrix: self.projector(),
        }
    }
}

/// A positive semidefinite operator with trace at most one.
///
/// Post-selected probe states are sub-normalized: their trace is the success
/// probability of the post-selection.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates a state with `0 < tr ≤ 1`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::subnormalized(matrix)?;
        let tr = rho.trace();
        if tr <= TOL {
            return Err(Error::InvalidTrace(tr));
        }
        Ok(rho)
    }

    /// Validates a state with `0 ≤ tr ≤ 1`; zero trace is allowed.
    pub fn subnormalized(matrix: ComplexMatrix) -> Result<Self> {
        let dev = matrix.hermitian_deviation();
        if dev > TOL {
            return Err(Error::NotHermitian(dev));
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if !(-TOL..=1.0 + TOL).contains(&tr) {
            return Err(Error::InvalidTrace(tr));
        }
        let (values, _) = matrix.eigh()?;
        if values[0] < -TOL {
            return Err(Error::NotPositive(values[0]));
        }
        Ok(Self { matrix })
    }

    /// Wraps an operator known to be a valid (sub-)state without re-checking.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    /// The completely mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// A state diagonal in the computational basis.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diag(probabilities))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Rescales to unit trace.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= TOL {
            return Err(Error::DegeneratePostSelection { trace: tr });
        }
        Ok(Self {
            matrix: self.matrix.scale_real(1.0 / tr),
        })
    }

    /// Removes all coherences between eigenspaces of `k`.
    pub fn dephased(&self, k: &Observable) -> Self {
        let mut out = ComplexMatrix::zeros(self.dim());
        for group in k.degenerate_groups() {
            let mut proj = ComplexMatrix::zeros(self.dim());
            for &i in &group {
                proj = &proj + &k.eigenprojector(i);
            }
            out = &out + &(&(&proj * &self.matrix) * &proj);
        }
        Self::from_matrix_unchecked(out)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.matrix.approx_eq(&other.matrix, tol)
    }
}

/// Joint state `ρ_A ⊗ σ_B`.
pub fn tensor_states(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    DensityOperator::from_matrix_unchecked(a.matrix.kron(&b.matrix))
}

/// Traces out the measured (left) factor of a joint state.
pub fn partial_trace_measured(
    rho: &DensityOperator,
    dim_a: usize,
    dim_b: usize,
) -> Result<DensityOperator> {
    let reduced = rho.matrix.partial_trace_left(dim_a, dim_b)?;
    Ok(DensityOperator::from_matrix_unchecked(reduced))
}

/// A Hermitian operator together with its spectral decomposition.
#[derive(Clone, Debug)]
pub struct Observable {
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<Complex64>>,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dev = matrix.hermitian_deviation();
        if dev > TOL {
            return Err(Error::NotHermitian(dev));
        }
        let matrix = matrix.hermitian_part();
        let (eigenvalues, eigenvectors) = matrix.eigh()?;
        let obs = Self {
            matrix,
            eigenvalues,
            eigenvectors,
        };
        let residual = obs.reconstruct().max_abs_diff(&obs.matrix);
        if residual > EIG_TOL {
            return Err(Error::InvalidParameter(format!(
                "eigendecomposition residual {residual:e} exceeds tolerance"
            )));
        }
        Ok(obs)
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::new(ComplexMatrix::from_real_diag(diag)).expect("diagonal matrices are Hermitian")
    }

    pub fn pauli_x() -> Self {
        Self::new(ComplexMatrix::pauli_x()).unwrap()
    }

    pub fn pauli_y() -> Self {
        Self::new(ComplexMatrix::pauli_y()).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diag(&[1.0, -1.0])
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diag(&vec![1.0; dim])
    }

    /// Projector onto computational basis state `|index⟩`.
    pub fn basis_projector(dim: usize, index: usize) -> Self {
        let mut diag = vec![0.0; dim];
        diag[index] = 1.0;
        Self::from_real_diag(&diag)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Vec<Complex64>] {
        &self.eigenvectors
    }

    pub fn eigenprojector(&self, index: usize) -> ComplexMatrix {
        let v = &self.eigenvectors[index];
        ComplexMatrix::outer(v, v)
    }

    /// `Σ_k λ_k |k⟩⟨k|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim());
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            out = &out + &self.eigenprojector(i).scale_real(lambda);
        }
        out
    }

    /// Indices of eigenvectors grouped by (numerically) equal eigenvalue.
    pub fn degenerate_groups(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            match groups.last_mut() {
                Some(g)
                    if (self.eigenvalues[g[0]] - lambda).abs()
                        <= EIG_TOL * lambda.abs().max(1.0) =>
                {
                    g.push(i)
                }
                _ => groups.push(vec![i]),
            }
        }
        groups
    }

    /// `⟨k|σ|k⟩` for each eigenvector, i.e. the (sub-normalized) outcome distribution.
    pub fn distribution(&self, sigma: &DensityOperator) -> Vec<f64> {
        self.eigenvectors
            .iter()
            .map(|v| {
                let sv = sigma.matrix().apply(v);
                v.iter()
                    .zip(&sv)
                    .map(|(a, b)| a.conj() * b)
                    .sum::<Complex64>()
                    .re
            })
            .collect()
    }

    /// The observable `f(self)` defined on the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut matrix = ComplexMatrix::zeros(self.dim());
        let eigenvalues: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        for (i, &lambda) in eigenvalues.iter().enumerate() {
            matrix = &matrix + &self.eigenprojector(i).scale_real(lambda);
        }
        Self::new(matrix).expect("real function of a Hermitian operator is Hermitian")
    }
}

fn check_dims(sigma: &DensityOperator, m: &ComplexMatrix) -> Result<()> {
    if sigma.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: m.dim(),
        });
    }
    Ok(())
}

/// `tr(σ X) / tr σ` for a general operator `X`.
pub fn normalized_trace(sigma: &DensityOperator, x: &ComplexMatrix) -> Result<Complex64> {
    check_dims(sigma, x)?;
    let tr = sigma.trace();
    if tr <= TOL {
        return Err(Error::DegeneratePostSelection { trace: tr });
    }
    Ok((sigma.matrix() * x).trace() / tr)
}

/// `⟨M⟩ = tr(σM)/tr σ`.
pub fn expectation(sigma: &DensityOperator, m: &Observable) -> Result<f64> {
    let value = normalized_trace(sigma, m.matrix())?;
    if value.im.abs() > TOL {
        return Err(Error::NotHermitian(value.im.abs()));
    }
    Ok(value.re)
}

/// `⟨M²⟩ − ⟨M⟩²`.
pub fn variance(sigma: &DensityOperator, m: &Observable) -> Result<f64> {
    let mean = expectation(sigma, m)?;
    let m2 = normalized_trace(sigma, &(m.matrix() * m.matrix()))?.re;
    Ok(m2 - mean * mean)
}

/// Bloch vector of the normalized qubit state.
pub fn bloch_vector(sigma: &DensityOperator) -> Result<[f64; 3]> {
    if sigma.dim() != 2 {
        return Err(Error::NotQubit(sigma.dim()));
    }
    Ok([
        normalized_trace(sigma, &ComplexMatrix::pauli_x())?.re,
        normalized_trace(sigma, &ComplexMatrix::pauli_y())?.re,
        normalized_trace(sigma, &ComplexMatrix::pauli_z())?.re,
    ])
}

/// Qubit state `(I + x X + y Y + z Z)/2`; requires `|r| ≤ 1`.
pub fn from_bloch(r: [f64; 3]) -> Result<DensityOperator> {
    let m = &(&ComplexMatrix::identity(2) + &ComplexMatrix::pauli_x().scale_real(r[0]))
        + &(&ComplexMatrix::pauli_y().scale_real(r[1])
            + &ComplexMatrix::pauli_z().scale_real(r[2]));
    DensityOperator::new(m.scale_real(0.5))
}

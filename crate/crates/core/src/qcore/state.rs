use nalgebra::DVector;

use super::{hermitian_eigen, hermitian_deviation, identity, outer, trace, ComplexMatrix, C64};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;

/// A normalized pure state over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Wraps `amplitudes`, which must already be normalized.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let num_qubits = dimension_to_qubits(amplitudes.len())?;
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("state is not normalized (sum |a|^2 = {norm2})")));
        }
        Ok(Self { num_qubits, amplitudes: DVector::from_vec(amplitudes) })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn plus() -> Self {
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { num_qubits: 1, amplitudes: DVector::from_vec(vec![a, a]) }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> ComplexMatrix {
        outer(&self.amplitudes)
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amplitudes
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        let num_qubits = dimension_to_qubits(matrix.nrows())?;
        let dev = hermitian_deviation(&matrix);
        if dev > NORM_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("density matrix trace is {tr}, expected 1")));
        }
        let (values, _) = hermitian_eigen(&matrix)?;
        if values.first().copied().unwrap_or(0.0) < -1e-10 {
            return Err(Error::InvalidArgument(format!(
                "density matrix has negative eigenvalue {}",
                values[0]
            )));
        }
        Ok(Self { num_qubits, matrix })
    }

    pub fn pure(state: &StateVector) -> Self {
        Self { num_qubits: state.num_qubits(), matrix: state.projector() }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let d = 1usize << num_qubits;
        Self { num_qubits, matrix: identity(d).scale(1.0 / d as f64) }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.matrix * &self.matrix)).re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            num_qubits: self.num_qubits + other.num_qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> f64 {
        let a = psi.amplitudes();
        (a.adjoint() * &self.matrix * a)[(0, 0)].re
    }

    /// Skips validation; callers guarantee the invariants up to round-off.
    pub(crate) fn from_raw(num_qubits: usize, matrix: ComplexMatrix) -> Self {
        Self { num_qubits, matrix }
    }
}

pub(crate) fn dimension_to_qubits(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized_and_bad_dimension() {
        let half = C64::new(0.5, 0.0);
        assert!(StateVector::new(vec![half, half]).is_err());
        assert!(StateVector::new(vec![C64::new(1.0, 0.0); 3]).is_err());
        let s = StateVector::normalized(vec![half, half]).unwrap();
        assert!((s.inner(&StateVector::plus()).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(identity(2)).is_err());
        let rho = DensityMatrix::new(identity(2).scale(0.5)).unwrap();
        assert!((rho.purity() - 0.5).abs() < 1e-15);
        let pure = DensityMatrix::pure(&StateVector::plus());
        assert!((pure.purity() - 1.0).abs() < 1e-15);
    }
}

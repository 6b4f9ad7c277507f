//! Quantum channels in Choi form.
//!
//! The Choi matrix is `J = sum_ij |i><j| (x) Phi(|i><j|)` with the input factor
//! first. Composition goes through the row-major Liouville superoperator
//! `S[(a,b),(i,j)] = Phi(|i><j|)[a,b]`, which is a reshuffle of `J`.

use super::{hermitian_eigen, identity, op_norm, partial_trace, trace_norm, ComplexMatrix, DensityMatrix, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    in_qubits: usize,
    out_qubits: usize,
    choi: ComplexMatrix,
}

/// Deviations from complete positivity and trace preservation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub min_choi_eigenvalue: f64,
    pub trace_preservation_error: f64,
}

impl CptpReport {
    pub fn within(&self, tol: f64) -> bool {
        self.min_choi_eigenvalue >= -tol && self.trace_preservation_error <= tol
    }
}

impl QuantumChannel {
    pub fn from_choi(in_qubits: usize, out_qubits: usize, choi: ComplexMatrix) -> Result<Self> {
        let dim = 1usize << (in_qubits + out_qubits);
        if choi.nrows() != dim || choi.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix for {in_qubits}->{out_qubits} qubits must be {dim}x{dim}"
            )));
        }
        Ok(Self { in_qubits, out_qubits, choi })
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self::from_unitary(&identity(1 << num_qubits)).expect("identity is square")
    }

    /// `rho -> U rho U^dagger`.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::DimensionMismatch("unitary must be square".into()));
        }
        Self::from_kraus(std::slice::from_ref(u))
    }

    /// `rho -> sum_k K_k rho K_k^dagger`; every operator must share one shape.
    pub fn from_kraus(ops: &[ComplexMatrix]) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidArgument("no Kraus operators".into()))?;
        let (dout, din) = first.shape();
        if ops.iter().any(|k| k.shape() != (dout, din)) {
            return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
        }
        let mut sup = ComplexMatrix::zeros(dout * dout, din * din);
        for k in ops {
            sup += k.kronecker(&k.map(|z| z.conj()));
        }
        Self::from_superoperator(din, dout, &sup)
    }

    pub fn from_superoperator(din: usize, dout: usize, sup: &ComplexMatrix) -> Result<Self> {
        if sup.nrows() != dout * dout || sup.ncols() != din * din {
            return Err(Error::DimensionMismatch("superoperator shape".into()));
        }
        let in_qubits = super::state::dimension_to_qubits(din)?;
        let out_qubits = super::state::dimension_to_qubits(dout)?;
        Ok(Self { in_qubits, out_qubits, choi: reshuffle(sup, din, dout, true) })
    }

    pub fn in_qubits(&self) -> usize {
        self.in_qubits
    }

    pub fn out_qubits(&self) -> usize {
        self.out_qubits
    }

    pub fn in_dim(&self) -> usize {
        1 << self.in_qubits
    }

    pub fn out_dim(&self) -> usize {
        1 << self.out_qubits
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn superoperator(&self) -> ComplexMatrix {
        reshuffle(&self.choi, self.in_dim(), self.out_dim(), false)
    }

    /// The channel applying `self` first and `next` second.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if self.out_qubits != next.in_qubits {
            return Err(Error::DimensionMismatch(format!(
                "cannot feed {} output qubits into a {}-qubit channel",
                self.out_qubits, next.in_qubits
            )));
        }
        let sup = next.superoperator() * self.superoperator();
        Self::from_superoperator(self.in_dim(), next.out_dim(), &sup)
    }

    /// `n`-fold self-composition by repeated squaring.
    pub fn power(&self, n: usize) -> Result<QuantumChannel> {
        if self.in_qubits != self.out_qubits {
            return Err(Error::DimensionMismatch("power of a non-endomorphic channel".into()));
        }
        let d = self.in_dim();
        let sup = superoperator_power(&self.superoperator(), n);
        Self::from_superoperator(d, d, &sup)
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let din = self.in_dim();
        if rho.nrows() != din || rho.ncols() != din {
            return Err(Error::DimensionMismatch(format!("channel input must be {din}x{din}")));
        }
        let dout = self.out_dim();
        let mut out = ComplexMatrix::zeros(dout, dout);
        for i in 0..din {
            for j in 0..din {
                let r = rho[(i, j)];
                if r == C64::new(0.0, 0.0) {
                    continue;
                }
                for a in 0..dout {
                    for b in 0..dout {
                        out[(a, b)] += r * self.choi[(i * dout + a, j * dout + b)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply(rho.matrix())?;
        Ok(DensityMatrix::from_raw(self.out_qubits, out))
    }

    pub fn cptp_report(&self) -> CptpReport {
        let min_choi_eigenvalue = hermitian_eigen(&self.choi)
            .map(|(v, _)| v[0])
            .unwrap_or(f64::NEG_INFINITY);
        // output qubits are the trailing ones in the Choi index
        let keep: Vec<usize> = (0..self.in_qubits).collect();
        let total = self.in_qubits + self.out_qubits;
        let trace_preservation_error = partial_trace(&self.choi, &keep, total)
            .map(|m| op_norm(&(m - identity(self.in_dim()))))
            .unwrap_or(f64::INFINITY);
        CptpReport { min_choi_eigenvalue, trace_preservation_error }
    }

    /// Half the trace norm of the Choi difference, divided by the input
    /// dimension. Equals 1 for orthogonal unitary channels.
    pub fn distance(&self, other: &QuantumChannel) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(0.5 * trace_norm(&(&self.choi - &other.choi)) / self.in_dim() as f64)
    }

    /// Operator norm of the superoperator difference (the induced 2-norm on
    /// vectorized operators), reported alongside [`QuantumChannel::distance`].
    pub fn op_distance(&self, other: &QuantumChannel) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(op_norm(&(self.superoperator() - other.superoperator())))
    }

    fn check_same_shape(&self, other: &QuantumChannel) -> Result<()> {
        if self.in_qubits != other.in_qubits || self.out_qubits != other.out_qubits {
            return Err(Error::DimensionMismatch(format!(
                "channels {}->{} and {}->{}",
                self.in_qubits, self.out_qubits, other.in_qubits, other.out_qubits
            )));
        }
        Ok(())
    }
}

pub fn channel_from_unitary(u: &ComplexMatrix) -> Result<QuantumChannel> {
    QuantumChannel::from_unitary(u)
}

/// `second` after `first`.
pub fn channel_compose(first: &QuantumChannel, second: &QuantumChannel) -> Result<QuantumChannel> {
    first.then(second)
}

pub fn channel_distance(a: &QuantumChannel, b: &QuantumChannel) -> Result<f64> {
    a.distance(b)
}

pub(crate) fn superoperator_power(sup: &ComplexMatrix, mut n: usize) -> ComplexMatrix {
    let mut result = identity(sup.nrows());
    let mut base = sup.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &base * &result;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

// J[(i*dout + a), (j*dout + b)] = S[(a*dout + b), (i*din + j)]
fn reshuffle(m: &ComplexMatrix, din: usize, dout: usize, to_choi: bool) -> ComplexMatrix {
    let n = din * dout;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..din {
        for j in 0..din {
            for a in 0..dout {
                for b in 0..dout {
                    let jr = i * dout + a;
                    let jc = j * dout + b;
                    let sr = a * dout + b;
                    let sc = i * din + j;
                    if to_choi {
                        out[(jr, jc)] = m[(sr, sc)];
                    } else {
                        out[(sr, sc)] = m[(jr, jc)];
                    }
                }
            }
        }
    }
    out
}

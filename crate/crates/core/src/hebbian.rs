//! Hebbian weight matrices, amplitude encoding of patterns, and the
//! correspondence `rho - I/d = W` between the encoded ensemble and the
//! classical weights.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::bcqse::{ensemble_state, TrainingBatch};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::qcore::{c64, controlled_exponential, identity, kron, op_norm, rz, ComplexMatrix, StateVector, C64};
use crate::rzsynth::{SynthesisResult, Synthesizer};

/// `M` patterns of length `d = 2^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    d: usize,
    patterns: Vec<Vec<f64>>,
    binary: bool,
}

impl PatternSet {
    /// Every entry must be exactly `+1` or `-1`.
    pub fn new(patterns: Vec<Vec<f64>>) -> Result<Self> {
        let d = check_shape(&patterns)?;
        for (m, p) in patterns.iter().enumerate() {
            if let Some(i) = p.iter().position(|&x| x != 1.0 && x != -1.0) {
                return Err(Error::InvalidPattern(format!("pattern {m} entry {i} is {}, expected +1 or -1", p[i])));
            }
        }
        Ok(Self { d, patterns, binary: true })
    }

    /// Arbitrary real rows, each rescaled to squared norm `d`.
    pub fn lenient(patterns: Vec<Vec<f64>>) -> Result<Self> {
        let d = check_shape(&patterns)?;
        let patterns = patterns
            .into_iter()
            .enumerate()
            .map(|(m, p)| {
                let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(Error::InvalidPattern(format!("pattern {m} is zero or non-finite")));
                }
                let scale = (d as f64).sqrt() / norm;
                Ok(p.into_iter().map(|x| x * scale).collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self { d, patterns, binary: false })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.patterns.len()
    }

    pub fn patterns(&self) -> &[Vec<f64>] {
        &self.patterns
    }

    /// All entries are `+1` or `-1`.
    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn encode(&self) -> Result<TrainingBatch> {
        TrainingBatch::new(self.patterns.iter().map(|p| encode_unchecked(p)).collect::<Result<_>>()?)
    }
}

fn check_shape(patterns: &[Vec<f64>]) -> Result<usize> {
    let first = patterns.first().ok_or(Error::EmptyBatch)?;
    let d = first.len();
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::InvalidPattern(format!("pattern length {d} is not a power of two >= 2")));
    }
    if let Some(m) = patterns.iter().position(|p| p.len() != d) {
        return Err(Error::InvalidPattern(format!("pattern {m} has length {}, expected {d}", patterns[m].len())));
    }
    Ok(d)
}

fn encode_unchecked(x: &[f64]) -> Result<StateVector> {
    let s = 1.0 / (x.len() as f64).sqrt();
    StateVector::normalized(x.iter().map(|&v| c64(v * s, 0.0)).collect())
}

/// `(1/sqrt d) sum_i x_i |i>` for a `+-1` pattern.
pub fn amplitude_encode(x: &[f64]) -> Result<StateVector> {
    let set = PatternSet::new(vec![x.to_vec()])?;
    encode_unchecked(&set.patterns[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct HebbianWeightMatrix {
    pub d: usize,
    pub w: DMatrix<f64>,
}

impl HebbianWeightMatrix {
    pub fn op_norm(&self) -> f64 {
        SymmetricEigen::new(self.w.clone()).eigenvalues.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        self.w.map(|x| c64(x, 0.0))
    }
}

/// `W_ij = (1/(M d)) sum_m x_i x_j` off the diagonal, zero on it.
pub fn build_weight_matrix(p: &PatternSet) -> HebbianWeightMatrix {
    let d = p.d();
    let scale = 1.0 / (p.m() * d) as f64;
    let mut w = DMatrix::zeros(d, d);
    for x in p.patterns() {
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    w[(i, j)] += x[i] * x[j] * scale;
                }
            }
        }
    }
    HebbianWeightMatrix { d, w }
}

/// `||(rho - I/d) - W||_op` for the encoded ensemble `rho`.
pub fn quantum_hebbian_identity_check(p: &PatternSet) -> Result<f64> {
    let rho = ensemble_state(&p.encode()?);
    let d = p.d();
    let shifted = rho.matrix() - identity(d) * c64(1.0 / d as f64, 0.0);
    Ok(op_norm(&(shifted - build_weight_matrix(p).to_complex())))
}

/// The single-qubit correction `diag(1, e^{i dt/d})` on the learning qubit.
#[derive(Debug, Clone)]
pub struct PhaseCorrection {
    pub delta_t: f64,
    pub d: usize,
    /// Synthesized `exp(-i tau Z)` with `tau = dt/(2d)`.
    pub rotation: SynthesisResult,
    pub circuit: Circuit,
    /// Scalar phase `dt/(2d)` that turns the rotation into the correction.
    pub global_phase: f64,
}

impl PhaseCorrection {
    /// `e^{i global_phase}` times the compiled circuit.
    pub fn unitary(&self) -> ComplexMatrix {
        self.circuit.compile_unitary().expect("one qubit") * C64::from_polar(1.0, self.global_phase)
    }
}

pub fn identity_phase_correction(delta_t: f64, d: usize, eta: f64) -> Result<PhaseCorrection> {
    identity_phase_correction_with(delta_t, d, eta, Synthesizer::global())
}

pub fn identity_phase_correction_with(delta_t: f64, d: usize, eta: f64, synth: &Synthesizer) -> Result<PhaseCorrection> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let half = delta_t / (2.0 * d as f64);
    let rotation = synth.synthesize(half, eta)?;
    let circuit = rotation.circuit().with_label(format!("identity phase correction dt={delta_t} d={d}"));
    Ok(PhaseCorrection { delta_t, d, rotation, circuit, global_phase: half })
}

/// Exact `diag(1, e^{i dt/d})`.
pub fn exact_phase_correction(delta_t: f64, d: usize) -> ComplexMatrix {
    let half = delta_t / (2.0 * d as f64);
    rz(half) * C64::from_polar(1.0, half)
}

/// `||exp(-i t |1><1| (x) W) - (corr (x) I) exp(-i t |1><1| (x) rho)||_op`
/// with the exact correction for time `t`.
pub fn corrected_target_gap(p: &PatternSet, t: f64) -> Result<f64> {
    let d = p.d();
    let rho = ensemble_state(&p.encode()?);
    let from_w = controlled_exponential(&build_weight_matrix(p).to_complex(), t)?;
    let from_rho = controlled_exponential(rho.matrix(), t)?;
    let corrected = kron(&exact_phase_correction(t, d), &identity(d)) * from_rho;
    Ok(op_norm(&(from_w - corrected)))
}

/// Generator error per unit time when the correction is skipped: `||I/d|| = 1/d`.
pub fn uncorrected_generator_error(d: usize) -> f64 {
    1.0 / d as f64
}

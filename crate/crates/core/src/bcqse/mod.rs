//! Batched controlled state exponentiation as a composition of
//! partial-swap-and-discard channels on the learning qubit plus the
//! processing register.
//!
//! Each step attaches a fresh copy of one training state, applies a
//! controlled partial swap with angle `t / (n M)` and traces the copy out.
//! One batch runs the `M` states in order; the batch is repeated `n` times.

mod resources;

pub use resources::{
    error_model, optimal_n, resource_report, ErrorCorrectedCosts, ErrorModelParams, OptimalN, Regime,
    ResourceConfig, ResourceReport,
};
pub(crate) use resources::error_corrected_costs;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::cpswap::{build_cpswap_circuit, exact_cpswap, CPSwapSpec};
use crate::error::{Error, Result};
use crate::qcore::{
    c64, controlled_exponential, ComplexMatrix, DensityMatrix, QuantumChannel, StateVector, C64,
};

/// Largest processing register simulated with exact swaps.
pub const IDEAL_MAX_QUBITS: usize = 3;
/// Largest processing register simulated with compiled swap circuits.
pub const COMPILED_MAX_QUBITS: usize = 1;

/// `M` pure states on a shared number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingBatch {
    states: Vec<StateVector>,
}

impl TrainingBatch {
    pub fn new(states: Vec<StateVector>) -> Result<Self> {
        let first = states.first().ok_or(Error::EmptyBatch)?;
        let n = first.num_qubits();
        if n == 0 {
            return Err(Error::InvalidArgument("training states need at least one qubit".into()));
        }
        if let Some(bad) = states.iter().position(|s| s.num_qubits() != n) {
            return Err(Error::DimensionMismatch(format!(
                "state {bad} has {} qubits, expected {n}",
                states[bad].num_qubits()
            )));
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn m(&self) -> usize {
        self.states.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.states[0].num_qubits()
    }

    pub fn reversed(&self) -> Self {
        Self { states: self.states.iter().rev().cloned().collect() }
    }
}

/// `(1/M) sum_m |x_m><x_m|`.
pub fn ensemble_state(batch: &TrainingBatch) -> DensityMatrix {
    let d = 1 << batch.n_qubits();
    let mut rho = ComplexMatrix::zeros(d, d);
    for s in batch.states() {
        rho += s.projector();
    }
    rho /= c64(batch.m() as f64, 0.0);
    DensityMatrix::new(rho).expect("mixture of pure states is a density matrix")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SwapMode {
    /// Exact controlled partial swap.
    IdealSwap,
    /// Clifford+T circuit with both central rotations synthesized to `synthesis_eta`.
    CompiledCircuit { synthesis_eta: f64 },
}

impl SwapMode {
    fn max_qubits(&self) -> usize {
        match self {
            SwapMode::IdealSwap => IDEAL_MAX_QUBITS,
            SwapMode::CompiledCircuit { .. } => COMPILED_MAX_QUBITS,
        }
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        if n_qubits > self.max_qubits() {
            let width = |n: usize| match self {
                SwapMode::IdealSwap => 1 + 2 * n,
                SwapMode::CompiledCircuit { .. } => 2 + 2 * n,
            };
            return Err(Error::QubitCapExceeded { required: width(n_qubits), cap: width(self.max_qubits()) });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    pub t: f64,
    pub n: usize,
    pub mode: SwapMode,
}

impl ProtocolParams {
    pub fn new(t: f64, n: usize, mode: SwapMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("number of batches must be >= 1".into()));
        }
        if !t.is_finite() {
            return Err(Error::InvalidArgument("simulation time must be finite".into()));
        }
        if let SwapMode::CompiledCircuit { synthesis_eta } = mode {
            if synthesis_eta.is_nan() || synthesis_eta <= 0.0 {
                return Err(Error::InvalidArgument("synthesis eta must be positive".into()));
            }
        }
        Ok(Self { t, n, mode })
    }

    pub fn ideal(t: f64, n: usize) -> Result<Self> {
        Self::new(t, n, SwapMode::IdealSwap)
    }
}

/// The swap unitary on learning qubit, processing register and environment
/// (data register, plus the ancilla for compiled circuits), environment last.
struct SwapUnitary {
    u: ComplexMatrix,
    n_qubits: usize,
    with_ancilla: bool,
}

impl SwapUnitary {
    fn build(n_qubits: usize, theta: f64, mode: SwapMode) -> Result<Self> {
        mode.check(n_qubits)?;
        match mode {
            SwapMode::IdealSwap => {
                let spec = CPSwapSpec::new(n_qubits, theta, 1.0)?;
                Ok(Self { u: exact_cpswap(&spec)?, n_qubits, with_ancilla: false })
            }
            SwapMode::CompiledCircuit { synthesis_eta } => {
                let spec = CPSwapSpec::new(n_qubits, theta, synthesis_eta)?;
                let built = build_cpswap_circuit(&spec)?;
                Ok(Self { u: built.circuit.compile_unitary()?, n_qubits, with_ancilla: true })
            }
        }
    }

    fn channel(&self, x: &StateVector) -> Result<QuantumChannel> {
        if x.num_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "training state has {} qubits, swap register has {}",
                x.num_qubits(),
                self.n_qubits
            )));
        }
        let env_in = if self.with_ancilla {
            x.amplitudes().kronecker(&DVector::from_vec(vec![c64(1., 0.), c64(0., 0.)]))
        } else {
            x.amplitudes().clone()
        };
        let sys_dim = 2 << self.n_qubits;
        QuantumChannel::from_kraus(&dilation_kraus(&self.u, &env_in, sys_dim))
    }
}

/// `K_k = (I (x) <k|) U (I (x) |env>)` with the environment as the trailing factor.
fn dilation_kraus(u: &ComplexMatrix, env_in: &DVector<C64>, sys_dim: usize) -> Vec<ComplexMatrix> {
    let env_dim = env_in.len();
    (0..env_dim)
        .map(|k| {
            ComplexMatrix::from_fn(sys_dim, sys_dim, |i, j| {
                (0..env_dim).map(|e| u[(i * env_dim + k, j * env_dim + e)] * env_in[e]).sum()
            })
        })
        .collect()
}

/// One partial swap with a fresh copy of `x`, followed by discarding the copy.
pub fn single_swap_channel(x: &StateVector, theta: f64, mode: SwapMode) -> Result<QuantumChannel> {
    SwapUnitary::build(x.num_qubits(), theta, mode)?.channel(x)
}

/// `(W_M ... W_1)^n` with swap angle `t / (n M)`.
pub fn run_bcqse(batch: &TrainingBatch, params: &ProtocolParams) -> Result<QuantumChannel> {
    let theta = params.t / (params.n * batch.m()) as f64;
    let swap = SwapUnitary::build(batch.n_qubits(), theta, params.mode)?;
    let mut step: Option<QuantumChannel> = None;
    for x in batch.states() {
        let w = swap.channel(x)?;
        step = Some(match step {
            None => w,
            Some(prev) => prev.then(&w)?,
        });
    }
    step.expect("batch is non-empty").power(params.n)
}

/// `exp(-i t |1><1| (x) rho)` as a channel.
pub fn target_channel(batch: &TrainingBatch, t: f64) -> Result<QuantumChannel> {
    let rho = ensemble_state(batch);
    QuantumChannel::from_unitary(&controlled_exponential(rho.matrix(), t)?)
}

/// Choi distance between the protocol run in the given order and in reverse.
pub fn batch_order_gap(batch: &TrainingBatch, params: &ProtocolParams) -> Result<f64> {
    run_bcqse(batch, params)?.distance(&run_bcqse(&batch.reversed(), params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub n: usize,
    pub choi_distance: f64,
    pub op_distance_proxy: f64,
    pub predicted_error_model: Option<f64>,
}

/// Distances of `run_bcqse` to the target for each batch count, in input order.
pub fn sweep(
    batch: &TrainingBatch,
    t: f64,
    n_list: &[usize],
    mode: SwapMode,
    model: Option<&ErrorModelParams>,
) -> Result<Vec<SweepPoint>> {
    let target = target_channel(batch, t)?;
    n_list
        .par_iter()
        .map(|&n| {
            let channel = run_bcqse(batch, &ProtocolParams::new(t, n, mode)?)?;
            let predicted_error_model = model.map(|p| error_model(p, t, n as u64)).transpose()?;
            Ok(SweepPoint {
                n,
                choi_distance: channel.distance(&target)?,
                op_distance_proxy: channel.op_distance(&target)?,
                predicted_error_model,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaPoint {
    pub t: f64,
    pub n: usize,
    pub choi_distance: f64,
    /// `choi_distance * n`, regressed against `t^2`.
    pub scaled_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub points: Vec<AlphaPoint>,
    /// Root-mean-square residual of `scaled_error - alpha t^2`.
    pub rms_residual: f64,
}

/// Least-squares slope through the origin of `error * n` against `t^2` over
/// ideal-swap runs.
pub fn alpha_fit(batch: &TrainingBatch, t_values: &[f64], n: usize) -> Result<AlphaFit> {
    if t_values.is_empty() || t_values.iter().all(|t| *t == 0.0) {
        return Err(Error::InvalidArgument("alpha fit needs at least one nonzero time".into()));
    }
    let points = t_values
        .par_iter()
        .map(|&t| {
            let channel = run_bcqse(batch, &ProtocolParams::ideal(t, n)?)?;
            let choi_distance = channel.distance(&target_channel(batch, t)?)?;
            Ok(AlphaPoint { t, n, choi_distance, scaled_error: choi_distance * n as f64 })
        })
        .collect::<Result<Vec<_>>>()?;
    let sxy: f64 = points.iter().map(|p| p.t * p.t * p.scaled_error).sum();
    let sxx: f64 = points.iter().map(|p| p.t.powi(4)).sum();
    let alpha = sxy / sxx;
    let rms_residual = (points.iter().map(|p| (p.scaled_error - alpha * p.t * p.t).powi(2)).sum::<f64>()
        / points.len() as f64)
        .sqrt();
    Ok(AlphaFit { alpha, points, rms_residual })
}

//! Error model, optimal batch count and resource accounting.

use serde::Serialize;

use crate::cpswap::cpswap_count_formula;
use crate::error::{Error, Result};
use crate::gateset::{count_dot, GateCountVector, GateErrorVector};
use crate::rzsynth::CountModel;

/// Inputs of `eps(n) = alpha t^2 / n + n M (eps_g . g(eta) + 2 eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorModelParams {
    pub alpha: f64,
    pub gate_errors: GateErrorVector,
    pub eta: f64,
    pub m: u64,
    pub n_qubits: u64,
    pub g_eta: u64,
    pub g_const: u64,
}

impl ErrorModelParams {
    pub fn new(
        alpha: f64,
        gate_errors: GateErrorVector,
        eta: f64,
        m: u64,
        n_qubits: u64,
        g_eta: u64,
        g_const: u64,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be non-negative, got {eta}")));
        }
        if m == 0 || n_qubits == 0 {
            return Err(Error::InvalidArgument("M and N must be >= 1".into()));
        }
        Ok(Self { alpha, gate_errors, eta, m, n_qubits, g_eta, g_const })
    }

    /// Takes `g_eta` and `g` from an analytic count model.
    pub fn from_count_model(
        alpha: f64,
        gate_errors: GateErrorVector,
        eta: f64,
        m: u64,
        n_qubits: u64,
        model: &CountModel,
    ) -> Result<Self> {
        Self::new(alpha, gate_errors, eta, m, n_qubits, model.g_eta(eta)?, model.g())
    }

    /// Gate counts of one controlled partial swap.
    pub fn swap_counts(&self) -> GateCountVector {
        cpswap_count_formula(self.n_qubits, self.g_eta, self.g_const)
    }

    /// `eps_g . g(eta) + 2 eta`.
    pub fn per_swap_cost(&self) -> f64 {
        count_dot(&self.gate_errors, &self.swap_counts()) + 2.0 * self.eta
    }
}

pub fn error_model(params: &ErrorModelParams, t: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("number of batches must be >= 1".into()));
    }
    let n = n as f64;
    Ok(params.alpha * t * t / n + n * params.m as f64 * params.per_swap_cost())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalN {
    pub n: u64,
    /// `t sqrt(alpha / (M cost))` before clamping and rounding.
    pub unclamped: f64,
    /// The unclamped optimum is below one, so `n` is pinned to 1 and the
    /// batched protocol cannot reach its balanced error.
    pub failure_regime: bool,
    /// `2 t sqrt(alpha M cost)`.
    pub closed_form_error: f64,
    pub error_at_n: f64,
}

/// Integer minimizer of [`error_model`]: whichever of the two integers around
/// the continuous optimum gives the smaller error.
pub fn optimal_n(params: &ErrorModelParams, t: f64) -> Result<OptimalN> {
    let cost = params.per_swap_cost();
    if cost <= 0.0 {
        return Err(Error::UnboundedOptimum);
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument("simulation time must be finite".into()));
    }
    let t = t.abs();
    let m = params.m as f64;
    let unclamped = t * (params.alpha / (m * cost)).sqrt();
    let closed_form_error = 2.0 * t * (params.alpha * m * cost).sqrt();
    let failure_regime = unclamped < 1.0;
    let n = if failure_regime {
        1
    } else {
        let lo = unclamped.floor().max(1.0) as u64;
        let hi = unclamped.ceil().max(1.0) as u64;
        if error_model(params, t, hi)? < error_model(params, t, lo)? {
            hi
        } else {
            lo
        }
    };
    Ok(OptimalN { n, unclamped, failure_regime, closed_form_error, error_at_n: error_model(params, t, n)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Gate errors are fixed; `n` balances the two error terms.
    Fixed,
    /// Gate errors are pushed down by error correction to meet a target error.
    ErrorCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceConfig {
    pub alpha: f64,
    pub gate_errors: GateErrorVector,
    /// Rotation synthesis error in the fixed regime.
    pub eta: f64,
    pub count_model: CountModel,
    /// Error budget for the rotations in the error-corrected regime: `eta = delta_rotation / (n^2 M)`.
    pub delta_rotation: f64,
    /// Error budget for the gates: `eps_g = delta_gates / (n^2 M g)` elementwise.
    pub delta_gates: f64,
    /// `n = ceil(batch_constant (t^2 + 1) / eps)`.
    pub batch_constant: f64,
    /// Preparation time of one training state, if known.
    pub t_data: Option<f64>,
}

impl Default for ResourceConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gate_errors: GateErrorVector::uniform(1e-4).expect("valid"),
            eta: 1e-3,
            count_model: CountModel::default(),
            delta_rotation: 0.1,
            delta_gates: 0.1,
            batch_constant: 1.0,
            t_data: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorCorrectedCosts {
    pub eta: f64,
    pub g_eta: u64,
    pub swap_counts: GateCountVector,
    /// Target logical error of each gate kind.
    pub gate_error_targets: [f64; 5],
    /// `ceil(log2(1/eps_g))` per gate kind: physical gates and extra qubits per logical gate.
    pub overheads: [u64; 5],
    pub physical_gates_per_swap: u64,
    pub ec_qubits_per_swap: u64,
}

/// Per-swap costs when `n M` swaps must share the error budget.
pub(crate) fn error_corrected_costs(n_qubits: u64, m: u64, n: u64, cfg: &ResourceConfig) -> Result<ErrorCorrectedCosts> {
    let scale = (n * n * m) as f64;
    let eta = cfg.delta_rotation / scale;
    let g_eta = cfg.count_model.g_eta(eta)?;
    let swap_counts = cpswap_count_formula(n_qubits, g_eta, cfg.count_model.g());
    let counts = swap_counts.as_array();
    let gate_error_targets = counts.map(|g| if g == 0 { f64::INFINITY } else { cfg.delta_gates / (scale * g as f64) });
    let overheads = gate_error_targets.map(|e| if e.is_finite() { ((1.0 / e).log2() - 1e-9).ceil().max(1.0) as u64 } else { 0 });
    let weighted: u64 = counts.iter().zip(overheads).map(|(g, o)| g * o).sum();
    Ok(ErrorCorrectedCosts {
        eta,
        g_eta,
        swap_counts,
        gate_error_targets,
        overheads,
        physical_gates_per_swap: weighted,
        ec_qubits_per_swap: weighted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceReport {
    pub regime: Regime,
    pub n_qubits: u64,
    pub m: u64,
    pub t: f64,
    pub requested_epsilon: Option<f64>,
    pub n: u64,
    /// Fixed regime only: the continuous optimum fell below one.
    pub failure_regime: bool,
    pub predicted_error: f64,
    pub eta: f64,
    pub g_eta: u64,
    pub swap_counts: GateCountVector,
    /// `(n M + 1)(N + 1)`.
    pub logical_qubits: u64,
    /// `n M g(eta)`.
    pub logical_gates: GateCountVector,
    pub physical_qubits: u64,
    pub physical_gates: u64,
    pub error_correction: Option<ErrorCorrectedCosts>,
    pub data_preparation_time: Option<f64>,
    pub config: ResourceConfig,
}

pub fn resource_report(
    n_qubits: u64,
    m: u64,
    t: f64,
    epsilon: Option<f64>,
    regime: Regime,
    cfg: &ResourceConfig,
) -> Result<ResourceReport> {
    if n_qubits == 0 || m == 0 {
        return Err(Error::InvalidArgument("N and M must be >= 1".into()));
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument("simulation time must be finite".into()));
    }
    let (n, failure_regime, predicted_error, eta, g_eta, swap_counts, ec) = match regime {
        Regime::Fixed => {
            let params = ErrorModelParams::from_count_model(cfg.alpha, cfg.gate_errors, cfg.eta, m, n_qubits, &cfg.count_model)?;
            let opt = optimal_n(&params, t)?;
            (opt.n, opt.failure_regime, opt.error_at_n, cfg.eta, params.g_eta, params.swap_counts(), None)
        }
        Regime::ErrorCorrected => {
            let eps = epsilon.ok_or_else(|| Error::InvalidArgument("error-corrected regime needs a target epsilon".into()))?;
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
            }
            let n = ((cfg.batch_constant * (t * t + 1.0) / eps - 1e-9).ceil().max(1.0)) as u64;
            let costs = error_corrected_costs(n_qubits, m, n, cfg)?;
            let delta = 2.0 * cfg.delta_rotation + 5.0 * cfg.delta_gates;
            let predicted = (cfg.alpha * t * t + delta) / n as f64;
            (n, false, predicted, costs.eta, costs.g_eta, costs.swap_counts, Some(costs))
        }
    };
    let swaps = n * m;
    let logical_qubits = (swaps + 1) * (n_qubits + 1);
    let logical_gates = swaps * swap_counts;
    let (physical_qubits, physical_gates) = match &ec {
        None => (logical_qubits, logical_gates.total()),
        Some(c) => (logical_qubits + swaps * c.ec_qubits_per_swap, swaps * c.physical_gates_per_swap),
    };
    Ok(ResourceReport {
        regime,
        n_qubits,
        m,
        t,
        requested_epsilon: epsilon,
        n,
        failure_regime,
        predicted_error,
        eta,
        g_eta,
        swap_counts,
        logical_qubits,
        logical_gates,
        physical_qubits,
        physical_gates,
        error_correction: ec,
        data_preparation_time: cfg.t_data.map(|td| td * swaps as f64),
        config: *cfg,
    })
}

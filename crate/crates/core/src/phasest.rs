//! Iterative single-ancilla phase estimation of the eigenvalues of an
//! ensemble state, with the controlled exponential supplied by the batched
//! protocol (or exactly, for reference).
//!
//! Power `2^k` of `exp(-i t0 rho)` is realized as one protocol run with time
//! `2^k t0` and `n0 4^k` batches, which keeps the per-power channel error flat.
//! Eigenvalues are read as `phase / t0`; with `t0 = pi` the interval `[0, 1]`
//! maps onto `[0, pi]` without wraparound.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bcqse::{
    ensemble_state, error_corrected_costs, run_bcqse, target_channel, ProtocolParams, ResourceConfig, SwapMode,
    TrainingBatch,
};
use crate::error::{Error, Result};
use crate::qcore::{c64, hermitian_eigen, kron, partial_trace, ComplexMatrix, QuantumChannel, StateVector, C64};

/// Eigenvalues closer than this are treated as one.
const DEGENERACY_TOL: f64 = 1e-9;
/// Largest number of estimated bits.
pub const MAX_BITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PhaseChannel {
    /// The exact controlled exponential.
    Exact,
    /// The batched protocol with `n0` batches at the base power.
    Protocol { n0: usize, mode: SwapMode },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseEstimateOptions {
    pub t0: f64,
    /// Sample this many measurement records instead of reading exact expectations.
    pub shots: Option<usize>,
    pub seed: u64,
}

impl Default for PhaseEstimateOptions {
    fn default() -> Self {
        Self { t0: PI, shots: None, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BitRecord {
    pub power: u64,
    pub t: f64,
    pub n: Option<usize>,
    /// Probability of `+` when the learning qubit is measured in the X basis.
    pub prob_x_plus: f64,
    /// Probability of `+` in the Y basis.
    pub prob_y_plus: f64,
    /// `atan2(-<Y>, <X>)` in `[0, 2 pi)`.
    pub phase: f64,
    /// Choi distance of the realized controlled power to the exact one.
    pub channel_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Selection {
    pub eigenvalue: f64,
    /// Weight of the input on this eigenspace.
    pub expected_probability: f64,
    pub count: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShotSummary {
    pub shots: usize,
    pub selections: Vec<Selection>,
    /// Smallest overlap of the post-measurement processing state with the
    /// eigenspace its estimate was assigned to.
    pub min_post_measurement_fidelity: f64,
    /// Per-shot estimates, in shot order.
    pub estimates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseEstimateResult {
    pub estimated_eigenvalue: f64,
    pub precision_bits: usize,
    /// X-basis `+` probability for each power, lowest power first.
    pub success_probability_trace: Vec<f64>,
    pub per_bit: Vec<BitRecord>,
    /// Largest weight of the input on a single eigenspace.
    pub input_overlap: f64,
    /// Eigenvalue resolution implied by the channel errors.
    pub channel_resolution: f64,
    pub warning: Option<String>,
    pub shots: Option<ShotSummary>,
}

struct Eigenspace {
    value: f64,
    projector: ComplexMatrix,
}

fn eigenspaces(rho: &ComplexMatrix) -> Result<Vec<Eigenspace>> {
    let (values, vectors) = hermitian_eigen(rho)?;
    let mut spaces: Vec<Eigenspace> = Vec::new();
    for (j, &v) in values.iter().enumerate().rev() {
        let col = vectors.column(j).into_owned();
        let p = &col * col.adjoint();
        match spaces.last_mut() {
            Some(s) if (s.value - v).abs() < DEGENERACY_TOL => s.projector += p,
            _ => spaces.push(Eigenspace { value: v, projector: p }),
        }
    }
    Ok(spaces)
}

fn weight(p: &ComplexMatrix, psi: &StateVector) -> f64 {
    psi.amplitudes().dotc(&(p * psi.amplitudes())).re
}

/// Maps a fraction of a turn at the base power to an eigenvalue in `[0, 1]`.
fn eigenvalue_from_turns(turns: f64, t0: f64) -> f64 {
    let period = TAU / t0;
    let mut lambda = turns.rem_euclid(1.0) * period;
    if lambda > 0.5 * (1.0 + period) {
        lambda -= period;
    }
    lambda.clamp(0.0, 1.0)
}

/// Combines per-power turn estimates `beta_k ~ 2^k x mod 1`, highest power first.
fn combine_turns(betas: &[f64]) -> f64 {
    let mut x = betas[betas.len() - 1].rem_euclid(1.0);
    for &beta in betas.iter().rev().skip(1) {
        let a = x / 2.0;
        let b = a + 0.5;
        let dist = |c: f64| {
            let d = (c - beta).rem_euclid(1.0);
            d.min(1.0 - d)
        };
        x = if dist(a) <= dist(b) { a } else { b };
    }
    x
}

fn learning_block(out: &ComplexMatrix, r: usize, c: usize, d: usize) -> ComplexMatrix {
    out.view((r * d, c * d), (d, d)).into_owned()
}

pub fn kitaev_phase_estimate(
    batch: &TrainingBatch,
    input: &StateVector,
    bits: usize,
    channel: PhaseChannel,
    opts: &PhaseEstimateOptions,
) -> Result<PhaseEstimateResult> {
    let n = batch.n_qubits();
    if input.num_qubits() != n {
        return Err(Error::DimensionMismatch(format!("input has {} qubits, batch states have {n}", input.num_qubits())));
    }
    if bits == 0 || bits > MAX_BITS {
        return Err(Error::InvalidArgument(format!("bits must be in 1..={MAX_BITS}, got {bits}")));
    }
    if !(opts.t0 > 0.0 && opts.t0 <= PI) {
        return Err(Error::InvalidArgument("t0 must lie in (0, pi]".into()));
    }
    let d = 1usize << n;
    let plus = StateVector::plus().projector();

    let channels = (0..bits)
        .into_par_iter()
        .map(|k| {
            let power = 1u64 << k;
            let t = power as f64 * opts.t0;
            let exact = target_channel(batch, t)?;
            Ok(match channel {
                PhaseChannel::Exact => (power, t, None, exact, 0.0),
                PhaseChannel::Protocol { n0, mode } => {
                    let nk = n0.max(1) * 4usize.pow(k as u32);
                    let realized = run_bcqse(batch, &ProtocolParams::new(t, nk, mode)?)?;
                    let err = realized.distance(&exact)?;
                    (power, t, Some(nk), realized, err)
                }
            })
        })
        .collect::<Result<Vec<(u64, f64, Option<usize>, QuantumChannel, f64)>>>()?;

    let sigma = kron(&plus, &input.projector());
    let mut per_bit = Vec::with_capacity(bits);
    for (power, t, nk, ch, channel_error) in &channels {
        let out = ch.apply(&sigma)?;
        let rl = partial_trace(&out, &[0], n + 1)?;
        let x = 2.0 * rl[(0, 1)].re;
        let y = -2.0 * rl[(0, 1)].im;
        per_bit.push(BitRecord {
            power: *power,
            t: *t,
            n: *nk,
            prob_x_plus: (1.0 + x) / 2.0,
            prob_y_plus: (1.0 + y) / 2.0,
            phase: (-y).atan2(x).rem_euclid(TAU),
            channel_error: *channel_error,
        });
    }
    let betas: Vec<f64> = per_bit.iter().map(|b| b.phase / TAU).collect();
    let estimated_eigenvalue = eigenvalue_from_turns(combine_turns(&betas), opts.t0);

    let spaces = eigenspaces(ensemble_state(batch).matrix())?;
    let weights: Vec<f64> = spaces.iter().map(|s| weight(&s.projector, input)).collect();
    let input_overlap = weights.iter().cloned().fold(0.0, f64::max);

    let channel_resolution = per_bit
        .iter()
        .map(|b| 2.0 * b.channel_error / b.t)
        .fold(0.0, f64::max);
    let target_resolution = 0.5f64.powi(bits as i32);
    let warning = (channel_resolution > target_resolution).then(|| {
        format!(
            "{bits} bits requested (resolution {target_resolution:.3e}) but channel error limits resolution to {channel_resolution:.3e}"
        )
    });

    let shots = match opts.shots {
        None => None,
        Some(shots) => {
            let records: Vec<(f64, ComplexMatrix)> = (0..shots)
                .into_par_iter()
                .map(|s| {
                    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                    rng.set_stream(s as u64);
                    sample_shot(&channels, input, d, opts.t0, &mut rng)
                })
                .collect::<Result<_>>()?;
            Some(summarize(&records, &spaces, &weights))
        }
    };

    Ok(PhaseEstimateResult {
        estimated_eigenvalue,
        precision_bits: bits,
        success_probability_trace: per_bit.iter().map(|b| b.prob_x_plus).collect(),
        per_bit,
        input_overlap,
        channel_resolution,
        warning,
        shots,
    })
}

/// One measurement record: bits from the highest power down, each corrected
/// by the phase of the bits already read, measured in the X basis. The
/// processing register carries over between rounds.
fn sample_shot(
    channels: &[(u64, f64, Option<usize>, QuantumChannel, f64)],
    input: &StateVector,
    d: usize,
    t0: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, ComplexMatrix)> {
    let m = channels.len();
    let plus = StateVector::plus().projector();
    let mut sigma = input.projector();
    // bit j (1-based) of the turn fraction, read at power 2^(j-1)
    let mut bits = vec![0u8; m + 1];
    for k in (0..m).rev() {
        let omega: f64 = (k + 2..=m).map(|j| bits[j] as f64 * 0.5f64.powi((j - k) as i32)).sum();
        let out = channels[k].3.apply(&kron(&plus, &sigma))?;
        let phase = C64::from_polar(1.0, TAU * omega);
        let b00 = learning_block(&out, 0, 0, d);
        let b01 = learning_block(&out, 0, 1, d) * phase.conj();
        let b10 = learning_block(&out, 1, 0, d) * phase;
        let b11 = learning_block(&out, 1, 1, d);
        let plus_branch = (&b00 + &b01 + &b10 + &b11) * c64(0.5, 0.0);
        let p_plus = plus_branch.trace().re.clamp(0.0, 1.0);
        let (branch, p) = if rng.random::<f64>() < p_plus {
            bits[k + 1] = 0;
            (plus_branch, p_plus)
        } else {
            bits[k + 1] = 1;
            ((&b00 - &b01 - &b10 + &b11) * c64(0.5, 0.0), 1.0 - p_plus)
        };
        sigma = branch / c64(p.max(f64::MIN_POSITIVE), 0.0);
    }
    let turns: f64 = (1..=m).map(|j| bits[j] as f64 * 0.5f64.powi(j as i32)).sum();
    Ok((eigenvalue_from_turns(turns, t0), sigma))
}

fn summarize(records: &[(f64, ComplexMatrix)], spaces: &[Eigenspace], weights: &[f64]) -> ShotSummary {
    let mut counts = vec![0usize; spaces.len()];
    let mut min_fid: f64 = 1.0;
    for (est, sigma) in records {
        let i = (0..spaces.len())
            .min_by(|&a, &b| (spaces[a].value - est).abs().total_cmp(&(spaces[b].value - est).abs()))
            .expect("at least one eigenspace");
        counts[i] += 1;
        min_fid = min_fid.min((&spaces[i].projector * sigma).trace().re);
    }
    let shots = records.len();
    ShotSummary {
        shots,
        selections: spaces
            .iter()
            .zip(weights)
            .zip(&counts)
            .map(|((s, &w), &count)| Selection {
                eigenvalue: s.value,
                expected_probability: w,
                count,
                frequency: count as f64 / shots.max(1) as f64,
            })
            .collect(),
        min_post_measurement_fidelity: min_fid,
        estimates: records.iter().map(|r| r.0).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeResourceConfig {
    /// `applications = ceil(c_applications / eps)`.
    pub c_applications: f64,
    /// `n per application = ceil(c_batches / eps^2)`.
    pub c_batches: f64,
    pub resources: ResourceConfig,
}

impl Default for PeResourceConfig {
    fn default() -> Self {
        Self { c_applications: 1.0, c_batches: 1.0, resources: ResourceConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeResourceReport {
    pub epsilon: f64,
    pub m: u64,
    pub n_qubits: u64,
    pub unitary_applications: u64,
    pub n_per_application: u64,
    pub total_batches: u64,
    /// `(total_batches M + 1)(N + 1)`.
    pub logical_qubits: u64,
    /// Logical qubits plus error-correction qubits, one reusable learning qubit.
    pub qubit_estimate: u64,
    /// Physical gates of every swap plus the estimation's own `ceil(c_batches / eps^2)`.
    pub gate_estimate: u64,
    pub learning_qubits_iterative: u64,
    /// One learning qubit per controlled application.
    pub learning_qubits_register: u64,
    pub qubit_estimate_with_register: u64,
    pub config: PeResourceConfig,
}

fn ceil_count(x: f64) -> u64 {
    (x - 1e-9).ceil().max(1.0) as u64
}

pub fn pe_resource_report(epsilon: f64, m: u64, n_qubits: u64, cfg: &PeResourceConfig) -> Result<PeResourceReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if m == 0 || n_qubits == 0 {
        return Err(Error::InvalidArgument("M and N must be >= 1".into()));
    }
    let unitary_applications = ceil_count(cfg.c_applications / epsilon);
    let n_per_application = ceil_count(cfg.c_batches / (epsilon * epsilon));
    let total_batches = unitary_applications * n_per_application;
    let swaps = total_batches * m;
    let costs = error_corrected_costs(n_qubits, m, n_per_application, &cfg.resources)?;
    let logical_qubits = (swaps + 1) * (n_qubits + 1);
    let qubit_estimate = logical_qubits + swaps * costs.ec_qubits_per_swap;
    let gate_estimate = swaps * costs.physical_gates_per_swap + n_per_application;
    Ok(PeResourceReport {
        epsilon,
        m,
        n_qubits,
        unitary_applications,
        n_per_application,
        total_batches,
        logical_qubits,
        qubit_estimate,
        gate_estimate,
        learning_qubits_iterative: 1,
        learning_qubits_register: unitary_applications,
        qubit_estimate_with_register: qubit_estimate + unitary_applications - 1,
        config: *cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis_batch(indices: &[usize]) -> TrainingBatch {
        TrainingBatch::new(indices.iter().map(|&i| StateVector::basis(1, i).unwrap()).collect()).unwrap()
    }

    #[test]
    fn turn_combination_is_exact_for_consistent_inputs() {
        let x: f64 = 0.3141;
        let betas: Vec<f64> = (0..6).map(|k| (x * 2f64.powi(k)).rem_euclid(1.0)).collect();
        assert!((combine_turns(&betas) - x).abs() < 1e-12);
    }

    #[test]
    fn wraparound_maps_to_zero() {
        assert_eq!(eigenvalue_from_turns(0.999, PI), 0.0);
        assert!((eigenvalue_from_turns(0.5, PI) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_channel_examples() {
        let opts = PhaseEstimateOptions::default();
        let zero = StateVector::basis(1, 0).unwrap();
        let r = kitaev_phase_estimate(&basis_batch(&[0]), &zero, 4, PhaseChannel::Exact, &opts).unwrap();
        assert!((r.estimated_eigenvalue - 1.0).abs() <= 1.0 / 16.0);
        let r = kitaev_phase_estimate(&basis_batch(&[0, 1]), &zero, 4, PhaseChannel::Exact, &opts).unwrap();
        assert!((r.estimated_eigenvalue - 0.5).abs() <= 1.0 / 16.0);
        assert!(r.warning.is_none());
    }

    #[test]
    fn protocol_channel_resolves_split_spectrum() {
        let batch = basis_batch(&[0, 0, 0, 1]);
        let opts = PhaseEstimateOptions::default();
        let ch = PhaseChannel::Protocol { n0: 16, mode: SwapMode::IdealSwap };
        for (i, expect) in [(0, 0.75), (1, 0.25)] {
            let input = StateVector::basis(1, i).unwrap();
            let r = kitaev_phase_estimate(&batch, &input, 5, ch, &opts).unwrap();
            assert!((r.estimated_eigenvalue - expect).abs() <= 1.0 / 32.0, "{r:?}");
            assert!((r.input_overlap - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shots_are_deterministic_and_collapse() {
        let batch = basis_batch(&[0, 0, 0, 1]);
        let input = StateVector::normalized(vec![c64(0.6, 0.), c64(0.8, 0.)]).unwrap();
        let opts = PhaseEstimateOptions { shots: Some(200), seed: 7, ..Default::default() };
        let a = kitaev_phase_estimate(&batch, &input, 3, PhaseChannel::Exact, &opts).unwrap();
        let b = kitaev_phase_estimate(&batch, &input, 3, PhaseChannel::Exact, &opts).unwrap();
        assert_eq!(a, b);
        let s = a.shots.unwrap();
        assert!(s.min_post_measurement_fidelity > 1.0 - 1e-9);
        assert_eq!(s.selections.iter().map(|x| x.count).sum::<usize>(), 200);
    }

    #[test]
    fn resource_ratios() {
        let cfg = PeResourceConfig::default();
        let a = pe_resource_report(0.1, 2, 1, &cfg).unwrap();
        let b = pe_resource_report(0.05, 2, 1, &cfg).unwrap();
        assert_eq!(b.total_batches, 8 * a.total_batches);
        assert_eq!(b.unitary_applications, 2 * a.unitary_applications);
        assert_eq!(b.n_per_application, 4 * a.n_per_application);
        assert!(pe_resource_report(1.5, 2, 1, &cfg).is_err());
    }
}

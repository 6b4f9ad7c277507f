use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "bcqse", version, about = "Batched controlled state exponentiation toolkit")]
pub struct Cli {
    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the primary output here instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Approximate exp(-i tau Z) by a Clifford+T sequence.
    Synth(SynthArgs),
    /// Build the controlled partial swap circuit and check it against the exact operator.
    Decompose(DecomposeArgs),
    /// Check a circuit file.
    Verify(VerifyArgs),
    /// Protocol error against the target for a list of batch counts.
    BcqseSweep(SweepArgs),
    /// Fit the quadratic error constant from ideal-swap runs.
    AlphaFit(AlphaFitArgs),
    /// Hebbian weight matrix of a pattern file.
    Hebbian(HebbianArgs),
    /// Iterative phase estimation of an ensemble eigenvalue.
    PhaseEstimate(PhaseArgs),
    /// Qubit and gate estimates for a protocol run.
    Resources(ResourcesArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct CountModelArgs {
    /// T gates per bit of rotation precision in the count model.
    #[arg(long, default_value_t = 3.0)]
    pub c_log: f64,
    /// W gates per rotation in the count model.
    #[arg(long, default_value_t = 10.0)]
    pub g_const: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SynthArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub tau: f64,
    #[arg(long)]
    pub eta: f64,
    /// T gates per half of the search; the default reaches 32 T in total.
    #[arg(long)]
    pub max_half_t: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct DecomposeArgs {
    /// Qubits per register.
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long)]
    pub eta: f64,
    /// Write the circuit file here; otherwise it is embedded in the report.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[command(flatten)]
    pub model: CountModelArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    /// Compare with the exact controlled partial swap at this angle.
    #[arg(long, allow_hyphen_values = true, requires = "eta")]
    pub theta: Option<f64>,
    /// Rotation precision the circuit was built for; the tolerance is 2 eta + 1e-9.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Compare with another circuit up to global phase.
    #[arg(long, conflicts_with = "theta")]
    pub against: Option<PathBuf>,
    /// Distance tolerance for `--against`.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Ideal,
    Compiled,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub batch: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Ideal)]
    pub mode: ModeArg,
    /// Rotation precision in compiled mode and in the error model.
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,
    /// Quadratic error constant of the error model.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Uniform per-gate error of the error model in compiled mode.
    #[arg(long, default_value_t = 0.0)]
    pub gate_error: f64,
    /// Also report the distance between forward and reversed batch order.
    #[arg(long)]
    pub order_gap: bool,
    #[command(flatten)]
    pub model: CountModelArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct AlphaFitArgs {
    #[arg(long)]
    pub batch: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1")]
    pub t_list: Vec<f64>,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Write the fitted configuration as JSON.
    #[arg(long)]
    pub config_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct HebbianArgs {
    #[arg(long)]
    pub patterns: PathBuf,
    /// Accept arbitrary real rows (rescaled to norm sqrt(d)).
    #[arg(long)]
    pub lenient: bool,
    /// Write the amplitude-encoded batch file here.
    #[arg(long)]
    pub batch_out: Option<PathBuf>,
    /// Write a JSON summary here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseChannelArg {
    /// Exact controlled exponential.
    Exact,
    /// Protocol with exact swaps.
    Ideal,
    /// Protocol with compiled swap circuits.
    Compiled,
}

#[derive(Args, Debug, Serialize)]
pub struct PhaseArgs {
    #[arg(long)]
    pub batch: PathBuf,
    /// Bitstring (`01`), eigenvector of the ensemble (`eig:K`, K=0 largest) or
    /// inline JSON amplitudes (`[[re,im],...]`).
    #[arg(long)]
    pub input: String,
    #[arg(long)]
    pub bits: usize,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long, value_enum, default_value_t = PhaseChannelArg::Ideal)]
    pub channel: PhaseChannelArg,
    /// Batches at the lowest power; power 2^k uses n0 * 4^k.
    #[arg(long, default_value_t = 16)]
    pub n0: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub t0: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeArg {
    Fixed,
    ErrorCorrected,
}

#[derive(Args, Debug, Serialize)]
pub struct ResourcesArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub n_qubits: u64,
    /// Target error (error-corrected regime).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub gate_error: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta_rotation: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta_gates: f64,
    #[arg(long, default_value_t = 1.0)]
    pub batch_constant: f64,
    /// Preparation time of one training state.
    #[arg(long)]
    pub t_data: Option<f64>,
    #[command(flatten)]
    pub model: CountModelArgs,
}

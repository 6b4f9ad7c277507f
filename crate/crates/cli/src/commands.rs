use std::path::Path;

use bcqse_core::batchfile::{batch_to_json, parse_batch_json, BatchFile};
use bcqse_core::bcqse::{
    alpha_fit, batch_order_gap, ensemble_state, resource_report, sweep, ErrorModelParams, ProtocolParams, Regime,
    ResourceConfig, SwapMode,
};
use bcqse_core::circuit::Circuit;
use bcqse_core::cpswap::{
    build_cpswap_circuit, compare_with_exact, cpswap_count_formula, cpswap_counts_with_rotations, verify_cpswap,
    CPSwapSpec, CircuitComparison,
};
use bcqse_core::gateset::{GateCountVector, GateErrorVector};
use bcqse_core::hebbian::{build_weight_matrix, quantum_hebbian_identity_check};
use bcqse_core::phasest::{
    kitaev_phase_estimate, pe_resource_report, PeResourceConfig, PhaseChannel, PhaseEstimateOptions, PhaseEstimateResult,
    PeResourceReport,
};
use bcqse_core::qcore::{hermitian_eigen, phase_invariant_distance, StateVector};
use bcqse_core::rzsynth::{CountModel, SynthConfig, Synthesizer};
use serde::Serialize;

use crate::args::*;
use crate::error::CliError;
use crate::output::{emit, json, read_file, write_file, Csv};

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Synth(a) => synth(a, out),
        Command::Decompose(a) => decompose(a, out),
        Command::Verify(a) => verify(a, out),
        Command::BcqseSweep(a) => bcqse_sweep(cli, a, out),
        Command::AlphaFit(a) => alpha(cli, a, out),
        Command::Hebbian(a) => hebbian(cli, a, out),
        Command::PhaseEstimate(a) => phase_estimate(cli, a, out),
        Command::Resources(a) => resources(a, out),
    }
}

fn count_model(a: &CountModelArgs) -> CountModel {
    CountModel { c_log: a.c_log, g_const: a.g_const }
}

fn load_batch(path: &Path) -> Result<BatchFile> {
    Ok(parse_batch_json(&read_file(path)?)?)
}

#[derive(Serialize)]
struct SynthReport {
    tau: f64,
    eta: f64,
    tokens: Vec<&'static str>,
    achieved_error: f64,
    counts: GateCountVector,
    t_count: u64,
}

fn synth(a: &SynthArgs, out: Option<&Path>) -> Result<()> {
    let owned;
    let synth = match a.max_half_t {
        Some(max_half_t) => {
            owned = Synthesizer::new(SynthConfig { max_half_t });
            &owned
        }
        None => Synthesizer::global(),
    };
    let r = synth.synthesize(a.tau, a.eta)?;
    let report = SynthReport {
        tau: a.tau,
        eta: a.eta,
        tokens: r.tokens(),
        achieved_error: r.achieved_error,
        counts: r.counts,
        t_count: r.counts.t,
    };
    emit(out, &json(&report))
}

#[derive(Serialize)]
struct DecomposeReport {
    n: usize,
    theta: f64,
    eta: f64,
    qubits: usize,
    gates: usize,
    g_eta_model: u64,
    g_const: u64,
    formula_counts: GateCountVector,
    formula_counts_actual_rotations: GateCountVector,
    actual_counts: GateCountVector,
    rotation_discrepancy: [i64; 5],
    verified_error: f64,
    error_bound: f64,
    ancilla_leakage: f64,
    control_zero_deviation: f64,
    unitarity_error: f64,
    circuit_file: Option<String>,
    circuit: Option<String>,
}

fn decompose(a: &DecomposeArgs, out: Option<&Path>) -> Result<()> {
    let spec = CPSwapSpec::new(a.n, a.theta, a.eta)?;
    let built = build_cpswap_circuit(&spec)?;
    let v = verify_cpswap(&built)?;
    let model = count_model(&a.model);
    let g_eta_model = model.g_eta(a.eta)?;
    let n = a.n as u64;
    let text = built.circuit.to_text();
    if let Some(p) = &a.circuit {
        write_file(p, &text)?;
    }
    let report = DecomposeReport {
        n: a.n,
        theta: a.theta,
        eta: a.eta,
        qubits: built.circuit.num_qubits(),
        gates: built.circuit.len(),
        g_eta_model,
        g_const: model.g(),
        formula_counts: cpswap_count_formula(n, g_eta_model, model.g()),
        formula_counts_actual_rotations: cpswap_counts_with_rotations(
            n,
            built.first_rotation.counts,
            built.second_rotation.counts,
        ),
        actual_counts: built.circuit.gate_count(),
        rotation_discrepancy: built.rotation_discrepancy(),
        verified_error: v.distance,
        error_bound: v.error_bound,
        ancilla_leakage: v.ancilla_leakage,
        control_zero_deviation: v.control_zero_deviation,
        unitarity_error: v.unitarity_error,
        circuit_file: a.circuit.as_ref().map(|p| p.display().to_string()),
        circuit: a.circuit.is_none().then_some(text),
    };
    emit(out, &json(&report))?;
    if report.actual_counts != report.formula_counts_actual_rotations {
        return Err(CliError::Contract(format!(
            "structural count {} differs from the formula {}",
            report.actual_counts, report.formula_counts_actual_rotations
        )));
    }
    if v.distance > v.error_bound + 1e-9 {
        return Err(CliError::Contract(format!(
            "verified error {:.3e} exceeds the rotation bound {:.3e}",
            v.distance, v.error_bound
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    circuit: String,
    label: String,
    qubits: usize,
    gates: usize,
    counts: GateCountVector,
    unitarity_error: Option<f64>,
    comparison: Option<CircuitComparison>,
    against_distance: Option<f64>,
    tolerance: Option<f64>,
    pass: bool,
}

fn verify(a: &VerifyArgs, out: Option<&Path>) -> Result<()> {
    let c: Circuit = read_file(&a.circuit)?.parse()?;
    let mut report = VerifyReport {
        circuit: a.circuit.display().to_string(),
        label: c.label().to_string(),
        qubits: c.num_qubits(),
        gates: c.len(),
        counts: c.gate_count(),
        unitarity_error: None,
        comparison: None,
        against_distance: None,
        tolerance: None,
        pass: true,
    };
    if let (Some(theta), Some(eta)) = (a.theta, a.eta) {
        let q = c.num_qubits();
        if q < 4 || !q.is_multiple_of(2) {
            return Err(CliError::Input(format!("a {q}-qubit circuit is not a controlled partial swap layout")));
        }
        let spec = CPSwapSpec::new((q - 2) / 2, theta, eta)?;
        let cmp = compare_with_exact(&c, &spec)?;
        let tol = 2.0 * eta + 1e-9;
        report.unitarity_error = Some(cmp.unitarity_error);
        report.pass = cmp.distance <= tol;
        report.comparison = Some(cmp);
        report.tolerance = Some(tol);
    } else if let Some(other) = &a.against {
        let o: Circuit = read_file(other)?.parse()?;
        if o.num_qubits() != c.num_qubits() {
            return Err(CliError::Input(format!(
                "circuits have {} and {} qubits",
                c.num_qubits(),
                o.num_qubits()
            )));
        }
        let (u, v) = (c.compile_unitary()?, o.compile_unitary()?);
        let d = phase_invariant_distance(&u, &v)?;
        report.unitarity_error = Some(bcqse_core::qcore::unitarity_error(&u));
        report.against_distance = Some(d);
        report.tolerance = Some(a.tolerance);
        report.pass = d <= a.tolerance;
    } else if c.num_qubits() <= bcqse_core::qcore::MAX_QUBITS {
        report.unitarity_error = Some(bcqse_core::qcore::unitarity_error(&c.compile_unitary()?));
    }
    emit(out, &json(&report))?;
    if !report.pass {
        return Err(CliError::Contract("circuit distance exceeds the tolerance".into()));
    }
    Ok(())
}

fn swap_mode(mode: ModeArg, eta: f64) -> SwapMode {
    match mode {
        ModeArg::Ideal => SwapMode::IdealSwap,
        ModeArg::Compiled => SwapMode::CompiledCircuit { synthesis_eta: eta },
    }
}

fn bcqse_sweep(cli: &Cli, a: &SweepArgs, out: Option<&Path>) -> Result<()> {
    let file = load_batch(&a.batch)?;
    let batch = &file.batch;
    let (m, nq) = (batch.m() as u64, batch.n_qubits() as u64);
    let model = match a.mode {
        ModeArg::Ideal => ErrorModelParams::new(a.alpha, GateErrorVector::default(), 0.0, m, nq, 0, 0)?,
        ModeArg::Compiled => ErrorModelParams::from_count_model(
            a.alpha,
            GateErrorVector::uniform(a.gate_error)?,
            a.eta,
            m,
            nq,
            &count_model(&a.model),
        )?,
    };
    let mode = swap_mode(a.mode, a.eta);
    let points = sweep(batch, a.t, &a.n_list, mode, Some(&model))?;
    let mut header = vec!["n", "choi_distance", "op_distance_proxy", "predicted_error_model"];
    if a.order_gap {
        header.push("order_gap");
    }
    let mut csv = Csv::new(cli, &header);
    csv.comment("batch", format!("m={m} n_qubits={nq}"));
    for p in &points {
        let mut cells = vec![
            p.n.to_string(),
            p.choi_distance.to_string(),
            p.op_distance_proxy.to_string(),
            p.predicted_error_model.map_or(String::new(), |e| e.to_string()),
        ];
        if a.order_gap {
            cells.push(batch_order_gap(batch, &ProtocolParams::new(a.t, p.n, mode)?)?.to_string());
        }
        csv.row(cells);
    }
    emit(out, &csv.into_string())
}

#[derive(Serialize)]
struct FittedConfig<'a> {
    batch: String,
    n: usize,
    t_list: &'a [f64],
    alpha: f64,
    rms_residual: f64,
}

fn alpha(cli: &Cli, a: &AlphaFitArgs, out: Option<&Path>) -> Result<()> {
    let file = load_batch(&a.batch)?;
    let fit = alpha_fit(&file.batch, &a.t_list, a.n)?;
    let mut csv = Csv::new(cli, &["t", "n", "choi_distance", "scaled_error"]);
    csv.comment("alpha", fit.alpha);
    csv.comment("rms_residual", fit.rms_residual);
    for p in &fit.points {
        csv.row([p.t.to_string(), p.n.to_string(), p.choi_distance.to_string(), p.scaled_error.to_string()]);
    }
    if let Some(path) = &a.config_out {
        let cfg = FittedConfig {
            batch: a.batch.display().to_string(),
            n: a.n,
            t_list: &a.t_list,
            alpha: fit.alpha,
            rms_residual: fit.rms_residual,
        };
        write_file(path, &json(&cfg))?;
    }
    emit(out, &csv.into_string())
}

#[derive(Serialize)]
struct HebbianReport {
    d: usize,
    m: usize,
    binary: bool,
    identity_residual: f64,
    op_norm: f64,
    symmetric: bool,
    zero_diagonal: bool,
}

fn hebbian(cli: &Cli, a: &HebbianArgs, out: Option<&Path>) -> Result<()> {
    let text = read_file(&a.patterns)?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", a.patterns.display())))?;
    if a.lenient {
        if let Some(obj) = value.as_object_mut() {
            obj.insert("lenient".into(), true.into());
        }
    }
    let file = parse_batch_json(&value.to_string())?;
    let patterns = file
        .patterns
        .as_ref()
        .ok_or_else(|| CliError::Input("pattern file needs a `patterns` field".into()))?;
    let w = build_weight_matrix(patterns);
    let residual = quantum_hebbian_identity_check(patterns)?;
    let d = patterns.d();
    let report = HebbianReport {
        d,
        m: patterns.m(),
        binary: patterns.is_binary(),
        identity_residual: residual,
        op_norm: w.op_norm(),
        symmetric: w.w == w.w.transpose(),
        zero_diagonal: (0..d).all(|i| w.w[(i, i)] == 0.0),
    };

    let mut header = vec!["row".to_string()];
    header.extend((0..d).map(|j| format!("c{j}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(cli, &header);
    csv.comment("identity_residual", residual);
    for i in 0..d {
        csv.row(std::iter::once(i.to_string()).chain((0..d).map(|j| w.w[(i, j)].to_string())));
    }
    emit(out, &csv.into_string())?;
    if let Some(p) = &a.batch_out {
        write_file(p, &(batch_to_json(&file.batch, file.t_data) + "\n"))?;
    }
    if let Some(p) = &a.report {
        write_file(p, &json(&report))?;
    }
    if report.binary && residual > 1e-12 {
        return Err(CliError::Contract(format!("quantum Hebbian identity residual {residual:.3e} exceeds 1e-12")));
    }
    Ok(())
}

fn parse_input_state(spec: &str, file: &BatchFile) -> Result<StateVector> {
    let n = file.batch.n_qubits();
    let spec = spec.trim();
    if let Some(k) = spec.strip_prefix("eig:") {
        let k: usize = k.parse().map_err(|_| CliError::Input(format!("bad eigenvector index `{k}`")))?;
        let (_, vectors) = hermitian_eigen(ensemble_state(&file.batch).matrix())?;
        let d = vectors.ncols();
        if k >= d {
            return Err(CliError::Input(format!("eigenvector index {k} out of range for dimension {d}")));
        }
        return Ok(StateVector::normalized(vectors.column(d - 1 - k).iter().copied().collect())?);
    }
    if spec.starts_with('[') {
        let wrapped = format!("{{\"n_qubits\": {n}, \"states\": [{spec}]}}");
        let parsed = parse_batch_json(&wrapped)?;
        return Ok(parsed.batch.states()[0].clone());
    }
    if !spec.is_empty() && spec.chars().all(|c| c == '0' || c == '1') {
        if spec.len() != n {
            return Err(CliError::Input(format!("bitstring `{spec}` has {} bits, batch states have {n} qubits", spec.len())));
        }
        let index = usize::from_str_radix(spec, 2).expect("binary digits");
        return Ok(StateVector::basis(n, index)?);
    }
    Err(CliError::Input(format!("unrecognized input state `{spec}`")))
}

#[derive(Serialize)]
struct PhaseReport {
    estimate: f64,
    per_bit_probs: Vec<f64>,
    resources: PeResourceReport,
    channel: PhaseChannel,
    detail: PhaseEstimateResult,
}

fn phase_estimate(cli: &Cli, a: &PhaseArgs, out: Option<&Path>) -> Result<()> {
    let file = load_batch(&a.batch)?;
    let input = parse_input_state(&a.input, &file)?;
    let channel = match a.channel {
        PhaseChannelArg::Exact => PhaseChannel::Exact,
        PhaseChannelArg::Ideal => PhaseChannel::Protocol { n0: a.n0, mode: SwapMode::IdealSwap },
        PhaseChannelArg::Compiled => {
            PhaseChannel::Protocol { n0: a.n0, mode: SwapMode::CompiledCircuit { synthesis_eta: a.eta } }
        }
    };
    let opts = PhaseEstimateOptions { t0: a.t0, shots: a.shots, seed: cli.seed };
    let detail = kitaev_phase_estimate(&file.batch, &input, a.bits, channel, &opts)?;
    let eps = 0.5f64.powi(a.bits as i32);
    let resources = pe_resource_report(
        eps,
        file.batch.m() as u64,
        file.batch.n_qubits() as u64,
        &PeResourceConfig::default(),
    )?;
    if let Some(w) = &detail.warning {
        eprintln!("warning: {w}");
    }
    let report = PhaseReport {
        estimate: detail.estimated_eigenvalue,
        per_bit_probs: detail.success_probability_trace.clone(),
        resources,
        channel,
        detail,
    };
    emit(out, &json(&report))
}

fn resources(a: &ResourcesArgs, out: Option<&Path>) -> Result<()> {
    let cfg = ResourceConfig {
        alpha: a.alpha,
        gate_errors: GateErrorVector::uniform(a.gate_error)?,
        eta: a.eta,
        count_model: count_model(&a.model),
        delta_rotation: a.delta_rotation,
        delta_gates: a.delta_gates,
        batch_constant: a.batch_constant,
        t_data: a.t_data,
    };
    let regime = match a.regime {
        RegimeArg::Fixed => Regime::Fixed,
        RegimeArg::ErrorCorrected => Regime::ErrorCorrected,
    };
    let report = resource_report(a.n_qubits, a.m, a.t, a.epsilon, regime, &cfg)?;
    emit(out, &json(&report))
}

//! Controlled partial swap `|0><0| (x) I + |1><1| (x) exp(-i theta S)` between
//! two N-qubit registers, as an exact matrix and as a Clifford+T circuit.
//!
//! Circuit wires: learning qubit 0, register `a` on `1..=N`, register `b` on
//! `N+1..=2N`, ancilla on `2N+1`. Each pair `(a_k, b_k)` is rotated so that
//! only its singlet component lands on `|11>`; Toffolis accumulate the singlet
//! parity (the swap eigenvalue) on the ancilla, a controlled Z rotation applies
//! the phase, and the mirror image uncomputes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{controlled_quarter_y, toffoli, Circuit, QuarterTurn};
use crate::error::{Error, Result};
use crate::gateset::GateCountVector;
use crate::qcore::{
    c64, controlled_exponential, identity, kron, op_norm, partial_trace, swap_operator, unitarity_error,
    ComplexMatrix, StateVector, MAX_QUBITS,
};
use crate::rzsynth::{SynthesisResult, Synthesizer};

/// Largest register size the circuit builder accepts.
pub const MAX_REGISTER_QUBITS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CPSwapSpec {
    pub n_qubits_per_register: usize,
    pub theta: f64,
    pub synthesis_eta: f64,
}

impl CPSwapSpec {
    pub fn new(n_qubits_per_register: usize, theta: f64, synthesis_eta: f64) -> Result<Self> {
        if n_qubits_per_register == 0 {
            return Err(Error::InvalidArgument("register size must be >= 1".into()));
        }
        if synthesis_eta.is_nan() || synthesis_eta <= 0.0 {
            return Err(Error::InvalidArgument(format!("synthesis eta must be positive, got {synthesis_eta}")));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidArgument("theta must be finite".into()));
        }
        Ok(Self { n_qubits_per_register, theta, synthesis_eta })
    }

    pub fn n(&self) -> usize {
        self.n_qubits_per_register
    }

    /// Learning qubit, both registers and the ancilla.
    pub fn circuit_qubits(&self) -> usize {
        2 * self.n() + 2
    }

    pub fn ancilla(&self) -> usize {
        2 * self.n() + 1
    }
}

/// `|0><0| (x) I + |1><1| (x) exp(-i theta S)` on `1 + 2N` qubits.
pub fn exact_cpswap(spec: &CPSwapSpec) -> Result<ComplexMatrix> {
    if 1 + 2 * spec.n() > MAX_QUBITS {
        return Err(Error::QubitCapExceeded { required: 1 + 2 * spec.n(), cap: MAX_QUBITS });
    }
    controlled_exponential(&swap_operator(spec.n())?, spec.theta)
}

#[derive(Debug, Clone)]
pub struct CPSwapCircuit {
    pub spec: CPSwapSpec,
    pub circuit: Circuit,
    /// Approximates `exp(-i theta/2 Z)`, applied before the first central CNOT.
    pub first_rotation: SynthesisResult,
    /// Approximates `exp(+i theta/2 Z)`; the exact inverse of the first.
    pub second_rotation: SynthesisResult,
}

impl CPSwapCircuit {
    /// Sum of the two rotation errors.
    pub fn error_bound(&self) -> f64 {
        self.first_rotation.achieved_error + self.second_rotation.achieved_error
    }

    pub fn rotation_counts(&self) -> GateCountVector {
        self.first_rotation.counts + self.second_rotation.counts
    }

    /// Componentwise first-minus-second rotation counts.
    pub fn rotation_discrepancy(&self) -> [i64; 5] {
        self.first_rotation.counts.diff(&self.second_rotation.counts)
    }
}

pub fn build_cpswap_circuit(spec: &CPSwapSpec) -> Result<CPSwapCircuit> {
    build_cpswap_circuit_with(spec, Synthesizer::global())
}

pub fn build_cpswap_circuit_with(spec: &CPSwapSpec, synth: &Synthesizer) -> Result<CPSwapCircuit> {
    let n = spec.n();
    if n > MAX_REGISTER_QUBITS {
        return Err(Error::QubitCapExceeded { required: spec.circuit_qubits(), cap: 2 * MAX_REGISTER_QUBITS + 2 });
    }
    let first_rotation = synth.synthesize(spec.theta / 2.0, spec.synthesis_eta)?;
    let second_rotation = first_rotation.dagger();

    let learning = 0;
    let anc = spec.ancilla();
    let a = |k: usize| 1 + k;
    let b = |k: usize| 1 + n + k;
    let mut c = Circuit::new(spec.circuit_qubits())?
        .with_label(format!("controlled partial swap N={n} theta={} eta={}", spec.theta, spec.synthesis_eta));

    let forward = controlled_quarter_y(QuarterTurn::Positive);
    let backward = controlled_quarter_y(QuarterTurn::Negative);
    let tof = toffoli();

    for k in 0..n {
        c.cnot(b(k), a(k))?;
        c.append_mapped(&forward, &[a(k), b(k)])?;
    }
    for k in 0..n {
        c.append_mapped(&tof, &[a(k), b(k), anc])?;
    }
    c.push_sequence(&first_rotation.sequence, anc)?;
    c.cnot(learning, anc)?;
    c.push_sequence(&second_rotation.sequence, anc)?;
    c.cnot(learning, anc)?;
    for k in (0..n).rev() {
        c.append_mapped(&tof, &[a(k), b(k), anc])?;
    }
    for k in (0..n).rev() {
        c.append_mapped(&backward, &[a(k), b(k)])?;
        c.cnot(b(k), a(k))?;
    }
    Ok(CPSwapCircuit { spec: *spec, circuit: c, first_rotation, second_rotation })
}

/// `(12N + 6 g_eta, 10N + 4 g_eta, 2g, 18N + 2, 18N + 6 g_eta)`.
pub fn cpswap_count_formula(n: u64, g_eta: u64, g_const: u64) -> GateCountVector {
    GateCountVector::new(12 * n + 6 * g_eta, 10 * n + 4 * g_eta, 2 * g_const, 18 * n + 2, 18 * n + 6 * g_eta)
}

/// The formula with `g_eta = g = 0`: everything except the two rotations.
pub fn cpswap_fixed_counts(n: u64) -> GateCountVector {
    cpswap_count_formula(n, 0, 0)
}

/// The formula with the two rotations' actual counts in place of the model terms.
pub fn cpswap_counts_with_rotations(n: u64, first: GateCountVector, second: GateCountVector) -> GateCountVector {
    cpswap_fixed_counts(n) + first + second
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircuitComparison {
    /// Phase-invariant operator distance to the exact operator, restricted to
    /// ancilla input `|0>`.
    pub distance: f64,
    /// `||(I (x) <1|) U (I (x) |0>)||`: the largest amplitude any input can
    /// leave on ancilla `|1>`.
    pub ancilla_leakage: f64,
    /// `||(<0| (x) I) U (|0> (x) I) - I||` over registers and ancilla.
    pub control_zero_deviation: f64,
    pub unitarity_error: f64,
}

/// Compares any circuit on the swap layout with the exact operator of `spec`.
pub fn compare_with_exact(circuit: &Circuit, spec: &CPSwapSpec) -> Result<CircuitComparison> {
    if circuit.num_qubits() != spec.circuit_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "circuit has {} qubits, a swap on {}-qubit registers needs {}",
            circuit.num_qubits(),
            spec.n(),
            spec.circuit_qubits()
        )));
    }
    let u = circuit.compile_unitary()?;
    let exact = exact_cpswap(spec)?;
    let dim = u.nrows();
    let half = dim / 2;
    // ancilla is the last qubit: even indices have it in |0>
    let anc0 = ComplexMatrix::from_fn(dim, half, |r, c| if r == 2 * c { c64(1., 0.) } else { c64(0., 0.) });
    let anc1 = ComplexMatrix::from_fn(dim, half, |r, c| if r == 2 * c + 1 { c64(1., 0.) } else { c64(0., 0.) });
    let compiled = &u * &anc0;
    let ideal = kron(&exact, &identity(2)) * &anc0;
    let control_zero = u.view((0, 0), (half, half)).into_owned();
    Ok(CircuitComparison {
        distance: phase_invariant_isometry_distance(&compiled, &ideal),
        ancilla_leakage: op_norm(&(anc1.adjoint() * &compiled)),
        control_zero_deviation: op_norm(&(control_zero - identity(half))),
        unitarity_error: unitarity_error(&u),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CPSwapVerification {
    pub distance: f64,
    /// Sum of the two rotation errors.
    pub error_bound: f64,
    pub ancilla_leakage: f64,
    pub control_zero_deviation: f64,
    pub unitarity_error: f64,
}

/// Compiles the built circuit and compares it with the exact operator.
pub fn verify_cpswap(built: &CPSwapCircuit) -> Result<CPSwapVerification> {
    let c = compare_with_exact(&built.circuit, &built.spec)?;
    Ok(CPSwapVerification {
        distance: c.distance,
        error_bound: built.error_bound(),
        ancilla_leakage: c.ancilla_leakage,
        control_zero_deviation: c.control_zero_deviation,
        unitarity_error: c.unitarity_error,
    })
}

/// Largest deviation `||rho_anc - |0><0|||_op` of the ancilla's reduced state
/// over `samples` random product inputs with the ancilla in `|0>`.
pub fn ancilla_deviation_random(built: &CPSwapCircuit, samples: usize, seed: u64) -> Result<f64> {
    let width = built.circuit.num_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let zero = StateVector::basis(1, 0)?;
    for _ in 0..samples {
        let amps = (0..1usize << (width - 1)).map(|_| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let input = StateVector::normalized(amps)?.tensor(&zero);
        let out = built.circuit.apply_to_state(&input)?;
        let reduced = partial_trace(&out.projector(), &[width - 1], width)?;
        worst = worst.max(op_norm(&(reduced - zero.projector())));
    }
    Ok(worst)
}

/// `min_phi ||A - e^{i phi} B||_op` for equally shaped matrices, by a coarse
/// scan over the circle followed by golden-section refinement.
pub fn phase_invariant_isometry_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let f = |phi: f64| op_norm(&(a - b * num_complex::Complex64::from_polar(1.0, phi)));
    let overlap = (b.adjoint() * a).trace();
    let start = if overlap.norm() > 0.0 { overlap.arg() } else { 0.0 };
    const SCAN: usize = 64;
    let step = std::f64::consts::TAU / SCAN as f64;
    let (mut best_phi, mut best) = (start, f(start));
    for k in 1..SCAN {
        let phi = start + k as f64 * step;
        let v = f(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    let (mut lo, mut hi) = (best_phi - step, best_phi + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    best.min(f1).min(f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::phase_invariant_distance;

    #[test]
    fn zero_angle_is_identity() {
        let spec = CPSwapSpec::new(2, 0.0, 1e-3).unwrap();
        assert!((exact_cpswap(&spec).unwrap() - identity(32)).norm() < 1e-12);
        let built = build_cpswap_circuit(&spec).unwrap();
        let u = built.circuit.compile_unitary().unwrap();
        assert!((u - identity(64)).norm() < 1e-9);
    }

    #[test]
    fn quarter_turn_swaps_with_phase() {
        let spec = CPSwapSpec::new(1, std::f64::consts::FRAC_PI_2, 1e-3).unwrap();
        let u = exact_cpswap(&spec).unwrap();
        // |1>|a=0>|b=1> is index 0b101; it maps to -i |1>|1>|0>
        let input = StateVector::basis(3, 0b101).unwrap();
        let out = &u * input.amplitudes();
        assert!((out[0b110] - c64(0., -1.)).norm() < 1e-14);
    }

    #[test]
    fn control_zero_leaves_data_alone() {
        let spec = CPSwapSpec::new(1, 0.8, 1e-3).unwrap();
        let u = exact_cpswap(&spec).unwrap();
        assert!((u.view((0, 0), (4, 4)).into_owned() - identity(4)).norm() < 1e-12);
    }

    #[test]
    fn exact_operator_is_symmetric_under_relabelling() {
        let spec = CPSwapSpec::new(2, 0.37, 1e-3).unwrap();
        let u = exact_cpswap(&spec).unwrap();
        let s = kron(&identity(2), &swap_operator(2).unwrap());
        assert!((&s * &u * &s - &u).norm() < 1e-13);
    }

    #[test]
    fn formula_examples() {
        assert_eq!(cpswap_count_formula(1, 0, 10), GateCountVector::new(12, 10, 20, 20, 18));
        assert_eq!(cpswap_count_formula(2, 5, 10), GateCountVector::new(54, 40, 20, 38, 66));
    }

    #[test]
    fn exact_rotation_angle_gives_exact_circuit() {
        let spec = CPSwapSpec::new(1, std::f64::consts::FRAC_PI_4, 1e-3).unwrap();
        let built = build_cpswap_circuit(&spec).unwrap();
        let v = verify_cpswap(&built).unwrap();
        assert!(v.distance < 1e-9, "{v:?}");
        assert!(v.ancilla_leakage < 1e-9, "{v:?}");
        assert_eq!(built.rotation_discrepancy(), [0; 5]);
    }

    #[test]
    fn isometry_distance_agrees_with_square_case() {
        let a = crate::qcore::rz(0.3);
        let b = crate::qcore::rz(0.5) * c64(0.0, 1.0);
        let d = phase_invariant_isometry_distance(&a, &b);
        assert!((d - phase_invariant_distance(&a, &b).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(CPSwapSpec::new(0, 0.1, 1e-3).is_err());
        assert!(CPSwapSpec::new(1, 0.1, 0.0).is_err());
        let big = CPSwapSpec::new(6, 0.1, 1e-3).unwrap();
        assert!(matches!(build_cpswap_circuit(&big), Err(Error::QubitCapExceeded { .. })));
    }
}

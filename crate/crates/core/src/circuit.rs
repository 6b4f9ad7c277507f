//! Gate-list circuits: construction, simulation, counting and a line-based
//! text format.
//!
//! Text format, one instruction per line:
//!
//! ```text
//! #! qubits=3
//! #! label=toffoli
//! H 2
//! CNOT 1 2   # trailing comments are allowed
//! ```
//!
//! `#!` lines carry metadata; every other `#` starts a comment.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gateset::{Gate, GateCountVector};
use crate::qcore::{c64, identity, ComplexMatrix, DensityMatrix, StateVector, C64, MAX_QUBITS};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub gate: Gate,
    /// One wire for single-qubit gates, `[control, target]` for CNOT.
    pub qubits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Circuit {
    num_qubits: usize,
    instructions: Vec<Instruction>,
    label: String,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidArgument("a circuit needs at least one qubit".into()));
        }
        Ok(Self { num_qubits, instructions: Vec::new(), label: String::new() })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.set_label(label);
        self
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        // labels live on a single metadata line
        self.label = label.into().replace(['\n', '\r'], " ");
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn push(&mut self, gate: Gate, qubits: &[usize]) -> Result<()> {
        if qubits.len() != gate.arity() {
            return Err(Error::InvalidArgument(format!(
                "{gate} takes {} qubit(s), got {}",
                gate.arity(),
                qubits.len()
            )));
        }
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: self.num_qubits });
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::InvalidArgument(format!("CNOT control and target coincide on qubit {}", qubits[0])));
        }
        self.instructions.push(Instruction { gate, qubits: qubits.to_vec() });
        Ok(())
    }

    /// Appends single-qubit gates on `q` in application order.
    pub fn push_sequence(&mut self, gates: &[Gate], q: usize) -> Result<()> {
        gates.iter().try_for_each(|&g| self.push(g, &[q]))
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.push(Gate::CNOT, &[control, target])
    }

    /// Appends `other` with its qubit `i` placed on `wires[i]`.
    pub fn append_mapped(&mut self, other: &Circuit, wires: &[usize]) -> Result<()> {
        if wires.len() != other.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "mapping {} wires onto a {}-qubit circuit",
                wires.len(),
                other.num_qubits
            )));
        }
        for ins in &other.instructions {
            let mapped: Vec<usize> = ins.qubits.iter().map(|&q| wires[q]).collect();
            self.push(ins.gate, &mapped)?;
        }
        Ok(())
    }

    /// `a` followed by `b`.
    pub fn concat(a: &Circuit, b: &Circuit) -> Result<Circuit> {
        if a.num_qubits != b.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "cannot concatenate circuits on {} and {} qubits",
                a.num_qubits, b.num_qubits
            )));
        }
        let mut out = a.clone();
        out.instructions.extend(b.instructions.iter().cloned());
        Ok(out)
    }

    /// Reversed order with every gate replaced by its inverse.
    pub fn inverse(&self) -> Circuit {
        let instructions = self
            .instructions
            .iter()
            .rev()
            .map(|ins| Instruction { gate: ins.gate.dagger(), qubits: ins.qubits.clone() })
            .collect();
        Circuit { num_qubits: self.num_qubits, instructions, label: self.label.clone() }
    }

    pub fn gate_count(&self) -> GateCountVector {
        self.instructions.iter().map(|i| i.gate.unit_count()).sum()
    }

    /// The product of all gates, first gate rightmost.
    pub fn compile_unitary(&self) -> Result<ComplexMatrix> {
        if self.num_qubits > MAX_QUBITS {
            return Err(Error::QubitCapExceeded { required: self.num_qubits, cap: MAX_QUBITS });
        }
        let mut u = identity(1 << self.num_qubits);
        self.apply_columns(&mut u);
        Ok(u)
    }

    pub fn apply_to_state(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit state into a {}-qubit circuit",
                psi.num_qubits(),
                self.num_qubits
            )));
        }
        let mut out = psi.clone();
        for ins in &self.instructions {
            apply_instruction(out.amplitudes_mut().as_mut_slice(), ins, self.num_qubits);
        }
        Ok(out)
    }

    pub fn apply_to_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_raw(self.num_qubits, self.conjugate(rho.matrix())?))
    }

    /// `U m U^dagger` without forming `U`.
    pub fn conjugate(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let dim = 1usize << self.num_qubits;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch(format!("operator must be {dim}x{dim}")));
        }
        let mut left = m.clone();
        self.apply_columns(&mut left);
        // (U m)^dagger = m^dagger U^dagger, then U on the left again
        let mut right = left.adjoint();
        self.apply_columns(&mut right);
        Ok(right.adjoint())
    }

    fn apply_columns(&self, m: &mut ComplexMatrix) {
        let rows = m.nrows();
        for col in m.as_mut_slice().chunks_mut(rows) {
            for ins in &self.instructions {
                apply_instruction(col, ins, self.num_qubits);
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("#! qubits={}\n", self.num_qubits);
        if !self.label.is_empty() {
            out.push_str(&format!("#! label={}\n", self.label));
        }
        for ins in &self.instructions {
            out.push_str(ins.gate.token());
            for q in &ins.qubits {
                out.push_str(&format!(" {q}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Circuit> {
        let mut declared: Option<usize> = None;
        let mut label = String::new();
        let mut parsed: Vec<(usize, Gate, Vec<usize>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| Error::Parse { line: line_no, message };
            let line = raw.trim();
            if let Some(meta) = line.strip_prefix("#!") {
                let (key, value) = meta
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| err(format!("malformed metadata `{meta}`")))?;
                match key.trim() {
                    "qubits" => {
                        let n = value.trim().parse().map_err(|_| err(format!("bad qubit count `{value}`")))?;
                        declared = Some(n);
                    }
                    "label" => label = value.trim().to_string(),
                    other => return Err(err(format!("unknown metadata key `{other}`"))),
                }
                continue;
            }
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut fields = body.split_whitespace();
            let kind = fields.next().expect("non-empty line has a first field");
            let gate = Gate::from_str(kind).map_err(|_| err(format!("unknown gate kind `{kind}`")))?;
            let qubits = fields
                .map(|f| f.parse::<usize>().map_err(|_| err(format!("bad qubit index `{f}`"))))
                .collect::<Result<Vec<_>>>()?;
            parsed.push((line_no, gate, qubits));
        }
        let inferred = parsed.iter().flat_map(|(_, _, q)| q.iter().map(|&x| x + 1)).max().unwrap_or(1);
        let mut circuit = Circuit::new(declared.unwrap_or(inferred)).map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        circuit.label = label;
        for (line, gate, qubits) in parsed {
            circuit.push(gate, &qubits).map_err(|e| Error::Parse { line, message: e.to_string() })?;
        }
        Ok(circuit)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Circuit::parse_text(s)
    }
}

fn apply_instruction(amps: &mut [C64], ins: &Instruction, num_qubits: usize) {
    let mask = |q: usize| 1usize << (num_qubits - 1 - q);
    let dim = amps.len();
    match ins.gate {
        Gate::CNOT => {
            let (c, t) = (mask(ins.qubits[0]), mask(ins.qubits[1]));
            for i in 0..dim {
                if i & c != 0 && i & t == 0 {
                    amps.swap(i, i | t);
                }
            }
        }
        Gate::H => {
            let m = mask(ins.qubits[0]);
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..dim {
                if i & m == 0 {
                    let (a, b) = (amps[i], amps[i | m]);
                    amps[i] = (a + b) * r;
                    amps[i | m] = (a - b) * r;
                }
            }
        }
        Gate::W | Gate::Wdg => {
            let phase = diagonal_phases(ins.gate).0;
            amps.iter_mut().for_each(|a| *a *= phase);
        }
        g => {
            let m = mask(ins.qubits[0]);
            let phase = diagonal_phases(g).1;
            for (i, a) in amps.iter_mut().enumerate() {
                if i & m != 0 {
                    *a *= phase;
                }
            }
        }
    }
}

fn diagonal_phases(g: Gate) -> (C64, C64) {
    let m = g.matrix();
    (m[(0, 0)], m[(1, 1)])
}

/// Sign of the quarter-turn Y rotation in the controlled template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuarterTurn {
    /// `exp(-i pi/4 Y)`.
    Negative,
    /// `exp(+i pi/4 Y)`.
    Positive,
}

impl QuarterTurn {
    pub fn flipped(self) -> Self {
        match self {
            QuarterTurn::Negative => QuarterTurn::Positive,
            QuarterTurn::Positive => QuarterTurn::Negative,
        }
    }

    fn sign(self) -> f64 {
        match self {
            QuarterTurn::Negative => -1.0,
            QuarterTurn::Positive => 1.0,
        }
    }
}

/// Controlled quarter-turn Y rotation on two wires (qubit 0 controls qubit 1):
/// `S H T H Sdg`, CNOT, `S H Tdg H Sdg`, CNOT in time order gives
/// `exp(+i pi/4 Y)`; swapping T and Tdg gives `exp(-i pi/4 Y)`.
pub fn controlled_quarter_y(turn: QuarterTurn) -> Circuit {
    let (first, second) = match turn {
        QuarterTurn::Positive => (Gate::T, Gate::Tdg),
        QuarterTurn::Negative => (Gate::Tdg, Gate::T),
    };
    let mut c = Circuit::new(2).expect("two wires").with_label(match turn {
        QuarterTurn::Negative => "controlled exp(-i pi/4 Y)",
        QuarterTurn::Positive => "controlled exp(+i pi/4 Y)",
    });
    let build = |c: &mut Circuit| -> Result<()> {
        c.push_sequence(&[Gate::S, Gate::H, first, Gate::H, Gate::Sdg], 1)?;
        c.cnot(0, 1)?;
        c.push_sequence(&[Gate::S, Gate::H, second, Gate::H, Gate::Sdg], 1)?;
        c.cnot(0, 1)
    };
    build(&mut c).expect("template wires are valid");
    c
}

/// Toffoli with controls on qubits 0 and 1 and target qubit 2.
pub fn toffoli() -> Circuit {
    use Gate::*;
    let mut c = Circuit::new(3).expect("three wires").with_label("toffoli");
    let steps: [(Gate, &[usize]); 16] = [
        (H, &[2]),
        (CNOT, &[1, 2]),
        (Tdg, &[2]),
        (CNOT, &[0, 2]),
        (T, &[2]),
        (CNOT, &[1, 2]),
        (Tdg, &[2]),
        (CNOT, &[0, 2]),
        (Tdg, &[1]),
        (T, &[2]),
        (CNOT, &[0, 1]),
        (H, &[2]),
        (Tdg, &[1]),
        (CNOT, &[0, 1]),
        (T, &[0]),
        (S, &[1]),
    ];
    for (g, q) in steps {
        c.push(g, q).expect("template wires are valid");
    }
    c
}

/// Exact `|0><0| (x) I + |1><1| (x) exp(-+i pi/4 Y)`.
pub fn controlled_quarter_y_exact(turn: QuarterTurn) -> ComplexMatrix {
    let (c, s) = (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2 * turn.sign());
    // exp(i s' Y) = cos I + i sin Y = [[cos, sin], [-sin, cos]]
    let mut m = identity(4);
    m[(2, 2)] = c64(c, 0.);
    m[(2, 3)] = c64(s, 0.);
    m[(3, 2)] = c64(-s, 0.);
    m[(3, 3)] = c64(c, 0.);
    m
}

pub fn toffoli_exact() -> ComplexMatrix {
    let mut m = identity(8);
    m[(6, 6)] = c64(0., 0.);
    m[(7, 7)] = c64(0., 0.);
    m[(6, 7)] = c64(1., 0.);
    m[(7, 6)] = c64(1., 0.);
    m
}

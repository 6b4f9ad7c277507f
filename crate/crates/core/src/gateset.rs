//! The Clifford+T alphabet and gate-count bookkeeping.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{c64, ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    H,
    S,
    Sdg,
    /// Global phase `e^{i pi/4} I`.
    W,
    Wdg,
    T,
    Tdg,
    /// Control is the first wire, target the second.
    CNOT,
}

impl Gate {
    pub const ALL: [Gate; 8] = [Gate::H, Gate::S, Gate::Sdg, Gate::W, Gate::Wdg, Gate::T, Gate::Tdg, Gate::CNOT];

    pub fn token(self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::S => "S",
            Gate::Sdg => "Sdg",
            Gate::W => "W",
            Gate::Wdg => "Wdg",
            Gate::T => "T",
            Gate::Tdg => "Tdg",
            Gate::CNOT => "CNOT",
        }
    }

    pub fn arity(self) -> usize {
        if self == Gate::CNOT {
            2
        } else {
            1
        }
    }

    pub fn dagger(self) -> Gate {
        match self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::W => Gate::Wdg,
            Gate::Wdg => Gate::W,
            Gate::T => Gate::Tdg,
            Gate::Tdg => Gate::T,
            g @ (Gate::H | Gate::CNOT) => g,
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        gate_matrix(self)
    }

    /// The count slot this gate is tallied under; daggers share their base slot.
    pub fn unit_count(self) -> GateCountVector {
        let mut c = GateCountVector::default();
        match self {
            Gate::H => c.h = 1,
            Gate::S | Gate::Sdg => c.s = 1,
            Gate::W | Gate::Wdg => c.w = 1,
            Gate::T | Gate::Tdg => c.t = 1,
            Gate::CNOT => c.cnot = 1,
        }
        c
    }
}

impl Serialize for Gate {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        serializer.serialize_str(self.token())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Gate::ALL
            .into_iter()
            .find(|g| g.token() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown gate kind `{s}`")))
    }
}

fn diag(a: C64, b: C64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[a, c64(0., 0.), c64(0., 0.), b])
}

pub fn gate_matrix(g: Gate) -> ComplexMatrix {
    let one = c64(1., 0.);
    let w = C64::from_polar(1.0, FRAC_PI_4);
    match g {
        Gate::H => {
            let h = c64(FRAC_1_SQRT_2, 0.);
            ComplexMatrix::from_row_slice(2, 2, &[h, h, h, -h])
        }
        Gate::S => diag(one, c64(0., 1.)),
        Gate::Sdg => diag(one, c64(0., -1.)),
        Gate::T => diag(one, w),
        Gate::Tdg => diag(one, w.conj()),
        Gate::W => diag(w, w),
        Gate::Wdg => diag(w.conj(), w.conj()),
        Gate::CNOT => {
            let mut m = ComplexMatrix::zeros(4, 4);
            m[(0, 0)] = one;
            m[(1, 1)] = one;
            m[(2, 3)] = one;
            m[(3, 2)] = one;
            m
        }
    }
}

/// Tally in the order (H, S, W, CNOT, T).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateCountVector {
    pub h: u64,
    pub s: u64,
    pub w: u64,
    pub cnot: u64,
    pub t: u64,
}

impl GateCountVector {
    pub const fn new(h: u64, s: u64, w: u64, cnot: u64, t: u64) -> Self {
        Self { h, s, w, cnot, t }
    }

    pub fn as_array(&self) -> [u64; 5] {
        [self.h, self.s, self.w, self.cnot, self.t]
    }

    pub fn total(&self) -> u64 {
        self.as_array().iter().sum()
    }

    /// Componentwise difference `self - other` as signed integers.
    pub fn diff(&self, other: &GateCountVector) -> [i64; 5] {
        let a = self.as_array();
        let b = other.as_array();
        std::array::from_fn(|i| a[i] as i64 - b[i] as i64)
    }
}

impl Add for GateCountVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.h + o.h, self.s + o.s, self.w + o.w, self.cnot + o.cnot, self.t + o.t)
    }
}

impl AddAssign for GateCountVector {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Mul<GateCountVector> for u64 {
    type Output = GateCountVector;
    fn mul(self, c: GateCountVector) -> GateCountVector {
        GateCountVector::new(self * c.h, self * c.s, self * c.w, self * c.cnot, self * c.t)
    }
}

impl Sum for GateCountVector {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

impl fmt::Display for GateCountVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {}, {})", self.h, self.s, self.w, self.cnot, self.t)
    }
}

/// Per-application operator-norm error of each gate kind, same order as
/// [`GateCountVector`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GateErrorVector {
    pub eps_h: f64,
    pub eps_s: f64,
    pub eps_w: f64,
    pub eps_cnot: f64,
    pub eps_t: f64,
}

impl GateErrorVector {
    pub fn new(eps_h: f64, eps_s: f64, eps_w: f64, eps_cnot: f64, eps_t: f64) -> Result<Self> {
        let v = Self { eps_h, eps_s, eps_w, eps_cnot, eps_t };
        if v.as_array().iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::InvalidArgument("gate errors must be finite and non-negative".into()));
        }
        Ok(v)
    }

    pub fn uniform(eps: f64) -> Result<Self> {
        Self::new(eps, eps, eps, eps, eps)
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.eps_h, self.eps_s, self.eps_w, self.eps_cnot, self.eps_t]
    }
}

pub fn count_dot(errs: &GateErrorVector, counts: &GateCountVector) -> f64 {
    errs.as_array().iter().zip(counts.as_array()).map(|(e, c)| e * c as f64).sum()
}

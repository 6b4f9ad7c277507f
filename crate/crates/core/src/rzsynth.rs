//! Clifford+T approximation of `exp(-i tau Z)` and the analytic count model.
//!
//! The search is a deterministic meet-in-the-middle over Matsumoto-Amano
//! normal forms `(T | e) (HT | SHT)* C`. Unitaries are handled projectively
//! as SU(2) quaternions; for two SU(2) elements the phase-invariant operator
//! distance is `min(|q1 - q2|, |q1 + q2|)`.
//!
//! Tables hold every projective element with exactly `j` T gates for
//! `j <= max_half_t`. A target `U` is matched as `U ~ P * B` where `P` is a
//! normal-form prefix (no trailing Clifford) and `B` a table element, so words
//! of up to `2 * max_half_t` T gates are covered. The first T-count with any
//! match within `eta` wins, ties broken by error.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gateset::{Gate, GateCountVector};
use crate::qcore::{phase_invariant_distance, rz, trace, ComplexMatrix, C64};

pub const DEFAULT_MAX_HALF_T: usize = 16;

const CLIFFORDS: usize = 24;

/// Finest grid level: cells of side `2^-MAX_LEVEL`.
const MAX_LEVEL: u32 = 12;
const KEY_BITS: u32 = 14;

/// SU(2) element `[[a, -conj(b)], [b, conj(a)]]` stored as `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Su2 {
    a: C64,
    b: C64,
}

impl Su2 {
    const IDENTITY: Su2 = Su2 { a: C64::new(1.0, 0.0), b: C64::new(0.0, 0.0) };

    fn from_matrix(m: &ComplexMatrix) -> Su2 {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let root = det.sqrt();
        Su2 { a: m[(0, 0)] / root, b: m[(1, 0)] / root }
    }

    fn mul(self, o: Su2) -> Su2 {
        Su2 { a: self.a * o.a - self.b.conj() * o.b, b: self.b * o.a + self.a.conj() * o.b }
    }

    fn inverse(self) -> Su2 {
        Su2 { a: self.a.conj(), b: -self.b }
    }

    fn quat(self) -> [f64; 4] {
        [self.a.re, self.a.im, self.b.re, self.b.im]
    }

    fn distance(self, o: Su2) -> f64 {
        let (p, q) = (self.quat(), o.quat());
        let minus: f64 = p.iter().zip(&q).map(|(x, y)| (x - y).powi(2)).sum();
        let plus: f64 = p.iter().zip(&q).map(|(x, y)| (x + y).powi(2)).sum();
        minus.min(plus).sqrt()
    }
}

fn gate_su2(g: Gate) -> Su2 {
    Su2::from_matrix(&g.matrix())
}

fn word_su2(matrix_order: &[Gate]) -> Su2 {
    matrix_order.iter().fold(Su2::IDENTITY, |acc, &g| acc.mul(gate_su2(g)))
}

/// Normal-form prefix `(T | e) (HT | SHT)^m`, stored by its choices.
#[derive(Debug, Clone, Copy)]
struct Prefix {
    leading_t: bool,
    syllables: u8,
    /// Bit `k` set means syllable `k` (from the left) is `SHT`.
    bits: u32,
}

impl Prefix {
    fn matrix_order(self) -> Vec<Gate> {
        let mut out = Vec::with_capacity(3 * self.syllables as usize + 1);
        if self.leading_t {
            out.push(Gate::T);
        }
        for k in 0..self.syllables {
            if self.bits >> k & 1 == 1 {
                out.push(Gate::S);
            }
            out.push(Gate::H);
            out.push(Gate::T);
        }
        out
    }

    fn all_with_t_count(t: usize) -> Vec<Prefix> {
        if t == 0 {
            return vec![Prefix { leading_t: false, syllables: 0, bits: 0 }];
        }
        let plain = (0..1u32 << t).map(|bits| Prefix { leading_t: false, syllables: t as u8, bits });
        let led = (0..1u32 << (t - 1)).map(|bits| Prefix { leading_t: true, syllables: (t - 1) as u8, bits });
        plain.chain(led).collect()
    }
}

/// All projective elements with exactly `t` T gates, as normal-form prefix
/// times Clifford. Element `k` is prefix `k / 24` times Clifford `k % 24`;
/// elements are recomputed from their index instead of being stored.
struct Table {
    prefixes: Vec<Prefix>,
    prefix_su2: Vec<Su2>,
    grids: Vec<OnceLock<Grid>>,
}

/// Element indices sorted by packed cell key.
struct Grid {
    keys: Vec<u64>,
    indices: Vec<u32>,
}

impl Table {
    fn build(t: usize) -> Table {
        let prefixes = Prefix::all_with_t_count(t);
        let prefix_su2 = prefixes.iter().map(|p| word_su2(&p.matrix_order())).collect();
        let grids = (0..=MAX_LEVEL).map(|_| OnceLock::new()).collect();
        Table { prefixes, prefix_su2, grids }
    }

    fn len(&self) -> usize {
        self.prefixes.len() * CLIFFORDS
    }

    fn element(&self, idx: u32, cliffords: &[(Vec<Gate>, Su2)]) -> Su2 {
        let (p, c) = (idx as usize / CLIFFORDS, idx as usize % CLIFFORDS);
        self.prefix_su2[p].mul(cliffords[c].1)
    }

    fn grid(&self, level: u32, cliffords: &[(Vec<Gate>, Su2)]) -> &Grid {
        self.grids[level as usize].get_or_init(|| {
            let h = cell_size(level);
            let mut pairs: Vec<(u64, u32)> = (0..self.len() as u32)
                .into_par_iter()
                .map(|i| (pack(cell_of(self.element(i, cliffords).quat(), h)), i))
                .collect();
            pairs.par_sort_unstable();
            let (keys, indices) = pairs.into_iter().unzip();
            Grid { keys, indices }
        })
    }

    /// Elements in grid cells that may hold points within `radius` of `q`.
    fn visit_near(
        &self,
        q: [f64; 4],
        radius: f64,
        cliffords: &[(Vec<Gate>, Su2)],
        mut f: impl FnMut(u32, Su2),
    ) {
        let level = level_for(radius);
        let h = cell_size(level);
        let grid = self.grid(level, cliffords);
        let lo: [i64; 4] = std::array::from_fn(|k| ((q[k] - radius) / h).floor() as i64);
        let hi: [i64; 4] = std::array::from_fn(|k| ((q[k] + radius) / h).floor() as i64);
        let mut cell = lo;
        loop {
            let key = pack(cell);
            let start = grid.keys.partition_point(|&k| k < key);
            let end = start + grid.keys[start..].partition_point(|&k| k == key);
            for &idx in &grid.indices[start..end] {
                f(idx, self.element(idx, cliffords));
            }
            // odometer over the 4-d box
            let mut d = 0;
            loop {
                if d == 4 {
                    return;
                }
                if cell[d] < hi[d] {
                    cell[d] += 1;
                    break;
                }
                cell[d] = lo[d];
                d += 1;
            }
        }
    }
}

fn cell_size(level: u32) -> f64 {
    (0.5f64).powi(level as i32)
}

fn level_for(radius: f64) -> u32 {
    // smallest power of two not below the radius, clamped to the finest level
    let mut level = 0;
    while level < MAX_LEVEL && cell_size(level + 1) >= radius {
        level += 1;
    }
    level
}

fn cell_of(q: [f64; 4], h: f64) -> [i64; 4] {
    std::array::from_fn(|k| (q[k] / h).floor() as i64)
}

fn pack(cell: [i64; 4]) -> u64 {
    let offset = 1i64 << (KEY_BITS - 1);
    let mask = (1u64 << KEY_BITS) - 1;
    cell.iter().fold(0u64, |acc, &c| (acc << KEY_BITS) | (((c + offset) as u64) & mask))
}

/// Configuration of the search depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    /// T gates allowed in each half of the split word.
    pub max_half_t: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { max_half_t: DEFAULT_MAX_HALF_T }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisResult {
    pub target_tau: f64,
    pub requested_eta: f64,
    /// Gates in time order (first applied first).
    pub sequence: Vec<Gate>,
    pub achieved_error: f64,
    pub counts: GateCountVector,
}

impl SynthesisResult {
    pub fn circuit(&self) -> Circuit {
        let mut c = Circuit::new(1).expect("one wire").with_label(format!("rz tau={}", self.target_tau));
        c.push_sequence(&self.sequence, 0).expect("single-qubit gates");
        c
    }

    pub fn unitary(&self) -> ComplexMatrix {
        sequence_unitary(&self.sequence)
    }

    pub fn tokens(&self) -> Vec<&'static str> {
        self.sequence.iter().map(|g| g.token()).collect()
    }

    /// The sequence without the trailing global-phase gates.
    pub fn core(&self) -> Vec<Gate> {
        self.sequence.iter().copied().filter(|g| !matches!(g, Gate::W | Gate::Wdg)).collect()
    }

    /// Time-reversed sequence of inverse gates: approximates `exp(+i tau Z)`
    /// with the same error and counts.
    pub fn dagger(&self) -> SynthesisResult {
        let sequence: Vec<Gate> = self.sequence.iter().rev().map(|g| g.dagger()).collect();
        SynthesisResult {
            target_tau: -self.target_tau,
            requested_eta: self.requested_eta,
            achieved_error: self.achieved_error,
            counts: self.counts,
            sequence,
        }
    }
}

fn sequence_unitary(time_order: &[Gate]) -> ComplexMatrix {
    time_order.iter().fold(crate::qcore::identity(2), |acc, g| g.matrix() * acc)
}

pub struct Synthesizer {
    config: SynthConfig,
    cliffords: Vec<(Vec<Gate>, Su2)>,
    tables: Vec<Table>,
}

impl Synthesizer {
    pub fn new(config: SynthConfig) -> Self {
        let cliffords = clifford_words();
        let tables = (0..=config.max_half_t).map(Table::build).collect();
        Self { config, cliffords, tables }
    }

    /// Shared instance with the default configuration, built on first use.
    pub fn global() -> &'static Synthesizer {
        static GLOBAL: OnceLock<Synthesizer> = OnceLock::new();
        GLOBAL.get_or_init(|| Synthesizer::new(SynthConfig::default()))
    }

    pub fn config(&self) -> SynthConfig {
        self.config
    }

    pub fn table_size(&self) -> usize {
        self.tables.iter().map(Table::len).sum()
    }

    /// Typical covering radius of all words up to the T-count cap `K`: the
    /// radius at which `72 * 2^K` projective elements fill the volume `pi^2`
    /// of the projective 3-sphere.
    pub fn precision_floor(&self) -> f64 {
        let k = 2 * self.config.max_half_t;
        (3.0 * PI / (4.0 * 72.0 * 2f64.powi(k as i32))).cbrt()
    }

    pub fn synthesize(&self, tau: f64, eta: f64) -> Result<SynthesisResult> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
        }
        if !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("tau must be finite, got {tau}")));
        }
        let target = rz(tau);
        let core = match exact_multiple(tau) {
            Some(gates) => gates,
            None => self.search(tau, eta)?,
        };
        let sequence = with_phase_fix(core, &target);
        let achieved_error = phase_invariant_distance(&sequence_unitary(&sequence), &target)?;
        let counts = sequence.iter().map(|g| g.unit_count()).sum();
        Ok(SynthesisResult { target_tau: tau, requested_eta: eta, sequence, achieved_error, counts })
    }

    fn search(&self, tau: f64, eta: f64) -> Result<Vec<Gate>> {
        let target = Su2 { a: C64::from_polar(1.0, -tau), b: C64::new(0.0, 0.0) };
        // keep a margin so the recompiled error stays within eta
        let radius = eta - 1e-12;
        let half = self.config.max_half_t;
        let mut best_seen = f64::INFINITY;
        for total in 0..=2 * half {
            // every normal form splits into a prefix with the excess T gates
            // and a table element with at most `half`
            let j = total.min(half);
            if let Some((err, key)) = self.best_split(target, total - j, j, radius.max(0.0)) {
                best_seen = best_seen.min(err);
                if err <= radius {
                    return Ok(self.assemble(key));
                }
            }
        }
        Err(Error::PrecisionUnreachable { requested: eta, floor: self.precision_floor(), best: best_seen })
    }

    /// Best `(error, (i, j, prefix, entry))` over prefixes with `i` T gates
    /// matched against table `j`.
    fn best_split(&self, target: Su2, i: usize, j: usize, radius: f64) -> Option<(f64, MatchKey)> {
        let right = &self.tables[j];
        self.tables[i]
            .prefix_su2
            .par_iter()
            .enumerate()
            .filter_map(|(pi, &p)| {
                let want = p.inverse().mul(target);
                let mut best: Option<(f64, u32)> = None;
                for q in [want.quat(), want.quat().map(|x| -x)] {
                    right.visit_near(q, radius, &self.cliffords, |idx, u| {
                        let d = u.distance(want);
                        if best.is_none_or(|(bd, bi)| d < bd || (d == bd && idx < bi)) {
                            best = Some((d, idx));
                        }
                    });
                }
                best.map(|(d, idx)| (d, (i, j, pi as u32, idx)))
            })
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
    }

    /// Time-ordered gates of `prefix * entry`.
    fn assemble(&self, (i, j, prefix, entry): MatchKey) -> Vec<Gate> {
        let (p, c) = (entry as usize / CLIFFORDS, entry as usize % CLIFFORDS);
        let mut matrix_order = self.tables[i].prefixes[prefix as usize].matrix_order();
        matrix_order.extend(self.tables[j].prefixes[p].matrix_order());
        matrix_order.extend(self.cliffords[c].0.iter().copied());
        matrix_order.reverse();
        matrix_order
    }
}

type MatchKey = (usize, usize, u32, u32);

/// The 24 single-qubit Cliffords modulo phase, as shortest `H`/`S` words in
/// matrix order.
fn clifford_words() -> Vec<(Vec<Gate>, Su2)> {
    let mut found: Vec<(Vec<Gate>, Su2)> = vec![(Vec::new(), Su2::IDENTITY)];
    let mut frontier = 0;
    while frontier < found.len() {
        let (word, u) = found[frontier].clone();
        for g in [Gate::H, Gate::S] {
            let next = u.mul(gate_su2(g));
            if found.iter().all(|(_, v)| v.distance(next) > 1e-9) {
                let mut w = word.clone();
                w.push(g);
                found.push((w, next));
            }
        }
        frontier += 1;
    }
    debug_assert_eq!(found.len(), CLIFFORDS);
    found
}

/// Exact words for `tau = k pi / 8`: `exp(-i k pi/8 Z)` is `T^k` up to phase.
fn exact_multiple(tau: f64) -> Option<Vec<Gate>> {
    let x = tau / (PI / 8.0);
    let k = x.round();
    if (x - k).abs() > 1e-12 {
        return None;
    }
    let gates = match (k as i64).rem_euclid(8) {
        0 => vec![],
        1 => vec![Gate::T],
        2 => vec![Gate::S],
        3 => vec![Gate::S, Gate::T],
        4 => vec![Gate::S, Gate::S],
        5 => vec![Gate::Sdg, Gate::Tdg],
        6 => vec![Gate::Sdg],
        _ => vec![Gate::Tdg],
    };
    Some(gates)
}

/// Appends W or Wdg gates so the global phase relative to `target` lies within
/// `pi/8` of zero; exact half-way cases are left alone.
fn with_phase_fix(mut seq: Vec<Gate>, target: &ComplexMatrix) -> Vec<Gate> {
    let u = sequence_unitary(&seq);
    let overlap = trace(&(target.adjoint() * u));
    if overlap.norm() < 1e-12 {
        return seq;
    }
    let x = overlap.arg() / FRAC_PI_4;
    let k = (x.signum() * (x.abs() - 0.5 - 1e-9).ceil()) as i64;
    let k = k.rem_euclid(8);
    if k <= 4 {
        seq.extend(std::iter::repeat_n(Gate::Wdg, k as usize));
    } else {
        seq.extend(std::iter::repeat_n(Gate::W, (8 - k) as usize));
    }
    seq
}

/// Synthesizes with the shared default synthesizer.
pub fn synthesize_rz(tau: f64, eta: f64) -> Result<SynthesisResult> {
    Synthesizer::global().synthesize(tau, eta)
}

/// Analytic gate-count model: `g_eta = ceil(c_log * log2(1/eta))` and a fixed
/// number `g_const` of W gates per rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountModel {
    pub c_log: f64,
    pub g_const: f64,
}

impl Default for CountModel {
    fn default() -> Self {
        Self { c_log: 3.0, g_const: 10.0 }
    }
}

impl CountModel {
    pub fn g_eta(&self, eta: f64) -> Result<u64> {
        count_model_g(eta, self)
    }

    pub fn g(&self) -> u64 {
        self.g_const.round() as u64
    }

    /// `(3 g_eta, 2 g_eta, g, 0, 3 g_eta)` for one rotation.
    pub fn rotation_counts(&self, eta: f64) -> Result<GateCountVector> {
        let g_eta = self.g_eta(eta)?;
        Ok(GateCountVector::new(3 * g_eta, 2 * g_eta, self.g(), 0, 3 * g_eta))
    }
}

pub fn count_model_g(eta: f64, model: &CountModel) -> Result<u64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("count model needs 0 < eta < 1, got {eta}")));
    }
    let x = model.c_log * (1.0 / eta).log2();
    Ok((x - 1e-9).ceil().max(0.0) as u64)
}

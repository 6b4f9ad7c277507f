//! Dense complex linear algebra shared by every other module.
//!
//! Qubit ordering is big-endian throughout the crate: qubit 0 is the most
//! significant bit of a basis index, so on `n` qubits qubit `q` owns bit
//! `n - 1 - q`.

mod channel;
mod state;

pub use channel::{channel_compose, channel_distance, channel_from_unitary, CptpReport, QuantumChannel};
pub use state::{DensityMatrix, StateVector};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Largest total register the dense routines are meant for.
pub const MAX_QUBITS: usize = 12;

pub const HERMITIAN_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Bit mask of qubit `q` inside a basis index over `num_qubits` qubits.
#[inline]
pub fn qubit_mask(q: usize, num_qubits: usize) -> usize {
    1 << (num_qubits - 1 - q)
}

/// The operator exchanging two `n`-qubit registers, acting on `2n` qubits.
pub fn swap_operator(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("swap register size must be >= 1".into()));
    }
    let d = 1usize << n;
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for x in 0..d {
        for y in 0..d {
            s[(y * d + x, x * d + y)] = c64(1.0, 0.0);
        }
    }
    Ok(s)
}

/// Projector `|x><x|` for an arbitrary (not necessarily normalized) vector.
pub fn outer(x: &nalgebra::DVector<C64>) -> ComplexMatrix {
    x * x.adjoint()
}

pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and eigenvectors (as columns) of a Hermitian matrix.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let dev = hermitian_deviation(h);
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// `exp(-i t h)` for Hermitian `h`, computed from its eigendecomposition.
pub fn matrix_exp_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    let mut scaled = vectors.clone();
    for (j, lambda) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -t * lambda);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(scaled * vectors.adjoint())
}

/// Reduced operator on the qubits listed in `keep` (order of the output
/// follows ascending qubit index).
pub fn partial_trace(m: &ComplexMatrix, keep: &[usize], total_qubits: usize) -> Result<ComplexMatrix> {
    let dim = 1usize << total_qubits;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "partial_trace expects a {dim}x{dim} matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&q| q >= total_qubits) {
        return Err(Error::QubitOutOfRange { index: bad, num_qubits: total_qubits });
    }
    let traced: Vec<usize> = (0..total_qubits).filter(|q| !kept.contains(q)).collect();

    let spread = |bits: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits.iter().enumerate().fold(0, |acc, (pos, &q)| {
            if bits & (1 << (k - 1 - pos)) != 0 {
                acc | qubit_mask(q, total_qubits)
            } else {
                acc
            }
        })
    };
    let dk = 1usize << kept.len();
    let de = 1usize << traced.len();
    let kept_idx: Vec<usize> = (0..dk).map(|r| spread(r, &kept)).collect();
    let env_idx: Vec<usize> = (0..de).map(|e| spread(e, &traced)).collect();

    let mut out = ComplexMatrix::zeros(dk, dk);
    for r in 0..dk {
        for c in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for &e in &env_idx {
                acc += m[(kept_idx[r] | e, kept_idx[c] | e)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if hermitian_deviation(m) <= 1e-13 {
        let sym = (m + m.adjoint()).scale(0.5);
        return SymmetricEigen::new(sym).eigenvalues.iter().map(|v| v.abs()).sum();
    }
    m.clone().singular_values().iter().sum()
}

/// `||U^dagger U - I||_op`.
pub fn unitarity_error(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    op_norm(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `min_phi ||U - e^{i phi} V||_op` for unitaries of equal dimension.
///
/// For 2x2 inputs this is closed form: removing the phase of `Tr(U^dagger V)`
/// leaves a normal matrix whose two eigenvalues sit symmetrically around 1.
/// Larger inputs use the smallest arc of the unit circle covering the
/// eigenphases of `U^dagger V`.
pub fn phase_invariant_distance(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    if u.shape() != v.shape() || !u.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "phase-invariant distance of {:?} and {:?}",
            u.shape(),
            v.shape()
        )));
    }
    let w = u.adjoint() * v;
    if u.nrows() == 2 {
        let tr = trace(&w);
        let align = if tr.norm() > 0.0 { tr.conj() / tr.norm() } else { c64(1.0, 0.0) };
        let diff = identity(2) - &w * align;
        return Ok(diff.norm() / std::f64::consts::SQRT_2);
    }
    let mut phases: Vec<f64> = unitary_eigenphases(&w);
    phases.sort_by(f64::total_cmp);
    let two_pi = std::f64::consts::TAU;
    let mut largest_gap = two_pi - (phases[phases.len() - 1] - phases[0]);
    for pair in phases.windows(2) {
        largest_gap = largest_gap.max(pair[1] - pair[0]);
    }
    let arc = (two_pi - largest_gap).max(0.0);
    Ok(2.0 * (arc / 4.0).sin())
}

/// Eigenphases in `(-pi, pi]` of a (numerically) unitary matrix, read off the
/// diagonal of its complex Schur form.
///
/// When the Schur iteration stalls (nearly degenerate spectra), the commuting
/// Hermitian parts `(W + W^dagger)/2` and `(W - W^dagger)/2i` are diagonalized
/// together through a generic real combination.
pub fn unitary_eigenphases(w: &ComplexMatrix) -> Vec<f64> {
    if let Some(schur) = w.clone().try_schur(f64::EPSILON, 10_000) {
        let (_, t) = schur.unpack();
        return t.diagonal().iter().map(|z| z.arg()).collect();
    }
    let re = (w + w.adjoint()) * c64(0.5, 0.0);
    let im = (w - w.adjoint()) * c64(0.0, -0.5);
    let mixed = re + im * c64(0.618_033_988_749_895, 0.0);
    let (_, vecs) = hermitian_eigen(&mixed).expect("combination is Hermitian");
    vecs.column_iter()
        .map(|v| (v.adjoint() * w * v)[(0, 0)].arg())
        .collect()
}

/// Controlled exponential `|0><0| (x) I + |1><1| (x) exp(-i t G)`.
pub fn controlled_exponential(generator: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let d = generator.nrows();
    let block = matrix_exp_hermitian(generator, t)?;
    let mut out = identity(2 * d);
    out.view_mut((d, d), (d, d)).copy_from(&block);
    Ok(out)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(0., -1.), c64(0., 1.), c64(0., 0.)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(1., 0.), c64(0., 0.), c64(0., 0.), c64(-1., 0.)])
}

/// `exp(-i tau Z)`.
pub fn rz(tau: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = C64::from_polar(1.0, -tau);
    m[(1, 1)] = C64::from_polar(1.0, tau);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn max_abs(m: &ComplexMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn hadamard() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(FRAC_1_SQRT_2, 0.), c64(FRAC_1_SQRT_2, 0.), c64(FRAC_1_SQRT_2, 0.), c64(-FRAC_1_SQRT_2, 0.)],
        )
    }

    #[test]
    fn kron_identity_and_diagonal() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let zi = kron(&pauli_z(), &identity(2));
        let expect = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c64(1., 0.),
            c64(1., 0.),
            c64(-1., 0.),
            c64(-1., 0.),
        ]));
        assert_eq!(zi, expect);
    }

    #[test]
    fn kron_hadamards_on_zero_state() {
        let hh = kron(&hadamard(), &hadamard());
        let mut zero = nalgebra::DVector::from_element(4, c64(0., 0.));
        zero[0] = c64(1., 0.);
        let out = hh * zero;
        for z in out.iter() {
            assert_abs_diff_eq!(z.re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn swap_single_qubit_registers() {
        let s = swap_operator(1).unwrap();
        // |01> is index 1, |10> is index 2
        assert_eq!(s[(2, 1)], c64(1., 0.));
        assert_eq!(s[(1, 1)], c64(0., 0.));
        assert_eq!(&s * &s, identity(4));
        assert_eq!(s.adjoint(), s);
    }

    #[test]
    fn swap_two_qubit_registers_permutes_basis() {
        let s = swap_operator(2).unwrap();
        // |x>=|01> (1), |y>=|10> (2): |x>|y> = index 1*4+2 = 6, |y>|x> = 2*4+1 = 9
        let mut v = nalgebra::DVector::from_element(16, c64(0., 0.));
        v[6] = c64(1., 0.);
        let out = &s * v;
        for (i, z) in out.iter().enumerate() {
            let expect = if i == 9 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(z.re, expect, epsilon = 0.0);
        }
        assert!(matches!(swap_operator(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = matrix_exp_hermitian(&ComplexMatrix::zeros(4, 4), 1.3).unwrap();
        assert!(max_abs(&(e - identity(4))) < 1e-15);
    }

    #[test]
    fn exp_of_swap_has_closed_form() {
        let s = swap_operator(1).unwrap();
        let theta = 0.3;
        let e = matrix_exp_hermitian(&s, theta).unwrap();
        let closed = identity(4).scale(theta.cos()) - s * c64(0.0, theta.sin());
        assert!(max_abs(&(e.clone() - closed)) < 1e-14);
        assert!(unitarity_error(&e) < 1e-12);
    }

    #[test]
    fn exp_eigenvector_phase() {
        let mut x = nalgebra::DVector::from_element(2, c64(0., 0.));
        x[0] = c64(1., 0.);
        let e = matrix_exp_hermitian(&outer(&x), 1.0).unwrap();
        let out = e * &x;
        assert!((out[0] - C64::from_polar(1.0, -1.0)).norm() < 1e-15);
        assert!(out[1].norm() < 1e-15);
    }

    #[test]
    fn exp_rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(0., 0.), c64(0., 0.)]);
        assert!(matches!(matrix_exp_hermitian(&m, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn op_norm_examples() {
        assert_abs_diff_eq!(op_norm(&identity(3)), 1.0, epsilon = 1e-14);
        let u = swap_operator(1).unwrap();
        assert_eq!(op_norm(&(&u - &u)), 0.0);
        let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(3., 0.), c64(0., -4.)]));
        assert_abs_diff_eq!(op_norm(&d), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn partial_trace_product_state() {
        let mut x = nalgebra::DVector::from_element(2, c64(0., 0.));
        x[0] = c64(0.6, 0.);
        x[1] = c64(0., 0.8);
        let px = outer(&x);
        let mut zero = nalgebra::DVector::from_element(2, c64(0., 0.));
        zero[0] = c64(1., 0.);
        let joint = kron(&px, &outer(&zero));
        let reduced = partial_trace(&joint, &[0], 2).unwrap();
        assert!(max_abs(&(reduced - px)) < 1e-15);
    }

    #[test]
    fn partial_trace_bell_state_is_maximally_mixed() {
        let mut bell = nalgebra::DVector::from_element(4, c64(0., 0.));
        bell[0] = c64(FRAC_1_SQRT_2, 0.);
        bell[3] = c64(FRAC_1_SQRT_2, 0.);
        let rho = outer(&bell);
        for keep in [0usize, 1] {
            let r = partial_trace(&rho, &[keep], 2).unwrap();
            assert!(max_abs(&(r - identity(2).scale(0.5))) < 1e-15);
        }
        assert!(matches!(partial_trace(&rho, &[2], 2), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn phase_invariant_distance_ignores_global_phase() {
        let u = rz(0.4);
        let v = u.clone() * C64::from_polar(1.0, 1.1);
        assert!(phase_invariant_distance(&u, &v).unwrap() < 1e-15);
        // rotation by angle a about Z: distance 2 sin(a/4) with a = 2*delta_tau
        let d = phase_invariant_distance(&rz(0.4), &rz(0.5)).unwrap();
        assert_abs_diff_eq!(d, 2.0 * (0.2f64 / 4.0).sin(), epsilon = 1e-14);
        // same value through the general route
        let big_u = kron(&rz(0.4), &identity(2));
        let big_v = kron(&rz(0.5), &identity(2)) * C64::from_polar(1.0, -0.3);
        assert_abs_diff_eq!(phase_invariant_distance(&big_u, &big_v).unwrap(), d, epsilon = 1e-12);
    }

    #[test]
    fn controlled_exponential_blocks() {
        let z = pauli_z();
        let u = controlled_exponential(&z, 0.7).unwrap();
        assert!(max_abs(&(u.view((0, 0), (2, 2)).into_owned() - identity(2))) < 1e-15);
        assert!(max_abs(&(u.view((2, 2), (2, 2)).into_owned() - rz(0.7))) < 1e-14);
    }

    #[test]
    fn degenerate_spectrum_distance_terminates() {
        let u = crate::circuit::toffoli().compile_unitary().unwrap();
        assert!(phase_invariant_distance(&u, &u).unwrap() < 1e-7);
        let shifted = &u * c64(0.0, 1.0);
        assert!(phase_invariant_distance(&u, &shifted).unwrap() < 1e-7);
        let phases = unitary_eigenphases(&identity(16));
        assert!(phases.iter().all(|p| p.abs() < 1e-12));
    }
}

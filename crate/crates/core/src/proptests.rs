//! Randomized invariants across modules.

use crate::bcqse::{
    error_model, run_bcqse, single_swap_channel, ErrorModelParams, ProtocolParams, SwapMode, TrainingBatch,
};
use crate::circuit::Circuit;
use crate::gateset::{Gate, GateErrorVector};
use crate::hebbian::{amplitude_encode, build_weight_matrix, quantum_hebbian_identity_check, PatternSet};
use crate::qcore::{
    kron, matrix_exp_hermitian, partial_trace, phase_invariant_distance, trace, ComplexMatrix, StateVector, C64,
};
use crate::rzsynth::CountModel;
use proptest::prelude::*;

fn gate_strategy() -> impl Strategy<Value = Gate> {
    prop::sample::select(Gate::ALL.to_vec())
}

fn circuit_strategy() -> impl Strategy<Value = Circuit> {
    (2usize..=4).prop_flat_map(|nq| {
        prop::collection::vec((gate_strategy(), 0..nq, 0..nq), 0..30).prop_map(move |ops| {
            let mut c = Circuit::new(nq).unwrap();
            for (g, a, b) in ops {
                if g == Gate::CNOT {
                    if a != b {
                        c.cnot(a, b).unwrap();
                    }
                } else {
                    c.push(g, &[a]).unwrap();
                }
            }
            c
        })
    })
}

fn state_strategy(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
        .prop_filter("non-zero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(|v| StateVector::normalized(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

fn density_strategy(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(state_strategy(n), 1..4).prop_map(move |states| {
        let k = states.len() as f64;
        states.iter().map(|s| s.projector()).fold(ComplexMatrix::zeros(1 << n, 1 << n), |a, p| a + p)
            / C64::new(k, 0.0)
    })
}

fn pattern_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (prop::sample::select(vec![2usize, 4, 8]), 1usize..6).prop_flat_map(|(d, m)| {
        prop::collection::vec(prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1.0 } else { -1.0 }), d), m)
    })
}

fn max_entry(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn circuit_text_round_trips(c in circuit_strategy()) {
        let back = Circuit::parse_text(&c.to_text()).unwrap();
        prop_assert_eq!(back.instructions(), c.instructions());
        prop_assert_eq!(back.num_qubits(), c.num_qubits());
    }

    #[test]
    fn circuit_inverse_cancels(c in circuit_strategy()) {
        let both = Circuit::concat(&c, &c.inverse()).unwrap();
        let u = both.compile_unitary().unwrap();
        let id = ComplexMatrix::identity(u.nrows(), u.ncols());
        prop_assert!(phase_invariant_distance(&u, &id).unwrap() < 1e-10);
        prop_assert_eq!(c.inverse().gate_count(), c.gate_count());
    }

    #[test]
    fn partial_trace_of_product_recovers_factor(a in density_strategy(1), b in density_strategy(2)) {
        let ab = kron(&a, &b);
        let left = partial_trace(&ab, &[0], 3).unwrap();
        let right = partial_trace(&ab, &[1, 2], 3).unwrap();
        prop_assert!(max_entry(&(left - &a)) < 1e-12);
        prop_assert!(max_entry(&(right - &b)) < 1e-12);
    }

    #[test]
    fn exponentials_add_in_time(rho in density_strategy(2), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let prod = matrix_exp_hermitian(&rho, s).unwrap() * matrix_exp_hermitian(&rho, t).unwrap();
        let sum = matrix_exp_hermitian(&rho, s + t).unwrap();
        prop_assert!(max_entry(&(prod - sum)) < 1e-10);
    }

    #[test]
    fn encoding_preserves_inner_products(rows in pattern_strategy()) {
        let d = rows[0].len() as f64;
        for x in &rows {
            for y in &rows {
                let ex = amplitude_encode(x).unwrap();
                let ey = amplitude_encode(y).unwrap();
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                prop_assert!((ex.inner(&ey) - C64::new(dot / d, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hebbian_structure(rows in pattern_strategy()) {
        let p = PatternSet::new(rows).unwrap();
        let w = build_weight_matrix(&p).w;
        prop_assert_eq!(&w, &w.transpose());
        prop_assert!((0..p.d()).all(|i| w[(i, i)] == 0.0));
        prop_assert!(quantum_hebbian_identity_check(&p).unwrap() < 1e-12);
        let rho = crate::bcqse::ensemble_state(&p.encode().unwrap());
        prop_assert!((trace(rho.matrix()) - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn swap_channels_are_cptp(x in state_strategy(1), theta in 0.0f64..1.5) {
        let ch = single_swap_channel(&x, theta, SwapMode::IdealSwap).unwrap();
        prop_assert!(ch.cptp_report().within(1e-10));
    }

    #[test]
    fn protocol_channels_are_cptp(
        states in prop::collection::vec(state_strategy(1), 1..4),
        t in 0.1f64..3.0,
        n in 1usize..12,
    ) {
        let batch = TrainingBatch::new(states).unwrap();
        let ch = run_bcqse(&batch, &ProtocolParams::ideal(t, n).unwrap()).unwrap();
        prop_assert!(ch.cptp_report().within(1e-10));
    }

    #[test]
    fn error_model_is_convex_in_n(
        alpha in 0.1f64..10.0,
        log_eps in -7.0f64..-3.0,
        log_eta in -4.0f64..-1.0,
        m in 1u64..8,
        nq in 1u64..4,
        t in 0.1f64..30.0,
        n in 2u64..500,
    ) {
        let p = ErrorModelParams::from_count_model(
            alpha,
            GateErrorVector::uniform(10f64.powf(log_eps)).unwrap(),
            10f64.powf(log_eta),
            m,
            nq,
            &CountModel::default(),
        )
        .unwrap();
        let e = |k| error_model(&p, t, k).unwrap();
        prop_assert!(e(n - 1) + e(n + 1) - 2.0 * e(n) >= -1e-12 * e(n));
    }
}

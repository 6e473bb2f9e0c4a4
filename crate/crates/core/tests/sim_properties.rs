use nacqfl::noise::{
    make_amplitude_damping, make_bit_flip, make_depolarizing, make_pauli, make_phase_damping,
    make_phase_flip,
};
use nacqfl::sim::{fidelity, Circuit, DensityMatrix, Gate, KrausChannel, Observable, C64};
use proptest::prelude::*;

fn pure_state(n: usize) -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
        "zero vector",
        |v| {
            let amps: Vec<C64> = v.iter().map(|&(re, im)| C64::new(re, im)).collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            (norm > 1e-3).then(|| {
                DensityMatrix::from_pure(&amps.iter().map(|a| a / norm).collect::<Vec<_>>())
                    .unwrap()
            })
        },
    )
}

fn mixed_state(n: usize) -> impl Strategy<Value = DensityMatrix> {
    (pure_state(n), pure_state(n), 0.0f64..1.0).prop_map(|(a, b, t)| a.mix(&b, t).unwrap())
}

fn channel() -> impl Strategy<Value = KrausChannel> {
    (0usize..6, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(k, p, q, r)| match k {
        0 => make_bit_flip(p).unwrap(),
        1 => make_phase_flip(p).unwrap(),
        2 => make_depolarizing(p).unwrap(),
        3 => make_amplitude_damping(p).unwrap(),
        4 => make_phase_damping(p).unwrap(),
        _ => {
            let s = (p + q + r).max(1.0);
            make_pauli(p / s, q / s, r / s).unwrap()
        }
    })
}

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    (0usize..8, 0..n, 1..n.max(2), -6.3f64..6.3).prop_map(move |(k, q, off, a)| match k {
        0 => Gate::X(q),
        1 => Gate::Y(q),
        2 => Gate::Z(q),
        3 => Gate::H(q),
        4 => Gate::Rx(q, a),
        5 => Gate::Ry(q, a),
        6 => Gate::Rz(q, a),
        _ if n > 1 => Gate::Cnot {
            control: q,
            target: (q + off) % n,
        },
        _ => Gate::Ry(q, a),
    })
}

fn assert_valid(rho: &DensityMatrix) {
    assert!((rho.trace() - C64::new(1.0, 0.0)).norm() <= 1e-10);
    assert!(rho.is_hermitian(1e-10));
    assert!(rho.min_eigenvalue() >= -1e-9);
}

proptest! {
    #[test]
    fn channels_preserve_states(rho in mixed_state(2), ch in channel(), target in 0usize..2) {
        prop_assert!(ch.completeness_deviation() <= 1e-10);
        assert_valid(&rho.apply_channel(&ch, &[target]).unwrap());
    }

    #[test]
    fn channels_are_linear(a in mixed_state(1), b in mixed_state(1), t in 0.0f64..1.0, ch in channel()) {
        let lhs = a.mix(&b, t).unwrap().apply_channel(&ch, &[0]).unwrap();
        let rhs = a.apply_channel(&ch, &[0]).unwrap().mix(&b.apply_channel(&ch, &[0]).unwrap(), t).unwrap();
        prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) <= 1e-10);
    }

    #[test]
    fn circuits_are_undone_by_their_inverse(rho in mixed_state(3), gates in prop::collection::vec(gate(3), 1..12)) {
        let c = Circuit::from_gates(3, gates).unwrap();
        let mut s = rho.clone();
        for g in c.gates().iter().chain(c.inverse().gates()) {
            s.apply_gate_mut(g).unwrap();
        }
        prop_assert!(s.matrix().max_abs_diff(rho.matrix()) <= 1e-10);
    }

    #[test]
    fn gates_keep_states_valid(rho in mixed_state(3), gates in prop::collection::vec(gate(3), 1..12)) {
        let mut s = rho;
        for g in &gates {
            s.apply_gate_mut(g).unwrap();
        }
        assert_valid(&s);
    }

    #[test]
    fn maximally_mixed_is_a_depolarizing_fixed_point(p in 0.0f64..=1.0) {
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        let out = mixed.apply_channel(&make_depolarizing(p).unwrap(), &[0]).unwrap();
        prop_assert!(out.matrix().max_abs_diff(mixed.matrix()) <= 1e-10);
    }

    #[test]
    fn pauli_reduces_to_flips(p in 0.0f64..=1.0) {
        let same = |a: &KrausChannel, b: &KrausChannel| {
            a.operators().len() == b.operators().len()
                && a.operators().iter().zip(b.operators()).all(|(x, y)| x.max_abs_diff(y) <= 1e-12)
        };
        prop_assert!(same(&make_pauli(p, 0.0, 0.0).unwrap(), &make_bit_flip(p).unwrap()));
        prop_assert!(same(&make_pauli(0.0, 0.0, p).unwrap(), &make_phase_flip(p).unwrap()));
    }

    #[test]
    fn bit_flip_scales_z(p in 0.0f64..=1.0) {
        let out = DensityMatrix::zero_state(1).unwrap().apply_channel(&make_bit_flip(p).unwrap(), &[0]).unwrap();
        prop_assert!((out.expectation(&Observable::z(1, 0)).unwrap() - (1.0 - 2.0 * p)).abs() <= 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in mixed_state(2), b in mixed_state(2)) {
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&f));
        prop_assert!((f - fidelity(&b, &a).unwrap()).abs() <= 1e-6);
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn pauli_point_matches_closed_form() {
    let out = DensityMatrix::zero_state(1)
        .unwrap()
        .apply_channel(&make_pauli(0.1, 0.1, 0.1).unwrap(), &[0])
        .unwrap();
    assert!((out.expectation(&Observable::z(1, 0)).unwrap() - 0.6).abs() < 1e-12);
}

#[test]
fn sampling_a_coin_stays_within_three_sigma() {
    let counts = DensityMatrix::maximally_mixed(1)
        .unwrap()
        .sample_counts(100_000, 5)
        .unwrap();
    let sigma = (100_000.0f64 * 0.25).sqrt();
    for key in ["0", "1"] {
        assert!(
            (counts[key] as f64 - 50_000.0).abs() <= 3.0 * sigma,
            "{counts:?}"
        );
    }
    assert_eq!(
        counts,
        DensityMatrix::maximally_mixed(1)
            .unwrap()
            .sample_counts(100_000, 5)
            .unwrap()
    );
}

#[test]
fn pure_versus_mixed_fidelity_is_one_half() {
    let f = fidelity(
        &DensityMatrix::zero_state(1).unwrap(),
        &DensityMatrix::maximally_mixed(1).unwrap(),
    )
    .unwrap();
    assert!((f - 0.5).abs() < 1e-10);
}

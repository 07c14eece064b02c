use num_complex::Complex64;
use proptest::prelude::*;
use rbdrift::clifford::{recovery_gate, sequence_product, Clifford, CliffordGroup, Direction};
use rbdrift::noise::noisy_clifford;
use rbdrift::ptm::ChannelPtm;
use rbdrift::twirl::{avg_gate_fidelity, twirl, twirl_channel};
use rbdrift::{PulseKind, QubitConfig, Unitary2};

#[test]
fn group_axioms_hold_exhaustively() {
    let g = CliffordGroup::global();
    assert_eq!(g.elements().len(), 24);
    for a in Clifford::all() {
        assert_eq!(a.compose(Clifford::IDENTITY), a);
        assert_eq!(Clifford::IDENTITY.compose(a), a);
        assert_eq!(a.compose(a.inverse()), Clifford::IDENTITY);
        for b in Clifford::all() {
            let ab = a.compose(b);
            assert!(ab.unitary().approx_eq_up_to_phase(&(a.unitary() * b.unitary()), 1e-10));
            for c in Clifford::all() {
                assert_eq!(ab.compose(c), a.compose(b.compose(c)));
            }
        }
    }
}

#[test]
fn elements_are_distinct_unitary_and_match_pulses() {
    let els = CliffordGroup::global().elements();
    for (i, e) in els.iter().enumerate() {
        assert!(e.unitary.unitarity_error() < 1e-12);
        assert!((e.unitary.det().norm() - 1.0).abs() < 1e-12);
        let product = e
            .pulses
            .iter()
            .fold(Unitary2::IDENTITY, |acc, p| p.kind.unitary(0.0) * acc);
        assert!(product.approx_eq_up_to_phase(&e.unitary, 1e-10), "element {i}");
        for other in &els[i + 1..] {
            assert!(!e.unitary.approx_eq_up_to_phase(&other.unitary, 1e-6));
        }
    }
    assert_eq!(els[0].pulses.len(), 1);
    assert_eq!(els[0].pulses[0].kind, PulseKind::IdentityWait);
}

#[test]
fn pulse_counts_are_minimal_by_exhaustive_search() {
    // all products of up to three generators, identity wait excluded
    let gens: Vec<Unitary2> = PulseKind::GENERATORS.iter().map(|k| k.unitary(0.0)).collect();
    let mut best = [usize::MAX; 24];
    best[0] = 1;
    let g = CliffordGroup::global();
    let mut frontier = vec![(Unitary2::IDENTITY, 0usize)];
    for depth in 1..=3 {
        let mut next = Vec::new();
        for (u, _) in &frontier {
            for gen in &gens {
                let v = *gen * *u;
                let c = g.lookup(&v).unwrap();
                best[c.index()] = best[c.index()].min(depth);
                next.push((v, depth));
            }
        }
        frontier = next;
    }
    for c in Clifford::all().skip(1) {
        assert_eq!(c.pulses().len(), best[c.index()], "element {}", c.index());
    }
    let mean = best.iter().sum::<usize>() as f64 / 24.0;
    assert_eq!(mean, 1.875);
    assert_eq!(g.mean_pulse_count(), 1.875);
}

fn rot(axis: [f64; 3], angle: f64) -> Unitary2 {
    let n = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
    Unitary2::rotation(axis.map(|v| v / n), angle)
}

fn ideal_final_state(seq: &[Clifford]) -> [Complex64; 2] {
    let u = seq
        .iter()
        .fold(Unitary2::IDENTITY, |acc, c| c.unitary() * acc);
    [u.entry(0, 0), u.entry(1, 0)]
}

proptest! {
    #[test]
    fn recovery_returns_to_target(indices in prop::collection::vec(0usize..24, 0..40), up in any::<bool>()) {
        let mut seq: Vec<Clifford> = indices.iter().map(|&i| Clifford::from_index(i).unwrap()).collect();
        let dir = if up { Direction::Up } else { Direction::Down };
        seq.push(recovery_gate(&seq, dir));
        let [a, b] = ideal_final_state(&seq);
        let (p_up, p_down) = (a.norm_sqr(), b.norm_sqr());
        match dir {
            Direction::Up => prop_assert!((p_up - 1.0).abs() < 1e-10),
            Direction::Down => prop_assert!((p_down - 1.0).abs() < 1e-10),
        }
        let net = sequence_product(&seq);
        prop_assert_eq!(net == Clifford::IDENTITY, up);
    }

    #[test]
    fn clifford_conjugation_preserves_fidelity(c in 0usize..24, angle in 0.0f64..6.3, ax in -1.0f64..1.0, ay in -1.0f64..1.0) {
        let u = rot([ax, ay, 0.5], angle);
        let ch = ChannelPtm::from_unitary(&u);
        let r = ChannelPtm::from_unitary(&Clifford::from_index(c).unwrap().unitary());
        let conj = r * ch * r.transpose();
        prop_assert!((avg_gate_fidelity(&conj) - avg_gate_fidelity(&ch)).abs() < 1e-12);
    }

    #[test]
    fn twirl_is_linear(w in 0.0f64..1.0, g1 in 0.0f64..1.0, a1 in 0.0f64..6.3, a2 in 0.0f64..6.3) {
        let c1 = ChannelPtm::amplitude_damping(g1) * ChannelPtm::from_unitary(&rot([1.0, 0.2, 0.0], a1));
        let c2 = ChannelPtm::from_unitary(&rot([0.0, 0.3, 1.0], a2));
        let mix = ChannelPtm::mixture(&[(w, c1), (1.0 - w, c2)]);
        let lhs = twirl(&mix).unwrap();
        let rhs = w * twirl(&c1).unwrap() + (1.0 - w) * twirl(&c2).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn detuned_clifford_infidelity_is_quadratic(c in 0usize..24, delta in 1e-5f64..5e-4) {
        let cfg = QubitConfig::default();
        let c = Clifford::from_index(c).unwrap();
        let infid = |d: f64| {
            let err = c.unitary().dagger() * noisy_clifford(c, d, &cfg);
            1.0 - avg_gate_fidelity(&ChannelPtm::from_unitary(&err))
        };
        // halving δ quarters the infidelity up to higher-order terms
        let ratio = infid(delta) / infid(delta / 2.0);
        prop_assert!((ratio - 4.0).abs() < 0.01, "ratio {}", ratio);
    }
}

#[test]
fn twirl_of_depolarizing_and_z() {
    for p in [-1.0 / 3.0, 0.0, 0.5, 1.0] {
        assert!((twirl(&ChannelPtm::depolarizing(p)).unwrap() - p).abs() < 1e-10);
    }
    let z = ChannelPtm::from_unitary(&Unitary2::PAULI_Z);
    assert!((twirl(&z).unwrap() + 1.0 / 3.0).abs() < 1e-10);
}

#[test]
fn twirl_preserves_average_fidelity_of_nonunital_channel() {
    let ch = ChannelPtm::amplitude_damping(0.3)
        * ChannelPtm::from_unitary(&rot([0.3, -0.4, 0.8], 0.7));
    let t = twirl_channel(&ch);
    assert!((avg_gate_fidelity(&t) - avg_gate_fidelity(&ch)).abs() < 1e-12);
    let p = twirl(&ch).unwrap();
    assert!((avg_gate_fidelity(&t) - (p + (1.0 - p) / 2.0)).abs() < 1e-12);
}

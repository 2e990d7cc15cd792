//! Cross-module invariants: syndrome parity, complement symmetry, defect
//! motion, linear-erasure guarantees on randomized defect sets, charge
//! conservation under noise, and the Monte-Carlo versus exhaustive-oracle
//! agreement at tiny sizes.

use proptest::prelude::*;
use repdec_core::lattice::{defects_from_error, DecoderState, EdgeBits};
use repdec_core::montecarlo::{
    run_trajectory, wilson_interval, Decoder, PointAccumulator,
};
use repdec_core::noise::{trajectory_rng, PhenomenologicalParams};
use repdec_core::oracles::{
    erasure_run, exact_phenomenological_flip, random_defect_set, ErasureChecks,
};
use repdec_core::signal::SignalRuleParams;

proptest! {
    #[test]
    fn syndrome_has_even_weight_and_complement_symmetry(
        n in 2usize..64,
        bits in any::<u64>(),
    ) {
        let mut e = EdgeBits::zeros(n);
        for i in 0..n {
            if bits >> (i % 64) & 1 == 1 {
                e.set(i, true);
            }
        }
        let d = defects_from_error(&e);
        prop_assert_eq!(d.len() % 2, 0);
        prop_assert_eq!(d, defects_from_error(&e.complement()));
    }

    #[test]
    fn shearing_permutations_preserve_weight(
        half in 2usize..32,
        bits in any::<u64>(),
        periodic in any::<bool>(),
    ) {
        use repdec_core::cellular::{Diagonal, ShearingParams, TwoRowLattice};
        let params = ShearingParams { periodic, ..Default::default() };
        let mut lat = TwoRowLattice::new(2 * half, params).unwrap();
        for i in 0..(2 * half).min(64) {
            if bits >> i & 1 == 1 {
                lat.set(i % 2, i / 2, true);
            }
        }
        let w = lat.weight();
        for diag in [Diagonal::Left, Diagonal::Right] {
            lat.permutation_step(diag, None);
            prop_assert_eq!(lat.weight(), w);
        }
    }
}

#[test]
fn linear_erasure_on_randomized_defect_sets() {
    let params = SignalRuleParams::asymmetric();
    let mut rng = trajectory_rng(2024, 7, 0);
    for case in 0..300 {
        let sigma = random_defect_set(4, 50, &mut rng);
        if sigma.is_empty() {
            continue;
        }
        let run = erasure_run(&sigma, &params, &ErasureChecks::multi_cluster()).unwrap();
        assert!(run.clean(), "case {case} on {:?}: {:?}", sigma, run.certificate);
        let width = sigma.width().max(1) as u32;
        assert!(run.certificate.t_zero.unwrap() <= 77 * width);
    }
}

#[test]
fn defects_never_move_right_and_at_most_one_left() {
    let params = SignalRuleParams::asymmetric();
    let mut rng = trajectory_rng(99, 8, 0);
    for _ in 0..50 {
        let sigma = random_defect_set(4, 40, &mut rng);
        if sigma.is_empty() {
            continue;
        }
        let mut state = DecoderState::erasure_window(&sigma, 1).unwrap();
        let mut prev = state.defects(0);
        for _ in 0..(77 * sigma.width().max(1)) {
            let mask = state.step(&params, None).unwrap();
            state.apply_correction(&mask);
            let cur = state.defects(0);
            for &s in cur.sites() {
                assert!(
                    prev.sites().contains(&s) || prev.sites().contains(&(s + 1)),
                    "defect appeared at {s} without a source at {s} or {}",
                    s + 1
                );
            }
            if cur.is_empty() {
                break;
            }
            prev = cur;
        }
    }
}

#[test]
fn charge_conserved_per_direction_under_phenomenological_noise() {
    use repdec_core::lattice::Topology;
    use repdec_core::noise::{flip_bits, noisy_syndrome};
    let params = SignalRuleParams::symmetric();
    let noise = PhenomenologicalParams::symmetric(0.08).unwrap();
    let top = Topology::Ring { n: 24 };
    let mut state = params.state(top);
    let mut rng = trajectory_rng(5, 6, 7);
    for _ in 0..300 {
        flip_bits(state.data_mut(), noise.eps_d, &mut rng);
        let synd = noisy_syndrome(state.data(), &top, noise.eps_m, &mut rng);
        let mask = state.step(&params, Some(&synd)).unwrap();
        state.apply_correction(&mask);
        assert_eq!(state.total_charge(0), 0);
        assert_eq!(state.total_charge(1), 0);
        assert!(state.max_stack_seen() as usize <= 2 * 24);
    }
}

#[test]
fn monte_carlo_agrees_with_exact_enumeration_at_tiny_size() {
    // Phenomenological flip probability on a 4-ring against the exact sum
    // over all noise realizations, for both signal rules. The two routes
    // apply noise through different code paths.
    for (params, tau, eps, trials) in [
        (SignalRuleParams::asymmetric(), 3u32, 0.12, 200_000u64),
        (SignalRuleParams::symmetric(), 2, 0.15, 150_000),
    ] {
        let noise = PhenomenologicalParams::symmetric(eps).unwrap();
        let exact = exact_phenomenological_flip(&params, 4, &noise, tau).unwrap();
        let decoder = Decoder::Signal { params, n: 4 };
        let mut acc = PointAccumulator::new(tau);
        for traj in 0..trials {
            let mut rng = trajectory_rng(31, 77, traj);
            run_trajectory(&decoder, &noise, &mut rng, &mut acc, false).unwrap();
        }
        let (lo, hi) = wilson_interval(acc.flips_final, acc.trials, 1.96);
        assert!(
            (lo..=hi).contains(&exact),
            "symmetric={}: exact {exact} outside Monte-Carlo interval [{lo}, {hi}]",
            params.symmetric
        );
    }
}

mod common;

use ca_decoders::harness::{run_batch, DecoderKind, ExperimentSpec, NoiseModel, NoiseParams, ShotsPolicy};
use ca_decoders::markov::{chernoff_bounds, reduced_matrix};
use ca_decoders::oracles::{ml_pl_repetition, MatchingOracle};
use ca_decoders::{Direction, RepetitionState, Scala1D, Scala2D, ToricState};
use common::*;
use proptest::prelude::*;
use proptest::test_runner::Config;

fn toric(d: usize, h: &[u64], v: &[u64]) -> ToricState {
    let mask = (1u64 << d) - 1;
    ToricState::from_rows(d, h.iter().map(|x| x & mask).collect(), v.iter().map(|x| x & mask).collect()).unwrap()
}

fn arb_toric() -> impl Strategy<Value = ToricState> {
    (3usize..=9).prop_flat_map(|d| {
        (prop::collection::vec(any::<u64>(), d), prop::collection::vec(any::<u64>(), d)).prop_map(move |(h, v)| toric(d, &h, &v))
    })
}

fn shifted(st: &ToricState, dr: usize, dc: usize) -> ToricState {
    let d = st.d();
    let mut out = ToricState::new(d).unwrap();
    for r in 0..d {
        for c in 0..d {
            if st.h(r, c) {
                out.flip_h((r + dr) % d, (c + dc) % d);
            }
            if st.v(r, c) {
                out.flip_v((r + dr) % d, (c + dc) % d);
            }
        }
    }
    out
}

fn defect_set() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (3usize..=9, 1usize..=4).prop_flat_map(|(d, half)| {
        prop::collection::btree_set((0..d, 0..d), 2 * half..=2 * half).prop_map(move |s| (d, s.into_iter().collect()))
    })
}

proptest! {
    #![proptest_config(Config::with_cases(256))]

    #[test]
    fn toric_syndrome_is_linear_and_even(a in arb_toric(), seed in any::<u64>()) {
        let d = a.d();
        let h: Vec<u64> = (0..d as u64).map(|i| seed.rotate_left(i as u32 * 7)).collect();
        let b = toric(d, &h, &h.iter().rev().copied().collect::<Vec<_>>());
        let mut ab = a.clone();
        ab.xor(&b);
        let (sa, sb, sab) = (a.syndrome(), b.syndrome(), ab.syndrome());
        for r in 0..d {
            prop_assert_eq!(sab.rows[r], sa.rows[r] ^ sb.rows[r]);
        }
        prop_assert_eq!(sa.count() % 2, 0);
    }

    #[test]
    fn homology_counts_logicals_modulo_stabilizers(
        d in 3usize..=9,
        plaquettes in prop::collection::vec((0usize..9, 0usize..9), 0..40),
        rows in prop::collection::vec(0usize..9, 0..4),
        cols in prop::collection::vec(0usize..9, 0..4),
    ) {
        let mut st = ToricState::new(d).unwrap();
        for &(r, c) in &plaquettes {
            st.apply_stabilizer(r % d, c % d);
            prop_assert!(st.syndrome().is_empty());
        }
        prop_assert!(!st.homology_parity(Direction::Horizontal).unwrap());
        prop_assert!(!st.homology_parity(Direction::Vertical).unwrap());
        for &r in &rows {
            st.apply_horizontal_logical(r % d);
        }
        for &c in &cols {
            st.apply_vertical_logical(c % d);
        }
        prop_assert!(st.syndrome().is_empty());
        prop_assert_eq!(st.homology_parity(Direction::Horizontal).unwrap(), rows.len() % 2 == 1);
        prop_assert_eq!(st.homology_parity(Direction::Vertical).unwrap(), cols.len() % 2 == 1);
    }

    #[test]
    fn repetition_complement_shares_syndrome(half in 1usize..=63, bits in any::<u128>()) {
        let d = 2 * half + 1;
        let mask = (1u128 << d) - 1;
        let a = RepetitionState::from_bits(d, bits & mask).unwrap();
        let b = RepetitionState::from_bits(d, !bits & mask).unwrap();
        prop_assert_eq!(a.syndrome(), b.syndrome());
        prop_assert_eq!(a.syndrome().count() % 2, 0);
        prop_assert_ne!(a.logical_failure(), b.logical_failure());
    }

    #[test]
    fn matching_equals_brute_force((d, defects) in defect_set()) {
        let oracle = MatchingOracle::new(d);
        let (m, corr) = oracle.correction(&defects).unwrap();
        prop_assert_eq!(m.weight, brute_force_matching(&defects, d));
        prop_assert_eq!(corr.weight(), m.weight);
        let mut found = corr.syndrome().defects();
        found.sort();
        prop_assert_eq!(found, defects);
    }

    #[test]
    fn scala2d_commutes_with_translation(a in arb_toric(), dr in 0usize..9, dc in 0usize..9) {
        let d = a.d();
        let (dr, dc) = (dr % d, dc % d);
        let direct = shifted(&Scala2D::run_code_capacity(&a), dr, dc);
        let moved = Scala2D::run_code_capacity(&shifted(&a, dr, dc));
        prop_assert_eq!(direct, moved);
    }

    #[test]
    fn scala1d_commutes_with_rotation(half in 1usize..=15, bits in any::<u32>(), k in 0usize..31) {
        let d = 2 * half + 1;
        let mask = (1u128 << d) - 1;
        let e = bits as u128 & mask;
        let k = k % d;
        let rot = |x: u128| ((x << k) | (x >> (d - k))) & mask;
        let a = Scala1D::run_code_capacity(&RepetitionState::from_bits(d, e).unwrap());
        let b = Scala1D::run_code_capacity(&RepetitionState::from_bits(d, rot(e)).unwrap());
        prop_assert_eq!(rot(a.0.bits()), b.0.bits());
        prop_assert_eq!(a.1, b.1);
    }
}

proptest! {
    #![proptest_config(Config::with_cases(24))]

    #[test]
    fn reduced_chain_matches_full_chain(n in 1usize..=10, p in 0.001f64..0.999) {
        let full = ca_decoders::markov::tensor_chain(n, p);
        let agg = aggregate_by_weight(&full, n);
        let red = reduced_matrix(n, p).unwrap().matrix;
        for k in 0..=n {
            let s: f64 = red.row(k).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            for l in 0..=n {
                let scale = agg[(k, l)].abs().max(1e-300);
                prop_assert!((red[(k, l)] - agg[(k, l)]).abs() / scale <= 1e-10, "n={} k={} l={}", n, k, l);
            }
        }
    }

    #[test]
    fn reduced_hitting_time_matches_full(n in 1usize..=7, p in 0.02f64..0.5) {
        let red = reduced_matrix(n, p).unwrap().majority_absorbing().unwrap().hitting_time().unwrap();
        let full = full_hitting_time(n, p);
        prop_assert!((red - full).abs() / full < 1e-9, "n={} red={} full={}", n, red, full);
    }

    #[test]
    fn chernoff_brackets_exact_tail(window in prop::sample::select(vec![10u64, 20, 50, 100]), pi in 1u32..=50) {
        let p = pi as f64 / 100.0;
        let f_c = 0.9;
        let k = (f_c * window as f64).ceil() as u64;
        let exact = to_f64(&exact_upper_tail(window, k, p));
        let b = chernoff_bounds(window, f_c, p).unwrap();
        prop_assert!(b.lower <= exact && exact <= b.upper, "U={} p={} {} <= {} <= {}", window, p, b.lower, exact, b.upper);
    }

    #[test]
    fn ml_curve_matches_exact_tail(half in 1u64..=20, pi in 1u32..=99) {
        let d = 2 * half + 1;
        let p = pi as f64 / 100.0;
        let exact = to_f64(&exact_upper_tail(d, half + 1, p));
        let got = ml_pl_repetition(p, d as usize).unwrap();
        prop_assert!((got - exact).abs() <= 1e-12 * exact.max(1e-300) + 1e-15);
    }

    #[test]
    fn batches_are_deterministic_and_splittable(seed in any::<u64>(), split in 1u64..200, which in 0usize..4) {
        let decoder = DecoderKind::ALL[which];
        let d = if decoder.is_hierarchical() { 9 } else { 5 };
        let spec = ExperimentSpec::new(decoder, d, NoiseModel::Phenomenological, NoiseParams { p: 0.02, q: 0.02, ..Default::default() }, seed)
            .with_shots(ShotsPolicy::Fixed(200));
        let whole = run_batch(&spec, 0..200).unwrap();
        prop_assert_eq!(whole, run_batch(&spec, 0..200).unwrap());
        let parts = run_batch(&spec, 0..split).unwrap().merge(run_batch(&spec, split..200).unwrap());
        prop_assert_eq!(whole, parts);
    }
}

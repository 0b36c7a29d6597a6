use ca_decoders::harrington::{Harrington1D, Harrington2D};
use ca_decoders::oracles::MatchingOracle;
use ca_decoders::{RepetitionState, ToricState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Majority of block majorities, with blocks aligned to start at the top-level representatives.
fn concat_majority(d: usize, errors: u128) -> bool {
    let offset = (d / 3 - 1) / 2;
    let mut bits: Vec<bool> = (0..d).map(|i| (errors >> ((i + offset) % d)) & 1 == 1).collect();
    while bits.len() > 1 {
        bits = bits.chunks(3).map(|b| b.iter().filter(|&&x| x).count() >= 2).collect();
    }
    bits[0]
}

fn check(d: usize, errors: u128) {
    let cap = Harrington1D::default_step_cap(d).unwrap();
    let init = RepetitionState::from_bits(d, errors).unwrap();
    let (fin, _, censored) = Harrington1D::run_code_capacity(&init, cap).unwrap();
    assert!(!censored);
    let full = (1u128 << d) - 1;
    assert!(fin.bits() == 0 || fin.bits() == full, "{errors:b} left {:b}", fin.bits());
    assert_eq!(fin.bits() == full, concat_majority(d, errors), "{errors:b}");
}

#[test]
fn exhaustive_d3_and_d9() {
    for d in [3usize, 9] {
        for e in 0..(1u128 << d) {
            check(d, e);
        }
    }
}

#[test]
fn sampled_d27() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for _ in 0..1500 {
        let p = rng.random_range(0.05..0.45);
        let e = (0..27).filter(|_| rng.random::<f64>() < p).fold(0u128, |a, i| a | 1 << i);
        check(27, e);
    }
}

#[test]
fn d3_toric_terminates_exhaustively() {
    let m = MatchingOracle::new(3);
    let mut failures = 0;
    for bits in 0u32..(1 << 18) {
        let mut st = ToricState::new(3).unwrap();
        for i in 0..9 {
            if bits >> i & 1 == 1 {
                st.flip_h(i / 3, i % 3);
            }
            if bits >> (i + 9) & 1 == 1 {
                st.flip_v(i / 3, i % 3);
            }
        }
        let (fin, steps, censored) = Harrington2D::run_code_capacity(&st, 1000).unwrap();
        assert!(!censored && steps <= 10, "{bits:b}");
        failures += m.logical_failure(&fin).unwrap() as u32;
        if bits.count_ones() <= 1 {
            assert!(fin.is_zero(), "{bits:b}");
        }
    }
    assert!(failures > 0);
}

//! Verification suites: exhaustive and oracle comparisons, printed as a summary table.

use std::collections::BTreeSet;

use ca_decoders::harrington::Harrington1D;
use ca_decoders::markov::{reduced_matrix, tensor_chain};
use ca_decoders::oracles::{brute_force_matching_weight, concat_majority_class, MatchingOracle};
use ca_decoders::scala::{WRAPAROUND_D7, WRAPAROUND_D7_RESET};
use ca_decoders::{RepetitionState, ResetSchedule, Scala1D};
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Scala1dMlEquivalence,
    MatchingBruteForce,
    MarkovReduction,
    BlockMajority,
    D7Wraparound,
}

const ALL: [Suite; 5] = [
    Suite::Scala1dMlEquivalence,
    Suite::MatchingBruteForce,
    Suite::MarkovReduction,
    Suite::BlockMajority,
    Suite::D7Wraparound,
];

const REDUCTION_TOL: f64 = 1e-10;

struct Report {
    cases: u64,
    /// Smallest failing case found, if any.
    failure: Option<String>,
    detail: String,
    trace: Vec<String>,
}

impl Report {
    fn pass(cases: u64, detail: String) -> Self {
        Report { cases, failure: None, detail, trace: vec![] }
    }

    fn fail(cases: u64, msg: String) -> Self {
        Report { cases, failure: Some(msg.clone()), detail: msg, trace: vec![] }
    }
}

pub fn run(suites: &[Suite], max_distance: usize, max_n: usize, cases: usize, seed: u64) -> Result<(), CliError> {
    if !(3..=25).contains(&max_distance) {
        return Err(CliError::Usage("--max-distance must lie in 3..=25".into()));
    }
    if !(1..=12).contains(&max_n) {
        return Err(CliError::Usage("--max-n must lie in 1..=12".into()));
    }
    let suites = if suites.is_empty() { &ALL[..] } else { suites };
    println!("{:<24} {:<6} {:>10}  detail", "suite", "status", "cases");
    let mut first_failure = None;
    for &s in suites {
        let r = match s {
            Suite::Scala1dMlEquivalence => scala1d_ml(max_distance),
            Suite::MatchingBruteForce => matching(cases, seed),
            Suite::MarkovReduction => markov(max_n),
            Suite::BlockMajority => block_majority(),
            Suite::D7Wraparound => wraparound(),
        };
        let name = s.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
        let status = if r.failure.is_none() { "PASS" } else { "FAIL" };
        println!("{name:<24} {status:<6} {:>10}  {}", r.cases, r.detail);
        for line in &r.trace {
            println!("    {line}");
        }
        if let (Some(f), None) = (&r.failure, &first_failure) {
            first_failure = Some(format!("{name}: {f}"));
        }
    }
    match first_failure {
        None => Ok(()),
        Some(f) => Err(CliError::Runtime(format!("first failing case: {f}"))),
    }
}

/// Keeps the lighter of two failing cases.
fn lighter(slot: &mut Option<(u32, String)>, weight: u32, msg: String) {
    if slot.as_ref().is_none_or(|(w, _)| weight < *w) {
        *slot = Some((weight, msg));
    }
}

fn scala1d_ml(max_d: usize) -> Report {
    let mut cases = 0;
    for d in (3..=max_d).step_by(2) {
        let mut worst = None;
        for e in 0..(1u128 << d) {
            let init = RepetitionState::from_bits(d, e).expect("valid distance");
            let (fin, _) = Scala1D::run_code_capacity(&init);
            let want = if init.weight() > d / 2 { (1u128 << d) - 1 } else { 0 };
            cases += 1;
            if fin.bits() != want {
                lighter(&mut worst, e.count_ones(), format!("d={d} errors {e:0d$b} decoded to {:0d$b}", fin.bits()));
            }
        }
        if let Some((_, msg)) = worst {
            return Report::fail(cases, msg);
        }
    }
    Report::pass(cases, format!("majority class for every odd d <= {max_d}"))
}

fn matching(cases: usize, seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = None;
    for _ in 0..cases {
        let d = rng.random_range(3..=9usize);
        let half = rng.random_range(1..=4usize);
        let mut set = BTreeSet::new();
        while set.len() < 2 * half {
            set.insert((rng.random_range(0..d), rng.random_range(0..d)));
        }
        let defects: Vec<_> = set.into_iter().collect();
        let got = MatchingOracle::new(d).match_defects(&defects).map(|m| m.weight);
        let want = brute_force_matching_weight(&defects, d);
        if got.as_ref().ok() != want.as_ref().ok() {
            lighter(&mut worst, defects.len() as u32, format!("d={d} {defects:?}: matcher {got:?}, brute force {want:?}"));
        }
    }
    match worst {
        Some((_, msg)) => Report::fail(cases as u64, msg),
        None => Report::pass(cases as u64, "minimum weights agree, d <= 9, <= 8 defects".into()),
    }
}

fn markov(max_n: usize) -> Report {
    let mut cases = 0;
    let mut worst = 0.0f64;
    for n in 1..=max_n {
        for p in [0.001, 0.01, 0.1, 0.3, 0.5] {
            let full = tensor_chain(n, p);
            let red = reduced_matrix(n, p).expect("valid chain").matrix;
            let mut agg = vec![vec![0.0; n + 1]; n + 1];
            for (i, row) in agg.iter_mut().enumerate() {
                // the all-ones prefix of weight i is a representative of its class
                let from = (1usize << i) - 1;
                for to in 0..1usize << n {
                    row[to.count_ones() as usize] += full[(from, to)];
                }
            }
            cases += 1;
            for k in 0..=n {
                for l in 0..=n {
                    let (a, b) = (agg[k][l], red[(k, l)]);
                    let err = if a != 0.0 { ((a - b) / a).abs() } else { b.abs() };
                    worst = worst.max(err);
                    if err > REDUCTION_TOL {
                        let msg = format!("n={n} p={p} entry ({k},{l}): reduced {b:e}, aggregated {a:e}");
                        return Report::fail(cases, msg);
                    }
                }
            }
        }
    }
    Report::pass(cases, format!("n <= {max_n}, max relative error {worst:.1e}"))
}

fn block_majority() -> Report {
    let mut cases = 0;
    for d in [3usize, 9] {
        let cap = Harrington1D::default_step_cap(d).expect("power of 3");
        let mut worst = None;
        for e in 0..(1u128 << d) {
            let init = RepetitionState::from_bits(d, e).expect("valid distance");
            let fin = Harrington1D::run_code_capacity(&init, cap);
            let want = concat_majority_class(d, e).expect("power of 3");
            cases += 1;
            let ok = matches!(&fin, Ok((s, _, false)) if s.bits() == if want { (1u128 << d) - 1 } else { 0 });
            if !ok {
                lighter(&mut worst, e.count_ones(), format!("d={d} errors {e:0d$b}: {fin:?}"));
            }
        }
        if let Some((_, msg)) = worst {
            return Report::fail(cases, msg);
        }
    }
    Report::pass(cases, "Harrington1D matches block majority for d = 3, 9".into())
}

fn wraparound() -> Report {
    let steps = match Scala1D::replay(7, ResetSchedule::Fixed(WRAPAROUND_D7_RESET), &WRAPAROUND_D7, 6) {
        Ok(s) => s,
        Err(e) => return Report::fail(0, e.to_string()),
    };
    let trace = steps
        .iter()
        .map(|s| format!("t={} injected {:07b} state {:07b} signals {}", s.t, s.injected, s.state.bits(), s.n_sigs))
        .collect();
    let weight: u32 = steps.iter().map(|s| s.injected.count_ones()).sum();
    let first = steps.iter().find(|s| s.state.logical_failure()).map(|s| s.t);
    let detail = format!("first logical failure at step {first:?}, injected weight {weight}");
    let pass = first == Some(3) && weight == 3;
    Report { cases: steps.len() as u64, failure: (!pass).then(|| detail.clone()), detail, trace }
}

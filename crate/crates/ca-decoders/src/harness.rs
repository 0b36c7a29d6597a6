//! Seeded Monte Carlo experiments: code-capacity logical error rates, noisy
//! lifetimes, adaptive shot allocation, reset-time search and power-law fits.
//!
//! Trial `i` of an experiment with seed `s` draws from the ChaCha8 stream `i`
//! of key `s`, so results do not depend on the worker count. Per step the
//! order is: data flips, measurement flips, decoder step (and scheduled
//! reset), signal flips, referee.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harrington::{HierConstants, Harrington1D, Harrington2D};
use crate::lattice::{RepetitionState, ToricState, MAX_REPETITION_DISTANCE, MAX_TORIC_DISTANCE};
use crate::oracles::{logical_failure_repetition, logical_failure_toric, MatchingOracle};
use crate::scala::{ResetSchedule, Scala1D, Scala2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Scala1d,
    Scala2d,
    Har1d,
    Har2d,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 4] = [DecoderKind::Scala1d, DecoderKind::Scala2d, DecoderKind::Har1d, DecoderKind::Har2d];

    pub fn id(self) -> &'static str {
        match self {
            DecoderKind::Scala1d => "scala1d",
            DecoderKind::Scala2d => "scala2d",
            DecoderKind::Har1d => "har1d",
            DecoderKind::Har2d => "har2d",
        }
    }

    pub fn is_1d(self) -> bool {
        matches!(self, DecoderKind::Scala1d | DecoderKind::Har1d)
    }

    pub fn is_hierarchical(self) -> bool {
        matches!(self, DecoderKind::Har1d | DecoderKind::Har2d)
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown decoder `{s}` (expected scala1d, scala2d, har1d or har2d)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    CodeCapacity,
    Phenomenological,
    Signal,
}

impl NoiseModel {
    pub fn id(self) -> &'static str {
        match self {
            NoiseModel::CodeCapacity => "code-capacity",
            NoiseModel::Phenomenological => "phenomenological",
            NoiseModel::Signal => "signal",
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for NoiseModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [NoiseModel::CodeCapacity, NoiseModel::Phenomenological, NoiseModel::Signal]
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown noise model `{s}`")))
    }
}

/// Per-step flip rates for data qubits, measurements and decoder signal bits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
    pub q: f64,
    pub p_sig: f64,
    pub p_cs: f64,
    pub p_fs: f64,
}

impl NoiseParams {
    pub fn data(p: f64) -> Self {
        NoiseParams { p, ..Default::default() }
    }

    fn rates(&self) -> [(&'static str, f64); 5] {
        [("p", self.p), ("q", self.q), ("p_sig", self.p_sig), ("p_cs", self.p_cs), ("p_fs", self.p_fs)]
    }

    fn signal_free(&self) -> bool {
        self.p_sig == 0.0 && self.p_cs == 0.0 && self.p_fs == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResetPolicy {
    Never,
    Fixed(usize),
    Ramp,
    /// Exhaustive search over `1..=max_period` maximising the mean lifetime.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShotsPolicy {
    Fixed(u64),
    Adaptive { target_rel_se: f64, n_min: u64, n_max: u64 },
}

impl ShotsPolicy {
    pub fn adaptive() -> Self {
        ShotsPolicy::Adaptive {
            target_rel_se: 0.05,
            n_min: 1_000,
            n_max: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub decoder: DecoderKind,
    pub d: usize,
    pub model: NoiseModel,
    pub noise: NoiseParams,
    pub reset: ResetPolicy,
    pub shots: ShotsPolicy,
    /// Lifetime cap; longer trials are censored.
    pub t_max: u64,
    pub seed: u64,
}

pub const DEFAULT_T_MAX: u64 = 10_000_000;
/// Largest censored fraction tolerated before a run is rejected.
pub const CENSOR_BUDGET: f64 = 1e-3;

impl ExperimentSpec {
    pub fn new(decoder: DecoderKind, d: usize, model: NoiseModel, noise: NoiseParams, seed: u64) -> Self {
        let reset = match decoder {
            DecoderKind::Scala1d if d >= 3 => ResetPolicy::Fixed(ResetSchedule::max_period_1d(d)),
            DecoderKind::Scala2d => ResetPolicy::Fixed(ResetSchedule::max_period_2d(d)),
            _ => ResetPolicy::Never,
        };
        ExperimentSpec {
            decoder,
            d,
            model,
            noise,
            reset,
            shots: ShotsPolicy::Fixed(1_000),
            t_max: DEFAULT_T_MAX,
            seed,
        }
    }

    pub fn with_shots(mut self, shots: ShotsPolicy) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_reset(mut self, reset: ResetPolicy) -> Self {
        self.reset = reset;
        self
    }

    pub fn with_t_max(mut self, t_max: u64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        match self.decoder {
            DecoderKind::Scala1d => {
                if d < 3 || d.is_multiple_of(2) || d > MAX_REPETITION_DISTANCE {
                    return Err(Error::InvalidDistance {
                        d,
                        reason: "repetition codes need an odd distance in 3..=127",
                    });
                }
            }
            DecoderKind::Scala2d => {
                if !(2..=MAX_TORIC_DISTANCE).contains(&d) {
                    return Err(Error::InvalidDistance {
                        d,
                        reason: "toric codes need a distance in 2..=64",
                    });
                }
            }
            DecoderKind::Har1d => {
                Harrington1D::new(d)?;
            }
            DecoderKind::Har2d => {
                HierConstants::for_distance(d)?;
                if d > 27 {
                    return Err(Error::InvalidDistance {
                        d,
                        reason: "the 2D hierarchical decoder supports d <= 27",
                    });
                }
            }
        }
        for (name, r) in self.noise.rates() {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidSpec(format!("rate {name} = {r} is outside [0, 1]")));
            }
        }
        match self.model {
            NoiseModel::CodeCapacity if self.noise.q != 0.0 || !self.noise.signal_free() => {
                return Err(Error::InvalidSpec("code-capacity noise takes only p".into()));
            }
            NoiseModel::Phenomenological if !self.noise.signal_free() => {
                return Err(Error::InvalidSpec("phenomenological noise takes only p and q".into()));
            }
            _ => {}
        }
        if self.decoder.is_hierarchical() && self.noise.p_sig != 0.0 {
            return Err(Error::InvalidSpec("hierarchical decoders take p_cs and p_fs, not p_sig".into()));
        }
        if !self.decoder.is_hierarchical() && (self.noise.p_cs != 0.0 || self.noise.p_fs != 0.0) {
            return Err(Error::InvalidSpec("SCALA decoders take p_sig, not p_cs or p_fs".into()));
        }
        if let ResetPolicy::Fixed(0) = self.reset {
            return Err(Error::InvalidSpec("reset period must be positive".into()));
        }
        if let ShotsPolicy::Adaptive { target_rel_se, n_min, n_max } = self.shots {
            if n_min == 0 || n_max < n_min || target_rel_se <= 0.0 {
                return Err(Error::InvalidSpec("adaptive policy needs 0 < n_min <= n_max and a positive target".into()));
            }
        }
        if self.t_max == 0 {
            return Err(Error::InvalidSpec("t_max must be positive".into()));
        }
        Ok(())
    }

    /// Candidate reset periods searched by [`ResetPolicy::Auto`].
    pub fn reset_candidates(&self) -> Vec<usize> {
        let max = if self.decoder.is_1d() {
            ResetSchedule::max_period_1d(self.d)
        } else {
            ResetSchedule::max_period_2d(self.d)
        };
        (1..=max.max(1)).collect()
    }

    fn schedule(&self) -> ResetSchedule {
        match self.reset {
            ResetPolicy::Never => ResetSchedule::Never,
            ResetPolicy::Fixed(t) => ResetSchedule::Fixed(t),
            ResetPolicy::Ramp => ResetSchedule::Ramp,
            ResetPolicy::Auto => ResetSchedule::Fixed(self.reset_candidates().last().copied().unwrap_or(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// `p_L` for code capacity, mean lifetime otherwise.
    pub estimate: f64,
    pub se: f64,
    pub shots: u64,
    pub failures: u64,
    pub censored: u64,
    pub t_r: Option<usize>,
    pub seed: u64,
    pub wall_ms: u64,
    /// Whether the adaptive relative-SE target was reached (always true for fixed budgets).
    pub target_met: bool,
}

impl RunResult {
    pub fn rel_se(&self) -> f64 {
        if self.estimate > 0.0 {
            self.se / self.estimate
        } else {
            f64::INFINITY
        }
    }
}

/// Exact integer sums over a batch of trials; merging is order independent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub shots: u64,
    pub failures: u64,
    pub censored: u64,
    pub sum_t: u128,
    pub sum_t2: u128,
}

impl Tally {
    pub fn merge(self, o: Tally) -> Tally {
        Tally {
            shots: self.shots + o.shots,
            failures: self.failures + o.failures,
            censored: self.censored + o.censored,
            sum_t: self.sum_t + o.sum_t,
            sum_t2: self.sum_t2 + o.sum_t2,
        }
    }

    fn rate(&self) -> (f64, f64) {
        let n = self.shots as f64;
        let p = self.failures as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }

    fn mean(&self) -> (f64, f64) {
        let n = self.shots as f64;
        let mean = self.sum_t as f64 / n;
        if self.shots < 2 {
            return (mean, f64::INFINITY);
        }
        let var = ((self.sum_t2 as f64 - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

fn trial_rng(seed: u64, idx: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx);
    rng
}

/// Calls `hit` for every index in `0..n` selected independently with probability `p`.
pub fn bernoulli_hits<R: Rng>(rng: &mut R, n: usize, p: f64, mut hit: impl FnMut(usize)) {
    if p <= 0.0 || n == 0 {
        return;
    }
    if p >= 1.0 {
        (0..n).for_each(hit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut pos = 0usize;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if skip >= (n - pos) as f64 {
            return;
        }
        pos += skip as usize;
        hit(pos);
        pos += 1;
        if pos >= n {
            return;
        }
    }
}

fn mask128<R: Rng>(rng: &mut R, n: usize, p: f64) -> u128 {
    let mut m = 0;
    bernoulli_hits(rng, n, p, |i| m |= 1 << i);
    m
}

fn flip_rows<R: Rng>(rng: &mut R, rows: &mut [u64], d: usize, p: f64) {
    bernoulli_hits(rng, rows.len() * d, p, |i| rows[i / d] ^= 1 << (i % d));
}

fn random_toric<R: Rng>(rng: &mut R, d: usize, p: f64) -> ToricState {
    let mut st = ToricState::new(d).expect("validated distance");
    inject_toric(rng, &mut st, p);
    st
}

fn inject_toric<R: Rng>(rng: &mut R, st: &mut ToricState, p: f64) {
    let d = st.d();
    bernoulli_hits(rng, 2 * d * d, p, |i| {
        let (r, c) = ((i % (d * d)) / d, i % d);
        if i < d * d {
            st.flip_h(r, c)
        } else {
            st.flip_v(r, c)
        }
    });
}

/// Outcome of one trial: the failure flag or lifetime, and whether the step cap was hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trial {
    pub failed: bool,
    pub steps: u64,
    pub censored: bool,
}

impl From<Trial> for Tally {
    fn from(t: Trial) -> Tally {
        Tally {
            shots: 1,
            failures: t.failed as u64,
            censored: t.censored as u64,
            sum_t: t.steps as u128,
            sum_t2: (t.steps as u128) * (t.steps as u128),
        }
    }
}

/// Runs one code-capacity trial with index `idx`.
pub fn code_capacity_trial(spec: &ExperimentSpec, idx: u64) -> Result<Trial> {
    let mut rng = trial_rng(spec.seed, idx);
    let d = spec.d;
    let p = spec.noise.p;
    let (failed, steps, censored) = match spec.decoder {
        DecoderKind::Scala1d => {
            let init = RepetitionState::from_bits(d, mask128(&mut rng, d, p))?;
            let (fin, _) = Scala1D::run_code_capacity(&init);
            (logical_failure_repetition(&fin), (d - 2) as u64, false)
        }
        DecoderKind::Har1d => {
            let init = RepetitionState::from_bits(d, mask128(&mut rng, d, p))?;
            let (fin, steps, cens) = Harrington1D::run_code_capacity(&init, Harrington1D::default_step_cap(d)?)?;
            (logical_failure_repetition(&fin), steps, cens)
        }
        DecoderKind::Scala2d => {
            let init = random_toric(&mut rng, d, p);
            let fin = Scala2D::run_code_capacity(&init);
            (logical_failure_toric(&fin, &MatchingOracle::new(d))?, 0, false)
        }
        DecoderKind::Har2d => {
            let init = random_toric(&mut rng, d, p);
            let (fin, steps, cens) = Harrington2D::run_code_capacity(&init, Harrington1D::default_step_cap(d)?)?;
            (logical_failure_toric(&fin, &MatchingOracle::new(d))?, steps, cens)
        }
    };
    Ok(Trial { failed, steps, censored })
}

/// Runs one lifetime trial with index `idx`; `steps` is the step of the first logical failure.
pub fn lifetime_trial(spec: &ExperimentSpec, idx: u64) -> Result<Trial> {
    let mut rng = trial_rng(spec.seed, idx);
    if spec.decoder.is_1d() {
        lifetime_1d(spec, &mut rng)
    } else {
        lifetime_2d(spec, &mut rng)
    }
}

fn lifetime_1d(spec: &ExperimentSpec, rng: &mut ChaCha8Rng) -> Result<Trial> {
    let d = spec.d;
    let n = spec.noise;
    let schedule = spec.schedule();
    let mut state = RepetitionState::new(d)?;
    let mut scala = (spec.decoder == DecoderKind::Scala1d).then(|| Scala1D::new(d));
    let mut har = match spec.decoder {
        DecoderKind::Har1d => Some(Harrington1D::new(d)?),
        _ => None,
    };
    for t in 1..=spec.t_max {
        state.apply(mask128(rng, d, n.p));
        let mut s = state.syndrome();
        s.bits ^= mask128(rng, d, n.q);
        if let Some(ca) = scala.as_mut() {
            ca.step(&s, &mut state);
            if schedule.resets_after(t as usize, d) {
                ca.reset();
            }
            if n.p_sig > 0.0 {
                let l = mask128(rng, d, n.p_sig);
                let r = mask128(rng, d, n.p_sig);
                ca.flip_signals(l, r);
            }
        } else if let Some(ca) = har.as_mut() {
            ca.step(&s, &mut state);
            if n.p_cs > 0.0 {
                for (l, r) in ca.count_signals_mut() {
                    *l ^= mask128(rng, d, n.p_cs);
                    *r ^= mask128(rng, d, n.p_cs);
                }
            }
            if n.p_fs > 0.0 {
                for (l, r) in ca.flip_signals_mut() {
                    *l ^= mask128(rng, d, n.p_fs);
                    *r ^= mask128(rng, d, n.p_fs);
                }
            }
        }
        if logical_failure_repetition(&state) {
            return Ok(Trial { failed: true, steps: t, censored: false });
        }
    }
    Ok(Trial { failed: false, steps: spec.t_max, censored: true })
}

fn lifetime_2d(spec: &ExperimentSpec, rng: &mut ChaCha8Rng) -> Result<Trial> {
    let d = spec.d;
    let n = spec.noise;
    let schedule = spec.schedule();
    let matcher = MatchingOracle::new(d);
    let mut state = ToricState::new(d)?;
    let mut scala = (spec.decoder == DecoderKind::Scala2d).then(|| Scala2D::new(d));
    let mut har = match spec.decoder {
        DecoderKind::Har2d => Some(Harrington2D::new(d)?),
        _ => None,
    };
    for t in 1..=spec.t_max {
        inject_toric(rng, &mut state, n.p);
        let mut s = state.syndrome();
        flip_rows(rng, &mut s.rows, d, n.q);
        if let Some(ca) = scala.as_mut() {
            ca.step(&s, &mut state);
            if schedule.resets_after(t as usize, d) {
                ca.reset();
            }
            if n.p_sig > 0.0 {
                let mut masks = vec![vec![0u64; d]; 4];
                for m in masks.iter_mut() {
                    flip_rows(rng, m, d, n.p_sig);
                }
                ca.flip_signals([&masks[0], &masks[1], &masks[2], &masks[3]]);
            }
        } else if let Some(ca) = har.as_mut() {
            ca.step(&s, &mut state);
            if n.p_cs > 0.0 {
                for rows in ca.count_signals_mut() {
                    flip_rows(rng, rows, d, n.p_cs);
                }
            }
            if n.p_fs > 0.0 {
                for rows in ca.flip_signals_mut() {
                    flip_rows(rng, rows, d, n.p_fs);
                }
            }
        }
        if logical_failure_toric(&state, &matcher)? {
            return Ok(Trial { failed: true, steps: t, censored: false });
        }
    }
    Ok(Trial { failed: false, steps: spec.t_max, censored: true })
}

/// Runs trials `range` of `spec` in parallel and sums their outcomes.
pub fn run_batch(spec: &ExperimentSpec, range: Range<u64>) -> Result<Tally> {
    let lifetime = spec.model != NoiseModel::CodeCapacity;
    range
        .into_par_iter()
        .map(|i| {
            let t = if lifetime { lifetime_trial(spec, i)? } else { code_capacity_trial(spec, i)? };
            Ok(Tally::from(t))
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

fn finish(spec: &ExperimentSpec, tally: Tally, t_r: Option<usize>, start: Instant, target_met: bool) -> Result<RunResult> {
    if tally.censored as f64 > CENSOR_BUDGET * tally.shots as f64 {
        return Err(Error::CensorBudgetExceeded {
            censored: tally.censored,
            shots: tally.shots,
        });
    }
    let (estimate, se) = if spec.model == NoiseModel::CodeCapacity {
        tally.rate()
    } else {
        tally.mean()
    };
    Ok(RunResult {
        estimate,
        se,
        shots: tally.shots,
        failures: tally.failures,
        censored: tally.censored,
        t_r,
        seed: spec.seed,
        wall_ms: start.elapsed().as_millis() as u64,
        target_met,
    })
}

/// Draws batches from `runner` under the spec's shot policy, doubling the shot count until the
/// relative standard error reaches the target or the budget is exhausted.
pub fn adaptive_sample<F>(spec: &ExperimentSpec, runner: F) -> Result<RunResult>
where
    F: Fn(&ExperimentSpec, Range<u64>) -> Result<Tally>,
{
    let start = Instant::now();
    let t_r = match spec.reset {
        ResetPolicy::Fixed(t) if !spec.decoder.is_hierarchical() && spec.model != NoiseModel::CodeCapacity => Some(t),
        _ => None,
    };
    match spec.shots {
        ShotsPolicy::Fixed(n) => {
            let tally = runner(spec, 0..n)?;
            finish(spec, tally, t_r, start, true)
        }
        ShotsPolicy::Adaptive { target_rel_se, n_min, n_max } => {
            let mut n = n_min;
            let mut tally = runner(spec, 0..n)?;
            loop {
                let res = finish(spec, tally, t_r, start, false)?;
                let met = res.rel_se() <= target_rel_se;
                if met || n >= n_max {
                    return Ok(RunResult { target_met: met, ..res });
                }
                let next = (2 * n).min(n_max);
                tally = tally.merge(runner(spec, n..next)?);
                n = next;
            }
        }
    }
}

/// Evaluates every candidate reset period on a reduced budget with common random numbers, keeps
/// the one with the longest mean lifetime (ties go to the smaller period) and reruns it at full budget.
pub fn search_reset_time(spec: &ExperimentSpec, candidates: &[usize]) -> Result<(usize, RunResult)> {
    spec.validate()?;
    if candidates.is_empty() {
        return Err(Error::InvalidSpec("no reset candidates".into()));
    }
    let probe = match spec.shots {
        ShotsPolicy::Fixed(n) => (n / 10).clamp(n.min(100), 1_000),
        ShotsPolicy::Adaptive { n_min, .. } => n_min,
    };
    let mut best = candidates[0];
    if candidates.len() > 1 {
        let mut best_val = f64::NEG_INFINITY;
        for &c in candidates {
            let s = spec.clone().with_reset(ResetPolicy::Fixed(c)).with_shots(ShotsPolicy::Fixed(probe));
            let r = adaptive_sample(&s, run_batch)?;
            if r.estimate > best_val {
                best_val = r.estimate;
                best = c;
            }
        }
    }
    let full = spec.clone().with_reset(ResetPolicy::Fixed(best));
    Ok((best, adaptive_sample(&full, run_batch)?))
}

/// Runs `spec` under its noise model and shot policy, searching the reset period when requested.
pub fn run(spec: &ExperimentSpec) -> Result<RunResult> {
    spec.validate()?;
    if spec.reset == ResetPolicy::Auto && spec.model != NoiseModel::CodeCapacity && !spec.decoder.is_hierarchical() {
        return search_reset_time(spec, &spec.reset_candidates()).map(|x| x.1);
    }
    adaptive_sample(spec, run_batch)
}

pub fn run_code_capacity(spec: &ExperimentSpec) -> Result<RunResult> {
    if spec.model != NoiseModel::CodeCapacity {
        return Err(Error::InvalidSpec("run_code_capacity needs the code-capacity model".into()));
    }
    run(spec)
}

pub fn run_lifetime(spec: &ExperimentSpec) -> Result<RunResult> {
    if spec.model == NoiseModel::CodeCapacity {
        return Err(Error::InvalidSpec("run_lifetime needs a phenomenological or signal model".into()));
    }
    run(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    /// Magnitude of the log-log slope.
    pub lambda: f64,
    pub amplitude: f64,
    /// Standard error of the slope.
    pub lambda_se: f64,
}

/// Least-squares line through `(ln rate, ln estimate)`.
pub fn fit_scaling_exponent(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints { need: 3, got: points.len() });
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::Domain(if x > 0.0 { y } else { x }));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidSpec("fit needs at least two distinct rates".into()));
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    Ok(PowerFit {
        lambda: slope.abs(),
        amplitude: icpt.exp(),
        lambda_se: (ssr / (n - 2.0) / sxx).sqrt(),
    })
}

/// First crossing of two curves sampled on the same rates, interpolated linearly in log-log space.
pub fn crossing(a: &[(f64, f64)], b: &[(f64, f64)]) -> Option<f64> {
    let g: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| x.1 > 0.0 && y.1 > 0.0 && x.0 > 0.0)
        .map(|(x, y)| (x.0.ln(), x.1.ln() - y.1.ln()))
        .collect();
    g.windows(2).find_map(|w| {
        let ((x0, g0), (x1, g1)) = (w[0], w[1]);
        if g0 == 0.0 {
            return Some(x0.exp());
        }
        if g1 == 0.0 {
            return Some(x1.exp());
        }
        (g0.signum() != g1.signum()).then(|| (x0 + g0 / (g0 - g1) * (x1 - x0)).exp())
    })
}

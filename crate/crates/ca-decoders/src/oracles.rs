//! Exact reference decoders and closed-form failure curves.

use crate::error::{Error, Result};
use crate::lattice::{mask1, Direction, RepetitionState, Syndrome1D, ToricState};

pub const DEFAULT_MAX_DEFECTS: usize = 26;

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(p))
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Probability that more than half of `d` independent bits flip.
pub fn ml_pl_repetition(p: f64, d: usize) -> Result<f64> {
    check_prob(p)?;
    if d.is_multiple_of(2) || d == 0 {
        return Err(Error::InvalidDistance {
            d,
            reason: "repetition distance must be odd",
        });
    }
    binomial_upper_tail(d as u64, d.div_ceil(2) as u64, p)
}

/// `P(X >= k)` for `X ~ Bin(n, p)`, summed in log space.
pub fn binomial_upper_tail(n: u64, k: u64, p: f64) -> Result<f64> {
    check_prob(p)?;
    if k == 0 {
        return Ok(1.0);
    }
    if k > n {
        return Ok(0.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let total = (k..=n)
        .map(|j| (ln_choose(n, j) + j as f64 * lp + (n - j) as f64 * lq).exp())
        .sum::<f64>();
    Ok(total.min(1.0))
}

/// Majority failure rate of a three-bit block.
pub fn p_maj(p: f64) -> f64 {
    3.0 * p * p * (1.0 - p) + p * p * p
}

/// `m`-fold composition of [`p_maj`].
pub fn concat_majority_pl(p: f64, m: u32) -> Result<f64> {
    check_prob(p)?;
    if m == 0 {
        return Err(Error::Domain(0.0));
    }
    Ok((0..m).fold(p, |x, _| p_maj(x)))
}

/// Majority of block majorities of `d = 3^m` error bits, with blocks aligned so that each
/// top-level representative sits at a block centre.
pub fn concat_majority_class(d: usize, errors: u128) -> Result<bool> {
    crate::harrington::HierConstants::for_distance(d)?;
    let offset = (d / 3 - 1) / 2;
    let mut bits: Vec<bool> = (0..d).map(|i| (errors >> ((i + offset) % d)) & 1 == 1).collect();
    while bits.len() > 1 {
        bits = bits.chunks(3).map(|b| b.iter().filter(|&&x| x).count() >= 2).collect();
    }
    Ok(bits[0])
}

pub fn torus_distance(a: (usize, usize), b: (usize, usize), d: usize) -> usize {
    let wrap = |x: usize, y: usize| {
        let delta = x.abs_diff(y);
        delta.min(d - delta)
    };
    wrap(a.0, b.0) + wrap(a.1, b.1)
}

/// Minority-flip correction for the repetition code, rebuilt from the syndrome.
pub fn majority_vote_correction(s: &Syndrome1D) -> u128 {
    let d = s.d;
    let mut e = 0u128;
    let mut prev = false;
    for i in 0..d {
        let bit = prev ^ s.get(i);
        if bit {
            e |= 1 << i;
        }
        prev = bit;
    }
    if e.count_ones() as usize > d / 2 {
        e ^= mask1(d);
    }
    e
}

/// True when majority voting on the residual errors completes the logical operator.
pub fn majority_vote_1d(state: &RepetitionState) -> bool {
    let mut fixed = *state;
    fixed.apply(majority_vote_correction(&state.syndrome()));
    debug_assert!(fixed.bits() == 0 || fixed.weight() == state.d());
    fixed.bits() != 0
}

/// Minimum matching weight by trying every pairing; exponential, for checking small sets.
pub fn brute_force_matching_weight(defects: &[(usize, usize)], d: usize) -> Result<usize> {
    if defects.len() % 2 == 1 {
        return Err(Error::OddDefectCount(defects.len()));
    }
    fn go(rest: &[(usize, usize)], d: usize) -> usize {
        let Some((&a, tail)) = rest.split_first() else {
            return 0;
        };
        (0..tail.len())
            .map(|i| {
                let mut others = tail.to_vec();
                let b = others.remove(i);
                torus_distance(a, b, d) + go(&others, d)
            })
            .min()
            .unwrap_or(0)
    }
    Ok(go(defects, d))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub weight: usize,
}

/// Exact minimum-weight perfect matching on the torus metric by subset dynamic programming.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingOracle {
    pub d: usize,
    pub max_defects: usize,
}

impl MatchingOracle {
    pub fn new(d: usize) -> Self {
        MatchingOracle {
            d,
            max_defects: DEFAULT_MAX_DEFECTS,
        }
    }

    pub fn with_cap(d: usize, max_defects: usize) -> Self {
        MatchingOracle { d, max_defects }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n % 2 == 1 {
            return Err(Error::OddDefectCount(n));
        }
        if n > self.max_defects {
            return Err(Error::TooManyDefects {
                count: n,
                cap: self.max_defects,
            });
        }
        Ok(())
    }

    pub fn match_defects(&self, defects: &[(usize, usize)]) -> Result<Matching> {
        let n = defects.len();
        self.check(n)?;
        if n == 0 {
            return Ok(Matching {
                pairs: vec![],
                weight: 0,
            });
        }
        let dist: Vec<Vec<u16>> = defects
            .iter()
            .map(|&a| {
                defects
                    .iter()
                    .map(|&b| torus_distance(a, b, self.d) as u16)
                    .collect()
            })
            .collect();
        let mut memo = vec![u16::MAX; 1usize << n];
        memo[0] = 0;
        let full = (1usize << n) - 1;
        let weight = solve(full, &dist, &mut memo);
        let mut pairs = Vec::with_capacity(n / 2);
        let mut rem = full;
        while rem != 0 {
            let i = rem.trailing_zeros() as usize;
            let rest = rem & !(1 << i);
            let mut it = rest;
            loop {
                let j = it.trailing_zeros() as usize;
                let sub = rest & !(1 << j);
                if dist[i][j] + solve(sub, &dist, &mut memo) == memo[rem] {
                    pairs.push((i, j));
                    rem = sub;
                    break;
                }
                it &= it - 1;
            }
        }
        Ok(Matching {
            pairs,
            weight: weight as usize,
        })
    }

    /// Matching plus the edge set of one geodesic per pair; the edge set annihilates the defects.
    pub fn correction(&self, defects: &[(usize, usize)]) -> Result<(Matching, ToricState)> {
        let m = self.match_defects(defects)?;
        let mut corr = ToricState::new(self.d)?;
        for &(i, j) in &m.pairs {
            apply_path(&mut corr, defects[i], defects[j]);
        }
        Ok((m, corr))
    }

    /// Whether `residual` combined with the matching correction carries a nontrivial loop.
    pub fn logical_failure(&self, residual: &ToricState) -> Result<bool> {
        let (_, mut corr) = self.correction(&residual.syndrome().defects())?;
        corr.xor(residual);
        Ok(corr.cut_parity(Direction::Horizontal) || corr.cut_parity(Direction::Vertical))
    }
}

fn solve(rem: usize, dist: &[Vec<u16>], memo: &mut [u16]) -> u16 {
    if memo[rem] != u16::MAX {
        return memo[rem];
    }
    let i = rem.trailing_zeros() as usize;
    let rest = rem & !(1 << i);
    let mut best = u16::MAX;
    let mut it = rest;
    while it != 0 {
        let j = it.trailing_zeros() as usize;
        let cand = dist[i][j].saturating_add(solve(rest & !(1 << j), dist, memo));
        best = best.min(cand);
        it &= it - 1;
    }
    memo[rem] = best;
    best
}

/// Signed shortest step count from `from` to `to` on a ring of `d`; ties go towards increasing index.
fn ring_steps(from: usize, to: usize, d: usize) -> isize {
    let fwd = (to + d - from) % d;
    if fwd * 2 <= d {
        fwd as isize
    } else {
        fwd as isize - d as isize
    }
}

/// Column moves along the row of `a` first, then row moves along the column of `b`.
fn apply_path(t: &mut ToricState, a: (usize, usize), b: (usize, usize)) {
    let d = t.d();
    let (r, mut c) = a;
    let dc = ring_steps(a.1, b.1, d);
    for _ in 0..dc.unsigned_abs() {
        if dc > 0 {
            c = (c + 1) % d;
            t.flip_v(r, c);
        } else {
            t.flip_v(r, c);
            c = (c + d - 1) % d;
        }
    }
    let mut r = r;
    let dr = ring_steps(a.0, b.0, d);
    for _ in 0..dr.unsigned_abs() {
        if dr > 0 {
            r = (r + 1) % d;
            t.flip_h(r, c);
        } else {
            t.flip_h(r, c);
            r = (r + d - 1) % d;
        }
    }
}

/// Logical failure of a toric residual judged by the exact matcher and the fixed homology cuts.
pub fn logical_failure_toric(state: &ToricState, matcher: &MatchingOracle) -> Result<bool> {
    matcher.logical_failure(state)
}

/// Logical failure of a repetition residual under majority voting.
pub fn logical_failure_repetition(state: &RepetitionState) -> bool {
    majority_vote_1d(state)
}

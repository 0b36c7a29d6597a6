//! Absorbing Markov chains for logical lifetimes, weight-class reduction of
//! independent bit-flip chains, and binomial tail bounds for counter
//! accumulation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Ring;
use crate::error::{Error, Result};
use crate::harrington::HierConstants;
use crate::oracles::p_maj;

const STOCHASTIC_TOL: f64 = 1e-12;

/// Transient block `W`, absorbing block `R` and initial distribution `pi0` over transient states.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingChain {
    w: DMatrix<f64>,
    r: DMatrix<f64>,
    pi0: DVector<f64>,
}

impl AbsorbingChain {
    pub fn new(w: DMatrix<f64>, r: DMatrix<f64>, pi0: DVector<f64>) -> Result<Self> {
        let n = w.nrows();
        if w.ncols() != n || r.nrows() != n || pi0.len() != n || n == 0 {
            return Err(Error::InvalidSpec("chain blocks have inconsistent shapes".into()));
        }
        for i in 0..n {
            let s = w.row(i).sum() + r.row(i).sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidSpec(format!("row {i} sums to {s}")));
            }
        }
        if (pi0.sum() - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidSpec("initial distribution does not sum to 1".into()));
        }
        Ok(AbsorbingChain { w, r, pi0 })
    }

    /// Splits a full stochastic matrix into transient and absorbing blocks.
    pub fn from_stochastic(p: &DMatrix<f64>, absorbing: &[bool], start: usize) -> Result<Self> {
        let transient: Vec<usize> = (0..p.nrows()).filter(|&i| !absorbing[i]).collect();
        let absorb: Vec<usize> = (0..p.nrows()).filter(|&i| absorbing[i]).collect();
        let Some(s) = transient.iter().position(|&i| i == start) else {
            return Err(Error::InvalidSpec("start state must be transient".into()));
        };
        let w = DMatrix::from_fn(transient.len(), transient.len(), |i, j| p[(transient[i], transient[j])]);
        let r = DMatrix::from_fn(transient.len(), absorb.len().max(1), |i, j| {
            absorb.get(j).map_or(0.0, |&a| p[(transient[i], a)])
        });
        let mut pi0 = DVector::zeros(transient.len());
        pi0[s] = 1.0;
        Self::new(w, r, pi0)
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn pi0(&self) -> &DVector<f64> {
        &self.pi0
    }

    /// Mean number of steps until absorption, `pi0 (I - W)^-1 1`, via an LU solve.
    ///
    /// The diagonal of `I - W` is taken as the row's outflow, not `1 - w_ii`.
    pub fn hitting_time(&self) -> Result<f64> {
        let n = self.w.nrows();
        let mut a = -self.w.clone();
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| self.w[(i, j)]).sum();
            a[(i, i)] = off + self.r.row(i).sum();
        }
        let x = a
            .lu()
            .solve(&DVector::from_element(n, 1.0))
            .ok_or(Error::SingularSystem)?;
        let t = self.pi0.dot(&x);
        if !t.is_finite() || t < 0.0 {
            return Err(Error::SingularSystem);
        }
        Ok(t)
    }

    /// Probabilities `f_t` of first absorption at step `t` for `t = 1..=t_max`.
    pub fn first_passage(&self, t_max: usize) -> Vec<f64> {
        let exit = self.r.column_sum();
        let mut dist = self.pi0.transpose();
        (0..t_max)
            .map(|_| {
                let f = (&dist * &exit)[(0, 0)];
                dist = &dist * &self.w;
                f
            })
            .collect()
    }
}

pub fn hitting_time(chain: &AbsorbingChain) -> Result<f64> {
    chain.hitting_time()
}

/// Hamming-weight transition matrix of `n` bits flipping independently with probability `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedChain {
    pub n: usize,
    pub p: f64,
    pub matrix: DMatrix<f64>,
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1.0;
        for j in 1..=i {
            c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
        }
    }
    c
}

pub fn reduced_matrix(n: usize, p: f64) -> Result<ReducedChain> {
    if n == 0 {
        return Err(Error::InvalidSpec("reduced chain needs n >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(p));
    }
    let q = 1.0 - p;
    let c = binomials(n);
    let matrix = DMatrix::from_fn(n + 1, n + 1, |k, l| {
        // j of the k ones clear and l - k + j of the n - k zeros set
        (0..=k)
            .filter_map(|j| {
                let up = (l + j).checked_sub(k)?;
                (up <= n - k).then(|| {
                    let flips = (j + up) as i32;
                    c[k][j] * c[n - k][up] * p.powi(flips) * q.powi(n as i32 - flips)
                })
            })
            .sum()
    });
    Ok(ReducedChain { n, p, matrix })
}

impl ReducedChain {
    /// Chain started at weight 0 and absorbed once more than half the bits are set.
    pub fn majority_absorbing(&self) -> Result<AbsorbingChain> {
        let absorbing: Vec<bool> = (0..=self.n).map(|w| 2 * w > self.n).collect();
        AbsorbingChain::from_stochastic(&self.matrix, &absorbing, 0)
    }
}

/// Full `2^n`-state transition matrix of `n` independent bits flipping with probability `p`.
pub fn tensor_chain(n: usize, p: f64) -> DMatrix<f64> {
    let one = DMatrix::from_row_slice(2, 2, &[1.0 - p, p, p, 1.0 - p]);
    (1..n).fold(one.clone(), |acc, _| acc.kronecker(&one))
}

fn block_chain(d: usize, p: f64) -> Result<AbsorbingChain> {
    HierConstants::for_distance(d)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(p));
    }
    reduced_matrix(d / 3, p_maj(p))?.majority_absorbing()
}

/// Mean lifetime of `d / 3` independent level-0 blocks, each failing per step with `p_maj(p)`.
pub fn lifetime_level1(d: usize, p: f64) -> Result<f64> {
    block_chain(d, p)?.hitting_time()
}

/// Lifetime of the three-block chain of `d = 9` restarted after every level-1 cycle of `tau = U + Q` steps.
///
/// Returns `E[T | T < tau] + tau (1 - P) / P` with `P` the probability of absorption before `tau`;
/// `p = 0` gives infinity.
pub fn lifetime_d9_total(p: f64) -> Result<f64> {
    let chain = block_chain(9, p)?;
    let c = HierConstants::for_distance(9)?;
    let tau = c.cycle(1) as usize;
    let f = chain.first_passage(tau - 1);
    let mass: f64 = f.iter().sum();
    if mass <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let cond: f64 = f.iter().enumerate().map(|(t, x)| (t + 1) as f64 * x).sum::<f64>() / mass;
    Ok(cond + tau as f64 * (1.0 - mass) / mass)
}

/// Kullback-Leibler divergence between Bernoulli coins `a` and `p`.
pub fn kl_divergence(a: f64, p: f64) -> f64 {
    let term = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    term(a, p) + term(1.0 - a, 1.0 - p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffBounds {
    pub upper: f64,
    pub lower: f64,
}

fn check_open(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(x))
    }
}

/// Bounds on the probability that at least `f_c * window` of `window` Bernoulli(`p`) trials succeed.
///
/// The lower bound is `exp(-n D(k/n || p)) / sqrt(2k)` with `n = window` and `k = f_c * window`.
pub fn chernoff_bounds(window: u64, f_c: f64, p: f64) -> Result<ChernoffBounds> {
    check_open(f_c)?;
    check_open(p)?;
    let n = window as f64;
    let k = f_c * n;
    let div = kl_divergence(f_c, p);
    Ok(ChernoffBounds {
        upper: (-n * div).exp(),
        lower: (-n * kl_divergence(k / n, p)).exp() / (2.0 * k).sqrt(),
    })
}

/// Worst-case ratios `(R_max, R_min)` between the level-`k` and level-`(k-1)` accumulation probabilities.
pub fn chernoff_ratios(u: u64, k: u32, f_c: f64, p: f64) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidSpec("ratios need k >= 1".into()));
    }
    let hi = chernoff_bounds(u.pow(k), f_c, p)?;
    let lo = chernoff_bounds(u.pow(k - 1), f_c, p)?;
    Ok((hi.upper / lo.lower, hi.lower / lo.upper))
}

/// Lower bound `tau / p_maj(P1)` on the lifetime under pure measurement noise `q`,
/// with `P1` the Chernoff upper bound for a level-1 window.
pub fn lifetime_lower_bound(c: &HierConstants, q: f64) -> Result<f64> {
    let up = chernoff_bounds(c.working_period(1), c.f_c, q)?.upper;
    Ok(c.cycle(1) as f64 / p_maj(up))
}

/// Leading-order probability `ceil(Q^k / 2) p` that flip-signal noise creates a majority-length chain.
pub fn flip_chain_failure_prob(k: u32, p: f64) -> f64 {
    let len = 3usize.pow(k);
    len.div_ceil(2) as f64 * p
}

/// Simulates one quiet level-`k` flip-signal window under bit-flip noise `p` on every flip-signal bit.
///
/// The segment holds the source representative and the `Q^k - 1` cells it drives. Noise hits all
/// bits after the decision step and after each of the `Q^k - 1` propagation steps. Returns the number of shots in
/// which at least `ceil(Q^k / 2)` cells end up flipping their qubit.
pub fn simulate_flip_chain(k: u32, p: f64, shots: u64, seed: u64) -> u64 {
    let len = 3usize.pow(k);
    let ring = Ring::<u128>::new(len + 1);
    let cells = (1u128 << len) - 1;
    let need = len.div_ceil(2) as u32;
    let mut fails = 0;
    for shot in 0..shots {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot);
        let mut fs = 0u128;
        for step in 0..len {
            if step > 0 {
                fs = ((ring.west(fs) & !1) | (fs & 1)) & cells;
            }
            for i in 0..len {
                if rng.random::<f64>() < p {
                    fs ^= 1 << i;
                }
            }
        }
        if fs.count_ones() >= need {
            fails += 1;
        }
    }
    fails
}

//! Independent reference computations shared by the integration suites.
#![allow(dead_code)]

use ca_decoders::oracles::torus_distance;
use nalgebra::DMatrix;
use num::bigint::BigInt;
use num::{BigRational, One, ToPrimitive, Zero};

/// Minimum total torus distance over every perfect pairing, by plain recursion.
pub fn brute_force_matching(defects: &[(usize, usize)], d: usize) -> usize {
    fn go(rest: &[(usize, usize)], d: usize) -> usize {
        if rest.is_empty() {
            return 0;
        }
        let a = rest[0];
        (1..rest.len())
            .map(|j| {
                let others: Vec<_> = rest[1..].iter().enumerate().filter(|&(i, _)| i + 1 != j).map(|(_, &x)| x).collect();
                torus_distance(a, rest[j], d) + go(&others, d)
            })
            .min()
            .unwrap()
    }
    go(defects, d)
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn binom(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// `P(X >= k)` for `X ~ Bin(n, p)` in exact rational arithmetic.
pub fn exact_upper_tail(n: u64, k: u64, p: f64) -> BigRational {
    let p = rational(p);
    let q = BigRational::one() - &p;
    let mut total = BigRational::zero();
    for j in k..=n {
        let term = BigRational::from_integer(binom(n, j)) * num::pow(p.clone(), j as usize) * num::pow(q.clone(), (n - j) as usize);
        total += term;
    }
    total
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap()
}

/// Weight-aggregated transition matrix: from a fixed state of weight `k`, the total probability of
/// landing on any state of weight `l`.
pub fn aggregate_by_weight(full: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n + 1, n + 1);
    for k in 0..=n {
        let from = (1usize << k) - 1;
        for to in 0..(1usize << n) {
            out[(k, to.count_ones() as usize)] += full[(from, to)];
        }
    }
    out
}

/// Mean steps until more than half of `n` independent bits are set, from the all-clear state,
/// solved on the full `2^n` state space.
pub fn full_hitting_time(n: usize, p: f64) -> f64 {
    let full = ca_decoders::markov::tensor_chain(n, p);
    let transient: Vec<usize> = (0..1usize << n).filter(|s| 2 * s.count_ones() as usize <= n).collect();
    let m = transient.len();
    let mut a = DMatrix::<f64>::identity(m, m);
    for (i, &s) in transient.iter().enumerate() {
        for (j, &t) in transient.iter().enumerate() {
            a[(i, j)] -= full[(s, t)];
        }
    }
    let ones = nalgebra::DVector::from_element(m, 1.0);
    let t = a.lu().solve(&ones).unwrap();
    t[transient.iter().position(|&s| s == 0).unwrap()]
}

//! Repetition-code and toric-code error configurations.
//!
//! Repetition code: qubit `i` sits between cells `i` and `i+1`, so cell `i`
//! checks qubits `i-1` and `i` (mod d).
//!
//! Toric code: cells are faces. Face `(r, c)` is bounded by the horizontal
//! edges `h(r, c)` (north) and `h(r+1, c)` (south) and the vertical edges
//! `v(r, c)` (west) and `v(r, c+1)` (east). Each row is a bit word with
//! column `c` at bit `c`.

use serde::{Deserialize, Serialize};

use crate::bits::{Ones, Ring};
use crate::error::{Error, Result};

pub const MAX_REPETITION_DISTANCE: usize = 127;
pub const MAX_TORIC_DISTANCE: usize = 64;

/// Per-cell defects of the repetition code, bit `i` for cell `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome1D {
    pub d: usize,
    pub bits: u128,
}

impl Syndrome1D {
    pub fn get(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn defects(&self) -> Vec<usize> {
        Ones(self.bits).collect()
    }
}

/// Per-face defects of the toric code, one row word per lattice row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome2D {
    pub d: usize,
    pub rows: Vec<u64>,
}

impl Syndrome2D {
    pub fn empty(d: usize) -> Self {
        Syndrome2D { d, rows: vec![0; d] }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.rows[r] >> c) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    pub fn defects(&self) -> Vec<(usize, usize)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, &w)| Ones(w).map(move |c| (r, c)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RepetitionState {
    d: usize,
    errors: u128,
}

impl RepetitionState {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 || d.is_multiple_of(2) || d > MAX_REPETITION_DISTANCE {
            return Err(Error::InvalidDistance {
                d,
                reason: "repetition distance must be odd, at least 3 and at most 127",
            });
        }
        Ok(RepetitionState { d, errors: 0 })
    }

    pub fn from_bits(d: usize, errors: u128) -> Result<Self> {
        let mut s = Self::new(d)?;
        s.errors = errors & mask1(d);
        Ok(s)
    }

    pub fn from_slice(errors: &[bool]) -> Result<Self> {
        let mut s = Self::new(errors.len())?;
        for (i, &e) in errors.iter().enumerate() {
            if e {
                s.errors |= 1 << i;
            }
        }
        Ok(s)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bits(&self) -> u128 {
        self.errors
    }

    pub fn to_vec(&self) -> Vec<bool> {
        (0..self.d).map(|i| self.get(i)).collect()
    }

    pub fn get(&self, i: usize) -> bool {
        (self.errors >> i) & 1 == 1
    }

    pub fn flip(&mut self, i: usize) {
        self.errors ^= 1 << (i % self.d);
    }

    pub fn apply(&mut self, mask: u128) {
        self.errors ^= mask & mask1(self.d);
    }

    pub fn weight(&self) -> usize {
        self.errors.count_ones() as usize
    }

    pub fn syndrome(&self) -> Syndrome1D {
        let ring = Ring::<u128>::new(self.d);
        Syndrome1D {
            d: self.d,
            bits: self.errors ^ ring.west(self.errors),
        }
    }

    /// True when majority-vote decoding of the residual leaves the logical operator.
    pub fn logical_failure(&self) -> bool {
        self.weight() >= self.d.div_ceil(2)
    }
}

pub(crate) fn mask1(d: usize) -> u128 {
    if d >= 128 {
        u128::MAX
    } else {
        (1u128 << d) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ToricState {
    d: usize,
    h: Vec<u64>,
    v: Vec<u64>,
}

impl ToricState {
    pub fn new(d: usize) -> Result<Self> {
        if !(2..=MAX_TORIC_DISTANCE).contains(&d) {
            return Err(Error::InvalidDistance {
                d,
                reason: "toric distance must lie in 2..=64",
            });
        }
        Ok(ToricState {
            d,
            h: vec![0; d],
            v: vec![0; d],
        })
    }

    pub fn from_rows(d: usize, h: Vec<u64>, v: Vec<u64>) -> Result<Self> {
        let mut s = Self::new(d)?;
        if h.len() != d || v.len() != d {
            return Err(Error::InvalidSpec(format!("expected {d} rows of edges")));
        }
        let m = Ring::<u64>::new(d).mask();
        s.h = h.into_iter().map(|x| x & m).collect();
        s.v = v.into_iter().map(|x| x & m).collect();
        Ok(s)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn h_rows(&self) -> &[u64] {
        &self.h
    }

    pub fn v_rows(&self) -> &[u64] {
        &self.v
    }

    pub fn h(&self, r: usize, c: usize) -> bool {
        (self.h[r] >> c) & 1 == 1
    }

    pub fn v(&self, r: usize, c: usize) -> bool {
        (self.v[r] >> c) & 1 == 1
    }

    pub fn flip_h(&mut self, r: usize, c: usize) {
        self.h[r % self.d] ^= 1 << (c % self.d);
    }

    pub fn flip_v(&mut self, r: usize, c: usize) {
        self.v[r % self.d] ^= 1 << (c % self.d);
    }

    pub fn apply_h_row(&mut self, r: usize, mask: u64) {
        self.h[r] ^= mask;
    }

    pub fn apply_v_row(&mut self, r: usize, mask: u64) {
        self.v[r] ^= mask;
    }

    pub fn xor(&mut self, other: &ToricState) {
        for r in 0..self.d {
            self.h[r] ^= other.h[r];
            self.v[r] ^= other.v[r];
        }
    }

    pub fn weight(&self) -> usize {
        self.h
            .iter()
            .chain(self.v.iter())
            .map(|x| x.count_ones() as usize)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.h.iter().chain(self.v.iter()).all(|&x| x == 0)
    }

    pub fn syndrome(&self) -> Syndrome2D {
        let ring = Ring::<u64>::new(self.d);
        let d = self.d;
        let rows = (0..d)
            .map(|r| self.h[r] ^ self.h[(r + 1) % d] ^ self.v[r] ^ ring.east(self.v[r]))
            .collect();
        Syndrome2D { d, rows }
    }

    /// Flips the four edges meeting at vertex `(r, c)`, the north-west corner of face `(r, c)`.
    /// This is an X stabilizer and leaves the plaquette syndrome unchanged.
    pub fn apply_stabilizer(&mut self, r: usize, c: usize) {
        let d = self.d;
        self.flip_h(r, c);
        self.flip_h(r, c + d - 1);
        self.flip_v(r, c);
        self.flip_v(r + d - 1, c);
    }

    /// Flips every vertical edge in row `r`: a loop running around the horizontal cycle.
    pub fn apply_horizontal_logical(&mut self, r: usize) {
        let m = Ring::<u64>::new(self.d).mask();
        self.v[r % self.d] ^= m;
    }

    /// Flips every horizontal edge in column `c`: a loop running around the vertical cycle.
    pub fn apply_vertical_logical(&mut self, c: usize) {
        for r in 0..self.d {
            self.flip_h(r, c);
        }
    }

    /// Crossing parity with the fixed cut for `direction`.
    ///
    /// The horizontal loop class is read from the vertical edges in column 0 and
    /// the vertical loop class from the horizontal edges in row 0.
    pub fn homology_parity(&self, direction: Direction) -> Result<bool> {
        if !self.syndrome().is_empty() {
            return Err(Error::NonTrivialSyndrome);
        }
        Ok(self.cut_parity(direction))
    }

    pub(crate) fn cut_parity(&self, direction: Direction) -> bool {
        match direction {
            Direction::Horizontal => self.v.iter().fold(false, |acc, &row| acc ^ (row & 1 == 1)),
            Direction::Vertical => self.h[0].count_ones() % 2 == 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repetition_examples() {
        let s = RepetitionState::new(5).unwrap();
        assert!(s.syndrome().is_empty());
        let s = RepetitionState::from_bits(5, 0b00001).unwrap();
        assert_eq!(s.syndrome().defects(), vec![0, 1]);
        let s = RepetitionState::from_bits(5, 0b11111).unwrap();
        assert!(s.syndrome().is_empty());
        assert!(!RepetitionState::from_bits(5, 0b00011).unwrap().logical_failure());
        assert!(RepetitionState::from_bits(5, 0b10101).unwrap().logical_failure());
    }

    #[test]
    fn repetition_distance_validation() {
        assert!(RepetitionState::new(4).is_err());
        assert!(RepetitionState::new(1).is_err());
        assert!(RepetitionState::new(129).is_err());
        assert!(RepetitionState::new(127).is_ok());
    }

    #[test]
    fn repetition_syndrome_even_exhaustive() {
        for d in [3, 5, 7] {
            for e in 0..(1u128 << d) {
                let s = RepetitionState::from_bits(d, e).unwrap().syndrome();
                assert_eq!(s.count() % 2, 0);
            }
        }
    }

    #[test]
    fn toric_single_edge_two_defects() {
        let mut t = ToricState::new(5).unwrap();
        t.flip_h(2, 3);
        assert_eq!(t.syndrome().defects(), vec![(1, 3), (2, 3)]);
        let mut t = ToricState::new(5).unwrap();
        t.flip_v(2, 0);
        assert_eq!(t.syndrome().defects(), vec![(2, 0), (2, 4)]);
    }

    #[test]
    fn toric_stabilizer_trivial() {
        let mut t = ToricState::new(4).unwrap();
        t.apply_stabilizer(0, 0);
        assert_eq!(t.weight(), 4);
        assert!(t.syndrome().is_empty());
        assert_eq!(t.homology_parity(Direction::Horizontal), Ok(false));
        assert_eq!(t.homology_parity(Direction::Vertical), Ok(false));
    }

    #[test]
    fn toric_logicals() {
        let mut t = ToricState::new(5).unwrap();
        t.apply_vertical_logical(2);
        assert!(t.syndrome().is_empty());
        assert_eq!(t.homology_parity(Direction::Vertical), Ok(true));
        assert_eq!(t.homology_parity(Direction::Horizontal), Ok(false));
        t.apply_stabilizer(0, 2);
        t.apply_stabilizer(3, 0);
        assert_eq!(t.homology_parity(Direction::Vertical), Ok(true));
        let mut t = ToricState::new(5).unwrap();
        t.apply_horizontal_logical(4);
        assert!(t.syndrome().is_empty());
        assert_eq!(t.homology_parity(Direction::Horizontal), Ok(true));
        t.flip_h(0, 0);
        assert_eq!(t.homology_parity(Direction::Horizontal), Err(Error::NonTrivialSyndrome));
    }
}

//! Periodic bit-row helpers shared by the 1D and 2D automata.
//!
//! A row of `n` cells is stored in the low `n` bits of a word. `west(x)` moves
//! every bit one position up so that bit `i` of the result holds bit `i-1` of
//! `x`; `east(x)` is the inverse.

pub trait Row:
    Copy
    + Eq
    + std::hash::Hash
    + std::fmt::Debug
    + std::ops::BitAnd<Output = Self>
    + std::ops::BitOr<Output = Self>
    + std::ops::BitXor<Output = Self>
    + std::ops::Not<Output = Self>
    + std::ops::BitXorAssign
    + std::ops::BitOrAssign
    + std::ops::BitAndAssign
{
    const BITS: usize;
    const ZERO: Self;
    fn mask(n: usize) -> Self;
    fn bit(i: usize) -> Self;
    fn get(self, i: usize) -> bool;
    fn ones(self) -> u32;
    fn lowest(self) -> usize;
    fn shl1(self) -> Self;
    fn shr(self, k: usize) -> Self;
    fn shl(self, k: usize) -> Self;
}

macro_rules! impl_row {
    ($t:ty) => {
        impl Row for $t {
            const BITS: usize = <$t>::BITS as usize;
            const ZERO: Self = 0;
            #[inline]
            fn mask(n: usize) -> Self {
                if n >= <Self as Row>::BITS {
                    <$t>::MAX
                } else {
                    (1 << n) - 1
                }
            }
            #[inline]
            fn bit(i: usize) -> Self {
                1 << i
            }
            #[inline]
            fn get(self, i: usize) -> bool {
                (self >> i) & 1 == 1
            }
            #[inline]
            fn ones(self) -> u32 {
                self.count_ones()
            }
            #[inline]
            fn lowest(self) -> usize {
                self.trailing_zeros() as usize
            }
            #[inline]
            fn shl1(self) -> Self {
                self << 1
            }
            #[inline]
            fn shr(self, k: usize) -> Self {
                self >> k
            }
            #[inline]
            fn shl(self, k: usize) -> Self {
                self << k
            }
        }
    };
}

impl_row!(u64);
impl_row!(u128);

/// Ring of `n` cells with periodic shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ring<T: Row> {
    n: usize,
    mask: T,
}

impl<T: Row> Ring<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1 && n <= T::BITS, "ring size {n} out of range");
        Ring { n, mask: T::mask(n) }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; a ring has at least one cell.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn mask(&self) -> T {
        self.mask
    }

    /// Bit `i` of the result is bit `i-1` of `x`.
    #[inline]
    pub fn west(&self, x: T) -> T {
        (x.shl1() | x.shr(self.n - 1)) & self.mask
    }

    /// Bit `i` of the result is bit `i+1` of `x`.
    #[inline]
    pub fn east(&self, x: T) -> T {
        x.shr(1) | (x & T::bit(0)).shl(self.n - 1)
    }

    /// Bit `i` of the result is bit `i-k` of `x`.
    #[inline]
    pub fn west_by(&self, x: T, k: usize) -> T {
        let k = k % self.n;
        if k == 0 {
            return x;
        }
        (x.shl(k) | x.shr(self.n - k)) & self.mask
    }

    /// Bit `i` of the result is bit `i+k` of `x`.
    #[inline]
    pub fn east_by(&self, x: T, k: usize) -> T {
        self.west_by(x, self.n - k % self.n)
    }
}

/// Iterator over the set bit positions of a word.
pub struct Ones<T: Row>(pub T);

impl<T: Row> Iterator for Ones<T> {
    type Item = usize;
    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == T::ZERO {
            return None;
        }
        let i = self.0.lowest();
        self.0 ^= T::bit(i);
        Some(i)
    }
}

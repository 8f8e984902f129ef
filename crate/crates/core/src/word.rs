//! Width-parametric machine words.
//!
//! Every supported width is carried in a `u64` and reduced with an explicit
//! mask after each arithmetic step. Columns are numbered from 1 starting at
//! the least significant bit.

use crate::error::{Error, Result};

/// A word value; always interpreted relative to some [`WordSpec`].
pub type Word = u64;

/// Mask of the low `bits` bits, for `bits` in `0..=64`.
#[inline]
pub const fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Word width `w` with its derived half-width and mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WordSpec {
    width: u32,
    half: u32,
    mask: u64,
}

/// The arithmetic and logic operations of the generator, all mod `2^w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Xor,
    And,
    Or,
    /// `2x mod 2^w`; the second operand is ignored.
    Shl1,
}

impl WordSpec {
    pub const MIN_WIDTH: u32 = 4;
    pub const MAX_WIDTH: u32 = 64;

    pub fn new(width: u32) -> Result<Self> {
        if !width.is_multiple_of(2) || !(Self::MIN_WIDTH..=Self::MAX_WIDTH).contains(&width) {
            return Err(Error::InvalidWidth(width));
        }
        Ok(Self {
            width,
            half: width / 2,
            mask: low_mask(width),
        })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn half(&self) -> u32 {
        self.half
    }

    #[inline]
    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Number of hex digits needed to print a word.
    pub fn hex_digits(&self) -> usize {
        self.width.div_ceil(4) as usize
    }

    /// Number of bytes a word occupies in the binary keystream format.
    pub fn byte_len(&self) -> usize {
        self.width.div_ceil(8) as usize
    }

    pub fn check(&self, x: Word) -> Result<Word> {
        if x > self.mask {
            Err(Error::ValueOutOfRange {
                value: x,
                width: self.width,
            })
        } else {
            Ok(x)
        }
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> Word {
        x & self.mask
    }

    pub fn apply(&self, op: ArithOp, x: Word, y: Word) -> Word {
        match op {
            ArithOp::Add => self.add(x, y),
            ArithOp::Mul => self.mul(x, y),
            ArithOp::Xor => (x ^ y) & self.mask,
            ArithOp::And => x & y & self.mask,
            ArithOp::Or => (x | y) & self.mask,
            ArithOp::Shl1 => self.shl1(x),
        }
    }

    #[inline]
    pub fn add(&self, x: Word, y: Word) -> Word {
        x.wrapping_add(y) & self.mask
    }

    #[inline]
    pub fn sub(&self, x: Word, y: Word) -> Word {
        x.wrapping_sub(y) & self.mask
    }

    #[inline]
    pub fn neg(&self, x: Word) -> Word {
        x.wrapping_neg() & self.mask
    }

    #[inline]
    pub fn mul(&self, x: Word, y: Word) -> Word {
        x.wrapping_mul(y) & self.mask
    }

    #[inline]
    pub fn shl1(&self, x: Word) -> Word {
        (x << 1) & self.mask
    }

    /// Exchanges the upper and lower `w/2`-bit halves of `x`.
    #[inline]
    pub fn swap_halves(&self, x: Word) -> Word {
        let x = x & self.mask;
        ((x >> self.half) | (x << self.half)) & self.mask
    }

    /// Bit in column `k` (1-based, column 1 is the LSB).
    pub fn column_bit(&self, x: Word, k: u32) -> Result<u8> {
        if k == 0 || k > self.width {
            return Err(Error::ColumnOutOfRange {
                column: k,
                width: self.width,
            });
        }
        Ok(((x >> (k - 1)) & 1) as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mix::SplitMix64;

    fn w(width: u32) -> WordSpec {
        WordSpec::new(width).unwrap()
    }

    #[test]
    fn rejects_bad_widths() {
        for bad in [0, 1, 2, 3, 5, 7, 63, 65, 66, 128] {
            assert_eq!(WordSpec::new(bad), Err(Error::InvalidWidth(bad)));
        }
        for good in (4..=64).step_by(2) {
            let s = w(good);
            assert_eq!(s.half() * 2, good);
            assert_eq!(s.mask() as u128, (1u128 << good) - 1);
        }
    }

    #[test]
    fn arithmetic_wraps() {
        let s = w(8);
        assert_eq!(s.apply(ArithOp::Add, 0xFF, 0x01), 0x00);
        assert_eq!(s.apply(ArithOp::Mul, 0x80, 0x02), 0x00);
        assert_eq!(s.apply(ArithOp::Shl1, 0x81, 0xFF), 0x02);
        for x in 0..=0xFF {
            assert_eq!(s.apply(ArithOp::Xor, x, x), 0);
        }
        let s64 = w(64);
        assert_eq!(s64.add(u64::MAX, 1), 0);
        assert_eq!(s64.neg(1), u64::MAX);
    }

    #[test]
    fn swap_examples() {
        assert_eq!(w(8).swap_halves(0xAB), 0xBA);
        assert_eq!(w(8).swap_halves(0x00), 0x00);
        assert_eq!(w(16).swap_halves(0x1234), 0x3412);
        assert_eq!(
            w(64).swap_halves(0x0123_4567_89AB_CDEF),
            0x89AB_CDEF_0123_4567
        );
        assert_eq!(w(4).swap_halves(0x1), 0x4);
    }

    #[test]
    fn swap_matches_division_formula() {
        // S(x) = x / 2^h + x * 2^h mod 2^w
        for width in [4u32, 8, 12] {
            let s = w(width);
            let h = s.half();
            for x in 0..=s.mask() {
                let expected = (x >> h) + ((x << h) & s.mask());
                assert_eq!(s.swap_halves(x), expected);
            }
        }
    }

    #[test]
    fn swap_is_involution() {
        let s = w(8);
        for x in 0..=0xFF {
            assert_eq!(s.swap_halves(s.swap_halves(x)), x);
        }
        let mut rng = SplitMix64::new(1);
        for width in [16, 32, 64] {
            let s = w(width);
            for _ in 0..10_000 {
                let x = rng.word(s);
                assert_eq!(s.swap_halves(s.swap_halves(x)), x);
            }
        }
    }

    #[test]
    fn column_bits() {
        let s = w(8);
        assert_eq!(s.column_bit(1, 1), Ok(1));
        assert_eq!(s.column_bit(1, 2), Ok(0));
        assert_eq!(s.column_bit(0x80, 8), Ok(1));
        assert!(s.column_bit(1, 0).is_err());
        assert!(s.column_bit(1, 9).is_err());
        for x in 0..=0xFFu64 {
            let rebuilt: u64 = (1..=8)
                .map(|k| (s.column_bit(x, k).unwrap() as u64) << (k - 1))
                .sum();
            assert_eq!(rebuilt, x);
        }
    }

    #[test]
    fn closure_under_all_ops() {
        let ops = [
            ArithOp::Add,
            ArithOp::Mul,
            ArithOp::Xor,
            ArithOp::And,
            ArithOp::Or,
            ArithOp::Shl1,
        ];
        let mut rng = SplitMix64::new(99);
        for width in [4, 8, 16, 32, 64] {
            let s = w(width);
            for _ in 0..10_000 {
                let (x, y) = (rng.word(s), rng.word(s));
                for op in ops {
                    assert!(s.apply(op, x, y) <= s.mask());
                }
            }
        }
    }

    #[test]
    fn value_check() {
        let s = w(8);
        assert_eq!(s.check(0xFF), Ok(0xFF));
        assert!(s.check(0x100).is_err());
    }
}

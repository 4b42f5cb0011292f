//! Fixed-length example bitsets with a cached population count.

use std::fmt;

use super::DataError;

const WORD_BITS: usize = 64;

/// One bit per example of the owning dataset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CoverageMask {
    len: usize,
    count: usize,
    words: Vec<u64>,
}

#[inline]
fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

impl CoverageMask {
    pub fn empty(len: usize) -> Self {
        CoverageMask {
            len,
            count: 0,
            words: vec![0; word_count(len)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut words = vec![u64::MAX; word_count(len)];
        let tail = len % WORD_BITS;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << tail) - 1;
            }
        }
        CoverageMask {
            len,
            count: len,
            words,
        }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut mask = Self::empty(len);
        for i in 0..len {
            if f(i) {
                mask.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        mask.recount();
        mask
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut mask = Self::empty(len);
        for i in indices {
            assert!(i < len, "index {i} out of range for mask of length {len}");
            mask.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
        }
        mask.recount();
        mask
    }

    /// Parses a string of `0`/`1` characters, bit 0 first.
    pub fn from_bit_str(bits: &str) -> Self {
        let chars: Vec<char> = bits.chars().filter(|c| !c.is_whitespace()).collect();
        Self::from_fn(chars.len(), |i| chars[i] == '1')
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Number of set bits.
    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / WORD_BITS] & (1 << (i % WORD_BITS)) != 0
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len);
        let bit = 1u64 << (i % WORD_BITS);
        let word = &mut self.words[i / WORD_BITS];
        let was = *word & bit != 0;
        if value && !was {
            *word |= bit;
            self.count += 1;
        } else if !value && was {
            *word &= !bit;
            self.count -= 1;
        }
    }

    fn recount(&mut self) {
        self.count = self.words.iter().map(|w| w.count_ones() as usize).sum();
    }

    fn check_len(&self, other: &CoverageMask) -> Result<(), DataError> {
        if self.len != other.len {
            return Err(DataError::MaskLength {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &CoverageMask, op: impl Fn(u64, u64) -> u64) -> Result<Self, DataError> {
        self.check_len(other)?;
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| op(a, b))
            .collect();
        let mut mask = CoverageMask {
            len: self.len,
            count: 0,
            words,
        };
        mask.recount();
        Ok(mask)
    }

    pub fn and(&self, other: &CoverageMask) -> Result<Self, DataError> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn or(&self, other: &CoverageMask) -> Result<Self, DataError> {
        self.zip_with(other, |a, b| a | b)
    }

    /// Bits set in `self` but not in `other`.
    pub fn and_not(&self, other: &CoverageMask) -> Result<Self, DataError> {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn not(&self) -> Self {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        let tail = self.len % WORD_BITS;
        if tail != 0 {
            if let Some(last) = out.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        out.count = self.len - self.count;
        out
    }

    /// Population count of `self & subset` without allocating.
    pub fn weighted_count(&self, subset: &CoverageMask) -> Result<usize, DataError> {
        self.check_len(subset)?;
        Ok(self
            .words
            .iter()
            .zip(&subset.words)
            .map(|(&a, &b)| (a & b).count_ones() as usize)
            .sum())
    }

    /// Population count of `self & a & b` without allocating.
    pub fn count_and2(&self, a: &CoverageMask, b: &CoverageMask) -> Result<usize, DataError> {
        self.check_len(a)?;
        self.check_len(b)?;
        Ok(self
            .words
            .iter()
            .zip(&a.words)
            .zip(&b.words)
            .map(|((&x, &y), &z)| (x & y & z).count_ones() as usize)
            .sum())
    }

    /// Indices of set bits in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + bit)
            })
        })
    }

    pub fn is_subset_of(&self, other: &CoverageMask) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(&a, &b)| a & !b == 0)
    }
}

pub fn mask_and(a: &CoverageMask, b: &CoverageMask) -> Result<CoverageMask, DataError> {
    a.and(b)
}

pub fn mask_or(a: &CoverageMask, b: &CoverageMask) -> Result<CoverageMask, DataError> {
    a.or(b)
}

pub fn mask_count(a: &CoverageMask) -> usize {
    a.count()
}

pub fn weighted_count(a: &CoverageMask, subset: &CoverageMask) -> Result<usize, DataError> {
    a.weighted_count(subset)
}

impl fmt::Debug for CoverageMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoverageMask(")?;
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        write!(f, ", count={})", self.count)
    }
}

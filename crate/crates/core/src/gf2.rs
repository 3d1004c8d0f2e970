//! Dense bit vectors and echelon bases over GF(2).
//!
//! Everything in the crate that does linear algebra (ranks, kernels, homology
//! coordinates, sheaf coboundaries, persistence) goes through this module.
//! Addition is XOR; pivots are chosen on the lowest set index so that bases
//! come out in a fixed order for a fixed input.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A vector over GF(2) packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Vec {
    words: Vec<u64>,
    len: usize,
}

impl Gf2Vec {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn unit(len: usize, bit: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(bit, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector with the given indices toggled, so repeated indices
    /// cancel in pairs.
    pub fn from_toggles(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.flip(i);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn lowest_one(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn highest_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn xor_assign(&mut self, other: &Gf2Vec) {
        assert_eq!(self.len, other.len, "length mismatch in GF(2) addition");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn and(&self, other: &Gf2Vec) -> Gf2Vec {
        assert_eq!(self.len, other.len, "length mismatch in GF(2) product");
        Gf2Vec { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(), len: self.len }
    }

    pub fn and_not(&self, other: &Gf2Vec) -> Gf2Vec {
        assert_eq!(self.len, other.len, "length mismatch in GF(2) product");
        Gf2Vec { words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(), len: self.len }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Gf2Vec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in GF(2) dot product");
        self.words.iter().zip(&other.words).fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones()) & 1 == 1
    }

    /// Hamming distance; the shorter vector is read as zero-padded.
    pub fn hamming(&self, other: &Gf2Vec) -> usize {
        let n = self.words.len().max(other.words.len());
        (0..n)
            .map(|i| {
                let a = self.words.get(i).copied().unwrap_or(0);
                let b = other.words.get(i).copied().unwrap_or(0);
                (a ^ b).count_ones() as usize
            })
            .sum()
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &Gf2Vec) -> Gf2Vec {
        let mut out = Gf2Vec::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }
}

impl std::ops::Add<&Gf2Vec> for &Gf2Vec {
    type Output = Gf2Vec;
    fn add(self, rhs: &Gf2Vec) -> Gf2Vec {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }
}

impl Ord for Gf2Vec {
    /// Shorter vectors first, then lexicographic on bits from index 0.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| {
            for (a, b) in self.words.iter().zip(&other.words) {
                if a != b {
                    let first = (a ^ b).trailing_zeros();
                    // the vector with a 0 at the first differing bit sorts first
                    return if (a >> first) & 1 == 0 { Ordering::Less } else { Ordering::Greater };
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Gf2Vec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Gf2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
        write!(f, "Gf2Vec({s})")
    }
}

impl Serialize for Gf2Vec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let bits: Vec<u8> = (0..self.len).map(|i| self.get(i) as u8).collect();
        bits.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gf2Vec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(d)?;
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(serde::de::Error::custom(format!("expected a bit (0 or 1), got {bad}")));
        }
        Ok(Gf2Vec::from_bools(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>()))
    }
}

/// A dense GF(2) matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Gf2Matrix {
    rows: Vec<Gf2Vec>,
    cols: usize,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows: vec![Gf2Vec::zeros(cols); rows], cols }
    }

    pub fn identity(n: usize) -> Self {
        Self { rows: (0..n).map(|i| Gf2Vec::unit(n, i)).collect(), cols: n }
    }

    /// Builds a matrix from nested bit rows; every row must have `cols` bits.
    pub fn from_rows(rows: Vec<Gf2Vec>, cols: usize) -> Option<Self> {
        rows.iter().all(|r| r.len() == cols).then_some(Self { rows, cols })
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value)
    }

    pub fn rows(&self) -> &[Gf2Vec] {
        &self.rows
    }

    pub fn mul_vec(&self, x: &Gf2Vec) -> Gf2Vec {
        assert_eq!(x.len(), self.cols, "matrix-vector shape mismatch");
        let mut out = Gf2Vec::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(x) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        rank_of(self.rows.iter().cloned())
    }
}

/// Rank of the span of the given vectors.
pub fn rank_of(vectors: impl IntoIterator<Item = Gf2Vec>) -> usize {
    let mut basis = Echelon::new();
    vectors.into_iter().filter(|v| basis.insert(v.clone(), Gf2Vec::zeros(0)).is_ok()).count()
}

/// An echelon basis keyed by the lowest set index of each stored vector.
///
/// Every stored vector carries a tag recording which inputs were combined to
/// produce it, which lets callers recover kernel relations and coordinates.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(Gf2Vec, Gf2Vec)>,
    pivot_row: std::collections::HashMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Stored (reduced) vectors in insertion order.
    pub fn vectors(&self) -> impl Iterator<Item = &Gf2Vec> {
        self.rows.iter().map(|(v, _)| v)
    }

    /// Reduces `v` (and its tag alongside) against the stored vectors.
    pub fn reduce(&self, mut v: Gf2Vec, mut tag: Gf2Vec) -> (Gf2Vec, Gf2Vec) {
        while let Some(p) = v.lowest_one() {
            match self.pivot_row.get(&p) {
                Some(&r) => {
                    let (rv, rt) = &self.rows[r];
                    v.xor_assign(rv);
                    if !tag.is_empty() {
                        tag.xor_assign(rt);
                    }
                }
                None => break,
            }
        }
        (v, tag)
    }

    /// Inserts `v`. Returns the row index when independent, or the reduced
    /// tag (a relation among earlier inputs and `v`) when `v` is dependent.
    pub fn insert(&mut self, v: Gf2Vec, tag: Gf2Vec) -> Result<usize, Gf2Vec> {
        let (v, tag) = self.reduce(v, tag);
        match v.lowest_one() {
            None => Err(tag),
            Some(p) => {
                self.pivot_row.insert(p, self.rows.len());
                self.rows.push((v, tag));
                Ok(self.rows.len() - 1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_ops() {
        let mut v = Gf2Vec::zeros(130);
        v.set(3, true);
        v.set(64, true);
        v.set(129, true);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![3, 64, 129]);
        assert_eq!(v.lowest_one(), Some(3));
        assert_eq!(v.highest_one(), Some(129));
        assert_eq!(v.count_ones(), 3);
        let w = &v + &v;
        assert!(w.is_zero());
    }

    #[test]
    fn toggles_cancel() {
        let v = Gf2Vec::from_toggles(5, [1, 2, 1, 4]);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![2, 4]);
    }

    #[test]
    fn ordering_is_lexicographic() {
        let a = Gf2Vec::from_bools(&[false, true, true]);
        let b = Gf2Vec::from_bools(&[true, false, false]);
        assert!(a < b);
        assert!(Gf2Vec::zeros(2) < Gf2Vec::zeros(3));
    }

    #[test]
    fn echelon_records_relations() {
        let mut e = Echelon::new();
        let a = Gf2Vec::from_bools(&[true, true, false]);
        let b = Gf2Vec::from_bools(&[false, true, true]);
        let c = Gf2Vec::from_bools(&[true, false, true]);
        assert!(e.insert(a, Gf2Vec::unit(3, 0)).is_ok());
        assert!(e.insert(b, Gf2Vec::unit(3, 1)).is_ok());
        let rel = e.insert(c, Gf2Vec::unit(3, 2)).unwrap_err();
        assert_eq!(rel.iter_ones().collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn matrix_rank_and_product() {
        let m = Gf2Matrix::identity(3);
        assert_eq!(m.rank(), 3);
        let x = Gf2Vec::from_bools(&[true, false, true]);
        assert_eq!(m.mul_vec(&x), x);
        assert_eq!(Gf2Matrix::zeros(2, 2).rank(), 0);
    }

    #[test]
    fn serde_as_bits() {
        let v = Gf2Vec::from_bools(&[true, false, true]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[1,0,1]");
        assert_eq!(serde_json::from_str::<Gf2Vec>(&s).unwrap(), v);
        assert!(serde_json::from_str::<Gf2Vec>("[2]").is_err());
    }
}

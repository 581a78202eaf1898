//! Finite sets over `Z` and `Z/NZ`, affine maps, and the basic set algebra
//! (dilates, sumsets, difference sets) used throughout the crate.

use std::collections::BTreeSet;
use std::fmt;

use crate::arith::{mod_inverse, reduce};
use crate::error::{Error, Result};

const WORD: usize = 64;

/// A subset of `Z/NZ`, stored as a dense membership bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ResidueSet {
    modulus: u64,
    words: Vec<u64>,
    len: usize,
}

impl ResidueSet {
    pub fn empty(modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::invalid("modulus must be positive"));
        }
        let words = vec![0u64; (modulus as usize).div_ceil(WORD)];
        Ok(ResidueSet {
            modulus,
            words,
            len: 0,
        })
    }

    pub fn full(modulus: u64) -> Result<Self> {
        let mut s = Self::empty(modulus)?;
        for x in 0..modulus {
            s.insert_unchecked(x);
        }
        Ok(s)
    }

    /// Builds a set from residues that must already lie in `[0, N)`.
    /// Duplicates are rejected so that malformed input is never silently fixed.
    pub fn new(modulus: u64, elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut s = Self::empty(modulus)?;
        for x in elements {
            if x >= modulus {
                return Err(Error::invalid(format!(
                    "element {x} outside [0, {}]",
                    modulus - 1
                )));
            }
            if s.contains(x) {
                return Err(Error::invalid(format!("duplicate element {x}")));
            }
            s.insert_unchecked(x);
        }
        Ok(s)
    }

    /// Reduces arbitrary integers mod `N`, merging collisions.
    pub fn from_reduced(modulus: u64, elements: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut s = Self::empty(modulus)?;
        for x in elements {
            s.insert_unchecked(reduce(x, modulus));
        }
        Ok(s)
    }

    pub(crate) fn insert_unchecked(&mut self, x: u64) {
        let (w, b) = (x as usize / WORD, x as usize % WORD);
        if self.words[w] & (1 << b) == 0 {
            self.words[w] |= 1 << b;
            self.len += 1;
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, x: u64) -> bool {
        x < self.modulus && self.words[x as usize / WORD] & (1 << (x as usize % WORD)) != 0
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(i as u64 * WORD as u64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }

    /// 0/1 indicator vector of length `N`.
    pub fn indicator(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.modulus as usize];
        for x in self.iter() {
            v[x as usize] = 1;
        }
        v
    }

    pub(crate) fn check_same(&self, other: &ResidueSet) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            });
        }
        Ok(())
    }

    pub fn density(&self) -> f64 {
        self.len as f64 / self.modulus as f64
    }

    pub fn complement(&self) -> ResidueSet {
        let mut out = ResidueSet::empty(self.modulus).expect("positive modulus");
        for x in 0..self.modulus {
            if !self.contains(x) {
                out.insert_unchecked(x);
            }
        }
        out
    }

    pub fn union(&self, other: &ResidueSet) -> Result<ResidueSet> {
        self.check_same(other)?;
        Ok(self.zip_words(other, |a, b| a | b))
    }

    pub fn intersection(&self, other: &ResidueSet) -> Result<ResidueSet> {
        self.check_same(other)?;
        Ok(self.zip_words(other, |a, b| a & b))
    }

    pub fn difference(&self, other: &ResidueSet) -> Result<ResidueSet> {
        self.check_same(other)?;
        Ok(self.zip_words(other, |a, b| a & !b))
    }

    pub fn is_disjoint(&self, other: &ResidueSet) -> Result<bool> {
        Ok(self.intersection(other)?.is_empty())
    }

    fn zip_words(&self, other: &ResidueSet, f: impl Fn(u64, u64) -> u64) -> ResidueSet {
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        ResidueSet {
            modulus: self.modulus,
            words,
            len,
        }
    }

    /// `λ·A = {λa mod N}`. Any `λ` is accepted; cardinality is preserved
    /// exactly when `gcd(λ, N) = 1`.
    pub fn dilate(&self, lambda: i64) -> ResidueSet {
        let l = reduce(lambda, self.modulus) as u128;
        let n = self.modulus as u128;
        let mut out = ResidueSet::empty(self.modulus).expect("positive modulus");
        for x in self.iter() {
            out.insert_unchecked((x as u128 * l % n) as u64);
        }
        out
    }

    pub fn translate(&self, shift: i64) -> ResidueSet {
        let s = reduce(shift, self.modulus);
        let mut out = ResidueSet::empty(self.modulus).expect("positive modulus");
        for x in self.iter() {
            out.insert_unchecked((x + s) % self.modulus);
        }
        out
    }

    pub fn negate(&self) -> ResidueSet {
        self.dilate(-1)
    }

    /// `A + B`.
    pub fn sumset(&self, other: &ResidueSet) -> Result<ResidueSet> {
        self.check_same(other)?;
        let mut out = ResidueSet::empty(self.modulus)?;
        let b: Vec<u64> = other.to_vec();
        for a in self.iter() {
            for &y in &b {
                out.insert_unchecked((a + y) % self.modulus);
            }
        }
        Ok(out)
    }

    /// `A − B`.
    pub fn difference_set(&self, other: &ResidueSet) -> Result<ResidueSet> {
        self.sumset(&other.negate())
    }

    /// `λA`, the λ-fold sumset. `1A = A`.
    pub fn iterated_sumset(&self, lambda: u32) -> Result<ResidueSet> {
        if lambda == 0 {
            return Err(Error::invalid("iterated sumset requires λ ≥ 1"));
        }
        let mut acc = self.clone();
        for _ in 1..lambda {
            acc = acc.sumset(self)?;
        }
        Ok(acc)
    }

    /// Signed representative of each element in `(−N/2, N/2]`.
    pub fn centered(&self) -> Vec<i64> {
        let n = self.modulus as i64;
        self.iter()
            .map(|x| {
                let x = x as i64;
                if 2 * x > n {
                    x - n
                } else {
                    x
                }
            })
            .collect()
    }
}

impl fmt::Debug for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} mod {}", self.to_vec(), self.modulus)
    }
}

/// A finite set of integers, kept sorted ascending.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IntegerSet {
    elements: Vec<i64>,
}

impl IntegerSet {
    /// Rejects duplicates; input order does not matter.
    pub fn new(elements: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut v: Vec<i64> = elements.into_iter().collect();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate element in integer set"));
        }
        Ok(IntegerSet { elements: v })
    }

    /// Sorts and removes duplicates.
    pub fn from_iter_dedup(elements: impl IntoIterator<Item = i64>) -> Self {
        let set: BTreeSet<i64> = elements.into_iter().collect();
        IntegerSet {
            elements: set.into_iter().collect(),
        }
    }

    pub(crate) fn from_sorted_unchecked(elements: Vec<i64>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        IntegerSet { elements }
    }

    pub fn elements(&self) -> &[i64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: i64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn min(&self) -> Option<i64> {
        self.elements.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.elements.last().copied()
    }

    pub fn dilate(&self, lambda: i64) -> Result<IntegerSet> {
        if lambda == 0 {
            return Err(Error::invalid("integer dilate requires λ ≠ 0"));
        }
        Ok(IntegerSet::from_iter_dedup(
            self.elements.iter().map(|&x| x * lambda),
        ))
    }

    pub fn translate(&self, shift: i64) -> IntegerSet {
        IntegerSet::from_sorted_unchecked(self.elements.iter().map(|&x| x + shift).collect())
    }

    pub fn union(&self, other: &IntegerSet) -> IntegerSet {
        IntegerSet::from_iter_dedup(self.elements.iter().chain(&other.elements).copied())
    }

    pub fn sumset(&self, other: &IntegerSet) -> IntegerSet {
        IntegerSet::from_iter_dedup(
            self.elements
                .iter()
                .flat_map(|&a| other.elements.iter().map(move |&b| a + b)),
        )
    }

    pub fn difference_set(&self, other: &IntegerSet) -> IntegerSet {
        IntegerSet::from_iter_dedup(
            self.elements
                .iter()
                .flat_map(|&a| other.elements.iter().map(move |&b| a - b)),
        )
    }

    pub fn iterated_sumset(&self, lambda: u32) -> Result<IntegerSet> {
        if lambda == 0 {
            return Err(Error::invalid("iterated sumset requires λ ≥ 1"));
        }
        let mut acc = self.clone();
        for _ in 1..lambda {
            acc = acc.sumset(self);
        }
        Ok(acc)
    }

    /// Reduction `x ↦ (x + shift) mod N`.
    pub fn reduce_mod(&self, modulus: u64, shift: i64) -> Result<ResidueSet> {
        ResidueSet::from_reduced(modulus, self.elements.iter().map(|&x| x + shift))
    }
}

impl fmt::Debug for IntegerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.elements)
    }
}

/// Either kind of set; the shared currency of the interchange format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnySet {
    Integers(IntegerSet),
    Residues(ResidueSet),
}

impl AnySet {
    pub fn len(&self) -> usize {
        match self {
            AnySet::Integers(s) => s.len(),
            AnySet::Residues(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn modulus(&self) -> Option<u64> {
        match self {
            AnySet::Integers(_) => None,
            AnySet::Residues(s) => Some(s.modulus()),
        }
    }
}

impl From<IntegerSet> for AnySet {
    fn from(s: IntegerSet) -> Self {
        AnySet::Integers(s)
    }
}

impl From<ResidueSet> for AnySet {
    fn from(s: ResidueSet) -> Self {
        AnySet::Residues(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MapContext {
    Integers,
    Modular(u64),
}

/// `x ↦ a·x + b`, invertible in its context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    scale: i64,
    shift: i64,
    context: MapContext,
}

impl AffineMap {
    pub fn integer(scale: i64, shift: i64) -> Result<Self> {
        if scale == 0 {
            return Err(Error::invalid("affine map over Z needs a nonzero scale"));
        }
        Ok(AffineMap {
            scale,
            shift,
            context: MapContext::Integers,
        })
    }

    /// Scale and shift are reduced into `[0, N)`.
    pub fn modular(scale: i64, shift: i64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::invalid("modulus must be positive"));
        }
        if mod_inverse(scale, modulus).is_none() {
            return Err(Error::invalid(format!(
                "scale {scale} is not a unit mod {modulus}"
            )));
        }
        Ok(AffineMap {
            scale: reduce(scale, modulus) as i64,
            shift: reduce(shift, modulus) as i64,
            context: MapContext::Modular(modulus),
        })
    }

    pub fn identity(context: MapContext) -> Self {
        AffineMap {
            scale: 1,
            shift: 0,
            context,
        }
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn context(&self) -> MapContext {
        self.context
    }

    pub fn apply_residues(&self, set: &ResidueSet) -> Result<ResidueSet> {
        match self.context {
            MapContext::Modular(n) if n == set.modulus() => {
                Ok(set.dilate(self.scale).translate(self.shift))
            }
            MapContext::Modular(n) => Err(Error::ModulusMismatch {
                left: n,
                right: set.modulus(),
            }),
            MapContext::Integers => Err(Error::ContextMismatch),
        }
    }

    pub fn apply_integers(&self, set: &IntegerSet) -> Result<IntegerSet> {
        match self.context {
            MapContext::Integers => Ok(set.dilate(self.scale)?.translate(self.shift)),
            MapContext::Modular(_) => Err(Error::ContextMismatch),
        }
    }

    /// Modular inverse map. Over `Z` only `±1` scales are invertible.
    pub fn inverse(&self) -> Option<AffineMap> {
        match self.context {
            MapContext::Modular(n) => {
                let inv = mod_inverse(self.scale, n)? as i64;
                let shift = reduce(-(inv as i128 * self.shift as i128 % n as i128) as i64, n);
                Some(AffineMap {
                    scale: inv,
                    shift: shift as i64,
                    context: self.context,
                })
            }
            MapContext::Integers => match self.scale {
                1 => Some(AffineMap { shift: -self.shift, ..*self }),
                -1 => Some(AffineMap { shift: self.shift, ..*self }),
                _ => None,
            },
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> Result<AffineMap> {
        if self.context != other.context {
            return Err(Error::ContextMismatch);
        }
        match self.context {
            MapContext::Integers => AffineMap::integer(
                self.scale * other.scale,
                self.scale * other.shift + self.shift,
            ),
            MapContext::Modular(n) => {
                let n128 = n as i128;
                let s = (self.scale as i128 * other.scale as i128).rem_euclid(n128);
                let t = (self.scale as i128 * other.shift as i128 + self.shift as i128)
                    .rem_euclid(n128);
                AffineMap::modular(s as i64, t as i64, n)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(n: u64, xs: &[u64]) -> ResidueSet {
        ResidueSet::new(n, xs.iter().copied()).unwrap()
    }

    fn is(xs: &[i64]) -> IntegerSet {
        IntegerSet::new(xs.iter().copied()).unwrap()
    }

    #[test]
    fn dilate_examples() {
        assert_eq!(rs(5, &[0, 1, 2]).dilate(1), rs(5, &[0, 1, 2]));
        assert_eq!(rs(5, &[0, 1, 2]).dilate(2), rs(5, &[0, 2, 4]));
        assert_eq!(rs(5, &[0, 1, 3]).dilate(2), rs(5, &[0, 1, 2]));
        assert!(is(&[1, 2]).dilate(0).is_err());
        assert_eq!(is(&[1, 2]).dilate(-3).unwrap(), is(&[-6, -3]));
    }

    #[test]
    fn difference_set_examples() {
        assert_eq!(is(&[0]).difference_set(&is(&[0])), is(&[0]));
        assert_eq!(
            is(&[0, 1, 3]).difference_set(&is(&[0, 1, 3])),
            is(&[-3, -2, -1, 0, 1, 2, 3])
        );
        assert_eq!(is(&[0, 1]).difference_set(&is(&[5])), is(&[-5, -4]));
        assert!(rs(5, &[0]).difference_set(&rs(7, &[0])).is_err());
    }

    #[test]
    fn iterated_sumset_examples() {
        assert_eq!(is(&[0, 1]).iterated_sumset(1).unwrap(), is(&[0, 1]));
        assert_eq!(is(&[0, 1]).iterated_sumset(2).unwrap(), is(&[0, 1, 2]));
        assert_eq!(is(&[0, 2]).iterated_sumset(3).unwrap(), is(&[0, 2, 4, 6]));
        assert!(is(&[0, 2]).iterated_sumset(0).is_err());
        assert_eq!(rs(5, &[0, 1]).iterated_sumset(4).unwrap(), rs(5, &[0, 1, 2, 3, 4]));
    }

    #[test]
    fn residue_validation() {
        assert!(ResidueSet::new(5, [5]).is_err());
        assert!(ResidueSet::new(5, [1, 1]).is_err());
        assert!(ResidueSet::new(0, []).is_err());
        assert!(IntegerSet::new([3, 3]).is_err());
        let s = rs(130, &[0, 64, 129]);
        assert_eq!(s.to_vec(), vec![0, 64, 129]);
        assert_eq!(s.complement().len(), 127);
    }

    #[test]
    fn affine_maps() {
        assert!(AffineMap::modular(2, 0, 4).is_err());
        assert!(AffineMap::integer(0, 1).is_err());
        let f = AffineMap::modular(3, 3, 7).unwrap();
        assert_eq!(f.apply_residues(&rs(7, &[0, 1])).unwrap(), rs(7, &[3, 6]));
        let g = f.inverse().unwrap();
        let id = g.compose(&f).unwrap();
        assert_eq!(id, AffineMap::identity(MapContext::Modular(7)));
        let h = AffineMap::integer(2, 7).unwrap();
        assert_eq!(
            h.apply_integers(&is(&[-3, -1, 0, 1, 3])).unwrap(),
            is(&[1, 5, 7, 9, 13])
        );
        assert!(h.inverse().is_none());
    }

    #[test]
    fn difference_set_symmetric_and_contains_zero() {
        let a = rs(11, &[1, 4, 5, 9]);
        let d = a.difference_set(&a).unwrap();
        assert!(d.contains(0));
        for x in d.iter() {
            assert!(d.contains((11 - x) % 11));
        }
    }
}

//! Canonical forms under affine symmetry and a transversal of affine orbits
//! of `n`-subsets of `Z/pZ`.
//!
//! Integer sets are normalized to `min = 0`, `gcd = 1` and the
//! lexicographically smaller of the set and its reflection. Residue sets are
//! encoded by the lexicographically least cyclic gap sequence over all unit
//! dilates and all starting points.

use std::cmp::Ordering;

use itertools::Itertools;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{binomial, is_prime};
use crate::error::{Error, Result};
use crate::sets::{AffineMap, AnySet, IntegerSet, ResidueSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerCanonical {
    pub representative: IntegerSet,
    /// Maps the representative onto the original set.
    pub from_representative: AffineMap,
}

impl IntegerCanonical {
    pub fn encoding(&self) -> &[i64] {
        self.representative.elements()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueCanonical {
    pub representative: ResidueSet,
    /// Cyclic gap sequence of the representative, starting at 0.
    pub encoding: Vec<u64>,
    /// Maps the original set onto the representative.
    pub to_representative: AffineMap,
    /// Number of affine maps fixing the set.
    pub stabilizer_order: u64,
}

impl ResidueCanonical {
    /// Orbit size under the full affine group `x ↦ ax + b`, `a` a unit.
    pub fn orbit_size(&self) -> u64 {
        let n = self.representative.modulus();
        n * euler_phi(n) / self.stabilizer_order
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CanonicalForm {
    Integers(IntegerCanonical),
    Residues(ResidueCanonical),
}

impl CanonicalForm {
    /// Context-tagged encoding; equal iff the sets are affinely equivalent.
    pub fn encoding(&self) -> Encoding {
        match self {
            CanonicalForm::Integers(c) => Encoding::Integers(c.encoding().to_vec()),
            CanonicalForm::Residues(c) => Encoding::Residues {
                modulus: c.representative.modulus(),
                gaps: c.encoding.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Encoding {
    Integers(Vec<i64>),
    Residues { modulus: u64, gaps: Vec<u64> },
}

pub fn canonicalize(set: &AnySet) -> Result<CanonicalForm> {
    match set {
        AnySet::Integers(s) => canonicalize_integers(s).map(CanonicalForm::Integers),
        AnySet::Residues(s) => canonicalize_residues(s).map(CanonicalForm::Residues),
    }
}

pub fn canonicalize_integers(set: &IntegerSet) -> Result<IntegerCanonical> {
    let (Some(min), Some(_)) = (set.min(), set.max()) else {
        return Err(Error::invalid("cannot canonicalize the empty set"));
    };
    let shifted: Vec<i64> = set.elements().iter().map(|&x| x - min).collect();
    let g = shifted.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if g == 0 {
        return Ok(IntegerCanonical {
            representative: IntegerSet::from_sorted_unchecked(vec![0]),
            from_representative: AffineMap::integer(1, min)?,
        });
    }
    let norm: Vec<i64> = shifted.iter().map(|&x| x / g).collect();
    let width = *norm.last().expect("nonempty");
    let reflected: Vec<i64> = norm.iter().rev().map(|&x| width - x).collect();
    if reflected < norm {
        Ok(IntegerCanonical {
            representative: IntegerSet::from_sorted_unchecked(reflected),
            from_representative: AffineMap::integer(-g, g * width + min)?,
        })
    } else {
        Ok(IntegerCanonical {
            representative: IntegerSet::from_sorted_unchecked(norm),
            from_representative: AffineMap::integer(g, min)?,
        })
    }
}

pub(crate) fn euler_phi(n: u64) -> u64 {
    (1..=n).filter(|&a| a.gcd(&n) == 1).count() as u64
}

fn cmp_rotation(gaps: &[u64], r: usize, best: &[u64]) -> Ordering {
    let n = gaps.len();
    for i in 0..n {
        match gaps[(r + i) % n].cmp(&best[i]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

pub fn canonicalize_residues(set: &ResidueSet) -> Result<ResidueCanonical> {
    if set.is_empty() {
        return Err(Error::invalid("cannot canonicalize the empty set"));
    }
    let modulus = set.modulus();
    let elems = set.to_vec();
    let n = elems.len();
    let mut best: Option<(Vec<u64>, i64, i64)> = None;
    let mut stabilizer = 0u64;
    let mut image = Vec::with_capacity(n);
    let mut gaps = vec![0u64; n];
    for a in 1..modulus {
        if a.gcd(&modulus) != 1 {
            continue;
        }
        image.clear();
        image.extend(
            elems
                .iter()
                .map(|&x| (x as u128 * a as u128 % modulus as u128) as u64),
        );
        image.sort_unstable();
        for i in 0..n {
            gaps[i] = if i + 1 < n {
                image[i + 1] - image[i]
            } else {
                image[0] + modulus - image[n - 1]
            };
        }
        for r in 0..n {
            let ord = match &best {
                None => Ordering::Less,
                Some((b, _, _)) => cmp_rotation(&gaps, r, b),
            };
            match ord {
                Ordering::Less => {
                    let rotated: Vec<u64> = (0..n).map(|i| gaps[(r + i) % n]).collect();
                    best = Some((rotated, a as i64, -(image[r] as i64)));
                    stabilizer = 1;
                }
                Ordering::Equal => stabilizer += 1,
                Ordering::Greater => {}
            }
        }
    }
    let (encoding, scale, shift) = best.expect("at least one unit");
    let mut elements = Vec::with_capacity(n);
    let mut acc = 0u64;
    for g in &encoding[..n - 1] {
        elements.push(acc);
        acc += g;
    }
    elements.push(acc);
    Ok(ResidueCanonical {
        representative: ResidueSet::new(modulus, elements)?,
        encoding,
        to_representative: AffineMap::modular(scale, shift, modulus)?,
        stabilizer_order: stabilizer,
    })
}

/// Finds `f` with `f(from) = to`, if the sets are affinely equivalent.
pub fn residue_affine_map_between(from: &ResidueSet, to: &ResidueSet) -> Result<Option<AffineMap>> {
    from.check_same(to)?;
    if from.len() != to.len() || from.is_empty() {
        return Ok(None);
    }
    let cf = canonicalize_residues(from)?;
    let ct = canonicalize_residues(to)?;
    if cf.encoding != ct.encoding {
        return Ok(None);
    }
    let back = ct
        .to_representative
        .inverse()
        .expect("modular maps are invertible");
    Ok(Some(back.compose(&cf.to_representative)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitRep {
    pub set: ResidueSet,
    pub orbit_size: u64,
}

/// One independently enumerable slice of the transversal: all candidate
/// sets whose third-smallest element is `third` (every orbit of size ≥ 2
/// has a representative containing 0 and 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransversalChunk {
    pub n: u64,
    pub modulus: u64,
    pub third: Option<u64>,
}

impl TransversalChunk {
    /// Candidate sets examined by this chunk.
    pub fn candidates(&self) -> u128 {
        match self.third {
            None => 1,
            Some(t) => binomial(self.modulus - t - 1, self.n - 3),
        }
    }

    pub fn representatives(&self) -> Vec<OrbitRep> {
        let mut out = Vec::new();
        self.for_each_representative(|rep| out.push(rep));
        out
    }

    pub fn for_each_representative(&self, mut f: impl FnMut(OrbitRep)) {
        let (n, modulus) = (self.n, self.modulus);
        let mut check = |elements: Vec<u64>| {
            let set = ResidueSet::new(modulus, elements).expect("valid residues");
            let canon = canonicalize_residues(&set).expect("nonempty");
            if canon.representative == set {
                let orbit_size = canon.orbit_size();
                f(OrbitRep { set, orbit_size });
            }
        };
        match self.third {
            None if n == 1 => check(vec![0]),
            None => check(vec![0, 1]),
            Some(t) => {
                for rest in ((t + 1)..modulus).combinations((n - 3) as usize) {
                    let mut elements = vec![0, 1, t];
                    elements.extend(rest);
                    check(elements);
                }
            }
        }
    }
}

/// Splits the transversal of affine orbits of `n`-subsets of `Z/pZ` into
/// chunks. Concatenating the chunks' outputs in order gives a deterministic
/// stream with one representative per orbit.
pub fn transversal_chunks(n: u64, modulus: u64) -> Result<Vec<TransversalChunk>> {
    if !is_prime(modulus) {
        return Err(Error::Unsupported(format!(
            "orbit transversal needs a prime modulus, got {modulus}"
        )));
    }
    if n == 0 || n > modulus {
        return Err(Error::invalid(format!(
            "cardinality {n} outside [1, {modulus}]"
        )));
    }
    if n <= 2 {
        return Ok(vec![TransversalChunk {
            n,
            modulus,
            third: None,
        }]);
    }
    Ok((2..=(modulus - (n - 2)))
        .map(|t| TransversalChunk {
            n,
            modulus,
            third: Some(t),
        })
        .collect())
}

/// Total number of candidates the transversal enumerates.
pub fn transversal_cost(n: u64, modulus: u64) -> u128 {
    if n <= 2 {
        1
    } else {
        binomial(modulus - 2, n - 2)
    }
}

pub fn affine_orbit_transversal(
    n: u64,
    modulus: u64,
) -> Result<impl Iterator<Item = OrbitRep>> {
    let chunks = transversal_chunks(n, modulus)?;
    Ok(chunks.into_iter().flat_map(|c| c.representatives()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, HashSet};

    fn rs(n: u64, xs: &[u64]) -> ResidueSet {
        ResidueSet::new(n, xs.iter().copied()).unwrap()
    }

    #[test]
    fn integer_examples() {
        let c = canonicalize_integers(&IntegerSet::new([3, 5, 7]).unwrap()).unwrap();
        assert_eq!(c.representative.elements(), &[0, 1, 2]);
        let s = IntegerSet::new([3, 5, 7]).unwrap();
        assert_eq!(c.from_representative.apply_integers(&c.representative).unwrap(), s);
        let single = canonicalize_integers(&IntegerSet::new([-4]).unwrap()).unwrap();
        assert_eq!(single.representative.elements(), &[0]);
        assert!(canonicalize_integers(&IntegerSet::default()).is_err());
        // reflection: {0,1,3} and {0,2,3}
        let a = canonicalize_integers(&IntegerSet::new([0, 1, 3]).unwrap()).unwrap();
        let b = canonicalize_integers(&IntegerSet::new([7, 5, 1]).unwrap()).unwrap();
        assert_eq!(a.representative, b.representative);
        let orig = IntegerSet::new([7, 5, 1]).unwrap();
        assert_eq!(b.from_representative.apply_integers(&b.representative).unwrap(), orig);
    }

    #[test]
    fn residue_examples() {
        let a = canonicalize_residues(&rs(5, &[0, 2, 4])).unwrap();
        let b = canonicalize_residues(&rs(5, &[0, 1, 2])).unwrap();
        assert_eq!(a.encoding, b.encoding);
        let c = canonicalize_residues(&rs(7, &[0, 1])).unwrap();
        let d = canonicalize_residues(&rs(7, &[3, 6])).unwrap();
        assert_eq!(c.encoding, d.encoding);
        assert!(canonicalize_residues(&ResidueSet::empty(7).unwrap()).is_err());
        let orig = rs(7, &[3, 6]);
        assert_eq!(d.to_representative.apply_residues(&orig).unwrap(), d.representative);
    }

    #[test]
    fn map_between() {
        let a = rs(11, &[0, 1, 3, 7]);
        let f = AffineMap::modular(4, 9, 11).unwrap();
        let b = f.apply_residues(&a).unwrap();
        let g = residue_affine_map_between(&a, &b).unwrap().unwrap();
        assert_eq!(g.apply_residues(&a).unwrap(), b);
    }

    #[test]
    fn transversal_small_cases() {
        assert_eq!(affine_orbit_transversal(1, 5).unwrap().count(), 1);
        assert_eq!(affine_orbit_transversal(2, 5).unwrap().count(), 1);
        let reps: Vec<_> = affine_orbit_transversal(3, 7).unwrap().collect();
        assert_eq!(reps.iter().map(|r| r.orbit_size).sum::<u64>(), 35);
        assert!(transversal_chunks(3, 9).is_err());
        assert!(transversal_chunks(0, 7).is_err());
    }

    /// Brute-force orbits by closing each subset under every affine map.
    fn brute_force_orbits(modulus: u64) -> HashMap<Vec<u64>, usize> {
        let mut orbit_of: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut next = 0;
        for mask in 1u32..(1 << modulus) {
            let elems: Vec<u64> = (0..modulus).filter(|&i| mask >> i & 1 == 1).collect();
            if orbit_of.contains_key(&elems) {
                continue;
            }
            for a in 1..modulus {
                if a.gcd(&modulus) != 1 {
                    continue;
                }
                for b in 0..modulus {
                    let mut img: Vec<u64> = elems.iter().map(|&x| (a * x + b) % modulus).collect();
                    img.sort_unstable();
                    orbit_of.insert(img, next);
                }
            }
            next += 1;
        }
        orbit_of
    }

    #[test]
    fn canonical_form_separates_orbits_exhaustively() {
        for modulus in 2..=11u64 {
            let orbits = brute_force_orbits(modulus);
            let mut enc_to_orbit: HashMap<Vec<u64>, usize> = HashMap::new();
            let mut orbit_to_enc: HashMap<usize, Vec<u64>> = HashMap::new();
            for (elems, &orbit) in &orbits {
                let enc = canonicalize_residues(&rs(modulus, elems)).unwrap().encoding;
                assert_eq!(*enc_to_orbit.entry(enc.clone()).or_insert(orbit), orbit);
                assert_eq!(*orbit_to_enc.entry(orbit).or_insert(enc.clone()), enc);
            }
        }
    }

    #[test]
    fn orbit_sizes_sum_to_binomials() {
        for modulus in [2u64, 3, 5, 7, 11] {
            for n in 1..=modulus {
                let reps: Vec<_> = affine_orbit_transversal(n, modulus).unwrap().collect();
                let total: u64 = reps.iter().map(|r| r.orbit_size).sum();
                assert_eq!(total as u128, binomial(modulus, n), "n={n} N={modulus}");
                let distinct: HashSet<_> = reps
                    .iter()
                    .map(|r| canonicalize_residues(&r.set).unwrap().encoding)
                    .collect();
                assert_eq!(distinct.len(), reps.len());
            }
        }
    }
}

//! Explicit set families: the extremal sets `E(k,m)` and `F(k,m)`, their
//! modular embeddings and complements, wrap-around optimization, the random
//! intersection construction, Behrend-type sphere slices and random sets.

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::count::t3;
use crate::error::{Error, Result};
use crate::sets::{IntegerSet, ResidueSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    E,
    F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FamilyTag {
    pub family: Family,
    pub k: u64,
    pub m: u64,
}

impl FamilyTag {
    pub fn new(family: Family, k: u64, m: u64) -> Result<Self> {
        if family == Family::F && k == 0 && m == 0 {
            return Err(Error::invalid("F(0,0) is empty"));
        }
        Ok(FamilyTag { family, k, m })
    }

    pub fn size(&self) -> u64 {
        match self.family {
            Family::E => 2 * self.k + 2 * self.m + 1,
            Family::F => 2 * self.k + 2 * self.m,
        }
    }

    /// All tags whose sets have exactly `n` elements, ordered by `k`.
    pub fn of_size(n: u64) -> Vec<FamilyTag> {
        if n == 0 {
            return Vec::new();
        }
        let (family, total) = if n % 2 == 1 {
            (Family::E, (n - 1) / 2)
        } else {
            (Family::F, n / 2)
        };
        (0..=total)
            .map(|k| FamilyTag {
                family,
                k,
                m: total - k,
            })
            .collect()
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({},{})", self.family, self.k, self.m)
    }
}

/// `E(k,m)` is the block `{−k,…,k}` flanked on each side by `m` further
/// points of step 2; `F(k,m)` is `E(k,m)` without its least element.
pub fn generate_family(tag: FamilyTag) -> Result<IntegerSet> {
    let FamilyTag { family, k, m } = FamilyTag::new(tag.family, tag.k, tag.m)?;
    let (k, m) = (k as i64, m as i64);
    let left = (1..=m).rev().map(|j| -k - 2 * j);
    let centre = -k..=k;
    let right = (1..=m).map(|j| k + 2 * j);
    let mut elements: Vec<i64> = left.chain(centre).chain(right).collect();
    if family == Family::F {
        elements.remove(0);
    }
    Ok(IntegerSet::new(elements).expect("family blocks are disjoint"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub set: ResidueSet,
    /// False when two elements collided mod `N`.
    pub injective: bool,
}

/// `x ↦ (x + shift) mod N`.
pub fn embed_mod(a: &IntegerSet, modulus: u64, shift: i64) -> Result<Embedding> {
    let set = a.reduce_mod(modulus, shift)?;
    let injective = set.len() == a.len();
    Ok(Embedding { set, injective })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WraparoundSet {
    pub tag: FamilyTag,
    /// `E(k,m)ᶜ` inside `Z/NZ`.
    pub set: ResidueSet,
    pub t3: u64,
}

impl WraparoundSet {
    pub fn density(&self) -> f64 {
        self.set.density()
    }

    pub fn normalized_t3(&self) -> f64 {
        let n = self.set.modulus() as f64;
        self.t3 as f64 / (n * n)
    }
}

fn require_prime(modulus: u64) -> Result<()> {
    if !is_prime(modulus) {
        return Err(Error::Unsupported(format!(
            "modulus {modulus} is not prime"
        )));
    }
    Ok(())
}

/// The complement of `E(k,m)` embedded in `Z/NZ`, with its exact `T₃`.
pub fn wraparound_complement(modulus: u64, k: u64, m: u64) -> Result<WraparoundSet> {
    require_prime(modulus)?;
    let tag = FamilyTag::new(Family::E, k, m)?;
    if tag.size() > modulus {
        return Err(Error::invalid(format!(
            "|E({k},{m})| = {} exceeds N = {modulus}",
            tag.size()
        )));
    }
    let e = embed_mod(&generate_family(tag)?, modulus, 0)?;
    if !e.injective {
        return Err(Error::invalid(format!(
            "E({k},{m}) collides with itself mod {modulus}"
        )));
    }
    let set = e.set.complement();
    let t3 = t3(&set);
    Ok(WraparoundSet { tag, set, t3 })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WraparoundOptimum {
    pub tag: FamilyTag,
    /// The embedded family set of size `n`.
    pub set: ResidueSet,
    pub t3: u64,
    /// `T₃` of the complement, counted directly.
    pub complement_t3: u64,
    /// Number of `(k, m)` splits whose embedding was injective.
    pub candidates: usize,
}

/// Scans every split `(k, m)` of the family of size `n` (E for odd `n`, F
/// for even `n`) and returns the embedding with the most progressions,
/// ties going to the smallest `k`.
pub fn optimize_wraparound(modulus: u64, n: u64) -> Result<WraparoundOptimum> {
    require_prime(modulus)?;
    if n == 0 || n > modulus {
        return Err(Error::invalid(format!("cardinality {n} outside [1, {modulus}]")));
    }
    let scored: Vec<(FamilyTag, ResidueSet, u64)> = FamilyTag::of_size(n)
        .into_par_iter()
        .filter_map(|tag| {
            let fam = generate_family(tag).ok()?;
            let e = embed_mod(&fam, modulus, 0).ok()?;
            e.injective.then(|| {
                let c = t3(&e.set);
                (tag, e.set, c)
            })
        })
        .collect();
    let candidates = scored.len();
    let (tag, set, best) = scored
        .into_iter()
        .reduce(|acc, x| if x.2 > acc.2 { x } else { acc })
        .ok_or_else(|| Error::invalid(format!("no injective family of size {n} mod {modulus}")))?;
    let complement_t3 = t3(&set.complement());
    Ok(WraparoundOptimum {
        tag,
        set,
        t3: best,
        complement_t3,
        candidates,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct IntersectConfig {
    pub trials: usize,
    pub seed: u64,
    /// Allowed relative shortfall of `|A ∩ (λB + μ)|` below `|A||B|/N`.
    pub tolerance: f64,
}

impl Default for IntersectConfig {
    fn default() -> Self {
        IntersectConfig {
            trials: 64,
            seed: 0,
            tolerance: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectTrial {
    pub lambda: u64,
    pub mu: u64,
    pub size: usize,
    pub t3: u64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectOutcome {
    pub lambda: u64,
    pub mu: u64,
    pub set: ResidueSet,
    pub t3: u64,
    /// False when no trial met the size constraint; the largest
    /// intersection is returned instead.
    pub feasible: bool,
    pub trials: Vec<IntersectTrial>,
}

/// Samples `A ∩ (λB + μ)` for seeded `(λ, μ)` and keeps the intersection
/// with the fewest progressions among those of near-expected size.
pub fn intersect_search(a: &ResidueSet, b: &ResidueSet, config: IntersectConfig) -> Result<IntersectOutcome> {
    a.check_same(b)?;
    let modulus = a.modulus();
    require_prime(modulus)?;
    if config.trials == 0 {
        return Err(Error::invalid("intersect search needs at least one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pairs: Vec<(u64, u64)> = (0..config.trials)
        .map(|_| (rng.gen_range(1..modulus.max(2)), rng.gen_range(0..modulus)))
        .collect();
    let target = (1.0 - config.tolerance) * (a.len() * b.len()) as f64;
    let trials: Vec<IntersectTrial> = pairs
        .par_iter()
        .map(|&(lambda, mu)| {
            let image = b.dilate(lambda as i64).translate(mu as i64);
            let inter = a.intersection(&image).expect("same modulus");
            IntersectTrial {
                lambda,
                mu,
                size: inter.len(),
                t3: t3(&inter),
                feasible: inter.len() as f64 * modulus as f64 >= target,
            }
        })
        .collect();
    let feasible = trials.iter().any(|t| t.feasible);
    let best = if feasible {
        trials
            .iter()
            .filter(|t| t.feasible)
            .min_by_key(|t| (t.t3, t.lambda, t.mu))
    } else {
        trials
            .iter()
            .min_by_key(|t| (std::cmp::Reverse(t.size), t.t3, t.lambda, t.mu))
    }
    .copied()
    .expect("at least one trial");
    let set = a.intersection(&b.dilate(best.lambda as i64).translate(best.mu as i64))?;
    Ok(IntersectOutcome {
        lambda: best.lambda,
        mu: best.mu,
        set,
        t3: best.t3,
        feasible,
        trials,
    })
}

fn behrend_vectors(dim: u32, base: u64) -> Result<impl Iterator<Item = Vec<u64>>> {
    if dim == 0 || base < 2 {
        return Err(Error::invalid("Behrend construction needs dim ≥ 1 and base ≥ 2"));
    }
    let total = base
        .checked_pow(dim)
        .filter(|&t| t <= 1 << 32)
        .ok_or_else(|| Error::invalid("Behrend cube too large to enumerate"))?;
    (2 * base)
        .checked_pow(dim)
        .filter(|&w| w <= i64::MAX as u64)
        .ok_or_else(|| Error::invalid("Behrend digits overflow i64"))?;
    Ok((0..total).map(move |mut idx| {
        let mut v = Vec::with_capacity(dim as usize);
        for _ in 0..dim {
            v.push(idx % base);
            idx /= base;
        }
        v
    }))
}

/// Digit vectors in `{0,…,q−1}^d` on the sphere `Σxᵢ² = r`, read in base
/// `2q` so that sums of two vectors never carry. The result has no
/// nontrivial three-term progression.
pub fn behrend_set(dim: u32, base: u64, radius_sq: u64) -> Result<IntegerSet> {
    let max_r = dim as u64 * (base - 1).pow(2);
    let vectors = behrend_vectors(dim, base)?;
    if radius_sq > max_r {
        return Err(Error::invalid(format!(
            "radius² {radius_sq} exceeds d(q−1)² = {max_r}"
        )));
    }
    let radix = 2 * base as i64;
    let elements = vectors
        .filter(|v| v.iter().map(|x| x * x).sum::<u64>() == radius_sq)
        .map(|v| v.iter().rev().fold(0i64, |acc, &x| acc * radix + x as i64));
    Ok(IntegerSet::from_iter_dedup(elements))
}

/// The radius² with the most lattice points, smallest on ties.
pub fn behrend_most_populous_radius(dim: u32, base: u64) -> Result<u64> {
    let max_r = dim as u64 * (base.max(2) - 1).pow(2);
    let mut counts = vec![0u64; max_r as usize + 1];
    for v in behrend_vectors(dim, base)? {
        counts[v.iter().map(|x| x * x).sum::<u64>() as usize] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    Ok(counts.iter().position(|&c| c == best).unwrap_or(0) as u64)
}

/// Uniform `n`-subset of `Z/NZ`, deterministic per seed.
pub fn random_set(n: u64, modulus: u64, seed: u64) -> Result<ResidueSet> {
    if n > modulus {
        return Err(Error::invalid(format!("cannot pick {n} residues mod {modulus}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = index::sample(&mut rng, modulus as usize, n as usize);
    ResidueSet::new(modulus, picked.into_iter().map(|x| x as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::half_square_ceil;
    use crate::count::{t3_integers, t3_naive};

    fn tag(f: Family, k: u64, m: u64) -> FamilyTag {
        FamilyTag::new(f, k, m).unwrap()
    }

    #[test]
    fn family_examples() {
        assert_eq!(generate_family(tag(Family::E, 0, 0)).unwrap().elements(), &[0]);
        assert_eq!(
            generate_family(tag(Family::E, 1, 1)).unwrap().elements(),
            &[-3, -1, 0, 1, 3]
        );
        assert_eq!(generate_family(tag(Family::F, 1, 1)).unwrap().elements(), &[-1, 0, 1, 3]);
        assert_eq!(
            generate_family(tag(Family::F, 1, 3)).unwrap().elements(),
            &[-5, -3, -1, 0, 1, 3, 5, 7]
        );
        assert!(FamilyTag::new(Family::F, 0, 0).is_err());
    }

    #[test]
    fn family_sizes_and_counts() {
        for k in 0..=50 {
            for m in 0..=50 {
                let e = generate_family(tag(Family::E, k, m)).unwrap();
                assert_eq!(e.len() as u64, 2 * k + 2 * m + 1);
                if k + m > 0 {
                    let f = generate_family(tag(Family::F, k, m)).unwrap();
                    assert_eq!(f.len() as u64, 2 * k + 2 * m);
                }
            }
        }
        for k in 0..=20 {
            for m in 0..=20 {
                let e = generate_family(tag(Family::E, k, m)).unwrap();
                assert_eq!(t3_integers(&e).t3, half_square_ceil(e.len() as u64));
                if k + m > 0 {
                    let f = generate_family(tag(Family::F, k, m)).unwrap();
                    assert_eq!(t3_integers(&f).t3, half_square_ceil(f.len() as u64));
                }
            }
        }
    }

    #[test]
    fn embed_examples() {
        let e11 = generate_family(tag(Family::E, 1, 1)).unwrap();
        let emb = embed_mod(&e11, 23, 0).unwrap();
        assert!(emb.injective);
        assert_eq!(emb.set.to_vec(), vec![0, 1, 3, 20, 22]);
        assert_eq!(t3_naive(&emb.set, &emb.set, &emb.set).unwrap(), 13);
        let emb = embed_mod(&IntegerSet::new([0, 1, 2]).unwrap(), 3, 0).unwrap();
        assert_eq!(emb.set, ResidueSet::full(3).unwrap());
        assert_eq!(t3(&emb.set), 9);
        let emb = embed_mod(&IntegerSet::new([0]).unwrap(), 17, 4).unwrap();
        assert_eq!(emb.set.to_vec(), vec![4]);
        let emb = embed_mod(&IntegerSet::new([0, 5]).unwrap(), 5, 0).unwrap();
        assert!(!emb.injective);
    }

    #[test]
    fn wraparound_examples() {
        let w = wraparound_complement(5, 0, 0).unwrap();
        assert_eq!(w.set.to_vec(), vec![1, 2, 3, 4]);
        assert_eq!(w.t3, 12);
        assert!(wraparound_complement(5, 2, 1).is_err());
        assert!(wraparound_complement(9, 0, 0).is_err());
        // No wrap: E(k,m) itself keeps ⌈n²/2⌉.
        let e = embed_mod(&generate_family(tag(Family::E, 3, 2)).unwrap(), 101, 0).unwrap();
        assert_eq!(t3(&e.set), half_square_ceil(11));
    }

    #[test]
    fn optimize_examples() {
        let small = optimize_wraparound(101, 11).unwrap();
        assert_eq!(small.t3, half_square_ceil(11));
        let four = optimize_wraparound(5, 4).unwrap();
        assert_eq!(four.t3, 12);
        let full = optimize_wraparound(7, 7).unwrap();
        assert_eq!(full.t3, 49);
        assert!(optimize_wraparound(7, 8).is_err());
    }

    #[test]
    fn intersect_examples() {
        let a = random_set(40, 101, 3).unwrap();
        let full = ResidueSet::full(101).unwrap();
        let out = intersect_search(&a, &full, IntersectConfig { trials: 5, seed: 1, tolerance: 0.05 }).unwrap();
        assert_eq!(out.set, a);
        assert_eq!(out.t3, t3(&a));
        let cfg = IntersectConfig { trials: 1, seed: 9, tolerance: 0.05 };
        let b = random_set(50, 101, 4).unwrap();
        let x = intersect_search(&a, &b, cfg).unwrap();
        let y = intersect_search(&a, &b, cfg).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.trials.len(), 1);
        assert!(intersect_search(&a, &random_set(3, 103, 0).unwrap(), cfg).is_err());
    }

    #[test]
    fn behrend_examples() {
        for q in 2..6 {
            assert_eq!(behrend_set(1, q, 1).unwrap().elements(), &[1]);
        }
        assert_eq!(behrend_set(1, 5, 9).unwrap().elements(), &[3]);
        assert_eq!(behrend_set(2, 3, 1).unwrap().elements(), &[1, 6]);
        assert!(behrend_set(2, 3, 9).is_err());
        assert!(behrend_set(2, 3, 3).unwrap().is_empty());
        for d in 1..=6u32 {
            for q in 2..=(12 / d as u64) {
                for r in 0..=(d as u64 * (q - 1).pow(2)) {
                    let s = behrend_set(d, q, r).unwrap();
                    assert_eq!(t3_integers(&s).combinatorial, 0, "d={d} q={q} r={r}");
                }
            }
        }
        assert_eq!(behrend_most_populous_radius(2, 3).unwrap(), 1);
    }

    #[test]
    fn random_examples() {
        assert_eq!(random_set(13, 13, 5).unwrap(), ResidueSet::full(13).unwrap());
        assert!(random_set(0, 13, 5).unwrap().is_empty());
        assert!(random_set(14, 13, 5).is_err());
        assert_eq!(random_set(6, 97, 11).unwrap(), random_set(6, 97, 11).unwrap());
        assert_eq!(random_set(6, 97, 11).unwrap().len(), 6);
    }
}

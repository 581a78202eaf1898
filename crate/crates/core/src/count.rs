//! Exact counts of three-term progressions, the trilinear form `T₃`,
//! additive energy and the doubling constant.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ntt;
use crate::sets::{IntegerSet, ResidueSet};

/// Breakdown of a `T₃` count into trivial (`d = 0`) and combinatorial
/// progressions, each combinatorial one being counted twice by `T₃`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub t3: u64,
    pub trivial: u64,
    pub combinatorial: u64,
}

/// Number of pairs `(x, d)` with `x ∈ A₁`, `x + d ∈ A₂`, `x + 2d ∈ A₃`,
/// straight from the definition.
pub fn t3_naive(a1: &ResidueSet, a2: &ResidueSet, a3: &ResidueSet) -> Result<u64> {
    a1.check_same(a2)?;
    a1.check_same(a3)?;
    let n = a1.modulus();
    let mut count = 0u64;
    for x in a1.iter() {
        for d in 0..n {
            let y = (x + d) % n;
            if a2.contains(y) && a3.contains((y + d) % n) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `Σ_{y ∈ A₂} r(2y)` where `r = 1_{A₁} * 1_{A₃}` is computed by an exact
/// number-theoretic transform.
pub fn t3_fast(a1: &ResidueSet, a2: &ResidueSet, a3: &ResidueSet) -> Result<u64> {
    a1.check_same(a2)?;
    a1.check_same(a3)?;
    let n = a1.modulus();
    if a1.is_empty() || a2.is_empty() || a3.is_empty() {
        return Ok(0);
    }
    let r = if ntt::supports(n as usize) {
        let f1 = a1.indicator();
        if a1 == a3 {
            ntt::cyclic_convolution(&f1, &f1)
        } else {
            ntt::cyclic_convolution(&f1, &a3.indicator())
        }
    } else {
        pair_sums(a1, a3)
    };
    Ok(a2.iter().map(|y| r[((2 * y as u128) % n as u128) as usize]).sum())
}

fn pair_sums(a: &ResidueSet, b: &ResidueSet) -> Vec<u64> {
    let n = a.modulus();
    let mut r = vec![0u64; n as usize];
    let bs = b.to_vec();
    for x in a.iter() {
        for &z in &bs {
            r[((x + z) % n) as usize] += 1;
        }
    }
    r
}

/// `T₃(A) = T₃(A, A, A)` via the fast path.
pub fn t3(a: &ResidueSet) -> u64 {
    t3_fast(a, a, a).expect("same modulus")
}

/// Progressions with `d = N/2` in even moduli: `(x, x + N/2, x)`.
fn half_period_pairs(a: &ResidueSet) -> u64 {
    let n = a.modulus();
    if n % 2 == 1 {
        return 0;
    }
    a.iter().filter(|&x| a.contains((x + n / 2) % n)).count() as u64
}

/// For odd `N` this satisfies `t3 = trivial + 2·combinatorial`. For even
/// `N` the self-reverse progressions `(x, x + N/2, x)` are excluded from
/// both parts.
pub fn count_report(a: &ResidueSet) -> CountReport {
    let t3 = t3(a);
    let trivial = a.len() as u64;
    let combinatorial = (t3 - trivial - half_period_pairs(a)) / 2;
    CountReport {
        t3,
        trivial,
        combinatorial,
    }
}

/// Midpoint enumeration over `Z`: each ordered pair `(x, z)` with even sum
/// contributes when `(x + z)/2 ∈ A`.
pub fn t3_integers(a: &IntegerSet) -> CountReport {
    let e = a.elements();
    let mut combinatorial = 0u64;
    for i in 0..e.len() {
        for j in (i + 1)..e.len() {
            let s = e[i] + e[j];
            if s % 2 == 0 && a.contains(s / 2) {
                combinatorial += 1;
            }
        }
    }
    let trivial = e.len() as u64;
    CountReport {
        t3: trivial + 2 * combinatorial,
        trivial,
        combinatorial,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MidpointBound {
    pub value: u64,
    pub summation: u64,
}

/// `n + 2 Σ_j min(j − 1, n − j)`, which equals `⌈n²/2⌉`.
pub fn midpoint_upper_bound(n: u64) -> MidpointBound {
    let summation = n + 2 * (1..=n).map(|j| (j - 1).min(n - j)).sum::<u64>();
    let value = crate::arith::half_square_ceil(n);
    assert_eq!(summation, value, "midpoint sum disagrees with ⌈n²/2⌉ at n={n}");
    MidpointBound { value, summation }
}

/// Integer-valued function on `Z/NZ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    modulus: u64,
    weights: Vec<i64>,
}

impl WeightVector {
    pub fn new(weights: Vec<i64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("weight vector needs a positive modulus"));
        }
        Ok(WeightVector {
            modulus: weights.len() as u64,
            weights,
        })
    }

    pub fn constant(modulus: u64, value: i64) -> Result<Self> {
        Self::new(vec![value; modulus as usize])
    }

    pub fn indicator(set: &ResidueSet) -> Self {
        WeightVector {
            modulus: set.modulus(),
            weights: set.indicator().into_iter().map(|x| x as i64).collect(),
        }
    }

    pub fn scaled(&self, c: i64) -> Self {
        WeightVector {
            modulus: self.modulus,
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }
}

/// `Σ_{x,d} f₁(x) f₂(x+d) f₃(x+2d)`.
pub fn t3_trilinear(f1: &WeightVector, f2: &WeightVector, f3: &WeightVector) -> Result<i128> {
    for f in [f2, f3] {
        if f.modulus != f1.modulus {
            return Err(Error::ModulusMismatch {
                left: f1.modulus,
                right: f.modulus,
            });
        }
    }
    let n = f1.modulus as usize;
    let mut total = 0i128;
    for x in 0..n {
        let w1 = f1.weights[x] as i128;
        if w1 == 0 {
            continue;
        }
        for d in 0..n {
            let y = (x + d) % n;
            let z = (y + d) % n;
            total += w1 * f2.weights[y] as i128 * f3.weights[z] as i128;
        }
    }
    Ok(total)
}

/// Set operations the energy lemmas need, shared by both contexts.
pub trait AdditiveSet: Sized + Clone {
    fn size(&self) -> usize;
    fn sumset_with(&self, other: &Self) -> Result<Self>;
    fn difference_with(&self, other: &Self) -> Result<Self>;
    fn union_with(&self, other: &Self) -> Result<Self>;
    /// `E(A, B) = #{a₁ + b₁ = a₂ + b₂}`.
    fn energy(&self, other: &Self) -> Result<u64>;
    /// `max_x |A ∩ (B + x)|`.
    fn max_translate_overlap(&self, other: &Self) -> Result<u64>;
}

impl AdditiveSet for ResidueSet {
    fn size(&self) -> usize {
        self.len()
    }

    fn sumset_with(&self, other: &Self) -> Result<Self> {
        self.sumset(other)
    }

    fn difference_with(&self, other: &Self) -> Result<Self> {
        self.difference_set(other)
    }

    fn union_with(&self, other: &Self) -> Result<Self> {
        self.union(other)
    }

    fn energy(&self, other: &Self) -> Result<u64> {
        self.check_same(other)?;
        Ok(pair_sums(self, other).iter().map(|r| r * r).sum())
    }

    fn max_translate_overlap(&self, other: &Self) -> Result<u64> {
        self.check_same(other)?;
        Ok(pair_sums(self, &other.negate()).into_iter().max().unwrap_or(0))
    }
}

fn run_lengths(mut v: Vec<i64>) -> impl Iterator<Item = u64> {
    v.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        out.push((j - i) as u64);
        i = j;
    }
    out.into_iter()
}

impl AdditiveSet for IntegerSet {
    fn size(&self) -> usize {
        self.len()
    }

    fn sumset_with(&self, other: &Self) -> Result<Self> {
        Ok(self.sumset(other))
    }

    fn difference_with(&self, other: &Self) -> Result<Self> {
        Ok(self.difference_set(other))
    }

    fn union_with(&self, other: &Self) -> Result<Self> {
        Ok(self.union(other))
    }

    fn energy(&self, other: &Self) -> Result<u64> {
        let sums = self
            .elements()
            .iter()
            .flat_map(|&a| other.elements().iter().map(move |&b| a + b))
            .collect();
        Ok(run_lengths(sums).map(|r| r * r).sum())
    }

    fn max_translate_overlap(&self, other: &Self) -> Result<u64> {
        let diffs = self
            .elements()
            .iter()
            .flat_map(|&a| other.elements().iter().map(move |&b| a - b))
            .collect();
        Ok(run_lengths(diffs).max().unwrap_or(0))
    }
}

pub fn additive_energy<S: AdditiveSet>(a: &S, b: &S) -> Result<u64> {
    a.energy(b)
}

/// `δ[A] = |A − A| / |A|`.
pub fn doubling_delta<S: AdditiveSet>(a: &S) -> Result<Ratio<u64>> {
    if a.size() == 0 {
        return Err(Error::invalid("doubling constant of the empty set"));
    }
    let d = a.difference_with(a)?;
    Ok(Ratio::new(d.size() as u64, a.size() as u64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ComplementCheck {
    pub lhs: u128,
    pub rhs: u128,
    pub equal: bool,
}

/// Compares `T₃(A) + T₃(Aᶜ)` with `N² − 3nN + 3n²`. Returns `None` when
/// `N` has 2- or 3-torsion and the identity does not apply.
pub fn complement_identity_check(a: &ResidueSet) -> Option<ComplementCheck> {
    let n_mod = a.modulus();
    if n_mod.is_multiple_of(2) || n_mod.is_multiple_of(3) {
        return None;
    }
    let lhs = t3(a) as u128 + t3(&a.complement()) as u128;
    let rhs = complement_total(a.len() as u64, n_mod);
    Some(ComplementCheck {
        lhs,
        rhs,
        equal: lhs == rhs,
    })
}

/// `N² − 3nN + 3n²`, the value of `T₃(A) + T₃(Aᶜ)` for `|A| = n`.
pub fn complement_total(n: u64, modulus: u64) -> u128 {
    let (n, m) = (n as i128, modulus as i128);
    (m * m - 3 * n * m + 3 * n * n) as u128
}

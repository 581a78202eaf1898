//! Rectification by exhaustive dilation, a structure-decomposition heuristic
//! with an exact condition verifier, and checkers for the energy
//! inequalities behind the modular extremal theorem.

use num_bigint::BigUint;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{half_square_ceil, is_prime, mod_inverse};
use crate::count::{doubling_delta, t3, t3_fast, AdditiveSet};
use crate::error::{Error, Result};
use crate::search::{classify_extremal, ClassificationResult};
use crate::sets::{AnySet, ResidueSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RectificationResult {
    pub dilator: u64,
    /// Start of the cyclic arc `[offset, offset + arc_length]` holding the
    /// covered elements of `dilator · A`.
    pub offset: u64,
    pub arc_length: u64,
    pub covered: u64,
    pub size: u64,
}

impl RectificationResult {
    pub fn covered_fraction(&self) -> Ratio<u64> {
        Ratio::new(self.covered, self.size)
    }
}

fn required_count(n: usize, coverage: f64) -> usize {
    ((coverage * n as f64 - 1e-9).ceil() as usize).clamp(1, n)
}

/// Shortest cyclic arc holding `need` points of the sorted residues `s`.
fn shortest_arc(s: &[u64], need: usize, modulus: u64) -> (u64, u64) {
    let n = s.len();
    let mut best = (u64::MAX, 0);
    for i in 0..n {
        let j = i + need - 1;
        let len = if j < n { s[j] - s[i] } else { s[j - n] + modulus - s[i] };
        if len < best.0 {
            best = (len, s[i]);
        }
    }
    best
}

/// Scans every unit `d` for the dilate `d·A` whose shortest arc covering
/// `coverage·|A|` elements is shortest. Ties go to the smallest `d`, then
/// the smallest offset.
pub fn rectify(a: &ResidueSet, coverage: f64) -> Result<RectificationResult> {
    let modulus = a.modulus();
    if !is_prime(modulus) {
        return Err(Error::Unsupported(format!("rectification needs a prime modulus, got {modulus}")));
    }
    if a.is_empty() {
        return Err(Error::invalid("cannot rectify the empty set"));
    }
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::invalid(format!("coverage {coverage} outside (0, 1]")));
    }
    let elems = a.to_vec();
    let need = required_count(elems.len(), coverage);
    let (arc_length, dilator, offset) = (1..modulus)
        .into_par_iter()
        .map(|d| {
            let mut s: Vec<u64> = elems
                .iter()
                .map(|&x| ((x as u128 * d as u128) % modulus as u128) as u64)
                .collect();
            s.sort_unstable();
            let (len, off) = shortest_arc(&s, need, modulus);
            (len, d, off)
        })
        .min()
        .expect("prime modulus has units");
    Ok(RectificationResult {
        dilator,
        offset,
        arc_length,
        covered: need as u64,
        size: elems.len() as u64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionParams {
    pub epsilon: f64,
    pub epsilon_prime: f64,
    /// Dilation range `{1, …, L}` used by the energy conditions.
    pub l: u32,
    /// Smallest cluster the heuristic accepts as a part.
    pub min_part_size: usize,
}

impl Default for DecompositionParams {
    fn default() -> Self {
        DecompositionParams {
            epsilon: 0.01,
            epsilon_prime: 0.1,
            l: 2,
            min_part_size: 4,
        }
    }
}

impl DecompositionParams {
    fn validate(&self) -> Result<()> {
        let open = |x: f64| x > 0.0 && x < 0.5;
        if !open(self.epsilon) || !open(self.epsilon_prime) {
            return Err(Error::invalid("epsilon and epsilon' must lie in (0, 1/2)"));
        }
        if self.l == 0 {
            return Err(Error::invalid("L must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub parts: Vec<ResidueSet>,
    pub noise: ResidueSet,
    pub params: DecompositionParams,
}

impl Decomposition {
    /// Checks that the parts are nonempty and that parts and noise are
    /// pairwise disjoint subsets of one group.
    pub fn new(parts: Vec<ResidueSet>, noise: ResidueSet, params: DecompositionParams) -> Result<Self> {
        params.validate()?;
        let mut seen = ResidueSet::empty(noise.modulus())?;
        for p in &parts {
            if p.is_empty() {
                return Err(Error::invalid("decomposition parts must be nonempty"));
            }
            if !seen.is_disjoint(p)? {
                return Err(Error::invalid("decomposition parts must be disjoint"));
            }
            seen = seen.union(p)?;
        }
        if !seen.is_disjoint(&noise)? {
            return Err(Error::invalid("noise must be disjoint from the parts"));
        }
        Ok(Decomposition { parts, noise, params })
    }

    pub fn whole(&self) -> ResidueSet {
        self.parts
            .iter()
            .fold(self.noise.clone(), |acc, p| acc.union(p).expect("same modulus"))
    }
}

/// Gap-≤2 run of `d·R` as `(size, span, start)`.
type Run = (u64, u64, u64);

/// Orders runs by density `size²/(span+1)`, then size, then dilator and
/// start; a total order, so parallel reduction is deterministic.
fn denser(a: (Run, u64), b: (Run, u64)) -> (Run, u64) {
    let ((sa, pa, oa), da) = a;
    let ((sb, pb, ob), db) = b;
    let lhs = sa as u128 * sa as u128 * (pb as u128 + 1);
    let rhs = sb as u128 * sb as u128 * (pa as u128 + 1);
    let key_a = (std::cmp::Reverse(lhs), std::cmp::Reverse(sa), da, oa);
    let key_b = (std::cmp::Reverse(rhs), std::cmp::Reverse(sb), db, ob);
    if key_a <= key_b { a } else { b }
}

fn runs_of(s: &[u64], modulus: u64) -> Vec<Run> {
    let n = s.len();
    let gap = |i: usize| {
        let (a, b) = (s[i], s[(i + 1) % n]);
        if b > a { b - a } else { b + modulus - a }
    };
    if n == 1 || (0..n).all(|i| gap(i) <= 2) {
        if n == 1 {
            return vec![(1, 0, s[0])];
        }
        let widest = (0..n).max_by_key(|&i| (gap(i), std::cmp::Reverse(i))).expect("nonempty");
        return vec![(n as u64, modulus - gap(widest), s[(widest + 1) % n])];
    }
    // begin just after a large gap so no run wraps the cut
    let cut = (0..n).find(|&i| gap(i) > 2).expect("some large gap");
    let mut out = Vec::new();
    let mut run_start = (cut + 1) % n;
    let mut len = 1u64;
    let mut span = 0u64;
    for step in 1..=n {
        let i = (cut + step) % n;
        if step < n && gap(i) <= 2 {
            len += 1;
            span += gap(i);
        } else {
            out.push((len, span, s[run_start]));
            run_start = (i + 1) % n;
            len = 1;
            span = 0;
        }
    }
    out
}

/// Densest gap-≤2 run over all dilates `d·R`, mapped back to `R`.
fn best_cluster(r: &ResidueSet) -> Option<ResidueSet> {
    let modulus = r.modulus();
    let elems = r.to_vec();
    if elems.is_empty() {
        return None;
    }
    let ((size, span, start), d) = (1..modulus)
        .into_par_iter()
        .map(|d| {
            let mut s: Vec<u64> = elems
                .iter()
                .map(|&x| ((x as u128 * d as u128) % modulus as u128) as u64)
                .collect();
            s.sort_unstable();
            runs_of(&s, modulus)
                .into_iter()
                .map(|run| (run, d))
                .reduce(denser)
                .expect("nonempty")
        })
        .reduce_with(denser)
        .expect("prime modulus has units");
    let inv = mod_inverse(d as i64, modulus).expect("unit");
    let dilated = r.dilate(d as i64);
    let picked: Vec<u64> = (0..=span)
        .map(|t| (start + t) % modulus)
        .filter(|&x| dilated.contains(x))
        .collect();
    debug_assert_eq!(picked.len() as u64, size);
    let part = ResidueSet::new(modulus, picked).expect("distinct residues");
    Some(part.dilate(inv as i64))
}

fn max_dilated_energy(a: &ResidueSet, b: &ResidueSet, l: u32) -> u64 {
    let mut best = 0;
    for la in 1..=l as i64 {
        let da = a.dilate(la);
        for lb in 1..=l as i64 {
            best = best.max(da.energy(&b.dilate(lb)).expect("same modulus"));
        }
    }
    best
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite parameter")
}

/// `E ≤ ε|A|^{3/2}|B|^{3/2}`, decided exactly by squaring.
fn energy_within(energy: u64, eps: f64, a: usize, b: usize) -> bool {
    let e = BigRational::from_integer(energy.into());
    let ab3 = BigRational::from_integer((a as u64).pow(3).into())
        * BigRational::from_integer((b as u64).pow(3).into());
    let eps = exact(eps);
    &e * &e <= &eps * &eps * ab3
}

/// Greedy heuristic: peel off the largest gap-≤2 cluster over all dilates
/// until the remainder has small energy against `A` or no cluster reaches
/// the size threshold, then merge parts that still communicate.
pub fn decompose_heuristic(a: &ResidueSet, params: DecompositionParams) -> Result<Decomposition> {
    params.validate()?;
    if !is_prime(a.modulus()) {
        return Err(Error::Unsupported("decomposition needs a prime modulus".into()));
    }
    let n = a.len();
    let mut parts = Vec::new();
    let mut rest = a.clone();
    while !rest.is_empty() {
        let noise_energy = max_dilated_energy(&rest, a, params.l);
        let bound = exact(params.epsilon) * BigRational::from_integer((n as u64).pow(3).into());
        if BigRational::from_integer(noise_energy.into()) <= bound {
            break;
        }
        let Some(part) = best_cluster(&rest) else { break };
        if part.len() < params.min_part_size.max(1) {
            break;
        }
        rest = rest.difference(&part)?;
        parts.push(part);
    }
    loop {
        let mut merge = None;
        'outer: for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                let e = max_dilated_energy(&parts[i], &parts[j], params.l);
                if !energy_within(e, params.epsilon_prime, parts[i].len(), parts[j].len()) {
                    merge = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = merge else { break };
        let pj = parts.remove(j);
        parts[i] = parts[i].union(&pj)?;
    }
    Decomposition::new(parts, rest, params)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub total: u64,
    pub part_sizes: Vec<u64>,
    /// `|A| / |Aᵢ|`, the smallest `F₁` each part satisfies.
    pub achieved_f1: Vec<f64>,
    /// `δ[Aᵢ]`, the smallest `F₂` each part satisfies.
    pub doubling: Vec<f64>,
    /// `max_{λᵢ,λⱼ ≤ L} E(λᵢ·Aᵢ, λⱼ·Aⱼ)`.
    pub cross_energy: Vec<Vec<u64>>,
    /// The same, divided by `|Aᵢ|^{3/2}|Aⱼ|^{3/2}`.
    pub cross_normalized: Vec<Vec<f64>>,
    pub cross_holds: bool,
    /// `max_{λ₀,λ ≤ L} E(λ₀·A₀, λ·A)`.
    pub noise_energy: u64,
    /// The same, divided by `|A|³`.
    pub noise_normalized: f64,
    pub noise_holds: bool,
}

/// Evaluates the four decomposition conditions exactly. Largeness and
/// structure have no explicit thresholds, so only their achieved values are
/// reported; non-communication and noise are decided against `ε′` and `ε`.
pub fn verify_decomposition(d: &Decomposition) -> Result<ConditionReport> {
    let whole = d.whole();
    let n = whole.len() as u64;
    let l = d.params.l;
    let k = d.parts.len();
    let sizes: Vec<u64> = d.parts.iter().map(|p| p.len() as u64).collect();
    let doubling = d
        .parts
        .iter()
        .map(|p| doubling_delta(p).map(|r| *r.numer() as f64 / *r.denom() as f64))
        .collect::<Result<Vec<_>>>()?;
    let mut cross = vec![vec![0u64; k]; k];
    let mut cross_norm = vec![vec![0f64; k]; k];
    let mut cross_holds = true;
    for i in 0..k {
        for j in i..k {
            let e = max_dilated_energy(&d.parts[i], &d.parts[j], l);
            let norm = e as f64 / ((sizes[i] * sizes[j]) as f64).powf(1.5);
            cross[i][j] = e;
            cross[j][i] = e;
            cross_norm[i][j] = norm;
            cross_norm[j][i] = norm;
            if i != j && !energy_within(e, d.params.epsilon_prime, sizes[i] as usize, sizes[j] as usize) {
                cross_holds = false;
            }
        }
    }
    let noise_energy = if d.noise.is_empty() {
        0
    } else {
        max_dilated_energy(&d.noise, &whole, l)
    };
    let cube = n.pow(3);
    let noise_holds = n == 0
        || BigRational::new(noise_energy.into(), cube.into()) <= exact(d.params.epsilon);
    Ok(ConditionReport {
        total: n,
        achieved_f1: sizes.iter().map(|&s| n as f64 / s as f64).collect(),
        part_sizes: sizes,
        doubling,
        cross_energy: cross,
        cross_normalized: cross_norm,
        cross_holds,
        noise_energy,
        noise_normalized: if n == 0 { 0.0 } else { noise_energy as f64 / cube as f64 },
        noise_holds,
    })
}

/// Both sides of an inequality `lhs ≤ rhs`, computed exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(lhs: BigRational, rhs: BigRational) -> Self {
        let holds = lhs <= rhs;
        InequalityCheck { lhs, rhs, holds }
    }

    fn from_uint(lhs: BigUint, rhs: BigUint) -> Self {
        Self::new(BigRational::from_integer(lhs.into()), BigRational::from_integer(rhs.into()))
    }
}

/// `T₃(A₁,A₂,A₃)⁶ ≤ |A₁||A₂||A₃| · E(2·A₂, A₃) · E(A₁, A₃) · E(A₁, 2·A₂)`.
pub fn check_t3_energy_inequality(a1: &ResidueSet, a2: &ResidueSet, a3: &ResidueSet) -> Result<InequalityCheck> {
    a1.check_same(a2)?;
    a1.check_same(a3)?;
    if a1.modulus().is_multiple_of(2) {
        return Err(Error::Unsupported("the energy bound needs an odd modulus".into()));
    }
    let t = BigUint::from(t3_fast(a1, a2, a3)?);
    let lhs = t.pow(6);
    let two_a2 = a2.dilate(2);
    let rhs = BigUint::from(a1.len() as u64)
        * BigUint::from(a2.len() as u64)
        * BigUint::from(a3.len() as u64)
        * BigUint::from(two_a2.energy(a3)?)
        * BigUint::from(a1.energy(a3)?)
        * BigUint::from(a1.energy(&two_a2)?);
    Ok(InequalityCheck::from_uint(lhs, rhs))
}

/// The three elementary energy bounds for one pair of sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyLemmaCheck {
    pub energy: u64,
    /// `E ≤ |A|²|B|`, `E ≤ |B|²|A|`, `E² ≤ |A|³|B|³`.
    pub size_bounds: [InequalityCheck; 3],
    /// `E/(|A||B|) ≤ max_x |A ∩ (B + x)|`.
    pub overlap: InequalityCheck,
    /// `|A|²|B|²/|A+B| ≤ E` and `|A|²|B|²/|A−B| ≤ E`.
    pub sumset: [InequalityCheck; 2],
}

impl EnergyLemmaCheck {
    pub fn holds(&self) -> bool {
        self.size_bounds.iter().chain(&self.sumset).all(|c| c.holds) && self.overlap.holds
    }
}

pub fn check_energy_lemma<S: AdditiveSet>(a: &S, b: &S) -> Result<EnergyLemmaCheck> {
    if a.size() == 0 || b.size() == 0 {
        return Err(Error::invalid("energy lemma checks need nonempty sets"));
    }
    let e = a.energy(b)?;
    let (na, nb) = (a.size() as u64, b.size() as u64);
    let int = |x: u128| BigRational::from_integer(x.into());
    let (e128, na, nb) = (e as u128, na as u128, nb as u128);
    let size_bounds = [
        InequalityCheck::new(int(e128), int(na * na * nb)),
        InequalityCheck::new(int(e128), int(nb * nb * na)),
        InequalityCheck::new(int(e128 * e128), int(na.pow(3) * nb.pow(3))),
    ];
    let overlap = InequalityCheck::new(
        BigRational::new(e.into(), ((na * nb) as u64).into()),
        int(a.max_translate_overlap(b)? as u128),
    );
    let prod = na * na * nb * nb;
    let plus = a.sumset_with(b)?.size() as u128;
    let minus = a.difference_with(b)?.size() as u128;
    let sumset = [
        InequalityCheck::new(BigRational::new(prod.into(), plus.into()), int(e128)),
        InequalityCheck::new(BigRational::new(prod.into(), minus.into()), int(e128)),
    ];
    Ok(EnergyLemmaCheck { energy: e, size_bounds, overlap, sumset })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnionDoublingCheck {
    pub energy: u64,
    /// `E(A,B) ≥ η|A|^{3/2}|B|^{3/2}`.
    pub applicable: bool,
    /// `δ[A ∪ B] ≤ 4δ[A]δ[B]/η`, evaluated only when applicable.
    pub conclusion: Option<InequalityCheck>,
}

pub fn check_union_doubling<S: AdditiveSet>(a: &S, b: &S, eta: &BigRational) -> Result<UnionDoublingCheck> {
    if !(eta > &BigRational::zero() && eta <= &BigRational::from_integer(1.into())) {
        return Err(Error::invalid("eta must lie in (0, 1]"));
    }
    let e = a.energy(b)?;
    let (na, nb) = (a.size() as u64, b.size() as u64);
    let e_sq = BigRational::from_integer((e as u128 * e as u128).into());
    let cubes = BigRational::from_integer((na as u128).pow(3).into())
        * BigRational::from_integer((nb as u128).pow(3).into());
    let applicable = na > 0 && nb > 0 && e_sq >= eta * eta * cubes;
    let conclusion = if applicable {
        let to_big = |r: Ratio<u64>| BigRational::new((*r.numer()).into(), (*r.denom()).into());
        let ka = to_big(doubling_delta(a)?);
        let kb = to_big(doubling_delta(b)?);
        let lhs = to_big(doubling_delta(&a.union_with(b)?)?);
        Some(InequalityCheck::new(lhs, BigRational::from_integer(4.into()) * ka * kb / eta))
    } else {
        None
    };
    Ok(UnionDoublingCheck { energy: e, applicable, conclusion })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FinalLemmaCheck {
    pub size: u64,
    /// Elements whose centered residue lies in `[−N/24, N/24]`.
    pub inside: u64,
    /// At least 95% of the elements are inside.
    pub applicable: bool,
    pub t3: u64,
    /// `⌈n²/2⌉`.
    pub bound: u64,
    pub classification: Option<ClassificationResult>,
    /// `T₃ ≤ ⌈n²/2⌉`, and on equality the set classifies as an `E`/`F`
    /// image. `None` when not applicable.
    pub holds: Option<bool>,
}

pub fn check_final_lemma(a: &ResidueSet) -> Result<FinalLemmaCheck> {
    let modulus = a.modulus();
    if !is_prime(modulus) || modulus < 5 {
        return Err(Error::Unsupported(format!("needs a prime modulus at least 5, got {modulus}")));
    }
    let n = a.len() as u64;
    let inside = a
        .centered()
        .iter()
        .filter(|&&x| 24 * x.unsigned_abs() <= modulus)
        .count() as u64;
    let applicable = n > 0 && 20 * inside >= 19 * n;
    let count = t3(a);
    let bound = half_square_ceil(n);
    let mut classification = None;
    let holds = if applicable {
        if count == bound {
            let c = classify_extremal(&AnySet::Residues(a.clone()))?;
            let matched = c.matched;
            classification = Some(c);
            Some(matched)
        } else {
            Some(count < bound)
        }
    } else {
        None
    };
    Ok(FinalLemmaCheck {
        size: n,
        inside,
        applicable,
        t3: count,
        bound,
        classification,
        holds,
    })
}

/// `x` as an `f64`, for reports.
pub fn ratio_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{embed_mod, generate_family, random_set, Family, FamilyTag};
    use crate::sets::IntegerSet;

    fn interval(modulus: u64, len: u64) -> ResidueSet {
        ResidueSet::new(modulus, 0..len).unwrap()
    }

    /// Brute force over all dilators and all arc starts.
    fn rectify_oracle(a: &ResidueSet) -> u64 {
        let p = a.modulus();
        let n = a.len() as u64;
        let mut best = u64::MAX;
        for d in 1..p {
            let da = a.dilate(d as i64);
            for start in 0..p {
                let mut len = 0;
                let mut seen = 0;
                while seen < n {
                    if da.contains((start + len) % p) {
                        seen += 1;
                    }
                    len += 1;
                }
                best = best.min(len - 1);
            }
        }
        best
    }

    #[test]
    fn rectify_examples() {
        let r = rectify(&interval(101, 10), 1.0).unwrap();
        assert_eq!((r.arc_length, r.dilator), (9, 1));
        let r = rectify(&interval(101, 10).dilate(7), 1.0).unwrap();
        assert_eq!((r.arc_length, r.dilator), (9, 29));
        let rnd = random_set(50, 101, 1).unwrap();
        assert!(rectify(&rnd, 1.0).unwrap().arc_length >= 60);
        assert!(rectify(&ResidueSet::empty(101).unwrap(), 1.0).is_err());
        assert!(rectify(&interval(101, 3), 0.0).is_err());
    }

    #[test]
    fn rectify_matches_oracle() {
        for seed in 0..20 {
            let a = random_set(6, 31, seed).unwrap();
            assert_eq!(rectify(&a, 1.0).unwrap().arc_length, rectify_oracle(&a));
        }
    }

    #[test]
    fn rectify_partial_coverage() {
        let mut elems: Vec<u64> = (0..19).collect();
        elems.push(60);
        let a = ResidueSet::new(127, elems).unwrap();
        let r = rectify(&a, 0.95).unwrap();
        assert_eq!((r.arc_length, r.covered), (18, 19));
        assert_eq!(r.covered_fraction(), Ratio::new(19, 20));
    }

    #[test]
    fn decomposition_examples() {
        let params = DecompositionParams::default();
        let d = decompose_heuristic(&interval(1009, 40), params).unwrap();
        assert_eq!(d.parts.len(), 1);
        assert!(d.noise.is_empty());
        let rep = verify_decomposition(&d).unwrap();
        assert!(rep.cross_holds && rep.noise_holds);
        assert_eq!(rep.noise_energy, 0);

        let first = interval(1009, 30);
        let second = interval(1009, 30).dilate(37).translate(500);
        let both = first.union(&second).unwrap();
        assert_eq!(both.len(), 59);
        let d = decompose_heuristic(&both, params).unwrap();
        assert_eq!(d.parts.len(), 2);
        assert_eq!(d.whole(), both);
        let rep = verify_decomposition(&d).unwrap();
        assert!(rep.cross_holds);
        assert_eq!(rep.cross_energy[0][1], rep.cross_energy[1][0]);

        let rnd = random_set(50, 1009, 3).unwrap();
        let d = decompose_heuristic(&rnd, DecompositionParams { min_part_size: 10, ..params }).unwrap();
        assert_eq!(d.whole(), rnd);
    }

    #[test]
    fn dense_cluster_covering_the_group() {
        let a = ResidueSet::new(7, [0, 2, 4, 5, 6]).unwrap();
        let part = best_cluster(&a).unwrap();
        assert_eq!(part, a);
    }

    #[test]
    fn decomposition_rejects_overlap() {
        let p = interval(101, 5);
        let err = Decomposition::new(vec![p.clone(), p], ResidueSet::empty(101).unwrap(), DecompositionParams::default());
        assert!(err.is_err());
        let bad = DecompositionParams { epsilon: 0.7, ..DecompositionParams::default() };
        assert!(Decomposition::new(vec![], interval(101, 3), bad).is_err());
    }

    #[test]
    fn t3_energy_examples() {
        let z5 = ResidueSet::full(5).unwrap();
        let c = check_t3_energy_inequality(&z5, &z5, &z5).unwrap();
        assert_eq!(c.lhs, BigRational::from_integer(25u64.pow(6).into()));
        assert_eq!(c.rhs, BigRational::from_integer((125u64 * 125 * 125 * 125).into()));
        assert!(c.holds);
        let empty = ResidueSet::empty(7).unwrap();
        let full = ResidueSet::full(7).unwrap();
        let c = check_t3_energy_inequality(&empty, &full, &full).unwrap();
        assert!(c.holds && c.lhs.is_zero());
        assert!(check_t3_energy_inequality(&z5, &full, &full).is_err());
    }

    #[test]
    fn energy_lemma_on_intervals() {
        let a = IntegerSet::new(0..10).unwrap();
        let b = IntegerSet::new([0, 2, 4, 7]).unwrap();
        assert!(check_energy_lemma(&a, &b).unwrap().holds());
        let r = interval(101, 12);
        assert!(check_energy_lemma(&r, &r.dilate(5)).unwrap().holds());
    }

    #[test]
    fn union_doubling_examples() {
        let a = IntegerSet::new(0..10).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        let c = check_union_doubling(&a, &a, &half).unwrap();
        assert!(c.applicable && c.conclusion.unwrap().holds);
        let c = check_union_doubling(&a, &a.translate(3), &half).unwrap();
        assert!(c.applicable && c.conclusion.unwrap().holds);
        let x = random_set(10, 10007, 5).unwrap();
        let y = random_set(10, 10007, 6).unwrap();
        let c = check_union_doubling(&x, &y, &half).unwrap();
        assert!(!c.applicable && c.conclusion.is_none());
    }

    #[test]
    fn final_lemma_examples() {
        let e11 = generate_family(FamilyTag::new(Family::E, 1, 1).unwrap()).unwrap();
        let a = embed_mod(&e11, 1009, 0).unwrap().set;
        let c = check_final_lemma(&a).unwrap();
        assert_eq!((c.t3, c.bound, c.holds), (13, 13, Some(true)));
        assert!(c.classification.unwrap().matched);

        let mut elems: Vec<i64> = (-10..10).collect();
        elems.push(500);
        let b = ResidueSet::from_reduced(1009, elems).unwrap();
        let c = check_final_lemma(&b).unwrap();
        assert!(c.applicable && c.t3 < c.bound && c.holds == Some(true));

        let far = ResidueSet::new(1009, [0, 1, 2, 300, 400, 500]).unwrap();
        let c = check_final_lemma(&far).unwrap();
        assert!(!c.applicable && c.holds.is_none());
    }
}

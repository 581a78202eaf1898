//! Bounds on the limiting density functions `m₃(α)` and `M₃(α)`.
//!
//! A [`Ledger`] holds exact rational records on a finite grid of densities
//! and closes them under the complement relation
//! `m₃(α) + M₃(1−α) = 1 − 3α + 3α²` and the product inequalities
//! `m₃(αβ) ≤ m₃(α)m₃(β)`, `M₃(αβ) ≥ M₃(α)M₃(β)`. Records obtained from a
//! single finite modulus live in a separate list and only join the closure
//! when explicitly admitted.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::count::t3;
use crate::error::{Error, Result};
use crate::rational::{format_rational, rat, sqrt_interval, to_f64, truncated_decimal};
use crate::search::{ExtremalResult, Side};
use crate::sets::ResidueSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    /// `m₃`, the minimal normalized count.
    #[serde(rename = "m3")]
    MinCount,
    /// `M₃`, the maximal normalized count.
    #[serde(rename = "M3")]
    MaxCount,
}

impl Target {
    pub fn other(self) -> Target {
        match self {
            Target::MinCount => Target::MaxCount,
            Target::MaxCount => Target::MinCount,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::MinCount => "m3",
            Target::MaxCount => "M3",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Upper,
    Lower,
    Exact,
}

impl BoundSide {
    fn flipped(self) -> BoundSide {
        match self {
            BoundSide::Upper => BoundSide::Lower,
            BoundSide::Lower => BoundSide::Upper,
            BoundSide::Exact => BoundSide::Exact,
        }
    }
}

impl fmt::Display for BoundSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundSide::Upper => "upper",
            BoundSide::Lower => "lower",
            BoundSide::Exact => "exact",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm { name: String },
    Construction { id: String, n: u64, modulus: u64 },
    /// Indices of the two parent records.
    Submultiplicative { parents: [usize; 2] },
    Complement { parent: Option<usize> },
    Exhaustive { n: u64, modulus: u64 },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::ClosedForm { name } => write!(f, "closed-form({name})"),
            Provenance::Construction { id, .. } => write!(f, "construction({id})"),
            Provenance::Submultiplicative { parents } => {
                write!(f, "submultiplicative({};{})", parents[0], parents[1])
            }
            Provenance::Complement { parent: Some(p) } => write!(f, "complement({p})"),
            Provenance::Complement { parent: None } => f.write_str("complement()"),
            Provenance::Exhaustive { n, modulus } => write!(f, "exhaustive({n};{modulus})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub target: Target,
    #[serde(with = "crate::rational::serde_str")]
    pub alpha: BigRational,
    pub side: BoundSide,
    #[serde(with = "crate::rational::serde_str")]
    pub value: BigRational,
    pub provenance: Provenance,
    /// Modulus of a record computed at one finite `N`; such a record only
    /// suggests the limit value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_modulus: Option<u64>,
}

impl BoundRecord {
    pub fn closed_form(target: Target, alpha: BigRational, side: BoundSide, value: BigRational, name: &str) -> Self {
        BoundRecord {
            target,
            alpha,
            side,
            value,
            provenance: Provenance::ClosedForm { name: name.to_string() },
            finite_modulus: None,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.target,
            format_rational(&self.alpha),
            self.side,
            format_rational(&self.value),
            self.provenance
        )
    }

    fn validate(&self) -> Result<()> {
        let unit = |x: &BigRational| *x >= BigRational::zero() && *x <= BigRational::one();
        if !unit(&self.alpha) {
            return Err(Error::Domain(format!("density {} outside [0,1]", self.alpha)));
        }
        if !unit(&self.value) {
            return Err(Error::Domain(format!("value {} outside [0,1]", self.value)));
        }
        Ok(())
    }
}

/// `1 − 3α + 3α²`, the combined normalized count of a set and its complement.
pub fn complement_total_density(alpha: &BigRational) -> BigRational {
    BigRational::one() - rat(3, 1) * alpha + rat(3, 1) * alpha * alpha
}

fn curve(alpha: &BigRational) -> BigRational {
    (rat(2, 1) - rat(12, 1) * alpha + rat(21, 1) * alpha * alpha) / rat(12, 1)
}

fn in_curve_range(alpha: &BigRational) -> bool {
    *alpha >= rat(1, 3) && *alpha <= rat(2, 3)
}

/// `(2 − 12α + 21α²)/12`, the upper bound on `m₃` realized by complements of
/// wrap-around `E(k,m)` sets, valid for `1/3 ≤ α ≤ 2/3`.
pub fn curve_m3_upper(alpha: &BigRational) -> Result<BigRational> {
    if !in_curve_range(alpha) {
        return Err(Error::Domain(format!(
            "curve defined on [1/3, 2/3], got {}",
            format_rational(alpha)
        )));
    }
    Ok(curve(alpha))
}

/// Upper bound on `m₃` from a single wrap-around family complement: the
/// curve on `[1/3, 2/3]` and `α²/4` below `1/3`.
pub fn single_family_m3_upper(alpha: &BigRational) -> Result<BigRational> {
    if *alpha < BigRational::zero() || *alpha > rat(2, 3) {
        return Err(Error::Domain(format!(
            "single-family bound defined on [0, 2/3], got {}",
            format_rational(alpha)
        )));
    }
    if *alpha < rat(1, 3) {
        Ok(alpha * alpha / rat(4, 1))
    } else {
        Ok(curve(alpha))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallAlphaExact {
    pub alpha: BigRational,
    /// `M₃(α) = α²/2`.
    pub max_count: BigRational,
    /// `m₃(1−α) = 1/2 − 2(1−α) + (5/2)(1−α)²`.
    pub min_count_at_complement: BigRational,
    pub condition: &'static str,
}

/// The small-density exact values, valid only below the unknown threshold
/// density `c`; the output carries that condition.
pub fn exact_small_alpha(alpha: &BigRational) -> Result<SmallAlphaExact> {
    if *alpha < BigRational::zero() || *alpha > BigRational::one() {
        return Err(Error::Domain(format!("density {} outside [0,1]", format_rational(alpha))));
    }
    let beta = BigRational::one() - alpha;
    Ok(SmallAlphaExact {
        alpha: alpha.clone(),
        max_count: alpha * alpha / rat(2, 1),
        min_count_at_complement: rat(1, 2) - rat(2, 1) * &beta + rat(5, 2) * &beta * &beta,
        condition: "conditional on alpha < c",
    })
}

/// Moves a record across `m₃(α) + M₃(1−α) = 1 − 3α + 3α²`: an upper bound on
/// `m₃(α)` becomes a lower bound on `M₃(1−α)` and so on. Exact stays exact.
pub fn complement_transfer(r: &BoundRecord, parent: Option<usize>) -> BoundRecord {
    let beta = BigRational::one() - &r.alpha;
    let total = complement_total_density(&beta);
    BoundRecord {
        target: r.target.other(),
        value: total - &r.value,
        alpha: beta,
        side: r.side.flipped(),
        provenance: Provenance::Complement { parent },
        finite_modulus: r.finite_modulus,
    }
}

/// Finite-`N` record from an explicit set: an upper bound on `m₃` or a lower
/// bound on `M₃` at `α = |A|/N`, value `T₃(A)/N²`.
pub fn construction_bound(set: &ResidueSet, target: Target) -> BoundRecord {
    let modulus = set.modulus();
    let n = set.len() as u64;
    let count = t3(set);
    BoundRecord {
        target,
        alpha: rat(n as i64, modulus as i64),
        side: match target {
            Target::MinCount => BoundSide::Upper,
            Target::MaxCount => BoundSide::Lower,
        },
        value: BigRational::new(BigInt::from(count), BigInt::from(modulus) * BigInt::from(modulus)),
        provenance: Provenance::Construction {
            id: format!("N{modulus}-n{n}-t{count}"),
            n,
            modulus,
        },
        finite_modulus: Some(modulus),
    }
}

/// Finite-`N` record from a completed modular extremal search.
pub fn exhaustive_bound(result: &ExtremalResult) -> Result<BoundRecord> {
    let modulus = result
        .modulus
        .ok_or_else(|| Error::invalid("exhaustive bound needs a modular search result"))?;
    let (target, side) = match result.side {
        Side::Max => (Target::MaxCount, BoundSide::Lower),
        Side::Min => (Target::MinCount, BoundSide::Upper),
    };
    Ok(BoundRecord {
        target,
        alpha: rat(result.n as i64, modulus as i64),
        side,
        value: BigRational::new(BigInt::from(result.value), BigInt::from(modulus) * BigInt::from(modulus)),
        provenance: Provenance::Exhaustive { n: result.n, modulus },
        finite_modulus: Some(modulus),
    })
}

/// Densities `k/q` for `0 ≤ k ≤ q`, all pairwise products, and the
/// complements of both, sorted.
pub fn default_grid(q: u64) -> Result<Vec<BigRational>> {
    if q == 0 || q > 1 << 12 {
        return Err(Error::invalid(format!("grid denominator {q} outside [1, 4096]")));
    }
    let d = q * q;
    let mut hit = vec![false; d as usize + 1];
    for a in 0..=q {
        for b in a..=q {
            let p = (a * b) as usize;
            hit[p] = true;
            hit[d as usize - p] = true;
        }
        hit[(a * q) as usize] = true;
    }
    Ok(hit
        .iter()
        .enumerate()
        .filter(|(_, &h)| h)
        .map(|(i, _)| rat(i as i64, d as i64))
        .collect())
}

const UPPER: usize = 0;
const LOWER: usize = 1;

fn slot(target: Target, dir: usize) -> usize {
    match target {
        Target::MinCount => dir,
        Target::MaxCount => 2 + dir,
    }
}

/// Largest common denominator handled by the integer fast path.
const MAX_SCALE: u64 = 1 << 24;
/// Derived values whose numerator and denominator together exceed this many
/// bits are dropped. Improvement cycles through complements and products can
/// otherwise refine a bound forever while the operands double in size.
const MAX_VALUE_BITS: u64 = 256;

fn value_bits(x: &BigRational) -> u64 {
    x.numer().bits() + x.denom().bits()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClosureStats {
    pub passes: usize,
    pub added: usize,
    /// Whether the last pass changed nothing.
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct Ledger {
    points: Vec<BigRational>,
    by_value: HashMap<BigRational, usize>,
    /// Common denominator of the points with integral `scaled` entries.
    scale: u64,
    scaled: Vec<Option<u64>>,
    by_scaled: Vec<u32>,
    records: Vec<BoundRecord>,
    best: Vec<[Option<usize>; 4]>,
    best_f64: Vec<[f64; 4]>,
    finite: Vec<BoundRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LedgerDocument {
    pub grid: Vec<String>,
    pub records: Vec<BoundRecord>,
    #[serde(default)]
    pub finite_records: Vec<BoundRecord>,
}

impl Ledger {
    pub fn with_grid(grid: impl IntoIterator<Item = BigRational>) -> Result<Self> {
        let grid: Vec<BigRational> = grid.into_iter().collect();
        let mut scale = 1u64;
        for a in &grid {
            if let Some(d) = a.denom().to_u64() {
                let l = scale.lcm(&d);
                if l <= MAX_SCALE {
                    scale = l;
                }
            }
        }
        let mut ledger = Ledger {
            points: Vec::new(),
            by_value: HashMap::new(),
            scale,
            scaled: Vec::new(),
            by_scaled: vec![u32::MAX; scale as usize + 1],
            records: Vec::new(),
            best: Vec::new(),
            best_f64: Vec::new(),
            finite: Vec::new(),
        };
        for a in grid {
            ledger.point(&a)?;
        }
        Ok(ledger)
    }

    /// Grid `default_grid(q)` seeded with the unconditional closed forms:
    /// the wrap-around curve, random sets (`α³` on both sides), intervals
    /// (`M₃ ≥ α²/2` for `α ≤ 1/2`), and the trivial `0 ≤ m₃`, `M₃ ≤ α²`.
    pub fn build(q: u64) -> Result<Self> {
        let grid = default_grid(q)?;
        let mut ledger = Ledger::with_grid(grid.clone())?;
        for a in &grid {
            let cube = a * a * a;
            let square = a * a;
            ledger.insert(BoundRecord::closed_form(Target::MinCount, a.clone(), BoundSide::Upper, cube.clone(), "random"))?;
            ledger.insert(BoundRecord::closed_form(Target::MaxCount, a.clone(), BoundSide::Lower, cube, "random"))?;
            ledger.insert(BoundRecord::closed_form(Target::MinCount, a.clone(), BoundSide::Lower, BigRational::zero(), "trivial"))?;
            ledger.insert(BoundRecord::closed_form(Target::MaxCount, a.clone(), BoundSide::Upper, square.clone(), "trivial"))?;
            if *a <= rat(1, 2) {
                ledger.insert(BoundRecord::closed_form(Target::MaxCount, a.clone(), BoundSide::Lower, square / rat(2, 1), "interval"))?;
            }
            if in_curve_range(a) {
                ledger.insert(BoundRecord::closed_form(Target::MinCount, a.clone(), BoundSide::Upper, curve(a), "wraparound-curve"))?;
            }
        }
        Ok(ledger)
    }

    fn point(&mut self, alpha: &BigRational) -> Result<usize> {
        if let Some(&i) = self.by_value.get(alpha) {
            return Ok(i);
        }
        if *alpha < BigRational::zero() || *alpha > BigRational::one() {
            return Err(Error::Domain(format!("density {} outside [0,1]", format_rational(alpha))));
        }
        let i = self.points.len();
        let scaled = alpha
            .denom()
            .to_u64()
            .filter(|d| self.scale.is_multiple_of(*d))
            .map(|d| alpha.numer().to_u64().expect("nonnegative") * (self.scale / d));
        if let Some(s) = scaled {
            self.by_scaled[s as usize] = i as u32;
        }
        self.points.push(alpha.clone());
        self.by_value.insert(alpha.clone(), i);
        self.scaled.push(scaled);
        self.best.push([None; 4]);
        self.best_f64.push([f64::NAN; 4]);
        Ok(i)
    }

    pub fn grid(&self) -> Vec<BigRational> {
        let mut g = self.points.clone();
        g.sort();
        g
    }

    pub fn records(&self) -> &[BoundRecord] {
        &self.records
    }

    pub fn finite_records(&self) -> &[BoundRecord] {
        &self.finite
    }

    fn best_in(&self, p: usize, s: usize) -> Option<&BigRational> {
        self.best[p][s].map(|r| &self.records[r].value)
    }

    fn improves(&self, p: usize, s: usize, v: &BigRational) -> bool {
        match self.best_in(p, s) {
            None => true,
            Some(b) if s % 2 == UPPER => v < b,
            Some(b) => v > b,
        }
    }

    fn slots(r: &BoundRecord) -> Vec<usize> {
        match r.side {
            BoundSide::Upper => vec![slot(r.target, UPPER)],
            BoundSide::Lower => vec![slot(r.target, LOWER)],
            BoundSide::Exact => vec![slot(r.target, UPPER), slot(r.target, LOWER)],
        }
    }

    /// Whether `r` would tighten a best bound.
    pub fn would_improve(&self, r: &BoundRecord) -> bool {
        match self.by_value.get(&r.alpha) {
            None => true,
            Some(&p) => Self::slots(r).into_iter().any(|s| self.improves(p, s, &r.value)),
        }
    }

    /// Appends a limit record. Fails if it contradicts a best bound on the
    /// other side or lies outside the unit square.
    pub fn insert(&mut self, r: BoundRecord) -> Result<usize> {
        r.validate()?;
        if r.finite_modulus.is_some() {
            return Err(Error::invalid(
                "finite-modulus records go through insert_finite and an admitted closure",
            ));
        }
        self.push_record(r)
    }

    fn push_record(&mut self, r: BoundRecord) -> Result<usize> {
        let p = self.point(&r.alpha)?;
        let (up, lo) = (slot(r.target, UPPER), slot(r.target, LOWER));
        let bad = match r.side {
            BoundSide::Upper => self.best_in(p, lo).is_some_and(|l| r.value < *l),
            BoundSide::Lower => self.best_in(p, up).is_some_and(|u| r.value > *u),
            BoundSide::Exact => {
                self.best_in(p, lo).is_some_and(|l| r.value < *l)
                    || self.best_in(p, up).is_some_and(|u| r.value > *u)
            }
        };
        if bad {
            return Err(Error::Domain(format!(
                "record {} contradicts an existing bound",
                r.csv_row()
            )));
        }
        if let Provenance::Submultiplicative { parents } = &r.provenance {
            if parents.iter().any(|&q| q >= self.records.len()) {
                return Err(Error::Malformed("provenance must point to earlier records".into()));
            }
        }
        if let Provenance::Complement { parent: Some(q) } = &r.provenance {
            if *q >= self.records.len() {
                return Err(Error::Malformed("provenance must point to earlier records".into()));
            }
        }
        let idx = self.records.len();
        let v = to_f64(&r.value);
        for s in Self::slots(&r) {
            if self.improves(p, s, &r.value) {
                self.best[p][s] = Some(idx);
                self.best_f64[p][s] = v;
            }
        }
        self.records.push(r);
        Ok(idx)
    }

    /// Stores a finite-`N` record outside the closure.
    pub fn insert_finite(&mut self, r: BoundRecord) -> Result<usize> {
        r.validate()?;
        if r.finite_modulus.is_none() {
            return Err(Error::invalid("finite record must carry its modulus"));
        }
        self.finite.push(r);
        Ok(self.finite.len() - 1)
    }

    pub fn best_upper(&self, target: Target, alpha: &BigRational) -> Option<&BoundRecord> {
        let p = *self.by_value.get(alpha)?;
        self.best[p][slot(target, UPPER)].map(|r| &self.records[r])
    }

    pub fn best_lower(&self, target: Target, alpha: &BigRational) -> Option<&BoundRecord> {
        let p = *self.by_value.get(alpha)?;
        self.best[p][slot(target, LOWER)].map(|r| &self.records[r])
    }

    /// `best_lower ≤ best_upper` at every point for both targets.
    pub fn is_consistent(&self) -> bool {
        (0..self.points.len()).all(|p| {
            [Target::MinCount, Target::MaxCount].iter().all(|&t| {
                match (self.best_in(p, slot(t, LOWER)), self.best_in(p, slot(t, UPPER))) {
                    (Some(l), Some(u)) => l <= u,
                    _ => true,
                }
            })
        })
    }

    fn complement_pass(&mut self) -> Result<usize> {
        let mut added = 0;
        let n = self.points.len();
        for p in 0..n {
            for s in 0..4 {
                let Some(ri) = self.best[p][s] else { continue };
                let t = complement_transfer(&self.records[ri], Some(ri));
                // A negative density bound says nothing, and feeding one to the
                // product rule would be unsound.
                if t.value.is_negative() {
                    continue;
                }
                if value_bits(&t.value) <= MAX_VALUE_BITS && self.would_improve(&t) {
                    self.push_record(t)?;
                    added += 1;
                }
            }
        }
        Ok(added)
    }

    fn product_candidate(&self, pi: usize, pj: usize, s: usize) -> Option<BoundRecord> {
        let (ri, rj) = (self.best[pi][s]?, self.best[pj][s]?);
        let (a, b) = (&self.records[ri], &self.records[rj]);
        if a.value.is_negative() || b.value.is_negative() {
            return None;
        }
        Some(BoundRecord {
            target: a.target,
            alpha: &a.alpha * &b.alpha,
            side: if s % 2 == UPPER { BoundSide::Upper } else { BoundSide::Lower },
            value: &a.value * &b.value,
            provenance: Provenance::Submultiplicative { parents: [ri, rj] },
            finite_modulus: None,
        })
    }

    /// Cheap floating-point screen; only candidates that might improve are
    /// checked exactly.
    fn may_improve(&self, pk: usize, s: usize, cand: f64) -> bool {
        let best = self.best_f64[pk][s];
        if self.best[pk][s].is_none() {
            return true;
        }
        if s % 2 == UPPER {
            cand < best * (1.0 + 1e-9)
        } else {
            cand > best * (1.0 - 1e-9)
        }
    }

    fn try_product(&mut self, pi: usize, pj: usize, pk: usize, s: usize) -> Result<bool> {
        let cand = self.best_f64[pi][s] * self.best_f64[pj][s];
        if !self.may_improve(pk, s, cand) {
            return Ok(false);
        }
        let Some(r) = self.product_candidate(pi, pj, s) else {
            return Ok(false);
        };
        if value_bits(&r.value) <= MAX_VALUE_BITS && self.improves(pk, s, &r.value) {
            self.push_record(r)?;
            return Ok(true);
        }
        Ok(false)
    }

    fn product_pass(&mut self, s: usize) -> Result<usize> {
        let mut added = 0;
        let live: Vec<usize> = (0..self.points.len()).filter(|&p| self.best[p][s].is_some()).collect();
        let (regular, irregular): (Vec<usize>, Vec<usize>) =
            live.iter().partition(|&&p| self.scaled[p].is_some());
        let scale = self.scale as u128;
        for (x, &pi) in regular.iter().enumerate() {
            let ai = self.scaled[pi].expect("regular") as u128;
            for &pj in &regular[x..] {
                let prod = ai * self.scaled[pj].expect("regular") as u128;
                if !prod.is_multiple_of(scale) {
                    continue;
                }
                let k = self.by_scaled[(prod / scale) as usize];
                if k == u32::MAX {
                    continue;
                }
                if self.try_product(pi, pj, k as usize, s)? {
                    added += 1;
                }
            }
        }
        for &pi in &irregular {
            for &pj in &live {
                let prod = &self.points[pi] * &self.points[pj];
                if let Some(&k) = self.by_value.get(&prod) {
                    if self.try_product(pi, pj, k, s)? {
                        added += 1;
                    }
                }
            }
        }
        Ok(added)
    }

    /// Applies the complement relation and both product inequalities until
    /// nothing improves or `iterations` passes have run. Finite-`N` records
    /// join first when `admit_finite` is set.
    pub fn closure(&mut self, iterations: usize, admit_finite: bool) -> Result<ClosureStats> {
        let mut stats = ClosureStats::default();
        if admit_finite {
            for r in std::mem::take(&mut self.finite) {
                self.push_record(r)?;
                stats.added += 1;
            }
        }
        for _ in 0..iterations {
            stats.passes += 1;
            let added = self.complement_pass()?
                + self.product_pass(slot(Target::MinCount, UPPER))?
                + self.product_pass(slot(Target::MaxCount, LOWER))?;
            stats.added += added;
            if added == 0 {
                stats.converged = true;
                break;
            }
        }
        Ok(stats)
    }

    pub fn to_document(&self) -> LedgerDocument {
        LedgerDocument {
            grid: self.grid().iter().map(format_rational).collect(),
            records: self.records.clone(),
            finite_records: self.finite.clone(),
        }
    }

    pub fn from_document(doc: &LedgerDocument) -> Result<Self> {
        let grid = doc
            .grid
            .iter()
            .map(|s| crate::rational::parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        let mut ledger = Ledger::with_grid(grid)?;
        for r in &doc.records {
            r.validate()?;
            ledger.push_record(r.clone())?;
        }
        for r in &doc.finite_records {
            ledger.insert_finite(r.clone())?;
        }
        Ok(ledger)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("ledger serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: LedgerDocument =
            serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        Ledger::from_document(&doc)
    }

    /// Every record, in insertion order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("target,alpha,side,value,provenance\n");
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutoffProbe {
    pub alpha: BigRational,
    /// Rational bracket of `√α`.
    pub sqrt_alpha: (BigRational, BigRational),
    /// Bracket of the self-product `f(√α)²` of the curve `f`.
    pub product: (BigRational, BigRational),
    /// Single-family value `α²/4`.
    pub single_family: BigRational,
    /// `Some(true)` when the whole product bracket lies below the single
    /// family value, `Some(false)` when it lies at or above it.
    pub product_wins: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutoffCertificate {
    pub sqrt6: (BigRational, BigRational),
    /// Bracket of `2(7+2√6)/75`.
    pub cutoff: (BigRational, BigRational),
    pub below: CutoffProbe,
    pub above: CutoffProbe,
}

impl CutoffCertificate {
    /// The cutoff truncated to `digits` decimals, if both bracket ends agree
    /// to that many places.
    pub fn decimal(&self, digits: u32) -> Option<String> {
        let lo = truncated_decimal(&self.cutoff.0, digits);
        (lo == truncated_decimal(&self.cutoff.1, digits)).then_some(lo)
    }

    pub fn value_f64(&self) -> f64 {
        to_f64(&((&self.cutoff.0 + &self.cutoff.1) / rat(2, 1)))
    }
}

fn probe(alpha: BigRational, width: &BigRational) -> Result<CutoffProbe> {
    let (s_lo, s_hi) = sqrt_interval(&alpha, width)?;
    if !in_curve_range(&s_lo) || !in_curve_range(&s_hi) {
        return Err(Error::Domain("probe density outside the curve's square range".into()));
    }
    // the curve is increasing on [1/3, 2/3]
    let (f_lo, f_hi) = (curve(&s_lo), curve(&s_hi));
    let product = (&f_lo * &f_lo, &f_hi * &f_hi);
    let single_family = &alpha * &alpha / rat(4, 1);
    let product_wins = if product.1 < single_family {
        Some(true)
    } else if product.0 >= single_family {
        Some(false)
    } else {
        None
    };
    Ok(CutoffProbe {
        alpha,
        sqrt_alpha: (s_lo, s_hi),
        product,
        single_family,
        product_wins,
    })
}

/// The density below which the intersection of a wrap-around complement with
/// an affine copy of itself beats every single family complement.
///
/// With `s = √α`, the product `f(s)²` meets `α²/4 = s⁴/4` where
/// `15s² − 12s + 2 = 0`, i.e. `s = (6+√6)/15` and `α = 2(7+2√6)/75`.
pub fn ef_sharpness_cutoff() -> Result<CutoffCertificate> {
    let width = rat(1, 1_000_000_000_000_000);
    let (r_lo, r_hi) = sqrt_interval(&rat(6, 1), &width)?;
    let map = |r: &BigRational| rat(2, 75) * (rat(7, 1) + rat(2, 1) * r);
    Ok(CutoffCertificate {
        cutoff: (map(&r_lo), map(&r_hi)),
        sqrt6: (r_lo, r_hi),
        below: probe(rat(31, 100), &width)?,
        above: probe(rat(33, 100), &width)?,
    })
}

//! Exhaustive extremal search: `M₃(n)` over `Z`, `M₃(n,N)` and `m₃(n,N)`
//! over `Z/pZ`, and classification of extremal sets against the `E`/`F`
//! families.
//!
//! Every search either finishes and returns all extremal witnesses or fails
//! with [`Error::BudgetExceeded`]; partial maxima are never reported.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{half_square_ceil, is_prime};
use crate::canonical::{
    canonicalize_integers, canonicalize_residues, transversal_chunks, transversal_cost,
};
use crate::construct::{embed_mod, generate_family, FamilyTag};
use crate::count::{complement_total, t3, t3_integers};
use crate::error::{Error, Result};
use crate::sets::{AffineMap, AnySet, IntegerSet, ResidueSet};

pub const DEFAULT_BUDGET_NODES: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Max,
    Min,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Max => Side::Min,
            Side::Min => Side::Max,
        }
    }

    fn better(self, candidate: u64, incumbent: u64) -> bool {
        match self {
            Side::Max => candidate > incumbent,
            Side::Min => candidate < incumbent,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtremalResult {
    pub side: Side,
    pub n: u64,
    /// `None` for searches over `Z`.
    pub modulus: Option<u64>,
    /// Width cap of an integer search.
    pub width_cap: Option<u64>,
    pub value: u64,
    /// One canonical representative per extremal affine class, sorted.
    pub witnesses: Vec<AnySet>,
    /// Nodes (integer search) or candidate sets (modular search) examined.
    pub search_space_size: u64,
    /// Nodes cut by the midpoint bound, or candidates rejected as
    /// non-canonical orbit members.
    pub pruned_count: u64,
}

/// Shared node budget across parallel branches.
struct Budget {
    limit: u64,
    used: AtomicU64,
    exceeded: AtomicBool,
}

impl Budget {
    fn new(limit: u64) -> Self {
        Budget {
            limit,
            used: AtomicU64::new(0),
            exceeded: AtomicBool::new(false),
        }
    }

    fn charge(&self, nodes: u64) -> bool {
        let total = self.used.fetch_add(nodes, Ordering::Relaxed) + nodes;
        if total > self.limit {
            self.exceeded.store(true, Ordering::Relaxed);
        }
        !self.exceeded.load(Ordering::Relaxed)
    }
}

struct IntegerBranch<'a> {
    n: usize,
    width: i64,
    budget: &'a Budget,
    elems: Vec<i64>,
    member: Vec<bool>,
    index_of: Vec<usize>,
    /// Increasing progressions found so far with midpoint at index `i`.
    mids: Vec<u64>,
    best: u64,
    witnesses: Vec<Vec<i64>>,
    nodes: u64,
    pruned: u64,
    pending: u64,
    aborted: bool,
}

impl<'a> IntegerBranch<'a> {
    fn new(n: usize, width: i64, initial_best: u64, budget: &'a Budget) -> Self {
        IntegerBranch {
            n,
            width,
            budget,
            elems: Vec::with_capacity(n),
            member: vec![false; width as usize + 1],
            index_of: vec![usize::MAX; width as usize + 1],
            mids: vec![0; n],
            best: initial_best,
            witnesses: Vec::new(),
            nodes: 0,
            pruned: 0,
            pending: 0,
            aborted: false,
        }
    }

    fn push(&mut self, v: i64) {
        let j = self.elems.len();
        for l in 0..j {
            let s = self.elems[l] + v;
            if s % 2 == 0 && self.member[(s / 2) as usize] {
                self.mids[self.index_of[(s / 2) as usize]] += 1;
            }
        }
        self.elems.push(v);
        self.member[v as usize] = true;
        self.index_of[v as usize] = j;
    }

    fn pop(&mut self) {
        let v = self.elems.pop().expect("nonempty");
        self.member[v as usize] = false;
        self.index_of[v as usize] = usize::MAX;
        for l in 0..self.elems.len() {
            let s = self.elems[l] + v;
            if s % 2 == 0 && self.member[(s / 2) as usize] {
                self.mids[self.index_of[(s / 2) as usize]] -= 1;
            }
        }
    }

    /// Admissible bound on the final `T₃`: each element `aᵢ` is the
    /// midpoint of at most `min(i−1, n−i)` increasing progressions, and of
    /// at most as many more as there are remaining slots and unused left
    /// partners whose right partner is still reachable.
    fn upper_bound(&self) -> u64 {
        let j = self.elems.len();
        let last = *self.elems.last().expect("nonempty");
        let remaining = (self.n - j) as u64;
        let mut total = 0u64;
        for i in 0..j {
            let cap = (i as u64).min((self.n - 1 - i) as u64);
            let a = self.elems[i];
            let reachable = self.elems[..i]
                .iter()
                .filter(|&&l| {
                    let r = 2 * a - l;
                    r > last && r <= self.width
                })
                .count() as u64;
            total += cap.min(self.mids[i] + reachable.min(remaining));
        }
        for i in j..self.n {
            total += (i as u64).min((self.n - 1 - i) as u64);
        }
        self.n as u64 + 2 * total
    }

    fn leaf(&mut self) {
        let g = self.elems.iter().fold(0i64, |acc, &x| acc.gcd(&x));
        if g != 1 {
            return;
        }
        let w = *self.elems.last().expect("nonempty");
        let reflected: Vec<i64> = self.elems.iter().rev().map(|&x| w - x).collect();
        if reflected < self.elems {
            return;
        }
        let value = self.n as u64 + 2 * self.mids.iter().sum::<u64>();
        if value > self.best {
            self.best = value;
            self.witnesses.clear();
        }
        if value == self.best {
            self.witnesses.push(self.elems.clone());
        }
    }

    fn descend(&mut self) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        self.pending += 1;
        if self.pending >= 4096 {
            if !self.budget.charge(self.pending) {
                self.aborted = true;
            }
            self.pending = 0;
        }
        let j = self.elems.len();
        if j == self.n {
            self.leaf();
            return;
        }
        if self.upper_bound() < self.best {
            self.pruned += 1;
            return;
        }
        let last = *self.elems.last().expect("branch starts nonempty");
        let hi = self.width - (self.n - j - 1) as i64;
        for v in (last + 1)..=hi {
            self.push(v);
            self.descend();
            self.pop();
            if self.aborted {
                return;
            }
        }
    }
}

struct BranchOutcome {
    best: u64,
    witnesses: Vec<Vec<i64>>,
    nodes: u64,
    pruned: u64,
    aborted: bool,
}

/// Exact `M₃(n)` over `n`-subsets of `{0,…,W}` containing 0, with gcd 1 and
/// no smaller reflection. All maximizers are returned.
pub fn max3ap_integers(n: u64, width_cap: u64, budget_nodes: u64) -> Result<ExtremalResult> {
    if n == 0 {
        return Err(Error::invalid("cardinality must be at least 1"));
    }
    if width_cap + 1 < n {
        return Err(Error::invalid(format!(
            "width cap {width_cap} cannot hold {n} elements"
        )));
    }
    let mut result = ExtremalResult {
        side: Side::Max,
        n,
        modulus: None,
        width_cap: Some(width_cap),
        value: 1,
        witnesses: vec![AnySet::Integers(IntegerSet::new([0])?)],
        search_space_size: 1,
        pruned_count: 0,
    };
    if n == 1 {
        return Ok(result);
    }
    let interval = IntegerSet::new(0..n as i64)?;
    let initial = t3_integers(&interval).t3;
    let budget = Budget::new(budget_nodes);
    let width = width_cap as i64;
    let n_us = n as usize;
    let branches: Vec<BranchOutcome> = (1..=(width - (n_us as i64 - 2)))
        .into_par_iter()
        .map(|second| {
            let mut b = IntegerBranch::new(n_us, width, initial, &budget);
            b.push(0);
            b.push(second);
            b.descend();
            b.budget.charge(b.pending);
            BranchOutcome {
                best: b.best,
                witnesses: b.witnesses,
                nodes: b.nodes,
                pruned: b.pruned,
                aborted: b.aborted,
            }
        })
        .collect();
    if budget.exceeded.load(Ordering::Relaxed) || branches.iter().any(|b| b.aborted) {
        return Err(Error::BudgetExceeded {
            estimate: budget.used.load(Ordering::Relaxed) as u128,
            budget: budget_nodes,
        });
    }
    let value = branches
        .iter()
        .filter(|b| !b.witnesses.is_empty())
        .map(|b| b.best)
        .max()
        .expect("the interval branch always has a witness");
    let mut witnesses: Vec<IntegerSet> = branches
        .iter()
        .filter(|b| b.best == value)
        .flat_map(|b| b.witnesses.iter().cloned())
        .map(IntegerSet::from_sorted_unchecked)
        .collect();
    witnesses.sort();
    result.value = value;
    result.witnesses = witnesses.into_iter().map(AnySet::Integers).collect();
    result.search_space_size = 1 + branches.iter().map(|b| b.nodes).sum::<u64>();
    result.pruned_count = branches.iter().map(|b| b.pruned).sum();
    Ok(result)
}

fn sort_residue_witnesses(w: &mut [ResidueSet]) {
    w.sort_by_key(|s| s.to_vec());
}

/// Exact `M₃(n,N)` (side max) or `m₃(n,N)` (side min) over all `n`-subsets
/// of `Z/pZ`, one affine orbit at a time.
pub fn extremal_mod(n: u64, modulus: u64, side: Side, budget_nodes: u64) -> Result<ExtremalResult> {
    if !is_prime(modulus) {
        return Err(Error::Unsupported(format!(
            "extremal search needs a prime modulus, got {modulus}"
        )));
    }
    if n == 0 || n > modulus {
        return Err(Error::invalid(format!("cardinality {n} outside [1, {modulus}]")));
    }
    let cost = transversal_cost(n, modulus);
    if cost > budget_nodes as u128 {
        return Err(Error::BudgetExceeded {
            estimate: cost,
            budget: budget_nodes,
        });
    }
    let chunks = transversal_chunks(n, modulus)?;
    let per_chunk: Vec<(Option<u64>, Vec<ResidueSet>, u64)> = chunks
        .par_iter()
        .map(|chunk| {
            let mut best: Option<u64> = None;
            let mut wits = Vec::new();
            let mut reps = 0u64;
            chunk.for_each_representative(|rep| {
                reps += 1;
                let v = t3(&rep.set);
                match best {
                    Some(b) if v == b => wits.push(rep.set),
                    Some(b) if !side.better(v, b) => {}
                    _ => {
                        best = Some(v);
                        wits.clear();
                        wits.push(rep.set);
                    }
                }
            });
            (best, wits, reps)
        })
        .collect();
    let value = per_chunk
        .iter()
        .filter_map(|c| c.0)
        .reduce(|a, b| if side.better(b, a) { b } else { a })
        .expect("every cardinality has at least one orbit");
    let mut witnesses: Vec<ResidueSet> = per_chunk
        .iter()
        .filter(|c| c.0 == Some(value))
        .flat_map(|c| c.1.iter().cloned())
        .collect();
    sort_residue_witnesses(&mut witnesses);
    let reps: u64 = per_chunk.iter().map(|c| c.2).sum();
    Ok(ExtremalResult {
        side,
        n,
        modulus: Some(modulus),
        width_cap: None,
        value,
        witnesses: witnesses.into_iter().map(AnySet::Residues).collect(),
        search_space_size: cost as u64,
        pruned_count: cost as u64 - reps,
    })
}

/// Same extremum obtained by searching the complementary cardinality on the
/// opposite side and applying `T₃(A) + T₃(Aᶜ) = N² − 3nN + 3n²`.
pub fn extremal_mod_via_complement(
    n: u64,
    modulus: u64,
    side: Side,
    budget_nodes: u64,
) -> Result<ExtremalResult> {
    if modulus <= 3 || !is_prime(modulus) {
        return Err(Error::Unsupported(format!(
            "complement route needs a prime modulus above 3, got {modulus}"
        )));
    }
    if n == 0 || n > modulus {
        return Err(Error::invalid(format!("cardinality {n} outside [1, {modulus}]")));
    }
    let total = complement_total(n, modulus) as u64;
    let other = modulus - n;
    if other == 0 {
        return Ok(ExtremalResult {
            side,
            n,
            modulus: Some(modulus),
            width_cap: None,
            value: total,
            witnesses: vec![AnySet::Residues(ResidueSet::full(modulus)?)],
            search_space_size: 1,
            pruned_count: 0,
        });
    }
    let inner = extremal_mod(other, modulus, side.opposite(), budget_nodes)?;
    let mut witnesses: Vec<ResidueSet> = inner
        .witnesses
        .iter()
        .map(|w| match w {
            AnySet::Residues(s) => canonicalize_residues(&s.complement()).map(|c| c.representative),
            AnySet::Integers(_) => unreachable!("modular search yields residue sets"),
        })
        .collect::<Result<_>>()?;
    sort_residue_witnesses(&mut witnesses);
    Ok(ExtremalResult {
        side,
        n,
        modulus: Some(modulus),
        width_cap: None,
        value: total - inner.value,
        witnesses: witnesses.into_iter().map(AnySet::Residues).collect(),
        search_space_size: inner.search_space_size,
        pruned_count: inner.pruned_count,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationResult {
    pub matched: bool,
    pub tag: Option<FamilyTag>,
    /// Sends the family set (embedded, when modular) onto the input.
    pub map: Option<AffineMap>,
}

impl ClassificationResult {
    fn unmatched() -> Self {
        ClassificationResult {
            matched: false,
            tag: None,
            map: None,
        }
    }
}

fn classify_integers(a: &IntegerSet) -> Result<ClassificationResult> {
    let ca = canonicalize_integers(a)?;
    let ga = ca.from_representative.scale().abs();
    let min_a = a.min().expect("nonempty");
    for tag in FamilyTag::of_size(a.len() as u64) {
        let fam = generate_family(tag)?;
        let cf = canonicalize_integers(&fam)?;
        if cf.representative != ca.representative {
            continue;
        }
        let gf = cf.from_representative.scale().abs();
        if ga % gf != 0 {
            continue;
        }
        for sign in [1i64, -1] {
            let scale = sign * ga / gf;
            let e = fam.elements();
            let anchor = if scale > 0 { e[0] } else { e[e.len() - 1] };
            let map = AffineMap::integer(scale, min_a - scale * anchor)?;
            if map.apply_integers(&fam)? == *a {
                return Ok(ClassificationResult {
                    matched: true,
                    tag: Some(tag),
                    map: Some(map),
                });
            }
        }
    }
    Ok(ClassificationResult::unmatched())
}

fn classify_residues(a: &ResidueSet) -> Result<ClassificationResult> {
    let ca = canonicalize_residues(a)?;
    let back = ca.to_representative.inverse().expect("modular maps invert");
    for tag in FamilyTag::of_size(a.len() as u64) {
        let emb = embed_mod(&generate_family(tag)?, a.modulus(), 0)?;
        if !emb.injective {
            continue;
        }
        let cf = canonicalize_residues(&emb.set)?;
        if cf.encoding == ca.encoding {
            return Ok(ClassificationResult {
                matched: true,
                tag: Some(tag),
                map: Some(back.compose(&cf.to_representative)?),
            });
        }
    }
    Ok(ClassificationResult::unmatched())
}

/// Decides whether `A` is an affine image of some `E(k,m)` or `F(k,m)` of
/// the same size (embedded in `Z/NZ` for residue sets).
pub fn classify_extremal(a: &AnySet) -> Result<ClassificationResult> {
    if a.is_empty() {
        return Err(Error::invalid("cannot classify the empty set"));
    }
    match a {
        AnySet::Integers(s) => classify_integers(s),
        AnySet::Residues(s) => classify_residues(s),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdRow {
    pub n: u64,
    #[serde(rename = "M3")]
    pub m3: u64,
    pub half_n2_match: bool,
    #[serde(rename = "all_EF_witnesses")]
    pub all_ef_witnesses: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdScan {
    pub modulus: u64,
    pub rows: Vec<ThresholdRow>,
    /// Largest `n` such that every row up to `n` has both properties.
    pub threshold_n: u64,
}

impl ThresholdScan {
    pub fn threshold_ratio(&self) -> f64 {
        self.threshold_n as f64 / self.modulus as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,M3,half_n2_match,all_EF_witnesses\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.n, r.m3, r.half_n2_match, r.all_ef_witnesses
            ));
        }
        out
    }
}

/// For each `n ≤ N`, whether `M₃(n,N) = ⌈n²/2⌉` and whether every extremal
/// set is an affine image of an `E`/`F` family set.
pub fn threshold_scan(modulus: u64, budget_nodes: u64) -> Result<ThresholdScan> {
    let mut rows = Vec::new();
    for n in 1..=modulus {
        let r = extremal_mod(n, modulus, Side::Max, budget_nodes)?;
        let all_ef = r
            .witnesses
            .iter()
            .map(classify_extremal)
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(|c| c.matched);
        rows.push(ThresholdRow {
            n,
            m3: r.value,
            half_n2_match: r.value == half_square_ceil(n),
            all_ef_witnesses: all_ef,
        });
    }
    let threshold_n = rows
        .iter()
        .take_while(|r| r.half_n2_match && r.all_ef_witnesses)
        .last()
        .map_or(0, |r| r.n);
    Ok(ThresholdScan {
        modulus,
        rows,
        threshold_n,
    })
}

//! Seeded verification suites. Each case reports both sides of the checked
//! relation and whether it holds; a suite passes when every case holds.
//! Inputs for case `k` come from stream `k` of a ChaCha generator keyed by
//! the seed, so results do not depend on thread count.

use std::fmt;
use std::str::FromStr;

use num_integer::Roots;
use num_rational::BigRational;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{check_energy_lemma, check_final_lemma, check_t3_energy_inequality, check_union_doubling, rectify};
use crate::arith::{half_square_ceil, is_prime};
use crate::canonical::canonicalize_integers;
use crate::construct::{behrend_most_populous_radius, behrend_set, embed_mod, generate_family, FamilyTag};
use crate::count::{complement_total, t3, t3_integers, t3_naive, AdditiveSet};
use crate::error::{Error, Result};
use crate::rational::{format_rational, sqrt_interval};
use crate::search::{
    classify_extremal, extremal_mod, extremal_mod_via_complement, max3ap_integers, Side, DEFAULT_BUDGET_NODES,
};
use crate::sets::{AnySet, ResidueSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Complement,
    EnergyLemma,
    T3Energy,
    ExtremalInt,
    ExtremalMod,
    Rectify,
    FinalLemma,
    Behrend,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Complement,
        Suite::EnergyLemma,
        Suite::T3Energy,
        Suite::ExtremalInt,
        Suite::ExtremalMod,
        Suite::Rectify,
        Suite::FinalLemma,
        Suite::Behrend,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Complement => "complement",
            Suite::EnergyLemma => "energy-lemma",
            Suite::T3Energy => "t3-energy",
            Suite::ExtremalInt => "extremal-int",
            Suite::ExtremalMod => "extremal-mod",
            Suite::Rectify => "rectify",
            Suite::FinalLemma => "final-lemma",
            Suite::Behrend => "behrend",
        }
    }

    fn default_cases(self) -> usize {
        match self {
            Suite::Rectify => 100,
            _ => 1000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Number of randomized cases; each suite has its own default.
    pub cases: Option<usize>,
    /// Modulus override for suites that work in one group.
    pub modulus: Option<u64>,
    /// Largest cardinality for the integer extremal suite.
    pub n_max: Option<u64>,
    pub budget_nodes: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            cases: None,
            modulus: None,
            n_max: None,
            budget_nodes: DEFAULT_BUDGET_NODES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteCase {
    pub case: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

impl SuiteCase {
    fn new(case: String, lhs: impl ToString, rhs: impl ToString, holds: bool) -> Self {
        SuiteCase {
            case,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            holds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: Vec<SuiteCase>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.holds)
    }

    pub fn violations(&self) -> usize {
        self.cases.iter().filter(|c| !c.holds).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("case,lhs,rhs,holds\n");
        for c in &self.cases {
            out.push_str(&format!("{},{},{},{}\n", c.case, c.lhs, c.rhs, c.holds));
        }
        out
    }
}

fn case_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

fn sample(rng: &mut ChaCha8Rng, modulus: u64, size: usize) -> ResidueSet {
    let picked = index::sample(rng, modulus as usize, size);
    ResidueSet::new(modulus, picked.into_iter().map(|x| x as u64)).expect("distinct residues")
}

fn random_subset(rng: &mut ChaCha8Rng, modulus: u64, lo: usize, hi: usize) -> ResidueSet {
    let size = rng.gen_range(lo..=hi);
    sample(rng, modulus, size)
}

/// Random subset of a random dilated, translated interval, so that pairs
/// drawn with the same dilator have large energy.
fn structured_subset(rng: &mut ChaCha8Rng, modulus: u64, d: u64, len: u64) -> ResidueSet {
    let size = rng.gen_range(1..=len as usize);
    let shift = rng.gen_range(0..modulus);
    let picked = index::sample(rng, len as usize, size);
    ResidueSet::new(modulus, picked.into_iter().map(|x| x as u64))
        .expect("len below modulus")
        .dilate(d as i64)
        .translate(shift as i64)
}

fn require_modulus(modulus: u64, what: &str) -> Result<()> {
    if modulus.is_multiple_of(2) || modulus.is_multiple_of(3) || !is_prime(modulus) {
        return Err(Error::invalid(format!("{what} needs a prime modulus above 3, got {modulus}")));
    }
    Ok(())
}

fn complement_suite(cfg: &SuiteConfig) -> Result<Vec<SuiteCase>> {
    let modulus = cfg.modulus.unwrap_or(7);
    if modulus.is_multiple_of(2) || modulus.is_multiple_of(3) {
        return Err(Error::invalid(format!("the complement identity needs gcd(N, 6) = 1, got {modulus}")));
    }
    let check = |case: String, a: ResidueSet| {
        let lhs = t3(&a) as u128 + t3(&a.complement()) as u128;
        let rhs = complement_total(a.len() as u64, modulus);
        SuiteCase::new(case, lhs, rhs, lhs == rhs)
    };
    if modulus <= 16 {
        Ok((0u64..1 << modulus)
            .into_par_iter()
            .map(|mask| {
                let a = ResidueSet::new(modulus, (0..modulus).filter(|i| mask >> i & 1 == 1)).expect("in range");
                check(format!("mask-{mask}"), a)
            })
            .collect())
    } else {
        let cases = cfg.cases.unwrap_or(Suite::Complement.default_cases());
        Ok((0..cases)
            .into_par_iter()
            .map(|k| {
                let mut rng = case_rng(cfg.seed, k);
                check(format!("random-{k}"), random_subset(&mut rng, modulus, 0, modulus as usize))
            })
            .collect())
    }
}

fn energy_lemma_suite(cfg: &SuiteConfig) -> Result<Vec<SuiteCase>> {
    let modulus = cfg.modulus.unwrap_or(101);
    require_modulus(modulus, "energy-lemma")?;
    let cases = cfg.cases.unwrap_or(Suite::EnergyLemma.default_cases());
    let rows: Vec<Result<Vec<SuiteCase>>> = (0..cases)
        .into_par_iter()
        .map(|k| {
            let mut rng = case_rng(cfg.seed, k);
            let (a, b) = if k % 2 == 0 {
                let hi = (modulus / 2) as usize;
                (random_subset(&mut rng, modulus, 1, hi), random_subset(&mut rng, modulus, 1, hi))
            } else {
                let d = rng.gen_range(1..modulus);
                let len = rng.gen_range(2..=(modulus / 4).max(2));
                (structured_subset(&mut rng, modulus, d, len), structured_subset(&mut rng, modulus, d, len))
            };
            let c = check_energy_lemma(&a, &b)?;
            let (na, nb) = (a.len() as u128, b.len() as u128);
            let cap = (na * na * nb).min(nb * nb * na).min((na.pow(3) * nb.pow(3)).sqrt());
            let size_ok = c.size_bounds.iter().all(|x| x.holds);
            let sum_lhs = c.sumset[0].lhs.clone().max(c.sumset[1].lhs.clone());
            // the largest admissible η, rounded down to a rational
            let ratio = BigRational::new(
                (c.energy as u128 * c.energy as u128).into(),
                (na.pow(3) * nb.pow(3)).into(),
            );
            let (eta, _) = sqrt_interval(&ratio, &BigRational::new(1.into(), 1_000_000_000u64.into()))?;
            let u = check_union_doubling(&a, &b, &eta)?;
            let (iv_lhs, iv_rhs, iv_holds) = match &u.conclusion {
                Some(x) => (format_rational(&x.lhs), format_rational(&x.rhs), u.applicable && x.holds),
                None => ("n/a".into(), "n/a".into(), false),
            };
            Ok(vec![
                SuiteCase::new(format!("i-{k}"), c.energy, cap, size_ok && c.energy as u128 <= cap),
                SuiteCase::new(format!("ii-{k}"), format_rational(&c.overlap.lhs), format_rational(&c.overlap.rhs), c.overlap.holds),
                SuiteCase::new(format!("iii-{k}"), format_rational(&sum_lhs), c.energy, c.sumset.iter().all(|x| x.holds)),
                SuiteCase::new(format!("iv-{k}"), iv_lhs, iv_rhs, iv_holds),
            ])
        })
        .collect();
    Ok(rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

fn t3_energy_suite(cfg: &SuiteConfig) -> Result<Vec<SuiteCase>> {
    let modulus = cfg.modulus.unwrap_or(101);
    if modulus.is_multiple_of(2) {
        return Err(Error::invalid("t3-energy needs an odd modulus"));
    }
    let cases = cfg.cases.unwrap_or(Suite::T3Energy.default_cases());
    (0..cases)
        .into_par_iter()
        .map(|k| {
            let mut rng = case_rng(cfg.seed, k);
            let n = modulus as usize;
            let (a1, a2, a3) = (
                random_subset(&mut rng, modulus, 0, n),
                random_subset(&mut rng, modulus, 0, n),
                random_subset(&mut rng, modulus, 0, n),
            );
            let c = check_t3_energy_inequality(&a1, &a2, &a3)?;
            Ok(SuiteCase::new(format!("{k}"), format_rational(&c.lhs), format_rational(&c.rhs), c.holds))
        })
        .collect()
}

fn extremal_int_suite(cfg: &SuiteConfig) -> Result<Vec<SuiteCase>> {
    let n_max = cfg.n_max.unwrap_or(8);
    let mut out = Vec::new();
    for n in 1..=n_max {
        let r = max3ap_integers(n, 2 * n, cfg.budget_nodes)?;
        let target = half_square_ceil(n);
        out.push(SuiteCase::new(format!("value-{n}"), r.value, target, r.value == target));
        let mut families: Vec<AnySet> = FamilyTag::of_size(n)
            .into_iter()
            .map(|t| {
                let f = generate_family(t)?;
                Ok(AnySet::Integers(canonicalize_integers(&f)?.representative))
            })
            .collect::<Result<_>>()?;
        families.sort_by_key(elements_of);
        families.dedup();
        let all_classified = r
            .witnesses
            .iter()
            .map(classify_extremal)
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(|c| c.matched);
        out.push(SuiteCase::new(
            format!("witnesses-{n}"),
            r.witnesses.len(),
            families.len(),
            r.witnesses == families && all_classified,
        ));
    }
    Ok(out)
}

fn elements_of(s: &AnySet) -> Vec<i64> {
    match s {
        AnySet::Integers(x) => x.elements().to_vec(),
        AnySet::Residues(x) => x.iter().map(|v| v as i64).collect(),
    }
}

fn extremal_mod_suite(cfg: &SuiteConfig) -> Result<Vec<SuiteCase>> {
    let moduli: Vec<u64> = match cfg.modulus {
        Some(m) => vec![m],
        None => vec![5, 7, 11, 13],
    };
    let mut out = Vec::new();
    for &p in &moduli {
        require_modulus(p, "extremal-mod")?;
        let mut maxima = Vec::new();
        for n in 1..=p {
            for side in [Side::Max, Side::Min] {
                let direct = extremal_mod(n, p, side, cfg.budget_nodes)?;
                let via = extremal_mod_via_complement(n, p, side, cfg.budget_nodes)?;
                let recount = direct.witnesses.iter().all(|w| match w {
                    AnySet::Residues(s) => t3_naive(s, s, s).map(|v| v == direct.value).unwrap_or(false),
                    AnySet::Integers(_) => false,
                });
                let label = match side {
                    Side::Max => "max",
                    Side::Min => "min",
                };
                out.push(SuiteCase::new(
                    format!("{label}-{n}-{p}"),
                    direct.value,
                    via.value,
                    direct.value == via.value && direct.witnesses == via.witnesses && recount,
                ));
                if side == Side::Max {
                    maxima.push(direct.value);
                }
            }
        }
        let monotone = maxima.windows(2).all(|w| w[0] <= w[1]);
        out.push(SuiteCase::new(format!("monotone-{p}"), maxima.len(), p, monotone));
    }
    for (n, p, expected) in [(3u64, 7u64, 5u64), (4, 5, 12)] {
        if moduli.contains(&p) {
            let v = extremal_mod(n, p, Side::Max, cfg.budget_nodes)?.value;
            out.push(SuiteCase::new(format!("spot-{n}-{p}"), v, expected, v == expected));
        }
    }
    Ok(out)
}

fn rectify_suite(cfg: &SuiteConfig) -> Result<Vec<SuiteCase>> {
    let modulus = cfg.modulus.unwrap_or(10007);
    require_modulus(modulus, "rectify")?;
    let cases = cfg.cases.unwrap_or(Suite::Rectify.default_cases());
    let rows: Vec<Result<[SuiteCase; 2]>> = (0..cases)
        .map(|k| {
            let mut rng = case_rng(cfg.seed, k);
            let d0 = rng.gen_range(1..modulus);
            let len = rng.gen_range(2..=60u64.min(modulus - 1));
            let shift = rng.gen_range(0..modulus);
            let a = ResidueSet::new(modulus, 0..len)?.dilate(d0 as i64).translate(shift as i64);
            let r = rectify(&a, 1.0)?;
            let interval = SuiteCase::new(
                format!("interval-{k}"),
                r.arc_length,
                len - 1,
                r.arc_length == len - 1 && r.covered == len,
            );
            let b = random_subset(&mut rng, modulus, 3, 30);
            let scale = rng.gen_range(1..modulus);
            let t = rng.gen_range(0..modulus);
            let image = b.dilate(scale as i64).translate(t as i64);
            let (r1, r2) = (rectify(&b, 1.0)?, rectify(&image, 1.0)?);
            let equivariance = SuiteCase::new(
                format!("equivariance-{k}"),
                r1.arc_length,
                r2.arc_length,
                r1.arc_length == r2.arc_length,
            );
            Ok([interval, equivariance])
        })
        .collect();
    Ok(rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

fn final_lemma_suite(cfg: &SuiteConfig) -> Result<Vec<SuiteCase>> {
    let modulus = cfg.modulus.unwrap_or(1009);
    require_modulus(modulus, "final-lemma")?;
    let cases = cfg.cases.unwrap_or(Suite::FinalLemma.default_cases());
    let half = (modulus / 24) as i64;
    (0..cases)
        .into_par_iter()
        .map(|k| {
            let mut rng = case_rng(cfg.seed, k);
            let a = if k % 4 == 3 {
                // an affine copy of a family set that stays inside the window
                let n = rng.gen_range(1..=(half as u64 / 2).max(1));
                let tags = FamilyTag::of_size(n);
                let tag = tags[rng.gen_range(0..tags.len())];
                let f = generate_family(tag)?;
                let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                let e = f.elements();
                let (lo, hi) = (e[0], e[e.len() - 1]);
                let (from, to) = if sign > 0 { (-half - lo, half - hi) } else { (-half + hi, half + lo) };
                let shift = rng.gen_range(from..=to);
                let image = f.dilate(sign)?.translate(shift);
                embed_mod(&image, modulus, 0)?.set
            } else {
                let n = rng.gen_range(1..=40usize);
                let outside = n / 20;
                let window = ResidueSet::from_reduced(modulus, -half..=half)?;
                let inner = sample(&mut rng, window.len() as u64, n - outside);
                let win = window.to_vec();
                let inside = ResidueSet::new(modulus, inner.iter().map(|i| win[i as usize]))?;
                let rest = window.complement();
                let others = rest.to_vec();
                let outer = sample(&mut rng, others.len() as u64, outside);
                inside.union(&ResidueSet::new(modulus, outer.iter().map(|i| others[i as usize]))?)?
            };
            let c = check_final_lemma(&a)?;
            Ok(SuiteCase::new(format!("{k}"), c.t3, c.bound, c.holds == Some(true)))
        })
        .collect()
}

fn behrend_suite(_cfg: &SuiteConfig) -> Result<Vec<SuiteCase>> {
    let mut out = Vec::new();
    for dim in 1..=3u32 {
        for base in 2..=6u64 {
            if base.pow(dim) > 216 {
                continue;
            }
            let popular = behrend_most_populous_radius(dim, base)?;
            for r in 0..=dim as u64 * (base - 1).pow(2) {
                let s = behrend_set(dim, base, r)?;
                if s.is_empty() {
                    continue;
                }
                let count = t3_integers(&s).t3;
                let mark = if r == popular { "-popular" } else { "" };
                out.push(SuiteCase::new(
                    format!("d{dim}-q{base}-r{r}{mark}"),
                    count,
                    s.size(),
                    count == s.size() as u64,
                ));
            }
        }
    }
    Ok(out)
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let cases = match suite {
        Suite::Complement => complement_suite(cfg)?,
        Suite::EnergyLemma => energy_lemma_suite(cfg)?,
        Suite::T3Energy => t3_energy_suite(cfg)?,
        Suite::ExtremalInt => extremal_int_suite(cfg)?,
        Suite::ExtremalMod => extremal_mod_suite(cfg)?,
        Suite::Rectify => rectify_suite(cfg)?,
        Suite::FinalLemma => final_lemma_suite(cfg)?,
        Suite::Behrend => behrend_suite(cfg)?,
    };
    Ok(SuiteReport { suite, cases })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64, cases: usize) -> SuiteConfig {
        SuiteConfig {
            seed,
            cases: Some(cases),
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn every_suite_passes_small() {
        for s in Suite::ALL {
            let cfg = match s {
                Suite::Rectify => SuiteConfig { modulus: Some(1009), ..small(1, 5) },
                Suite::ExtremalMod => SuiteConfig { modulus: Some(7), ..small(1, 5) },
                _ => small(1, 40),
            };
            let r = run_suite(s, &cfg).unwrap();
            assert!(!r.cases.is_empty(), "{s}");
            assert!(r.passed(), "{s}: {:?}", r.cases.iter().find(|c| !c.holds));
            assert!(r.to_csv().starts_with("case,lhs,rhs,holds\n"));
        }
    }

    #[test]
    fn complement_suite_is_exhaustive_for_small_moduli() {
        let r = run_suite(Suite::Complement, &SuiteConfig { modulus: Some(7), ..SuiteConfig::default() }).unwrap();
        assert_eq!(r.cases.len(), 128);
        assert!(r.passed());
        assert!(run_suite(Suite::Complement, &SuiteConfig { modulus: Some(9), ..SuiteConfig::default() }).is_err());
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let a = run_suite(Suite::T3Energy, &small(9, 30)).unwrap();
        let b = run_suite(Suite::T3Energy, &small(9, 30)).unwrap();
        let c = run_suite(Suite::T3Energy, &small(10, 30)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}

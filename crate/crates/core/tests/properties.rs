use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use threeap_core::analysis::{
    check_energy_lemma, check_t3_energy_inequality, decompose_heuristic, rectify, DecompositionParams,
};
use threeap_core::arith::binomial;
use threeap_core::bounds::{complement_transfer, BoundRecord, BoundSide, Ledger, Target};
use threeap_core::canonical::{affine_orbit_transversal, canonicalize_integers, canonicalize_residues};
use threeap_core::construct::{generate_family, Family, FamilyTag};
use threeap_core::count::{complement_identity_check, count_report, t3, t3_fast, t3_integers, t3_naive};
use threeap_core::rational::rat;
use threeap_core::{AffineMap, IntegerSet, ResidueSet};

const PRIMES: [u64; 10] = [5, 7, 11, 13, 17, 19, 23, 29, 31, 101];

fn residue_set(max_modulus: u64) -> impl Strategy<Value = ResidueSet> {
    (1..=max_modulus).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n as usize).prop_map(move |bits| {
            ResidueSet::new(n, (0..n).filter(|&x| bits[x as usize])).unwrap()
        })
    })
}

fn prime_set() -> impl Strategy<Value = ResidueSet> {
    proptest::sample::select(PRIMES.to_vec()).prop_flat_map(|p| {
        proptest::collection::vec(any::<bool>(), p as usize)
            .prop_map(move |bits| ResidueSet::new(p, (0..p).filter(|&x| bits[x as usize])).unwrap())
    })
}

fn triple(max_modulus: u64) -> impl Strategy<Value = [ResidueSet; 3]> {
    (1..=max_modulus).prop_flat_map(|n| {
        let one = move || {
            proptest::collection::vec(any::<bool>(), n as usize)
                .prop_map(move |bits| ResidueSet::new(n, (0..n).filter(|&x| bits[x as usize])).unwrap())
        };
        (one(), one(), one()).prop_map(|(a, b, c)| [a, b, c])
    })
}

fn unit(p: u64) -> impl Strategy<Value = i64> {
    (1..p as i64).prop_map(|a| a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fast_count_matches_definition([a1, a2, a3] in triple(200)) {
        prop_assert_eq!(t3_fast(&a1, &a2, &a3).unwrap(), t3_naive(&a1, &a2, &a3).unwrap());
    }

    #[test]
    fn dilation_preserves_size_and_count((a, lambda) in prime_set().prop_flat_map(|a| {
        let p = a.modulus();
        (Just(a), unit(p))
    }), shift in -1000i64..1000) {
        let image = a.dilate(lambda).translate(shift);
        prop_assert_eq!(image.len(), a.len());
        prop_assert_eq!(t3(&image), t3(&a));
    }

    #[test]
    fn difference_set_is_symmetric_and_holds_zero(a in residue_set(60)) {
        prop_assume!(!a.is_empty());
        let d = a.difference_set(&a).unwrap();
        prop_assert!(d.contains(0));
        prop_assert_eq!(d.negate(), d);
    }

    #[test]
    fn report_splits_trivial_and_combinatorial(a in residue_set(80)) {
        prop_assume!(a.modulus() % 2 == 1);
        let r = count_report(&a);
        prop_assert_eq!(r.t3, r.trivial + 2 * r.combinatorial);
        prop_assert_eq!(r.trivial, a.len() as u64);
    }

    #[test]
    fn complement_identity_exact(a in residue_set(120)) {
        match complement_identity_check(&a) {
            Some(c) => prop_assert!(c.equal, "{} != {}", c.lhs, c.rhs),
            None => prop_assert!(a.modulus() % 2 == 0 || a.modulus() % 3 == 0),
        }
    }

    #[test]
    fn residue_canonical_form_is_orbit_invariant((a, scale) in prime_set().prop_flat_map(|a| {
        let p = a.modulus();
        (Just(a), unit(p))
    }), shift in 0i64..200) {
        prop_assume!(!a.is_empty());
        let map = AffineMap::modular(scale, shift, a.modulus()).unwrap();
        let image = map.apply_residues(&a).unwrap();
        let ca = canonicalize_residues(&a).unwrap();
        let cb = canonicalize_residues(&image).unwrap();
        prop_assert_eq!(&ca.encoding, &cb.encoding);
        prop_assert_eq!(&ca.representative, &cb.representative);
        prop_assert_eq!(ca.to_representative.apply_residues(&a).unwrap(), ca.representative);
    }

    #[test]
    fn integer_canonical_form_is_orbit_invariant(
        elems in proptest::collection::btree_set(-40i64..40, 1..12),
        scale in prop_oneof![-5i64..=-1, 1i64..=5],
        shift in -100i64..100,
    ) {
        let a = IntegerSet::new(elems).unwrap();
        let image = AffineMap::integer(scale, shift).unwrap().apply_integers(&a).unwrap();
        let ca = canonicalize_integers(&a).unwrap();
        let cb = canonicalize_integers(&image).unwrap();
        prop_assert_eq!(&ca.representative, &cb.representative);
        prop_assert_eq!(ca.from_representative.apply_integers(&ca.representative).unwrap(), a.clone());
        prop_assert_eq!(t3_integers(&image).t3, t3_integers(&a).t3);
    }

    #[test]
    fn transversal_covers_every_subset_once(p in proptest::sample::select(vec![5u64, 7, 11]), frac in 0.0f64..1.0) {
        let n = 1 + ((p - 1) as f64 * frac) as u64;
        let total: u128 = affine_orbit_transversal(n, p).unwrap().map(|r| r.orbit_size as u128).sum();
        prop_assert_eq!(total, binomial(p, n));
    }

    #[test]
    fn families_have_stated_size_and_count(k in 0u64..=20, m in 0u64..=20, even in any::<bool>()) {
        let family = if even { Family::F } else { Family::E };
        prop_assume!(!(even && k == 0 && m == 0));
        let tag = FamilyTag::new(family, k, m).unwrap();
        let set = generate_family(tag).unwrap();
        let n = if even { 2 * k + 2 * m } else { 2 * k + 2 * m + 1 };
        prop_assert_eq!(set.len() as u64, n);
        prop_assert_eq!(t3_integers(&set).t3, (n * n).div_ceil(2));
    }

    #[test]
    fn energy_lemma_never_fails(a in prime_set(), b_bits in proptest::collection::vec(any::<bool>(), 101)) {
        prop_assume!(!a.is_empty());
        let p = a.modulus();
        let b = ResidueSet::new(p, (0..p).filter(|&x| b_bits[x as usize])).unwrap();
        prop_assume!(!b.is_empty());
        prop_assert!(check_energy_lemma(&a, &b).unwrap().holds());
    }

    #[test]
    fn t3_energy_inequality_never_fails([a1, a2, a3] in triple(61)) {
        prop_assume!(a1.modulus() % 2 == 1);
        prop_assert!(check_t3_energy_inequality(&a1, &a2, &a3).unwrap().holds);
    }

    #[test]
    fn rectification_is_affine_equivariant((a, scale) in prime_set().prop_flat_map(|a| {
        let p = a.modulus();
        (Just(a), unit(p))
    }), shift in 0i64..500, coverage in 0.5f64..=1.0) {
        prop_assume!(!a.is_empty());
        let image = a.dilate(scale).translate(shift);
        prop_assert_eq!(rectify(&a, coverage).unwrap().arc_length, rectify(&image, coverage).unwrap().arc_length);
    }

    #[test]
    fn decomposition_partitions_input(a in prime_set()) {
        let d = decompose_heuristic(&a, DecompositionParams::default()).unwrap();
        prop_assert_eq!(d.whole(), a);
        let mut seen = d.noise.clone();
        for part in &d.parts {
            prop_assert!(!part.is_empty());
            prop_assert!(seen.is_disjoint(part).unwrap());
            seen = seen.union(part).unwrap();
        }
    }
}

fn grid_alpha() -> impl Strategy<Value = BigRational> {
    (1i64..12).prop_map(|k| rat(k, 12))
}

/// A record that is true by construction: a known valid bound weakened by a
/// random factor.
fn valid_record() -> impl Strategy<Value = BoundRecord> {
    (grid_alpha(), 0u32..4, 0i64..=20).prop_map(|(alpha, kind, slack)| {
        let a2 = &alpha * &alpha;
        let loosen = rat(20 + slack, 20);
        let tighten = rat(20, 20 + slack);
        let (target, side, value) = match kind {
            // A random set of density α has about α³N² progressions.
            0 => (Target::MinCount, BoundSide::Upper, (&a2 * &alpha * &loosen).min(a2.clone())),
            1 => (Target::MaxCount, BoundSide::Upper, a2.clone()),
            // An interval of length αN.
            2 if alpha <= rat(1, 2) => (Target::MaxCount, BoundSide::Lower, &a2 / BigInt::from(2) * &tighten),
            _ => (Target::MinCount, BoundSide::Lower, BigRational::from_integer(0.into())),
        };
        BoundRecord::closed_form(target, alpha, side, value, "property")
    })
}

fn best_values(ledger: &Ledger) -> Vec<Option<BigRational>> {
    let mut out = Vec::new();
    for alpha in ledger.grid() {
        for target in [Target::MinCount, Target::MaxCount] {
            out.push(ledger.best_upper(target, &alpha).map(|r| r.value.clone()));
            out.push(ledger.best_lower(target, &alpha).map(|r| r.value.clone()));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ledger_stays_consistent(records in proptest::collection::vec(valid_record(), 1..30)) {
        let grid: Vec<BigRational> = (1..12).map(|k| rat(k, 12)).collect();
        let mut ledger = Ledger::with_grid(grid).unwrap();
        for r in records {
            let _ = ledger.insert(r);
            prop_assert!(ledger.is_consistent());
        }
        let before = best_values(&ledger);
        ledger.closure(100, false).unwrap();
        prop_assert!(ledger.is_consistent());
        let after = best_values(&ledger);
        for (i, (b, a)) in before.iter().zip(&after).enumerate() {
            if let Some(b) = b {
                let a = a.as_ref().expect("a best bound never disappears");
                // Even slots hold upper bounds, odd slots lower bounds.
                if i % 2 == 0 {
                    prop_assert!(a <= b);
                } else {
                    prop_assert!(a >= b);
                }
            }
        }
    }

    #[test]
    fn complement_transfer_is_an_involution(r in valid_record()) {
        let back = complement_transfer(&complement_transfer(&r, None), None);
        prop_assert_eq!(back.alpha, r.alpha);
        prop_assert_eq!(back.value, r.value);
        prop_assert_eq!(back.target, r.target);
        prop_assert_eq!(back.side, r.side);
    }
}

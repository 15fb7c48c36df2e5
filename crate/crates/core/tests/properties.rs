use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;

use epiter::analysis::{dplus, freiman_check, kneser_dichotomy, stability_bounds, stability_time};
use epiter::limits::with_window_cap;
use epiter::linops::{apply_composition, compose_coefficients};
use epiter::residue::{residue_orbit, ResidueSet};
use epiter::stability::{full_periodicity_onset, iterate_trace, theorem61_k};
use epiter::{EPSet, LinearOp, OpSequence, Rational};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn arb_op(max: u64) -> impl Strategy<Value = LinearOp> {
    (1..=max, 1..=max).prop_map(|(a, b)| LinearOp::new(a, b).unwrap())
}

fn arb_coprime_op(max: u64) -> impl Strategy<Value = LinearOp> {
    (1..=max, 1..=max)
        .prop_filter("coprime", |(a, b)| gcd(*a, *b) == 1)
        .prop_map(|(a, b)| LinearOp::new(a, b).unwrap())
}

/// Sets bounded below with a periodic upper tail: `F ∪ (R + gN + s)`.
fn arb_half_set() -> impl Strategy<Value = EPSet> {
    (
        proptest::collection::btree_set(0i128..12, 0..4),
        1u64..=6,
        proptest::collection::btree_set(0u64..6, 1..4),
        0i128..8,
    )
        .prop_map(|(f, g, rs, s)| {
            let mut out = EPSet::finite(f).unwrap();
            for r in rs {
                out = out.union(&EPSet::ap_up(s + (r % g) as i128, g, s).unwrap()).unwrap();
            }
            out
        })
}

fn arb_dense_set() -> impl Strategy<Value = EPSet> {
    prop_oneof![
        arb_half_set(),
        (0i128..6, 1u64..=6).prop_map(|(r, g)| EPSet::ap(r, g).unwrap()),
    ]
}

fn arb_small_set() -> impl Strategy<Value = EPSet> {
    prop_oneof![
        proptest::collection::btree_set(-6i128..=6, 1..5).prop_map(|s| EPSet::finite(s).unwrap()),
        arb_dense_set(),
    ]
}

/// `⃝Γ(X)` for finite `X` straight from the definition: one independent element
/// of `X` per split, weighted by the split's coefficient.
fn brute_composition(ops: &[LinearOp], x: &[i128]) -> BTreeSet<i128> {
    let mut coeffs = vec![1i128];
    for o in ops {
        coeffs = coeffs
            .iter()
            .flat_map(|c| [c * o.a() as i128, -c * o.b() as i128])
            .collect();
    }
    let mut sums = BTreeSet::from([0i128]);
    for c in coeffs {
        sums = sums
            .iter()
            .flat_map(|s| x.iter().map(move |e| s + c * e))
            .collect();
    }
    sums
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn composition_order_is_irrelevant(
        s in arb_small_set(),
        ops in proptest::collection::vec(arb_op(3), 1..=3),
        rot in 0usize..3,
    ) {
        let mut perm = ops.clone();
        perm.rotate_left(rot % ops.len());
        perm.reverse();
        prop_assert_eq!(apply_composition(&ops, &s).unwrap(), apply_composition(&perm, &s).unwrap());
    }

    #[test]
    fn multiplicities_are_conserved(ops in proptest::collection::vec(arb_op(5), 0..=12)) {
        let exp = compose_coefficients(&ops).unwrap();
        let s = ops.len();
        prop_assert_eq!(exp.total_multiplicity(), BigUint::from(1u32) << s);
        if s > 0 {
            prop_assert_eq!(exp.positive_multiplicity(), BigUint::from(1u32) << (s - 1));
            prop_assert_eq!(exp.negative_multiplicity(), BigUint::from(1u32) << (s - 1));
        }
        let l = ops.iter().map(|o| o.max_entry()).max().unwrap_or(1);
        for c in exp.terms().keys() {
            prop_assert!(BigUint::from(c.unsigned_abs()) <= BigUint::from(l).pow(s as u32));
        }
    }

    #[test]
    fn constant_cycles_divide_an_admissible_period(s in arb_dense_set(), op in arb_coprime_op(5)) {
        let trace = iterate_trace(&s, &OpSequence::constant(op), 10_000);
        let cycle = trace.cycle.expect("constant orbits on bounded-period sets close");
        let onset = full_periodicity_onset(&trace, u64::MAX).expect("iterates become fully periodic");
        // every multiple of the minimal period is a valid modulus; the cycle
        // length divides one within L^{K+1}
        let l = op.max_entry().max(2);
        let k = theorem61_k(s.upper_density().recip(), l, 10).unwrap();
        let g = onset.g / gcd(onset.g, cycle.length as u64) * cycle.length as u64;
        prop_assert!(BigUint::from(g) <= BigUint::from(l).pow(k as u32 + 1));
        prop_assert!(onset.k0 <= cycle.onset + 1);
    }

    #[test]
    fn traces_grow_monotonically(
        s in arb_dense_set(),
        ops in proptest::collection::vec(arb_coprime_op(4), 1..=3),
    ) {
        let seq = OpSequence::cyclic(vec![], ops).unwrap();
        let full = iterate_trace(&s, &seq, 2_000);
        let mut last = 0;
        for max_k in (0..=full.iterates.len().min(40) + 2).chain([full.iterates.len() + 1]) {
            let t = iterate_trace(&s, &seq, max_k);
            prop_assert!(t.distinct_count >= last);
            last = t.distinct_count;
            prop_assert_eq!(&t.iterates[..], &full.iterates[..t.iterates.len()]);
            prop_assert_eq!(t.fingerprint_collisions, 0);
        }
        let longer = iterate_trace(&s, &seq, 4_000);
        prop_assert_eq!(longer.periodicity_onset, full.periodicity_onset);
    }

    #[test]
    fn dplus_is_a_monotone_subset_of_n(s in arb_half_set(), extra in 0i128..20) {
        let d = dplus(&s).unwrap();
        prop_assert!(d.contains(0));
        prop_assert!(d.min_element() == Some(0));
        let bigger = s.union(&EPSet::finite([extra]).unwrap()).unwrap();
        prop_assert!(d.is_subset(&dplus(&bigger).unwrap()).unwrap());
    }

    #[test]
    fn kneser_branch_is_always_verified(s in arb_half_set(), k in 1u32..=4) {
        prop_assert!(kneser_dichotomy(&s, k).unwrap().verified());
    }

    #[test]
    fn residue_orbit_counts(g in 1u64..=12, mask in 1u32.., a in 1u64..=5, b in 1u64..=5) {
        prop_assume!(gcd(a, b) == 1);
        let u = ResidueSet::new(g, (0..g).filter(|i| mask >> i & 1 == 1)).unwrap();
        prop_assume!(!u.is_empty());
        let o = residue_orbit(&u, a, b, 1 << 16).unwrap();
        let l = a.max(b);
        prop_assert!(o.iterates.len() as u64 <= g.pow(3) * l * l);
        if o.sizes.iter().all(|&s| s == o.sizes[0]) {
            prop_assert!(o.iterates.len() as u64 <= (g * l).pow(2));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coefficients_match_direct_composition(
        x in proptest::collection::btree_set(-5i128..=5, 1..=4),
        ops in proptest::collection::vec(arb_op(3), 0..=3),
    ) {
        let x: Vec<i128> = x.into_iter().collect();
        let direct = apply_composition(&ops, &EPSet::finite(x.iter().copied()).unwrap()).unwrap();
        let want = brute_composition(&ops, &x);
        let (lo, hi) = (*want.first().unwrap(), *want.last().unwrap());
        prop_assert_eq!(direct.elements_in(lo - 5, hi + 5), want.into_iter().collect::<Vec<_>>());

        // the expansion's distinct coefficients carry the same information
        let exp = compose_coefficients(&ops).unwrap();
        let mut via = EPSet::finite([0]).unwrap();
        for (c, m) in exp.terms() {
            let copies: u32 = m.try_into().unwrap();
            let dilated = EPSet::finite(x.iter().copied()).unwrap().dilate(*c).unwrap();
            via = via.minkowski_sum(&dilated.sum_power(copies).unwrap()).unwrap();
        }
        prop_assert_eq!(via, direct);
    }
}

#[test]
fn finite_seeds_hit_the_cap() {
    // finite sets spread by a factor a + b per step and never cycle
    let s = EPSet::finite([0, 1, 3]).unwrap();
    let seq = OpSequence::constant(LinearOp::new(2, 1).unwrap());
    let trace = with_window_cap(1 << 12, || iterate_trace(&s, &seq, 1_000));
    assert!(trace.resource_flag.is_some());
    assert!(trace.cycle.is_none());
    assert!(!trace.is_complete());
    assert_eq!(trace.distinct_count, trace.iterates.len());
}

#[test]
fn minimal_period_need_not_absorb_the_cycle() {
    // 1 + 3Z under (3, 4) alternates between the classes 1 and 2 mod 3
    let s = EPSet::ap(1, 3).unwrap();
    let trace = iterate_trace(&s, &OpSequence::constant(LinearOp::new(3, 4).unwrap()), 100);
    assert_eq!(trace.cycle.map(|c| c.length), Some(2));
    assert_eq!(full_periodicity_onset(&trace, u64::MAX).map(|o| o.g), Some(3));
}

#[test]
fn freiman_exhaustive_to_24() {
    // X ⊂ [0, 24] with 0 ∈ X; X + X fits in 49 bits
    let mut checked = 0u64;
    for rest in 1u64..(1 << 24) {
        let mask = rest << 1 | 1;
        let elems: Vec<u32> = (0..25).filter(|i| mask >> i & 1 == 1).collect();
        if elems.iter().fold(0u64, |g, &e| gcd(g, e as u64)) != 1 {
            continue;
        }
        let mut sum = 0u64;
        for &e in &elems {
            sum |= mask << e;
        }
        let k = elems.len() as i64;
        let max = *elems.last().unwrap() as i64;
        assert!(sum.count_ones() as i64 >= (3 * k - 3).min(k + max), "{elems:?}");
        if rest % 997 == 0 {
            let x: Vec<i128> = elems.iter().map(|&e| e as i128).collect();
            let r = freiman_check(&x).unwrap();
            assert!(r.holds);
            assert_eq!(r.lhs as u32, sum.count_ones());
        }
        checked += 1;
    }
    assert!(checked > 1 << 23);
}

#[test]
fn stability_time_respects_both_bounds() {
    for (r, g) in [(1, 2), (1, 3), (2, 6), (1, 5), (1, 10), (2, 9), (3, 11), (1, 7)] {
        let a = EPSet::finite(0..r).unwrap().minkowski_sum(&EPSet::ap_up(0, g, 0).unwrap()).unwrap();
        let t = stability_time(&a, 64).unwrap().t as u64;
        let b = stability_bounds(Rational::new(r, g as i128)).unwrap();
        assert!(b.admits_ruzsa(t), "{a}: T = {t}");
        assert!(b.ruzsa_bound <= b.st_bound + 1e-12);
        assert!(b.admits_st(t));
    }
}

#[test]
fn bohr_truncation_is_deterministic() {
    use epiter::constructions::{bohr_truncation, QuadraticSurd};
    let a = bohr_truncation(&QuadraticSurd::sqrt2_minus_1(), Rational::new(1, 6), 2000).unwrap();
    let b = bohr_truncation(&QuadraticSurd::sqrt2_minus_1(), Rational::new(1, 6), 2000).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

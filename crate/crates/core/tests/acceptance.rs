//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use epiter::analysis::{stability_bounds, stability_time};
use epiter::bits::Bits;
use epiter::constructions::{
    ap_counterexample, bohr_truncation, parity_flip_sequence, power_tower_starts,
    sparse_gap_profile, QuadraticSurd,
};
use epiter::grammar::{parse_exact_set, parse_ops};
use epiter::linops::{apply_linear_op, dominant_coefficient_pair, minimal_depth, DominantOutcome};
use epiter::residue::{decompose_equality_case, gamma_mod, period, ResidueSet};
use epiter::stability::{theorem61_verify, Verdict};
use epiter::{canonicalize, EPSet, LinearOp, RawEpSet, Rational};

struct Outcome {
    pass: bool,
    summary: String,
    report: Value,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn op(a: u64, b: u64) -> LinearOp {
    LinearOp::new(a, b).unwrap()
}

fn coprime_pairs(max: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for a in 1..=max {
        for b in 1..=max {
            if gcd(a, b) == 1 {
                out.push((a, b));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// 1. orbit of Γ_{a,b} on {abm + 1 : m ≥ 0}

fn criterion_1() -> Outcome {
    let mut rows = Vec::new();
    let mut pass = true;
    for a in 2..=7u64 {
        for b in 1..a {
            if gcd(a, b) != 1 {
                continue;
            }
            let m = a * b;
            let d = a - b;
            // order of a − b modulo ab by direct multiplication
            let mut ord = 1u64;
            let mut p = d % m;
            while p != 1 % m {
                p = p * d % m;
                ord += 1;
            }
            let (x, predicted) = ap_counterexample(a, b).unwrap();
            let mut cur = x.clone();
            let mut residue = 1u64;
            let mut matches = x == EPSet::ap_up(1, m, 1).unwrap();
            let mut iterates = vec![cur.clone()];
            for _ in 1..=2 * ord {
                cur = apply_linear_op(op(a, b), &cur).unwrap();
                residue = residue * d % m;
                matches &= cur == EPSet::ap(residue as i128, m).unwrap();
                iterates.push(cur.clone());
            }
            // eventually constant from step 1 on
            let constant_tail = iterates[1..].windows(2).all(|w| w[0] == w[1]);
            let stable_ok = constant_tail == (a == b + 1) && predicted.stable == (a == b + 1);
            let ok = matches && stable_ok && predicted.cycle_length == ord;
            pass &= ok;
            rows.push(json!({"a": a, "b": b, "order": ord, "stable": constant_tail, "ok": ok}));
        }
    }
    Outcome {
        pass,
        summary: format!("{} coprime pairs, exact class equality", rows.len()),
        report: json!({"pairs": rows}),
    }
}

// ---------------------------------------------------------------------------
// 2. equality-case decompositions, exhaustive

#[derive(Default, Clone, Copy)]
struct DecompositionTally {
    instances: u64,
    equality: u64,
    hypotheses: u64,
    certified: u64,
    violations: u64,
}

impl DecompositionTally {
    fn add(mut self, o: DecompositionTally) -> DecompositionTally {
        self.instances += o.instances;
        self.equality += o.equality;
        self.hypotheses += o.hypotheses;
        self.certified += o.certified;
        self.violations += o.violations;
        self
    }
}

/// `|aU + bU|` by enumerating pairs.
fn pair_image_size(u: &ResidueSet, a: u64, b: u64) -> usize {
    let g = u.modulus();
    let mut hit = vec![false; g as usize];
    for x in u.iter() {
        for y in u.iter() {
            hit[((a * x + b * y) % g) as usize] = true;
        }
    }
    hit.iter().filter(|&&h| h).count()
}

fn decomposition_instance(u: &ResidueSet, a: u64, b: u64, oracle: bool) -> DecompositionTally {
    let mut t = DecompositionTally {
        instances: 1,
        ..Default::default()
    };
    let image = gamma_mod(u, a, b);
    if oracle && pair_image_size(u, a, b) != image.len() {
        t.violations += 1;
    }
    if image.len() < u.len() {
        t.violations += 1;
    }
    if image.len() == u.len() {
        t.equality += 1;
        if period(&image).unwrap() != period(u).unwrap() {
            t.violations += 1;
        }
        if u.contains(0) && !u.in_proper_subgroup() {
            t.hypotheses += 1;
            match decompose_equality_case(u, a, b) {
                Ok(c) if c.verify(u).is_ok() => t.certified += 1,
                _ => t.violations += 1,
            }
        }
    }
    t
}

fn criterion_2() -> Outcome {
    let pairs = coprime_pairs(6);
    let mut cells = Vec::new();
    for g in 1..=24u64 {
        for &(a, b) in &pairs {
            cells.push((g, a, b));
        }
    }
    let results: Vec<(u64, DecompositionTally)> = cells
        .par_iter()
        .map(|&(g, a, b)| {
            let mut t = DecompositionTally::default();
            if g <= 16 {
                for mask in 1u64..(1 << g) {
                    let u = ResidueSet::from_bits(Bits::from_fn(g as usize, |i| mask >> i & 1 == 1));
                    t = t.add(decomposition_instance(&u, a, b, g <= 10));
                }
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(g << 16 | a << 8 | b);
                for _ in 0..10_000 {
                    let mask = rng.gen_range(1u64..(1 << g));
                    let u = ResidueSet::from_bits(Bits::from_fn(g as usize, |i| mask >> i & 1 == 1));
                    t = t.add(decomposition_instance(&u, a, b, false));
                }
            }
            (g, t)
        })
        .collect();
    let mut by_g: BTreeMap<u64, DecompositionTally> = BTreeMap::new();
    for (g, t) in results {
        let e = by_g.entry(g).or_default();
        *e = e.add(t);
    }
    let total = by_g.values().fold(DecompositionTally::default(), |acc, t| acc.add(*t));
    let rows: Vec<Value> = by_g
        .iter()
        .map(|(g, t)| {
            json!({"g": g, "instances": t.instances, "equality": t.equality,
                   "hypotheses": t.hypotheses, "certified": t.certified, "violations": t.violations})
        })
        .collect();
    Outcome {
        pass: total.violations == 0 && total.certified == total.hypotheses,
        summary: format!(
            "{} instances, {} equality cases, {} certificates, {} violations",
            total.instances, total.equality, total.certified, total.violations
        ),
        report: json!({"moduli": rows}),
    }
}

// ---------------------------------------------------------------------------
// 3. oracle equivalence on [−200, 200]

const CHECK: i128 = 200;
const PAD: i128 = 1000;

fn raw_member(r: &RawEpSet, x: i128) -> bool {
    let g = r.period as i128;
    if x < r.lo {
        r.neg_tail.get(x.rem_euclid(g) as usize)
    } else if x > r.hi {
        r.pos_tail.get(x.rem_euclid(g) as usize)
    } else {
        r.window.get((x - r.lo) as usize)
    }
}

fn random_raw(rng: &mut ChaCha8Rng) -> RawEpSet {
    let g = rng.gen_range(1u64..=12);
    let lo = rng.gen_range(-40i128..=40);
    let len = rng.gen_range(0..=(40 - lo + 1).min(30)) as usize;
    let density = rng.gen_range(0.1..0.9);
    let mut bit = |_| rng.gen_bool(density);
    RawEpSet {
        period: g,
        lo,
        hi: lo + len as i128 - 1,
        window: Bits::from_fn(len, &mut bit),
        neg_tail: Bits::from_fn(g as usize, &mut bit),
        pos_tail: Bits::from_fn(g as usize, &mut bit),
    }
}

/// Brute-force membership of `x` in `aS − bT`, searching `|y| ≤ PAD`.
fn oracle_gamma(s: &RawEpSet, t: &RawEpSet, a: i128, b: i128, x: i128) -> bool {
    (-PAD..=PAD).any(|y| {
        let z = a * y - x;
        raw_member(s, y) && z % b == 0 && raw_member(t, z / b)
    })
}

fn criterion_3() -> Outcome {
    const RUNS: u64 = 600;
    let results: Vec<(String, usize)> = (0..RUNS)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + i);
            let rs = random_raw(&mut rng);
            let rt = random_raw(&mut rng);
            let s = canonicalize(&rs).unwrap();
            let t = canonicalize(&rt).unwrap();
            let kind = i % 7;
            let (rs2, rt2) = (rs.clone(), rt.clone());
            let (label, got, want): (String, EPSet, Box<dyn Fn(i128) -> bool>) = match kind {
                0 => (
                    "sum".into(),
                    s.minkowski_sum(&t).unwrap(),
                    Box::new(move |x| oracle_gamma(&rs2, &rt2, 1, -1, x)),
                ),
                1 => (
                    "difference".into(),
                    s.difference_set(&t).unwrap(),
                    Box::new(move |x| oracle_gamma(&rs2, &rt2, 1, 1, x)),
                ),
                2 => {
                    let a = rng.gen_range(1u64..=4);
                    let b = rng.gen_range(1u64..=4);
                    (
                        format!("gamma({a},{b})"),
                        apply_linear_op(op(a, b), &s).unwrap(),
                        Box::new(move |x| oracle_gamma(&rs2, &rs2, a as i128, b as i128, x)),
                    )
                }
                3 => {
                    let n = [-4i128, -3, -2, -1, 1, 2, 3, 4][rng.gen_range(0..8)];
                    (
                        format!("dilate({n})"),
                        s.dilate(n).unwrap(),
                        Box::new(move |x| x % n == 0 && raw_member(&rs2, x / n)),
                    )
                }
                4 => ("negate".into(), s.negate(), Box::new(move |x| raw_member(&rs2, -x))),
                5 => {
                    let c = rng.gen_range(-50i128..=50);
                    (
                        format!("translate({c})"),
                        s.translate(c),
                        Box::new(move |x| raw_member(&rs2, x - c)),
                    )
                }
                _ => (
                    "union".into(),
                    s.union(&t).unwrap(),
                    Box::new(move |x| raw_member(&rs2, x) || raw_member(&rt2, x)),
                ),
            };
            let mut bad = 0;
            for x in -CHECK..=CHECK {
                if got.contains(x) != want(x) {
                    bad += 1;
                }
                // canonical forms keep memberships of their raw inputs
                if canonicalize(&rs).unwrap().contains(x) != raw_member(&rs, x) {
                    bad += 1;
                }
            }
            (label, bad)
        })
        .collect();
    let mut per_op: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for (label, bad) in &results {
        let key = label.split('(').next().unwrap().to_string();
        let e = per_op.entry(key).or_default();
        e.0 += 1;
        e.1 += *bad as u64;
    }
    let discrepancies: u64 = per_op.values().map(|v| v.1).sum();
    Outcome {
        pass: discrepancies == 0 && results.len() >= 500,
        summary: format!("{} applications, {} discrepancies", results.len(), discrepancies),
        report: json!({
            "applications": results.len(),
            "per_operation": per_op.iter().map(|(k, v)| json!({"op": k, "runs": v.0, "discrepancies": v.1})).collect::<Vec<_>>(),
        }),
    }
}

// ---------------------------------------------------------------------------
// 4. D⁺ stability bounds

/// `D⁺(A)` on `[0, 200]` by brute force over `A ∩ [0, PAD]`.
fn brute_dplus_agrees(a: &EPSet, d: &EPSet) -> bool {
    let members: Vec<i128> = a.elements_in(0, PAD);
    (0..=CHECK).all(|x| d.contains(x) == members.iter().any(|&y| a.contains(y + x)))
}

fn criterion_4() -> Outcome {
    let mut rows = Vec::new();
    let mut pass = true;
    let low: &[(i128, u64)] = &[
        (1, 2), (2, 4), (3, 6), (5, 10),
        (1, 3), (2, 6), (4, 12),
        (1, 5), (2, 10), (3, 15),
        (1, 10), (2, 20), (3, 30),
    ];
    let high: &[&str] = &[
        "U({0,1,2}, AP+(0,5,0), AP+(1,5,1), AP+(2,5,2))",
        "U(AP+(0,3,0), AP+(1,3,1))",
        "U(AP+(0,7,0), AP+(2,7,2), AP+(3,7,3), AP+(6,7,6))",
        "U({0}, AP+(5,2,5), AP+(8,4,8))",
        "N",
    ];
    for &(r, g) in low {
        let a = EPSet::finite(0..r).unwrap().minkowski_sum(&EPSet::ap_up(0, g, 0).unwrap()).unwrap();
        let st = stability_time(&a, 64).unwrap();
        let density = Rational::new(r, g as i128);
        let bounds = stability_bounds(density).unwrap();
        let t = st.t as u64;
        let oracle = st.iterates.windows(2).all(|w| brute_dplus_agrees(&w[0], &w[1]));
        let ok = bounds.admits_ruzsa(t) && bounds.admits_st(t) && oracle;
        pass &= ok;
        rows.push(json!({
            "set": a.to_string(), "density": density.to_string(), "T": t,
            "ruzsa_bound": bounds.ruzsa_bound, "st_bound": bounds.st_bound, "ok": ok,
        }));
    }
    for text in high {
        let a = parse_exact_set(text).unwrap();
        let density = a.upper_density();
        let st = stability_time(&a, 64).unwrap();
        let ok = density > Rational::new(1, 2)
            && st.t <= 1
            && st.iterates[1] == EPSet::naturals()
            && stability_bounds(density).is_err()
            && brute_dplus_agrees(&st.iterates[0], &st.iterates[1]);
        pass &= ok;
        rows.push(json!({"set": a.to_string(), "density": density.to_string(), "T": st.t, "ok": ok}));
    }
    Outcome {
        pass,
        summary: format!("{} fixtures", rows.len()),
        report: json!({"fixtures": rows}),
    }
}

// ---------------------------------------------------------------------------
// 5. eventual-periodicity verifier grid

const GRID_SETS: &[&str] = &[
    "Z",
    "N",
    "AP(0,2)",
    "AP(1,3)",
    "AP(2,5)",
    "AP(3,7)",
    "AP+(1,3,1)",
    "AP+(0,2,0)",
    "AP+(3,4,3)",
    "AP+(2,7,2)",
    "AP+(5,1,5)",
    "AP+(-3,1,-3)",
    "AP+(12,1,12)",
    "U(AP(0,6), AP(1,6))",
    "U(AP(0,5), AP(1,5), AP(3,5))",
    "U(AP+(0,4,0), AP+(1,6,1))",
    "U(AP+(0,3,0), AP+(2,5,2), AP+(1,7,1))",
    "U({0,1}, AP+(5,5,5), AP+(6,5,6))",
    "U({0,2,3}, AP+(10,3,10))",
    "U(AP(1,4), AP+(2,8,2))",
    "U({-4,-1}, AP(0,9), AP+(4,6,4))",
    "U(AP+(0,10,0), AP+(3,10,3), AP+(7,10,7))",
];

fn random_cycle(seed: u64, len: usize, max: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atoms = String::new();
    while atoms.matches('(').count() < len {
        let a = rng.gen_range(1..=max);
        let b = rng.gen_range(1..=max);
        if gcd(a, b) == 1 {
            atoms.push_str(&format!("({a},{b})"));
        }
    }
    format!("cyc[{atoms}]")
}

fn grid_sequences() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = [
        ("constant", "cyc[(2,1)]"),
        ("constant", "cyc[(3,1)]"),
        ("constant", "cyc[(5,3)]"),
        ("constant", "cyc[(4,5)]"),
        ("alternating", "cyc[(2,1)(3,2)]"),
        ("alternating", "cyc[(5,2)(1,4)]"),
        ("alternating", "cyc[(3,4)(5,1)]"),
    ]
    .iter()
    .map(|(k, s)| (k.to_string(), s.to_string()))
    .collect();
    for seed in 1..=3 {
        out.push(("pseudo-random".into(), random_cycle(seed, 30, 5)));
    }
    out
}

fn criterion_5() -> Outcome {
    let seqs = grid_sequences();
    let cells: Vec<(&str, &(String, String))> = GRID_SETS
        .iter()
        .flat_map(|s| seqs.iter().map(move |q| (*s, q)))
        .collect();
    let rows: Vec<(Verdict, Value)> = cells
        .par_iter()
        .map(|(set, (kind, ops))| {
            let a = parse_exact_set(set).unwrap();
            let seq = parse_ops(ops).unwrap();
            let l = seq
                .prefix()
                .iter()
                .chain(seq.cycle())
                .map(|o| o.max_entry())
                .max()
                .unwrap()
                .max(2);
            let r = theorem61_verify(&a, &seq, l, 10, 200_000).unwrap();
            let row = json!({
                "set": set, "kind": kind, "ops": ops, "L": l, "K": r.k,
                "observed_k0": r.observed_k0, "observed_g": r.observed_g,
                "distinct_count": r.distinct_count, "verdict": r.verdict,
                "resource_flag": r.resource_flag,
            });
            (r.verdict, row)
        })
        .collect();
    let count = |v: Verdict| rows.iter().filter(|r| r.0 == v).count();
    let (passes, fails, inconclusive) = (count(Verdict::Pass), count(Verdict::Fail), count(Verdict::Inconclusive));
    let conclusive = passes + fails;
    let open: Vec<String> = rows
        .iter()
        .filter(|r| r.0 == Verdict::Inconclusive)
        .map(|r| format!("{} {}", r.1["set"].as_str().unwrap(), r.1["kind"].as_str().unwrap()))
        .collect();
    Outcome {
        pass: fails == 0 && conclusive * 10 >= rows.len() * 9 && GRID_SETS.len() >= 20,
        summary: format!(
            "{} cells ({} sets): {} pass, {} fail, {} inconclusive {:?}",
            rows.len(),
            GRID_SETS.len(),
            passes,
            fails,
            inconclusive,
            open
        ),
        report: json!({"cells": rows.into_iter().map(|r| r.1).collect::<Vec<_>>()}),
    }
}

// ---------------------------------------------------------------------------
// 6. distinct (a,b)-images on a Bohr truncation

/// `‖hy/k‖ − |y|/k²`, a lower bound for `‖αy‖` when `|α − h/k| < 1/k²`.
fn norm_lower_bound(h: i128, k: i128, y: i128) -> Rational {
    let r = (h * y).rem_euclid(k);
    let dist = Rational::new(r.min(k - r), k);
    dist - Rational::new(y.abs(), k * k)
}

fn criterion_6() -> Outcome {
    let delta = Rational::new(1, 6);
    let n = 10_000u64;
    let bohr = bohr_truncation(&QuadraticSurd::sqrt2_minus_1(), delta, n).unwrap();
    let (h, k) = (bohr.numerator, bohr.denominator);
    // (h + k)/k is a convergent of √2: (h + k)² − 2k² = ±1, so |α − h/k| < 1/k²
    let pell = ((h + k) * (h + k) - 2 * k * k).abs() == 1 && k > 4 * n as i128;

    let a0 = bohr.set.to_epset().unwrap();
    let a1 = apply_linear_op(op(1, 1), &a0).unwrap();
    let a2 = apply_linear_op(op(2, 1), &a1).unwrap();
    let distinct = a0 != a1 && a1 != a2 && a0 != a2;

    // the truncation lies inside the Bohr set when nothing sits near the threshold
    let inside = bohr.near_threshold == 0;
    // true iterate 1 ⊂ {‖αy‖ < δ}; iterate 2 has a member beyond it
    let witness_2_not_1 = a2
        .elements_in(-(3 * n as i128), 3 * n as i128)
        .into_iter()
        .find(|&y| norm_lower_bound(h, k, y) >= delta);
    // 0 is in every difference set but not in A ⊂ [1, N]
    let certified = pell && inside && witness_2_not_1.is_some() && a1.contains(0) && a2.contains(0);

    let density = bohr.set.density();
    let density_ok = (density - delta).abs() <= Rational::new(1, 20);
    Outcome {
        pass: distinct && certified && density_ok,
        summary: format!(
            "|A| = {}, density {:.4}, convergent {h}/{k}, witness {:?}",
            bohr.set.len(),
            density.to_f64().unwrap(),
            witness_2_not_1
        ),
        report: json!({
            "numerator": h, "denominator": k, "size": bohr.set.len(),
            "density": density.to_string(), "near_threshold": bohr.near_threshold,
            "iterate_sizes": [a0.elements_in(-30_000, 30_000).len(), a1.elements_in(-30_000, 30_000).len(), a2.elements_in(-30_000, 30_000).len()],
            "witness": witness_2_not_1, "distinct": distinct, "certified": certified,
        }),
    }
}

// ---------------------------------------------------------------------------
// 7. gaps of 2A − A for the sparse interval union

/// Max gap inside `[0, h]` of the union of `2I − J` over interval pairs,
/// each interval having at least two points.
fn interval_oracle(intervals: &[(i128, i128)], h: i128) -> Option<i128> {
    let mut covered = vec![false; h as usize + 1];
    for &(l1, r1) in intervals {
        for &(l2, r2) in intervals {
            for x in (2 * l1 - r2).max(0)..=(2 * r1 - l2).min(h) {
                covered[x as usize] = true;
            }
        }
    }
    let members: Vec<i128> = (0..=h).filter(|&x| covered[x as usize]).collect();
    members.windows(2).map(|w| w[1] - w[0]).max()
}

fn criterion_7() -> Outcome {
    let xs = power_tower_starts(6).unwrap();
    let delta = Rational::new(1, 5);
    let profile = sparse_gap_profile(&xs, delta, 2, 1).unwrap();
    let mut intervals = Vec::new();
    let mut rows = Vec::new();
    let mut oracle_ok = true;
    for (i, x) in xs.iter().enumerate() {
        let first = x.floor().to_integer() + 1;
        let last = (*x * (Rational::from_integer(1) + delta)).ceil().to_integer() - 1;
        if last >= first {
            assert!(last > first, "single-point interval");
            intervals.push((first, last));
        }
        let entry = &profile[i];
        let want = interval_oracle(&intervals, entry.horizon);
        oracle_ok &= want == entry.max_gap;
        rows.push(json!({"blocks": entry.blocks, "horizon": entry.horizon, "max_gap": entry.max_gap}));
    }
    let gaps: Vec<i128> = profile.iter().filter_map(|e| e.max_gap).collect();
    let increasing = gaps.windows(2).all(|w| w[0] < w[1]) && gaps.len() >= 4;
    Outcome {
        pass: increasing && oracle_ok,
        summary: format!("max gaps over nonempty blocks: {gaps:?}"),
        report: json!({"profile": rows}),
    }
}

// ---------------------------------------------------------------------------
// 8. parity fixture

fn criterion_8() -> Outcome {
    let a = EPSet::ap(1, 3).unwrap();
    let minus_a = a.negate();
    let mut cases = 0u64;
    let mut mismatches = 0u64;
    for len in 0..=10usize {
        for mask in 0u32..(1 << len) {
            let bits: Vec<bool> = (0..len).map(|i| mask >> i & 1 == 1).collect();
            let (seq, predicted) = parity_flip_sequence(&bits).unwrap();
            let mut cur = a.clone();
            let mut ones = 0;
            for (k, o) in seq.take(len).into_iter().enumerate() {
                cur = apply_linear_op(o, &cur).unwrap();
                ones += bits[k] as u32;
                let expected = if ones % 2 == 0 { &a } else { &minus_a };
                if cur != *expected || predicted[k + 1] != *expected {
                    mismatches += 1;
                }
            }
            cases += 1;
        }
    }
    Outcome {
        pass: mismatches == 0 && cases == 2047,
        summary: format!("{cases} bit strings, {mismatches} mismatches"),
        report: json!({"cases": cases, "mismatches": mismatches}),
    }
}

// ---------------------------------------------------------------------------
// 9. dominant coefficients

/// Coefficient multiplicities of a composition, by dynamic programming on
/// the number of `b`-choices per distinct operation.
fn brute_counts(ops: &[LinearOp]) -> BTreeMap<i128, u128> {
    let mut counts: BTreeMap<i128, u128> = BTreeMap::from([(1, 1)]);
    for o in ops {
        let mut next = BTreeMap::new();
        for (c, m) in counts {
            *next.entry(c * o.a() as i128).or_insert(0) += m;
            *next.entry(-c * o.b() as i128).or_insert(0) += m;
        }
        counts = next;
    }
    counts
}

fn criterion_9() -> Outcome {
    let mut rows = Vec::new();
    let mut pass = true;
    for l in [2u64, 3] {
        for m in [4u64, 16] {
            let t = (2.0 * (m as f64).log2() + 4.0 * l as f64 + 2.0).ceil() as usize;
            pass &= minimal_depth(l, m) == t;
            let mut seqs: Vec<Vec<LinearOp>> = coprime_pairs(l)
                .into_iter()
                .map(|(a, b)| vec![op(a, b); t])
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(l * 100 + m);
            for _ in 0..4 {
                let mut s = Vec::new();
                while s.len() < t {
                    let (a, b) = (rng.gen_range(1..=l), rng.gen_range(1..=l));
                    if gcd(a, b) == 1 {
                        s.push(op(a, b));
                    }
                }
                seqs.push(s);
            }
            for s in seqs {
                let DominantOutcome::Found(p) = dominant_coefficient_pair(&s, l, m).unwrap() else {
                    pass = false;
                    continue;
                };
                let counts = brute_counts(&s);
                let cap = BigUint::from(l).pow(t as u32);
                let alpha_mult = counts.get(&p.alpha).copied().unwrap_or(0);
                let beta_mult = counts.get(&-p.beta).copied().unwrap_or(0);
                let best_pos = counts.iter().filter(|(c, _)| **c > 0).map(|(_, m)| *m).max().unwrap();
                let best_neg = counts.iter().filter(|(c, _)| **c < 0).map(|(_, m)| *m).max().unwrap();
                let ok = p.verified()
                    && alpha_mult >= m as u128
                    && beta_mult >= m as u128
                    && alpha_mult == best_pos
                    && beta_mult == best_neg
                    && p.alpha_multiplicity == BigUint::from(alpha_mult)
                    && p.beta_multiplicity == BigUint::from(beta_mult)
                    && BigUint::from(p.alpha as u128) <= cap
                    && BigUint::from(p.beta as u128) <= cap
                    && !p.alpha_multiplicity.is_zero();
                pass &= ok;
                let text: String = s.iter().map(|o| o.to_string()).collect();
                rows.push(json!({
                    "L": l, "m": m, "t": t, "ops": text,
                    "alpha": p.alpha, "alpha_multiplicity": alpha_mult.to_string(),
                    "beta": p.beta, "beta_multiplicity": beta_mult.to_string(), "ok": ok,
                }));
            }
        }
    }
    Outcome {
        pass,
        summary: format!("{} sequences", rows.len()),
        report: json!({"sequences": rows}),
    }
}

// ---------------------------------------------------------------------------

type Criterion = fn() -> Outcome;

const CRITERIA: &[(&str, Criterion)] = &[
    ("orbit of (a,b) on 1 + abN", criterion_1),
    ("residue equality cases", criterion_2),
    ("oracle equivalence", criterion_3),
    ("difference-set stability bounds", criterion_4),
    ("eventual-periodicity grid", criterion_5),
    ("Bohr truncation distinctness", criterion_6),
    ("sparse interval gaps", criterion_7),
    ("parity sequences", criterion_8),
    ("dominant coefficients", criterion_9),
];

fn run_all() -> Vec<(bool, String, String)> {
    CRITERIA
        .iter()
        .map(|(_, f)| {
            let o = f();
            let report = serde_json::to_string_pretty(&o.report).unwrap();
            (o.pass, o.summary, report)
        })
        .collect()
}

fn main() {
    // the harness passes filter arguments through; this suite always runs whole
    let mut failed = 0;
    let start = Instant::now();
    let first = run_all();
    for (i, ((name, _), (pass, summary, _))) in CRITERIA.iter().zip(&first).enumerate() {
        println!(
            "criterion {:>2} {:<34} {}  {}",
            i + 1,
            name,
            if *pass { "PASS" } else { "FAIL" },
            summary
        );
        failed += usize::from(!pass);
    }

    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let second = run_all();
    let single = pool(1).install(run_all);
    let multi = pool(4).install(run_all);
    let same = |other: &[(bool, String, String)]| {
        first.iter().zip(other).filter(|(x, y)| x.2 != y.2).count()
    };
    let diffs = (same(&second), same(&single), same(&multi));
    let deterministic = diffs == (0, 0, 0);
    println!(
        "criterion 10 {:<34} {}  reports byte-identical (rerun, 1 thread, 4 threads): {:?}",
        "determinism",
        if deterministic { "PASS" } else { "FAIL" },
        [diffs.0 == 0, diffs.1 == 0, diffs.2 == 0]
    );
    failed += usize::from(!deterministic);
    println!("acceptance finished in {:.1}s, {failed} failing", start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}

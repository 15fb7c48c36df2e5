//! Orbits of composed linear operations on exact sets, t-stability counts,
//! periodicity onset and the eventual-periodicity verifier.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::analysis::ser_rational;
use crate::arith;
use crate::epset::{EPSet, Rational};
use crate::error::{Error, Result};
use crate::linops::{apply_linear_op, ser_big, LinearOp, OpSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Cycle {
    pub onset: usize,
    pub length: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PeriodicityOnset {
    pub k0: usize,
    pub g: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationTrace {
    /// `iterates[0]` is the input; `iterates[k]` is the `k`-fold composition.
    pub iterates: Vec<EPSet>,
    /// Number of operations the trace covers. Beyond `iterates.len() − 1`
    /// the iterates are determined by `cycle`.
    pub horizon: usize,
    pub distinct_count: usize,
    pub cycle: Option<Cycle>,
    pub periodicity_onset: Option<PeriodicityOnset>,
    pub resource_flag: Option<String>,
    /// Fingerprint matches whose full forms differed.
    pub fingerprint_collisions: usize,
}

impl IterationTrace {
    /// `Γ_k` for `k ≤ horizon`, unfolding the cycle when needed.
    pub fn iterate(&self, k: usize) -> Option<&EPSet> {
        if k > self.horizon {
            return None;
        }
        if let Some(it) = self.iterates.get(k) {
            return Some(it);
        }
        let c = self.cycle?;
        Some(&self.iterates[c.onset + (k - c.onset) % c.length])
    }

    pub fn is_complete(&self) -> bool {
        self.resource_flag.is_none()
    }
}

fn fingerprint(s: &EPSet, phase: Option<usize>) -> u64 {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    phase.hash(&mut h);
    h.finish()
}

/// Phase of iterate `k` in the eventually repeating part of `seq` within a
/// horizon of `n` steps; `None` while the future operations still vary.
fn phase(seq: &OpSequence, k: usize, const_from: usize) -> Option<usize> {
    if seq.is_cyclic() {
        let p = seq.prefix().len();
        (k >= p).then(|| (k - p) % seq.cycle().len())
    } else {
        (k >= const_from).then_some(0)
    }
}

/// Iterates `seq` on `s` for up to `max_k` operations.
///
/// A cycle is recorded when an iterate recurs at the same phase of the
/// repeating part of the sequence (the cyclic block, or the constant tail of
/// a finite sequence); tracing stops there since the rest of the orbit is
/// determined.
pub fn iterate_trace(s: &EPSet, seq: &OpSequence, max_k: usize) -> IterationTrace {
    let horizon = seq.len().map_or(max_k, |n| n.min(max_k));
    let ops = seq.take(horizon);
    let const_from = match ops.last() {
        Some(last) => ops.len() - ops.iter().rev().take_while(|o| *o == last).count(),
        None => 0,
    };
    let mut iterates = vec![s.clone()];
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut distinct: HashMap<EPSet, ()> = HashMap::new();
    distinct.insert(s.clone(), ());
    let mut collisions = 0;
    let mut cycle = None;
    let mut resource_flag = None;
    if let Some(p) = phase(seq, 0, const_from) {
        seen.entry(fingerprint(s, Some(p))).or_default().push(0);
    }
    for (k, &op) in ops.iter().enumerate() {
        let next = match apply_linear_op(op, &iterates[k]) {
            Ok(n) => n,
            Err(e) => {
                resource_flag = Some(e.to_string());
                break;
            }
        };
        let idx = k + 1;
        distinct.entry(next.clone()).or_insert(());
        iterates.push(next);
        let Some(p) = phase(seq, idx, const_from) else {
            continue;
        };
        let fp = fingerprint(&iterates[idx], Some(p));
        let bucket = seen.entry(fp).or_default();
        let hit = bucket.iter().copied().find(|&j| {
            let same = iterates[j] == iterates[idx] && phase(seq, j, const_from) == Some(p);
            if !same {
                collisions += 1;
            }
            same
        });
        if let Some(j) = hit {
            cycle = Some(Cycle {
                onset: j,
                length: idx - j,
            });
            iterates.pop();
            break;
        }
        bucket.push(idx);
    }
    let horizon = if resource_flag.is_some() {
        iterates.len() - 1
    } else {
        horizon
    };
    let mut trace = IterationTrace {
        distinct_count: distinct.len(),
        iterates,
        horizon,
        cycle,
        periodicity_onset: None,
        resource_flag,
        fingerprint_collisions: collisions,
    };
    trace.periodicity_onset = full_periodicity_onset(&trace, u64::MAX);
    trace
}

/// Minimal `t` with the input `t`-stable over the traced horizon.
pub fn t_stability_count(trace: &IterationTrace) -> usize {
    trace.distinct_count
}

/// Smallest `k₀` such that every recorded iterate from `k₀` on is fully
/// periodic modulo a common `g ≤ g_max`, with the least such `g`.
pub fn full_periodicity_onset(trace: &IterationTrace, g_max: u64) -> Option<PeriodicityOnset> {
    let mut best = None;
    let mut g = 1u64;
    for (k, it) in trace.iterates.iter().enumerate().rev() {
        let Some(l) = it
            .full_period()
            .and_then(|p| arith::lcm(g, p))
            .filter(|&l| l <= g_max)
        else {
            break;
        };
        g = l;
        best = Some(PeriodicityOnset { k0: k, g });
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem61Report {
    #[serde(serialize_with = "ser_rational")]
    pub beta: Rational,
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(serialize_with = "ser_big")]
    pub g_bound: BigUint,
    pub observed_k0: Option<usize>,
    pub observed_g: Option<u64>,
    /// Least `g` with every iterate from step `K` fully periodic mod `g`.
    pub g_from_k: Option<u64>,
    pub distinct_count: usize,
    /// `K + g³L²` for the observed `g`.
    #[serde(serialize_with = "ser_opt_big")]
    pub bound: Option<BigUint>,
    pub periodicity_holds: bool,
    pub count_holds: bool,
    pub verdict: Verdict,
    pub resource_flag: Option<String>,
    pub horizon: usize,
    pub cycle: Option<Cycle>,
}

fn ser_opt_big<S: serde::Serializer>(
    v: &Option<BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_big(v, s),
        None => s.serialize_none(),
    }
}

/// `⌊c·(log₂ β + L)⌋ = cL + max{j : 2^j ≤ β^c}` for `β ≥ 1`.
pub fn theorem61_k(beta: Rational, bound: u64, c: u32) -> Result<u64> {
    if beta < Rational::from_integer(1) {
        return Err(Error::InvalidArgument("beta must be at least 1".into()));
    }
    let p = BigUint::from(*beta.numer() as u128).pow(c);
    let q = BigUint::from(*beta.denom() as u128).pow(c);
    let mut j = 0u64;
    while (&q << (j + 1)) <= p {
        j += 1;
    }
    Ok(c as u64 * bound + j)
}

/// Verifies the eventual-periodicity bound on one orbit: with `K` from the constant `c`, every
/// iterate from step `K` is fully periodic modulo some `g ≤ L^{K+1}`, and the
/// orbit has at most `K + g³L²` distinct members.
pub fn theorem61_verify(
    a: &EPSet,
    seq: &OpSequence,
    bound: u64,
    c: u32,
    max_k: usize,
) -> Result<Theorem61Report> {
    if bound < 2 {
        return Err(Error::Precondition("L must be at least 2".into()));
    }
    if !seq.all_coprime() {
        return Err(Error::Precondition("every operation must be coprime".into()));
    }
    let all_ops: Vec<LinearOp> = seq.prefix().iter().chain(seq.cycle()).copied().collect();
    if all_ops.iter().any(|op| op.max_entry() > bound) {
        return Err(Error::Precondition(format!("an operation exceeds L = {bound}")));
    }
    let density = a.upper_density();
    if density <= Rational::from_integer(0) {
        return Err(Error::Precondition("upper density must be positive".into()));
    }
    let beta = density.recip();
    let k = theorem61_k(beta, bound, c)?;
    let g_bound = BigUint::from(bound).pow(k as u32 + 1);

    let trace = iterate_trace(a, seq, max_k);
    let onset = trace.periodicity_onset;
    let closed = trace.cycle.is_some() && (seq.is_cyclic() || trace.horizon == max_k);
    let k_usize = usize::try_from(k).unwrap_or(usize::MAX);
    // iterates from step K are the recorded ones from min(K, onset of cycle)
    let g_from_k = if k_usize >= trace.iterates.len() {
        match trace.cycle {
            Some(cy) => lcm_periods(&trace.iterates[cy.onset..]),
            None => None,
        }
    } else {
        lcm_periods(&trace.iterates[k_usize..])
    };
    let periodicity_holds = onset.is_some_and(|o| o.k0 as u64 <= k)
        && g_from_k.is_some_and(|g| BigUint::from(g) <= g_bound);
    let bound_value = g_from_k.map(|g| {
        BigUint::from(k) + BigUint::from(g).pow(3) * BigUint::from(bound).pow(2)
    });
    let count_holds = bound_value
        .as_ref()
        .is_some_and(|b| BigUint::from(trace.distinct_count) <= *b);

    // without a closed cycle the horizon must reach K + g³L² + 1
    let horizon_ok = closed
        || bound_value
            .as_ref()
            .is_some_and(|b| BigUint::from(trace.horizon) > *b);
    let aperiodic_from_k = trace
        .iterates
        .iter()
        .skip(k_usize)
        .any(|it| it.full_period().is_none());
    let verdict = if trace.resource_flag.is_some() {
        Verdict::Inconclusive
    } else if periodicity_holds && count_holds {
        if horizon_ok {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        }
    } else if closed || aperiodic_from_k {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(Theorem61Report {
        beta,
        k,
        g_bound,
        observed_k0: onset.map(|o| o.k0),
        observed_g: onset.map(|o| o.g),
        g_from_k,
        distinct_count: trace.distinct_count,
        bound: bound_value,
        periodicity_holds,
        count_holds,
        verdict,
        resource_flag: trace.resource_flag.clone(),
        horizon: trace.horizon,
        cycle: trace.cycle,
    })
}

fn lcm_periods(sets: &[EPSet]) -> Option<u64> {
    sets.iter()
        .try_fold(1u64, |g, s| s.full_period().and_then(|p| arith::lcm(g, p)))
}

/// `(β, t)` data point: `β = 1/d̄(A)` and the observed stability count.
pub fn stability_data_point(a: &EPSet, seq: &OpSequence, max_k: usize) -> (f64, usize) {
    let beta = a.upper_density().recip();
    let trace = iterate_trace(a, seq, max_k);
    (beta.to_f64().unwrap_or(f64::INFINITY), trace.distinct_count)
}

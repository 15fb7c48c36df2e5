//! Classical additive checks: Freiman's `3k − 3` inequality, the gap bound
//! for `aX − bX`, Kneser's dichotomy, and positive-difference stability.

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{self, gcd};
use crate::bits::Bits;
use crate::constructions::TruncatedSet;
use crate::epset::{EPSet, Gap, Rational};
use crate::error::{Error, Result};
use crate::linops::{apply_linear_op, LinearOp};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    /// `|pos_tail| / period` for exact sets.
    #[serde(serialize_with = "ser_opt_rational")]
    pub exact_density: Option<Rational>,
    /// `(n, |A ∩ [1, n]| / n)`.
    pub profile: Vec<(i128, f64)>,
    /// Running maximum of `profile`.
    pub sup_profile: Vec<(i128, f64)>,
}

pub(crate) fn ser_rational<S: serde::Serializer>(
    r: &Rational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::grammar::emit_rational(r))
}

fn ser_opt_rational<S: serde::Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => ser_rational(r, s),
        None => s.serialize_none(),
    }
}

fn running_max(profile: &[(i128, f64)]) -> Vec<(i128, f64)> {
    let mut best = f64::NEG_INFINITY;
    profile
        .iter()
        .map(|&(n, v)| {
            best = best.max(v);
            (n, best)
        })
        .collect()
}

pub fn density_report(s: &EPSet, samples: &[i128]) -> DensityReport {
    let profile: Vec<(i128, f64)> = samples
        .iter()
        .filter(|&&n| n >= 1)
        .map(|&n| {
            let count = count_in(s, 1, n);
            (n, Rational::new(count, n).to_f64().unwrap_or(0.0))
        })
        .collect();
    DensityReport {
        exact_density: Some(s.upper_density()),
        sup_profile: running_max(&profile),
        profile,
    }
}

pub fn truncated_density_report(t: &TruncatedSet, samples: &[i128]) -> DensityReport {
    let profile = crate::constructions::density_profile(t, samples);
    DensityReport {
        exact_density: None,
        sup_profile: running_max(&profile),
        profile,
    }
}

/// `|S ∩ [from, to]|` without enumerating the periodic parts.
fn count_in(s: &EPSet, from: i128, to: i128) -> i128 {
    if from > to {
        return 0;
    }
    let g = s.period() as i128;
    let class_count = |tail: &Bits, a: i128, b: i128| -> i128 {
        if a > b {
            return 0;
        }
        tail.ones()
            .map(|r| {
                let first = arith::next_in_class(a, r as u64, g as u64);
                if first > b {
                    0
                } else {
                    (b - first) / g + 1
                }
            })
            .sum()
    };
    let (lo, hi) = (s.lo(), s.hi());
    let below = class_count(s.neg_tail(), from, to.min(lo - 1));
    let above = class_count(s.pos_tail(), from.max(hi + 1), to);
    let (a, b) = (from.max(lo), to.min(hi));
    let inside = if a <= b {
        s.window()
            .ones()
            .filter(|&i| (a..=b).contains(&(lo + i as i128)))
            .count() as i128
    } else {
        0
    };
    below + inside + above
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreimanReport {
    pub size: usize,
    pub max: i128,
    /// `|X + X|`.
    pub lhs: usize,
    /// `min(3k − 3, k + max X)`.
    pub rhs: i128,
    pub holds: bool,
}

/// `|X + X| ≥ min(3k − 3, k + max X)` for finite `X` with `0 ∈ X`,
/// `gcd(X) = 1`, `|X| ≥ 2`.
pub fn freiman_check(x: &[i128]) -> Result<FreimanReport> {
    let mut v = x.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() < 2 {
        return Err(Error::Precondition("need at least two elements".into()));
    }
    if v[0] != 0 {
        return Err(Error::Precondition("0 must be the least element".into()));
    }
    let g = v.iter().fold(0u64, |acc, &e| gcd(acc, e as u64));
    if g != 1 {
        return Err(Error::Precondition(format!("elements have gcd {g}")));
    }
    let s = EPSet::finite(v.iter().copied())?;
    let doubled = s.minkowski_sum(&s)?;
    let k = v.len() as i128;
    let max = *v.last().expect("nonempty");
    let lhs = doubled.window().count_ones();
    let rhs = (3 * k - 3).min(k + max);
    Ok(FreimanReport {
        size: v.len(),
        max,
        lhs,
        rhs,
        holds: lhs as i128 >= rhs,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapBoundReport {
    #[serde(serialize_with = "ser_rational")]
    pub density: Rational,
    /// `a / (a + 1)`.
    #[serde(serialize_with = "ser_rational")]
    pub threshold: Rational,
    pub precondition_holds: bool,
    pub gap_ab: Gap,
    pub gap_ba: Gap,
    /// Largest gap between the extreme members, for bounded results.
    pub observed_gap_ab: Option<i128>,
    pub observed_gap_ba: Option<i128>,
    pub bound: u64,
    pub holds: bool,
}

fn observed_gap(s: &EPSet) -> Option<i128> {
    match (s.min_element(), s.max_element()) {
        (Some(a), Some(b)) => s.max_gap_in(a, b),
        _ => match s.max_gap() {
            Gap::Bounded(v) => Some(v),
            Gap::Unbounded => None,
        },
    }
}

impl serde::Serialize for Gap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Gap::Bounded(v) => s.serialize_i128(*v),
            Gap::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

/// Max gaps of `aX − bX` and `bX − aX` against the bound `a`, valid when
/// the density of `X` exceeds `a / (a + 1)`.
pub fn gap_bound_check(x: &EPSet, a: u64, b: u64) -> Result<GapBoundReport> {
    if b == 0 || a < b {
        return Err(Error::InvalidArgument("need a >= b >= 1".into()));
    }
    let density = x.upper_density();
    let threshold = Rational::new(a as i128, a as i128 + 1);
    let ab = apply_linear_op(LinearOp::new(a, b)?, x)?;
    let ba = apply_linear_op(LinearOp::new(b, a)?, x)?;
    let (gap_ab, gap_ba) = (ab.max_gap(), ba.max_gap());
    let bound = Gap::Bounded(a as i128);
    Ok(GapBoundReport {
        precondition_holds: density > threshold,
        density,
        threshold,
        observed_gap_ab: observed_gap(&ab),
        observed_gap_ba: observed_gap(&ba),
        holds: gap_ab <= bound && gap_ba <= bound,
        gap_ab,
        gap_ba,
        bound: a,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum KneserBranch {
    /// `d(Xk) ≥ k·d(X)`.
    Additive,
    /// A semi-periodic superset `X′` with the stated properties.
    Periodic {
        modulus: u64,
        /// `X′ = {x ≥ start : x mod g ∈ residues}`.
        start: i128,
        residues: Vec<u64>,
        #[serde(serialize_with = "ser_rational")]
        closure_density: Rational,
        contains_x: bool,
        semi_periodic: bool,
        tail_contained: bool,
        density_inequality: bool,
    },
    /// No candidate modulus passed every check.
    Unverified { tried: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KneserReport {
    pub k: u32,
    #[serde(serialize_with = "ser_rational")]
    pub density: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub sum_density: Rational,
    pub sum: EPSet,
    pub outcome: KneserBranch,
}

impl KneserReport {
    pub fn verified(&self) -> bool {
        !matches!(self.outcome, KneserBranch::Unverified { .. })
    }
}

/// Residues mod `g` of all members of a set bounded below.
fn residues_mod(x: &EPSet, g: u64) -> Bits {
    let mut out = x.pos_tail_residues_mod(g);
    for i in x.window().ones() {
        out.set(arith::modulo(x.lo() + i as i128, g) as usize, true);
    }
    out
}

/// Decides the Kneser-type dichotomy for `Xk = X + ⋯ + X` exactly.
pub fn kneser_dichotomy(x: &EPSet, k: u32) -> Result<KneserReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if x.pos_tail().none() {
        return Err(Error::Precondition("lower density is zero".into()));
    }
    let start = x
        .min_element()
        .ok_or_else(|| Error::Precondition("set is unbounded below".into()))?;
    let density = x.upper_density();
    let sum = x.sum_power(k)?;
    let sum_density = sum.upper_density();
    let kk = Rational::from_integer(k as i128);
    if sum_density >= kk * density {
        return Ok(KneserReport {
            k,
            density,
            sum_density,
            sum,
            outcome: KneserBranch::Additive,
        });
    }
    let mut candidates = vec![sum.period()];
    for d in arith::divisors(arith::lcm(sum.period(), x.period()).ok_or(Error::Overflow("lcm"))?) {
        if !candidates.contains(&d) {
            candidates.push(d);
        }
    }
    for &g in &candidates {
        let residues = residues_mod(x, g);
        let mut closure = EPSet::empty();
        for r in residues.ones() {
            closure = closure.union(&EPSet::ap_up(r as i128, g, start)?)?;
        }
        let contains_x = x.is_subset(&closure)?;
        let semi_periodic = closure.is_semi_periodic_mod(g)?;
        let closure_sum = closure.sum_power(k)?;
        let l = arith::lcm(closure_sum.period(), sum.period()).ok_or(Error::Overflow("lcm"))?;
        let tail_contained = closure_sum
            .pos_tail_residues_mod(l)
            .is_subset(&sum.pos_tail_residues_mod(l));
        let closure_density = closure.upper_density();
        let rhs = kk * closure_density - Rational::new(k as i128 - 1, g as i128);
        let density_inequality = sum_density >= rhs;
        if contains_x && semi_periodic && tail_contained && density_inequality {
            return Ok(KneserReport {
                k,
                density,
                sum_density,
                sum,
                outcome: KneserBranch::Periodic {
                    modulus: g,
                    start,
                    residues: residues.ones().map(|r| r as u64).collect(),
                    closure_density,
                    contains_x,
                    semi_periodic,
                    tail_contained,
                    density_inequality,
                },
            });
        }
    }
    Ok(KneserReport {
        k,
        density,
        sum_density,
        sum,
        outcome: KneserBranch::Unverified { tried: candidates },
    })
}

/// `D⁺(A) = {a − a′ : a ≥ a′}` for `A ⊂ N`.
pub fn dplus(a: &EPSet) -> Result<EPSet> {
    if a.min_element().is_none_or(|m| m < 0) && !a.is_empty() {
        return Err(Error::Precondition("input must be a subset of N".into()));
    }
    a.difference_set(a)?.restrict_nonnegative()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityTime {
    /// Least `k` with `D⁺_{k+1}(A) = D⁺_k(A)`.
    pub t: usize,
    /// `D⁺_0(A) = A, …, D⁺_{t+1}(A)`.
    pub iterates: Vec<EPSet>,
}

pub fn stability_time(a: &EPSet, max_k: usize) -> Result<StabilityTime> {
    let mut iterates = vec![a.clone()];
    loop {
        let k = iterates.len() - 1;
        if k > max_k {
            return Err(Error::StepLimit(max_k));
        }
        let next = dplus(&iterates[k])?;
        let fixed = next == iterates[k];
        iterates.push(next);
        if fixed {
            return Ok(StabilityTime { t: k, iterates });
        }
    }
}

/// `T(A) ≤ 2·log₂(1/d)` and `T(A) ≤ 2 + log₂(1/d − 1)` for `0 < d ≤ 1/2`,
/// kept exact through their arguments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityBounds {
    #[serde(serialize_with = "ser_rational")]
    pub density: Rational,
    /// Stewart–Tijdeman bound `2·log₂(1/d)`.
    pub st_bound: f64,
    /// Ruzsa bound `2 + log₂(1/d − 1)`.
    pub ruzsa_bound: f64,
}

impl StabilityBounds {
    fn parts(&self) -> (BigUint, BigUint) {
        let n = BigUint::from(*self.density.numer() as u128);
        let d = BigUint::from(*self.density.denom() as u128);
        (n, d)
    }

    /// `t ≤ 2·log₂(1/d)`, decided exactly.
    pub fn admits_st(&self, t: u64) -> bool {
        let (n, d) = self.parts();
        (BigUint::one() << t) * &n * &n <= &d * &d
    }

    /// `t ≤ 2 + log₂(1/d − 1)`, decided exactly.
    pub fn admits_ruzsa(&self, t: u64) -> bool {
        let (n, d) = self.parts();
        if d <= n {
            return false;
        }
        (BigUint::one() << t) * &n <= BigUint::from(4u32) * (d - &n)
    }

    /// `⌊2·log₂(1/d)⌋`.
    pub fn st_floor(&self) -> u64 {
        (0..).take_while(|&t| self.admits_st(t)).last().unwrap_or(0)
    }

    /// `⌊2 + log₂(1/d − 1)⌋`.
    pub fn ruzsa_floor(&self) -> u64 {
        (0..).take_while(|&t| self.admits_ruzsa(t)).last().unwrap_or(0)
    }
}

pub fn stability_bounds(density: Rational) -> Result<StabilityBounds> {
    if !density.is_positive() {
        return Err(Error::Precondition("density must be positive".into()));
    }
    if density > Rational::new(1, 2) {
        return Err(Error::Precondition(
            "density exceeds 1/2, where T(A) <= 1 and D+(A) is all of N".into(),
        ));
    }
    let inv = density.recip();
    let f = |r: Rational| r.to_f64().unwrap_or(f64::NAN);
    let st = 2.0 * f(inv).log2();
    let minus_one = inv - Rational::from_integer(1);
    let ruzsa = if minus_one.is_zero() {
        f64::NEG_INFINITY
    } else {
        2.0 + f(minus_one).log2()
    };
    Ok(StabilityBounds {
        density,
        st_bound: st,
        ruzsa_bound: ruzsa,
    })
}

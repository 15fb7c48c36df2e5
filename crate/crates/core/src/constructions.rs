//! Generators for the explicit sets used as fixtures: arithmetic-progression
//! counterexamples, scaled divergence, one-frequency Bohr truncations,
//! sparse interval unions and the parity-flip sequence.

use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{self, gcd, modulo};
use crate::epset::{EPSet, Rational};
use crate::error::{Error, Result};
use crate::linops::{apply_linear_op, LinearOp, OpSequence};

/// A finite set whose membership is exact on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TruncatedSet {
    elems: Vec<i128>,
    horizon: i128,
    provenance: String,
}

impl TruncatedSet {
    /// `elems` is sorted and deduplicated; entries outside `[0, horizon]`
    /// are rejected.
    pub fn new(mut elems: Vec<i128>, horizon: i128, provenance: String) -> Result<TruncatedSet> {
        elems.sort_unstable();
        elems.dedup();
        if elems.first().is_some_and(|&x| x < 0) || elems.last().is_some_and(|&x| x > horizon) {
            return Err(Error::InvalidArgument(
                "truncated set elements must lie in [0, horizon]".into(),
            ));
        }
        Ok(TruncatedSet {
            elems,
            horizon,
            provenance,
        })
    }

    pub fn elems(&self) -> &[i128] {
        &self.elems
    }

    pub fn horizon(&self) -> i128 {
        self.horizon
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, x: i128) -> bool {
        self.elems.binary_search(&x).is_ok()
    }

    /// `|A ∩ [1, n]|`.
    pub fn count_up_to(&self, n: i128) -> usize {
        self.elems.partition_point(|&x| x <= n) - self.elems.partition_point(|&x| x < 1)
    }

    /// `|A ∩ [1, horizon]| / horizon`.
    pub fn density(&self) -> Rational {
        if self.horizon < 1 {
            return Rational::zero();
        }
        Rational::new(self.count_up_to(self.horizon) as i128, self.horizon)
    }

    /// The finite set as an [`EPSet`].
    pub fn to_epset(&self) -> Result<EPSet> {
        EPSet::finite(self.elems.iter().copied())
    }
}

impl fmt::Display for TruncatedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::grammar::emit_finite(&self.elems))
    }
}

/// Predicted orbit of `Γ_{a,b}` on `{abm + 1 : m ≥ 0}`: iterate `k ≥ 1` is
/// the full class `(a − b)^k mod ab`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PredictedOrbit {
    pub a: u64,
    pub b: u64,
    pub modulus: u64,
    pub cycle_length: u64,
    /// The orbit eventually repeats a single set, i.e. `a = b + 1`.
    pub stable: bool,
}

impl PredictedOrbit {
    pub fn residue(&self, k: u32) -> u64 {
        arith::pow_mod(self.a - self.b, k as u64, self.modulus)
    }

    /// Predicted `Γ_k(X)` for `k ≥ 1`.
    pub fn iterate(&self, k: u32) -> Result<EPSet> {
        EPSet::ap(self.residue(k) as i128, self.modulus)
    }
}

pub fn ap_counterexample(a: u64, b: u64) -> Result<(EPSet, PredictedOrbit)> {
    if gcd(a, b) != 1 {
        return Err(Error::Precondition(format!("gcd({a},{b}) != 1")));
    }
    if a <= b || b == 0 {
        return Err(Error::Precondition(format!("need a > b >= 1, got ({a},{b})")));
    }
    let modulus = a.checked_mul(b).ok_or(Error::Overflow("ab"))?;
    let x = EPSet::ap_up(1, modulus, 1)?;
    let cycle_length = arith::multiplicative_order(a - b, modulus)
        .ok_or_else(|| Error::Precondition("a − b is not a unit modulo ab".into()))?;
    Ok((
        x,
        PredictedOrbit {
            a,
            b,
            modulus,
            cycle_length,
            stable: a == b + 1,
        },
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivergenceStep {
    pub k: u32,
    pub iterate: EPSet,
    /// Every element is divisible by `d^k`.
    pub divisible: bool,
    pub min_positive: Option<i128>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivergenceReport {
    pub d: u64,
    pub a: u64,
    pub b: u64,
    pub steps: Vec<DivergenceStep>,
    /// Minimal positive elements strictly increase and iterates are pairwise
    /// distinct.
    pub diverges: bool,
}

/// Iterates `Γ_{da′, db′}` on `N` for `k = 0..=k_max`.
pub fn scaled_divergence(d: u64, a1: u64, b1: u64, k_max: u32) -> Result<DivergenceReport> {
    if d < 2 {
        return Err(Error::Precondition("scale d must be at least 2".into()));
    }
    if gcd(a1, b1) != 1 {
        return Err(Error::Precondition(format!("gcd({a1},{b1}) != 1")));
    }
    let op = LinearOp::new(
        d.checked_mul(a1).ok_or(Error::Overflow("da"))?,
        d.checked_mul(b1).ok_or(Error::Overflow("db"))?,
    )?;
    let mut steps = Vec::new();
    let mut cur = EPSet::naturals();
    for k in 0..=k_max {
        let scale = (d as i128)
            .checked_pow(k)
            .ok_or(Error::Overflow("d^k"))?;
        let divisible = divisible_by(&cur, scale);
        let min_positive = min_positive(&cur);
        steps.push(DivergenceStep {
            k,
            iterate: cur.clone(),
            divisible,
            min_positive,
        });
        if k < k_max {
            cur = apply_linear_op(op, &cur)?;
        }
    }
    let increasing = steps.windows(2).all(|w| match (w[0].min_positive, w[1].min_positive) {
        (Some(x), Some(y)) => y > x,
        _ => false,
    });
    let distinct = (0..steps.len())
        .all(|i| (i + 1..steps.len()).all(|j| steps[i].iterate != steps[j].iterate));
    Ok(DivergenceReport {
        d,
        a: a1,
        b: b1,
        diverges: increasing && distinct && steps.iter().all(|s| s.divisible),
        steps,
    })
}

/// Every element of `s` is a multiple of `m`.
fn divisible_by(s: &EPSet, m: i128) -> bool {
    let mu = m as u64;
    let window_ok = s.window().ones().all(|i| (s.lo() + i as i128) % m == 0);
    // a tail residue r mod period contains only multiples of m iff m | period and m | r
    let tail_ok = |t: &crate::bits::Bits| {
        t.none() || (s.period() % mu == 0 && t.ones().all(|r| r as u64 % mu == 0))
    };
    window_ok && tail_ok(s.neg_tail()) && tail_ok(s.pos_tail())
}

fn min_positive(s: &EPSet) -> Option<i128> {
    let below = s
        .neg_tail()
        .ones()
        .map(|r| arith::next_in_class(1, r as u64, s.period()))
        .filter(|&x| x < s.lo())
        .min();
    if below.is_some() {
        return below;
    }
    if let Some(i) = s.window().ones().find(|&i| s.lo() + i as i128 > 0) {
        return Some(s.lo() + i as i128);
    }
    s.pos_tail()
        .ones()
        .map(|r| arith::next_in_class((s.hi() + 1).max(1), r as u64, s.period()))
        .min()
}

/// A real `(p + s·√d) / q` with `s = ±1` and `d` not a perfect square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct QuadraticSurd {
    pub p: i64,
    pub negative_root: bool,
    pub radicand: u64,
    pub q: i64,
}

impl QuadraticSurd {
    pub fn new(p: i64, negative_root: bool, radicand: u64, q: i64) -> Result<QuadraticSurd> {
        if q == 0 {
            return Err(Error::InvalidArgument("surd denominator must be nonzero".into()));
        }
        let r = radicand.isqrt();
        if r * r == radicand {
            return Err(Error::InvalidArgument(format!(
                "{radicand} is a perfect square; the surd would be rational"
            )));
        }
        Ok(QuadraticSurd {
            p,
            negative_root,
            radicand,
            q,
        })
    }

    /// `√2 − 1`.
    pub fn sqrt2_minus_1() -> QuadraticSurd {
        QuadraticSurd::new(-1, false, 2, 1).expect("valid")
    }

    pub fn to_f64(&self) -> f64 {
        let root = (self.radicand as f64).sqrt();
        let root = if self.negative_root { -root } else { root };
        (self.p as f64 + root) / self.q as f64
    }

    /// Continued-fraction convergents `h/k`, in order, until `k > min_den`.
    pub fn convergents(&self, min_den: i128) -> Result<Vec<(i128, i128)>> {
        // normalise to (P + √D) / Q with Q | D − P²
        let (mut p, mut q) = if self.negative_root {
            (-(self.p as i128), -(self.q as i128))
        } else {
            (self.p as i128, self.q as i128)
        };
        let mut d = self.radicand as i128;
        if (d - p * p) % q != 0 {
            let aq = q.abs();
            p *= aq;
            d = d.checked_mul(aq * aq).ok_or(Error::Overflow("surd radicand"))?;
            q *= aq;
        }
        let s = isqrt_i128(d);
        let (mut h0, mut h1) = (1i128, 0i128);
        let (mut k0, mut k1) = (0i128, 1i128);
        let mut out = Vec::new();
        loop {
            let a = if q > 0 {
                Integer::div_floor(&(p + s), &q)
            } else {
                Integer::div_floor(&(p + s + 1), &q)
            };
            let h = a
                .checked_mul(h0)
                .and_then(|v| v.checked_add(h1))
                .ok_or(Error::Overflow("convergent"))?;
            let k = a
                .checked_mul(k0)
                .and_then(|v| v.checked_add(k1))
                .ok_or(Error::Overflow("convergent"))?;
            (h1, h0) = (h0, h);
            (k1, k0) = (k0, k);
            out.push((h, k));
            if k > min_den {
                return Ok(out);
            }
            p = a * q - p;
            q = (d - p * p) / q;
        }
    }
}

fn isqrt_i128(n: i128) -> i128 {
    (n as u128).isqrt() as i128
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.negative_root { "-" } else { "+" };
        if self.q == 1 {
            write!(f, "{}{}sqrt({})", self.p, sign, self.radicand)
        } else {
            write!(f, "({}{}sqrt({}))/{}", self.p, sign, self.radicand, self.q)
        }
    }
}

/// Report of a one-frequency Bohr truncation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BohrTruncation {
    pub set: TruncatedSet,
    /// Rational surrogate `h/k` for `α`.
    pub numerator: i128,
    pub denominator: i128,
    pub delta: Rational,
    /// Members of `[1, N]` whose distance to the threshold is within the
    /// surrogate's error bound `N/k²`.
    pub near_threshold: usize,
}

/// `{a ∈ [1, N] : ‖αa‖ < δ/2}` with `α` replaced by a continued-fraction
/// convergent of denominator above `4N`.
pub fn bohr_truncation(alpha: &QuadraticSurd, delta: Rational, n: u64) -> Result<BohrTruncation> {
    let min_den = 4 * n as i128;
    let &(h, k) = alpha
        .convergents(min_den)?
        .last()
        .expect("at least one convergent");
    let mut out = bohr_truncation_rational(h, k, delta, n)?;
    out.set.provenance = format!("bohr({alpha}, {delta}, {n})");
    Ok(out)
}

/// `{a ∈ [1, N] : ‖(h/k)·a‖ < δ/2}`; the surrogate must have `k > 4N`.
pub fn bohr_truncation_rational(h: i128, k: i128, delta: Rational, n: u64) -> Result<BohrTruncation> {
    if !delta.is_positive() || delta > Rational::from_integer(1) {
        return Err(Error::InvalidArgument("delta must lie in (0, 1]".into()));
    }
    if k <= 4 * n as i128 {
        return Err(Error::InvalidArgument(format!(
            "approximation denominator {k} does not exceed 4N = {}",
            4 * n as u128
        )));
    }
    let (dn, dd) = (*delta.numer(), *delta.denom());
    let mut elems = Vec::new();
    let mut near = 0usize;
    for a in 1..=n as i128 {
        let r = modulo(h.checked_mul(a).ok_or(Error::Overflow("h·a"))?, k as u64) as i128;
        let dist = r.min(k - r);
        // ‖ha/k‖ < δ/2  ⟺  2·dist·dd < dn·k
        let lhs = 2 * dist * dd;
        let rhs = dn * k;
        if lhs < rhs || delta == Rational::from_integer(1) {
            elems.push(a);
        }
        // |‖αa‖ − ‖ha/k‖| ≤ a/k² ≤ N/k²
        if (lhs - rhs).abs() * k <= 2 * dd * n as i128 {
            near += 1;
        }
    }
    Ok(BohrTruncation {
        set: TruncatedSet::new(elems, n as i128, format!("bohr({h}/{k}, {delta}, {n})"))?,
        numerator: h,
        denominator: k,
        delta,
        near_threshold: near,
    })
}

/// `⋃ (x_i, x_i(1 + δ)) ∩ N`, exact up to `⌊x_n(1 + δ)⌋`.
pub fn sparse_interval_union(xs: &[Rational], delta: Rational) -> Result<TruncatedSet> {
    if !delta.is_positive() {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) || xs.first().is_some_and(|x| x.is_negative()) {
        return Err(Error::InvalidArgument(
            "interval starts must be nonnegative and strictly increasing".into(),
        ));
    }
    let one = Rational::from_integer(1);
    let mut elems = Vec::new();
    let mut horizon = 0;
    for x in xs {
        let end = *x * (one + delta);
        let first = x.floor().to_integer() + 1;
        let last = end.ceil().to_integer() - 1;
        if last - first > crate::limits::window_cap() as i128 {
            return Err(Error::WindowCap {
                needed: (last - first) as u128,
                cap: crate::limits::window_cap(),
            });
        }
        elems.extend(first..=last);
        horizon = end.floor().to_integer();
    }
    let starts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    TruncatedSet::new(
        elems,
        horizon,
        format!("sparse([{}], {delta})", starts.join(", ")),
    )
}

/// `x_i = i^i` for `i = 1..=n`.
pub fn power_tower_starts(n: u32) -> Result<Vec<Rational>> {
    (1..=n as i128)
        .map(|i| {
            i.checked_pow(i as u32)
                .map(Rational::from_integer)
                .ok_or(Error::Overflow("i^i"))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapProfileEntry {
    pub blocks: usize,
    pub horizon: i128,
    pub max_gap: Option<i128>,
}

/// Max gap of `aA_i − bA_i` on `[0, horizon_i]` for the union `A_i` of the
/// first `i` intervals.
pub fn sparse_gap_profile(
    xs: &[Rational],
    delta: Rational,
    a: u64,
    b: u64,
) -> Result<Vec<GapProfileEntry>> {
    let op = LinearOp::new(a, b)?;
    let mut out = Vec::new();
    for i in 1..=xs.len() {
        let t = sparse_interval_union(&xs[..i], delta)?;
        let image = apply_linear_op(op, &t.to_epset()?)?;
        let horizon = t.horizon() * a as i128;
        out.push(GapProfileEntry {
            blocks: i,
            horizon,
            max_gap: image.max_gap_in(0, horizon),
        });
    }
    Ok(out)
}

/// `(a_i, b_i) = (2, 1)` for a 0-bit and `(3, 1)` for a 1-bit, acting on
/// `A = 1 + 3Z`. Iterate `k` is `A` when the first `k` bits contain an even
/// number of ones and `−A = 2 + 3Z` otherwise.
pub fn parity_flip_sequence(bits: &[bool]) -> Result<(OpSequence, Vec<EPSet>)> {
    let even = EPSet::ap(1, 3)?;
    let odd = EPSet::ap(2, 3)?;
    let ops = bits
        .iter()
        .map(|&bit| LinearOp::new(if bit { 3 } else { 2 }, 1))
        .collect::<Result<Vec<_>>>()?;
    let mut predicted = vec![even.clone()];
    let mut parity = false;
    for &bit in bits {
        parity ^= bit;
        predicted.push(if parity { odd.clone() } else { even.clone() });
    }
    Ok((OpSequence::finite(ops), predicted))
}

/// `|A ∩ [1, n]| / n` at each sample point.
pub fn density_profile(t: &TruncatedSet, samples: &[i128]) -> Vec<(i128, f64)> {
    samples
        .iter()
        .filter(|&&n| n >= 1)
        .map(|&n| {
            let r = Rational::new(t.count_up_to(n) as i128, n);
            (n, r.to_f64().unwrap_or(0.0))
        })
        .collect()
}

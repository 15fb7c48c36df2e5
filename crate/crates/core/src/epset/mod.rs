//! Eventually periodic two-sided integer sets.
//!
//! An [`EPSet`] is a finite window of explicit membership bits on `[lo, hi]`
//! together with two residue rules modulo `period`: one for every `x < lo`
//! and one for every `x > hi`. The class is closed under dilation, negation,
//! translation, union and Minkowski sums, which is what makes the iteration
//! of `X ↦ aX − bX` exact.
//!
//! Every value of type [`EPSet`] is canonical: minimal period, maximal `lo`,
//! then minimal `hi` (see [`canonicalize`]). Structural equality is therefore
//! set equality.

mod sum;

use std::fmt;

use num_rational::Ratio;

use crate::arith::{self, modulo};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::limits::check_window;

pub type Rational = Ratio<i128>;

/// A possibly non-canonical representation. Membership is
/// `x < lo → neg_tail[x mod period]`, `lo ≤ x ≤ hi → window[x − lo]`,
/// `x > hi → pos_tail[x mod period]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawEpSet {
    pub period: u64,
    pub lo: i128,
    pub hi: i128,
    pub window: Bits,
    pub neg_tail: Bits,
    pub pos_tail: Bits,
}

impl RawEpSet {
    fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::InvalidArgument("period must be positive".into()));
        }
        if self.lo > self.hi + 1 {
            return Err(Error::InvalidArgument("lo must not exceed hi + 1".into()));
        }
        if self.window.len() as i128 != self.hi - self.lo + 1 {
            return Err(Error::InvalidArgument(
                "window length must equal hi - lo + 1".into(),
            ));
        }
        if self.neg_tail.len() as u64 != self.period || self.pos_tail.len() as u64 != self.period
        {
            return Err(Error::InvalidArgument(
                "tail residue sets must have one bit per residue".into(),
            ));
        }
        Ok(())
    }

    fn contains(&self, x: i128) -> bool {
        if x < self.lo {
            self.neg_tail.get(modulo(x, self.period) as usize)
        } else if x > self.hi {
            self.pos_tail.get(modulo(x, self.period) as usize)
        } else {
            self.window.get((x - self.lo) as usize)
        }
    }
}

/// Canonical eventually periodic set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EPSet {
    period: u64,
    lo: i128,
    hi: i128,
    window: Bits,
    neg_tail: Bits,
    pos_tail: Bits,
}

/// Supremum of consecutive-element gaps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gap {
    Bounded(i128),
    Unbounded,
}

/// Smallest divisor `d` of `residues.len()` with `residues + d = residues`.
fn minimal_cyclic_period(residues: &Bits) -> u64 {
    let g = residues.len() as u64;
    arith::divisors(g)
        .into_iter()
        .find(|&d| d == g || residues.rotate(d as usize) == *residues)
        .unwrap_or(g)
}

fn truncate_residues(residues: &Bits, m: u64) -> Bits {
    Bits::from_fn(m as usize, |r| residues.get(r))
}

/// Returns the unique canonical representative of `raw`.
pub fn canonicalize(raw: &RawEpSet) -> Result<EPSet> {
    canonicalize_inner(raw, true)
}

fn canonicalize_inner(raw: &RawEpSet, enforce_cap: bool) -> Result<EPSet> {
    raw.validate()?;
    let m = arith::lcm(
        minimal_cyclic_period(&raw.neg_tail),
        minimal_cyclic_period(&raw.pos_tail),
    )
    .ok_or(Error::Overflow("canonical period"))?;
    let neg = truncate_residues(&raw.neg_tail, m);
    let pos = truncate_residues(&raw.pos_tail, m);
    let pos_rule = |x: i128| pos.get(modulo(x, m) as usize);
    let neg_rule = |x: i128| neg.get(modulo(x, m) as usize);

    // hi* = max{x : member(x) != pos(x)}
    let mut hi_star = None;
    for i in (0..raw.window.len()).rev() {
        let x = raw.lo + i as i128;
        if raw.window.get(i) != pos_rule(x) {
            hi_star = Some(x);
            break;
        }
    }
    if hi_star.is_none() {
        hi_star = (1..=m as i128)
            .map(|k| raw.lo - k)
            .find(|&x| neg_rule(x) != pos_rule(x));
    }
    let Some(hi_star) = hi_star else {
        // Fully periodic: neg and pos rules coincide and the window agrees.
        return Ok(EPSet {
            period: m,
            lo: 0,
            hi: -1,
            window: Bits::new(0),
            neg_tail: neg,
            pos_tail: pos,
        });
    };

    // lo* = min{x : member(x) != neg(x)}; exists since hi* does.
    let mut lo_star = None;
    for i in 0..raw.window.len() {
        let x = raw.lo + i as i128;
        if raw.window.get(i) != neg_rule(x) {
            lo_star = Some(x);
            break;
        }
    }
    let lo_star = match lo_star {
        Some(x) => x,
        None => (1..=m as i128)
            .map(|k| raw.hi + k)
            .find(|&x| neg_rule(x) != pos_rule(x))
            .expect("tails differ whenever the set is not fully periodic"),
    };

    let lo = lo_star;
    let hi = hi_star.max(lo - 1);
    let len = if enforce_cap {
        check_window((hi - lo + 1) as u128)?
    } else {
        (hi - lo + 1) as usize
    };
    let window = Bits::from_fn(len, |i| raw.contains(lo + i as i128));
    Ok(EPSet {
        period: m,
        lo,
        hi,
        window,
        neg_tail: neg,
        pos_tail: pos,
    })
}

impl EPSet {
    pub fn from_raw(raw: &RawEpSet) -> Result<EPSet> {
        canonicalize(raw)
    }

    pub fn to_raw(&self) -> RawEpSet {
        RawEpSet {
            period: self.period,
            lo: self.lo,
            hi: self.hi,
            window: self.window.clone(),
            neg_tail: self.neg_tail.clone(),
            pos_tail: self.pos_tail.clone(),
        }
    }

    pub fn empty() -> EPSet {
        EPSet {
            period: 1,
            lo: 0,
            hi: -1,
            window: Bits::new(0),
            neg_tail: Bits::new(1),
            pos_tail: Bits::new(1),
        }
    }

    /// `Z`.
    pub fn integers() -> EPSet {
        EPSet {
            period: 1,
            lo: 0,
            hi: -1,
            window: Bits::new(0),
            neg_tail: Bits::full(1),
            pos_tail: Bits::full(1),
        }
    }

    /// `N = {0, 1, 2, ...}`.
    pub fn naturals() -> EPSet {
        EPSet::ap_up(0, 1, 0).expect("valid")
    }

    pub fn finite<I: IntoIterator<Item = i128>>(elems: I) -> Result<EPSet> {
        let v: Vec<i128> = elems.into_iter().collect();
        let (Some(&lo), Some(&hi)) = (v.iter().min(), v.iter().max()) else {
            return Ok(EPSet::empty());
        };
        let len = check_window((hi - lo + 1) as u128)?;
        let window = Bits::from_indices(len, v.iter().map(|&x| (x - lo) as usize));
        canonicalize(&RawEpSet {
            period: 1,
            lo,
            hi,
            window,
            neg_tail: Bits::new(1),
            pos_tail: Bits::new(1),
        })
    }

    /// The full residue class `r + gZ`.
    pub fn ap(r: i128, g: u64) -> Result<EPSet> {
        if g == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        check_window(g as u128)?;
        let class = Bits::from_indices(g as usize, [modulo(r, g) as usize]);
        canonicalize(&RawEpSet {
            period: g,
            lo: 0,
            hi: -1,
            window: Bits::new(0),
            neg_tail: class.clone(),
            pos_tail: class,
        })
    }

    /// `{r + gm : m ≥ 0} ∩ [n0, ∞)`.
    pub fn ap_up(r: i128, g: u64, n0: i128) -> Result<EPSet> {
        if g == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        check_window(g as u128)?;
        let start = arith::next_in_class(r.max(n0), modulo(r, g), g);
        canonicalize(&RawEpSet {
            period: g,
            lo: start,
            hi: start - 1,
            window: Bits::new(0),
            neg_tail: Bits::new(g as usize),
            pos_tail: Bits::from_indices(g as usize, [modulo(r, g) as usize]),
        })
    }

    /// `{r − gm : m ≥ 0} ∩ (−∞, n1]`.
    pub fn ap_down(r: i128, g: u64, n1: i128) -> Result<EPSet> {
        Ok(EPSet::ap_up(-r, g, -n1)?.negate())
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn lo(&self) -> i128 {
        self.lo
    }

    pub fn hi(&self) -> i128 {
        self.hi
    }

    pub fn window(&self) -> &Bits {
        &self.window
    }

    pub fn neg_tail(&self) -> &Bits {
        &self.neg_tail
    }

    pub fn pos_tail(&self) -> &Bits {
        &self.pos_tail
    }

    pub fn contains(&self, x: i128) -> bool {
        if x < self.lo {
            self.neg_tail.get(modulo(x, self.period) as usize)
        } else if x > self.hi {
            self.pos_tail.get(modulo(x, self.period) as usize)
        } else {
            self.window.get((x - self.lo) as usize)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.window.none() && self.neg_tail.none() && self.pos_tail.none()
    }

    pub fn is_finite(&self) -> bool {
        self.neg_tail.none() && self.pos_tail.none()
    }

    pub fn is_integers(&self) -> bool {
        *self == EPSet::integers()
    }

    /// Members in `[from, to]`, increasing.
    pub fn elements_in(&self, from: i128, to: i128) -> Vec<i128> {
        let mut out = Vec::new();
        let mut x = from;
        while x <= to {
            if self.contains(x) {
                out.push(x);
            }
            x += 1;
        }
        out
    }

    pub fn min_element(&self) -> Option<i128> {
        if !self.neg_tail.none() {
            return None;
        }
        if let Some(i) = self.window.first_one() {
            return Some(self.lo + i as i128);
        }
        self.pos_tail
            .ones()
            .map(|r| arith::next_in_class(self.hi + 1, r as u64, self.period))
            .min()
    }

    pub fn max_element(&self) -> Option<i128> {
        self.negate().min_element().map(|x| -x)
    }

    /// Fully periodic modulo `g`, i.e. `S + g = S`.
    pub fn is_fully_periodic_mod(&self, g: u64) -> bool {
        g > 0 && self.full_period().is_some_and(|p| g % p == 0)
    }

    /// Minimal `g` with `S + g = S`, if any.
    pub fn full_period(&self) -> Option<u64> {
        (self.window.is_empty() && self.neg_tail == self.pos_tail).then_some(self.period)
    }

    /// Semi-periodic modulo `g`, i.e. `S + g ⊆ S`.
    pub fn is_semi_periodic_mod(&self, g: u64) -> Result<bool> {
        if g == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        Ok(self.translate(g as i128).is_subset(self)?)
    }

    pub fn is_subset(&self, other: &EPSet) -> Result<bool> {
        Ok(self.union(other)? == *other)
    }

    pub fn negate(&self) -> EPSet {
        let g = self.period as usize;
        let flip = |b: &Bits| Bits::from_fn(g, |r| b.get((g - r) % g));
        let n = self.window.len();
        let window = Bits::from_fn(n, |i| self.window.get(n - 1 - i));
        // the lo/hi tie-break is not reflection-symmetric
        canonicalize_inner(
            &RawEpSet {
            period: self.period,
            lo: -self.hi,
            hi: -self.lo,
            window,
                neg_tail: flip(&self.pos_tail),
                pos_tail: flip(&self.neg_tail),
            },
            false,
        )
        .expect("reflection keeps the window length")
    }

    pub fn translate(&self, c: i128) -> EPSet {
        let g = self.period;
        let shift = |b: &Bits| b.rotate(modulo(c, g) as usize);
        if self.window.is_empty() {
            // keep the empty-window convention of fully periodic sets
            return canonicalize_inner(
                &RawEpSet {
                    period: g,
                    lo: self.lo + c,
                    hi: self.hi + c,
                    window: Bits::new(0),
                    neg_tail: shift(&self.neg_tail),
                    pos_tail: shift(&self.pos_tail),
                },
                false,
            )
            .expect("valid representation");
        }
        EPSet {
            period: g,
            lo: self.lo + c,
            hi: self.hi + c,
            window: self.window.clone(),
            neg_tail: shift(&self.neg_tail),
            pos_tail: shift(&self.pos_tail),
        }
    }

    /// `{nx : x ∈ S}`; `n = 0` is rejected.
    pub fn dilate(&self, n: i128) -> Result<EPSet> {
        if n == 0 {
            return Err(Error::ZeroDilation);
        }
        if n < 0 {
            return self.negate().dilate(-n);
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let nu: u64 = n
            .try_into()
            .map_err(|_| Error::Overflow("dilation factor"))?;
        let period = self
            .period
            .checked_mul(nu)
            .ok_or(Error::Overflow("dilated period"))?;
        check_window(period as u128)?;
        let lo = self.lo.checked_mul(n).ok_or(Error::Overflow("dilate"))?;
        let hi = self.hi.checked_mul(n).ok_or(Error::Overflow("dilate"))?;
        let len = if self.window.is_empty() {
            0
        } else {
            check_window((hi - lo + 1) as u128)?
        };
        let (lo, hi) = if len == 0 { (lo, lo - 1) } else { (lo, hi) };
        let window = Bits::from_indices(len, self.window.ones().map(|i| i * nu as usize));
        let lift = |b: &Bits| Bits::from_indices(period as usize, b.ones().map(|r| r * nu as usize));
        canonicalize(&RawEpSet {
            period,
            lo,
            hi,
            window,
            neg_tail: lift(&self.neg_tail),
            pos_tail: lift(&self.pos_tail),
        })
    }

    pub fn union(&self, other: &EPSet) -> Result<EPSet> {
        let g = arith::lcm(self.period, other.period).ok_or(Error::Overflow("union period"))?;
        check_window(g as u128)?;
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        let len = check_window((hi - lo + 1) as u128)?;
        let window = Bits::from_fn(len, |i| {
            let x = lo + i as i128;
            self.contains(x) || other.contains(x)
        });
        let lift = |a: &Bits, pa: u64, b: &Bits, pb: u64| {
            Bits::from_fn(g as usize, |r| {
                a.get(r % pa as usize) || b.get(r % pb as usize)
            })
        };
        canonicalize(&RawEpSet {
            period: g,
            lo,
            hi,
            window,
            neg_tail: lift(&self.neg_tail, self.period, &other.neg_tail, other.period),
            pos_tail: lift(&self.pos_tail, self.period, &other.pos_tail, other.period),
        })
    }

    /// `S ∩ [0, ∞)`.
    pub fn restrict_nonnegative(&self) -> Result<EPSet> {
        let hi = self.hi.max(-1);
        let len = check_window((hi + 1) as u128)?;
        let window = Bits::from_fn(len, |i| self.contains(i as i128));
        canonicalize(&RawEpSet {
            period: self.period,
            lo: 0,
            hi,
            window,
            neg_tail: Bits::new(self.period as usize),
            pos_tail: self.pos_tail.clone(),
        })
    }

    /// `{x + y : x ∈ S, y ∈ T}`.
    pub fn minkowski_sum(&self, other: &EPSet) -> Result<EPSet> {
        sum::minkowski_sum(self, other)
    }

    /// `S − T = {x − y}`.
    pub fn difference_set(&self, other: &EPSet) -> Result<EPSet> {
        self.minkowski_sum(&other.negate())
    }

    /// `n`-fold sumset `S + ⋯ + S`; `n = 0` gives `{0}`.
    pub fn sum_power(&self, n: u32) -> Result<EPSet> {
        let mut acc = EPSet::finite([0])?;
        for _ in 0..n {
            acc = acc.minkowski_sum(self)?;
        }
        Ok(acc)
    }

    /// Density of the positive side, `|pos_tail| / period`.
    pub fn upper_density(&self) -> Rational {
        Rational::new(self.pos_tail.count_ones() as i128, self.period as i128)
    }

    /// Supremum of gaps between consecutive members. `Unbounded` when the set
    /// is bounded above (including the empty set).
    pub fn max_gap(&self) -> Gap {
        if self.pos_tail.none() {
            return Gap::Unbounded;
        }
        let g = self.period as i128;
        let from = if self.neg_tail.none() {
            self.lo
        } else {
            self.lo - 2 * g
        };
        let to = self.hi + 2 * g;
        match self.max_gap_in(from, to) {
            Some(v) => Gap::Bounded(v),
            // a single member in range with a periodic tail: gap is the tail spacing
            None => Gap::Bounded(g),
        }
    }

    /// Largest gap between consecutive members inside `[from, to]`; `None`
    /// with fewer than two members there.
    pub fn max_gap_in(&self, from: i128, to: i128) -> Option<i128> {
        let mut prev: Option<i128> = None;
        let mut best: Option<i128> = None;
        let mut x = from;
        while x <= to {
            if self.contains(x) {
                if let Some(p) = prev {
                    best = Some(best.map_or(x - p, |b| b.max(x - p)));
                }
                prev = Some(x);
            }
            x += 1;
        }
        best
    }

    /// Residues modulo `g` met by the positive tail (requires `period | g`
    /// for an exact answer; the tail rule is lifted to `lcm`).
    pub fn pos_tail_residues_mod(&self, g: u64) -> Bits {
        let l = arith::lcm(self.period, g).expect("small moduli");
        let mut out = Bits::new(g as usize);
        for r in 0..l {
            if self.pos_tail.get((r % self.period) as usize) {
                out.set((r % g) as usize, true);
            }
        }
        out
    }
}

impl fmt::Debug for EPSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EPSet")
            .field("period", &self.period)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("window", &self.window)
            .field("neg_tail", &self.neg_tail)
            .field("pos_tail", &self.pos_tail)
            .finish()
    }
}

impl serde::Serialize for EPSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&crate::grammar::emit_set(self))
    }
}

impl fmt::Display for EPSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::grammar::emit_set(self))
    }
}

//! Linear set operations `Γ_{a,b}(X) = aX − bX`, their compositions and the
//! signed coefficient expansion of a composed operation.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::arith::gcd;
use crate::epset::EPSet;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearOp {
    a: u64,
    b: u64,
}

impl LinearOp {
    pub fn new(a: u64, b: u64) -> Result<LinearOp> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidArgument(format!(
                "operation ({a},{b}) needs positive coefficients"
            )));
        }
        Ok(LinearOp { a, b })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn is_coprime(&self) -> bool {
        gcd(self.a, self.b) == 1
    }

    pub fn max_entry(&self) -> u64 {
        self.a.max(self.b)
    }

    pub fn apply(&self, s: &EPSet) -> Result<EPSet> {
        apply_linear_op(*self, s)
    }
}

impl fmt::Display for LinearOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

impl Serialize for LinearOp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.a, self.b].serialize(s)
    }
}

/// A finite prefix followed by an optional cyclically repeated block, with a
/// declared coefficient bound `L`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpSequence {
    prefix: Vec<LinearOp>,
    cycle: Vec<LinearOp>,
    bound: u64,
}

fn max_entry(ops: &[LinearOp]) -> u64 {
    ops.iter().map(LinearOp::max_entry).max().unwrap_or(1)
}

impl OpSequence {
    pub fn finite(ops: Vec<LinearOp>) -> OpSequence {
        let bound = max_entry(&ops);
        OpSequence {
            prefix: ops,
            cycle: Vec::new(),
            bound,
        }
    }

    /// `prefix` followed by `cycle` repeated forever.
    pub fn cyclic(prefix: Vec<LinearOp>, cycle: Vec<LinearOp>) -> Result<OpSequence> {
        if cycle.is_empty() {
            return Err(Error::InvalidArgument("cyclic block must be nonempty".into()));
        }
        let bound = max_entry(&prefix).max(max_entry(&cycle));
        Ok(OpSequence {
            prefix,
            cycle,
            bound,
        })
    }

    pub fn constant(op: LinearOp) -> OpSequence {
        OpSequence::cyclic(Vec::new(), vec![op]).expect("nonempty")
    }

    /// Declares the bound `L`; it must dominate every coefficient.
    pub fn with_bound(mut self, bound: u64) -> Result<OpSequence> {
        let needed = max_entry(&self.prefix).max(max_entry(&self.cycle));
        if bound < needed {
            return Err(Error::InvalidArgument(format!(
                "bound {bound} is below the largest coefficient {needed}"
            )));
        }
        self.bound = bound;
        Ok(self)
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn prefix(&self) -> &[LinearOp] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[LinearOp] {
        &self.cycle
    }

    pub fn is_cyclic(&self) -> bool {
        !self.cycle.is_empty()
    }

    /// Number of operations, `None` for cyclic sequences.
    pub fn len(&self) -> Option<usize> {
        (!self.is_cyclic()).then_some(self.prefix.len())
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.cycle.is_empty()
    }

    /// The operation producing iterate `k + 1` from iterate `k`.
    pub fn op_at(&self, k: usize) -> Option<LinearOp> {
        if k < self.prefix.len() {
            Some(self.prefix[k])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(k - self.prefix.len()) % self.cycle.len()])
        }
    }

    /// The first `n` operations (fewer if the sequence is finite and shorter).
    pub fn take(&self, n: usize) -> Vec<LinearOp> {
        (0..n).map_while(|k| self.op_at(k)).collect()
    }

    pub fn all_coprime(&self) -> bool {
        self.prefix.iter().chain(&self.cycle).all(LinearOp::is_coprime)
    }
}

impl fmt::Display for OpSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::grammar::emit_ops(self))
    }
}

/// `Γ_{a,b}(S) = aS − bS`.
pub fn apply_linear_op(op: LinearOp, s: &EPSet) -> Result<EPSet> {
    if s.is_empty() {
        return Ok(EPSet::empty());
    }
    let left = s.dilate(op.a as i128)?;
    let right = s.negate().dilate(op.b as i128)?;
    left.minkowski_sum(&right)
}

/// Applies `ops` left to right; the empty composition is the identity.
pub fn apply_composition(ops: &[LinearOp], s: &EPSet) -> Result<EPSet> {
    ops.iter()
        .try_fold(s.clone(), |acc, &op| apply_linear_op(op, &acc))
}

/// Signed coefficient multiset `{(−1)^{|J|} ∏_{I} a_i ∏_{J} b_j}` over all
/// splits `I ⊔ J` of the operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientExpansion {
    terms: BTreeMap<i128, BigUint>,
    depth: usize,
}

impl CoefficientExpansion {
    pub fn terms(&self) -> &BTreeMap<i128, BigUint> {
        &self.terms
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn multiplicity(&self, coefficient: i128) -> BigUint {
        self.terms.get(&coefficient).cloned().unwrap_or_default()
    }

    pub fn total_multiplicity(&self) -> BigUint {
        self.terms.values().sum()
    }

    pub fn positive_multiplicity(&self) -> BigUint {
        self.terms
            .iter()
            .filter(|(c, _)| **c > 0)
            .map(|(_, m)| m)
            .sum()
    }

    pub fn negative_multiplicity(&self) -> BigUint {
        self.terms
            .iter()
            .filter(|(c, _)| **c < 0)
            .map(|(_, m)| m)
            .sum()
    }

    pub fn max_abs_coefficient(&self) -> i128 {
        self.terms.keys().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl Serialize for CoefficientExpansion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<(String, String)> = self
            .terms
            .iter()
            .map(|(c, m)| (c.to_string(), m.to_string()))
            .collect();
        v.serialize(s)
    }
}

/// Coefficients `c` of `⃝Γ(X) = Σ c·X` with their split counts. The empty
/// composition is the identity `{1: 1}`.
pub fn compose_coefficients(ops: &[LinearOp]) -> Result<CoefficientExpansion> {
    let mut terms: BTreeMap<i128, BigUint> = BTreeMap::new();
    terms.insert(1, BigUint::one());
    for op in ops {
        let mut next: BTreeMap<i128, BigUint> = BTreeMap::new();
        for (c, m) in &terms {
            let pos = c
                .checked_mul(op.a as i128)
                .ok_or(Error::Overflow("coefficient"))?;
            let neg = c
                .checked_mul(-(op.b as i128))
                .ok_or(Error::Overflow("coefficient"))?;
            *next.entry(pos).or_default() += m;
            *next.entry(neg).or_default() += m;
        }
        terms = next;
    }
    Ok(CoefficientExpansion {
        terms,
        depth: ops.len(),
    })
}

/// A positive coefficient `α` and a negative coefficient `−β`, each realised
/// by many splits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominantPair {
    pub alpha: i128,
    #[serde(serialize_with = "ser_big")]
    pub alpha_multiplicity: BigUint,
    pub beta: i128,
    #[serde(serialize_with = "ser_big")]
    pub beta_multiplicity: BigUint,
    /// `⌈2^{t−1} / (4t/L)^L⌉`.
    #[serde(serialize_with = "ser_big")]
    pub guaranteed: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub coefficient_bound: BigUint,
    pub depth: usize,
    pub bound: u64,
    pub requested: u64,
}

impl DominantPair {
    /// Both multiplicities reach the guaranteed count and `m`, and
    /// `α, β ≤ L^t`.
    pub fn verified(&self) -> bool {
        let m = BigUint::from(self.requested);
        let alpha = BigUint::from(self.alpha as u128);
        let beta = BigUint::from(self.beta as u128);
        self.alpha_multiplicity >= self.guaranteed
            && self.beta_multiplicity >= self.guaranteed
            && self.alpha_multiplicity >= m
            && self.beta_multiplicity >= m
            && self.guaranteed >= m
            && alpha <= self.coefficient_bound
            && beta <= self.coefficient_bound
    }
}

pub(crate) fn ser_big<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DominantOutcome {
    Found(DominantPair),
    InsufficientDepth { depth: usize, bound: u64, requested: u64 },
}

/// Whether `t ≥ 2·log₂(m) + 4L + 2`, decided exactly.
pub fn depth_suffices(t: usize, bound: u64, m: u64) -> bool {
    let fixed = 4 * bound as u128 + 2;
    if (t as u128) < fixed {
        return false;
    }
    if m <= 1 {
        return true;
    }
    // t − 4L − 2 ≥ 2·log₂ m  ⟺  2^{t−4L−2} ≥ m²
    let slack = (t as u128 - fixed) as u32;
    let lhs = BigUint::one() << slack;
    lhs >= BigUint::from(m) * BigUint::from(m)
}

/// Smallest `t` with `t ≥ 2·log₂(m) + 4L + 2`.
pub fn minimal_depth(bound: u64, m: u64) -> usize {
    (0..).find(|&t| depth_suffices(t, bound, m)).expect("unbounded search")
}

/// `⌈2^{t−1} L^L / (4t)^L⌉`.
pub fn guaranteed_multiplicity(t: usize, bound: u64) -> BigUint {
    if t == 0 {
        return BigUint::zero();
    }
    let l = bound as u32;
    let num = (BigUint::one() << (t - 1)) * BigUint::from(bound).pow(l);
    let den = BigUint::from(4 * t as u64).pow(l);
    num.div_ceil(&den)
}

/// Picks the most frequent positive and negative coefficients (ties go to
/// the smaller absolute value) when the depth hypothesis holds.
pub fn dominant_coefficient_pair(ops: &[LinearOp], bound: u64, m: u64) -> Result<DominantOutcome> {
    let t = ops.len();
    if let Some(op) = ops.iter().find(|op| op.max_entry() > bound) {
        return Err(Error::InvalidArgument(format!(
            "operation {op} exceeds the bound {bound}"
        )));
    }
    if !depth_suffices(t, bound, m) {
        return Ok(DominantOutcome::InsufficientDepth {
            depth: t,
            bound,
            requested: m,
        });
    }
    let exp = compose_coefficients(ops)?;
    let pick = |positive: bool| {
        exp.terms
            .iter()
            .filter(|(c, _)| (**c > 0) == positive)
            .fold(None::<(i128, &BigUint)>, |best, (c, mult)| match best {
                Some((bc, bm)) if bm > mult || (bm == mult && bc.abs() <= c.abs()) => best,
                _ => Some((*c, mult)),
            })
            .map(|(c, mult)| (c.abs(), mult.clone()))
            .expect("both signs occur in a nonempty expansion")
    };
    let (alpha, alpha_multiplicity) = pick(true);
    let (beta, beta_multiplicity) = pick(false);
    Ok(DominantOutcome::Found(DominantPair {
        alpha,
        alpha_multiplicity,
        beta,
        beta_multiplicity,
        guaranteed: guaranteed_multiplicity(t, bound),
        coefficient_bound: BigUint::from(bound).pow(t as u32),
        depth: t,
        bound,
        requested: m,
    }))
}

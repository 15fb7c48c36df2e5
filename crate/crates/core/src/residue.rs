//! Subsets of `Z/gZ` under `U ↦ aU + bU`: periods, the equality-case
//! decomposition `U = V + X + a₁b₁G`, residue orbits, and the two lemmas on
//! semi-periodic sets and on `aX + bX = aX`.

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::arith::{self, gcd, modulo};
use crate::bits::Bits;
use crate::epset::EPSet;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ResidueSet {
    modulus: u64,
    elems: Bits,
}

impl ResidueSet {
    pub fn new<I: IntoIterator<Item = u64>>(modulus: u64, elems: I) -> Result<ResidueSet> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        let mut bits = Bits::new(modulus as usize);
        for e in elems {
            if e >= modulus {
                return Err(Error::InvalidArgument(format!(
                    "residue {e} is out of range for modulus {modulus}"
                )));
            }
            bits.set(e as usize, true);
        }
        Ok(ResidueSet {
            modulus,
            elems: bits,
        })
    }

    pub fn from_bits(elems: Bits) -> ResidueSet {
        assert!(!elems.is_empty(), "modulus must be positive");
        ResidueSet {
            modulus: elems.len() as u64,
            elems,
        }
    }

    /// Residues `x mod g` of integers `x ∈ s`, for a set that is fully
    /// periodic modulo `g`.
    pub fn from_fully_periodic(s: &EPSet, g: u64) -> Result<ResidueSet> {
        if !s.is_fully_periodic_mod(g) {
            return Err(Error::Precondition(format!(
                "set is not fully periodic modulo {g}"
            )));
        }
        Ok(ResidueSet::from_bits(Bits::from_fn(g as usize, |r| {
            s.contains(r as i128)
        })))
    }

    pub fn full(modulus: u64) -> ResidueSet {
        ResidueSet::from_bits(Bits::full(modulus as usize))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn bits(&self) -> &Bits {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.none()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elems.get((x % self.modulus) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.elems.ones().map(|i| i as u64)
    }

    pub fn translate(&self, c: i128) -> ResidueSet {
        ResidueSet::from_bits(self.elems.rotate(modulo(c, self.modulus) as usize))
    }

    /// `kU = {kx}`.
    pub fn dilate(&self, k: u64) -> ResidueSet {
        let g = self.modulus;
        let mut out = Bits::new(g as usize);
        for x in self.iter() {
            out.set(((x as u128 * k as u128) % g as u128) as usize, true);
        }
        ResidueSet::from_bits(out)
    }

    pub fn sum(&self, other: &ResidueSet) -> ResidueSet {
        assert_eq!(self.modulus, other.modulus, "moduli differ");
        ResidueSet::from_bits(self.elems.cyclic_sum(&other.elems))
    }

    pub fn is_subset(&self, other: &ResidueSet) -> bool {
        self.modulus == other.modulus && self.elems.is_subset(&other.elems)
    }

    /// `{x mod d}` for a divisor `d` of the modulus.
    pub fn reduce(&self, d: u64) -> ResidueSet {
        assert!(d > 0 && self.modulus % d == 0);
        ResidueSet::from_bits(Bits::from_indices(
            d as usize,
            self.iter().map(|x| (x % d) as usize),
        ))
    }

    /// The generated subgroup is proper.
    pub fn in_proper_subgroup(&self) -> bool {
        self.iter().fold(self.modulus, gcd) != 1
    }
}

impl fmt::Debug for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::grammar::emit_residue_set(self))
    }
}

impl fmt::Display for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::grammar::emit_residue_set(self))
    }
}

impl Serialize for ResidueSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&crate::grammar::emit_residue_set(self))
    }
}

/// The subgroup `step·G` of `G = Z/gZ`, `step | g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Subgroup {
    pub modulus: u64,
    pub step: u64,
}

impl Subgroup {
    pub fn new(modulus: u64, step: u64) -> Result<Subgroup> {
        if modulus == 0 || step == 0 || modulus % step != 0 {
            return Err(Error::InvalidArgument(format!(
                "{step} does not divide {modulus}"
            )));
        }
        Ok(Subgroup { modulus, step })
    }

    pub fn order(&self) -> u64 {
        self.modulus / self.step
    }

    pub fn is_trivial(&self) -> bool {
        self.step == self.modulus
    }

    pub fn contains(&self, x: u64) -> bool {
        x % self.step == 0
    }

    pub fn to_set(&self) -> ResidueSet {
        ResidueSet::new(self.modulus, (0..self.modulus).step_by(self.step as usize))
            .expect("in range")
    }
}

/// `aU + bU`.
pub fn gamma_mod(u: &ResidueSet, a: u64, b: u64) -> ResidueSet {
    u.dilate(a).sum(&u.dilate(b))
}

/// The maximal subgroup `H` with `U + H = U`.
pub fn period(u: &ResidueSet) -> Result<Subgroup> {
    if u.is_empty() {
        return Err(Error::Precondition("period of the empty set".into()));
    }
    let g = u.modulus;
    let step = arith::divisors(g)
        .into_iter()
        .find(|&d| d == g || u.elems.rotate(d as usize) == u.elems)
        .unwrap_or(g);
    Ok(Subgroup { modulus: g, step })
}

pub fn is_periodic(u: &ResidueSet) -> bool {
    period(u).is_ok_and(|h| !h.is_trivial())
}

fn require_coprime(a: u64, b: u64) -> Result<()> {
    if gcd(a, b) != 1 {
        return Err(Error::Precondition(format!("gcd({a},{b}) != 1")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CardinalityCheck {
    pub size: usize,
    pub image_size: usize,
    pub holds: bool,
}

/// `|aU + bU| ≥ |U|` for coprime `a, b`.
pub fn cardinality_check(u: &ResidueSet, a: u64, b: u64) -> Result<CardinalityCheck> {
    require_coprime(a, b)?;
    let size = u.len();
    let image_size = gamma_mod(u, a, b).len();
    Ok(CardinalityCheck {
        size,
        image_size,
        holds: image_size >= size,
    })
}

/// `U = t + V + X + H` with `H = a₁b₁G`, `V ⊂ a₁G`, `X ⊂ b₁G`,
/// `|U| = |V|·|X|·|H|`, `a₁ | gcd(g, a)` and `b₁ | gcd(g, b)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionCertificate {
    pub modulus: u64,
    pub a: u64,
    pub b: u64,
    /// `U − translation` contains 0.
    pub translation: u64,
    pub a1: u64,
    pub b1: u64,
    pub v: ResidueSet,
    pub x: ResidueSet,
    pub h: Subgroup,
}

impl DecompositionCertificate {
    /// Checks every invariant against `u`, returning the first violation.
    pub fn verify(&self, u: &ResidueSet) -> std::result::Result<(), String> {
        let g = self.modulus;
        if u.modulus != g {
            return Err("modulus mismatch".into());
        }
        if gcd(g, self.a) % self.a1 != 0 {
            return Err(format!("a1 = {} does not divide gcd(g, a)", self.a1));
        }
        if gcd(g, self.b) % self.b1 != 0 {
            return Err(format!("b1 = {} does not divide gcd(g, b)", self.b1));
        }
        if self.h.step != self.a1 * self.b1 {
            return Err("H is not a1·b1·G".into());
        }
        if !self.v.iter().all(|v| v % self.a1 == 0) {
            return Err("V is not contained in a1·G".into());
        }
        if !self.x.iter().all(|x| x % self.b1 == 0) {
            return Err("X is not contained in b1·G".into());
        }
        let rebuilt = self.v.sum(&self.x).sum(&self.h.to_set());
        if rebuilt != u.translate(-(self.translation as i128)) {
            return Err("V + X + H does not reconstruct U".into());
        }
        if self.v.len() as u64 * self.x.len() as u64 * self.h.order() != u.len() as u64 {
            return Err("|U| != |V|·|X|·|H|".into());
        }
        // aU + bU = aV + bX + H after undoing the translation
        let image = gamma_mod(&rebuilt, self.a, self.b);
        let predicted = self
            .v
            .dilate(self.a)
            .sum(&self.x.dilate(self.b))
            .sum(&self.h.to_set());
        if image != predicted {
            return Err("aU + bU != aV + bX + H".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "failure", rename_all = "snake_case")]
pub enum DecompositionFailure {
    NotCoprime { a: u64, b: u64 },
    EmptySet,
    CardinalityGrows { size: usize, image_size: usize },
    ProperSubgroup { generator: u64 },
    /// The construction did not produce a valid certificate.
    Inconsistent { reason: String },
}

impl fmt::Display for DecompositionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionFailure::NotCoprime { a, b } => write!(f, "gcd({a},{b}) != 1"),
            DecompositionFailure::EmptySet => write!(f, "empty set"),
            DecompositionFailure::CardinalityGrows { size, image_size } => {
                write!(f, "|aU+bU| = {image_size} > |U| = {size}")
            }
            DecompositionFailure::ProperSubgroup { generator } => {
                write!(f, "U − u lies in the proper subgroup {generator}G")
            }
            DecompositionFailure::Inconsistent { reason } => write!(f, "{reason}"),
        }
    }
}

/// Decomposes an equality case `|aU + bU| = |U|`.
///
/// `U` is translated to contain 0 and its period `H` is factored out. In
/// `G/H ≅ Z/g₁Z` we have `g₁ = a₁b₁` with `a₁ = gcd(g₁, a)`,
/// `b₁ = gcd(g₁, b)`; `X` is the part of `U/H` in `b₁(G/H)` and `V` holds
/// the unique element of `a₁(G/H)` in each coset of `b₁(G/H)` met by `U/H`.
/// Representatives are then lifted back to `G`.
pub fn decompose_equality_case(
    u: &ResidueSet,
    a: u64,
    b: u64,
) -> std::result::Result<DecompositionCertificate, DecompositionFailure> {
    if gcd(a, b) != 1 {
        return Err(DecompositionFailure::NotCoprime { a, b });
    }
    let Some(t) = u.iter().next() else {
        return Err(DecompositionFailure::EmptySet);
    };
    let g = u.modulus;
    let u0 = u.translate(-(t as i128));
    let image_size = gamma_mod(&u0, a, b).len();
    if image_size != u0.len() {
        return Err(DecompositionFailure::CardinalityGrows {
            size: u0.len(),
            image_size,
        });
    }
    let generator = u0.iter().fold(g, gcd);
    if generator != 1 {
        return Err(DecompositionFailure::ProperSubgroup { generator });
    }

    let h = period(&u0).expect("nonempty");
    let g1 = h.step;
    let quotient = u0.reduce(g1);
    let a1 = gcd(g1, a);
    let b1 = gcd(g1, b);
    if a1 * b1 != g1 {
        return Err(DecompositionFailure::Inconsistent {
            reason: format!("quotient order {g1} != gcd(g1,a)·gcd(g1,b) = {a1}·{b1}"),
        });
    }
    let x1: Vec<u64> = quotient.iter().filter(|e| e % b1 == 0).collect();
    let mut v1 = Vec::new();
    let mut seen = vec![false; b1 as usize];
    for e in quotient.iter() {
        let coset = (e % b1) as usize;
        if seen[coset] {
            continue;
        }
        seen[coset] = true;
        // the unique multiple of a1 in e + b1·Z/g1
        let rep = (0..g1)
            .step_by(a1 as usize)
            .find(|y| y % b1 == e % b1)
            .expect("a1·G ⊕ b1·G = G when gcd(a1, b1) = 1");
        v1.push(rep);
    }
    // lifting a residue mod g1 to its least nonnegative representative keeps
    // divisibility by a1 and b1
    let v = ResidueSet::new(g, v1).expect("g1 divides g");
    let x = ResidueSet::new(g, x1).expect("g1 divides g");
    let cert = DecompositionCertificate {
        modulus: g,
        a,
        b,
        translation: t,
        a1,
        b1,
        v,
        x,
        h,
    };
    cert.verify(u)
        .map_err(|reason| DecompositionFailure::Inconsistent { reason })?;
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueOrbit {
    pub iterates: Vec<ResidueSet>,
    /// First index of the cycle.
    pub onset: usize,
    pub length: usize,
    /// Cardinalities along the orbit.
    pub sizes: Vec<usize>,
    /// Every step on the cycle preserves cardinality (always true once the
    /// non-decreasing cardinality stabilises).
    pub cycle_preserves_cardinality: bool,
    /// `length | φ(a)·φ(b)`, checked when the cycle preserves cardinality.
    /// Guaranteed only when the cycle contains 0 and spans `G`; translated
    /// cycles may drift by `(a + b)·t`.
    pub length_divides_totients: Option<bool>,
}

/// Iterates `U ↦ aU + bU` until a set repeats.
pub fn residue_orbit(u: &ResidueSet, a: u64, b: u64, max_steps: usize) -> Result<ResidueOrbit> {
    require_coprime(a, b)?;
    let mut seen: HashMap<ResidueSet, usize> = HashMap::new();
    let mut iterates = vec![u.clone()];
    seen.insert(u.clone(), 0);
    loop {
        if iterates.len() > max_steps {
            return Err(Error::StepLimit(max_steps));
        }
        let next = gamma_mod(iterates.last().expect("nonempty"), a, b);
        if let Some(&onset) = seen.get(&next) {
            let length = iterates.len() - onset;
            let sizes: Vec<usize> = iterates.iter().map(ResidueSet::len).collect();
            let preserving = sizes[onset..].iter().all(|&s| s == sizes[onset]);
            let phi = arith::totient(a) * arith::totient(b);
            return Ok(ResidueOrbit {
                iterates,
                onset,
                length,
                sizes,
                cycle_preserves_cardinality: preserving,
                length_divides_totients: preserving.then_some(phi % length as u64 == 0),
            });
        }
        seen.insert(next.clone(), iterates.len());
        iterates.push(next);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Lemma52Report {
    /// Hypotheses hold and `X ⊂ (g / gcd(g, b))·G`.
    Holds { step: u64, quotients: Vec<u64> },
    /// Hypotheses hold but containment fails.
    Violated { step: u64, offending: Vec<u64> },
    HypothesesFail { reasons: Vec<String> },
}

/// For `0 ∈ X`, `gcd(a, b) = 1`, `X` aperiodic and `aX + bX = aX`, checks
/// `X ⊂ (g / gcd(g, b))·G`.
pub fn lemma52_check(x: &ResidueSet, a: u64, b: u64) -> Lemma52Report {
    let mut reasons = Vec::new();
    if !x.contains(0) {
        reasons.push("0 is not in X".to_string());
    }
    if gcd(a, b) != 1 {
        reasons.push(format!("gcd({a},{b}) != 1"));
    }
    if is_periodic(x) {
        reasons.push("X is periodic".to_string());
    }
    if x.is_empty() || gamma_mod(x, a, b) != x.dilate(a) {
        reasons.push("aX + bX != aX".to_string());
    }
    if !reasons.is_empty() {
        return Lemma52Report::HypothesesFail { reasons };
    }
    let g = x.modulus;
    let step = g / gcd(g, b);
    let offending: Vec<u64> = x.iter().filter(|e| e % step != 0).collect();
    if offending.is_empty() {
        Lemma52Report::Holds {
            step,
            quotients: x.iter().map(|e| e / step).collect(),
        }
    } else {
        Lemma52Report::Violated { step, offending }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma51Report {
    pub modulus: u64,
    pub difference: EPSet,
    pub fully_periodic: bool,
}

/// For `S` semi-periodic mod `g` and `T` semi-periodic mod `g'`, computes
/// `S − T` and checks that it is fully periodic mod `gcd(g, g')`.
pub fn lemma51_fully_periodic(s: &EPSet, g: u64, t: &EPSet, g2: u64) -> Result<Lemma51Report> {
    if !s.is_semi_periodic_mod(g)? {
        return Err(Error::Precondition(format!(
            "first set is not semi-periodic modulo {g}"
        )));
    }
    if !t.is_semi_periodic_mod(g2)? {
        return Err(Error::Precondition(format!(
            "second set is not semi-periodic modulo {g2}"
        )));
    }
    let d = gcd(g, g2);
    let difference = s.difference_set(t)?;
    let fully_periodic = difference.translate(d as i128) == difference;
    Ok(Lemma51Report {
        modulus: d,
        difference,
        fully_periodic,
    })
}

//! Text forms for sets, operation sequences and residue sets.
//!
//! Sets:
//!
//! ```text
//! set   := "Z" | "N" | "{" [int ("," int)*] "}"
//!        | "AP(" int "," int ")"            r + gZ
//!        | "AP+(" int "," int "," int ")"   {r + gm : m ≥ 0} ∩ [n0, ∞)
//!        | "AP-(" int "," int "," int ")"   {r − gm : m ≥ 0} ∩ (−∞, n1]
//!        | "U(" set ("," set)* ")"
//!        | "bohr(" alpha "," rat "," int ")"
//!        | "sparse(" ("[" rat ("," rat)* "]" | "pow(" int ")") "," rat ")"
//! alpha := rat | surd | "(" surd ")/" int
//! surd  := [int ("+"|"-")] "sqrt(" int ")" [("+"|"-") int]
//! rat   := int ["/" int] | decimal
//! ```
//!
//! Operation sequences are `(a,b)` atoms with optional `^k` repetition,
//! optionally ending in a cyclic block `cyc[...]`. Residue sets are
//! `mod g {e1, ...}`. Whitespace is ignored everywhere.

use std::fmt;

use num_traits::Zero;

use crate::constructions::{self, QuadraticSurd, TruncatedSet};
use crate::epset::{EPSet, Rational};
use crate::linops::{LinearOp, OpSequence};
use crate::residue::ResidueSet;

/// Set elements and parameters are limited to this magnitude.
pub const MAX_LITERAL: i128 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Syntax,
    Semantic,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::Semantic => "semantic error",
        };
        write!(f, "{kind} at position {}: {}", self.position, self.message)
    }
}

pub type ParseResult<T> = std::result::Result<T, ParseError>;

/// Either an exact set or a finite truncation of an infinite construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedSet {
    Exact(EPSet),
    Truncated(TruncatedSet),
}

impl ParsedSet {
    pub fn into_exact(self) -> Option<EPSet> {
        match self {
            ParsedSet::Exact(s) => Some(s),
            ParsedSet::Truncated(_) => None,
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn syntax<T>(&self, message: impl Into<String>) -> ParseResult<T> {
        Err(ParseError {
            kind: ParseErrorKind::Syntax,
            position: self.pos,
            message: message.into(),
        })
    }

    fn semantic<T>(&self, at: usize, message: impl Into<String>) -> ParseResult<T> {
        Err(ParseError {
            kind: ParseErrorKind::Semantic,
            position: at,
            message: message.into(),
        })
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> ParseResult<()> {
        if self.eat(token) {
            Ok(())
        } else {
            self.syntax(format!("expected '{token}'"))
        }
    }

    fn finish(&mut self) -> ParseResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.syntax(format!("unexpected '{c}'")),
        }
    }

    fn digits(&mut self) -> ParseResult<&'a str> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let n = rest.bytes().take_while(u8::is_ascii_digit).count();
        if n == 0 {
            return self.syntax("expected a number");
        }
        self.pos += n;
        Ok(&rest[..n])
    }

    fn int(&mut self) -> ParseResult<i128> {
        self.skip_ws();
        let start = self.pos;
        let negative = if self.eat("-") {
            true
        } else {
            self.eat("+");
            false
        };
        let digits = self.digits()?;
        let value = digits
            .parse::<i128>()
            .ok()
            .filter(|v| *v <= MAX_LITERAL);
        match value {
            Some(v) => Ok(if negative { -v } else { v }),
            None => self.semantic(start, format!("integer exceeds {MAX_LITERAL} in magnitude")),
        }
    }

    fn positive(&mut self, what: &str) -> ParseResult<u64> {
        self.skip_ws();
        let at = self.pos;
        let v = self.int()?;
        if v <= 0 {
            return self.semantic(at, format!("{what} must be positive"));
        }
        Ok(v as u64)
    }

    fn rational(&mut self) -> ParseResult<Rational> {
        self.skip_ws();
        let start = self.pos;
        let whole = self.int()?;
        if self.src[self.pos..].starts_with('.') {
            self.pos += 1;
            let frac = self.digits()?;
            if frac.len() > 18 {
                return self.semantic(start, "too many decimal digits");
            }
            let den = 10i128.pow(frac.len() as u32);
            let f: i128 = frac.parse().expect("digits");
            let negative = self.src[start..].trim_start().starts_with('-');
            let mag = whole.abs() * den + f;
            return Ok(Rational::new(if negative { -mag } else { mag }, den));
        }
        if self.eat("/") {
            let at = self.pos;
            let den = self.int()?;
            if den == 0 {
                return self.semantic(at, "zero denominator");
            }
            return Ok(Rational::new(whole, den));
        }
        Ok(Rational::from_integer(whole))
    }

    fn comma(&mut self) -> ParseResult<()> {
        self.expect(",")
    }

    fn lift<T>(&self, at: usize, r: crate::Result<T>) -> ParseResult<T> {
        r.or_else(|e| self.semantic(at, e.to_string()))
    }

    fn set(&mut self) -> ParseResult<ParsedSet> {
        self.skip_ws();
        let at = self.pos;
        if self.eat("AP+(") || self.eat("AP-(") {
            let up = self.src[at..].trim_start().starts_with("AP+");
            let r = self.int()?;
            self.comma()?;
            let g = self.positive("modulus")?;
            self.comma()?;
            let n = self.int()?;
            self.expect(")")?;
            let s = if up {
                EPSet::ap_up(r, g, n)
            } else {
                EPSet::ap_down(r, g, n)
            };
            return self.lift(at, s).map(ParsedSet::Exact);
        }
        if self.eat("AP(") {
            let r = self.int()?;
            self.comma()?;
            let g = self.positive("modulus")?;
            self.expect(")")?;
            return self.lift(at, EPSet::ap(r, g)).map(ParsedSet::Exact);
        }
        if self.eat("U(") {
            let mut acc = self.exact_member()?;
            while self.eat(",") {
                let item_at = self.pos;
                let next = self.exact_member()?;
                acc = self.lift(item_at, acc.union(&next))?;
            }
            self.expect(")")?;
            return Ok(ParsedSet::Exact(acc));
        }
        if self.eat("bohr(") {
            return self.bohr(at).map(ParsedSet::Truncated);
        }
        if self.eat("sparse(") {
            return self.sparse(at).map(ParsedSet::Truncated);
        }
        if self.eat("{") {
            let mut elems = Vec::new();
            if !self.eat("}") {
                loop {
                    elems.push(self.int()?);
                    if self.eat("}") {
                        break;
                    }
                    self.comma()?;
                }
            }
            return self.lift(at, EPSet::finite(elems)).map(ParsedSet::Exact);
        }
        if self.eat("Z") {
            return Ok(ParsedSet::Exact(EPSet::integers()));
        }
        if self.eat("N") {
            return Ok(ParsedSet::Exact(EPSet::naturals()));
        }
        self.syntax("expected a set expression")
    }

    fn exact_member(&mut self) -> ParseResult<EPSet> {
        self.skip_ws();
        let at = self.pos;
        match self.set()? {
            ParsedSet::Exact(s) => Ok(s),
            ParsedSet::Truncated(_) => self.semantic(at, "truncated constructions cannot be united"),
        }
    }

    fn surd_core(&mut self, leading: Option<i128>) -> ParseResult<(i128, bool, u64, i128)> {
        let (p, negative_root) = match leading {
            Some(p) => {
                let negative = if self.eat("-") {
                    true
                } else {
                    self.expect("+")?;
                    false
                };
                (p, negative)
            }
            None => (0, false),
        };
        self.expect("sqrt(")?;
        let d = self.positive("radicand")?;
        self.expect(")")?;
        let mut p = p;
        if self.eat("+") {
            p += self.digits_value()?;
        } else if self.peek() == Some('-') {
            self.eat("-");
            p -= self.digits_value()?;
        }
        Ok((p, negative_root, d, 1))
    }

    fn digits_value(&mut self) -> ParseResult<i128> {
        let at = self.pos;
        let d = self.digits()?;
        d.parse::<i128>()
            .ok()
            .filter(|v| *v <= MAX_LITERAL)
            .map_or_else(|| self.semantic(at, "integer too large"), Ok)
    }

    fn alpha(&mut self, n: u64) -> ParseResult<Alpha> {
        self.skip_ws();
        let at = self.pos;
        let core = if self.eat("(") {
            let c = self.surd_after_open()?;
            self.expect(")")?;
            self.expect("/")?;
            let q = self.int()?;
            Some((c.0, c.1, c.2, q))
        } else if self.src[self.pos..].starts_with("sqrt(") {
            Some(self.surd_core(None)?)
        } else {
            let lead = self.int()?;
            if self.eat("/") {
                let k = self.int()?;
                if k <= 0 {
                    return self.semantic(at, "denominator must be positive");
                }
                if k <= 4 * n as i128 {
                    return self.semantic(
                        at,
                        format!("approximation denominator {k} does not exceed 4N"),
                    );
                }
                return Ok(Alpha::Rational(lead, k));
            }
            Some(self.surd_core(Some(lead))?)
        };
        let (p, neg, d, q) = core.expect("surd");
        let (Ok(p), Ok(q)) = (i64::try_from(p), i64::try_from(q)) else {
            return self.semantic(at, "surd coefficients out of range");
        };
        self.lift(at, QuadraticSurd::new(p, neg, d, q)).map(Alpha::Surd)
    }

    fn surd_after_open(&mut self) -> ParseResult<(i128, bool, u64, i128)> {
        if self.src[self.pos..].trim_start().starts_with("sqrt(") {
            self.surd_core(None)
        } else {
            let lead = self.int()?;
            self.surd_core(Some(lead))
        }
    }

    fn bohr(&mut self, at: usize) -> ParseResult<TruncatedSet> {
        // the horizon follows alpha, so parse alpha lazily
        let alpha_at = self.pos;
        let saved = self.pos;
        skip_argument(self)?;
        self.comma()?;
        let delta = self.rational()?;
        self.comma()?;
        let n = self.positive("horizon")?;
        self.expect(")")?;
        if n > crate::limits::window_cap() as u64 {
            return self.semantic(at, "horizon exceeds the window cap");
        }
        let end = self.pos;
        self.pos = saved;
        let alpha = self.alpha(n)?;
        if !self.eat(",") {
            return self.syntax("expected ','");
        }
        self.pos = end;
        let r = match alpha {
            Alpha::Surd(s) => constructions::bohr_truncation(&s, delta, n),
            Alpha::Rational(h, k) => constructions::bohr_truncation_rational(h, k, delta, n),
        };
        self.lift(alpha_at, r.map(|b| b.set))
    }

    fn sparse(&mut self, at: usize) -> ParseResult<TruncatedSet> {
        let xs = if self.eat("pow(") {
            let n_at = self.pos;
            let n = self.positive("block count")?;
            self.expect(")")?;
            if n > 12 {
                return self.semantic(n_at, "at most 12 power-tower blocks are supported");
            }
            self.lift(n_at, constructions::power_tower_starts(n as u32))?
        } else {
            self.expect("[")?;
            let mut xs = vec![self.rational()?];
            while self.eat(",") {
                xs.push(self.rational()?);
            }
            self.expect("]")?;
            xs
        };
        self.comma()?;
        let delta = self.rational()?;
        self.expect(")")?;
        if xs.iter().any(|x| *x > Rational::from_integer(MAX_LITERAL >> 8))
            || delta > Rational::from_integer(1 << 20)
        {
            return self.semantic(at, "sparse parameters out of range");
        }
        self.lift(at, constructions::sparse_interval_union(&xs, delta))
    }

    fn ops(&mut self) -> ParseResult<OpSequence> {
        let mut prefix = Vec::new();
        loop {
            match self.peek() {
                Some('(') => self.op_atom(&mut prefix)?,
                Some('c') => {
                    let at = self.pos;
                    self.expect("cyc[")?;
                    let mut cycle = Vec::new();
                    while self.peek() == Some('(') {
                        self.op_atom(&mut cycle)?;
                    }
                    self.expect("]")?;
                    self.finish()?;
                    return self.lift(at, OpSequence::cyclic(prefix, cycle));
                }
                None => return Ok(OpSequence::finite(prefix)),
                Some(c) => return self.syntax(format!("unexpected '{c}'")),
            }
        }
    }

    fn op_atom(&mut self, out: &mut Vec<LinearOp>) -> ParseResult<()> {
        let at = self.pos;
        self.expect("(")?;
        let a = self.int()?;
        self.comma()?;
        let b = self.int()?;
        self.expect(")")?;
        if a <= 0 || b <= 0 {
            return self.semantic(at, "operation entries must be positive");
        }
        if a > u32::MAX as i128 || b > u32::MAX as i128 {
            return self.semantic(at, "operation entries are too large");
        }
        let op = self.lift(at, LinearOp::new(a as u64, b as u64))?;
        let mut reps = 1;
        if self.eat("^") {
            let rep_at = self.pos;
            let k = self.int()?;
            if !(0..=1_000_000).contains(&k) {
                return self.semantic(rep_at, "repetition count must lie in 0..=1000000");
            }
            reps = k as usize;
        }
        if out.len() + reps > 1_000_000 {
            return self.semantic(at, "sequence longer than 1000000 operations");
        }
        out.extend(std::iter::repeat_n(op, reps));
        Ok(())
    }

    fn residue(&mut self) -> ParseResult<ResidueSet> {
        self.expect("mod")?;
        let at = self.pos;
        let g = self.positive("modulus")?;
        if g > crate::limits::window_cap() as u64 {
            return self.semantic(at, "modulus exceeds the window cap");
        }
        self.expect("{")?;
        let mut elems = Vec::new();
        if !self.eat("}") {
            loop {
                let e_at = self.pos;
                let e = self.int()?;
                if e < 0 || e >= g as i128 {
                    return self.semantic(e_at, format!("residue {e} is outside 0..{g}"));
                }
                elems.push(e as u64);
                if self.eat("}") {
                    break;
                }
                self.comma()?;
            }
        }
        self.lift(at, ResidueSet::new(g, elems))
    }
}

enum Alpha {
    Surd(QuadraticSurd),
    Rational(i128, i128),
}

/// Advances past one comma-separated argument, honouring nested brackets.
fn skip_argument(p: &mut Parser<'_>) -> ParseResult<()> {
    let mut depth = 0usize;
    let start = p.pos;
    for (i, c) in p.src[start..].char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' if depth == 0 => {
                p.pos = start + i;
                return p.syntax("expected ','");
            }
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                p.pos = start + i;
                return Ok(());
            }
            _ => {}
        }
    }
    p.pos = p.src.len();
    p.syntax("unexpected end of input")
}

pub fn parse_set(text: &str) -> ParseResult<ParsedSet> {
    let mut p = Parser::new(text);
    let s = p.set()?;
    p.finish()?;
    Ok(s)
}

/// Parses an expression that must denote an exact set.
pub fn parse_exact_set(text: &str) -> ParseResult<EPSet> {
    match parse_set(text)? {
        ParsedSet::Exact(s) => Ok(s),
        ParsedSet::Truncated(_) => Err(ParseError {
            kind: ParseErrorKind::Semantic,
            position: 0,
            message: "expected an exact set, found a truncated construction".into(),
        }),
    }
}

pub fn parse_ops(text: &str) -> ParseResult<OpSequence> {
    Parser::new(text).ops()
}

pub fn parse_residue_set(text: &str) -> ParseResult<ResidueSet> {
    let mut p = Parser::new(text);
    let u = p.residue()?;
    p.finish()?;
    Ok(u)
}

pub fn emit_finite(elems: &[i128]) -> String {
    let parts: Vec<String> = elems.iter().map(i128::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

/// Canonical text form. Classes whose members all lie in the set are
/// `AP(r,g)`; one-sided tails are `AP+(s,g,s)` / `AP-(s,g,s)` started as far
/// inward as the window allows; remaining members form one finite literal.
pub fn emit_set(s: &EPSet) -> String {
    if s.is_empty() {
        return "{}".into();
    }
    if s.is_integers() {
        return "Z".into();
    }
    if *s == EPSet::naturals() {
        return "N".into();
    }
    let g = s.period();
    let gi = g as i128;
    let (lo, hi) = (s.lo(), s.hi());
    let mut covered_from: Vec<Option<i128>> = vec![None; g as usize];
    let mut covered_to: Vec<Option<i128>> = vec![None; g as usize];
    let mut classes = Vec::new();
    for r in 0..g {
        let ri = r as usize;
        let up = s.pos_tail().get(ri);
        let down = s.neg_tail().get(ri);
        let mut start = None;
        if up {
            let mut x = crate::arith::next_in_class(hi + 1, r, g);
            while x - gi >= lo && s.contains(x - gi) {
                x -= gi;
            }
            start = Some(x);
        }
        let mut end = None;
        if down {
            let mut x = crate::arith::prev_in_class(lo - 1, r, g);
            while x + gi <= hi && s.contains(x + gi) {
                x += gi;
            }
            end = Some(x);
        }
        match (start, end) {
            (Some(a), Some(b)) if a <= b + gi => {
                classes.push(format!("AP({r},{g})"));
                covered_from[ri] = Some(i128::MIN);
            }
            _ => {
                if let Some(a) = start {
                    classes.push(format!("AP+({a},{g},{a})"));
                    covered_from[ri] = Some(a);
                }
                if let Some(b) = end {
                    classes.push(format!("AP-({b},{g},{b})"));
                    covered_to[ri] = Some(b);
                }
            }
        }
    }
    let finite: Vec<i128> = s
        .window()
        .ones()
        .map(|i| lo + i as i128)
        .filter(|&x| {
            let r = crate::arith::modulo(x, g) as usize;
            !(covered_from[r].is_some_and(|a| x >= a) || covered_to[r].is_some_and(|b| x <= b))
        })
        .collect();
    let mut parts = Vec::new();
    if !finite.is_empty() {
        parts.push(emit_finite(&finite));
    }
    parts.extend(classes);
    if parts.len() == 1 {
        parts.pop().expect("one part")
    } else {
        format!("U({})", parts.join(","))
    }
}

/// Run-length form `(a,b)^k...`, with the cyclic block as `cyc[...]`.
pub fn emit_ops(seq: &OpSequence) -> String {
    let mut out = emit_run(seq.prefix());
    if seq.is_cyclic() {
        out.push_str("cyc[");
        out.push_str(&emit_run(seq.cycle()));
        out.push(']');
    }
    out
}

fn emit_run(ops: &[LinearOp]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < ops.len() {
        let j = ops[i..].iter().take_while(|&&o| o == ops[i]).count();
        out.push_str(&ops[i].to_string());
        if j > 1 {
            out.push_str(&format!("^{j}"));
        }
        i += j;
    }
    out
}

pub fn emit_residue_set(u: &ResidueSet) -> String {
    let elems: Vec<String> = u.iter().map(|e| e.to_string()).collect();
    format!("mod {} {{{}}}", u.modulus(), elems.join(","))
}

/// `num/den` or an integer.
pub fn emit_rational(r: &Rational) -> String {
    if r.denom() == &1 || r.is_zero() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

//! Exact Minkowski sums.
//!
//! Each operand splits into a finite window `W`, an upward part
//! `P = b + Q + gN` (with `b = hi + 1`, `Q ⊂ [0, g)`) and a downward part
//! `N = a − (Q' + gN)` (with `a = lo − 1`). The nine pairwise sums are
//! finite sets, one-sided rays or full residue classes:
//!
//! * `W + W` is an explicit convolution;
//! * `W + P` is a family of upward rays with step `g_T`;
//! * `P + P` is a finite part plus upward rays with step `gcd(g_S, g_T)`,
//!   using that every multiple of the gcd at or beyond `lcm(g_S, g_T)` lies
//!   in `g_S N + g_T N` (the Frobenius number of `g_S/d, g_T/d` is below
//!   their product);
//! * `P + N` is a union of full classes modulo `gcd(g_S, g_T)`.
//!
//! The downward pieces are the reflections of the upward ones. All steps
//! divide `lcm(g_S, g_T)`, which is the assembly period.

use super::{canonicalize, EPSet, RawEpSet};
use crate::arith::{self, modulo};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::limits::check_window;

/// One side of an operand, seen as growing toward `+∞`.
struct Side {
    /// Offset of `window` bit 0.
    wlo: i128,
    window: Bits,
    /// First position of the tail.
    base: i128,
    /// Tail offsets `Q ⊂ [0, g)` relative to `base`.
    q: Bits,
    g: u64,
}

fn up_side(s: &EPSet) -> Side {
    let g = s.period;
    let base = s.hi + 1;
    Side {
        wlo: s.lo,
        window: s.window.clone(),
        base,
        q: Bits::from_fn(g as usize, |y| {
            s.pos_tail.get(modulo(base + y as i128, g) as usize)
        }),
        g,
    }
}

/// The downward side of `s`, reflected so that it grows toward `+∞`.
fn down_side(s: &EPSet) -> Side {
    let g = s.period;
    let a = s.lo - 1;
    let n = s.window.len();
    Side {
        wlo: -s.hi,
        window: Bits::from_fn(n, |i| s.window.get(n - 1 - i)),
        base: -a,
        q: Bits::from_fn(g as usize, |y| {
            s.neg_tail.get(modulo(a - y as i128, g) as usize)
        }),
        g,
    }
}

/// Convolution of two finite bit windows.
fn convolve(a: &Bits, b: &Bits) -> Result<Bits> {
    if a.none() || b.none() {
        return Ok(Bits::new(0));
    }
    let len = check_window((a.len() + b.len() - 1) as u128)?;
    let mut out = Bits::new(len);
    let (small, big) = if a.count_ones() <= b.count_ones() {
        (a, b)
    } else {
        (b, a)
    };
    for i in small.ones() {
        out.or_shifted(big, i);
    }
    Ok(out)
}

struct Assembly {
    g: u64,
    up: Vec<Option<i128>>,
    down: Vec<Option<i128>>,
    full: Bits,
    finite: Vec<(i128, Bits)>,
}

impl Assembly {
    fn new(g: u64) -> Self {
        Assembly {
            g,
            up: vec![None; g as usize],
            down: vec![None; g as usize],
            full: Bits::new(g as usize),
            finite: Vec::new(),
        }
    }

    /// `{start + step·m : m ≥ 0}` (or `m ≤ 0` when `mirrored`).
    fn ray(&mut self, start: i128, step: u64, mirrored: bool) {
        let (start, step) = if mirrored {
            (-start, -(step as i128))
        } else {
            (start, step as i128)
        };
        for j in 0..(self.g / step.unsigned_abs() as u64) {
            let x = start + step * j as i128;
            let r = modulo(x, self.g) as usize;
            if mirrored {
                self.down[r] = Some(self.down[r].map_or(x, |d| d.max(x)));
            } else {
                self.up[r] = Some(self.up[r].map_or(x, |u| u.min(x)));
            }
        }
    }

    fn full_classes(&mut self, residues: &Bits) {
        let d = residues.len() as u64;
        for r in 0..self.g {
            if residues.get((r % d) as usize) {
                self.full.set(r as usize, true);
            }
        }
    }

    fn finite(&mut self, offset: i128, bits: Bits, mirrored: bool) {
        if bits.none() {
            return;
        }
        if mirrored {
            let n = bits.len();
            let rev = Bits::from_fn(n, |i| bits.get(n - 1 - i));
            self.finite.push((-(offset + n as i128 - 1), rev));
        } else {
            self.finite.push((offset, bits));
        }
    }

    fn finish(self) -> Result<EPSet> {
        let g = self.g;
        let mut lo = i128::MAX;
        let mut hi = i128::MIN;
        for (off, bits) in &self.finite {
            lo = lo.min(*off);
            hi = hi.max(*off + bits.len() as i128 - 1);
        }
        for r in 0..g as usize {
            if self.full.get(r) {
                continue;
            }
            for x in [self.up[r], self.down[r]].into_iter().flatten() {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        if lo > hi {
            lo = 0;
            hi = -1;
        }
        let len = check_window((hi - lo + 1) as u128)?;
        let mut window = Bits::new(len);
        for (off, bits) in &self.finite {
            window.or_shifted(bits, (off - lo) as usize);
        }
        for o in 0..g.min(len as u64) {
            let first = lo + o as i128;
            let r = modulo(first, g) as usize;
            let full = self.full.get(r);
            let up = self.up[r];
            let down = self.down[r];
            if !full && up.is_none() && down.is_none() {
                continue;
            }
            let mut x = first;
            while x <= hi {
                if full || up.is_some_and(|u| x >= u) || down.is_some_and(|d| x <= d) {
                    window.set((x - lo) as usize, true);
                }
                x += g as i128;
            }
        }
        let tail = |side: &Vec<Option<i128>>| {
            Bits::from_fn(g as usize, |r| self.full.get(r) || side[r].is_some())
        };
        canonicalize(&RawEpSet {
            period: g,
            lo,
            hi,
            window,
            neg_tail: tail(&self.down),
            pos_tail: tail(&self.up),
        })
    }
}

/// Adds `W_S + P_T`, `P_S + W_T` and `P_S + P_T`.
fn upward(s: &Side, t: &Side, asm: &mut Assembly, mirrored: bool) -> Result<()> {
    for (w, p) in [(s, t), (t, s)] {
        if w.window.none() || p.q.none() {
            continue;
        }
        // w.window + Q, then one ray per residue class mod p.g from its minimum
        let f = convolve(&w.window, &p.q)?;
        let mut first: Vec<Option<usize>> = vec![None; p.g as usize];
        for i in f.ones() {
            let r = modulo(w.wlo + p.base + i as i128, p.g) as usize;
            if first[r].is_none() {
                first[r] = Some(i);
            }
        }
        for i in first.into_iter().flatten() {
            asm.ray(w.wlo + p.base + i as i128, p.g, mirrored);
        }
    }

    if s.q.none() || t.q.none() {
        return Ok(());
    }
    let d = arith::gcd(s.g, t.g);
    let bound = arith::lcm(s.g, t.g).ok_or(Error::Overflow("tail saturation bound"))?;
    let blen = check_window(bound as u128)?;
    // g_S N + g_T N below the saturation bound
    let mut semigroup = Bits::new(blen);
    semigroup.set(0, true);
    for i in 0..blen {
        if semigroup.get(i) {
            for step in [s.g as usize, t.g as usize] {
                if i + step < blen {
                    semigroup.set(i + step, true);
                }
            }
        }
    }
    let qq = convolve(&s.q, &t.q)?;
    let base = s.base + t.base;
    asm.finite(base, convolve(&qq, &semigroup)?, mirrored);
    let mut first: Vec<Option<usize>> = vec![None; d as usize];
    for i in qq.ones() {
        let r = (i as u64 % d) as usize;
        if first[r].is_none() {
            first[r] = Some(i);
        }
    }
    for i in first.into_iter().flatten() {
        asm.ray(base + i as i128 + bound as i128, d, mirrored);
    }
    Ok(())
}

/// Adds the full classes of `P_S + N_T`, where `t_down` is the reflected
/// downward side of `T`.
fn cross(s_up: &Side, t_down: &Side, asm: &mut Assembly) {
    if s_up.q.none() || t_down.q.none() {
        return;
    }
    let d = arith::gcd(s_up.g, t_down.g);
    // P_S mod d and N_T mod d; t_down elements are negatives of N_T
    let a = Bits::from_fn(d as usize, |r| {
        s_up.q
            .ones()
            .any(|y| modulo(s_up.base + y as i128, d) == r as u64)
    });
    let b = Bits::from_fn(d as usize, |r| {
        t_down
            .q
            .ones()
            .any(|y| modulo(-(t_down.base + y as i128), d) == r as u64)
    });
    asm.full_classes(&a.cyclic_sum(&b));
}

pub(super) fn minkowski_sum(s: &EPSet, t: &EPSet) -> Result<EPSet> {
    if s.is_empty() || t.is_empty() {
        return Ok(EPSet::empty());
    }
    let g = arith::lcm(s.period, t.period).ok_or(Error::Overflow("sum period"))?;
    check_window(g as u128)?;
    let mut asm = Assembly::new(g);

    let ww = convolve(&s.window, &t.window)?;
    asm.finite(s.lo + t.lo, ww, false);

    let (su, tu) = (up_side(s), up_side(t));
    let (sd, td) = (down_side(s), down_side(t));
    upward(&su, &tu, &mut asm, false)?;
    upward(&sd, &td, &mut asm, true)?;
    cross(&su, &td, &mut asm);
    cross(&tu, &sd, &mut asm);
    asm.finish()
}

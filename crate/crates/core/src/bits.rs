//! Fixed-length bit vectors used for windows, tail residue sets and residue
//! subsets of `Z/gZ`.

use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Bits {
            words: vec![!0; len.div_ceil(WORD)],
            len,
        };
        b.clear_tail();
        b
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, it: I) -> Self {
        let mut b = Bits::new(len);
        for i in it {
            b.set(i, true);
        }
        b
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut b = Bits::new(len);
        for i in 0..len {
            if f(i) {
                b.words[i / WORD] |= 1 << (i % WORD);
            }
        }
        b
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i % WORD);
        if v {
            self.words[i / WORD] |= m;
        } else {
            self.words[i / WORD] &= !m;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn none(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn all(&self) -> bool {
        self.count_ones() == self.len
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn last_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + (WORD - 1 - w.leading_zeros() as usize))
    }

    pub fn ones(&self) -> Ones<'_> {
        Ones {
            bits: self,
            word: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn or_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// ORs `src` into `self` starting at bit `offset`; bits falling past the
    /// end of `self` are dropped.
    pub fn or_shifted(&mut self, src: &Bits, offset: usize) {
        if offset >= self.len {
            return;
        }
        let ws = offset / WORD;
        let bs = offset % WORD;
        for (i, &w) in src.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let t = ws + i;
            if t >= self.words.len() {
                break;
            }
            self.words[t] |= w << bs;
            if bs != 0 && t + 1 < self.words.len() {
                self.words[t + 1] |= w >> (WORD - bs);
            }
        }
        self.clear_tail();
    }

    /// Cyclic rotation: bit `i` moves to `(i + k) mod len`.
    pub fn rotate(&self, k: usize) -> Bits {
        let n = self.len;
        if n == 0 {
            return self.clone();
        }
        let k = k % n;
        if k == 0 {
            return self.clone();
        }
        if n <= WORD {
            let w = self.words[0];
            let mask = if n == WORD { !0 } else { (1u64 << n) - 1 };
            let r = ((w << k) | (w >> (n - k))) & mask;
            return Bits { words: vec![r], len: n };
        }
        let mut out = Bits::new(n);
        for i in self.ones() {
            out.set((i + k) % n, true);
        }
        out
    }

    /// Sumset of two subsets of `Z/len`: `{x + y mod len}`.
    pub fn cyclic_sum(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.len, other.len);
        let mut out = Bits::new(self.len);
        let (small, big) = if self.count_ones() <= other.count_ones() {
            (self, other)
        } else {
            (other, self)
        };
        for i in small.ones() {
            out.or_assign(&big.rotate(i));
            if out.all() {
                break;
            }
        }
        out
    }

    fn clear_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub struct Ones<'a> {
    bits: &'a Bits,
    word: usize,
    cur: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let tz = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.word * WORD + tz);
            }
            self.word += 1;
            if self.word >= self.bits.words.len() {
                return None;
            }
            self.cur = self.bits.words[self.word];
        }
    }
}

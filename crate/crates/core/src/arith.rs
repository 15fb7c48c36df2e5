//! Small number-theoretic helpers shared across modules.

use num_integer::Integer;

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// `None` on overflow.
pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Residue of `x` modulo `m` in `0..m`.
#[inline]
pub fn modulo(x: i128, m: u64) -> u64 {
    x.rem_euclid(m as i128) as u64
}

/// Divisors of `n` in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Prime factorisation as `(p, e)` pairs, increasing `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn totient(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Multiplicative order of `x` modulo `m`; `None` unless `gcd(x, m) = 1`.
pub fn multiplicative_order(x: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(1);
    }
    if gcd(x % m, m) != 1 {
        return None;
    }
    let x = x % m;
    let mut acc = x;
    let mut k = 1;
    while acc != 1 {
        acc = ((acc as u128 * x as u128) % m as u128) as u64;
        k += 1;
    }
    Some(k)
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut b = (base % m) as u128;
    let mut acc: u128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m as u128;
        }
        b = b * b % m as u128;
        exp >>= 1;
    }
    acc as u64
}

/// Smallest `x >= from` with `x ≡ r (mod m)`.
#[inline]
pub fn next_in_class(from: i128, r: u64, m: u64) -> i128 {
    let d = (r as i128 - from).rem_euclid(m as i128);
    from + d
}

/// Largest `x <= from` with `x ≡ r (mod m)`.
#[inline]
pub fn prev_in_class(from: i128, r: u64, m: u64) -> i128 {
    let d = (from - r as i128).rem_euclid(m as i128);
    from - d
}

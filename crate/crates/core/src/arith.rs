//! Small number-theoretic helpers shared across modules.

use num_integer::Integer;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// Inverse of `a` modulo `n`, if `gcd(a, n) = 1`.
pub fn mod_inverse(a: i64, n: u64) -> Option<u64> {
    let n = n as i128;
    let a = (a as i128).rem_euclid(n);
    let ext = a.extended_gcd(&n);
    if ext.gcd != 1 {
        return None;
    }
    Some(ext.x.rem_euclid(n) as u64)
}

pub fn reduce(x: i64, n: u64) -> u64 {
    (x as i128).rem_euclid(n as i128) as u64
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `⌈n²/2⌉`.
pub fn half_square_ceil(n: u64) -> u64 {
    (n * n).div_ceil(2)
}

//! Number-theoretic transform over `Z/998244353Z`, used for exact
//! convolution of 0/1 indicator vectors. Every coefficient of such a
//! convolution is at most the vector length, far below the prime, so
//! results are exact integers.

const P: u64 = 998_244_353;
const G: u64 = 3;
/// `P − 1 = 119 · 2^23`.
pub const MAX_LOG_LEN: u32 = 23;

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    b %= P;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % P;
        }
        b = b * b % P;
        e >>= 1;
    }
    acc
}

fn transform(a: &mut [u64], invert: bool) {
    let n = a.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w = pow_mod(G, (P - 1) / len as u64);
        if invert {
            w = pow_mod(w, P - 2);
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut t = 1u64;
        for _ in 0..half {
            twiddles.push(t);
            t = t * w % P;
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for k in 0..half {
                let u = lo[k];
                let v = hi[k] * twiddles[k] % P;
                lo[k] = if u + v >= P { u + v - P } else { u + v };
                hi[k] = if u >= v { u - v } else { u + P - v };
            }
        }
        len <<= 1;
    }
    if invert {
        let inv_n = pow_mod(n as u64, P - 2);
        for x in a.iter_mut() {
            *x = *x * inv_n % P;
        }
    }
}

/// Whether a linear convolution of two length-`n` vectors fits the transform.
pub fn supports(n: usize) -> bool {
    (2 * n).next_power_of_two() <= 1 << MAX_LOG_LEN
}

/// Cyclic convolution of two length-`n` vectors, `out[s] = Σ_{i+j ≡ s} a[i]b[j]`.
/// Inputs must be small nonnegative integers whose true convolution stays
/// below `P`.
pub fn cyclic_convolution(a: &[u64], b: &[u64]) -> Vec<u64> {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let size = (2 * n).next_power_of_two().max(2);
    let mut fa = vec![0u64; size];
    fa[..n].copy_from_slice(a);
    transform(&mut fa, false);
    let same = std::ptr::eq(a, b);
    let fb = if same {
        None
    } else {
        let mut fb = vec![0u64; size];
        fb[..n].copy_from_slice(b);
        transform(&mut fb, false);
        Some(fb)
    };
    match &fb {
        Some(fb) => fa.iter_mut().zip(fb).for_each(|(x, y)| *x = *x * y % P),
        None => fa.iter_mut().for_each(|x| *x = *x * *x % P),
    }
    transform(&mut fa, true);
    let mut out = vec![0u64; n];
    for (i, v) in fa.into_iter().enumerate().take(2 * n) {
        if v != 0 {
            out[i % n] += v;
        }
    }
    out
}

//! Word-sized prime field helpers.

#[inline]
pub fn add(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, a, p);
        }
        a = mul(a, a, p);
        e >>= 1;
    }
    acc
}

/// Inverse by Fermat; `a` must be non-zero mod the prime `p`.
pub fn inv(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow(a, p - 2, p)
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest-generated element of multiplicative order exactly `n` in
/// `F_p^×`; requires `n | p - 1`.
pub fn element_of_order(n: u64, p: u64) -> u64 {
    assert!((p - 1).is_multiple_of(n));
    if n == 1 {
        return 1;
    }
    let qs = prime_factors(n);
    (2..p)
        .map(|g| pow(g, (p - 1) / n, p))
        .find(|&h| qs.iter().all(|&q| pow(h, n / q, p) != 1))
        .expect("cyclic group has elements of every order dividing p - 1")
}

/// Primes `ℓ ≡ 1 (mod n)` strictly above `above`, ascending.
pub fn primes_one_mod(n: u64, above: u64) -> impl Iterator<Item = u64> {
    let r = (above + 1) % n;
    let first = above + 1 + (n + 1 - r) % n;
    (0..).map(move |i| first + i * n).filter(|&c| is_prime(c))
}

/// Smallest prime above `2^30` that is `1 mod 3`.
pub fn default_prime() -> u64 {
    primes_one_mod(3, 1 << 30).next().unwrap()
}

/// Deterministic re-sample: the `seed`-th prime `≡ 1 (mod 3)` above `2^30`
/// (seed 0 gives the default).
pub fn prime_from_seed(seed: u64) -> u64 {
    primes_one_mod(3, 1 << 30).nth((seed % 64) as usize).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
    }

    #[test]
    fn default_prime_is_smallest_candidate() {
        let p = default_prime();
        assert!(p > 1 << 30 && p % 3 == 1 && is_prime(p));
        assert!(((1u64 << 30) + 1..p).all(|c| c % 3 != 1 || !is_prime(c)));
        assert_eq!(prime_from_seed(0), p);
        assert!(prime_from_seed(1) > p);
    }

    #[test]
    fn roots_have_exact_order() {
        let p = default_prime();
        let w = element_of_order(3, p);
        assert_eq!(pow(w, 3, p), 1);
        assert_ne!(w, 1);
        let z = element_of_order(21, 43);
        assert_eq!(pow(z, 21, 43), 1);
        assert!((1..21).all(|k| pow(z, k, 43) != 1));
    }
}

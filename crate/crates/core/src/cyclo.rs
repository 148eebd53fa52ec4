//! Exact arithmetic in cyclotomic fields `Q(ζ_n)`.
//!
//! An element is stored as its residue modulo the `n`-th cyclotomic
//! polynomial, i.e. a vector of `φ(n)` reduced rationals. The residue is
//! unique, so structural equality is field equality.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::modp;

/// Euler's totient.
pub fn euler_phi(n: u32) -> u32 {
    let mut n = n;
    let mut result = n;
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            while n.is_multiple_of(f) {
                n /= f;
            }
            result -= result / f;
        }
        f += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn phi_cache() -> &'static RwLock<HashMap<u32, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The `n`-th cyclotomic polynomial as integer coefficients, lowest degree
/// first. Computed as `(x^n - 1) / ∏_{d | n, d < n} Φ_d(x)`.
pub fn cyclotomic_poly(n: u32) -> Arc<Vec<i64>> {
    assert!(n >= 1, "cyclotomic polynomial needs n >= 1");
    if let Some(p) = phi_cache().read().unwrap().get(&n) {
        return p.clone();
    }
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let den = cyclotomic_poly(d);
        num = exact_div_monic(&num, &den);
    }
    let arc = Arc::new(num);
    phi_cache().write().unwrap().insert(n, arc.clone());
    arc
}

fn exact_div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let qlen = num.len() - dn;
    let mut q = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dn];
        q[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    q
}

/// Element of `Q(ζ_n)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycNumber {
    n: u32,
    coeffs: Vec<BigRational>,
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl CycNumber {
    pub fn zero(n: u32) -> Self {
        CycNumber { n, coeffs: vec![BigRational::zero(); euler_phi(n) as usize] }
    }

    pub fn one(n: u32) -> Self {
        Self::from_integer(n, 1)
    }

    pub fn from_integer(n: u32, v: i64) -> Self {
        Self::from_rational(n, rat(v))
    }

    pub fn from_rational(n: u32, v: BigRational) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[0] = v;
        z
    }

    /// The primitive root `ζ_n = exp(2πi/n)`.
    pub fn zeta(n: u32) -> Self {
        Self::zeta_pow(n, 1)
    }

    /// `ζ_n^k` for any integer `k`.
    pub fn zeta_pow(n: u32, k: i64) -> Self {
        let k = k.rem_euclid(n as i64) as usize;
        let mut poly = vec![BigRational::zero(); k + 1];
        poly[k] = BigRational::one();
        Self::from_poly(n, poly)
    }

    /// Reduces an arbitrary polynomial in `ζ_n` (lowest degree first).
    pub fn from_poly(n: u32, mut poly: Vec<BigRational>) -> Self {
        reduce_mod_phi(n, &mut poly);
        CycNumber { n, coeffs: poly }
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// Returns the rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(Error::ConductorMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(&other.inverse()?))
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        CycNumber { n: self.n, coeffs }
    }

    fn sub_unchecked(&self, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        CycNumber { n: self.n, coeffs }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        if self.n == 3 {
            // (a + bω)(c + dω) with ω² = -1 - ω
            let (a, b) = (&self.coeffs[0], &self.coeffs[1]);
            let (c, d) = (&other.coeffs[0], &other.coeffs[1]);
            let bd = b * d;
            return CycNumber { n: 3, coeffs: vec![a * c - &bd, a * d + b * c - bd] };
        }
        let k = self.coeffs.len();
        if k == 1 {
            return CycNumber { n: self.n, coeffs: vec![&self.coeffs[0] * &other.coeffs[0]] };
        }
        // integer numerators over a common denominator keep gcds out of the
        // inner loop
        let (a, da) = integer_parts(&self.coeffs);
        let (b, db) = integer_parts(&other.coeffs);
        let mut poly = vec![BigInt::zero(); 2 * k - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    poly[i + j] += x * y;
                }
            }
        }
        reduce_int_mod_phi(self.n, &mut poly);
        let den = da * db;
        let coeffs = poly.into_iter().map(|c| if den.is_one() { BigRational::from_integer(c) } else { BigRational::new(c, den.clone()) }).collect();
        CycNumber { n: self.n, coeffs }
    }

    /// Product with `ζ_n^k`.
    pub fn mul_zeta_pow(&self, k: i64) -> Self {
        let k = k.rem_euclid(self.n as i64) as usize;
        if k == 0 || self.is_zero() {
            return self.clone();
        }
        let mut poly = vec![BigRational::zero(); k + self.coeffs.len()];
        for (i, c) in self.coeffs.iter().enumerate() {
            poly[i + k] = c.clone();
        }
        Self::from_poly(self.n, poly)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        CycNumber { n: self.n, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// `Φ_n`.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self.coeffs.len() {
            1 => Ok(CycNumber { n: self.n, coeffs: vec![self.coeffs[0].recip()] }),
            2 if self.n == 3 => {
                // (a + bω)^{-1} = (a - b - bω) / (a² - ab + b²)
                let (a, b) = (&self.coeffs[0], &self.coeffs[1]);
                let norm = a * a - a * b + b * b;
                let inv = norm.recip();
                Ok(CycNumber { n: 3, coeffs: vec![(a - b) * &inv, -(b * &inv)] })
            }
            _ => {
                let modulus: Vec<BigRational> =
                    cyclotomic_poly(self.n).iter().map(|&c| rat(c)).collect();
                let s = poly_inverse_mod(&self.coeffs, &modulus);
                Ok(Self::from_poly(self.n, s))
            }
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// Image under `ζ_n ↦ ζ_m^{m/n}`. Requires `n | m`.
    pub fn embed(&self, m: u32) -> Result<Self> {
        if !m.is_multiple_of(self.n) {
            return Err(Error::NotDivisible { from: self.n, to: m });
        }
        if m == self.n {
            return Ok(self.clone());
        }
        let step = (m / self.n) as usize;
        let mut poly = vec![BigRational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            poly[i * step] = c.clone();
        }
        Ok(Self::from_poly(m, poly))
    }

    /// Equality after embedding both sides into their common cyclotomic field.
    pub fn eq_embedded(&self, other: &Self) -> bool {
        if self.n == other.n {
            return self == other;
        }
        let l = self.n.lcm(&other.n);
        self.embed(l).unwrap() == other.embed(l).unwrap()
    }
}

fn reduce_mod_phi(n: u32, poly: &mut Vec<BigRational>) {
    let phi = cyclotomic_poly(n);
    let deg = phi.len() - 1;
    if poly.len() > deg {
        for i in (deg..poly.len()).rev() {
            if poly[i].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut poly[i], BigRational::zero());
            for (j, &pj) in phi.iter().take(deg).enumerate() {
                match pj {
                    0 => {}
                    1 => poly[i - deg + j] -= &c,
                    -1 => poly[i - deg + j] += &c,
                    _ => poly[i - deg + j] -= &c * rat(pj),
                }
            }
        }
    }
    poly.resize(deg, BigRational::zero());
}

fn reduce_int_mod_phi(n: u32, poly: &mut Vec<BigInt>) {
    let phi = cyclotomic_poly(n);
    let deg = phi.len() - 1;
    if poly.len() > deg {
        for i in (deg..poly.len()).rev() {
            if poly[i].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut poly[i]);
            for (j, &pj) in phi.iter().take(deg).enumerate() {
                match pj {
                    0 => {}
                    1 => poly[i - deg + j] -= &c,
                    -1 => poly[i - deg + j] += &c,
                    _ => poly[i - deg + j] -= &c * pj,
                }
            }
        }
    }
    poly.resize(deg, BigInt::zero());
}

/// Numerators over the least common denominator.
fn integer_parts(coeffs: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let den = coeffs.iter().fold(BigInt::one(), |acc, c| if c.denom().is_one() { acc } else { acc.lcm(c.denom()) });
    let nums = coeffs
        .iter()
        .map(|c| if den.is_one() { c.numer().clone() } else { c.numer() * (&den / c.denom()) })
        .collect();
    (nums, den)
}

fn trim(p: &mut Vec<BigRational>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_sub_scaled_shift(a: &mut Vec<BigRational>, b: &[BigRational], c: &BigRational, shift: usize) {
    if a.len() < b.len() + shift {
        a.resize(b.len() + shift, BigRational::zero());
    }
    for (i, bi) in b.iter().enumerate() {
        if !bi.is_zero() {
            a[i + shift] -= c * bi;
        }
    }
}

fn poly_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (vec![BigRational::zero()], r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / &lead;
        if !c.is_zero() {
            poly_sub_scaled_shift(&mut r, b, &c, i);
        }
        q[i] = c;
    }
    r.truncate(db.max(1));
    trim(&mut r);
    (q, r)
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Inverse of `a` modulo the irreducible `m`.
fn poly_inverse_mod(a: &[BigRational], m: &[BigRational]) -> Vec<BigRational> {
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    trim(&mut r1);
    let mut s0 = vec![BigRational::zero()];
    let mut s1 = vec![BigRational::one()];
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = poly_divrem(&r0, &r1);
        let qs = poly_mul(&q, &s1);
        let mut s2 = s0.clone();
        if s2.len() < qs.len() {
            s2.resize(qs.len(), BigRational::zero());
        }
        for (i, v) in qs.iter().enumerate() {
            s2[i] -= v;
        }
        trim(&mut s2);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
    }
    // r0 is a non-zero constant gcd
    let inv = r0[0].recip();
    s0.iter().map(|c| c * &inv).collect()
}

impl Add for &CycNumber {
    type Output = CycNumber;
    fn add(self, rhs: &CycNumber) -> CycNumber {
        self.try_add(rhs).expect("cyclotomic add")
    }
}

impl Sub for &CycNumber {
    type Output = CycNumber;
    fn sub(self, rhs: &CycNumber) -> CycNumber {
        self.try_sub(rhs).expect("cyclotomic sub")
    }
}

impl Mul for &CycNumber {
    type Output = CycNumber;
    fn mul(self, rhs: &CycNumber) -> CycNumber {
        self.try_mul(rhs).expect("cyclotomic mul")
    }
}

impl Neg for &CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        CycNumber { n: self.n, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = if self.n == 3 { "w".to_string() } else { format!("z{}", self.n) };
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let mono = match i {
                0 => String::new(),
                1 => var.clone(),
                _ => format!("{var}^{i}"),
            };
            if mono.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{abs}*{mono}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNumber[{}]({})", self.n, self)
    }
}

/// Ring map `Q(ζ_n) → F_ℓ` sending `ζ_n` to an element of multiplicative
/// order `n`. Defined on elements whose denominators are prime to `ℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularImage {
    pub conductor: u32,
    pub prime: u64,
    pub root: u64,
}

impl ModularImage {
    pub fn new(conductor: u32, prime: u64) -> Result<Self> {
        if !modp::is_prime(prime) {
            return Err(Error::InvalidModulus(prime, "not prime".into()));
        }
        if !(prime - 1).is_multiple_of(conductor as u64) {
            return Err(Error::InvalidModulus(prime, format!("not 1 mod {conductor}")));
        }
        let root = modp::element_of_order(conductor as u64, prime);
        Ok(ModularImage { conductor, prime, root })
    }

    fn rational(&self, r: &BigRational) -> Result<u64> {
        let p = BigInt::from(self.prime);
        let num = r.numer().mod_floor(&p).to_u64().unwrap();
        let den = r.denom().mod_floor(&p).to_u64().unwrap();
        if den == 0 {
            return Err(Error::BadPrime(self.prime));
        }
        Ok(modp::mul(num, modp::inv(den, self.prime), self.prime))
    }

    pub fn image(&self, a: &CycNumber) -> Result<u64> {
        if a.conductor() != self.conductor {
            return Err(Error::ConductorMismatch(a.conductor(), self.conductor));
        }
        let mut acc = 0u64;
        for c in a.coeffs().iter().rev() {
            acc = modp::add(modp::mul(acc, self.root, self.prime), self.rational(c)?, self.prime);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> CycNumber {
        CycNumber::zeta(3)
    }

    #[test]
    fn small_cyclotomic_polys() {
        assert_eq!(*cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_poly(3), vec![1, 1, 1]);
        assert_eq!(*cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(21).len(), 13);
    }

    #[test]
    fn divisor_product_recovers_x_pow_n_minus_one() {
        for n in [1u32, 6, 12, 21, 39] {
            let mut prod = vec![1i64];
            for d in divisors(n) {
                let f = cyclotomic_poly(d);
                let mut out = vec![0i64; prod.len() + f.len() - 1];
                for (i, a) in prod.iter().enumerate() {
                    for (j, b) in f.iter().enumerate() {
                        out[i + j] += a * b;
                    }
                }
                prod = out;
            }
            let mut expect = vec![0i64; n as usize + 1];
            expect[0] = -1;
            expect[n as usize] = 1;
            assert_eq!(prod, expect, "n = {n}");
        }
    }

    #[test]
    fn omega_identities() {
        let w = w();
        let w2 = &w * &w;
        assert!((&w * &w2).is_one());
        let s = &(&CycNumber::one(3) + &w) + &w2;
        assert!(s.is_zero());
        let one_plus_w = &CycNumber::one(3) + &w;
        assert_eq!(one_plus_w.inverse().unwrap(), -&w);
    }

    #[test]
    fn zeta_has_exact_order() {
        for n in [1u32, 2, 3, 7, 21, 39] {
            let z = CycNumber::zeta(n);
            assert!(z.pow(n as u64).is_one());
            for k in 1..n {
                assert!(!z.pow(k as u64).is_one(), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn generic_inverse_matches_fast_path() {
        let a = CycNumber::from_poly(21, vec![rat(2), rat(-1), rat(0), rat(3)]);
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).is_one());
    }

    #[test]
    fn errors_are_explicit() {
        assert_eq!(CycNumber::zero(3).inverse(), Err(Error::DivisionByZero));
        assert!(matches!(
            CycNumber::one(3).try_add(&CycNumber::one(7)),
            Err(Error::ConductorMismatch(3, 7))
        ));
        assert!(matches!(w().embed(7), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn embed_omega_into_21() {
        assert_eq!(w().embed(21).unwrap(), CycNumber::zeta_pow(21, 7));
        assert_eq!(CycNumber::from_integer(1, 5).embed(39).unwrap(), CycNumber::from_integer(39, 5));
    }

    #[test]
    fn display_is_readable() {
        let a = &CycNumber::from_integer(3, 2) - &w();
        assert_eq!(a.to_string(), "2 - w");
        assert_eq!(CycNumber::zero(3).to_string(), "0");
    }

    #[test]
    fn modular_image_is_a_ring_map() {
        let m = ModularImage::new(3, 1_000_000_007).err();
        assert!(m.is_some());
        let ell = modp::default_prime();
        let img = ModularImage::new(3, ell).unwrap();
        let a = &CycNumber::from_integer(3, 4) + &w();
        let b = &CycNumber::from_integer(3, -7) + &(&w() * &w());
        let prod = img.image(&(&a * &b)).unwrap();
        assert_eq!(prod, modp::mul(img.image(&a).unwrap(), img.image(&b).unwrap(), ell));
        let half = CycNumber::from_rational(3, BigRational::new(1.into(), 2.into()));
        assert_eq!(modp::mul(img.image(&half).unwrap(), 2, ell), 1);
    }
}

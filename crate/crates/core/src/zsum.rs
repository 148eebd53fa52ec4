//! Zero-sum sequences over `Z_p`.
//!
//! A sequence is an unordered multiset, stored as a multiplicity vector.
//! The set of partial sums `Σ(S)` ranges over *all* sub-multisets including
//! the empty one, so `0 ∈ Σ(S)` always. Lemma-style lower bounds on `|Σ(S)|`
//! in this module are stated for that convention.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Enumerations over sub-multisets refuse sequences longer than this.
pub const ENUMERATION_GUARD: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZSequence {
    p: u32,
    mult: Vec<u32>,
}

impl ZSequence {
    pub fn new(p: u32, elements: &[i64]) -> Self {
        let mut mult = vec![0; p as usize];
        for &e in elements {
            mult[e.rem_euclid(p as i64) as usize] += 1;
        }
        ZSequence { p, mult }
    }

    pub fn from_multiplicities(p: u32, mult: Vec<u32>) -> Self {
        assert_eq!(mult.len(), p as usize);
        ZSequence { p, mult }
    }

    /// Parses comma-separated residues such as `1,1,3,5`.
    pub fn parse(p: u32, s: &str) -> Result<Self> {
        let mut elems = Vec::new();
        let mut offset = 0;
        if s.trim().is_empty() {
            return Ok(Self::new(p, &[]));
        }
        for part in s.split(',') {
            let t = part.trim();
            let v = i64::from_str(t).map_err(|_| Error::Parse {
                pos: offset + (part.len() - part.trim_start().len()),
                msg: format!("expected integer residue, got {t:?}"),
            })?;
            elems.push(v);
            offset += part.len() + 1;
        }
        Ok(Self::new(p, &elems))
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    pub fn len(&self) -> usize {
        self.mult.iter().map(|&m| m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Elements in ascending order with repetition.
    pub fn elements(&self) -> Vec<u32> {
        (0..self.p).flat_map(|a| std::iter::repeat_n(a, self.mult[a as usize] as usize)).collect()
    }

    pub fn sum(&self) -> u32 {
        let p = self.p as u64;
        (self.mult.iter().enumerate().map(|(a, &m)| a as u64 * m as u64 % p).sum::<u64>() % p) as u32
    }

    /// Maximal multiplicity `h(S)`.
    pub fn height(&self) -> u32 {
        self.mult.iter().copied().max().unwrap_or(0)
    }

    pub fn support(&self) -> Vec<u32> {
        (0..self.p).filter(|&a| self.mult[a as usize] > 0).collect()
    }

    /// Multiplicities `ν_1 ≥ ν_2 ≥ ...` of the distinct elements.
    pub fn sorted_multiplicities(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.mult.iter().copied().filter(|&m| m > 0).collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    pub fn concat(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        ZSequence { p: self.p, mult: self.mult.iter().zip(&other.mult).map(|(a, b)| a + b).collect() }
    }

    pub fn minus(&self, sub: &Self) -> Self {
        ZSequence { p: self.p, mult: self.mult.iter().zip(&sub.mult).map(|(a, b)| a - b).collect() }
    }

    fn guard(&self) -> Result<()> {
        if self.len() > ENUMERATION_GUARD {
            Err(Error::TooLong(self.len(), ENUMERATION_GUARD))
        } else {
            Ok(())
        }
    }

    /// Visits every sub-multiset (as a multiplicity vector) including the
    /// empty one and the whole sequence.
    fn for_each_submultiset(&self, mut f: impl FnMut(&[u32]) -> bool) {
        let support = self.support();
        let mut cur = vec![0u32; self.p as usize];
        loop {
            if !f(&cur) {
                return;
            }
            let mut k = 0;
            loop {
                if k == support.len() {
                    return;
                }
                let a = support[k] as usize;
                if cur[a] < self.mult[a] {
                    cur[a] += 1;
                    break;
                }
                cur[a] = 0;
                k += 1;
            }
        }
    }
}

impl fmt::Display for ZSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.elements().iter().map(u32::to_string).collect();
        write!(f, "({})", e.join(","))
    }
}

fn sub_sum(p: u32, sub: &[u32]) -> u32 {
    let p64 = p as u64;
    (sub.iter().enumerate().map(|(a, &m)| a as u64 * m as u64 % p64).sum::<u64>() % p64) as u32
}

/// Subset-sum indicator over `Z_p`, including the empty sum.
fn subset_sums(s: &ZSequence) -> Vec<bool> {
    let p = s.p as usize;
    let mut reach = vec![false; p];
    reach[0] = true;
    for a in 0..p {
        for _ in 0..s.mult[a] {
            let prev = reach.clone();
            for (x, &r) in prev.iter().enumerate() {
                if r {
                    reach[(x + a) % p] = true;
                }
            }
        }
    }
    reach
}

/// `Σ(S)`, sorted.
pub fn sigma(s: &ZSequence) -> Vec<u32> {
    subset_sums(s).iter().enumerate().filter(|(_, &r)| r).map(|(x, _)| x as u32).collect()
}

/// Sums of *non-empty* sub-multisets.
fn nonempty_sums(s: &ZSequence) -> Vec<bool> {
    let p = s.p as usize;
    let mut reach = vec![false; p];
    for a in 0..p {
        for _ in 0..s.mult[a] {
            let prev = reach.clone();
            reach[a % p] = true;
            for (x, &r) in prev.iter().enumerate() {
                if r {
                    reach[(x + a) % p] = true;
                }
            }
        }
    }
    reach
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub zero_sum: bool,
    pub zero_sum_free: bool,
    pub irreducible_zero_sum: bool,
    pub height: u32,
}

/// Classifies `s`. An irreducible zero-sum sequence is non-empty and has no
/// proper non-empty zero-sum sub-multiset.
pub fn classify(s: &ZSequence) -> Result<Classification> {
    s.guard()?;
    let zero_sum = s.sum() == 0;
    let zero_sum_free = !nonempty_sums(s)[0];
    let irreducible_zero_sum = zero_sum && !s.is_empty() && {
        let total = s.len();
        let mut ok = true;
        s.for_each_submultiset(|sub| {
            let len: u32 = sub.iter().sum();
            if len > 0 && (len as usize) < total && sub_sum(s.p, sub) == 0 {
                ok = false;
            }
            ok
        });
        ok
    };
    Ok(Classification { zero_sum, zero_sum_free, irreducible_zero_sum, height: s.height() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub factors: Vec<ZSequence>,
    pub remainder: ZSequence,
}

/// Shortest non-empty zero-sum sub-multiset, lexicographically smallest
/// among the shortest (compared as ascending element lists).
fn shortest_zero_sum(s: &ZSequence) -> Option<ZSequence> {
    let mut best: Option<(u32, Vec<u32>)> = None;
    s.for_each_submultiset(|sub| {
        let len: u32 = sub.iter().sum();
        if len > 0 && sub_sum(s.p, sub) == 0 {
            let cand = ZSequence::from_multiplicities(s.p, sub.to_vec());
            let key = (len, cand.elements());
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        true
    });
    best.map(|(_, e)| ZSequence::new(s.p, &e.iter().map(|&x| x as i64).collect::<Vec<_>>()))
}

/// Greedy factorization into irreducible zero-sum factors plus a zero-sum
/// free remainder: repeatedly strips the lexicographically smallest among
/// the shortest non-empty zero-sum sub-multisets.
pub fn factor_irreducible(s: &ZSequence) -> Result<Factorization> {
    s.guard()?;
    let mut rest = s.clone();
    let mut factors = Vec::new();
    while let Some(f) = shortest_zero_sum(&rest) {
        rest = rest.minus(&f);
        factors.push(f);
    }
    Ok(Factorization { factors, remainder: rest })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EasyLemmaCheck {
    pub sigma_size: u32,
    pub bound: u32,
    pub bound_holds: bool,
    /// `(a, k)` with `S = ((-a)^k, a^{d-k})`, reported when
    /// `p - 1 ≥ |Σ(S)| = d + 1`.
    pub equality_case: Option<(u32, u32)>,
    /// False only if the equality situation occurs but no such `(a, k)` exists.
    pub structure_holds: bool,
}

/// Checks `|Σ(S)| ≥ min{p, d+1}` for a sequence of non-zero elements and the
/// structure of the extremal case.
pub fn lemma_easy_check(s: &ZSequence) -> Result<EasyLemmaCheck> {
    if s.mult[0] > 0 {
        return Err(Error::ZeroElement);
    }
    let p = s.p;
    let d = s.len() as u32;
    let sigma_size = sigma(s).len() as u32;
    let bound = p.min(d + 1);
    let mut equality_case = None;
    let mut structure_holds = true;
    if sigma_size == d + 1 && sigma_size < p {
        // minimize (k, a)
        'search: for k in 0..=d {
            for a in 1..p {
                let neg = p - a;
                let fits = s.support().iter().all(|&x| x == a || x == neg)
                    && if a == neg {
                        false
                    } else {
                        s.mult[neg as usize] == k && s.mult[a as usize] == d - k
                    };
                if fits {
                    equality_case = Some((a, k));
                    break 'search;
                }
            }
        }
        structure_holds = equality_case.is_some();
    }
    Ok(EasyLemmaCheck {
        sigma_size,
        bound,
        bound_holds: sigma_size >= bound,
        equality_case,
        structure_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub applicable: bool,
    pub bound: u32,
    pub sigma_size: u32,
    pub holds: bool,
}

/// `|Σ(S)| ≥ min{p, 1 + ν_1 + 2ν_2 + ... + kν_k}` on sequences with
/// `supp(S) ∩ -supp(S) = ∅` and `0 ∉ S`.
pub fn balandraud_bound(s: &ZSequence) -> BoundCheck {
    let p = s.p;
    let applicable = s.mult[0] == 0
        && (1..p).all(|a| s.mult[a as usize] == 0 || s.mult[(p - a) as usize] == 0);
    let bound = p.min(
        1 + s
            .sorted_multiplicities()
            .iter()
            .enumerate()
            .map(|(i, &nu)| (i as u32 + 1) * nu)
            .sum::<u32>(),
    );
    let sigma_size = sigma(s).len() as u32;
    BoundCheck { applicable, bound, sigma_size, holds: sigma_size >= bound }
}

/// `|Σ(S)| ≥ 2|S| - h(S) + 1` on non-empty zero-sum free sequences.
pub fn freeze_smith_bound(s: &ZSequence) -> BoundCheck {
    let applicable = !s.is_empty() && !nonempty_sums(s)[0];
    let bound = (2 * s.len() as i64 - s.height() as i64 + 1).max(0) as u32;
    let sigma_size = sigma(s).len() as u32;
    BoundCheck { applicable, bound, sigma_size, holds: sigma_size >= bound }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VosperCase {
    pub step: u32,
    pub start_k: u32,
    pub start_l: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauchyDavenportCheck {
    pub sum_size: u32,
    pub bound: u32,
    pub equality: bool,
    pub vosper_case: Option<VosperCase>,
}

fn normalize_set(p: u32, s: &[u32]) -> Vec<u32> {
    let mut v: Vec<u32> = s.iter().map(|x| x % p).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Start of `set` as an arithmetic progression with the given step.
fn progression_start(p: u32, set: &[u32], step: u32) -> Option<u32> {
    let n = set.len() as u32;
    set.iter().copied().find(|&start| {
        let prog = normalize_set(p, &(0..n).map(|i| (start + i * step) % p).collect::<Vec<_>>());
        prog == set
    })
}

/// `|K + L| ≥ min{p, |K| + |L| - 1}`; in the equality case with
/// `|K|, |L| ≥ 2` and `|K + L| ≤ p - 2` also returns the common progression
/// step (smallest one) and both starts.
pub fn cauchy_davenport_check(p: u32, k: &[u32], l: &[u32]) -> Result<CauchyDavenportCheck> {
    if k.is_empty() || l.is_empty() {
        return Err(Error::EmptySet);
    }
    let k = normalize_set(p, k);
    let l = normalize_set(p, l);
    let mut sums = vec![false; p as usize];
    for &x in &k {
        for &y in &l {
            sums[((x + y) % p) as usize] = true;
        }
    }
    let sum_size = sums.iter().filter(|&&b| b).count() as u32;
    let bound = p.min(k.len() as u32 + l.len() as u32 - 1);
    let equality = sum_size == bound;
    let mut vosper_case = None;
    if equality && k.len() >= 2 && l.len() >= 2 && sum_size + 2 <= p {
        for step in 1..p {
            if let (Some(sk), Some(sl)) = (progression_start(p, &k, step), progression_start(p, &l, step)) {
                vosper_case = Some(VosperCase { step, start_k: sk, start_l: sl });
                break;
            }
        }
    }
    Ok(CauchyDavenportCheck { sum_size, bound, equality, vosper_case })
}

/// Largest length of a zero-sum free sequence plus one, by exhaustive
/// search over multisets (zero-sum freeness is closed under taking
/// sub-multisets, so only zero-sum free prefixes are extended).
pub fn davenport_constant(p: u32) -> Result<u32> {
    if p > 13 {
        return Err(Error::GuardExceeded(p));
    }
    fn extend(p: u32, min_elem: u32, reach: &[bool], len: u32, best: &mut u32) {
        *best = (*best).max(len);
        for a in min_elem.max(1)..p {
            // new non-empty sums: {a} ∪ (reach + a)
            let mut next = reach.to_vec();
            next[a as usize] = true;
            for (x, &r) in reach.iter().enumerate() {
                if r {
                    next[(x + a as usize) % p as usize] = true;
                }
            }
            if !next[0] {
                extend(p, a, &next, len + 1, best);
            }
        }
    }
    let mut best = 0;
    extend(p, 1, &vec![false; p as usize], 0, &mut best);
    Ok(best + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(p: u32, e: &[i64]) -> ZSequence {
        ZSequence::new(p, e)
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(&seq(7, &[])), vec![0]);
        assert_eq!(sigma(&seq(5, &[1, 2])), vec![0, 1, 2, 3]);
        assert_eq!(sigma(&seq(7, &[1, 1, 1])), vec![0, 1, 2, 3]);
    }

    #[test]
    fn classify_examples() {
        let c = classify(&seq(7, &[1, 6])).unwrap();
        assert!(c.zero_sum && c.irreducible_zero_sum && !c.zero_sum_free);
        let c = classify(&seq(7, &[1, 6, 2, 5])).unwrap();
        assert!(c.zero_sum && !c.irreducible_zero_sum);
        let c = classify(&seq(7, &[1, 1, 5])).unwrap();
        assert!(c.zero_sum && c.irreducible_zero_sum);
        assert_eq!(c.height, 2);
        let c = classify(&seq(7, &[1, 1])).unwrap();
        assert!(c.zero_sum_free && !c.zero_sum);
        assert!(!classify(&seq(7, &[])).unwrap().irreducible_zero_sum);
        assert!(classify(&seq(7, &[0])).unwrap().irreducible_zero_sum);
    }

    #[test]
    fn factor_examples() {
        let f = factor_irreducible(&seq(7, &[1, 6, 2, 5])).unwrap();
        assert_eq!(f.factors, vec![seq(7, &[1, 6]), seq(7, &[2, 5])]);
        assert!(f.remainder.is_empty());
        let f = factor_irreducible(&seq(7, &[1, 1])).unwrap();
        assert!(f.factors.is_empty());
        assert_eq!(f.remainder, seq(7, &[1, 1]));
    }

    #[test]
    fn guard_refuses_long_sequences() {
        let s = seq(7, &[1; 25]);
        assert_eq!(classify(&s), Err(Error::TooLong(25, ENUMERATION_GUARD)));
        assert!(factor_irreducible(&s).is_err());
    }

    #[test]
    fn lemma_examples() {
        let r = lemma_easy_check(&seq(7, &[1, 1, 1])).unwrap();
        assert_eq!((r.sigma_size, r.bound_holds, r.equality_case), (4, true, Some((1, 0))));
        let r = lemma_easy_check(&seq(5, &[1, 2])).unwrap();
        assert_eq!((r.sigma_size, r.bound_holds, r.equality_case), (4, true, None));
        let r = lemma_easy_check(&seq(7, &[1, 6, 1])).unwrap();
        assert_eq!((r.sigma_size, r.equality_case), (4, Some((1, 1))));
        assert_eq!(lemma_easy_check(&seq(7, &[0, 1])), Err(Error::ZeroElement));
    }

    #[test]
    fn balandraud_examples() {
        let b = balandraud_bound(&seq(7, &[1, 1, 3]));
        assert!(b.applicable);
        assert_eq!((b.bound, b.sigma_size, b.holds), (5, 6, true));
        assert!(!balandraud_bound(&seq(7, &[1, 6])).applicable);
        // 1 + 3 + 2·2 = 8 exceeds p
        let b = balandraud_bound(&seq(7, &[1, 1, 2, 2, 2]));
        assert_eq!((b.bound, b.sigma_size, b.holds), (7, 7, true));
    }

    #[test]
    fn freeze_smith_examples() {
        let f = freeze_smith_bound(&seq(7, &[1, 1]));
        assert!(f.applicable);
        assert_eq!((f.bound, f.sigma_size), (3, 3));
        let f = freeze_smith_bound(&seq(7, &[1, 2]));
        assert_eq!((f.bound, f.sigma_size, f.holds), (4, 4, true));
        assert!(!freeze_smith_bound(&seq(7, &[1, 6])).applicable);
    }

    #[test]
    fn cauchy_davenport_examples() {
        let c = cauchy_davenport_check(7, &[0, 1], &[0, 1]).unwrap();
        assert_eq!((c.sum_size, c.bound, c.equality), (3, 3, true));
        assert_eq!(c.vosper_case, Some(VosperCase { step: 1, start_k: 0, start_l: 0 }));
        let c = cauchy_davenport_check(7, &[0, 2, 4], &[0, 2]).unwrap();
        assert_eq!((c.sum_size, c.bound, c.equality), (4, 4, true));
        assert_eq!(c.vosper_case, Some(VosperCase { step: 2, start_k: 0, start_l: 0 }));
        let all: Vec<u32> = (0..7).collect();
        let c = cauchy_davenport_check(7, &all, &[0]).unwrap();
        assert_eq!((c.sum_size, c.bound), (7, 7));
        assert_eq!(cauchy_davenport_check(7, &[], &[1]), Err(Error::EmptySet));
    }

    #[test]
    fn davenport_examples() {
        assert_eq!(davenport_constant(5).unwrap(), 5);
        assert_eq!(davenport_constant(7).unwrap(), 7);
        assert_eq!(davenport_constant(17), Err(Error::GuardExceeded(17)));
        assert!(classify(&seq(7, &[1; 6])).unwrap().zero_sum_free);
    }

    #[test]
    fn parse_sequences() {
        assert_eq!(ZSequence::parse(7, "1, 1,5").unwrap(), seq(7, &[1, 1, 5]));
        assert_eq!(ZSequence::parse(7, "8,-1").unwrap(), seq(7, &[1, 6]));
        assert!(matches!(ZSequence::parse(7, "1,x"), Err(Error::Parse { pos: 2, .. })));
    }
}

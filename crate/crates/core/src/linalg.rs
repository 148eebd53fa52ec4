//! Sparse row echelon forms over `Q(ω)` or over a prime field `F_ℓ`.
//!
//! Rows are kept in (non-reduced) echelon form with a normalized pivot.
//! Incoming vectors are reduced column by column with a min-heap of touched
//! columns, so the cost tracks fill-in rather than the row length.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cyclo::{CycNumber, ModularImage};
use crate::error::{Error, Result};
use crate::modp;

/// Coefficient arithmetic used by the elimination routines.
pub trait Scalars: Send + Sync {
    type Elem: Clone + Send + Sync + fmt::Debug + PartialEq;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Inverse of a non-zero element.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    /// `a · mult · ω^k`.
    fn mul_omega(&self, a: &Self::Elem, k: u32, mult: i64) -> Self::Elem;
    fn from_cyc(&self, a: &CycNumber) -> Result<Self::Elem>;

    fn sub_mul_assign(&self, acc: &mut Self::Elem, a: &Self::Elem, b: &Self::Elem) {
        *acc = self.sub(acc, &self.mul(a, b));
    }
}

/// Exact arithmetic in `Q(ω)`.
#[derive(Clone, Debug)]
pub struct ExactOmega {
    omega: [CycNumber; 3],
}

impl Default for ExactOmega {
    fn default() -> Self {
        ExactOmega { omega: [CycNumber::one(3), CycNumber::zeta_pow(3, 1), CycNumber::zeta_pow(3, 2)] }
    }
}

impl Scalars for ExactOmega {
    type Elem = CycNumber;

    fn zero(&self) -> CycNumber {
        CycNumber::zero(3)
    }
    fn one(&self) -> CycNumber {
        CycNumber::one(3)
    }
    fn is_zero(&self, a: &CycNumber) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &CycNumber, b: &CycNumber) -> CycNumber {
        a + b
    }
    fn sub(&self, a: &CycNumber, b: &CycNumber) -> CycNumber {
        a - b
    }
    fn mul(&self, a: &CycNumber, b: &CycNumber) -> CycNumber {
        a * b
    }
    fn neg(&self, a: &CycNumber) -> CycNumber {
        -a
    }
    fn inv(&self, a: &CycNumber) -> CycNumber {
        a.inverse().expect("pivot is non-zero")
    }
    fn from_i64(&self, v: i64) -> CycNumber {
        CycNumber::from_integer(3, v)
    }
    fn mul_omega(&self, a: &CycNumber, k: u32, mult: i64) -> CycNumber {
        let r = if k.is_multiple_of(3) { a.clone() } else { a * &self.omega[(k % 3) as usize] };
        if mult == 1 {
            r
        } else {
            r.scale(&num_rational::BigRational::from_integer(mult.into()))
        }
    }
    fn from_cyc(&self, a: &CycNumber) -> Result<CycNumber> {
        if a.conductor() == 3 {
            Ok(a.clone())
        } else if a.conductor() == 1 {
            a.embed(3)
        } else {
            Err(Error::ConductorMismatch(a.conductor(), 3))
        }
    }
}

/// `F_ℓ` with `ω ↦` a fixed element of order 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModPrime {
    pub prime: u64,
    pub omega: u64,
    image: ModularImage,
}

impl ModPrime {
    pub fn new(prime: u64) -> Result<Self> {
        let image = ModularImage::new(3, prime)?;
        Ok(ModPrime { prime, omega: image.root, image })
    }
}

impl Scalars for ModPrime {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        modp::add(*a, *b, self.prime)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        modp::sub(*a, *b, self.prime)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        modp::mul(*a, *b, self.prime)
    }
    fn neg(&self, a: &u64) -> u64 {
        modp::sub(0, *a, self.prime)
    }
    fn inv(&self, a: &u64) -> u64 {
        modp::inv(*a, self.prime)
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.prime as i64) as u64
    }
    fn mul_omega(&self, a: &u64, k: u32, mult: i64) -> u64 {
        let w = modp::pow(self.omega, (k % 3) as u64, self.prime);
        modp::mul(modp::mul(*a, w, self.prime), self.from_i64(mult), self.prime)
    }
    fn from_cyc(&self, a: &CycNumber) -> Result<u64> {
        let a3 = if a.conductor() == 1 { a.embed(3)? } else { a.clone() };
        self.image.image(&a3)
    }
    fn sub_mul_assign(&self, acc: &mut u64, a: &u64, b: &u64) {
        *acc = modp::sub(*acc, modp::mul(*a, *b, self.prime), self.prime);
    }
}

pub type SparseRow<E> = Vec<(u32, E)>;

/// Sorts by column, merges duplicates and drops zeros.
pub fn consolidate<S: Scalars>(s: &S, mut v: SparseRow<S::Elem>) -> SparseRow<S::Elem> {
    v.sort_by_key(|(c, _)| *c);
    let mut out: SparseRow<S::Elem> = Vec::with_capacity(v.len());
    for (c, e) in v {
        match out.last_mut() {
            Some((lc, le)) if *lc == c => *le = s.add(le, &e),
            _ => out.push((c, e)),
        }
    }
    out.retain(|(_, e)| !s.is_zero(e));
    out
}

const NONE: u32 = u32::MAX;

/// Incremental row echelon form over a fixed number of columns.
pub struct Echelon<'s, S: Scalars> {
    s: &'s S,
    ncols: usize,
    rows: Vec<SparseRow<S::Elem>>,
    pivot_row: Vec<u32>,
    scratch: Vec<S::Elem>,
    in_heap: Vec<bool>,
    heap: BinaryHeap<Reverse<u32>>,
    history: Option<Vec<BTreeMap<usize, S::Elem>>>,
}

impl<'s, S: Scalars> Echelon<'s, S> {
    pub fn new(s: &'s S, ncols: usize) -> Self {
        Echelon {
            s,
            ncols,
            rows: Vec::new(),
            pivot_row: vec![NONE; ncols],
            scratch: vec![s.zero(); ncols],
            in_heap: vec![false; ncols],
            heap: BinaryHeap::new(),
            history: None,
        }
    }

    /// Tracks, for every row, its expression in the inserted generators.
    pub fn with_history(s: &'s S, ncols: usize) -> Self {
        let mut e = Self::new(s, ncols);
        e.history = Some(Vec::new());
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[SparseRow<S::Elem>] {
        &self.rows
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Pivot columns in ascending order.
    pub fn pivots(&self) -> Vec<u32> {
        (0..self.ncols as u32).filter(|&c| self.pivot_row[c as usize] != NONE).collect()
    }

    fn load(&mut self, v: &[(u32, S::Elem)]) {
        for (c, e) in v {
            let ci = *c as usize;
            self.scratch[ci] = self.s.add(&self.scratch[ci], e);
            if !self.in_heap[ci] {
                self.in_heap[ci] = true;
                self.heap.push(Reverse(*c));
            }
        }
    }

    fn take(&mut self, c: usize) -> S::Elem {
        std::mem::replace(&mut self.scratch[c], self.s.zero())
    }

    /// Reduces the loaded vector. Returns the residual (ascending columns)
    /// and the `(row, factor)` pairs that were subtracted.
    fn run(&mut self, stop_on_free: bool, track: bool) -> (SparseRow<S::Elem>, Vec<(usize, S::Elem)>) {
        let mut residual = Vec::new();
        let mut used = Vec::new();
        while let Some(Reverse(c)) = self.heap.pop() {
            let ci = c as usize;
            self.in_heap[ci] = false;
            if self.s.is_zero(&self.scratch[ci]) {
                continue;
            }
            let r = self.pivot_row[ci];
            if r != NONE {
                let f = self.take(ci);
                let row = &self.rows[r as usize];
                for (c2, e2) in &row[1..] {
                    let c2i = *c2 as usize;
                    self.s.sub_mul_assign(&mut self.scratch[c2i], &f, e2);
                    if !self.in_heap[c2i] {
                        self.in_heap[c2i] = true;
                        self.heap.push(Reverse(*c2));
                    }
                }
                if track {
                    used.push((r as usize, f));
                }
            } else {
                let e = self.take(ci);
                residual.push((c, e));
                if stop_on_free {
                    while let Some(Reverse(c2)) = self.heap.pop() {
                        let c2i = c2 as usize;
                        self.in_heap[c2i] = false;
                        if !self.s.is_zero(&self.scratch[c2i]) {
                            let e2 = self.take(c2i);
                            residual.push((c2, e2));
                        }
                    }
                    break;
                }
            }
        }
        (residual, used)
    }

    fn combine(&self, used: &[(usize, S::Elem)]) -> BTreeMap<usize, S::Elem> {
        let hist = self.history.as_ref().expect("history enabled");
        let mut out: BTreeMap<usize, S::Elem> = BTreeMap::new();
        for (r, f) in used {
            for (g, c) in &hist[*r] {
                let e = out.entry(*g).or_insert_with(|| self.s.zero());
                *e = self.s.add(e, &self.s.mul(f, c));
            }
        }
        out.retain(|_, e| !self.s.is_zero(e));
        out
    }

    /// Inserts a vector (generator `id` when history is tracked). Returns
    /// true when it increased the rank.
    pub fn insert(&mut self, v: &[(u32, S::Elem)], id: usize) -> bool {
        let track = self.history.is_some();
        self.load(v);
        let (residual, used) = self.run(true, track);
        if residual.is_empty() {
            return false;
        }
        let inv = self.s.inv(&residual[0].1);
        let row: SparseRow<S::Elem> = residual.into_iter().map(|(c, e)| (c, self.s.mul(&e, &inv))).collect();
        if track {
            // row = inv * (v - Σ f_r row_r)
            let mut comb = self.combine(&used);
            for e in comb.values_mut() {
                *e = self.s.neg(e);
            }
            let own = comb.entry(id).or_insert_with(|| self.s.zero());
            *own = self.s.add(own, &self.s.one());
            for e in comb.values_mut() {
                *e = self.s.mul(e, &inv);
            }
            comb.retain(|_, e| !self.s.is_zero(e));
            self.history.as_mut().unwrap().push(comb);
        }
        self.pivot_row[row[0].0 as usize] = self.rows.len() as u32;
        self.rows.push(row);
        true
    }

    /// Fully reduces `v`; an empty residual means `v` lies in the row span.
    pub fn reduce(&mut self, v: &[(u32, S::Elem)]) -> SparseRow<S::Elem> {
        self.load(v);
        self.run(false, false).0
    }

    pub fn contains(&mut self, v: &[(u32, S::Elem)]) -> bool {
        self.reduce(v).is_empty()
    }

    /// Like [`Echelon::reduce`], also returning coefficients `c_g` over the
    /// inserted generators with `v = residual + Σ c_g · gen_g`.
    pub fn reduce_with_witness(&mut self, v: &[(u32, S::Elem)]) -> (SparseRow<S::Elem>, BTreeMap<usize, S::Elem>) {
        self.load(v);
        let (residual, used) = self.run(false, true);
        let comb = self.combine(&used);
        (residual, comb)
    }
}

/// How a rank was established.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RankCertificate {
    /// Fraction-free-equivalent exact elimination over `Q(ω)`.
    Exact,
    /// Rank over `F_ℓ`; a lower bound for the rank over `Q(ω)`.
    ModularLowerBound { prime: u64 },
    /// Rank over `F_ℓ` equal to a known upper bound, hence exact.
    CertifiedModular { prime: u64, target: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankMode {
    Exact,
    Modular(u64),
    /// Modular rank at `prime`, accepted when it equals `target` (which the
    /// caller knows to be an upper bound); otherwise exact elimination.
    Certified { prime: u64, target: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOutcome {
    pub rank: usize,
    pub certificate: RankCertificate,
}

fn rank_with<S: Scalars>(s: &S, rows: &[SparseRow<CycNumber>], ncols: usize) -> Result<usize> {
    let mut ech = Echelon::new(s, ncols);
    for (i, r) in rows.iter().enumerate() {
        let v: Result<SparseRow<S::Elem>> = r.iter().map(|(c, e)| Ok((*c, s.from_cyc(e)?))).collect();
        ech.insert(&consolidate(s, v?), i);
        if ech.is_full() {
            break;
        }
    }
    Ok(ech.rank())
}

/// Rank of a sparse matrix with entries in `Q(ω)`.
pub fn rank(rows: &[SparseRow<CycNumber>], ncols: usize, mode: &RankMode) -> Result<RankOutcome> {
    match mode {
        RankMode::Exact => Ok(RankOutcome { rank: rank_with(&ExactOmega::default(), rows, ncols)?, certificate: RankCertificate::Exact }),
        RankMode::Modular(prime) => {
            let s = ModPrime::new(*prime)?;
            Ok(RankOutcome { rank: rank_with(&s, rows, ncols)?, certificate: RankCertificate::ModularLowerBound { prime: *prime } })
        }
        RankMode::Certified { prime, target } => {
            let s = ModPrime::new(*prime)?;
            let r = rank_with(&s, rows, ncols)?;
            if r == *target {
                Ok(RankOutcome { rank: r, certificate: RankCertificate::CertifiedModular { prime: *prime, target: *target } })
            } else {
                rank(rows, ncols, &RankMode::Exact)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(k: i64) -> CycNumber {
        CycNumber::zeta_pow(3, k)
    }

    fn int(v: i64) -> CycNumber {
        CycNumber::from_integer(3, v)
    }

    #[test]
    fn identity_has_full_rank_in_all_modes() {
        let rows: Vec<SparseRow<CycNumber>> = (0..5).map(|i| vec![(i, int(1))]).collect();
        let ell = modp::default_prime();
        for mode in [RankMode::Exact, RankMode::Modular(ell), RankMode::Certified { prime: ell, target: 5 }] {
            assert_eq!(rank(&rows, 5, &mode).unwrap().rank, 5);
        }
    }

    #[test]
    fn invalid_prime_is_rejected() {
        assert!(rank(&[], 1, &RankMode::Modular(1_000_000_007)).is_err()); // 2 mod 3
        assert!(rank(&[], 1, &RankMode::Modular(1_000_000_008)).is_err());
    }

    #[test]
    fn modular_rank_drops_only_at_special_primes() {
        let ell = 7u64; // 7 ≡ 1 mod 3
        let rows = vec![vec![(0, int(1)), (1, int(1))], vec![(0, int(1)), (1, int(1 + ell as i64))]];
        let exact = rank(&rows, 2, &RankMode::Exact).unwrap();
        let modular = rank(&rows, 2, &RankMode::Modular(ell)).unwrap();
        assert_eq!(exact.rank, 2);
        assert_eq!(modular.rank, 1);
        let cert = rank(&rows, 2, &RankMode::Certified { prime: ell, target: 2 }).unwrap();
        assert_eq!(cert, RankOutcome { rank: 2, certificate: RankCertificate::Exact });
    }

    #[test]
    fn omega_relations_are_respected() {
        // (1, ω) and (ω², 1) are proportional: ω² · (1, ω) = (ω², 1)
        let rows = vec![vec![(0, int(1)), (1, w(1))], vec![(0, w(2)), (1, int(1))]];
        assert_eq!(rank(&rows, 2, &RankMode::Exact).unwrap().rank, 1);
        assert_eq!(rank(&rows, 2, &RankMode::Modular(modp::default_prime())).unwrap().rank, 1);
    }

    #[test]
    fn witness_reconstructs_vector() {
        let s = ExactOmega::default();
        let gens: Vec<SparseRow<CycNumber>> = vec![
            vec![(0, int(1)), (2, w(1))],
            vec![(1, int(2)), (2, int(1))],
            vec![(0, int(1)), (1, int(2)), (2, &w(1) + &int(1))],
        ];
        let mut e = Echelon::with_history(&s, 3);
        for (i, g) in gens.iter().enumerate() {
            e.insert(g, i);
        }
        assert_eq!(e.rank(), 2);
        let target = vec![(0, int(3)), (1, int(-2)), (2, &(&w(1) * &int(3)) - &int(1))];
        let (res, wit) = e.reduce_with_witness(&target);
        assert!(res.is_empty());
        let mut acc = vec![int(0), int(0), int(0)];
        for (g, c) in wit {
            for (col, v) in &gens[g] {
                acc[*col as usize] = &acc[*col as usize] + &(&c * v);
            }
        }
        let expect: Vec<CycNumber> = target.iter().map(|(_, v)| v.clone()).collect();
        assert_eq!(acc, expect);
    }

    fn small_omega() -> impl Strategy<Value = CycNumber> {
        (-2i64..=2, -2i64..=2).prop_map(|(a, b)| &int(a) + &(&int(b) * &w(1)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn modular_rank_never_exceeds_exact(entries in proptest::collection::vec(
            proptest::collection::vec((0u32..6, small_omega()), 0..4), 1..8)) {
            let rows: Vec<SparseRow<CycNumber>> = entries;
            let exact = rank(&rows, 6, &RankMode::Exact).unwrap().rank;
            for ell in [7u64, 13, modp::default_prime()] {
                let m = rank(&rows, 6, &RankMode::Modular(ell)).unwrap().rank;
                prop_assert!(m <= exact);
            }
            prop_assert_eq!(rank(&rows, 6, &RankMode::Modular(modp::default_prime())).unwrap().rank, exact);
        }
    }
}

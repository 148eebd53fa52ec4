//! Graded pieces of `I = F[V]^A` and `R = F[V]^G`.
//!
//! `G` preserves the degree of every irreducible instance, so all graded
//! data split into blocks indexed by the instance multidegree. A block
//! stores its `A`-invariant monomials together with the permutation and
//! scalar by which `d` acts, which is all the transfer needs.

mod poly;
mod span;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::cyclo::CycNumber;
use crate::error::{Error, Result};
use crate::group::{GroupSpec, IrreducibleLabel, ModuleSpec, VariableTable};
use crate::linalg::{consolidate, Echelon, ExactOmega, Scalars};
use crate::zsum::ZSequence;

pub use poly::Polynomial;
pub use span::{
    Algebra, BlockDecision, DecisionMode, Factor, MembershipResult, Selector, SpanExpr, SpanTerm, SubsetDecision,
    Witness, WitnessTerm,
};

pub type Exps = SmallVec<[u8; 16]>;
pub type MultiDegree = SmallVec<[u8; 8]>;

/// A monomial as an exponent vector over the variable table.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
pub struct Monomial(pub Exps);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn from_exps(e: &[u8]) -> Self {
        Monomial(SmallVec::from_slice(e))
    }

    pub fn var(nvars: usize, k: usize, e: u8) -> Self {
        let mut m = Self::one(nvars);
        m.0[k] = e;
        m
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }
}

/// Graded lexicographic order.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One multidegree block of `I`, with the `d`-action on it.
#[derive(Debug)]
pub struct Block {
    pub degree: MultiDegree,
    /// Ascending in graded lex order.
    pub monomials: Vec<Monomial>,
    index: FxHashMap<Monomial, u32>,
    /// `m^d = ω^{scalar[m]} · monomials[d_image[m]]`.
    pub d_image: Vec<u32>,
    pub scalar: Vec<u8>,
    /// Smallest monomial of the `B`-orbit, and `t` with `m = P^t(rep)`.
    pub rep: Vec<u32>,
    pub shift: Vec<u8>,
    /// Orbit representatives with `τ(rep) ≠ 0`; they index a basis of `R_α`.
    pub r_basis: Vec<u32>,
    /// Position in `r_basis` of a representative, or `u32::MAX`.
    pub r_pos: Vec<u32>,
}

pub(crate) const NONE: u32 = u32::MAX;

impl Block {
    pub fn index_of(&self, m: &Monomial) -> Option<u32> {
        self.index.get(m).copied()
    }

    pub fn dim_i(&self) -> usize {
        self.monomials.len()
    }

    pub fn dim_r(&self) -> usize {
        self.r_basis.len()
    }

    pub fn orbit_size(&self, m: u32) -> usize {
        if self.d_image[m as usize] == m {
            1
        } else {
            3
        }
    }

    /// `τ(rep)` as `(monomial, ω-exponent, multiplier)` terms.
    pub fn tau_terms(&self, rep: u32) -> SmallVec<[(u32, u8, u8); 3]> {
        let s = self.scalar[rep as usize];
        if self.orbit_size(rep) == 1 {
            if s == 0 {
                smallvec::smallvec![(rep, 0, 3)]
            } else {
                SmallVec::new()
            }
        } else {
            let m1 = self.d_image[rep as usize];
            let m2 = self.d_image[m1 as usize];
            smallvec::smallvec![(rep, 0, 1), (m1, s, 1), (m2, (2 * s) % 3, 1)]
        }
    }
}

/// `τ`-images and `A`-invariant monomials of one module, with a block cache.
pub struct InvariantRing {
    table: VariableTable,
    blocks: DashMap<MultiDegree, Arc<Block>>,
}

impl fmt::Debug for InvariantRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InvariantRing(p={}, {})", self.table.group.p, self.table.module)
    }
}

fn compositions(n: u32, parts: usize) -> Vec<SmallVec<[u8; 3]>> {
    let mut out = Vec::new();
    let mut cur: SmallVec<[u8; 3]> = SmallVec::from_elem(0, parts);
    fn rec(i: usize, left: u32, cur: &mut SmallVec<[u8; 3]>, out: &mut Vec<SmallVec<[u8; 3]>>) {
        if i + 1 == cur.len() {
            cur[i] = left as u8;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e as u8;
            rec(i + 1, left - e, cur, out);
        }
    }
    if parts == 0 {
        if n == 0 {
            out.push(cur);
        }
        return out;
    }
    rec(0, n, &mut cur, &mut out);
    out
}

impl InvariantRing {
    pub fn new(group: &GroupSpec, module: &ModuleSpec) -> Result<Self> {
        Ok(Self::from_table(VariableTable::build(group, module)?))
    }

    pub fn from_table(table: VariableTable) -> Self {
        InvariantRing { table, blocks: DashMap::new() }
    }

    pub fn table(&self) -> &VariableTable {
        &self.table
    }

    pub fn p(&self) -> u32 {
        self.table.group.p
    }

    pub fn nvars(&self) -> usize {
        self.table.len()
    }

    pub fn num_instances(&self) -> usize {
        self.table.instances.len()
    }

    pub fn multidegree(&self, m: &Monomial) -> MultiDegree {
        self.table
            .instances
            .iter()
            .map(|inst| inst.vars.iter().map(|&v| m.0[v]).sum())
            .collect()
    }

    pub fn weight(&self, m: &Monomial) -> u32 {
        let p = self.p() as u64;
        (self.table.vars.iter().zip(m.0.iter()).map(|(v, &e)| v.weight as u64 * e as u64).sum::<u64>() % p) as u32
    }

    pub fn weight_sequence(&self, m: &Monomial) -> ZSequence {
        let mut mult = vec![0u32; self.p() as usize];
        for (v, &e) in self.table.vars.iter().zip(m.0.iter()) {
            mult[v.weight as usize] += e as u32;
        }
        ZSequence::from_multiplicities(self.p(), mult)
    }

    /// `λ(m)_i` = number of distinct weights of multiplicity at least `i`.
    pub fn lambda_stat(&self, m: &Monomial) -> Vec<u32> {
        let mut nu = self.weight_sequence(m).sorted_multiplicities();
        nu.retain(|&x| x > 0);
        let top = nu.first().copied().unwrap_or(0);
        (1..=top).map(|i| nu.iter().filter(|&&x| x >= i).count() as u32).collect()
    }

    pub fn is_a_invariant(&self, m: &Monomial) -> bool {
        self.weight(m) == 0
    }

    pub fn display_monomial(&self, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(k, &e)| {
                let name = &self.table.vars[k].name;
                if e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// Parses `"V1a_0^2*V1a_1"` style monomials (and `"1"`).
    pub fn parse_monomial(&self, s: &str) -> Result<Monomial> {
        let mut m = Monomial::one(self.nvars());
        let s = s.trim();
        if s == "1" {
            return Ok(m);
        }
        let mut pos = 0;
        for part in s.split('*') {
            let (name, exp) = match part.split_once('^') {
                Some((n, e)) => (n.trim(), e.trim().parse::<u8>().map_err(|_| Error::Parse { pos, msg: format!("bad exponent in {part:?}") })?),
                None => (part.trim(), 1),
            };
            let k = self
                .table
                .vars
                .iter()
                .position(|v| v.name == name)
                .ok_or_else(|| Error::Parse { pos, msg: format!("unknown variable {name:?}") })?;
            m.0[k] += exp;
            pos += part.len() + 1;
        }
        Ok(m)
    }

    /// All instance multidegrees of total degree `d`.
    pub fn multidegrees(&self, d: u32) -> Vec<MultiDegree> {
        let n = self.num_instances();
        let mut out = Vec::new();
        let mut cur: MultiDegree = SmallVec::from_elem(0, n);
        fn rec(i: usize, left: u32, cur: &mut MultiDegree, out: &mut Vec<MultiDegree>) {
            if i + 1 == cur.len() {
                cur[i] = left as u8;
                out.push(cur.clone());
                return;
            }
            for e in (0..=left).rev() {
                cur[i] = e as u8;
                rec(i + 1, left - e, cur, out);
            }
        }
        if n == 0 {
            if d == 0 {
                out.push(cur);
            }
            return out;
        }
        rec(0, d, &mut cur, &mut out);
        out
    }

    pub fn block(&self, alpha: &MultiDegree) -> Arc<Block> {
        if let Some(b) = self.blocks.get(alpha) {
            return b.clone();
        }
        let b = Arc::new(self.build_block(alpha));
        self.blocks.entry(alpha.clone()).or_insert(b).clone()
    }

    fn build_block(&self, alpha: &MultiDegree) -> Block {
        let p = self.p();
        let nv = self.nvars();
        // per instance: (exponents on its variables, weight)
        let per: Vec<Vec<(SmallVec<[u8; 3]>, u32)>> = self
            .table
            .instances
            .iter()
            .zip(alpha.iter())
            .map(|(inst, &a)| {
                compositions(a as u32, inst.vars.len())
                    .into_iter()
                    .map(|c| {
                        let w = inst
                            .vars
                            .iter()
                            .zip(c.iter())
                            .map(|(&v, &e)| self.table.vars[v].weight as u64 * e as u64)
                            .sum::<u64>()
                            % p as u64;
                        (c, w as u32)
                    })
                    .collect()
            })
            .collect();
        let mut monomials = Vec::new();
        let mut cur = Monomial::one(nv);
        fn rec(
            ring: &InvariantRing,
            per: &[Vec<(SmallVec<[u8; 3]>, u32)>],
            i: usize,
            w: u32,
            cur: &mut Monomial,
            out: &mut Vec<Monomial>,
        ) {
            let p = ring.p();
            if i == per.len() {
                if w == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            let vars = &ring.table.instances[i].vars;
            let last = i + 1 == per.len();
            for (c, cw) in &per[i] {
                let nw = (w + cw) % p;
                if last && nw != 0 {
                    continue;
                }
                for (&v, &e) in vars.iter().zip(c.iter()) {
                    cur.0[v] = e;
                }
                rec(ring, per, i + 1, nw, cur, out);
            }
            for &v in vars {
                cur.0[v] = 0;
            }
        }
        rec(self, &per, 0, 0, &mut cur, &mut monomials);
        monomials.sort();
        let index: FxHashMap<Monomial, u32> = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i as u32)).collect();
        let mut d_image = Vec::with_capacity(monomials.len());
        let mut scalar = Vec::with_capacity(monomials.len());
        for m in &monomials {
            let (pm, s) = self.apply_d(m);
            d_image.push(index[&pm]);
            scalar.push(s);
        }
        let n = monomials.len();
        let mut rep = vec![NONE; n];
        let mut shift = vec![0u8; n];
        for i in 0..n as u32 {
            if rep[i as usize] != NONE {
                continue;
            }
            // i is the smallest member of its orbit
            let mut j = i;
            for t in 0..3u8 {
                if rep[j as usize] == NONE {
                    rep[j as usize] = i;
                    shift[j as usize] = t;
                }
                j = d_image[j as usize];
            }
        }
        let mut r_basis = Vec::new();
        let mut r_pos = vec![NONE; n];
        for i in 0..n as u32 {
            if rep[i as usize] == i && (d_image[i as usize] != i || scalar[i as usize] == 0) {
                r_pos[i as usize] = r_basis.len() as u32;
                r_basis.push(i);
            }
        }
        Block { degree: alpha.clone(), monomials, index, d_image, scalar, rep, shift, r_basis, r_pos }
    }

    /// `m^d = ω^s · P(m)`; returns `(P(m), s)`.
    pub fn apply_d(&self, m: &Monomial) -> (Monomial, u8) {
        let mut out = m.clone();
        let mut s = 0u32;
        for inst in &self.table.instances {
            match inst.label {
                IrreducibleLabel::OneDim(j) => s += j as u32 * m.0[inst.vars[0]] as u32,
                IrreducibleLabel::Induced(_) => {
                    for k in 0..3 {
                        out.0[inst.vars[(k + 1) % 3]] = m.0[inst.vars[k]];
                    }
                }
            }
        }
        (out, (s % 3) as u8)
    }

    pub fn enumerate_a_invariant(&self, d: u32) -> Vec<Monomial> {
        let mut out: Vec<Monomial> =
            self.multidegrees(d).iter().flat_map(|a| self.block(a).monomials.clone()).collect();
        out.sort();
        out
    }

    pub fn dim_i(&self, d: u32) -> usize {
        self.multidegrees(d).iter().map(|a| self.block(a).dim_i()).sum()
    }

    pub fn dim_r(&self, d: u32) -> usize {
        self.multidegrees(d).iter().map(|a| self.block(a).dim_r()).sum()
    }

    /// Number of `A`-invariant monomials of multidegree `α`, by a weight
    /// generating-function count that never lists monomials.
    pub fn count_a_invariant_block(&self, alpha: &MultiDegree) -> u64 {
        let p = self.p() as usize;
        let mut acc = vec![0u64; p];
        acc[0] = 1;
        for (inst, &a) in self.table.instances.iter().zip(alpha.iter()) {
            // dp[deg][w] over the instance's variables
            let a = a as usize;
            let mut dp = vec![vec![0u64; p]; a + 1];
            dp[0][0] = 1;
            for &v in &inst.vars {
                let wv = self.table.vars[v].weight as usize;
                let mut nd = vec![vec![0u64; p]; a + 1];
                for deg in 0..=a {
                    for w in 0..p {
                        let c = dp[deg][w];
                        if c == 0 {
                            continue;
                        }
                        for e in 0..=(a - deg) {
                            nd[deg + e][(w + e * wv) % p] += c;
                        }
                    }
                }
                dp = nd;
            }
            let mut next = vec![0u64; p];
            for (w1, &c1) in acc.iter().enumerate() {
                for (w2, &c2) in dp[a].iter().enumerate() {
                    next[(w1 + w2) % p] += c1 * c2;
                }
            }
            acc = next;
        }
        acc[0]
    }

    pub fn count_a_invariant(&self, d: u32) -> u64 {
        self.multidegrees(d).iter().map(|a| self.count_a_invariant_block(a)).sum()
    }

    /// `dim R_α = (1/3) Σ_j tr(d^j | I_α)`. A monomial fixed by the
    /// permutation part of `d` is `(xyz)^k` on every induced instance, so
    /// at most one exists per block.
    pub fn burnside_dim_block(&self, alpha: &MultiDegree) -> usize {
        let n = self.count_a_invariant_block(alpha) as i64;
        let mut fixed = true;
        let mut s = 0u32;
        for (inst, &a) in self.table.instances.iter().zip(alpha.iter()) {
            match inst.label {
                IrreducibleLabel::OneDim(j) => s += j as u32 * a as u32,
                IrreducibleLabel::Induced(_) => fixed &= a % 3 == 0,
            }
        }
        // tr(d) + tr(d²) = ω^s + ω^{2s}
        let traces = if !fixed {
            0
        } else if s.is_multiple_of(3) {
            2
        } else {
            -1
        };
        let total = n + traces;
        debug_assert!(total >= 0 && total % 3 == 0);
        (total / 3) as usize
    }

    pub fn burnside_dim(&self, d: u32) -> usize {
        self.multidegrees(d).iter().map(|a| self.burnside_dim_block(a)).sum()
    }

    /// Rank of `{τ(m) : m ∈ I_d}` by exact elimination.
    pub fn tau_image_rank(&self, d: u32) -> usize {
        let s = ExactOmega::default();
        let mut total = 0;
        for alpha in self.multidegrees(d) {
            let b = self.block(&alpha);
            let mut ech = Echelon::new(&s, b.dim_i());
            for m in 0..b.dim_i() as u32 {
                let row = self.tau_row(&s, &b, m);
                ech.insert(&row, m as usize);
            }
            total += ech.rank();
        }
        total
    }

    /// `τ(m)` for a block monomial, expanded orbit term by orbit term.
    fn tau_row<S: Scalars>(&self, s: &S, b: &Block, m: u32) -> Vec<(u32, S::Elem)> {
        let mut row = Vec::with_capacity(3);
        let mut cur = m;
        let mut exp = 0u32;
        for _ in 0..3 {
            row.push((cur, s.mul_omega(&s.one(), exp, 1)));
            exp += b.scalar[cur as usize] as u32;
            cur = b.d_image[cur as usize];
        }
        consolidate(s, row)
    }

    pub fn tau_of_rep(&self, b: &Block, rep: u32) -> Polynomial {
        Polynomial::from_terms(
            3,
            b.tau_terms(rep)
                .into_iter()
                .map(|(m, k, mult)| {
                    (b.monomials[m as usize].clone(), &CycNumber::zeta_pow(3, k as i64) * &CycNumber::from_integer(3, mult as i64))
                }),
        )
    }

    fn check_a_invariant(&self, f: &Polynomial) -> Result<()> {
        for m in f.terms().keys() {
            if !self.is_a_invariant(m) {
                return Err(Error::NotAInvariant(self.display_monomial(m)));
            }
        }
        Ok(())
    }

    /// `τ(f) = f + f^d + f^{d²}`.
    pub fn transfer(&self, f: &Polynomial) -> Result<Polynomial> {
        self.twisted_transfer(f, 0)
    }

    /// `τ_χ(f) = Σ_t χ(d)^{-t} f^{d^t}` with `χ(d) = ω^j`.
    pub fn twisted_transfer(&self, f: &Polynomial, j: u8) -> Result<Polynomial> {
        if j > 2 {
            return Err(Error::Precondition(format!("character exponent {j} not in 0..3")));
        }
        self.check_a_invariant(f)?;
        let g = &self.table.group;
        let mut acc = Polynomial::zero(3);
        let mut cur = f.clone();
        for t in 0..3i64 {
            let c = CycNumber::zeta_pow(3, -(j as i64) * t);
            acc = acc.add(&cur.scale(&c))?;
            cur = cur.act(&self.table, g.d());
        }
        Ok(acc)
    }

    /// `I_d` as monomials, or `R_d` as the τ-images of orbit
    /// representatives (pairwise disjoint supports, so independent).
    pub fn graded_basis(&self, algebra: Algebra, d: u32) -> GradedBasis {
        let mut elements = Vec::new();
        let mut pivots = Vec::new();
        for alpha in self.multidegrees(d) {
            let b = self.block(&alpha);
            match algebra {
                Algebra::I => {
                    for m in &b.monomials {
                        elements.push(Polynomial::monomial(m.clone(), CycNumber::one(3)));
                        pivots.push(m.clone());
                    }
                }
                Algebra::R => {
                    for &r in &b.r_basis {
                        elements.push(self.tau_of_rep(&b, r));
                        pivots.push(b.monomials[r as usize].clone());
                    }
                }
            }
        }
        GradedBasis { label: algebra.to_string(), degree: d, elements, pivots }
    }
}

/// A basis of one graded component with its pivot monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedBasis {
    pub label: String,
    pub degree: u32,
    pub elements: Vec<Polynomial>,
    pub pivots: Vec<Monomial>,
}

impl GradedBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement;
    use proptest::prelude::*;

    fn ring(p: u32, spec: &str) -> InvariantRing {
        InvariantRing::new(&GroupSpec::new(p).unwrap(), &spec.parse().unwrap()).unwrap()
    }

    fn mono(r: &InvariantRing, s: &str) -> Monomial {
        r.parse_monomial(s).unwrap()
    }

    #[test]
    fn weights_and_sequences() {
        let r = ring(7, "V1");
        let xyz = mono(&r, "V1a_0*V1a_1*V1a_2");
        assert_eq!(r.weight(&xyz), 0);
        assert_eq!(r.weight_sequence(&xyz).elements(), vec![1, 2, 4]);
        assert_eq!(r.weight(&mono(&r, "V1a_0^7")), 0);
        let m = mono(&r, "V1a_0^2*V1a_1");
        assert_eq!(r.weight(&m), 4);
        assert_eq!(r.weight_sequence(&m).elements(), vec![1, 1, 2]);
    }

    #[test]
    fn lambda_examples() {
        let r = ring(7, "V1");
        assert_eq!(r.lambda_stat(&mono(&r, "V1a_0^2*V1a_1^2")), vec![2, 2]);
        assert_eq!(r.lambda_stat(&mono(&r, "V1a_0^3*V1a_1")), vec![2, 1, 1]);
        assert_eq!(r.lambda_stat(&mono(&r, "V1a_0^4")), vec![1, 1, 1, 1]);
    }

    #[test]
    fn a_invariant_enumeration_small_degrees() {
        let r = ring(7, "V1");
        assert!(r.enumerate_a_invariant(1).is_empty());
        assert!(r.enumerate_a_invariant(2).is_empty());
        assert_eq!(r.enumerate_a_invariant(3), vec![mono(&r, "V1a_0*V1a_1*V1a_2")]);
    }

    fn brute_count(r: &InvariantRing, d: u32) -> usize {
        let nv = r.nvars();
        let mut count = 0;
        let mut cur = Monomial::one(nv);
        fn rec(r: &InvariantRing, k: usize, left: u32, cur: &mut Monomial, count: &mut usize) {
            if k == cur.0.len() {
                if left == 0 && r.weight(cur) == 0 {
                    *count += 1;
                }
                return;
            }
            for e in 0..=left {
                cur.0[k] = e as u8;
                rec(r, k + 1, left - e, cur, count);
            }
            cur.0[k] = 0;
        }
        rec(r, 0, d, &mut cur, &mut count);
        count
    }

    #[test]
    fn enumeration_matches_brute_force_and_weight_count() {
        for spec in ["V1", "V1+V2", "U1+V1", "U1+2*V1"] {
            let r = ring(7, spec);
            for d in 0..=9 {
                let n = brute_count(&r, d);
                assert_eq!(r.dim_i(d), n, "{spec} d={d}");
                assert_eq!(r.count_a_invariant(d) as usize, n, "{spec} d={d}");
            }
        }
    }

    #[test]
    fn burnside_examples() {
        let r = ring(7, "V1");
        assert_eq!(r.burnside_dim(3), 1);
        assert_eq!(r.burnside_dim(2), 0);
        assert_eq!(r.graded_basis(Algebra::R, 3).dim(), 1);
        assert_eq!(r.graded_basis(Algebra::R, 1).dim(), 0);
        assert_eq!(r.graded_basis(Algebra::R, 7).dim(), r.burnside_dim(7));
        let u = ring(7, "U1");
        assert_eq!(u.burnside_dim(3), 1);
        assert_eq!(u.burnside_dim(1), 0);
        assert_eq!(u.burnside_dim(2), 0);
    }

    #[test]
    fn tau_rank_matches_burnside() {
        for spec in ["V1", "U1+V1", "V1+V2", "U2+V2"] {
            let r = ring(7, spec);
            for d in 0..=8 {
                assert_eq!(r.tau_image_rank(d), r.burnside_dim(d), "{spec} d={d}");
            }
        }
    }

    #[test]
    fn transfer_examples() {
        let r = ring(7, "V1");
        let xyz = Polynomial::monomial(mono(&r, "V1a_0*V1a_1*V1a_2"), CycNumber::one(3));
        assert_eq!(r.transfer(&xyz).unwrap(), xyz.scale(&CycNumber::from_integer(3, 3)));
        let x7 = Polynomial::monomial(mono(&r, "V1a_0^7"), CycNumber::one(3));
        let expect = Polynomial::from_terms(
            3,
            ["V1a_0^7", "V1a_1^7", "V1a_2^7"].iter().map(|s| (mono(&r, s), CycNumber::one(3))),
        );
        assert_eq!(r.transfer(&x7).unwrap(), expect);
        let tw = r.twisted_transfer(&x7, 1).unwrap();
        let expect = Polynomial::from_terms(
            3,
            [("V1a_0^7", 0), ("V1a_1^7", -1), ("V1a_2^7", -2)]
                .iter()
                .map(|(s, k)| (mono(&r, s), CycNumber::zeta_pow(3, *k))),
        );
        assert_eq!(tw, expect);
        let bad = Polynomial::monomial(mono(&r, "V1a_0"), CycNumber::one(3));
        assert!(matches!(r.transfer(&bad), Err(Error::NotAInvariant(_))));

        let u = ring(7, "U1");
        let u3 = Polynomial::monomial(mono(&u, "U1a^3"), CycNumber::one(3));
        assert_eq!(u.transfer(&u3).unwrap(), u3.scale(&CycNumber::from_integer(3, 3)));
    }

    #[test]
    fn r_basis_is_fixed_by_every_group_element() {
        for spec in ["V1", "U1+V1", "U2+V1+V2"] {
            let r = ring(7, spec);
            let g = r.table().group;
            for d in 0..=6 {
                for f in r.graded_basis(Algebra::R, d).elements {
                    for e in g.elements() {
                        assert_eq!(f.act(r.table(), e), f, "{spec} d={d} g={e}");
                    }
                }
            }
        }
    }

    fn element_of_block(r: &InvariantRing, d: u32, coeffs: &[(usize, i64, i64)]) -> Polynomial {
        let ms = r.enumerate_a_invariant(d);
        let mut f = Polynomial::zero(3);
        if ms.is_empty() {
            return f;
        }
        for &(i, a, b) in coeffs {
            let c = &CycNumber::from_integer(3, a) + &(&CycNumber::from_integer(3, b) * &CycNumber::zeta(3));
            f = f.add(&Polynomial::monomial(ms[i % ms.len()].clone(), c)).unwrap();
        }
        f
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn transfer_is_r_linear(
            e in 1u32..5, d in 1u32..5,
            rc in proptest::collection::vec((0usize..50, -3i64..4, -3i64..4), 1..4),
            fc in proptest::collection::vec((0usize..50, -3i64..4, -3i64..4), 1..4),
        ) {
            let r = ring(7, "U1+V1");
            let x = element_of_block(&r, e, &rc);
            let rr = r.transfer(&x).unwrap();
            let f = element_of_block(&r, d, &fc);
            let lhs = r.transfer(&rr.mul(&f).unwrap()).unwrap();
            let rhs = rr.mul(&r.transfer(&f).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn twisted_transfer_is_relative_invariant(
            d in 1u32..7, j in 0u8..3,
            fc in proptest::collection::vec((0usize..80, -3i64..4, -3i64..4), 1..5),
        ) {
            let r = ring(7, "U2+V1");
            let f = element_of_block(&r, d, &fc);
            let t = r.twisted_transfer(&f, j).unwrap();
            let g = r.table().group;
            prop_assert_eq!(t.act(r.table(), g.d()), t.scale(&CycNumber::zeta_pow(3, j as i64)));
            prop_assert_eq!(t.act(r.table(), GroupElement { a: 3, b: 0 }), t.clone());
        }
    }
}

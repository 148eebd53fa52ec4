//! The group `G = Z_p ⋊ Z_3 = ⟨c, d : c^p = d^3 = 1, d c d^{-1} = c^r⟩`,
//! its irreducible modules and the monomial action on coordinate variables.
//!
//! Conventions: group elements are written `c^a d^b`. Variables are
//! coordinate functions and `G` acts on them from the right,
//! `x^g(v) = x(g v)`. On an induced summand with orbit `(a, ra, r²a)` the
//! generator `c` scales the variable of weight `θ` by `ζ_p^θ` and `d` moves
//! orbit position `k` to `k + 1`, i.e. weight `θ` to weight `rθ`. On the
//! one-dimensional module `U_j`, `d` acts by `ω^j` and `c` trivially.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cyclo::CycNumber;
use crate::error::{Error, Result};
use crate::modp;

fn is_small_prime(p: u32) -> bool {
    modp::is_prime(p as u64)
}

/// Smallest `r > 1` of multiplicative order 3 modulo `p`.
pub fn find_r(p: u32) -> Result<u32> {
    if !is_small_prime(p) || p < 7 || !(p - 1).is_multiple_of(3) {
        return Err(Error::UnsupportedPrime(p));
    }
    (2..p)
        .find(|&r| modp::pow(r as u64, 3, p as u64) == 1)
        .ok_or(Error::UnsupportedPrime(p))
}

/// The `(p-1)/3` orbits of multiplication by `r` on `Z_p \ {0}`, each listed
/// as `(a, ra, r²a)` with `a` its smallest member, sorted by `a`.
pub fn orbits(p: u32, r: u32) -> Vec<[u32; 3]> {
    let mut seen = vec![false; p as usize];
    let mut out = Vec::new();
    for a in 1..p {
        if seen[a as usize] {
            continue;
        }
        let b = (a as u64 * r as u64 % p as u64) as u32;
        let c = (b as u64 * r as u64 % p as u64) as u32;
        for x in [a, b, c] {
            seen[x as usize] = true;
        }
        out.push([a, b, c]);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub p: u32,
    pub q: u32,
    pub r: u32,
}

/// The element `c^a d^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub a: u32,
    pub b: u32,
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.b) {
            (0, 0) => write!(f, "1"),
            (a, 0) => write!(f, "c^{a}"),
            (0, b) => write!(f, "d^{b}"),
            (a, b) => write!(f, "c^{a}d^{b}"),
        }
    }
}

impl GroupSpec {
    pub fn new(p: u32) -> Result<Self> {
        Ok(GroupSpec { p, q: 3, r: find_r(p)? })
    }

    pub fn with_r(p: u32, r: u32) -> Result<Self> {
        find_r(p)?;
        let rr = r % p;
        if rr <= 1 || modp::pow(rr as u64, 3, p as u64) != 1 {
            return Err(Error::InvalidR { p, r });
        }
        Ok(GroupSpec { p, q: 3, r: rr })
    }

    pub fn order(&self) -> u32 {
        self.q * self.p
    }

    /// Number `l = (p-1)/3` of three-dimensional irreducibles.
    pub fn num_orbits(&self) -> u32 {
        (self.p - 1) / 3
    }

    pub fn orbits(&self) -> Vec<[u32; 3]> {
        orbits(self.p, self.r)
    }

    /// 1-based index of the orbit containing a non-zero weight.
    pub fn orbit_index(&self, weight: u32) -> Option<u32> {
        let w = weight % self.p;
        self.orbits().iter().position(|o| o.contains(&w)).map(|i| i as u32 + 1)
    }

    pub fn r_pow(&self, b: u32) -> u32 {
        modp::pow(self.r as u64, (b % 3) as u64, self.p as u64) as u32
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { a: 0, b: 0 }
    }

    pub fn c(&self) -> GroupElement {
        GroupElement { a: 1, b: 0 }
    }

    pub fn d(&self) -> GroupElement {
        GroupElement { a: 0, b: 1 }
    }

    pub fn element(&self, a: i64, b: i64) -> GroupElement {
        GroupElement { a: a.rem_euclid(self.p as i64) as u32, b: b.rem_euclid(3) as u32 }
    }

    /// All `3p` elements, ordered by `(b, a)`.
    pub fn elements(&self) -> Vec<GroupElement> {
        (0..3).flat_map(|b| (0..self.p).map(move |a| GroupElement { a, b })).collect()
    }

    /// `(c^{a1} d^{b1})(c^{a2} d^{b2}) = c^{a1 + a2 r^{b1}} d^{b1 + b2}`.
    pub fn mul(&self, g: GroupElement, h: GroupElement) -> GroupElement {
        let p = self.p as u64;
        let a = (g.a as u64 + h.a as u64 * self.r_pow(g.b) as u64) % p;
        GroupElement { a: a as u32, b: (g.b + h.b) % 3 }
    }

    pub fn inverse(&self, g: GroupElement) -> GroupElement {
        let nb = (3 - g.b) % 3;
        let p = self.p as u64;
        let a = (p - g.a as u64 % p) % p * self.r_pow(nb) as u64 % p;
        GroupElement { a: a as u32, b: nb }
    }

    pub fn pow(&self, g: GroupElement, e: u32) -> GroupElement {
        (0..e).fold(self.identity(), |acc, _| self.mul(acc, g))
    }
}

/// Irreducible `G`-module label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IrreducibleLabel {
    /// `U_j`: `A` acts trivially, `d` by `ω^j`.
    OneDim(u8),
    /// `V_i`: induced from a character in the `i`-th orbit (1-based).
    Induced(u32),
}

impl IrreducibleLabel {
    pub fn dim(&self) -> usize {
        match self {
            IrreducibleLabel::OneDim(_) => 1,
            IrreducibleLabel::Induced(_) => 3,
        }
    }

    pub fn validate(&self, g: &GroupSpec) -> Result<()> {
        match *self {
            IrreducibleLabel::OneDim(j) if j < 3 => Ok(()),
            IrreducibleLabel::Induced(i) if i >= 1 && i <= g.num_orbits() => Ok(()),
            _ => Err(Error::InvalidLabel(self.to_string())),
        }
    }
}

impl fmt::Display for IrreducibleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrreducibleLabel::OneDim(j) => write!(f, "U{j}"),
            IrreducibleLabel::Induced(i) => write!(f, "V{i}"),
        }
    }
}

/// A direct sum of irreducibles with multiplicities, in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub summands: Vec<(IrreducibleLabel, u32)>,
}

impl ModuleSpec {
    pub fn new(summands: Vec<(IrreducibleLabel, u32)>) -> Self {
        ModuleSpec { summands }
    }

    pub fn dim(&self) -> usize {
        self.summands.iter().map(|(l, m)| l.dim() * *m as usize).sum()
    }

    pub fn validate(&self, g: &GroupSpec) -> Result<()> {
        for (l, m) in &self.summands {
            l.validate(g)?;
            if *m == 0 {
                return Err(Error::InvalidLabel(format!("0*{l}")));
            }
        }
        Ok(())
    }

    pub fn has_one_dim(&self) -> bool {
        self.summands.iter().any(|(l, _)| matches!(l, IrreducibleLabel::OneDim(_)))
    }

    /// `V_1 ⊕ ... ⊕ V_l` with the given multiplicity per summand.
    pub fn all_induced(g: &GroupSpec, mult: u32) -> Self {
        ModuleSpec::new((1..=g.num_orbits()).map(|i| (IrreducibleLabel::Induced(i), mult)).collect())
    }

    /// Every irreducible exactly once: `U0 + U1 + U2 + V1 + ... + Vl`.
    pub fn multiplicity_free_all(g: &GroupSpec) -> Self {
        let mut s: Vec<_> = (0..3).map(|j| (IrreducibleLabel::OneDim(j), 1)).collect();
        s.extend((1..=g.num_orbits()).map(|i| (IrreducibleLabel::Induced(i), 1)));
        ModuleSpec::new(s)
    }
}

impl fmt::Display for ModuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (l, m)) in self.summands.iter().enumerate() {
            if k > 0 {
                write!(f, "+")?;
            }
            if *m != 1 {
                write!(f, "{m}*")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor {
            chars: src.char_indices().filter(|(_, c)| !c.is_whitespace()).collect(),
            pos: 0,
            _src: src,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map(|&(i, _)| i).unwrap_or_else(|| {
            self.chars.last().map(|&(i, c)| i + c.len_utf8()).unwrap_or(0)
        })
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.offset(), msg: msg.into() }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<u32> {
        let start = self.pos;
        let mut v: u64 = 0;
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            v = v * 10 + c.to_digit(10).unwrap() as u64;
            if v > u32::MAX as u64 {
                return Err(self.err("integer too large"));
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer"));
        }
        Ok(v as u32)
    }
}

pub(crate) fn parse_error(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

impl FromStr for ModuleSpec {
    type Err = Error;

    /// `SPEC := TERM ("+" TERM)*`, `TERM := [INT "*"] LABEL`,
    /// `LABEL := "U0" | "U1" | "U2" | "V" INT`.
    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s);
        let mut summands = Vec::new();
        loop {
            let mult = if cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                let m = cur.int()?;
                if !cur.eat('*') {
                    return Err(cur.err("expected '*' after multiplicity"));
                }
                if m == 0 {
                    return Err(cur.err("multiplicity must be positive"));
                }
                m
            } else {
                1
            };
            let label = match cur.peek() {
                Some('U') => {
                    cur.pos += 1;
                    let at = cur.offset();
                    let j = cur.int()?;
                    if j > 2 {
                        return Err(parse_error(at, "one-dimensional label must be U0, U1 or U2"));
                    }
                    IrreducibleLabel::OneDim(j as u8)
                }
                Some('V') => {
                    cur.pos += 1;
                    let at = cur.offset();
                    let i = cur.int()?;
                    if i == 0 {
                        return Err(parse_error(at, "induced labels start at V1"));
                    }
                    IrreducibleLabel::Induced(i)
                }
                _ => return Err(cur.err("expected label U0, U1, U2 or V<i>")),
            };
            summands.push((label, mult));
            if cur.peek().is_none() {
                break;
            }
            if !cur.eat('+') {
                return Err(cur.err("expected '+'"));
            }
        }
        Ok(ModuleSpec { summands })
    }
}

/// One coordinate variable of `F[V]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub index: usize,
    pub instance: usize,
    pub label: IrreducibleLabel,
    pub copy: u32,
    /// `A`-weight in `Z_p`.
    pub weight: u32,
    /// `j` for a variable of `U_j` (`d` scales it by `ω^j`), else 0.
    pub b_exponent: u8,
    /// Position 0, 1, 2 inside an induced orbit; 0 for one-dimensional.
    pub orbit_position: u8,
    pub name: String,
}

/// One irreducible summand instance inside a module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub label: IrreducibleLabel,
    pub copy: u32,
    pub vars: Vec<usize>,
}

/// A root of unity `ζ_{3p}^e` recorded by its exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    pub exponent: u32,
    pub order: u32,
}

impl RootOfUnity {
    pub fn one(order: u32) -> Self {
        RootOfUnity { exponent: 0, order }
    }

    pub fn mul(self, other: Self) -> Self {
        debug_assert_eq!(self.order, other.order);
        RootOfUnity { exponent: (self.exponent + other.exponent) % self.order, order: self.order }
    }

    pub fn pow(self, e: u32) -> Self {
        RootOfUnity {
            exponent: (self.exponent as u64 * e as u64 % self.order as u64) as u32,
            order: self.order,
        }
    }

    /// Exponent `k` with `self = ω^k`, if the root lies in `Q(ω)`.
    pub fn omega_exponent(self) -> Option<u32> {
        let p = self.order / 3;
        self.exponent.is_multiple_of(p).then_some(self.exponent / p)
    }

    pub fn to_cyc(self) -> CycNumber {
        CycNumber::zeta_pow(self.order, self.exponent as i64)
    }
}

/// The ordered list of `A`-eigenvector variables of a module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableTable {
    pub group: GroupSpec,
    pub module: ModuleSpec,
    pub vars: Vec<Variable>,
    pub instances: Vec<Instance>,
}

impl VariableTable {
    pub fn build(group: &GroupSpec, module: &ModuleSpec) -> Result<Self> {
        module.validate(group)?;
        let orbits = group.orbits();
        let mut vars = Vec::new();
        let mut instances = Vec::new();
        for &(label, mult) in &module.summands {
            for copy in 1..=mult {
                let inst = instances.len();
                let tag = copy_tag(copy);
                let mut ids = Vec::new();
                match label {
                    IrreducibleLabel::OneDim(j) => {
                        ids.push(vars.len());
                        vars.push(Variable {
                            index: vars.len(),
                            instance: inst,
                            label,
                            copy,
                            weight: 0,
                            b_exponent: j,
                            orbit_position: 0,
                            name: format!("{label}{tag}"),
                        });
                    }
                    IrreducibleLabel::Induced(i) => {
                        let orbit = orbits[i as usize - 1];
                        for (pos, &w) in orbit.iter().enumerate() {
                            ids.push(vars.len());
                            vars.push(Variable {
                                index: vars.len(),
                                instance: inst,
                                label,
                                copy,
                                weight: w,
                                b_exponent: 0,
                                orbit_position: pos as u8,
                                name: format!("{label}{tag}_{pos}"),
                            });
                        }
                    }
                }
                instances.push(Instance { label, copy, vars: ids });
            }
        }
        Ok(VariableTable { group: *group, module: module.clone(), vars, instances })
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn root_order(&self) -> u32 {
        3 * self.group.p
    }

    /// `x^g = s · x'` for the variable `x`; returns `(x', s)`.
    pub fn act_variable(&self, g: GroupElement, var: usize) -> (usize, RootOfUnity) {
        let v = &self.vars[var];
        let p = self.group.p;
        let n = 3 * p;
        match v.label {
            IrreducibleLabel::OneDim(j) => {
                let e = (p as u64 * j as u64 * g.b as u64 % n as u64) as u32;
                (var, RootOfUnity { exponent: e, order: n })
            }
            IrreducibleLabel::Induced(_) => {
                let e = (3 * (g.a as u64 * v.weight as u64 % p as u64) % n as u64) as u32;
                let inst = &self.instances[v.instance];
                let target = inst.vars[(v.orbit_position as usize + g.b as usize) % 3];
                (target, RootOfUnity { exponent: e, order: n })
            }
        }
    }

    /// The monomial matrix of `g` acting on variables: entry `k` is
    /// `(π(k), s_k)` with `x_k^g = s_k x_{π(k)}`.
    pub fn action_matrix(&self, g: GroupElement) -> MonomialMatrix {
        MonomialMatrix { entries: (0..self.len()).map(|k| self.act_variable(g, k)).collect() }
    }
}

fn copy_tag(copy: u32) -> String {
    let mut c = copy - 1;
    let mut s = String::new();
    loop {
        s.insert(0, (b'a' + (c % 26) as u8) as char);
        if c < 26 {
            break;
        }
        c = c / 26 - 1;
    }
    s
}

/// A monomial matrix acting on variables from the right.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialMatrix {
    pub entries: Vec<(usize, RootOfUnity)>,
}

impl MonomialMatrix {
    /// `x^{gh} = (x^g)^h`.
    pub fn then(&self, h: &MonomialMatrix) -> MonomialMatrix {
        MonomialMatrix {
            entries: self
                .entries
                .iter()
                .map(|&(t, s)| {
                    let (t2, s2) = h.entries[t];
                    (t2, s.mul(s2))
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn find_r_examples() {
        assert_eq!(find_r(7).unwrap(), 2);
        assert_eq!(find_r(13).unwrap(), 3);
        assert_eq!(find_r(31).unwrap(), 5);
        assert_eq!(find_r(11), Err(Error::UnsupportedPrime(11)));
        assert_eq!(find_r(21), Err(Error::UnsupportedPrime(21)));
    }

    #[test]
    fn orbit_examples() {
        assert_eq!(orbits(7, 2), vec![[1, 2, 4], [3, 6, 5]]);
        assert_eq!(orbits(13, 3), vec![[1, 3, 9], [2, 6, 5], [4, 12, 10], [7, 8, 11]]);
        assert_eq!(orbits(31, 5).len(), 10);
    }

    #[test]
    fn orbits_partition_nonzero_residues() {
        for p in [7u32, 13, 19, 31, 37, 43] {
            let g = GroupSpec::new(p).unwrap();
            let mut all: Vec<u32> = g.orbits().iter().flatten().copied().collect();
            for o in g.orbits() {
                for &x in &o {
                    assert!(o.contains(&(x * g.r % p)));
                }
            }
            all.sort();
            assert_eq!(all, (1..p).collect::<Vec<_>>());
        }
    }

    #[test]
    fn with_r_accepts_the_other_generator() {
        assert_eq!(GroupSpec::with_r(7, 4).unwrap().r, 4);
        assert!(GroupSpec::with_r(7, 3).is_err());
    }

    #[test]
    fn module_spec_grammar() {
        let m: ModuleSpec = "U1 + 2*V1+2 * V2".parse().unwrap();
        assert_eq!(m.to_string(), "U1+2*V1+2*V2");
        assert_eq!(m.dim(), 13);
        let e = "U1+3V1".parse::<ModuleSpec>().unwrap_err();
        assert!(matches!(e, Error::Parse { pos: 4, .. }), "{e:?}");
        assert!("U3".parse::<ModuleSpec>().is_err());
        assert!("V0".parse::<ModuleSpec>().is_err());
        assert!("".parse::<ModuleSpec>().is_err());
        let g = GroupSpec::new(7).unwrap();
        assert!("V3".parse::<ModuleSpec>().unwrap().validate(&g).is_err());
    }

    #[test]
    fn variable_table_examples() {
        let g = GroupSpec::new(7).unwrap();
        let t = VariableTable::build(&g, &"V1".parse().unwrap()).unwrap();
        assert_eq!(t.vars.iter().map(|v| v.weight).collect::<Vec<_>>(), vec![1, 2, 4]);
        let t = VariableTable::build(&g, &"U1".parse().unwrap()).unwrap();
        assert_eq!(t.vars[0].weight, 0);
        let (to, s) = t.act_variable(g.d(), 0);
        assert_eq!(to, 0);
        assert_eq!(s.to_cyc(), CycNumber::zeta(3).embed(21).unwrap());
        let t = VariableTable::build(&g, &"2*V1+2*V2".parse().unwrap()).unwrap();
        assert_eq!(t.len(), 12);
        assert_eq!(t.vars[6..9].iter().map(|v| v.weight).collect::<Vec<_>>(), vec![3, 6, 5]);
        assert_eq!(t.vars[9..12].iter().map(|v| v.weight).collect::<Vec<_>>(), vec![3, 6, 5]);
    }

    #[test]
    fn d_moves_weight_theta_to_r_theta() {
        let g = GroupSpec::new(7).unwrap();
        let t = VariableTable::build(&g, &"V1".parse().unwrap()).unwrap();
        let (to, s) = t.act_variable(g.d(), 0);
        assert_eq!((to, s.exponent), (1, 0));
        assert_eq!(t.vars[to].weight, 2);
    }

    #[test]
    fn group_law() {
        for p in [7, 13] {
            let g = GroupSpec::new(p).unwrap();
            let els = g.elements();
            assert_eq!(els.len() as u32, 3 * p);
            for &x in &els {
                assert_eq!(g.mul(x, g.inverse(x)), g.identity());
                for &y in els.iter().step_by(5) {
                    for &z in els.iter().step_by(7) {
                        assert_eq!(g.mul(g.mul(x, y), z), g.mul(x, g.mul(y, z)));
                    }
                }
            }
            let lhs = g.mul(g.mul(g.d(), g.c()), g.inverse(g.d()));
            assert_eq!(lhs, g.pow(g.c(), g.r));
        }
    }

    #[test]
    fn action_is_a_representation_of_the_presentation() {
        for p in [7, 13] {
            let g = GroupSpec::new(p).unwrap();
            let m = ModuleSpec::multiplicity_free_all(&g);
            let t = VariableTable::build(&g, &m).unwrap();
            let c = t.action_matrix(g.c());
            let d = t.action_matrix(g.d());
            let d_inv = t.action_matrix(g.inverse(g.d()));
            let id = t.action_matrix(g.identity());
            let pow = |m: &MonomialMatrix, e: u32| (0..e).fold(id.clone(), |acc, _| acc.then(m));
            assert_eq!(pow(&c, p), id);
            assert_eq!(pow(&d, 3), id);
            assert_eq!(d.then(&c).then(&d_inv), pow(&c, g.r));
            // matrices agree with the element multiplication law
            for x in g.elements() {
                for y in g.elements().into_iter().step_by(4) {
                    let lhs = t.action_matrix(g.mul(x, y));
                    assert_eq!(lhs, t.action_matrix(x).then(&t.action_matrix(y)));
                }
            }
            // closure of {c, d} has exactly 3p elements
            let mut seen: HashSet<MonomialMatrix> = HashSet::new();
            let mut frontier = vec![id.clone()];
            seen.insert(id);
            while let Some(m) = frontier.pop() {
                for gen in [&c, &d] {
                    let n = m.then(gen);
                    if seen.insert(n.clone()) {
                        frontier.push(n);
                    }
                }
            }
            assert_eq!(seen.len() as u32, 3 * p);
        }
    }

    #[test]
    fn copy_tags() {
        assert_eq!(copy_tag(1), "a");
        assert_eq!(copy_tag(26), "z");
        assert_eq!(copy_tag(27), "aa");
    }
}

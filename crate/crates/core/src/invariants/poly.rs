use std::collections::BTreeMap;

use num_integer::Integer;

use super::Monomial;
use crate::cyclo::CycNumber;
use crate::error::{Error, Result};
use crate::group::{GroupElement, VariableTable};

/// Sparse polynomial with coefficients in a single cyclotomic field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    conductor: u32,
    terms: BTreeMap<Monomial, CycNumber>,
}

impl Polynomial {
    pub fn zero(conductor: u32) -> Self {
        Polynomial { conductor, terms: BTreeMap::new() }
    }

    pub fn monomial(m: Monomial, c: CycNumber) -> Self {
        let n = c.conductor();
        Self::from_terms(n, std::iter::once((m, c)))
    }

    /// Sums the given terms; every coefficient must embed into `conductor`.
    pub fn from_terms(conductor: u32, terms: impl IntoIterator<Item = (Monomial, CycNumber)>) -> Self {
        let mut out: BTreeMap<Monomial, CycNumber> = BTreeMap::new();
        for (m, c) in terms {
            let c = c.embed(conductor).expect("coefficient conductor divides target");
            match out.get_mut(&m) {
                Some(e) => *e = &*e + &c,
                None => {
                    out.insert(m, c);
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        Polynomial { conductor, terms: out }
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, CycNumber> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut it = self.terms.keys().map(|m| m.degree());
        match it.next() {
            None => true,
            Some(d) => it.all(|e| e == d),
        }
    }

    /// Degree of a non-zero homogeneous polynomial.
    pub fn degree(&self) -> Result<Option<u32>> {
        if !self.is_homogeneous() {
            return Err(Error::Inhomogeneous);
        }
        Ok(self.terms.keys().next().map(|m| m.degree()))
    }

    pub fn coefficient(&self, m: &Monomial) -> CycNumber {
        self.terms.get(m).cloned().unwrap_or_else(|| CycNumber::zero(self.conductor))
    }

    pub fn embed(&self, n: u32) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            terms.insert(m.clone(), c.embed(n)?);
        }
        Ok(Polynomial { conductor: n, terms })
    }

    fn common(&self, other: &Self) -> Result<(Self, Self)> {
        let n = self.conductor.lcm(&other.conductor);
        Ok((self.embed(n)?, other.embed(n)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (mut a, b) = self.common(other)?;
        for (m, c) in b.terms {
            let v = match a.terms.get(&m) {
                Some(e) => e + &c,
                None => c,
            };
            if v.is_zero() {
                a.terms.remove(&m);
            } else {
                a.terms.insert(m, v);
            }
        }
        Ok(a)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&CycNumber::from_integer(other.conductor, -1)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common(other)?;
        let n = a.conductor;
        let mut out = Polynomial::zero(n);
        for (m1, c1) in &a.terms {
            for (m2, c2) in &b.terms {
                let m = m1.mul(m2);
                let v = c1 * c2;
                let e = out.terms.entry(m).or_insert_with(|| CycNumber::zero(n));
                *e = &*e + &v;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Multiplies by a scalar, moving to the common conductor.
    pub fn scale(&self, c: &CycNumber) -> Self {
        let n = self.conductor.lcm(&c.conductor());
        let c = c.embed(n).expect("lcm is a multiple");
        let terms = self
            .terms
            .iter()
            .map(|(m, a)| (m.clone(), &a.embed(n).expect("lcm is a multiple") * &c))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        Polynomial { conductor: n, terms }
    }

    /// `f^g` under the right action on variables. Stays in `Q(ω)` when
    /// every scalar that occurs is a power of `ω`.
    pub fn act(&self, table: &VariableTable, g: GroupElement) -> Self {
        let mat = table.action_matrix(g);
        let order = table.root_order();
        let mut images = Vec::with_capacity(self.terms.len());
        let mut in_omega = true;
        for (m, c) in &self.terms {
            let mut out = Monomial::one(m.0.len());
            let mut exp = 0u64;
            for (k, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let (t, s) = mat.entries[k];
                    out.0[t] += e;
                    exp += s.exponent as u64 * e as u64;
                }
            }
            let exp = (exp % order as u64) as u32;
            in_omega &= exp.is_multiple_of(order / 3);
            images.push((out, exp, c));
        }
        let n = if in_omega && 3 % self.conductor == 0 { 3 } else { self.conductor.lcm(&order) };
        Polynomial::from_terms(
            n,
            images.into_iter().map(|(m, exp, c)| {
                let k = if n == 3 { exp / (order / 3) } else { exp * (n / order) };
                (m, c.embed(n).unwrap().mul_zeta_pow(k as i64))
            }),
        )
    }

    /// Exact value at a point; coordinates may have any conductors.
    pub fn evaluate(&self, point: &[CycNumber]) -> Result<CycNumber> {
        let n = point.iter().fold(self.conductor, |acc, c| acc.lcm(&c.conductor()));
        let coords: Vec<CycNumber> = point.iter().map(|c| c.embed(n)).collect::<Result<_>>()?;
        let mut powers: Vec<Vec<CycNumber>> = coords.iter().map(|c| vec![CycNumber::one(n), c.clone()]).collect();
        let mut acc = CycNumber::zero(n);
        for (m, c) in &self.terms {
            if m.0.len() != coords.len() {
                return Err(Error::DimensionMismatch(m.0.len(), coords.len()));
            }
            let mut v = c.embed(n)?;
            for (k, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[k].len() <= e as usize {
                    let next = powers[k].last().unwrap() * &coords[k];
                    powers[k].push(next);
                }
                v = &v * &powers[k][e as usize];
                if v.is_zero() {
                    break;
                }
            }
            acc = &acc + &v;
        }
        Ok(acc)
    }

    pub fn display(&self, table: &VariableTable) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let ring_names: Vec<&str> = table.vars.iter().map(|v| v.name.as_str()).collect();
        self.terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let mono: Vec<String> = m
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(k, &e)| if e == 1 { ring_names[k].to_string() } else { format!("{}^{e}", ring_names[k]) })
                    .collect();
                let mono = if mono.is_empty() { "1".to_string() } else { mono.join("*") };
                format!("({c})*{mono}")
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

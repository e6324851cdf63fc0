use std::ops::{Add, Mul, Neg, Sub};

use crate::fieldcore::Fe;

const WITNESS_BIT: u32 = 1 << 31;

/// A circuit variable: public variables and witness variables have separate index spaces.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Variable(u32);

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Visibility {
    Public,
    Witness,
}

impl Variable {
    pub fn public(i: usize) -> Self {
        Variable(i as u32)
    }

    pub fn witness(i: usize) -> Self {
        Variable(i as u32 | WITNESS_BIT)
    }

    pub fn is_public(&self) -> bool {
        self.0 & WITNESS_BIT == 0
    }

    pub fn visibility(&self) -> Visibility {
        if self.is_public() {
            Visibility::Public
        } else {
            Visibility::Witness
        }
    }

    /// Index within its own partition.
    pub fn index(&self) -> usize {
        (self.0 & !WITNESS_BIT) as usize
    }

    /// Position inside a full assignment (public prefix, witness suffix).
    pub fn flat_index(&self, num_public: usize) -> usize {
        if self.is_public() {
            self.index()
        } else {
            num_public + self.index()
        }
    }
}

/// Σ coeff·var + constant.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearCombination {
    pub terms: Vec<(Variable, Fe)>,
    pub constant: Fe,
}

pub type Lc = LinearCombination;

impl LinearCombination {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Fe) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn constant_u64(c: u64) -> Self {
        Self::constant(Fe::from_u64(c))
    }

    pub fn one() -> Self {
        Self::constant(Fe::ONE)
    }

    pub fn term(v: Variable, c: Fe) -> Self {
        Self { terms: vec![(v, c)], constant: Fe::ZERO }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, v: Variable, c: Fe) {
        self.terms.push((v, c));
    }

    pub fn add_scaled(&mut self, other: &Lc, k: Fe) {
        if k.is_zero() {
            return;
        }
        if k.is_one() {
            self.terms.extend_from_slice(&other.terms);
            self.constant += other.constant;
        } else {
            self.terms.extend(other.terms.iter().map(|&(v, c)| (v, c * k)));
            self.constant += other.constant * k;
        }
    }

    pub fn scale(mut self, k: Fe) -> Self {
        for t in self.terms.iter_mut() {
            t.1 *= k;
        }
        self.constant *= k;
        self
    }

    /// Sorts terms, merges duplicates and drops zero coefficients.
    pub fn normalize(&mut self) {
        if self.terms.len() < 2 {
            self.terms.retain(|t| !t.1.is_zero());
            return;
        }
        self.terms.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(Variable, Fe)> = Vec::with_capacity(self.terms.len());
        for &(v, c) in self.terms.iter() {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => out.push((v, c)),
            }
        }
        out.retain(|t| !t.1.is_zero());
        self.terms = out;
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    #[inline]
    pub fn eval(&self, public: &[Fe], witness: &[Fe]) -> Fe {
        let mut acc = self.constant;
        for &(v, c) in self.terms.iter() {
            let x = if v.is_public() { public[v.index()] } else { witness[v.index()] };
            if x.is_zero() {
                continue;
            }
            if x.is_one() {
                acc += c;
            } else if c.is_one() {
                acc += x;
            } else {
                acc += c * x;
            }
        }
        acc
    }
}

impl From<Variable> for LinearCombination {
    fn from(v: Variable) -> Self {
        Self::term(v, Fe::ONE)
    }
}

impl From<&Variable> for LinearCombination {
    fn from(v: &Variable) -> Self {
        Self::term(*v, Fe::ONE)
    }
}

impl From<Fe> for LinearCombination {
    fn from(c: Fe) -> Self {
        Self::constant(c)
    }
}

impl Add<&Lc> for Lc {
    type Output = Lc;
    fn add(mut self, rhs: &Lc) -> Lc {
        self.add_scaled(rhs, Fe::ONE);
        self
    }
}

impl Add<Lc> for Lc {
    type Output = Lc;
    fn add(self, rhs: Lc) -> Lc {
        self + &rhs
    }
}

impl Sub<&Lc> for Lc {
    type Output = Lc;
    fn sub(mut self, rhs: &Lc) -> Lc {
        self.add_scaled(rhs, -Fe::ONE);
        self
    }
}

impl Sub<Lc> for Lc {
    type Output = Lc;
    fn sub(self, rhs: Lc) -> Lc {
        self - &rhs
    }
}

impl Add<Variable> for Lc {
    type Output = Lc;
    fn add(mut self, rhs: Variable) -> Lc {
        self.push(rhs, Fe::ONE);
        self
    }
}

impl Sub<Variable> for Lc {
    type Output = Lc;
    fn sub(mut self, rhs: Variable) -> Lc {
        self.push(rhs, -Fe::ONE);
        self
    }
}

impl Add<Fe> for Lc {
    type Output = Lc;
    fn add(mut self, rhs: Fe) -> Lc {
        self.constant += rhs;
        self
    }
}

impl Sub<Fe> for Lc {
    type Output = Lc;
    fn sub(mut self, rhs: Fe) -> Lc {
        self.constant -= rhs;
        self
    }
}

impl Mul<Fe> for Lc {
    type Output = Lc;
    fn mul(self, rhs: Fe) -> Lc {
        self.scale(rhs)
    }
}

impl Neg for Lc {
    type Output = Lc;
    fn neg(self) -> Lc {
        self.scale(-Fe::ONE)
    }
}

//! Sparse multivariate polynomials over `Q` in lexicographic order.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Rational;

/// Exponent vector. The derived `Ord` compares exponents of the first
/// variable first, which is exactly lex order with the first variable largest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn variable(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn from_exponents(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, if `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        self.divides(other)
            .then(|| Monomial(other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect()))
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(&a, &b)| a.max(b)).collect())
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| a == 0 || b == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Shared variable names; index 0 is the largest variable in lex order.
pub type VarOrder = Arc<[String]>;

pub fn var_order<S: AsRef<str>>(names: &[S]) -> VarOrder {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

/// A polynomial with nonzero rational coefficients keyed by monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    vars: VarOrder,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(vars: &VarOrder) -> Self {
        Self {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &VarOrder, c: Rational) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(Monomial::one(vars.len()), c);
        p
    }

    pub fn one(vars: &VarOrder) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn variable(vars: &VarOrder, index: usize) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(Monomial::variable(vars.len(), index), Rational::one());
        p
    }

    pub fn from_terms<I>(vars: &VarOrder, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.0.len(), vars.len(), "monomial arity");
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &VarOrder {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn same_ring(&self, other: &Polynomial) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero constant.
    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1 && self.terms.keys().next().is_some_and(Monomial::is_one)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in decreasing lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.last_key_value()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.last_key_value().map(|(m, _)| m)
    }

    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.last_key_value().map(|(_, c)| c)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Degree in one variable.
    pub fn degree_in(&self, index: usize) -> u32 {
        self.terms.keys().map(|m| m.0[index]).max().unwrap_or(0)
    }

    /// True when every term involves only the variable at `index`.
    pub fn is_univariate_in(&self, index: usize) -> bool {
        self.terms
            .keys()
            .all(|m| m.0.iter().enumerate().all(|(k, &e)| k == index || e == 0))
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self -= coeff * shift * other`, the elementary reduction step.
    pub fn sub_scaled_shifted(&mut self, coeff: &Rational, shift: &Monomial, other: &Polynomial) {
        for (m, c) in &other.terms {
            let key = m.mul(shift);
            let delta = coeff * c;
            match self.terms.entry(key) {
                Entry::Vacant(v) => {
                    v.insert(-delta);
                }
                Entry::Occupied(mut o) => {
                    *o.get_mut() -= delta;
                    if o.get().is_zero() {
                        o.remove();
                    }
                }
            }
        }
    }

    /// Like [`Self::sub_scaled_shifted`] but skips `other`'s leading term.
    pub fn sub_scaled_shifted_tail(&mut self, coeff: &Rational, shift: &Monomial, other: &Polynomial) {
        for (m, c) in other.terms.iter().rev().skip(1) {
            let key = m.mul(shift);
            let delta = coeff * c;
            match self.terms.entry(key) {
                Entry::Vacant(v) => {
                    v.insert(-delta);
                }
                Entry::Occupied(mut o) => {
                    *o.get_mut() -= delta;
                    if o.get().is_zero() {
                        o.remove();
                    }
                }
            }
        }
    }

    pub fn pop_leading(&mut self) -> Option<(Monomial, Rational)> {
        self.terms.pop_last()
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, x)| (k.mul(m), x * c)).collect(),
        }
    }

    /// Divides through by the leading coefficient. Zero stays zero.
    pub fn monic(&self) -> Polynomial {
        match self.leading_coefficient() {
            Some(lc) if !lc.is_one() => self.scale(&lc.recip()),
            _ => self.clone(),
        }
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars());
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn evaluate_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars());
        self.terms
            .iter()
            .map(|(m, c)| {
                let c = c.to_f64().unwrap_or(f64::NAN);
                m.0.iter().zip(point).fold(c, |acc, (&e, x)| acc * x.powi(e as i32))
            })
            .sum()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert!(self.same_ring(rhs));
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert!(self.same_ring(rhs));
        let mut out = self.clone();
        out.sub_scaled_shifted(&Rational::one(), &Monomial::one(self.nvars()), rhs);
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert!(self.same_ring(rhs));
        let mut out = Polynomial::zero(&self.vars);
        for (m, c) in &rhs.terms {
            out.sub_scaled_shifted(&-c, m, self);
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let abs = c.abs();
            let mut factors = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for (name, &e) in self.vars.iter().zip(&m.0) {
                match e {
                    0 => {}
                    1 => factors.push(name.clone()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn lex_order_on_monomials() {
        let x = Monomial::from_exponents(vec![1, 0]);
        let y2 = Monomial::from_exponents(vec![0, 2]);
        let xy = Monomial::from_exponents(vec![1, 1]);
        assert!(x > y2);
        assert!(xy > x);
        assert_eq!(x.lcm(&y2), Monomial::from_exponents(vec![1, 2]));
        assert!(x.is_coprime(&y2));
        assert_eq!(x.quotient_of(&xy), Some(Monomial::from_exponents(vec![0, 1])));
        assert_eq!(xy.quotient_of(&x), None);
    }

    #[test]
    fn arithmetic_and_display() {
        let vars = var_order(&["x", "y"]);
        let x = Polynomial::variable(&vars, 0);
        let y = Polynomial::variable(&vars, 1);
        let one = Polynomial::one(&vars);
        let p = &(&x + &y) * &(&x - &y);
        assert_eq!(p.to_string(), "x^2 - y^2");
        let p = &p - &(&x * &x);
        assert_eq!(p.to_string(), "-y^2");
        assert!((&one - &one).is_zero());
        let h = Polynomial::from_terms(
            &vars,
            [(Monomial::one(2), q(-3, 4)), (Monomial::variable(2, 1), q(2, 1))],
        );
        assert_eq!(h.to_string(), "2*y - 3/4");
        assert_eq!(h.monic().to_string(), "y - 3/8");
        assert_eq!(h.evaluate(&[q(5, 1), q(3, 8)]), q(0, 1));
        assert!((h.evaluate_f64(&[0.0, 0.375])).abs() < 1e-15);
        assert_eq!(h.total_degree(), 1);
        assert!(h.is_univariate_in(1));
        assert!(!p.is_unit() && Polynomial::constant(&vars, q(7, 1)).is_unit());
    }
}

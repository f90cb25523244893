//! Buchberger's algorithm for reduced lex Gröbner bases over `Q`.
//!
//! Pairs are taken lowest-degree lcm first (the normal strategy); a pair is
//! skipped when its leading monomials are coprime or when the chain
//! criterion applies. Every new basis element is made monic.

use std::collections::HashSet;

use num_traits::One;

use super::poly::{Polynomial, VarOrder};
use crate::error::{Error, Result};

/// Caps that turn runaway computations into [`Error::ResourceLimit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroebnerLimits {
    /// Total terms stored across basis elements, and per intermediate remainder.
    pub max_terms: usize,
    /// S-pairs taken from the queue.
    pub max_pairs: usize,
}

impl Default for GroebnerLimits {
    fn default() -> Self {
        Self {
            max_terms: 1_000_000,
            max_pairs: 100_000,
        }
    }
}

/// Reduced, monic lex Gröbner basis, sorted by decreasing leading monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroebnerBasis {
    vars: VarOrder,
    polys: Vec<Polynomial>,
}

impl GroebnerBasis {
    pub fn vars(&self) -> &VarOrder {
        &self.vars
    }

    pub fn polynomials(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// The basis `{1}`.
    pub fn is_unit(&self) -> bool {
        self.polys.len() == 1 && self.polys[0].is_unit()
    }

    /// Every element monic and no leading monomial divides a monomial of
    /// another element.
    pub fn is_reduced(&self) -> bool {
        for (i, g) in self.polys.iter().enumerate() {
            if g.leading_coefficient().is_none_or(|c| !c.is_one()) {
                return false;
            }
            let lm = g.leading_monomial().unwrap();
            for (k, h) in self.polys.iter().enumerate() {
                if k != i && h.terms().any(|(m, _)| lm.divides(m)) {
                    return false;
                }
            }
        }
        true
    }

    /// Buchberger's criterion: all S-polynomials reduce to zero.
    pub fn s_pairs_reduce_to_zero(&self) -> bool {
        for i in 0..self.polys.len() {
            for j in i + 1..self.polys.len() {
                let s = s_polynomial(&self.polys[i], &self.polys[j]);
                if !reduce(&s, &self.polys).is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// `lcm/LT(f) * f - lcm/LT(g) * g`.
pub fn s_polynomial(f: &Polynomial, g: &Polynomial) -> Polynomial {
    let (fm, fc) = f.leading_term().expect("nonzero f");
    let (gm, gc) = g.leading_term().expect("nonzero g");
    let l = fm.lcm(gm);
    let mut s = f.mul_term(&fm.quotient_of(&l).unwrap(), &fc.recip());
    s.sub_scaled_shifted(&gc.recip(), &gm.quotient_of(&l).unwrap(), g);
    s
}

/// Remainder of full multivariate division of `p` by `divisors`.
pub fn reduce(p: &Polynomial, divisors: &[Polynomial]) -> Polynomial {
    reduce_bounded(p, divisors, usize::MAX).expect("unbounded reduction")
}

fn reduce_bounded(p: &Polynomial, divisors: &[Polynomial], max_terms: usize) -> Result<Polynomial> {
    let mut work = p.clone();
    let mut rem = Polynomial::zero(p.vars());
    while let Some((lm, lc)) = work.pop_leading() {
        let hit = divisors.iter().find_map(|g| {
            let (gm, gc) = g.leading_term()?;
            gm.quotient_of(&lm).map(|q| (q, gc, g))
        });
        match hit {
            Some((shift, gc, g)) => {
                // g's leading term cancels the popped one, so only its tail is subtracted.
                let coeff = if gc.is_one() { lc } else { lc / gc };
                work.sub_scaled_shifted_tail(&coeff, &shift, g);
                if work.len() > max_terms {
                    return Err(Error::ResourceLimit(format!(
                        "intermediate remainder exceeds {max_terms} terms"
                    )));
                }
            }
            None => rem.add_term(lm, lc),
        }
    }
    Ok(rem)
}

/// Remainder of `p` modulo `basis`; zero iff `p` lies in the ideal.
pub fn normal_form(p: &Polynomial, basis: &GroebnerBasis) -> Polynomial {
    assert!(p.vars() == basis.vars(), "variable orders differ");
    reduce(p, &basis.polys)
}

pub fn buchberger(generators: &[Polynomial]) -> Result<GroebnerBasis> {
    buchberger_with_limits(generators, &GroebnerLimits::default())
}

pub fn buchberger_with_limits(generators: &[Polynomial], limits: &GroebnerLimits) -> Result<GroebnerBasis> {
    let vars = generators
        .first()
        .ok_or_else(|| Error::InvalidConfig("no generators".into()))?
        .vars()
        .clone();
    if let Some(p) = generators.iter().find(|p| p.vars() != &vars) {
        return Err(Error::InvalidConfig(format!(
            "generator over {:?} does not match {:?}",
            p.vars(),
            vars
        )));
    }

    let unit = || GroebnerBasis {
        vars: vars.clone(),
        polys: vec![Polynomial::one(&vars)],
    };

    let mut basis: Vec<Polynomial> = Vec::new();
    for g in generators.iter().filter(|g| !g.is_zero()) {
        if g.is_unit() {
            return Ok(unit());
        }
        basis.push(g.monic());
    }
    if basis.is_empty() {
        return Ok(GroebnerBasis { vars, polys: basis });
    }

    let mut pending: Vec<(usize, usize)> = Vec::new();
    let mut pending_set: HashSet<(usize, usize)> = HashSet::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pending.push((i, j));
            pending_set.insert((i, j));
        }
    }

    let mut taken = 0usize;
    while !pending.is_empty() {
        let pos = select_pair(&basis, &pending);
        let (i, j) = pending.swap_remove(pos);
        pending_set.remove(&(i, j));
        taken += 1;
        if taken > limits.max_pairs {
            return Err(Error::ResourceLimit(format!("more than {} S-pairs", limits.max_pairs)));
        }

        let lm_i = basis[i].leading_monomial().unwrap();
        let lm_j = basis[j].leading_monomial().unwrap();
        if lm_i.is_coprime(lm_j) {
            continue;
        }
        let l = lm_i.lcm(lm_j);
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && basis[k].leading_monomial().unwrap().divides(&l)
                && !pending_set.contains(&ordered(i, k))
                && !pending_set.contains(&ordered(j, k))
        });
        if chain {
            continue;
        }

        let s = s_polynomial(&basis[i], &basis[j]);
        let h = reduce_bounded(&s, &basis, limits.max_terms)?;
        if h.is_zero() {
            continue;
        }
        if h.is_unit() {
            return Ok(unit());
        }
        let k = basis.len();
        basis.push(h.monic());
        for i in 0..k {
            pending.push((i, k));
            pending_set.insert((i, k));
        }
        let stored: usize = basis.iter().map(Polynomial::len).sum();
        if stored > limits.max_terms {
            return Err(Error::ResourceLimit(format!(
                "basis holds more than {} terms",
                limits.max_terms
            )));
        }
    }

    Ok(GroebnerBasis {
        polys: interreduce(basis),
        vars,
    })
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Index of the pending pair with the smallest lcm (total degree, then lex).
fn select_pair(basis: &[Polynomial], pending: &[(usize, usize)]) -> usize {
    let key = |&(i, j): &(usize, usize)| {
        let l = basis[i]
            .leading_monomial()
            .unwrap()
            .lcm(basis[j].leading_monomial().unwrap());
        (l.degree(), l, i, j)
    };
    pending
        .iter()
        .enumerate()
        .min_by_key(|(_, p)| key(p))
        .map(|(pos, _)| pos)
        .unwrap()
}

/// Minimalizes and fully interreduces a Gröbner basis.
fn interreduce(mut basis: Vec<Polynomial>) -> Vec<Polynomial> {
    basis.sort_by(|a, b| a.leading_monomial().cmp(&b.leading_monomial()));
    let mut minimal: Vec<Polynomial> = Vec::new();
    for g in basis {
        let lm = g.leading_monomial().unwrap();
        if minimal.iter().any(|h| h.leading_monomial().unwrap().divides(lm)) {
            continue;
        }
        minimal.push(g);
    }
    let mut reduced = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<Polynomial> = minimal
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, p)| p.clone())
            .collect();
        reduced.push(reduce(&minimal[k], &others).monic());
    }
    reduced.sort_by(|a, b| b.leading_monomial().cmp(&a.leading_monomial()));
    reduced
}

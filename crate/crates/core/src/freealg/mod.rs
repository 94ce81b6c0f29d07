//! Multilinear polynomials in noncommuting variables `x1, …, xm`.
//!
//! A multilinear polynomial is a finite sum `Σ_σ α_σ x_{σ(1)} ⋯ x_{σ(m)}`
//! over permutations σ of `{1, …, m}`, so it is represented as a sparse map
//! from [`Permutation`] to a nonzero coefficient. The module provides the
//! text grammar ([`parse`]), the canonical printer ([`std::fmt::Display`]),
//! and the two generator families the rest of the crate is built around:
//! standard polynomials and products of commutators.

mod parse;
mod perm;

pub use parse::parse;
pub use perm::Permutation;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A multilinear polynomial of arity `m` in canonical sparse form: no stored
/// coefficient is zero, and every key is a permutation of `{1, …, m}`.
///
/// The zero polynomial is representable (empty term map); degree analysis and
/// the solver reject it with [`Error::ZeroPolynomial`].
#[derive(Clone, PartialEq, Eq)]
pub struct MultilinearPoly<S: Scalar> {
    arity: usize,
    terms: BTreeMap<Permutation, S>,
}

impl<S: Scalar> MultilinearPoly<S> {
    pub fn zero(arity: usize) -> Self {
        MultilinearPoly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a polynomial from `(permutation, coefficient)` pairs. Duplicate
    /// permutations are summed; zero sums are dropped.
    pub fn from_terms<I>(arity: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Permutation, S)>,
    {
        let mut poly = MultilinearPoly::zero(arity);
        for (perm, coeff) in terms {
            if perm.arity() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: perm.arity(),
                });
            }
            poly.add_term(perm, coeff);
        }
        if poly.arity == 0 && !poly.terms.is_empty() {
            return Err(Error::NotMultilinear(
                "a constant term is not multilinear".into(),
            ));
        }
        Ok(poly)
    }

    fn add_term(&mut self, perm: Permutation, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(perm) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical (lexicographic word) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Permutation, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, perm: &Permutation) -> Option<&S> {
        self.terms.get(perm)
    }

    /// `β⁰ = Σ_σ α_σ`, the sum of all coefficients.
    pub fn coefficient_sum(&self) -> S {
        self.terms
            .values()
            .fold(S::zero(), |acc, c| acc + c.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        let mut out = self.clone();
        for (perm, coeff) in &other.terms {
            out.add_term(perm.clone(), coeff.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &S) -> Self {
        if factor.is_zero() {
            return MultilinearPoly::zero(self.arity);
        }
        MultilinearPoly {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(p, c)| (p.clone(), c.clone() * factor.clone()))
                .collect(),
        }
    }
}

/// The standard polynomial `St_m = Σ_σ sign(σ) x_{σ(1)} ⋯ x_{σ(m)}` with all
/// `m!` terms.
pub fn standard_poly<S: Scalar>(m: usize) -> MultilinearPoly<S> {
    assert!(m >= 1, "standard_poly requires m >= 1");
    let mut terms = BTreeMap::new();
    perm::for_each_permutation(m, |word, sign| {
        let coeff = if sign > 0 { S::one() } else { -S::one() };
        terms.insert(
            Permutation::from_images(word).expect("Heap's algorithm yields permutations"),
            coeff,
        );
    });
    MultilinearPoly { arity: m, terms }
}

/// The expansion of `[x1,x2][x3,x4] ⋯ [x_{2r−1},x_{2r}]`: arity `2r`, `2^r`
/// terms, all coefficients `±1`.
pub fn commutator_product<S: Scalar>(r: usize) -> MultilinearPoly<S> {
    assert!(r >= 1, "commutator_product requires r >= 1");
    let mut words: Vec<(Vec<usize>, bool)> = vec![(Vec::new(), false)];
    for i in 1..=r {
        let (a, b) = (2 * i - 1, 2 * i);
        let mut next = Vec::with_capacity(words.len() * 2);
        for (word, negated) in words {
            let mut forward = word.clone();
            forward.extend([a, b]);
            next.push((forward, negated));
            let mut backward = word;
            backward.extend([b, a]);
            next.push((backward, !negated));
        }
        words = next;
    }
    let terms = words
        .into_iter()
        .map(|(word, negated)| {
            let coeff = if negated { -S::one() } else { S::one() };
            (
                Permutation::from_images(&word).expect("commutator words are permutations"),
                coeff,
            )
        })
        .collect();
    MultilinearPoly { arity: 2 * r, terms }
}

impl<S: Scalar> fmt::Display for MultilinearPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (index, (perm, coeff)) in self.terms.iter().enumerate() {
            let negative = coeff.is_negative();
            if index == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let magnitude = coeff.abs();
            if !magnitude.is_one() {
                write!(f, "{magnitude}*")?;
            }
            for (q, p) in perm.word().enumerate() {
                if q > 0 {
                    write!(f, "*")?;
                }
                write!(f, "x{p}")?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for MultilinearPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultilinearPoly({self})")
    }
}

impl<S: Scalar> FromStr for MultilinearPoly<S> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

//! Sparse polynomials in graded-commutative symbols with exact rational
//! coefficients.
//!
//! Symbols carry a parity; odd symbols anticommute and square to zero, and
//! every product is brought to a canonical sorted form with the Koszul sign
//! absorbed into the coefficient. Both the differential ring of the
//! hierarchy and the coordinate rings of finite-dimensional BV spaces are
//! instances of [`Poly`] over different symbol types.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn of_degree(d: i64) -> Parity {
        if d.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// A generator of a graded-commutative ring. The `Ord` instance fixes the
/// canonical monomial order.
pub trait Symbol: Clone + Ord + Eq + fmt::Debug {
    fn parity(&self) -> Parity;
}

/// Sorted factor list with multiplicities. Odd symbols always carry
/// multiplicity one.
pub type FactorList<S> = Vec<(S, u32)>;

fn factors_parity<S: Symbol>(factors: &FactorList<S>) -> Parity {
    let odd = factors
        .iter()
        .filter(|(s, _)| s.parity() == Parity::Odd)
        .count();
    Parity::of_degree(odd as i64)
}

/// Merge two canonical factor lists, returning the merged list and the
/// Koszul sign, or `None` when an odd symbol repeats.
fn merge_factors<S: Symbol>(a: &FactorList<S>, b: &FactorList<S>) -> Option<(FactorList<S>, i32)> {
    let mut out: FactorList<S> = Vec::with_capacity(a.len() + b.len());
    let mut sign = 1i32;
    // Odd factors of `a` not yet emitted; an odd factor of `b` emitted now
    // must jump over all of them.
    let mut odd_left: u32 = a
        .iter()
        .filter(|(s, _)| s.parity() == Parity::Odd)
        .count() as u32;
    let mut i = 0;
    let mut j = 0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                if a[i].0.parity() == Parity::Odd {
                    odd_left -= 1;
                }
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Equal => {
                if a[i].0.parity() == Parity::Odd {
                    return None;
                }
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Greater => {
                if b[j].0.parity() == Parity::Odd && odd_left % 2 == 1 {
                    sign = -sign;
                }
                out.push(b[j].clone());
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, sign))
}

/// A polynomial over graded symbols. Terms are keyed by their canonical
/// factor list; zero coefficients never appear.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly<S: Symbol> {
    terms: BTreeMap<FactorList<S>, BigRational>,
}

impl<S: Symbol> Default for Poly<S> {
    fn default() -> Self {
        Poly::zero()
    }
}

impl<S: Symbol> Poly<S> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        Poly { terms }
    }

    pub fn symbol(s: S) -> Self {
        Poly::monomial(BigRational::one(), vec![(s, 1)])
    }

    /// Build a term from an already-canonical factor list.
    pub fn monomial(coeff: BigRational, factors: FactorList<S>) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(factors, coeff);
        }
        Poly { terms }
    }

    /// Build a term from factors in arbitrary order, canonicalizing with the
    /// Koszul sign. Entry point for parsers.
    pub fn from_unsorted(coeff: BigRational, factors: &[S]) -> Self {
        let mut acc: FactorList<S> = Vec::new();
        let mut sign = 1i32;
        for s in factors {
            match merge_factors(&acc, &vec![(s.clone(), 1)]) {
                None => return Poly::zero(),
                Some((merged, sg)) => {
                    acc = merged;
                    sign *= sg;
                }
            }
        }
        let mut c = coeff;
        if sign < 0 {
            c = -c;
        }
        Poly::monomial(c, acc)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FactorList<S>, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff_of(&self, factors: &FactorList<S>) -> BigRational {
        self.terms.get(factors).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff_of(&Vec::new())
    }

    pub fn add_term(&mut self, factors: FactorList<S>, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(factors) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly<S>) -> Poly<S> {
        let mut out = self.clone();
        for (f, c) in other.terms() {
            out.add_term(f.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly<S>) -> Poly<S> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly<S> {
        Poly {
            terms: self.terms.iter().map(|(f, c)| (f.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Poly<S> {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(f, k)| (f.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly<S>) -> Poly<S> {
        let mut out = Poly::zero();
        for (fa, ca) in self.terms() {
            for (fb, cb) in other.terms() {
                if let Some((merged, sign)) = merge_factors(fa, fb) {
                    let mut c = ca * cb;
                    if sign < 0 {
                        c = -c;
                    }
                    out.add_term(merged, c);
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly<S> {
        let mut out = Poly::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Parity of a homogeneous polynomial; `None` when terms of both
    /// parities are present (or the polynomial is zero).
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|f| factors_parity(f));
        let first = it.next()?;
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn term_parity(factors: &FactorList<S>) -> Parity {
        factors_parity(factors)
    }

    /// Formal left partial derivative with respect to a single symbol. For
    /// an odd symbol the sign is the Koszul sign of moving the derivative
    /// past the preceding factors.
    pub fn left_derivative(&self, s: &S) -> Poly<S> {
        let mut out = Poly::zero();
        for (factors, coeff) in self.terms() {
            if let Some(pos) = factors.iter().position(|(g, _)| g == s) {
                let mut c = coeff.clone();
                let mut nf = factors.clone();
                match s.parity() {
                    Parity::Even => {
                        let e = nf[pos].1;
                        c *= BigRational::from_integer(e.into());
                        if e == 1 {
                            nf.remove(pos);
                        } else {
                            nf[pos].1 = e - 1;
                        }
                    }
                    Parity::Odd => {
                        let odd_before = factors[..pos]
                            .iter()
                            .filter(|(g, _)| g.parity() == Parity::Odd)
                            .count();
                        if odd_before % 2 == 1 {
                            c = -c;
                        }
                        nf.remove(pos);
                    }
                }
                out.add_term(nf, c);
            }
        }
        out
    }

    /// Right partial derivative: the derivative peels factors from the
    /// right, so an odd symbol picks up the parity of the factors after it.
    pub fn right_derivative(&self, s: &S) -> Poly<S> {
        let mut out = Poly::zero();
        for (factors, coeff) in self.terms() {
            if let Some(pos) = factors.iter().position(|(g, _)| g == s) {
                let mut c = coeff.clone();
                let mut nf = factors.clone();
                match s.parity() {
                    Parity::Even => {
                        let e = nf[pos].1;
                        c *= BigRational::from_integer(e.into());
                        if e == 1 {
                            nf.remove(pos);
                        } else {
                            nf[pos].1 = e - 1;
                        }
                    }
                    Parity::Odd => {
                        let odd_after = factors[pos + 1..]
                            .iter()
                            .filter(|(g, _)| g.parity() == Parity::Odd)
                            .count();
                        if odd_after % 2 == 1 {
                            c = -c;
                        }
                        nf.remove(pos);
                    }
                }
                out.add_term(nf, c);
            }
        }
        out
    }

    /// Graded algebra map determined by images of the symbols. Images must
    /// have the parity of their preimage for the map to be well defined;
    /// this is the caller's obligation.
    pub fn map_symbols<T: Symbol>(&self, f: impl Fn(&S) -> Poly<T>) -> Poly<T> {
        let mut out = Poly::zero();
        for (factors, coeff) in self.terms() {
            let mut acc = Poly::constant(coeff.clone());
            for (s, e) in factors {
                let img = f(s);
                acc = acc.mul(&img.pow(*e));
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc);
        }
        out
    }

    /// Extends `images` to a graded derivation by the Leibniz rule. All
    /// images must share one parity shift relative to their preimage (all
    /// equal for an even derivation, all flipped for an odd one); the
    /// Leibniz prefix sign and the sign of moving the image to the front
    /// combine to `(-1)^(parity(symbol) * odd-prefix)` in both cases.
    pub fn derivation(&self, images: impl Fn(&S) -> Option<Poly<S>>) -> Poly<S> {
        let mut out = Poly::zero();
        for (factors, coeff) in self.terms() {
            for (idx, (s, e)) in factors.iter().enumerate() {
                let Some(img) = images(s) else {
                    continue;
                };
                if img.is_zero() {
                    continue;
                }
                let mut rest = factors.clone();
                if *e == 1 {
                    rest.remove(idx);
                } else {
                    rest[idx].1 = e - 1;
                }
                let mut c = coeff.clone() * BigRational::from_integer((*e).into());
                if s.parity() == Parity::Odd {
                    let odd_before = factors[..idx]
                        .iter()
                        .filter(|(h, _)| h.parity() == Parity::Odd)
                        .count();
                    if odd_before % 2 == 1 {
                        c = -c;
                    }
                }
                let term = img
                    .scale(&c)
                    .mul(&Poly::monomial(BigRational::one(), rest));
                out = out.add(&term);
            }
        }
        out
    }

    pub fn filter_terms(&self, pred: impl Fn(&FactorList<S>) -> bool) -> Poly<S> {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(f, _)| pred(f))
                .map(|(f, c)| (f.clone(), c.clone()))
                .collect(),
        }
    }

    /// Total factor count (with multiplicities) of a factor list.
    pub fn term_degree(factors: &FactorList<S>) -> u32 {
        factors.iter().map(|(_, e)| e).sum()
    }

    pub fn max_term_degree(&self) -> u32 {
        self.terms.keys().map(|f| Self::term_degree(f)).max().unwrap_or(0)
    }
}

/// Renders a rational with an explicit sign, used by `Display` impls.
pub fn format_coeff(c: &BigRational) -> (bool, String) {
    let neg = c.is_negative();
    let a = c.abs();
    (neg, a.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
    struct Sym(u32, Parity);

    impl Symbol for Sym {
        fn parity(&self) -> Parity {
            self.1
        }
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn even_symbols_commute() {
        let x = Poly::symbol(Sym(0, Parity::Even));
        let y = Poly::symbol(Sym(1, Parity::Even));
        assert_eq!(x.mul(&y), y.mul(&x));
    }

    #[test]
    fn odd_symbols_anticommute_and_square_to_zero() {
        let a = Poly::symbol(Sym(0, Parity::Odd));
        let b = Poly::symbol(Sym(1, Parity::Odd));
        assert_eq!(a.mul(&b), b.mul(&a).neg());
        assert!(a.mul(&a).is_zero());
    }

    #[test]
    fn koszul_sign_through_three_factors() {
        // c * (a*b) where a < b < c, all odd: moving c to the end crosses two
        // odd factors, so no sign; (b*c) * a crosses two as well.
        let a = Poly::symbol(Sym(0, Parity::Odd));
        let b = Poly::symbol(Sym(1, Parity::Odd));
        let c = Poly::symbol(Sym(2, Parity::Odd));
        let abc = a.mul(&b).mul(&c);
        assert_eq!(c.mul(&a.mul(&b)), abc);
        assert_eq!(b.mul(&c).mul(&a), abc);
        assert_eq!(b.mul(&a).mul(&c), abc.neg());
    }

    #[test]
    fn left_and_right_derivatives_differ_by_parity() {
        // F = a*b (both odd): dL/db = -a, dR/db = a.
        let a = Sym(0, Parity::Odd);
        let b = Sym(1, Parity::Odd);
        let f = Poly::symbol(a).mul(&Poly::symbol(b));
        assert_eq!(f.left_derivative(&b), Poly::symbol(a).neg());
        assert_eq!(f.right_derivative(&b), Poly::symbol(a));
        assert_eq!(f.left_derivative(&a), Poly::symbol(b));
        assert_eq!(f.right_derivative(&a), Poly::symbol(b).neg());
    }

    #[test]
    fn even_derivative_counts_multiplicity() {
        let x = Sym(0, Parity::Even);
        let f = Poly::symbol(x).pow(3);
        let df = f.left_derivative(&x);
        assert_eq!(df, Poly::symbol(x).pow(2).scale(&q(3)));
    }

    #[test]
    fn from_unsorted_applies_koszul_sign() {
        let a = Sym(0, Parity::Odd);
        let b = Sym(1, Parity::Odd);
        let p = Poly::from_unsorted(q(1), &[b, a]);
        assert_eq!(p, Poly::symbol(a).mul(&Poly::symbol(b)).neg());
        assert!(Poly::from_unsorted(q(1), &[a, a]).is_zero());
    }
}

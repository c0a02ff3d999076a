//! The graded differential polynomial ring of the hierarchy.
//!
//! Generators are the symbols `d^m(b[alpha][k])` (even), `d^m(eta[alpha][k])`
//! (odd) and the constant odd symbols `c[alpha][k]` used in the stationary
//! sector. The total derivative `d_z` shifts the derivative order of the
//! dynamical generators and annihilates the constant ones. Coefficients are
//! exact rationals of unbounded size, so every identity check in the crate
//! is an exact algebraic statement.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::graded::{FactorList, Parity, Poly, Symbol};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// `b[alpha][k]`: even coordinate on the big phase space.
    Bosonic,
    /// `eta[alpha][k]`: odd partner of `b[alpha][k]`.
    Fermionic,
    /// `c[alpha][k]`: constant odd symbol of the stationary sector,
    /// annihilated by the total derivative.
    OddConst,
}

impl GeneratorKind {
    pub fn tag(self) -> &'static str {
        match self {
            GeneratorKind::Bosonic => "b",
            GeneratorKind::Fermionic => "eta",
            GeneratorKind::OddConst => "c",
        }
    }

    pub fn from_tag(s: &str) -> Option<GeneratorKind> {
        match s {
            "b" => Some(GeneratorKind::Bosonic),
            "eta" => Some(GeneratorKind::Fermionic),
            "c" => Some(GeneratorKind::OddConst),
            _ => None,
        }
    }
}

/// One symbol `d^der(kind[alpha][level])`. The derive order on the struct
/// fields is the canonical monomial order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub alpha: u32,
    pub level: u32,
    pub der: u32,
}

impl Generator {
    pub fn b(alpha: u32, level: u32, der: u32) -> Generator {
        Generator {
            kind: GeneratorKind::Bosonic,
            alpha,
            level,
            der,
        }
    }

    pub fn eta(alpha: u32, level: u32, der: u32) -> Generator {
        Generator {
            kind: GeneratorKind::Fermionic,
            alpha,
            level,
            der,
        }
    }

    pub fn odd_const(alpha: u32, level: u32) -> Generator {
        Generator {
            kind: GeneratorKind::OddConst,
            alpha,
            level,
            der: 0,
        }
    }

    /// Whether the symbol carries z-dependence (only dynamical generators
    /// do; the stationary constants are transparent to `d_z`).
    pub fn is_dynamical(self) -> bool {
        self.kind != GeneratorKind::OddConst
    }
}

impl Symbol for Generator {
    fn parity(&self) -> Parity {
        match self.kind {
            GeneratorKind::Bosonic => Parity::Even,
            GeneratorKind::Fermionic | GeneratorKind::OddConst => Parity::Odd,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.der == 0 {
            write!(f, "{}[{}][{}]", self.kind.tag(), self.alpha, self.level)
        } else {
            write!(
                f,
                "d^{}({}[{}][{}])",
                self.der,
                self.kind.tag(),
                self.alpha,
                self.level
            )
        }
    }
}

/// Finite truncation window for series-valued computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Cap on correlator insertions.
    pub max_insertions: u32,
    /// Cap on descendant level.
    pub max_level: u32,
    /// Cap on total factor count of a monomial.
    pub max_degree: u32,
    /// Cap on z-derivative order.
    pub max_der: u32,
}

impl TruncationPolicy {
    pub fn new(max_insertions: u32, max_level: u32, max_degree: u32, max_der: u32) -> Self {
        TruncationPolicy {
            max_insertions,
            max_level,
            max_degree,
            max_der,
        }
    }
}

/// Polynomial in the differential ring generators.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DiffPoly(pub Poly<Generator>);

impl DiffPoly {
    pub fn zero() -> DiffPoly {
        DiffPoly(Poly::zero())
    }

    pub fn one() -> DiffPoly {
        DiffPoly(Poly::one())
    }

    pub fn constant(c: BigRational) -> DiffPoly {
        DiffPoly(Poly::constant(c))
    }

    pub fn generator(g: Generator) -> DiffPoly {
        DiffPoly(Poly::symbol(g))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, o: &DiffPoly) -> DiffPoly {
        DiffPoly(self.0.add(&o.0))
    }

    pub fn sub(&self, o: &DiffPoly) -> DiffPoly {
        DiffPoly(self.0.sub(&o.0))
    }

    pub fn neg(&self) -> DiffPoly {
        DiffPoly(self.0.neg())
    }

    pub fn scale(&self, c: &BigRational) -> DiffPoly {
        DiffPoly(self.0.scale(c))
    }

    pub fn mul(&self, o: &DiffPoly) -> DiffPoly {
        DiffPoly(self.0.mul(&o.0))
    }

    pub fn pow(&self, n: u32) -> DiffPoly {
        DiffPoly(self.0.pow(n))
    }

    pub fn parity(&self) -> Option<Parity> {
        self.0.parity()
    }

    pub fn num_terms(&self) -> usize {
        self.0.num_terms()
    }

    /// Left partial derivative with respect to one generator symbol.
    pub fn partial_derivative(&self, g: Generator) -> DiffPoly {
        DiffPoly(self.0.left_derivative(&g))
    }

    /// Total derivative `d_z`: an even derivation shifting `der` by one on
    /// every dynamical generator and killing the stationary constants.
    pub fn total_z_derivative(&self) -> DiffPoly {
        let mut out = Poly::zero();
        for (factors, coeff) in self.0.terms() {
            for (idx, (g, e)) in factors.iter().enumerate() {
                if !g.is_dynamical() {
                    continue;
                }
                let dg = Generator {
                    der: g.der + 1,
                    ..*g
                };
                let mut rest = factors.clone();
                if *e == 1 {
                    rest.remove(idx);
                } else {
                    rest[idx].1 = e - 1;
                }
                // The Leibniz term keeps dg in g's slot; expressing it as
                // dg * rest moves dg to the front across the preceding
                // factors, which costs a sign when g is odd.
                let mut c = coeff.clone() * BigRational::from_integer((*e).into());
                if g.parity() == Parity::Odd {
                    let odd_before = factors[..idx]
                        .iter()
                        .filter(|(h, _)| h.parity() == Parity::Odd)
                        .count();
                    if odd_before % 2 == 1 {
                        c = -c;
                    }
                }
                let term =
                    Poly::monomial(c, vec![(dg, 1)]).mul(&Poly::monomial(BigRational::one(), rest));
                out = out.add(&term);
            }
        }
        DiffPoly(out)
    }

    /// Drop monomials outside the truncation window: total degree above
    /// `max_degree`, any level above `max_level`, or any derivative order
    /// above `max_der`.
    pub fn truncate(&self, t: &TruncationPolicy) -> DiffPoly {
        DiffPoly(self.0.filter_terms(|f| {
            Poly::<Generator>::term_degree(f) <= t.max_degree
                && f.iter().all(|(g, _)| g.level <= t.max_level && g.der <= t.max_der)
        }))
    }

    /// Number of bosonic factors of a monomial (derivative orders ignored).
    pub fn bosonic_degree(factors: &FactorList<Generator>) -> u32 {
        factors
            .iter()
            .filter(|(g, _)| g.kind == GeneratorKind::Bosonic)
            .map(|(_, e)| e)
            .sum()
    }

    /// Keep monomials with bosonic degree at most `d`.
    pub fn truncate_bosonic_degree(&self, d: u32) -> DiffPoly {
        DiffPoly(self.0.filter_terms(|f| DiffPoly::bosonic_degree(f) <= d))
    }

    pub fn max_der(&self) -> u32 {
        self.0
            .terms()
            .flat_map(|(f, _)| f.iter().map(|(g, _)| g.der))
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (factors, coeff) in self.0.terms() {
            let (neg, mag) = crate::graded::format_coeff(coeff);
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut wrote = false;
            if mag != "1" || factors.is_empty() {
                write!(f, "{}", mag)?;
                wrote = true;
            }
            for (g, e) in factors {
                if wrote {
                    write!(f, " * ")?;
                }
                write!(f, "{}", g)?;
                if *e > 1 {
                    write!(f, "^{}", e)?;
                }
                wrote = true;
            }
        }
        Ok(())
    }
}

// -------------------------------------------------------------------------
// Serialization: canonical text form and a JSON term list. Both round-trip
// bit exactly because terms are stored canonically.
// -------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    factors: Vec<(String, u32, u32, u32)>,
}

impl Serialize for DiffPoly {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermJson> = self
            .0
            .terms()
            .map(|(factors, coeff)| TermJson {
                coeff: coeff.to_string(),
                factors: factors
                    .iter()
                    .flat_map(|(g, e)| {
                        std::iter::repeat((g.kind.tag().to_string(), g.alpha, g.level, g.der))
                            .take(*e as usize)
                    })
                    .collect(),
            })
            .collect();
        terms.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DiffPoly {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let terms = Vec::<TermJson>::deserialize(de)?;
        let mut out = DiffPoly::zero();
        for t in terms {
            let coeff = BigRational::from_str(&t.coeff)
                .map_err(|e| serde::de::Error::custom(format!("bad rational: {e}")))?;
            let mut gens = Vec::new();
            for (tag, alpha, level, der) in &t.factors {
                let kind = GeneratorKind::from_tag(tag)
                    .ok_or_else(|| serde::de::Error::custom(format!("bad kind tag {tag}")))?;
                if kind == GeneratorKind::OddConst && *der != 0 {
                    return Err(serde::de::Error::custom("c generators carry no derivative"));
                }
                gens.push(Generator {
                    kind,
                    alpha: *alpha,
                    level: *level,
                    der: *der,
                });
            }
            out = out.add(&DiffPoly(Poly::from_unsorted(coeff, &gens)));
        }
        Ok(out)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("unexpected token at byte {0}: {1}")]
    Unexpected(usize, String),
    #[error("bad rational literal: {0}")]
    BadRational(String),
}

/// Parser for the canonical text form produced by `Display`. Accepts signs,
/// `coeff * factor * ...` terms, `d^m(tag[alpha][level])` factors, and `^e`
/// powers.
impl FromStr for DiffPoly {
    type Err = ParseError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let s = input.trim();
        if s == "0" {
            return Ok(DiffPoly::zero());
        }
        let mut out = DiffPoly::zero();
        let mut rest = s;
        let mut sign = BigRational::one();
        loop {
            rest = rest.trim_start();
            if rest.is_empty() {
                break;
            }
            if let Some(r) = rest.strip_prefix('+') {
                rest = r;
                continue;
            }
            if let Some(r) = rest.strip_prefix('-') {
                sign = -sign;
                rest = r;
                continue;
            }
            let (term, r) = parse_term(rest)?;
            out = out.add(&term.scale(&sign));
            sign = BigRational::one();
            rest = r;
        }
        Ok(out)
    }
}

fn parse_term(input: &str) -> Result<(DiffPoly, &str), ParseError> {
    let mut coeff = BigRational::one();
    let mut gens: Vec<Generator> = Vec::new();
    let mut rest = input.trim_start();
    let mut want_factor = true;
    while want_factor {
        rest = rest.trim_start();
        if rest.starts_with(|c: char| c.is_ascii_digit()) {
            let end = rest
                .find(|c: char| !(c.is_ascii_digit() || c == '/'))
                .unwrap_or(rest.len());
            let lit = &rest[..end];
            coeff *= BigRational::from_str(lit)
                .map_err(|_| ParseError::BadRational(lit.to_string()))?;
            rest = &rest[end..];
        } else {
            let (g, e, r) = parse_factor(rest)?;
            for _ in 0..e {
                gens.push(g);
            }
            rest = r;
        }
        rest = rest.trim_start();
        if let Some(r) = rest.strip_prefix('*') {
            rest = r;
        } else {
            want_factor = false;
        }
    }
    Ok((DiffPoly(Poly::from_unsorted(coeff, &gens)), rest))
}

fn parse_factor(input: &str) -> Result<(Generator, u32, &str), ParseError> {
    let mut rest = input;
    let mut der = 0u32;
    let mut parens = false;
    if let Some(r) = rest.strip_prefix("d^") {
        let end = r
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(r.len());
        der = r[..end]
            .parse()
            .map_err(|_| ParseError::Unexpected(0, r.to_string()))?;
        rest = r[end..]
            .strip_prefix('(')
            .ok_or_else(|| ParseError::Unexpected(0, r.to_string()))?;
        parens = true;
    }
    let tag_end = rest.find('[').ok_or_else(|| {
        ParseError::Unexpected(input.len() - rest.len(), rest.chars().take(8).collect())
    })?;
    let kind = GeneratorKind::from_tag(&rest[..tag_end]).ok_or_else(|| {
        ParseError::Unexpected(input.len() - rest.len(), rest[..tag_end].to_string())
    })?;
    rest = &rest[tag_end..];
    let (alpha, r) = parse_bracketed(rest)?;
    let (level, r) = parse_bracketed(r)?;
    rest = r;
    if parens {
        rest = rest
            .strip_prefix(')')
            .ok_or_else(|| ParseError::Unexpected(0, rest.chars().take(8).collect()))?;
    }
    let mut exp = 1u32;
    if let Some(r) = rest.strip_prefix('^') {
        let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
        exp = r[..end]
            .parse()
            .map_err(|_| ParseError::Unexpected(0, r.to_string()))?;
        rest = &r[end..];
    }
    if kind == GeneratorKind::OddConst && der != 0 {
        return Err(ParseError::Unexpected(0, "derivative of c".into()));
    }
    Ok((
        Generator {
            kind,
            alpha,
            level,
            der,
        },
        exp,
        rest,
    ))
}

fn parse_bracketed(input: &str) -> Result<(u32, &str), ParseError> {
    let r = input
        .strip_prefix('[')
        .ok_or_else(|| ParseError::Unexpected(0, input.chars().take(8).collect()))?;
    let end = r
        .find(']')
        .ok_or_else(|| ParseError::Unexpected(0, r.chars().take(8).collect()))?;
    let v = r[..end]
        .parse()
        .map_err(|_| ParseError::Unexpected(0, r[..end].to_string()))?;
    Ok((v, &r[end + 1..]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn b0() -> DiffPoly {
        DiffPoly::generator(Generator::b(0, 0, 0))
    }

    fn eta(level: u32) -> DiffPoly {
        DiffPoly::generator(Generator::eta(0, level, 0))
    }

    #[test]
    fn even_generators_commute() {
        let p = b0().mul(&b0());
        assert_eq!(p, b0().pow(2));
    }

    #[test]
    fn odd_generators_anticommute_and_square() {
        let e0 = eta(0);
        let e1 = eta(1);
        assert_eq!(e0.mul(&e1), e1.mul(&e0).neg());
        assert!(e0.mul(&e0).is_zero());
    }

    #[test]
    fn left_partial_derivative_examples() {
        // d/db0 of b0^3 = 3 b0^2
        let p = b0().pow(3);
        assert_eq!(
            p.partial_derivative(Generator::b(0, 0, 0)),
            b0().pow(2).scale(&q(3))
        );
        // left d/deta0 of eta1*eta0 = -eta1 (sign from passing eta1)
        let p = eta(1).mul(&eta(0));
        assert_eq!(p.partial_derivative(Generator::eta(0, 0, 0)), eta(1).neg());
        // d/d(dz b0) of b0 * dz b0 = b0
        let dzb = DiffPoly::generator(Generator::b(0, 0, 1));
        let p = b0().mul(&dzb);
        assert_eq!(p.partial_derivative(Generator::b(0, 0, 1)), b0());
    }

    #[test]
    fn total_derivative_examples() {
        // dz(b0^2) = 2 b0 dz(b0)
        let dzb = DiffPoly::generator(Generator::b(0, 0, 1));
        assert_eq!(b0().pow(2).total_z_derivative(), b0().mul(&dzb).scale(&q(2)));
        // dz(eta0 * b0) = dz(eta0) b0 + eta0 dz(b0): even derivation
        let e0 = eta(0);
        let dze = DiffPoly::generator(Generator::eta(0, 0, 1));
        let got = e0.mul(&b0()).total_z_derivative();
        let want = dze.mul(&b0()).add(&e0.mul(&dzb));
        assert_eq!(got, want);
        // dz(1) = 0
        assert!(DiffPoly::one().total_z_derivative().is_zero());
        // dz kills the stationary constants
        let c = DiffPoly::generator(Generator::odd_const(0, 2));
        assert!(c.total_z_derivative().is_zero());
        assert!(c.mul(&c).is_zero());
    }

    #[test]
    fn leibniz_on_products() {
        let dzb = DiffPoly::generator(Generator::b(0, 0, 1));
        let p = b0().pow(2).mul(&eta(1));
        let qq = dzb.mul(&eta(0));
        let lhs = p.mul(&qq).total_z_derivative();
        let rhs = p
            .total_z_derivative()
            .mul(&qq)
            .add(&p.mul(&qq.total_z_derivative()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn truncation_examples() {
        let t = TruncationPolicy::new(10, 3, 8, 1);
        let p = b0().pow(3).add(&b0().pow(9));
        assert_eq!(p.truncate(&t), b0().pow(3));
        let e5 = DiffPoly::generator(Generator::eta(0, 5, 0));
        assert!(e5.truncate(&t).is_zero());
        let d2 = DiffPoly::generator(Generator::b(0, 0, 2));
        assert!(d2.truncate(&t).is_zero());
    }

    #[test]
    fn text_round_trip() {
        let p = b0()
            .pow(3)
            .scale(&BigRational::new(1.into(), 6.into()))
            .add(&eta(1).mul(&DiffPoly::generator(Generator::b(0, 0, 2))).neg());
        let s = p.to_string();
        let back: DiffPoly = s.parse().unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_string(), s);
        let z: DiffPoly = "0".parse().unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn json_round_trip() {
        let p = b0()
            .pow(2)
            .mul(&eta(0))
            .scale(&BigRational::new((-3).into(), 2.into()));
        let s = serde_json::to_string(&p).unwrap();
        let back: DiffPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }
}

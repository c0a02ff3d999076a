//! Genus-zero correlator providers for the small and big phase space, and
//! the topological recursion relation as a checkable identity.
//!
//! A provider assigns an exact rational to every multiset of insertions
//! `(level, alpha)`. The built-in pure-gravity provider uses the closed
//! multinomial form on a one-dimensional phase space; arbitrary data comes
//! in as explicit tables, validated lazily: recursion violations surface as
//! nonzero residuals rather than load-time rejections.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bracket::Metric;
use crate::diffring::{DiffPoly, Generator, TruncationPolicy};
use crate::graded::Poly;

/// Order-independent multiset of insertions `(level, alpha)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct InsertionKey(Vec<(u32, u32)>);

impl InsertionKey {
    pub fn new(mut ins: Vec<(u32, u32)>) -> InsertionKey {
        ins.sort();
        InsertionKey(ins)
    }

    pub fn empty() -> InsertionKey {
        InsertionKey(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn insertions(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn union(&self, other: &InsertionKey) -> InsertionKey {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        InsertionKey::new(v)
    }

    pub fn push(&self, ins: (u32, u32)) -> InsertionKey {
        let mut v = self.0.clone();
        v.push(ins);
        InsertionKey::new(v)
    }

    pub fn total_level(&self) -> u32 {
        self.0.iter().map(|(k, _)| k).sum()
    }
}

fn factorial(n: u32) -> BigRational {
    let mut acc = BigInt::one();
    for i in 2..=n as u64 {
        acc *= BigInt::from(i);
    }
    BigRational::from_integer(acc)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CorrelatorProvider {
    /// Closed multinomial form on a one-dimensional phase space:
    /// `(n-3)! / (k_1! ... k_n!)` when the levels sum to `n-3`, else zero.
    PureGravity,
    /// Explicit table; absent keys default to zero.
    Table(BTreeMap<InsertionKey, BigRational>),
}

#[derive(Debug, thiserror::Error)]
pub enum PhaseSpaceError {
    #[error("pure gravity requires a one-dimensional phase space, got dim {0}")]
    PureGravityDim(usize),
    #[error("metric dimension {0} does not match basis size {1}")]
    MetricDim(usize, usize),
    #[error("identity label {0:?} is not in the basis")]
    BadIdentity(String),
    #[error("insertion refers to basis index {0} outside dim {1}")]
    BadIndex(u32, usize),
    #[error(transparent)]
    Metric(#[from] crate::bracket::MetricError),
    #[error("bad rational literal {0:?}")]
    BadRational(String),
}

/// The small phase space: basis labels with a designated identity, the
/// metric, and a correlator provider.
#[derive(Clone, Debug)]
pub struct PhaseSpaceData {
    pub dim: usize,
    pub names: Vec<String>,
    pub identity: usize,
    pub metric: Metric,
    pub provider: CorrelatorProvider,
}

impl PhaseSpaceData {
    pub fn new(
        names: Vec<String>,
        identity: usize,
        metric: Metric,
        provider: CorrelatorProvider,
    ) -> Result<PhaseSpaceData, PhaseSpaceError> {
        let dim = names.len();
        if metric.dim() != dim {
            return Err(PhaseSpaceError::MetricDim(metric.dim(), dim));
        }
        if let CorrelatorProvider::PureGravity = provider {
            if dim != 1 {
                return Err(PhaseSpaceError::PureGravityDim(dim));
            }
        }
        if let CorrelatorProvider::Table(t) = &provider {
            for key in t.keys() {
                for (_, alpha) in key.insertions() {
                    if *alpha as usize >= dim {
                        return Err(PhaseSpaceError::BadIndex(*alpha, dim));
                    }
                }
            }
        }
        Ok(PhaseSpaceData {
            dim,
            names,
            identity,
            metric,
            provider,
        })
    }

    /// The standard one-dimensional pure-gravity phase space.
    pub fn pure_gravity() -> PhaseSpaceData {
        PhaseSpaceData::new(
            vec!["P".to_string()],
            0,
            Metric::identity(1),
            CorrelatorProvider::PureGravity,
        )
        .expect("pure gravity phase space")
    }

    /// Genus-zero correlator of a multiset of insertions. Fewer than three
    /// insertions always give zero.
    pub fn correlator(&self, key: &InsertionKey) -> BigRational {
        let n = key.len() as u32;
        if n < 3 {
            return BigRational::zero();
        }
        match &self.provider {
            CorrelatorProvider::PureGravity => {
                if key.total_level() != n - 3 {
                    return BigRational::zero();
                }
                let mut acc = factorial(n - 3);
                for (k, _) in key.insertions() {
                    acc /= factorial(*k);
                }
                acc
            }
            CorrelatorProvider::Table(t) => t.get(key).cloned().unwrap_or_else(BigRational::zero),
        }
    }
}

/// A polynomial in the level-`k` `b` variables together with the maximal
/// total degree through which its coefficients are complete.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowedSeries {
    pub poly: DiffPoly,
    /// Coefficients of monomials with total degree at most this are exact.
    pub window: u32,
}

/// The big-phase-space function with the given fixed insertions, expanded
/// as a polynomial in the `b[alpha][k]` generators (derivative order zero):
/// each extra multiset `E` contributes
/// `correlator(fixed + E) / prod(multiplicities!) * prod b`.
pub fn big_phase_series(
    d: &PhaseSpaceData,
    fixed: &InsertionKey,
    t: &TruncationPolicy,
) -> WindowedSeries {
    let budget = (t.max_insertions as usize)
        .saturating_sub(fixed.len())
        .min(t.max_degree as usize) as u32;
    let mut poly = DiffPoly::zero();
    // alphabet of extra insertions, in a fixed order
    let alphabet: Vec<(u32, u32)> = (0..=t.max_level)
        .flat_map(|k| (0..d.dim as u32).map(move |a| (k, a)))
        .collect();
    // recursive multiset enumeration
    fn rec(
        d: &PhaseSpaceData,
        fixed: &InsertionKey,
        alphabet: &[(u32, u32)],
        pos: usize,
        budget: u32,
        extra: &mut Vec<((u32, u32), u32)>,
        poly: &mut DiffPoly,
    ) {
        if pos == alphabet.len() {
            let mut key = fixed.clone();
            let mut weight = BigRational::one();
            let mut factors = Vec::new();
            for ((k, a), m) in extra.iter() {
                for _ in 0..*m {
                    key = key.push((*k, *a));
                }
                weight /= factorial(*m);
                factors.push((Generator::b(*a, *k, 0), *m));
            }
            let c = d.correlator(&key);
            if !c.is_zero() {
                factors.sort();
                poly.0.add_term(factors, c * weight);
            }
            return;
        }
        for m in 0..=budget {
            if m > 0 {
                extra.push((alphabet[pos], m));
            }
            rec(d, fixed, alphabet, pos + 1, budget - m, extra, poly);
            if m > 0 {
                extra.pop();
            }
        }
    }
    let mut extra = Vec::new();
    rec(d, fixed, &alphabet, 0, budget, &mut extra, &mut poly);
    WindowedSeries {
        poly,
        window: budget,
    }
}

/// Metric-weighted product of two windowed series, with window propagation:
/// a degree-`d` coefficient of the product is complete only when every
/// split `d1 + d2 = d` lies inside both windows.
fn series_product(a: &WindowedSeries, b: &WindowedSeries) -> WindowedSeries {
    let window = a.window.min(b.window);
    WindowedSeries {
        poly: a.poly.mul(&b.poly).truncate_bosonic_degree(window),
        window,
    }
}

/// The residual (left minus right side) of the genus-zero recursion
/// identity for one triple of descendant insertions, complete through the
/// reported window.
#[derive(Clone, Debug)]
pub struct TrrResidual {
    pub residual: DiffPoly,
    /// Total degree through which the residual is trustworthy.
    pub window: u32,
    /// Degrees of computed monomials beyond the window (informational).
    pub dropped_degrees: Vec<u32>,
}

impl TrrResidual {
    pub fn is_zero(&self) -> bool {
        self.residual.is_zero()
    }

    /// Smallest degree at which the residual fails inside the window.
    pub fn first_failure_degree(&self) -> Option<u32> {
        self.residual
            .0
            .terms()
            .map(|(f, _)| Poly::<Generator>::term_degree(f))
            .min()
    }
}

/// Checks the recursion identity
/// `<<O^(i+1)_a O^(j)_b O^(k)_c>> = sum_s <<O^(i)_a O^(0)s>> <<O^(0)_s O^(j)_b O^(k)_c>>`
/// with the index raised through the inverse metric, as polynomials in the
/// `b` variables within the verified window.
pub fn check_trr(
    d: &PhaseSpaceData,
    (i, alpha): (u32, u32),
    (j, beta): (u32, u32),
    (k, gamma): (u32, u32),
    t: &TruncationPolicy,
) -> TrrResidual {
    let lhs = big_phase_series(
        d,
        &InsertionKey::new(vec![(i + 1, alpha), (j, beta), (k, gamma)]),
        t,
    );
    let mut rhs = WindowedSeries {
        poly: DiffPoly::zero(),
        window: u32::MAX,
    };
    let mut rhs_window = u32::MAX;
    for sigma in 0..d.dim as u32 {
        for rho in 0..d.dim as u32 {
            let w = &d.metric.inverse()[sigma as usize][rho as usize];
            if w.is_zero() {
                continue;
            }
            let two = big_phase_series(d, &InsertionKey::new(vec![(i, alpha), (0, rho)]), t);
            let three = big_phase_series(
                d,
                &InsertionKey::new(vec![(0, sigma), (j, beta), (k, gamma)]),
                t,
            );
            let prod = series_product(&two, &three);
            rhs_window = rhs_window.min(prod.window);
            rhs.poly = rhs.poly.add(&prod.poly.scale(w));
        }
    }
    if rhs_window == u32::MAX {
        rhs_window = lhs.window;
    }
    let window = lhs.window.min(rhs_window);
    let full = lhs.poly.sub(&rhs.poly);
    let residual = full.truncate_bosonic_degree(window);
    let mut dropped: Vec<u32> = full
        .0
        .terms()
        .map(|(f, _)| Poly::<Generator>::term_degree(f))
        .filter(|&deg| deg > window)
        .collect();
    dropped.sort();
    dropped.dedup();
    TrrResidual {
        residual,
        window,
        dropped_degrees: dropped,
    }
}

/// A pure-gravity-valued table over all keys within the insertion budget,
/// for perturbation experiments. Only nonzero values are stored.
pub fn pure_gravity_table(max_insertions: u32, max_level: u32) -> BTreeMap<InsertionKey, BigRational> {
    let pg = PhaseSpaceData::pure_gravity();
    let mut table = BTreeMap::new();
    // enumerate multisets of (level, 0) with size <= max_insertions
    fn rec(
        pg: &PhaseSpaceData,
        level: u32,
        max_level: u32,
        left: u32,
        current: &mut Vec<(u32, u32)>,
        out: &mut BTreeMap<InsertionKey, BigRational>,
    ) {
        if level > max_level {
            if current.len() >= 3 {
                let key = InsertionKey::new(current.clone());
                let v = pg.correlator(&key);
                if !v.is_zero() {
                    out.insert(key, v);
                }
            }
            return;
        }
        for m in 0..=left {
            for _ in 0..m {
                current.push((level, 0));
            }
            rec(pg, level + 1, max_level, left - m, current, out);
            for _ in 0..m {
                current.pop();
            }
        }
    }
    let mut current = Vec::new();
    rec(&pg, 0, max_level, max_insertions, &mut current, &mut table);
    table
}

// -------------------------------------------------------------------------
// Fixture generation: descendant tables from a primary potential
// -------------------------------------------------------------------------

/// Builds an explicit descendant correlator table from primary (level-zero)
/// correlator data by brute-force recursion on the total descendant level,
/// using the genus-zero recursion identity in its expanded coefficient form
///
/// `<O^(i+1)_a O^(j)_b O^(k)_c T> =
///    sum_{s,r} g^{sr} sum_{T1+T2=T} <O^(i)_a O_r T1><O_s O^(j)_b O^(k)_c T2>`.
///
/// This is a fixture generator: phase-space tables always carry descendant
/// entries explicitly, and this routine is how test fixtures obtain them
/// from a primary-only potential. `primary(alphas)` must return the fully
/// symmetric level-zero correlators.
pub fn descendant_table_from_primary(
    dim: usize,
    metric: &Metric,
    primary: &dyn Fn(&[u32]) -> BigRational,
    max_insertions: u32,
    max_level: u32,
) -> BTreeMap<InsertionKey, BigRational> {
    let mut memo: BTreeMap<InsertionKey, BigRational> = BTreeMap::new();
    fn eval(
        key: &InsertionKey,
        dim: usize,
        metric: &Metric,
        primary: &dyn Fn(&[u32]) -> BigRational,
        memo: &mut BTreeMap<InsertionKey, BigRational>,
    ) -> BigRational {
        if key.len() < 3 {
            return BigRational::zero();
        }
        if let Some(v) = memo.get(key) {
            return v.clone();
        }
        let ins = key.insertions().to_vec();
        let value = if key.total_level() == 0 {
            let alphas: Vec<u32> = ins.iter().map(|(_, a)| *a).collect();
            primary(&alphas)
        } else {
            // take the highest-level insertion as the slot to reduce
            let (pos, &(lev, alpha)) = ins
                .iter()
                .enumerate()
                .max_by_key(|(_, (k, _))| *k)
                .expect("nonempty");
            debug_assert!(lev >= 1);
            let mut rest = ins.clone();
            rest.remove(pos);
            // two marked spectators, the remainder is the split set
            let (j_b, k_c) = (rest[0], rest[1]);
            let t_set: Vec<(u32, u32)> = rest[2..].to_vec();
            let mut acc = BigRational::zero();
            for sigma in 0..dim as u32 {
                for rho in 0..dim as u32 {
                    let w = &metric.inverse()[sigma as usize][rho as usize];
                    if w.is_zero() {
                        continue;
                    }
                    // sum over sub-multisets with binomial weights
                    for (t1, t2, ways) in multiset_splits(&t_set) {
                        let mut left = t1;
                        left.push((lev - 1, alpha));
                        left.push((0, rho));
                        let mut right = t2;
                        right.push((0, sigma));
                        right.push(j_b);
                        right.push(k_c);
                        let lv = eval(&InsertionKey::new(left), dim, metric, primary, memo);
                        if lv.is_zero() {
                            continue;
                        }
                        let rv = eval(&InsertionKey::new(right), dim, metric, primary, memo);
                        if rv.is_zero() {
                            continue;
                        }
                        acc += w * lv * rv * BigRational::from_integer(ways.into());
                    }
                }
            }
            acc
        };
        memo.insert(key.clone(), value.clone());
        value
    }
    // enumerate all keys within the budget and evaluate
    let mut keys = Vec::new();
    let alphabet: Vec<(u32, u32)> = (0..=max_level)
        .flat_map(|k| (0..dim as u32).map(move |a| (k, a)))
        .collect();
    fn gen_keys(
        alphabet: &[(u32, u32)],
        pos: usize,
        left: u32,
        current: &mut Vec<(u32, u32)>,
        out: &mut Vec<InsertionKey>,
    ) {
        if pos == alphabet.len() {
            if current.len() >= 3 {
                out.push(InsertionKey::new(current.clone()));
            }
            return;
        }
        for m in 0..=left {
            for _ in 0..m {
                current.push(alphabet[pos]);
            }
            gen_keys(alphabet, pos + 1, left - m, current, out);
            for _ in 0..m {
                current.pop();
            }
        }
    }
    let mut current = Vec::new();
    gen_keys(&alphabet, 0, max_insertions, &mut current, &mut keys);
    let mut table = BTreeMap::new();
    for key in keys {
        let v = eval(&key, dim, metric, primary, &mut memo);
        if !v.is_zero() {
            table.insert(key, v);
        }
    }
    table
}

/// All splits of a multiset into two parts, with the product-of-binomials
/// multiplicity of each split.
fn multiset_splits(set: &[(u32, u32)]) -> Vec<(Vec<(u32, u32)>, Vec<(u32, u32)>, u64)> {
    // group into (element, multiplicity)
    let mut groups: Vec<((u32, u32), u32)> = Vec::new();
    for x in set {
        match groups.iter_mut().find(|(y, _)| y == x) {
            Some((_, m)) => *m += 1,
            None => groups.push((*x, 1)),
        }
    }
    fn binom(n: u32, k: u32) -> u64 {
        let mut acc = 1u64;
        for i in 0..k {
            acc = acc * (n - i) as u64 / (i + 1) as u64;
        }
        acc
    }
    let mut out: Vec<(Vec<(u32, u32)>, Vec<(u32, u32)>, u64)> = vec![(Vec::new(), Vec::new(), 1)];
    for (x, m) in groups {
        let mut next = Vec::new();
        for (t1, t2, ways) in &out {
            for take in 0..=m {
                let mut a = t1.clone();
                let mut b = t2.clone();
                for _ in 0..take {
                    a.push(x);
                }
                for _ in take..m {
                    b.push(x);
                }
                next.push((a, b, ways * binom(m, take)));
            }
        }
        out = next;
    }
    out
}

// -------------------------------------------------------------------------
// JSON format
// -------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TableEntryJson {
    ins: Vec<(u32, u32)>,
    value: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "source")]
enum ProviderJson {
    #[serde(rename = "pure_gravity")]
    PureGravity,
    #[serde(rename = "table")]
    Table { entries: Vec<TableEntryJson> },
}

/// On-disk phase-space description with rationals as strings.
#[derive(Serialize, Deserialize)]
pub struct PhaseSpaceJson {
    dim: usize,
    basis: Vec<String>,
    identity: String,
    metric: Vec<Vec<String>>,
    correlators: ProviderJson,
}

impl PhaseSpaceJson {
    pub fn to_phase_space(&self) -> Result<PhaseSpaceData, PhaseSpaceError> {
        let identity = self
            .basis
            .iter()
            .position(|n| *n == self.identity)
            .ok_or_else(|| PhaseSpaceError::BadIdentity(self.identity.clone()))?;
        let mut m = Vec::new();
        for row in &self.metric {
            let mut r = Vec::new();
            for s in row {
                r.push(
                    BigRational::from_str(s)
                        .map_err(|_| PhaseSpaceError::BadRational(s.clone()))?,
                );
            }
            m.push(r);
        }
        let metric = Metric::new(m)?;
        let provider = match &self.correlators {
            ProviderJson::PureGravity => CorrelatorProvider::PureGravity,
            ProviderJson::Table { entries } => {
                let mut t = BTreeMap::new();
                for e in entries {
                    let v = BigRational::from_str(&e.value)
                        .map_err(|_| PhaseSpaceError::BadRational(e.value.clone()))?;
                    if !v.is_zero() {
                        t.insert(InsertionKey::new(e.ins.clone()), v);
                    }
                }
                CorrelatorProvider::Table(t)
            }
        };
        PhaseSpaceData::new(self.basis.clone(), identity, metric, provider)
    }

    pub fn from_phase_space(d: &PhaseSpaceData) -> PhaseSpaceJson {
        PhaseSpaceJson {
            dim: d.dim,
            basis: d.names.clone(),
            identity: d.names[d.identity].clone(),
            metric: d
                .metric
                .matrix()
                .iter()
                .map(|row| row.iter().map(|v| v.to_string()).collect())
                .collect(),
            correlators: match &d.provider {
                CorrelatorProvider::PureGravity => ProviderJson::PureGravity,
                CorrelatorProvider::Table(t) => ProviderJson::Table {
                    entries: t
                        .iter()
                        .map(|(k, v)| TableEntryJson {
                            ins: k.insertions().to_vec(),
                            value: v.to_string(),
                        })
                        .collect(),
                },
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn key(ins: &[(u32, u32)]) -> InsertionKey {
        InsertionKey::new(ins.to_vec())
    }

    #[test]
    fn pure_gravity_values() {
        let pg = PhaseSpaceData::pure_gravity();
        // <PPP> = 1
        assert_eq!(pg.correlator(&key(&[(0, 0), (0, 0), (0, 0)])), q(1));
        // <P^(1) PPP> = 1
        assert_eq!(pg.correlator(&key(&[(1, 0), (0, 0), (0, 0), (0, 0)])), q(1));
        // level sum mismatch
        assert_eq!(pg.correlator(&key(&[(1, 0), (0, 0), (0, 0)])), q(0));
        // fewer than three insertions
        assert_eq!(pg.correlator(&key(&[(0, 0), (0, 0)])), q(0));
        // multinomial: <P^(1)P^(1) P^5> has n=7, sum=2, wrong (needs 4) -> 0
        assert_eq!(
            pg.correlator(&key(&[(1, 0), (1, 0), (0, 0), (0, 0), (0, 0), (0, 0), (0, 0)])),
            q(0)
        );
        // n=7, levels (2,2): (7-3)!/2!2! = 6
        assert_eq!(
            pg.correlator(&key(&[(2, 0), (2, 0), (0, 0), (0, 0), (0, 0), (0, 0), (0, 0)])),
            q(6)
        );
    }

    #[test]
    fn pure_gravity_matches_direct_multinomial() {
        let pg = PhaseSpaceData::pure_gravity();
        // all level partitions for n <= 8
        for n in 3..=8u32 {
            // enumerate weak compositions of n-3 into n parts, sorted
            fn partitions(total: u32, parts: u32) -> Vec<Vec<u32>> {
                if parts == 1 {
                    return vec![vec![total]];
                }
                let mut out = Vec::new();
                for first in 0..=total {
                    for mut rest in partitions(total - first, parts - 1) {
                        let mut v = vec![first];
                        v.append(&mut rest);
                        out.push(v);
                    }
                }
                out
            }
            for levels in partitions(n - 3, n) {
                let ins: Vec<(u32, u32)> = levels.iter().map(|&k| (k, 0)).collect();
                let got = pg.correlator(&InsertionKey::new(ins));
                let mut want = factorial(n - 3);
                for k in &levels {
                    want /= factorial(*k);
                }
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn one_point_series_matches_closed_form() {
        // <P^(k) e^{b0 P}> restricted to level-0 extras = b0^(k+2)/(k+2)!
        let pg = PhaseSpaceData::pure_gravity();
        for k in 0..5u32 {
            let t = TruncationPolicy::new(k + 3, 0, k + 3, 0);
            let s = big_phase_series(&pg, &key(&[(k, 0)]), &t);
            let b0 = DiffPoly::generator(Generator::b(0, 0, 0));
            let want = b0.pow(k + 2).scale(&factorial(k + 2).recip());
            assert_eq!(s.poly, want);
        }
    }

    #[test]
    fn empty_fixed_series_starts_cubic() {
        let pg = PhaseSpaceData::pure_gravity();
        let t = TruncationPolicy::new(6, 2, 6, 0);
        let s = big_phase_series(&pg, &InsertionKey::empty(), &t);
        assert!(!s.poly.is_zero());
        for (f, _) in s.poly.0.terms() {
            assert!(Poly::<Generator>::term_degree(f) >= 3);
        }
        // N = 3, level 0 only: exactly b0^3/6
        let t3 = TruncationPolicy::new(3, 0, 3, 0);
        let s3 = big_phase_series(&pg, &InsertionKey::empty(), &t3);
        let b0 = DiffPoly::generator(Generator::b(0, 0, 0));
        assert_eq!(s3.poly, b0.pow(3).scale(&factorial(3).recip()));
    }

    #[test]
    fn constant_term_is_fixed_correlator() {
        let pg = PhaseSpaceData::pure_gravity();
        let t = TruncationPolicy::new(5, 1, 5, 0);
        let fixed = key(&[(0, 0), (0, 0), (0, 0)]);
        let s = big_phase_series(&pg, &fixed, &t);
        assert_eq!(s.poly.0.constant_term(), pg.correlator(&fixed));
    }

    #[test]
    fn series_derivative_adds_insertion() {
        // d/db^a_k of the series with fixed F equals the series with
        // F + {(k,a)}, within the shrunken window.
        let pg = PhaseSpaceData::pure_gravity();
        let t = TruncationPolicy::new(7, 2, 7, 0);
        let fixed = key(&[(1, 0)]);
        let s = big_phase_series(&pg, &fixed, &t);
        for k in 0..=2u32 {
            let d = s.poly.partial_derivative(Generator::b(0, k, 0));
            let bigger = big_phase_series(&pg, &fixed.push((k, 0)), &t);
            let window = bigger.window.min(s.window.saturating_sub(1));
            assert_eq!(
                d.truncate_bosonic_degree(window),
                bigger.poly.truncate_bosonic_degree(window)
            );
        }
    }

    #[test]
    fn trr_zero_for_pure_gravity() {
        let pg = PhaseSpaceData::pure_gravity();
        let t = TruncationPolicy::new(8, 2, 8, 0);
        for i in 0..=1 {
            for j in 0..=1 {
                for k in 0..=1 {
                    let r = check_trr(&pg, (i, 0), (j, 0), (k, 0), &t);
                    assert!(r.is_zero(), "residual {:?}", r.residual.to_string());
                    assert_eq!(r.window, 5);
                }
            }
        }
    }

    #[test]
    fn trr_detects_perturbed_table() {
        // pure-gravity table with <P^(1)PPP> changed from 1 to 2
        let mut table = pure_gravity_table(8, 2);
        let bad = key(&[(1, 0), (0, 0), (0, 0), (0, 0)]);
        table.insert(bad, q(2));
        let d = PhaseSpaceData::new(
            vec!["P".into()],
            0,
            Metric::identity(1),
            CorrelatorProvider::Table(table),
        )
        .unwrap();
        let t = TruncationPolicy::new(8, 2, 8, 0);
        let r = check_trr(&d, (0, 0), (0, 0), (0, 0), &t);
        assert!(!r.is_zero());
        // first failure where the 4-point function enters: degree 1
        assert_eq!(r.first_failure_degree(), Some(1));
    }

    #[test]
    fn phase_space_json_round_trip() {
        let pg = PhaseSpaceData::pure_gravity();
        let j = PhaseSpaceJson::from_phase_space(&pg);
        let s = serde_json::to_string(&j).unwrap();
        let back: PhaseSpaceJson = serde_json::from_str(&s).unwrap();
        let d = back.to_phase_space().unwrap();
        assert_eq!(d.dim, 1);
        assert_eq!(d.provider, CorrelatorProvider::PureGravity);
        // documented example literal
        let lit = r#"{"dim":1,"basis":["P"],"identity":"P","metric":[["1"]],"correlators":{"source":"pure_gravity"}}"#;
        let parsed: PhaseSpaceJson = serde_json::from_str(lit).unwrap();
        assert!(parsed.to_phase_space().is_ok());
    }

    #[test]
    fn recursion_generator_reproduces_pure_gravity() {
        // From the primary data <PPP> = 1 (all higher primaries vanish),
        // the recursion must rebuild the multinomial descendants.
        let metric = Metric::identity(1);
        let primary = |alphas: &[u32]| -> BigRational {
            if alphas.len() == 3 {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        };
        let got = descendant_table_from_primary(1, &metric, &primary, 7, 3);
        let want = pure_gravity_table(7, 3);
        assert_eq!(got, want);
    }

    #[test]
    fn recursion_generated_table_passes_trr() {
        let metric = Metric::new(vec![
            vec![q(0), q(1)],
            vec![q(1), q(0)],
        ])
        .unwrap();
        let primary = |alphas: &[u32]| -> BigRational {
            if alphas.len() != 3 {
                return BigRational::zero();
            }
            match alphas.iter().filter(|&&a| a == 1).count() {
                1 | 3 => BigRational::one(),
                _ => BigRational::zero(),
            }
        };
        let table = descendant_table_from_primary(2, &metric, &primary, 7, 2);
        let d = PhaseSpaceData::new(
            vec!["P".into(), "Q".into()],
            0,
            metric,
            CorrelatorProvider::Table(table),
        )
        .unwrap();
        let t = TruncationPolicy::new(7, 2, 7, 0);
        for i in 0..=1 {
            for a in 0..=1 {
                for bb in 0..=1 {
                    let r = check_trr(&d, (i, a), (0, bb), (0, 0), &t);
                    assert!(r.is_zero(), "TRR residual: {}", r.residual);
                }
            }
        }
    }

    #[test]
    fn pure_gravity_rejects_higher_dim() {
        let r = PhaseSpaceData::new(
            vec!["P".into(), "Q".into()],
            0,
            Metric::identity(2),
            CorrelatorProvider::PureGravity,
        );
        assert!(r.is_err());
    }
}

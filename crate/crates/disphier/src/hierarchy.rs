//! The master functional of the hierarchy, its Maurer-Cartan residual, the
//! stationary Hamiltonians, and their commutation matrix.
//!
//! The master functional couples each `eta[alpha][k]` to the one-point
//! big-phase-space function with fixed insertion `(k, alpha)`. Its
//! Maurer-Cartan residual `delta I + (1/2){I, I}` vanishes as a local
//! functional exactly when the correlator data satisfies the genus-zero
//! recursion; on the stationary sector the same equation collapses to
//! pairwise commutativity of the Hamiltonians under the hydrodynamic
//! bracket.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bracket::{delta, poisson_bracket_density, Metric};
use crate::correlators::{big_phase_series, InsertionKey, PhaseSpaceData};
use crate::diffring::{DiffPoly, Generator, GeneratorKind, TruncationPolicy};
use crate::graded::{Parity, Poly, Symbol};
use crate::localfunc::{bases_of, Density, GeneratorBase, LocalFunctional};

/// The master functional together with its verified window.
#[derive(Clone, Debug)]
pub struct MasterFunctional {
    pub functional: LocalFunctional,
    /// Correlator insertions are complete through this count.
    pub insertions: u32,
    pub truncation: TruncationPolicy,
}

#[derive(Debug, thiserror::Error)]
pub enum HierarchyError {
    #[error("truncation must allow at least three insertions, got {0}")]
    TooFewInsertions(u32),
    #[error("master functional term is not linear in the odd generators")]
    NotLinearInEta,
}

/// Builds the master functional
/// `I = sum_{k <= K, alpha} oint eta[alpha][k] <<O^(k)_alpha>>(b)`.
pub fn build_master(
    d: &PhaseSpaceData,
    t: &TruncationPolicy,
) -> Result<MasterFunctional, HierarchyError> {
    if t.max_insertions < 3 {
        return Err(HierarchyError::TooFewInsertions(t.max_insertions));
    }
    let mut density = DiffPoly::zero();
    for k in 0..=t.max_level {
        for alpha in 0..d.dim as u32 {
            let series = big_phase_series(d, &InsertionKey::new(vec![(k, alpha)]), t);
            if series.poly.is_zero() {
                continue;
            }
            let eta = DiffPoly::generator(Generator::eta(alpha, k, 0));
            density = density.add(&eta.mul(&series.poly));
        }
    }
    // structural invariant: exactly one odd generator per term
    for (factors, _) in density.0.terms() {
        let odd = factors
            .iter()
            .filter(|(g, _)| g.parity() == Parity::Odd)
            .map(|(_, e)| e)
            .sum::<u32>();
        if odd != 1 {
            return Err(HierarchyError::NotLinearInEta);
        }
    }
    let functional = LocalFunctional::new(
        Density::new(density).expect("master functional has no constant terms"),
    );
    Ok(MasterFunctional {
        functional,
        insertions: t.max_insertions,
        truncation: *t,
    })
}

/// One coefficient of a residual that fails to vanish.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualFailure {
    /// Bosonic degree of the failing monomial class.
    pub degree: u32,
    /// Correlator insertion count that feeds this degree.
    pub insertions: u32,
    /// Euler-tuple entry (base and polynomial) witnessing the failure.
    pub base: String,
    pub witness: String,
}

/// Result of the Maurer-Cartan check.
#[derive(Clone, Debug)]
pub struct McReport {
    /// Representative density of `delta I + (1/2){I,I}` (unfiltered).
    pub residual: Density,
    /// Bosonic degree through which the residual is meaningful.
    pub window: u32,
    /// Maximal fermionic level inside the verified region.
    pub level_window: Option<u32>,
    /// Failures inside the window, empty iff the equation holds there.
    pub failures: Vec<ResidualFailure>,
    /// Bosonic degrees of residual terms beyond the window (ignored).
    pub beyond_window: Vec<u32>,
}

impl McReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Insertion count of the first failing degree, for cross-reporting
    /// against the recursion check.
    pub fn first_failure_insertions(&self) -> Option<u32> {
        self.failures.iter().map(|f| f.insertions).min()
    }
}

/// Computes `delta I + (1/2){I,I}` and tests it against zero, monomial
/// class by monomial class, within the verified window.
///
/// A residual monomial of bosonic degree `d` receives contributions from
/// correlators with `d + 2` insertions through `delta` and from pairs
/// `(n1, n2)` with `n1 + n2 = d + 4` through the bracket, so the degree
/// window is `max_insertions - 2`. A monomial with a fermionic factor at
/// level `m` further needs the `b[.][m+1]` dependence of the one-point
/// series, so only fermionic levels up to `max_level - 1` are verified.
pub fn mc_residual(m: &MasterFunctional, g: &Metric) -> McReport {
    let i_dens = m.functional.representative();
    let delta_part = delta(i_dens);
    let bracket_part = poisson_bracket_density(&m.functional, &m.functional, g)
        .scale(&BigRational::new(1.into(), 2.into()));
    let residual = delta_part.add(&bracket_part);
    let window = degree_window(&m.truncation);
    let level_window = m.truncation.max_level.checked_sub(1);
    report_residual(residual, window, level_window)
}

fn max_fermionic_level(factors: &crate::graded::FactorList<Generator>) -> Option<u32> {
    factors
        .iter()
        .filter(|(g, _)| g.parity() == Parity::Odd)
        .map(|(g, _)| g.level)
        .max()
}

fn report_residual(residual: Density, window: u32, level_window: Option<u32>) -> McReport {
    let in_window = |f: &crate::graded::FactorList<Generator>| {
        DiffPoly::bosonic_degree(f) <= window
            && match (max_fermionic_level(f), level_window) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(l), Some(cap)) => l <= cap,
            }
    };
    let inside = DiffPoly(residual.poly().0.filter_terms(&in_window));
    let mut beyond: Vec<u32> = residual
        .poly()
        .0
        .terms()
        .filter(|(f, _)| !in_window(f))
        .map(|(f, _)| DiffPoly::bosonic_degree(f))
        .collect();
    beyond.sort();
    beyond.dedup();
    // Split by bosonic degree; the Euler operators preserve it, so zero as
    // a functional can be decided degree by degree.
    let mut by_degree: BTreeMap<u32, DiffPoly> = BTreeMap::new();
    for (f, c) in inside.0.terms() {
        by_degree
            .entry(DiffPoly::bosonic_degree(f))
            .or_insert_with(DiffPoly::zero)
            .0
            .add_term(f.clone(), c.clone());
    }
    let mut failures = Vec::new();
    for (deg, poly) in by_degree {
        let func = LocalFunctional::new(Density::new(poly).expect("residual density"));
        if !func.is_zero_functional() {
            let (base, witness) = func
                .euler_tuple()
                .iter()
                .next()
                .map(|(b, w)| (b.to_string(), w.to_string()))
                .unwrap_or_default();
            failures.push(ResidualFailure {
                degree: deg,
                insertions: deg + 2,
                base,
                witness,
            });
        }
    }
    McReport {
        residual,
        window,
        level_window,
        failures,
        beyond_window: beyond,
    }
}

/// Bosonic-degree window implied by a truncation: the one-point series are
/// complete through degree `min(N-1, D)`, i.e. effectively `N_eff` worth of
/// insertions, and the residual is trusted two insertions below that.
pub fn degree_window(t: &TruncationPolicy) -> u32 {
    (t.max_insertions.saturating_sub(1).min(t.max_degree)).saturating_sub(1)
}

/// One stationary Hamiltonian density `G_{k,alpha}(b0)`.
#[derive(Clone, Debug)]
pub struct StationaryHamiltonian {
    pub level: u32,
    pub alpha: u32,
    pub density: Density,
}

/// Result of restricting the master functional to the stationary sector.
#[derive(Clone, Debug)]
pub struct StationaryRestriction {
    /// `I_S`: the master functional with `b[.][k>0] = 0` and each
    /// `eta[alpha][k]` replaced by the constant odd symbol `c[alpha][k]`.
    pub restricted: Density,
    pub hamiltonians: Vec<StationaryHamiltonian>,
    /// Exact density equality between `{I_S, I_S}` computed directly and
    /// the reassembled `sum c c {oint G, oint G}`; a failure would signal
    /// an implementation bug.
    pub pairing_consistent: bool,
}

/// Substitution onto the stationary sector.
fn stationary_substitute(p: &DiffPoly) -> DiffPoly {
    DiffPoly(p.0.map_symbols(|g| match g.kind {
        GeneratorKind::Bosonic => {
            if g.level > 0 {
                Poly::zero()
            } else {
                Poly::symbol(*g)
            }
        }
        GeneratorKind::Fermionic => {
            if g.der > 0 {
                Poly::zero()
            } else {
                Poly::symbol(Generator::odd_const(g.alpha, g.level))
            }
        }
        GeneratorKind::OddConst => Poly::symbol(*g),
    }))
}

/// Restricts the master functional to the stationary sector, extracts the
/// Hamiltonian densities as coefficients of the constant odd symbols, and
/// re-derives the self-bracket expansion as a consistency check.
pub fn stationary_restrict(m: &MasterFunctional, g: &Metric) -> StationaryRestriction {
    let restricted_poly = stationary_substitute(m.functional.representative().poly());
    let restricted = Density::new(restricted_poly.clone()).expect("stationary density");
    // coefficient extraction: every term is c[alpha][k] * (b0 monomial)
    let mut grouped: BTreeMap<(u32, u32), DiffPoly> = BTreeMap::new();
    for (factors, coeff) in restricted_poly.0.terms() {
        let mut c_sym = None;
        let mut rest = Vec::new();
        for (gen, e) in factors {
            if gen.kind == GeneratorKind::OddConst {
                c_sym = Some(*gen);
            } else {
                rest.push((*gen, *e));
            }
        }
        let c_sym = c_sym.expect("stationary terms are linear in the odd constants");
        grouped
            .entry((c_sym.level, c_sym.alpha))
            .or_insert_with(DiffPoly::zero)
            .0
            .add_term(rest, coeff.clone());
    }
    let hamiltonians: Vec<StationaryHamiltonian> = grouped
        .into_iter()
        .map(|((level, alpha), poly)| StationaryHamiltonian {
            level,
            alpha,
            density: Density::new(poly).expect("hamiltonian density"),
        })
        .collect();
    // direct self-bracket of the restriction
    let direct = poisson_bracket_density(
        &LocalFunctional::new(restricted.clone()),
        &LocalFunctional::new(restricted.clone()),
        g,
    );
    // reassembly from pairwise brackets: {I_S, I_S} = sum c c {G, G}
    let mut reassembled = DiffPoly::zero();
    for h1 in &hamiltonians {
        for h2 in &hamiltonians {
            let pair = bracket_pair_density(h1, h2, g);
            if pair.is_zero() {
                continue;
            }
            let c1 = DiffPoly::generator(Generator::odd_const(h1.alpha, h1.level));
            let c2 = DiffPoly::generator(Generator::odd_const(h2.alpha, h2.level));
            reassembled = reassembled.add(&c1.mul(&c2).mul(&pair));
        }
    }
    let pairing_consistent = direct.poly() == &reassembled;
    StationaryRestriction {
        restricted,
        hamiltonians,
        pairing_consistent,
    }
}

fn bracket_pair_density(
    h1: &StationaryHamiltonian,
    h2: &StationaryHamiltonian,
    g: &Metric,
) -> DiffPoly {
    poisson_bracket_density(
        &LocalFunctional::new(h1.density.clone()),
        &LocalFunctional::new(h2.density.clone()),
        g,
    )
    .into_poly()
}

/// Builds the stationary Hamiltonians directly from the one-point series
/// with level-zero extras, without the master-functional detour. The two
/// routes agree on overlapping windows; the restriction path is the
/// consistency check.
pub fn stationary_hamiltonians(
    d: &PhaseSpaceData,
    max_level: u32,
    max_insertions: u32,
) -> Vec<StationaryHamiltonian> {
    let t = TruncationPolicy::new(max_insertions, 0, max_insertions, 0);
    let mut out = Vec::new();
    for k in 0..=max_level {
        for alpha in 0..d.dim as u32 {
            let series = big_phase_series(d, &InsertionKey::new(vec![(k, alpha)]), &t);
            out.push(StationaryHamiltonian {
                level: k,
                alpha,
                density: Density::new(series.poly).expect("hamiltonian density"),
            });
        }
    }
    out
}

/// One entry of the commutation matrix.
#[derive(Clone, Debug)]
pub struct CommutationEntry {
    pub left: (u32, u32),
    pub right: (u32, u32),
    /// Pre-reduction bracket density.
    pub density: Density,
    /// Whether the entry vanishes as a local functional.
    pub zero: bool,
}

/// The full matrix of pairwise brackets of the Hamiltonians.
pub fn commutation_matrix(hams: &[StationaryHamiltonian], g: &Metric) -> Vec<CommutationEntry> {
    let functionals: Vec<LocalFunctional> = hams
        .iter()
        .map(|h| LocalFunctional::new(h.density.clone()))
        .collect();
    let mut out = Vec::new();
    for (i, h1) in hams.iter().enumerate() {
        for (j, h2) in hams.iter().enumerate() {
            let density = poisson_bracket_density(&functionals[i], &functionals[j], g);
            let zero = LocalFunctional::new(density.clone()).is_zero_functional();
            out.push(CommutationEntry {
                left: (h1.level, h1.alpha),
                right: (h2.level, h2.alpha),
                density,
                zero,
            });
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::{pure_gravity_table, CorrelatorProvider};
    use crate::localfunc::functionals_equal;

    fn fact(n: u32) -> BigRational {
        BigRational::from_integer((1..=n as u64).product::<u64>().max(1).into())
    }

    fn b0() -> DiffPoly {
        DiffPoly::generator(Generator::b(0, 0, 0))
    }

    #[test]
    fn master_functional_is_linear_in_eta() {
        let pg = PhaseSpaceData::pure_gravity();
        let t = TruncationPolicy::new(6, 2, 6, 2);
        let m = build_master(&pg, &t).unwrap();
        assert!(!m.functional.representative().is_zero());
        // linearity in eta is enforced by build_master; also check parity
        assert_eq!(m.functional.parity(), Some(Parity::Odd));
    }

    #[test]
    fn master_one_point_coefficient() {
        // K=0, level-0 extras, N=4: coefficient of eta0 b0^2 is <PPP>/2! = 1/2
        let pg = PhaseSpaceData::pure_gravity();
        let t = TruncationPolicy::new(4, 0, 4, 0);
        let m = build_master(&pg, &t).unwrap();
        let eta0 = Generator::eta(0, 0, 0);
        let want_factor = vec![(Generator::b(0, 0, 0), 2), (eta0, 1)];
        let coeff = m
            .functional
            .representative()
            .poly()
            .0
            .coeff_of(&want_factor);
        assert_eq!(coeff, BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn empty_table_gives_zero_master() {
        let d = PhaseSpaceData::new(
            vec!["P".into()],
            0,
            Metric::identity(1),
            CorrelatorProvider::Table(Default::default()),
        )
        .unwrap();
        let t = TruncationPolicy::new(6, 1, 6, 1);
        let m = build_master(&d, &t).unwrap();
        assert!(m.functional.representative().is_zero());
        let r = mc_residual(&m, &d.metric);
        assert!(r.passed());
    }

    #[test]
    fn mc_residual_vanishes_for_pure_gravity_small() {
        let pg = PhaseSpaceData::pure_gravity();
        let t = TruncationPolicy::new(6, 2, 6, 2);
        let m = build_master(&pg, &t).unwrap();
        let r = mc_residual(&m, &pg.metric);
        assert_eq!(r.window, 4);
        assert!(r.passed(), "failures: {:?}", r.failures);
    }

    #[test]
    fn mc_residual_detects_perturbed_table() {
        let mut table = pure_gravity_table(6, 2);
        let bad = InsertionKey::new(vec![(1, 0), (0, 0), (0, 0), (0, 0)]);
        table.insert(bad, BigRational::from_integer(2.into()));
        let d = PhaseSpaceData::new(
            vec!["P".into()],
            0,
            Metric::identity(1),
            CorrelatorProvider::Table(table),
        )
        .unwrap();
        let t = TruncationPolicy::new(6, 2, 6, 2);
        let m = build_master(&d, &t).unwrap();
        let r = mc_residual(&m, &d.metric);
        assert!(!r.passed());
        // the perturbed 4-point entry feeds bosonic degree 2
        assert_eq!(r.first_failure_insertions(), Some(4));
    }

    #[test]
    fn stationary_hamiltonians_match_closed_form() {
        let pg = PhaseSpaceData::pure_gravity();
        let t = TruncationPolicy::new(8, 3, 8, 2);
        let m = build_master(&pg, &t).unwrap();
        let s = stationary_restrict(&m, &pg.metric);
        assert!(s.pairing_consistent);
        for h in &s.hamiltonians {
            let want = b0()
                .pow(h.level + 2)
                .scale(&fact(h.level + 2).recip());
            assert_eq!(h.density.poly(), &want, "G_{}", h.level);
        }
        // direct route agrees
        let direct = stationary_hamiltonians(&pg, 3, 8);
        for (a, b) in s.hamiltonians.iter().zip(&direct) {
            assert_eq!(a.density, b.density);
        }
    }

    #[test]
    fn stationary_is_linear_in_constants() {
        let pg = PhaseSpaceData::pure_gravity();
        let t = TruncationPolicy::new(6, 2, 6, 2);
        let m = build_master(&pg, &t).unwrap();
        let s = stationary_restrict(&m, &pg.metric);
        for (factors, _) in s.restricted.poly().0.terms() {
            let n_const = factors
                .iter()
                .filter(|(g, _)| g.kind == GeneratorKind::OddConst)
                .count();
            assert_eq!(n_const, 1);
        }
    }

    #[test]
    fn commutation_matrix_zero_and_antisymmetric() {
        let pg = PhaseSpaceData::pure_gravity();
        let hams = stationary_hamiltonians(&pg, 3, 6);
        let entries = commutation_matrix(&hams, &pg.metric);
        for e in &entries {
            assert!(e.zero, "entry {:?} x {:?}", e.left, e.right);
        }
        // antisymmetry of entries as functionals
        for e in &entries {
            let flipped = entries
                .iter()
                .find(|f| f.left == e.right && f.right == e.left)
                .unwrap();
            let l = LocalFunctional::new(e.density.clone());
            let r = LocalFunctional::new(flipped.density.clone());
            assert!(functionals_equal(&l, &r.scale(&-BigRational::one())));
        }
    }

    #[test]
    fn dim_one_tables_always_commute() {
        // In a one-dimensional phase space the stationary Hamiltonians are
        // univariate in b[0][0], and f'(b) g''(b) dz b is always exact, so
        // even a recursion-violating table commutes.
        let mut table = pure_gravity_table(7, 2);
        let bad = InsertionKey::new(vec![(1, 0), (0, 0), (0, 0), (0, 0)]);
        table.insert(bad, BigRational::from_integer(3.into()));
        let d = PhaseSpaceData::new(
            vec!["P".into()],
            0,
            Metric::identity(1),
            CorrelatorProvider::Table(table),
        )
        .unwrap();
        let hams = stationary_hamiltonians(&d, 2, 7);
        let entries = commutation_matrix(&hams, &d.metric);
        assert!(entries.iter().all(|e| e.zero));
    }

    fn two_dim_fixture() -> (Metric, std::collections::BTreeMap<InsertionKey, BigRational>) {
        // quadratic-potential Frobenius data: F = t0^2 t1 / 2 + t1^3 / 6
        let q = |n: i64| BigRational::from_integer(n.into());
        let metric = Metric::new(vec![vec![q(0), q(1)], vec![q(1), q(0)]]).unwrap();
        let primary = |alphas: &[u32]| -> BigRational {
            if alphas.len() != 3 {
                return BigRational::zero();
            }
            let ones = alphas.iter().filter(|&&a| a == 1).count();
            // d0 d0 d1 F = 1, d1 d1 d1 F = 1, all else 0
            match ones {
                1 | 3 => BigRational::one(),
                _ => BigRational::zero(),
            }
        };
        let table = crate::correlators::descendant_table_from_primary(2, &metric, &primary, 7, 2);
        (metric, table)
    }

    #[test]
    fn commutation_holds_for_two_dim_table() {
        let (metric, table) = two_dim_fixture();
        let d = PhaseSpaceData::new(
            vec!["P".into(), "Q".into()],
            0,
            metric,
            CorrelatorProvider::Table(table),
        )
        .unwrap();
        let hams = stationary_hamiltonians(&d, 1, 6);
        let entries = commutation_matrix(&hams, &d.metric);
        for e in &entries {
            assert!(e.zero, "entry {:?} x {:?}: {}", e.left, e.right, e.density);
        }
    }

    #[test]
    fn commutation_detects_broken_table() {
        let (metric, mut table) = two_dim_fixture();
        // corrupt one descendant entry; the added b0^2 term in G_{1,0}
        // makes the bracket with G_{0,1} non-exact
        let bad = InsertionKey::new(vec![(1, 0), (0, 0), (0, 0)]);
        let old = table
            .get(&bad)
            .cloned()
            .unwrap_or_else(BigRational::zero);
        table.insert(bad, old + BigRational::one());
        let d = PhaseSpaceData::new(
            vec!["P".into(), "Q".into()],
            0,
            metric,
            CorrelatorProvider::Table(table),
        )
        .unwrap();
        let hams = stationary_hamiltonians(&d, 1, 6);
        let entries = commutation_matrix(&hams, &d.metric);
        assert!(entries.iter().any(|e| !e.zero));
    }

    #[test]
    fn two_dim_stationary_matches_potential_derivatives() {
        // G_{0,alpha} restricted to the small phase space is the alpha
        // derivative of the primary potential.
        let (metric, table) = two_dim_fixture();
        let d = PhaseSpaceData::new(
            vec!["P".into(), "Q".into()],
            0,
            metric,
            CorrelatorProvider::Table(table),
        )
        .unwrap();
        let hams = stationary_hamiltonians(&d, 0, 6);
        let q = |n: i64, m: i64| BigRational::new(n.into(), m.into());
        let b = |a: u32| DiffPoly::generator(Generator::b(a, 0, 0));
        // F = t0^2 t1/2 + t1^3/6: dF/dt0 = t0 t1, dF/dt1 = t0^2/2 + t1^2/2
        let want0 = b(0).mul(&b(1));
        let want1 = b(0).pow(2).scale(&q(1, 2)).add(&b(1).pow(2).scale(&q(1, 2)));
        let g0 = hams.iter().find(|h| h.level == 0 && h.alpha == 0).unwrap();
        let g1 = hams.iter().find(|h| h.level == 0 && h.alpha == 1).unwrap();
        assert_eq!(g0.density.poly(), &want0);
        assert_eq!(g1.density.poly(), &want1);
    }

    #[test]
    fn rejects_tiny_truncation() {
        let pg = PhaseSpaceData::pure_gravity();
        let t = TruncationPolicy::new(2, 0, 2, 0);
        assert!(build_master(&pg, &t).is_err());
    }
}

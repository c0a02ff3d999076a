//! The hydrodynamic Poisson bracket on local functionals and the odd
//! differential on densities.
//!
//! The bracket of two functionals pairs the level-zero bosonic Euler
//! derivatives through the inverse metric, with a `d_z` applied to the
//! second slot; only the `b[alpha][0]` variables contribute. The odd
//! differential sends `b[alpha][k]` to `d_z eta[alpha][k-1]` and kills
//! everything else. Together with the quotient by total derivatives these
//! form a differential Z/2-graded Lie algebra, which `check_dgla` verifies
//! exactly on sampled inputs.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diffring::{DiffPoly, Generator, GeneratorKind};
use crate::graded::{Parity, Poly};
use crate::linalg::{self, Matrix};
use crate::localfunc::{functionals_equal, Density, GeneratorBase, LocalFunctional};

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("metric is not square: row {0} has length {1}")]
    NotSquare(usize, usize),
    #[error("metric is not symmetric at ({0},{1})")]
    NotSymmetric(usize, usize),
    #[error("metric is singular")]
    Singular,
}

/// Symmetric invertible pairing on the small phase space, with its exact
/// inverse cached. The inverse raises indices in the bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    g: Matrix,
    inv: Matrix,
}

impl Metric {
    pub fn new(g: Matrix) -> Result<Metric, MetricError> {
        let n = g.len();
        for (i, row) in g.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NotSquare(i, row.len()));
            }
        }
        for i in 0..n {
            for j in 0..i {
                if g[i][j] != g[j][i] {
                    return Err(MetricError::NotSymmetric(i, j));
                }
            }
        }
        let inv = linalg::invert(&g).ok_or(MetricError::Singular)?;
        Ok(Metric { g, inv })
    }

    pub fn identity(dim: usize) -> Metric {
        Metric::new(linalg::identity(dim)).expect("identity metric")
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.g
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inv
    }
}

/// The Poisson bracket of two local functionals. The representative density
/// is exactly the double Euler contraction, before any reduction.
pub fn poisson_bracket(l1: &LocalFunctional, l2: &LocalFunctional, g: &Metric) -> LocalFunctional {
    LocalFunctional::new(poisson_bracket_density(l1, l2, g))
}

/// The pre-reduction density of the bracket:
/// `sum_{a,b} g^{ab} E_{b[a][0]}(L1) * d_z E_{b[b][0]}(L2)`.
pub fn poisson_bracket_density(l1: &LocalFunctional, l2: &LocalFunctional, g: &Metric) -> Density {
    let dim = g.dim();
    let e1: Vec<DiffPoly> = (0..dim)
        .map(|a| l1.euler_entry(GeneratorBase::b(a as u32, 0)))
        .collect();
    let e2: Vec<DiffPoly> = (0..dim)
        .map(|b| {
            l2.euler_entry(GeneratorBase::b(b as u32, 0))
                .total_z_derivative()
        })
        .collect();
    let mut acc = DiffPoly::zero();
    for (a, ea) in e1.iter().enumerate() {
        if ea.is_zero() {
            continue;
        }
        for (b, deb) in e2.iter().enumerate() {
            let w = &g.inverse()[a][b];
            if w.is_zero() || deb.is_zero() {
                continue;
            }
            acc = acc.add(&ea.mul(deb).scale(w));
        }
    }
    Density::new(acc).expect("bracket densities never contain constants")
}

/// Same bracket starting from densities.
pub fn bracket_of_densities(d1: &Density, d2: &Density, g: &Metric) -> Density {
    poisson_bracket_density(
        &LocalFunctional::new(d1.clone()),
        &LocalFunctional::new(d2.clone()),
        g,
    )
}

/// Odd differential on polynomials: `b[alpha][k] -> d_z eta[alpha][k-1]`
/// for `k >= 1`, zero on `b[alpha][0]`, on `eta`, and on the stationary
/// constants; extended as a graded left derivation, commuting with `d_z`.
pub fn delta_poly(p: &DiffPoly) -> DiffPoly {
    let mut out = Poly::zero();
    for (factors, coeff) in p.0.terms() {
        for (idx, (gen, e)) in factors.iter().enumerate() {
            if gen.kind != GeneratorKind::Bosonic || gen.level == 0 {
                continue;
            }
            let image = Generator::eta(gen.alpha, gen.level - 1, gen.der + 1);
            let mut rest = factors.clone();
            if *e == 1 {
                rest.remove(idx);
            } else {
                rest[idx].1 = e - 1;
            }
            // The graded Leibniz prefix sign equals the sign of moving the
            // odd image to the front, so the two cancel and only the
            // multiplicity survives.
            let c = coeff.clone() * BigRational::from_integer((*e).into());
            let term =
                Poly::monomial(c, vec![(image, 1)]).mul(&Poly::monomial(BigRational::one(), rest));
            out = out.add(&term);
        }
    }
    DiffPoly(out)
}

/// `delta` on densities.
pub fn delta(d: &Density) -> Density {
    Density::new(delta_poly(d.poly())).expect("delta images never contain constants")
}

/// `delta` descends to the quotient because it commutes with `d_z`.
pub fn delta_functional(l: &LocalFunctional) -> LocalFunctional {
    LocalFunctional::new(delta(l.representative()))
}

// -------------------------------------------------------------------------
// Differential graded Lie algebra verification
// -------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DglaReport {
    pub samples: usize,
    pub antisymmetry_checked: usize,
    pub jacobi_checked: usize,
    pub delta_squared_checked: usize,
    pub compatibility_checked: usize,
    pub exactness_checked: usize,
    pub counterexample: Option<String>,
}

impl DglaReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn parity_num(p: Parity) -> u32 {
    match p {
        Parity::Even => 0,
        Parity::Odd => 1,
    }
}

/// Graded antisymmetry as functionals:
/// `{L1,L2} + (-1)^{|L1||L2|} {L2,L1} = 0`.
pub fn check_antisymmetry(l1: &LocalFunctional, l2: &LocalFunctional, g: &Metric) -> bool {
    let (Some(p1), Some(p2)) = (l1.parity(), l2.parity()) else {
        return true;
    };
    let b12 = poisson_bracket(l1, l2, g);
    let b21 = poisson_bracket(l2, l1, g);
    let sign = if parity_num(p1) * parity_num(p2) % 2 == 1 {
        -BigRational::one()
    } else {
        BigRational::one()
    };
    b12.add(&b21.scale(&sign)).is_zero_functional()
}

/// Graded Jacobi identity in the cyclic form
/// `(-1)^{|a||c|}{a,{b,c}} + (-1)^{|b||a|}{b,{c,a}} + (-1)^{|c||b|}{c,{a,b}} = 0`.
pub fn check_jacobi(
    a: &LocalFunctional,
    b: &LocalFunctional,
    c: &LocalFunctional,
    g: &Metric,
) -> bool {
    let (Some(pa), Some(pb), Some(pc)) = (a.parity(), b.parity(), c.parity()) else {
        return true;
    };
    let sgn = |x: Parity, y: Parity| {
        if parity_num(x) * parity_num(y) % 2 == 1 {
            -BigRational::one()
        } else {
            BigRational::one()
        }
    };
    let t1 = poisson_bracket(a, &poisson_bracket(b, c, g), g).scale(&sgn(pa, pc));
    let t2 = poisson_bracket(b, &poisson_bracket(c, a, g), g).scale(&sgn(pb, pa));
    let t3 = poisson_bracket(c, &poisson_bracket(a, b, g), g).scale(&sgn(pc, pb));
    t1.add(&t2).add(&t3).is_zero_functional()
}

/// `delta` squares to zero on densities.
pub fn check_delta_squared(d: &Density) -> bool {
    delta(&delta(d)).is_zero()
}

/// Compatibility of the differential with the bracket:
/// `delta{L1,L2} = {delta L1, L2} + (-1)^{|L1|} {L1, delta L2}`.
pub fn check_compatibility(l1: &LocalFunctional, l2: &LocalFunctional, g: &Metric) -> bool {
    let Some(p1) = l1.parity() else {
        return true;
    };
    let lhs = delta_functional(&poisson_bracket(l1, l2, g));
    let r1 = poisson_bracket(&delta_functional(l1), l2, g);
    let r2 = poisson_bracket(l1, &delta_functional(l2), g);
    let sign = if p1 == Parity::Odd {
        -BigRational::one()
    } else {
        BigRational::one()
    };
    functionals_equal(&lhs, &r1.add(&r2.scale(&sign)))
}

/// Well-definedness on the quotient: bracketing with an exact density gives
/// the zero functional in either slot.
pub fn check_exactness(w: &Density, l: &LocalFunctional, g: &Metric) -> bool {
    let dw = LocalFunctional::new(w.total_z_derivative());
    poisson_bracket(&dw, l, g).is_zero_functional()
        && poisson_bracket(l, &dw, g).is_zero_functional()
}

/// Parameters for random density sampling.
#[derive(Clone, Copy, Debug)]
pub struct SampleParams {
    pub dim: u32,
    pub max_level: u32,
    pub max_der: u32,
    pub max_degree: u32,
    pub max_terms: u32,
}

impl Default for SampleParams {
    fn default() -> Self {
        SampleParams {
            dim: 1,
            max_level: 2,
            max_der: 2,
            max_degree: 5,
            max_terms: 3,
        }
    }
}

/// Random parity-homogeneous density with small rational coefficients.
pub fn random_density(rng: &mut impl Rng, p: &SampleParams, parity: Parity) -> Density {
    loop {
        let mut acc = DiffPoly::zero();
        let n_terms = rng.gen_range(1..=p.max_terms);
        for _ in 0..n_terms {
            let deg = rng.gen_range(1..=p.max_degree.max(1));
            let mut gens = Vec::new();
            for _ in 0..deg {
                let kind = if rng.gen_bool(0.5) {
                    GeneratorKind::Bosonic
                } else {
                    GeneratorKind::Fermionic
                };
                let alpha = rng.gen_range(0..p.dim);
                let level = rng.gen_range(0..=p.max_level);
                let der = rng.gen_range(0..=p.max_der);
                gens.push(Generator {
                    kind,
                    alpha,
                    level,
                    der,
                });
            }
            let odd = gens
                .iter()
                .filter(|g| g.kind == GeneratorKind::Fermionic)
                .count();
            if Parity::of_degree(odd as i64) != parity {
                if odd > 0 {
                    let pos = gens
                        .iter()
                        .position(|g| g.kind == GeneratorKind::Fermionic)
                        .unwrap();
                    gens.remove(pos);
                } else {
                    gens.push(Generator::eta(
                        rng.gen_range(0..p.dim),
                        rng.gen_range(0..=p.max_level),
                        rng.gen_range(0..=p.max_der),
                    ));
                }
            }
            if gens.is_empty() {
                continue;
            }
            let num: i64 = [-2i64, -1, 1, 2, 3][rng.gen_range(0..5)];
            let den: i64 = [1i64, 2, 3][rng.gen_range(0..3)];
            let coeff = BigRational::new(num.into(), den.into());
            acc = acc.add(&DiffPoly(Poly::from_unsorted(coeff, &gens)));
        }
        if acc.is_zero() {
            continue;
        }
        if let Ok(d) = Density::new(acc) {
            if d.parity() == Some(parity) {
                return d;
            }
        }
    }
}

/// Exact verification of the dgLa axioms on `n_samples` random tuples with
/// the given seed. A counterexample would signal an implementation bug.
pub fn check_dgla(n_samples: usize, seed: u64, params: &SampleParams, g: &Metric) -> DglaReport {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = DglaReport {
        samples: n_samples,
        antisymmetry_checked: 0,
        jacobi_checked: 0,
        delta_squared_checked: 0,
        compatibility_checked: 0,
        exactness_checked: 0,
        counterexample: None,
    };
    for i in 0..n_samples {
        let par = |rng: &mut rand_chacha::ChaCha8Rng| {
            if rng.gen_bool(0.5) {
                Parity::Even
            } else {
                Parity::Odd
            }
        };
        let p1 = par(&mut rng);
        let p2 = par(&mut rng);
        let p3 = par(&mut rng);
        let d1 = random_density(&mut rng, params, p1);
        let d2 = random_density(&mut rng, params, p2);
        let d3 = random_density(&mut rng, params, p3);
        let l1 = LocalFunctional::new(d1.clone());
        let l2 = LocalFunctional::new(d2.clone());
        let l3 = LocalFunctional::new(d3.clone());
        if !check_antisymmetry(&l1, &l2, g) {
            report.counterexample = Some(format!("antisymmetry failed at sample {i}: {d1}; {d2}"));
            return report;
        }
        report.antisymmetry_checked += 1;
        if !check_jacobi(&l1, &l2, &l3, g) {
            report.counterexample = Some(format!("jacobi failed at sample {i}: {d1}; {d2}; {d3}"));
            return report;
        }
        report.jacobi_checked += 1;
        if !check_delta_squared(&d1) {
            report.counterexample = Some(format!("delta^2 failed at sample {i}: {d1}"));
            return report;
        }
        report.delta_squared_checked += 1;
        if !check_compatibility(&l1, &l2, g) {
            report.counterexample =
                Some(format!("delta compatibility failed at sample {i}: {d1}; {d2}"));
            return report;
        }
        report.compatibility_checked += 1;
        if !check_exactness(&d1, &l2, g) {
            report.counterexample =
                Some(format!("exact-density bracket failed at sample {i}: {d1}; {d2}"));
            return report;
        }
        report.exactness_checked += 1;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffring::Generator as G;
    use crate::localfunc::euler_derivative;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn b(der: u32) -> DiffPoly {
        DiffPoly::generator(G::b(0, 0, der))
    }

    fn dens(p: DiffPoly) -> Density {
        Density::new(p).unwrap()
    }

    fn lf(p: DiffPoly) -> LocalFunctional {
        LocalFunctional::new(dens(p))
    }

    fn fact(n: u32) -> BigRational {
        BigRational::from_integer((1..=n as u64).product::<u64>().max(1).into())
    }

    #[test]
    fn kdv_hamiltonians_commute_with_expected_density() {
        // G_k = b0^(k+2)/(k+2)!, dim 1, unit metric: the bracket density is
        // b0^(k+1+m) dz b0 / ((k+1)! m!) and integrates to zero.
        let g = Metric::identity(1);
        for k in 0..4u32 {
            for m in 0..4u32 {
                let gk = lf(b(0).pow(k + 2).scale(&fact(k + 2).recip()));
                let gm = lf(b(0).pow(m + 2).scale(&fact(m + 2).recip()));
                let density = poisson_bracket_density(&gk, &gm, &g);
                let expected = b(0)
                    .pow(k + 1 + m)
                    .mul(&b(1))
                    .scale(&(fact(k + 1) * fact(m)).recip());
                assert_eq!(density.poly(), &expected);
                assert!(LocalFunctional::new(density).is_zero_functional());
            }
        }
    }

    #[test]
    fn self_bracket_of_quadratic_vanishes() {
        let g = Metric::identity(1);
        let l = lf(b(0).pow(2).scale(&q(1, 2)));
        assert!(poisson_bracket(&l, &l, &g).is_zero_functional());
    }

    #[test]
    fn derived_bracket_value() {
        // {b0^3/6, (dz b0)^2/2} = -(1/2) (dz b0)^3 as functionals
        let g = Metric::identity(1);
        let l1 = lf(b(0).pow(3).scale(&q(1, 6)));
        let l2 = lf(b(1).pow(2).scale(&q(1, 2)));
        let got = poisson_bracket(&l1, &l2, &g);
        let want = lf(b(1).pow(3).scale(&q(-1, 2)));
        assert!(functionals_equal(&got, &want));
        // the difference of representatives is an exact density
        let diff = got.representative().sub(want.representative());
        assert!(crate::localfunc::find_antiderivative(&diff, 4).is_some());
    }

    #[test]
    fn delta_defining_formula() {
        // delta(b[0][0]) = 0
        assert!(delta_poly(&b(0)).is_zero());
        // delta(b1^2/2) = b1 * dz eta0
        let b1 = DiffPoly::generator(G::b(0, 1, 0));
        let deta0 = DiffPoly::generator(G::eta(0, 0, 1));
        assert_eq!(delta_poly(&b1.pow(2).scale(&q(1, 2))), b1.mul(&deta0));
        // delta commutes with dz
        let p = b1.pow(3).mul(&b(1));
        assert_eq!(
            delta_poly(&p.total_z_derivative()),
            delta_poly(&p).total_z_derivative()
        );
        // delta^2 = 0 on a product of levels
        let b2 = DiffPoly::generator(G::b(0, 2, 0));
        assert!(delta_poly(&delta_poly(&b2.mul(&b1))).is_zero());
    }

    #[test]
    fn delta_is_odd_derivation() {
        let b1 = DiffPoly::generator(G::b(0, 1, 0));
        let e0 = DiffPoly::generator(G::eta(0, 0, 0));
        // delta(eta0 * b1) = -eta0 * delta(b1) since delta passes eta0
        let p = e0.mul(&b1);
        let expected = e0.mul(&delta_poly(&b1)).neg();
        assert_eq!(delta_poly(&p), expected);
    }

    #[test]
    fn bracket_with_exact_density_vanishes() {
        let g = Metric::identity(1);
        let e0 = DiffPoly::generator(G::eta(0, 0, 0));
        let b1 = DiffPoly::generator(G::b(0, 1, 0));
        let w = dens(b(0).mul(&e0).mul(&b1));
        let l = lf(b(0).pow(2));
        assert!(check_exactness(&w, &l, &g));
    }

    #[test]
    fn euler_derivative_sees_only_matching_base() {
        let e = euler_derivative(&dens(b(0).pow(2)), GeneratorBase::eta(0, 0));
        assert!(e.is_zero());
    }

    #[test]
    fn fixed_regression_dgla_triples() {
        let g = Metric::identity(1);
        let l1 = lf(b(0).pow(3).scale(&q(1, 6)));
        let l2 = lf(b(0).pow(2).scale(&q(1, 2)));
        let l3 = lf(b(1).pow(2).scale(&q(1, 2)));
        assert!(check_jacobi(&l1, &l2, &l3, &g));
        let e0 = DiffPoly::generator(G::eta(0, 0, 0));
        let o1 = lf(e0.mul(&b(0).pow(2)));
        assert!(check_compatibility(&o1, &l1, &g));
        assert!(check_antisymmetry(&o1, &o1, &g));
    }

    #[test]
    fn sampled_dgla_suite_small() {
        let g = Metric::identity(1);
        let params = SampleParams {
            max_degree: 4,
            max_terms: 2,
            ..Default::default()
        };
        let report = check_dgla(8, 17, &params, &g);
        assert!(report.passed(), "{:?}", report.counterexample);
    }

    #[test]
    fn sampled_dgla_suite_dim2() {
        let mut m = linalg::identity(2);
        m[0][1] = q(1, 2);
        m[1][0] = q(1, 2);
        let g = Metric::new(m).unwrap();
        let params = SampleParams {
            dim: 2,
            max_degree: 3,
            max_terms: 2,
            max_level: 1,
            max_der: 1,
            ..Default::default()
        };
        let report = check_dgla(6, 99, &params, &g);
        assert!(report.passed(), "{:?}", report.counterexample);
    }
}

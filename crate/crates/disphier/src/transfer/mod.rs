//! Finite-dimensional (-1)-shifted symplectic spaces, the BV bracket, the
//! classical master equation, and tree-level homotopy transfer.
//!
//! Everything is Z-graded over the rationals. Functions on a space are
//! polynomials in coordinate symbols `y^i` dual to the basis, with parity
//! inherited from the basis degree. The sign conventions are fixed once
//! and used consistently throughout:
//!
//! - `Omega[i][j] = omega(e_i, e_j)`, nonzero only when the degrees sum
//!   to one, graded antisymmetric.
//! - The bracket kernel is `M := -Omega^{-1}`; in Darboux coordinates this
//!   reproduces the classical antibracket
//!   `{F,G} = dF/d(field) dG/d(antifield) - dF/d(antifield) dG/d(field)`
//!   with right derivatives on the first slot and left on the second.
//! - The BV kernel is the graded-symmetric dressing `K0^{ij} =
//!   (-1)^{par(i)} M^{ij}`; it satisfies `sum_j K0^{ij} Omega[j][k] =
//!   -(-1)^{par(i)} delta_{ik}` and is annihilated by `Q (x) 1 + 1 (x) Q`.
//! - An operator `T` of odd degree gets the kernel `M_T := -T Omega^{-1}`
//!   and the symmetric dressing `K_T = (-1)^{par} M_T`; for `T = P_hat`
//!   this is the propagator placed on tree edges.

pub mod fixtures;
pub mod homotopy;
pub mod trees;

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::graded::{FactorList, Parity, Poly, Symbol};
use crate::linalg::{self, Matrix};

/// Coordinate symbol on a graded space: `copy` distinguishes vertex
/// alphabets during tree evaluation and is zero for ordinary functionals.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Slot {
    pub copy: u32,
    pub idx: u32,
    parity: Parity,
}

impl Slot {
    pub fn new(idx: u32, parity: Parity) -> Slot {
        Slot {
            copy: 0,
            idx,
            parity,
        }
    }

    pub fn in_copy(copy: u32, idx: u32, parity: Parity) -> Slot {
        Slot { copy, idx, parity }
    }
}

impl Symbol for Slot {
    fn parity(&self) -> Parity {
        self.parity
    }
}

/// Finite graded vector space with labeled basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSpace {
    pub basis: Vec<(String, i64)>,
}

impl GradedSpace {
    pub fn new(basis: Vec<(String, i64)>) -> GradedSpace {
        GradedSpace { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.basis[i].1
    }

    pub fn parity(&self, i: usize) -> Parity {
        Parity::of_degree(self.basis[i].1)
    }

    pub fn slot(&self, i: usize) -> Slot {
        Slot::new(i as u32, self.parity(i))
    }

    fn parity_sign(&self, i: usize) -> BigRational {
        match self.parity(i) {
            Parity::Even => BigRational::one(),
            Parity::Odd => -BigRational::one(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TransferError {
    #[error("matrix has wrong shape: expected {0}x{1}")]
    Shape(usize, usize),
    #[error("differential violates degree: Q[{0}][{1}] nonzero but deg {2} != deg {3} + 1")]
    QDegree(usize, usize, i64, i64),
    #[error("Q does not square to zero")]
    QSquare,
    #[error("pairing is degenerate")]
    Degenerate,
    #[error("shifted symplectic data failed verification:\n{0}")]
    Verification(VerifyReport),
    #[error("functional is not of degree zero")]
    NotDegreeZero,
    #[error("interaction has a Taylor component of arity {0} < 3")]
    LowArity(usize),
    #[error("contraction data failed verification:\n{0}")]
    Contraction(VerifyReport),
    #[error("bad rational literal {0:?}")]
    BadRational(String),
    #[error("{0}")]
    Fixture(String),
}

fn check_shape(m: &Matrix, rows: usize, cols: usize) -> Result<(), TransferError> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(TransferError::Shape(rows, cols));
    }
    Ok(())
}

/// A complex: graded space with a square-zero degree +1 differential.
#[derive(Clone, Debug)]
pub struct DGSpace {
    pub space: GradedSpace,
    /// `q[i][j]` is the coefficient of `e_i` in `Q(e_j)`.
    pub q: Matrix,
}

impl DGSpace {
    pub fn new(space: GradedSpace, q: Matrix) -> Result<DGSpace, TransferError> {
        let n = space.dim();
        check_shape(&q, n, n)?;
        for (i, row) in q.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() && space.degree(i) != space.degree(j) + 1 {
                    return Err(TransferError::QDegree(i, j, space.degree(i), space.degree(j)));
                }
            }
        }
        if !linalg::is_zero_matrix(&linalg::mat_mul(&q, &q)) {
            return Err(TransferError::QSquare);
        }
        Ok(DGSpace { space, q })
    }

    pub fn zero_differential(space: GradedSpace) -> DGSpace {
        let n = space.dim();
        DGSpace {
            q: linalg::zeros(n, n),
            space,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// Outcome of a structural verification, one line per named check.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<(String, bool)>,
}

impl VerifyReport {
    pub fn push(&mut self, name: &str, ok: bool) {
        self.checks.push((name.to_string(), ok));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, ok) in &self.checks {
            writeln!(f, "  {} {}", if *ok { "ok  " } else { "FAIL" }, name)?;
        }
        Ok(())
    }
}

/// A (-1)-shifted symplectic complex with its BV kernel.
#[derive(Clone, Debug)]
pub struct ShiftedSymplectic {
    pub dg: DGSpace,
    pub omega: Matrix,
    /// Graded-symmetric BV kernel, the parity dressing of `-omega^{-1}`.
    pub k0: Matrix,
}

impl ShiftedSymplectic {
    /// Builds the BV kernel from the pairing and verifies all invariants.
    pub fn new(dg: DGSpace, omega: Matrix) -> Result<ShiftedSymplectic, TransferError> {
        let n = dg.dim();
        check_shape(&omega, n, n)?;
        let inv = linalg::invert(&omega).ok_or(TransferError::Degenerate)?;
        let m = linalg::mat_neg(&inv);
        let mut k0 = m.clone();
        for (i, row) in k0.iter_mut().enumerate() {
            let s = dg.space.parity_sign(i);
            for v in row.iter_mut() {
                *v *= &s;
            }
        }
        let s = ShiftedSymplectic { dg, omega, k0 };
        let report = verify_shifted_symplectic(&s);
        if !report.passed() {
            return Err(TransferError::Verification(report));
        }
        Ok(s)
    }

    /// Wraps explicitly supplied data (e.g. from a fixture file); the
    /// caller decides what to do with the verification report.
    pub fn from_parts(dg: DGSpace, omega: Matrix, k0: Matrix) -> ShiftedSymplectic {
        ShiftedSymplectic { dg, omega, k0 }
    }

    pub fn dim(&self) -> usize {
        self.dg.dim()
    }

    /// The bracket kernel `M = -Omega^{-1}`, recovered from the stored
    /// graded-symmetric kernel by undoing the parity dressing.
    pub fn bracket_kernel(&self) -> Matrix {
        let mut m = self.k0.clone();
        for (i, row) in m.iter_mut().enumerate() {
            let s = self.dg.space.parity_sign(i);
            for v in row.iter_mut() {
                *v *= &s;
            }
        }
        m
    }
}

/// Checks every structural invariant of the shifted symplectic data.
pub fn verify_shifted_symplectic(s: &ShiftedSymplectic) -> VerifyReport {
    let mut rep = VerifyReport::default();
    let n = s.dim();
    let sp = &s.dg.space;
    // omega degree support and graded antisymmetry
    let mut deg_ok = true;
    let mut antisym_ok = true;
    for i in 0..n {
        for j in 0..n {
            if !s.omega[i][j].is_zero() && sp.degree(i) + sp.degree(j) != 1 {
                deg_ok = false;
            }
            let koszul = if sp.parity(i) == Parity::Odd && sp.parity(j) == Parity::Odd {
                -BigRational::one()
            } else {
                BigRational::one()
            };
            if s.omega[i][j] != -(koszul.clone() * &s.omega[j][i]) {
                antisym_ok = false;
            }
        }
    }
    rep.push("omega pairs degrees summing to one", deg_ok);
    rep.push("omega graded antisymmetric", antisym_ok);
    rep.push(
        "omega nondegenerate",
        linalg::invert(&s.omega).is_some(),
    );
    // Q skew self-adjoint: (Q^T Omega)_{ab} + (-1)^{deg a} (Omega Q)_{ab} = 0
    let qt_omega = linalg::mat_mul(&linalg::transpose(&s.dg.q), &s.omega);
    let omega_q = linalg::mat_mul(&s.omega, &s.dg.q);
    let mut skew_ok = true;
    for a in 0..n {
        for b in 0..n {
            let lhs = &qt_omega[a][b] + sp.parity_sign(a) * &omega_q[a][b];
            if !lhs.is_zero() {
                skew_ok = false;
            }
        }
    }
    rep.push("Q graded skew self-adjoint for omega", skew_ok);
    // K0: degree support, graded symmetry, inversion, Q-closedness
    let mut k_deg_ok = true;
    let mut k_sym_ok = true;
    for i in 0..n {
        for j in 0..n {
            if !s.k0[i][j].is_zero() && sp.degree(i) + sp.degree(j) != 1 {
                k_deg_ok = false;
            }
            let koszul = if sp.parity(i) == Parity::Odd && sp.parity(j) == Parity::Odd {
                -BigRational::one()
            } else {
                BigRational::one()
            };
            if s.k0[j][i] != koszul * &s.k0[i][j] {
                k_sym_ok = false;
            }
        }
    }
    rep.push("K0 supported on degrees summing to one", k_deg_ok);
    rep.push("K0 graded symmetric", k_sym_ok);
    let prod = linalg::mat_mul(&s.k0, &s.omega);
    let mut inv_ok = true;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j {
                -sp.parity_sign(i)
            } else {
                BigRational::zero()
            };
            if prod[i][j] != want {
                inv_ok = false;
            }
        }
    }
    rep.push("K0 inverts omega (with parity signs)", inv_ok);
    // (Q (x) 1 + 1 (x) Q) K0 = 0: QK + S K Q^T = 0
    let qk = linalg::mat_mul(&s.dg.q, &s.k0);
    let kqt = linalg::mat_mul(&s.k0, &linalg::transpose(&s.dg.q));
    let mut closed_ok = true;
    for a in 0..n {
        for b in 0..n {
            let lhs = &qk[a][b] + sp.parity_sign(a) * &kqt[a][b];
            if !lhs.is_zero() {
                closed_ok = false;
            }
        }
    }
    rep.push("K0 is Q-closed", closed_ok);
    rep
}

/// A function on a graded space: truncated Taylor expansion stored as a
/// polynomial in the coordinate symbols, up to an arity cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functional {
    pub poly: Poly<Slot>,
    pub arity_cap: u32,
}

impl Functional {
    pub fn zero(arity_cap: u32) -> Functional {
        Functional {
            poly: Poly::zero(),
            arity_cap,
        }
    }

    pub fn from_poly(poly: Poly<Slot>, arity_cap: u32) -> Functional {
        Functional { poly, arity_cap }
    }

    /// Adds `coeff * y^{i_1} ... y^{i_n}`; the indices may repeat and are
    /// canonicalized with the Koszul sign.
    pub fn add_monomial(&mut self, space: &GradedSpace, coeff: BigRational, indices: &[usize]) {
        let syms: Vec<Slot> = indices.iter().map(|&i| space.slot(i)).collect();
        self.poly = self.poly.add(&Poly::from_unsorted(coeff, &syms));
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Taylor component of one arity.
    pub fn arity_component(&self, n: u32) -> Poly<Slot> {
        self.poly
            .filter_terms(|f| Poly::<Slot>::term_degree(f) == n)
    }

    pub fn max_arity(&self) -> u32 {
        self.poly.max_term_degree()
    }

    /// Z-degree of the functional when homogeneous: coordinates carry the
    /// negated basis degree.
    pub fn degrees(&self, space: &GradedSpace) -> Vec<i64> {
        let mut ds: Vec<i64> = self
            .poly
            .terms()
            .map(|(f, _)| {
                f.iter()
                    .map(|(s, e)| -space.degree(s.idx as usize) * (*e as i64))
                    .sum()
            })
            .collect();
        ds.sort();
        ds.dedup();
        ds
    }

    pub fn is_degree_zero(&self, space: &GradedSpace) -> bool {
        self.degrees(space).iter().all(|&d| d == 0)
    }

    /// Validates an interaction term: degree zero, arities at least three.
    pub fn validate_interaction(&self, space: &GradedSpace) -> Result<(), TransferError> {
        if !self.is_degree_zero(space) {
            return Err(TransferError::NotDegreeZero);
        }
        if let Some(bad) = self
            .poly
            .terms()
            .map(|(f, _)| Poly::<Slot>::term_degree(f) as usize)
            .find(|&n| n < 3)
        {
            return Err(TransferError::LowArity(bad));
        }
        Ok(())
    }
}

/// Result of a bracket with arity-overflow bookkeeping.
#[derive(Clone, Debug)]
pub struct BracketResult {
    pub functional: Functional,
    /// Arities produced beyond the cap and dropped.
    pub lost_arities: Vec<u32>,
}

/// The BV bracket `{F,G} = sum_{ij} M^{ij} (d_R F / dy^i)(d_L G / dy^j)`
/// with the kernel `M = -Omega^{-1}`. Degree +1, graded antisymmetric in
/// the shifted sense, and a graded Jacobi bracket; those are verified by
/// the test suite rather than assumed.
pub fn bv_bracket_fin(f: &Functional, g: &Functional, s: &ShiftedSymplectic) -> BracketResult {
    let cap = f.arity_cap.min(g.arity_cap);
    let m = s.bracket_kernel();
    let n = s.dim();
    let mut out = Poly::zero();
    for i in 0..n {
        let si = s.dg.space.slot(i);
        let df = f.poly.right_derivative(&si);
        if df.is_zero() {
            continue;
        }
        for j in 0..n {
            if m[i][j].is_zero() {
                continue;
            }
            let sj = s.dg.space.slot(j);
            let dg = g.poly.left_derivative(&sj);
            if dg.is_zero() {
                continue;
            }
            out = out.add(&df.mul(&dg).scale(&m[i][j]));
        }
    }
    let mut lost: Vec<u32> = out
        .terms()
        .map(|(fl, _)| Poly::<Slot>::term_degree(fl))
        .filter(|&a| a > cap)
        .collect();
    lost.sort();
    lost.dedup();
    let truncated = out.filter_terms(|fl| Poly::<Slot>::term_degree(fl) <= cap);
    BracketResult {
        functional: Functional::from_poly(truncated, cap),
        lost_arities: lost,
    }
}

/// The dual action of the differential on functionals, as the graded
/// derivation sending `y^i` to `sum_k Q[i][k] y^k`.
pub fn q_action(f: &Functional, dg: &DGSpace) -> Functional {
    let n = dg.dim();
    let images: Vec<Poly<Slot>> = (0..n)
        .map(|i| {
            let mut acc = Poly::zero();
            for k in 0..n {
                if !dg.q[i][k].is_zero() {
                    acc = acc.add(&Poly::symbol(dg.space.slot(k)).scale(&dg.q[i][k]));
                }
            }
            acc
        })
        .collect();
    let poly = f.poly.derivation(|slot: &Slot| {
        let img = &images[slot.idx as usize];
        if img.is_zero() {
            None
        } else {
            Some(img.clone())
        }
    });
    Functional::from_poly(poly, f.arity_cap)
}

/// The classical-master-equation residual `QI + (1/2){I,I}`.
pub fn cme_residual_fin(i: &Functional, s: &ShiftedSymplectic) -> BracketResult {
    let q_part = q_action(i, &s.dg);
    let br = bv_bracket_fin(i, i, s);
    let half = BigRational::new(1.into(), 2.into());
    let poly = q_part.poly.add(&br.functional.poly.scale(&half));
    BracketResult {
        functional: Functional::from_poly(poly, br.functional.arity_cap),
        lost_arities: br.lost_arities,
    }
}

/// Contraction data `(i, pi, P_hat)` of a complex onto a graded space with
/// zero differential.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub h: GradedSpace,
    /// `i_map[e][h]`: coefficient of `e` basis vector in the image of the
    /// `h` basis vector.
    pub i_map: Matrix,
    /// `pi_map[h][e]`.
    pub pi_map: Matrix,
    /// Degree -1 endomorphism of the big space.
    pub p_hat: Matrix,
}

/// Checks the side conditions and the homotopy identity exactly.
pub fn verify_contraction(c: &Contraction, dg: &DGSpace) -> VerifyReport {
    let mut rep = VerifyReport::default();
    let n = dg.dim();
    let h = c.h.dim();
    let shape_ok = c.i_map.len() == n
        && c.i_map.iter().all(|r| r.len() == h)
        && c.pi_map.len() == h
        && c.pi_map.iter().all(|r| r.len() == n)
        && c.p_hat.len() == n
        && c.p_hat.iter().all(|r| r.len() == n);
    rep.push("matrix shapes", shape_ok);
    if !shape_ok {
        return rep;
    }
    let mut deg_ok = true;
    for e in 0..n {
        for hh in 0..h {
            if !c.i_map[e][hh].is_zero() && dg.space.degree(e) != c.h.degree(hh) {
                deg_ok = false;
            }
            if !c.pi_map[hh][e].is_zero() && dg.space.degree(e) != c.h.degree(hh) {
                deg_ok = false;
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !c.p_hat[a][b].is_zero() && dg.space.degree(a) != dg.space.degree(b) - 1 {
                deg_ok = false;
            }
        }
    }
    rep.push("maps respect degrees", deg_ok);
    rep.push(
        "i is a cochain map (Q i = 0)",
        linalg::is_zero_matrix(&linalg::mat_mul(&dg.q, &c.i_map)),
    );
    rep.push(
        "pi is a cochain map (pi Q = 0)",
        linalg::is_zero_matrix(&linalg::mat_mul(&c.pi_map, &dg.q)),
    );
    let pi_i = linalg::mat_mul(&c.pi_map, &c.i_map);
    rep.push("pi i = 1", pi_i == linalg::identity(h));
    let i_pi = linalg::mat_mul(&c.i_map, &c.pi_map);
    let qp = linalg::mat_mul(&dg.q, &c.p_hat);
    let pq = linalg::mat_mul(&c.p_hat, &dg.q);
    let total = linalg::mat_add(&i_pi, &linalg::mat_add(&qp, &pq));
    rep.push("1 = i pi + Q P + P Q", total == linalg::identity(n));
    rep.push(
        "P P = 0",
        linalg::is_zero_matrix(&linalg::mat_mul(&c.p_hat, &c.p_hat)),
    );
    rep.push(
        "pi P = 0",
        linalg::is_zero_matrix(&linalg::mat_mul(&c.pi_map, &c.p_hat)),
    );
    rep.push(
        "P i = 0",
        linalg::is_zero_matrix(&linalg::mat_mul(&c.p_hat, &c.i_map)),
    );
    rep
}

/// The propagator: the kernel of `P_hat` through omega, in both the
/// bracket dressing (`M_P = -P_hat Omega^{-1}`) and the graded-symmetric
/// dressing used on tree edges. Returns `(M_P, P)` and whether `P` passed
/// the graded-symmetry check.
pub fn propagator_kernel(s: &ShiftedSymplectic, c: &Contraction) -> (Matrix, Matrix, bool) {
    let inv = linalg::invert(&s.omega).expect("omega verified nondegenerate");
    let m_p = linalg::mat_neg(&linalg::mat_mul(&c.p_hat, &inv));
    let n = s.dim();
    let mut p = m_p.clone();
    for (i, row) in p.iter_mut().enumerate() {
        let sgn = s.dg.space.parity_sign(i);
        for v in row.iter_mut() {
            *v *= &sgn;
        }
    }
    let mut sym = true;
    for i in 0..n {
        for j in 0..n {
            let koszul = if s.dg.space.parity(i) == Parity::Odd
                && s.dg.space.parity(j) == Parity::Odd
            {
                -BigRational::one()
            } else {
                BigRational::one()
            };
            if p[j][i] != koszul * &p[i][j] {
                sym = false;
            }
        }
    }
    (m_p, p, sym)
}

// -------------------------------------------------------------------------
// Brute-force tensor oracle for the bracket
// -------------------------------------------------------------------------

/// Taylor-tensor value of a polynomial at a basis tuple, by iterated left
/// derivatives (rightmost index applied first) and constant-term
/// extraction.
pub fn tensor_value(p: &Poly<Slot>, space: &GradedSpace, tuple: &[usize]) -> BigRational {
    let mut acc = p.clone();
    for &i in tuple.iter().rev() {
        acc = acc.left_derivative(&space.slot(i));
        if acc.is_zero() {
            return BigRational::zero();
        }
    }
    acc.constant_term()
}

/// Tensor of a product via the shuffle sum with an independently computed
/// Koszul sign: the product tensor at a tuple is the sum over position
/// splits of the factor tensors, signed by the parity inversions of the
/// unshuffle.
pub fn product_tensor_oracle(
    a: &Poly<Slot>,
    b: &Poly<Slot>,
    space: &GradedSpace,
    tuple: &[usize],
) -> BigRational {
    let n = tuple.len();
    let mut total = BigRational::zero();
    for mask in 0..(1u32 << n) {
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        let mut sign = 1i32;
        let mut odd_in_s2_so_far = 0u32;
        for (pos, &idx) in tuple.iter().enumerate() {
            let odd = space.parity(idx) == Parity::Odd;
            if mask & (1 << pos) != 0 {
                // goes to the first factor: crosses the odd elements of the
                // second factor already seen to its left
                if odd && odd_in_s2_so_far % 2 == 1 {
                    sign = -sign;
                }
                s1.push(idx);
            } else {
                if odd {
                    odd_in_s2_so_far += 1;
                }
                s2.push(idx);
            }
        }
        let va = tensor_value(a, space, &s1);
        if va.is_zero() {
            continue;
        }
        let vb = tensor_value(b, space, &s2);
        if vb.is_zero() {
            continue;
        }
        let mut term = va * vb;
        if sign < 0 {
            term = -term;
        }
        total += term;
    }
    total
}

/// Direct basis-tuple evaluation of the bracket, used as an oracle against
/// `bv_bracket_fin` on small spaces.
pub fn bracket_tensor_oracle(
    f: &Functional,
    g: &Functional,
    s: &ShiftedSymplectic,
    tuple: &[usize],
) -> BigRational {
    let m = s.bracket_kernel();
    let n = s.dim();
    let mut total = BigRational::zero();
    for i in 0..n {
        let df = f.poly.right_derivative(&s.dg.space.slot(i));
        if df.is_zero() {
            continue;
        }
        for j in 0..n {
            if m[i][j].is_zero() {
                continue;
            }
            let dg = g.poly.left_derivative(&s.dg.space.slot(j));
            if dg.is_zero() {
                continue;
            }
            let v = product_tensor_oracle(&df, &dg, &s.dg.space, tuple);
            total += v * &m[i][j];
        }
    }
    total
}

// -------------------------------------------------------------------------
// Fixture files
// -------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct InteractionTermJson {
    pub coeff: String,
    pub monomial: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
pub struct ContractionJson {
    pub h_basis: Vec<(String, i64)>,
    pub i: Vec<Vec<String>>,
    pub pi: Vec<Vec<String>>,
    pub p_hat: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
pub struct BracketRuleJson {
    pub left: usize,
    pub right: usize,
    pub out: Vec<(usize, String)>,
}

/// On-disk fixture: either explicit shifted-symplectic data or a dg Lie
/// algebra whose shifted cotangent space is built on load.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FixtureJson {
    #[serde(rename = "direct")]
    Direct {
        basis: Vec<(String, i64)>,
        q: Vec<Vec<String>>,
        omega: Vec<Vec<String>>,
        interaction: Vec<InteractionTermJson>,
        #[serde(skip_serializing_if = "Option::is_none")]
        contraction: Option<ContractionJson>,
    },
    #[serde(rename = "dgla")]
    Dgla {
        basis: Vec<(String, i64)>,
        differential: Vec<Vec<String>>,
        brackets: Vec<BracketRuleJson>,
    },
}

pub fn parse_matrix(rows: &[Vec<String>]) -> Result<Matrix, TransferError> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|s| {
                    BigRational::from_str(s).map_err(|_| TransferError::BadRational(s.clone()))
                })
                .collect()
        })
        .collect()
}

pub fn matrix_to_strings(m: &Matrix) -> Vec<Vec<String>> {
    m.iter()
        .map(|r| r.iter().map(|v| v.to_string()).collect())
        .collect()
}

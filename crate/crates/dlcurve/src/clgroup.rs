//! Finitely presented abelian groups via Smith normal form, the boundary
//! class group and its degree-zero part, a brute-force divisor class group
//! oracle for small q, and the certificate chain for Pic(Y)[p] = 0.
//!
//! The oracle presents the degree-zero class group restricted to places of
//! low degree: the relation lattice is spanned by div(G) - deg(G) div(l0)
//! for monic forms G whose zero divisor is fully supported on the chosen
//! places (completeness is certified by the Bezout total deg(G)(q+1)), with
//! l0 = X + Y whose zero divisor is (q+1) times one boundary point. A form
//! vanishing transversally at a point meets the curve there with
//! multiplicity exactly one, so series expansions are only consulted at
//! points where the form is tangent to the curve.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_traits::Zero;

use crate::curve::{CurveContext, HomPoly, ProjectivePoint};
use crate::error::{Error, Result};
use crate::ffield::{embed, FieldDescriptor, FieldElement};
use crate::localring::{form_order_at, form_zero_divisor, places_up_to_degree, Place};
use crate::zeta::{l_polynomial_over_base, LPolynomial};

/// Dimension cap for Smith normal form inputs.
pub const MAX_SNF_DIM: usize = 512;

// ---------------------------------------------------------------------------
// Integer matrices and Smith normal form
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i128>>) -> Result<IntMatrix> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::InvalidParameter("ragged matrix rows".into()));
        }
        Ok(IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i128) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b == 0 {
                        continue;
                    }
                    let prod = a.checked_mul(b).ok_or(Error::OverflowError("matrix product"))?;
                    let cur = out.get(i, j);
                    out.set(
                        i,
                        j,
                        cur.checked_add(prod)
                            .ok_or(Error::OverflowError("matrix product"))?,
                    );
                }
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }


    /// Exact determinant by fraction-free elimination; None on overflow.
    fn det_bareiss(&self) -> Option<i128> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Some(1);
        }
        let mut m = self.clone();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if m.get(k, k) == 0 {
                let pivot = (k + 1..n).find(|&i| m.get(i, k) != 0)?;
                m.swap_rows(k, pivot);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let a = m.get(k, k).checked_mul(m.get(i, j))?;
                    let b = m.get(i, k).checked_mul(m.get(k, j))?;
                    let v = a.checked_sub(b)?;
                    m.set(i, j, v / prev);
                }
                m.set(i, k, 0);
            }
            prev = m.get(k, k);
            if prev == 0 {
                return Some(0);
            }
        }
        Some(sign * m.get(n - 1, n - 1))
    }

    /// Determinant modulo a prime, by Gaussian elimination.
    fn det_mod(&self, p: u64) -> u64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let p_i = p as i128;
        let mut m: Vec<Vec<u64>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).rem_euclid(p_i) as u64).collect())
            .collect();
        let mut det: u64 = 1;
        for k in 0..n {
            let Some(pivot) = (k..n).find(|&i| m[i][k] % p != 0) else {
                return 0;
            };
            if pivot != k {
                m.swap(pivot, k);
                det = (det as u128 * (p as u128 - 1) % p as u128) as u64;
            }
            let inv = crate::poly::inv_mod_p(m[k][k], p);
            det = (det as u128 * m[k][k] as u128 % p as u128) as u64;
            for i in k + 1..n {
                if m[i][k] == 0 {
                    continue;
                }
                let factor = (m[i][k] as u128 * inv as u128 % p as u128) as u64;
                for j in k..n {
                    let sub = factor as u128 * m[k][j] as u128 % p as u128;
                    m[i][j] = ((m[i][j] as u128 + p as u128 - sub) % p as u128) as u64;
                }
            }
        }
        det
    }

    /// |det| = 1 check: exact for small sizes, modulo two large primes
    /// (against the sign tracked through the elementary operations) beyond.
    fn verify_unimodular(&self, tracked_sign: i128) -> Result<()> {
        if self.rows <= 12 {
            match self.det_bareiss() {
                Some(d) if d == tracked_sign => return Ok(()),
                Some(d) => {
                    return Err(Error::DomainError(format!(
                        "determinant {d} is not the tracked unit {tracked_sign}"
                    )))
                }
                None => {}
            }
        }
        for p in [2_147_483_647u64, 2_305_843_009_213_693_951] {
            let got = self.det_mod(p);
            let want = tracked_sign.rem_euclid(p as i128) as u64;
            if got != want {
                return Err(Error::DomainError(
                    "transform determinant is not a unit".into(),
                ));
            }
        }
        Ok(())
    }
}

/// U * M * V = D with U, V unimodular and D diagonal with a divisibility
/// chain.
#[derive(Clone, Debug)]
pub struct SmithNormalForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithNormalForm {
    pub fn diagonal(&self) -> Vec<i128> {
        let n = self.d.rows().min(self.d.cols());
        (0..n).map(|i| self.d.get(i, i)).collect()
    }
}

/// Quotient with remainder in (-|b|/2, |b|/2], keeping elimination entries
/// small.
fn div_symmetric(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    let (mut q, r) = a.div_mod_floor(b); // remainder has the sign of b
    if 2u8 * r.magnitude() > *b.magnitude() {
        // floor division leaves r with |r| < |b| and sign(b); shift to the
        // symmetric representative
        q += 1;
    }
    q
}

struct BigMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl BigMatrix {
    fn from_int(m: &IntMatrix) -> BigMatrix {
        BigMatrix {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data.iter().map(|&x| BigInt::from(x)).collect(),
        }
    }

    fn identity(n: usize) -> BigMatrix {
        let mut data = vec![BigInt::from(0); n * n];
        for i in 0..n {
            data[i * n + i] = BigInt::from(1);
        }
        BigMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn row_addmul(&mut self, dst: usize, src: usize, c: &BigInt) {
        for j in 0..self.cols {
            let add = self.get(src, j) * c;
            let v = self.get(dst, j) + add;
            self.set(dst, j, v);
        }
    }

    fn col_addmul(&mut self, dst: usize, src: usize, c: &BigInt) {
        for i in 0..self.rows {
            let add = self.get(i, src) * c;
            let v = self.get(i, dst) + add;
            self.set(i, dst, v);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j).clone();
            self.set(i, j, v);
        }
    }

    fn mul(&self, other: &BigMatrix) -> BigMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = BigMatrix {
            rows: self.rows,
            cols: other.cols,
            data: vec![BigInt::from(0); self.rows * other.cols],
        };
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j) + a * b;
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Exact determinant by fraction-free elimination.
    fn det_bareiss(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::from(1);
        }
        let mut m = BigMatrix {
            rows: n,
            cols: n,
            data: self.data.clone(),
        };
        let mut sign = BigInt::from(1);
        let mut prev = BigInt::from(1);
        for k in 0..n - 1 {
            if m.get(k, k).is_zero() {
                let Some(pivot) = (k + 1..n).find(|&i| !m.get(i, k).is_zero()) else {
                    return BigInt::from(0);
                };
                m.swap_rows(k, pivot);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.get(k, k) * m.get(i, j) - m.get(i, k) * m.get(k, j)) / &prev;
                    m.set(i, j, v);
                }
                m.set(i, k, BigInt::from(0));
            }
            prev = m.get(k, k).clone();
            if prev.is_zero() {
                return BigInt::from(0);
            }
        }
        sign * m.get(n - 1, n - 1)
    }

    fn to_int(&self, what: &'static str) -> Result<IntMatrix> {
        let mut out = IntMatrix::zero(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v: i128 = self
                    .get(i, j)
                    .try_into()
                    .map_err(|_| Error::OverflowError(what))?;
                out.set(i, j, v);
            }
        }
        Ok(out)
    }
}

fn diagonalize(
    d: &mut BigMatrix,
    u: &mut BigMatrix,
    v: &mut BigMatrix,
    u_sign: &mut i128,
    v_sign: &mut i128,
    enforce_chain: bool,
) {
    let (r, c) = (d.rows, d.cols);
    let n = r.min(c);
    for k in 0..n {
        'pivot: loop {
            // smallest nonzero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in k..r {
                for j in k..c {
                    let val = d.get(i, j);
                    if !val.is_zero()
                        && best
                            .map(|(bi, bj)| val.magnitude() < d.get(bi, bj).magnitude())
                            .unwrap_or(true)
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break 'pivot;
            };
            if pi != k {
                d.swap_rows(k, pi);
                u.swap_rows(k, pi);
                *u_sign = -*u_sign;
            }
            if pj != k {
                d.swap_cols(k, pj);
                v.swap_cols(k, pj);
                *v_sign = -*v_sign;
            }
            let pivot = d.get(k, k).clone();
            let mut clean = true;
            for i in k + 1..r {
                let quot = -div_symmetric(d.get(i, k), &pivot);
                if !quot.is_zero() {
                    d.row_addmul(i, k, &quot);
                    u.row_addmul(i, k, &quot);
                }
                if !d.get(i, k).is_zero() {
                    clean = false;
                }
            }
            for j in k + 1..c {
                let quot = -div_symmetric(d.get(k, j), &pivot);
                if !quot.is_zero() {
                    d.col_addmul(j, k, &quot);
                    v.col_addmul(j, k, &quot);
                }
                if !d.get(k, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue 'pivot;
            }
            if enforce_chain {
                // pivot must divide the trailing block
                let one = BigInt::from(1);
                for i in k + 1..r {
                    for j in k + 1..c {
                        if !(d.get(i, j) % &pivot).is_zero() {
                            d.row_addmul(k, i, &one);
                            u.row_addmul(k, i, &one);
                            continue 'pivot;
                        }
                    }
                }
            }
            break 'pivot;
        }
        if d.get(k, k).sign() == Sign::Minus {
            d.negate_row(k);
            u.negate_row(k);
            *u_sign = -*u_sign;
        }
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Result<SmithNormalForm> {
    if m.rows() > MAX_SNF_DIM || m.cols() > MAX_SNF_DIM {
        return Err(Error::InvalidParameter(format!(
            "matrix {}x{} exceeds the {MAX_SNF_DIM} cap",
            m.rows(),
            m.cols()
        )));
    }
    let (r, c) = (m.rows(), m.cols());
    let big_m = BigMatrix::from_int(m);
    let mut d = BigMatrix::from_int(m);
    let mut u = BigMatrix::identity(r);
    let mut v = BigMatrix::identity(c);
    let mut u_sign = 1i128;
    let mut v_sign = 1i128;
    // Diagonalise first, then repair the divisibility chain on the diagonal.
    // Mixing the chain repair into the elimination feeds large rows back
    // into the pivot dance and inflates the transform entries.
    diagonalize(&mut d, &mut u, &mut v, &mut u_sign, &mut v_sign, false);
    diagonalize(&mut d, &mut u, &mut v, &mut u_sign, &mut v_sign, true);
    // verification: exact product, diagonal shape, chain, unimodularity
    let product = u.mul(&big_m).mul(&v);
    if product.data != d.data {
        return Err(Error::DomainError("U*M*V != D".into()));
    }
    for i in 0..r {
        for j in 0..c {
            if i != j && !d.get(i, j).is_zero() {
                return Err(Error::DomainError("D is not diagonal".into()));
            }
        }
    }
    let diag: Vec<BigInt> = (0..r.min(c)).map(|i| d.get(i, i).clone()).collect();
    for w in diag.windows(2) {
        if w[0].is_zero() && !w[1].is_zero() {
            return Err(Error::DomainError("zero before nonzero on diagonal".into()));
        }
        if !w[0].is_zero() && !(&w[1] % &w[0]).is_zero() {
            return Err(Error::DomainError("divisibility chain broken".into()));
        }
    }
    for (mat, sign, name) in [(&u, u_sign, "U"), (&v, v_sign, "V")] {
        if mat.rows <= 64 {
            let det = mat.det_bareiss();
            if det != BigInt::from(sign) {
                return Err(Error::DomainError(format!(
                    "transform {name} has determinant {det}, expected {sign}"
                )));
            }
        } else {
            let int = mat.to_int("transform entries")?;
            int.verify_unimodular(sign)?;
        }
    }
    Ok(SmithNormalForm {
        u: u.to_int("transform entries")?,
        d: d.to_int("diagonal entries")?,
        v: v.to_int("transform entries")?,
    })
}

// ---------------------------------------------------------------------------
// Finitely presented abelian groups
// ---------------------------------------------------------------------------

/// Z^generators modulo the row space of the relation matrix.
#[derive(Clone, Debug)]
pub struct AbelianPresentation {
    pub generators: usize,
    pub relations: Vec<Vec<i128>>,
}

/// Invariant-factor decomposition: Z^free_rank x prod Z/d_i with
/// d_1 | d_2 | ... and every d_i >= 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroupStructure {
    pub free_rank: usize,
    pub invariant_factors: Vec<i128>,
}

impl AbelianGroupStructure {
    pub fn order(&self) -> Option<i128> {
        if self.free_rank > 0 {
            return None;
        }
        let mut acc: i128 = 1;
        for &d in &self.invariant_factors {
            acc = acc.checked_mul(d)?;
        }
        Some(acc)
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    /// No element of order p: every invariant factor is coprime to p.
    pub fn p_torsion_trivial(&self, p: u64) -> bool {
        self.invariant_factors.iter().all(|d| d % p as i128 != 0)
    }
}

pub fn group_structure(pres: &AbelianPresentation) -> Result<AbelianGroupStructure> {
    if pres.relations.is_empty() {
        return Ok(AbelianGroupStructure {
            free_rank: pres.generators,
            invariant_factors: Vec::new(),
        });
    }
    if pres.relations.iter().any(|r| r.len() != pres.generators) {
        return Err(Error::InvalidParameter(
            "relation length differs from generator count".into(),
        ));
    }
    let m = IntMatrix::from_rows(pres.relations.clone())?;
    let snf = smith_normal_form(&m)?;
    let diag = snf.diagonal();
    let rank = diag.iter().filter(|&&x| x != 0).count();
    Ok(AbelianGroupStructure {
        free_rank: pres.generators - rank,
        invariant_factors: diag.into_iter().filter(|&x| x > 1).collect(),
    })
}

/// G/pG from the invariant decomposition: (Z^r x prod Z/d_i)/p is (Z/p)^r
/// times a Z/p for every d_i divisible by the prime p.
pub fn quotient_mod_p(s: &AbelianGroupStructure, p: u64) -> AbelianGroupStructure {
    let copies = s.free_rank
        + s.invariant_factors
            .iter()
            .filter(|&&d| d % p as i128 == 0)
            .count();
    AbelianGroupStructure {
        free_rank: 0,
        invariant_factors: vec![p as i128; copies],
    }
}

/// The quotient G/pG of a presented group.
pub fn structure_mod_p(pres: &AbelianPresentation, p: u64) -> Result<AbelianGroupStructure> {
    Ok(quotient_mod_p(&group_structure(pres)?, p))
}

// ---------------------------------------------------------------------------
// The boundary class group source
// ---------------------------------------------------------------------------

/// Presentation of G = Z^(q+1) / <(q+1)([P_i] - [P_0]) : i = 1..q>, the
/// source of the surjection onto the boundary class group.
pub fn gamma_source_presentation(q: u64) -> AbelianPresentation {
    let n = q as usize + 1;
    let mut relations = Vec::with_capacity(q as usize);
    for i in 1..n {
        let mut row = vec![0i128; n];
        row[0] = -(q as i128 + 1);
        row[i] = q as i128 + 1;
        relations.push(row);
    }
    AbelianPresentation {
        generators: n,
        relations,
    }
}

/// Structure of the source group; always Z x (Z/(q+1))^q.
pub fn gamma_source_group(q: u64) -> Result<AbelianGroupStructure> {
    group_structure(&gamma_source_presentation(q))
}

/// The degree-zero part of the source is (Z/(q+1))^q; its reduction mod p is
/// trivial exactly when gcd(p, q+1) = 1, which holds whenever q is a power
/// of p. Computed by SNF of the mod-p reduced presentation, so the guard
/// case with artificial coprime inputs stays meaningful.
pub fn gamma0_mod_p_trivial(q: u64, p: u64) -> Result<bool> {
    let n = q as usize;
    let mut relations = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut row = vec![0i128; n];
        row[i] = q as i128 + 1;
        relations.push(row);
    }
    let pres = AbelianPresentation {
        generators: n,
        relations,
    };
    Ok(structure_mod_p(&pres, p)?.is_trivial())
}

// ---------------------------------------------------------------------------
// Class group oracle
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ClassGroupOracle {
    pub base_size: u64,
    pub place_bound: u32,
    pub form_bound: u32,
    /// Structures after each form-degree pass, for the stabilisation record.
    pub history: Vec<(u32, AbelianGroupStructure)>,
    /// Structure of the degree-zero quotient after the last pass.
    pub structure: AbelianGroupStructure,
    pub order: Option<i128>,
    pub stabilized: bool,
    pub num_places: usize,
    pub num_relations: usize,
}

struct PlaceData {
    place: Place,
    /// value_contrib[ci * l + idx] = embedded(elem_idx) * mon_values[ci]
    value_contrib: Vec<FieldElement>,
    /// same layout, against the directional derivatives along the tangent
    tangent_contrib: Vec<FieldElement>,
}

/// Chart tangent vector at a point of Z: (0, -c^q, 1) at (1 : b : c),
/// (0, 0, 1) at boundary points (where the expansion starts at t^(q+1)).
fn chart_tangent(
    ctx: &CurveContext,
    fld: &Arc<FieldDescriptor>,
    pt: &ProjectivePoint,
) -> [FieldElement; 3] {
    if fld.is_zero(pt.z()) {
        [fld.zero(), fld.zero(), fld.one()]
    } else {
        let cq = fld.pow(pt.z(), ctx.q() as u128);
        [fld.zero(), fld.neg(&cq), fld.one()]
    }
}

fn monomials_of_degree(e: u16) -> Vec<(u16, u16, u16)> {
    let mut out = Vec::new();
    for i in 0..=e {
        for j in 0..=(e - i) {
            out.push((i, j, e - i - j));
        }
    }
    out.sort();
    out
}

fn monomial_value(
    fld: &FieldDescriptor,
    (i, j, k): (u16, u16, u16),
    pt: [&FieldElement; 3],
) -> FieldElement {
    let mut acc = fld.one();
    if i > 0 {
        acc = fld.mul(&acc, &fld.pow(pt[0], i as u128));
    }
    if j > 0 {
        acc = fld.mul(&acc, &fld.pow(pt[1], j as u128));
    }
    if k > 0 {
        acc = fld.mul(&acc, &fld.pow(pt[2], k as u128));
    }
    acc
}

/// Directional derivative of a monomial at pt along tau, with exponent
/// arithmetic reduced mod p.
fn monomial_directional(
    fld: &FieldDescriptor,
    p: u64,
    exps: (u16, u16, u16),
    pt: [&FieldElement; 3],
    tau: &[FieldElement; 3],
) -> FieldElement {
    let (i, j, k) = exps;
    let mut acc = fld.zero();
    let vars = [i, j, k];
    for var in 0..3 {
        let n = vars[var] as u64 % p;
        if n == 0 || fld.is_zero(&tau[var]) {
            continue;
        }
        let mut e2 = vars;
        e2[var] -= 1;
        let m = monomial_value(fld, (e2[0], e2[1], e2[2]), pt);
        acc = fld.add(&acc, &fld.scalar_mul(n, &fld.mul(&m, &tau[var])));
    }
    acc
}

/// Relations for one form degree; relation vectors are indexed by `places`.
fn collect_relations_of_degree(
    ctx: &CurveContext,
    base: &Arc<FieldDescriptor>,
    places: &[Place],
    l0_vec: &[i64],
    e: u16,
    relations: &mut BTreeSet<Vec<i64>>,
) -> Result<()> {
    let q1 = ctx.q() as i64 + 1;
    let total = e as i64 * q1;
    let mons = monomials_of_degree(e);
    let m = mons.len();
    let base_elems: Vec<FieldElement> = base.elements().collect();
    // per-place tables of per-coefficient contributions
    let mut tables = Vec::with_capacity(places.len());
    for place in places {
        let fld = place.field().clone();
        let emb = embed(base, &fld)?;
        let rep = place.representative();
        let tau = chart_tangent(ctx, &fld, rep);
        let pt = [rep.x(), rep.y(), rep.z()];
        let mon_values: Vec<FieldElement> = mons
            .iter()
            .map(|&mono| monomial_value(&fld, mono, pt))
            .collect();
        let mon_tangent: Vec<FieldElement> = mons
            .iter()
            .map(|&mono| monomial_directional(&fld, ctx.p(), mono, pt, &tau))
            .collect();
        let embedded: Vec<FieldElement> = base_elems.iter().map(|x| emb.apply(x)).collect();
        let mut value_contrib = Vec::with_capacity(m * base_elems.len());
        let mut tangent_contrib = Vec::with_capacity(m * base_elems.len());
        for mv in &mon_values {
            for e in &embedded {
                value_contrib.push(fld.mul(e, mv));
            }
        }
        for mt in &mon_tangent {
            for e in &embedded {
                tangent_contrib.push(fld.mul(e, mt));
            }
        }
        tables.push(PlaceData {
            place: place.clone(),
            value_contrib,
            tangent_contrib,
        });
    }
    let l = base_elems.len();
    // monic coefficient vectors: leading monomial coefficient 1, earlier 0
    let mut scratch = Vec::with_capacity(m);
    for lead in 0..m {
        let mut coeff_idx = vec![0usize; m];
        coeff_idx[lead] = 1;
        loop {
            process_form(
                ctx,
                base,
                &base_elems,
                &mons,
                &coeff_idx,
                lead,
                &tables,
                total,
                l0_vec,
                e,
                relations,
                &mut scratch,
            )?;
            // odometer over the positions after `lead`
            let mut pos = m;
            let mut carried = true;
            while pos > lead + 1 {
                pos -= 1;
                coeff_idx[pos] += 1;
                if coeff_idx[pos] < l {
                    carried = false;
                    break;
                }
                coeff_idx[pos] = 0;
            }
            if carried {
                break;
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn process_form(
    ctx: &CurveContext,
    base: &Arc<FieldDescriptor>,
    base_elems: &[FieldElement],
    mons: &[(u16, u16, u16)],
    coeff_idx: &[usize],
    lead: usize,
    tables: &[PlaceData],
    total: i64,
    l0_vec: &[i64],
    e: u16,
    relations: &mut BTreeSet<Vec<i64>>,
    scratch: &mut Vec<(usize, i64)>,
) -> Result<()> {
    scratch.clear();
    let mut captured: i64 = 0;
    let mut needs_series: Vec<usize> = Vec::new();
    for (pi, data) in tables.iter().enumerate() {
        let fld = data.place.field();
        let l = base_elems.len();
        // value of the form at the representative
        let mut value = fld.zero();
        for (ci, &idx) in coeff_idx.iter().enumerate().skip(lead) {
            if idx == 0 {
                continue;
            }
            fld.add_assign(&mut value, &data.value_contrib[ci * l + idx]);
        }
        if !fld.is_zero(&value) {
            continue;
        }
        // tangency: zero directional derivative means multiplicity >= 2
        let mut deriv = fld.zero();
        for (ci, &idx) in coeff_idx.iter().enumerate().skip(lead) {
            if idx == 0 {
                continue;
            }
            fld.add_assign(&mut deriv, &data.tangent_contrib[ci * l + idx]);
        }
        if fld.is_zero(&deriv) {
            needs_series.push(pi);
        } else {
            scratch.push((pi, 1));
            captured += data.place.degree() as i64;
        }
    }
    if scratch.is_empty() && needs_series.is_empty() {
        return Ok(());
    }
    // cheap rejection: transversal points contribute exactly 1 each and a
    // tangent point at most the Bezout total
    if needs_series.is_empty() && captured != total {
        return Ok(());
    }
    if !needs_series.is_empty() {
        // exact multiplicities via series expansion at the tangent points
        let form = build_form(base, base_elems, mons, coeff_idx)?;
        if form.reduce_mod_curve(ctx.q()).is_zero() {
            // a multiple of the curve equation has no zero divisor
            return Ok(());
        }
        for &pi in &needs_series {
            let ord = form_order_at(ctx, &tables[pi].place, &form)?;
            scratch.push((pi, ord as i64));
            captured += ord as i64 * tables[pi].place.degree() as i64;
        }
        if captured != total {
            return Ok(());
        }
    }
    // relation: div_0(G) - e * div_0(l0)
    let mut row = vec![0i64; tables.len()];
    for &(pi, w) in scratch.iter() {
        row[pi] = w;
    }
    for (pi, w) in row.iter_mut().zip(l0_vec) {
        *pi -= e as i64 * *w;
    }
    if row.iter().any(|&w| w != 0) {
        relations.insert(row);
    }
    Ok(())
}

fn build_form(
    base: &Arc<FieldDescriptor>,
    base_elems: &[FieldElement],
    mons: &[(u16, u16, u16)],
    coeff_idx: &[usize],
) -> Result<HomPoly> {
    let terms = mons
        .iter()
        .zip(coeff_idx)
        .filter(|(_, &idx)| idx != 0)
        .map(|(&mono, &idx)| (mono, base_elems[idx].clone()))
        .collect();
    HomPoly::from_terms(base, terms)
}

/// The degree-zero class group of Z over F_{q^base_degree}, restricted to
/// places of degree <= place_bound, presented by form relations of degree
/// <= form_bound. Stops as soon as two consecutive form degrees give the
/// same structure (the stabilisation criterion).
pub fn class_group_oracle(
    ctx: &CurveContext,
    base_degree: u32,
    place_bound: u32,
    form_bound: u32,
) -> Result<ClassGroupOracle> {
    Ok(oracle_core(ctx, base_degree, place_bound, form_bound)?.0)
}

fn oracle_core(
    ctx: &CurveContext,
    base_degree: u32,
    place_bound: u32,
    form_bound: u32,
) -> Result<(ClassGroupOracle, Vec<Place>, BTreeSet<Vec<i64>>)> {
    let base = ctx.extension_field(base_degree)?;
    let places = places_up_to_degree(ctx, base_degree, place_bound)?;
    if places.is_empty() {
        return Err(Error::DomainError("no places within the bound".into()));
    }
    if places[0].degree() != 1 {
        return Err(Error::DomainError(
            "no degree-one place to split the degree map".into(),
        ));
    }
    // l0 = X + Y vanishes to order q+1 at the single boundary point (1:-1:0)
    let l0 = HomPoly::from_terms(
        &base,
        vec![((1, 0, 0), base.one()), ((0, 1, 0), base.one())],
    )?;
    let l0_div = form_zero_divisor(ctx, base_degree, &l0, place_bound)?;
    let l0_vec: Vec<i64> = places.iter().map(|p| l0_div.weight(p)).collect();

    let mut relations: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut history: Vec<(u32, AbelianGroupStructure)> = Vec::new();
    let mut stabilized = false;
    let mut structure = degree_zero_structure(&places, &relations)?;
    if form_bound == 0 {
        history.push((0, structure.clone()));
    }
    for e in 1..=form_bound {
        collect_relations_of_degree(
            ctx,
            &base,
            &places,
            &l0_vec,
            e as u16,
            &mut relations,
        )?;
        let next = degree_zero_structure(&places, &relations)?;
        history.push((e, next.clone()));
        let stable_now = structure == next && e >= 2;
        structure = next;
        if stable_now {
            stabilized = true;
            break;
        }
    }
    let order = structure.order();
    let oracle = ClassGroupOracle {
        base_size: base.size(),
        place_bound,
        form_bound,
        history,
        num_places: places.len(),
        num_relations: relations.len(),
        structure,
        order,
        stabilized,
    };
    Ok((oracle, places, relations))
}

/// Quotient structure on the degree-zero sublattice: with a degree-one place
/// first, the sublattice has basis e_i - d_i e_0 (i >= 1) and a degree-zero
/// relation drops its 0-th coordinate in that basis.
fn degree_zero_structure(
    places: &[Place],
    relations: &BTreeSet<Vec<i64>>,
) -> Result<AbelianGroupStructure> {
    let n = places.len();
    for row in relations {
        let deg: i64 = row
            .iter()
            .zip(places)
            .map(|(w, p)| w * p.degree() as i64)
            .sum();
        if deg != 0 {
            return Err(Error::DomainError(
                "oracle relation has nonzero degree".into(),
            ));
        }
    }
    let rows: Vec<Vec<i128>> = relations
        .iter()
        .map(|row| row[1..].iter().map(|&w| w as i128).collect())
        .collect();
    group_structure(&AbelianPresentation {
        generators: n - 1,
        relations: rows,
    })
}

/// p-torsion triviality of the restricted class group of Y: the oracle
/// lattice further quotiented by the classes of all boundary places (which
/// also kills the degree). Refuses to answer from a non-stabilized oracle.
pub fn cl_y_p_torsion_oracle(
    ctx: &CurveContext,
    base_degree: u32,
    place_bound: u32,
    form_bound: u32,
) -> Result<bool> {
    let (oracle, places, relations) = oracle_core(ctx, base_degree, place_bound, form_bound)?;
    if !oracle.stabilized {
        return Err(Error::DomainError(
            "class group oracle did not stabilize; refusing the p-torsion verdict".into(),
        ));
    }
    let mut rows: Vec<Vec<i128>> = relations
        .iter()
        .map(|row| row.iter().map(|&w| w as i128).collect())
        .collect();
    for (i, place) in places.iter().enumerate() {
        if place.is_boundary() {
            let mut row = vec![0i128; places.len()];
            row[i] = 1;
            rows.push(row);
        }
    }
    let structure = group_structure(&AbelianPresentation {
        generators: places.len(),
        relations: rows,
    })?;
    Ok(structure.p_torsion_trivial(ctx.p()))
}

// ---------------------------------------------------------------------------
// The certificate for Pic(Y)[p] = 0
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepStatus {
    Computed,
    Verified,
    Assumed,
    Failed,
}

impl StepStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepStatus::Computed => "computed",
            StepStatus::Verified => "verified",
            StepStatus::Assumed => "assumed",
            StepStatus::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertificateStep {
    pub claim: String,
    pub status: StepStatus,
    pub evidence: String,
}

/// The assembled proof chain that the divisor class group of the affine
/// curve has trivial p-torsion. Exactly one step (the pullback injection
/// into the class group over the algebraic closure) is assumed from the
/// literature; every other step is computed or verified here.
#[derive(Clone, Debug)]
pub struct PicCertificate {
    pub q: u64,
    pub p: u64,
    pub steps: Vec<CertificateStep>,
    pub conclusion: bool,
}

pub fn verify_picy_chain(q: u64) -> Result<PicCertificate> {
    let ctx = CurveContext::new(q)?;
    let lp = l_polynomial_over_base(&ctx)?;
    build_certificate(&ctx, &lp)
}

pub(crate) fn build_certificate(ctx: &CurveContext, lp: &LPolynomial) -> Result<PicCertificate> {
    let q = ctx.q();
    let p = ctx.p();
    let mut steps = Vec::new();

    // (1) p-rank of the fitted L-polynomial
    let rank = lp.p_rank(p);
    let mod_p: Vec<i128> = lp.coeffs().iter().map(|c| c.rem_euclid(p as i128)).collect();
    steps.push(CertificateStep {
        claim: format!(
            "p-rank of L over F_{q} equals 0, so the class group over the \
             algebraic closure has no {p}-torsion"
        ),
        status: if rank == 0 {
            StepStatus::Computed
        } else {
            StepStatus::Failed
        },
        evidence: format!("L mod {p} has coefficients {mod_p:?}; p-rank {rank}"),
    });

    // (2) pullback injectivity, from flat base change
    steps.push(CertificateStep {
        claim: "the pullback Pic(Z over F) -> Pic(Z over the closure) is injective".into(),
        status: StepStatus::Assumed,
        evidence: "flat base change for relatively ample sheaves (external result)".into(),
    });

    // (3) degree-zero boundary group mod p
    let gamma0_trivial = gamma0_mod_p_trivial(q, p)?;
    let src = gamma_source_group(q)?;
    steps.push(CertificateStep {
        claim: format!("the degree-zero boundary subgroup mod {p} vanishes"),
        status: if gamma0_trivial {
            StepStatus::Computed
        } else {
            StepStatus::Failed
        },
        evidence: format!(
            "source group Z x (Z/{})^{} by SNF: free rank {}, factors {:?}; \
             gcd(p, q+1) = {}",
            q + 1,
            q,
            src.free_rank,
            src.invariant_factors,
            crate::ffield::gcd_u64(p, q + 1)
        ),
    });

    // (4) degree splitting at a rational boundary point
    let boundary = ctx.boundary_points();
    let rational = ctx.enumerate_points(1)?;
    let boundary_rational = boundary.iter().all(|pt| rational.contains(pt));
    // boundary places all have degree 1, so a relation's degree is its
    // coefficient sum
    let relations_degree_zero = gamma_source_presentation(q)
        .relations
        .iter()
        .all(|row| row.iter().sum::<i128>() == 0);
    let ok4 = boundary_rational && relations_degree_zero;
    steps.push(CertificateStep {
        claim: format!(
            "degree splits off the class of a boundary point: n[P_0] in \
             {p}Cl(Z) forces {p} | n"
        ),
        status: if ok4 {
            StepStatus::Verified
        } else {
            StepStatus::Failed
        },
        evidence: format!(
            "boundary points are F_{q}-rational (degree-one places): {}; all \
             boundary relations have degree 0: {}",
            boundary_rational, relations_degree_zero
        ),
    });

    // (5) assembly
    let parts_ok = steps
        .iter()
        .all(|s| !matches!(s.status, StepStatus::Failed));
    steps.push(CertificateStep {
        claim: format!(
            "the boundary group mod {p} injects into Cl(Z)/{p}Cl(Z), and \
             excision gives Cl(Y)[{p}] = 0"
        ),
        status: if parts_ok {
            StepStatus::Computed
        } else {
            StepStatus::Failed
        },
        evidence: format!(
            "boundary group mod {p} is Z/{p} generated by [P_0]; injectivity \
             by the degree argument; conclusion by the excision sequence"
        ),
    });

    let assumed = steps
        .iter()
        .filter(|s| matches!(s.status, StepStatus::Assumed))
        .count();
    let failed = steps
        .iter()
        .any(|s| matches!(s.status, StepStatus::Failed));
    Ok(PicCertificate {
        q,
        p,
        steps,
        conclusion: assumed == 1 && !failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn structure_of(rows: Vec<Vec<i128>>, generators: usize) -> AbelianGroupStructure {
        group_structure(&AbelianPresentation {
            generators,
            relations: rows,
        })
        .unwrap()
    }

    #[test]
    fn snf_identity() {
        let m = IntMatrix::identity(4);
        let snf = smith_normal_form(&m).unwrap();
        assert_eq!(snf.diagonal(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn snf_diag_2_3() {
        let m = IntMatrix::from_rows(vec![vec![2, 0], vec![0, 3]]).unwrap();
        let snf = smith_normal_form(&m).unwrap();
        assert_eq!(snf.diagonal(), vec![1, 6]);
    }

    #[test]
    fn snf_random_matrices_preserve_determinant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let rows: Vec<Vec<i128>> = (0..6)
                .map(|_| (0..6).map(|_| rng.gen_range(-9i128..=9)).collect())
                .collect();
            let m = IntMatrix::from_rows(rows).unwrap();
            let det = m.det_bareiss().unwrap();
            let snf = smith_normal_form(&m).unwrap();
            let d_det: i128 = snf.diagonal().iter().product();
            assert_eq!(d_det.abs(), det.abs());
            let chain = snf.diagonal();
            for w in chain.windows(2) {
                if w[0] != 0 {
                    assert_eq!(w[1] % w[0], 0);
                }
            }
        }
    }

    #[test]
    fn snf_rejects_rather_than_lies_on_transform_blowup() {
        // dense input whose transform entries outgrow i128; the contract is
        // a verified answer or an explicit overflow rejection, never an
        // unverified result
        let m = IntMatrix::from_rows(vec![
            vec![3, -1, 1, -7, -7, -6, -6, 0],
            vec![5, 0, 2, -7, 0, 9, 4, -3],
            vec![2, 0, 6, -9, 1, 0, -5, 2],
            vec![4, -5, 3, -8, 0, 0, 1, 2],
            vec![9, 3, -1, -7, 2, -1, 9, 2],
            vec![-6, 8, -3, 3, 6, 3, -3, 8],
            vec![-5, -8, -6, -6, -9, -1, 8, 1],
            vec![-7, 1, 5, -2, 6, -2, 4, 5],
        ])
        .unwrap();
        match smith_normal_form(&m) {
            Ok(snf) => {
                let diag = snf.diagonal();
                assert_eq!(diag.len(), 8);
            }
            Err(Error::OverflowError(_)) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn group_structures() {
        // Z^2 / <2e1, 3e2> = Z/2 x Z/3 = Z/6
        let s = structure_of(vec![vec![2, 0], vec![0, 3]], 2);
        assert_eq!(s.free_rank, 0);
        assert_eq!(s.invariant_factors, vec![6]);
        assert_eq!(s.order(), Some(6));
        // no relations
        let s = structure_of(vec![], 3);
        assert_eq!(s.free_rank, 3);
        assert!(s.invariant_factors.is_empty());
    }

    #[test]
    fn gamma_source_examples() {
        let s = gamma_source_group(2).unwrap();
        assert_eq!(s.free_rank, 1);
        assert_eq!(s.invariant_factors, vec![3, 3]);
        let s = gamma_source_group(3).unwrap();
        assert_eq!(s.free_rank, 1);
        assert_eq!(s.invariant_factors, vec![4, 4, 4]);
    }

    #[test]
    fn gamma_source_all_prime_powers_up_to_64() {
        for q in 2..=64u64 {
            if CurveContext::new(q).is_err() {
                continue;
            }
            let s = gamma_source_group(q).unwrap();
            assert_eq!(s.free_rank, 1, "q = {q}");
            assert_eq!(s.invariant_factors, vec![q as i128 + 1; q as usize]);
            // G/pG has order p since gcd(p, q+1) = 1
            let p = CurveContext::new(q).unwrap().p();
            let pres = gamma_source_presentation(q);
            let mod_p = structure_mod_p(&pres, p).unwrap();
            assert_eq!(mod_p.order(), Some(p as i128));
        }
    }

    #[test]
    fn gamma0_mod_p_cases() {
        assert!(gamma0_mod_p_trivial(2, 2).unwrap());
        assert!(gamma0_mod_p_trivial(9, 3).unwrap());
        // guard: artificial coprime inputs with p | q+1 must fail
        assert!(!gamma0_mod_p_trivial(4, 5).unwrap());
    }

    #[test]
    fn oracle_q2_l4() {
        let ctx = CurveContext::new(2).unwrap();
        let oracle = class_group_oracle(&ctx, 2, 1, 4).unwrap();
        assert_eq!(oracle.num_places, 9);
        assert!(oracle.stabilized);
        assert_eq!(oracle.order, Some(9));
        assert_eq!(oracle.structure.invariant_factors, vec![3, 3]);
        assert_eq!(oracle.structure.free_rank, 0);
        // cross-check against L(1) for the fitted polynomial over F_4
        let lp = LPolynomial::from_counts(4, 1, &[9]).unwrap();
        assert_eq!(oracle.order.unwrap(), lp.jacobian_order().unwrap());
    }

    #[test]
    fn oracle_empty_relations() {
        let ctx = CurveContext::new(2).unwrap();
        let oracle = class_group_oracle(&ctx, 2, 1, 0).unwrap();
        assert_eq!(oracle.structure.free_rank, oracle.num_places - 1);
        assert!(!oracle.stabilized);
    }

    #[test]
    fn oracle_q2_base_f2() {
        // over F_2 the class group order is L(1) = 3
        let ctx = CurveContext::new(2).unwrap();
        let oracle = class_group_oracle(&ctx, 1, 2, 4).unwrap();
        assert!(oracle.stabilized);
        assert_eq!(oracle.order, Some(3));
    }

    #[test]
    fn cl_y_p_torsion_q2() {
        let ctx = CurveContext::new(2).unwrap();
        assert!(cl_y_p_torsion_oracle(&ctx, 2, 1, 4).unwrap());
    }

    #[test]
    fn p_torsion_of_odd_group_is_trivial_for_p2() {
        let s = AbelianGroupStructure {
            free_rank: 0,
            invariant_factors: vec![3, 3],
        };
        assert!(s.p_torsion_trivial(2));
        assert!(!s.p_torsion_trivial(3));
    }

    #[test]
    fn certificate_small_q() {
        for q in [2u64, 3] {
            let cert = verify_picy_chain(q).unwrap();
            assert!(cert.conclusion, "q = {q}");
            assert_eq!(cert.steps.len(), 5);
            assert_eq!(cert.steps[1].status, StepStatus::Assumed);
            for (i, step) in cert.steps.iter().enumerate() {
                if i != 1 {
                    assert!(
                        matches!(step.status, StepStatus::Computed | StepStatus::Verified),
                        "step {i} has status {:?}",
                        step.status
                    );
                }
            }
        }
    }

    #[test]
    fn certificate_fails_on_nonzero_p_rank() {
        // doctored polynomial with p-rank 1 over F_3
        let ctx = CurveContext::new(3).unwrap();
        let lp = LPolynomial::new(3, 1, vec![1, -1, 3]).unwrap();
        let cert = build_certificate(&ctx, &lp).unwrap();
        assert!(!cert.conclusion);
        assert_eq!(cert.steps[0].status, StepStatus::Failed);
    }

    #[test]
    fn certificate_agrees_with_oracle_q2() {
        let cert = verify_picy_chain(2).unwrap();
        let ctx = CurveContext::new(2).unwrap();
        let oracle_says = cl_y_p_torsion_oracle(&ctx, 2, 1, 4).unwrap();
        assert_eq!(cert.conclusion, oracle_says);
    }
}

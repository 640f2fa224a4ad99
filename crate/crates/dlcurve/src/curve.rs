//! The affine curve Y : uv^q - vu^q = 1 and its projective closure
//! Z : XY^q - YX^q = Z^(q+1) over extensions of F_q.
//!
//! Point counting uses the fibration over the c-line: the number of affine
//! points (1 : b : c) equals sum_b #{c : c^(q+1) = b^q - b}. For large fields
//! the scan runs over the subgroup of (q+1)-th powers instead, testing
//! membership in the image of the Artin-Schreier map b -> b^q - b via the
//! F_q-linear trace (the image is exactly the trace kernel), which brings a
//! count over F_{q^m} down to O(q^m / gcd(q+1, q^m - 1)) field operations.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::ffield::{embed, gcd_u64, make_field, Embedding, FieldDescriptor, FieldElement};
use crate::poly;

/// Largest q accepted by a context.
pub const MAX_Q: u64 = 1 << 13;
/// Fields up to this size are counted by the literal fibre-sum formula.
const NAIVE_COUNT_CAP: u64 = 1 << 12;
/// Cap on point-listing enumeration (counting has its own, larger cap).
pub const POINT_ENUM_CAP: u64 = 1 << 16;

/// The curve parameters: q = p^e and the base field F_q.
pub struct CurveContext {
    q: u64,
    p: u64,
    e: u32,
    base: Arc<FieldDescriptor>,
    max_field_log2: u32,
    ext_cache: Mutex<BTreeMap<u32, Arc<FieldDescriptor>>>,
    count_cache: Mutex<BTreeMap<u32, u64>>,
}

/// A normalized point of Z: the first nonzero coordinate in (X, Y, Z) order
/// is scaled to 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjectivePoint {
    coords: [FieldElement; 3],
}

impl std::fmt::Debug for ProjectivePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({:?} : {:?} : {:?})",
            self.coords[0], self.coords[1], self.coords[2]
        )
    }
}

impl ProjectivePoint {
    pub fn coords(&self) -> &[FieldElement; 3] {
        &self.coords
    }

    pub fn x(&self) -> &FieldElement {
        &self.coords[0]
    }

    pub fn y(&self) -> &FieldElement {
        &self.coords[1]
    }

    pub fn z(&self) -> &FieldElement {
        &self.coords[2]
    }

    pub fn is_boundary(&self, fld: &FieldDescriptor) -> bool {
        fld.is_zero(&self.coords[2])
    }
}

/// A point of the affine curve uv^q - vu^q = 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct AffinePoint {
    pub u: FieldElement,
    pub v: FieldElement,
}

/// A point (y, t) of the special fibre chart t^(q+1) = y^q - y with t != 0.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct SpecialFibrePoint {
    pub y: FieldElement,
    pub t: FieldElement,
}

/// Result of the singular-point search.
#[derive(Clone, Debug)]
pub struct SmoothnessReport {
    pub smooth: bool,
    pub witness: Option<ProjectivePoint>,
    pub extensions_checked: Vec<u32>,
}

impl CurveContext {
    pub fn new(q: u64) -> Result<Self> {
        Self::with_max_field_log2(q, 27)
    }

    pub fn with_max_field_log2(q: u64, max_field_log2: u32) -> Result<Self> {
        let (p, e) = prime_power(q)
            .ok_or_else(|| Error::InvalidParameter(format!("{q} is not a prime power")))?;
        if q > MAX_Q {
            return Err(Error::InvalidParameter(format!(
                "q = {q} exceeds the desk-scale cap {MAX_Q}"
            )));
        }
        let base = Arc::new(make_field(p, e)?);
        Ok(CurveContext {
            q,
            p,
            e,
            base,
            max_field_log2: max_field_log2.min(60),
            ext_cache: Mutex::new(BTreeMap::new()),
            count_cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// q = p^e.
    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn base_field(&self) -> &Arc<FieldDescriptor> {
        &self.base
    }

    pub fn max_field_log2(&self) -> u32 {
        self.max_field_log2
    }

    /// g = q(q-1)/2.
    pub fn genus(&self) -> u64 {
        self.q * (self.q - 1) / 2
    }

    /// F_{q^m}, built deterministically and cached.
    pub fn extension_field(&self, m: u32) -> Result<Arc<FieldDescriptor>> {
        if m == 0 {
            return Err(Error::InvalidParameter("extension degree 0".into()));
        }
        let bits = (self.q as f64).log2() * m as f64;
        if bits > self.max_field_log2 as f64 + 1e-9 {
            return Err(Error::FieldTooLarge(format!(
                "q^m = {}^{m} exceeds 2^{}",
                self.q, self.max_field_log2
            )));
        }
        let mut cache = self.ext_cache.lock().unwrap();
        if let Some(f) = cache.get(&m) {
            return Ok(f.clone());
        }
        let fld = Arc::new(make_field(self.p, self.e * m)?);
        cache.insert(m, fld.clone());
        Ok(fld)
    }

    /// The embedding F_q -> fld, where fld is an extension of F_q.
    pub fn base_embedding(&self, fld: &Arc<FieldDescriptor>) -> Result<Embedding> {
        embed(&self.base, fld)
    }

    /// XY^q - YX^q - Z^(q+1) evaluated at coordinates in a common field.
    pub fn eval_curve(
        &self,
        fld: &FieldDescriptor,
        x: &FieldElement,
        y: &FieldElement,
        z: &FieldElement,
    ) -> Result<FieldElement> {
        fld.check(x)?;
        fld.check(y)?;
        fld.check(z)?;
        let xq = fld.pow(x, self.q as u128);
        let yq = fld.pow(y, self.q as u128);
        let zq1 = fld.pow(z, self.q as u128 + 1);
        let t = fld.sub(&fld.mul(x, &yq), &fld.mul(y, &xq));
        Ok(fld.sub(&t, &zq1))
    }

    /// Normalizes and validates a point of Z.
    pub fn point(
        &self,
        fld: &Arc<FieldDescriptor>,
        x: FieldElement,
        y: FieldElement,
        z: FieldElement,
    ) -> Result<ProjectivePoint> {
        let v = self.eval_curve(fld, &x, &y, &z)?;
        if !fld.is_zero(&v) {
            return Err(Error::DomainError(format!(
                "({x:?} : {y:?} : {z:?}) does not lie on the curve"
            )));
        }
        normalize(fld, x, y, z)
    }

    /// The q+1 points (a : b : 0), (a : b) in P^1(F_q), as points over F_q.
    /// Indexed with P_0 = (1:0:0) first and (0:1:0) last.
    pub fn boundary_points(&self) -> Vec<ProjectivePoint> {
        let f = &self.base;
        let mut pts = Vec::with_capacity(self.q as usize + 1);
        for b in f.elements() {
            pts.push(ProjectivePoint {
                coords: [f.one(), b, f.zero()],
            });
        }
        pts.push(ProjectivePoint {
            coords: [f.zero(), f.one(), f.zero()],
        });
        pts
    }

    /// All points of Z(F_{q^m}), normalized, sorted, without duplicates.
    /// Listing is capped at 2^16 field elements; use [`Self::count_points`]
    /// beyond that.
    pub fn enumerate_points(&self, m: u32) -> Result<Vec<ProjectivePoint>> {
        let fld = self.extension_field(m)?;
        self.enumerate_points_of(&fld)
    }

    /// Point listing over an explicitly given extension of F_q.
    pub fn enumerate_points_of(
        &self,
        fld: &Arc<FieldDescriptor>,
    ) -> Result<Vec<ProjectivePoint>> {
        self.check_extension(fld)?;
        let s = fld.size();
        if s > POINT_ENUM_CAP {
            return Err(Error::FieldTooLarge(format!(
                "point listing over {fld:?} ({s} elements) exceeds {POINT_ENUM_CAP}; use count_points"
            )));
        }
        // fibre map: w -> all c with c^(q+1) = w
        let mut fibres: BTreeMap<FieldElement, Vec<FieldElement>> = BTreeMap::new();
        for c in fld.elements() {
            let w = fld.pow(&c, self.q as u128 + 1);
            fibres.entry(w).or_default().push(c);
        }
        let mut pts = Vec::new();
        for b in fld.elements() {
            let w = fld.sub(&fld.pow(&b, self.q as u128), &b);
            if let Some(cs) = fibres.get(&w) {
                for c in cs {
                    pts.push(ProjectivePoint {
                        coords: [fld.one(), b.clone(), c.clone()],
                    });
                }
            }
        }
        pts.push(ProjectivePoint {
            coords: [fld.zero(), fld.one(), fld.zero()],
        });
        pts.sort();
        pts.dedup();
        Ok(pts)
    }

    /// |Z(F_{q^m})|.
    pub fn count_points(&self, m: u32) -> Result<u64> {
        if let Some(&n) = self.count_cache.lock().unwrap().get(&m) {
            return Ok(n);
        }
        let fld = self.extension_field(m)?;
        let n = self.count_points_in(&fld)?;
        self.count_cache.lock().unwrap().insert(m, n);
        Ok(n)
    }

    /// |Z(F)| for an extension F of F_q.
    pub fn count_points_in(&self, fld: &Arc<FieldDescriptor>) -> Result<u64> {
        self.check_extension(fld)?;
        if fld.size() <= NAIVE_COUNT_CAP {
            self.count_points_naive_in(fld)
        } else {
            self.count_points_fast_in(fld)
        }
    }

    /// Literal fibre sum: 1 + sum_b #{c : c^(q+1) = b^q - b}.
    pub fn count_points_naive_in(&self, fld: &Arc<FieldDescriptor>) -> Result<u64> {
        self.check_extension(fld)?;
        let mut n: u64 = 1; // (0 : 1 : 0)
        for b in fld.elements() {
            let w = fld.sub(&fld.pow(&b, self.q as u128), &b);
            n += fld.nth_power_fiber_count(self.q + 1, &w);
        }
        Ok(n)
    }

    /// Subgroup-and-trace count:
    /// |Z(F)| = 1 + q + g q #{w in H : Tr_{F/F_q}(w) = 0},
    /// where g = gcd(q+1, |F|-1) and H is the group of (q+1)-th powers.
    fn count_points_fast_in(&self, fld: &Arc<FieldDescriptor>) -> Result<u64> {
        let s = fld.size();
        let s1 = s - 1;
        let g = gcd_u64(self.q + 1, s1);
        let gamma = fld.multiplicative_generator();
        let step = fld.pow(&gamma, g as u128);
        let trace_rows = self.subfield_trace_rows(fld);
        let p = fld.p();
        let mut w = fld.one();
        let mut scratch = fld.zero();
        let mut h_zero_trace: u64 = 0;
        for _ in 0..s1 / g {
            if trace_is_zero(&trace_rows, w.coeffs(), p) {
                h_zero_trace += 1;
            }
            fld.mul_into(&w, &step, &mut scratch);
            std::mem::swap(&mut w, &mut scratch);
        }
        Ok(1 + self.q + g * self.q * h_zero_trace)
    }

    /// Rows of the matrix of Tr_{F/F_q} : F -> F as an F_p-linear map.
    fn subfield_trace_rows(&self, fld: &Arc<FieldDescriptor>) -> Vec<Vec<u64>> {
        let k = fld.degree() as usize;
        let m = fld.degree() / self.e;
        let mut cols: Vec<Vec<u64>> = Vec::with_capacity(k);
        for j in 0..k {
            let mut basis = vec![0u64; k];
            basis[j] = 1;
            let b = fld.element(&basis);
            let mut acc = b.clone();
            let mut pw = b;
            for _ in 1..m {
                pw = fld.frobenius(&pw, self.e);
                acc = fld.add(&acc, &pw);
            }
            cols.push(acc.coeffs().to_vec());
        }
        // transpose to rows
        let mut rows = vec![vec![0u64; k]; k];
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                rows[i][j] = v;
            }
        }
        rows
    }

    /// Singular-point search over F_{q^m} for m <= m_max. The reduced
    /// partials of XY^q - YX^q - Z^(q+1) in characteristic p are
    /// (Y^q, -X^q, -Z^q); since the curve degree q+1 is 1 mod p, the Euler
    /// relation puts every common zero of the partials on the curve, so the
    /// scan runs over curve points (cross-checked against a full plane scan
    /// for small fields).
    pub fn is_smooth(&self, m_max: u32) -> Result<SmoothnessReport> {
        let px = self.curve_form(&self.base).partial_derivative(0);
        let py = self.curve_form(&self.base).partial_derivative(1);
        let pz = self.curve_form(&self.base).partial_derivative(2);
        let mut checked = Vec::new();
        for m in 1..=m_max {
            let fld = match self.extension_field(m) {
                Ok(f) => f,
                Err(Error::FieldTooLarge(_)) => break,
                Err(e) => return Err(e),
            };
            if fld.size() > POINT_ENUM_CAP {
                break;
            }
            let emb = self.base_embedding(&fld)?;
            let vanish = |form: &HomPoly, pt: &ProjectivePoint| -> Result<bool> {
                let v = form.eval(&fld, Some(&emb), [pt.x(), pt.y(), pt.z()])?;
                Ok(fld.is_zero(&v))
            };
            for pt in self.enumerate_points_of(&fld)? {
                if vanish(&px, &pt)? && vanish(&py, &pt)? && vanish(&pz, &pt)? {
                    return Ok(SmoothnessReport {
                        smooth: false,
                        witness: Some(pt),
                        extensions_checked: checked,
                    });
                }
            }
            // independent full plane scan at small sizes
            if fld.size() <= 512 {
                if let Some(pt) = scan_plane_for_common_zero(&fld, &emb, &[&px, &py, &pz])? {
                    return Ok(SmoothnessReport {
                        smooth: false,
                        witness: Some(pt),
                        extensions_checked: checked,
                    });
                }
            }
            checked.push(m);
        }
        Ok(SmoothnessReport {
            smooth: true,
            witness: None,
            extensions_checked: checked,
        })
    }

    /// The defining form XY^q - YX^q - Z^(q+1) over a chosen base field.
    pub fn curve_form(&self, base: &Arc<FieldDescriptor>) -> HomPoly {
        let q = self.q as u16;
        HomPoly::from_terms(
            base,
            vec![
                ((1, q, 0), base.one()),
                ((q, 1, 0), base.neg_one()),
                ((0, 0, q + 1), base.neg_one()),
            ],
        )
        .expect("curve form is homogeneous")
    }

    /// Points of Y(F_{q^m}) = points of Z with nonzero Z-coordinate,
    /// dehomogenised to (u, v) = (X/Z, Y/Z).
    pub fn affine_points(&self, m: u32) -> Result<Vec<AffinePoint>> {
        let fld = self.extension_field(m)?;
        let mut out = Vec::new();
        for pt in self.enumerate_points_of(&fld)? {
            if fld.is_zero(pt.z()) {
                continue;
            }
            let zinv = fld.inv(pt.z())?;
            out.push(AffinePoint {
                u: fld.mul(pt.x(), &zinv),
                v: fld.mul(pt.y(), &zinv),
            });
        }
        out.sort();
        Ok(out)
    }

    /// |Y(F_{q^m})| without listing: all q+1 boundary points are F_q-rational.
    pub fn count_affine_points(&self, m: u32) -> Result<u64> {
        Ok(self.count_points(m)? - (self.q + 1))
    }

    /// Validates (u, v) against uv^q - vu^q = 1.
    pub fn affine_point(
        &self,
        fld: &Arc<FieldDescriptor>,
        u: FieldElement,
        v: FieldElement,
    ) -> Result<AffinePoint> {
        let lhs = fld.sub(
            &fld.mul(&u, &fld.pow(&v, self.q as u128)),
            &fld.mul(&v, &fld.pow(&u, self.q as u128)),
        );
        if lhs != fld.one() {
            return Err(Error::DomainError(format!(
                "({u:?}, {v:?}) does not satisfy uv^q - vu^q = 1"
            )));
        }
        Ok(AffinePoint { u, v })
    }

    /// Validates (y, t) against t^(q+1) = y^q - y with t != 0.
    pub fn special_fibre_point(
        &self,
        fld: &Arc<FieldDescriptor>,
        y: FieldElement,
        t: FieldElement,
    ) -> Result<SpecialFibrePoint> {
        if fld.is_zero(&t) {
            return Err(Error::DomainError(
                "special fibre chart requires t != 0".into(),
            ));
        }
        let lhs = fld.pow(&t, self.q as u128 + 1);
        let rhs = fld.sub(&fld.pow(&y, self.q as u128), &y);
        if lhs != rhs {
            return Err(Error::DomainError(format!(
                "({y:?}, {t:?}) does not satisfy t^(q+1) = y^q - y"
            )));
        }
        Ok(SpecialFibrePoint { y, t })
    }

    /// All (y, t) with t^(q+1) = y^q - y, t != 0, over F_{q^m}.
    pub fn special_fibre_points(&self, m: u32) -> Result<Vec<SpecialFibrePoint>> {
        let fld = self.extension_field(m)?;
        let s = fld.size();
        if s > POINT_ENUM_CAP {
            return Err(Error::FieldTooLarge(format!(
                "special fibre listing over {fld:?} exceeds {POINT_ENUM_CAP}"
            )));
        }
        let mut fibres: BTreeMap<FieldElement, Vec<FieldElement>> = BTreeMap::new();
        for t in fld.elements() {
            if fld.is_zero(&t) {
                continue;
            }
            let w = fld.pow(&t, self.q as u128 + 1);
            fibres.entry(w).or_default().push(t);
        }
        let mut out = Vec::new();
        for y in fld.elements() {
            let w = fld.sub(&fld.pow(&y, self.q as u128), &y);
            if fld.is_zero(&w) {
                continue;
            }
            if let Some(ts) = fibres.get(&w) {
                for t in ts {
                    out.push(SpecialFibrePoint {
                        y: y.clone(),
                        t: t.clone(),
                    });
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// (y, t) -> (u, v) = (1/t, y/t).
    pub fn affiso_forward(
        &self,
        fld: &Arc<FieldDescriptor>,
        pt: &SpecialFibrePoint,
    ) -> Result<AffinePoint> {
        let tinv = fld.inv(&pt.t)?;
        self.affine_point(fld, tinv.clone(), fld.mul(&pt.y, &tinv))
    }

    /// (u, v) -> (y, t) = (v/u, 1/u); u = 0 cannot occur on Y.
    pub fn affiso_backward(
        &self,
        fld: &Arc<FieldDescriptor>,
        pt: &AffinePoint,
    ) -> Result<SpecialFibrePoint> {
        if fld.is_zero(&pt.u) {
            return Err(Error::DomainError(
                "affine point with u = 0 violates uv^q - vu^q = 1".into(),
            ));
        }
        let uinv = fld.inv(&pt.u)?;
        self.special_fibre_point(fld, fld.mul(&pt.v, &uinv), uinv.clone())
    }

    fn check_extension(&self, fld: &FieldDescriptor) -> Result<()> {
        if fld.p() != self.p || fld.degree() % self.e != 0 {
            return Err(Error::FieldMismatch(format!(
                "{fld:?} is not an extension of F_{}",
                self.q
            )));
        }
        Ok(())
    }
}

/// Normalization: scale so the first nonzero coordinate equals 1.
pub(crate) fn normalize(
    fld: &FieldDescriptor,
    x: FieldElement,
    y: FieldElement,
    z: FieldElement,
) -> Result<ProjectivePoint> {
    let coords = [x, y, z];
    let lead = coords
        .iter()
        .position(|c| !fld.is_zero(c))
        .ok_or_else(|| Error::DomainError("projective point (0 : 0 : 0)".into()))?;
    let inv = fld.inv(&coords[lead])?;
    let norm = [
        fld.mul(&coords[0], &inv),
        fld.mul(&coords[1], &inv),
        fld.mul(&coords[2], &inv),
    ];
    Ok(ProjectivePoint { coords: norm })
}

fn trace_is_zero(rows: &[Vec<u64>], coeffs: &[u64], p: u64) -> bool {
    for row in rows {
        let mut acc: u128 = 0;
        for (a, b) in row.iter().zip(coeffs) {
            acc += *a as u128 * *b as u128;
        }
        if acc % p as u128 != 0 {
            return false;
        }
    }
    true
}

fn scan_plane_for_common_zero(
    fld: &Arc<FieldDescriptor>,
    emb: &Embedding,
    forms: &[&HomPoly],
) -> Result<Option<ProjectivePoint>> {
    let zero_at = |x: &FieldElement, y: &FieldElement, z: &FieldElement| -> Result<bool> {
        for f in forms {
            if !fld.is_zero(&f.eval(fld, Some(emb), [x, y, z])?) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let one = fld.one();
    let zero = fld.zero();
    for y in fld.elements() {
        for z in fld.elements() {
            if zero_at(&one, &y, &z)? {
                return Ok(Some(ProjectivePoint {
                    coords: [one.clone(), y, z],
                }));
            }
        }
    }
    for z in fld.elements() {
        if zero_at(&zero, &one, &z)? {
            return Ok(Some(ProjectivePoint {
                coords: [zero.clone(), one.clone(), z],
            }));
        }
    }
    if zero_at(&zero, &zero, &one)? {
        return Ok(Some(ProjectivePoint {
            coords: [zero.clone(), zero, one],
        }));
    }
    Ok(None)
}

fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = poly::prime_divisors(q)[0];
    let mut e = 0u32;
    let mut n = q;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    if n == 1 {
        Some((p, e))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Homogeneous forms in X, Y, Z
// ---------------------------------------------------------------------------

/// A homogeneous polynomial in X, Y, Z with coefficients in a fixed base
/// field. Terms are kept in a map keyed by exponent triple, so the
/// representation is canonical.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HomPoly {
    base: Arc<FieldDescriptor>,
    degree: u16,
    terms: BTreeMap<(u16, u16, u16), FieldElement>,
}

impl HomPoly {
    pub fn from_terms(
        base: &Arc<FieldDescriptor>,
        terms: Vec<((u16, u16, u16), FieldElement)>,
    ) -> Result<HomPoly> {
        let mut map: BTreeMap<(u16, u16, u16), FieldElement> = BTreeMap::new();
        let mut degree: Option<u16> = None;
        for ((i, j, k), c) in terms {
            base.check(&c)?;
            let d = i + j + k;
            match degree {
                None => degree = Some(d),
                Some(d0) if d0 != d => {
                    return Err(Error::InvalidParameter(format!(
                        "non-homogeneous terms: degree {d0} vs {d}"
                    )))
                }
                _ => {}
            }
            let entry = map.entry((i, j, k)).or_insert_with(|| base.zero());
            *entry = base.add(entry, &c);
        }
        map.retain(|_, c| !base.is_zero(c));
        Ok(HomPoly {
            base: base.clone(),
            degree: degree.unwrap_or(0),
            terms: map,
        })
    }

    /// dX - cY, the pencil of lines through (0 : 0 : 1).
    pub fn line_through_pencil(
        base: &Arc<FieldDescriptor>,
        c: &FieldElement,
        d: &FieldElement,
    ) -> Result<HomPoly> {
        HomPoly::from_terms(
            base,
            vec![((1, 0, 0), d.clone()), ((0, 1, 0), base.neg(c))],
        )
    }

    pub fn monomial(base: &Arc<FieldDescriptor>, exps: (u16, u16, u16)) -> HomPoly {
        HomPoly::from_terms(base, vec![(exps, base.one())]).unwrap()
    }

    pub fn base(&self) -> &Arc<FieldDescriptor> {
        &self.base
    }

    pub fn degree(&self) -> u16 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u16, u16, u16), &FieldElement)> {
        self.terms.iter()
    }

    pub fn mul(&self, other: &HomPoly) -> HomPoly {
        let mut terms = Vec::new();
        for ((i1, j1, k1), c1) in &self.terms {
            for ((i2, j2, k2), c2) in &other.terms {
                terms.push((
                    (i1 + i2, j1 + j2, k1 + k2),
                    self.base.mul(c1, c2),
                ));
            }
        }
        let degree = self.degree + other.degree;
        let mut out = HomPoly::from_terms(&self.base, terms).unwrap();
        out.degree = degree;
        out
    }

    /// Partial derivative with the characteristic-p reduction applied to the
    /// exponent coefficients. var: 0 = X, 1 = Y, 2 = Z.
    pub fn partial_derivative(&self, var: usize) -> HomPoly {
        let p = self.base.p();
        let mut terms = Vec::new();
        for (&(i, j, k), c) in &self.terms {
            let exps = [i, j, k];
            let n = exps[var];
            if n == 0 {
                continue;
            }
            let scale = n as u64 % p;
            if scale == 0 {
                continue;
            }
            let mut e2 = exps;
            e2[var] -= 1;
            terms.push(((e2[0], e2[1], e2[2]), self.base.scalar_mul(scale, c)));
        }
        let mut out = HomPoly::from_terms(&self.base, terms).unwrap();
        out.degree = self.degree.saturating_sub(1);
        out
    }

    /// Evaluates at a point with coordinates in `fld`; coefficients are
    /// carried over by `emb` (None requires fld to be the base itself).
    pub fn eval(
        &self,
        fld: &Arc<FieldDescriptor>,
        emb: Option<&Embedding>,
        pt: [&FieldElement; 3],
    ) -> Result<FieldElement> {
        let mut acc = fld.zero();
        for (&(i, j, k), c) in &self.terms {
            let cc = match emb {
                Some(e) => e.apply(c),
                None => {
                    if **fld != *self.base {
                        return Err(Error::FieldMismatch(
                            "form evaluated outside its base field without an embedding".into(),
                        ));
                    }
                    c.clone()
                }
            };
            let mut term = cc;
            if i > 0 {
                term = fld.mul(&term, &fld.pow(pt[0], i as u128));
            }
            if j > 0 {
                term = fld.mul(&term, &fld.pow(pt[1], j as u128));
            }
            if k > 0 {
                term = fld.mul(&term, &fld.pow(pt[2], k as u128));
            }
            acc = fld.add(&acc, &term);
        }
        Ok(acc)
    }

    /// Scales so the first term in exponent order has coefficient 1.
    pub fn monic(&self) -> Result<HomPoly> {
        let (_, lead) = self
            .terms
            .iter()
            .next()
            .ok_or_else(|| Error::DomainError("monic normalisation of zero form".into()))?;
        let inv = self.base.inv(lead)?;
        let terms = self
            .terms
            .iter()
            .map(|(&e, c)| (e, self.base.mul(c, &inv)))
            .collect();
        let mut out = HomPoly::from_terms(&self.base, terms).unwrap();
        out.degree = self.degree;
        Ok(out)
    }

    /// Canonical reduction modulo the curve form: every Z-exponent is brought
    /// below q+1 by Z^(q+1) -> XY^q - YX^q. The result is zero exactly when
    /// the form is a multiple of the curve equation.
    pub fn reduce_mod_curve(&self, q: u64) -> HomPoly {
        let q = q as u16;
        let mut work: Vec<((u16, u16, u16), FieldElement)> =
            self.terms.iter().map(|(&e, c)| (e, c.clone())).collect();
        let mut reduced: Vec<((u16, u16, u16), FieldElement)> = Vec::new();
        while let Some(((i, j, k), c)) = work.pop() {
            if k <= q {
                reduced.push(((i, j, k), c));
            } else {
                // Z^(q+1) = XY^q - YX^q
                work.push(((i + 1, j + q, k - q - 1), c.clone()));
                work.push(((i + q, j + 1, k - q - 1), self.base.neg(&c)));
            }
        }
        let mut out = HomPoly::from_terms(&self.base, reduced).unwrap();
        out.degree = self.degree;
        out
    }
}

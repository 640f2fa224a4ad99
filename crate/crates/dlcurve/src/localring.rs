//! Local expansions at smooth points of Z, valuations of homogeneous form
//! ratios, closed points (places) and principal divisors.
//!
//! At a boundary point (a : b : 0) with a != 0 the function Z/X is a
//! uniformiser: dividing the curve equation by X^(q+1) gives the chart
//! relation w^q - w = t^(q+1) with w = Y/X, t = Z/X, and w = b + eps with
//! eps solving eps^q - eps = t^(q+1), eps = O(t^(q+1)). At any affine point
//! (1 : b : c) the partial of w^q - w - z^(q+1) in w is exactly -1, so z - c
//! is a uniformiser and w lifts by Newton iteration. Valuations are read off
//! as orders of composed truncated series; this reproduces every boundary
//! valuation of the line pencil H_(c:d) = dX - cY exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::curve::{CurveContext, HomPoly, ProjectivePoint};
use crate::error::{Error, Result};
use crate::ffield::{embed, Embedding, FieldDescriptor, FieldElement};

/// Hard ceiling for precision escalation.
pub const MAX_PRECISION: usize = 4096;

/// Default working precision for expansions at parameter q.
pub fn default_precision(q: u64) -> usize {
    ((q + 1) * (q + 2)) as usize
}

// ---------------------------------------------------------------------------
// Truncated power series
// ---------------------------------------------------------------------------

/// A power series over a finite field truncated at fixed precision N:
/// coefficients c_0 .. c_{N-1}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncatedSeries {
    field: Arc<FieldDescriptor>,
    coeffs: Vec<FieldElement>,
}

impl TruncatedSeries {
    pub fn zero(field: &Arc<FieldDescriptor>, prec: usize) -> Self {
        TruncatedSeries {
            field: field.clone(),
            coeffs: vec![field.zero(); prec],
        }
    }

    pub fn constant(field: &Arc<FieldDescriptor>, c: FieldElement, prec: usize) -> Self {
        let mut s = Self::zero(field, prec);
        s.coeffs[0] = c;
        s
    }

    /// c t^n truncated at prec.
    pub fn monomial(
        field: &Arc<FieldDescriptor>,
        c: FieldElement,
        n: usize,
        prec: usize,
    ) -> Self {
        let mut s = Self::zero(field, prec);
        if n < prec {
            s.coeffs[n] = c;
        }
        s
    }

    pub fn variable(field: &Arc<FieldDescriptor>, prec: usize) -> Self {
        Self::monomial(field, field.one(), 1, prec)
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: usize) -> &FieldElement {
        &self.coeffs[i]
    }

    /// Index of the first nonzero coefficient; None when the series vanishes
    /// to the full working precision (insufficient precision signal).
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !self.field.is_zero(c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.precision().min(other.precision());
        let f = &self.field;
        let coeffs = (0..prec)
            .map(|i| f.add(&self.coeffs[i], &other.coeffs[i]))
            .collect();
        TruncatedSeries {
            field: f.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let prec = self.precision().min(other.precision());
        let f = &self.field;
        let coeffs = (0..prec)
            .map(|i| f.sub(&self.coeffs[i], &other.coeffs[i]))
            .collect();
        TruncatedSeries {
            field: f.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        TruncatedSeries {
            field: f.clone(),
            coeffs: self.coeffs.iter().map(|c| f.neg(c)).collect(),
        }
    }

    pub fn scale(&self, c: &FieldElement) -> Self {
        let f = &self.field;
        TruncatedSeries {
            field: f.clone(),
            coeffs: self.coeffs.iter().map(|a| f.mul(a, c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.precision().min(other.precision());
        let f = &self.field;
        let mut out = vec![f.zero(); prec];
        let mut tmp = f.zero();
        for (i, a) in self.coeffs.iter().enumerate().take(prec) {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= prec {
                    break;
                }
                if f.is_zero(b) {
                    continue;
                }
                f.mul_into(a, b, &mut tmp);
                out[i + j] = f.add(&out[i + j], &tmp);
            }
        }
        TruncatedSeries {
            field: f.clone(),
            coeffs: out,
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::constant(&self.field, self.field.one(), self.precision());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplicative inverse; requires a unit constant term.
    pub fn invert(&self) -> Result<Self> {
        let f = &self.field;
        if f.is_zero(&self.coeffs[0]) {
            return Err(Error::DomainError(
                "series inverse needs a nonzero constant term".into(),
            ));
        }
        let c0_inv = f.inv(&self.coeffs[0])?;
        let prec = self.precision();
        let mut out = vec![f.zero(); prec];
        out[0] = c0_inv.clone();
        for n in 1..prec {
            let mut acc = f.zero();
            for i in 1..=n {
                if f.is_zero(&self.coeffs[i]) {
                    continue;
                }
                acc = f.add(&acc, &f.mul(&self.coeffs[i], &out[n - i]));
            }
            out[n] = f.neg(&f.mul(&c0_inv, &acc));
        }
        Ok(TruncatedSeries {
            field: f.clone(),
            coeffs: out,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.order().is_none()
    }
}

// ---------------------------------------------------------------------------
// Local charts
// ---------------------------------------------------------------------------

/// A local parametrisation of Z at a smooth point: three coordinate series
/// in the uniformiser t, one of them constant 1 (the chart scaling), with
/// the curve equation vanishing identically to the working precision.
#[derive(Clone, Debug)]
pub struct LocalChart {
    pub field: Arc<FieldDescriptor>,
    pub center: ProjectivePoint,
    pub coords: [TruncatedSeries; 3],
    /// Index of the coordinate that is identically 1.
    pub scaling: usize,
}

/// Chart at a boundary point, via the fixed-point iteration
/// eps <- eps^q - t^(q+1) for the chart relation eps^q - eps = t^(q+1).
pub fn expand_at_boundary(
    ctx: &CurveContext,
    fld: &Arc<FieldDescriptor>,
    pt: &ProjectivePoint,
    prec: usize,
) -> Result<LocalChart> {
    if prec < default_precision(ctx.q()) {
        return Err(Error::PrecisionError(prec));
    }
    if !fld.is_zero(pt.z()) {
        return Err(Error::DomainError(format!(
            "{pt:?} is not a boundary point"
        )));
    }
    boundary_chart(ctx, fld, pt, prec)
}

fn boundary_chart(
    ctx: &CurveContext,
    fld: &Arc<FieldDescriptor>,
    pt: &ProjectivePoint,
    prec: usize,
) -> Result<LocalChart> {
    let q = ctx.q();
    let t = TruncatedSeries::variable(fld, prec);
    let t_q1 = t.pow(q + 1);
    let max_iter = prec.ilog(q.max(2) as usize) as usize + 3;
    if !fld.is_zero(pt.x()) {
        // X-chart: w = b + eps, eps^q - eps = t^(q+1)
        let mut eps = TruncatedSeries::zero(fld, prec);
        for _ in 0..max_iter {
            let next = eps.pow(q).sub(&t_q1);
            if next == eps {
                break;
            }
            eps = next;
        }
        let w = TruncatedSeries::constant(fld, pt.y().clone(), prec).add(&eps);
        let chart = LocalChart {
            field: fld.clone(),
            center: pt.clone(),
            coords: [TruncatedSeries::constant(fld, fld.one(), prec), w, t],
            scaling: 0,
        };
        check_chart(ctx, &chart)?;
        Ok(chart)
    } else {
        // Y-chart at (0 : 1 : 0): x = a + delta, delta - delta^q = t^(q+1)
        let mut delta = TruncatedSeries::zero(fld, prec);
        for _ in 0..max_iter {
            let next = t_q1.add(&delta.pow(q));
            if next == delta {
                break;
            }
            delta = next;
        }
        let x = TruncatedSeries::constant(fld, pt.x().clone(), prec).add(&delta);
        let chart = LocalChart {
            field: fld.clone(),
            center: pt.clone(),
            coords: [x, TruncatedSeries::constant(fld, fld.one(), prec), t],
            scaling: 1,
        };
        check_chart(ctx, &chart)?;
        Ok(chart)
    }
}

/// Chart at any smooth point. Non-boundary points are (1 : b : c) with
/// c != 0; dF/dw = -1 there, so Newton iteration w <- w + F(w) lifts b along
/// the uniformiser t = z - c. Boundary points delegate to the boundary
/// construction.
pub fn expand_at_smooth_point(
    ctx: &CurveContext,
    fld: &Arc<FieldDescriptor>,
    pt: &ProjectivePoint,
    prec: usize,
) -> Result<LocalChart> {
    let q = ctx.q();
    if prec < 2 * (q as usize + 1) {
        return Err(Error::PrecisionError(prec));
    }
    if fld.is_zero(pt.z()) {
        return boundary_chart(ctx, fld, pt, prec.max(default_precision(q)));
    }
    // normalized non-boundary points have X = 1
    let z_series = TruncatedSeries::constant(fld, pt.z().clone(), prec)
        .add(&TruncatedSeries::variable(fld, prec));
    let rhs = z_series.pow(q + 1);
    let mut w = TruncatedSeries::constant(fld, pt.y().clone(), prec);
    let max_iter = prec.ilog(q.max(2) as usize) as usize + 3;
    for _ in 0..max_iter {
        let residual = w.pow(q).sub(&w).sub(&rhs);
        if residual.is_zero() {
            break;
        }
        w = w.add(&residual);
    }
    let chart = LocalChart {
        field: fld.clone(),
        center: pt.clone(),
        coords: [
            TruncatedSeries::constant(fld, fld.one(), prec),
            w,
            z_series,
        ],
        scaling: 0,
    };
    check_chart(ctx, &chart)?;
    Ok(chart)
}

/// The curve equation must vanish identically on a chart.
fn check_chart(ctx: &CurveContext, chart: &LocalChart) -> Result<()> {
    let q = ctx.q();
    let [sx, sy, sz] = &chart.coords;
    let residual = sx
        .mul(&sy.pow(q))
        .sub(&sy.mul(&sx.pow(q)))
        .sub(&sz.pow(q + 1));
    if residual.is_zero() {
        Ok(())
    } else {
        Err(Error::PrecisionError(chart.coords[0].precision()))
    }
}

/// Composes a homogeneous form with the chart coordinate series.
pub fn compose_form(
    form: &HomPoly,
    chart: &LocalChart,
    emb: &Embedding,
) -> Result<TruncatedSeries> {
    let fld = &chart.field;
    let prec = chart.coords[0].precision();
    let mut acc = TruncatedSeries::zero(fld, prec);
    for (&(i, j, k), c) in form.terms() {
        let mut term = TruncatedSeries::constant(fld, emb.apply(c), prec);
        if i > 0 {
            term = term.mul(&chart.coords[0].pow(i as u64));
        }
        if j > 0 {
            term = term.mul(&chart.coords[1].pow(j as u64));
        }
        if k > 0 {
            term = term.mul(&chart.coords[2].pow(k as u64));
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Form ratios
// ---------------------------------------------------------------------------

/// A ratio of homogeneous forms of equal degree over a common base field;
/// the denominator must not vanish on the curve.
#[derive(Clone, Debug)]
pub struct FormRatio {
    num: HomPoly,
    den: HomPoly,
}

impl FormRatio {
    pub fn new(ctx: &CurveContext, num: HomPoly, den: HomPoly) -> Result<FormRatio> {
        if num.base() != den.base() {
            return Err(Error::FieldMismatch(
                "numerator and denominator over different base fields".into(),
            ));
        }
        if num.degree() != den.degree() {
            return Err(Error::InvalidParameter(format!(
                "form degrees differ: {} vs {}",
                num.degree(),
                den.degree()
            )));
        }
        if num.reduce_mod_curve(ctx.q()).is_zero() {
            return Err(Error::DomainError(
                "numerator vanishes identically on the curve".into(),
            ));
        }
        if den.reduce_mod_curve(ctx.q()).is_zero() {
            return Err(Error::DomainError(
                "denominator vanishes identically on the curve".into(),
            ));
        }
        Ok(FormRatio { num, den })
    }

    pub fn num(&self) -> &HomPoly {
        &self.num
    }

    pub fn den(&self) -> &HomPoly {
        &self.den
    }

    pub fn base(&self) -> &Arc<FieldDescriptor> {
        self.num.base()
    }

    /// (f g) as a form ratio, for additivity checks.
    pub fn mul(&self, ctx: &CurveContext, other: &FormRatio) -> Result<FormRatio> {
        FormRatio::new(ctx, self.num.mul(&other.num), self.den.mul(&other.den))
    }
}

// ---------------------------------------------------------------------------
// Places and divisors
// ---------------------------------------------------------------------------

/// A closed point of Z over a base field F_l (l = q^base_degree): a Frobenius
/// orbit of geometric points, recorded by its lexicographically smallest
/// member and the orbit length.
#[derive(Clone, Debug)]
pub struct Place {
    base: Arc<FieldDescriptor>,
    field: Arc<FieldDescriptor>,
    rep: ProjectivePoint,
    degree: u32,
}

impl PartialEq for Place {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.rep == other.rep && *self.base == *other.base
    }
}

impl Eq for Place {}

impl PartialOrd for Place {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Place {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree, &self.rep).cmp(&(other.degree, &other.rep))
    }
}

impl Place {
    pub fn base(&self) -> &Arc<FieldDescriptor> {
        &self.base
    }

    pub fn field(&self) -> &Arc<FieldDescriptor> {
        &self.field
    }

    pub fn representative(&self) -> &ProjectivePoint {
        &self.rep
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_boundary(&self) -> bool {
        self.field.is_zero(self.rep.z())
    }
}

/// Finite formal sum of places with integer weights.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Divisor {
    weights: BTreeMap<Place, i64>,
}

impl Divisor {
    pub fn new() -> Divisor {
        Divisor::default()
    }

    pub fn add_place(&mut self, place: &Place, w: i64) {
        if w == 0 {
            return;
        }
        let entry = self.weights.entry(place.clone()).or_insert(0);
        *entry += w;
        if *entry == 0 {
            self.weights.remove(place);
        }
    }

    pub fn add(&self, other: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, w) in &other.weights {
            out.add_place(p, *w);
        }
        out
    }

    pub fn sub(&self, other: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, w) in &other.weights {
            out.add_place(p, -w);
        }
        out
    }

    pub fn scaled(&self, c: i64) -> Divisor {
        let mut out = Divisor::new();
        for (p, w) in &self.weights {
            out.add_place(p, w * c);
        }
        out
    }

    pub fn weight(&self, place: &Place) -> i64 {
        self.weights.get(place).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.weights
            .iter()
            .map(|(p, w)| p.degree() as i64 * w)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = (&Place, i64)> {
        self.weights.iter().map(|(p, &w)| (p, w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Frobenius x -> x^l on a point over an extension of F_l. Normalisation is
/// preserved (the leading 1 is fixed).
fn point_frobenius(
    fld: &Arc<FieldDescriptor>,
    times: u32,
    pt: &ProjectivePoint,
) -> ProjectivePoint {
    let c = pt.coords();
    let mapped = [
        fld.frobenius(&c[0], times),
        fld.frobenius(&c[1], times),
        fld.frobenius(&c[2], times),
    ];
    crate::curve::normalize(fld, mapped[0].clone(), mapped[1].clone(), mapped[2].clone())
        .expect("Frobenius preserves nonzero points")
}

/// All places of Z over F_{q^base_degree} of degree <= max_degree, sorted.
pub fn places_up_to_degree(
    ctx: &CurveContext,
    base_degree: u32,
    max_degree: u32,
) -> Result<Vec<Place>> {
    let base = ctx.extension_field(base_degree)?;
    let mut out = Vec::new();
    for d in 1..=max_degree {
        let fld = ctx.extension_field(base_degree * d)?;
        let frob_steps = ctx.e() * base_degree;
        let mut seen: BTreeSet<ProjectivePoint> = BTreeSet::new();
        for pt in ctx.enumerate_points_of(&fld)? {
            if seen.contains(&pt) {
                continue;
            }
            // orbit under x -> x^(q^base_degree)
            let mut orbit = vec![pt.clone()];
            let mut cur = point_frobenius(&fld, frob_steps, &pt);
            while cur != pt {
                orbit.push(cur.clone());
                cur = point_frobenius(&fld, frob_steps, &cur);
            }
            for o in &orbit {
                seen.insert(o.clone());
            }
            if orbit.len() == d as usize {
                let rep = orbit.iter().min().unwrap().clone();
                out.push(Place {
                    base: base.clone(),
                    field: fld.clone(),
                    rep,
                    degree: d,
                });
            }
        }
    }
    out.sort();
    Ok(out)
}

/// The degree-1 place at a boundary point, over F_{q^base_degree}.
pub fn boundary_place(
    ctx: &CurveContext,
    base_degree: u32,
    pt: &ProjectivePoint,
) -> Result<Place> {
    let base = ctx.extension_field(base_degree)?;
    let emb = embed(ctx.base_field(), &base)?;
    let c = pt.coords();
    let rep = crate::curve::normalize(&base, emb.apply(&c[0]), emb.apply(&c[1]), emb.apply(&c[2]))?;
    Ok(Place {
        base: base.clone(),
        field: base,
        rep,
        degree: 1,
    })
}

// ---------------------------------------------------------------------------
// Valuations
// ---------------------------------------------------------------------------

/// Order of vanishing of a single form at a place, i.e. the intersection
/// multiplicity of the form with the curve there (relative to the chart
/// scaling coordinate, which is nonzero at the centre).
pub fn form_order_at(ctx: &CurveContext, place: &Place, form: &HomPoly) -> Result<usize> {
    form_order_at_from(ctx, place, form, 0)
}

/// As [`form_order_at`], starting at the given working precision (still
/// escalating on demand up to [`MAX_PRECISION`]).
pub fn form_order_at_from(
    ctx: &CurveContext,
    place: &Place,
    form: &HomPoly,
    min_precision: usize,
) -> Result<usize> {
    let emb = embed(form.base(), place.field())?;
    let mut prec = default_precision(ctx.q())
        .max(2 * (form.degree() as usize + 1) * (ctx.q() as usize + 1))
        .max(min_precision);
    loop {
        let chart = expand_at_smooth_point(ctx, place.field(), place.representative(), prec)?;
        let series = compose_form(form, &chart, &emb)?;
        if let Some(ord) = series.order() {
            return Ok(ord);
        }
        prec *= 2;
        if prec > MAX_PRECISION {
            return Err(Error::PrecisionError(MAX_PRECISION));
        }
    }
}

/// nu_P(f) = ord(num o chart) - ord(den o chart).
pub fn valuation(ctx: &CurveContext, place: &Place, f: &FormRatio) -> Result<i64> {
    valuation_from(ctx, place, f, 0)
}

/// As [`valuation`], with a caller-chosen starting precision.
pub fn valuation_from(
    ctx: &CurveContext,
    place: &Place,
    f: &FormRatio,
    min_precision: usize,
) -> Result<i64> {
    let num_ord = form_order_at_from(ctx, place, f.num(), min_precision)?;
    let den_ord = form_order_at_from(ctx, place, f.den(), min_precision)?;
    Ok(num_ord as i64 - den_ord as i64)
}

/// The zero divisor of a form on Z over F_{q^base_degree}, searched through
/// places of increasing degree until the Bezout total deg(form) * (q+1) is
/// exhausted. Stops early once complete; SupportNotFound if the cap is hit.
pub fn form_zero_divisor(
    ctx: &CurveContext,
    base_degree: u32,
    form: &HomPoly,
    max_place_degree: u32,
) -> Result<Divisor> {
    let total = form.degree() as i64 * (ctx.q() as i64 + 1);
    let mut div = Divisor::new();
    let mut found: i64 = 0;
    for d in 1..=max_place_degree {
        let fld = match ctx.extension_field(base_degree * d) {
            Ok(f) => f,
            Err(Error::FieldTooLarge(_)) => break,
            Err(e) => return Err(e),
        };
        if fld.size() > crate::curve::POINT_ENUM_CAP {
            break;
        }
        let emb = embed(form.base(), &fld)?;
        for place in places_of_exact_degree(ctx, base_degree, d)? {
            let pt = place.representative();
            let value = form.eval(&fld, Some(&emb), [pt.x(), pt.y(), pt.z()])?;
            if !fld.is_zero(&value) {
                continue;
            }
            let ord = form_order_at(ctx, &place, form)?;
            if ord > 0 {
                div.add_place(&place, ord as i64);
                found += ord as i64 * d as i64;
            }
        }
        if found == total {
            return Ok(div);
        }
        if found > total {
            return Err(Error::DomainError(format!(
                "zero divisor degree {found} exceeds the Bezout bound {total}"
            )));
        }
    }
    Err(Error::SupportNotFound(max_place_degree))
}

fn places_of_exact_degree(
    ctx: &CurveContext,
    base_degree: u32,
    d: u32,
) -> Result<Vec<Place>> {
    Ok(places_up_to_degree(ctx, base_degree, d)?
        .into_iter()
        .filter(|p| p.degree() == d)
        .collect())
}

/// The principal divisor of f = num/den over F_{q^base_degree}:
/// div_0(num) - div_0(den). Both zero divisors must resolve within
/// max_place_degree; the result always has degree 0.
pub fn principal_divisor(
    ctx: &CurveContext,
    base_degree: u32,
    f: &FormRatio,
    max_place_degree: u32,
) -> Result<Divisor> {
    let zeros = form_zero_divisor(ctx, base_degree, f.num(), max_place_degree)?;
    let poles = form_zero_divisor(ctx, base_degree, f.den(), max_place_degree)?;
    let div = zeros.sub(&poles);
    debug_assert_eq!(div.degree(), 0);
    Ok(div)
}

/// Default search bound for the support of principal divisors of forms of
/// the given degree: all zeros lie in places of degree <= deg * (q+1).
pub fn default_support_bound(ctx: &CurveContext, form_degree: u16) -> u32 {
    form_degree as u32 * (ctx.q() as u32 + 1)
}

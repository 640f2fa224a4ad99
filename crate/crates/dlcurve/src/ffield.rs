//! Exact arithmetic in F_p and its extensions F_{p^k}.
//!
//! A field is described by its characteristic, extension degree and a
//! deterministic defining polynomial: the lexicographically smallest monic
//! irreducible of degree k over F_p, comparing coefficient vectors constant
//! term first. Elements are dense coefficient vectors reduced mod p, so
//! element equality is coefficient-vector equality and enumeration order is
//! the base-p counting order. Subfield relations are realised by explicit
//! [`Embedding`] values rather than by a compatibility convention between
//! defining polynomials.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly;

/// Hard cap on field size, |F| = p^k <= 2^60.
pub const MAX_FIELD_BITS: u32 = 60;
/// Hard cap on the extension degree.
pub const MAX_EXTENSION_DEGREE: u32 = 24;
/// Cap on full-field scans (embedding root searches, point enumeration).
pub const SCAN_CAP: u64 = 1 << 18;

/// An explicit finite field F_{p^k}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldDescriptor {
    p: u64,
    k: u32,
    /// Monic, degree k, irreducible over F_p; constant term first, length k+1.
    defining_poly: Vec<u64>,
    /// x^k reduced: coefficients of -(defining_poly mod x^k).
    reduction: Vec<u64>,
}

impl fmt::Debug for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{{{}^{}}}", self.p, self.k)
    }
}

/// An element of a [`FieldDescriptor`]: k residues mod p, constant term first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement {
    coeffs: Vec<u64>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)
    }
}

impl FieldElement {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }
}

/// Deterministic field constructor.
///
/// Repeated calls with the same arguments return the identical descriptor:
/// the defining polynomial is the first irreducible in lexicographic order.
pub fn make_field(p: u64, k: u32) -> Result<FieldDescriptor> {
    if !poly::is_prime_u64(p) {
        return Err(Error::InvalidPrime(p));
    }
    if k < 1 || k > MAX_EXTENSION_DEGREE {
        return Err(Error::FieldTooLarge(format!(
            "extension degree {k} outside 1..={MAX_EXTENSION_DEGREE}"
        )));
    }
    // p^k <= 2^60
    let mut size: u128 = 1;
    for _ in 0..k {
        size = size.saturating_mul(p as u128);
        if size > 1u128 << MAX_FIELD_BITS {
            return Err(Error::FieldTooLarge(format!(
                "{p}^{k} exceeds 2^{MAX_FIELD_BITS}"
            )));
        }
    }
    let defining_poly = smallest_irreducible(p, k);
    FieldDescriptor::from_poly_unchecked(p, defining_poly)
}

/// Searches monic degree-k polynomials in lexicographic order of
/// (c_0, ..., c_{k-1}) and returns the first irreducible one.
fn smallest_irreducible(p: u64, k: u32) -> Vec<u64> {
    let k = k as usize;
    if k == 1 {
        // x itself: F_p[x]/(x) = F_p
        return vec![0, 1];
    }
    // Constant term 0 means divisible by x, so start the odometer at c_0 = 1.
    // c_0 is the most significant digit of the lexicographic order.
    let mut lower = vec![0u64; k]; // c_0 .. c_{k-1}
    lower[0] = 1;
    loop {
        let mut f = lower.clone();
        f.push(1);
        if poly::is_irreducible(&f, p) {
            return f;
        }
        // increment at the least significant position, c_{k-1}
        let mut i = k - 1;
        loop {
            lower[i] += 1;
            if lower[i] < p {
                break;
            }
            lower[i] = 0;
            assert!(i > 0, "no irreducible polynomial found (impossible)");
            i -= 1;
        }
    }
}

impl FieldDescriptor {
    /// Builds a field from an explicit monic defining polynomial
    /// (constant term first, length k+1), verifying irreducibility.
    pub fn with_poly(p: u64, defining_poly: Vec<u64>) -> Result<FieldDescriptor> {
        if !poly::is_prime_u64(p) {
            return Err(Error::InvalidPrime(p));
        }
        if defining_poly.len() < 2 || *defining_poly.last().unwrap() != 1 {
            return Err(Error::InvalidParameter(
                "defining polynomial must be monic of degree >= 1".into(),
            ));
        }
        if defining_poly.iter().any(|&c| c >= p) {
            return Err(Error::InvalidParameter(
                "defining polynomial coefficients must be reduced mod p".into(),
            ));
        }
        if !poly::is_irreducible(&defining_poly, p) {
            return Err(Error::InvalidParameter(
                "defining polynomial is reducible".into(),
            ));
        }
        Self::from_poly_unchecked(p, defining_poly)
    }

    fn from_poly_unchecked(p: u64, defining_poly: Vec<u64>) -> Result<FieldDescriptor> {
        let k = (defining_poly.len() - 1) as u32;
        let reduction = defining_poly[..k as usize]
            .iter()
            .map(|&c| (p - c) % p)
            .collect();
        Ok(FieldDescriptor {
            p,
            k,
            defining_poly,
            reduction,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn defining_poly(&self) -> &[u64] {
        &self.defining_poly
    }

    /// |F| = p^k; guaranteed to fit in u64 by the construction caps.
    pub fn size(&self) -> u64 {
        let mut s = 1u64;
        for _ in 0..self.k {
            s *= self.p;
        }
        s
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            coeffs: vec![0; self.k as usize],
        }
    }

    pub fn one(&self) -> FieldElement {
        self.scalar(1)
    }

    /// The image of the integer n in the prime subfield.
    pub fn scalar(&self, n: u64) -> FieldElement {
        let mut coeffs = vec![0; self.k as usize];
        coeffs[0] = n % self.p;
        FieldElement { coeffs }
    }

    pub fn neg_one(&self) -> FieldElement {
        self.scalar(self.p - 1)
    }

    /// The residue class of x, a generator of the field over F_p for k > 1.
    pub fn gen(&self) -> FieldElement {
        let mut coeffs = vec![0; self.k as usize];
        if self.k > 1 {
            coeffs[1] = 1;
        }
        FieldElement { coeffs }
    }

    /// Builds an element from arbitrary u64 coefficients (reduced mod p,
    /// truncated or zero-padded to length k).
    pub fn element(&self, coeffs: &[u64]) -> FieldElement {
        let mut c = vec![0u64; self.k as usize];
        for (i, &v) in coeffs.iter().enumerate().take(self.k as usize) {
            c[i] = v % self.p;
        }
        FieldElement { coeffs: c }
    }

    /// Checks that an element structurally belongs to this field.
    pub fn contains(&self, x: &FieldElement) -> bool {
        x.coeffs.len() == self.k as usize && x.coeffs.iter().all(|&c| c < self.p)
    }

    pub(crate) fn check(&self, x: &FieldElement) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::FieldMismatch(format!(
                "element {:?} does not belong to {:?}",
                x, self
            )))
        }
    }

    #[inline]
    pub fn is_zero(&self, x: &FieldElement) -> bool {
        x.coeffs.iter().all(|&c| c == 0)
    }

    #[inline]
    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| {
                let s = x + y;
                if s >= self.p {
                    s - self.p
                } else {
                    s
                }
            })
            .collect();
        FieldElement { coeffs }
    }

    /// In-place a += b, allocation free.
    #[inline]
    pub fn add_assign(&self, a: &mut FieldElement, b: &FieldElement) {
        for (x, &y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            let s = *x + y;
            *x = if s >= self.p { s - self.p } else { s };
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| if x >= y { x - y } else { x + self.p - y })
            .collect();
        FieldElement { coeffs }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .map(|&x| if x == 0 { 0 } else { self.p - x })
            .collect();
        FieldElement { coeffs }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let mut out = self.zero();
        self.mul_into(a, b, &mut out);
        out
    }

    /// Allocation-free multiply for scan loops.
    #[inline]
    pub fn mul_into(&self, a: &FieldElement, b: &FieldElement, out: &mut FieldElement) {
        let k = self.k as usize;
        let p = self.p as u128;
        if k == 1 {
            out.coeffs.resize(1, 0);
            out.coeffs[0] = (a.coeffs[0] as u128 * b.coeffs[0] as u128 % p) as u64;
            return;
        }
        let mut acc = [0u128; 2 * MAX_EXTENSION_DEGREE as usize - 1];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let ai = ai as u128;
            for (j, &bj) in b.coeffs.iter().enumerate() {
                if bj != 0 {
                    acc[i + j] += ai * bj as u128;
                }
            }
        }
        // reduce coefficients, then fold degrees 2k-2 .. k using x^k = reduction
        let mut c = [0u64; 2 * MAX_EXTENSION_DEGREE as usize - 1];
        for i in 0..2 * k - 1 {
            c[i] = (acc[i] % p) as u64;
        }
        for d in (k..2 * k - 1).rev() {
            let v = c[d];
            if v == 0 {
                continue;
            }
            c[d] = 0;
            let v = v as u128;
            for (j, &rj) in self.reduction.iter().enumerate() {
                if rj != 0 {
                    c[d - k + j] = ((c[d - k + j] as u128 + v * rj as u128) % p) as u64;
                }
            }
        }
        out.coeffs.clear();
        out.coeffs.extend_from_slice(&c[..k]);
    }

    pub fn scalar_mul(&self, s: u64, a: &FieldElement) -> FieldElement {
        let s = (s % self.p) as u128;
        let coeffs = a
            .coeffs
            .iter()
            .map(|&x| (x as u128 * s % self.p as u128) as u64)
            .collect();
        FieldElement { coeffs }
    }

    pub fn pow(&self, a: &FieldElement, mut e: u128) -> FieldElement {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat. Zero input is a domain error.
    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if self.is_zero(a) {
            return Err(Error::DomainError("inverse of zero".into()));
        }
        Ok(self.pow(a, self.size() as u128 - 2))
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// x -> x^(p^times), the `times`-fold arithmetic Frobenius.
    pub fn frobenius(&self, x: &FieldElement, times: u32) -> FieldElement {
        let mut y = x.clone();
        for _ in 0..times {
            y = self.pow(&y, self.p as u128);
        }
        y
    }

    /// Enumeration in base-p counting order of the coefficient vector
    /// (index = sum c_i p^i).
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.size()).map(move |n| self.element_from_index(n))
    }

    pub fn element_from_index(&self, mut n: u64) -> FieldElement {
        let mut coeffs = vec![0u64; self.k as usize];
        for c in coeffs.iter_mut() {
            *c = n % self.p;
            n /= self.p;
        }
        FieldElement { coeffs }
    }

    pub fn index_of(&self, x: &FieldElement) -> u64 {
        let mut n = 0u64;
        for &c in x.coeffs.iter().rev() {
            n = n * self.p + c;
        }
        n
    }

    /// #{c in F : c^n = v}. Closed form: 1 for v = 0; otherwise
    /// gcd(n, |F|-1) when v is an n-th power (v^((|F|-1)/g) = 1), else 0.
    pub fn nth_power_fiber_count(&self, n: u64, v: &FieldElement) -> u64 {
        assert!(n >= 1, "fiber count needs n >= 1");
        if self.is_zero(v) {
            return 1;
        }
        let s1 = self.size() - 1;
        if s1 == 0 {
            return 1; // F_2 minus zero: c = 1 = v
        }
        let g = gcd_u64(n, s1);
        let probe = self.pow(v, (s1 / g) as u128);
        if probe == self.one() {
            g
        } else {
            0
        }
    }

    /// First multiplicative generator in enumeration order.
    pub fn multiplicative_generator(&self) -> FieldElement {
        let s1 = self.size() - 1;
        if s1 == 1 {
            return self.one();
        }
        let primes = poly::prime_divisors(s1);
        'candidate: for n in 2..self.size() {
            let x = self.element_from_index(n);
            for &r in &primes {
                if self.pow(&x, (s1 / r) as u128) == self.one() {
                    continue 'candidate;
                }
            }
            return x;
        }
        unreachable!("multiplicative group of a finite field is cyclic");
    }

    /// Matrix of the F_p-linear map x -> x^(p^e) in the coefficient basis;
    /// column j is the image of x^j.
    pub fn frobenius_matrix(&self, e: u32) -> Vec<Vec<u64>> {
        let k = self.k as usize;
        let mut cols = Vec::with_capacity(k);
        for j in 0..k {
            let mut basis = vec![0u64; k];
            basis[j] = 1;
            let img = self.frobenius(&FieldElement { coeffs: basis }, e);
            cols.push(img.coeffs);
        }
        cols
    }
}

pub(crate) fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// An embedding F_{p^a} -> F_{p^ab}, determined by the image of the source
/// generator: the first root of the source defining polynomial in the
/// enumeration order of the target.
#[derive(Clone, Debug)]
pub struct Embedding {
    src: Arc<FieldDescriptor>,
    dst: Arc<FieldDescriptor>,
    /// powers of the generator image, lengths src.k
    gen_powers: Vec<FieldElement>,
    identity: bool,
}

/// Deterministic embedding constructor.
pub fn embed(src: &Arc<FieldDescriptor>, dst: &Arc<FieldDescriptor>) -> Result<Embedding> {
    if src.p != dst.p || dst.k % src.k != 0 {
        return Err(Error::NoEmbedding {
            src: src.size(),
            dst: dst.size(),
        });
    }
    if src.k == 1 {
        // prime subfield is canonical; the generator of F_p[x]/(x) is 0
        return Ok(Embedding {
            src: src.clone(),
            dst: dst.clone(),
            gen_powers: vec![dst.one()],
            identity: src.k == dst.k,
        });
    }
    if **src == **dst {
        let image = src.gen();
        return Ok(Embedding::from_gen_image(src, dst, image));
    }
    if dst.size() > SCAN_CAP {
        return Err(Error::FieldTooLarge(format!(
            "embedding root search over {:?} exceeds the scan cap",
            dst
        )));
    }
    // first root of src.defining_poly in dst, in enumeration order
    for n in 0..dst.size() {
        let cand = dst.element_from_index(n);
        if eval_prime_poly(dst, src.defining_poly(), &cand) == dst.zero() {
            return Ok(Embedding::from_gen_image(src, dst, cand));
        }
    }
    unreachable!("a splitting field contains a root");
}

/// Evaluates a polynomial with F_p coefficients at a point of `fld`.
fn eval_prime_poly(fld: &FieldDescriptor, coeffs: &[u64], x: &FieldElement) -> FieldElement {
    let mut acc = fld.zero();
    for &c in coeffs.iter().rev() {
        acc = fld.mul(&acc, x);
        acc = fld.add(&acc, &fld.scalar(c));
    }
    acc
}

impl Embedding {
    fn from_gen_image(
        src: &Arc<FieldDescriptor>,
        dst: &Arc<FieldDescriptor>,
        image: FieldElement,
    ) -> Embedding {
        let mut gen_powers = Vec::with_capacity(src.k as usize);
        let mut acc = dst.one();
        for _ in 0..src.k {
            gen_powers.push(acc.clone());
            acc = dst.mul(&acc, &image);
        }
        Embedding {
            src: src.clone(),
            dst: dst.clone(),
            gen_powers,
            identity: **src == **dst,
        }
    }

    pub fn src(&self) -> &Arc<FieldDescriptor> {
        &self.src
    }

    pub fn dst(&self) -> &Arc<FieldDescriptor> {
        &self.dst
    }

    pub fn generator_image(&self) -> &FieldElement {
        if self.gen_powers.len() > 1 {
            &self.gen_powers[1]
        } else {
            &self.gen_powers[0]
        }
    }

    pub fn apply(&self, x: &FieldElement) -> FieldElement {
        if self.identity {
            return x.clone();
        }
        let mut acc = self.dst.zero();
        for (c, gp) in x.coeffs.iter().zip(&self.gen_powers) {
            if *c != 0 {
                acc = self.dst.add(&acc, &self.dst.scalar_mul(*c, gp));
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(f: FieldDescriptor) -> Arc<FieldDescriptor> {
        Arc::new(f)
    }

    #[test]
    fn prime_field_has_two_elements() {
        let f2 = make_field(2, 1).unwrap();
        let elems: Vec<_> = f2.elements().collect();
        assert_eq!(elems, vec![f2.zero(), f2.one()]);
    }

    #[test]
    fn f9_has_nine_elements() {
        let f9 = make_field(3, 2).unwrap();
        let elems: std::collections::BTreeSet<_> = f9.elements().collect();
        assert_eq!(elems.len(), 9);
    }

    #[test]
    fn deterministic_construction() {
        let a = make_field(3, 2).unwrap();
        let b = make_field(3, 2).unwrap();
        assert_eq!(a.defining_poly(), b.defining_poly());
        // lexicographically smallest irreducible over F_3 of degree 2 is x^2 + 1
        assert_eq!(a.defining_poly(), &[1, 0, 1]);
        // and over F_2, x^2 + x + 1
        assert_eq!(make_field(2, 2).unwrap().defining_poly(), &[1, 1, 1]);
    }

    #[test]
    fn frobenius_order_divides_degree() {
        let f16 = make_field(2, 4).unwrap();
        for x in f16.elements() {
            assert_eq!(f16.frobenius(&x, 4), x);
        }
    }

    #[test]
    fn frobenius_fixes_prime_subfield_of_f9() {
        let f9 = arc(make_field(3, 2).unwrap());
        for n in 0..3 {
            let x = f9.scalar(n);
            assert_eq!(f9.frobenius(&x, 1), x);
        }
        for x in f9.elements() {
            assert_eq!(f9.frobenius(&f9.frobenius(&x, 1), 1), x);
        }
    }

    #[test]
    fn generator_cube_in_custom_f9() {
        // F_9 presented by x^2 - x - 1 = x^2 + 2x + 2; g^2 = g + 1.
        let f9 = FieldDescriptor::with_poly(3, vec![2, 2, 1]).unwrap();
        let g = f9.gen();
        // oracle: schoolbook g * g * g with manual reduction
        let g2 = f9.mul(&g, &g);
        assert_eq!(g2, f9.element(&[1, 1])); // g + 1
        let g3 = f9.mul(&g2, &g);
        // g^3 = g(g+1) = g^2 + g = 2g + 1
        assert_eq!(g3, f9.element(&[1, 2]));
        assert_eq!(f9.frobenius(&g, 1), f9.pow(&g, 3));
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(make_field(6, 1), Err(Error::InvalidPrime(6))));
        assert!(matches!(make_field(2, 61), Err(Error::FieldTooLarge(_))));
        assert!(matches!(make_field(3, 40), Err(Error::FieldTooLarge(_))));
        assert!(FieldDescriptor::with_poly(2, vec![1, 0, 1]).is_err()); // (x+1)^2
    }

    #[test]
    fn embedding_fixes_prime_subfield() {
        let f3 = arc(make_field(3, 1).unwrap());
        let f9 = arc(make_field(3, 2).unwrap());
        let e = embed(&f3, &f9).unwrap();
        assert_eq!(e.apply(&f3.scalar(2)), f9.scalar(2));
    }

    #[test]
    fn embedding_composition_on_prime_field() {
        let f2 = arc(make_field(2, 1).unwrap());
        let f4 = arc(make_field(2, 2).unwrap());
        let f16 = arc(make_field(2, 4).unwrap());
        let e24 = embed(&f2, &f4).unwrap();
        let e416 = embed(&f4, &f16).unwrap();
        let e216 = embed(&f2, &f16).unwrap();
        for x in f2.elements() {
            assert_eq!(e416.apply(&e24.apply(&x)), e216.apply(&x));
        }
    }

    #[test]
    fn embedding_image_satisfies_source_polynomial() {
        // defining_poly(F_4) = x^2 + x + 1, so the image g must satisfy
        // g^2 + g + 1 = 0 in F_16; oracle is the exhaustive root search.
        let f4 = arc(make_field(2, 2).unwrap());
        assert_eq!(f4.defining_poly(), &[1, 1, 1]);
        let f16 = arc(make_field(2, 4).unwrap());
        let e = embed(&f4, &f16).unwrap();
        let g = e.generator_image().clone();
        let val = f16.add(&f16.add(&f16.mul(&g, &g), &g), &f16.one());
        assert!(f16.is_zero(&val));
        let roots: Vec<_> = f16
            .elements()
            .filter(|x| {
                let v = f16.add(&f16.add(&f16.mul(x, x), x), &f16.one());
                f16.is_zero(&v)
            })
            .collect();
        assert_eq!(roots.len(), 2);
        assert_eq!(g, roots[0]); // first root in enumeration order
    }

    #[test]
    fn embedding_is_injective_and_multiplicative() {
        let f4 = arc(make_field(2, 2).unwrap());
        let f16 = arc(make_field(2, 4).unwrap());
        let f256 = arc(make_field(2, 8).unwrap());
        for (src, dst) in [(&f4, &f16), (&f4, &f256), (&f16, &f256)] {
            let e = embed(src, dst).unwrap();
            let images: Vec<_> = src.elements().map(|x| e.apply(&x)).collect();
            let distinct: std::collections::BTreeSet<_> = images.iter().cloned().collect();
            assert_eq!(distinct.len(), src.size() as usize);
            for x in src.elements() {
                for y in src.elements() {
                    assert_eq!(
                        e.apply(&src.mul(&x, &y)),
                        dst.mul(&e.apply(&x), &e.apply(&y))
                    );
                    assert_eq!(
                        e.apply(&src.add(&x, &y)),
                        dst.add(&e.apply(&x), &e.apply(&y))
                    );
                }
                // Frobenius compatibility: embed(x^p) = embed(x)^p
                assert_eq!(e.apply(&src.frobenius(&x, 1)), dst.frobenius(&e.apply(&x), 1));
            }
        }
    }

    #[test]
    fn embedding_rejects_bad_degrees() {
        let f4 = arc(make_field(2, 2).unwrap());
        let f8 = arc(make_field(2, 3).unwrap());
        assert!(matches!(embed(&f4, &f8), Err(Error::NoEmbedding { .. })));
    }

    #[test]
    fn fiber_count_examples() {
        let f9 = make_field(3, 2).unwrap();
        // v = 0: only c = 0
        assert_eq!(f9.nth_power_fiber_count(4, &f9.zero()), 1);
        // brute-force oracle over all 9 elements
        let brute = |v: &FieldElement| {
            f9.elements()
                .filter(|c| f9.pow(c, 4) == *v)
                .count() as u64
        };
        assert_eq!(brute(&f9.one()), 4);
        assert_eq!(f9.nth_power_fiber_count(4, &f9.one()), 4);
        let g = f9.multiplicative_generator();
        assert_eq!(brute(&g), 0);
        assert_eq!(f9.nth_power_fiber_count(4, &g), 0);
        // fibers partition the field
        for n in [1u64, 2, 3, 4, 5, 8] {
            let total: u64 = f9
                .elements()
                .map(|v| f9.nth_power_fiber_count(n, &v))
                .sum();
            assert_eq!(total, 9);
        }
    }

    #[test]
    fn multiplicative_group_is_cyclic() {
        for (p, k) in [(2u64, 6u32), (3, 4), (5, 3), (7, 2), (61, 1)] {
            let f = make_field(p, k).unwrap();
            let g = f.multiplicative_generator();
            let s1 = f.size() - 1;
            assert_eq!(f.pow(&g, s1 as u128), f.one());
            for r in poly::prime_divisors(s1) {
                assert_ne!(f.pow(&g, (s1 / r) as u128), f.one());
            }
        }
    }

    #[test]
    fn frobenius_additivity_exhaustive_f64() {
        let f = make_field(2, 6).unwrap();
        let frob: Vec<_> = f.elements().map(|x| f.frobenius(&x, 1)).collect();
        let elems: Vec<_> = f.elements().collect();
        for x in &elems {
            for y in &elems {
                let s = f.add(x, y);
                let lhs = &frob[f.index_of(&s) as usize];
                let rhs = f.add(&frob[f.index_of(x) as usize], &frob[f.index_of(y) as usize]);
                assert_eq!(*lhs, rhs);
            }
        }
    }
}

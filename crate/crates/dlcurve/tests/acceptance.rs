//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Every assertion is an exact integer or finite-field identity; there are
//! no tolerances anywhere.

use std::collections::BTreeSet;

use dlcurve::clgroup::{
    cl_y_p_torsion_oracle, class_group_oracle, gamma0_mod_p_trivial, gamma_source_group,
    smith_normal_form, verify_picy_chain, AbelianPresentation, IntMatrix, StepStatus,
};
use dlcurve::curve::CurveContext;
use dlcurve::curve::HomPoly;
use dlcurve::ffield::{embed, make_field};
use dlcurve::localring::{
    boundary_place, places_up_to_degree, principal_divisor, valuation, FormRatio,
};
use dlcurve::zeta::{count_series, hasse_weil_check, l_polynomial_over_base, LPolynomial};

fn pass(n: u32, name: &str) {
    println!("criterion {n:02} ({name}): PASS");
}

#[test]
fn criterion_01_point_counts() {
    let t0 = std::time::Instant::now();
    for q in [2u64, 3, 4, 5] {
        let ctx = CurveContext::new(q).unwrap();
        assert_eq!(ctx.count_points(1).unwrap(), q + 1, "|Z(F_{q})|");
    }
    let expected_q2 = [(2u64, 9u64), (4, 65)];
    for (q, n2) in expected_q2 {
        let ctx = CurveContext::new(q).unwrap();
        assert_eq!(ctx.count_points(2).unwrap(), n2, "|Z(F_{}^2)| for q={q}", q);
    }
    for (q, n2) in [(3u64, 4u64), (5, 6)] {
        let ctx = CurveContext::new(q).unwrap();
        assert_eq!(ctx.count_points(2).unwrap(), n2, "|Z(F_{}^2)| for q={q}", q);
    }
    assert!(t0.elapsed().as_secs() < 10, "criterion 1 exceeded 10 s");
    pass(1, "point counts");
}

#[test]
fn criterion_02_boundary() {
    for q in [2u64, 3, 4, 5] {
        let ctx = CurveContext::new(q).unwrap();
        let boundary: BTreeSet<_> = ctx.boundary_points().into_iter().collect();
        assert_eq!(boundary.len(), q as usize + 1);
        let rational: BTreeSet<_> = ctx.enumerate_points(1).unwrap().into_iter().collect();
        assert_eq!(boundary, rational, "boundary = Z(F_q) at q={q}");
        for m in 1..=4u32 {
            let fld = ctx.extension_field(m).unwrap();
            let emb = embed(ctx.base_field(), &fld).unwrap();
            let embedded_boundary: BTreeSet<_> = ctx
                .boundary_points()
                .iter()
                .map(|pt| {
                    ctx.point(
                        &fld,
                        emb.apply(pt.x()),
                        emb.apply(pt.y()),
                        emb.apply(pt.z()),
                    )
                    .unwrap()
                })
                .collect();
            let z_minus_y: BTreeSet<_> = ctx
                .enumerate_points(m)
                .unwrap()
                .into_iter()
                .filter(|pt| fld.is_zero(pt.z()))
                .collect();
            assert_eq!(z_minus_y, embedded_boundary, "Z \\ Y at q={q}, m={m}");
        }
    }
    pass(2, "boundary points");
}

#[test]
fn criterion_03_smoothness() {
    for q in [2u64, 3, 4, 5] {
        let ctx = CurveContext::new(q).unwrap();
        let report = ctx.is_smooth(6).unwrap();
        assert!(report.smooth, "singular witness found at q={q}");
        assert_eq!(
            report.extensions_checked,
            vec![1, 2, 3, 4, 5, 6],
            "not all extensions searched at q={q}"
        );
    }
    pass(3, "smoothness witness search");
}

#[test]
fn criterion_04_l_polynomial_fit_and_predict() {
    let t0 = std::time::Instant::now();
    // q = 2 over F_4
    let ctx = CurveContext::new(2).unwrap();
    let counts = count_series(&ctx, 2, 1).unwrap();
    let lp = LPolynomial::from_counts(4, 1, &counts).unwrap();
    assert_eq!(lp.coeffs(), &[1, 4, 4]);
    assert_eq!(
        lp.predict_count(2).unwrap(),
        ctx.count_points(4).unwrap() as i128,
        "N_2 over F_16"
    );
    assert_eq!(
        lp.predict_count(3).unwrap(),
        ctx.count_points(6).unwrap() as i128,
        "N_3 over F_64"
    );
    // q = 3 over F_3: degree-6 fit from N_1..N_3 predicts N_4 over F_81
    let ctx3 = CurveContext::new(3).unwrap();
    let counts3 = count_series(&ctx3, 1, 3).unwrap();
    let lp3 = LPolynomial::from_counts(3, 3, &counts3).unwrap();
    assert_eq!(lp3.coeffs().len(), 7);
    assert_eq!(
        lp3.predict_count(4).unwrap(),
        ctx3.count_points(4).unwrap() as i128,
        "N_4 over F_81"
    );
    assert!(t0.elapsed().as_secs() < 60, "criterion 4 exceeded 60 s");
    pass(4, "L-polynomial fit and predict");
}

#[test]
fn criterion_05_p_rank() {
    for q in [2u64, 3, 4] {
        let ctx = CurveContext::new(q).unwrap();
        let lp = l_polynomial_over_base(&ctx).unwrap();
        assert_eq!(lp.p_rank(ctx.p()), 0, "p-rank at q={q}");
    }
    // q = 5: the route over powers of F_25 needs N_1..N_10 with fields up to
    // 25^10 > 2^27, beyond the scan cap, so that route is skipped; the
    // equivalent fit over F_5 (largest field 5^10 < 2^27) stands in.
    let ctx5 = CurveContext::new(5).unwrap();
    assert!(ctx5.extension_field(20).is_err(), "25^10 must exceed the cap");
    println!(
        "criterion 05: q=5 over powers of F_25 skipped (25^10 exceeds 2^27); \
         using the F_5 fit instead"
    );
    let lp5 = l_polynomial_over_base(&ctx5).unwrap();
    assert_eq!(lp5.p_rank(5), 0, "p-rank at q=5");
    pass(5, "p-rank zero");
}

#[test]
fn criterion_06_valuations() {
    for q in [2u64, 3, 5] {
        let ctx = CurveContext::new(q).unwrap();
        let base = ctx.base_field();
        let boundary = ctx.boundary_points();
        let places = places_up_to_degree(&ctx, 1, 2).unwrap();
        // pencil lines H_(c:d) indexed by the boundary points they cut out
        let lines: Vec<HomPoly> = boundary
            .iter()
            .map(|pt| HomPoly::line_through_pencil(base, pt.x(), pt.y()).unwrap())
            .collect();
        for i in 0..boundary.len() {
            for j in 0..boundary.len() {
                if i == j {
                    continue;
                }
                let f = FormRatio::new(&ctx, lines[i].clone(), lines[j].clone()).unwrap();
                let div = principal_divisor(&ctx, 1, &f, 2).unwrap();
                assert_eq!(div.degree(), 0);
                let pi = boundary_place(&ctx, 1, &boundary[i]).unwrap();
                let pj = boundary_place(&ctx, 1, &boundary[j]).unwrap();
                assert_eq!(div.weight(&pi), q as i64 + 1);
                assert_eq!(div.weight(&pj), -(q as i64 + 1));
                assert_eq!(div.len(), 2, "support beyond the two pencil points");
                // vanishing valuation at every other place of degree <= 2
                for place in &places {
                    if *place == pi || *place == pj {
                        continue;
                    }
                    assert_eq!(valuation(&ctx, place, &f).unwrap(), 0);
                }
            }
        }
        // uniformisers
        let z_form = HomPoly::monomial(base, (0, 0, 1));
        let x_form = HomPoly::monomial(base, (1, 0, 0));
        let y_form = HomPoly::monomial(base, (0, 1, 0));
        for pt in &boundary {
            let place = boundary_place(&ctx, 1, pt).unwrap();
            if !base.is_zero(pt.x()) {
                let f = FormRatio::new(&ctx, z_form.clone(), x_form.clone()).unwrap();
                assert_eq!(valuation(&ctx, &place, &f).unwrap(), 1, "Z/X at q={q}");
            }
            if !base.is_zero(pt.y()) {
                let f = FormRatio::new(&ctx, z_form.clone(), y_form.clone()).unwrap();
                assert_eq!(valuation(&ctx, &place, &f).unwrap(), 1, "Z/Y at q={q}");
            }
        }
    }
    pass(6, "boundary valuations and principal divisors");
}

#[test]
fn criterion_07_gamma_structure() {
    for q in 2..=64u64 {
        let Ok(ctx) = CurveContext::new(q) else {
            continue; // not a prime power
        };
        let s = gamma_source_group(q).unwrap();
        assert_eq!(s.free_rank, 1, "free rank at q={q}");
        assert_eq!(
            s.invariant_factors,
            vec![q as i128 + 1; q as usize],
            "invariant factors at q={q}"
        );
        assert!(
            gamma0_mod_p_trivial(q, ctx.p()).unwrap(),
            "degree-zero part mod p at q={q}"
        );
    }
    pass(7, "boundary class group source structure");
}

#[test]
fn criterion_08_oracle_cross_check() {
    let t0 = std::time::Instant::now();
    let ctx = CurveContext::new(2).unwrap();
    let oracle = class_group_oracle(&ctx, 2, 1, 4).unwrap();
    assert!(oracle.stabilized, "oracle must stabilize over F_4");
    assert_eq!(oracle.order, Some(9));
    assert_eq!(oracle.structure.free_rank, 0);
    assert_eq!(oracle.structure.invariant_factors, vec![3, 3]);
    let lp4 = LPolynomial::from_counts(4, 1, &count_series(&ctx, 2, 1).unwrap()).unwrap();
    assert_eq!(oracle.order.unwrap(), lp4.jacobian_order().unwrap());
    assert!(cl_y_p_torsion_oracle(&ctx, 2, 1, 4).unwrap());
    assert!(t0.elapsed().as_secs() < 120, "criterion 8 exceeded 120 s");
    pass(8, "class group oracle cross-check");
}

#[test]
fn oracle_cross_check_over_f16() {
    // companion to criterion 8: the same oracle over F_16, with the order
    // predicted by integer power sums along the base change from F_2
    let ctx = CurveContext::new(2).unwrap();
    let lp16 = l_polynomial_over_base(&ctx).unwrap().base_change(4).unwrap();
    let oracle16 = class_group_oracle(&ctx, 4, 1, 2).unwrap();
    assert!(oracle16.stabilized, "oracle must stabilize over F_16");
    assert_eq!(oracle16.order, Some(lp16.jacobian_order().unwrap()));
    assert!(cl_y_p_torsion_oracle(&ctx, 4, 1, 2).unwrap());
}

#[test]
fn criterion_09_certificate() {
    let mut q2_conclusion = None;
    for q in [2u64, 3, 4] {
        let cert = verify_picy_chain(q).unwrap();
        assert!(cert.conclusion, "certificate conclusion at q={q}");
        let assumed: Vec<usize> = cert
            .steps
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s.status, StepStatus::Assumed))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(assumed, vec![1], "exactly the pullback step is assumed");
        for (i, step) in cert.steps.iter().enumerate() {
            if i != 1 {
                assert!(
                    matches!(step.status, StepStatus::Computed | StepStatus::Verified),
                    "step {i} at q={q} has status {:?}",
                    step.status
                );
            }
        }
        if q == 2 {
            q2_conclusion = Some(cert.conclusion);
        }
    }
    // agreement with the independent oracle at q = 2
    let ctx = CurveContext::new(2).unwrap();
    let oracle_verdict = cl_y_p_torsion_oracle(&ctx, 2, 1, 4).unwrap();
    assert_eq!(q2_conclusion, Some(oracle_verdict));
    pass(9, "certificate chain");
}

#[test]
fn criterion_10_special_fibre_bridge() {
    for q in [2u64, 3] {
        let ctx = CurveContext::new(q).unwrap();
        for m in 1..=3u32 {
            let fld = ctx.extension_field(m).unwrap();
            let special = ctx.special_fibre_points(m).unwrap();
            let affine = ctx.affine_points(m).unwrap();
            assert_eq!(
                special.len(),
                affine.len(),
                "chart point count at q={q}, m={m}"
            );
            for pt in &special {
                let fwd = ctx.affiso_forward(&fld, pt).unwrap();
                assert_eq!(&ctx.affiso_backward(&fld, &fwd).unwrap(), pt);
            }
            for pt in &affine {
                let back = ctx.affiso_backward(&fld, pt).unwrap();
                assert_eq!(&ctx.affiso_forward(&fld, &back).unwrap(), pt);
            }
        }
    }
    pass(10, "special fibre chart bridge");
}

#[test]
fn criterion_11_property_suites() {
    // Frobenius additivity, exhaustive over fields of size <= 2^12
    for (p, k) in [(2u64, 12u32), (3, 7), (5, 5), (7, 4), (13, 3), (61, 2)] {
        let f = make_field(p, k).unwrap();
        let elems: Vec<_> = f.elements().collect();
        let frob: Vec<_> = elems.iter().map(|x| f.frobenius(x, 1)).collect();
        for (i, x) in elems.iter().enumerate() {
            for (j, y) in elems.iter().enumerate() {
                let s = f.add(x, y);
                let idx = f.index_of(&s) as usize;
                assert_eq!(
                    frob[idx],
                    f.add(&frob[i], &frob[j]),
                    "Frobenius additivity in F_{{{p}^{k}}}"
                );
            }
        }
    }

    // valuation additivity: 50 seeded random form pairs per q, checked at
    // every boundary point
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for q in [2u64, 3, 5] {
        let ctx = CurveContext::new(q).unwrap();
        let b = ctx.base_field().clone();
        let mut random_ratio = |rng: &mut rand_chacha::ChaCha8Rng| loop {
            let c: Vec<u64> = (0..6).map(|_| rng.gen_range(0..q)).collect();
            let num = HomPoly::from_terms(
                &b,
                vec![
                    ((1, 0, 0), b.scalar(c[0])),
                    ((0, 1, 0), b.scalar(c[1])),
                    ((0, 0, 1), b.scalar(c[2])),
                ],
            )
            .unwrap();
            let den = HomPoly::from_terms(
                &b,
                vec![
                    ((1, 0, 0), b.scalar(c[3])),
                    ((0, 1, 0), b.scalar(c[4])),
                    ((0, 0, 1), b.scalar(c[5])),
                ],
            )
            .unwrap();
            if num.is_zero() || den.is_zero() {
                continue;
            }
            return FormRatio::new(&ctx, num, den).unwrap();
        };
        for _ in 0..50 {
            let f = random_ratio(&mut rng);
            let g = random_ratio(&mut rng);
            let fg = f.mul(&ctx, &g).unwrap();
            for pt in ctx.boundary_points() {
                let place = boundary_place(&ctx, 1, &pt).unwrap();
                assert_eq!(
                    valuation(&ctx, &place, &fg).unwrap(),
                    valuation(&ctx, &place, &f).unwrap()
                        + valuation(&ctx, &place, &g).unwrap(),
                    "additivity at q={q}"
                );
            }
        }
    }

    // principal divisors have degree zero (pencil ratios and monomials)
    for q in [2u64, 3, 5] {
        let ctx = CurveContext::new(q).unwrap();
        let b = ctx.base_field();
        let pts = ctx.boundary_points();
        let x_form = HomPoly::monomial(b, (1, 0, 0));
        let y_form = HomPoly::monomial(b, (0, 1, 0));
        let candidates = vec![
            FormRatio::new(
                &ctx,
                HomPoly::line_through_pencil(b, pts[0].x(), pts[0].y()).unwrap(),
                HomPoly::line_through_pencil(b, pts[1].x(), pts[1].y()).unwrap(),
            )
            .unwrap(),
            FormRatio::new(&ctx, y_form.mul(&x_form), x_form.mul(&x_form)).unwrap(),
        ];
        for f in candidates {
            let bound = f.num().degree() as u32 * (q as u32 + 1);
            let div = principal_divisor(&ctx, 1, &f, bound).unwrap();
            assert_eq!(div.degree(), 0, "degree of a principal divisor, q={q}");
        }
    }

    // Smith normal form self-verifies on every call (exact U*M*V = D,
    // divisibility chain, unimodular transforms); exercise a batch
    let mut rng2 = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    for rows_n in [6usize, 8] {
        for _ in 0..10 {
            let rows: Vec<Vec<i128>> = (0..rows_n)
                .map(|_| (0..rows_n).map(|_| rng2.gen_range(-9i128..=9)).collect())
                .collect();
            smith_normal_form(&IntMatrix::from_rows(rows).unwrap()).unwrap();
        }
    }
    let _ = AbelianPresentation {
        generators: 3,
        relations: vec![vec![2, 0, 0]],
    };

    // Hasse-Weil on every computed count
    for q in [2u64, 3, 4, 5] {
        let ctx = CurveContext::new(q).unwrap();
        let g = ctx.genus();
        for m in 1..=8u32 {
            match ctx.count_points(m) {
                Ok(n) => {
                    let l = (q as i128).pow(m);
                    assert!(
                        hasse_weil_check(n as i128, g, l),
                        "Hasse-Weil bound at q={q}, m={m}"
                    );
                }
                Err(_) => break,
            }
        }
    }
    pass(11, "property suites");
}

use std::collections::BTreeMap;
use std::sync::Arc;

use dpq_core::hbar::HbarSymbol;
use dpq_core::linfty::{
    cotangent_algebroid, elw_quantize, fourier_quantize, AlgebroidFrameData, BerezinFourier, Fiber, StructureConstants,
};
use dpq_core::ring::{int, rat};
use dpq_core::{Error, GradedPoly, Monomial, Ring, TruncationBounds};
use dpq_testkit::fixtures::{self, p, x};
use dpq_testkit::gen::coefficient;
use dpq_testkit::oracle::ce_boundary_with_character;
use dpq_testkit::{rng, Sampler};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn capped(w: u32) -> TruncationBounds {
    TruncationBounds {
        weight_max: w,
        base_degree_max: 6,
        poly_degree_max: Some(6),
        hbar_max: 12,
    }
}

fn plane() -> Arc<Ring> {
    fixtures::ring(&[("x", 0), ("y", 0)], capped(6))
}

fn line() -> Arc<Ring> {
    fixtures::ring(&[("x", 0)], capped(6))
}

fn fibers(names: &[&str]) -> Vec<Fiber> {
    names.iter().map(|n| Fiber { name: n.to_string(), degree: 0 }).collect()
}

fn lie_algebras() -> Vec<StructureConstants> {
    let a = vec![vec![int(1), int(2)], vec![int(0), int(-1)]];
    vec![fixtures::lie2(), fixtures::sl2(), fixtures::semidirect(&a)]
}

fn all_instances() -> Vec<StructureConstants> {
    let mut v = lie_algebras();
    v.push(fixtures::rank2_algebroid());
    v.push(fixtures::tangent(&line()));
    v
}

/// Counts fiber coordinates minus fiber momenta.
fn fiber_degree(sc: &StructureConstants, m: &Monomial) -> i64 {
    let n = sc.base().dim();
    let r = sc.rank();
    let dim = sc.dual_ring().dim();
    (0..r).map(|i| m.0[n + i] as i64 - m.0[dim + n + i] as i64).sum()
}

#[test]
fn rank_two_ce_field() {
    let sc = fixtures::rank2_algebroid();
    let sh = sc.shifted_ring();
    let (e1, e2) = (x(sh, "eta_e1"), x(sh, "eta_e2"));
    let expected = &(&(&e1 * &p(sh, "x")) + &(&(&x(sh, "x") * &e2) * &p(sh, "x"))) - &(&(&e1 * &e2) * &p(sh, "eta_e1"));
    assert_eq!(sc.ce_vector_field().unwrap(), expected);
    assert!(sc.check_linfty().unwrap().passed);
}

#[test]
fn perturbed_algebroid_is_rejected() {
    let base = line();
    let mut sc = StructureConstants::new(&base, fibers(&["e1", "e2"])).unwrap();
    sc.set_anchor(&[0], p(&base, "x")).unwrap();
    sc.set_bracket(&[0, 1], 1, GradedPoly::one(&base)).unwrap();
    sc.set_bracket(&[0, 1], 0, x(&base, "x")).unwrap();
    let report = sc.check_linfty().unwrap();
    assert!(!report.passed);
    assert!(!report.residual.is_zero());
    assert!(matches!(sc.linear_poisson(), Err(Error::NotLInfinity { .. })));
    assert!(matches!(fourier_quantize(&sc), Err(Error::NotLInfinity { .. })));
    assert!(!sc.linear_poisson_unchecked().unwrap().mc_check().passed);
}

#[test]
fn linear_structure_examples() {
    let sc = fixtures::rank2_algebroid();
    let s = sc.linear_poisson().unwrap();
    let d = sc.dual_ring();
    let pi2 = &(&(&p(d, "e1") * &p(d, "x")) + &(&(&x(d, "x") * &p(d, "e2")) * &p(d, "x")))
        - &(&(&x(d, "e1") * &p(d, "e1")) * &p(d, "e2"));
    assert!(s.q().is_zero());
    assert_eq!(s.pis().len(), 1);
    assert_eq!(s.pi(2), pi2);

    let t = fixtures::tangent(&plane());
    let d = t.dual_ring();
    let expected = &(&p(d, "tx") * &p(d, "x")) + &(&p(d, "ty") * &p(d, "y"));
    assert_eq!(t.linear_poisson().unwrap().pi(2), expected);
}

#[test]
fn linear_components_have_fiber_degree_one_minus_weight() {
    for sc in all_instances() {
        let s = sc.linear_poisson().unwrap();
        let mut parts = s.pis().clone();
        parts.insert(1, s.q().clone());
        for (n, pi) in parts {
            for (m, _) in pi.terms() {
                assert_eq!(fiber_degree(&sc, m), 1 - n as i64);
            }
        }
    }
}

fn random_linear_poly(g: &mut ChaCha8Rng, base: &Arc<Ring>) -> GradedPoly {
    let mut out = GradedPoly::zero(base);
    for name in ["", "x", "y"] {
        if g.gen_bool(0.5) {
            let term = if name.is_empty() { GradedPoly::one(base) } else { x(base, name) };
            out += &term.scale(&coefficient(g));
        }
    }
    out
}

fn random_algebroid(g: &mut ChaCha8Rng) -> StructureConstants {
    let base = plane();
    let mut sc = StructureConstants::new(&base, fibers(&["e1", "e2"])).unwrap();
    for i in 0..2 {
        let mut rho = GradedPoly::zero(&base);
        for c in ["x", "y"] {
            if g.gen_bool(0.5) {
                rho += &(&random_linear_poly(g, &base) * &p(&base, c));
            }
        }
        if !rho.is_zero() {
            sc.set_anchor(&[i], rho).unwrap();
        }
    }
    for k in 0..2 {
        if g.gen_bool(0.6) {
            let c = if g.gen_bool(0.5) {
                GradedPoly::constant(&base, coefficient(g))
            } else {
                random_linear_poly(g, &base)
            };
            if !c.is_zero() {
                sc.set_bracket(&[0, 1], k, c).unwrap();
            }
        }
    }
    sc
}

#[test]
fn homological_field_squares_to_zero_iff_maurer_cartan() {
    let mut g = rng(200);
    let (mut good, mut bad) = (0, 0);
    let mut cases: Vec<StructureConstants> = (0..150).map(|_| random_algebroid(&mut g)).collect();
    cases.extend(all_instances());
    for sc in cases {
        let d2 = sc.check_linfty().unwrap().passed;
        let mc = sc.linear_poisson_unchecked().unwrap().mc_check().passed;
        assert_eq!(d2, mc);
        if d2 {
            good += 1;
        } else {
            bad += 1;
        }
    }
    assert!(good > 5 && bad > 5);
}

#[test]
fn fourier_quantizations_are_bv_infinity() {
    for sc in all_instances() {
        let fq = fourier_quantize(&sc).unwrap();
        assert!(fq.delta.is_bv_infinity().passed());
        assert!(fq.delta.is_self_adjoint());
        assert_eq!(fq.delta.extended_symbol(), HbarSymbol::embed(&fq.structure.total()));
    }
}

#[test]
fn lie_algebra_fourier_operator_is_ce_boundary_with_character() {
    for sc in lie_algebras() {
        let fq = fourier_quantize(&sc).unwrap();
        assert_eq!(fq.delta.coeffs().keys().copied().collect::<Vec<_>>(), vec![2]);
        let d2 = fq.delta.coeff(2);
        let ring = sc.dual_ring();
        let r = sc.rank();
        for subset in 0u32..(1 << r) {
            let mut f = GradedPoly::one(ring);
            for i in 0..r {
                if subset & (1 << i) != 0 {
                    f = &f * &GradedPoly::symbol(ring, i);
                }
            }
            assert_eq!(d2.apply(&f).unwrap(), -ce_boundary_with_character(&sc, &f));
        }
    }
}

#[test]
fn lie2_fourier_example() {
    let sc = fixtures::lie2();
    let d = sc.dual_ring();
    let d2 = fourier_quantize(&sc).unwrap().delta.coeff(2);
    let expected = -(&(&(&x(d, "xi2") * &p(d, "xi1")) * &p(d, "xi2")) + &p(d, "xi1").scale(&rat(1, 2)));
    assert_eq!(d2.normal_form(), &expected);
    let top = &x(d, "xi1") * &x(d, "xi2");
    assert_eq!(d2.apply(&top).unwrap(), x(d, "xi2").scale(&rat(1, 2)));
}

fn shifted_samples(sc: &StructureConstants, g: &mut ChaCha8Rng, count: usize) -> Vec<GradedPoly> {
    let s = Sampler::new(sc.shifted_ring(), 0, 4);
    (0..count)
        .map(|_| {
            let d = s.degree_for_weight(g, 0);
            s.function(g, d, 3)
        })
        .filter(|f| !f.is_zero())
        .collect()
}

fn single(l: &BTreeMap<i32, GradedPoly>) -> (i32, GradedPoly) {
    assert_eq!(l.len(), 1, "expected one power of hbar, got {l:?}");
    let (k, v) = l.iter().next().unwrap();
    (*k, v.clone())
}

#[test]
fn fourier_transform_intertwines_multiplication_and_derivation() {
    let mut g = rng(201);
    for sc in all_instances() {
        let fourier = BerezinFourier::new(&sc).unwrap();
        let (n, r) = (sc.base().dim(), sc.rank());
        let sh = sc.shifted_ring();
        let du = sc.dual_ring();
        for f in shifted_samples(&sc, &mut g, 30) {
            let image = fourier.transform(&f).unwrap();
            for i in 0..r {
                let eta = GradedPoly::symbol(sh, n + i);
                let mul = fourier.transform(&(&eta * &f)).unwrap();
                let mut expected: BTreeMap<i32, GradedPoly> = BTreeMap::new();
                for (k, v) in &image {
                    let d = v.partial(n + i);
                    if !d.is_zero() {
                        expected.insert(k + 1, d);
                    }
                }
                assert_eq!(mul, expected);

                let der = fourier.transform(&f.partial(n + i)).unwrap();
                let mut expected: BTreeMap<i32, GradedPoly> = BTreeMap::new();
                for (k, v) in &image {
                    let m = &GradedPoly::symbol(du, n + i) * v;
                    if !m.is_zero() {
                        expected.insert(k - 1, m);
                    }
                }
                assert_eq!(der, expected);
            }
        }
    }
}

#[test]
fn fourier_transform_round_trips() {
    let mut g = rng(202);
    for sc in all_instances() {
        let fourier = BerezinFourier::new(&sc).unwrap();
        for f in shifted_samples(&sc, &mut g, 30) {
            let mut back = GradedPoly::zero(sc.shifted_ring());
            for (k, v) in fourier.transform(&f).unwrap() {
                for (j, u) in fourier.inverse(&v).unwrap() {
                    assert_eq!(k + j, 0);
                    back += &u;
                }
            }
            assert_eq!(back, f);
        }
    }
}

#[test]
fn frame_isomorphism_is_rescaled_fourier_transform() {
    let mut g = rng(203);
    for sc in all_instances() {
        let fourier = BerezinFourier::new(&sc).unwrap();
        let (n, r) = (sc.base().dim(), sc.rank());
        for f in shifted_samples(&sc, &mut g, 30) {
            let image = fourier.frame_iso(&f).unwrap();
            assert_eq!(fourier.frame_iso_inverse(&image).unwrap(), f);
            let mut by_count: BTreeMap<usize, GradedPoly> = BTreeMap::new();
            for (m, c) in f.terms() {
                let k = (0..r).filter(|&i| m.0[n + i] == 1).count();
                *by_count.entry(k).or_insert_with(|| GradedPoly::zero(sc.shifted_ring())) +=
                    &GradedPoly::from_monomial(sc.shifted_ring(), m.clone(), c.clone());
            }
            let mut total = GradedPoly::zero(sc.dual_ring());
            for (k, part) in by_count {
                let (power, v) = single(&fourier.transform(&part).unwrap());
                assert_eq!(power, -((r - k) as i32));
                total += &v;
            }
            assert_eq!(image, total);
        }
    }
}

#[test]
fn derived_brackets_reproduce_structure_constants() {
    for sc in all_instances() {
        let fq = fourier_quantize(&sc).unwrap();
        let ring = sc.dual_ring();
        let (n, r) = (sc.base().dim(), sc.rank());
        let xi = |i: usize| GradedPoly::symbol(ring, n + i);
        for i in 0..r {
            for j in i + 1..r {
                let mut expected = GradedPoly::zero(ring);
                for k in 0..r {
                    expected += &(&sc.embed(&sc.bracket(&[i, j], k), ring).unwrap() * &xi(k));
                }
                assert_eq!(fq.delta.derived_bracket(&[xi(i), xi(j)]).unwrap(), expected);
            }
            for a in 0..n {
                let xa = GradedPoly::symbol(ring, a);
                let rho = sc.anchor(&[i]);
                let expected = sc.embed(&dpq_core::operator::vector_component(&rho, a), ring).unwrap();
                assert_eq!(fq.delta.derived_bracket(&[xi(i), xa]).unwrap(), expected);
            }
        }
    }
}

fn bivector(entries: &[((usize, usize), GradedPoly)]) -> BTreeMap<(usize, usize), GradedPoly> {
    entries.iter().cloned().collect()
}

#[test]
fn cotangent_algebroids_of_poisson_bivectors() {
    let base = plane();
    let cases = vec![
        bivector(&[]),
        bivector(&[((0, 1), GradedPoly::one(&base))]),
        bivector(&[((0, 1), x(&base, "x"))]),
    ];
    for pi in cases {
        let sc = cotangent_algebroid(&base, &pi).unwrap();
        assert!(sc.check_linfty().unwrap().passed);
        let fq = fourier_quantize(&sc).unwrap();
        if pi.is_empty() {
            assert!(fq.delta.is_zero());
        } else {
            assert!(fq.delta.is_bv_infinity().passed());
        }
        let entry = pi.get(&(0, 1)).cloned().unwrap_or_else(|| GradedPoly::zero(&base));
        assert_eq!(sc.anchor(&[0]), &entry * &p(&base, "y"));
        assert_eq!(sc.anchor(&[1]), -(&entry * &p(&base, "x")));
        assert_eq!(sc.fibers()[0].name, "dx");
    }
}

#[test]
fn cotangent_algebroid_rejects_non_poisson_bivector() {
    let base = fixtures::ring(&[("x", 0), ("y", 0), ("z", 0)], capped(6));
    let pi = bivector(&[((0, 1), x(&base, "z")), ((1, 2), x(&base, "y"))]);
    assert!(matches!(cotangent_algebroid(&base, &pi), Err(Error::InvalidStructure(_))));
}

fn exact_section(base: &Arc<Ring>, f: &GradedPoly) -> Vec<GradedPoly> {
    (0..base.dim()).map(|a| f.partial(a)).collect()
}

#[test]
fn elw_on_tangent_algebroids() {
    let mut g = rng(204);
    for base in [line(), plane()] {
        let sc = fixtures::tangent(&base);
        let frames = AlgebroidFrameData::canonical(&sc);
        let s = Sampler::new(&base, 0, 3);
        for _ in 0..8 {
            let f = s.function(&mut g, 0, 4);
            let sec = exact_section(&base, &f);
            let elw = elw_quantize(&sc, &frames, &sec).unwrap();
            assert!(elw.square_vanishes);
            assert!(elw.commutes);
            assert!(elw.delta.is_bv_infinity().passed());
            assert!(elw.delta.is_self_adjoint());
            let lp = sc.linear_poisson().unwrap();
            let total = &elw.contraction.normal_form().clone() + &lp.total();
            assert_eq!(elw.delta.extended_symbol(), HbarSymbol::embed(&total));
        }
    }
}

#[test]
fn elw_without_section_is_fourier() {
    for sc in [fixtures::tangent(&line()), fixtures::tangent(&plane()), fixtures::rank2_algebroid()] {
        let zero = vec![GradedPoly::zero(sc.base()); sc.rank()];
        let elw = elw_quantize(&sc, &AlgebroidFrameData::canonical(&sc), &zero).unwrap();
        assert_eq!(elw.delta, fourier_quantize(&sc).unwrap().delta);
    }
}

#[test]
fn elw_rejects_non_closed_sections() {
    let base = plane();
    let sc = fixtures::tangent(&base);
    let sec = vec![GradedPoly::zero(&base), x(&base, "x")];
    assert!(matches!(
        elw_quantize(&sc, &AlgebroidFrameData::canonical(&sc), &sec),
        Err(Error::CocycleViolation { .. })
    ));
}

#[test]
fn elw_rejects_inconsistent_frame_data() {
    let sc = fixtures::rank2_algebroid();
    let mut frames = AlgebroidFrameData::canonical(&sc);
    frames.top_a_action[0] = GradedPoly::one(sc.base());
    let zero = vec![GradedPoly::zero(sc.base()); 2];
    assert!(matches!(elw_quantize(&sc, &frames, &zero), Err(Error::InvalidStructure(_))));
}

#[test]
fn elw_on_rank_two_algebroid() {
    let (sc, ps) = fixtures::rank2_with_cocycle();
    let base = sc.base().clone();
    let sec = vec![GradedPoly::one(&base), x(&base, "x")];
    let elw = elw_quantize(&sc, &AlgebroidFrameData::canonical(&sc), &sec).unwrap();
    assert!(elw.square_vanishes && elw.commutes);
    assert_eq!(elw.delta.extended_symbol(), HbarSymbol::embed(&ps.total()));
}

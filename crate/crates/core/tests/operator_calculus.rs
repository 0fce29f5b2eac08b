use std::sync::Arc;

use dpq_core::hbar::HbarOp;
use dpq_core::linfty::fourier_quantize;
use dpq_core::ring::{int, koszul, rat};
use dpq_core::{poisson_bracket, Error, GradedPoly, HalfDensityOp, Ring};
use dpq_testkit::fixtures::{self, bounds, hovik_delta2, hovik_p, hovik_q, hovik_ring, p, ring, x};
use dpq_testkit::oracle::{berezin_integral, first_order_adjoint, vf_apply};
use dpq_testkit::{rng, Sampler};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn mixed() -> Arc<Ring> {
    ring(&[("u", 0), ("th", 1), ("xi", -1), ("y", 2)], bounds(10, 10))
}

fn odd_only() -> Arc<Ring> {
    ring(&[("a", 1), ("b", -1), ("c", 3)], bounds(6, 6))
}

fn op_deg(a: &HalfDensityOp) -> i32 {
    a.homogeneous_degree().unwrap()
}

fn random_op(s: &Sampler, g: &mut ChaCha8Rng, max_order: u32) -> (HalfDensityOp, u32) {
    loop {
        let n = g.gen_range(0..=max_order);
        let a = s.any_operator(g, n, 4);
        if a.order() == Some(n) {
            return (a, n);
        }
    }
}

#[test]
fn symbol_of_commutator_is_bracket_of_symbols() {
    let r = mixed();
    let s = Sampler::new(&r, 2, 2);
    let mut g = rng(40);
    for _ in 0..100 {
        let (a, n) = random_op(&s, &mut g, 2);
        let (b, m) = random_op(&s, &mut g, 2);
        if n + m == 0 {
            continue;
        }
        let c = a.commutator(&b).unwrap();
        let lhs = c.principal_symbol(n + m - 1).unwrap();
        let rhs = poisson_bracket(&a.principal_symbol(n).unwrap(), &b.principal_symbol(m).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn adjoint_is_an_involution() {
    let r = mixed();
    let s = Sampler::new(&r, 3, 2);
    let mut g = rng(41);
    for _ in 0..100 {
        let (a, _) = random_op(&s, &mut g, 3);
        assert_eq!(a.adjoint().unwrap().adjoint().unwrap(), a);
    }
}

#[test]
fn adjoint_reverses_composition() {
    let r = mixed();
    let s = Sampler::new(&r, 2, 2);
    let mut g = rng(42);
    for _ in 0..100 {
        let (a, _) = random_op(&s, &mut g, 2);
        let (b, _) = random_op(&s, &mut g, 2);
        let lhs = a.compose(&b).adjoint().unwrap();
        let rhs = b.adjoint().unwrap().compose(&a.adjoint().unwrap()).scale(&koszul(op_deg(&a), op_deg(&b)));
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn symbol_of_adjoint() {
    let r = mixed();
    let s = Sampler::new(&r, 3, 2);
    let mut g = rng(43);
    for _ in 0..100 {
        let (a, n) = random_op(&s, &mut g, 3);
        let sign = if n % 2 == 0 { int(1) } else { int(-1) };
        assert_eq!(a.adjoint().unwrap().principal_symbol(n).unwrap(), a.principal_symbol(n).unwrap().scale(&sign));
    }
}

#[test]
fn self_adjoint_operators_have_even_order() {
    let r = mixed();
    let s = Sampler::new(&r, 3, 2);
    let mut g = rng(44);
    for _ in 0..100 {
        let (a, n) = random_op(&s, &mut g, 3);
        let adj = a.adjoint().unwrap();
        let self_adj = a.add(&adj);
        let anti = a.sub(&adj);
        let (bad, good) = if n % 2 == 1 { (self_adj, anti) } else { (anti, self_adj) };
        assert!(bad.order().map_or(true, |o| o < n));
        assert_eq!(good.order(), Some(n));
    }
}

/// Operators whose principal symbols live in disjoint variables.
fn split_pair(g: &mut ChaCha8Rng, big: &Arc<Ring>) -> ((HalfDensityOp, u32), (HalfDensityOp, u32)) {
    let left = ring(&[("u", 0), ("th", 1)], bounds(10, 10));
    let right = ring(&[("xi", -1), ("y", 2)], bounds(10, 10));
    let (sl, sr, sb) = (Sampler::new(&left, 2, 2), Sampler::new(&right, 2, 2), Sampler::new(big, 2, 2));
    let make = |g: &mut ChaCha8Rng, part: &Sampler, map: &[usize]| loop {
        let n = g.gen_range(1..=2u32);
        let d = part.degree_for_weight(g, n);
        let top = part.poly(g, d, n..=n, 2).relabel(big, map).unwrap();
        if top.is_zero() {
            continue;
        }
        let lower = if n >= 2 { sb.poly(g, d, 0..=n - 2, 3) } else { GradedPoly::zero(big) };
        let a = HalfDensityOp::from_normal_form(&top + &lower);
        let adj = a.adjoint().unwrap();
        let adj = if n % 2 == 0 { adj } else { adj.neg() };
        return (a.add(&adj).scale(&rat(1, 2)), n);
    };
    let a = make(g, &sl, &[0, 1, 4, 5]);
    let b = make(g, &sr, &[2, 3, 6, 7]);
    (a, b)
}

#[test]
fn order_drops_by_two() {
    let r = mixed();
    let mut g = rng(45);
    let mut premise = 0;
    let mut nonzero_lower = 0;
    while premise < 100 {
        let ((a, n), (b, m)) = split_pair(&mut g, &r);
        let c = a.commutator(&b).unwrap();
        if let Some(o) = c.order() {
            if o < n + m - 1 {
                assert!(o + 3 <= n + m, "order {o} for n={n}, m={m}");
                nonzero_lower += 1;
            }
        }
        premise += 1;
    }
    assert!(nonzero_lower > 0);
}

#[test]
fn apply_respects_composition() {
    let r = mixed();
    let s = Sampler::new(&r, 2, 2);
    let mut g = rng(46);
    for _ in 0..100 {
        let (a, _) = random_op(&s, &mut g, 2);
        let (b, _) = random_op(&s, &mut g, 2);
        for _ in 0..3 {
            let f = s.any_function(&mut g, 1);
            assert_eq!(a.compose(&b).apply(&f).unwrap(), a.apply(&b.apply(&f).unwrap()).unwrap());
        }
    }
}

#[test]
fn first_order_adjoint_formula() {
    let r = mixed();
    let s = Sampler::new(&r, 1, 3);
    let mut g = rng(47);
    for _ in 0..100 {
        let d = s.degree_for_weight(&mut g, 1);
        let v = s.poly(&mut g, d, 1..=1, 3);
        let f = s.function(&mut g, d, 2);
        let op = HalfDensityOp::from_normal_form(&v + &f);
        assert_eq!(op.adjoint().unwrap(), first_order_adjoint(&v, &f));
    }
}

#[test]
fn adjoint_matches_berezin_pairing() {
    let r = odd_only();
    let s = Sampler::new(&r, 3, 3);
    let mut g = rng(48);
    for _ in 0..100 {
        let (a, _) = random_op(&s, &mut g, 3);
        let adj = a.adjoint().unwrap();
        for _ in 0..4 {
            let u = s.any_function(&mut g, 1);
            let v = s.any_function(&mut g, 1);
            if u.is_zero() {
                continue;
            }
            let sign = koszul(op_deg(&a), u.homogeneous_degree().unwrap());
            let lhs = berezin_integral(&(&a.apply(&u).unwrap() * &v));
            let rhs = berezin_integral(&(&u * &adj.apply(&v).unwrap())) * sign;
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn lie_derivatives_are_anti_self_adjoint() {
    let r = mixed();
    let s = Sampler::new(&r, 1, 3);
    let mut g = rng(49);
    for _ in 0..100 {
        let d = s.degree_for_weight(&mut g, 1);
        let v = s.poly(&mut g, d, 1..=1, 3);
        let l = HalfDensityOp::lie_derivative(&v).unwrap();
        assert_eq!(l.adjoint().unwrap(), l.neg());
        assert_eq!(l.principal_symbol(1).unwrap(), v);
    }
}

#[test]
fn hovik_operator_identities() {
    let r = hovik_ring(bounds(4, 4));
    let lp = HalfDensityOp::lie_derivative(&hovik_p(&r)).unwrap();
    let lq = HalfDensityOp::lie_derivative(&hovik_q(&r)).unwrap();
    assert_eq!(lq.normal_form(), &p(&r, "tau"));
    assert_eq!(lp.normal_form(), &hovik_p(&r));
    let d2 = lp.compose(&lq).add(&lq.compose(&lp)).scale(&rat(1, 2));
    assert_eq!(d2, hovik_delta2(&r));
    assert_eq!(d2.compose(&d2).normal_form(), &p(&r, "z").scale(&rat(1, 4)));
    assert_eq!(d2.commutator(&d2).unwrap(), d2.compose(&d2).scale(&int(2)));
    assert_eq!(d2.order(), Some(2));
    assert_eq!(d2.principal_symbol(2).unwrap(), &hovik_p(&r) * &hovik_q(&r));
    assert!(d2.commutator(&d2).unwrap().principal_symbol(3).unwrap().is_zero());
    let quarter = d2.compose(&d2);
    assert_eq!(quarter.order(), Some(1));
    assert_eq!(quarter.principal_symbol(1).unwrap(), p(&r, "z").scale(&rat(1, 4)));
    assert_eq!(HalfDensityOp::zero(&r).order(), None);
    assert!(matches!(d2.principal_symbol(1), Err(Error::OrderExceeded { .. })));
    // [d_tau, P] = d_xi + xi d_z, not zero.
    let c = lq.commutator(&lp).unwrap();
    assert_eq!(c.normal_form(), &(&p(&r, "xi") + &(&x(&r, "xi") * &p(&r, "z"))));
}

#[test]
fn small_composition_examples() {
    let r = hovik_ring(bounds(4, 4));
    let dxi = HalfDensityOp::derivative(&r, r.coord_index("xi").unwrap());
    let dtau = HalfDensityOp::derivative(&r, r.coord_index("tau").unwrap());
    assert!(dxi.compose(&dxi).is_zero());
    let (f, gg) = (x(&r, "z"), &x(&r, "xi") * &x(&r, "tau"));
    let (fo, go) = (HalfDensityOp::multiplication(&f).unwrap(), HalfDensityOp::multiplication(&gg).unwrap());
    assert_eq!(fo.compose(&go).normal_form(), &(&f * &gg));
    assert!(fo.commutator(&go).unwrap().is_zero());
    let tdxi = HalfDensityOp::from_normal_form(&x(&r, "tau") * &p(&r, "xi"));
    assert_eq!(dtau.commutator(&tdxi).unwrap(), dxi);
    assert_eq!(dtau.apply(&x(&r, "tau")).unwrap(), GradedPoly::one(&r));
    assert_eq!(hovik_delta2(&r).apply(&gg).unwrap(), x(&r, "tau").scale(&rat(-1, 2)));
    assert_eq!(fo.apply(&gg).unwrap(), &f * &gg);
    assert_eq!(fo.adjoint().unwrap(), fo);
    let inhomogeneous = fo.add(&dxi);
    assert!(matches!(inhomogeneous.adjoint(), Err(Error::Inhomogeneous { .. })));
}

#[test]
fn volume_conjugation() {
    let r = ring(&[("u", 0), ("xi", -1), ("y", 2)], bounds(6, 6));
    let s = Sampler::new(&r, 1, 2);
    let mut g = rng(50);
    let one = GradedPoly::one(&r);
    for _ in 0..20 {
        let d = s.degree_for_weight(&mut g, 1);
        let v = s.poly(&mut g, d, 1..=1, 3);
        let l = HalfDensityOp::lie_derivative(&v).unwrap();
        assert_eq!(l.conjugate_by_volume(&one).unwrap(), l);
        let f = s.any_function(&mut g, 2);
        let mut div = GradedPoly::zero(&r);
        for a in 0..r.dim() {
            let comp = dpq_core::operator::vector_component(&v, a);
            div += &comp.partial(a).scale(&koszul(r.coords()[a].degree, d + 1));
        }
        let expected = &vf_apply(&v, &f) + &(&div * &f).scale(&rat(1, 2));
        assert_eq!(l.conjugate_by_volume(&one).unwrap().apply(&f).unwrap(), expected);
    }
    assert!(HalfDensityOp::identity(&r).conjugate_by_volume(&x(&r, "xi")).is_err());
}

#[test]
fn bv_identity_for_conjugated_operator() {
    let sc = fixtures::rank2_algebroid();
    let fq = fourier_quantize(&sc).unwrap();
    let d2 = fq.delta.coeff(2);
    let r = sc.dual_ring().clone();
    let u = x(&r, "x");
    let one = GradedPoly::one(&r);
    let sqrt_rho = &one + &u;
    let rho = &sqrt_rho * &sqrt_rho;
    assert!(d2.apply(&sqrt_rho).unwrap().is_zero());
    let conj = d2.conjugate_by_volume(&rho).unwrap();
    assert!(conj.apply(&one).unwrap().is_zero());
    let delta = HbarOp::term(2, d2.clone()).unwrap();
    let s = Sampler::new(&r, 0, 2);
    let mut g = rng(51);
    for _ in 0..50 {
        let f = s.any_function(&mut g, 2);
        let h = s.any_function(&mut g, 2);
        if f.is_zero() || h.is_zero() {
            continue;
        }
        let sign = koszul(1, f.homogeneous_degree().unwrap());
        let rhs = &(&conj.apply(&(&f * &h)).unwrap() - &(&conj.apply(&f).unwrap() * &h))
            - &(&f * &conj.apply(&h).unwrap()).scale(&sign);
        assert_eq!(delta.derived_bracket(&[f, h]).unwrap(), rhs);
    }
}

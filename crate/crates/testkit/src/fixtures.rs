use std::collections::BTreeMap;
use std::sync::Arc;

use dpq_core::linfty::{Fiber, StructureConstants};
use dpq_core::ring::{int, rat};
use dpq_core::{Coordinate, GradedPoly, HalfDensityOp, PoissonStructure, Rational, Ring, TruncationBounds};

pub fn bounds(weight_max: u32, base_degree_max: u32) -> TruncationBounds {
    TruncationBounds {
        weight_max,
        base_degree_max,
        poly_degree_max: None,
        hbar_max: 12,
    }
}

pub fn ring(coords: &[(&str, i32)], b: TruncationBounds) -> Arc<Ring> {
    Ring::new(coords.iter().map(|(n, d)| Coordinate::new(*n, *d)).collect(), b).unwrap()
}

pub fn x(r: &Arc<Ring>, name: &str) -> GradedPoly {
    GradedPoly::coord(r, name).unwrap()
}

pub fn p(r: &Arc<Ring>, name: &str) -> GradedPoly {
    GradedPoly::momentum(r, name).unwrap()
}

pub fn c(r: &Arc<Ring>, v: Rational) -> GradedPoly {
    GradedPoly::constant(r, v)
}

/// Coordinates `xi:-1, tau:-1, z:-2`.
pub fn hovik_ring(b: TruncationBounds) -> Arc<Ring> {
    ring(&[("xi", -1), ("tau", -1), ("z", -2)], b)
}

/// `P = tau d_xi + tau xi d_z`.
pub fn hovik_p(r: &Arc<Ring>) -> GradedPoly {
    &(&x(r, "tau") * &p(r, "xi")) + &(&(&x(r, "tau") * &x(r, "xi")) * &p(r, "z"))
}

/// `Q = d_tau`.
pub fn hovik_q(r: &Arc<Ring>) -> GradedPoly {
    p(r, "tau")
}

pub fn hovik(b: TruncationBounds) -> (Arc<Ring>, PoissonStructure) {
    let r = hovik_ring(b);
    let pi2 = &hovik_p(&r) * &hovik_q(&r);
    let s = PoissonStructure::new(&r, GradedPoly::zero(&r), BTreeMap::from([(2, pi2)])).unwrap();
    (r, s)
}

/// `tau d_xi d_tau + tau xi d_z d_tau + 1/2 xi d_z + 1/2 d_xi` as a normal form.
pub fn hovik_delta2(r: &Arc<Ring>) -> HalfDensityOp {
    let t = x(r, "tau");
    let xi = x(r, "xi");
    let nf = &(&(&(&t * &p(r, "xi")) * &p(r, "tau")) + &(&(&(&t * &xi) * &p(r, "z")) * &p(r, "tau")))
        + &(&(&xi * &p(r, "z")) + &p(r, "xi")).scale(&rat(1, 2));
    HalfDensityOp::from_normal_form(nf)
}

pub fn point(b: TruncationBounds) -> Arc<Ring> {
    Ring::new(vec![], b).unwrap()
}

/// `[e1, e2] = e2`.
pub fn lie2() -> StructureConstants {
    StructureConstants::lie_algebra(&point(bounds(6, 6)), &["xi1", "xi2"], &[((0, 1), 1, int(1))]).unwrap()
}

/// `[h, e] = 2e, [h, f] = -2f, [e, f] = h` in the basis `h, e, f`.
pub fn sl2() -> StructureConstants {
    StructureConstants::lie_algebra(
        &point(bounds(6, 6)),
        &["h", "e", "f"],
        &[((0, 1), 1, int(2)), ((0, 2), 2, int(-2)), ((1, 2), 0, int(1))],
    )
    .unwrap()
}

/// `[e0, e_i] = sum_j a[i][j] e_j` on `R x R^{n-1}`; Jacobi holds for any `a`.
pub fn semidirect(a: &[Vec<Rational>]) -> StructureConstants {
    let m = a.len();
    let names: Vec<String> = (0..=m).map(|i| format!("e{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut consts = Vec::new();
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if *v != int(0) {
                consts.push(((0, i + 1), j + 1, v.clone()));
            }
        }
    }
    StructureConstants::lie_algebra(&point(bounds(6, 6)), &refs, &consts).unwrap()
}

/// Over `R` with coordinate `x`: `rho(e1) = d_x`, `rho(e2) = x d_x`, `[e1, e2] = e1`.
pub fn rank2_algebroid() -> StructureConstants {
    let b = TruncationBounds {
        weight_max: 6,
        base_degree_max: 6,
        poly_degree_max: Some(6),
        hbar_max: 12,
    };
    let base = ring(&[("x", 0)], b);
    let mut sc = StructureConstants::new(
        &base,
        vec![Fiber { name: "e1".into(), degree: 0 }, Fiber { name: "e2".into(), degree: 0 }],
    )
    .unwrap();
    sc.set_anchor(&[0], p(&base, "x")).unwrap();
    sc.set_anchor(&[1], &x(&base, "x") * &p(&base, "x")).unwrap();
    sc.set_bracket(&[0, 1], 0, GradedPoly::one(&base)).unwrap();
    sc
}

/// Tangent algebroid of an ungraded base; fiber `t<coord>` anchors to `d_<coord>`.
pub fn tangent(base: &Arc<Ring>) -> StructureConstants {
    let fibers = base
        .coords()
        .iter()
        .map(|c| Fiber { name: format!("t{}", c.name), degree: 0 })
        .collect();
    let mut sc = StructureConstants::new(base, fibers).unwrap();
    for a in 0..base.dim() {
        sc.set_anchor(&[a], GradedPoly::symbol(base, base.momentum_index(a))).unwrap();
    }
    sc
}

/// `(A^v[-1], iota_s, Pi_2)` for a Lie algebroid `A` and section components `s_i`.
pub fn algebroid_with_cocycle(sc: &StructureConstants, s: &[GradedPoly]) -> PoissonStructure {
    let lp = sc.linear_poisson().unwrap();
    let dual = sc.dual_ring();
    let n = sc.base().dim();
    let mut q = GradedPoly::zero(dual);
    for (i, si) in s.iter().enumerate() {
        q += &(&sc.embed(si, dual).unwrap() * &GradedPoly::symbol(dual, dual.momentum_index(n + i)));
    }
    PoissonStructure::new(dual, q, lp.pis().clone()).unwrap()
}

/// The rank-2 algebroid with the closed section `s = (1, x)`.
pub fn rank2_with_cocycle() -> (StructureConstants, PoissonStructure) {
    let sc = rank2_algebroid();
    let base = sc.base().clone();
    let s = vec![GradedPoly::one(&base), x(&base, "x")];
    assert!(sc.ce_differential_of_section(&s).unwrap().is_empty());
    let ps = algebroid_with_cocycle(&sc, &s);
    (sc, ps)
}

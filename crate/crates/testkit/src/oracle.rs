//! Reference computations that avoid the library's bracket, adjoint and
//! Fourier code paths.

use dpq_core::linfty::StructureConstants;
use dpq_core::operator::vector_component;
use dpq_core::ring::{int, koszul, rat};
use dpq_core::{GradedPoly, HalfDensityOp, Monomial, Rational};
use num_traits::Zero;

fn degree(f: &GradedPoly) -> i32 {
    f.homogeneous_degree().expect("homogeneous")
}

/// `X(f) = sum_a X^a d_a f` for a weight-1 `X` and a function `f`.
pub fn vf_apply(x: &GradedPoly, f: &GradedPoly) -> GradedPoly {
    let mut out = GradedPoly::zero(f.ring());
    for a in 0..f.ring().dim() {
        out += &(&vector_component(x, a) * &f.partial(a));
    }
    out
}

/// Graded commutator of vector fields, computed componentwise.
pub fn vf_commutator(x: &GradedPoly, y: &GradedPoly) -> GradedPoly {
    let r = x.ring();
    let sign = koszul(degree(x), degree(y));
    let mut out = GradedPoly::zero(r);
    for b in 0..r.dim() {
        let comp = &vf_apply(x, &vector_component(y, b)) - &vf_apply(y, &vector_component(x, b)).scale(&sign);
        out += &(&comp * &GradedPoly::symbol(r, r.momentum_index(b)));
    }
    out
}

fn product_except(fs: &[GradedPoly], skip: usize) -> GradedPoly {
    let mut out = GradedPoly::one(fs[0].ring());
    for (i, f) in fs.iter().enumerate() {
        if i != skip {
            out = &out * f;
        }
    }
    out
}

/// Bracket of decomposables `X_1...X_n` and `Y_1...Y_m` of weight-1 factors:
/// `sum_{k,l} delta_k eps_l X^{k} [X_k, Y_l] Y^{l}` with
/// `delta_k = (-1)^{|X_k|(|X_{k+1}|+...+|X_n|)}` and
/// `eps_l = (-1)^{|Y_l|(|Y_1|+...+|Y_{l-1}|)}`.
pub fn decomposable_bracket(xs: &[GradedPoly], ys: &[GradedPoly]) -> GradedPoly {
    let r = xs[0].ring();
    let mut out = GradedPoly::zero(r);
    for k in 0..xs.len() {
        let after: i32 = xs[k + 1..].iter().map(degree).sum();
        let delta = koszul(degree(&xs[k]), after);
        for l in 0..ys.len() {
            let before: i32 = ys[..l].iter().map(degree).sum();
            let eps = koszul(degree(&ys[l]), before);
            let term = &(&product_except(xs, k) * &vf_commutator(&xs[k], &ys[l])) * &product_except(ys, l);
            out += &term.scale(&(&delta * &eps));
        }
    }
    out
}

/// Coefficient of the product of all base symbols in declaration order.
/// Only meaningful when every coordinate is odd.
pub fn berezin_integral(f: &GradedPoly) -> Rational {
    let r = f.ring();
    let n = r.dim();
    let mut top = vec![0u32; 2 * n];
    for e in top.iter_mut().take(n) {
        *e = 1;
    }
    f.coefficient(&Monomial(top))
}

/// `Delta^+` of `Delta = X^a d_a + X_0` by the closed first-order formula
/// `-X^a d_a - (-1)^{|a|(|X|+1)} d_a X^a + X_0`.
pub fn first_order_adjoint(x: &GradedPoly, x0: &GradedPoly) -> HalfDensityOp {
    let r = x.ring();
    let dx = degree(x);
    let mut div = GradedPoly::zero(r);
    for a in 0..r.dim() {
        let da = r.coords()[a].degree;
        div += &vector_component(x, a).partial(a).scale(&koszul(da, dx + 1));
    }
    HalfDensityOp::from_normal_form(&(&x.scale(&int(-1)) - &div) + x0)
}

/// Chevalley-Eilenberg boundary plus half the contraction with the modular
/// character, on a wedge polynomial in the generators `xi_i` of a Lie algebra.
///
/// The boundary is `d(x_1...x_k) = sum_{a<b} (-1)^{a+b} [x_a, x_b] x_1..^a..^b..x_k`
/// and the character is `theta_i = tr ad_{e_i} = sum_k C^k_ik`.
pub fn ce_boundary_with_character(sc: &StructureConstants, f: &GradedPoly) -> GradedPoly {
    let ring = sc.dual_ring();
    let r = sc.rank();
    let gen = |i: usize| GradedPoly::symbol(ring, i);
    let bracket = |i: usize, j: usize| -> GradedPoly {
        let (lo, hi, s) = if i < j { (i, j, 1) } else { (j, i, -1) };
        let mut out = GradedPoly::zero(ring);
        for k in 0..r {
            let c = sc.bracket(&[lo, hi], k).constant_term();
            if !c.is_zero() {
                out += &gen(k).scale(&(c * int(s)));
            }
        }
        out
    };
    let theta: Vec<Rational> = (0..r)
        .map(|i| {
            (0..r)
                .filter(|&k| k != i)
                .map(|k| {
                    let (lo, hi, s) = if i < k { (i, k, 1) } else { (k, i, -1) };
                    sc.bracket(&[lo, hi], k).constant_term() * int(s)
                })
                .fold(Rational::zero(), |a, b| a + b)
        })
        .collect();
    let mut out = GradedPoly::zero(ring);
    for (mono, coef) in f.terms() {
        let idx: Vec<usize> = (0..r).filter(|&i| mono.0[i] == 1).collect();
        let k = idx.len();
        for a in 0..k {
            for b in a + 1..k {
                let mut t = bracket(idx[a], idx[b]);
                for (c, &i) in idx.iter().enumerate() {
                    if c != a && c != b {
                        t = &t * &gen(i);
                    }
                }
                let sign = if (a + b) % 2 == 0 { int(1) } else { int(-1) };
                out += &t.scale(&(coef * sign));
            }
        }
        for a in 0..k {
            let mut t = GradedPoly::constant(ring, theta[idx[a]].clone());
            for (c, &i) in idx.iter().enumerate() {
                if c != a {
                    t = &t * &gen(i);
                }
            }
            let sign = if a % 2 == 0 { int(1) } else { int(-1) };
            out += &t.scale(&(coef * sign * rat(1, 2)));
        }
    }
    out
}

/// `Pi(df, dg)` for a weight-2 `Pi` on a ring whose coordinates are all even,
/// reading `c p_a p_b` as the symmetric tensor `c (d_a (x) d_b + d_b (x) d_a)`.
pub fn even_contraction(pi: &GradedPoly, f: &GradedPoly, g: &GradedPoly) -> GradedPoly {
    let r = pi.ring();
    let n = r.dim();
    assert!(r.coords().iter().all(|c| !c.is_odd()));
    let mut out = GradedPoly::zero(r);
    for (mono, c) in pi.terms() {
        let (base, mom) = mono.split(n);
        let coef = GradedPoly::from_monomial(r, base, c.clone());
        let idx: Vec<usize> = (0..n).flat_map(|a| std::iter::repeat(a).take(mom.0[n + a] as usize)).collect();
        assert_eq!(idx.len(), 2);
        let (a, b) = (idx[0], idx[1]);
        let t = &(&f.partial(a) * &g.partial(b)) + &(&f.partial(b) * &g.partial(a));
        out += &(&coef * &t);
    }
    out
}

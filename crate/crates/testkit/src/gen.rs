use std::collections::BTreeMap;
use std::sync::Arc;

use dpq_core::hbar::HbarOp;
use dpq_core::ring::rat;
use dpq_core::{GradedPoly, HalfDensityOp, Monomial, Rational, Ring};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonzero rational with small numerator and denominator.
pub fn coefficient(rng: &mut ChaCha8Rng) -> Rational {
    let mut n = 0;
    while n == 0 {
        n = rng.gen_range(-3..=3);
    }
    rat(n, rng.gen_range(1..=2))
}

/// Draws random polynomials from a fixed pool of small monomials.
///
/// Even symbols appear with exponent at most 2, odd ones at most 1; the pool
/// is limited by total weight and total base exponent.
pub struct Sampler {
    ring: Arc<Ring>,
    pool: BTreeMap<(i32, u32), Vec<Monomial>>,
}

impl Sampler {
    pub fn new(ring: &Arc<Ring>, max_weight: u32, max_base: u32) -> Self {
        let n = ring.dim();
        let mut pool: BTreeMap<(i32, u32), Vec<Monomial>> = BTreeMap::new();
        let mut exps = vec![0u32; 2 * n];
        loop {
            let weight: u32 = exps[n..].iter().sum();
            let base: u32 = exps[..n].iter().sum();
            if weight <= max_weight && base <= max_base {
                let m = Monomial(exps.clone());
                if ring.within_bounds(&m) {
                    let key = (ring.monomial_degree(&m), weight);
                    pool.entry(key).or_default().push(m);
                }
            }
            let mut i = 0;
            loop {
                if i == exps.len() {
                    return Sampler { ring: ring.clone(), pool };
                }
                let cap = if ring.symbol_odd(i) { 1 } else { 2 };
                if exps[i] < cap {
                    exps[i] += 1;
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    /// Degrees for which some monomial of the given weight exists.
    pub fn degrees_with_weight(&self, weight: u32) -> Vec<i32> {
        let mut d: Vec<i32> = self.pool.keys().filter(|k| k.1 == weight).map(|k| k.0).collect();
        d.dedup();
        d
    }

    pub fn degrees(&self) -> Vec<i32> {
        let mut d: Vec<i32> = self.pool.keys().map(|k| k.0).collect();
        d.sort();
        d.dedup();
        d
    }

    fn candidates(&self, degree: i32, weights: std::ops::RangeInclusive<u32>) -> Vec<&Monomial> {
        weights
            .filter_map(|w| self.pool.get(&(degree, w)))
            .flatten()
            .collect()
    }

    /// Homogeneous of `degree`, weights within `weights`, up to `terms` terms.
    pub fn poly(&self, rng: &mut ChaCha8Rng, degree: i32, weights: std::ops::RangeInclusive<u32>, terms: usize) -> GradedPoly {
        let cands = self.candidates(degree, weights);
        let picks: Vec<&&Monomial> = cands.choose_multiple(rng, terms.min(cands.len())).collect();
        GradedPoly::from_terms(&self.ring, picks.into_iter().map(|m| ((*m).clone(), coefficient(rng))))
    }

    /// Like `poly`, but with at least one term of the top weight when possible.
    pub fn poly_with_top(&self, rng: &mut ChaCha8Rng, degree: i32, top: u32, terms: usize) -> GradedPoly {
        let lower = if top == 0 { GradedPoly::zero(&self.ring) } else { self.poly(rng, degree, 0..=top - 1, terms.saturating_sub(1)) };
        &lower + &self.poly(rng, degree, top..=top, 1.max(terms / 2))
    }

    /// Random degree with at least one monomial of weight `weight`.
    pub fn degree_for_weight(&self, rng: &mut ChaCha8Rng, weight: u32) -> i32 {
        *self.degrees_with_weight(weight).choose(rng).expect("weight present in pool")
    }

    pub fn function(&self, rng: &mut ChaCha8Rng, degree: i32, terms: usize) -> GradedPoly {
        self.poly(rng, degree, 0..=0, terms)
    }

    pub fn any_function(&self, rng: &mut ChaCha8Rng, terms: usize) -> GradedPoly {
        let d = self.degree_for_weight(rng, 0);
        self.function(rng, d, terms)
    }

    /// Random homogeneous operator of exact order `order` (if the pool allows).
    pub fn operator(&self, rng: &mut ChaCha8Rng, degree: i32, order: u32, terms: usize) -> HalfDensityOp {
        HalfDensityOp::from_normal_form(self.poly_with_top(rng, degree, order, terms))
    }

    /// Random homogeneous operator of random degree and exact order `order`.
    pub fn any_operator(&self, rng: &mut ChaCha8Rng, order: u32, terms: usize) -> HalfDensityOp {
        let d = self.degree_for_weight(rng, order);
        self.operator(rng, d, order, terms)
    }

    /// `sum_n hbar^n D_n` homogeneous of `degree` with `order(D_n) <= n - t`.
    pub fn hbar_op(&self, rng: &mut ChaCha8Rng, degree: i32, t: u32, max_n: u32, terms: usize) -> HbarOp {
        let mut coeffs = BTreeMap::new();
        for n in t..=max_n {
            if rng.gen_bool(0.3) {
                continue;
            }
            let top = n - t;
            let p = self.poly(rng, degree, 0..=top, terms);
            if !p.is_zero() {
                coeffs.insert(n, HalfDensityOp::from_normal_form(p));
            }
        }
        HbarOp::new(&self.ring, coeffs).expect("orders within bounds")
    }

    /// Homogeneous self-adjoint element `sum_n hbar^n D_n` with `t_index >= t`,
    /// built by symmetrizing `D_n` with `(-1)^n D_n^+`.
    pub fn self_adjoint_hbar_op(&self, rng: &mut ChaCha8Rng, degree: i32, t: u32, max_n: u32, terms: usize) -> HbarOp {
        let raw = self.hbar_op(rng, degree, t, max_n, terms);
        symmetrize(&raw)
    }
}

/// `sum_n hbar^n (D_n + (-1)^n D_n^+) / 2`.
pub fn symmetrize(op: &HbarOp) -> HbarOp {
    let mut coeffs = BTreeMap::new();
    for (&n, d) in op.coeffs() {
        let adj = d.adjoint().expect("homogeneous");
        let adj = if n % 2 == 0 { adj } else { adj.neg() };
        coeffs.insert(n, d.add(&adj).scale(&rat(1, 2)));
    }
    HbarOp::new(op.ring(), coeffs).expect("orders preserved")
}

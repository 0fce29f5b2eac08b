//! Differential operators on half-densities in a fixed flat chart.
//!
//! An operator is stored as a [`GradedPoly`] read in normal order: a stored
//! monomial `c x^a p^b` is the operator `c x^a o d^b`, coefficients on the left
//! and the derivative word in canonical symbol order.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::polyvector::PolyVector;
use crate::ring::{koszul, parity_sign, rat, GradedPoly, Monomial, Ring};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfDensityOp(GradedPoly);

impl HalfDensityOp {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        HalfDensityOp(GradedPoly::zero(ring))
    }

    pub fn identity(ring: &Arc<Ring>) -> Self {
        HalfDensityOp(GradedPoly::one(ring))
    }

    /// Multiplication by a function.
    pub fn multiplication(f: &GradedPoly) -> Result<Self> {
        if !f.is_function() {
            return Err(Error::Precondition("multiplication operator needs a function".into()));
        }
        Ok(HalfDensityOp(f.clone()))
    }

    /// The operator whose normal-ordered symbol is `p`.
    pub fn from_normal_form(p: GradedPoly) -> Self {
        HalfDensityOp(p)
    }

    /// `d/dx^a`.
    pub fn derivative(ring: &Arc<Ring>, a: usize) -> Self {
        HalfDensityOp(GradedPoly::symbol(ring, ring.momentum_index(a)))
    }

    pub fn normal_form(&self) -> &GradedPoly {
        &self.0
    }

    pub fn ring(&self) -> &Arc<Ring> {
        self.0.ring()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Differential order; `None` stands for the order of the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.0.max_weight()
    }

    pub fn homogeneous_degree(&self) -> Option<i32> {
        self.0.homogeneous_degree()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        HalfDensityOp(self.0.scale(c))
    }

    pub fn add(&self, other: &Self) -> Self {
        HalfDensityOp(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        HalfDensityOp(&self.0 - &other.0)
    }

    pub fn neg(&self) -> Self {
        HalfDensityOp(-&self.0)
    }

    /// `d_a o B = d_a(B) + p_a B` on normal forms.
    fn derivative_then(b: &GradedPoly, a: usize) -> GradedPoly {
        let ring = b.ring();
        let mut out = b.partial(a);
        out += &(&GradedPoly::symbol(ring, ring.momentum_index(a)) * b);
        out
    }

    /// Composition `self o other`.
    pub fn checked_compose(&self, other: &Self) -> Result<Self> {
        let ring = self.ring().clone();
        if !ring.same(other.ring()) {
            return Err(Error::RingMismatch);
        }
        let n = ring.dim();
        let mut words: BTreeMap<Monomial, GradedPoly> = BTreeMap::new();
        for (m, c) in self.0.terms() {
            let (base, word) = m.split(n);
            words
                .entry(word)
                .or_insert_with(|| GradedPoly::zero(&ring))
                .add_term(base, c.clone());
        }
        let mut out = GradedPoly::zero(&ring);
        for (word, coeff) in words {
            let mut cur = other.0.clone();
            for a in (0..n).rev() {
                for _ in 0..word.0[n + a] {
                    cur = Self::derivative_then(&cur, a);
                    if cur.is_zero() {
                        break;
                    }
                }
            }
            if !cur.is_zero() {
                out += &(&coeff * &cur);
            }
        }
        Ok(HalfDensityOp(out))
    }

    pub fn compose(&self, other: &Self) -> Self {
        self.checked_compose(other).expect("ring mismatch in composition")
    }

    /// Graded commutator `[A,B] = AB - (-1)^{|A||B|} BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let da = self
            .homogeneous_degree()
            .ok_or_else(|| Error::Inhomogeneous { what: "commutator operand".into() })?;
        let db = other
            .homogeneous_degree()
            .ok_or_else(|| Error::Inhomogeneous { what: "commutator operand".into() })?;
        let ab = self.checked_compose(other)?;
        let ba = other.checked_compose(self)?;
        Ok(ab.sub(&ba.scale(&koszul(da, db))))
    }

    /// Action on a function.
    pub fn apply(&self, f: &GradedPoly) -> Result<GradedPoly> {
        let ring = self.ring().clone();
        if !ring.same(f.ring()) {
            return Err(Error::RingMismatch);
        }
        if !f.is_function() {
            return Err(Error::Precondition("operators act on functions".into()));
        }
        let n = ring.dim();
        let mut out = GradedPoly::zero(&ring);
        for (m, c) in self.0.terms() {
            let (base, word) = m.split(n);
            let mut cur = f.clone();
            for a in (0..n).rev() {
                for _ in 0..word.0[n + a] {
                    cur = cur.partial(a);
                }
            }
            if !cur.is_zero() {
                out += &(&GradedPoly::from_monomial(&ring, base, c.clone()) * &cur);
            }
        }
        Ok(out)
    }

    /// Principal symbol of order `n`: the weight-`n` part read as a polyvector.
    pub fn principal_symbol(&self, n: u32) -> Result<PolyVector> {
        if let Some(o) = self.order() {
            if o > n {
                return Err(Error::OrderExceeded { order: o, limit: n });
            }
        }
        Ok(self.0.weight_part(n))
    }

    /// Formal adjoint with respect to the Berezin pairing of half-densities.
    pub fn adjoint(&self) -> Result<Self> {
        if self.homogeneous_degree().is_none() {
            return Err(Error::Inhomogeneous { what: "adjoint operand".into() });
        }
        Ok(self.adjoint_by_parts())
    }

    /// Adjoint applied term by term; agrees with [`Self::adjoint`] on
    /// homogeneous operators.
    pub fn adjoint_by_parts(&self) -> Self {
        let ring = self.ring().clone();
        let n = ring.dim();
        let mut out = HalfDensityOp::zero(&ring);
        for (m, c) in self.0.terms() {
            let (base, word) = m.split(n);
            let fdeg = ring.monomial_degree(&base);
            let wdeg = ring.monomial_degree(&word);
            let len = ring.monomial_weight(&word);
            let sign = &koszul(fdeg, wdeg) * &parity_sign(len % 2 == 1);
            let word_op = HalfDensityOp(GradedPoly::from_monomial(&ring, word, BigRational::one()));
            let f_op = HalfDensityOp(GradedPoly::from_monomial(&ring, base, c * sign));
            out = out.add(&word_op.compose(&f_op));
        }
        out
    }

    /// The Lie derivative `L_X = X^a d_a + (-1)^{|a|(|X|+1)} 1/2 d_a X^a` of a
    /// homogeneous vector field on half-densities.
    pub fn lie_derivative(x: &PolyVector) -> Result<Self> {
        let ring = x.ring().clone();
        let deg = x
            .homogeneous_degree()
            .ok_or_else(|| Error::Inhomogeneous { what: "vector field".into() })?;
        if x.terms().any(|(m, _)| ring.monomial_weight(m) != 1) {
            return Err(Error::Precondition("Lie derivative needs a vector field".into()));
        }
        let mut div = GradedPoly::zero(&ring);
        for a in 0..ring.dim() {
            let comp = vector_component(x, a);
            let s = koszul(ring.coords()[a].degree, deg + 1);
            div += &comp.partial(a).scale(&s);
        }
        Ok(HalfDensityOp(x + &div.scale(&rat(1, 2))))
    }

    /// `f -> rho^{-1/2} self(f rho^{1/2})` for an even density factor `rho`
    /// whose constant term is a rational square.
    pub fn conjugate_by_volume(&self, rho: &GradedPoly) -> Result<Self> {
        let s = sqrt_unit(rho)?;
        let s_inv = s.invert_unit()?;
        let left = HalfDensityOp::multiplication(&s_inv)?;
        let right = HalfDensityOp::multiplication(&s)?;
        Ok(left.compose(self).compose(&right))
    }

    pub fn format(&self) -> String {
        self.0.format(true)
    }
}

/// Coefficient `X^a` of `p_a` in a vector field.
pub fn vector_component(x: &PolyVector, a: usize) -> GradedPoly {
    let ring = x.ring();
    let pa = ring.momentum_index(a);
    GradedPoly::from_terms(
        ring,
        x.terms().filter(|(m, _)| m.0[pa] == 1 && ring.monomial_weight(m) == 1).map(|(m, c)| {
            let mut b = m.clone();
            b.0[pa] = 0;
            (b, c.clone())
        }),
    )
}

/// Square root of an even function with a rational-square constant term.
pub fn sqrt_unit(rho: &GradedPoly) -> Result<GradedPoly> {
    if !rho.is_function() || rho.homogeneous_degree() != Some(0) {
        return Err(Error::Precondition("density factor must be an even degree-0 function".into()));
    }
    let c0 = rho.constant_term();
    if c0 <= BigRational::zero() {
        return Err(Error::NotInvertible);
    }
    let rn = c0.numer().sqrt();
    let rd = c0.denom().sqrt();
    if &(&rn * &rn) != c0.numer() || &(&rd * &rd) != c0.denom() {
        return Err(Error::Precondition("constant term is not a rational square".into()));
    }
    let root = BigRational::new(rn, rd);
    let ring = rho.ring();
    // rho = c0 (1 + u);  sqrt(1+u) = sum binom(1/2, k) u^k
    let mut u = rho.scale(&c0.recip());
    u.add_term(Monomial::one(ring.num_symbols()), -BigRational::one());
    let mut sum = GradedPoly::one(ring);
    let mut power = GradedPoly::one(ring);
    let mut binom = BigRational::one();
    let half = rat(1, 2);
    let mut k = 0i64;
    loop {
        power = &power * &u;
        if power.is_zero() {
            break;
        }
        binom = &binom * (&half - BigRational::from_integer(k.into())) / BigRational::from_integer((k + 1).into());
        k += 1;
        sum += &power.scale(&binom);
    }
    Ok(sum.scale(&root))
}

/// Reconstructs an operator of order at most `max_order` from its action,
/// given as a Laurent series in `hbar` of functions.
pub fn laurent_operator_from_action<F>(
    ring: &Arc<Ring>,
    max_order: u32,
    mut action: F,
) -> Result<BTreeMap<i32, HalfDensityOp>>
where
    F: FnMut(&GradedPoly) -> Result<BTreeMap<i32, GradedPoly>>,
{
    let n = ring.dim();
    let mut words = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(ring: &Ring, a: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if a == ring.dim() {
            out.push(cur.clone());
            return;
        }
        let max = if ring.coords()[a].is_odd() { left.min(1) } else { left };
        for e in 0..=max {
            cur[a] = e;
            rec(ring, a + 1, left - e, cur, out);
        }
        cur[a] = 0;
    }
    rec(ring, 0, max_order, &mut cur, &mut words);
    words.sort_by_key(|w| w.iter().sum::<u32>());

    let mut result: BTreeMap<i32, GradedPoly> = BTreeMap::new();
    for w in words {
        let mut ym = Monomial::one(ring.num_symbols());
        let mut dm = Monomial::one(ring.num_symbols());
        for a in 0..n {
            ym.0[a] = w[a];
            dm.0[n + a] = w[a];
        }
        if !ring.within_bounds(&ym) || !ring.within_bounds(&dm) {
            continue;
        }
        let y = GradedPoly::from_monomial(ring, ym, BigRational::one());
        let word = HalfDensityOp(GradedPoly::from_monomial(ring, dm.clone(), BigRational::one()));
        let kappa = word.apply(&y)?.constant_term();
        let mut residual = action(&y)?;
        for (k, op) in &result {
            let known = HalfDensityOp(op.clone()).apply(&y)?;
            let e = residual.entry(*k).or_insert_with(|| GradedPoly::zero(ring));
            *e -= &known;
        }
        let word_poly = GradedPoly::from_monomial(ring, dm, BigRational::one());
        for (k, r) in residual {
            if r.is_zero() {
                continue;
            }
            if !r.is_function() {
                return Err(Error::Precondition("action must return functions".into()));
            }
            let c = &r.scale(&kappa.recip()) * &word_poly;
            *result.entry(k).or_insert_with(|| GradedPoly::zero(ring)) += &c;
        }
    }
    Ok(result
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(k, p)| (k, HalfDensityOp(p)))
        .collect())
}

/// Reconstructs an operator of order at most `max_order` from its action.
pub fn operator_from_action<F>(ring: &Arc<Ring>, max_order: u32, mut action: F) -> Result<HalfDensityOp>
where
    F: FnMut(&GradedPoly) -> Result<GradedPoly>,
{
    let mut m = laurent_operator_from_action(ring, max_order, |f| {
        Ok(BTreeMap::from([(0, action(f)?)]))
    })?;
    Ok(m.remove(&0).unwrap_or_else(|| HalfDensityOp::zero(ring)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{int, Coordinate, TruncationBounds};

    fn hovik() -> Arc<Ring> {
        Ring::new(
            vec![
                Coordinate::new("xi", -1),
                Coordinate::new("tau", -1),
                Coordinate::new("z", -2),
            ],
            TruncationBounds::default(),
        )
        .unwrap()
    }

    fn c(r: &Arc<Ring>, n: &str) -> GradedPoly {
        GradedPoly::coord(r, n).unwrap()
    }

    fn p(r: &Arc<Ring>, n: &str) -> GradedPoly {
        GradedPoly::momentum(r, n).unwrap()
    }

    #[test]
    fn derivative_passes_odd_coordinate_with_sign() {
        let r = hovik();
        let d_tau = HalfDensityOp::derivative(&r, 1);
        let xi = HalfDensityOp::multiplication(&c(&r, "xi")).unwrap();
        // d_tau o xi = -xi d_tau
        let lhs = d_tau.compose(&xi);
        let rhs = HalfDensityOp::from_normal_form(&c(&r, "xi") * &p(&r, "tau")).neg();
        assert_eq!(lhs, rhs);
        // d_tau o tau = 1 - tau d_tau
        let tau = HalfDensityOp::multiplication(&c(&r, "tau")).unwrap();
        let lhs = d_tau.compose(&tau);
        let rhs = HalfDensityOp::identity(&r).sub(&HalfDensityOp::from_normal_form(&c(&r, "tau") * &p(&r, "tau")));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn hovik_second_order_part() {
        let r = hovik();
        let pv = &(&c(&r, "tau") * &p(&r, "xi")) + &(&(&c(&r, "tau") * &c(&r, "xi")) * &p(&r, "z"));
        let q = p(&r, "tau");
        let lp = HalfDensityOp::lie_derivative(&pv).unwrap();
        let lq = HalfDensityOp::lie_derivative(&q).unwrap();
        assert_eq!(lp.normal_form(), &pv);
        let d2 = lp.compose(&lq).add(&lq.compose(&lp)).scale(&rat(1, 2));
        let expected = &(&(&pv * &q) + &(&c(&r, "xi") * &p(&r, "z")).scale(&rat(1, 2)))
            + &p(&r, "xi").scale(&rat(1, 2));
        assert_eq!(d2.normal_form(), &expected);
        let sq = d2.compose(&d2);
        assert_eq!(sq.normal_form(), &p(&r, "z").scale(&rat(1, 4)));
        assert_eq!(d2.principal_symbol(2).unwrap(), &pv * &q);
        assert!(d2.principal_symbol(1).is_err());
    }

    #[test]
    fn adjoint_of_derivative_and_multiplication() {
        let r = hovik();
        for a in 0..3 {
            let d = HalfDensityOp::derivative(&r, a);
            assert_eq!(d.adjoint().unwrap(), d.neg());
        }
        let f = HalfDensityOp::multiplication(&(&c(&r, "xi") * &c(&r, "z"))).unwrap();
        assert_eq!(f.adjoint().unwrap(), f);
    }

    #[test]
    fn sqrt_of_square() {
        let r = Ring::new(vec![Coordinate::new("x", 0)], TruncationBounds::default()).unwrap();
        let x = c(&r, "x");
        let one_plus = &GradedPoly::one(&r) + &x;
        let rho = &one_plus * &one_plus;
        assert_eq!(sqrt_unit(&rho).unwrap(), one_plus);
        assert!(sqrt_unit(&GradedPoly::constant(&r, int(2))).is_err());
    }

    #[test]
    fn reconstruction_recovers_operator() {
        let r = hovik();
        let op = HalfDensityOp::from_normal_form(
            &(&(&c(&r, "tau") * &p(&r, "xi")) * &p(&r, "tau")) + &p(&r, "z").scale(&rat(1, 3)),
        );
        let rebuilt = operator_from_action(&r, 3, |f| op.apply(f)).unwrap();
        assert_eq!(rebuilt, op);
    }
}

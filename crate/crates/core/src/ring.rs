//! Graded-commutative polynomial rings in base coordinates and their momenta.
//!
//! A ring over coordinates `x^1..x^n` carries `2n` symbols: index `i < n` is
//! `x^i`, index `n + i` is the momentum `p_i` of degree `-|x^i|`.  Monomials are
//! stored in canonical order (declaration order, base before momenta); the
//! coefficient of a stored monomial multiplies that ordered product.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coordinate {
    pub name: String,
    pub degree: i32,
}

impl Coordinate {
    pub fn new(name: impl Into<String>, degree: i32) -> Self {
        Coordinate {
            name: name.into(),
            degree,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.degree.rem_euclid(2) == 1
    }
}

/// Truncation bounds applied to every product.
///
/// `weight_max` caps the total momentum exponent, `base_degree_max` caps the
/// total exponent of even base coordinates of nonzero degree, and
/// `poly_degree_max` (defaulting to `base_degree_max`) caps the total exponent
/// of degree-0 base coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncationBounds {
    pub weight_max: u32,
    pub base_degree_max: u32,
    pub poly_degree_max: Option<u32>,
    pub hbar_max: u32,
}

impl Default for TruncationBounds {
    fn default() -> Self {
        TruncationBounds {
            weight_max: 6,
            base_degree_max: 6,
            poly_degree_max: None,
            hbar_max: 12,
        }
    }
}

impl TruncationBounds {
    pub fn poly_cap(&self) -> u32 {
        self.poly_degree_max.unwrap_or(self.base_degree_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    /// Base coordinate that is odd.
    OddBase,
    /// Even base coordinate of nonzero degree.
    GradedBase,
    /// Base coordinate of degree 0.
    PolyBase,
    Momentum,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ring {
    coords: Vec<Coordinate>,
    bounds: TruncationBounds,
    degrees: Vec<i32>,
    kinds: Vec<SymbolKind>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Ring {
    pub fn new(coords: Vec<Coordinate>, bounds: TruncationBounds) -> Result<Arc<Ring>> {
        for (i, c) in coords.iter().enumerate() {
            if !valid_name(&c.name) {
                return Err(Error::InvalidCoordinateName(c.name.clone()));
            }
            if coords[..i].iter().any(|d| d.name == c.name) {
                return Err(Error::DuplicateCoordinate(c.name.clone()));
            }
        }
        let n = coords.len();
        let mut degrees = Vec::with_capacity(2 * n);
        let mut kinds = Vec::with_capacity(2 * n);
        for c in &coords {
            degrees.push(c.degree);
            kinds.push(if c.is_odd() {
                SymbolKind::OddBase
            } else if c.degree == 0 {
                SymbolKind::PolyBase
            } else {
                SymbolKind::GradedBase
            });
        }
        for c in &coords {
            degrees.push(-c.degree);
            kinds.push(SymbolKind::Momentum);
        }
        Ok(Arc::new(Ring {
            coords,
            bounds,
            degrees,
            kinds,
        }))
    }

    /// Same coordinates with different bounds.
    pub fn with_bounds(&self, bounds: TruncationBounds) -> Arc<Ring> {
        Ring::new(self.coords.clone(), bounds).expect("coordinates already validated")
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn bounds(&self) -> &TruncationBounds {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn num_symbols(&self) -> usize {
        2 * self.coords.len()
    }

    pub fn symbol_degree(&self, s: usize) -> i32 {
        self.degrees[s]
    }

    pub fn symbol_odd(&self, s: usize) -> bool {
        self.degrees[s].rem_euclid(2) == 1
    }

    pub fn symbol_kind(&self, s: usize) -> SymbolKind {
        self.kinds[s]
    }

    pub fn momentum_index(&self, a: usize) -> usize {
        self.coords.len() + a
    }

    pub fn is_momentum(&self, s: usize) -> bool {
        s >= self.coords.len()
    }

    pub fn coord_index(&self, name: &str) -> Result<usize> {
        self.coords
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownCoordinate(name.to_string()))
    }

    pub fn symbol_name(&self, s: usize) -> String {
        let n = self.coords.len();
        if s < n {
            self.coords[s].name.clone()
        } else {
            format!("p[{}]", self.coords[s - n].name)
        }
    }

    /// Whether a monomial survives truncation.
    pub fn within_bounds(&self, m: &Monomial) -> bool {
        let (w, graded, poly) = self.monomial_budgets(m);
        w <= self.bounds.weight_max
            && graded <= self.bounds.base_degree_max
            && poly <= self.bounds.poly_cap()
    }

    /// Momentum weight, graded-base exponent and degree-0 base exponent.
    pub fn monomial_budgets(&self, m: &Monomial) -> (u32, u32, u32) {
        let (mut w, mut graded, mut poly) = (0, 0, 0);
        for (s, &e) in m.0.iter().enumerate() {
            match self.kinds[s] {
                SymbolKind::Momentum => w += e,
                SymbolKind::GradedBase => graded += e,
                SymbolKind::PolyBase => poly += e,
                SymbolKind::OddBase => {}
            }
        }
        (w, graded, poly)
    }

    pub fn monomial_degree(&self, m: &Monomial) -> i32 {
        m.0.iter()
            .zip(&self.degrees)
            .map(|(&e, &d)| e as i32 * d)
            .sum()
    }

    pub fn monomial_weight(&self, m: &Monomial) -> u32 {
        m.0[self.coords.len()..].iter().sum()
    }

    pub fn monomial_parity(&self, m: &Monomial) -> bool {
        self.monomial_degree(m).rem_euclid(2) == 1
    }

    /// Product of two monomials: `None` if an odd symbol repeats, else the
    /// merged monomial and whether the reordering sign is negative.
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(Monomial, bool)> {
        let mut out = a.0.clone();
        let mut negative = false;
        // odd symbols of `a` strictly after the current position
        let mut odd_after: u32 = (0..a.0.len())
            .filter(|&s| a.0[s] == 1 && self.symbol_odd(s))
            .count() as u32;
        for s in 0..b.0.len() {
            let odd = self.symbol_odd(s);
            if odd && a.0[s] == 1 {
                odd_after -= 1;
            }
            if b.0[s] == 0 {
                continue;
            }
            if odd {
                if a.0[s] != 0 {
                    return None;
                }
                if odd_after % 2 == 1 {
                    negative = !negative;
                }
            }
            out[s] += b.0[s];
        }
        Some((Monomial(out), negative))
    }

    pub(crate) fn same(self: &Arc<Ring>, other: &Arc<Ring>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// Exponent vector over the `2n` symbols of a ring.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(num_symbols: usize) -> Self {
        Monomial(vec![0; num_symbols])
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Split into base part and momentum part (each still full length).
    pub fn split(&self, n: usize) -> (Monomial, Monomial) {
        let mut base = self.0.clone();
        let mut mom = self.0.clone();
        for e in &mut base[n..] {
            *e = 0;
        }
        for e in &mut mom[..n] {
            *e = 0;
        }
        (Monomial(base), Monomial(mom))
    }
}

/// Element of a truncated graded-commutative polynomial ring.
#[derive(Clone, Debug)]
pub struct GradedPoly {
    ring: Arc<Ring>,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for GradedPoly {
    fn eq(&self, other: &Self) -> bool {
        self.ring.same(&other.ring) && self.terms == other.terms
    }
}

impl Eq for GradedPoly {}

impl GradedPoly {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        GradedPoly {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &Arc<Ring>, c: Rational) -> Self {
        let mut p = GradedPoly::zero(ring);
        p.add_term(Monomial::one(ring.num_symbols()), c);
        p
    }

    pub fn one(ring: &Arc<Ring>) -> Self {
        GradedPoly::constant(ring, Rational::one())
    }

    pub fn from_monomial(ring: &Arc<Ring>, m: Monomial, c: Rational) -> Self {
        let mut p = GradedPoly::zero(ring);
        if ring.within_bounds(&m) {
            p.add_term(m, c);
        }
        p
    }

    pub fn symbol(ring: &Arc<Ring>, s: usize) -> Self {
        let mut m = Monomial::one(ring.num_symbols());
        m.0[s] = 1;
        GradedPoly::from_monomial(ring, m, Rational::one())
    }

    pub fn coord(ring: &Arc<Ring>, name: &str) -> Result<Self> {
        Ok(GradedPoly::symbol(ring, ring.coord_index(name)?))
    }

    pub fn momentum(ring: &Arc<Ring>, name: &str) -> Result<Self> {
        let a = ring.coord_index(name)?;
        Ok(GradedPoly::symbol(ring, ring.momentum_index(a)))
    }

    /// Builds from raw terms; truncates and drops zero coefficients.
    pub fn from_terms(ring: &Arc<Ring>, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = GradedPoly::zero(ring);
        for (m, c) in terms {
            assert_eq!(m.0.len(), ring.num_symbols(), "monomial length mismatch");
            if ring.within_bounds(&m) {
                p.add_term(m, c);
            }
        }
        p
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one(self.ring.num_symbols()))
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_ring(&self, other: &GradedPoly) -> Result<()> {
        if self.ring.same(&other.ring) {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return GradedPoly::zero(&self.ring);
        }
        GradedPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn checked_add(&self, other: &GradedPoly) -> Result<Self> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &GradedPoly) -> Result<Self> {
        self.check_ring(other)?;
        let mut out = GradedPoly::zero(&self.ring);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, neg)) = self.ring.mul_monomials(ma, mb) {
                    if !self.ring.within_bounds(&m) {
                        continue;
                    }
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = GradedPoly::one(&self.ring);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Left derivative with respect to symbol `s`.
    pub fn left_partial_symbol(&self, s: usize) -> Self {
        let ring = &self.ring;
        let odd = ring.symbol_odd(s);
        let mut out = GradedPoly::zero(ring);
        for (m, c) in &self.terms {
            let e = m.0[s];
            if e == 0 {
                continue;
            }
            let mut negative = false;
            if odd {
                let before = (0..s).filter(|&j| m.0[j] % 2 == 1 && ring.symbol_odd(j)).count();
                negative = before % 2 == 1;
            }
            let mut nm = m.clone();
            nm.0[s] -= 1;
            let c = c * BigInt::from(e);
            out.add_term(nm, if negative { -c } else { c });
        }
        out
    }

    /// Right derivative with respect to symbol `s`.
    pub fn right_partial_symbol(&self, s: usize) -> Self {
        let ring = &self.ring;
        let odd = ring.symbol_odd(s);
        let mut out = GradedPoly::zero(ring);
        for (m, c) in &self.terms {
            let e = m.0[s];
            if e == 0 {
                continue;
            }
            let mut negative = false;
            if odd {
                let after = (s + 1..m.0.len())
                    .filter(|&j| m.0[j] % 2 == 1 && ring.symbol_odd(j))
                    .count();
                negative = after % 2 == 1;
            }
            let mut nm = m.clone();
            nm.0[s] -= 1;
            let c = c * BigInt::from(e);
            out.add_term(nm, if negative { -c } else { c });
        }
        out
    }

    /// Left derivative with respect to the base coordinate `a`.
    pub fn partial(&self, a: usize) -> Self {
        self.left_partial_symbol(a)
    }

    /// Left derivative with respect to the momentum `p_a`.
    pub fn partial_momentum(&self, a: usize) -> Self {
        self.left_partial_symbol(self.ring.momentum_index(a))
    }

    /// Degree if all terms share it; `Some(0)` for zero.
    pub fn homogeneous_degree(&self) -> Option<i32> {
        let mut degs = self.terms.keys().map(|m| self.ring.monomial_degree(m));
        let first = match degs.next() {
            Some(d) => d,
            None => return Some(0),
        };
        degs.all(|d| d == first).then_some(first)
    }

    pub fn degree_parts(&self) -> BTreeMap<i32, GradedPoly> {
        let mut out: BTreeMap<i32, GradedPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(self.ring.monomial_degree(m))
                .or_insert_with(|| GradedPoly::zero(&self.ring))
                .add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn weight_parts(&self) -> BTreeMap<u32, GradedPoly> {
        let mut out: BTreeMap<u32, GradedPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(self.ring.monomial_weight(m))
                .or_insert_with(|| GradedPoly::zero(&self.ring))
                .add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn weight_part(&self, w: u32) -> GradedPoly {
        GradedPoly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| self.ring.monomial_weight(m) == w)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Largest momentum weight; `None` for zero.
    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().map(|m| self.ring.monomial_weight(m)).max()
    }

    /// Whether no momentum symbol occurs.
    pub fn is_function(&self) -> bool {
        self.max_weight().unwrap_or(0) == 0
    }

    /// Inverse of a unit by the geometric series.
    pub fn invert_unit(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::NotInvertible);
        }
        let inv0 = c0.recip();
        // self = c0 (1 + u)
        let mut u = self.scale(&inv0);
        u.add_term(Monomial::one(self.ring.num_symbols()), -Rational::one());
        let neg_u = -&u;
        let mut sum = GradedPoly::one(&self.ring);
        let mut power = GradedPoly::one(&self.ring);
        loop {
            power = &power * &neg_u;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum.scale(&inv0))
    }

    /// Re-expresses in another ring via a strictly increasing symbol map.
    pub fn relabel(&self, target: &Arc<Ring>, map: &[usize]) -> Result<Self> {
        if map.len() != self.ring.num_symbols() {
            return Err(Error::Precondition("symbol map has wrong length".into()));
        }
        if map.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition("symbol map must be increasing".into()));
        }
        for (s, &t) in map.iter().enumerate() {
            if t >= target.num_symbols() || self.ring.symbol_degree(s) != target.symbol_degree(t) {
                return Err(Error::Precondition(format!(
                    "symbol {} cannot be mapped to target symbol {}",
                    self.ring.symbol_name(s),
                    t
                )));
            }
        }
        let terms = self.terms.iter().map(|(m, c)| {
            let mut nm = Monomial::one(target.num_symbols());
            for (s, &e) in m.0.iter().enumerate() {
                nm.0[map[s]] = e;
            }
            (nm, c.clone())
        });
        Ok(GradedPoly::from_terms(target, terms))
    }

    /// Re-expresses in a ring with the same coordinates (e.g. other bounds).
    pub fn rebase(&self, target: &Arc<Ring>) -> Result<Self> {
        if self.ring.coords() != target.coords() {
            return Err(Error::RingMismatch);
        }
        Ok(GradedPoly::from_terms(
            target,
            self.terms.iter().map(|(m, c)| (m.clone(), c.clone())),
        ))
    }

    /// Canonical text; momenta print as `p[x]` or, with `operator`, `d(x)`.
    pub fn format(&self, operator: bool) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let n = self.ring.dim();
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            for (s, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = if s < n {
                    self.ring.coords[s].name.clone()
                } else if operator {
                    format!("d({})", self.ring.coords[s - n].name)
                } else {
                    format!("p[{}]", self.ring.coords[s - n].name)
                };
                if e == 1 {
                    factors.push(name);
                } else {
                    factors.push(format!("{}^{}", name, e));
                }
            }
            let coef = if a.is_integer() {
                a.numer().to_string()
            } else {
                format!("{}/{}", a.numer(), a.denom())
            };
            if factors.is_empty() {
                out.push_str(&coef);
            } else if a.is_one() {
                out.push_str(&factors.join("*"));
            } else {
                out.push_str(&coef);
                out.push_str(" * ");
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format(false))
    }
}

impl<'a> Add<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;
    fn add(self, rhs: &GradedPoly) -> GradedPoly {
        self.checked_add(rhs).expect("ring mismatch in addition")
    }
}

impl<'a> Sub<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;
    fn sub(self, rhs: &GradedPoly) -> GradedPoly {
        self.checked_add(&-rhs).expect("ring mismatch in subtraction")
    }
}

impl<'a> Mul<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;
    fn mul(self, rhs: &GradedPoly) -> GradedPoly {
        self.checked_mul(rhs).expect("ring mismatch in multiplication")
    }
}

impl Neg for &GradedPoly {
    type Output = GradedPoly;
    fn neg(self) -> GradedPoly {
        GradedPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for GradedPoly {
    type Output = GradedPoly;
    fn neg(self) -> GradedPoly {
        -&self
    }
}

impl AddAssign<&GradedPoly> for GradedPoly {
    fn add_assign(&mut self, rhs: &GradedPoly) {
        assert!(self.ring.same(&rhs.ring), "ring mismatch in addition");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&GradedPoly> for GradedPoly {
    fn sub_assign(&mut self, rhs: &GradedPoly) {
        assert!(self.ring.same(&rhs.ring), "ring mismatch in subtraction");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

/// Koszul sign `(-1)^(a b)` as a rational.
pub fn koszul(a: i32, b: i32) -> Rational {
    if (a * b).rem_euclid(2) == 1 {
        -Rational::one()
    } else {
        Rational::one()
    }
}

pub fn parity_sign(odd: bool) -> Rational {
    if odd {
        -Rational::one()
    } else {
        Rational::one()
    }
}

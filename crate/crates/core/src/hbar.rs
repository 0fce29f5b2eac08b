//! Formal power series `sum_n hbar^n D_n` of half-density operators with
//! `order(D_n) <= n`, truncated at the ring's `hbar_max`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::operator::HalfDensityOp;
use crate::polyvector::{poisson_bracket, PolyVector};
use crate::ring::{GradedPoly, Ring};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HbarOp {
    ring: Arc<Ring>,
    coeffs: BTreeMap<u32, HalfDensityOp>,
}

/// Outcome of the BV-infinity test.  `square_vanishes` is exact only up to
/// `hbar^hbar_max`.
#[derive(Clone, Debug)]
pub struct BvReport {
    pub degree_ok: bool,
    pub vanishes_at_zero: bool,
    pub symbol_nonzero: bool,
    pub square_vanishes: bool,
    pub square: HbarOp,
    pub hbar_max: u32,
}

impl BvReport {
    pub fn passed(&self) -> bool {
        self.degree_ok && self.vanishes_at_zero && self.symbol_nonzero && self.square_vanishes
    }
}

impl HbarOp {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        HbarOp {
            ring: ring.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn new(ring: &Arc<Ring>, coeffs: BTreeMap<u32, HalfDensityOp>) -> Result<Self> {
        let mut out = HbarOp::zero(ring);
        for (n, op) in coeffs {
            out.insert(n, op)?;
        }
        Ok(out)
    }

    /// `hbar^n op`.
    pub fn term(n: u32, op: HalfDensityOp) -> Result<Self> {
        let ring = op.ring().clone();
        HbarOp::new(&ring, BTreeMap::from([(n, op)]))
    }

    fn insert(&mut self, n: u32, op: HalfDensityOp) -> Result<()> {
        if !op.ring().same(&self.ring) {
            return Err(Error::RingMismatch);
        }
        if let Some(o) = op.order() {
            if o > n {
                return Err(Error::OrderExceeded { order: o, limit: n });
            }
        }
        if n > self.hbar_max() {
            return Ok(());
        }
        let sum = match self.coeffs.remove(&n) {
            Some(prev) => prev.add(&op),
            None => op,
        };
        if !sum.is_zero() {
            self.coeffs.insert(n, sum);
        }
        Ok(())
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn hbar_max(&self) -> u32 {
        self.ring.bounds().hbar_max
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, HalfDensityOp> {
        &self.coeffs
    }

    pub fn coeff(&self, n: u32) -> HalfDensityOp {
        self.coeffs.get(&n).cloned().unwrap_or_else(|| HalfDensityOp::zero(&self.ring))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&n, op) in &other.coeffs {
            out.insert(n, op.clone()).expect("operands satisfy the order bound");
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = HbarOp::zero(&self.ring);
        for (&n, op) in &self.coeffs {
            out.insert(n, op.scale(c)).expect("scaling keeps orders");
        }
        out
    }

    /// Multiplication by `hbar^k`.
    pub fn mul_hbar(&self, k: u32) -> Self {
        let mut out = HbarOp::zero(&self.ring);
        for (&n, op) in &self.coeffs {
            out.insert(n + k, op.clone()).expect("shifting up keeps orders");
        }
        out
    }

    /// Division by `hbar^t`; needs `t_index >= t`.
    pub fn shift_down(&self, t: u32) -> Result<Self> {
        if let Some(ti) = self.t_index() {
            if ti < t {
                return Err(Error::Filtration {
                    found: ti.to_string(),
                    required: t,
                });
            }
        }
        let mut out = HbarOp::zero(&self.ring);
        for (&n, op) in &self.coeffs {
            out.insert(n - t, op.clone())?;
        }
        Ok(out)
    }

    pub fn compose(&self, other: &Self) -> Self {
        assert!(self.ring.same(&other.ring), "ring mismatch in composition");
        let mut out = HbarOp::zero(&self.ring);
        let max = self.hbar_max();
        for (&i, a) in &self.coeffs {
            for (&j, b) in &other.coeffs {
                if i + j > max {
                    continue;
                }
                out.insert(i + j, a.compose(b)).expect("product keeps the order bound");
            }
        }
        out
    }

    pub fn square(&self) -> Self {
        self.compose(self)
    }

    pub fn homogeneous_degree(&self) -> Option<i32> {
        let mut degree = None;
        for op in self.coeffs.values() {
            let d = op.homogeneous_degree()?;
            match degree {
                None => degree = Some(d),
                Some(e) if e != d => return None,
                _ => {}
            }
        }
        Some(degree.unwrap_or(0))
    }

    /// `(1/hbar) [self, other]`.
    pub fn hbar_commutator(&self, other: &Self) -> Result<Self> {
        if !self.ring.same(&other.ring) {
            return Err(Error::RingMismatch);
        }
        let max = self.hbar_max();
        let mut out = HbarOp::zero(&self.ring);
        for (&i, a) in &self.coeffs {
            for (&j, b) in &other.coeffs {
                if i + j == 0 || i + j > max + 1 {
                    continue;
                }
                out.insert(i + j - 1, a.commutator(b)?)?;
            }
        }
        Ok(out)
    }

    /// `min_n (n - order(D_n))`; `None` for the zero operator.
    pub fn t_index(&self) -> Option<u32> {
        self.coeffs
            .iter()
            .map(|(&n, op)| n - op.order().expect("stored coefficients are nonzero"))
            .min()
    }

    /// `sum_n hbar^n sigma_n(D_n)`.
    pub fn extended_symbol(&self) -> HbarSymbol {
        self.extended_symbol_t(0).expect("t = 0 always applies")
    }

    /// `hbar^t sigma_hbar(hbar^{-t} D)`.
    pub fn extended_symbol_t(&self, t: u32) -> Result<HbarSymbol> {
        let shifted = self.shift_down(t)?;
        let mut coeffs = BTreeMap::new();
        for (&n, op) in &shifted.coeffs {
            let s = op.principal_symbol(n)?;
            if !s.is_zero() {
                coeffs.insert(n + t, s);
            }
        }
        Ok(HbarSymbol {
            ring: self.ring.clone(),
            coeffs,
        })
    }

    /// `D_n^+ = (-1)^n D_n` for every `n`.
    pub fn is_self_adjoint(&self) -> bool {
        self.coeffs.iter().all(|(&n, op)| {
            let adj = op.adjoint_by_parts();
            if n % 2 == 0 {
                adj == *op
            } else {
                adj == op.neg()
            }
        })
    }

    pub fn is_bv_infinity(&self) -> BvReport {
        let square = self.square();
        BvReport {
            degree_ok: self.homogeneous_degree() == Some(1) && !self.is_zero(),
            vanishes_at_zero: self.coeff(0).is_zero(),
            symbol_nonzero: !self.extended_symbol().is_zero(),
            square_vanishes: square.is_zero(),
            square,
            hbar_max: self.hbar_max(),
        }
    }

    /// The `hbar^0` part of `[...[D, f_1]_hbar, ..., f_n]_hbar`, checked
    /// against the iterated Poisson brackets of the symbols.
    pub fn derived_bracket(&self, fs: &[GradedPoly]) -> Result<GradedPoly> {
        let mut acc = self.clone();
        for f in fs {
            let fop = HbarOp::term(0, HalfDensityOp::multiplication(f)?)?;
            acc = acc.hbar_commutator(&fop)?;
        }
        let at_zero = acc.coeff(0);
        if at_zero.order().unwrap_or(0) > 0 {
            return Err(Error::Internal("derived bracket has positive order".into()));
        }
        let value = at_zero.normal_form().clone();
        let n = fs.len() as u32;
        let mut check = self.coeff(n).principal_symbol(n)?;
        for f in fs {
            check = poisson_bracket(&check, f)?;
        }
        if check != value {
            return Err(Error::Internal(format!(
                "derived bracket {value} disagrees with symbol bracket {check}"
            )));
        }
        Ok(value)
    }

    pub fn format(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        self.coeffs
            .iter()
            .map(|(n, op)| format!("hbar^{}*({})", n, op.format()))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Formal power series `sum_n hbar^n X_n` of polyvector fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HbarSymbol {
    ring: Arc<Ring>,
    coeffs: BTreeMap<u32, PolyVector>,
}

impl HbarSymbol {
    pub fn new(ring: &Arc<Ring>, coeffs: BTreeMap<u32, PolyVector>) -> Self {
        HbarSymbol {
            ring: ring.clone(),
            coeffs: coeffs.into_iter().filter(|(_, p)| !p.is_zero()).collect(),
        }
    }

    /// `X_hbar = sum_n hbar^n X_n` for the weight decomposition of `X`.
    pub fn embed(x: &PolyVector) -> Self {
        HbarSymbol::new(x.ring(), x.weight_parts())
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, PolyVector> {
        &self.coeffs
    }

    pub fn coeff(&self, n: u32) -> PolyVector {
        self.coeffs.get(&n).cloned().unwrap_or_else(|| GradedPoly::zero(&self.ring))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval_at_one(&self) -> PolyVector {
        let mut out = GradedPoly::zero(&self.ring);
        for p in self.coeffs.values() {
            out += p;
        }
        out
    }

    /// `(1/hbar) {self, other}`, truncated at `hbar_max`.
    pub fn bracket_over_hbar(&self, other: &Self) -> Result<Self> {
        let max = self.ring.bounds().hbar_max;
        let mut coeffs: BTreeMap<u32, PolyVector> = BTreeMap::new();
        for (&i, a) in &self.coeffs {
            for (&j, b) in &other.coeffs {
                let br = poisson_bracket(a, b)?;
                if br.is_zero() {
                    continue;
                }
                if i + j == 0 {
                    return Err(Error::Internal("bracket has a 1/hbar term".into()));
                }
                if i + j - 1 > max {
                    continue;
                }
                *coeffs
                    .entry(i + j - 1)
                    .or_insert_with(|| GradedPoly::zero(&self.ring)) += &br;
            }
        }
        Ok(HbarSymbol::new(&self.ring, coeffs))
    }
}

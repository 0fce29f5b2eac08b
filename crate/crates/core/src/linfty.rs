//! L-infinity algebroids, their linear Poisson structures, and the Fourier and
//! ELW quantizations.
//!
//! Structure constants are stored on strictly increasing multi-indices `I` of
//! fiber generators.  Coordinates on the dual side are the fiber names (the
//! `xi_i`, degree `d_i - 1`); on the shifted side they are `eta_<name>`
//! (degree `1 - d_i`).  Base coordinates come first in both rings.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hbar::HbarOp;
use crate::operator::{laurent_operator_from_action, operator_from_action, vector_component, HalfDensityOp};
use crate::polyvector::{PoissonStructure, PolyVector};
use crate::ring::{parity_sign, rat, Coordinate, GradedPoly, Monomial, Ring};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fiber {
    pub name: String,
    /// Degree of the generator `e_i` of the algebroid.
    pub degree: i32,
}

#[derive(Clone, Debug)]
pub struct StructureConstants {
    base: Arc<Ring>,
    fibers: Vec<Fiber>,
    anchors: BTreeMap<Vec<usize>, PolyVector>,
    brackets: BTreeMap<(Vec<usize>, usize), GradedPoly>,
    dual: Arc<Ring>,
    shifted: Arc<Ring>,
}

#[derive(Clone, Debug)]
pub struct LinftyReport {
    pub passed: bool,
    /// Normal form of `D o D`.
    pub residual: GradedPoly,
}

fn check_index(i: &[usize], r: usize) -> Result<()> {
    if i.windows(2).any(|w| w[0] >= w[1]) || i.iter().any(|&k| k >= r) {
        return Err(Error::InvalidStructure(format!("multi-index {i:?} is not strictly increasing in range")));
    }
    Ok(())
}

impl StructureConstants {
    pub fn new(base: &Arc<Ring>, fibers: Vec<Fiber>) -> Result<Self> {
        for f in &fibers {
            if f.degree.rem_euclid(2) != 0 {
                return Err(Error::UnsupportedFiber(format!(
                    "generator {} has odd degree {}; only odd shifted coordinates are supported",
                    f.name, f.degree
                )));
            }
        }
        let mut dual_coords = base.coords().to_vec();
        let mut shifted_coords = base.coords().to_vec();
        for f in &fibers {
            dual_coords.push(Coordinate::new(f.name.clone(), f.degree - 1));
            shifted_coords.push(Coordinate::new(format!("eta_{}", f.name), 1 - f.degree));
        }
        let dual = Ring::new(dual_coords, base.bounds().clone())?;
        let shifted = Ring::new(shifted_coords, base.bounds().clone())?;
        Ok(StructureConstants {
            base: base.clone(),
            fibers,
            anchors: BTreeMap::new(),
            brackets: BTreeMap::new(),
            dual,
            shifted,
        })
    }

    /// Lie algebra with constant structure constants `[e_i, e_j] = C^k_ij e_k`.
    pub fn lie_algebra(base: &Arc<Ring>, names: &[&str], c: &[((usize, usize), usize, BigRational)]) -> Result<Self> {
        let mut sc = StructureConstants::new(
            base,
            names.iter().map(|n| Fiber { name: n.to_string(), degree: 0 }).collect(),
        )?;
        for ((i, j), k, v) in c {
            sc.set_bracket(&[*i, *j], *k, GradedPoly::constant(base, v.clone()))?;
        }
        Ok(sc)
    }

    pub fn base(&self) -> &Arc<Ring> {
        &self.base
    }

    pub fn fibers(&self) -> &[Fiber] {
        &self.fibers
    }

    pub fn rank(&self) -> usize {
        self.fibers.len()
    }

    pub fn dual_ring(&self) -> &Arc<Ring> {
        &self.dual
    }

    pub fn shifted_ring(&self) -> &Arc<Ring> {
        &self.shifted
    }

    pub fn fiber_index(&self, name: &str) -> Result<usize> {
        self.fibers
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::UnknownCoordinate(name.to_string()))
    }

    /// Sets `rho_I = rho^a_I d_a`, a vector field on the base.
    pub fn set_anchor(&mut self, i: &[usize], rho: PolyVector) -> Result<()> {
        check_index(i, self.rank())?;
        if !rho.ring().same(&self.base) {
            return Err(Error::RingMismatch);
        }
        if rho.terms().any(|(m, _)| self.base.monomial_weight(m) != 1) {
            return Err(Error::InvalidStructure("anchor must be a vector field on the base".into()));
        }
        self.anchors.insert(i.to_vec(), rho);
        Ok(())
    }

    /// Sets `C^j_I`, a function on the base.
    pub fn set_bracket(&mut self, i: &[usize], j: usize, c: GradedPoly) -> Result<()> {
        check_index(i, self.rank())?;
        if i.is_empty() || j >= self.rank() {
            return Err(Error::InvalidStructure("bracket needs a nonempty multi-index and a valid target".into()));
        }
        if !c.ring().same(&self.base) || !c.is_function() {
            return Err(Error::InvalidStructure("bracket coefficient must be a base function".into()));
        }
        self.brackets.insert((i.to_vec(), j), c);
        Ok(())
    }

    pub fn anchor(&self, i: &[usize]) -> PolyVector {
        self.anchors.get(i).cloned().unwrap_or_else(|| GradedPoly::zero(&self.base))
    }

    pub fn bracket(&self, i: &[usize], j: usize) -> GradedPoly {
        self.brackets
            .get(&(i.to_vec(), j))
            .cloned()
            .unwrap_or_else(|| GradedPoly::zero(&self.base))
    }

    fn base_map(&self) -> Vec<usize> {
        let n = self.base.dim();
        let r = self.rank();
        (0..n).chain((0..n).map(|a| n + r + a)).collect()
    }

    /// Embeds a base function or polyvector into the dual or shifted ring.
    pub fn embed(&self, f: &GradedPoly, target: &Arc<Ring>) -> Result<GradedPoly> {
        f.relabel(target, &self.base_map())
    }

    fn fiber_product(ring: &Arc<Ring>, first: usize, idx: &[usize]) -> GradedPoly {
        let mut out = GradedPoly::one(ring);
        for &i in idx {
            out = &out * &GradedPoly::symbol(ring, first + i);
        }
        out
    }

    /// The homological vector field on the shifted bundle,
    /// `D = sum rho^a_I eta^I d_a - sum eps C^j_I eta^I d_{eta^j}` with the Koszul
    /// sign `eps` of moving `xi_j` past `eta^I`.
    pub fn ce_vector_field(&self) -> Result<PolyVector> {
        let ring = &self.shifted;
        let n = self.base.dim();
        let mut d = GradedPoly::zero(ring);
        for (i, rho) in &self.anchors {
            let eta = Self::fiber_product(ring, n, i);
            for a in 0..n {
                let comp = vector_component(rho, a);
                if comp.is_zero() {
                    continue;
                }
                let pa = GradedPoly::symbol(ring, ring.momentum_index(a));
                d += &(&(&self.embed(&comp, ring)? * &eta) * &pa);
            }
        }
        for ((i, j), c) in &self.brackets {
            let eta = Self::fiber_product(ring, n, i);
            let xi_deg = self.fibers[*j].degree - 1;
            let eta_deg: i32 = i.iter().map(|&k| 1 - self.fibers[k].degree).sum();
            let sign = -parity_sign((xi_deg * eta_deg).rem_euclid(2) == 1);
            let pj = GradedPoly::symbol(ring, ring.momentum_index(n + j));
            d += &(&(&self.embed(c, ring)? * &eta) * &pj).scale(&sign);
        }
        if d.is_zero() {
            return Ok(d);
        }
        if let Some(deg) = d.homogeneous_degree() {
            if deg != 1 {
                return Err(Error::InvalidStructure(format!("CE vector field has degree {deg}, expected 1")));
            }
        } else {
            return Err(Error::InvalidStructure("structure constants have inconsistent degrees".into()));
        }
        Ok(d)
    }

    /// `D o D = 0`.
    pub fn check_linfty(&self) -> Result<LinftyReport> {
        let d = HalfDensityOp::from_normal_form(self.ce_vector_field()?);
        let sq = d.compose(&d).normal_form().clone();
        Ok(LinftyReport {
            passed: sq.is_zero(),
            residual: sq,
        })
    }

    /// `Q + sum_n Pi_n` on the dual bundle, with
    /// `Pi = sum rho^a_I p_{xi_I} p_a - sum C^j_I xi_j p_{xi_I}`.
    pub fn linear_poisson(&self) -> Result<PoissonStructure> {
        let report = self.check_linfty()?;
        if !report.passed {
            return Err(Error::NotLInfinity { residual: report.residual });
        }
        let s = self.linear_poisson_unchecked()?;
        let mc = s.mc_check();
        if !mc.passed {
            let mut residual = GradedPoly::zero(&self.dual);
            for p in mc.residual.values() {
                residual += p;
            }
            return Err(Error::NotMaurerCartan { residual });
        }
        Ok(s)
    }

    /// The linear structure without checking `D^2 = 0` or the MC equation.
    pub fn linear_poisson_unchecked(&self) -> Result<PoissonStructure> {
        let ring = &self.dual;
        let n = self.base.dim();
        let mut parts: BTreeMap<u32, GradedPoly> = BTreeMap::new();
        for (i, rho) in &self.anchors {
            let pxi = Self::fiber_product(ring, ring.dim() + n, i);
            for a in 0..n {
                let comp = vector_component(rho, a);
                if comp.is_zero() {
                    continue;
                }
                let pa = GradedPoly::symbol(ring, ring.momentum_index(a));
                let t = &(&self.embed(&comp, ring)? * &pxi) * &pa;
                *parts.entry(i.len() as u32 + 1).or_insert_with(|| GradedPoly::zero(ring)) += &t;
            }
        }
        for ((i, j), c) in &self.brackets {
            let pxi = Self::fiber_product(ring, ring.dim() + n, i);
            let xj = GradedPoly::symbol(ring, n + j);
            let t = -(&(&self.embed(c, ring)? * &xj) * &pxi);
            *parts.entry(i.len() as u32).or_insert_with(|| GradedPoly::zero(ring)) += &t;
        }
        let q = parts.remove(&1).unwrap_or_else(|| GradedPoly::zero(ring));
        PoissonStructure::new(ring, q, parts)
    }

    fn is_lie_algebroid(&self) -> Result<()> {
        if self.base.coords().iter().any(|c| c.degree != 0) || self.fibers.iter().any(|f| f.degree != 0) {
            return Err(Error::UnsupportedFiber("ELW quantization needs an ungraded Lie algebroid".into()));
        }
        if self.anchors.keys().any(|i| i.len() != 1) || self.brackets.keys().any(|(i, _)| i.len() != 2) {
            return Err(Error::Precondition("ELW quantization needs a Lie algebroid (binary bracket, anchor only)".into()));
        }
        Ok(())
    }

    /// `(d_CE s)_{ij} = rho_i(s_j) - rho_j(s_i) - C^k_ij s_k` for `i < j`.
    pub fn ce_differential_of_section(&self, s: &[GradedPoly]) -> Result<BTreeMap<(usize, usize), GradedPoly>> {
        let r = self.rank();
        if s.len() != r {
            return Err(Error::Precondition("section has the wrong number of components".into()));
        }
        let n = self.base.dim();
        let act = |i: usize, f: &GradedPoly| -> GradedPoly {
            let rho = self.anchor(&[i]);
            let mut out = GradedPoly::zero(&self.base);
            for a in 0..n {
                out += &(&vector_component(&rho, a) * &f.partial(a));
            }
            out
        };
        let mut out = BTreeMap::new();
        for i in 0..r {
            for j in i + 1..r {
                let mut v = &act(i, &s[j]) - &act(j, &s[i]);
                for (k, sk) in s.iter().enumerate() {
                    v -= &(&self.bracket(&[i, j], k) * sk);
                }
                if !v.is_zero() {
                    out.insert((i, j), v);
                }
            }
        }
        Ok(out)
    }
}

/// Builds the cotangent Lie algebroid of a Poisson bivector with components
/// `pi^{ab}` (`a < b`) on an ungraded base.  Fiber generators are named
/// `d<coordinate>`.
pub fn cotangent_algebroid(base: &Arc<Ring>, pi: &BTreeMap<(usize, usize), GradedPoly>) -> Result<StructureConstants> {
    let n = base.dim();
    if base.coords().iter().any(|c| c.degree != 0) {
        return Err(Error::Precondition("cotangent algebroid needs an ungraded base".into()));
    }
    let entry = |a: usize, b: usize| -> GradedPoly {
        if a < b {
            pi.get(&(a, b)).cloned().unwrap_or_else(|| GradedPoly::zero(base))
        } else if a > b {
            -pi.get(&(b, a)).cloned().unwrap_or_else(|| GradedPoly::zero(base))
        } else {
            GradedPoly::zero(base)
        }
    };
    for &(a, b) in pi.keys() {
        if a >= b || b >= n {
            return Err(Error::InvalidStructure("bivector components need a < b".into()));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let mut s = GradedPoly::zero(base);
                for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                    for d in 0..n {
                        s += &(&entry(x, d) * &entry(y, z).partial(d));
                    }
                }
                if !s.is_zero() {
                    return Err(Error::InvalidStructure(format!("bivector fails the Jacobi identity: {s}")));
                }
            }
        }
    }
    let fibers = base
        .coords()
        .iter()
        .map(|c| Fiber { name: format!("d{}", c.name), degree: 0 })
        .collect();
    let mut sc = StructureConstants::new(base, fibers)?;
    for a in 0..n {
        let mut rho = GradedPoly::zero(base);
        for b in 0..n {
            rho += &(&entry(a, b) * &GradedPoly::symbol(base, base.momentum_index(b)));
        }
        if !rho.is_zero() {
            sc.set_anchor(&[a], rho)?;
        }
        for b in a + 1..n {
            for c in 0..n {
                let v = entry(a, b).partial(c);
                if !v.is_zero() {
                    sc.set_bracket(&[a, b], c, v)?;
                }
            }
        }
    }
    Ok(sc)
}

pub type Laurent = BTreeMap<i32, GradedPoly>;

/// Odd Fourier transform between functions on the shifted and dual bundles,
/// `F(f) = int E f D(eta)` with `E = prod_i (1 + xi_i eta^i / hbar)` and the
/// top `eta` monomial read on the right.
#[derive(Clone, Debug)]
pub struct BerezinFourier {
    mixed: Arc<Ring>,
    dual: Arc<Ring>,
    shifted: Arc<Ring>,
    n: usize,
    r: usize,
}

impl BerezinFourier {
    pub fn new(sc: &StructureConstants) -> Result<Self> {
        let mut coords = sc.dual.coords().to_vec();
        coords.extend(sc.shifted.coords()[sc.base.dim()..].iter().cloned());
        let mixed = Ring::new(coords, sc.base.bounds().clone())?;
        Ok(BerezinFourier {
            mixed,
            dual: sc.dual.clone(),
            shifted: sc.shifted.clone(),
            n: sc.base.dim(),
            r: sc.rank(),
        })
    }

    fn check_function(f: &GradedPoly, ring: &Arc<Ring>) -> Result<()> {
        if !f.ring().same(ring) {
            return Err(Error::RingMismatch);
        }
        if !f.is_function() {
            return Err(Error::Precondition("Fourier transform acts on functions".into()));
        }
        Ok(())
    }

    pub fn transform(&self, f: &GradedPoly) -> Result<Laurent> {
        Self::check_function(f, &self.shifted)?;
        let (n, r) = (self.n, self.r);
        let m = &self.mixed;
        let map: Vec<usize> = (0..n)
            .chain((0..r).map(|i| n + r + i))
            .chain((0..n).map(|a| m.dim() + a))
            .chain((0..r).map(|i| m.dim() + n + r + i))
            .collect();
        let fm = f.relabel(m, &map)?;
        let mut out: Laurent = BTreeMap::new();
        for subset in 0u32..(1 << r) {
            let mut e = GradedPoly::one(m);
            for i in 0..r {
                if subset & (1 << i) != 0 {
                    let pair = &GradedPoly::symbol(m, n + i) * &GradedPoly::symbol(m, n + r + i);
                    e = &e * &pair;
                }
            }
            let prod = &e * &fm;
            let terms = prod.terms().filter_map(|(mono, c)| {
                if (0..r).all(|i| mono.0[n + r + i] == 1) {
                    let mut d = Monomial::one(self.dual.num_symbols());
                    d.0[..n + r].copy_from_slice(&mono.0[..n + r]);
                    Some((d, c.clone()))
                } else {
                    None
                }
            });
            let g = GradedPoly::from_terms(&self.dual, terms);
            if !g.is_zero() {
                *out.entry(-(subset.count_ones() as i32)).or_insert_with(|| GradedPoly::zero(&self.dual)) += &g;
            }
        }
        out.retain(|_, g| !g.is_zero());
        Ok(out)
    }

    pub fn inverse(&self, g: &GradedPoly) -> Result<Laurent> {
        Self::check_function(g, &self.dual)?;
        let (n, r) = (self.n, self.r);
        let mut out: Laurent = BTreeMap::new();
        for (mono, c) in g.terms() {
            let mut x = Monomial::one(self.shifted.num_symbols());
            x.0[..n].copy_from_slice(&mono.0[..n]);
            let mut eta = Monomial::one(self.shifted.num_symbols());
            let mut j_len = 0;
            for i in 0..r {
                if mono.0[n + i] == 1 {
                    j_len += 1;
                } else {
                    eta.0[n + i] = 1;
                }
            }
            let eta_poly = GradedPoly::from_monomial(&self.shifted, eta, BigRational::one());
            let image = self.transform(&eta_poly)?;
            let lambda = match image.get(&-(j_len as i32)) {
                Some(p) if p.num_terms() == 1 => {
                    let mut xi = Monomial::one(self.dual.num_symbols());
                    xi.0[n..n + r].copy_from_slice(&mono.0[n..n + r]);
                    p.coefficient(&xi)
                }
                _ => BigRational::zero(),
            };
            if lambda.is_zero() {
                return Err(Error::Internal("Fourier transform of a fiber monomial is degenerate".into()));
            }
            let xpoly = GradedPoly::from_monomial(&self.shifted, x, c / &lambda);
            let t = &xpoly * &eta_poly;
            *out.entry(j_len as i32).or_insert_with(|| GradedPoly::zero(&self.shifted)) += &t;
        }
        out.retain(|_, g| !g.is_zero());
        Ok(out)
    }

    /// Canonical isomorphism `eta^I -> berezin_sign(I^c, I) xi^{I^c}`, the
    /// Fourier transform with `hbar` set to one.
    pub fn frame_iso(&self, f: &GradedPoly) -> Result<GradedPoly> {
        Self::check_function(f, &self.shifted)?;
        let (n, r) = (self.n, self.r);
        let mut out = GradedPoly::zero(&self.dual);
        for (mono, c) in f.terms() {
            let idx: Vec<usize> = (0..r).filter(|&i| mono.0[n + i] == 1).collect();
            let comp: Vec<usize> = (0..r).filter(|&i| mono.0[n + i] == 0).collect();
            let mut m = Monomial::one(self.dual.num_symbols());
            m.0[..n].copy_from_slice(&mono.0[..n]);
            for &j in &comp {
                m.0[n + j] = 1;
            }
            out += &GradedPoly::from_monomial(&self.dual, m, c * berezin_sign(&comp, &idx));
        }
        Ok(out)
    }

    pub fn frame_iso_inverse(&self, g: &GradedPoly) -> Result<GradedPoly> {
        Self::check_function(g, &self.dual)?;
        let (n, r) = (self.n, self.r);
        let mut out = GradedPoly::zero(&self.shifted);
        for (mono, c) in g.terms() {
            let comp: Vec<usize> = (0..r).filter(|&i| mono.0[n + i] == 1).collect();
            let idx: Vec<usize> = (0..r).filter(|&i| mono.0[n + i] == 0).collect();
            let mut m = Monomial::one(self.shifted.num_symbols());
            m.0[..n].copy_from_slice(&mono.0[..n]);
            for &i in &idx {
                m.0[n + i] = 1;
            }
            out += &GradedPoly::from_monomial(&self.shifted, m, c / berezin_sign(&comp, &idx));
        }
        Ok(out)
    }
}

fn laurent_add(acc: &mut Laurent, shift: i32, src: &Laurent, ring: &Arc<Ring>) {
    for (k, p) in src {
        *acc.entry(k + shift).or_insert_with(|| GradedPoly::zero(ring)) += p;
    }
}

#[derive(Clone, Debug)]
pub struct FourierQuantization {
    pub structure: PoissonStructure,
    pub delta: HbarOp,
}

/// `Delta = F o L_{hbar D} o F^{-1}` on half-densities of the dual bundle.
pub fn fourier_quantize(sc: &StructureConstants) -> Result<FourierQuantization> {
    let structure = sc.linear_poisson()?;
    let lie = HalfDensityOp::lie_derivative(&sc.ce_vector_field()?)?;
    let fourier = BerezinFourier::new(sc)?;
    let dual = sc.dual.clone();
    let max_order = sc.rank() as u32 + 1;
    let parts = laurent_operator_from_action(&dual, max_order, |s| {
        let mut out: Laurent = BTreeMap::new();
        for (k, u) in fourier.inverse(s)? {
            let v = lie.apply(&u)?;
            if v.is_zero() {
                continue;
            }
            let image = fourier.transform(&v)?;
            laurent_add(&mut out, k + 1, &image, &dual);
        }
        out.retain(|_, g| !g.is_zero());
        Ok(out)
    })?;
    let mut coeffs = BTreeMap::new();
    for (k, op) in parts {
        if k < 0 {
            return Err(Error::Internal(format!("Fourier conjugate has a term at hbar^{k}")));
        }
        coeffs.insert(k as u32, op);
    }
    let delta = HbarOp::new(&dual, coeffs)?;
    Ok(FourierQuantization { structure, delta })
}

/// Action of the algebroid on the top powers of `A` and `T^*M`, as the
/// one-form components `theta_i` of each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebroidFrameData {
    pub top_a_action: Vec<GradedPoly>,
    pub top_cotangent_action: Vec<GradedPoly>,
}

impl AlgebroidFrameData {
    /// `sum_k C^k_ik` and `sum_a d_a rho^a_i` in the coordinate frames.
    pub fn canonical(sc: &StructureConstants) -> Self {
        let r = sc.rank();
        let n = sc.base.dim();
        let mut top_a = Vec::with_capacity(r);
        let mut top_t = Vec::with_capacity(r);
        for i in 0..r {
            let mut a = GradedPoly::zero(&sc.base);
            for k in 0..r {
                let (lo, hi, sign) = if i < k { (i, k, 1) } else { (k, i, -1) };
                if lo != hi {
                    a += &sc.bracket(&[lo, hi], k).scale(&BigRational::from_integer(sign.into()));
                }
            }
            top_a.push(a);
            let rho = sc.anchor(&[i]);
            let mut t = GradedPoly::zero(&sc.base);
            for b in 0..n {
                t += &vector_component(&rho, b).partial(b);
            }
            top_t.push(t);
        }
        AlgebroidFrameData {
            top_a_action: top_a,
            top_cotangent_action: top_t,
        }
    }

    pub fn validate(&self, sc: &StructureConstants) -> Result<()> {
        if *self != AlgebroidFrameData::canonical(sc) {
            return Err(Error::InvalidStructure(
                "declared top-power actions disagree with the algebroid structure".into(),
            ));
        }
        Ok(())
    }

    pub fn theta(&self) -> Vec<GradedPoly> {
        self.top_a_action
            .iter()
            .zip(&self.top_cotangent_action)
            .map(|(a, t)| a + t)
            .collect()
    }
}

/// `(-1)^{m(m-1)/2 + inv(I^c, I)}` with `m = |I^c|`.
pub fn berezin_sign(complement: &[usize], idx: &[usize]) -> BigRational {
    let m = complement.len();
    let inv = complement
        .iter()
        .map(|&j| idx.iter().filter(|&&i| j > i).count())
        .sum::<usize>();
    parity_sign((m * (m.saturating_sub(1)) / 2 + inv) % 2 == 1)
}

#[derive(Clone, Debug)]
pub struct ElwQuantization {
    pub delta: HbarOp,
    /// `Phi o d^ELW o Phi^{-1}`.
    pub bv_part: HalfDensityOp,
    /// `iota_s = s_i d/dxi_i`.
    pub contraction: HalfDensityOp,
    pub square_vanishes: bool,
    pub commutes: bool,
}

/// `Delta = hbar iota_s + hbar^2 Phi o d^ELW o Phi^{-1}` for a Lie algebroid
/// and a closed section `s` of its dual.
pub fn elw_quantize(sc: &StructureConstants, frames: &AlgebroidFrameData, s: &[GradedPoly]) -> Result<ElwQuantization> {
    sc.is_lie_algebroid()?;
    let report = sc.check_linfty()?;
    if !report.passed {
        return Err(Error::NotLInfinity { residual: report.residual });
    }
    frames.validate(sc)?;
    for f in s {
        if !f.ring().same(&sc.base) || !f.is_function() {
            return Err(Error::Precondition("section components must be base functions".into()));
        }
    }
    let dce = sc.ce_differential_of_section(s)?;
    if let Some((_, v)) = dce.into_iter().next() {
        return Err(Error::CocycleViolation { residual: v });
    }
    let n = sc.base.dim();
    let r = sc.rank();
    let shifted = sc.shifted.clone();
    let dual = sc.dual.clone();
    let mut d_elw = sc.ce_vector_field()?;
    for (i, th) in frames.theta().iter().enumerate() {
        let eta = GradedPoly::symbol(&shifted, n + i);
        d_elw += &(&sc.embed(th, &shifted)? * &eta).scale(&rat(1, 2));
    }
    let d_elw = HalfDensityOp::from_normal_form(d_elw);

    let frame = BerezinFourier::new(sc)?;
    let bv_part = operator_from_action(&dual, r as u32 + 1, |g| frame.frame_iso(&d_elw.apply(&frame.frame_iso_inverse(g)?)?))?;
    let mut iota = GradedPoly::zero(&dual);
    for (i, si) in s.iter().enumerate() {
        iota += &(&sc.embed(si, &dual)? * &GradedPoly::symbol(&dual, dual.momentum_index(n + i)));
    }
    let contraction = HalfDensityOp::from_normal_form(iota);
    let delta = HbarOp::term(1, contraction.clone())?.add(&HbarOp::term(2, bv_part.clone())?);
    let square_vanishes = delta.square().is_zero();
    let commutes = bv_part.commutator(&contraction)?.is_zero();
    Ok(ElwQuantization {
        delta,
        bv_part,
        contraction,
        square_vanishes,
        commutes,
    })
}

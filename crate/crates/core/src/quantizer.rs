//! Quantization of derived Poisson structures by successive lifting.
//!
//! `P_hbar` sends a polyvector of weight `n` to `hbar^n` times the operator
//! with the same normal form (the flat-connection PBW map).  `Q_hbar`
//! symmetrizes it: `sum_n hbar^n/2 (D_n + (-1)^n D_n^+)`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hbar::HbarOp;
use crate::linalg;
use crate::operator::{vector_component, HalfDensityOp};
use crate::polyvector::{enumerate_monomials, poisson_bracket, CoboundaryOutcome, PoissonStructure, PolyVector};
use crate::ring::{koszul, rat, GradedPoly, Monomial};

/// Flat-connection PBW quantization.
pub fn pbw_quantize(x: &PolyVector) -> HbarOp {
    let mut out = HbarOp::zero(x.ring());
    for (n, part) in x.weight_parts() {
        let t = HbarOp::term(n, HalfDensityOp::from_normal_form(part)).expect("weight bounds order");
        out = out.add(&t);
    }
    out
}

/// Symmetrized quantization `Q_hbar`.
pub fn q_quantize(x: &PolyVector) -> HbarOp {
    let p = pbw_quantize(x);
    let mut out = HbarOp::zero(x.ring());
    for (&n, op) in p.coeffs() {
        let adj = op.adjoint_by_parts();
        let sym = if n % 2 == 0 { op.add(&adj) } else { op.sub(&adj) };
        let t = HbarOp::term(n, sym.scale(&rat(1, 2))).expect("adjoint keeps the order");
        out = out.add(&t);
    }
    out
}

/// `nabla_X Y = X^a d_a(Y)` for the flat connection of the chart.
fn nabla(x: &PolyVector, y: &PolyVector) -> PolyVector {
    let ring = x.ring();
    let mut out = GradedPoly::zero(ring);
    for a in 0..ring.dim() {
        let xa = vector_component(x, a);
        if !xa.is_zero() {
            out += &(&xa * &y.partial(a));
        }
    }
    out
}

type SymTensor = Vec<(BigRational, Vec<PolyVector>)>;

fn degree_of(x: &PolyVector) -> Result<i32> {
    x.homogeneous_degree()
        .ok_or_else(|| Error::Inhomogeneous { what: "vector field".into() })
}

fn nabla_tensor(x: &PolyVector, ys: &[PolyVector]) -> Result<SymTensor> {
    let dx = degree_of(x)?;
    let mut out = Vec::new();
    let mut before = 0;
    for i in 0..ys.len() {
        let d = nabla(x, &ys[i]);
        if !d.is_zero() {
            let mut t = ys.to_vec();
            t[i] = d;
            out.push((koszul(dx, before), t));
        }
        before += degree_of(&ys[i])?;
    }
    Ok(out)
}

/// The PBW map evaluated by its defining recursion on a symmetric product of
/// homogeneous vector fields.  Kept as an independent check of
/// [`pbw_quantize`].
pub fn pbw_recursive(fields: &[PolyVector]) -> Result<HbarOp> {
    let ring = match fields.first() {
        Some(f) => f.ring().clone(),
        None => return Err(Error::Precondition("empty product".into())),
    };
    fn rec(ring: &std::sync::Arc<crate::ring::Ring>, fields: &[PolyVector]) -> Result<HbarOp> {
        if fields.is_empty() {
            return HbarOp::term(0, HalfDensityOp::identity(ring));
        }
        if fields.len() == 1 {
            return HbarOp::term(1, HalfDensityOp::from_normal_form(fields[0].clone()));
        }
        let n = fields.len();
        let mut total = HbarOp::zero(ring);
        let mut before = 0;
        for k in 0..n {
            let xk = &fields[k];
            let dk = degree_of(xk)?;
            let sign = koszul(dk, before);
            before += dk;
            let rest: Vec<PolyVector> = fields
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, f)| f.clone())
                .collect();
            let inner = rec(ring, &rest)?;
            let mut composed = HbarOp::zero(ring);
            for (&m, op) in inner.coeffs() {
                let c = HalfDensityOp::from_normal_form(xk.clone()).compose(op);
                composed = composed.add(&HbarOp::term(m + 1, c)?);
            }
            let mut corr = HbarOp::zero(ring);
            for (c, t) in nabla_tensor(xk, &rest)? {
                corr = corr.add(&rec(ring, &t)?.scale(&c));
            }
            let term = composed.sub(&corr.mul_hbar(1));
            total = total.add(&term.scale(&sign));
        }
        Ok(total.scale(&rat(1, n as i64)))
    }
    rec(&ring, fields)
}

#[derive(Clone, Debug)]
pub struct LiftRecord {
    pub k: u32,
    pub cocycle: PolyVector,
    pub correction: PolyVector,
}

#[derive(Clone, Debug)]
pub struct QuantizationState {
    pub structure: PoissonStructure,
    pub delta: HbarOp,
    pub k: u32,
    pub history: Vec<LiftRecord>,
}

#[derive(Clone, Debug)]
pub struct Obstruction {
    pub k: u32,
    pub t_index: Option<u32>,
    pub cocycle: PolyVector,
    pub outcome: CoboundaryOutcome,
}

impl Obstruction {
    pub fn is_obstructed(&self) -> bool {
        matches!(self.outcome, CoboundaryOutcome::Obstructed { .. })
    }
}

#[derive(Clone, Debug)]
pub enum LiftOutcome {
    /// The square already vanishes; nothing to lift.
    Flat(QuantizationState),
    Lifted(QuantizationState),
    Obstructed(Obstruction),
}

#[derive(Clone, Debug)]
pub enum QuantizeOutcome {
    Quantized(QuantizationState),
    Obstructed(QuantizationState, Obstruction),
    Exhausted(QuantizationState),
}

impl QuantizationState {
    /// `hbar L_Q + Q_hbar(Pi)` at level `k = 1`.
    pub fn initial(structure: &PoissonStructure) -> Result<Self> {
        let mc = structure.mc_check();
        if !mc.passed {
            let mut residual = GradedPoly::zero(structure.ring());
            for r in mc.residual.values() {
                residual += r;
            }
            return Err(Error::NotMaurerCartan { residual });
        }
        let lq = HbarOp::term(1, HalfDensityOp::lie_derivative(structure.q())?)?;
        let delta = lq.add(&q_quantize(&structure.pi_total()));
        Ok(QuantizationState {
            structure: structure.clone(),
            delta,
            k: 1,
            history: Vec::new(),
        })
    }

    pub fn is_flat(&self) -> bool {
        self.delta.square().is_zero()
    }

    /// The obstruction class at the current level.  A flat state reports the
    /// zero class with `t_index = None`.
    pub fn obstruction(&self) -> Result<Obstruction> {
        let ring = self.structure.ring();
        let omega = self.delta.square();
        let t = match omega.t_index() {
            None => {
                return Ok(Obstruction {
                    k: self.k,
                    t_index: None,
                    cocycle: GradedPoly::zero(ring),
                    outcome: CoboundaryOutcome::Solved(GradedPoly::zero(ring)),
                })
            }
            Some(t) => t,
        };
        let required = 2 * self.k + 1;
        if t < required {
            return Err(Error::Filtration {
                found: t.to_string(),
                required,
            });
        }
        let cocycle = omega.shift_down(required)?.extended_symbol().eval_at_one();
        let closed = self.structure.d_pi(&cocycle)?;
        if !closed.is_zero() {
            return Err(Error::NotACocycle { residual: closed });
        }
        let outcome = if cocycle.is_zero() {
            CoboundaryOutcome::Solved(GradedPoly::zero(ring))
        } else {
            self.structure.solve_coboundary(&cocycle)?
        };
        Ok(Obstruction {
            k: self.k,
            t_index: Some(t),
            cocycle,
            outcome,
        })
    }

    pub fn lift_step(&self) -> Result<LiftOutcome> {
        let ob = self.obstruction()?;
        if ob.t_index.is_none() {
            let mut next = self.clone();
            next.k += 1;
            return Ok(LiftOutcome::Flat(next));
        }
        let x = match &ob.outcome {
            CoboundaryOutcome::Solved(x) => x.clone(),
            CoboundaryOutcome::Obstructed { .. } => return Ok(LiftOutcome::Obstructed(ob)),
        };
        let phi = q_quantize(&x);
        let delta = self.delta.sub(&phi.mul_hbar(2 * self.k));
        let omega = delta.square();
        let required = 2 * self.k + 3;
        if let Some(t) = omega.t_index() {
            if t < required {
                return Err(Error::Filtration {
                    found: t.to_string(),
                    required,
                });
            }
        }
        let mut history = self.history.clone();
        history.push(LiftRecord {
            k: self.k,
            cocycle: ob.cocycle,
            correction: x,
        });
        Ok(LiftOutcome::Lifted(QuantizationState {
            structure: self.structure.clone(),
            delta,
            k: self.k + 1,
            history,
        }))
    }
}

/// Lifts until the square vanishes, an obstruction appears, or the level
/// exceeds `k_max`.
pub fn quantize(structure: &PoissonStructure, k_max: u32) -> Result<QuantizeOutcome> {
    let mut state = QuantizationState::initial(structure)?;
    loop {
        if state.is_flat() {
            return Ok(QuantizeOutcome::Quantized(state));
        }
        if state.k > k_max {
            return Ok(QuantizeOutcome::Exhausted(state));
        }
        match state.lift_step()? {
            LiftOutcome::Flat(s) => return Ok(QuantizeOutcome::Quantized(s)),
            LiftOutcome::Lifted(s) => state = s,
            LiftOutcome::Obstructed(ob) => return Ok(QuantizeOutcome::Obstructed(state, ob)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModularDg {
    /// Order-0 part of `[L_Q, D_2]`.
    pub x0: PolyVector,
    /// Positive-order part of `[L_Q, D_2]`; zero for a dg-Poisson structure.
    pub lq_residual: HalfDensityOp,
    /// `sigma_1(D_2^2)`.
    pub x1: PolyVector,
    pub mc_passed: bool,
    /// Odd function `f` with `{Q,f} = X_0` and `{Pi_2,f} = X_1`, if any.
    pub correction: Option<GradedPoly>,
    /// `hbar L_Q + hbar^2 (D_2 - f)` when `f` exists.
    pub delta: Option<HbarOp>,
    /// Whether the corrected operator squares to zero.
    pub verified: bool,
}

/// The default second-order part `D_2 = Q_hbar(Pi_2) / hbar^2`.
pub fn default_second_order(structure: &PoissonStructure) -> HalfDensityOp {
    q_quantize(&structure.pi(2)).coeff(2)
}

/// Modular-class analysis of `hbar L_Q + hbar^2 D_2` for a structure `Q + Pi_2`.
pub fn modular_dg(structure: &PoissonStructure, d2: &HalfDensityOp) -> Result<ModularDg> {
    if structure.pis().keys().any(|&n| n != 2) {
        return Err(Error::Precondition("modular analysis needs Pi = Pi_2".into()));
    }
    let ring = structure.ring().clone();
    if d2.principal_symbol(2)? != structure.pi(2) {
        return Err(Error::Precondition("sigma_2(D_2) differs from Pi_2".into()));
    }
    if d2.adjoint()? != *d2 {
        return Err(Error::Precondition("D_2 is not self-adjoint".into()));
    }
    let lq = HalfDensityOp::lie_derivative(structure.q())?;
    let c = lq.commutator(d2)?;
    let x0 = c.normal_form().weight_part(0);
    let lq_residual = c.sub(&HalfDensityOp::from_normal_form(x0.clone()));
    let x1 = d2.compose(d2).normal_form().weight_part(1);

    let slice = enumerate_monomials(&ring, 1)
        .into_iter()
        .filter(|m| ring.monomial_weight(m) == 0)
        .collect::<Vec<Monomial>>();
    let mut index: BTreeMap<(u8, Monomial), usize> = BTreeMap::new();
    let mut rows: Vec<BTreeMap<usize, BigRational>> = Vec::new();
    let mut row_of = |key: (u8, Monomial), rows: &mut Vec<BTreeMap<usize, BigRational>>| -> usize {
        let len = rows.len();
        let i = *index.entry(key).or_insert(len);
        if i == rows.len() {
            rows.push(BTreeMap::new());
        }
        i
    };
    for (j, m) in slice.iter().enumerate() {
        let f = GradedPoly::from_monomial(&ring, m.clone(), BigRational::one());
        for (tag, img) in [(0u8, poisson_bracket(structure.q(), &f)?), (1, poisson_bracket(&structure.pi(2), &f)?)] {
            for (mm, cc) in img.terms() {
                let i = row_of((tag, mm.clone()), &mut rows);
                rows[i].insert(j, cc.clone());
            }
        }
    }
    let mut targets = Vec::new();
    for (tag, target) in [(0u8, &x0), (1, &x1)] {
        for (mm, cc) in target.terms() {
            targets.push((row_of((tag, mm.clone()), &mut rows), cc.clone()));
        }
    }
    let mut rhs = vec![BigRational::zero(); rows.len()];
    for (i, c) in targets {
        rhs[i] = c;
    }
    let solution = if lq_residual.is_zero() {
        linalg::solve(slice.len(), &rows, &rhs).solution
    } else {
        None
    };
    let (correction, delta, verified) = match solution {
        None => (None, None, false),
        Some(x) => {
            let f = GradedPoly::from_terms(&ring, slice.into_iter().zip(x));
            let fop = HalfDensityOp::multiplication(&f)?;
            let delta = HbarOp::term(1, lq.clone())?.add(&HbarOp::term(2, d2.sub(&fop))?);
            let verified = delta.square().is_zero();
            (Some(f), Some(delta), verified)
        }
    };
    Ok(ModularDg {
        x0,
        lq_residual,
        x1,
        mc_passed: structure.mc_check().passed,
        correction,
        delta,
        verified,
    })
}

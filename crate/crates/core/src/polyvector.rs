//! Polyvector fields, the degree-0 Schouten bracket and Poisson structures.
//!
//! A polyvector field is a [`GradedPoly`] whose momentum `p_a` stands for the
//! vector field `d/dx^a`; its weight is the polynomial degree in momenta.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::ring::{parity_sign, GradedPoly, Monomial, Ring, SymbolKind, TruncationBounds};

pub type PolyVector = GradedPoly;

/// `{F,G} = sum_a (F <d_{p_a})(d_{x^a}> G) - (-1)^{|a|} (F <d_{x^a})(d_{p_a}> G)`.
pub fn poisson_bracket(f: &PolyVector, g: &PolyVector) -> Result<PolyVector> {
    if !f.ring().same(g.ring()) {
        return Err(Error::RingMismatch);
    }
    let ring = f.ring().clone();
    let mut out = GradedPoly::zero(&ring);
    for a in 0..ring.dim() {
        let pa = ring.momentum_index(a);
        let t1 = f.right_partial_symbol(pa);
        if !t1.is_zero() {
            let t2 = g.left_partial_symbol(a);
            if !t2.is_zero() {
                out += &(&t1 * &t2);
            }
        }
        let s1 = f.right_partial_symbol(a);
        if !s1.is_zero() {
            let s2 = g.left_partial_symbol(pa);
            if !s2.is_zero() {
                let prod = &s1 * &s2;
                out -= &prod.scale(&parity_sign(ring.symbol_odd(a)));
            }
        }
    }
    Ok(out)
}

/// Checks that a polyvector is homogeneous of the given weight and degree.
pub fn check_shape(x: &PolyVector, what: &str, weight: u32, degree: i32) -> Result<()> {
    for (m, _) in x.terms() {
        let w = x.ring().monomial_weight(m);
        if w != weight {
            return Err(Error::WrongWeight {
                what: what.to_string(),
                expected: weight,
                found: w,
            });
        }
        let d = x.ring().monomial_degree(m);
        if d != degree {
            return Err(Error::WrongDegree {
                what: what.to_string(),
                expected: degree,
                found: d,
            });
        }
    }
    Ok(())
}

/// `Q + sum_n Pi_n` on a graded manifold: `Q` of weight 1, `Pi_n` of weight `n >= 2`,
/// all of degree 1.
#[derive(Clone, Debug)]
pub struct PoissonStructure {
    ring: Arc<Ring>,
    q: PolyVector,
    pis: BTreeMap<u32, PolyVector>,
}

#[derive(Clone, Debug)]
pub struct McReport {
    pub passed: bool,
    /// Nonzero weight components of `1/2 {Q + Pi, Q + Pi}`.
    pub residual: BTreeMap<u32, PolyVector>,
}

#[derive(Clone, Debug)]
pub enum CoboundaryOutcome {
    Solved(PolyVector),
    Obstructed {
        unknowns: usize,
        equations: usize,
        rank: usize,
    },
}

impl PoissonStructure {
    pub fn new(ring: &Arc<Ring>, q: PolyVector, pis: BTreeMap<u32, PolyVector>) -> Result<Self> {
        if !q.ring().same(ring) {
            return Err(Error::RingMismatch);
        }
        check_shape(&q, "Q", 1, 1)?;
        let mut kept = BTreeMap::new();
        for (n, pi) in pis {
            if n < 2 {
                return Err(Error::InvalidStructure(format!("Pi[{n}]: arity must be at least 2")));
            }
            if !pi.ring().same(ring) {
                return Err(Error::RingMismatch);
            }
            check_shape(&pi, &format!("Pi[{n}]"), n, 1)?;
            if !pi.is_zero() {
                kept.insert(n, pi);
            }
        }
        Ok(PoissonStructure {
            ring: ring.clone(),
            q,
            pis: kept,
        })
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn q(&self) -> &PolyVector {
        &self.q
    }

    pub fn pis(&self) -> &BTreeMap<u32, PolyVector> {
        &self.pis
    }

    pub fn pi(&self, n: u32) -> PolyVector {
        self.pis.get(&n).cloned().unwrap_or_else(|| GradedPoly::zero(&self.ring))
    }

    pub fn pi_total(&self) -> PolyVector {
        let mut out = GradedPoly::zero(&self.ring);
        for p in self.pis.values() {
            out += p;
        }
        out
    }

    pub fn total(&self) -> PolyVector {
        &self.q + &self.pi_total()
    }

    pub fn mc_check(&self) -> McReport {
        let t = self.total();
        let half = BigRational::new(1.into(), 2.into());
        let r = poisson_bracket(&t, &t).expect("same ring").scale(&half);
        let residual: BTreeMap<u32, PolyVector> = r.weight_parts().into_iter().collect();
        McReport {
            passed: residual.is_empty(),
            residual,
        }
    }

    /// `d_Pi X = {Q + Pi, X}`.
    pub fn d_pi(&self, x: &PolyVector) -> Result<PolyVector> {
        poisson_bracket(&self.total(), x)
    }

    /// Same structure in a ring with the same coordinates and other bounds.
    pub fn rebase(&self, ring: &Arc<Ring>) -> Result<Self> {
        Ok(PoissonStructure {
            ring: ring.clone(),
            q: self.q.rebase(ring)?,
            pis: self
                .pis
                .iter()
                .map(|(&n, p)| Ok((n, p.rebase(ring)?)))
                .collect::<Result<_>>()?,
        })
    }

    /// Finds `X` of degree `|S| - 1` with `d_Pi X = S`, searching the monomial
    /// slice allowed by the ring bounds.
    pub fn solve_coboundary(&self, s: &PolyVector) -> Result<CoboundaryOutcome> {
        let degree = s
            .homogeneous_degree()
            .ok_or_else(|| Error::Inhomogeneous { what: "cocycle".into() })?;
        let residual = self.d_pi(s)?;
        if !residual.is_zero() {
            return Err(Error::NotACocycle { residual });
        }
        let ring = &self.ring;
        let slice = enumerate_monomials(ring, degree - 1);
        let bounds = ring.bounds();
        let (mut extra_w, mut extra_g, mut extra_p) = (0, 0, 0);
        for (m, _) in self.total().terms() {
            let (w, g, p) = ring.monomial_budgets(m);
            extra_w = extra_w.max(w);
            extra_g = extra_g.max(g);
            extra_p = extra_p.max(p);
        }
        let big = ring.with_bounds(TruncationBounds {
            weight_max: bounds.weight_max + extra_w,
            base_degree_max: bounds.base_degree_max + extra_g,
            poly_degree_max: Some(bounds.poly_cap() + extra_p),
            hbar_max: bounds.hbar_max,
        });
        let structure = self.rebase(&big)?;
        let target = s.rebase(&big)?;
        let mut row_index: BTreeMap<Monomial, usize> = BTreeMap::new();
        let mut rows: Vec<BTreeMap<usize, BigRational>> = Vec::new();
        fn row_of(
            index: &mut BTreeMap<Monomial, usize>,
            m: &Monomial,
            rows: &mut Vec<BTreeMap<usize, BigRational>>,
        ) -> usize {
            *index.entry(m.clone()).or_insert_with(|| {
                rows.push(BTreeMap::new());
                rows.len() - 1
            })
        }
        for (j, m) in slice.iter().enumerate() {
            let col = structure.d_pi(&GradedPoly::from_monomial(&big, m.clone(), BigRational::one()))?;
            for (mm, c) in col.terms() {
                let i = row_of(&mut row_index, mm, &mut rows);
                rows[i].insert(j, c.clone());
            }
        }
        for (mm, _) in target.terms() {
            row_of(&mut row_index, mm, &mut rows);
        }
        let mut rhs = vec![BigRational::zero(); rows.len()];
        for (mm, c) in target.terms() {
            rhs[row_index[mm]] = c.clone();
        }
        let result = linalg::solve(slice.len(), &rows, &rhs);
        match result.solution {
            None => Ok(CoboundaryOutcome::Obstructed {
                unknowns: slice.len(),
                equations: rows.len(),
                rank: result.rank,
            }),
            Some(x) => {
                let sol = GradedPoly::from_terms(ring, slice.into_iter().zip(x));
                let check = structure.d_pi(&sol.rebase(&big)?)?;
                if check != target {
                    return Err(Error::Internal("coboundary solution fails verification".into()));
                }
                Ok(CoboundaryOutcome::Solved(sol))
            }
        }
    }
}

/// All monomials of the given degree that survive the ring's truncation.
pub fn enumerate_monomials(ring: &Arc<Ring>, degree: i32) -> Vec<Monomial> {
    let b = ring.bounds();
    let mut out = Vec::new();
    let mut cur = vec![0u32; ring.num_symbols()];
    fn rec(
        ring: &Ring,
        s: usize,
        cur: &mut Vec<u32>,
        budgets: (u32, u32, u32),
        deg: i32,
        target: i32,
        out: &mut Vec<Monomial>,
    ) {
        if s == ring.num_symbols() {
            if deg == target {
                out.push(Monomial(cur.clone()));
            }
            return;
        }
        let (w, g, p) = budgets;
        let max = if ring.symbol_odd(s) {
            1
        } else {
            match ring.symbol_kind(s) {
                SymbolKind::Momentum => w,
                SymbolKind::GradedBase => g,
                SymbolKind::PolyBase => p,
                SymbolKind::OddBase => 1,
            }
        };
        let max = match ring.symbol_kind(s) {
            SymbolKind::Momentum => max.min(w),
            _ => max,
        };
        for e in 0..=max {
            let nb = match ring.symbol_kind(s) {
                SymbolKind::Momentum => (w - e, g, p),
                SymbolKind::GradedBase => (w, g - e, p),
                SymbolKind::PolyBase => (w, g, p - e),
                SymbolKind::OddBase => (w, g, p),
            };
            cur[s] = e;
            rec(ring, s + 1, cur, nb, deg + e as i32 * ring.symbol_degree(s), target, out);
        }
        cur[s] = 0;
    }
    rec(
        ring,
        0,
        &mut cur,
        (b.weight_max, b.base_degree_max, b.poly_cap()),
        0,
        degree,
        &mut out,
    );
    out
}

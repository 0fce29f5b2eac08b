//! Exact sparse linear solving over the rationals.
//!
//! Elimination is fraction-free over the integers: every equation is scaled to
//! an integer row with unit content before pivoting.  Pivots are taken in
//! unknown order, and free unknowns are set to zero, so the returned solution
//! is canonical.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub solution: Option<Vec<BigRational>>,
    pub rank: usize,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: BTreeMap<usize, BigInt>,
    rhs: BigInt,
}

impl Row {
    fn from_rational(coeffs: &BTreeMap<usize, BigRational>, rhs: &BigRational) -> Row {
        let mut l = rhs.denom().clone();
        for c in coeffs.values() {
            l = l.lcm(c.denom());
        }
        let scale = |c: &BigRational| (c * BigRational::from_integer(l.clone())).to_integer();
        let mut row = Row {
            coeffs: coeffs
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(&k, c)| (k, scale(c)))
                .collect(),
            rhs: scale(rhs),
        };
        row.normalize();
        row
    }

    fn normalize(&mut self) {
        let mut g = self.rhs.abs();
        for c in self.coeffs.values() {
            g = g.gcd(c);
        }
        if g.is_zero() || g.is_one() {
            return;
        }
        for c in self.coeffs.values_mut() {
            *c /= &g;
        }
        self.rhs /= &g;
    }

    /// self <- a*self - b*other, eliminating unknown `col`.
    fn eliminate(&mut self, other: &Row, col: usize) {
        let b = match self.coeffs.get(&col) {
            Some(b) => b.clone(),
            None => return,
        };
        let a = other.coeffs[&col].clone();
        let g = a.gcd(&b);
        let (a, b) = (&a / &g, &b / &g);
        for c in self.coeffs.values_mut() {
            *c *= &a;
        }
        self.rhs *= &a;
        for (&k, v) in &other.coeffs {
            let e = self.coeffs.entry(k).or_insert_with(BigInt::zero);
            *e -= &b * v;
            if e.is_zero() {
                self.coeffs.remove(&k);
            }
        }
        self.rhs -= &b * &other.rhs;
        self.normalize();
    }
}

/// Solves the sparse system `rows[i] . x = rhs[i]` in `num_unknowns` unknowns.
pub fn solve(
    num_unknowns: usize,
    rows: &[BTreeMap<usize, BigRational>],
    rhs: &[BigRational],
) -> SolveResult {
    assert_eq!(rows.len(), rhs.len());
    let mut eqs: Vec<Row> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| Row::from_rational(r, b))
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; eqs.len()];
    for col in 0..num_unknowns {
        let p = match (0..eqs.len()).find(|&i| !used[i] && eqs[i].coeffs.contains_key(&col)) {
            Some(p) => p,
            None => continue,
        };
        used[p] = true;
        let pivot_row = eqs[p].clone();
        for (i, eq) in eqs.iter_mut().enumerate() {
            if i != p {
                eq.eliminate(&pivot_row, col);
            }
        }
        pivots.push((p, col));
    }
    let rank = pivots.len();
    if eqs.iter().any(|e| e.coeffs.is_empty() && !e.rhs.is_zero()) {
        return SolveResult {
            solution: None,
            rank,
        };
    }
    let mut x = vec![BigRational::zero(); num_unknowns];
    for (p, col) in pivots {
        let row = &eqs[p];
        x[col] = BigRational::new(row.rhs.clone(), row.coeffs[&col].clone());
    }
    SolveResult {
        solution: Some(x),
        rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{int, rat};

    fn row(entries: &[(usize, BigRational)]) -> BTreeMap<usize, BigRational> {
        entries.iter().cloned().collect()
    }

    #[test]
    fn solves_square_system() {
        // x + y = 3, x - y = 1/2
        let rows = vec![row(&[(0, int(1)), (1, int(1))]), row(&[(0, int(1)), (1, int(-1))])];
        let r = solve(2, &rows, &[int(3), rat(1, 2)]);
        assert_eq!(r.solution.unwrap(), vec![rat(7, 4), rat(5, 4)]);
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn free_unknowns_are_zero() {
        let rows = vec![row(&[(0, int(1)), (1, int(2))])];
        let r = solve(2, &rows, &[int(4)]);
        assert_eq!(r.solution.unwrap(), vec![int(4), int(0)]);
    }

    #[test]
    fn detects_inconsistency() {
        let rows = vec![row(&[(0, int(2))]), row(&[(0, int(4))])];
        let r = solve(1, &rows, &[int(1), int(3)]);
        assert!(r.solution.is_none());
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn random_consistent_systems_are_solved() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..6);
            let m = rng.gen_range(1..7);
            let truth: Vec<BigRational> = (0..n).map(|_| rat(rng.gen_range(-5..6), rng.gen_range(1..4))).collect();
            let rows: Vec<BTreeMap<usize, BigRational>> = (0..m)
                .map(|_| {
                    let mut r = BTreeMap::new();
                    for j in 0..n {
                        if rng.gen_bool(0.6) {
                            r.insert(j, rat(rng.gen_range(-4..5), rng.gen_range(1..3)));
                        }
                    }
                    r
                })
                .collect();
            let rhs: Vec<BigRational> = rows
                .iter()
                .map(|r| r.iter().map(|(&j, c)| c * &truth[j]).fold(BigRational::zero(), |a, b| a + b))
                .collect();
            let x = solve(n, &rows, &rhs).solution.expect("consistent");
            for (r, b) in rows.iter().zip(&rhs) {
                let lhs = r.iter().map(|(&j, c)| c * &x[j]).fold(BigRational::zero(), |a, b| a + b);
                assert_eq!(&lhs, b);
            }
        }
    }
}

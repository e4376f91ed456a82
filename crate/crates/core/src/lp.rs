//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Solves `minimize cᵀx  subject to  A x ≤ b, x ≥ 0` and reports the row
//! multipliers `λ ≥ 0` of `A x ≤ b`, so that at an optimum
//! `cᵀx = -bᵀλ` and `c + Aᵀλ ≥ 0`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_PIVOTS: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<S> {
    pub x: Vec<S>,
    pub objective: S,
    /// Multipliers of the `≤` rows, nonnegative.
    pub duals: Vec<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<S> {
    Optimal(LpSolution<S>),
    Infeasible,
    /// The objective decreases without bound along the given column.
    Unbounded { column: usize },
}

impl<S> LpOutcome<S> {
    pub fn optimal(self) -> Option<LpSolution<S>> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

struct Tableau<S> {
    rows: usize,
    width: usize,
    // rows × width, last column is the right-hand side
    t: Vec<S>,
    // reduced costs, last entry is minus the objective value
    cost: Vec<S>,
    basis: Vec<usize>,
    enterable: Vec<bool>,
    eps: S,
}

impl<S: Scalar> Tableau<S> {
    #[inline]
    fn at(&self, i: usize, j: usize) -> S {
        self.t[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> S {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for j in 0..w {
            self.t[r * w + j] = self.t[r * w + j] / p;
        }
        self.t[r * w + c] = S::one();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f == S::zero() {
                continue;
            }
            for j in 0..w {
                let v = self.t[r * w + j];
                if v != S::zero() {
                    self.t[i * w + j] = self.t[i * w + j] - f * v;
                }
            }
            self.t[i * w + c] = S::zero();
        }
        let f = self.cost[c];
        if f != S::zero() {
            for j in 0..w {
                let v = self.t[r * w + j];
                if v != S::zero() {
                    self.cost[j] = self.cost[j] - f * v;
                }
            }
            self.cost[c] = S::zero();
        }
        self.basis[r] = c;
    }

    /// Bland: lowest-index improving column, then the lowest-index basic
    /// variable among tied ratios.
    fn run(&mut self) -> Result<Option<usize>> {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..self.width - 1).find(|&j| self.enterable[j] && self.cost[j] < -self.eps);
            let Some(c) = entering else {
                return Ok(None);
            };
            let mut leave: Option<(usize, S)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > self.eps {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - self.eps * (S::one() + best.abs()) {
                                Some((i, ratio))
                            } else if ratio <= best + self.eps * (S::one() + best.abs())
                                && self.basis[i] < self.basis[k]
                            {
                                Some((i, ratio.min(best)))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(Some(c)),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        Err(Error::NonConvergence("simplex pivot limit reached".into()))
    }

    fn set_costs(&mut self, c: &[S]) {
        self.cost = vec![S::zero(); self.width];
        self.cost[..c.len()].copy_from_slice(c);
        for i in 0..self.rows {
            let cb = self.cost_of(c, self.basis[i]);
            if cb == S::zero() {
                continue;
            }
            for j in 0..self.width {
                self.cost[j] = self.cost[j] - cb * self.at(i, j);
            }
        }
    }

    fn cost_of(&self, c: &[S], j: usize) -> S {
        c.get(j).copied().unwrap_or(S::zero())
    }
}

/// Minimize `cᵀx` subject to `A x ≤ b`, `x ≥ 0`.
pub fn lp_min<S: Scalar>(c: &[S], a: &[Vec<S>], b: &[S]) -> Result<LpOutcome<S>> {
    let n = c.len();
    let m = a.len();
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: b.len() });
    }
    for row in a {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
    }
    if c.iter().chain(b).chain(a.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite LP data".into()));
    }

    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < S::zero()).collect();
    let k = negative.len();
    let width = n + m + k + 1;
    let mut t = vec![S::zero(); m * width];
    let mut basis = vec![0; m];
    let mut art = 0;
    for i in 0..m {
        let sign = if b[i] < S::zero() { -S::one() } else { S::one() };
        for j in 0..n {
            t[i * width + j] = sign * a[i][j];
        }
        t[i * width + n + i] = sign;
        t[i * width + width - 1] = sign * b[i];
        if b[i] < S::zero() {
            t[i * width + n + m + art] = S::one();
            basis[i] = n + m + art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let scale = c
        .iter()
        .chain(b)
        .chain(a.iter().flatten())
        .fold(S::one(), |acc, v| acc.max(v.abs()));
    let mut tab = Tableau {
        rows: m,
        width,
        t,
        cost: Vec::new(),
        basis,
        enterable: vec![true; width - 1],
        eps: S::tol() * scale.sqrt().max(S::one()) * S::of(10.0),
    };

    if k > 0 {
        let mut phase1 = vec![S::zero(); n + m + k];
        for v in phase1[n + m..].iter_mut() {
            *v = S::one();
        }
        tab.set_costs(&phase1);
        if tab.run()?.is_some() {
            return Err(Error::NonConvergence("phase one unbounded".into()));
        }
        let infeasibility = -tab.cost[width - 1];
        if infeasibility > tab.eps * S::of_usize(m.max(1)) * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive zero-valued artificials out of the basis.
        for i in 0..m {
            if tab.basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| tab.at(i, j).abs() > tab.eps) {
                    tab.pivot(i, j);
                }
            }
        }
        for j in n + m..n + m + k {
            tab.enterable[j] = false;
        }
    }

    tab.set_costs(c);
    if let Some(column) = tab.run()? {
        return Ok(LpOutcome::Unbounded { column });
    }

    let mut x = vec![S::zero(); n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).max(S::zero());
        }
    }
    let objective = c.iter().zip(&x).map(|(&ci, &xi)| ci * xi).sum();
    let duals = (0..m).map(|i| tab.cost[n + i].max(S::zero())).collect();
    Ok(LpOutcome::Optimal(LpSolution { x, objective, duals }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome<f64> {
        lp_min(c, a, b).unwrap()
    }

    #[test]
    fn minimize_with_lower_bound() {
        // x ≥ 3  ⇔  -x ≤ -3
        let s = solve(&[1.0], &[vec![-1.0]], &[-3.0]).optimal().unwrap();
        assert!((s.objective - 3.0).abs() < 1e-12);
        assert!((s.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minimize_sum_over_simplex_cut() {
        let s = solve(&[1.0, 1.0], &[vec![-1.0, -1.0]], &[-1.0]).optimal().unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        // x ≤ -1 with x ≥ 0
        assert_eq!(solve(&[1.0], &[vec![1.0]], &[-1.0]), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        assert_eq!(
            solve(&[-1.0, 0.0], &[vec![0.0, 1.0]], &[1.0]),
            LpOutcome::Unbounded { column: 0 }
        );
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y  s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  → 36 at (2, 6)
        let s = solve(
            &[-3.0, -5.0],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[4.0, 12.0, 18.0],
        )
        .optimal()
        .unwrap();
        assert!((s.objective + 36.0).abs() < 1e-10);
        assert!((s.x[0] - 2.0).abs() < 1e-10 && (s.x[1] - 6.0).abs() < 1e-10);
        // strong duality
        let dual_obj: f64 = -(4.0 * s.duals[0] + 12.0 * s.duals[1] + 18.0 * s.duals[2]);
        assert!((dual_obj - s.objective).abs() < 1e-10);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example, which loops under Dantzig's rule.
        let c = [-0.75, 150.0, -0.02, 6.0];
        let a = vec![
            vec![0.25, -60.0, -0.04, 9.0],
            vec![0.5, -90.0, -0.02, 3.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let s = solve(&c, &a, &[0.0, 0.0, 1.0]).optimal().unwrap();
        assert!((s.objective + 0.05).abs() < 1e-10);
    }

    #[test]
    fn single_precision() {
        let s = lp_min::<f32>(&[1.0, 1.0], &[vec![-1.0, -2.0]], &[-2.0]).unwrap().optimal().unwrap();
        assert!((s.objective - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(lp_min::<f64>(&[1.0, 1.0], &[vec![1.0]], &[1.0]).is_err());
    }
}

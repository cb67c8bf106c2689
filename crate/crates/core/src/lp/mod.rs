//! Linear programs: the capacitated k-median relaxation, a general dense
//! simplex, and the fixed-center transportation subproblem.

mod simplex;
mod transport;

use alloc::vec;
use alloc::vec::Vec;

pub use transport::{solve_transportation, transport, Transport};

use crate::error::{Error, Result};
use crate::model::{FractionalSolution, Instance, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// A sparse row `Σ terms (sense) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `min objective · v` over rows and per-variable `(lower, upper)` bounds.
/// Infinite bounds are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); num_vars],
        }
    }

    pub fn push(&mut self, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { terms, sense, rhs });
    }

    /// Objective value of a candidate point.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(v, a)| a * values[v]).sum();
            let viol = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for (v, &(lo, hi)) in values.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }

    pub(crate) fn check(&self) -> Result<()> {
        for (what, len) in [
            ("objective", self.objective.len()),
            ("bounds", self.bounds.len()),
        ] {
            if len != self.num_vars {
                return Err(Error::Dimension {
                    what,
                    expected: self.num_vars,
                    found: len,
                });
            }
        }
        let finite = self.objective.iter().all(|c| c.is_finite())
            && self.constraints.iter().all(|c| {
                c.rhs.is_finite()
                    && c.terms
                        .iter()
                        .all(|&(v, a)| a.is_finite() && v < self.num_vars)
            })
            && self.bounds.iter().all(|&(lo, hi)| lo <= hi);
        if !finite {
            return Err(Error::Precondition(
                "LP has a non-finite coefficient, an out-of-range variable or empty bounds".into(),
            ));
        }
        Ok(())
    }
}

/// Solves `p` to optimality.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    simplex::solve(p)
}

/// Variable layout of the relaxation: `x_ij` at `i·n + j`, then `y_i`.
#[derive(Debug, Clone, Copy)]
pub struct CkmLayout {
    pub n: usize,
}

impl CkmLayout {
    #[inline]
    pub fn x(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    #[inline]
    pub fn y(&self, i: usize) -> usize {
        self.n * self.n + i
    }

    pub fn num_vars(&self) -> usize {
        self.n * self.n + self.n
    }
}

/// The LP relaxation:
///
/// ```text
/// min Σ d_j c_ij x_ij
///   Σ_i x_ij = 1            ∀j
///   Σ_j d_j x_ij ≤ M y_i    ∀i
///   Σ_i y_i ≤ k
///   x_ij ≤ y_i              ∀i,j
///   x ≥ 0, 0 ≤ y ≤ 1
/// ```
pub fn build_ckm_lp(inst: &Instance) -> LpProblem {
    let n = inst.n();
    let lay = CkmLayout { n };
    let mut p = LpProblem::new(lay.num_vars());
    let d = inst.demand();
    for i in 0..n {
        for j in 0..n {
            p.objective[lay.x(i, j)] = d[j] * inst.cost(i, j);
        }
        p.bounds[lay.y(i)] = (0.0, 1.0);
    }
    for j in 0..n {
        p.push((0..n).map(|i| (lay.x(i, j), 1.0)).collect(), Sense::Eq, 1.0);
    }
    for i in 0..n {
        let mut terms: Vec<(usize, f64)> = (0..n)
            .filter(|&j| d[j] != 0.0)
            .map(|j| (lay.x(i, j), d[j]))
            .collect();
        terms.push((lay.y(i), -inst.capacity()));
        p.push(terms, Sense::Le, 0.0);
    }
    p.push(
        (0..n).map(|i| (lay.y(i), 1.0)).collect(),
        Sense::Le,
        inst.budget() as f64,
    );
    for i in 0..n {
        for j in 0..n {
            p.push(vec![(lay.x(i, j), 1.0), (lay.y(i), -1.0)], Sense::Le, 0.0);
        }
    }
    p
}

/// Solves the relaxation of `inst` and returns the cleaned optimum.
pub fn solve_relaxation(inst: &Instance) -> Result<FractionalSolution> {
    let n = inst.n();
    let lay = CkmLayout { n };
    let sol = solve_lp(&build_ckm_lp(inst))?;
    let mut x = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            x[(i, j)] = sol.values[lay.x(i, j)];
        }
    }
    let y = (0..n).map(|i| sol.values[lay.y(i)]).collect();
    FractionalSolution::from_lp(inst, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_points(d: [f64; 2], m: f64, k: usize) -> Instance {
        Instance::new(
            Matrix::from_rows(vec![vec![0.0, 10.0], vec![10.0, 0.0]]).unwrap(),
            d.to_vec(),
            m,
            k,
        )
        .unwrap()
    }

    #[test]
    fn relaxation_shapes() {
        let one = Instance::new(Matrix::zeros(1, 1), vec![1.0], 2.0, 1).unwrap();
        let p = build_ckm_lp(&one);
        assert_eq!(p.num_vars, 2);
        assert_eq!(p.constraints.len(), 1 + 1 + 1 + 1);

        let p = build_ckm_lp(&two_points([1.0, 1.0], 2.0, 1));
        assert_eq!(p.num_vars, 6);
        let count = |s: Sense| p.constraints.iter().filter(|c| c.sense == s).count();
        assert_eq!(count(Sense::Eq), 2);
        // 2 capacity rows + 1 budget row + 4 coupling rows
        assert_eq!(count(Sense::Le), 2 + 1 + 4);

        let three = Instance::new(Matrix::zeros(3, 3), vec![1.0; 3], 3.0, 1).unwrap();
        let p = build_ckm_lp(&three);
        assert_eq!(p.num_vars, 12);
        assert_eq!(p.constraints.len(), 3 + 3 + 1 + 9);
    }

    #[test]
    fn single_location_forces_self_service() {
        let inst = Instance::new(Matrix::zeros(1, 1), vec![0.5], 1.0, 1).unwrap();
        let sol = solve_lp(&build_ckm_lp(&inst)).unwrap();
        assert_eq!(sol.values[0], 1.0);
        // x_00 ≤ y_0 forces y_0 = 1 whatever the demand.
        assert!((sol.values[1] - 1.0).abs() < 1e-12);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn full_demand_single_location() {
        let inst = Instance::new(Matrix::zeros(1, 1), vec![3.0], 3.0, 1).unwrap();
        let f = solve_relaxation(&inst).unwrap();
        assert_eq!(f.objective, 0.0);
        assert_eq!(f.y, vec![1.0]);
    }

    #[test]
    fn two_points_one_center() {
        let f = solve_relaxation(&two_points([1.0, 1.0], 2.0, 1)).unwrap();
        assert!((f.objective - 10.0).abs() < 1e-9);
    }

    #[test]
    fn two_points_two_centers() {
        let f = solve_relaxation(&two_points([1.0, 1.0], 1.0, 2)).unwrap();
        assert!(f.objective.abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut p = LpProblem::new(1);
        p.push(vec![(0, 1.0)], Sense::Ge, 2.0);
        p.bounds[0] = (0.0, 1.0);
        assert_eq!(solve_lp(&p), Err(Error::Infeasible));

        let mut p = LpProblem::new(1);
        p.objective[0] = -1.0;
        p.push(vec![(0, 1.0)], Sense::Ge, 0.0);
        assert_eq!(solve_lp(&p), Err(Error::Unbounded));
    }

    #[test]
    fn free_and_mirrored_variables() {
        // min x0 - x1  s.t. x0 + x1 = 1, x0 free and ≥ -3 via a row, x1 ≤ 2 with no lower bound
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, -1.0];
        p.bounds = vec![(f64::NEG_INFINITY, f64::INFINITY), (f64::NEG_INFINITY, 2.0)];
        p.push(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0);
        p.push(vec![(0, 1.0)], Sense::Ge, -3.0);
        let s = solve_lp(&p).unwrap();
        assert!((s.values[0] + 1.0).abs() < 1e-12);
        assert!((s.values[1] - 2.0).abs() < 1e-12);
        assert!((s.objective + 3.0).abs() < 1e-12);
        assert!((p.evaluate(&s.values) - s.objective).abs() < 1e-12);
    }

    #[test]
    fn rejects_malformed_problem() {
        let mut p = LpProblem::new(1);
        p.objective[0] = f64::NAN;
        assert!(matches!(solve_lp(&p), Err(Error::Precondition(_))));
        let mut p = LpProblem::new(1);
        p.objective.push(0.0);
        assert!(matches!(solve_lp(&p), Err(Error::Dimension { .. })));
    }
}

//! Exact baselines for small instances.
//!
//! The integral optimum is found by enumerating center sets and routing
//! demand optimally onto each by transportation. Opening an extra center
//! only adds capacity, so some optimum uses exactly `min(k, n)` centers and
//! only sets of that size are enumerated. A set is skipped when its
//! uncapacitated routing cost already reaches the best cost found.

use alloc::vec;
use alloc::vec::Vec;

use crate::ckl::CklInstance;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, transport, LpProblem, Sense};
use crate::model::{Instance, Matrix};

/// Largest instance [`exact_opt`] and [`exact_ckl_opt`] accept.
pub const MAX_EXACT_N: usize = 16;
/// Largest instance [`exact_lp_check`] accepts.
pub const MAX_LP_CHECK_N: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    /// Opened candidates, ascending.
    pub open: Vec<usize>,
    /// `assign[(candidate, sink)]`, zero outside `open`.
    pub assign: Matrix,
    pub cost: f64,
}

/// Calls `f` on every `size`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, size: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if size > n {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        f(&idx)?;
        let Some(p) = (0..size).rev().find(|&p| idx[p] < n - size + p) else {
            return Ok(());
        };
        idx[p] += 1;
        for q in p + 1..size {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Minimum-cost transportation over all `min(k, rows)`-sets of rows of
/// `cost`, each carrying at most `cap`.
fn enumerate(cost: &Matrix, demand: &[f64], cap: f64, k: usize) -> Result<ExactSolution> {
    let (rows, sinks) = (cost.rows(), cost.cols());
    let size = k.min(rows);
    let total: f64 = demand.iter().sum();
    if total > cap * size as f64 + crate::TOL {
        return Err(Error::Infeasible);
    }
    let mut best: Option<ExactSolution> = None;
    for_each_subset(rows, size, |set| {
        let lower: f64 = (0..sinks)
            .map(|j| {
                let c = set
                    .iter()
                    .map(|&i| cost[(i, j)])
                    .fold(f64::INFINITY, f64::min);
                demand[j] * c
            })
            .sum();
        if best.as_ref().is_some_and(|b| lower >= b.cost) {
            return Ok(());
        }
        let mut sub = Matrix::zeros(set.len(), sinks);
        for (s, &i) in set.iter().enumerate() {
            sub.row_mut(s).copy_from_slice(cost.row(i));
        }
        let t = transport(&sub, demand, cap)?;
        if best.as_ref().is_none_or(|b| t.cost < b.cost) {
            let mut assign = Matrix::zeros(rows, sinks);
            for (s, &i) in set.iter().enumerate() {
                assign.row_mut(i).copy_from_slice(t.assign.row(s));
            }
            best = Some(ExactSolution {
                open: set.to_vec(),
                assign,
                cost: t.cost,
            });
        }
        Ok(())
    })?;
    best.ok_or(Error::Infeasible)
}

/// Optimal integral solution with every center's capacity scaled to
/// `cap_scale · M`.
pub fn exact_opt(inst: &Instance, cap_scale: f64) -> Result<ExactSolution> {
    let n = inst.n();
    if n > MAX_EXACT_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_EXACT_N,
        });
    }
    enumerate(
        inst.cost_matrix(),
        inst.demand(),
        cap_scale * inst.capacity(),
        inst.budget(),
    )
}

/// Optimal integral facility/client solution, enumerating facility sets.
pub fn exact_ckl_opt(ckl: &CklInstance, cap_scale: f64) -> Result<ExactSolution> {
    let f = ckl.facilities();
    if f > MAX_EXACT_N {
        return Err(Error::TooLarge {
            n: f,
            limit: MAX_EXACT_N,
        });
    }
    enumerate(
        ckl.client_costs(),
        ckl.demand(),
        cap_scale * ckl.capacity(),
        ckl.budget(),
    )
}

/// Optimum of the LP relaxation computed through its dual:
///
/// ```text
/// max Σ_j u_j - k·w - Σ_i t_i
///   u_j - d_j v_i - z_ij ≤ d_j c_ij     ∀i,j
///   M v_i - w + Σ_j z_ij - t_i ≤ 0      ∀i
///   u free; v, w, z, t ≥ 0
/// ```
pub fn exact_lp_check(inst: &Instance) -> Result<f64> {
    let n = inst.n();
    if n > MAX_LP_CHECK_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_LP_CHECK_N,
        });
    }
    let u = |j: usize| j;
    let v = |i: usize| n + i;
    let w = 2 * n;
    let z = |i: usize, j: usize| 2 * n + 1 + i * n + j;
    let t = |i: usize| 2 * n + 1 + n * n + i;
    let mut p = LpProblem::new(3 * n + 1 + n * n);
    let d = inst.demand();
    for j in 0..n {
        p.bounds[u(j)] = (f64::NEG_INFINITY, f64::INFINITY);
        p.objective[u(j)] = -1.0;
    }
    p.objective[w] = inst.budget() as f64;
    for i in 0..n {
        p.objective[t(i)] = 1.0;
    }
    for i in 0..n {
        for j in 0..n {
            p.push(
                vec![(u(j), 1.0), (v(i), -d[j]), (z(i, j), -1.0)],
                Sense::Le,
                d[j] * inst.cost(i, j),
            );
        }
        let mut row = vec![(v(i), inst.capacity()), (w, -1.0), (t(i), -1.0)];
        row.extend((0..n).map(|j| (z(i, j), 1.0)));
        p.push(row, Sense::Le, 0.0);
    }
    Ok(-solve_lp(&p)?.objective)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(cost: Vec<Vec<f64>>, d: Vec<f64>, m: f64, k: usize) -> Instance {
        Instance::new(Matrix::from_rows(cost).unwrap(), d, m, k).unwrap()
    }

    fn two_far() -> Instance {
        inst(
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            vec![1.0, 1.0],
            2.0,
            1,
        )
    }

    fn line3() -> Instance {
        inst(
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 1.0],
                vec![2.0, 1.0, 0.0],
            ],
            vec![1.0; 3],
            2.0,
            2,
        )
    }

    #[test]
    fn subsets_in_order() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| {
            seen.push(s.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
    }

    #[test]
    fn two_points_one_center() {
        let s = exact_opt(&two_far(), 1.0).unwrap();
        assert!((s.cost - 10.0).abs() < 1e-9);
    }

    #[test]
    fn all_open_costs_nothing() {
        let s = exact_opt(
            &inst(vec![vec![0.0, 3.0], vec![3.0, 0.0]], vec![1.0, 1.0], 1.0, 2),
            1.0,
        )
        .unwrap();
        assert_eq!(s.cost, 0.0);
        assert_eq!(s.open, vec![0, 1]);
    }

    #[test]
    fn line_of_three() {
        let s = exact_opt(&line3(), 1.0).unwrap();
        assert!((s.cost - 1.0).abs() < 1e-9);
    }

    #[test]
    fn relaxed_capacity_never_costs_more() {
        let i = line3();
        assert!(exact_opt(&i, 2.5).unwrap().cost <= exact_opt(&i, 1.0).unwrap().cost + 1e-12);
    }

    #[test]
    fn guards() {
        let big = Instance::new(Matrix::zeros(17, 17), vec![0.0; 17], 1.0, 1).unwrap();
        assert!(matches!(exact_opt(&big, 1.0), Err(Error::TooLarge { .. })));
        let seven = Instance::new(Matrix::zeros(7, 7), vec![0.0; 7], 1.0, 1).unwrap();
        assert!(matches!(
            exact_lp_check(&seven),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn dual_values() {
        let one = inst(vec![vec![0.0]], vec![1.0], 1.0, 1);
        assert!(exact_lp_check(&one).unwrap().abs() < 1e-12);
        assert!((exact_lp_check(&two_far()).unwrap() - 10.0).abs() < 1e-9);
    }
}

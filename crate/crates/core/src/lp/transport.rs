use alloc::vec::Vec;

use super::{solve_lp, LpProblem, Sense};
use crate::error::{Error, Result};
use crate::model::{Instance, Matrix, TOL};

/// Optimal splittable assignment onto a fixed set of centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Transport {
    /// `assign[(center, sink)]` is the fraction of the sink's demand routed
    /// to that center.
    pub assign: Matrix,
    pub cost: f64,
}

/// Min-cost transportation from `centers` (rows of `cost`) to sinks
/// (columns), each center carrying at most `cap` units.
///
/// Sinks with zero demand go to their cheapest center without entering the
/// LP.
pub fn transport(cost: &Matrix, demand: &[f64], cap: f64) -> Result<Transport> {
    let (rows, sinks) = (cost.rows(), cost.cols());
    if demand.len() != sinks {
        return Err(Error::Dimension {
            what: "transport demand",
            expected: sinks,
            found: demand.len(),
        });
    }
    if rows == 0 {
        return Err(Error::Precondition(
            "transportation needs at least one center".into(),
        ));
    }
    let total: f64 = demand.iter().sum();
    if total > cap * rows as f64 + TOL {
        return Err(Error::Infeasible);
    }

    let active: Vec<usize> = (0..sinks).filter(|&j| demand[j] > 0.0).collect();
    let var = |s: usize, a: usize| s * active.len() + a;
    let mut p = LpProblem::new(rows * active.len());
    for s in 0..rows {
        for (a, &j) in active.iter().enumerate() {
            p.objective[var(s, a)] = demand[j] * cost[(s, j)];
        }
    }
    for a in 0..active.len() {
        p.push(
            (0..rows).map(|s| (var(s, a), 1.0)).collect(),
            Sense::Eq,
            1.0,
        );
    }
    for s in 0..rows {
        p.push(
            active
                .iter()
                .enumerate()
                .map(|(a, &j)| (var(s, a), demand[j]))
                .collect(),
            Sense::Le,
            cap,
        );
    }
    let sol = solve_lp(&p)?;

    let mut assign = Matrix::zeros(rows, sinks);
    for (a, &j) in active.iter().enumerate() {
        let mut sum = 0.0;
        for s in 0..rows {
            let v = sol.values[var(s, a)];
            let v = if v <= TOL { 0.0 } else { v };
            assign[(s, j)] = v;
            sum += v;
        }
        for s in 0..rows {
            assign[(s, j)] /= sum;
        }
    }
    for j in (0..sinks).filter(|&j| demand[j] <= 0.0) {
        let best = (0..rows)
            .min_by(|&a, &b| cost[(a, j)].total_cmp(&cost[(b, j)]))
            .unwrap_or(0);
        assign[(best, j)] = 1.0;
    }
    let cost_value = (0..rows)
        .map(|s| {
            (0..sinks)
                .map(|j| demand[j] * cost[(s, j)] * assign[(s, j)])
                .sum::<f64>()
        })
        .sum();
    Ok(Transport {
        assign,
        cost: cost_value,
    })
}

/// Min-cost assignment of all demand in `inst` to the locations in
/// `open_set`, each loaded to at most `cap_scale · M`. The returned
/// assignment is `n × n` with non-zero rows only for open locations.
pub fn solve_transportation(
    inst: &Instance,
    open_set: &[usize],
    cap_scale: f64,
) -> Result<Transport> {
    let n = inst.n();
    if let Some(&bad) = open_set.iter().find(|&&i| i >= n) {
        return Err(Error::Precondition(alloc::format!(
            "open location {bad} out of range"
        )));
    }
    let mut sub = Matrix::zeros(open_set.len(), n);
    for (s, &i) in open_set.iter().enumerate() {
        sub.row_mut(s).copy_from_slice(inst.cost_matrix().row(i));
    }
    let t = transport(&sub, inst.demand(), cap_scale * inst.capacity())?;
    let mut assign = Matrix::zeros(n, n);
    for (s, &i) in open_set.iter().enumerate() {
        assign.row_mut(i).copy_from_slice(t.assign.row(s));
    }
    Ok(Transport {
        assign,
        cost: t.cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line3() -> Instance {
        let c = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        Instance::new(Matrix::from_rows(c).unwrap(), vec![1.0; 3], 2.0, 2).unwrap()
    }

    #[test]
    fn all_open_is_identity() {
        let inst = line3();
        let t = solve_transportation(&inst, &[0, 1, 2], 1.0).unwrap();
        assert_eq!(t.cost, 0.0);
        assert_eq!(t.assign, Matrix::identity(3));
    }

    #[test]
    fn forced_routing() {
        let inst = Instance::new(
            Matrix::from_rows(vec![vec![0.0, 10.0], vec![10.0, 0.0]]).unwrap(),
            vec![1.0, 1.0],
            2.0,
            1,
        )
        .unwrap();
        let t = solve_transportation(&inst, &[0], 1.0).unwrap();
        assert!((t.cost - 10.0).abs() < 1e-12);
        assert_eq!(t.assign.row(0), &[1.0, 1.0]);
    }

    #[test]
    fn middle_point_split_between_ends() {
        // Any split of the middle unit between 0 and 2 costs exactly 1.
        let t = solve_transportation(&line3(), &[0, 2], 1.0).unwrap();
        assert!((t.cost - 1.0).abs() < 1e-12);
        assert!((t.assign[(0, 1)] + t.assign[(2, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_when_capacity_short() {
        assert_eq!(
            solve_transportation(&line3(), &[1], 1.0),
            Err(Error::Infeasible)
        );
        // 1.5·M = 3 covers all three units from the middle.
        assert!(solve_transportation(&line3(), &[1], 1.5).is_ok());
    }

    #[test]
    fn zero_demand_sink_goes_to_nearest() {
        let mut inst = line3();
        inst = inst.with_demand(vec![1.0, 0.0, 1.0]).unwrap();
        let t = solve_transportation(&inst, &[1, 2], 1.0).unwrap();
        assert_eq!(t.assign[(1, 1)], 1.0);
    }
}

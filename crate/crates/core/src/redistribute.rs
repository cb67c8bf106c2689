//! Reshaping the opening values of the non-terminal cores.
//!
//! Every location `i ∈ N2` starts at `ŷ_i = (α-1)/α`. The surplus
//! `Y' = Σ_{N2} y' - Σ_{N2} ŷ` is then spent promoting locations to 1, from
//! the largest `d'_i · c(s(i), i)` downwards, where `s(i)` is the nearest
//! other location in `N1 ∪ N2`. A final partial promotion borrows the
//! missing amount (less than `1/α`) from the first location in the order.
//!
//! Afterwards every `ŷ_i` is 0, in `((α-2)/α, (α-1)/α]` or in `[1, 2)`, at
//! most one value lies strictly inside `((α-2)/α, (α-1)/α)`, total mass is
//! unchanged, and `Σ_{N2} (1-ŷ_i) d'_i c(s(i), i)` does not increase.

use alloc::format;
use alloc::vec::Vec;

use crate::concentrate::ConcentratedSolution;
use crate::error::{Error, Result};
use crate::model::{Instance, TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct RedistributedSolution {
    pub alpha: f64,
    pub yhat: Vec<f64>,
    /// `nearest[i] = Some(s(i))` for `i ∈ N2`.
    pub nearest: Vec<Option<usize>>,
    /// `N2` by nondecreasing `d'_i · c(s(i), i)`, ties by index.
    pub order: Vec<usize>,
    /// `Y = Σ_{N2} y'`.
    pub mass: f64,
    /// `Y'` when the sweep stopped.
    pub residual: f64,
}

/// `s(i)` for every `i ∈ N2`: the nearest other location in `N1 ∪ N2`,
/// ties to the lowest index.
pub fn compute_s_map(inst: &Instance, conc: &ConcentratedSolution) -> Result<Vec<Option<usize>>> {
    let candidates = conc.candidates();
    let mut nearest = alloc::vec![None; inst.n()];
    if conc.n2.is_empty() {
        return Ok(nearest);
    }
    if candidates.len() < 2 {
        return Err(Error::Precondition(
            "nearest-neighbor map needs at least two candidate centers".into(),
        ));
    }
    for &i in &conc.n2 {
        let s = candidates
            .iter()
            .copied()
            .filter(|&t| t != i)
            .min_by(|&a, &b| inst.cost(a, i).total_cmp(&inst.cost(b, i)).then(a.cmp(&b)));
        nearest[i] = s;
    }
    Ok(nearest)
}

/// The value sweep on `y'` listed in order `i_1, …, i_v`: every value
/// starts at `(α-1)/α` and the surplus promotes values to 1 from the back,
/// the last partial promotion drawing on `i_1`. Returns the new values and
/// the final residual. Does not check `Σ y' ≤ v - 1`; see
/// [`run_redistribute`].
pub fn sweep(ordered: &[f64], alpha: f64) -> Result<(Vec<f64>, f64)> {
    let v = ordered.len();
    let mass: f64 = ordered.iter().sum();
    let mut yhat = alloc::vec![(alpha - 1.0) / alpha; v];
    let mut residual = mass - yhat.iter().sum::<f64>();

    for r in (0..v).rev() {
        if residual <= TOL {
            break;
        }
        if r == 0 {
            return Err(Error::NumericalMargin(format!(
                "redistribution reached the first location with Y' = {residual}"
            )));
        }
        if residual + yhat[r] < 1.0 {
            yhat[0] -= 1.0 - residual - yhat[r];
            yhat[r] = 1.0;
            residual = mass - yhat.iter().sum::<f64>();
            break;
        }
        yhat[r] = 1.0;
        residual = mass - yhat.iter().sum::<f64>();
    }

    if let Some(&first) = yhat.first() {
        let floor = (alpha - 2.0) / alpha;
        if first < 1.0 && first < floor + TOL {
            return Err(Error::NumericalMargin(format!(
                "ŷ(i_1) = {first} is within TOL of (α-2)/α"
            )));
        }
    }
    Ok((yhat, residual))
}

pub fn run_redistribute(
    inst: &Instance,
    conc: &ConcentratedSolution,
) -> Result<RedistributedSolution> {
    let alpha = conc.alpha;
    let v = conc.n2.len();
    let mass = conc.mass_n2;
    if mass > v as f64 - 1.0 + TOL {
        return Err(Error::Precondition(format!(
            "Σ_N2 y' = {mass} exceeds |N2| - 1 = {}; the easy case applies",
            v as f64 - 1.0
        )));
    }
    let nearest = compute_s_map(inst, conc)?;
    let key = |i: usize| conc.dprime[i] * inst.cost(nearest[i].expect("i in N2"), i);
    let mut order = conc.n2.clone();
    order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));

    let mut yhat = conc.y.clone();
    let ordered: Vec<f64> = order.iter().map(|&i| conc.y[i]).collect();
    let (swept, residual) = sweep(&ordered, alpha)?;
    for (&i, v) in order.iter().zip(swept) {
        yhat[i] = v;
    }

    Ok(RedistributedSolution {
        alpha,
        yhat,
        nearest,
        order,
        mass,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Matrix;
    use alloc::vec;

    /// Points on a line at the given coordinates, every one a non-terminal
    /// core with the given `y'` and unit `d'`.
    fn line_n2(coords: &[f64], y: &[f64]) -> (Instance, ConcentratedSolution) {
        let n = coords.len();
        let cost: Vec<Vec<f64>> = coords
            .iter()
            .map(|a| coords.iter().map(|b| (a - b).abs()).collect())
            .collect();
        let inst = Instance::new(Matrix::from_rows(cost).unwrap(), vec![1.0; n], 1.0, n).unwrap();
        let conc = ConcentratedSolution {
            alpha: 4.0,
            x: Matrix::identity(n),
            y: y.to_vec(),
            n1: vec![],
            n2: (0..n).collect(),
            dprime: vec![1.0; n],
            mass_n2: y.iter().sum(),
        };
        (inst, conc)
    }

    #[test]
    fn s_map_two_candidates() {
        let (inst, conc) = line_n2(&[0.0, 3.0], &[0.75, 0.75]);
        assert_eq!(compute_s_map(&inst, &conc).unwrap(), vec![Some(1), Some(0)]);
    }

    #[test]
    fn s_map_ties_go_low() {
        let (inst, conc) = line_n2(&[0.0, 0.0, 0.0], &[0.75; 3]);
        assert_eq!(
            compute_s_map(&inst, &conc).unwrap(),
            vec![Some(1), Some(0), Some(0)]
        );
    }

    #[test]
    fn s_map_collinear() {
        let (inst, conc) = line_n2(&[0.0, 1.0, 6.0], &[0.75; 3]);
        assert_eq!(
            compute_s_map(&inst, &conc).unwrap(),
            vec![Some(1), Some(0), Some(1)]
        );
    }

    #[test]
    fn s_map_needs_two_candidates() {
        let (inst, conc) = line_n2(&[0.0], &[0.8]);
        assert!(matches!(
            compute_s_map(&inst, &conc),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn hand_traced_sweep() {
        // Start at 0.75 each with Y' = 0.35; i_3 is promoted (Y' = 0.1) and
        // i_2 takes the missing 0.15 from i_1.
        let (y, residual) = sweep(&[0.8, 0.9, 0.9], 4.0).unwrap();
        assert!((y[0] - 0.6).abs() < 1e-12);
        assert_eq!(&y[1..], &[1.0, 1.0]);
        assert!(residual.abs() < 1e-12);
        // The same values fail the guard: 2.6 > |N2| - 1.
        let (inst, conc) = line_n2(&[0.0, 1.0, 3.0], &[0.8, 0.9, 0.9]);
        assert!(matches!(
            run_redistribute(&inst, &conc),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn ordered_sweep_on_valid_input() {
        // Keys d'·c(s(i), i) = 1, 1, 2, 4, 8 give the index order. Y = 3.95
        // ≤ 4 leaves Y' = 0.2 after the reset: location 4 is promoted and the
        // missing 0.05 comes from location 0.
        let (inst, conc) = line_n2(&[0.0, 1.0, 3.0, 7.0, 15.0], &[0.75, 0.75, 0.8, 0.8, 0.85]);
        let r = run_redistribute(&inst, &conc).unwrap();
        assert_eq!(r.order, vec![0, 1, 2, 3, 4]);
        assert!((r.yhat[0] - 0.7).abs() < 1e-12);
        assert_eq!(&r.yhat[1..], &[0.75, 0.75, 0.75, 1.0]);
    }

    #[test]
    fn guard_rejects_easy_case_input() {
        let (inst, conc) = line_n2(&[0.0, 1.0], &[0.75, 0.75]);
        assert!(matches!(
            run_redistribute(&inst, &conc),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn no_surplus_leaves_values() {
        let (inst, conc) = line_n2(&[0.0, 1.0, 3.0, 7.0], &[0.75; 4]);
        let r = run_redistribute(&inst, &conc).unwrap();
        assert_eq!(r.yhat, vec![0.75; 4]);
    }
}

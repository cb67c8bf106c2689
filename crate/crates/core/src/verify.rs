//! Executable form of the approximation guarantee.

use alloc::format;

use crate::error::{Error, Result};
use crate::model::{loads, Instance, IntegralSolution, TOL};

/// Relative slack on cost bounds, absorbing rounding across the pipeline.
pub const COST_REL_TOL: f64 = 1e-7;

/// Capacity violation factor `2 + 2/α`.
pub fn load_factor(alpha: f64) -> f64 {
    2.0 + 2.0 / alpha
}

/// Cost factor `6 + 10α` against the LP optimum.
pub fn approx_ratio(alpha: f64) -> f64 {
    6.0 + 10.0 * alpha
}

fn within_cost(cost: f64, bound: f64) -> bool {
    cost <= bound * (1.0 + COST_REL_TOL) + TOL
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuaranteeReport {
    pub centers_ok: bool,
    pub load_ok: bool,
    pub cost_ok: bool,
    pub coverage_ok: bool,
    pub centers: usize,
    pub budget: usize,
    pub max_load_ratio: f64,
    pub load_bound: f64,
    pub cost: f64,
    pub lp_cost: f64,
    pub cost_bound: f64,
}

impl GuaranteeReport {
    pub fn all_ok(&self) -> bool {
        self.centers_ok && self.load_ok && self.cost_ok && self.coverage_ok
    }

    /// `cost / C_LP`, or 0 when both vanish.
    pub fn ratio_vs_lp(&self) -> f64 {
        if self.lp_cost > 0.0 {
            self.cost / self.lp_cost
        } else if self.cost <= TOL {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Checks centers `≤ k`, every load `≤ (2+2/α)M` on open rows and none on
/// closed ones, cost `≤ (6+10α)·C_LP`, and that every column of the
/// assignment is a distribution.
pub fn verify_guarantees(
    inst: &Instance,
    lp_cost: f64,
    sol: &IntegralSolution,
    alpha: f64,
) -> GuaranteeReport {
    check(inst, lp_cost, sol, load_factor(alpha), approx_ratio(alpha))
}

fn check(
    inst: &Instance,
    lp_cost: f64,
    sol: &IntegralSolution,
    factor: f64,
    ratio: f64,
) -> GuaranteeReport {
    let n = inst.n();
    let m = inst.capacity();
    let centers = sol.centers();
    let shape_ok = sol.open.len() == n && sol.assign.rows() == n && sol.assign.cols() == n;

    let load_ok = shape_ok
        && loads(inst.demand(), &sol.assign)
            .iter()
            .zip(&sol.open)
            .all(|(&l, &o)| l <= if o { factor * m } else { 0.0 } + TOL);
    let coverage_ok = shape_ok
        && (0..n).all(|j| {
            (sol.assign.col_sum(j) - 1.0).abs() <= TOL
                && (0..n).all(|i| {
                    let v = sol.assign[(i, j)];
                    v >= -TOL && (sol.open[i] || v <= TOL)
                })
        });
    let cost_bound = ratio * lp_cost;
    GuaranteeReport {
        centers_ok: centers <= inst.budget(),
        load_ok,
        cost_ok: within_cost(sol.cost, cost_bound),
        coverage_ok,
        centers,
        budget: inst.budget(),
        max_load_ratio: sol.max_load_ratio,
        load_bound: factor,
        cost: sol.cost,
        lp_cost,
        cost_bound,
    }
}

/// The sharper bounds of the easy case: loads within `2M` and cost within
/// `(3+4α)·C_LP`.
pub fn verify_easy_case(
    inst: &Instance,
    lp_cost: f64,
    sol: &IntegralSolution,
    alpha: f64,
) -> GuaranteeReport {
    check(inst, lp_cost, sol, 2.0, 3.0 + 4.0 * alpha)
}

/// Best `(α, 6 + 10α)` whose capacity violation `2 + 2/α` stays within `v`.
pub fn best_ratio_for_violation(v: f64) -> Result<(f64, f64)> {
    if !(v > 2.0) || !v.is_finite() {
        return Err(Error::Precondition(format!(
            "capacity violation {v} is not achievable; it must exceed 2"
        )));
    }
    let alpha = (2.0 / (v - 2.0)).max(crate::cluster::MIN_ALPHA);
    Ok((alpha, approx_ratio(alpha)))
}

//! The facility/client variant, solved by reduction to the location model.
//!
//! The LP relaxation over facilities `F` and clients `D` is solved first.
//! Each facility then takes the demand it serves fractionally,
//! `d¹_i = Σ_j d_j x⁰_ij`, which turns `F` into a location instance. Its
//! rounded assignment `x¹` is composed with `x⁰` to route clients:
//! `x* = x¹ · x⁰`. The result opens at most `k` facilities, inflates
//! loads by at most `2 + 2/α`, and costs at most `(13 + 20α)·OPT`.

use alloc::vec;
use alloc::vec::Vec;

use crate::cluster::check_alpha;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, Sense};
use crate::model::{loads, validate_instance, Instance, Matrix, ValidationReport, TOL};
use crate::pipeline::{solve, SolveOutcome};
use crate::verify::{approx_ratio, load_factor, COST_REL_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct CklInstance {
    facility_costs: Matrix,
    client_costs: Matrix,
    demand: Vec<f64>,
    capacity: f64,
    budget: usize,
}

impl CklInstance {
    /// `facility_costs` is `F × F`, `client_costs` is `F × D` and `demand`
    /// has one entry per client.
    pub fn new(
        facility_costs: Matrix,
        client_costs: Matrix,
        demand: Vec<f64>,
        capacity: f64,
        budget: usize,
    ) -> Result<Self> {
        let f = facility_costs.rows();
        if facility_costs.cols() != f {
            return Err(Error::Dimension {
                what: "facility cost columns",
                expected: f,
                found: facility_costs.cols(),
            });
        }
        if client_costs.rows() != f {
            return Err(Error::Dimension {
                what: "client cost rows",
                expected: f,
                found: client_costs.rows(),
            });
        }
        if demand.len() != client_costs.cols() {
            return Err(Error::Dimension {
                what: "client demand",
                expected: client_costs.cols(),
                found: demand.len(),
            });
        }
        Ok(Self {
            facility_costs,
            client_costs,
            demand,
            capacity,
            budget,
        })
    }

    pub fn facilities(&self) -> usize {
        self.facility_costs.rows()
    }

    pub fn clients(&self) -> usize {
        self.demand.len()
    }

    pub fn facility_costs(&self) -> &Matrix {
        &self.facility_costs
    }

    pub fn client_costs(&self) -> &Matrix {
        &self.client_costs
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// The location instance over `F ∪ D` (facilities first) with
    /// client-to-client distances taken as shortest paths through a
    /// facility. That completion is a metric exactly when the given
    /// distances are consistent with one.
    pub fn combined(&self) -> Result<Instance> {
        let (f, d) = (self.facilities(), self.clients());
        let mut c = Matrix::zeros(f + d, f + d);
        for a in 0..f {
            c.row_mut(a)[..f].copy_from_slice(self.facility_costs.row(a));
            for j in 0..d {
                c[(a, f + j)] = self.client_costs[(a, j)];
                c[(f + j, a)] = self.client_costs[(a, j)];
            }
        }
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    c[(f + i, f + j)] = (0..f)
                        .map(|a| self.client_costs[(a, i)] + self.client_costs[(a, j)])
                        .fold(f64::INFINITY, f64::min);
                }
            }
        }
        let mut demand = vec![0.0; f];
        demand.extend_from_slice(&self.demand);
        Instance::new(c, demand, self.capacity, self.budget)
    }
}

/// Metric axioms over `F ∪ D` plus the instance-level checks.
pub fn validate_ckl(ckl: &CklInstance) -> Result<ValidationReport> {
    if ckl.facilities() == 0 {
        return Ok(ValidationReport {
            violations: vec![crate::model::Violation::Empty],
        });
    }
    Ok(validate_instance(&ckl.combined()?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CklSolution {
    pub open: Vec<bool>,
    /// `F × D`
    pub assign: Matrix,
    pub cost: f64,
    pub max_load_ratio: f64,
}

impl CklSolution {
    pub fn new(ckl: &CklInstance, open: Vec<bool>, assign: Matrix) -> Self {
        let cost = assignment_cost(ckl, &assign);
        let max_load_ratio = loads(ckl.demand(), &assign)
            .into_iter()
            .zip(&open)
            .filter(|(_, &o)| o)
            .map(|(l, _)| l / ckl.capacity())
            .fold(0.0, f64::max);
        Self {
            open,
            assign,
            cost,
            max_load_ratio,
        }
    }

    pub fn centers(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }
}

fn assignment_cost(ckl: &CklInstance, assign: &Matrix) -> f64 {
    let mut total = 0.0;
    for i in 0..ckl.facilities() {
        for j in 0..ckl.clients() {
            total += ckl.demand[j] * ckl.client_costs[(i, j)] * assign[(i, j)];
        }
    }
    total
}

/// Optimal `(x⁰, y⁰)` of the facility/client relaxation. Clients without
/// demand stay out of the LP and are routed to their nearest facility.
pub fn solve_ckl_relaxation(ckl: &CklInstance) -> Result<(Matrix, Vec<f64>)> {
    let (f, d) = (ckl.facilities(), ckl.clients());
    let active: Vec<usize> = (0..d).filter(|&j| ckl.demand[j] > 0.0).collect();
    let a = active.len();
    let xv = |i: usize, s: usize| i * a + s;
    let yv = |i: usize| f * a + i;
    let mut p = LpProblem::new(f * a + f);
    for i in 0..f {
        for (s, &j) in active.iter().enumerate() {
            p.objective[xv(i, s)] = ckl.demand[j] * ckl.client_costs[(i, j)];
        }
        p.bounds[yv(i)] = (0.0, 1.0);
    }
    for s in 0..a {
        p.push((0..f).map(|i| (xv(i, s), 1.0)).collect(), Sense::Eq, 1.0);
    }
    for i in 0..f {
        let mut row: Vec<(usize, f64)> = active
            .iter()
            .enumerate()
            .map(|(s, &j)| (xv(i, s), ckl.demand[j]))
            .collect();
        row.push((yv(i), -ckl.capacity));
        p.push(row, Sense::Le, 0.0);
    }
    p.push(
        (0..f).map(|i| (yv(i), 1.0)).collect(),
        Sense::Le,
        ckl.budget as f64,
    );
    for i in 0..f {
        for s in 0..a {
            p.push(vec![(xv(i, s), 1.0), (yv(i), -1.0)], Sense::Le, 0.0);
        }
    }
    let sol = solve_lp(&p)?;

    let mut x = Matrix::zeros(f, d);
    for (s, &j) in active.iter().enumerate() {
        for i in 0..f {
            let v = sol.values[xv(i, s)];
            x[(i, j)] = if v <= TOL { 0.0 } else { v };
        }
        let sum = x.col_sum(j);
        for i in 0..f {
            x[(i, j)] /= sum;
        }
    }
    for j in (0..d).filter(|&j| ckl.demand[j] <= 0.0) {
        let near = (0..f)
            .min_by(|&a, &b| {
                ckl.client_costs[(a, j)]
                    .total_cmp(&ckl.client_costs[(b, j)])
                    .then(a.cmp(&b))
            })
            .expect("at least one facility");
        x[(near, j)] = 1.0;
    }
    let y = (0..f).map(|i| sol.values[yv(i)].clamp(0.0, 1.0)).collect();
    Ok((x, y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CklOutcome {
    pub x0: Matrix,
    pub y0: Vec<f64>,
    /// `COST(x⁰, y⁰)`, the relaxation optimum.
    pub lp_cost: f64,
    /// The location instance on `F` with demands `d¹`.
    pub reduced: Instance,
    pub ckm: SolveOutcome,
    pub solution: CklSolution,
}

/// `x* = x¹ · x⁰`, opening what the location solution opens.
pub fn compose_back(
    ckl: &CklInstance,
    open: Vec<bool>,
    x1: &Matrix,
    x0: &Matrix,
) -> Result<CklSolution> {
    let assign = x1.mul(x0)?;
    Ok(CklSolution::new(ckl, open, assign))
}

pub fn solve_ckl(ckl: &CklInstance, alpha: f64) -> Result<CklOutcome> {
    validate_ckl(ckl)?.into_result()?;
    check_alpha(alpha)?;
    let (x0, y0) = solve_ckl_relaxation(ckl)?;
    let lp_cost = assignment_cost(ckl, &x0);
    let d1 = loads(ckl.demand(), &x0);
    let reduced = Instance::new(ckl.facility_costs.clone(), d1, ckl.capacity, ckl.budget)?;
    let ckm = solve(&reduced, alpha)?;
    let solution = compose_back(ckl, ckm.solution.open.clone(), &ckm.solution.assign, &x0)?;
    Ok(CklOutcome {
        x0,
        y0,
        lp_cost,
        reduced,
        ckm,
        solution,
    })
}

/// Cost factor `13 + 20α` against the facility/client optimum.
pub fn ckl_ratio(alpha: f64) -> f64 {
    13.0 + 20.0 * alpha
}

#[derive(Debug, Clone, PartialEq)]
pub struct CklReport {
    pub stochastic_ok: bool,
    pub coupling_ok: bool,
    pub centers_ok: bool,
    pub load_ok: bool,
    /// `COST(x*) ≤ COST(x¹) + COST(x⁰)`.
    pub telescoping_ok: bool,
    /// `COST(x*) ≤ (6+10α)·C_LP(reduced) + COST(x⁰)`, which is at most
    /// `(13+20α)·OPT`.
    pub certified_ok: bool,
    pub cost: f64,
    pub ckm_cost: f64,
    pub lp_cost: f64,
    pub certified_bound: f64,
}

impl CklReport {
    pub fn all_ok(&self) -> bool {
        self.stochastic_ok
            && self.coupling_ok
            && self.centers_ok
            && self.load_ok
            && self.telescoping_ok
            && self.certified_ok
    }
}

pub fn verify_ckl(ckl: &CklInstance, out: &CklOutcome, alpha: f64) -> CklReport {
    let sol = &out.solution;
    let (f, d) = (ckl.facilities(), ckl.clients());
    let stochastic_ok = (0..d).all(|j| (sol.assign.col_sum(j) - 1.0).abs() <= TOL);
    let coupling_ok = (0..f).all(|i| {
        let y = if sol.open[i] { 1.0 } else { 0.0 };
        sol.assign.row(i).iter().all(|&v| v >= -TOL && v <= y + TOL)
    });
    let cap = load_factor(alpha) * ckl.capacity;
    let load_ok = loads(ckl.demand(), &sol.assign)
        .iter()
        .zip(&sol.open)
        .all(|(&l, &o)| l <= if o { cap } else { 0.0 } + TOL);
    let ckm_cost = out.ckm.solution.cost;
    let slack = |b: f64| b * (1.0 + COST_REL_TOL) + TOL;
    let certified_bound = approx_ratio(alpha) * out.ckm.lp_cost() + out.lp_cost;
    CklReport {
        stochastic_ok,
        coupling_ok,
        centers_ok: sol.centers() <= ckl.budget,
        load_ok,
        telescoping_ok: sol.cost <= slack(ckm_cost + out.lp_cost),
        certified_ok: sol.cost <= slack(certified_bound),
        cost: sol.cost,
        ckm_cost,
        lp_cost: out.lp_cost,
        certified_bound,
    }
}

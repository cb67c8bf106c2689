//! Instances, fractional and integral solutions, and the cost accounting
//! shared by every stage.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Comparison tolerance for metric checks, LP feasibility and rounding
/// thresholds.
pub const TOL: f64 = 1e-9;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Dimension {
                    what: "matrix row",
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Sum of column `j`.
    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self[(i, j)]).sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Adds `scale * row[src]` to `row[dst]`.
    pub fn add_row_scaled(&mut self, dst: usize, src: usize, scale: f64) {
        if dst == src {
            for v in self.row_mut(dst) {
                *v *= 1.0 + scale;
            }
            return;
        }
        let c = self.cols;
        let (d, s) = (dst * c, src * c);
        for k in 0..c {
            let v = self.data[s + k];
            self.data[d + k] += scale * v;
        }
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension {
                what: "matrix product",
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self[(i, t)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(t, j)];
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// A capacitated k-median instance: `n` locations that both carry demand and
/// may host a center.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    cost: Matrix,
    demand: Vec<f64>,
    capacity: f64,
    budget: usize,
}

impl Instance {
    /// Checks shapes only; use [`validate_instance`] for the metric and
    /// feasibility conditions.
    pub fn new(cost: Matrix, demand: Vec<f64>, capacity: f64, budget: usize) -> Result<Self> {
        if cost.rows() != cost.cols() {
            return Err(Error::Dimension {
                what: "cost matrix (square)",
                expected: cost.rows(),
                found: cost.cols(),
            });
        }
        if demand.len() != cost.rows() {
            return Err(Error::Dimension {
                what: "demand vector",
                expected: cost.rows(),
                found: demand.len(),
            });
        }
        Ok(Self {
            cost,
            demand,
            capacity,
            budget,
        })
    }

    pub fn n(&self) -> usize {
        self.demand.len()
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.cost[(i, j)]
    }

    pub fn cost_matrix(&self) -> &Matrix {
        &self.cost
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

    pub fn total_demand(&self) -> f64 {
        self.demand.iter().sum()
    }

    /// Same locations and metric, different demand vector.
    pub fn with_demand(&self, demand: Vec<f64>) -> Result<Self> {
        Self::new(self.cost.clone(), demand, self.capacity, self.budget)
    }
}

/// One failed instance check.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    NonFinite,
    NegativeCost {
        i: usize,
        j: usize,
        value: f64,
    },
    NonzeroDiagonal {
        i: usize,
        value: f64,
    },
    Asymmetric {
        i: usize,
        j: usize,
    },
    Triangle {
        i: usize,
        t: usize,
        j: usize,
        via: f64,
        direct: f64,
    },
    NegativeDemand {
        j: usize,
        value: f64,
    },
    NonPositiveCapacity(f64),
    ZeroBudget,
    DemandExceedsCapacity {
        total: f64,
        limit: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Empty => write!(f, "instance has no locations"),
            Violation::NonFinite => write!(f, "non-finite number in instance"),
            Violation::NegativeCost { i, j, value } => {
                write!(f, "cost[{i}][{j}] = {value} is negative")
            }
            Violation::NonzeroDiagonal { i, value } => {
                write!(f, "cost[{i}][{i}] = {value} is not zero")
            }
            Violation::Asymmetric { i, j } => write!(f, "cost[{i}][{j}] != cost[{j}][{i}]"),
            Violation::Triangle {
                i,
                t,
                j,
                via,
                direct,
            } => write!(
                f,
                "triangle inequality violated: cost[{i}][{t}] + cost[{t}][{j}] = {via} < cost[{i}][{j}] = {direct}"
            ),
            Violation::NegativeDemand { j, value } => {
                write!(f, "demand[{j}] = {value} is negative")
            }
            Violation::NonPositiveCapacity(m) => write!(f, "capacity {m} is not positive"),
            Violation::ZeroBudget => write!(f, "budget k must be at least 1"),
            Violation::DemandExceedsCapacity { total, limit } => {
                write!(f, "total demand {total} > k·M = {limit}")
            }
        }
    }
}

/// Result of [`validate_instance`]; empty means the instance is usable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, v) in self.violations.iter().enumerate() {
            if idx > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the metric axioms and `Σd ≤ k·M`.
///
/// Triangle violations are reported at most once per ordered pair `(i, j)`.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    let n = inst.n();
    if n == 0 {
        violations.push(Violation::Empty);
        return ValidationReport { violations };
    }
    let finite = inst.demand.iter().all(|d| d.is_finite())
        && inst.capacity.is_finite()
        && (0..n).all(|i| inst.cost.row(i).iter().all(|c| c.is_finite()));
    if !finite {
        violations.push(Violation::NonFinite);
        return ValidationReport { violations };
    }

    for i in 0..n {
        let d = inst.cost(i, i);
        if d.abs() > TOL {
            violations.push(Violation::NonzeroDiagonal { i, value: d });
        }
        for j in 0..n {
            let c = inst.cost(i, j);
            if c < 0.0 {
                violations.push(Violation::NegativeCost { i, j, value: c });
            }
            if j > i && (c - inst.cost(j, i)).abs() > TOL {
                violations.push(Violation::Asymmetric { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let direct = inst.cost(i, j);
            for t in 0..n {
                let via = inst.cost(i, t) + inst.cost(t, j);
                if via < direct - TOL {
                    violations.push(Violation::Triangle {
                        i,
                        t,
                        j,
                        via,
                        direct,
                    });
                    break;
                }
            }
        }
    }

    for (j, &d) in inst.demand.iter().enumerate() {
        if d < 0.0 {
            violations.push(Violation::NegativeDemand { j, value: d });
        }
    }
    if inst.capacity <= 0.0 {
        violations.push(Violation::NonPositiveCapacity(inst.capacity));
    }
    if inst.budget == 0 {
        violations.push(Violation::ZeroBudget);
    }
    let total = inst.total_demand();
    let limit = inst.budget as f64 * inst.capacity;
    if total > limit + TOL {
        violations.push(Violation::DemandExceedsCapacity { total, limit });
    }
    ValidationReport { violations }
}

/// `Σ_{i,j} d_j · c_ij · assign[i][j]`.
pub fn solution_cost(inst: &Instance, assign: &Matrix) -> Result<f64> {
    check_square(inst.n(), assign, "assignment matrix")?;
    let n = inst.n();
    let mut total = 0.0;
    for i in 0..n {
        for (j, &a) in assign.row(i).iter().enumerate() {
            if a != 0.0 {
                total += inst.demand[j] * inst.cost(i, j) * a;
            }
        }
    }
    Ok(total)
}

/// Per-row load `Σ_j d_j · assign[i][j]`.
pub fn loads(demand: &[f64], assign: &Matrix) -> Vec<f64> {
    (0..assign.rows())
        .map(|i| assign.row(i).iter().zip(demand).map(|(a, d)| a * d).sum())
        .collect()
}

pub(crate) fn check_square(n: usize, m: &Matrix, what: &'static str) -> Result<()> {
    if m.rows() != n {
        return Err(Error::Dimension {
            what,
            expected: n,
            found: m.rows(),
        });
    }
    if m.cols() != n {
        return Err(Error::Dimension {
            what,
            expected: n,
            found: m.cols(),
        });
    }
    Ok(())
}

/// LP-optimal `(x, y)` with the per-location connection costs
/// `C_j = Σ_i c_ij x_ij` and the objective `C_LP = Σ_j d_j C_j`.
///
/// `x[(i, j)]` is the fraction of `j`'s demand served by `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub conn_cost: Vec<f64>,
    pub objective: f64,
}

impl FractionalSolution {
    /// Cleans raw LP output: values within [`TOL`] of 0 or 1 are snapped,
    /// rows of closed locations are cleared and every column of `x` is
    /// renormalized to sum to exactly 1. `C_j` and `C_LP` are computed from
    /// the cleaned values.
    pub fn from_lp(inst: &Instance, mut x: Matrix, mut y: Vec<f64>) -> Result<Self> {
        let n = inst.n();
        check_square(n, &x, "fractional x")?;
        if y.len() != n {
            return Err(Error::Dimension {
                what: "fractional y",
                expected: n,
                found: y.len(),
            });
        }
        for v in y.iter_mut() {
            *v = snap_unit(*v);
        }
        for i in 0..n {
            let closed = y[i] == 0.0;
            for v in x.row_mut(i) {
                *v = if closed { 0.0 } else { snap_unit(*v) };
            }
        }
        for j in 0..n {
            let s = x.col_sum(j);
            if s <= 0.0 {
                return Err(Error::Internal(alloc::format!(
                    "LP solution leaves location {j} unserved"
                )));
            }
            if s != 1.0 {
                for i in 0..n {
                    x[(i, j)] /= s;
                }
            }
        }
        Ok(Self::with_costs(inst, x, y))
    }

    /// Wraps `(x, y)` as given and computes `C_j` and `C_LP`.
    pub fn with_costs(inst: &Instance, x: Matrix, y: Vec<f64>) -> Self {
        let n = inst.n();
        let conn_cost: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|i| inst.cost(i, j) * x[(i, j)]).sum())
            .collect();
        let objective = conn_cost
            .iter()
            .zip(inst.demand())
            .map(|(c, d)| c * d)
            .sum();
        Self {
            x,
            y,
            conn_cost,
            objective,
        }
    }

    /// Lists the LP constraints that fail by more than [`TOL`].
    pub fn feasibility_errors(&self, inst: &Instance) -> Vec<alloc::string::String> {
        use alloc::format;
        let n = inst.n();
        let mut out = Vec::new();
        for j in 0..n {
            let s = self.x.col_sum(j);
            if (s - 1.0).abs() > TOL {
                out.push(format!("column {j} of x sums to {s}"));
            }
        }
        let load = loads(inst.demand(), &self.x);
        for i in 0..n {
            if load[i] > inst.capacity() * self.y[i] + TOL {
                out.push(format!("capacity of {i} exceeded: {} > M·y", load[i]));
            }
            for j in 0..n {
                if self.x[(i, j)] > self.y[i] + TOL {
                    out.push(format!("x[{i}][{j}] > y[{i}]"));
                }
            }
        }
        let total: f64 = self.y.iter().sum();
        if total > inst.budget() as f64 + TOL {
            out.push(format!("Σy = {total} exceeds k"));
        }
        out
    }
}

fn snap_unit(v: f64) -> f64 {
    if v.abs() <= TOL {
        0.0
    } else if (v - 1.0).abs() <= TOL {
        1.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// An integral (bicriteria) solution: open centers plus a splittable
/// assignment whose rows are non-zero only for open centers.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSolution {
    pub open: Vec<bool>,
    pub assign: Matrix,
    pub cost: f64,
    /// `max_i load_i / M` over open centers.
    pub max_load_ratio: f64,
}

impl IntegralSolution {
    pub fn new(inst: &Instance, open: Vec<bool>, assign: Matrix) -> Result<Self> {
        let cost = solution_cost(inst, &assign)?;
        let max_load_ratio = max_load_ratio(inst.demand(), inst.capacity(), &open, &assign);
        Ok(Self {
            open,
            assign,
            cost,
            max_load_ratio,
        })
    }

    pub fn centers(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    pub fn open_set(&self) -> Vec<usize> {
        self.open
            .iter()
            .enumerate()
            .filter_map(|(i, &o)| o.then_some(i))
            .collect()
    }
}

/// Largest load over open rows, as a multiple of the capacity.
pub fn max_load_ratio(demand: &[f64], capacity: f64, open: &[bool], assign: &Matrix) -> f64 {
    loads(demand, assign)
        .into_iter()
        .zip(open)
        .filter(|(_, &o)| o)
        .map(|(l, _)| l / capacity)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(cost: Vec<Vec<f64>>, demand: Vec<f64>, m: f64, k: usize) -> Instance {
        Instance::new(Matrix::from_rows(cost).unwrap(), demand, m, k).unwrap()
    }

    #[test]
    fn single_location_is_valid() {
        let i = inst(vec![vec![0.0]], vec![1.0], 1.0, 1);
        assert!(validate_instance(&i).is_ok());
    }

    #[test]
    fn demand_over_budget_capacity_is_reported() {
        let i = inst(vec![vec![0.0, 5.0], vec![5.0, 0.0]], vec![1.0, 1.0], 1.0, 1);
        let r = validate_instance(&i);
        assert_eq!(
            r.violations,
            vec![Violation::DemandExceedsCapacity {
                total: 2.0,
                limit: 1.0
            }]
        );
    }

    #[test]
    fn triangle_violation_is_reported() {
        let i = inst(
            vec![
                vec![0.0, 1.0, 100.0],
                vec![1.0, 0.0, 1.0],
                vec![100.0, 1.0, 0.0],
            ],
            vec![1.0; 3],
            3.0,
            1,
        );
        let r = validate_instance(&i);
        assert!(!r.is_ok());
        assert!(r
            .violations
            .iter()
            .all(|v| matches!(v, Violation::Triangle { .. })));
        assert!(r.violations.contains(&Violation::Triangle {
            i: 0,
            t: 1,
            j: 2,
            via: 2.0,
            direct: 100.0
        }));
    }

    #[test]
    fn other_violations() {
        let i = inst(
            vec![vec![1.0, -1.0], vec![2.0, 0.0]],
            vec![-1.0, 0.0],
            0.0,
            0,
        );
        let r = validate_instance(&i);
        assert!(r
            .violations
            .contains(&Violation::NonzeroDiagonal { i: 0, value: 1.0 }));
        assert!(r.violations.contains(&Violation::NegativeCost {
            i: 0,
            j: 1,
            value: -1.0
        }));
        assert!(r.violations.contains(&Violation::Asymmetric { i: 0, j: 1 }));
        assert!(r
            .violations
            .contains(&Violation::NegativeDemand { j: 0, value: -1.0 }));
        assert!(r.violations.contains(&Violation::NonPositiveCapacity(0.0)));
        assert!(r.violations.contains(&Violation::ZeroBudget));
    }

    #[test]
    fn shape_errors() {
        let bad = Matrix::from_rows(vec![vec![0.0, 1.0], vec![0.0]]);
        assert!(matches!(bad, Err(Error::Dimension { .. })));
        let m = Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(Instance::new(m, vec![1.0], 1.0, 1).is_err());
    }

    #[test]
    fn identity_assignment_costs_nothing() {
        let i = inst(
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            vec![1.0, 1.0],
            2.0,
            1,
        );
        assert_eq!(solution_cost(&i, &Matrix::identity(2)).unwrap(), 0.0);
    }

    #[test]
    fn one_center_serving_both() {
        let i = inst(
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            vec![1.0, 1.0],
            2.0,
            1,
        );
        let a = Matrix::from_rows(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(solution_cost(&i, &a).unwrap(), 10.0);
    }

    #[test]
    fn half_split_cost() {
        let i = inst(
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            vec![1.0, 2.0],
            2.0,
            1,
        );
        let a = Matrix::from_rows(vec![vec![1.0, 0.5], vec![0.0, 0.5]]).unwrap();
        assert_eq!(solution_cost(&i, &a).unwrap(), 10.0);
    }

    #[test]
    fn cost_rejects_wrong_shape() {
        let i = inst(vec![vec![0.0]], vec![1.0], 1.0, 1);
        assert!(solution_cost(&i, &Matrix::identity(2)).is_err());
    }

    #[test]
    fn from_lp_snaps_and_renormalizes() {
        let i = inst(
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            vec![1.0, 1.0],
            2.0,
            1,
        );
        let x = Matrix::from_rows(vec![vec![1.0 - 1e-12, 0.999_999_999_9], vec![1e-12, 1e-10]])
            .unwrap();
        let f = FractionalSolution::from_lp(&i, x, vec![1.0 - 1e-11, 1e-12]).unwrap();
        assert_eq!(f.y, vec![1.0, 0.0]);
        assert_eq!(f.x.row(0), &[1.0, 1.0]);
        assert_eq!(f.x.row(1), &[0.0, 0.0]);
        assert_eq!(f.conn_cost, vec![0.0, 10.0]);
        assert_eq!(f.objective, 10.0);
    }

    #[test]
    fn matrix_product() {
        let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let b = Matrix::from_rows(vec![vec![3.0], vec![4.0]]).unwrap();
        assert_eq!(a.mul(&b).unwrap().to_rows(), vec![vec![11.0], vec![4.0]]);
    }
}

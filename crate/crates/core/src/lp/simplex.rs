//! Dense two-phase tableau simplex with Bland's pivoting rule.

use alloc::vec;
use alloc::vec::Vec;

use super::{LpProblem, LpSolution, Sense};
use crate::error::{Error, Result};

const EPS_PIVOT: f64 = 1e-7;
const EPS_COST: f64 = 1e-10;
const EPS_ZERO: f64 = 1e-13;
/// Primal feasibility slack of the Harris ratio test.
const EPS_HARRIS: f64 = 1e-9;
/// Consecutive degenerate pivots before pricing falls back to Bland's rule.
const DEGENERATE_SWITCH: usize = 50;
/// Pivots between rebuilds of the tableau from the original data.
const REINVERT_EVERY: usize = 64;

/// How an original variable is expressed through non-negative tableau
/// columns.
#[derive(Debug, Clone, Copy)]
enum Column {
    /// `v = lo + t`
    Shift { col: usize, lo: f64 },
    /// `v = hi - t`
    Mirror { col: usize, hi: f64 },
    /// `v = t⁺ - t⁻`
    Split { pos: usize, neg: usize },
}

struct Row {
    coeffs: Vec<(usize, f64)>,
    sense: Sense,
    rhs: f64,
}

struct Tableau {
    rows: usize,
    width: usize,
    /// `rows × width`, rhs in the last column.
    a: Vec<f64>,
    /// Reduced costs; the last entry holds minus the current objective.
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Rows left with a zero-level artificial after phase one; they are
    /// linear combinations of the others and take no part in pivoting.
    redundant: Vec<bool>,
    /// Columns at or above this index are artificial.
    first_artificial: usize,
    /// The initial tableau, used to rebuild rows for the current basis.
    original: Vec<f64>,
    /// Costs of the current phase.
    costs: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

enum Phase {
    One,
    Two,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let p = self.at(r, q);
        let base = r * w;
        for c in 0..w {
            self.a[base + c] /= p;
        }
        self.a[base + q] = 1.0;
        let nz: Vec<(usize, f64)> = (0..w)
            .filter_map(|c| {
                let v = self.a[base + c];
                (v != 0.0).then_some((c, v))
            })
            .collect();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * w + q];
            if f == 0.0 {
                continue;
            }
            let rb = i * w;
            for &(c, v) in &nz {
                let cell = &mut self.a[rb + c];
                *cell -= f * v;
                if cell.abs() < EPS_ZERO {
                    *cell = 0.0;
                }
            }
            self.a[rb + q] = 0.0;
        }
        let f = self.obj[q];
        if f != 0.0 {
            for &(c, v) in &nz {
                self.obj[c] -= f * v;
                if self.obj[c].abs() < EPS_ZERO {
                    self.obj[c] = 0.0;
                }
            }
            self.obj[q] = 0.0;
        }
        self.basis[r] = q;
    }

    fn set_objective(&mut self, costs: &[f64]) {
        let w = self.width;
        self.costs.clear();
        self.costs.extend_from_slice(costs);
        self.obj.clear();
        self.obj.extend_from_slice(costs);
        self.obj.push(0.0);
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for c in 0..w {
                self.obj[c] -= cb * self.a[r * w + c];
            }
        }
    }

    /// Runs the simplex method until optimal. Pricing is Dantzig's rule;
    /// after a run of degenerate pivots it switches to Bland's rule, which
    /// cannot cycle, until the objective moves again. The ratio test is
    /// Harris' two-pass variant, which prefers large pivots among
    /// near-ties. Artificial columns never enter in phase two.
    fn optimize(&mut self, phase: Phase) -> Result<()> {
        let entering_limit = match phase {
            Phase::One => self.width - 1,
            Phase::Two => self.first_artificial,
        };
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let candidates = (0..entering_limit).filter(|&c| self.obj[c] < -EPS_COST);
            let q = if bland {
                candidates.min()
            } else {
                candidates.min_by(|&a, &b| self.obj[a].total_cmp(&self.obj[b]).then(a.cmp(&b)))
            };
            let Some(q) = q else {
                return Ok(());
            };

            let eligible = |r: usize| !self.redundant[r] && self.at(r, q) > EPS_PIVOT;
            let mut leave: Option<usize> = None;
            let mut min_ratio = f64::INFINITY;
            if bland {
                // Textbook ratio test: Bland's guarantee needs exact ties.
                for r in (0..self.rows).filter(|&r| eligible(r)) {
                    let ratio = self.rhs(r).max(0.0) / self.at(r, q);
                    let better = match leave {
                        None => true,
                        Some(b) => {
                            ratio < min_ratio - EPS_ZERO
                                || (ratio <= min_ratio + EPS_ZERO && self.basis[r] < self.basis[b])
                        }
                    };
                    if better {
                        leave = Some(r);
                        min_ratio = min_ratio.min(ratio);
                    }
                }
            } else {
                let mut bound = f64::INFINITY;
                for r in (0..self.rows).filter(|&r| eligible(r)) {
                    bound = bound.min((self.rhs(r).max(0.0) + EPS_HARRIS) / self.at(r, q));
                }
                for r in (0..self.rows).filter(|&r| eligible(r)) {
                    let ratio = self.rhs(r).max(0.0) / self.at(r, q);
                    if ratio > bound {
                        continue;
                    }
                    min_ratio = min_ratio.min(ratio);
                    if leave.is_none_or(|b| self.at(r, q) > self.at(b, q)) {
                        leave = Some(r);
                    }
                }
            }
            let Some(r) = leave else {
                return Err(Error::Unbounded);
            };

            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::IterationLimit(self.max_iterations));
            }
            if min_ratio * -self.obj[q] <= EPS_COST {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, q);
            if self.iterations.is_multiple_of(REINVERT_EVERY) {
                self.reinvert()?;
            }
        }
    }

    fn live_rows(&self) -> Vec<usize> {
        (0..self.rows).filter(|&r| !self.redundant[r]).collect()
    }

    /// Rebuilds every live row as `B⁻¹ · (original row data)` so that
    /// rounding error does not accumulate across pivots.
    fn reinvert(&mut self) -> Result<()> {
        let w = self.width;
        let live = self.live_rows();
        let k = live.len();
        let mut bmat = vec![0.0; k * k];
        for (i, &r) in live.iter().enumerate() {
            for (j, &s) in live.iter().enumerate() {
                bmat[i * k + j] = self.original[r * w + self.basis[s]];
            }
        }
        let lu = Lu::factor(bmat, k)
            .ok_or_else(|| Error::NumericalMargin("singular simplex basis".into()))?;
        let mut col = vec![0.0; k];
        for c in 0..w {
            for (i, &r) in live.iter().enumerate() {
                col[i] = self.original[r * w + c];
            }
            lu.solve(&mut col);
            for (j, &s) in live.iter().enumerate() {
                let v = col[j];
                self.a[s * w + c] = if v.abs() < EPS_ZERO { 0.0 } else { v };
            }
        }
        for &s in &live {
            let b = self.basis[s];
            for &t in &live {
                self.a[t * w + b] = if t == s { 1.0 } else { 0.0 };
            }
            let rhs = &mut self.a[s * w + w - 1];
            if *rhs < 0.0 && *rhs > -EPS_HARRIS {
                *rhs = 0.0;
            }
        }
        let costs = core::mem::take(&mut self.costs);
        self.set_objective(&costs);
        Ok(())
    }
}

/// LU factorization with partial pivoting of a dense square matrix.
struct Lu {
    n: usize,
    m: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// `None` when `m` is numerically singular.
    fn factor(mut m: Vec<f64>, n: usize) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let p =
                (col..n).max_by(|&x, &y| m[x * n + col].abs().total_cmp(&m[y * n + col].abs()))?;
            if m[p * n + col].abs() < 1e-12 {
                return None;
            }
            if p != col {
                for c in 0..n {
                    m.swap(p * n + c, col * n + c);
                }
                perm.swap(p, col);
            }
            let piv = m[col * n + col];
            for r in col + 1..n {
                let f = m[r * n + col] / piv;
                m[r * n + col] = f;
                if f == 0.0 {
                    continue;
                }
                for c in col + 1..n {
                    m[r * n + c] -= f * m[col * n + c];
                }
            }
        }
        Some(Self { n, m, perm })
    }

    /// Overwrites `b` with the solution of `m · x = b`.
    fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for c in 0..r {
                acc -= self.m[r * n + c] * x[c];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in r + 1..n {
                acc -= self.m[r * n + c] * x[c];
            }
            x[r] = acc / self.m[r * n + r];
        }
        b.copy_from_slice(&x);
    }
}

pub(super) fn solve(problem: &LpProblem) -> Result<LpSolution> {
    problem.check()?;

    // Map original variables to non-negative columns.
    let mut columns = Vec::with_capacity(problem.num_vars);
    let mut ncols = 0usize;
    let mut bound_rows = Vec::new();
    for &(lo, hi) in &problem.bounds {
        if lo.is_finite() {
            columns.push(Column::Shift { col: ncols, lo });
            if hi.is_finite() {
                bound_rows.push(Row {
                    coeffs: vec![(ncols, 1.0)],
                    sense: Sense::Le,
                    rhs: hi - lo,
                });
            }
            ncols += 1;
        } else if hi.is_finite() {
            columns.push(Column::Mirror { col: ncols, hi });
            ncols += 1;
        } else {
            columns.push(Column::Split {
                pos: ncols,
                neg: ncols + 1,
            });
            ncols += 2;
        }
    }
    let n_struct = ncols;

    let mut costs = vec![0.0; n_struct];
    for (v, &c) in problem.objective.iter().enumerate() {
        match columns[v] {
            Column::Shift { col, .. } => {
                costs[col] += c;
            }
            Column::Mirror { col, .. } => {
                costs[col] -= c;
            }
            Column::Split { pos, neg } => {
                costs[pos] += c;
                costs[neg] -= c;
            }
        }
    }

    let mut rows: Vec<Row> = Vec::with_capacity(problem.constraints.len() + bound_rows.len());
    for con in &problem.constraints {
        let mut coeffs = Vec::with_capacity(con.terms.len());
        let mut rhs = con.rhs;
        for &(v, a) in &con.terms {
            match columns[v] {
                Column::Shift { col, lo } => {
                    coeffs.push((col, a));
                    rhs -= a * lo;
                }
                Column::Mirror { col, hi } => {
                    coeffs.push((col, -a));
                    rhs -= a * hi;
                }
                Column::Split { pos, neg } => {
                    coeffs.push((pos, a));
                    coeffs.push((neg, -a));
                }
            }
        }
        rows.push(Row {
            coeffs,
            sense: con.sense,
            rhs,
        });
    }
    rows.extend(bound_rows);

    for row in &mut rows {
        if row.rhs < 0.0 {
            row.rhs = -row.rhs;
            for (_, a) in &mut row.coeffs {
                *a = -*a;
            }
            row.sense = match row.sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let n_slack = rows
        .iter()
        .filter(|r| !matches!(r.sense, Sense::Eq))
        .count();
    let n_art = rows
        .iter()
        .filter(|r| !matches!(r.sense, Sense::Le))
        .count();
    let first_artificial = n_struct + n_slack;
    let width = first_artificial + n_art + 1;
    let m = rows.len();

    let mut tab = Tableau {
        rows: m,
        width,
        a: vec![0.0; m * width],
        obj: Vec::with_capacity(width),
        basis: vec![0; m],
        redundant: vec![false; m],
        first_artificial,
        original: Vec::new(),
        costs: Vec::new(),
        iterations: 0,
        max_iterations: 50 * (m + width) + 1000,
    };
    let (mut next_slack, mut next_art) = (n_struct, first_artificial);
    for (r, row) in rows.iter().enumerate() {
        let base = r * width;
        for &(c, a) in &row.coeffs {
            tab.a[base + c] += a;
        }
        tab.a[base + width - 1] = row.rhs;
        match row.sense {
            Sense::Le => {
                tab.a[base + next_slack] = 1.0;
                tab.basis[r] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                tab.a[base + next_slack] = -1.0;
                next_slack += 1;
                tab.a[base + next_art] = 1.0;
                tab.basis[r] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                tab.a[base + next_art] = 1.0;
                tab.basis[r] = next_art;
                next_art += 1;
            }
        }
    }

    tab.original = tab.a.clone();

    if n_art > 0 {
        let mut phase1 = vec![0.0; width - 1];
        for c in phase1.iter_mut().skip(first_artificial) {
            *c = 1.0;
        }
        tab.set_objective(&phase1);
        tab.optimize(Phase::One)?;
        let infeasibility = -tab.obj[width - 1];
        let scale = 1.0 + rows.iter().map(|r| r.rhs).fold(0.0, f64::max);
        if infeasibility > 1e-8 * scale {
            return Err(Error::Infeasible);
        }
        // Pivot zero-level artificials out of the basis where possible; rows
        // with no structural entry are redundant and stay as they are.
        for r in 0..m {
            if tab.basis[r] < first_artificial {
                continue;
            }
            tab.a[r * width + width - 1] = 0.0;
            let q = (0..first_artificial)
                .filter(|&c| tab.at(r, c).abs() > EPS_PIVOT)
                .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()));
            match q {
                Some(q) => tab.pivot(r, q),
                None => tab.redundant[r] = true,
            }
        }
    }

    let mut full_costs = costs.clone();
    full_costs.resize(width - 1, 0.0);
    tab.set_objective(&full_costs);
    tab.optimize(Phase::Two)?;

    // Recompute the basic values from the original data so that rounding
    // accumulated over the pivots does not leak into the answer.
    tab.reinvert()?;
    let mut col_values = vec![0.0; n_struct];
    for s in tab.live_rows() {
        let b = tab.basis[s];
        if b < n_struct {
            col_values[b] = tab.rhs(s).max(0.0);
        }
    }
    let values: Vec<f64> = columns
        .iter()
        .map(|c| match *c {
            Column::Shift { col, lo } => lo + col_values[col],
            Column::Mirror { col, hi } => hi - col_values[col],
            Column::Split { pos, neg } => col_values[pos] - col_values[neg],
        })
        .collect();
    let scale = 1.0 + rows.iter().map(|r| r.rhs).fold(0.0, f64::max);
    if problem.max_violation(&values) > 1e-9 * scale {
        return Err(Error::NumericalMargin(
            "simplex point violates a constraint".into(),
        ));
    }
    Ok(LpSolution {
        objective: problem.evaluate(&values),
        values,
        iterations: tab.iterations,
    })
}

//! Concentration of opening mass inside clusters.
//!
//! Each cluster is walked in order of distance from its core. Opening mass
//! (and the demand share served with it) moves from farther members to
//! nearer ones until every member is closed or at least fully open. A
//! non-terminal cluster ends with all of its mass on the core; a terminal
//! one ends with members at 0 or 1, except at most one in `[1, 2)` produced
//! by folding the last fractional member into its predecessor.
//!
//! The result satisfies, for every location `i`:
//! `y'_i = 0` or `(α-1)/α ≤ y'_i < 2`, `Σ_j d_j x'_ij ≤ M y'_i`,
//! `x'_ij ≤ y'_i`, and `Σ_i y'_i = Σ_i y_i`.

use alloc::format;
use alloc::vec::Vec;

use crate::cluster::{Cluster, ClusterStructure};
use crate::error::{Error, Result};
use crate::model::{loads, FractionalSolution, Instance, IntegralSolution, Matrix, TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferKind {
    /// A `Move(to, from)` step.
    Move,
    /// The final fold of a terminal cluster's last fractional member into
    /// its predecessor.
    Merge,
}

/// One mass transfer inside a cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    pub core: usize,
    pub terminal: bool,
    pub kind: TransferKind,
    pub to: usize,
    pub from: usize,
    /// Opening mass moved.
    pub delta: f64,
    /// Share of `from`'s row of `x'` moved along with it.
    pub fraction: f64,
}

/// Hook called around every transfer. The unit type ignores everything.
pub trait TransferObserver {
    fn before(&mut self, _x: &Matrix, _y: &[f64], _t: &Transfer) {}
    fn after(&mut self, _x: &Matrix, _y: &[f64], _t: &Transfer) {}
}

impl TransferObserver for () {}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentratedSolution {
    pub alpha: f64,
    pub x: Matrix,
    pub y: Vec<f64>,
    /// `{i : y'_i ≥ 1}`
    pub n1: Vec<usize>,
    /// `{i : y'_i ∈ [(α-1)/α, 1)}`, the non-terminal cores.
    pub n2: Vec<usize>,
    /// `d'_i = Σ_j d_j x'_ij`
    pub dprime: Vec<f64>,
    /// `Y = Σ_{i ∈ N2} y'_i`
    pub mass_n2: f64,
}

impl ConcentratedSolution {
    /// `N1 ∪ N2` in index order.
    pub fn candidates(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.n1.iter().chain(&self.n2).copied().collect();
        v.sort_unstable();
        v
    }
}

fn snap(v: f64) -> f64 {
    if (v - 1.0).abs() <= TOL {
        1.0
    } else if v.abs() <= TOL {
        0.0
    } else {
        v
    }
}

/// Plans `Move(to, from)`: `δ = min(1 - y'_to, y'_from)`.
fn plan_move(y: &[f64], to: usize, from: usize) -> Result<(f64, f64)> {
    let room = 1.0 - y[to];
    let have = y[from];
    let delta = room.min(have);
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!(
            "move {from} -> {to} has δ = {delta} (y'[{to}] = {}, y'[{from}] = {have})",
            y[to]
        )));
    }
    // When the two candidates for δ agree within TOL the whole row moves, so
    // no sliver of mass is left behind.
    let fraction = if have <= room + TOL {
        1.0
    } else {
        delta / have
    };
    Ok((delta, fraction))
}

fn apply_move(x: &mut Matrix, y: &mut [f64], to: usize, from: usize, delta: f64, fraction: f64) {
    x.add_row_scaled(to, from, fraction);
    if fraction == 1.0 {
        x.row_mut(from).fill(0.0);
        y[to] = snap(y[to] + y[from]);
        y[from] = 0.0;
    } else {
        for v in x.row_mut(from) {
            *v *= 1.0 - fraction;
        }
        y[to] = 1.0;
        y[from] = snap(y[from] - delta);
    }
}

/// `Move(to, from)`: shifts `δ = min(1 - y'_to, y'_from)` opening mass from
/// `from` to `to`, together with the share `δ / y'_from` of the demand
/// `from` serves. Returns `δ`.
pub fn move_mass(x: &mut Matrix, y: &mut [f64], to: usize, from: usize) -> Result<f64> {
    let (delta, fraction) = plan_move(y, to, from)?;
    apply_move(x, y, to, from, delta, fraction);
    Ok(delta)
}

fn is_fractional(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

/// Runs the concentration loop on one cluster.
pub fn concentrate_cluster<O: TransferObserver + ?Sized>(
    x: &mut Matrix,
    y: &mut [f64],
    cluster: &Cluster,
    observer: &mut O,
) -> Result<()> {
    let seq = &cluster.members;
    let terminal = cluster.is_terminal();
    while seq.iter().any(|&j| is_fractional(y[j])) {
        let a = seq
            .iter()
            .position(|&j| y[j] >= 0.0 && y[j] < 1.0)
            .expect("a fractional member exists");
        let b = seq[a + 1..]
            .iter()
            .position(|&j| y[j] > 0.0 && y[j] <= 1.0)
            .map(|p| p + a + 1);
        match b {
            Some(b) => {
                let (to, from) = (seq[a], seq[b]);
                let (delta, fraction) = plan_move(y, to, from)?;
                let t = Transfer {
                    core: cluster.core,
                    terminal,
                    kind: TransferKind::Move,
                    to,
                    from,
                    delta,
                    fraction,
                };
                observer.before(x, y, &t);
                apply_move(x, y, to, from, delta, fraction);
                observer.after(x, y, &t);
            }
            None => {
                if a >= 1 {
                    let (to, from) = (seq[a - 1], seq[a]);
                    let t = Transfer {
                        core: cluster.core,
                        terminal,
                        kind: TransferKind::Merge,
                        to,
                        from,
                        delta: y[from],
                        fraction: 1.0,
                    };
                    observer.before(x, y, &t);
                    x.add_row_scaled(to, from, 1.0);
                    x.row_mut(from).fill(0.0);
                    y[to] += y[from];
                    y[from] = 0.0;
                    observer.after(x, y, &t);
                }
                break;
            }
        }
    }
    Ok(())
}

pub fn concentrate_all(
    inst: &Instance,
    frac: &FractionalSolution,
    clusters: &ClusterStructure,
) -> Result<ConcentratedSolution> {
    concentrate_all_observed(inst, frac, clusters, &mut ())
}

/// [`concentrate_all`] with a hook around every transfer.
pub fn concentrate_all_observed<O: TransferObserver + ?Sized>(
    inst: &Instance,
    frac: &FractionalSolution,
    clusters: &ClusterStructure,
    observer: &mut O,
) -> Result<ConcentratedSolution> {
    let alpha = clusters.alpha;
    let mut x = frac.x.clone();
    let mut y = frac.y.clone();
    for cluster in &clusters.clusters {
        concentrate_cluster(&mut x, &mut y, cluster, observer)?;
    }

    let low = (alpha - 1.0) / alpha;
    let mut n1 = Vec::new();
    let mut n2 = Vec::new();
    for (i, &v) in y.iter().enumerate() {
        if v >= 1.0 {
            n1.push(i);
        } else if v >= low - TOL {
            n2.push(i);
        } else if v > 0.0 {
            return Err(Error::NumericalMargin(format!(
                "y'[{i}] = {v} is below (α-1)/α after concentration"
            )));
        }
    }
    let dprime = loads(inst.demand(), &x);
    let mass_n2 = n2.iter().map(|&i| y[i]).sum();
    Ok(ConcentratedSolution {
        alpha,
        x,
        y,
        n1,
        n2,
        dprime,
        mass_n2,
    })
}

/// Whether `Σ_{N2} y' > |N2| - 1`, in which case opening all of `N1 ∪ N2`
/// stays within budget. The comparison keeps a [`TOL`] margin so that the
/// budget argument survives rounding.
pub fn easy_case_applies(conc: &ConcentratedSolution) -> bool {
    conc.mass_n2 > conc.n2.len() as f64 - 1.0 + TOL
}

/// Opens `N1 ∪ N2` and keeps `x'` as the assignment, when
/// [`easy_case_applies`]. Loads stay within `2M` and the cost within
/// `(3 + 4α)·C_LP`.
pub fn try_easy_case(
    inst: &Instance,
    conc: &ConcentratedSolution,
) -> Result<Option<IntegralSolution>> {
    if !easy_case_applies(conc) {
        return Ok(None);
    }
    let n = inst.n();
    let mut open = alloc::vec![false; n];
    for &i in conc.n1.iter().chain(&conc.n2) {
        open[i] = true;
    }
    let mut assign = conc.x.clone();
    for (i, &o) in open.iter().enumerate() {
        if !o {
            assign.row_mut(i).fill(0.0);
        }
    }
    IntegralSolution::new(inst, open, assign).map(Some)
}

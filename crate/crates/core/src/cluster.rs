//! Greedy clustering around cores.
//!
//! Locations are scanned by nondecreasing connection cost `C_j`; a location
//! becomes a core unless an earlier core lies within `2α·C_j` of it. Every
//! location then joins its nearest core. The resulting clusters satisfy
//!
//! * `c(l, j) ≤ 2α·C_j` for every member `j` of the cluster of core `l`,
//! * `c(l, l') > 2α·max(C_l, C_l')` for distinct cores,
//! * the opening mass of every cluster is at least `(α-1)/α`,
//! * the clusters partition the locations.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{FractionalSolution, Instance, TOL};

/// Smallest admissible `α`.
pub const MIN_ALPHA: f64 = 4.0;

/// One cluster. `members` starts with the core and is sorted by distance
/// from it (ties by index), which is the order the concentration step walks.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub core: usize,
    pub members: Vec<usize>,
    /// `Z_l = Σ_{j ∈ cluster} y_j`.
    pub mass: f64,
}

impl Cluster {
    /// Non-terminal clusters carry less than one unit of opening mass.
    pub fn is_terminal(&self) -> bool {
        self.mass >= 1.0 - TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStructure {
    pub alpha: f64,
    /// Cores in the order they were selected.
    pub clusters: Vec<Cluster>,
    /// `member_of[j]` is the core location of `j`'s cluster.
    pub member_of: Vec<usize>,
}

impl ClusterStructure {
    pub fn cores(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.core).collect()
    }

    pub fn cluster_of_core(&self, core: usize) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.core == core)
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha < MIN_ALPHA {
        Err(Error::AlphaTooSmall(alpha))
    } else {
        Ok(())
    }
}

/// Locations sorted by `(C_j, j)`.
pub fn processing_order(conn_cost: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..conn_cost.len()).collect();
    order.sort_by(|&a, &b| conn_cost[a].total_cmp(&conn_cost[b]).then(a.cmp(&b)));
    order
}

pub fn run_clustering(
    inst: &Instance,
    frac: &FractionalSolution,
    alpha: f64,
) -> Result<ClusterStructure> {
    check_alpha(alpha)?;
    let n = inst.n();
    let c = &frac.conn_cost;

    let mut cores: Vec<usize> = Vec::new();
    for j in processing_order(c) {
        // A location within TOL of the radius is covered, never a new core.
        let covered = cores
            .iter()
            .any(|&l| inst.cost(l, j) <= 2.0 * alpha * c[j] + TOL);
        if !covered {
            cores.push(j);
        }
    }

    let mut member_of = Vec::with_capacity(n);
    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); cores.len()];
    for j in 0..n {
        // Nearest core; equal distances go to the lower location index.
        let (slot, _) = cores
            .iter()
            .enumerate()
            .min_by(|&(_, &a), &(_, &b)| {
                inst.cost(a, j).total_cmp(&inst.cost(b, j)).then(a.cmp(&b))
            })
            .expect("at least one core");
        member_of.push(cores[slot]);
        members[slot].push(j);
    }

    let clusters = cores
        .into_iter()
        .zip(members)
        .map(|(core, mut members)| {
            members.sort_by(|&a, &b| {
                inst.cost(core, a)
                    .total_cmp(&inst.cost(core, b))
                    .then((a != core).cmp(&(b != core)))
                    .then(a.cmp(&b))
            });
            let mass = members.iter().map(|&j| frac.y[j]).sum();
            Cluster {
                core,
                members,
                mass,
            }
        })
        .collect();

    Ok(ClusterStructure {
        alpha,
        clusters,
        member_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Matrix;
    use alloc::vec;
    use alloc::vec::Vec;

    fn frac_with(n: usize, conn_cost: Vec<f64>, y: Vec<f64>) -> FractionalSolution {
        FractionalSolution {
            x: Matrix::identity(n),
            y,
            conn_cost,
            objective: 0.0,
        }
    }

    #[test]
    fn single_location() {
        let inst = Instance::new(Matrix::zeros(1, 1), vec![1.0], 1.0, 1).unwrap();
        let s = run_clustering(&inst, &frac_with(1, vec![0.0], vec![1.0]), 4.0).unwrap();
        assert_eq!(s.cores(), vec![0]);
        assert_eq!(s.clusters[0].members, vec![0]);
        assert_eq!(s.member_of, vec![0]);
    }

    #[test]
    fn hand_traced_three_locations() {
        let cost = vec![
            vec![0.0, 100.0, 1.0],
            vec![100.0, 0.0, 100.0],
            vec![1.0, 100.0, 0.0],
        ];
        let inst = Instance::new(Matrix::from_rows(cost).unwrap(), vec![1.0; 3], 3.0, 2).unwrap();
        let f = frac_with(3, vec![1.0; 3], vec![1.0, 1.0, 0.0]);
        let s = run_clustering(&inst, &f, 4.0).unwrap();
        assert_eq!(s.cores(), vec![0, 1]);
        assert_eq!(s.clusters[0].members, vec![0, 2]);
        assert_eq!(s.clusters[1].members, vec![1]);
        assert_eq!(s.member_of, vec![0, 1, 0]);
    }

    #[test]
    fn co_located_points_form_one_cluster() {
        let inst = Instance::new(Matrix::zeros(4, 4), vec![1.0; 4], 4.0, 1).unwrap();
        let f = frac_with(4, vec![0.0, 0.0, 0.0, 0.0], vec![0.25; 4]);
        let s = run_clustering(&inst, &f, 4.0).unwrap();
        assert_eq!(s.cores(), vec![0]);
        assert_eq!(s.clusters[0].members, vec![0, 1, 2, 3]);
        assert!((s.clusters[0].mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn core_stays_first_among_co_located_members() {
        // Location 1 has the smallest C and becomes the core; 0 sits on top of it.
        let inst = Instance::new(Matrix::zeros(2, 2), vec![1.0; 2], 2.0, 1).unwrap();
        let f = frac_with(2, vec![0.5, 0.1], vec![0.5, 0.5]);
        let s = run_clustering(&inst, &f, 4.0).unwrap();
        assert_eq!(s.cores(), vec![1]);
        assert_eq!(s.clusters[0].members, vec![1, 0]);
    }

    #[test]
    fn equidistant_location_joins_lower_core() {
        let cost = vec![
            vec![0.0, 10.0, 5.0],
            vec![10.0, 0.0, 5.0],
            vec![5.0, 5.0, 0.0],
        ];
        let inst = Instance::new(Matrix::from_rows(cost).unwrap(), vec![1.0; 3], 3.0, 2).unwrap();
        let f = frac_with(3, vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]);
        let s = run_clustering(&inst, &f, 4.0).unwrap();
        assert_eq!(s.cores(), vec![0, 1]);
        assert_eq!(s.member_of[2], 0);
    }

    #[test]
    fn alpha_below_four_is_rejected() {
        let inst = Instance::new(Matrix::zeros(1, 1), vec![1.0], 1.0, 1).unwrap();
        let f = frac_with(1, vec![0.0], vec![1.0]);
        assert_eq!(
            run_clustering(&inst, &f, 3.0),
            Err(Error::AlphaTooSmall(3.0))
        );
    }
}

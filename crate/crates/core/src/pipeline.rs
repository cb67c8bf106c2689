//! The full rounding pipeline, with every intermediate stage kept.

use crate::cluster::{check_alpha, run_clustering, ClusterStructure};
use crate::concentrate::{
    concentrate_all_observed, try_easy_case, ConcentratedSolution, TransferObserver,
};
use crate::error::{Error, Result};
use crate::lp::solve_relaxation;
use crate::model::{validate_instance, FractionalSolution, Instance, IntegralSolution};
use crate::redistribute::{run_redistribute, RedistributedSolution};
use crate::stars::{
    assemble_integral, build_forest, decompose_to_stars, round_star, Decomposition, StarForest,
    StarRounding,
};
use crate::verify::{verify_guarantees, GuaranteeReport};

/// Which branch produced the integral solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelinePath {
    /// `N1 ∪ N2` is opened as is.
    Easy,
    /// Redistribution and star rounding.
    Full,
    /// Concentration left a single candidate center.
    TrivialSingle,
}

impl PipelinePath {
    pub fn as_str(self) -> &'static str {
        match self {
            PipelinePath::Easy => "easy",
            PipelinePath::Full => "full",
            PipelinePath::TrivialSingle => "trivial-single",
        }
    }
}

impl core::fmt::Display for PipelinePath {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stages of the full path.
#[derive(Debug, Clone, PartialEq)]
pub struct StarStages {
    pub redistributed: RedistributedSolution,
    pub forest: StarForest,
    pub decomposition: Decomposition,
    pub roundings: alloc::vec::Vec<StarRounding>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub alpha: f64,
    pub path: PipelinePath,
    pub frac: FractionalSolution,
    pub clusters: ClusterStructure,
    pub conc: ConcentratedSolution,
    pub stars: Option<StarStages>,
    pub solution: IntegralSolution,
}

impl SolveOutcome {
    /// `C_LP`.
    pub fn lp_cost(&self) -> f64 {
        self.frac.objective
    }

    pub fn verify(&self, inst: &Instance) -> GuaranteeReport {
        verify_guarantees(inst, self.lp_cost(), &self.solution, self.alpha)
    }
}

/// Validates `inst`, solves the LP relaxation and rounds it.
pub fn solve(inst: &Instance, alpha: f64) -> Result<SolveOutcome> {
    validate_instance(inst).into_result()?;
    check_alpha(alpha)?;
    let frac = solve_relaxation(inst)?;
    round(inst, frac, alpha)
}

/// Rounds an LP optimum already in hand, e.g. to reuse one LP across
/// several values of `α`.
pub fn round(inst: &Instance, frac: FractionalSolution, alpha: f64) -> Result<SolveOutcome> {
    round_observed(inst, frac, alpha, &mut ())
}

/// [`round`] with a hook around every concentration transfer.
pub fn round_observed<O: TransferObserver + ?Sized>(
    inst: &Instance,
    frac: FractionalSolution,
    alpha: f64,
    observer: &mut O,
) -> Result<SolveOutcome> {
    check_alpha(alpha)?;
    let clusters = run_clustering(inst, &frac, alpha)?;
    let conc = concentrate_all_observed(inst, &frac, &clusters, observer)?;

    let single = conc.n1.len() + conc.n2.len() == 1;
    if let Some(solution) = try_easy_case(inst, &conc)? {
        let path = if single {
            PipelinePath::TrivialSingle
        } else {
            PipelinePath::Easy
        };
        return Ok(SolveOutcome {
            alpha,
            path,
            frac,
            clusters,
            conc,
            stars: None,
            solution,
        });
    }
    if single {
        return Err(Error::Internal(
            "a single candidate center must take the easy path".into(),
        ));
    }

    let redistributed = run_redistribute(inst, &conc)?;
    let forest = build_forest(&redistributed)?;
    let decomposition = decompose_to_stars(inst, &forest)?;
    let roundings = decomposition
        .stars
        .iter()
        .map(|s| round_star(inst, s, &forest.yhat, &conc.dprime, alpha))
        .collect::<Result<alloc::vec::Vec<_>>>()?;
    let solution = assemble_integral(inst, &decomposition, &roundings, &conc)?;
    Ok(SolveOutcome {
        alpha,
        path: PipelinePath::Full,
        frac,
        clusters,
        conc,
        stars: Some(StarStages {
            redistributed,
            forest,
            decomposition,
            roundings,
        }),
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Matrix;
    use alloc::vec;

    #[test]
    fn single_location() {
        let inst = Instance::new(Matrix::zeros(1, 1), vec![1.0], 1.0, 1).unwrap();
        let out = solve(&inst, 4.0).unwrap();
        assert_eq!(out.path, PipelinePath::TrivialSingle);
        assert_eq!(out.solution.open, vec![true]);
        assert_eq!(out.solution.cost, 0.0);
        assert!(out.verify(&inst).all_ok());
    }

    #[test]
    fn three_location_example_passes_verifier() {
        let cost = vec![
            vec![0.0, 100.0, 1.0],
            vec![100.0, 0.0, 100.0],
            vec![1.0, 100.0, 0.0],
        ];
        let inst = Instance::new(Matrix::from_rows(cost).unwrap(), vec![1.0; 3], 3.0, 2).unwrap();
        let out = solve(&inst, 4.0).unwrap();
        let r = out.verify(&inst);
        assert!(r.all_ok(), "{r:?}");
    }

    #[test]
    fn alpha_is_checked_first() {
        let inst = Instance::new(Matrix::zeros(1, 1), vec![1.0], 1.0, 1).unwrap();
        assert_eq!(solve(&inst, 3.0).unwrap_err(), Error::AlphaTooSmall(3.0));
    }

    #[test]
    fn invalid_instance_is_reported() {
        let inst = Instance::new(Matrix::zeros(1, 1), vec![2.0], 1.0, 1).unwrap();
        assert!(matches!(solve(&inst, 4.0), Err(Error::InvalidInstance(_))));
    }
}

//! Batch runs over generated plane instances, one CSV row per `(instance, α)`.

use std::io::Write;

use ckm_core::lp::solve_relaxation;
use ckm_core::oracle::exact_opt;
use ckm_core::pipeline::round;
use ckm_core::verify::GuaranteeReport;
use ckm_core::{Instance, PipelinePath};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::CliError;
use crate::generate::{generate, GenParams, Geometry};

pub const HEADER: [&str; 10] = [
    "seed",
    "n",
    "alpha",
    "C_LP",
    "OPT?",
    "rounded cost",
    "ratio-vs-LP",
    "centers",
    "max-load-ratio",
    "easy-case?",
];

/// The oracle column is filled up to this size.
pub const OPT_MAX_N: usize = 12;
const DEMAND_MAX: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchParams {
    pub count: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub alphas: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub seed: u64,
    pub n: usize,
    pub alpha: f64,
    pub lp_cost: f64,
    pub opt: Option<f64>,
    pub cost: f64,
    pub ratio_vs_lp: f64,
    pub centers: usize,
    pub max_load_ratio: f64,
    /// The easy branch fired, including its single-center special case.
    pub easy: bool,
}

impl BenchRow {
    fn record(&self) -> [String; 10] {
        [
            self.seed.to_string(),
            self.n.to_string(),
            self.alpha.to_string(),
            self.lp_cost.to_string(),
            self.opt.map(|v| v.to_string()).unwrap_or_default(),
            self.cost.to_string(),
            self.ratio_vs_lp.to_string(),
            self.centers.to_string(),
            self.max_load_ratio.to_string(),
            self.easy.to_string(),
        ]
    }
}

/// One instance run at every `α`, with the verifier's verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub instance: Instance,
    pub rows: Vec<BenchRow>,
    pub reports: Vec<GuaranteeReport>,
}

impl BenchParams {
    pub fn check(&self) -> Result<(), CliError> {
        if self.alphas.is_empty() {
            return Err(CliError::Usage(
                "--alpha-list must name at least one α".into(),
            ));
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(CliError::Usage(format!(
                "--n-range {}..{} is empty",
                self.n_min, self.n_max
            )));
        }
        Ok(())
    }

    /// Seed, size, budget and the instance for run `index`.
    pub fn instance(&self, index: usize) -> Result<(u64, Instance), CliError> {
        let seed = self.seed.wrapping_add(index as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let n = rng.random_range(self.n_min..=self.n_max);
        let k = rng.random_range((n / 4).max(1)..=(n / 2).max(1));
        let inst = generate(&GenParams {
            n,
            seed,
            demand_max: DEMAND_MAX,
            capacity: None,
            k: Some(k),
            geometry: Geometry::Plane,
        })?;
        Ok((seed, inst))
    }

    /// Solves the LP once and rounds it at every `α`.
    pub fn evaluate(&self, index: usize) -> Result<Evaluation, CliError> {
        let (seed, inst) = self.instance(index)?;
        let frac = solve_relaxation(&inst)?;
        let opt = if inst.n() <= OPT_MAX_N {
            Some(exact_opt(&inst, 1.0)?.cost)
        } else {
            None
        };
        let mut rows = Vec::with_capacity(self.alphas.len());
        let mut reports = Vec::with_capacity(self.alphas.len());
        for &alpha in &self.alphas {
            let out = round(&inst, frac.clone(), alpha)?;
            let report = out.verify(&inst);
            rows.push(BenchRow {
                seed,
                n: inst.n(),
                alpha,
                lp_cost: out.lp_cost(),
                opt,
                cost: out.solution.cost,
                ratio_vs_lp: report.ratio_vs_lp(),
                centers: out.solution.centers(),
                max_load_ratio: out.solution.max_load_ratio,
                easy: out.path != PipelinePath::Full,
            });
            reports.push(report);
        }
        Ok(Evaluation {
            instance: inst,
            rows,
            reports,
        })
    }
}

/// Runs every instance in parallel and returns the rows in input order.
/// Fails on the first (lowest-index) instance the verifier rejects.
pub fn run_bench(params: &BenchParams) -> Result<Vec<BenchRow>, CliError> {
    params.check()?;
    let evaluations: Vec<Result<Evaluation, CliError>> = (0..params.count)
        .into_par_iter()
        .map(|i| params.evaluate(i))
        .collect();
    let mut rows = Vec::with_capacity(params.count * params.alphas.len());
    for ev in evaluations {
        let ev = ev?;
        for (row, report) in ev.rows.into_iter().zip(&ev.reports) {
            if !report.all_ok() {
                return Err(CliError::Verifier {
                    context: format!("seed {} at alpha {}", row.seed, row.alpha),
                    detail: format!("{report:?}"),
                });
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

//! Seeded random instances.

use ckm_core::ckl::{validate_ckl, CklInstance};
use ckm_core::model::validate_instance;
use ckm_core::{FractionalSolution, Instance, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

/// Draws allowed before giving up on `Σd ≤ kM`.
pub const MAX_DRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Geometry {
    /// Uniform points in the unit square, Euclidean distances.
    Plane,
    /// Independent symmetric distances in `[1, 2)`, which are always metric.
    UniformMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub seed: u64,
    /// Demands are integers in `1..=demand_max`.
    pub demand_max: u32,
    /// When absent, `M = Σd/k · s` with `s` drawn from `[1, 1.5)`.
    pub capacity: Option<f64>,
    /// When absent, `max(1, n/3)`.
    pub k: Option<usize>,
    pub geometry: Geometry,
}

/// Pairwise distances between `n` points.
fn costs(rng: &mut ChaCha8Rng, n: usize, geometry: Geometry) -> Vec<Vec<f64>> {
    match geometry {
        Geometry::Plane => {
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
            pts.iter()
                .map(|a| pts.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
                .collect()
        }
        Geometry::UniformMatrix => {
            let mut c = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    let v = rng.random_range(1.0..2.0);
                    c[i][j] = v;
                    c[j][i] = v;
                }
            }
            c
        }
    }
}

impl GenParams {
    fn check(&self) -> Result<(), CliError> {
        if self.n == 0 {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        if self.demand_max == 0 {
            return Err(CliError::Usage("--demand-max must be at least 1".into()));
        }
        if self.k == Some(0) {
            return Err(CliError::Usage("--k must be at least 1".into()));
        }
        if let Some(m) = self.capacity {
            if !(m.is_finite() && m > 0.0) {
                return Err(CliError::Usage(format!(
                    "--capacity must be positive (got {m})"
                )));
            }
        }
        Ok(())
    }

    /// Demands and a capacity for `k` centers; `None` capacity is derived.
    fn demands(&self, rng: &mut ChaCha8Rng, k: usize) -> (Vec<f64>, f64) {
        let demand: Vec<f64> = (0..self.n)
            .map(|_| f64::from(rng.random_range(1..=self.demand_max)))
            .collect();
        let total: f64 = demand.iter().sum();
        let capacity = match self.capacity {
            Some(m) => m,
            None => total / k as f64 * rng.random_range(1.0..1.5),
        };
        (demand, capacity)
    }
}

/// Redraws until the instance validates, at most [`MAX_DRAWS`] times.
fn retry<T>(mut draw: impl FnMut() -> Result<Result<T, String>, CliError>) -> Result<T, CliError> {
    let mut last = String::new();
    for _ in 0..MAX_DRAWS {
        match draw()? {
            Ok(v) => return Ok(v),
            Err(reason) => last = reason,
        }
    }
    Err(CliError::Generator {
        attempts: MAX_DRAWS,
        reason: last,
    })
}

pub fn generate(p: &GenParams) -> Result<Instance, CliError> {
    p.check()?;
    let k = p.k.unwrap_or((p.n / 3).max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    retry(|| {
        let cost = costs(&mut rng, p.n, p.geometry);
        let (demand, capacity) = p.demands(&mut rng, k);
        let inst = Instance::new(Matrix::from_rows(cost)?, demand, capacity, k)?;
        let report = validate_instance(&inst);
        Ok(if report.is_ok() {
            Ok(inst)
        } else {
            Err(report.to_string())
        })
    })
}

/// A facility/client instance with `facilities` facilities and `p.n`
/// clients, all drawn from one metric. `k` defaults to
/// `max(1, facilities/3)`.
pub fn generate_ckl(p: &GenParams, facilities: usize) -> Result<CklInstance, CliError> {
    p.check()?;
    if facilities == 0 {
        return Err(CliError::Usage("--facilities must be at least 1".into()));
    }
    let k = p.k.unwrap_or((facilities / 3).max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    retry(|| {
        let all = costs(&mut rng, facilities + p.n, p.geometry);
        let ff = all[..facilities]
            .iter()
            .map(|r| r[..facilities].to_vec())
            .collect();
        let fd = all[..facilities]
            .iter()
            .map(|r| r[facilities..].to_vec())
            .collect();
        let (demand, capacity) = p.demands(&mut rng, k);
        let ckl = CklInstance::new(
            Matrix::from_rows(ff)?,
            Matrix::from_rows(fd)?,
            demand,
            capacity,
            k,
        )?;
        let report = validate_ckl(&ckl)?;
        Ok(if report.is_ok() {
            Ok(ckl)
        } else {
            Err(report.to_string())
        })
    })
}

/// A feasible fractional solution that drives the rounding through
/// redistribution and star rounding, with its instance.
///
/// Ten to twelve sites sit on a near-uniform metric (distances in
/// `[1, 1.1]`). Each keeps `y = 1 - w` of its own demand and spreads the
/// remaining `w` over the other locations, with `Σ w ≥ 1` and every `w`
/// around `0.1`. That keeps `C_j` small enough for each site to be its own
/// non-terminal core while leaving `Σ_{N2} y' ≤ |N2| - 1`. An optional heavy
/// location (`y = 1`), possibly with a co-located partner, adds a terminal
/// cluster. Capacity is the smallest that makes the point feasible, times a
/// random slack.
///
/// Rounding only ever charges against the cost of the point it is given,
/// so the guarantees hold relative to `frac.objective` even though the
/// point is not an LP optimum.
pub fn star_branch_fixture(seed: u64) -> (Instance, FractionalSolution) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites = rng.random_range(10..=12);
    let heavy = rng.random_range(0..=1usize);
    let partnered = rng.random_bool(0.5) && heavy > 0;
    let n = sites + heavy + usize::from(partnered);

    let mut cost = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = 1.0 + 0.1 * rng.random::<f64>();
            cost[i][j] = v;
            cost[j][i] = v;
        }
    }
    // The partner (last index) copies the heavy location's distances.
    let (h, q) = (sites, n - 1);
    if partnered {
        for j in 0..n {
            cost[q][j] = cost[h][j];
            cost[j][q] = cost[h][j];
        }
        cost[h][q] = 0.02;
        cost[q][h] = 0.02;
        cost[q][q] = 0.0;
    }

    let demand: Vec<f64> = (0..n)
        .map(|_| f64::from(rng.random_range(1..=5u32)))
        .collect();
    let total_w = rng.random_range(1.0..(0.1 * sites as f64).max(1.0 + 1e-9));
    let raw: Vec<f64> = (0..sites).map(|_| rng.random_range(0.85..1.15)).collect();
    let raw_sum: f64 = raw.iter().sum();

    let mut y = vec![1.0; n];
    let mut x = Matrix::zeros(n, n);
    for l in 0..sites {
        let w = total_w * raw[l] / raw_sum;
        y[l] = 1.0 - w;
        x[(l, l)] = y[l];
        let others: Vec<usize> = (0..n).filter(|&i| i != l).collect();
        let weights: Vec<f64> = others.iter().map(|_| rng.random::<f64>() + 0.05).collect();
        let ws: f64 = weights.iter().sum();
        for (&i, &wt) in others.iter().zip(&weights) {
            x[(i, l)] = w * wt / ws;
        }
    }
    for i in sites..sites + heavy {
        x[(i, i)] = 1.0;
    }
    if partnered {
        let u = rng.random_range(0.2..0.85);
        y[q] = u;
        x[(q, q)] = u;
        x[(h, q)] = 1.0 - u;
    }

    let load = |i: usize| -> f64 { (0..n).map(|j| demand[j] * x[(i, j)]).sum() };
    let need = (0..n).map(|i| load(i) / y[i]).fold(0.0, f64::max);
    let dmax = demand.iter().copied().fold(0.0, f64::max);
    let capacity = (need * rng.random_range(1.0..1.3)).max(dmax);
    let budget = (y.iter().sum::<f64>() - 1e-12).ceil() as usize;
    let inst = Instance::new(
        Matrix::from_rows(cost).expect("square"),
        demand,
        capacity,
        budget,
    )
    .expect("consistent sizes");
    let frac = FractionalSolution::with_costs(&inst, x, y);
    (inst, frac)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(geometry: Geometry) -> GenParams {
        GenParams {
            n: 12,
            seed: 7,
            demand_max: 5,
            capacity: None,
            k: Some(4),
            geometry,
        }
    }

    #[test]
    fn deterministic_and_valid() {
        for g in [Geometry::Plane, Geometry::UniformMatrix] {
            let a = generate(&params(g)).unwrap();
            assert_eq!(a, generate(&params(g)).unwrap());
            assert!(validate_instance(&a).is_ok());
            assert_eq!(a.budget(), 4);
        }
    }

    #[test]
    fn impossible_capacity_is_rejected() {
        let p = GenParams {
            capacity: Some(1.0),
            k: Some(1),
            ..params(Geometry::Plane)
        };
        let err = generate(&p).unwrap_err();
        assert!(
            matches!(
                err,
                CliError::Generator {
                    attempts: MAX_DRAWS,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn ckl_blocks_share_one_metric() {
        let ckl = generate_ckl(&params(Geometry::Plane), 5).unwrap();
        assert_eq!((ckl.facilities(), ckl.clients()), (5, 12));
        assert!(validate_ckl(&ckl).unwrap().is_ok());
        assert_eq!(ckl, generate_ckl(&params(Geometry::Plane), 5).unwrap());
    }

    #[test]
    fn star_fixture_is_feasible() {
        for seed in 0..20 {
            let (inst, frac) = star_branch_fixture(seed);
            assert!(frac.feasibility_errors(&inst).is_empty());
            assert!(validate_instance(&inst).is_ok());
        }
    }

    #[test]
    fn default_budget() {
        let p = GenParams {
            k: None,
            ..params(Geometry::Plane)
        };
        assert_eq!(generate(&p).unwrap().budget(), 4);
    }
}

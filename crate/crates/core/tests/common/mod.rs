#![allow(dead_code)]

use ckm_core::{Instance, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random points in the unit square with Euclidean distances, integer
/// demands in `1..=dmax` and a capacity that keeps `Σd ≤ kM`.
pub fn plane_instance(seed: u64, n: usize, k: usize, dmax: u32) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let cost: Vec<Vec<f64>> = pts
        .iter()
        .map(|a| {
            pts.iter()
                .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                .collect()
        })
        .collect();
    let demand: Vec<f64> = (0..n).map(|_| rng.random_range(1..=dmax) as f64).collect();
    let total: f64 = demand.iter().sum();
    let slack = rng.random_range(1.0..1.6);
    let capacity = (total / k as f64 * slack).max(demand.iter().cloned().fold(0.0, f64::max) * 0.5);
    let capacity = capacity.max(total / k as f64);
    Instance::new(Matrix::from_rows(cost).unwrap(), demand, capacity, k).unwrap()
}

/// Facilities and clients drawn independently in the unit square.
pub fn plane_ckl(seed: u64, f: usize, d: usize, k: usize) -> ckm_core::ckl::CklInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fac: Vec<(f64, f64)> = (0..f).map(|_| (rng.random(), rng.random())).collect();
    let cli: Vec<(f64, f64)> = (0..d).map(|_| (rng.random(), rng.random())).collect();
    let dist = |a: &(f64, f64), b: &(f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let ff: Vec<Vec<f64>> = fac
        .iter()
        .map(|a| fac.iter().map(|b| dist(a, b)).collect())
        .collect();
    let fd: Vec<Vec<f64>> = fac
        .iter()
        .map(|a| cli.iter().map(|b| dist(a, b)).collect())
        .collect();
    let demand: Vec<f64> = (0..d).map(|_| rng.random_range(1..=4) as f64).collect();
    let total: f64 = demand.iter().sum();
    let capacity = total / k as f64 * rng.random_range(1.0..1.5);
    ckm_core::ckl::CklInstance::new(
        Matrix::from_rows(ff).unwrap(),
        Matrix::from_rows(fd).unwrap(),
        demand,
        capacity,
        k,
    )
    .unwrap()
}

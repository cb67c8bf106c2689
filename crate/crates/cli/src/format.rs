//! JSON instance and solution files.
//!
//! Floats go through `serde_json` with `float_roundtrip`, so every number
//! written is read back bit for bit.

use std::path::Path;

use ckm_core::ckl::{CklInstance, CklSolution};
use ckm_core::{Instance, IntegralSolution, Matrix, PipelinePath};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// On-disk instance. For the facility/client model `facilities` is set,
/// `cost` is `f × (f + |D|)` (facility block, then client block), `demand`
/// covers the clients and `n = |D|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facilities: Option<usize>,
    pub cost: Vec<Vec<f64>>,
    pub demand: Vec<f64>,
    pub capacity: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Ckm(Instance),
    Ckl(CklInstance),
}

fn shape(msg: String) -> CliError {
    CliError::Format(msg)
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        Self {
            n: inst.n(),
            facilities: None,
            cost: inst.cost_matrix().to_rows(),
            demand: inst.demand().to_vec(),
            capacity: inst.capacity(),
            k: inst.budget(),
        }
    }

    pub fn from_ckl(ckl: &CklInstance) -> Self {
        let f = ckl.facilities();
        let cost = (0..f)
            .map(|i| {
                let mut row = ckl.facility_costs().row(i).to_vec();
                row.extend_from_slice(ckl.client_costs().row(i));
                row
            })
            .collect();
        Self {
            n: ckl.clients(),
            facilities: Some(f),
            cost,
            demand: ckl.demand().to_vec(),
            capacity: ckl.capacity(),
            k: ckl.budget(),
        }
    }

    /// Checks the declared sizes and builds the in-memory problem. Metric
    /// and capacity checks are left to the solver.
    pub fn into_problem(self) -> Result<Problem, CliError> {
        if self.demand.len() != self.n {
            return Err(shape(format!(
                "demand has {} entries, expected n = {}",
                self.demand.len(),
                self.n
            )));
        }
        match self.facilities {
            None => {
                if self.cost.len() != self.n || self.cost.iter().any(|r| r.len() != self.n) {
                    return Err(shape(format!("cost must be {0}×{0}", self.n)));
                }
                let cost = Matrix::from_rows(self.cost)?;
                Ok(Problem::Ckm(Instance::new(
                    cost,
                    self.demand,
                    self.capacity,
                    self.k,
                )?))
            }
            Some(f) => {
                let width = f + self.n;
                if self.cost.len() != f || self.cost.iter().any(|r| r.len() != width) {
                    return Err(shape(format!(
                        "cost must be {f}×{width} (facilities × (facilities + clients))"
                    )));
                }
                let ff = self.cost.iter().map(|r| r[..f].to_vec()).collect();
                let fd = self.cost.iter().map(|r| r[f..].to_vec()).collect();
                let ckl = CklInstance::new(
                    Matrix::from_rows(ff)?,
                    Matrix::from_rows(fd)?,
                    self.demand,
                    self.capacity,
                    self.k,
                )?;
                Ok(Problem::Ckl(ckl))
            }
        }
    }
}

/// On-disk solution. `assign` lists `[center, location, fraction]` for every
/// non-zero entry in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub open: Vec<u8>,
    pub assign: Vec<(usize, usize, f64)>,
    pub cost: f64,
    pub max_load_ratio: f64,
    pub alpha: f64,
    pub path: String,
    /// Cost of the LP solution that was rounded, so the file can be
    /// re-verified on its own.
    pub lp_cost: f64,
}

fn sparse(assign: &Matrix) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for i in 0..assign.rows() {
        for (j, &v) in assign.row(i).iter().enumerate() {
            if v != 0.0 {
                out.push((i, j, v));
            }
        }
    }
    out
}

impl SolutionFile {
    pub fn from_ckm(sol: &IntegralSolution, alpha: f64, path: PipelinePath, lp_cost: f64) -> Self {
        Self {
            open: sol.open.iter().map(|&o| u8::from(o)).collect(),
            assign: sparse(&sol.assign),
            cost: sol.cost,
            max_load_ratio: sol.max_load_ratio,
            alpha,
            path: path.as_str().to_string(),
            lp_cost,
        }
    }

    pub fn from_ckl(sol: &CklSolution, alpha: f64, path: PipelinePath, lp_cost: f64) -> Self {
        Self {
            open: sol.open.iter().map(|&o| u8::from(o)).collect(),
            assign: sparse(&sol.assign),
            cost: sol.cost,
            max_load_ratio: sol.max_load_ratio,
            alpha,
            path: path.as_str().to_string(),
            lp_cost,
        }
    }

    fn dense(&self, rows: usize, cols: usize) -> Result<Matrix, CliError> {
        if self.open.len() != rows {
            return Err(shape(format!(
                "open has {} entries, expected {rows}",
                self.open.len()
            )));
        }
        let mut m = Matrix::zeros(rows, cols);
        for &(i, j, v) in &self.assign {
            if i >= rows || j >= cols {
                return Err(shape(format!("assign entry [{i}, {j}] is out of range")));
            }
            m[(i, j)] = v;
        }
        Ok(m)
    }

    /// Rebuilds the solution against `inst`, recomputing cost and loads.
    pub fn to_integral(&self, inst: &Instance) -> Result<IntegralSolution, CliError> {
        let assign = self.dense(inst.n(), inst.n())?;
        let open = self.open.iter().map(|&o| o != 0).collect();
        Ok(IntegralSolution::new(inst, open, assign)?)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

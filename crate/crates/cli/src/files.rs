//! On-disk instance and measurement formats.
//!
//! Complex entries are `[re, im]` pairs and matrices are row-major nested
//! arrays:
//!
//! ```json
//! {
//!   "dim": 2,
//!   "states": [
//!     {"prior": 0.5, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
//!     {"prior": 0.5, "matrix": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]}
//!   ],
//!   "sets": [[0], [1]]
//! }
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use udisc::model::{merge_sets, validate_instance, SetInstance};
use udisc::{ComplexMatrix, DiscriminationInstance, Tolerances};

use crate::CliError;

pub const POVM_FORMAT: &str = "udisc-povm/1";

pub type MatrixData = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub prior: f64,
    pub matrix: MatrixData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub dim: usize,
    pub states: Vec<StateFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmFile {
    pub format: String,
    pub dim: usize,
    /// `Π_0` (inconclusive) first.
    pub operators: Vec<MatrixData>,
}

/// A parsed instance. Set files are merged into one state per set.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub instance: DiscriminationInstance,
    /// Flat state indices of every set, when the file declares sets.
    pub sets: Option<Vec<Vec<usize>>>,
}

pub fn matrix_to_data(m: &ComplexMatrix) -> MatrixData {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn data_to_matrix(dim: usize, data: &MatrixData, what: &str) -> Result<ComplexMatrix, CliError> {
    if data.len() != dim {
        return Err(CliError::Input(format!(
            "{what}: matrix has {} rows, expected {dim}",
            data.len()
        )));
    }
    let mut flat = Vec::with_capacity(dim * dim);
    for (r, row) in data.iter().enumerate() {
        if row.len() != dim {
            return Err(CliError::Input(format!(
                "{what}, row {r}: {} entries, expected {dim}",
                row.len()
            )));
        }
        flat.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
    }
    Ok(ComplexMatrix::from_row_major(dim, dim, flat))
}

pub fn instance_to_file(instance: &DiscriminationInstance) -> InstanceFile {
    InstanceFile {
        dim: instance.dim(),
        states: instance
            .entries()
            .iter()
            .map(|e| StateFile {
                prior: e.prior,
                matrix: matrix_to_data(e.state.matrix()),
            })
            .collect(),
        sets: None,
    }
}

pub fn parse_instance(text: &str, tol: &Tolerances, normalize_priors: bool) -> Result<Loaded, CliError> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("instance file: {e}")))?;
    load_instance(file, tol, normalize_priors)
}

pub fn load_instance(
    mut file: InstanceFile,
    tol: &Tolerances,
    normalize_priors: bool,
) -> Result<Loaded, CliError> {
    if file.dim == 0 {
        return Err(CliError::Input("dim must be positive".into()));
    }
    if normalize_priors {
        let total: f64 = file.states.iter().map(|s| s.prior).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(CliError::Input(format!("cannot normalize priors summing to {total}")));
        }
        for s in &mut file.states {
            s.prior /= total;
        }
    }
    let mut raw = Vec::with_capacity(file.states.len());
    for (i, s) in file.states.iter().enumerate() {
        raw.push((s.prior, data_to_matrix(file.dim, &s.matrix, &format!("state {i}"))?));
    }
    match file.sets {
        None => {
            let instance = validate_instance(file.dim, raw, tol)?;
            Ok(Loaded { instance, sets: None })
        }
        Some(sets) => {
            let mut seen = vec![false; raw.len()];
            for set in &sets {
                for &k in set {
                    match seen.get_mut(k) {
                        None => {
                            return Err(CliError::Input(format!(
                                "sets: state index {k} out of range for {} states",
                                raw.len()
                            )))
                        }
                        Some(true) => {
                            return Err(CliError::Input(format!("sets: state {k} listed twice")))
                        }
                        Some(s) => *s = true,
                    }
                }
            }
            if let Some(k) = seen.iter().position(|&s| !s) {
                return Err(CliError::Input(format!("sets: state {k} belongs to no set")));
            }
            let grouped = sets
                .iter()
                .map(|set| set.iter().map(|&k| raw[k].clone()).collect())
                .collect();
            let set_instance = SetInstance::new(file.dim, grouped, tol)?;
            let merged = merge_sets(&set_instance)?;
            Ok(Loaded {
                instance: merged.instance,
                sets: Some(sets),
            })
        }
    }
}

pub fn povm_to_file(operators: &[ComplexMatrix]) -> PovmFile {
    PovmFile {
        format: POVM_FORMAT.into(),
        dim: operators.first().map_or(0, |o| o.rows()),
        operators: operators.iter().map(matrix_to_data).collect(),
    }
}

pub fn parse_povm(text: &str) -> Result<Vec<ComplexMatrix>, CliError> {
    let file: PovmFile =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("POVM file: {e}")))?;
    if file.format != POVM_FORMAT {
        return Err(CliError::Input(format!(
            "POVM file: format {:?}, expected {POVM_FORMAT:?}",
            file.format
        )));
    }
    file.operators
        .iter()
        .enumerate()
        .map(|(k, op)| data_to_matrix(file.dim, op, &format!("operator {k}")))
        .collect()
}

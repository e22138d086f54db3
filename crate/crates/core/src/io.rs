//! JSON model files: canonical serialization, loading with validation,
//! content digests.
//!
//! The document is self-describing: `horizon`, per-step `spaces` (element
//! lists with optional `coords`), dense `dynamics` / `observation` /
//! `terminal_cost` / optional `step_costs` tables indexed in declared
//! element order, `initial_states`, and per-step `metrics`. A metric is
//! either `{"dense": [[..]]}` or a positively weighted product of two
//! metrics `{"product": {"left": .., "right": .., "weight_left": w}}` (used
//! by composite state spaces where a dense table would be quadratic in the
//! product size).
//!
//! Canonical form: JSON with sorted keys, two-space indentation, shortest
//! round-trip float rendering (integers stay exact), trailing newline.
//! Byte-identical canonical output is the model's identity; digests are
//! SHA-256 over it.

use crate::error::{Error, Result};
use crate::metric::MetricTable;
use crate::model::SystemModel;
use crate::space::{FiniteSpace, PointSet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    horizon: usize,
    spaces: SpacesFile,
    dynamics: Vec<Vec<Vec<Vec<u32>>>>,
    observation: Vec<Vec<Vec<u32>>>,
    terminal_cost: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step_costs: Option<Vec<Vec<Vec<f64>>>>,
    initial_states: Vec<u32>,
    metrics: MetricsFile,
}

#[derive(Debug, Serialize, Deserialize)]
struct SpacesFile {
    state: Vec<SpaceFile>,
    action: Vec<SpaceFile>,
    disturbance: Vec<SpaceFile>,
    noise: Vec<SpaceFile>,
    observation: Vec<SpaceFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SpaceFile {
    elements: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<(i64, i64)>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum MetricFile {
    Dense { dense: Vec<Vec<f64>> },
    Product { product: Box<ProductFile> },
}

#[derive(Debug, Serialize, Deserialize)]
struct ProductFile {
    left: MetricFile,
    right: MetricFile,
    weight_left: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetricsFile {
    state: Vec<MetricFile>,
    observation: Vec<MetricFile>,
}

fn space_to_file(s: &FiniteSpace) -> SpaceFile {
    SpaceFile {
        elements: s.labels().to_vec(),
        coords: s.coords().map(|c| c.to_vec()),
    }
}

fn space_from_file(f: SpaceFile) -> Result<FiniteSpace> {
    match f.coords {
        Some(coords) => FiniteSpace::with_coords(f.elements, coords),
        None => FiniteSpace::new(f.elements),
    }
}

fn metric_to_file(m: &MetricTable<f64>) -> MetricFile {
    match m.components() {
        Some((left, right, weight)) => MetricFile::Product {
            product: Box::new(ProductFile {
                left: metric_to_file(left),
                right: metric_to_file(right),
                weight_left: *weight,
            }),
        },
        None => MetricFile::Dense {
            dense: m.to_rows(),
        },
    }
}

fn metric_from_file(f: MetricFile) -> Result<MetricTable<f64>> {
    match f {
        MetricFile::Dense { dense } => {
            let n = dense.len();
            let mut flat = Vec::with_capacity(n * n);
            for row in &dense {
                if row.len() != n {
                    return Err(Error::Schema {
                        field: "metrics".into(),
                        detail: format!("ragged dense metric: {} columns in an {n}-row table", row.len()),
                    });
                }
                flat.extend_from_slice(row);
            }
            MetricTable::dense(n, flat)
        }
        MetricFile::Product { product } => {
            let left = metric_from_file(product.left)?;
            let right = metric_from_file(product.right)?;
            MetricTable::product(left, right, product.weight_left)
        }
    }
}

fn model_to_file(model: &SystemModel<f64>) -> ModelFile {
    ModelFile {
        horizon: model.horizon,
        spaces: SpacesFile {
            state: model.state_spaces.iter().map(space_to_file).collect(),
            action: model.action_spaces.iter().map(space_to_file).collect(),
            disturbance: model
                .disturbance_spaces
                .iter()
                .map(space_to_file)
                .collect(),
            noise: model.noise_spaces.iter().map(space_to_file).collect(),
            observation: model
                .observation_spaces
                .iter()
                .map(space_to_file)
                .collect(),
        },
        dynamics: model.dynamics.clone(),
        observation: model.observation.clone(),
        terminal_cost: model.terminal_cost.clone(),
        step_costs: model.step_costs.clone(),
        initial_states: model.initial_states.iter().collect(),
        metrics: MetricsFile {
            state: model.state_metrics.iter().map(metric_to_file).collect(),
            observation: model
                .observation_metrics
                .iter()
                .map(metric_to_file)
                .collect(),
        },
    }
}

fn model_from_file(f: ModelFile) -> Result<SystemModel<f64>> {
    let spaces = |v: Vec<SpaceFile>| -> Result<Vec<FiniteSpace>> {
        v.into_iter().map(space_from_file).collect()
    };
    let metrics = |v: Vec<MetricFile>| -> Result<Vec<MetricTable<f64>>> {
        v.into_iter().map(metric_from_file).collect()
    };
    let model = SystemModel {
        horizon: f.horizon,
        state_spaces: spaces(f.spaces.state)?,
        action_spaces: spaces(f.spaces.action)?,
        disturbance_spaces: spaces(f.spaces.disturbance)?,
        noise_spaces: spaces(f.spaces.noise)?,
        observation_spaces: spaces(f.spaces.observation)?,
        dynamics: f.dynamics,
        observation: f.observation,
        terminal_cost: f.terminal_cost,
        step_costs: f.step_costs,
        initial_states: PointSet::new(f.initial_states),
        state_metrics: metrics(f.metrics.state)?,
        observation_metrics: metrics(f.metrics.observation)?,
    };
    model.into_validated()
}

/// Canonical JSON bytes of any serializable document: sorted keys, pretty
/// two-space indentation, trailing newline.
pub fn canonical_json_bytes<T: Serialize>(doc: &T) -> Result<Vec<u8>> {
    let value = serde_json::to_value(doc)?;
    let mut bytes = serde_json::to_vec_pretty(&value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Canonical serialization of a model.
pub fn model_to_canonical_bytes(model: &SystemModel<f64>) -> Result<Vec<u8>> {
    canonical_json_bytes(&model_to_file(model))
}

/// SHA-256 hex digest of the canonical serialization.
pub fn model_digest(model: &SystemModel<f64>) -> Result<String> {
    let bytes = model_to_canonical_bytes(model)?;
    Ok(hex_digest(&bytes))
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn save_model(model: &SystemModel<f64>, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_canonical_bytes(model)?)?;
    Ok(())
}

/// Loads, schema-checks and validates a model; validation violations are
/// surfaced as errors.
pub fn load_model(path: &Path) -> Result<SystemModel<f64>> {
    let bytes = std::fs::read(path)?;
    let file: ModelFile = serde_json::from_slice(&bytes)?;
    model_from_file(file)
}

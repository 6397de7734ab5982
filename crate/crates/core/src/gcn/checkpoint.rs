//! JSON model checkpoint: configuration, row-major tensors with shapes, the
//! input standardizer and the fingerprint of the training graph.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GcnConfig, GcnError, GcnParams};
use crate::features::Standardizer;
use crate::graphs::EegGraph;
use crate::preprocess::{BandDefinition, BandName};

pub const CHECKPOINT_FORMAT: &str = "bandgcn-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub band: BandDefinition,
    pub window_s: f64,
    pub config: GcnConfig,
    pub adjacency_fingerprint: String,
    pub standardizer: Option<Standardizer>,
    pub tensors: Vec<TensorRecord>,
}

impl Checkpoint {
    pub fn new(
        params: &GcnParams,
        config: &GcnConfig,
        band: BandDefinition,
        window_s: f64,
        graph: &EegGraph,
        standardizer: Option<Standardizer>,
    ) -> Self {
        let tensors = params
            .tensor_names()
            .into_iter()
            .zip(params.shapes())
            .zip(params.tensors())
            .map(|((name, shape), data)| TensorRecord {
                name,
                shape,
                data: data.to_vec(),
            })
            .collect();
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            band,
            window_s,
            config: config.clone(),
            adjacency_fingerprint: graph.fingerprint(),
            standardizer,
            tensors,
        }
    }

    /// Rebuilds parameters, checking names and shapes against the stored config.
    pub fn params(&self) -> Result<GcnParams, GcnError> {
        let bad = |m: String| GcnError::Checkpoint(m);
        if self.format != CHECKPOINT_FORMAT {
            return Err(bad(format!("unknown format {:?}", self.format)));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(bad(format!("unsupported version {}", self.version)));
        }
        let mut params = GcnParams::init(&self.config)?;
        let names = params.tensor_names();
        let shapes = params.shapes();
        if self.tensors.len() != names.len() {
            return Err(bad(format!("expected {} tensors, found {}", names.len(), self.tensors.len())));
        }
        for ((record, name), shape) in self.tensors.iter().zip(&names).zip(&shapes) {
            if &record.name != name || &record.shape != shape || record.data.len() != shape.iter().product::<usize>() {
                return Err(bad(format!("tensor {} {:?} does not match expected {name} {shape:?}", record.name, record.shape)));
            }
            if record.data.iter().any(|v| !v.is_finite()) {
                return Err(bad(format!("tensor {name} holds non-finite values")));
            }
        }
        for (dst, record) in params.tensors_mut().into_iter().zip(&self.tensors) {
            dst.copy_from_slice(&record.data);
        }
        Ok(params)
    }

    pub fn check_graph(&self, graph: &EegGraph) -> Result<(), GcnError> {
        let found = graph.fingerprint();
        if found != self.adjacency_fingerprint {
            return Err(GcnError::FingerprintMismatch {
                expected: self.adjacency_fingerprint.clone(),
                found,
            });
        }
        Ok(())
    }

    pub fn check_band(&self, band: BandName) -> Result<(), GcnError> {
        if band != self.band.name {
            return Err(GcnError::BandMismatch {
                expected: self.band.name.to_string(),
                found: band.to_string(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GcnError> {
        serde_json::from_str(text).map_err(|e| GcnError::Checkpoint(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self, GcnError> {
        let text = std::fs::read_to_string(path).map_err(|e| GcnError::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

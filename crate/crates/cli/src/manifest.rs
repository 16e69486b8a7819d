//! Run manifest embedded in every output file: reruns with an identical
//! manifest must reproduce byte-identical CSV bodies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_digest: String,
    pub seed_schedule: Vec<u64>,
    pub tool_version: String,
    pub cutoffs: BTreeMap<String, usize>,
    pub deficit_budgets: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config_bytes: &[u8], seeds: Vec<u64>) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_bytes);
        let digest = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>();
        Self {
            subcommand: subcommand.to_string(),
            config_digest: digest,
            seed_schedule: seeds,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            cutoffs: BTreeMap::new(),
            deficit_budgets: BTreeMap::new(),
        }
    }

    pub fn with_cutoff(mut self, name: &str, value: usize) -> Self {
        self.cutoffs.insert(name.to_string(), value);
        self
    }

    pub fn with_deficit(mut self, name: &str, value: f64) -> Self {
        self.deficit_budgets.insert(name.to_string(), value);
        self
    }

    /// Single-line JSON form for CSV comment headers.
    pub fn comment_line(&self) -> String {
        format!("# manifest {}", serde_json::to_string(self).unwrap())
    }
}

/// Full double precision: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

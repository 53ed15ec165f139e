//! Run manifests: every artifact records the exact inputs that produced it.
//!
//! Digests are content hashes, so re-running with identical inputs yields
//! identical digests; secrets never enter a manifest.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Short content id (first 12 hex chars of sha256).
pub fn short_digest(bytes: &[u8]) -> String {
    sha256_hex(bytes)[..12].to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Content-derived id: hash of the digest fields below, so identical
    /// inputs produce the identical run id.
    pub run_id: String,
    pub kind: String,
    pub seed: Option<u64>,
    pub taxonomy_digest: String,
    /// Digest of the backend configuration with secrets redacted; empty
    /// for commands that query no backend.
    #[serde(default)]
    pub backend_digest: String,
    /// Digest over the dataset's seed-determined content (excludes the
    /// k / debias overlay, so runs differing only in shots stay comparable).
    #[serde(default)]
    pub dataset_base_digest: String,
    /// Digest over the dataset file bytes.
    #[serde(default)]
    pub dataset_digest: String,
    /// Condition label for stats/score tables ("ZSP", "2-Shot", ...).
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub k: Option<u32>,
    #[serde(default)]
    pub debias_mode: Option<String>,
    pub created_at: String,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(kind: &str) -> Self {
        Self {
            run_id: String::new(),
            kind: kind.to_string(),
            seed: None,
            taxonomy_digest: String::new(),
            backend_digest: String::new(),
            dataset_base_digest: String::new(),
            dataset_digest: String::new(),
            label: String::new(),
            k: None,
            debias_mode: None,
            created_at: chrono::Utc::now().to_rfc3339(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Derives the run id from everything except the timestamp.
    pub fn finalize(mut self) -> Self {
        let key = format!(
            "{}|{:?}|{}|{}|{}|{}|{}|{:?}|{:?}|{}",
            self.kind,
            self.seed,
            self.taxonomy_digest,
            self.backend_digest,
            self.dataset_base_digest,
            self.dataset_digest,
            self.label,
            self.k,
            self.debias_mode,
            self.tool_version,
        );
        self.run_id = short_digest(key.as_bytes());
        self
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_inputs_identical_run_id() {
        let mut a = RunManifest::new("generate");
        a.seed = Some(7);
        a.taxonomy_digest = "abc".into();
        let mut b = RunManifest::new("generate");
        b.seed = Some(7);
        b.taxonomy_digest = "abc".into();
        assert_eq!(a.finalize().run_id, b.finalize().run_id);
    }

    #[test]
    fn different_seed_different_run_id() {
        let mut a = RunManifest::new("generate");
        a.seed = Some(7);
        let mut b = RunManifest::new("generate");
        b.seed = Some(8);
        assert_ne!(a.finalize().run_id, b.finalize().run_id);
    }

    #[test]
    fn manifest_round_trips() {
        let m = RunManifest::new("audit").finalize();
        let back = RunManifest::from_json(&m.to_json_pretty()).unwrap();
        assert_eq!(m, back);
    }
}

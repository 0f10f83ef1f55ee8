//! Run manifest embedded in every emitted report.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance block: identical manifests (timestamp aside) imply identical
/// report payloads.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input_paths: Vec<String>,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(input_paths: Vec<String>, config_digest: String, seed: Option<u64>) -> Self {
        let command = std::env::args().collect::<Vec<_>>().join(" ");
        RunManifest {
            command,
            input_paths,
            config_digest,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    /// Comment block prepended to CSV and table output. The timestamp line
    /// is the only part expected to vary between identical runs.
    pub fn comment_block(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!("# inputs: {}\n", self.input_paths.join(", ")));
        out.push_str(&format!("# config_digest: {}\n", self.config_digest));
        match self.seed {
            Some(seed) => out.push_str(&format!("# seed: {seed}\n")),
            None => out.push_str("# seed: none\n"),
        }
        out.push_str(&format!("# version: {}\n", self.tool_version));
        out.push_str(&format!("# timestamp: {}\n", self.timestamp));
        out
    }
}

/// Hex SHA-256 of a file's bytes, or "none" when no file is involved.
pub fn file_digest(path: Option<&Path>) -> std::io::Result<String> {
    match path {
        Some(path) => {
            let bytes = std::fs::read(path)?;
            let digest = Sha256::digest(&bytes);
            Ok(digest.iter().map(|byte| format!("{byte:02x}")).collect())
        }
        None => Ok("none".to_string()),
    }
}

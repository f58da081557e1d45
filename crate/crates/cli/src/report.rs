use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_VERDICT: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

/// Printed with every verdict that rests on a witness.
pub const SUFFICIENCY_NOTE: &str =
    "the witness criterion is sufficient, not necessary: an inconclusive result does not imply distinguishability or extendibility";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub command: String,
    pub inputs: Inputs,
    pub tolerances: Tolerances,
    pub verdict: VerdictReport,
    pub evidence: serde_json::Value,
    pub diagnostics: serde_json::Value,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub generated_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub description: String,
    /// `sha256:` of the input file bytes, or of the description for
    /// parameter-only commands.
    pub digest: String,
}

impl Inputs {
    pub fn from_bytes(description: String, bytes: &[u8]) -> Self {
        Self { description, digest: digest(bytes) }
    }

    pub fn from_params(description: String) -> Self {
        let digest = digest(description.as_bytes());
        Self { description, digest }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub eig: f64,
    pub sdp: f64,
    pub witness: f64,
    pub cross_term: f64,
    pub orthogonality: f64,
    pub max_dim: usize,
    pub copies: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictReport {
    pub outcome: String,
    pub exit_code: i32,
    /// Steps of the argument leading from the evidence to the outcome.
    pub inference: Vec<String>,
    pub note: Option<String>,
}

impl VerdictReport {
    pub fn inconclusive(inference: Vec<String>, note: &str) -> Self {
        Self { outcome: "Inconclusive".into(), exit_code: EXIT_INCONCLUSIVE, inference, note: Some(note.into()) }
    }

    pub fn decided(outcome: &str, inference: Vec<String>, note: Option<&str>) -> Self {
        Self { outcome: outcome.into(), exit_code: EXIT_VERDICT, inference, note: note.map(Into::into) }
    }
}

pub fn now_unix() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

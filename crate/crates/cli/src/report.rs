//! Report envelope. Field order is fixed; everything except `timing` is a
//! function of the input bytes and the flags.

use numev::Certificate;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct CommandEcho {
    pub name: String,
    pub args: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timing {
    pub elapsed_us: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: CommandEcho,
    pub input_digest: String,
    pub exit_code: i32,
    pub result: Value,
    pub certificates: Vec<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Value>,
    pub timing: Option<Timing>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serialized output for one report or a batch of them.
pub fn render<T: Serialize>(value: &T, compact: bool) -> String {
    let mut out = if compact {
        serde_json::to_string(value)
    } else {
        serde_json::to_string_pretty(value)
    }
    .expect("reports serialize");
    out.push('\n');
    out
}

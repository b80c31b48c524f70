//! The JSON run record written by every command, and the content digest it carries.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunRecord<C: Serialize, R: Serialize> {
    pub command: &'static str,
    /// SHA-256 of the canonicalised input (instance JSON or hypergraph text).
    pub input_digest: String,
    pub config: C,
    pub result: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

/// Writes `v` with object keys sorted and no insignificant whitespace.
pub fn canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                canonical(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                canonical(x, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a JSON document that ignores key order and formatting.
pub fn json_digest(bytes: &[u8]) -> serde_json::Result<String> {
    let v: Value = serde_json::from_slice(bytes)?;
    let mut s = String::new();
    canonical(&v, &mut s);
    Ok(sha256_hex(s.as_bytes()))
}

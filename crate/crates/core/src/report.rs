//! Canonical JSON rendering shared by every report the crate produces.

use serde::Serialize;

/// Pretty JSON with object keys sorted, so equal values render to equal
/// bytes.
pub fn canonical_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

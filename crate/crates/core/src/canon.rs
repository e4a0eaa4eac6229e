//! Canonical JSON: object keys sorted, no whitespace, integers only.

use serde::Serialize;

use crate::error::Result;

pub fn to_canonical_value<T: Serialize>(value: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(value)?)
}

pub fn to_canonical_string<T: Serialize>(value: &T) -> Result<String> {
    // serde_json's map is ordered by key, so a round trip through `Value`
    // sorts every object.
    Ok(serde_json::to_string(&to_canonical_value(value)?)?)
}

pub fn to_canonical_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_canonical_value(value)?)?)
}

//! Canonical JSON and content hashing.
//!
//! Canonical form: UTF-8, object keys sorted bytewise, no insignificant
//! whitespace, numbers in shortest round-trip form. Everything that gets
//! hashed (specs, manifests, metric artifacts, reports) goes through here.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Serializes `value` into canonical JSON bytes.
pub fn to_canonical_bytes<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<Vec<u8>> {
    // `Value` objects are BTreeMap-backed, so keys come out sorted.
    let v = serde_json::to_value(value)?;
    serde_json::to_vec(&v)
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_compact() {
        let v = json!({"b": 1, "a": {"d": [1.5, 2], "c": null}});
        let bytes = to_canonical_bytes(&v).unwrap();
        assert_eq!(
            std::str::from_utf8(&bytes).unwrap(),
            r#"{"a":{"c":null,"d":[1.5,2]},"b":1}"#
        );
    }

    #[test]
    fn floats_shortest_roundtrip() {
        let x = 0.1 + 0.2;
        let bytes = to_canonical_bytes(&json!({ "x": x })).unwrap();
        assert_eq!(std::str::from_utf8(&bytes).unwrap(), r#"{"x":0.30000000000000004}"#);
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}

//! Run manifests: a sidecar JSON file written next to every artifact that
//! records the command, a digest of the effective configuration, digests of
//! the inputs, the tool version, and a UTC timestamp. The artifact itself
//! stays timestamp-free so reruns are byte-identical; volatile facts live
//! here instead.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Settings;
use crate::{CmdResult, Failure};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub input_digests: Vec<InputDigest>,
    pub tool_version: String,
    pub timestamp: String,
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

/// Digest of the effective settings, so two artifacts can be compared for
/// "same configuration" without replaying the layering.
pub fn config_digest(settings: &Settings) -> Result<String, Failure> {
    let json = serde_json::to_string(settings)
        .map_err(|e| Failure::data(format!("serialize settings: {e}")))?;
    Ok(sha256_hex(json.as_bytes()))
}

/// Write `{file_name}.manifest.json` beside the artifact at `artifact`.
pub fn write_beside(
    artifact: &Path,
    command: &str,
    settings: &Settings,
    inputs: &[&Path],
) -> CmdResult {
    let mut input_digests = Vec::with_capacity(inputs.len());
    for input in inputs {
        let bytes =
            fs::read(input).map_err(|e| Failure::data(format!("{}: {e}", input.display())))?;
        input_digests.push(InputDigest {
            path: input.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
    }
    let manifest = RunManifest {
        command: command.to_string(),
        config_digest: config_digest(settings)?,
        input_digests,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: utc_now_iso8601(),
    };
    let name = artifact
        .file_name()
        .ok_or_else(|| Failure::data(format!("{}: not a file path", artifact.display())))?;
    let path = artifact.with_file_name(format!("{}.manifest.json", name.to_string_lossy()));
    let mut body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Failure::data(format!("serialize manifest: {e}")))?;
    body.push('\n');
    crate::ioutil::write_atomic(&path, body.as_bytes())
}

/// Current time as `YYYY-MM-DDTHH:MM:SSZ` without pulling in a date crate.
/// Gregorian conversion follows the standard civil-from-days arithmetic.
fn utc_now_iso8601() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let days = (secs / 86_400) as i64;
    let rem = secs % 86_400;
    let (hh, mm, ss) = (rem / 3600, (rem % 3600) / 60, rem % 60);

    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = if m <= 2 { y + 1 } else { y };

    format!("{y:04}-{m:02}-{d:02}T{hh:02}:{mm:02}:{ss:02}Z")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_for_equal_bytes() {
        assert_eq!(sha256_hex(b"abc"), sha256_hex(b"abc"));
        assert_ne!(sha256_hex(b"abc"), sha256_hex(b"abd"));
        // Well-known vector, as a guard against accidental double hashing.
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn timestamp_shape_is_iso8601_utc() {
        let ts = utc_now_iso8601();
        assert_eq!(ts.len(), 20, "unexpected length: {ts}");
        assert!(ts.ends_with('Z'));
        assert_eq!(&ts[4..5], "-");
        assert_eq!(&ts[10..11], "T");
        let year: i64 = ts[0..4].parse().unwrap();
        assert!(year >= 2024);
    }

    #[test]
    fn manifest_lands_beside_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let artifact = dir.path().join("rewards.jsonl");
        let input = dir.path().join("input.jsonl");
        fs::write(&artifact, "{}\n").unwrap();
        fs::write(&input, "{\"x\":1}\n").unwrap();
        let settings = Settings::default();
        write_beside(&artifact, "reward", &settings, &[&input]).unwrap();
        let sidecar = dir.path().join("rewards.jsonl.manifest.json");
        let text = fs::read_to_string(&sidecar).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["command"], "reward");
        assert_eq!(value["tool_version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(value["input_digests"][0]["path"], input.display().to_string());
        assert_eq!(
            value["input_digests"][0]["sha256"],
            sha256_hex(b"{\"x\":1}\n")
        );
    }
}

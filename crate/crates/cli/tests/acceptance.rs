//! Acceptance checks for the command-line surface. One line per criterion:
//! `acceptance: <name> ... pass|fail`.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;

fn criterion<F: FnOnce()>(name: &str, run: F) {
    match panic::catch_unwind(AssertUnwindSafe(run)) {
        Ok(()) => println!("acceptance: {name} ... pass"),
        Err(payload) => {
            println!("acceptance: {name} ... fail");
            panic::resume_unwind(payload);
        }
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// The bundled mini corpus, scored end to end through the binary, must
/// reproduce the report the brute-force oracles computed ahead of time,
/// byte for byte.
#[test]
fn fixture_report_regression() {
    criterion("fixture report regression via score subcommand", || {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("report.json");
        let output = Command::new(env!("CARGO_BIN_EXE_frc"))
            .arg("score")
            .arg("--dataset")
            .arg(fixture("mini_dataset.jsonl"))
            .arg("--pred")
            .arg(fixture("mini_predictions.jsonl"))
            .arg("--out")
            .arg(&out)
            .output()
            .expect("run score");
        assert!(
            output.status.success(),
            "score failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );

        let got = std::fs::read_to_string(&out).unwrap();
        let expected = std::fs::read_to_string(fixture("expected_report.json")).unwrap();

        // Value comparison first: a semantic diff names the field that moved.
        let got_value: serde_json::Value = serde_json::from_str(&got).unwrap();
        let expected_value: serde_json::Value = serde_json::from_str(&expected).unwrap();
        assert_eq!(got_value, expected_value, "report drifted from the oracle fixture");
        assert_eq!(got, expected, "report bytes drifted despite equal values");

        let manifest = dir.path().join("report.json.manifest.json");
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(manifest).unwrap()).unwrap();
        assert_eq!(manifest["command"], "score");
        assert_eq!(manifest["input_digests"].as_array().unwrap().len(), 2);
    });
}

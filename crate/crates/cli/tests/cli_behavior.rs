//! End-to-end behavior of the binary: exit codes, stream discipline, config
//! layering, and the offline judge mocks.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn frc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frc"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run_with_stdin(mut cmd: Command, input: &str) -> Output {
    let mut child = cmd
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn frc");
    child
        .stdin
        .take()
        .expect("piped stdin")
        .write_all(input.as_bytes())
        .expect("write stdin");
    child.wait_with_output().expect("wait for frc")
}

fn stdout_lines(output: &Output) -> Vec<String> {
    String::from_utf8_lossy(&output.stdout)
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let output = frc().args(["segment", "--bogus"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let output = frc().output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn invalid_dataset_line_is_reported_with_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.jsonl");
    let good = std::fs::read_to_string(fixture("mini_dataset.jsonl")).unwrap();
    let first = good.lines().next().unwrap();
    std::fs::write(&path, format!("{first}\n{{\"query_id\": 7}}\n")).unwrap();

    let output = frc().arg("validate-dataset").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "diagnostic must name the line: {stderr}");
}

#[test]
fn valid_dataset_prints_counts() {
    let output = frc()
        .arg("validate-dataset")
        .arg(fixture("mini_dataset.jsonl"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        stdout.contains("dataset ok: 10 queries, 40 answers"),
        "unexpected summary: {stdout}"
    );
}

#[test]
fn segment_round_trips_marked_text_through_strip() {
    let text = "Flow held steady. Pressure did not spike! Margin was fine.";
    let mut cmd = frc();
    cmd.arg("segment");
    let output = run_with_stdin(cmd, &format!("{}\n", serde_json::to_string(text).unwrap()));
    assert!(output.status.success(), "{:?}", output);
    let row: serde_json::Value = serde_json::from_str(&stdout_lines(&output)[0]).unwrap();

    let rebuilt: String = row["segments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["text"].as_str().unwrap())
        .collect();
    assert_eq!(rebuilt, text, "segments must partition the input exactly");

    let marked = row["marked_text"].as_str().unwrap();
    assert_eq!(frc_core::segmenter::strip_markers(marked), text);
    assert_eq!(
        frc_core::segmenter::inserted_marker_count(marked),
        row["segments"].as_array().unwrap().len()
    );
}

#[test]
fn advantages_header_line_is_the_credit_config() {
    let group = r#"{"query_id":"g","rollouts":[
        {"rollout_id":"r1","sentence_rewards":[1.5,0.5],"sentence_token_spans":[[0,2],[2,4]],"token_count":4},
        {"rollout_id":"r2","sentence_rewards":[0.5],"sentence_token_spans":[[0,4]],"token_count":4}]}"#
        .replace('\n', "");
    let mut cmd = frc();
    cmd.args(["advantages", "--epsilon", "1e-6", "--credit-policy", "sentence_weighted"]);
    let output = run_with_stdin(cmd, &format!("{group}\n"));
    assert!(output.status.success(), "{:?}", output);
    let lines = stdout_lines(&output);
    let header: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(header["mode"], "mean");
    assert_eq!(header["epsilon"], 1e-6);
    assert_eq!(header["policy"], "sentence_weighted");
    assert_eq!(header["kl_coefficient"], 0.01);
    assert_eq!(lines.len(), 3, "header plus one record per rollout");
}

#[test]
fn environment_beats_flags_in_the_reward_layering() {
    let row = r#"{"pred":{"faithfulness":1,"correctness":1},"gold":{"faithfulness":1,"correctness":1}}"#;
    let mut cmd = frc();
    cmd.args(["reward", "--mode", "trm", "--alpha", "0.9"]);
    cmd.env("FRC_REWARD_ALPHA", "0.25");
    let output = run_with_stdin(cmd, &format!("{row}\n"));
    assert!(output.status.success(), "{:?}", output);
    let record: serde_json::Value = serde_json::from_str(&stdout_lines(&output)[0]).unwrap();
    assert_eq!(record["value"], 1.25, "environment alpha must win over the flag");
}

#[test]
fn config_file_sits_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("frc.toml");
    std::fs::write(&config, "[reward]\nvariant = \"rl_c\"\nalpha = 0.5\n").unwrap();
    let row = r#"{"pred":{"faithfulness":1,"correctness":1},"gold":{"faithfulness":1,"correctness":1}}"#;

    // File alone: alpha 0.5 on top of the rl_c preset.
    let mut cmd = frc();
    cmd.arg("--config").arg(&config).args(["reward", "--mode", "trm"]);
    let output = run_with_stdin(cmd, &format!("{row}\n"));
    assert!(output.status.success(), "{:?}", output);
    let record: serde_json::Value = serde_json::from_str(&stdout_lines(&output)[0]).unwrap();
    assert_eq!(record["value"], 1.5);

    // Flag overrides the file's alpha.
    let mut cmd = frc();
    cmd.arg("--config").arg(&config).args(["reward", "--mode", "trm", "--alpha", "0"]);
    let output = run_with_stdin(cmd, &format!("{row}\n"));
    let record: serde_json::Value = serde_json::from_str(&stdout_lines(&output)[0]).unwrap();
    assert_eq!(record["value"], 1.0);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("frc.toml");
    std::fs::write(&config, "[reward]\nalpah = 0.5\n").unwrap();
    let mut cmd = frc();
    cmd.arg("--config").arg(&config).args(["simulate", "--steps", "1"]);
    let output = cmd.output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn position_biased_mock_ties_every_duel() {
    let mut rows = String::new();
    for i in 0..8 {
        rows.push_str(&format!(
            r#"{{"query_id":"q{i}","question":"q","references":"r","anchor":"short","candidate":"much longer answer text"}}"#
        ));
        rows.push('\n');
    }
    let mut cmd = frc();
    cmd.args(["judge-usefulness", "--mock", "first"]);
    let output = run_with_stdin(cmd, &rows);
    assert!(output.status.success(), "{:?}", output);
    for line in stdout_lines(&output) {
        let report: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(report["result"], "tie");
    }
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("tie 8"), "summary must count ties: {stderr}");
}

#[test]
fn script_mock_without_script_file_is_a_usage_error() {
    let output = frc()
        .args(["judge-usefulness", "--mock", "script"])
        .arg(fixture("mini_dataset.jsonl"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn simulate_emits_one_csv_row_per_step() {
    let output = frc()
        .args(["simulate", "--steps", "5", "--seed", "3"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{:?}", output);
    let lines = stdout_lines(&output);
    assert_eq!(lines[0], "step,f1_incorrect,detection_proxy,mean_reward");
    assert_eq!(lines.len(), 6, "header plus five steps");
    assert!(lines[1].starts_with("0,"));
    assert!(lines[5].starts_with("4,"));
}

#[test]
fn score_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    for out in [&first, &second] {
        let output = frc()
            .arg("score")
            .arg("--dataset")
            .arg(fixture("mini_dataset.jsonl"))
            .arg("--pred")
            .arg(fixture("mini_predictions.jsonl"))
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(output.status.success(), "{:?}", output);
    }
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap(),
        "score output must not embed run-varying state"
    );
}

#[test]
fn parse_verdicts_writes_every_row_and_fails_on_bad_output() {
    let good = r#"{"id":1,"output":"[{\"Faithfulness Score\":1,\"Correctness Reason\":\"ok\",\"Correctness Score\":1}]","expected_count":1}"#;
    let bad = r#"{"id":2,"output":"no verdicts here","expected_count":1}"#;
    let mut cmd = frc();
    cmd.arg("parse-verdicts");
    let output = run_with_stdin(cmd, &format!("{good}\n{bad}\n"));
    assert_eq!(output.status.code(), Some(1), "bad row must fail the run");
    let lines = stdout_lines(&output);
    assert_eq!(lines.len(), 2, "every row is still written");
    let first: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    assert!(first["verdicts"].is_array());
    let second: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
    assert!(second["error"].as_str().unwrap().contains("no JSON array"));
}

#[test]
fn report_renders_the_scored_fixture() {
    let output = frc()
        .arg("report")
        .arg(fixture("expected_report.json"))
        .output()
        .unwrap();
    assert!(output.status.success(), "{:?}", output);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("F1(incorrect)"), "missing header: {stdout}");
    assert!(stdout.contains("0.6024"), "missing metric value: {stdout}");
}

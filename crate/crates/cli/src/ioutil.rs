//! Input/output plumbing shared by the subcommands: stdin-or-file input,
//! JSONL iteration, atomic file writes, and the single `emit` path that keeps
//! machine output, manifests, and human summaries consistent everywhere.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::config::Settings;
use crate::manifest;
use crate::{CmdResult, Failure};

/// Read the whole input: a file when given, stdin otherwise.
pub fn read_input(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Failure::data(format!("{}: {e}", path.display()))),
        None => {
            let mut buffer = String::new();
            io::stdin()
                .read_to_string(&mut buffer)
                .map_err(|e| Failure::data(format!("stdin: {e}")))?;
            Ok(buffer)
        }
    }
}

/// Non-blank lines with their 1-based line numbers.
pub fn jsonl_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(idx, line)| (idx + 1, line))
}

/// Join serialized rows into a JSONL body.
pub fn to_jsonl<S: AsRef<str>>(rows: &[S]) -> String {
    let mut body = String::new();
    for row in rows {
        body.push_str(row.as_ref());
        body.push('\n');
    }
    body
}

/// Write via a temp file in the same directory, then rename into place, so a
/// crash never leaves a half-written artifact behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Failure::data(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    fs::write(&tmp, bytes).map_err(|e| Failure::data(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Failure::data(format!("{}: {e}", path.display()))
    })?;
    Ok(())
}

/// Deliver one command's machine output.
///
/// With `--out`: the artifact is written atomically, a manifest sidecar goes
/// beside it, and the human summary goes to stdout. Without: the machine
/// output itself goes to stdout and the summary moves to stderr so pipes stay
/// clean.
pub fn emit(
    out: Option<&Path>,
    body: &str,
    command: &str,
    settings: &Settings,
    inputs: &[&Path],
    summary: &str,
) -> CmdResult {
    match out {
        Some(path) => {
            write_atomic(path, body.as_bytes())?;
            manifest::write_beside(path, command, settings, inputs)?;
            println!("{summary}");
            println!("wrote {}", path.display());
        }
        None => {
            io::stdout().lock().write_all(body.as_bytes())?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

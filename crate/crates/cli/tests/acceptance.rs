//! Acceptance check for the full pipeline command: identical bytes across
//! repeated runs and across worker-thread counts.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

const SEED: &str = "20240601";

fn run_pipeline(out: &Path, threads: usize) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_clickstat"))
        .args(["pipeline", "--seed", SEED, "--threads", &threads.to_string(), "--out"])
        .arg(out)
        .output()
        .map_err(|e| format!("spawn failed: {e}"))?;
    if !status.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            status.status.code(),
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(out).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        files.insert(name, fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

fn compare(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Vec<String> {
    let mut diffs = Vec::new();
    for name in a.keys().chain(b.keys()).collect::<std::collections::BTreeSet<_>>() {
        if a.get(name) != b.get(name) {
            diffs.push(name.clone());
        }
    }
    diffs
}

fn main() -> ExitCode {
    let start = Instant::now();
    let dir = tempfile::tempdir().expect("temporary directory");
    let runs = [("serial", 1), ("serial-repeat", 1), ("parallel", 4)];
    let mut outputs = Vec::new();
    let mut failures = Vec::new();
    for (label, threads) in runs {
        match run_pipeline(&dir.path().join(label), threads) {
            Ok(files) => outputs.push((label, files)),
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    let mut checks = 0;
    if let Some((_, reference)) = outputs.first() {
        checks += 1;
        if !reference.contains_key("pipeline.json") || reference.len() < 2 {
            failures.push("pipeline wrote no report".into());
        }
        for (label, files) in &outputs[1..] {
            checks += 1;
            let diffs = compare(reference, files);
            if !diffs.is_empty() {
                failures.push(format!("{label} differs in {}", diffs.join(", ")));
            }
        }
    }
    let ok = failures.is_empty() && outputs.len() == runs.len();
    println!(
        "criterion 8 {} pipeline output is byte-identical across runs and thread counts ({:.2}s): {checks} checks{}",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        if failures.is_empty() {
            String::new()
        } else {
            format!(" | failed: {}", failures.join("; "))
        }
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! File plumbing: atomic writes, knowledge-base load/store, and the
//! trace/ledger line formats.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use checklang_core::interp::CheckLedger;
use checklang_core::kb::KbSnapshot;
use checklang_core::trace::{parse_trace_lines, TraceRecord};

/// Write-temp-then-rename: the destination either keeps its old content
/// or carries the complete new content, never a torn mix.
pub fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or_else(|| Path::new(".")))
        .with_context(|| format!("creating temp file next to {}", path.display()))?;
    use std::io::Write;
    tmp.write_all(content.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn load_kb(path: &Path) -> Result<KbSnapshot> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    KbSnapshot::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

pub fn store_kb(path: &Path, kb: &KbSnapshot) -> Result<()> {
    atomic_write(path, &kb.serialize())
}

pub fn load_traces(path: &Path) -> Result<Vec<TraceRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_trace_lines(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

pub fn traces_to_lines(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json_line());
        out.push('\n');
    }
    out
}

/// One ledger line per (input, function), JSON-lines.
pub fn ledger_lines(input_name: &str, ledger: &CheckLedger) -> String {
    let mut out = String::new();
    for (func, fl) in &ledger.per_function {
        let line = serde_json::json!({
            "input": input_name,
            "func": func,
            "calls": fl.calls,
            "statements": fl.statements,
            "checks": fl.checks_performed,
            "bypassed": fl.checks_bypassed,
            "false_positives": fl.false_positives,
            "wall_nanos": fl.wall_nanos,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

/// Aggregate ledger lines back into one [`CheckLedger`].
pub fn parse_ledger_lines(text: &str) -> Result<CheckLedger> {
    let mut ledger = CheckLedger::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value =
            serde_json::from_str(line).with_context(|| format!("ledger line {}", i + 1))?;
        let func = v["func"]
            .as_str()
            .with_context(|| format!("ledger line {}: missing func", i + 1))?
            .to_string();
        let fl = ledger.per_function.entry(func).or_default();
        fl.calls += v["calls"].as_u64().unwrap_or(0);
        fl.statements += v["statements"].as_u64().unwrap_or(0);
        fl.checks_performed += v["checks"].as_u64().unwrap_or(0);
        fl.checks_bypassed += v["bypassed"].as_u64().unwrap_or(0);
        fl.false_positives += v["false_positives"].as_u64().unwrap_or(0);
        fl.wall_nanos += v["wall_nanos"].as_u64().unwrap_or(0);
        ledger.statements_executed += v["statements"].as_u64().unwrap_or(0);
        ledger.checks_performed += v["checks"].as_u64().unwrap_or(0);
        ledger.checks_bypassed += v["bypassed"].as_u64().unwrap_or(0);
        ledger.false_positives += v["false_positives"].as_u64().unwrap_or(0);
    }
    Ok(ledger)
}

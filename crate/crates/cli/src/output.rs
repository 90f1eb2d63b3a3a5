use std::io::Write;
use std::path::Path;

use modclock::verify::{Check, Status};

use crate::error::CliError;

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("create {}", dir.display()), e))?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::io(format!("temp file in {}", dir.display()), e))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::io(format!("write {}", target.display()), e))?;
    tmp.persist(&target)
        .map_err(|e| CliError::io(format!("rename to {}", target.display()), e.error))?;
    Ok(())
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::io("json", std::io::Error::other(e)))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Flagged => "flagged",
    }
}

/// Fixed-width residual table.
pub fn check_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.id.len()).max().unwrap_or(2).max(5);
    let mut out = format!(
        "{:<width$}  {:>11}  {:>10}  status\n",
        "check", "residual", "tol"
    );
    for c in checks {
        out.push_str(&format!(
            "{:<width$}  {:>11.3e}  {:>10.2e}  {}",
            c.id,
            c.residual,
            c.tol,
            status_name(c.status)
        ));
        if let Some(note) = &c.note {
            out.push_str(&format!("  ({note})"));
        }
        out.push('\n');
    }
    out
}

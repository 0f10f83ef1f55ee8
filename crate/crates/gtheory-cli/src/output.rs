//! Report output: stdout or atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

/// Resolve the output destination. Relative paths are joined onto
/// `GTHEORY_OUT_DIR` when that variable is set.
pub fn resolve_out_path(out: &Path) -> PathBuf {
    if out.is_absolute() {
        return out.to_path_buf();
    }
    match std::env::var_os("GTHEORY_OUT_DIR") {
        Some(dir) => PathBuf::from(dir).join(out),
        None => out.to_path_buf(),
    }
}

/// Write the payload to stdout, or atomically to the resolved path
/// (temp file in the same directory, then rename).
pub fn emit(out: Option<&Path>, payload: &str) -> std::io::Result<()> {
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(payload.as_bytes())?;
            if !payload.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
        Some(path) => {
            let path = resolve_out_path(path);
            let tmp = path.with_extension(format!(
                "{}tmp{}",
            path.extension()
                    .map(|e| format!("{}.", e.to_string_lossy()))
                    .unwrap_or_default(),
                std::process::id()
            ));
            std::fs::write(&tmp, payload)?;
            std::fs::rename(&tmp, &path)?;
            Ok(())
        }
    }
}

//! Deterministic file output: `#`-prefixed metadata headers, fixed float
//! formatting and write-to-temp-then-rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Result, WaveError};
use crate::numerics::UniformGrid;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seventeen significant digits, e.g. `1.2309149097933274e0`.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-joined [`fmt_f`] values.
pub fn csv_line(values: &[f64]) -> String {
    values.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(",")
}

pub fn grid_description(grid: &UniformGrid) -> String {
    format!("uniform xi in [{}, {}], dxi = {}, n = {}", fmt_f(grid.x0), fmt_f(grid.x_max()), fmt_f(grid.dx), grid.n)
}

/// Metadata block: version, the resolved configuration, `c0` and the grid,
/// every line prefixed with `prefix` (`"# "` for CSV files).
pub fn metadata(cfg: &RunConfig, grid: &str, prefix: &str) -> String {
    let mut out = format!("{prefix}nsp-wavelab {VERSION}\n");
    for line in cfg.echo().lines() {
        out.push_str(&format!("{prefix}config: {line}\n"));
    }
    out.push_str(&format!("{prefix}c0 = {}\n", cfg.c0));
    out.push_str(&format!("{prefix}grid: {grid}\n"));
    out
}

/// Creates `dir` (and parents).
pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| WaveError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let tmp = temp_path(path);
    let io = |e: std::io::Error| WaveError::Io(format!("{}: {e}", path.display()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io(e));
    }
    Ok(())
}

/// CSV text with a metadata header, a column line and one line per row.
pub fn csv_document(meta: &str, header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(meta);
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

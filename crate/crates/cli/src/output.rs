use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::run::{RunError, RunOutput};

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so the target either holds the full contents or does not exist.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes `config.json`, `results.csv`, `summary.json` (and `plot.csv` when
/// requested) into `<root>/<config hash>/`; returns that directory.
pub fn write_run(output: &RunOutput, root: &Path, emit_plot_data: bool) -> Result<PathBuf, RunError> {
    let rec = &output.record;
    let dir = root.join(&rec.config_hash);
    fs::create_dir_all(&dir)?;
    write_atomic(&dir.join("config.json"), rec.config.canonical_json().as_bytes())?;
    write_atomic(&dir.join("results.csv"), &rec.results.to_csv()?)?;
    let summary = serde_json::to_string_pretty(rec).expect("record serializes");
    write_atomic(&dir.join("summary.json"), summary.as_bytes())?;
    if emit_plot_data {
        if let Some(plot) = &output.plot {
            write_atomic(&dir.join("plot.csv"), &plot.to_csv()?)?;
        }
    }
    for (name, bytes) in &output.files {
        write_atomic(&dir.join(name), bytes)?;
    }
    Ok(dir)
}

use std::fs;
use std::path::Path;

use super::run::{run_config, Manifest};
use crate::error::{Error, Result};

/// Re-execute the manifest's config and byte-compare the regenerated
/// `report.json` against the one next to the manifest. Returns `true` on
/// an exact match. The worker count may differ from the recorded run;
/// reports are schedule-invariant by construction.
pub fn replay(manifest_path: &Path, jobs: Option<usize>) -> Result<bool> {
    let manifest: Manifest = serde_json::from_slice(
        &fs::read(manifest_path)
            .map_err(|e| Error::config("manifest", format!("{e}")))?,
    )?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let original = fs::read(dir.join("report.json"))
        .map_err(|e| Error::config("report.json", format!("{e}")))?;

    let tmp = dir.join(".replay_tmp");
    let outcome = run_config(
        &manifest.config,
        dir,
        Some(&tmp),
        None,
        jobs.or(Some(manifest.jobs)),
    )?;
    let regenerated = fs::read(&outcome.report_path)?;
    let identical = regenerated == original;
    let _ = fs::remove_dir_all(&tmp);
    Ok(identical)
}

//! File formats: `.vprd` descriptors, pose CSVs, JSONL results, JSON/CSV reports.

pub mod descriptors;
pub mod poses;
pub mod records;
pub mod report;

use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub use descriptors::{
    encoded_len, read_descriptor_text, read_descriptors, write_descriptors, DescriptorSet,
};
pub use poses::{read_poses, write_poses, Pose, PoseMode, PoseTable};
pub use records::{
    read_results, read_scored, stream_results, stream_scored, write_results, write_scored,
    Neighbor, RetrievalResult, ScoreMeta, ScoredResult, UncertaintyRecord,
};
pub use report::{write_ablation_csv, write_pr_csv, write_report_json, EvalReport};

/// Writes through a temporary file in the destination directory, then renames
/// it into place, so readers never observe a partially written file.
pub(crate) fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut std::fs::File>) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".vprunc-")
        .tempfile_in(dir)
        .map_err(|e| Error::io(path, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(|e| Error::io(path, e))?;
    }
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        fill(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

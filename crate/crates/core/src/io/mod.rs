//! On-disk formats: binary snapshot files, CSV matrices, dataset manifests
//! and model files. Every writer goes through a temporary file and a rename.

pub mod manifest;
pub mod matrix;
pub mod model;

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub use manifest::{Manifest, ManifestEntry};
pub use matrix::{decode_snapshot, encode_snapshot, read_csv_matrix, read_snapshot_file, write_csv_matrix, write_snapshot_file, SNAPSHOT_MAGIC};
pub use model::{Fingerprint, ModelFile};

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

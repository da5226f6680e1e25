use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::matrix::read_snapshot_file;
use super::write_atomic;
use crate::error::{shape_mismatch, Error, Result};
use crate::pdelab::{Problem, Split};
use crate::pod::SnapshotMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub parameter: Vec<f64>,
    /// Relative to the manifest's directory unless absolute.
    pub path: String,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub problem: Problem,
    /// Rows of every snapshot matrix.
    pub n: usize,
    /// Columns of every snapshot matrix.
    pub n_t: usize,
    #[serde(default)]
    pub r: Option<usize>,
    /// False when some grid points failed to generate.
    #[serde(default = "default_true")]
    pub complete: bool,
    #[serde(default)]
    pub failures: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

fn default_true() -> bool {
    true
}

impl Manifest {
    pub fn validate(&self) -> Result<()> {
        let d = self.entries.first().map_or(0, |e| e.parameter.len());
        for (i, e) in self.entries.iter().enumerate() {
            if e.parameter.len() != d || e.parameter.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("entry {i} has a malformed parameter")));
            }
            if self.entries[..i].iter().any(|o| o.parameter == e.parameter) {
                return Err(Error::InvalidDataset(format!("entry {i} repeats parameter {:?}", e.parameter)));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let m: Manifest = serde_json::from_slice(&fs::read(path)?)?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        write_atomic(path, &bytes)
    }

    pub fn resolve(&self, base: &Path, entry: &ManifestEntry) -> PathBuf {
        let p = Path::new(&entry.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }

    /// Loads every snapshot, checking the declared shape.
    pub fn load_snapshots(&self, base: &Path) -> Result<Vec<SnapshotMatrix<f64>>> {
        self.entries
            .iter()
            .map(|e| {
                let path = self.resolve(base, e);
                let data = read_snapshot_file(&path).map_err(|err| match err {
                    Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
                    other => other,
                })?;
                if data.shape() != (self.n, self.n_t) {
                    return Err(shape_mismatch("manifest snapshot", (self.n, self.n_t), data.shape()));
                }
                SnapshotMatrix::new(data, e.parameter.clone(), e.path.clone())
            })
            .collect()
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|&i| self.entries[i].split == split)
            .collect()
    }
}

//! Fixture manifest (JSON) and loading of active-space systems from it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{fold_frozen_core, read_fcidump, select_active, MolecularSystem};
use crate::error::{io_err, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub molecule: String,
    #[serde(rename = "R")]
    pub r: f64,
    pub basis: String,
    pub file: String,
    pub norb: usize,
    pub nelec: usize,
    #[serde(default)]
    pub frozen: Vec<usize>,
    #[serde(default)]
    pub excluded: Vec<usize>,
    pub rhf_energy: f64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    /// directory the manifest was read from; fixture paths are relative to it
    #[serde(skip)]
    pub dir: PathBuf,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut m: Manifest = serde_json::from_str(&text)?;
        m.dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn entry_for_file(&self, file: &Path) -> Option<&ManifestEntry> {
        let name = file.file_name()?.to_str()?;
        self.entries.iter().find(|e| e.file == name)
    }

    /// Entries for one molecule, sorted by bond length.
    pub fn scan(&self, molecule: &str) -> Vec<&ManifestEntry> {
        let mut v: Vec<_> = self.entries.iter().filter(|e| e.molecule == molecule).collect();
        v.sort_by(|a, b| a.r.total_cmp(&b.r));
        v
    }

    pub fn path_of(&self, entry: &ManifestEntry) -> PathBuf {
        self.dir.join(&entry.file)
    }

    pub fn load_system(&self, entry: &ManifestEntry) -> Result<MolecularSystem> {
        let full = read_fcidump(&self.path_of(entry))?;
        active_space(&full, &entry.frozen, &entry.excluded)
    }
}

/// Freezes `frozen` and drops `excluded` (both in the original numbering).
pub fn active_space(sys: &MolecularSystem, frozen: &[usize], excluded: &[usize]) -> Result<MolecularSystem> {
    if let Some(p) = excluded.iter().find(|p| frozen.contains(p)) {
        return Err(Error::Orbitals(format!("orbital {p} is both frozen and excluded")));
    }
    if let Some(p) = excluded.iter().find(|p| **p >= sys.n_orb) {
        return Err(Error::Orbitals(format!("excluded orbital {p} out of range (n_orb={})", sys.n_orb)));
    }
    let folded = fold_frozen_core(sys, frozen)?;
    let keep: Vec<usize> = (0..sys.n_orb)
        .filter(|p| !frozen.contains(p))
        .enumerate()
        .filter(|(_, p)| !excluded.contains(p))
        .map(|(k, _)| k)
        .collect();
    if keep.len() == folded.n_orb {
        return Ok(folded);
    }
    select_active(&folded, &keep)
}

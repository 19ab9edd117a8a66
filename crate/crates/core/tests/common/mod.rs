#![allow(dead_code)]

use std::path::PathBuf;

use pairvqe::integrals::{Manifest, ManifestEntry, MolecularSystem};
use pairvqe::vqe_driver::{ExactEngine, VqeConfig};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn manifest() -> Manifest {
    Manifest::load(&fixtures_dir().join("manifest.json")).expect("committed manifest")
}

pub fn entry(m: &Manifest, molecule: &str, r: f64) -> ManifestEntry {
    m.scan(molecule)
        .into_iter()
        .find(|e| (e.r - r).abs() < 1e-9)
        .unwrap_or_else(|| panic!("no {molecule} fixture at R={r}"))
        .clone()
}

pub fn system(molecule: &str, r: f64) -> MolecularSystem {
    let m = manifest();
    let e = entry(&m, molecule, r);
    m.load_system(&e).unwrap()
}

/// Exact mode on the pair-sector engine (same energies as the statevector, faster).
pub fn exact_pair() -> VqeConfig {
    VqeConfig {
        exact_engine: ExactEngine::PairSector,
        ..VqeConfig::exact()
    }
}

//! Scan specs, the scan runner and CSV/metadata output.
//!
//! A scan spec is an INI file:
//!
//! ```text
//! [scan]
//! molecule = lih
//! method = oo-upccd            ; hf | upccd | oo-upccd | doci | oo-doci | fci
//! backend = exact              ; exact | shots:N
//! noise = none                 ; none | coherent:r | depolarizing:r
//! seed = 7
//! output = lih.csv
//! manifest = ../fixtures/manifest.json
//!
//! [geometries]
//! 1.60 = ../fixtures/lih_1.60.fcidump
//!
//! [vqe]
//! macro_max = 100
//! ```
//!
//! Relative paths resolve against the spec file's directory. Without a
//! `[geometries]` section every manifest entry of the molecule is scanned.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ansatz::{screen_redundant, Decomposition, PairAnsatz};
use crate::error::{io_err, Error, Result};
use crate::integrals::{active_space, build_seniority_zero, read_fcidump, Manifest, MolecularSystem};
use crate::noise::{NoiseKind, NoiseModel};
use crate::oracle::{doci_ground_state, fci_ground_state, oo_doci, OoDociConfig};
use crate::vqe_driver::{energy_shift, run_vqe, ExactEngine, OrbitalSeed, VqeConfig};

pub const CSV_HEADER: [&str; 14] = [
    "molecule",
    "geometry",
    "method",
    "backend",
    "shots",
    "noise_kind",
    "noise_r",
    "seed",
    "energy_hartree",
    "stderr_hartree",
    "macro_iters",
    "converged",
    "n_active_params",
    "n_orbital_params",
];

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Hf,
    Upccd,
    OoUpccd,
    Doci,
    OoDoci,
    Fci,
}

impl Method {
    fn is_vqe(self) -> bool {
        matches!(self, Method::Upccd | Method::OoUpccd)
    }

    fn optimizes_orbitals(self) -> bool {
        matches!(self, Method::OoUpccd | Method::OoDoci)
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "hf" => Method::Hf,
            "upccd" => Method::Upccd,
            "oo-upccd" => Method::OoUpccd,
            "doci" => Method::Doci,
            "oo-doci" => Method::OoDoci,
            "fci" => Method::Fci,
            other => return Err(Error::Spec(format!("unknown method {other:?}"))),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Hf => "hf",
            Method::Upccd => "upccd",
            Method::OoUpccd => "oo-upccd",
            Method::Doci => "doci",
            Method::OoDoci => "oo-doci",
            Method::Fci => "fci",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Exact,
    Shots(u64),
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "exact" {
            return Ok(Backend::Exact);
        }
        let n = s
            .strip_prefix("shots:")
            .or_else(|| s.strip_prefix("shots("))
            .map(|v| v.trim_end_matches(')'))
            .ok_or_else(|| Error::Spec(format!("unknown backend {s:?}")))?;
        let n: u64 = n.parse().map_err(|_| Error::Spec(format!("bad shot count in {s:?}")))?;
        if n == 0 {
            return Err(Error::Spec("shot count must be positive".into()));
        }
        Ok(Backend::Shots(n))
    }
}

fn parse_noise(s: &str) -> Result<NoiseModel> {
    let s = s.trim().to_ascii_lowercase();
    if s == "none" {
        return Ok(NoiseModel::default());
    }
    let (kind, r) = s
        .split_once(':')
        .ok_or_else(|| Error::Spec(format!("noise must be none, coherent:r or depolarizing:r, got {s:?}")))?;
    let r: f64 = r.parse().map_err(|_| Error::Spec(format!("bad noise rate in {s:?}")))?;
    let model = match kind {
        "coherent" => NoiseModel::coherent(r),
        "depolarizing" => NoiseModel::depolarizing(r),
        _ => return Err(Error::Spec(format!("unknown noise kind {kind:?}"))),
    };
    model.validate()?;
    Ok(model)
}

#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub molecule: String,
    /// (label, fixture path) in scan order
    pub geometries: Vec<(String, PathBuf)>,
    pub method: Method,
    pub backend: Backend,
    pub noise: NoiseModel,
    pub seed: u64,
    pub output: PathBuf,
    pub manifest: Option<PathBuf>,
    pub vqe: VqeConfig,
    /// exact-mode redundancy screening before the run
    pub screen: bool,
    pub screen_threshold: f64,
}

fn parse_val<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Spec(format!("cannot parse {key} = {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Spec(format!("cannot parse {key} = {v:?} as a boolean"))),
    }
}

const SCAN_KEYS: [&str; 7] = ["molecule", "method", "backend", "noise", "seed", "output", "manifest"];

impl ScanSpec {
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_ini_str(&text, base, overrides)
    }

    /// `overrides` are `key=value` pairs; keys may be qualified (`vqe.macro_max`,
    /// `scan.seed`) or bare, in which case scan keys win over vqe keys.
    pub fn from_ini_str(text: &str, base: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let mut ini = Ini::load_from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        for (k, v) in overrides {
            let (section, key) = match k.split_once('.') {
                Some((s, k)) => (s.to_string(), k.to_string()),
                None if SCAN_KEYS.contains(&k.as_str()) => ("scan".to_string(), k.clone()),
                None => ("vqe".to_string(), k.clone()),
            };
            if !["scan", "vqe", "geometries"].contains(&section.as_str()) {
                return Err(Error::Spec(format!("unknown section in override {k:?}")));
            }
            ini.with_section(Some(section)).set(key, v.clone());
        }
        let resolve = |p: &str| -> PathBuf {
            let p = Path::new(p.trim());
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };

        let scan = ini
            .section(Some("scan"))
            .ok_or_else(|| Error::Spec("missing [scan] section".into()))?;
        for (k, _) in scan.iter() {
            if !SCAN_KEYS.contains(&k) {
                return Err(Error::Spec(format!("unknown [scan] key {k:?}")));
            }
        }
        let get = |k: &str| scan.get(k);
        let molecule = get("molecule")
            .ok_or_else(|| Error::Spec("missing scan.molecule".into()))?
            .trim()
            .to_string();
        let method: Method = get("method").unwrap_or("oo-upccd").parse()?;
        let backend: Backend = get("backend").unwrap_or("exact").parse()?;
        let noise = parse_noise(get("noise").unwrap_or("none"))?;
        let seed: u64 = parse_val("seed", get("seed").unwrap_or("0"))?;
        let output = resolve(get("output").unwrap_or("scan.csv"));
        let manifest = get("manifest").map(resolve);

        let mut vqe = match backend {
            Backend::Exact => VqeConfig::exact(),
            Backend::Shots(n) => VqeConfig::with_shots(n),
        };
        vqe.seed = seed;
        vqe.noise = noise.clone();
        vqe.optimize_orbitals = method.optimizes_orbitals();
        let mut screen = false;
        let mut screen_threshold = 1e-8;
        if let Some(sec) = ini.section(Some("vqe")) {
            for (k, v) in sec.iter() {
                match k {
                    "screen" => screen = parse_bool(k, v)?,
                    "screen_threshold" => screen_threshold = parse_val(k, v)?,
                    _ => apply_vqe_key(&mut vqe, k, v)?,
                }
            }
        }
        if !vqe.noise.is_noiseless() && backend == Backend::Exact {
            return Err(Error::Spec("noise requires a shots backend".into()));
        }
        if !method.is_vqe() && !vqe.noise.is_noiseless() {
            return Err(Error::Spec(format!("method {method} does not take a noise model")));
        }

        let geometries = match ini.section(Some("geometries")) {
            Some(sec) => sec.iter().map(|(k, v)| (k.trim().to_string(), resolve(v))).collect(),
            None => {
                let path = manifest
                    .clone()
                    .ok_or_else(|| Error::Spec("no [geometries] section and no manifest".into()))?;
                let m = Manifest::load(&path)?;
                m.scan(&molecule)
                    .into_iter()
                    .map(|e| (format!("{:.2}", e.r), m.path_of(e)))
                    .collect()
            }
        };
        Ok(Self {
            molecule,
            geometries,
            method,
            backend,
            noise,
            seed,
            output,
            manifest,
            vqe,
            screen,
            screen_threshold,
        })
    }
}

fn apply_vqe_key(cfg: &mut VqeConfig, k: &str, v: &str) -> Result<()> {
    match k {
        "macro_max" => cfg.macro_max = parse_val(k, v)?,
        "e_tol" => cfg.e_tol = parse_val(k, v)?,
        "spsa_a" => cfg.spsa.a = parse_val(k, v)?,
        "spsa_c" => cfg.spsa.c = parse_val(k, v)?,
        "spsa_A" | "spsa_big_a" => cfg.spsa.big_a = parse_val(k, v)?,
        "spsa_alpha" => cfg.spsa.alpha = parse_val(k, v)?,
        "spsa_gamma" => cfg.spsa.gamma = parse_val(k, v)?,
        "spsa_max_iter" => cfg.spsa.max_iter = parse_val(k, v)?,
        "level_shift" => cfg.orbital.level_shift = parse_val(k, v)?,
        "kappa_cap" | "kappa_max" => cfg.orbital.kappa_max = parse_val(k, v)?,
        "max_halvings" => cfg.orbital.max_halvings = parse_val(k, v)?,
        "resample_every" => cfg.noise.resample_every = parse_val(k, v)?,
        "per_gate" => cfg.noise.per_gate = parse_bool(k, v)?,
        "orbital_seed" => {
            cfg.orbital_seed = match v.trim() {
                "canonical" => OrbitalSeed::Canonical,
                "localized" => OrbitalSeed::Localized,
                "best" => OrbitalSeed::Best,
                _ => return Err(Error::Spec(format!("orbital_seed must be canonical|localized|best, got {v:?}"))),
            }
        }
        "decomposition" => {
            cfg.decomposition = match v.trim() {
                "magic" => Decomposition::Magic,
                "xx" => Decomposition::Xx,
                _ => return Err(Error::Spec(format!("decomposition must be magic|xx, got {v:?}"))),
            }
        }
        "exact_engine" => {
            cfg.exact_engine = match v.trim() {
                "statevector" => ExactEngine::Statevector,
                "pair" | "pair_sector" => ExactEngine::PairSector,
                _ => return Err(Error::Spec(format!("exact_engine must be statevector|pair, got {v:?}"))),
            }
        }
        _ => return Err(Error::Spec(format!("unknown [vqe] key {k:?}"))),
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub molecule: String,
    pub geometry: String,
    pub method: String,
    pub backend: String,
    pub shots: u64,
    pub noise_kind: String,
    pub noise_r: f64,
    pub seed: u64,
    pub energy_hartree: f64,
    pub stderr_hartree: f64,
    pub macro_iters: usize,
    pub converged: bool,
    pub n_active_params: usize,
    pub n_orbital_params: usize,
}

#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub rows: Vec<ScanRow>,
    pub all_converged: bool,
}

/// Loads a fixture with the frozen/excluded lists of its manifest entry.
pub fn load_fixture(path: &Path, manifest: Option<&Manifest>) -> Result<MolecularSystem> {
    let full = read_fcidump(path)?;
    match manifest {
        None => Ok(full),
        Some(m) => {
            let e = m
                .entry_for_file(path)
                .ok_or_else(|| Error::Spec(format!("{} has no manifest entry", path.display())))?;
            active_space(&full, &e.frozen, &e.excluded)
        }
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn manifest_for(spec: &ScanSpec) -> Result<Option<Manifest>> {
    if let Some(p) = &spec.manifest {
        return Ok(Some(Manifest::load(p)?));
    }
    // fall back to a manifest.json next to the first fixture
    let Some((_, first)) = spec.geometries.first() else {
        return Ok(None);
    };
    let candidate = first.parent().unwrap_or(Path::new(".")).join("manifest.json");
    if candidate.exists() {
        Ok(Some(Manifest::load(&candidate)?))
    } else {
        Ok(None)
    }
}

fn run_point(spec: &ScanSpec, index: usize, label: &str, sys: &MolecularSystem) -> Result<ScanRow> {
    let n = sys.n_orb;
    let mut row = ScanRow {
        molecule: spec.molecule.clone(),
        geometry: label.to_string(),
        method: spec.method.to_string(),
        backend: "exact".into(),
        shots: 0,
        noise_kind: NoiseKind::None.to_string(),
        noise_r: 0.0,
        seed: spec.seed,
        energy_hartree: f64::NAN,
        stderr_hartree: 0.0,
        macro_iters: 0,
        converged: true,
        n_active_params: 0,
        n_orbital_params: if spec.method.optimizes_orbitals() { n * (n - 1) / 2 } else { 0 },
    };
    match spec.method {
        Method::Hf => row.energy_hartree = sys.hf_energy(),
        Method::Doci => row.energy_hartree = doci_ground_state(&build_seniority_zero(sys), sys.n_pairs())?.0,
        Method::Fci => row.energy_hartree = fci_ground_state(sys, sys.n_pairs(), sys.n_pairs())?,
        Method::OoDoci => {
            let r = oo_doci(sys, &OoDociConfig::standard(sys))?;
            row.energy_hartree = r.energy;
            row.macro_iters = r.iterations;
            row.converged = r.converged;
        }
        Method::Upccd | Method::OoUpccd => {
            let mut cfg = spec.vqe.clone();
            cfg.stream = index as u64;
            let mut ansatz = PairAnsatz::for_system(sys)?;
            if spec.screen {
                ansatz.active_mask = screen_redundant(sys, &ansatz, &cfg, spec.screen_threshold)?.active_mask;
            }
            let r = run_vqe(sys, &ansatz, &cfg)?;
            if let Backend::Shots(s) = spec.backend {
                row.backend = "shots".into();
                row.shots = s;
            }
            row.noise_kind = cfg.noise.kind.to_string();
            row.noise_r = cfg.noise.r;
            row.energy_hartree = r.energy;
            row.stderr_hartree = r.stderr;
            row.macro_iters = r.macro_iters;
            row.converged = r.converged;
            row.n_active_params = ansatz.n_active();
        }
    }
    Ok(row)
}

/// Runs every geometry (in parallel), then writes the CSV and its metadata sidecar.
pub fn run_scan(spec: &ScanSpec) -> Result<ScanOutcome> {
    let manifest = manifest_for(spec)?;
    for (_, p) in &spec.geometries {
        if !p.exists() {
            return Err(Error::Spec(format!("missing fixture {}", p.display())));
        }
    }
    let rows: Vec<ScanRow> = spec
        .geometries
        .par_iter()
        .enumerate()
        .map(|(k, (label, path))| {
            let sys = load_fixture(path, manifest.as_ref())?;
            run_point(spec, k, label, &sys)
        })
        .collect::<Result<_>>()?;
    write_csv(&spec.output, &rows)?;
    write_metadata(spec, manifest.as_ref())?;
    let all_converged = rows.iter().all(|r| r.converged);
    Ok(ScanOutcome { rows, all_converged })
}

pub fn metadata_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_metadata(spec: &ScanSpec, manifest: Option<&Manifest>) -> Result<()> {
    let fixtures = spec
        .geometries
        .iter()
        .map(|(label, path)| {
            let sha = sha256_file(path)?;
            let entry = manifest.and_then(|m| m.entry_for_file(path));
            Ok(serde_json::json!({
                "label": label,
                "path": path.display().to_string(),
                "sha256": sha,
                "manifest_sha256": entry.map(|e| e.sha256.clone()),
                "frozen": entry.map(|e| e.frozen.clone()),
                "excluded": entry.map(|e| e.excluded.clone()),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let v = &spec.vqe;
    let meta = serde_json::json!({
        "version": VERSION,
        "molecule": spec.molecule,
        "method": spec.method.to_string(),
        "backend": match spec.backend { Backend::Exact => "exact".to_string(), Backend::Shots(n) => format!("shots:{n}") },
        "noise": {
            "kind": spec.noise.kind.to_string(),
            "r": spec.noise.r,
            "resample_every": v.noise.resample_every,
            "per_gate": v.noise.per_gate,
        },
        "seed": spec.seed,
        "manifest": spec.manifest.as_ref().map(|p| p.display().to_string()),
        "screen": spec.screen,
        "screen_threshold": spec.screen_threshold,
        "vqe": {
            "shots": v.shots,
            "macro_max": v.macro_max,
            "e_tol": v.e_tol,
            "spsa": {"a": v.spsa.a, "c": v.spsa.c, "A": v.spsa.big_a, "alpha": v.spsa.alpha, "gamma": v.spsa.gamma, "max_iter": v.spsa.max_iter},
            "level_shift": v.orbital.level_shift,
            "kappa_cap": v.orbital.kappa_max,
            "max_halvings": v.orbital.max_halvings,
            "optimize_orbitals": v.optimize_orbitals,
            "orbital_seed": format!("{:?}", v.orbital_seed).to_ascii_lowercase(),
            "decomposition": format!("{:?}", v.decomposition).to_ascii_lowercase(),
            "exact_engine": format!("{:?}", v.exact_engine).to_ascii_lowercase(),
        },
        "fixtures": fixtures,
    });
    let path = metadata_path(&spec.output);
    let text = serde_json::to_string_pretty(&meta)?;
    std::fs::write(&path, text + "\n").map_err(io_err(&path))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let f = std::fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::WriterBuilder::new().has_headers(false).from_writer(f))
}

// f64 Display is the shortest representation that parses back to the same value
fn record(b: &ScanRow) -> Vec<String> {
    vec![
        b.molecule.clone(),
        b.geometry.clone(),
        b.method.clone(),
        b.backend.clone(),
        b.shots.to_string(),
        b.noise_kind.clone(),
        b.noise_r.to_string(),
        b.seed.to_string(),
        b.energy_hartree.to_string(),
        b.stderr_hartree.to_string(),
        b.macro_iters.to_string(),
        b.converged.to_string(),
        b.n_active_params.to_string(),
        b.n_orbital_params.to_string(),
    ]
}

pub fn write_csv(path: &Path, rows: &[ScanRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(record(r))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv(path: &Path) -> Result<Vec<ScanRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Spec(format!("{}: unexpected CSV header {header:?}", path.display())));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRow {
    pub row: ScanRow,
    pub reference_energy_hartree: f64,
    pub delta_hartree: f64,
    pub combined_stderr_hartree: f64,
    pub max_abs_delta_hartree: f64,
}

fn geometry_value(label: &str) -> Result<f64> {
    label
        .trim()
        .parse()
        .map_err(|_| Error::Spec(format!("geometry label {label:?} is not numeric")))
}

/// Shifts `input` so it matches `reference` at `ref_geometry`, then compares pointwise.
pub fn shift_report(input: &[ScanRow], reference: &[ScanRow], ref_geometry: f64) -> Result<Vec<ShiftRow>> {
    let series = input
        .iter()
        .map(|r| Ok((geometry_value(&r.geometry)?, r.energy_hartree)))
        .collect::<Result<Vec<_>>>()?;
    let refs = reference
        .iter()
        .map(|r| Ok((geometry_value(&r.geometry)?, r)))
        .collect::<Result<Vec<_>>>()?;
    let ref_at = |g: f64| refs.iter().find(|(x, _)| (x - g).abs() < 1e-9).map(|(_, r)| *r);
    let anchor = ref_at(ref_geometry).ok_or_else(|| Error::MissingReference(ref_geometry.to_string()))?;
    let shifted = energy_shift(&series, ref_geometry, anchor.energy_hartree)?;
    let mut out = Vec::with_capacity(input.len());
    for (row, &(g, e)) in input.iter().zip(&shifted) {
        let r = ref_at(g).ok_or_else(|| Error::MissingReference(row.geometry.clone()))?;
        out.push(ShiftRow {
            row: ScanRow {
                energy_hartree: e,
                ..row.clone()
            },
            reference_energy_hartree: r.energy_hartree,
            delta_hartree: e - r.energy_hartree,
            combined_stderr_hartree: row.stderr_hartree.hypot(r.stderr_hartree),
            max_abs_delta_hartree: 0.0,
        });
    }
    let worst = out.iter().fold(0.0f64, |m, r| m.max(r.delta_hartree.abs()));
    for r in &mut out {
        r.max_abs_delta_hartree = worst;
    }
    Ok(out)
}

pub fn write_shift_csv(path: &Path, rows: &[ShiftRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    header.extend([
        "reference_energy_hartree",
        "delta_hartree",
        "combined_stderr_hartree",
        "max_abs_delta_hartree",
    ]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = record(&r.row);
        rec.extend([
            r.reference_energy_hartree.to_string(),
            r.delta_hartree.to_string(),
            r.combined_stderr_hartree.to_string(),
            r.max_abs_delta_hartree.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(g: &str, e: f64) -> ScanRow {
        ScanRow {
            molecule: "lih".into(),
            geometry: g.into(),
            method: "upccd".into(),
            backend: "exact".into(),
            shots: 0,
            noise_kind: "none".into(),
            noise_r: 0.0,
            seed: 1,
            energy_hartree: e,
            stderr_hartree: 0.0,
            macro_iters: 3,
            converged: true,
            n_active_params: 2,
            n_orbital_params: 0,
        }
    }

    #[test]
    fn parses_backend_and_noise() {
        assert_eq!("exact".parse::<Backend>().unwrap(), Backend::Exact);
        assert_eq!("shots:2000".parse::<Backend>().unwrap(), Backend::Shots(2000));
        assert!("shots:0".parse::<Backend>().is_err());
        assert_eq!(parse_noise("coherent:0.01").unwrap(), NoiseModel::coherent(0.01));
        assert!(parse_noise("depolarizing:2").is_err());
        assert!(parse_noise("thermal:0.1").is_err());
    }

    #[test]
    fn spec_overrides_and_validation() {
        let text = "[scan]\nmolecule = h2\nmethod = upccd\nbackend = shots:100\nnoise = coherent:0.01\n[geometries]\n0.74 = a.fcidump\n1.74 = b.fcidump\n";
        let over = vec![("macro_max".to_string(), "7".to_string()), ("seed".to_string(), "9".to_string())];
        let s = ScanSpec::from_ini_str(text, Path::new("/x"), &over).unwrap();
        assert_eq!(s.vqe.macro_max, 7);
        assert_eq!(s.seed, 9);
        assert_eq!(s.vqe.seed, 9);
        assert_eq!(s.vqe.shots, 100);
        assert_eq!(s.geometries[1], ("1.74".to_string(), PathBuf::from("/x/b.fcidump")));
        assert!(!s.vqe.optimize_orbitals);
        let bad = text.replace("backend = shots:100", "backend = exact");
        assert!(ScanSpec::from_ini_str(&bad, Path::new("/x"), &[]).is_err());
        let bad = text.replace("method = upccd", "method = fci");
        assert!(ScanSpec::from_ini_str(&bad, Path::new("/x"), &[]).is_err());
        let bad = vec![("vqe.nonsense".to_string(), "1".to_string())];
        assert!(ScanSpec::from_ini_str(text, Path::new("/x"), &bad).is_err());
    }

    #[test]
    fn shift_identity_and_constant() {
        let reference = vec![row("1.00", -1.0), row("1.60", -1.2), row("2.00", -1.1)];
        let same = shift_report(&reference, &reference, 1.6).unwrap();
        assert!(same.iter().all(|r| r.delta_hartree == 0.0));
        let moved: Vec<ScanRow> = reference.iter().map(|r| row(&r.geometry, r.energy_hartree + 0.3)).collect();
        let back = shift_report(&moved, &reference, 1.6).unwrap();
        assert!(back[0].max_abs_delta_hartree < 1e-14);
        assert!(shift_report(&moved, &reference, 3.0).is_err());
    }
}

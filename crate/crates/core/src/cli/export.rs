//! Map export: magnitude CSV, JSON metadata sidecar and plain PGM.
//!
//! All three files share a base path: `<base>.csv`, `<base>.json`,
//! `<base>.pgm`. Rows are written in grid order, `j = 0` first.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{Error, Result};
use crate::imaging::ImagingMap;

use super::ScenarioConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportPaths {
    pub csv: PathBuf,
    pub metadata: PathBuf,
    pub pgm: Option<PathBuf>,
}

fn with_suffix(base: &Path, ext: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// `ny` lines of `nx` comma-separated magnitudes, 17 significant digits.
pub fn csv_text(map: &ImagingMap) -> String {
    let nx = map.grid.nx;
    let mut out = String::with_capacity(map.magnitude.len() * 24);
    for row in map.magnitude.chunks(nx) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(map: &ImagingMap, path: &Path) -> Result<()> {
    write_file(path, csv_text(map).as_bytes())
}

/// Reads a magnitude CSV back as rows.
pub fn read_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|line| {
            line.split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| {
                        Error::Config(format!("{}: bad CSV value {tok:?}: {e}", path.display()))
                    })
                })
                .collect()
        })
        .collect()
}

/// Gray levels `floor(255 v / max)`; all zeros when the map is zero.
pub fn pgm_pixels(magnitude: &[f64]) -> Vec<u8> {
    let max = magnitude.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return vec![0; magnitude.len()];
    }
    magnitude
        .iter()
        .map(|&v| (255.0 * v / max).floor().clamp(0.0, 255.0) as u8)
        .collect()
}

pub fn pgm_text(map: &ImagingMap) -> String {
    let (nx, ny) = (map.grid.nx, map.grid.ny);
    let mut out = format!("P2\n{nx} {ny}\n255\n");
    for row in pgm_pixels(&map.magnitude).chunks(nx) {
        let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_pgm(map: &ImagingMap, path: &Path) -> Result<()> {
    write_file(path, pgm_text(map).as_bytes())
}

fn metadata(map: &ImagingMap, cfg: &ScenarioConfig) -> serde_json::Value {
    let snr = if cfg.snr_db.is_infinite() {
        json!("inf")
    } else {
        json!(cfg.snr_db)
    };
    let config = cfg.to_json();
    json!({
        "N": map.metadata.n,
        "K": map.metadata.k,
        "omegas": map.metadata.omegas,
        "ranks": map.metadata.ranks,
        "seed": cfg.seed,
        "snrDb": snr,
        "convention": map.metadata.convention,
        "gridSpec": map.grid,
        "cracks": config["cracks"].clone(),
        "maxMagnitude": map.max_magnitude(),
        "config": config,
    })
}

/// Writes the CSV and metadata sidecar, plus the PGM when `pgm` is set.
pub fn export_map(
    map: &ImagingMap,
    cfg: &ScenarioConfig,
    base: &Path,
    pgm: bool,
) -> Result<ExportPaths> {
    let csv = with_suffix(base, "csv");
    write_csv(map, &csv)?;
    let meta_path = with_suffix(base, "json");
    let text = serde_json::to_string_pretty(&metadata(map, cfg)).expect("metadata is serializable");
    write_file(&meta_path, text.as_bytes())?;
    let pgm = if pgm {
        let path = with_suffix(base, "pgm");
        write_pgm(map, &path)?;
        Some(path)
    } else {
        None
    };
    Ok(ExportPaths {
        csv,
        metadata: meta_path,
        pgm,
    })
}

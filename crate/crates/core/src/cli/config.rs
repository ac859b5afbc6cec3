//! TOML scenario files.
//!
//! ```toml
//! n = 12
//! k = 10
//! lambda_min = 0.4
//! lambda_max = 0.6
//! snr_db = 20.0            # or "inf"
//! seed = 7
//! tau = 0.1                # optional
//! convention = "symmetric" # optional, or "paper"
//! discretization_spacing = 0.04  # optional, defaults to lambda_min / 10
//!
//! [grid]                   # optional, defaults to 101 x 101, spacing 0.02, centered at (0, 0)
//! origin = { x = -1.0, y = -1.0 }
//! spacing = 0.02
//! nx = 101
//! ny = 101
//!
//! [[cracks]]
//! shape = "point"          # "point" | "segment" | "arc"
//! center = { x = 0.4, y = -0.2 }
//! rho = 0.05
//! ```
//!
//! Segments take `start` and `end`; arcs take `center`, `radius`,
//! `angle_start` and `angle_end` (radians). Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::Convention;
use crate::imaging::check_tau;
use crate::scene::{make_directions, make_frequencies, Crack, CrackShape, ImagingGrid, Point2};

const DEFAULT_TAU_NOISY: f64 = 0.1;
const DEFAULT_TAU_NOISELESS: f64 = 0.01;
const DEFAULT_GRID_SIDE: f64 = 2.0;
const DEFAULT_GRID_POINTS: usize = 101;

/// A fully validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub cracks: Vec<Crack>,
    pub n: usize,
    pub k: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub seed: u64,
    pub grid: ImagingGrid,
    pub tau: f64,
    pub convention: Convention,
    pub discretization_spacing: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawSnr {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawShape {
    Point,
    Segment,
    Arc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCrack {
    shape: RawShape,
    #[serde(skip_serializing_if = "Option::is_none")]
    center: Option<Point2>,
    #[serde(skip_serializing_if = "Option::is_none")]
    start: Option<Point2>,
    #[serde(skip_serializing_if = "Option::is_none")]
    end: Option<Point2>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    angle_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    angle_end: Option<f64>,
    rho: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: usize,
    k: usize,
    lambda_min: f64,
    lambda_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    snr_db: Option<RawSnr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    convention: Option<Convention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    discretization_spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<ImagingGrid>,
    cracks: Vec<RawCrack>,
}

fn config_err(field: &str, err: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {err}"))
}

fn parse_snr(raw: Option<RawSnr>) -> Result<f64> {
    match raw {
        None => Ok(f64::INFINITY),
        Some(RawSnr::Number(v)) if v.is_nan() || v == f64::NEG_INFINITY => {
            Err(config_err("snr_db", "must be a finite number or \"inf\""))
        }
        Some(RawSnr::Number(v)) => Ok(v),
        Some(RawSnr::Text(t)) => match t.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            _ => Err(config_err(
                "snr_db",
                format!("expected a number or \"inf\", got {t:?}"),
            )),
        },
    }
}

fn build_crack(idx: usize, raw: RawCrack) -> Result<Crack> {
    let field = format!("cracks[{idx}]");
    let need = |v: Option<Point2>, name: &str| {
        v.ok_or_else(|| config_err(&format!("{field}.{name}"), "missing field"))
    };
    let need_f = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| config_err(&format!("{field}.{name}"), "missing field"))
    };
    let reject = |present: bool, name: &str, shape: &str| {
        if present {
            Err(config_err(
                &format!("{field}.{name}"),
                format!("not allowed for shape \"{shape}\""),
            ))
        } else {
            Ok(())
        }
    };
    let shape = match raw.shape {
        RawShape::Point => {
            reject(raw.start.is_some(), "start", "point")?;
            reject(raw.end.is_some(), "end", "point")?;
            reject(raw.radius.is_some(), "radius", "point")?;
            reject(raw.angle_start.is_some(), "angle_start", "point")?;
            reject(raw.angle_end.is_some(), "angle_end", "point")?;
            CrackShape::Point {
                center: need(raw.center, "center")?,
            }
        }
        RawShape::Segment => {
            reject(raw.center.is_some(), "center", "segment")?;
            reject(raw.radius.is_some(), "radius", "segment")?;
            reject(raw.angle_start.is_some(), "angle_start", "segment")?;
            reject(raw.angle_end.is_some(), "angle_end", "segment")?;
            CrackShape::Segment {
                start: need(raw.start, "start")?,
                end: need(raw.end, "end")?,
            }
        }
        RawShape::Arc => {
            reject(raw.start.is_some(), "start", "arc")?;
            reject(raw.end.is_some(), "end", "arc")?;
            CrackShape::Arc {
                center: need(raw.center, "center")?,
                radius: need_f(raw.radius, "radius")?,
                angle_start: need_f(raw.angle_start, "angle_start")?,
                angle_end: need_f(raw.angle_end, "angle_end")?,
            }
        }
    };
    Crack::new(shape, raw.rho).map_err(|e| config_err(&field, e))
}

fn raw_crack(c: &Crack) -> RawCrack {
    let mut raw = RawCrack {
        shape: RawShape::Point,
        center: None,
        start: None,
        end: None,
        radius: None,
        angle_start: None,
        angle_end: None,
        rho: c.rho,
    };
    match c.shape {
        CrackShape::Point { center } => raw.center = Some(center),
        CrackShape::Segment { start, end } => {
            raw.shape = RawShape::Segment;
            raw.start = Some(start);
            raw.end = Some(end);
        }
        CrackShape::Arc {
            center,
            radius,
            angle_start,
            angle_end,
        } => {
            raw.shape = RawShape::Arc;
            raw.center = Some(center);
            raw.radius = Some(radius);
            raw.angle_start = Some(angle_start);
            raw.angle_end = Some(angle_end);
        }
    }
    raw
}

impl ScenarioConfig {
    /// Re-checks every invariant. Used after command-line overrides.
    pub fn validate(&self) -> Result<()> {
        if self.cracks.is_empty() {
            return Err(config_err("cracks", "at least one crack is required"));
        }
        for (idx, c) in self.cracks.iter().enumerate() {
            c.validate()
                .map_err(|e| config_err(&format!("cracks[{idx}]"), e))?;
            if c.rho != self.cracks[0].rho {
                return Err(config_err(
                    &format!("cracks[{idx}].rho"),
                    "all cracks must share the same rho",
                ));
            }
        }
        make_directions(self.n).map_err(|e| config_err("n", e))?;
        make_frequencies(self.lambda_min, self.lambda_max, self.k)
            .map_err(|e| config_err("lambda_min/lambda_max/k", e))?;
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(config_err("snr_db", "must be a finite number or \"inf\""));
        }
        if self.seed > i64::MAX as u64 {
            return Err(config_err("seed", "must fit in a signed 64-bit integer"));
        }
        self.grid.validate().map_err(|e| config_err("grid", e))?;
        check_tau(self.tau).map_err(|e| config_err("tau", e))?;
        if !(self.discretization_spacing > 0.0 && self.discretization_spacing.is_finite()) {
            return Err(config_err("discretization_spacing", "must be > 0"));
        }
        Ok(())
    }

    /// Resamples the grid to `points × points` over the same extent.
    pub fn set_grid_resolution(&mut self, points: usize) -> Result<()> {
        if points < 2 {
            return Err(config_err(
                "grid",
                "resolution override needs at least 2 points",
            ));
        }
        let extent = (self.grid.nx.max(self.grid.ny) - 1) as f64 * self.grid.spacing;
        let extent = if extent > 0.0 {
            extent
        } else {
            DEFAULT_GRID_SIDE
        };
        self.grid = ImagingGrid::new(
            self.grid.origin,
            extent / (points - 1) as f64,
            points,
            points,
        )
        .map_err(|e| config_err("grid", e))?;
        Ok(())
    }

    fn to_raw(&self) -> RawConfig {
        RawConfig {
            n: self.n,
            k: self.k,
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            snr_db: Some(if self.snr_db.is_infinite() {
                RawSnr::Text("inf".into())
            } else {
                RawSnr::Number(self.snr_db)
            }),
            seed: Some(self.seed),
            tau: Some(self.tau),
            convention: Some(self.convention),
            discretization_spacing: Some(self.discretization_spacing),
            grid: Some(self.grid),
            cracks: self.cracks.iter().map(raw_crack).collect(),
        }
    }

    /// JSON echo of the scenario for metadata sidecars.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_raw()).expect("config is serializable")
    }
}

/// Parses and validates a scenario document, filling defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let snr_db = parse_snr(raw.snr_db)?;
    let cracks = raw
        .cracks
        .into_iter()
        .enumerate()
        .map(|(i, c)| build_crack(i, c))
        .collect::<Result<Vec<_>>>()?;
    let tau = raw.tau.unwrap_or(if snr_db.is_finite() {
        DEFAULT_TAU_NOISY
    } else {
        DEFAULT_TAU_NOISELESS
    });
    let grid = match raw.grid {
        Some(g) => g,
        None => {
            ImagingGrid::centered_square(Point2::ORIGIN, DEFAULT_GRID_SIDE, DEFAULT_GRID_POINTS)?
        }
    };
    let cfg = ScenarioConfig {
        cracks,
        n: raw.n,
        k: raw.k,
        lambda_min: raw.lambda_min,
        lambda_max: raw.lambda_max,
        snr_db,
        seed: raw.seed.unwrap_or(0),
        grid,
        tau,
        convention: raw.convention.unwrap_or_default(),
        discretization_spacing: raw.discretization_spacing.unwrap_or(raw.lambda_min / 10.0),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Renders a scenario as a TOML document with every field explicit.
pub fn render_config(cfg: &ScenarioConfig) -> String {
    toml::to_string(&cfg.to_raw()).expect("config is serializable")
}

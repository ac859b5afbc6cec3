//! Crack geometry, sensing directions, frequency grids and imaging grids.
//!
//! Extended cracks (segments, arcs) enter the forward model as clouds of
//! point scatterers sharing the common half-length `rho`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point (or displacement) in the plane, in dimensionless length units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotate counter-clockwise about the origin.
    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl std::ops::Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, rhs: Point2) -> Point2 {
        Point2::new(self * rhs.x, self * rhs.y)
    }
}

/// Shape of a crack.
#[derive(Debug, Clone, PartialEq)]
pub enum CrackShape {
    /// A small crack, represented by its center.
    Point {
        center: Point2,
    },
    Segment {
        start: Point2,
        end: Point2,
    },
    /// Circular arc from `angle_start` to `angle_end` (radians, counter-clockwise).
    Arc {
        center: Point2,
        radius: f64,
        angle_start: f64,
        angle_end: f64,
    },
}

/// A perfectly conducting crack with half-length `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct Crack {
    pub shape: CrackShape,
    pub rho: f64,
}

impl Crack {
    pub fn point(center: Point2, rho: f64) -> Result<Self> {
        Self::new(CrackShape::Point { center }, rho)
    }

    pub fn segment(start: Point2, end: Point2, rho: f64) -> Result<Self> {
        Self::new(CrackShape::Segment { start, end }, rho)
    }

    pub fn arc(
        center: Point2,
        radius: f64,
        angle_start: f64,
        angle_end: f64,
        rho: f64,
    ) -> Result<Self> {
        Self::new(
            CrackShape::Arc {
                center,
                radius,
                angle_start,
                angle_end,
            },
            rho,
        )
    }

    pub fn new(shape: CrackShape, rho: f64) -> Result<Self> {
        let crack = Crack { shape, rho };
        crack.validate()?;
        Ok(crack)
    }

    /// Checks the geometric invariants of the crack.
    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho)?;
        match self.shape {
            CrackShape::Point { center } => {
                if !center.is_finite() {
                    return Err(Error::invalid("crack center must be finite"));
                }
            }
            CrackShape::Segment { start, end } => {
                if !start.is_finite() || !end.is_finite() {
                    return Err(Error::invalid("segment endpoints must be finite"));
                }
                if start == end {
                    return Err(Error::invalid("segment endpoints must be distinct"));
                }
            }
            CrackShape::Arc {
                center,
                radius,
                angle_start,
                angle_end,
            } => {
                if !center.is_finite() || !angle_start.is_finite() || !angle_end.is_finite() {
                    return Err(Error::invalid("arc parameters must be finite"));
                }
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::invalid("arc radius must be > 0"));
                }
                if angle_start >= angle_end {
                    return Err(Error::invalid("arc requires angle_start < angle_end"));
                }
            }
        }
        Ok(())
    }

    /// Length of the crack locus (zero for point cracks).
    pub fn arc_length(&self) -> f64 {
        match self.shape {
            CrackShape::Point { .. } => 0.0,
            CrackShape::Segment { start, end } => start.distance(end),
            CrackShape::Arc {
                radius,
                angle_start,
                angle_end,
                ..
            } => radius * (angle_end - angle_start),
        }
    }

    /// Point on the locus at normalized parameter `t` in `[0, 1]`.
    pub fn locus_point(&self, t: f64) -> Point2 {
        match self.shape {
            CrackShape::Point { center } => center,
            CrackShape::Segment { start, end } => start + t * (end - start),
            CrackShape::Arc {
                center,
                radius,
                angle_start,
                angle_end,
            } => {
                let phi = angle_start + t * (angle_end - angle_start);
                center + Point2::new(radius * phi.cos(), radius * phi.sin())
            }
        }
    }

    /// Distance from `p` to the crack locus.
    pub fn distance_to_locus(&self, p: Point2) -> f64 {
        match self.shape {
            CrackShape::Point { center } => p.distance(center),
            CrackShape::Segment { start, end } => {
                let d = end - start;
                let t = ((p - start).dot(d) / d.dot(d)).clamp(0.0, 1.0);
                p.distance(start + t * d)
            }
            CrackShape::Arc {
                center,
                radius,
                angle_start,
                angle_end,
            } => {
                let rel = p - center;
                let phi = angle_start + (rel.y.atan2(rel.x) - angle_start).rem_euclid(2.0 * PI);
                if phi <= angle_end {
                    (rel.norm() - radius).abs()
                } else {
                    let a = self.locus_point(0.0);
                    let b = self.locus_point(1.0);
                    p.distance(a).min(p.distance(b))
                }
            }
        }
    }
}

/// The half-length must satisfy `0 < rho < 2` so that `ln(rho/2) < 0`.
pub fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 2.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "crack half-length rho = {rho} violates 0 < rho < 2"
        )))
    }
}

/// Point scatterers obtained by discretizing a list of cracks.
#[derive(Debug, Clone, PartialEq)]
pub struct ScattererCloud {
    points: Vec<Point2>,
    source: Vec<usize>,
    rho: f64,
}

impl ScattererCloud {
    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Index of the crack each point was sampled from.
    pub fn source_indices(&self) -> &[usize] {
        &self.source
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Builds a cloud directly from point scatterers.
    pub fn from_points(points: Vec<Point2>, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        if points.is_empty() {
            return Err(Error::invalid("scatterer cloud must be nonempty"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("scatterer positions must be finite"));
        }
        let source = (0..points.len()).collect();
        Ok(Self {
            points,
            source,
            rho,
        })
    }

    /// Union of two clouds sharing the same `rho`.
    pub fn union(&self, other: &ScattererCloud) -> Result<Self> {
        if self.rho != other.rho {
            return Err(Error::invalid("cannot merge clouds with different rho"));
        }
        let offset = self.source.iter().max().map_or(0, |m| m + 1);
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let mut source = self.source.clone();
        source.extend(other.source.iter().map(|s| s + offset));
        Ok(Self {
            points,
            source,
            rho: self.rho,
        })
    }

    pub fn translated(&self, t: Point2) -> Self {
        Self {
            points: self.points.iter().map(|&p| p + t).collect(),
            source: self.source.clone(),
            rho: self.rho,
        }
    }
}

/// Samples every crack along its locus with arc-length spacing at most
/// `max_spacing`, endpoints included.
///
/// A segment or arc of length `s` yields `ceil(s / max_spacing) + 1`
/// uniformly spaced points; a point crack yields its center.
pub fn discretize(cracks: &[Crack], max_spacing: f64) -> Result<ScattererCloud> {
    if !(max_spacing > 0.0 && max_spacing.is_finite()) {
        return Err(Error::invalid("discretization spacing must be > 0"));
    }
    let first = cracks
        .first()
        .ok_or_else(|| Error::invalid("at least one crack is required"))?;
    let rho = first.rho;
    let mut points = Vec::new();
    let mut source = Vec::new();
    for (idx, crack) in cracks.iter().enumerate() {
        crack.validate()?;
        if crack.rho != rho {
            return Err(Error::invalid("all cracks must share the same rho"));
        }
        match crack.shape {
            CrackShape::Point { center } => {
                points.push(center);
                source.push(idx);
            }
            _ => {
                let intervals = (crack.arc_length() / max_spacing).ceil().max(1.0) as usize;
                for i in 0..=intervals {
                    points.push(crack.locus_point(i as f64 / intervals as f64));
                    source.push(idx);
                }
            }
        }
    }
    Ok(ScattererCloud {
        points,
        source,
        rho,
    })
}

/// `N` equi-distributed unit incidence directions starting at `(1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    dirs: Vec<Point2>,
}

impl DirectionSet {
    pub fn as_slice(&self) -> &[Point2] {
        &self.dirs
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Index of the direction opposite to direction `n`.
    pub fn opposite(&self, n: usize) -> usize {
        (n + self.dirs.len() / 2) % self.dirs.len()
    }

    /// All directions rotated by the same angle. The result no longer starts
    /// at `(1, 0)` but keeps equi-distribution and symmetry.
    pub fn rotated(&self, angle: f64) -> DirectionSet {
        DirectionSet {
            dirs: self.dirs.iter().map(|d| d.rotated(angle)).collect(),
        }
    }
}

pub fn make_directions(n: usize) -> Result<DirectionSet> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "number of directions N = {n} must be even and >= 2"
        )));
    }
    let step = 2.0 * PI / n as f64;
    let dirs = (0..n)
        .map(|k| {
            let (s, c) = (step * k as f64).sin_cos();
            Point2::new(c, s)
        })
        .collect();
    Ok(DirectionSet { dirs })
}

/// Strictly increasing, equi-spaced angular frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.omegas[0]
    }

    pub fn last(&self) -> f64 {
        self.omegas[self.omegas.len() - 1]
    }
}

/// `K` angular frequencies equi-spaced in `[2π/lambda_max, 2π/lambda_min]`.
pub fn make_frequencies(lambda_min: f64, lambda_max: f64, k: usize) -> Result<FrequencyGrid> {
    if !(lambda_min > 0.0 && lambda_min.is_finite() && lambda_max.is_finite()) {
        return Err(Error::invalid("wavelengths must be positive and finite"));
    }
    if lambda_min >= lambda_max {
        return Err(Error::invalid(format!(
            "wavelength interval requires lambda_min < lambda_max (got {lambda_min}, {lambda_max})"
        )));
    }
    if k == 0 {
        return Err(Error::invalid("number of frequencies K must be >= 1"));
    }
    let w1 = 2.0 * PI / lambda_max;
    if k == 1 {
        return Ok(FrequencyGrid { omegas: vec![w1] });
    }
    let wk = 2.0 * PI / lambda_min;
    let step = (wk - w1) / (k - 1) as f64;
    let mut omegas: Vec<f64> = (0..k).map(|i| w1 + step * i as f64).collect();
    omegas[k - 1] = wk;
    Ok(FrequencyGrid { omegas })
}

/// Rectangular sampling grid; sample `(i, j)` sits at `origin + (i h, j h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingGrid {
    pub origin: Point2,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl ImagingGrid {
    pub fn new(origin: Point2, spacing: f64, nx: usize, ny: usize) -> Result<Self> {
        let grid = Self {
            origin,
            spacing,
            nx,
            ny,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Square grid of `n × n` samples centered at `center` with side `side`.
    pub fn centered_square(center: Point2, side: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(
                "centered grid needs at least 2 samples per side",
            ));
        }
        let h = side / (n - 1) as f64;
        Self::new(center - Point2::new(side / 2.0, side / 2.0), h, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::invalid("grid spacing must be > 0"));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("grid needs nx, ny >= 1"));
        }
        if !self.origin.is_finite() {
            return Err(Error::invalid("grid origin must be finite"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize, j: usize) -> Point2 {
        self.origin + Point2::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    /// Point of the row-major flat index (`j * nx + i`).
    pub fn point_at(&self, flat: usize) -> Point2 {
        self.point(flat % self.nx, flat / self.nx)
    }

    /// Grid indices of the sample closest to `p`, clamped to the grid.
    pub fn nearest(&self, p: Point2) -> (usize, usize) {
        let fi = ((p.x - self.origin.x) / self.spacing).round();
        let fj = ((p.y - self.origin.y) / self.spacing).round();
        let i = fi.clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = fj.clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }
}

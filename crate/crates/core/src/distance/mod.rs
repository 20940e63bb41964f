//! Minimum-path distance maps from a set of dot annotations.
//!
//! The distance of a voxel is the length of the cheapest 8-connected (2D) or
//! 26-connected (3D) path to any dot, where each step between neighbors costs
//!
//! * `Geodesic`:  `sqrt(dI^2 + dE^2)`
//! * `Intensity`: `dI`
//! * `Euclidean`: `dE`
//!
//! with `dI = |G(a) - G(b)|` the intensity difference and `dE` the spatial
//! step (1, √2 or √3 voxel units, scaled by the optional spacing).
//!
//! [`distance_transform`] solves this with alternating forward/backward raster
//! sweeps; [`dijkstra_oracle`] computes the same quantity with a multi-source
//! Dijkstra search and exists to verify the sweeps.

mod neighborhood;
mod oracle;
mod raster;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, VoxelGrid};

pub use neighborhood::{Neighborhood, Offset};
pub use oracle::dijkstra_oracle;
pub use raster::distance_transform;

/// Stand-in for +∞ during relaxation; leaves headroom so `INF + cost` stays finite.
pub const INF_SENTINEL: f64 = f64::MAX / 2.0;

pub const DEFAULT_MAX_PASSES: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("the dot set is empty")]
    EmptyDotSet,
    #[error("raster scan did not converge within {0} passes")]
    DidNotConverge(usize),
    #[error("max_passes must be positive")]
    ZeroPasses,
    #[error("spacing must be positive and finite, got {0:?}")]
    BadSpacing(Vec<f64>),
    #[error("spacing must have 2 or 3 entries, got {0}")]
    SpacingArity(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Which per-step cost the path length uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Geodesic,
    Intensity,
    Euclidean,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 3] = [
        DistanceKind::Geodesic,
        DistanceKind::Intensity,
        DistanceKind::Euclidean,
    ];

    /// Cost of one step given the absolute intensity difference and the
    /// spatial step length.
    #[inline]
    pub fn step_cost(self, intensity_diff: f64, spatial_step: f64) -> f64 {
        match self {
            DistanceKind::Geodesic => intensity_diff.hypot(spatial_step),
            DistanceKind::Intensity => intensity_diff,
            DistanceKind::Euclidean => spatial_step,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Geodesic => "geodesic",
            DistanceKind::Intensity => "intensity",
            DistanceKind::Euclidean => "euclidean",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "geodesic" | "gdm" => Ok(DistanceKind::Geodesic),
            "intensity" | "idm" => Ok(DistanceKind::Intensity),
            "euclidean" | "edm" => Ok(DistanceKind::Euclidean),
            other => Err(format!(
                "unknown distance kind {other:?} (expected geodesic, intensity or euclidean)"
            )),
        }
    }
}

/// Physical voxel size per axis, stored as `[z, y, x]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spacing([f64; 3]);

impl Spacing {
    pub const fn unit() -> Self {
        Spacing([1.0; 3])
    }

    /// Accepts `[y, x]` or `[z, y, x]`.
    pub fn new(values: &[f64]) -> Result<Self, TransformError> {
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(TransformError::BadSpacing(values.to_vec()));
        }
        match *values {
            [y, x] => Ok(Spacing([1.0, y, x])),
            [z, y, x] => Ok(Spacing([z, y, x])),
            _ => Err(TransformError::SpacingArity(values.len())),
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    /// The entries relevant to an `ndim`-dimensional grid.
    pub fn for_ndim(&self, ndim: usize) -> &[f64] {
        &self.0[3 - ndim..]
    }
}

impl Default for Spacing {
    fn default() -> Self {
        Spacing::unit()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformOptions {
    pub spacing: Spacing,
    pub max_passes: usize,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            spacing: Spacing::unit(),
            max_passes: DEFAULT_MAX_PASSES,
        }
    }
}

/// Nonnegative per-voxel path distances to the nearest dot.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap {
    pub grid: VoxelGrid,
    pub kind: DistanceKind,
    /// Full forward+backward iterations the raster scan used, including the
    /// final one that changed nothing. `None` for oracle output.
    pub passes: Option<usize>,
}

impl DistanceMap {
    pub fn values(&self) -> &[f32] {
        self.grid.data()
    }
}

fn validate(
    image: &VoxelGrid,
    dots: &crate::grid::DotSet,
    spacing: &Spacing,
) -> Result<(), TransformError> {
    if dots.is_empty() {
        return Err(TransformError::EmptyDotSet);
    }
    dots.check_bounds(image)?;
    let s = spacing.as_array();
    if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(TransformError::BadSpacing(s.to_vec()));
    }
    Ok(())
}

fn finish(
    image: &VoxelGrid,
    work: Vec<f64>,
    kind: DistanceKind,
    passes: Option<usize>,
) -> Result<DistanceMap, TransformError> {
    let grid = VoxelGrid::new(image.dims(), work.into_iter().map(|v| v as f32).collect())?;
    Ok(DistanceMap { grid, kind, passes })
}

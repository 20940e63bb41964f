//! Target maps: inverted, max-normalised distance maps with a decay exponent.
//!
//! `M_p(x) = (1 - DM(x) / max DM)^p`, so dots map to 1, the farthest voxel to
//! 0, and larger `p` concentrates the mass closer to the dots.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distance::{DistanceKind, DistanceMap};
use crate::grid::{GridError, VoxelGrid};

#[derive(Debug, Error, PartialEq)]
pub enum NormalizeError {
    #[error("decay must be a positive finite number, got {0}")]
    NonPositiveDecay(f64),
    #[error("distance map has negative value {value} at index {index}")]
    NegativeDistance { index: usize, value: f32 },
    #[error("image maximum must be positive, got {0}")]
    NonPositiveMax(f32),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetInfo {
    pub kind: DistanceKind,
    pub p: f64,
    pub shifted: bool,
    /// Set when the distance map was identically zero and the target
    /// degenerated to all ones.
    pub degenerate: bool,
}

/// A decay-normalised target map with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMap {
    pub grid: VoxelGrid,
    pub decay: f64,
    pub kind: DistanceKind,
    pub degenerate: bool,
}

impl TargetMap {
    pub fn info(&self, shifted: bool) -> TargetInfo {
        TargetInfo {
            kind: self.kind,
            p: self.decay,
            shifted,
            degenerate: self.degenerate,
        }
    }
}

/// Inverts and normalises `dm` with decay exponent `p`.
///
/// ```
/// use lesiondist::distance::{DistanceKind, DistanceMap};
/// use lesiondist::grid::VoxelGrid;
/// use lesiondist::normalize::normalize_map;
///
/// let dm = DistanceMap {
///     grid: VoxelGrid::new(&[1, 3], vec![0.0, 2.0, 4.0]).unwrap(),
///     kind: DistanceKind::Euclidean,
///     passes: None,
/// };
/// let m = normalize_map(&dm, 2.0).unwrap();
/// assert_eq!(m.grid.data(), &[1.0, 0.25, 0.0]);
/// ```
pub fn normalize_map(dm: &DistanceMap, p: f64) -> Result<TargetMap, NormalizeError> {
    if !(p.is_finite() && p > 0.0) {
        return Err(NormalizeError::NonPositiveDecay(p));
    }
    let vals = dm.grid.data();
    if let Some((index, &value)) = vals.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(NormalizeError::NegativeDistance { index, value });
    }
    let max = vals.iter().copied().fold(0.0f32, f32::max) as f64;
    let (data, degenerate) = if max == 0.0 {
        (vec![1.0f32; vals.len()], true)
    } else {
        let data = vals
            .iter()
            .map(|&d| (1.0 - d as f64 / max).max(0.0).powf(p) as f32)
            .collect();
        (data, false)
    };
    Ok(TargetMap {
        grid: VoxelGrid::new(dm.grid.dims(), data)?,
        decay: p,
        kind: dm.kind,
        degenerate,
    })
}

/// Divides every voxel by the image maximum.
pub fn image_normalize(image: &VoxelGrid) -> Result<VoxelGrid, NormalizeError> {
    let max = image.max();
    if max <= 0.0 {
        return Err(NormalizeError::NonPositiveMax(max));
    }
    Ok(image.map(|v| v / max)?)
}

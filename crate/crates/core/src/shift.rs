//! Moving dot annotations onto the bright structure they mark.
//!
//! Annotators do not always click inside the lesion. Each dot is moved to the
//! brightest voxel that lies within `radius` (Euclidean) of it and belongs to
//! the same 8-connected bright component. "Bright" is relative to the local
//! neighbourhood: a voxel is in the mask when its intensity is at least
//! `threshold` times the maximum inside a `window`×`window` box centred on the
//! dot.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Coord, DotSet, GridError, VoxelGrid};

#[derive(Debug, Error, PartialEq)]
pub enum ShiftError {
    #[error("dot shifting works on 2D images, got {0}D")]
    NotTwoDimensional(usize),
    #[error("shift radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("component threshold must lie in (0, 1), got {0}")]
    BadThreshold(f64),
    #[error("window must be a positive odd size, got {0}")]
    BadWindow(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShiftConfig {
    pub radius: f64,
    pub threshold: f64,
    pub window: usize,
}

impl Default for ShiftConfig {
    fn default() -> Self {
        ShiftConfig {
            radius: 3.0,
            threshold: 0.6,
            window: 7,
        }
    }
}

impl ShiftConfig {
    pub fn validate(&self) -> Result<(), ShiftError> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(ShiftError::BadRadius(self.radius));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ShiftError::BadThreshold(self.threshold));
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(ShiftError::BadWindow(self.window));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftNote {
    /// The dot sits below the local brightness threshold; left in place.
    NotOnComponent,
    /// Two or more dots landed on the same voxel and were merged.
    Merged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOutcome {
    pub dots: DotSet,
    /// Notes keyed by the original dot coordinate.
    pub notes: Vec<(Coord, ShiftNote)>,
}

/// Shifts each dot to the brightest eligible voxel. Ties go to the first
/// voxel in raster order.
pub fn shift_dots(
    image: &VoxelGrid,
    dots: &DotSet,
    cfg: &ShiftConfig,
) -> Result<ShiftOutcome, ShiftError> {
    if image.ndim() != 2 {
        return Err(ShiftError::NotTwoDimensional(image.ndim()));
    }
    cfg.validate()?;
    dots.check_bounds(image)?;

    let mut moved = Vec::with_capacity(dots.len());
    let mut notes = Vec::new();
    for &dot in dots.iter() {
        let target = match shift_one(image, dot, cfg) {
            Some(t) => t,
            None => {
                notes.push((dot, ShiftNote::NotOnComponent));
                dot
            }
        };
        if moved.contains(&target) {
            notes.push((dot, ShiftNote::Merged));
        } else {
            moved.push(target);
        }
    }
    Ok(ShiftOutcome {
        dots: DotSet::new(2, moved)?,
        notes,
    })
}

fn shift_one(image: &VoxelGrid, dot: Coord, cfg: &ShiftConfig) -> Option<Coord> {
    let (h, w) = (image.height(), image.width());
    let vals = image.data();
    let half = cfg.window / 2;

    let mut local_max = f32::NEG_INFINITY;
    for y in dot.y.saturating_sub(half)..=(dot.y + half).min(h - 1) {
        for x in dot.x.saturating_sub(half)..=(dot.x + half).min(w - 1) {
            local_max = local_max.max(vals[y * w + x]);
        }
    }
    if local_max <= 0.0 {
        return None;
    }
    let cut = cfg.threshold * local_max as f64;
    let in_mask = |i: usize| vals[i] as f64 >= cut;
    let start = dot.y * w + dot.x;
    if !in_mask(start) {
        return None;
    }

    let mut seen = vec![false; h * w];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut best = start;
    let r2 = cfg.radius * cfg.radius;
    while let Some(i) = queue.pop_front() {
        let (y, x) = (i / w, i % w);
        let (dy, dx) = (y as f64 - dot.y as f64, x as f64 - dot.x as f64);
        if dy * dy + dx * dx <= r2 && (vals[i] > vals[best] || (vals[i] == vals[best] && i < best))
        {
            best = i;
        }
        for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
            for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                let j = ny * w + nx;
                if !seen[j] && in_mask(j) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Some(Coord::yx(best / w, best % w))
}

//! Non-maximum suppression on predicted 2D maps.
//!
//! A voxel is a candidate when its value equals the maximum of the 5×5 window
//! centred on it (truncated at the borders). Candidates that touch each other
//! (8-connectivity) and share the same value form a plateau and are reported
//! once, at the plateau centroid.

use std::cmp::Ordering;
use std::collections::VecDeque;

use thiserror::Error;

use crate::grid::{Coord, VoxelGrid};

/// Half-width of the suppression window: 2 gives 5×5.
pub const NMS_RADIUS: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("non-maximum suppression works on 2D maps, got {0}D")]
    NotTwoDimensional(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub coord: Coord,
    pub score: f32,
}

fn by_score_desc(a: &Detection, b: &Detection) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.coord.cmp(&b.coord))
}

/// Scored detections, sorted by descending score (ties in raster order),
/// with at most one detection per coordinate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionSet {
    dets: Vec<Detection>,
    threshold: Option<f64>,
}

impl DetectionSet {
    /// Sorts the input and drops repeated coordinates, keeping the highest score.
    pub fn from_unsorted(mut dets: Vec<Detection>) -> Self {
        dets.sort_by(by_score_desc);
        let mut seen = std::collections::HashSet::new();
        dets.retain(|d| seen.insert(d.coord));
        DetectionSet {
            dets,
            threshold: None,
        }
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    pub fn as_slice(&self) -> &[Detection] {
        &self.dets
    }

    pub fn iter(&self) -> impl Iterator<Item = &Detection> {
        self.dets.iter()
    }

    pub fn coords(&self) -> Vec<Coord> {
        self.dets.iter().map(|d| d.coord).collect()
    }

    pub fn scores(&self) -> Vec<f32> {
        self.dets.iter().map(|d| d.score).collect()
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    /// The first `n` detections (the `n` highest scores).
    pub fn top(&self, n: usize) -> &[Detection] {
        &self.dets[..n.min(self.dets.len())]
    }
}

/// Maximum over the (2r+1)×(2r+1) window around each voxel, truncated at the
/// borders. Separable: a row pass followed by a column pass.
pub fn window_max(map: &VoxelGrid, radius: usize) -> Vec<f32> {
    let (h, w) = (map.height(), map.width());
    let src = map.data();
    let mut rows = vec![0.0f32; h * w];
    for y in 0..h {
        for x in 0..w {
            let (lo, hi) = (x.saturating_sub(radius), (x + radius).min(w - 1));
            rows[y * w + x] = src[y * w + lo..=y * w + hi]
                .iter()
                .copied()
                .fold(f32::NEG_INFINITY, f32::max);
        }
    }
    let mut out = vec![0.0f32; h * w];
    for y in 0..h {
        let (lo, hi) = (y.saturating_sub(radius), (y + radius).min(h - 1));
        for x in 0..w {
            out[y * w + x] = (lo..=hi)
                .map(|yy| rows[yy * w + x])
                .fold(f32::NEG_INFINITY, f32::max);
        }
    }
    out
}

// Round to nearest, exact halves toward the smaller index.
fn round_half_down(v: f64) -> usize {
    (v - 0.5).ceil().max(0.0) as usize
}

/// Unthresholded NMS candidates of a 2D map.
///
/// ```
/// use lesiondist::detection::local_maxima;
/// use lesiondist::grid::{Coord, VoxelGrid};
///
/// let map = VoxelGrid::from_fn(&[9, 9], |c| if c == Coord::yx(4, 7) { 0.9 } else { 0.1 }).unwrap();
/// let cands = local_maxima(&map).unwrap();
/// assert_eq!(cands.as_slice()[0].coord, Coord::yx(4, 7));
/// ```
pub fn local_maxima(map: &VoxelGrid) -> Result<DetectionSet, DetectError> {
    if map.ndim() != 2 {
        return Err(DetectError::NotTwoDimensional(map.ndim()));
    }
    let (h, w) = (map.height(), map.width());
    let vals = map.data();
    let wmax = window_max(map, NMS_RADIUS);
    let is_cand: Vec<bool> = vals.iter().zip(&wmax).map(|(v, m)| v == m).collect();

    let mut visited = vec![false; h * w];
    let mut dets = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..h * w {
        if !is_cand[start] || visited[start] {
            continue;
        }
        let value = vals[start];
        let mut members = Vec::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            members.push(i);
            let (y, x) = (i / w, i % w);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if !visited[j] && is_cand[j] && vals[j] == value {
                        visited[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        dets.push(Detection {
            coord: plateau_representative(&mut members, w),
            score: value,
        });
    }
    Ok(DetectionSet::from_unsorted(dets))
}

/// Centroid of the plateau rounded to a voxel; snapped to the nearest plateau
/// member when the rounded centroid falls outside a non-convex plateau.
fn plateau_representative(members: &mut [usize], w: usize) -> Coord {
    if members.len() == 1 {
        return Coord::yx(members[0] / w, members[0] % w);
    }
    members.sort_unstable();
    let n = members.len() as f64;
    let cy = members.iter().map(|&i| (i / w) as f64).sum::<f64>() / n;
    let cx = members.iter().map(|&i| (i % w) as f64).sum::<f64>() / n;
    let (ry, rx) = (round_half_down(cy), round_half_down(cx));
    if members.binary_search(&(ry * w + rx)).is_ok() {
        return Coord::yx(ry, rx);
    }
    let d2 = |i: usize| {
        let (dy, dx) = ((i / w) as f64 - cy, (i % w) as f64 - cx);
        dy * dy + dx * dx
    };
    // members are sorted, so min_by keeps the first (smallest index) on ties
    let best = members
        .iter()
        .copied()
        .min_by(|&a, &b| d2(a).total_cmp(&d2(b)))
        .unwrap();
    Coord::yx(best / w, best % w)
}

/// Keeps candidates scoring at least `t`; records `t` on the result.
pub fn threshold_detections(cands: &DetectionSet, t: f64) -> DetectionSet {
    DetectionSet {
        dets: cands
            .dets
            .iter()
            .filter(|d| d.score as f64 >= t)
            .copied()
            .collect(),
        threshold: Some(t),
    }
}

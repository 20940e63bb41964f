use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{finish, validate, DistanceKind, DistanceMap, Spacing, TransformError};
use crate::grid::{DotSet, VoxelGrid};

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra over the voxel graph with the same step costs as
/// [`distance_transform`](super::distance_transform).
///
/// `O(N log N)` with a binary heap; meant for verifying the raster scan on
/// small grids.
pub fn dijkstra_oracle(
    image: &VoxelGrid,
    dots: &DotSet,
    kind: DistanceKind,
    spacing: &Spacing,
) -> Result<DistanceMap, TransformError> {
    validate(image, dots, spacing)?;
    let [d, h, w] = image.shape();
    let [sz, sy, sx] = spacing.as_array();
    let g = image.data();

    let mut dist = vec![f64::INFINITY; image.len()];
    let mut done = vec![false; image.len()];
    let mut heap = BinaryHeap::new();
    for &c in dots.iter() {
        let i = image.index(c);
        dist[i] = 0.0;
        heap.push(Entry {
            dist: 0.0,
            index: i,
        });
    }

    let zr: std::ops::RangeInclusive<i64> = if image.ndim() == 3 { -1..=1 } else { 0..=0 };
    while let Some(Entry { dist: du, index: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        let (uz, uy, ux) = ((u / (h * w)) as i64, ((u / w) % h) as i64, (u % w) as i64);
        for dz in zr.clone() {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dz == 0 && dy == 0 && dx == 0 {
                        continue;
                    }
                    let (vz, vy, vx) = (uz + dz, uy + dy, ux + dx);
                    if vz < 0
                        || vy < 0
                        || vx < 0
                        || vz >= d as i64
                        || vy >= h as i64
                        || vx >= w as i64
                    {
                        continue;
                    }
                    let v = ((vz as usize * h) + vy as usize) * w + vx as usize;
                    if done[v] {
                        continue;
                    }
                    let (ez, ey, ex) = (dz as f64 * sz, dy as f64 * sy, dx as f64 * sx);
                    let spatial = (ez * ez + ey * ey + ex * ex).sqrt();
                    let di = (g[u] as f64 - g[v] as f64).abs();
                    let cost = match kind {
                        DistanceKind::Geodesic => (di * di + spatial * spatial).sqrt(),
                        DistanceKind::Intensity => di,
                        DistanceKind::Euclidean => spatial,
                    };
                    let nd = du + cost;
                    if nd < dist[v] {
                        dist[v] = nd;
                        heap.push(Entry { dist: nd, index: v });
                    }
                }
            }
        }
    }
    finish(image, dist, kind, None)
}

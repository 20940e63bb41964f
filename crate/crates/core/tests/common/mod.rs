//! Seeded instance generators and brute-force references shared by the
//! integration tests.
#![allow(dead_code)]

use lesiondist::detection::{Detection, DetectionSet};
use lesiondist::grid::{Coord, DotSet, VoxelGrid};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random image with values in `[0, 1)` and `1..=max_dots` distinct dots.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    dims: &[usize],
    max_dots: usize,
) -> (VoxelGrid, DotSet) {
    let n: usize = dims.iter().product();
    let data = (0..n).map(|_| rng.random::<f32>()).collect();
    let image = VoxelGrid::new(dims, data).unwrap();
    let k = rng.random_range(1..=max_dots.min(n));
    let coords = sample(rng, n, k)
        .into_iter()
        .map(|i| image.coord(i))
        .collect();
    (image, DotSet::new(dims.len(), coords).unwrap())
}

pub fn random_dims_2d(rng: &mut ChaCha8Rng, max: usize) -> Vec<usize> {
    vec![rng.random_range(1..=max), rng.random_range(1..=max)]
}

pub fn random_dims_3d(rng: &mut ChaCha8Rng, max: usize) -> Vec<usize> {
    vec![
        rng.random_range(1..=max),
        rng.random_range(1..=max),
        rng.random_range(1..=max),
    ]
}

pub fn random_points(rng: &mut ChaCha8Rng, count: usize, side: usize) -> Vec<Coord> {
    (0..count)
        .map(|_| Coord::yx(rng.random_range(0..side), rng.random_range(0..side)))
        .collect()
}

pub fn distinct_points(rng: &mut ChaCha8Rng, count: usize, side: usize) -> Vec<Coord> {
    sample(rng, side * side, count)
        .into_iter()
        .map(|i| Coord::yx(i / side, i % side))
        .collect()
}

/// `(max number of in-radius pairs, min total distance among those)` over
/// every one-to-one partial assignment.
pub fn brute_force_matching(dets: &[Coord], annots: &[Coord], radius: f64) -> (usize, f64) {
    fn rec(
        dets: &[Coord],
        annots: &[Coord],
        radius: f64,
        a: usize,
        used: &mut Vec<bool>,
        (hits, dist): (usize, f64),
        best: &mut (usize, f64),
    ) {
        if a == annots.len() {
            if hits > best.0 || (hits == best.0 && dist < best.1) {
                *best = (hits, dist);
            }
            return;
        }
        rec(dets, annots, radius, a + 1, used, (hits, dist), best);
        for (d, det) in dets.iter().enumerate() {
            let dd = det.distance(&annots[a]);
            if !used[d] && dd <= radius {
                used[d] = true;
                rec(
                    dets,
                    annots,
                    radius,
                    a + 1,
                    used,
                    (hits + 1, dist + dd),
                    best,
                );
                used[d] = false;
            }
        }
    }
    let mut best = (0, 0.0);
    rec(
        dets,
        annots,
        radius,
        0,
        &mut vec![false; dets.len()],
        (0, 0.0),
        &mut best,
    );
    best
}

/// Candidates with scores on a coarse grid so that ties across images occur.
pub fn random_candidates(rng: &mut ChaCha8Rng, count: usize, side: usize) -> DetectionSet {
    let coords = distinct_points(rng, count, side);
    DetectionSet::from_unsorted(
        coords
            .into_iter()
            .map(|coord| Detection {
                coord,
                score: rng.random_range(1..=10) as f32 / 10.0,
            })
            .collect(),
    )
}

/// FROC by definition: every distinct score as a threshold, brute-force
/// matching at each. Returns `(threshold, fp_avg, sensitivity)` triples with
/// a leading `+∞` point.
pub fn reference_froc(cases: &[(DetectionSet, DotSet)], radius: f64) -> Vec<(f64, f64, f64)> {
    let mut scores: Vec<f64> = cases
        .iter()
        .flat_map(|(d, _)| d.iter().map(|x| x.score as f64))
        .collect();
    scores.sort_by(|a, b| b.total_cmp(a));
    scores.dedup();
    let total: usize = cases.iter().map(|(_, a)| a.len()).sum();
    let mut out = vec![(f64::INFINITY, 0.0, 0.0)];
    for t in scores {
        let (mut tp, mut fp) = (0, 0);
        for (dets, annots) in cases {
            let kept: Vec<Coord> = dets
                .iter()
                .filter(|d| d.score as f64 >= t)
                .map(|d| d.coord)
                .collect();
            let (hits, _) = brute_force_matching(&kept, annots.coords(), radius);
            tp += hits;
            fp += kept.len() - hits;
        }
        out.push((t, fp as f64 / cases.len() as f64, tp as f64 / total as f64));
    }
    out
}

/// Trapezoid area of sensitivity over `[0, limit]` in percent, carrying the
/// last sensitivity forward when the curve ends early.
pub fn reference_fauc(points: &[(f64, f64, f64)], limit: f64) -> f64 {
    let mut area = 0.0;
    for w in points.windows(2) {
        let ((_, x0, y0), (_, x1, y1)) = (w[0], w[1]);
        if x0 >= limit {
            break;
        }
        if x1 <= limit {
            area += (x1 - x0) * (y0 + y1) / 2.0;
        } else {
            let y = y0 + (y1 - y0) * (limit - x0) / (x1 - x0);
            area += (limit - x0) * (y0 + y) / 2.0;
        }
    }
    let (_, x_last, y_last) = *points.last().unwrap();
    if x_last < limit {
        area += (limit - x_last) * y_last;
    }
    area / limit * 100.0
}

use serde::Serialize;

use super::assignment::min_cost_assignment;
use crate::detection::DetectionSet;
use crate::grid::{Coord, DotSet};

/// Hit radius in voxels: the largest lesion diameter of interest.
pub const DEFAULT_HIT_RADIUS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    /// Index into the detection list.
    pub detection: usize,
    /// Index into the annotation list.
    pub annotation: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub pairs: Vec<MatchedPair>,
}

/// One-to-one matching of detections to annotations.
///
/// Pairs farther apart than `radius` get a cost that exceeds any possible sum
/// of in-radius distances, so the optimal assignment first maximises the
/// number of hits and then minimises their total distance. Assigned pairs
/// beyond `radius` are discarded afterwards.
pub fn match_points(dets: &[Coord], annots: &[Coord], radius: f64) -> MatchResult {
    let (n, m) = (dets.len(), annots.len());
    let prohibitive = radius * (n + m) as f64 + 1.0;
    let cost: Vec<Vec<f64>> = dets
        .iter()
        .map(|d| {
            annots
                .iter()
                .map(|a| {
                    let dist = d.distance(a);
                    if dist <= radius {
                        dist
                    } else {
                        prohibitive
                    }
                })
                .collect()
        })
        .collect();
    let mut pairs: Vec<MatchedPair> = min_cost_assignment(&cost)
        .into_iter()
        .enumerate()
        .filter_map(|(i, j)| {
            let j = j?;
            let distance = dets[i].distance(&annots[j]);
            (distance <= radius).then_some(MatchedPair {
                detection: i,
                annotation: j,
                distance,
            })
        })
        .collect();
    pairs.sort_by_key(|p| p.detection);
    let tp = pairs.len();
    MatchResult {
        true_positives: tp,
        false_positives: n - tp,
        false_negatives: m - tp,
        pairs,
    }
}

pub fn match_detections(dets: &DetectionSet, annots: &DotSet, radius: f64) -> MatchResult {
    match_points(&dets.coords(), annots.coords(), radius)
}

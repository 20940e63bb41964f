//! Published defaults for the three distance kinds.

use crate::distance::DistanceKind;

/// Decay exponent used for the target map of each kind.
pub fn decay(kind: DistanceKind) -> f64 {
    match kind {
        DistanceKind::Geodesic => 5.0,
        DistanceKind::Intensity => 6.0,
        DistanceKind::Euclidean => 9.0,
    }
}

/// Detection threshold chosen on validation data for each kind.
pub fn threshold(kind: DistanceKind) -> f64 {
    match kind {
        DistanceKind::Geodesic => 0.525,
        DistanceKind::Intensity => 0.500,
        DistanceKind::Euclidean => 0.495,
    }
}

/// Mean sensitivity of a rater re-annotating the same scans.
pub const INTRA_RATER_SENSITIVITY: f64 = 0.5566;

/// Mean false positives per image of the same rater.
pub const INTRA_RATER_FP_AVG: f64 = 4.43;

/// Maximum distance a dot may be shifted during annotation cleanup.
pub const SHIFT_RADIUS: f64 = 3.0;

//! Intensity-aware distance transforms from dot annotations, the target maps
//! built from them, and an evaluation stack for point detections.
//!
//! The usual flow is
//! [`distance_transform`](distance::distance_transform) →
//! [`normalize_map`](normalize::normalize_map) → (a regressor, or
//! [`simulate_prediction`](synthetic::simulate_prediction)) →
//! [`local_maxima`](detection::local_maxima) → [`froc`](eval::froc).
//! [`pipeline::run_pipeline`] chains all of it on synthetic data.

pub mod detection;
pub mod distance;
pub mod eval;
pub mod grid;
pub mod io;
pub mod normalize;
pub mod pipeline;
pub mod presets;
pub mod shift;
pub mod synthetic;

pub use detection::{local_maxima, threshold_detections, Detection, DetectionSet};
pub use distance::{
    dijkstra_oracle, distance_transform, DistanceKind, DistanceMap, TransformOptions,
};
pub use eval::{bootstrap_fauc, froc, match_detections, FrocCurve, ImageCase};
pub use grid::{Coord, DotSet, VoxelGrid};
pub use normalize::{normalize_map, TargetMap};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grids-and-files.md")]
    mod grids_and_files {}
    #[doc = include_str!("../../../book/src/distance-maps.md")]
    mod distance_maps {}
    #[doc = include_str!("../../../book/src/target-maps.md")]
    mod target_maps {}
    #[doc = include_str!("../../../book/src/detection.md")]
    mod detection {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/synthetic-benchmark.md")]
    mod synthetic_benchmark {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

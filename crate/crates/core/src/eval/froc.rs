use serde::{Deserialize, Serialize};

use super::matching::match_points;
use super::{EvalError, ImageCase};
use crate::detection::threshold_detections;

/// Default false-positive cap for the partial FROC area.
pub const DEFAULT_FP_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensitivityMode {
    /// Total hits over total annotations, across all images.
    #[default]
    Pooled,
    /// Mean of per-image sensitivities; images without annotations are skipped.
    PerImage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrocPoint {
    pub threshold: f64,
    pub fp_avg: f64,
    pub sensitivity: f64,
}

/// Sensitivity against mean false positives per image, one point per
/// distinct candidate score plus a leading `+∞` point at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrocCurve {
    pub points: Vec<FrocPoint>,
    pub fp_limit: f64,
    /// Partial area up to `fp_limit`, as a percentage of `fp_limit × 1`.
    pub fauc: f64,
    /// True when the curve stopped short of `fp_limit` and its last
    /// sensitivity was carried forward.
    pub extended: bool,
}

/// Trapezoidal area under `(fp_avg, sensitivity)` clipped to `[0, fp_limit]`,
/// in percent. Returns the area and whether the tail was extended.
pub fn partial_area(points: &[FrocPoint], fp_limit: f64) -> (f64, bool) {
    let mut area = 0.0;
    let Some(first) = points.first() else {
        return (0.0, true);
    };
    let (mut x0, mut y0) = (first.fp_avg, first.sensitivity);
    for p in &points[1..] {
        let (x1, y1) = (p.fp_avg, p.sensitivity);
        if x1 >= fp_limit {
            if x1 > x0 {
                let y_lim = y0 + (y1 - y0) * (fp_limit - x0) / (x1 - x0);
                area += (fp_limit - x0) * (y0 + y_lim) / 2.0;
            }
            return (area / fp_limit * 100.0, false);
        }
        area += (x1 - x0) * (y0 + y1) / 2.0;
        x0 = x1;
        y0 = y1;
    }
    area += (fp_limit - x0) * y0;
    (area / fp_limit * 100.0, true)
}

/// Per-image TP/FP increments at each distinct score, precomputed once so
/// that curves over arbitrary image multisets are a linear sweep.
#[derive(Debug, Clone)]
pub struct FrocTable {
    events: Vec<Event>,
    annotations: Vec<usize>,
    /// Distinct positive annotation counts, ascending.
    counts: Vec<usize>,
    /// Index into `counts` per image, `None` for images without annotations.
    slot: Vec<Option<usize>>,
    mode: SensitivityMode,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    score: f32,
    image: usize,
    d_tp: i64,
    d_fp: i64,
}

impl FrocTable {
    pub fn new(cases: &[ImageCase], radius: f64, mode: SensitivityMode) -> Self {
        let mut events = Vec::new();
        for (image, case) in cases.iter().enumerate() {
            let dets = case.candidates.as_slice();
            let annots = case.annotations.coords();
            let (mut tp, mut fp) = (0i64, 0i64);
            let mut k = 0;
            while k < dets.len() {
                let score = dets[k].score;
                while k < dets.len() && dets[k].score == score {
                    k += 1;
                }
                let coords: Vec<_> = dets[..k].iter().map(|d| d.coord).collect();
                let m = match_points(&coords, annots, radius);
                let (ntp, nfp) = (m.true_positives as i64, m.false_positives as i64);
                events.push(Event {
                    score,
                    image,
                    d_tp: ntp - tp,
                    d_fp: nfp - fp,
                });
                tp = ntp;
                fp = nfp;
            }
        }
        events.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.image.cmp(&b.image)));
        let annotations: Vec<usize> = cases.iter().map(|c| c.annotations.len()).collect();
        let mut counts: Vec<usize> = annotations.iter().copied().filter(|&a| a > 0).collect();
        counts.sort_unstable();
        counts.dedup();
        let slot = annotations
            .iter()
            .map(|a| counts.binary_search(a).ok())
            .collect();
        FrocTable {
            events,
            annotations,
            counts,
            slot,
            mode,
        }
    }

    pub fn images(&self) -> usize {
        self.annotations.len()
    }

    pub fn total_annotations(&self) -> usize {
        self.annotations.iter().sum()
    }

    /// The curve over a multiset of images, `weights[i]` copies of image `i`.
    /// A multiset without annotations yields sensitivity 0 throughout.
    pub fn curve(&self, weights: &[u32], fp_limit: f64) -> FrocCurve {
        debug_assert_eq!(weights.len(), self.annotations.len());
        let n_images: u64 = weights.iter().map(|&w| w as u64).sum();
        let total_annots: u64 = weights
            .iter()
            .zip(&self.annotations)
            .map(|(&w, &a)| w as u64 * a as u64)
            .sum();
        let annotated_images: u64 = weights
            .iter()
            .zip(&self.annotations)
            .filter(|(_, &a)| a > 0)
            .map(|(&w, _)| w as u64)
            .sum();

        let (mut tp, mut fp) = (0i64, 0i64);
        // Per-image mode sums hits grouped by annotation count, so that the
        // floating-point sum does not depend on image order.
        let mut hits_by_count = vec![0i64; self.counts.len()];
        let sensitivity = |tp: i64, hits_by_count: &[i64]| match self.mode {
            SensitivityMode::Pooled if total_annots > 0 => tp as f64 / total_annots as f64,
            SensitivityMode::PerImage if annotated_images > 0 => {
                let frac_sum: f64 = hits_by_count
                    .iter()
                    .zip(&self.counts)
                    .map(|(&h, &n)| h as f64 / n as f64)
                    .sum();
                frac_sum / annotated_images as f64
            }
            _ => 0.0,
        };
        let fp_avg = |fp: i64| {
            if n_images == 0 {
                0.0
            } else {
                fp as f64 / n_images as f64
            }
        };

        let mut points = vec![FrocPoint {
            threshold: f64::INFINITY,
            fp_avg: 0.0,
            sensitivity: 0.0,
        }];
        let mut i = 0;
        while i < self.events.len() {
            let score = self.events[i].score;
            let mut touched = false;
            while i < self.events.len() && self.events[i].score == score {
                let e = self.events[i];
                let w = weights[e.image] as i64;
                if w > 0 {
                    touched = true;
                    tp += w * e.d_tp;
                    fp += w * e.d_fp;
                    if let Some(k) = self.slot[e.image] {
                        hits_by_count[k] += w * e.d_tp;
                    }
                }
                i += 1;
            }
            if touched {
                points.push(FrocPoint {
                    threshold: score as f64,
                    fp_avg: fp_avg(fp),
                    sensitivity: sensitivity(tp, &hits_by_count),
                });
            }
        }
        let (fauc, extended) = partial_area(&points, fp_limit);
        FrocCurve {
            points,
            fp_limit,
            fauc,
            extended,
        }
    }
}

pub(super) fn check_params(radius: f64, fp_limit: f64) -> Result<(), EvalError> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(EvalError::BadRadius(radius));
    }
    if !(fp_limit.is_finite() && fp_limit > 0.0) {
        return Err(EvalError::BadFpLimit(fp_limit));
    }
    Ok(())
}

/// FROC curve over all images, each contributing its full candidate list.
pub fn froc(
    cases: &[ImageCase],
    radius: f64,
    fp_limit: f64,
    mode: SensitivityMode,
) -> Result<FrocCurve, EvalError> {
    check_params(radius, fp_limit)?;
    if cases.iter().all(|c| c.annotations.is_empty()) {
        return Err(EvalError::NoAnnotations);
    }
    let table = FrocTable::new(cases, radius, mode);
    Ok(table.curve(&vec![1; cases.len()], fp_limit))
}

/// The threshold whose sensitivity is closest to `target`; ties go to the
/// point with fewer false positives, then to the higher threshold.
pub fn operating_point(curve: &FrocCurve, target: f64) -> Result<FrocPoint, EvalError> {
    curve
        .points
        .iter()
        .copied()
        .min_by(|a, b| {
            let (da, db) = (
                (a.sensitivity - target).abs(),
                (b.sensitivity - target).abs(),
            );
            da.total_cmp(&db)
                .then(a.fp_avg.total_cmp(&b.fp_avg))
                .then(b.threshold.total_cmp(&a.threshold))
        })
        .ok_or(EvalError::EmptyCurve)
}

/// Detection metrics of every image thresholded at `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatingMetrics {
    pub threshold: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub sensitivity: f64,
    pub sensitivity_per_image: f64,
    pub fp_avg: f64,
}

pub fn evaluate_at(
    cases: &[ImageCase],
    radius: f64,
    t: f64,
) -> Result<OperatingMetrics, EvalError> {
    if cases.is_empty() {
        return Err(EvalError::NoImages);
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let (mut frac, mut annotated) = (0.0, 0usize);
    for case in cases {
        let kept = threshold_detections(&case.candidates, t);
        let m = match_points(&kept.coords(), case.annotations.coords(), radius);
        tp += m.true_positives;
        fp += m.false_positives;
        fn_ += m.false_negatives;
        if !case.annotations.is_empty() {
            frac += m.true_positives as f64 / case.annotations.len() as f64;
            annotated += 1;
        }
    }
    let total = tp + fn_;
    Ok(OperatingMetrics {
        threshold: t,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        sensitivity: if total > 0 {
            tp as f64 / total as f64
        } else {
            0.0
        },
        sensitivity_per_image: if annotated > 0 {
            frac / annotated as f64
        } else {
            0.0
        },
        fp_avg: fp as f64 / cases.len() as f64,
    })
}

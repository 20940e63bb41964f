use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::froc::{check_params, FrocTable, SensitivityMode};
use super::{EvalError, ImageCase};

pub const DEFAULT_BOOTSTRAP_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSummary {
    pub mean: f64,
    /// Population standard deviation of the resampled FAUCs.
    pub std: f64,
    pub lower: f64,
    pub upper: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Linear-interpolated percentile of sorted data, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Image indices for resample `index`. Each resample draws from its own
/// ChaCha stream keyed by `(seed, index)`, so the result does not depend on
/// how resamples are scheduled across threads.
pub fn resample_indices(n: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// FAUC under resampling of images with replacement.
///
/// Runs on the current rayon pool. Resamples that happen to contain no
/// annotations score 0.
pub fn bootstrap_fauc(
    cases: &[ImageCase],
    radius: f64,
    fp_limit: f64,
    mode: SensitivityMode,
    samples: usize,
    seed: u64,
) -> Result<BootstrapSummary, EvalError> {
    check_params(radius, fp_limit)?;
    if cases.is_empty() {
        return Err(EvalError::NoImages);
    }
    if samples == 0 {
        return Err(EvalError::ZeroSamples);
    }
    if cases.iter().all(|c| c.annotations.is_empty()) {
        return Err(EvalError::NoAnnotations);
    }
    let table = FrocTable::new(cases, radius, mode);
    let n = cases.len();
    let faucs: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut weights = vec![0u32; n];
            for i in resample_indices(n, seed, k) {
                weights[i] += 1;
            }
            table.curve(&weights, fp_limit).fauc
        })
        .collect();
    Ok(summarize(&faucs, seed))
}

fn summarize(values: &[f64], seed: u64) -> BootstrapSummary {
    let n = values.len() as f64;
    // shifted by the first value so that a constant sequence is exact
    let first = values[0];
    let mean = first + values.iter().map(|v| v - first).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    BootstrapSummary {
        mean,
        std: var.sqrt(),
        lower: percentile(&sorted, 0.025),
        upper: percentile(&sorted, 0.975),
        samples: values.len(),
        seed,
    }
}

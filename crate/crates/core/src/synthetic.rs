//! Seeded synthetic lesion images and a simulated regressor.
//!
//! Lesions are elongated anisotropic Gaussian ridges centred on integer
//! voxels, so each ridge peaks exactly at its dot. The predictor simulator
//! perturbs a ground-truth target map with lesion dropout, spurious bumps and
//! voxelwise noise, standing in for a trained network's output.
//!
//! Every random draw comes from a ChaCha stream derived from the master seed:
//! lesion `k` always uses stream `k + 1`, so adding lesions never changes the
//! placement or shape of earlier ones.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Coord, DotSet, GridError, VoxelGrid};
use crate::normalize::TargetMap;

const STREAM_COUNT: u64 = 0;
const STREAM_NOISE: u64 = 1 << 40;
const PLACEMENT_TRIES: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("could not place lesion {lesion} with spacing {spacing} after {tries} tries")]
    PlacementFailure {
        lesion: usize,
        spacing: f64,
        tries: usize,
    },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A child seed for item `index` of a seeded collection.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    rng_for(master, index).next_u64()
}

fn check_range(name: &str, r: [f64; 2], min: f64) -> Result<(), SynthError> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] >= min && r[0] <= r[1]) {
        return Err(SynthError::InvalidConfig(format!(
            "{name} range {r:?} must be finite, ordered and >= {min}"
        )));
    }
    Ok(())
}

fn draw(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    /// `[height, width]`.
    pub dims: [usize; 2],
    /// Inclusive range of lesions per image.
    pub lesions: [usize; 2],
    /// Ridge length in voxels (four along-axis standard deviations).
    pub length: [f64; 2],
    /// Across-axis standard deviation in voxels.
    pub width: [f64; 2],
    pub amplitude: [f64; 2],
    /// Constant intensity added under the ridges.
    pub background: f64,
    /// Standard deviation of additive Gaussian noise.
    pub noise: f64,
    /// Minimum Euclidean distance between lesion centres.
    pub min_spacing: f64,
    /// Lesion centres stay at least this far from the border.
    pub margin: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            dims: [64, 64],
            lesions: [3, 6],
            length: [3.0, 15.0],
            width: [0.5, 1.5],
            amplitude: [0.5, 1.0],
            background: 0.1,
            noise: 0.02,
            min_spacing: 14.0,
            margin: 3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.dims.contains(&0) {
            return bad(format!("dims {:?} must be positive", self.dims));
        }
        if self.lesions[0] > self.lesions[1] {
            return bad(format!("lesion range {:?} is empty", self.lesions));
        }
        if self.dims.iter().any(|&d| d <= 2 * self.margin) {
            return bad(format!(
                "margin {} leaves no room in {:?}",
                self.margin, self.dims
            ));
        }
        check_range("length", self.length, 0.0)?;
        check_range("width", self.width, 0.0)?;
        check_range("amplitude", self.amplitude, 0.0)?;
        if self.length[0] <= 0.0 || self.width[0] <= 0.0 || self.amplitude[0] <= 0.0 {
            return bad("length, width and amplitude must be positive".into());
        }
        if !(0.0..1.0).contains(&self.background) {
            return bad(format!("background {} must lie in [0, 1)", self.background));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return bad(format!("noise {} must be >= 0", self.noise));
        }
        if !(self.min_spacing.is_finite() && self.min_spacing >= 0.0) {
            return bad(format!("min_spacing {} must be >= 0", self.min_spacing));
        }
        Ok(())
    }

    /// The same config with the seed replaced by the `index`-th child seed.
    pub fn for_case(&self, index: u64) -> SynthConfig {
        SynthConfig {
            seed: derive_seed(self.seed, index),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ridge {
    pub center: Coord,
    pub angle: f64,
    pub length: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Ridge {
    pub fn value(&self, y: f64, x: f64) -> f64 {
        let (dy, dx) = (y - self.center.y as f64, x - self.center.x as f64);
        let (s, c) = self.angle.sin_cos();
        let along = dx * c + dy * s;
        let across = -dx * s + dy * c;
        let sl = self.length / 4.0;
        self.amplitude
            * (-(along * along) / (2.0 * sl * sl)
                - (across * across) / (2.0 * self.width * self.width))
                .exp()
    }
}

/// Draws the lesion layout without rendering it.
pub fn draw_ridges(cfg: &SynthConfig) -> Result<Vec<Ridge>, SynthError> {
    cfg.validate()?;
    let mut count_rng = rng_for(cfg.seed, STREAM_COUNT);
    let count = count_rng.random_range(cfg.lesions[0]..=cfg.lesions[1]);
    let [h, w] = cfg.dims;
    let mut ridges: Vec<Ridge> = Vec::with_capacity(count);
    for k in 0..count {
        let mut rng = rng_for(cfg.seed, k as u64 + 1);
        let angle = rng.random_range(0.0..std::f64::consts::PI);
        let length = draw(&mut rng, cfg.length);
        let width = draw(&mut rng, cfg.width);
        let amplitude = draw(&mut rng, cfg.amplitude);
        let mut placed = None;
        for _ in 0..PLACEMENT_TRIES {
            let c = Coord::yx(
                rng.random_range(cfg.margin..h - cfg.margin),
                rng.random_range(cfg.margin..w - cfg.margin),
            );
            if ridges
                .iter()
                .all(|r| r.center.distance(&c) >= cfg.min_spacing)
            {
                placed = Some(c);
                break;
            }
        }
        let center = placed.ok_or(SynthError::PlacementFailure {
            lesion: k,
            spacing: cfg.min_spacing,
            tries: PLACEMENT_TRIES,
        })?;
        ridges.push(Ridge {
            center,
            angle,
            length,
            width,
            amplitude,
        });
    }
    Ok(ridges)
}

/// A synthetic image in `[0, 1]` and one dot per ridge at its peak.
pub fn generate_case(cfg: &SynthConfig) -> Result<(VoxelGrid, DotSet), SynthError> {
    let ridges = draw_ridges(cfg)?;
    let [h, w] = cfg.dims;
    let mut sum = vec![0.0f64; h * w];
    for r in &ridges {
        for y in 0..h {
            for x in 0..w {
                sum[y * w + x] += r.value(y as f64, x as f64);
            }
        }
    }
    let peak = sum.iter().copied().fold(0.0f64, f64::max);
    let scale = if peak > 0.0 {
        (1.0 - cfg.background) / peak
    } else {
        0.0
    };
    let mut noise_rng = rng_for(cfg.seed, STREAM_NOISE);
    let normal =
        Normal::new(0.0, cfg.noise).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let data = sum
        .iter()
        .map(|&s| {
            let n = if cfg.noise > 0.0 {
                normal.sample(&mut noise_rng)
            } else {
                0.0
            };
            (cfg.background + s * scale + n).clamp(0.0, 1.0) as f32
        })
        .collect();
    let image = VoxelGrid::new(&[h, w], data)?;
    let dots = DotSet::new(2, ridges.iter().map(|r| r.center).collect())?;
    Ok((image, dots))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulatorConfig {
    /// Standard deviation of voxelwise Gaussian noise.
    pub noise: f64,
    /// Spurious bumps added per image.
    pub spurious: usize,
    pub bump_amplitude: [f64; 2],
    pub bump_width: f64,
    /// Probability that a lesion is erased from the prediction.
    pub dropout: f64,
    /// Radius of the disc zeroed around a dropped lesion.
    pub dropout_radius: f64,
    pub seed: u64,
}

impl Default for SimulatorConfig {
    fn default() -> Self {
        SimulatorConfig {
            noise: 0.0,
            spurious: 0,
            bump_amplitude: [0.6, 1.0],
            bump_width: 1.5,
            dropout: 0.0,
            dropout_radius: 8.0,
            seed: 0,
        }
    }
}

impl SimulatorConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return bad(format!("noise {} must be >= 0", self.noise));
        }
        if !(0.0..=1.0).contains(&self.dropout) {
            return bad(format!("dropout {} must lie in [0, 1]", self.dropout));
        }
        check_range("bump_amplitude", self.bump_amplitude, 0.0)?;
        if !(self.bump_width.is_finite() && self.bump_width > 0.0) {
            return bad(format!("bump_width {} must be positive", self.bump_width));
        }
        if !(self.dropout_radius.is_finite() && self.dropout_radius >= 0.0) {
            return bad(format!(
                "dropout_radius {} must be >= 0",
                self.dropout_radius
            ));
        }
        Ok(())
    }

    pub fn for_case(&self, index: u64) -> SimulatorConfig {
        SimulatorConfig {
            seed: derive_seed(self.seed, index),
            ..self.clone()
        }
    }
}

/// Perturbs a ground-truth target map into a simulated prediction.
///
/// Lesions are the voxels where the target equals exactly 1. The output is not
/// clamped, matching a regressor whose outputs can leave `[0, 1]`.
pub fn simulate_prediction(
    truth: &TargetMap,
    cfg: &SimulatorConfig,
) -> Result<VoxelGrid, SynthError> {
    cfg.validate()?;
    let grid = &truth.grid;
    let [_, h, w] = grid.shape();
    let mut out: Vec<f64> = grid.data().iter().map(|&v| v as f64).collect();

    let lesions: Vec<Coord> = if truth.degenerate {
        Vec::new()
    } else {
        (0..grid.len())
            .filter(|&i| grid.data()[i] == 1.0)
            .map(|i| grid.coord(i))
            .collect()
    };
    let mut drop_rng = rng_for(cfg.seed, 1);
    let r2 = cfg.dropout_radius * cfg.dropout_radius;
    for c in &lesions {
        if drop_rng.random::<f64>() >= cfg.dropout {
            continue;
        }
        for y in 0..h {
            for x in 0..w {
                let (dy, dx) = (y as f64 - c.y as f64, x as f64 - c.x as f64);
                if dy * dy + dx * dx <= r2 {
                    out[y * w + x] = 0.0;
                }
            }
        }
    }

    let mut bump_rng = rng_for(cfg.seed, 2);
    let two_s2 = 2.0 * cfg.bump_width * cfg.bump_width;
    for _ in 0..cfg.spurious {
        let cy = bump_rng.random_range(0..h) as f64;
        let cx = bump_rng.random_range(0..w) as f64;
        let amp = draw(&mut bump_rng, cfg.bump_amplitude);
        for y in 0..h {
            for x in 0..w {
                let (dy, dx) = (y as f64 - cy, x as f64 - cx);
                out[y * w + x] += amp * (-(dy * dy + dx * dx) / two_s2).exp();
            }
        }
    }

    if cfg.noise > 0.0 {
        let mut noise_rng = rng_for(cfg.seed, 3);
        let normal =
            Normal::new(0.0, cfg.noise).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
        for v in out.iter_mut() {
            *v += normal.sample(&mut noise_rng);
        }
    }
    Ok(VoxelGrid::new(
        grid.dims(),
        out.into_iter().map(|v| v as f32).collect(),
    )?)
}

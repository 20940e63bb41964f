//! End-to-end synthetic benchmark: synthesise cases, build target maps per
//! distance kind, simulate predictions, detect, and evaluate.
//!
//! Work within a stage runs on the current rayon pool; results are collected
//! in case order, so the report does not depend on the thread count.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{local_maxima, DetectionSet};
use crate::distance::{distance_transform, DistanceKind, TransformOptions};
use crate::eval::{
    bootstrap_fauc, evaluate_at, froc, operating_point, BootstrapSummary, FrocCurve, ImageCase,
    OperatingMetrics, SensitivityMode, DEFAULT_BOOTSTRAP_SAMPLES, DEFAULT_FP_LIMIT,
    DEFAULT_HIT_RADIUS,
};
use crate::grid::{DotSet, VoxelGrid};
use crate::io;
use crate::normalize::{normalize_map, TargetMap};
use crate::presets;
use crate::shift::{shift_dots, ShiftConfig};
use crate::synthetic::{generate_case, simulate_prediction, SimulatorConfig, SynthConfig};

pub const TOOL_NAME: &str = "lesiondist";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One number per distance kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerKind {
    pub geodesic: f64,
    pub intensity: f64,
    pub euclidean: f64,
}

impl PerKind {
    pub fn from_fn(f: impl Fn(DistanceKind) -> f64) -> Self {
        PerKind {
            geodesic: f(DistanceKind::Geodesic),
            intensity: f(DistanceKind::Intensity),
            euclidean: f(DistanceKind::Euclidean),
        }
    }

    pub fn get(&self, kind: DistanceKind) -> f64 {
        match kind {
            DistanceKind::Geodesic => self.geodesic,
            DistanceKind::Intensity => self.intensity,
            DistanceKind::Euclidean => self.euclidean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub cases: usize,
    pub synth: SynthConfig,
    pub simulator: SimulatorConfig,
    pub kinds: Vec<DistanceKind>,
    pub decay: PerKind,
    pub threshold: PerKind,
    /// Shift dots before building target maps. Evaluation always uses the
    /// original dots.
    pub shift_dots: bool,
    pub shift: ShiftConfig,
    pub radius: f64,
    pub fp_limit: f64,
    pub sensitivity: SensitivityMode,
    /// Sensitivity the operating point is chosen to match.
    pub target_sensitivity: f64,
    /// Zero skips the bootstrap.
    pub bootstrap_samples: usize,
    pub bootstrap_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            cases: 200,
            synth: SynthConfig::default(),
            simulator: SimulatorConfig::default(),
            kinds: DistanceKind::ALL.to_vec(),
            decay: PerKind::from_fn(presets::decay),
            threshold: PerKind::from_fn(presets::threshold),
            shift_dots: false,
            shift: ShiftConfig::default(),
            radius: DEFAULT_HIT_RADIUS,
            fp_limit: DEFAULT_FP_LIMIT,
            sensitivity: SensitivityMode::Pooled,
            target_sensitivity: presets::INTRA_RATER_SENSITIVITY,
            bootstrap_samples: DEFAULT_BOOTSTRAP_SAMPLES,
            bootstrap_seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::new(Stage::Config, m));
        if self.cases == 0 {
            return bad("cases must be at least 1".into());
        }
        if self.kinds.is_empty() {
            return bad("kinds must not be empty".into());
        }
        for (i, k) in self.kinds.iter().enumerate() {
            if self.kinds[..i].contains(k) {
                return bad(format!("kind {k} listed twice"));
            }
            let p = self.decay.get(*k);
            if !(p.is_finite() && p > 0.0) {
                return bad(format!("decay for {k} must be positive, got {p}"));
            }
            let t = self.threshold.get(*k);
            if !t.is_finite() {
                return bad(format!("threshold for {k} must be finite, got {t}"));
            }
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return bad(format!("radius must be >= 0, got {}", self.radius));
        }
        if !(self.fp_limit.is_finite() && self.fp_limit > 0.0) {
            return bad(format!("fp_limit must be positive, got {}", self.fp_limit));
        }
        if !(0.0..=1.0).contains(&self.target_sensitivity) {
            return bad(format!(
                "target_sensitivity must lie in [0, 1], got {}",
                self.target_sensitivity
            ));
        }
        self.synth
            .validate()
            .map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
        self.simulator
            .validate()
            .map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
        self.shift
            .validate()
            .map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Synth,
    Shift,
    Transform,
    Normalize,
    Simulate,
    Detect,
    Eval,
    Io,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        write!(f, "{}", s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("{stage} stage failed{}: {message}", .case.map(|c| format!(" on case {c}")).unwrap_or_default())]
pub struct PipelineError {
    pub stage: Stage,
    pub case: Option<usize>,
    pub kind: Option<DistanceKind>,
    pub message: String,
}

impl PipelineError {
    fn new(stage: Stage, message: String) -> Self {
        PipelineError {
            stage,
            case: None,
            kind: None,
            message,
        }
    }

    fn at(stage: Stage, case: usize, kind: Option<DistanceKind>, e: impl fmt::Display) -> Self {
        PipelineError {
            stage,
            case: Some(case),
            kind,
            message: e.to_string(),
        }
    }
}

/// Everything produced for one case and one kind.
#[derive(Debug, Clone, PartialEq)]
pub struct KindArtifacts {
    pub target: TargetMap,
    pub prediction: VoxelGrid,
    pub candidates: DetectionSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseArtifacts {
    pub index: usize,
    pub synth_seed: u64,
    pub simulator_seed: u64,
    pub image: VoxelGrid,
    pub dots: DotSet,
    /// Dots used for target construction; equal to `dots` unless shifting is on.
    pub map_dots: DotSet,
    /// One entry per configured kind, in config order.
    pub kinds: Vec<KindArtifacts>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChosenOperatingPoint {
    pub target_sensitivity: f64,
    pub threshold: f64,
    pub sensitivity: f64,
    pub fp_avg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindReport {
    pub kind: DistanceKind,
    pub decay: f64,
    pub fauc: f64,
    /// The curve stopped before `fp_limit` and was extended horizontally.
    pub fauc_extended: bool,
    pub curve_points: usize,
    /// Metrics at the configured threshold for this kind.
    pub at_threshold: OperatingMetrics,
    pub operating_point: ChosenOperatingPoint,
    pub bootstrap: Option<BootstrapSummary>,
    pub degenerate_targets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: TOOL_NAME,
            version: TOOL_VERSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub config: PipelineConfig,
    pub cases: usize,
    pub annotations: usize,
    pub kinds: Vec<KindReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub cases: Vec<CaseArtifacts>,
    pub curves: Vec<FrocCurve>,
    pub report: Report,
}

impl PipelineRun {
    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serialises");
        s.push('\n');
        s
    }
}

fn build_case(cfg: &PipelineConfig, index: usize) -> Result<CaseArtifacts, PipelineError> {
    let synth = cfg.synth.for_case(index as u64);
    let sim = cfg.simulator.for_case(index as u64);
    let (image, dots) =
        generate_case(&synth).map_err(|e| PipelineError::at(Stage::Synth, index, None, e))?;
    let map_dots = if cfg.shift_dots {
        shift_dots(&image, &dots, &cfg.shift)
            .map_err(|e| PipelineError::at(Stage::Shift, index, None, e))?
            .dots
    } else {
        dots.clone()
    };
    let mut kinds = Vec::with_capacity(cfg.kinds.len());
    for &kind in &cfg.kinds {
        let target = if map_dots.is_empty() {
            // nothing to detect: an all-zero target
            TargetMap {
                grid: VoxelGrid::filled(image.dims(), 0.0)
                    .map_err(|e| PipelineError::at(Stage::Normalize, index, Some(kind), e))?,
                decay: cfg.decay.get(kind),
                kind,
                degenerate: false,
            }
        } else {
            let dm = distance_transform(&image, &map_dots, kind, &TransformOptions::default())
                .map_err(|e| PipelineError::at(Stage::Transform, index, Some(kind), e))?;
            normalize_map(&dm, cfg.decay.get(kind))
                .map_err(|e| PipelineError::at(Stage::Normalize, index, Some(kind), e))?
        };
        let prediction = simulate_prediction(&target, &sim)
            .map_err(|e| PipelineError::at(Stage::Simulate, index, Some(kind), e))?;
        let candidates = local_maxima(&prediction)
            .map_err(|e| PipelineError::at(Stage::Detect, index, Some(kind), e))?;
        kinds.push(KindArtifacts {
            target,
            prediction,
            candidates,
        });
    }
    Ok(CaseArtifacts {
        index,
        synth_seed: synth.seed,
        simulator_seed: sim.seed,
        image,
        dots,
        map_dots,
        kinds,
    })
}

fn eval_err(kind: DistanceKind, e: impl fmt::Display) -> PipelineError {
    PipelineError {
        stage: Stage::Eval,
        case: None,
        kind: Some(kind),
        message: e.to_string(),
    }
}

/// Runs every stage in memory. Use [`write_run`] to persist the artifacts.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineRun, PipelineError> {
    cfg.validate()?;
    let cases: Vec<CaseArtifacts> = (0..cfg.cases)
        .into_par_iter()
        .map(|i| build_case(cfg, i))
        .collect::<Result<_, _>>()?;
    let annotations = cases.iter().map(|c| c.dots.len()).sum();

    let mut kinds = Vec::with_capacity(cfg.kinds.len());
    let mut curves = Vec::with_capacity(cfg.kinds.len());
    for (k, &kind) in cfg.kinds.iter().enumerate() {
        let images: Vec<ImageCase> = cases
            .iter()
            .map(|c| ImageCase {
                candidates: c.kinds[k].candidates.clone(),
                annotations: c.dots.clone(),
            })
            .collect();
        let curve = froc(&images, cfg.radius, cfg.fp_limit, cfg.sensitivity)
            .map_err(|e| eval_err(kind, e))?;
        let at_threshold = evaluate_at(&images, cfg.radius, cfg.threshold.get(kind))
            .map_err(|e| eval_err(kind, e))?;
        let op = operating_point(&curve, cfg.target_sensitivity).map_err(|e| eval_err(kind, e))?;
        let bootstrap = if cfg.bootstrap_samples > 0 {
            Some(
                bootstrap_fauc(
                    &images,
                    cfg.radius,
                    cfg.fp_limit,
                    cfg.sensitivity,
                    cfg.bootstrap_samples,
                    cfg.bootstrap_seed,
                )
                .map_err(|e| eval_err(kind, e))?,
            )
        } else {
            None
        };
        kinds.push(KindReport {
            kind,
            decay: cfg.decay.get(kind),
            fauc: curve.fauc,
            fauc_extended: curve.extended,
            curve_points: curve.points.len(),
            at_threshold,
            operating_point: ChosenOperatingPoint {
                target_sensitivity: cfg.target_sensitivity,
                threshold: op.threshold,
                sensitivity: op.sensitivity,
                fp_avg: op.fp_avg,
            },
            bootstrap,
            degenerate_targets: cases
                .iter()
                .filter(|c| c.kinds[k].target.degenerate)
                .count(),
        });
        curves.push(curve);
    }
    Ok(PipelineRun {
        report: Report {
            tool: ToolInfo::current(),
            config: cfg.clone(),
            cases: cases.len(),
            annotations,
            kinds,
        },
        cases,
        curves,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestCase {
    pub index: usize,
    pub synth_seed: u64,
    pub simulator_seed: u64,
    pub image: String,
    pub dots: String,
    pub lesions: usize,
}

/// Enough to reproduce a run: the config, the derived seeds, and the tool
/// version. Paths are relative to the run directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: ToolInfo,
    pub config: PipelineConfig,
    pub cases: Vec<ManifestCase>,
    pub report: String,
}

#[derive(Debug, Deserialize)]
struct ManifestConfigOnly {
    config: PipelineConfig,
}

/// Reads a pipeline config from either a bare config document or a run
/// manifest.
pub fn parse_config(text: &str) -> Result<PipelineConfig, PipelineError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
    let is_manifest = value.get("tool").is_some() && value.get("config").is_some();
    let cfg = if is_manifest {
        serde_json::from_value::<ManifestConfigOnly>(value).map(|m| m.config)
    } else {
        serde_json::from_value(value)
    };
    let cfg = cfg.map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn io_err(path: &Path, e: impl fmt::Display) -> PipelineError {
    PipelineError::new(Stage::Io, format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn mkdir(path: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

/// Writes a run directory:
///
/// ```text
/// manifest.json  report.json
/// cases/case_k.ldgr, cases/case_k.csv
/// <kind>/targets/case_k.ldgr + case_k.json
/// <kind>/pred/case_k.ldgr
/// <kind>/detections/case_k.csv
/// <kind>/froc.csv
/// ```
pub fn write_run(run: &PipelineRun, dir: &Path) -> Result<(), PipelineError> {
    let cases_dir = dir.join("cases");
    mkdir(&cases_dir)?;
    let cfg = &run.report.config;
    let kind_dirs: Vec<PathBuf> = cfg.kinds.iter().map(|k| dir.join(k.name())).collect();
    for d in &kind_dirs {
        for sub in ["targets", "pred", "detections"] {
            mkdir(&d.join(sub))?;
        }
    }

    run.cases
        .par_iter()
        .try_for_each(|c| -> Result<(), PipelineError> {
            let stem = format!("case_{}", c.index);
            let p = cases_dir.join(format!("{stem}.ldgr"));
            io::grid_write(&c.image, &p).map_err(|e| io_err(&p, e))?;
            let p = cases_dir.join(format!("{stem}.csv"));
            io::dots_write_csv(&c.dots, &p).map_err(|e| io_err(&p, e))?;
            for (k, art) in c.kinds.iter().enumerate() {
                let d = &kind_dirs[k];
                let p = d.join("targets").join(format!("{stem}.ldgr"));
                io::grid_write(&art.target.grid, &p).map_err(|e| io_err(&p, e))?;
                write_text(
                    &d.join("targets").join(format!("{stem}.json")),
                    &json(&art.target.info(cfg.shift_dots)),
                )?;
                let p = d.join("pred").join(format!("{stem}.ldgr"));
                io::grid_write(&art.prediction, &p).map_err(|e| io_err(&p, e))?;
                let p = d.join("detections").join(format!("{stem}.csv"));
                io::detections_write_csv(&art.candidates, &p).map_err(|e| io_err(&p, e))?;
            }
            Ok(())
        })?;
    for (k, curve) in run.curves.iter().enumerate() {
        write_text(&kind_dirs[k].join("froc.csv"), &io::format_froc(curve))?;
    }

    let manifest = Manifest {
        tool: ToolInfo::current(),
        config: cfg.clone(),
        cases: run
            .cases
            .iter()
            .map(|c| ManifestCase {
                index: c.index,
                synth_seed: c.synth_seed,
                simulator_seed: c.simulator_seed,
                image: format!("cases/case_{}.ldgr", c.index),
                dots: format!("cases/case_{}.csv", c.index),
                lesions: c.dots.len(),
            })
            .collect(),
        report: "report.json".into(),
    };
    write_text(&dir.join("manifest.json"), &json(&manifest))?;
    write_text(&dir.join("report.json"), &run.report_json())
}

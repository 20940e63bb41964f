use std::fs;
use std::path::{Path, PathBuf};

use lesiondist::detection::{local_maxima, threshold_detections, DetectionSet};
use lesiondist::distance::{distance_transform, DistanceKind, Spacing, TransformOptions};
use lesiondist::eval::{
    bootstrap_fauc, evaluate_at, froc, operating_point, BootstrapSummary, FrocPoint, ImageCase,
    OperatingMetrics, SensitivityMode,
};
use lesiondist::grid::VoxelGrid;
use lesiondist::io;
use lesiondist::normalize::normalize_map;
use lesiondist::pipeline::{self, ToolInfo};
use lesiondist::presets;
use lesiondist::shift::{shift_dots, ShiftConfig};
use lesiondist::synthetic::{generate_case, SynthConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::{DetectArgs, DtArgs, EvalArgs, MapsArgs, PipelineArgs, PlotArgs, SynthArgs};

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn options(spacing: Option<Vec<f64>>, max_passes: usize) -> Result<TransformOptions, CliError> {
    let spacing = match spacing {
        Some(v) => Spacing::new(&v)?,
        None => Spacing::unit(),
    };
    Ok(TransformOptions {
        spacing,
        max_passes,
    })
}

fn load_image_and_dots(
    image: &Path,
    dots: &Path,
) -> Result<(VoxelGrid, lesiondist::DotSet), CliError> {
    let image = io::grid_read(image)?;
    let dots = io::dots_read_csv(dots, image.ndim())?;
    Ok((image, dots))
}

pub fn dt(a: DtArgs) -> Result<(), CliError> {
    let (image, dots) = load_image_and_dots(&a.image, &a.dots)?;
    let dm = distance_transform(&image, &dots, a.kind, &options(a.spacing, a.max_passes)?)?;
    io::grid_write(&dm.grid, &a.out)?;
    println!(
        "{}",
        serde_json::json!({ "kind": a.kind, "passes": dm.passes, "max": dm.grid.max() })
    );
    Ok(())
}

pub fn maps(a: MapsArgs) -> Result<(), CliError> {
    let (image, mut dots) = load_image_and_dots(&a.image, &a.dots)?;
    if a.shift_dots {
        let cfg = ShiftConfig {
            radius: a.shift_radius,
            threshold: a.shift_threshold,
            ..ShiftConfig::default()
        };
        dots = shift_dots(&image, &dots, &cfg)?.dots;
    }
    let p = a.decay.unwrap_or_else(|| presets::decay(a.kind));
    let dm = distance_transform(
        &image,
        &dots,
        a.kind,
        &options(a.spacing, lesiondist::distance::DEFAULT_MAX_PASSES)?,
    )?;
    let target = normalize_map(&dm, p)?;
    io::grid_write(&target.grid, &a.out)?;
    let info = target.info(a.shift_dots);
    write(&a.out.with_extension("json"), &json(&info))?;
    println!("{}", serde_json::to_string(&info).expect("serialisable"));
    Ok(())
}

pub fn detect(a: DetectArgs) -> Result<(), CliError> {
    let map = io::grid_read(&a.map)?;
    let mut dets = local_maxima(&map)?;
    if let Some(t) = a.threshold {
        if !t.is_finite() {
            return Err(CliError::config(format!(
                "threshold must be finite, got {t}"
            )));
        }
        dets = threshold_detections(&dets, t);
    }
    io::detections_write_csv(&dets, &a.out)?;
    println!("{}", serde_json::json!({ "detections": dets.len() }));
    Ok(())
}

// case_2 sorts before case_10
fn natural_key(stem: &str) -> (String, u64, String) {
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (head, tail) = stem.split_at(stem.len() - digits);
    (
        head.to_string(),
        tail.parse().unwrap_or(0),
        stem.to_string(),
    )
}

fn stems_with_extension(dir: &Path, ext: &str) -> Result<Vec<String>, CliError> {
    let entries =
        fs::read_dir(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    let mut stems = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?
            .path();
        if path.extension().is_some_and(|x| x == ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort_by_cached_key(|s| natural_key(s));
    Ok(stems)
}

fn load_prediction(pred_dir: &Path, stem: &str) -> Result<DetectionSet, CliError> {
    let map = pred_dir.join(format!("{stem}.ldgr"));
    if map.exists() {
        return Ok(local_maxima(&io::grid_read(&map)?)?);
    }
    let csv = pred_dir.join(format!("{stem}.csv"));
    if csv.exists() {
        return Ok(io::detections_read_csv(&csv)?);
    }
    Err(CliError::data(format!(
        "no prediction for {stem}: expected {} or {}",
        map.display(),
        csv.display()
    )))
}

#[derive(Serialize)]
struct EvalConfigEcho {
    pred_dir: PathBuf,
    annot_dir: PathBuf,
    radius: f64,
    fp_limit: f64,
    bootstrap: usize,
    seed: u64,
    threshold: Option<f64>,
    target_sensitivity: f64,
    sensitivity: SensitivityMode,
}

#[derive(Serialize)]
struct OperatingPointEcho {
    target_sensitivity: f64,
    #[serde(flatten)]
    point: FrocPoint,
}

#[derive(Serialize)]
struct EvalReport {
    tool: ToolInfo,
    config: EvalConfigEcho,
    images: Vec<String>,
    annotations: usize,
    fauc: f64,
    fauc_extended: bool,
    curve_points: usize,
    operating_point: OperatingPointEcho,
    at_operating_point: OperatingMetrics,
    at_threshold: Option<OperatingMetrics>,
    bootstrap: Option<BootstrapSummary>,
}

pub fn eval(a: EvalArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.target_sensitivity) {
        return Err(CliError::config(format!(
            "target sensitivity must lie in [0, 1], got {}",
            a.target_sensitivity
        )));
    }
    let stems = stems_with_extension(&a.annot_dir, "csv")?;
    if stems.is_empty() {
        return Err(CliError::data(format!(
            "no annotation CSVs in {}",
            a.annot_dir.display()
        )));
    }
    let cases: Vec<ImageCase> = stems
        .par_iter()
        .map(|stem| {
            Ok(ImageCase {
                annotations: io::dots_read_csv(a.annot_dir.join(format!("{stem}.csv")), 2)?,
                candidates: load_prediction(&a.pred_dir, stem)?,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let mode = if a.per_image {
        SensitivityMode::PerImage
    } else {
        SensitivityMode::Pooled
    };
    let curve = froc(&cases, a.radius, a.fp_limit, mode)?;
    let op = operating_point(&curve, a.target_sensitivity)?;
    let at_operating_point = evaluate_at(&cases, a.radius, op.threshold)?;
    let at_threshold = a
        .threshold
        .map(|t| evaluate_at(&cases, a.radius, t))
        .transpose()?;
    let bootstrap = match a.bootstrap {
        0 => None,
        n => Some(bootstrap_fauc(
            &cases, a.radius, a.fp_limit, mode, n, a.seed,
        )?),
    };
    if let Some(path) = &a.curve {
        io::froc_write_csv(&curve, path)?;
    }
    let report = EvalReport {
        tool: ToolInfo::current(),
        config: EvalConfigEcho {
            pred_dir: a.pred_dir,
            annot_dir: a.annot_dir,
            radius: a.radius,
            fp_limit: a.fp_limit,
            bootstrap: a.bootstrap,
            seed: a.seed,
            threshold: a.threshold,
            target_sensitivity: a.target_sensitivity,
            sensitivity: mode,
        },
        images: stems,
        annotations: cases.iter().map(|c| c.annotations.len()).sum(),
        fauc: curve.fauc,
        fauc_extended: curve.extended,
        curve_points: curve.points.len(),
        operating_point: OperatingPointEcho {
            target_sensitivity: a.target_sensitivity,
            point: op,
        },
        at_operating_point,
        at_threshold,
        bootstrap,
    };
    write(&a.out, &json(&report))?;
    println!("{}", serde_json::json!({ "fauc": report.fauc }));
    Ok(())
}

fn parse_curve(text: &str, path: &Path) -> Result<Vec<[f64; 3]>, CliError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("threshold")) {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| {
                CliError::data(format!(
                    "{}: line {}: cannot parse {line:?}",
                    path.display(),
                    i + 1
                ))
            })?;
        let [t, fp, s] = vals[..] else {
            return Err(CliError::data(format!(
                "{}: line {}: expected 3 columns",
                path.display(),
                i + 1
            )));
        };
        rows.push([t, fp, s]);
    }
    Ok(rows)
}

pub fn froc_plotdata(a: PlotArgs) -> Result<(), CliError> {
    let mut curves: Vec<(String, PathBuf)> = Vec::new();
    if let Some(dir) = &a.run_dir {
        for kind in DistanceKind::ALL {
            let p = dir.join(kind.name()).join("froc.csv");
            if p.exists() {
                curves.push((kind.name().to_string(), p));
            }
        }
    }
    for spec in &a.curves {
        let (label, path) = spec
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--curve expects label=path, got {spec:?}")))?;
        curves.push((label.to_string(), PathBuf::from(path)));
    }
    if curves.is_empty() {
        return Err(CliError::config(
            "no curves: pass --run-dir or --curve label=path",
        ));
    }
    let mut out = String::from("label,threshold,fp_avg,sensitivity\n");
    for (label, path) in &curves {
        let rows = parse_curve(&read(path)?, path)?;
        for [t, fp, s] in rows {
            out.push_str(&format!("{label},{t},{fp},{s}\n"));
            if a.fp_limit.is_some_and(|lim| fp >= lim) {
                break;
            }
        }
    }
    write(&a.out, &out)
}

#[derive(Serialize)]
struct SynthManifestCase {
    index: usize,
    seed: u64,
    image: String,
    dots: String,
    lesions: usize,
}

#[derive(Serialize)]
struct SynthManifest {
    tool: ToolInfo,
    config: SynthConfig,
    count: usize,
    cases: Vec<SynthManifestCase>,
}

pub fn synth(a: SynthArgs) -> Result<(), CliError> {
    let cfg: SynthConfig = match &a.config {
        Some(p) => serde_json::from_str(&read_config(p)?)
            .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?,
        None => SynthConfig::default(),
    };
    cfg.validate()?;
    fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", a.out_dir.display())))?;
    let cases: Vec<SynthManifestCase> = (0..a.count)
        .into_par_iter()
        .map(|k| {
            let case_cfg = cfg.for_case(k as u64);
            let (image, dots) = generate_case(&case_cfg)?;
            let image_name = format!("case_{k}.ldgr");
            let dots_name = format!("case_{k}.csv");
            io::grid_write(&image, a.out_dir.join(&image_name))?;
            io::dots_write_csv(&dots, a.out_dir.join(&dots_name))?;
            Ok(SynthManifestCase {
                index: k,
                seed: case_cfg.seed,
                image: image_name,
                dots: dots_name,
                lesions: dots.len(),
            })
        })
        .collect::<Result<_, CliError>>()?;
    let manifest = SynthManifest {
        tool: ToolInfo::current(),
        config: cfg,
        count: a.count,
        cases,
    };
    write(&a.out_dir.join("manifest.json"), &json(&manifest))?;
    println!("{}", serde_json::json!({ "cases": a.count }));
    Ok(())
}

pub fn pipeline(a: PipelineArgs) -> Result<(), CliError> {
    let cfg = match &a.config {
        Some(p) => pipeline::parse_config(&read_config(p)?)?,
        None => pipeline::PipelineConfig::default(),
    };
    let run = pipeline::run_pipeline(&cfg)?;
    pipeline::write_run(&run, &a.out_dir)?;
    let summary: Vec<_> = run
        .report
        .kinds
        .iter()
        .map(|k| serde_json::json!({ "kind": k.kind, "fauc": k.fauc }))
        .collect();
    println!("{}", serde_json::Value::Array(summary));
    Ok(())
}

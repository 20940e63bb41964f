mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;

/// Distance maps from dot annotations, target maps, detection and FROC
/// evaluation.
///
/// Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
/// error. Errors are written to stderr as a single JSON object.
#[derive(Debug, Parser)]
#[command(name = "lesiondist", version)]
struct Cli {
    /// Worker threads for per-image work (default: all cores).
    #[arg(long, global = true, env = "LESIONDIST_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distance map from an image and its dots.
    Dt(DtArgs),
    /// Decay-normalised target map, with a JSON sidecar next to the output.
    Maps(MapsArgs),
    /// Local-maximum detections from a (predicted) map.
    Detect(DetectArgs),
    /// FROC, FAUC, operating point and bootstrap over a set of images.
    Eval(EvalArgs),
    /// Merge FROC curves into one long-format CSV for plotting.
    FrocPlotdata(PlotArgs),
    /// Synthetic images with dot annotations.
    Synth(SynthArgs),
    /// synth → maps → simulated prediction → detect → eval, per distance kind.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
struct DtArgs {
    /// Image grid (LDGR).
    #[arg(long)]
    image: PathBuf,
    /// Dot CSV, `y,x` or `z,y,x` per line.
    #[arg(long)]
    dots: PathBuf,
    /// geodesic, intensity or euclidean (gdm/idm/edm also accepted).
    #[arg(long)]
    kind: lesiondist::DistanceKind,
    /// Voxel size per axis, slowest first, e.g. `1,0.5`.
    #[arg(long, value_delimiter = ',')]
    spacing: Option<Vec<f64>>,
    #[arg(long, default_value_t = lesiondist::distance::DEFAULT_MAX_PASSES)]
    max_passes: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MapsArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    dots: PathBuf,
    #[arg(long)]
    kind: lesiondist::DistanceKind,
    /// Decay exponent; defaults to 5 (geodesic), 6 (intensity), 9 (euclidean).
    #[arg(long)]
    decay: Option<f64>,
    /// Move each dot to the brightest voxel of its structure first (2D only).
    #[arg(long)]
    shift_dots: bool,
    #[arg(long, default_value_t = 3.0)]
    shift_radius: f64,
    /// Fraction of the local maximum that defines the dot's structure.
    #[arg(long, default_value_t = 0.6)]
    shift_threshold: f64,
    #[arg(long, value_delimiter = ',')]
    spacing: Option<Vec<f64>>,
    /// Target map (LDGR); the sidecar is written with a `.json` extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    map: PathBuf,
    /// Keep detections scoring at least this much; all candidates if omitted.
    #[arg(long)]
    threshold: Option<f64>,
    /// CSV with columns y,x,score.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Per-image predictions: `<name>.ldgr` maps or `<name>.csv` detections.
    #[arg(long)]
    pred_dir: PathBuf,
    /// Per-image dot CSVs `<name>.csv`; every CSV here is one image.
    #[arg(long)]
    annot_dir: PathBuf,
    #[arg(long, default_value_t = lesiondist::eval::DEFAULT_HIT_RADIUS)]
    radius: f64,
    #[arg(long, default_value_t = lesiondist::eval::DEFAULT_FP_LIMIT)]
    fp_limit: f64,
    /// Bootstrap resamples; 0 skips the bootstrap.
    #[arg(long, default_value_t = lesiondist::eval::DEFAULT_BOOTSTRAP_SAMPLES)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report metrics at this fixed threshold as well.
    #[arg(long)]
    threshold: Option<f64>,
    /// Sensitivity the operating point should match.
    #[arg(long, default_value_t = lesiondist::presets::INTRA_RATER_SENSITIVITY)]
    target_sensitivity: f64,
    /// Average per-image sensitivities instead of pooling hits.
    #[arg(long)]
    per_image: bool,
    #[arg(long)]
    out: PathBuf,
    /// FROC points as CSV (threshold,fp_avg,sensitivity).
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// A pipeline run directory; every `<kind>/froc.csv` is included.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    /// Extra curves as `label=path`.
    #[arg(long = "curve")]
    curves: Vec<String>,
    /// Drop points beyond this FP_avg, keeping the first one past it.
    #[arg(long)]
    fp_limit: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Synthesis config (JSON); defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Pipeline config or a previous run's manifest.json.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::new(error::Class::Internal, "threads", e))?;
    pool.install(|| match cli.command {
        Command::Dt(a) => commands::dt(a),
        Command::Maps(a) => commands::maps(a),
        Command::Detect(a) => commands::detect(a),
        Command::Eval(a) => commands::eval(a),
        Command::FrocPlotdata(a) => commands::froc_plotdata(a),
        Command::Synth(a) => commands::synth(a),
        Command::Pipeline(a) => commands::pipeline(a),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::new(
                error::Class::Config,
                "usage",
                e.render().to_string().trim_end(),
            );
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.class.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.class.exit_code() as u8)
        }
    }
}

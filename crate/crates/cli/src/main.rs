//! `twoslit`: run, validate and analyze two-slit billiard experiments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use twoslit_core::analysis::{
    fringe_visibility, incoherent_sum_compare, pattern_symmetry_defect, IntensityProfile,
    DEFAULT_WINDOW,
};
use twoslit_core::config::{validate_config, ExperimentConfig};
use twoslit_core::experiment::{one_slit_config, Experiment, RunSummary, StopReason};
use twoslit_core::output::{self, SnapshotWriter, SNAPSHOT_DIR, SNAPSHOT_INDEX};
use twoslit_core::recipes::recipe;
use twoslit_core::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ABORT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "twoslit",
    version,
    about = "Wave packets leaking from a billiard through two slits"
)]
struct Cli {
    /// Worker threads for the propagator (results do not depend on it).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its artifacts.
    Run(RunArgs),
    /// Run the two one-slit variants of an experiment and compare their sum
    /// with the two-slit profile.
    OneSlitPair(PairArgs),
    /// Check a configuration and predict whether the symmetry condition holds.
    Validate {
        /// Config file, or a built-in recipe name such as `case_a`.
        config: String,
    },
    /// Fringe statistics of intensity profiles.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file, or a built-in recipe name such as `case_a`.
    config: String,
    /// Output directory [default: config `output_dir`, else runs/<name>-<hash>].
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the step cap.
    #[arg(long, value_name = "N")]
    max_steps: Option<u64>,
    /// Write a |ψ|² frame every N steps (0 disables).
    #[arg(long, value_name = "N")]
    snapshot_stride: Option<u64>,
}

#[derive(Args)]
struct PairArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Two-slit profile to compare against [default: intensity.csv of the
    /// two-slit run in its default directory, if present].
    #[arg(long, value_name = "CSV")]
    two_slit: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Profiles written by `run` (intensity.csv).
    #[arg(required = true)]
    profiles: Vec<PathBuf>,
    /// Half-width of the window used for fringe visibility.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: f64,
    /// Treat the three profiles as two-slit, slit a, slit b and report the
    /// incoherent-sum score.
    #[arg(long)]
    incoherent: bool,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => EXIT_CONFIG,
            Error::Numerical { .. } => EXIT_ABORT,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn config_failure(message: String) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message,
    }
}

fn load_config(arg: &str) -> CliResult<ExperimentConfig> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(ExperimentConfig::from_file(path)?);
    }
    recipe(arg).map_err(|_| config_failure(format!("{arg}: no such file or built-in recipe")))
}

fn default_dir(config: &ExperimentConfig) -> PathBuf {
    match &config.output_dir {
        Some(d) => PathBuf::from(d),
        None => PathBuf::from("runs").join(format!("{}-{}", config.name, &config.hash()[..12])),
    }
}

fn prepare(args: &RunArgs) -> CliResult<ExperimentConfig> {
    let mut config = load_config(&args.config)?;
    if let Some(n) = args.max_steps {
        config.stopping.max_steps = n;
    }
    if let Some(n) = args.snapshot_stride {
        config.observers.snapshot_stride = n;
    }
    ensure_valid(&config)?;
    Ok(config)
}

fn ensure_valid(config: &ExperimentConfig) -> CliResult {
    let report = validate_config(config);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.is_valid() {
        Ok(())
    } else {
        Err(config_failure(format!(
            "invalid configuration:\n  {}",
            report.errors.join("\n  ")
        )))
    }
}

/// Runs `config` and writes its artifacts into `dir`.
fn run_into(config: ExperimentConfig, dir: &Path) -> CliResult<(Experiment, RunSummary)> {
    let stride = config.observers.snapshot_stride;
    let mut exp = Experiment::new(config)?;
    fs::create_dir_all(dir).map_err(Error::from)?;
    let mut extra = Vec::new();
    let summary = if stride > 0 {
        let mut snaps = SnapshotWriter::new(
            dir.join(SNAPSHOT_DIR),
            stride,
            Some(exp.config_hash.clone()),
        )?;
        let summary = exp.run(&mut [&mut snaps])?;
        snaps.finish()?;
        extra.extend(
            snaps
                .frames
                .iter()
                .map(|f| format!("{SNAPSHOT_DIR}/{}", f.file)),
        );
        extra.push(format!("{SNAPSHOT_DIR}/{SNAPSHOT_INDEX}"));
        summary
    } else {
        exp.run(&mut [])?
    };
    output::write_run(dir, &exp, &summary, extra)?;
    println!(
        "{}: {} after {} steps (t = {:.6e}), leaked {:.4}, wall {:.1} s -> {}",
        exp.config.name,
        summary.stop_reason.as_str(),
        summary.steps,
        summary.t_final,
        summary.leaked,
        summary.wall_time_s,
        dir.display()
    );
    if let Some(e) = &summary.error {
        eprintln!("error: {e}");
    }
    Ok((exp, summary))
}

fn aborted(summary: &RunSummary) -> CliResult {
    if summary.stop_reason == StopReason::Abort {
        Err(Failure {
            code: EXIT_ABORT,
            message: "run aborted; see manifest.json".into(),
        })
    } else {
        Ok(())
    }
}

fn cmd_run(args: &RunArgs) -> CliResult {
    let config = prepare(args)?;
    let dir = args.out.clone().unwrap_or_else(|| default_dir(&config));
    let (_, summary) = run_into(config, &dir)?;
    aborted(&summary)
}

#[derive(Serialize)]
struct PairReport {
    config_hash: String,
    slit_a: String,
    slit_b: String,
    sum: String,
    two_slit: Option<String>,
    score: Option<f64>,
}

fn cmd_one_slit_pair(args: &PairArgs) -> CliResult {
    let config = prepare(&args.run)?;
    let base_dir = default_dir(&config);
    let dir = args
        .run
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}-pair", base_dir.display())));
    let mut profiles = Vec::new();
    let mut summaries = Vec::new();
    for (which, sub) in [(0, "slit_a"), (1, "slit_b")] {
        let (exp, summary) = run_into(one_slit_config(&config, which), &dir.join(sub))?;
        profiles.push(exp.profile());
        summaries.push(summary);
    }
    let mut sum = profiles[0].sum(&profiles[1])?;
    sum.meta.config_hash = Some(config.hash());
    let sum_file = "intensity_sum.csv";
    output::write_intensity_csv(&dir.join(sum_file), &sum)?;

    let two_path = args.two_slit.clone().or_else(|| {
        let p = base_dir.join(output::INTENSITY_FILE);
        p.exists().then_some(p)
    });
    let score = match &two_path {
        Some(p) => {
            let two = output::read_intensity_csv(p)?;
            Some(incoherent_sum_compare(&two, &profiles[0], &profiles[1])?)
        }
        None => None,
    };
    let report = PairReport {
        config_hash: config.hash(),
        slit_a: "slit_a/intensity.csv".into(),
        slit_b: "slit_b/intensity.csv".into(),
        sum: sum_file.into(),
        two_slit: two_path.map(|p| p.display().to_string()),
        score,
    };
    let json = serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n";
    fs::write(dir.join("pair.json"), &json).map_err(Error::from)?;
    match score {
        Some(s) => println!(
            "incoherent-sum score {s:.4} (two-slit profile {})",
            report.two_slit.unwrap()
        ),
        None => println!("no two-slit profile found; run `twoslit run` first or pass --two-slit"),
    }
    for s in &summaries {
        aborted(s)?;
    }
    Ok(())
}

fn cmd_validate(arg: &str) -> CliResult {
    let config = load_config(arg)?;
    let report = validate_config(&config);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(Error::from)?
    );
    eprintln!("symmetry condition: {}", report.sc_verdict());
    if report.is_valid() {
        Ok(())
    } else {
        Err(config_failure(format!(
            "{} error(s) found",
            report.errors.len()
        )))
    }
}

#[derive(Serialize)]
struct ProfileStats {
    file: String,
    config_hash: Option<String>,
    points: usize,
    total: f64,
    visibility: Option<f64>,
    visibility_error: Option<String>,
    symmetry_defect: Option<f64>,
    central_max: Option<bool>,
}

fn stats(path: &Path, p: &IntensityProfile, window: f64) -> ProfileStats {
    let (visibility, visibility_error) = match fringe_visibility(p, window) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let sym = pattern_symmetry_defect(p).ok();
    ProfileStats {
        file: path.display().to_string(),
        config_hash: p.meta.config_hash.clone(),
        points: p.len(),
        total: p.intensity.iter().sum::<f64>() * p.spacing(),
        visibility,
        visibility_error,
        symmetry_defect: sym.map(|s| s.defect),
        central_max: sym.map(|s| s.central_max),
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> CliResult {
    let profiles = args
        .profiles
        .iter()
        .map(|p| output::read_intensity_csv(p))
        .collect::<Result<Vec<_>, _>>()?;
    let profile_stats: Vec<_> = args
        .profiles
        .iter()
        .zip(&profiles)
        .map(|(f, p)| stats(f, p, args.window))
        .collect();
    let mut doc = serde_json::json!({ "profiles": profile_stats });
    if args.incoherent {
        let [two, a, b] = profiles.as_slice() else {
            return Err(Failure {
                code: EXIT_FAILURE,
                message: "--incoherent needs exactly three profiles: two-slit, slit a, slit b"
                    .into(),
            });
        };
        doc["incoherent_score"] = serde_json::json!(incoherent_sum_compare(two, a, b)?);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).map_err(Error::from)?
    );
    Ok(())
}

fn set_threads(n: Option<usize>) -> CliResult {
    let Some(n) = n else { return Ok(()) };
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure {
            code: EXIT_FAILURE,
            message: format!("cannot start {n} threads: {e}"),
        })?;
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        eprintln!("warning: built without the `parallel` feature; --threads {n} ignored");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = set_threads(cli.threads).and_then(|()| match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::OneSlitPair(a) => cmd_one_slit_pair(a),
        Command::Validate { config } => cmd_validate(config),
        Command::Analyze(a) => cmd_analyze(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

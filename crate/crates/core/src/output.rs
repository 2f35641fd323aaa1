//! On-disk artifacts: CSV time series and profiles, `|ψ|²` snapshots as
//! 16-bit PGM images, and the run manifest.
//!
//! Numbers are written with 12 significant digits and LF line endings, so
//! identical runs produce identical files. Every CSV starts with a
//! `# config_hash=<hex>` line ahead of its header row when the hash is known.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::IntensityProfile;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::experiment::{Experiment, RunSummary, StopReason};
use crate::grid::ComplexField;
use crate::observables::{NormSample, PhaseSample};
use crate::propagator::{EvolutionState, Observer};

pub const INTENSITY_FILE: &str = "intensity.csv";
pub const WINDOW_INTENSITY_FILE: &str = "intensity_window.csv";
pub const PHASE_FILE: &str = "slit_phase.csv";
pub const NORM_FILE: &str = "norm.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const SNAPSHOT_INDEX: &str = "index.csv";

/// Formats `v` with 12 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.11e}")
    }
}

fn start(hash: Option<&str>, header: &str) -> String {
    let mut s = String::new();
    if let Some(h) = hash {
        let _ = writeln!(s, "# config_hash={h}");
    }
    s.push_str(header);
    s.push('\n');
    s
}

pub fn intensity_csv(profile: &IntensityProfile) -> String {
    let mut s = start(profile.meta.config_hash.as_deref(), "x,intensity");
    for (x, i) in profile.x.iter().zip(&profile.intensity) {
        let _ = writeln!(s, "{},{}", fmt_num(*x), fmt_num(*i));
    }
    s
}

pub fn phase_csv(samples: &[PhaseSample], hash: Option<&str>) -> String {
    let mut s = start(hash, "step,t,cos_dphi,amp_a,amp_b,valid");
    for p in samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            p.step,
            fmt_num(p.t),
            fmt_num(p.cos_dphi),
            fmt_num(p.psi_a.norm()),
            fmt_num(p.psi_b.norm()),
            u8::from(p.valid)
        );
    }
    s
}

pub fn norm_csv(samples: &[NormSample], hash: Option<&str>) -> String {
    let mut s = start(hash, "step,t,norm,leaked");
    for n in samples {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            n.step,
            fmt_num(n.t),
            fmt_num(n.norm),
            fmt_num(n.leaked)
        );
    }
    s
}

pub fn write_intensity_csv(path: &Path, profile: &IntensityProfile) -> Result<()> {
    fs::write(path, intensity_csv(profile))?;
    Ok(())
}

/// Parses a profile written by [`write_intensity_csv`]. A `config_hash`
/// comment is kept in the profile metadata; other `#` lines and blank lines
/// are ignored.
pub fn parse_intensity_csv(text: &str) -> Result<IntensityProfile> {
    let hash = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("# config_hash="))
        .map(|h| h.trim().to_string());
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some("x,intensity") => {}
        other => {
            return Err(Error::analysis(format!(
                "expected header `x,intensity`, found {other:?}"
            )));
        }
    }
    let (mut x, mut intensity) = (Vec::new(), Vec::new());
    for (n, line) in lines.enumerate() {
        let bad = || Error::analysis(format!("malformed profile row {}: {line:?}", n + 1));
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        x.push(a.trim().parse::<f64>().map_err(|_| bad())?);
        intensity.push(b.trim().parse::<f64>().map_err(|_| bad())?);
    }
    let mut profile = IntensityProfile::new(x, intensity)?;
    profile.meta.config_hash = hash;
    Ok(profile)
}

pub fn read_intensity_csv(path: &Path) -> Result<IntensityProfile> {
    parse_intensity_csv(&fs::read_to_string(path)?)
}

/// `|ψ|²` as a binary 16-bit PGM, scaled so the frame maximum maps to 65535.
/// The top image row is the largest `y`; the hash, if given, goes into a
/// header comment. Returns the image and the maximum.
pub fn encode_pgm16(psi: &ComplexField, hash: Option<&str>) -> (Vec<u8>, f64) {
    let grid = psi.grid();
    let (w, h) = (grid.ncols(), grid.nrows());
    let max = psi
        .values()
        .iter()
        .map(|z| z.norm_sqr())
        .fold(0.0, f64::max);
    let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
    let comment = hash
        .map(|h| format!("# config_hash={h}\n"))
        .unwrap_or_default();
    let header = format!("P5\n{comment}{w} {h}\n65535\n");
    let mut out = Vec::with_capacity(header.len() + 2 * w * h);
    out.extend_from_slice(header.as_bytes());
    for row in (0..h).rev() {
        for z in psi.row(row) {
            let v = (z.norm_sqr() * scale).round().min(65535.0) as u16;
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    (out, max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SnapshotFrame {
    pub step: u64,
    pub t: f64,
    pub max_density: f64,
    pub file: String,
}

/// Observer writing a PGM frame every `stride` steps into `dir`.
pub struct SnapshotWriter {
    dir: PathBuf,
    stride: u64,
    hash: Option<String>,
    pub frames: Vec<SnapshotFrame>,
}

impl SnapshotWriter {
    pub fn new(dir: impl Into<PathBuf>, stride: u64, hash: Option<String>) -> Result<Self> {
        if stride == 0 {
            return Err(Error::config("snapshot stride must be positive"));
        }
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            stride,
            hash,
            frames: Vec::new(),
        })
    }

    pub fn write_frame(&mut self, psi: &ComplexField, step: u64, t: f64) -> Result<()> {
        let (bytes, max) = encode_pgm16(psi, self.hash.as_deref());
        let file = format!("psi2_{step:09}.pgm");
        fs::write(self.dir.join(&file), bytes)?;
        self.frames.push(SnapshotFrame {
            step,
            t,
            max_density: max,
            file,
        });
        Ok(())
    }

    pub fn index_csv(&self) -> String {
        let mut s = start(self.hash.as_deref(), "frame,step,t,max_density,file");
        for (i, f) in self.frames.iter().enumerate() {
            let _ = writeln!(
                s,
                "{i},{},{},{},{}",
                f.step,
                fmt_num(f.t),
                fmt_num(f.max_density),
                f.file
            );
        }
        s
    }

    /// Writes the sidecar index and returns its path.
    pub fn finish(&self) -> Result<PathBuf> {
        let path = self.dir.join(SNAPSHOT_INDEX);
        fs::write(&path, self.index_csv())?;
        Ok(path)
    }
}

impl Observer for SnapshotWriter {
    fn stride(&self) -> u64 {
        self.stride
    }

    fn observe(&mut self, state: &EvolutionState) -> Result<()> {
        self.write_frame(&state.psi, state.step_index(), state.time())
    }
}

/// Record of a run written next to its artifacts.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub stop_reason: StopReason,
    pub steps: u64,
    pub t_final: f64,
    pub leaked: f64,
    pub norm: f64,
    pub wall_time_s: f64,
    pub error: Option<String>,
    /// Paths relative to the output directory.
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, summary: &RunSummary, files: Vec<String>) -> Self {
        Self {
            config: config.clone(),
            config_hash: summary.config_hash.clone(),
            stop_reason: summary.stop_reason,
            steps: summary.steps,
            t_final: summary.t_final,
            leaked: summary.leaked,
            norm: summary.norm,
            wall_time_s: summary.wall_time_s,
            error: summary.error.clone(),
            files,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::write(
            dir.join(MANIFEST_FILE),
            serde_json::to_string_pretty(self)? + "\n",
        )?;
        Ok(())
    }
}

/// Writes the profile, slit-phase, norm and (if configured) windowed
/// profile CSVs of a finished experiment plus its manifest. Extra file
/// names, such as snapshot frames, are listed in the manifest as given.
pub fn write_run(
    dir: &Path,
    exp: &Experiment,
    summary: &RunSummary,
    extra: Vec<String>,
) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut files = vec![
        INTENSITY_FILE.to_string(),
        PHASE_FILE.to_string(),
        NORM_FILE.to_string(),
    ];
    write_intensity_csv(&dir.join(INTENSITY_FILE), &exp.profile())?;
    let hash = Some(exp.config_hash.as_str());
    fs::write(dir.join(PHASE_FILE), phase_csv(&exp.phase.samples, hash))?;
    fs::write(dir.join(NORM_FILE), norm_csv(&exp.leak.samples, hash))?;
    if let Some(p) = exp.window_profile() {
        write_intensity_csv(&dir.join(WINDOW_INTENSITY_FILE), &p)?;
        files.push(WINDOW_INTENSITY_FILE.to_string());
    }
    files.extend(extra);
    let manifest = Manifest::new(&exp.config, summary, files);
    manifest.write(dir)?;
    Ok(manifest)
}

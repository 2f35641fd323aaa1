//! Screen flux, slit phases, and leaked probability.
//!
//! The screen is the grid row nearest `y = s` above the slit wall. Flux is
//! counted positive in the `+y` direction, away from the billiard.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::SlitSpec;
use crate::grid::{ComplexField, GridSpec};
use crate::propagator::{EvolutionState, Observer};

/// Relative amplitude below which a slit phase sample is discarded.
pub const PHASE_FLOOR: f64 = 1e-8;

/// `j_y = Im[ψ* (ψ(y+δ) − ψ(y−δ)) / (2δ)]` along grid row `row`.
pub fn current_y(psi: &ComplexField, row: usize) -> Result<Vec<f64>> {
    let grid = psi.grid();
    if row == 0 || row + 1 >= grid.nrows() {
        return Err(Error::structural(format!(
            "current requires an interior row, got {row} of {}",
            grid.nrows()
        )));
    }
    let inv = 0.5 / grid.spacing();
    let (up, mid, down) = (psi.row(row + 1), psi.row(row), psi.row(row - 1));
    Ok(mid
        .iter()
        .zip(up.iter().zip(down))
        .map(|(c, (u, d))| (c.conj() * (u - d)).im * inv)
        .collect())
}

/// Time-integrated flux through the screen row, per unit length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScreenRecord {
    pub row: usize,
    pub y: f64,
    pub stride: u64,
    pub tau: f64,
    /// Steps whose flux has been added.
    pub steps: u64,
    /// Flux after this step is ignored.
    pub window_end: Option<u64>,
    pub x: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl ScreenRecord {
    /// Screen on the row nearest `y = distance`.
    pub fn new(grid: &GridSpec, distance: f64, tau: f64, stride: u64) -> Result<Self> {
        if !(distance > 0.0) {
            return Err(Error::config(format!(
                "screen distance must be positive, got {distance}"
            )));
        }
        let row = grid
            .row_nearest(distance)
            .filter(|&r| r > 0 && r + 1 < grid.nrows())
            .ok_or_else(|| {
                Error::config(format!(
                    "screen at y = {distance} is not an interior grid row"
                ))
            })?;
        Ok(Self {
            row,
            y: grid.y(row),
            stride: stride.max(1),
            tau,
            steps: 0,
            window_end: None,
            x: (0..grid.ncols()).map(|j| grid.x(j)).collect(),
            intensity: vec![0.0; grid.ncols()],
        })
    }

    pub fn with_window(mut self, end_step: u64) -> Self {
        self.window_end = Some(end_step);
        self
    }

    /// `∫ I(x) dx`.
    pub fn total(&self) -> f64 {
        let dx = self.x.get(1).map_or(0.0, |x1| x1 - self.x[0]);
        self.intensity.iter().sum::<f64>() * dx
    }
}

/// `I(x) += j_y(x, ȳ)·τ·stride`.
pub fn accumulate_screen(record: &mut ScreenRecord, psi: &ComplexField) -> Result<()> {
    let j = current_y(psi, record.row)?;
    if j.len() != record.intensity.len() {
        return Err(Error::structural(
            "screen record and field have different widths",
        ));
    }
    let w = record.tau * record.stride as f64;
    record
        .intensity
        .iter_mut()
        .zip(&j)
        .for_each(|(i, j)| *i += j * w);
    record.steps += record.stride;
    Ok(())
}

impl Observer for ScreenRecord {
    fn stride(&self) -> u64 {
        self.stride
    }

    fn observe(&mut self, state: &EvolutionState) -> Result<()> {
        if self.window_end.is_some_and(|end| state.step_index() > end) {
            return Ok(());
        }
        accumulate_screen(self, &state.psi)
    }
}

/// How the amplitude at a slit is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSampling {
    /// Single node at the slit center on the line `y = 0`.
    #[default]
    Node,
    /// Mean over the open columns of the slit on `y = 0`.
    SlitAverage,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseSample {
    pub step: u64,
    pub t: f64,
    pub cos_dphi: f64,
    pub psi_a: Complex64,
    pub psi_b: Complex64,
    pub valid: bool,
}

/// `cos(arg a − arg b)`, or `None` when either value is zero.
pub fn cos_phase_difference(a: Complex64, b: Complex64) -> Option<f64> {
    let m = a.norm() * b.norm();
    (m > 0.0).then(|| ((a * b.conj()).re / m).clamp(-1.0, 1.0))
}

/// Where to read the two slit amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct SlitProbe {
    row: usize,
    cols: [Vec<usize>; 2],
    floor: f64,
}

impl SlitProbe {
    /// `floor` is the absolute amplitude below which samples are invalid.
    pub fn new(
        slits: &SlitSpec,
        grid: &GridSpec,
        sampling: PhaseSampling,
        floor: f64,
    ) -> Result<Self> {
        let [(row, ca), (_, cb)] = slits.center_nodes(grid)?;
        let cols = match sampling {
            PhaseSampling::Node => [vec![ca], vec![cb]],
            PhaseSampling::SlitAverage => {
                let (a, b) = slits.columns(grid)?;
                let span = |s: crate::geometry::SlitColumns| {
                    (s.first..=s.last)
                        .filter_map(|o| grid.col_at_offset(o))
                        .collect::<Vec<_>>()
                };
                [span(a), span(b)]
            }
        };
        Ok(Self { row, cols, floor })
    }

    pub fn row(&self) -> usize {
        self.row
    }

    fn read(&self, psi: &ComplexField, which: usize) -> Complex64 {
        let cols = &self.cols[which];
        let sum: Complex64 = cols.iter().map(|&c| psi.at(self.row, c)).sum();
        sum / cols.len() as f64
    }

    pub fn sample(&self, psi: &ComplexField, step: u64, t: f64) -> PhaseSample {
        let (a, b) = (self.read(psi, 0), self.read(psi, 1));
        let valid = a.norm() >= self.floor && b.norm() >= self.floor;
        let cos_dphi = cos_phase_difference(a, b)
            .filter(|_| valid)
            .unwrap_or(f64::NAN);
        PhaseSample {
            step,
            t,
            cos_dphi,
            psi_a: a,
            psi_b: b,
            valid,
        }
    }
}

/// Single-shot slit phase with node sampling and the default floor relative
/// to the current peak amplitude.
pub fn slit_phase(psi: &ComplexField, slits: &SlitSpec) -> Result<PhaseSample> {
    let peak = psi.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let probe = SlitProbe::new(slits, psi.grid(), PhaseSampling::Node, PHASE_FLOOR * peak)?;
    Ok(probe.sample(psi, 0, 0.0))
}

/// Time series of slit phase samples.
#[derive(Clone, Debug)]
pub struct SlitPhaseSeries {
    pub probe: SlitProbe,
    pub stride: u64,
    pub samples: Vec<PhaseSample>,
}

impl SlitPhaseSeries {
    pub fn new(probe: SlitProbe, stride: u64) -> Self {
        Self {
            probe,
            stride: stride.max(1),
            samples: vec![],
        }
    }

    pub fn valid(&self) -> impl Iterator<Item = &PhaseSample> {
        self.samples.iter().filter(|s| s.valid)
    }
}

impl Observer for SlitPhaseSeries {
    fn stride(&self) -> u64 {
        self.stride
    }

    fn observe(&mut self, state: &EvolutionState) -> Result<()> {
        let s = self
            .probe
            .sample(&state.psi, state.step_index(), state.time());
        self.samples.push(s);
        Ok(())
    }
}

/// `φ_a − φ_b + 2π(r_a − r_b)/λ` at screen point `(x, s)`, with `r_a`, `r_b`
/// the distances from the slit centers `(∓d/2, 0)`.
pub fn predicted_screen_phase(
    x: f64,
    phi_a: f64,
    phi_b: f64,
    lambda: f64,
    slits: &SlitSpec,
    screen: f64,
) -> f64 {
    phi_a - phi_b + 2.0 * PI * path_difference(x, slits.separation, screen) / lambda
}

/// `r_a − r_b` for the point `(x, s)`; increasing in `x`.
pub fn path_difference(x: f64, separation: f64, screen: f64) -> f64 {
    let h = separation / 2.0;
    (x + h).hypot(screen) - (x - h).hypot(screen)
}

/// Screen positions where the path difference equals `target`, if any.
pub fn position_for_path_difference(target: f64, separation: f64, screen: f64) -> Option<f64> {
    if target.abs() >= separation {
        return None;
    }
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while path_difference(hi, separation, screen) < target {
        hi *= 2.0;
        if hi > 1e9 {
            return None;
        }
    }
    while path_difference(lo, separation, screen) > target {
        lo *= 2.0;
        if lo < -1e9 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if path_difference(mid, separation, screen) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Phase-locked fringe extrema within `|x| <= half_width`: maxima where
/// `r_a − r_b = mλ`, minima where `r_a − r_b = (m + ½)λ`.
pub fn predicted_extrema(
    lambda: f64,
    separation: f64,
    screen: f64,
    half_width: f64,
) -> (Vec<f64>, Vec<f64>) {
    let collect = |offset: f64| {
        let mut out = vec![];
        let m_max = (separation / lambda).ceil() as i64 + 1;
        for m in -m_max..=m_max {
            let target = (m as f64 + offset) * lambda;
            if let Some(x) = position_for_path_difference(target, separation, screen) {
                if x.abs() <= half_width {
                    out.push(x);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    };
    (collect(0.0), collect(0.5))
}

/// `1 − δ² Σ_mask |ψ|²`.
pub fn leaked_probability(psi: &ComplexField, mask: &[bool]) -> Result<f64> {
    let grid = psi.grid();
    if mask.len() != grid.len() {
        return Err(Error::structural(
            "billiard mask and field have different sizes",
        ));
    }
    let n = grid.ncols();
    let inside = exec::row_sum(Execution::default(), grid.nrows(), |i| {
        psi.row(i)
            .iter()
            .zip(&mask[i * n..(i + 1) * n])
            .filter(|(_, &m)| m)
            .map(|(v, _)| v.norm_sqr())
            .sum()
    });
    Ok(1.0 - inside * grid.spacing() * grid.spacing())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormSample {
    pub step: u64,
    pub t: f64,
    pub norm: f64,
    pub leaked: f64,
}

/// Records total norm and leaked probability.
#[derive(Clone, Debug)]
pub struct LeakRecorder {
    mask: Vec<bool>,
    pub stride: u64,
    pub samples: Vec<NormSample>,
}

impl LeakRecorder {
    pub fn new(mask: Vec<bool>, stride: u64) -> Self {
        Self {
            mask,
            stride: stride.max(1),
            samples: vec![],
        }
    }

    pub fn sample(&self, psi: &ComplexField, step: u64, t: f64) -> Result<NormSample> {
        Ok(NormSample {
            step,
            t,
            norm: psi.norm_squared(),
            leaked: leaked_probability(psi, &self.mask)?,
        })
    }

    pub fn last_leaked(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.leaked)
    }
}

impl Observer for LeakRecorder {
    fn stride(&self) -> u64 {
        self.stride
    }

    fn observe(&mut self, state: &EvolutionState) -> Result<()> {
        let s = self.sample(&state.psi, state.step_index(), state.time())?;
        self.samples.push(s);
        Ok(())
    }
}

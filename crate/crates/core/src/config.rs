//! Experiment configuration, validation, and the configuration hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{
    build_absorber, build_billiard, carve_slits, check_absorber_clearance,
    potential_symmetry_defect, Billiard, PotentialField, Ramp, SlitSpec,
};
use crate::grid::{ComplexField, GridSpec};
use crate::observables::PhaseSampling;
use crate::packet::{barrier_overlap, gaussian_packet, packet_symmetry_defect, PacketSpec};
use crate::propagator::{stability_report, StabilityReport, StepperConfig};

/// Symmetry defects below this count as exact.
pub const SC_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Height `H` of the integration region.
    pub height: f64,
    /// Width `L` of the integration region.
    pub width: f64,
    pub spacing: f64,
    /// Lower edge of the region; the slit side `l` lies on `y = 0`.
    pub y_min: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            height: 1.6,
            width: 1.2,
            spacing: 0.002,
            y_min: -1.12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarrierConfig {
    pub height: f64,
    pub width: f64,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        Self {
            height: 1e6,
            width: 0.008,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbsorberConfig {
    pub width: f64,
    /// Peak `V_A` on the region border; 0 disables the layer.
    pub strength: f64,
    pub ramp: Ramp,
}

impl Default for AbsorberConfig {
    fn default() -> Self {
        Self {
            width: 0.1,
            strength: 2e4,
            ramp: Ramp::Quadratic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScreenConfig {
    /// Distance `s` of the screen from `l`.
    pub distance: f64,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        Self { distance: 0.3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StoppingConfig {
    pub max_steps: u64,
    /// Stop once this fraction of the probability has left the billiard.
    pub leaked_target: f64,
    /// Also record the intensity accumulated over steps `1..=n` only.
    pub intensity_window_steps: Option<u64>,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            max_steps: 3_000_000,
            leaked_target: 0.85,
            intensity_window_steps: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObserverConfig {
    pub intensity_stride: u64,
    pub phase_stride: u64,
    /// Also the interval of the leaked-probability stopping check.
    pub norm_stride: u64,
    /// `|ψ|²` image interval; 0 disables snapshots.
    pub snapshot_stride: u64,
    pub phase_sampling: PhaseSampling,
}

impl Default for ObserverConfig {
    fn default() -> Self {
        Self {
            intensity_stride: 1,
            phase_stride: 10,
            norm_stride: 100,
            snapshot_stride: 0,
            phase_sampling: PhaseSampling::Node,
        }
    }
}

/// Complete description of one experiment. Every field defaults to the
/// standard parameter set with a square billiard and `k = (0, 180)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub name: String,
    pub grid: GridConfig,
    pub billiard: Billiard,
    pub barrier: BarrierConfig,
    pub slits: SlitSpec,
    pub absorber: AbsorberConfig,
    pub packet: PacketSpec,
    pub stepper: StepperConfig,
    pub screen: ScreenConfig,
    pub stopping: StoppingConfig,
    pub observers: ObserverConfig,
    /// Where the runner writes artifacts. Not part of the hash.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            grid: GridConfig::default(),
            billiard: Billiard::default(),
            barrier: BarrierConfig::default(),
            slits: SlitSpec::default(),
            absorber: AbsorberConfig::default(),
            packet: PacketSpec::default(),
            stepper: StepperConfig::default(),
            screen: ScreenConfig::default(),
            stopping: StoppingConfig::default(),
            observers: ObserverConfig::default(),
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid configuration: {e}")))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Compact JSON with keys in sorted order, without `output_dir`.
    pub fn canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("configuration serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        serde_json::to_string(&value).expect("value serializes")
    }

    /// Lowercase hex SHA-256 of [`Self::canonical_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let g = &self.grid;
        GridSpec::placed(g.height, g.width, g.spacing, g.y_min)
    }

    /// Builds grid, potential, and initial state, failing on the first
    /// inconsistency.
    pub fn build(&self) -> Result<Setup> {
        let grid = self.grid_spec()?;
        self.packet.validate()?;
        self.stepper.validate()?;
        let b = &self.barrier;
        let closed = build_billiard(&self.billiard, b.height, b.width, &grid)?;
        let mut potential = carve_slits(closed, &self.slits, &self.billiard, b.width)?;
        if self.absorber.strength > 0.0 {
            let a = &self.absorber;
            let absorber = build_absorber(a.width, a.strength, a.ramp, &grid)?;
            check_absorber_clearance(&absorber, &self.billiard, &grid)?;
            potential = potential.with_absorber(absorber)?;
        }
        let [x0, y0] = self.packet.center;
        if !self.billiard.contains(x0, y0) || self.potential_at(&potential, &grid, x0, y0) > 0.0 {
            return Err(Error::config(format!(
                "packet center ({x0}, {y0}) is not inside the billiard"
            )));
        }
        let screen_row = grid
            .row_nearest(self.screen.distance)
            .filter(|&r| r + 1 < grid.nrows() && self.screen.distance > 0.0)
            .ok_or_else(|| {
                Error::config(format!(
                    "screen at y = {} lies outside the region",
                    self.screen.distance
                ))
            })?;
        if potential.absorber()[grid.index(screen_row, grid.origin_col())] > 0.0 {
            return Err(Error::config(format!(
                "screen at y = {} lies inside the absorbing layer",
                self.screen.distance
            )));
        }
        let s = &self.stopping;
        if !(s.leaked_target > 0.0 && s.leaked_target <= 1.0) {
            return Err(Error::config(format!(
                "leaked target must be in (0, 1], got {}",
                s.leaked_target
            )));
        }
        let o = &self.observers;
        if o.intensity_stride == 0 || o.phase_stride == 0 || o.norm_stride == 0 {
            return Err(Error::config("observer strides must be positive"));
        }
        let psi0 = gaussian_packet(&self.packet, &grid)?;
        let mask = self.billiard.mask(&grid);
        Ok(Setup {
            grid,
            potential,
            psi0,
            mask,
        })
    }

    fn potential_at(&self, v: &PotentialField, grid: &GridSpec, x: f64, y: f64) -> f64 {
        match (grid.col_nearest(x), grid.row_nearest(y)) {
            (Some(j), Some(i)) => v.barrier()[grid.index(i, j)],
            _ => f64::INFINITY,
        }
    }
}

/// Discretized experiment ready to run.
#[derive(Clone, Debug)]
pub struct Setup {
    pub grid: GridSpec,
    pub potential: PotentialField,
    pub psi0: ComplexField,
    /// Nodes inside the billiard, walls included.
    pub mask: Vec<bool>,
}

/// Outcome of checking a configuration without running it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub config_hash: String,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub stability: Option<StabilityReport>,
    pub potential_symmetry_defect: Option<f64>,
    pub packet_symmetry_defect: Option<f64>,
    /// Both defects below [`SC_TOLERANCE`].
    pub sc_satisfied: Option<bool>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn sc_verdict(&self) -> &'static str {
        match self.sc_satisfied {
            Some(true) => "satisfied",
            Some(false) => "violated",
            None => "unknown",
        }
    }
}

pub fn validate_config(cfg: &ExperimentConfig) -> ValidationReport {
    let mut report = ValidationReport {
        config_hash: cfg.hash(),
        errors: vec![],
        warnings: vec![],
        stability: None,
        potential_symmetry_defect: None,
        packet_symmetry_defect: None,
        sc_satisfied: None,
    };
    let setup = match cfg.build() {
        Ok(s) => s,
        Err(e) => {
            report.errors.push(e.to_string());
            return report;
        }
    };
    let stability = stability_report(&setup.grid, &setup.potential, &cfg.stepper);
    if !stability.stable {
        report.errors.push(format!(
            "time step is unstable: τ·‖H‖ = {:.3} exceeds {}",
            stability.tau_times_bound, stability.limit
        ));
    }
    report.stability = Some(stability);
    if let Some(amp) = barrier_overlap(&setup.psi0, &setup.potential, 1e-3 * peak(&setup.psi0)) {
        report.warnings.push(format!(
            "initial packet overlaps the barrier (|ψ0| up to {amp:.3e} on barrier nodes); some probability is lost at t = 0"
        ));
    }
    match (
        potential_symmetry_defect(&setup.potential),
        packet_symmetry_defect(&setup.psi0),
    ) {
        (Ok(pv), Ok(pp)) => {
            report.potential_symmetry_defect = Some(pv);
            report.packet_symmetry_defect = Some(pp);
            report.sc_satisfied = Some(pv < SC_TOLERANCE && pp < SC_TOLERANCE);
        }
        (Err(e), _) | (_, Err(e)) => report.errors.push(e.to_string()),
    }
    report
}

pub(crate) fn peak(psi: &ComplexField) -> f64 {
    psi.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

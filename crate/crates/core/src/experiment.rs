//! Running a configured experiment with its standard observers.

use std::time::Instant;

use serde::Serialize;

use crate::analysis::{incoherent_sum_compare, IntensityProfile};
use crate::config::{peak, ExperimentConfig, Setup};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::observables::{
    LeakRecorder, NormSample, ScreenRecord, SlitPhaseSeries, SlitProbe, PHASE_FLOOR,
};
use crate::propagator::{EvolutionState, Observer, Stepper};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    LeakedTarget,
    MaxSteps,
    Abort,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::LeakedTarget => "leaked_target",
            StopReason::MaxSteps => "max_steps",
            StopReason::Abort => "abort",
        }
    }
}

/// A configured experiment together with its evolving state and records.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub setup: Setup,
    pub state: EvolutionState,
    pub screen: ScreenRecord,
    /// Intensity restricted to the configured window, if any.
    pub window: Option<ScreenRecord>,
    pub phase: SlitPhaseSeries,
    pub leak: LeakRecorder,
    stepper: Stepper,
}

/// Summary of a finished run.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub stop_reason: StopReason,
    pub steps: u64,
    pub t_final: f64,
    pub leaked: f64,
    pub norm: f64,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        Self::with_execution(config, Execution::default())
    }

    pub fn with_execution(config: ExperimentConfig, exec: Execution) -> Result<Self> {
        let setup = config.build()?;
        let tau = config.stepper.tau;
        let obs = &config.observers;
        let stepper = Stepper::new(&setup.potential, config.stepper.clone())?.with_execution(exec);
        let screen = ScreenRecord::new(
            &setup.grid,
            config.screen.distance,
            tau,
            obs.intensity_stride,
        )?;
        let window = config
            .stopping
            .intensity_window_steps
            .map(|end| screen.clone().with_window(end));
        let floor = PHASE_FLOOR * peak(&setup.psi0);
        let probe = SlitProbe::new(&config.slits, &setup.grid, obs.phase_sampling, floor)?;
        let phase = SlitPhaseSeries::new(probe, obs.phase_stride);
        let mut leak = LeakRecorder::new(setup.mask.clone(), obs.norm_stride);
        let state = EvolutionState::new(setup.psi0.clone(), tau);
        let first = leak.sample(&state.psi, 0, 0.0)?;
        leak.samples.push(first);
        Ok(Self {
            config_hash: config.hash(),
            config,
            setup,
            state,
            screen,
            window,
            phase,
            leak,
            stepper,
        })
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    /// Steps until the leaked fraction reaches its target or the step cap is
    /// hit. `extra` observers run after the built-in ones. A numerical abort
    /// is reported in the summary rather than returned as an error; observer
    /// failures are returned.
    pub fn run(&mut self, extra: &mut [&mut dyn Observer]) -> Result<RunSummary> {
        let started = Instant::now();
        let max_steps = self.config.stopping.max_steps;
        let target = self.config.stopping.leaked_target;
        let mut reason = StopReason::MaxSteps;
        let mut error = None;
        while self.state.step_index() < max_steps {
            if let Err(e) = self.stepper.step(&mut self.state) {
                match e {
                    Error::Numerical { .. } => {
                        reason = StopReason::Abort;
                        error = Some(e.to_string());
                        break;
                    }
                    other => return Err(other),
                }
            }
            let n = self.state.step_index();
            let due = |o: &dyn Observer| n.is_multiple_of(o.stride().max(1));
            if due(&self.screen) {
                self.screen.observe(&self.state)?;
            }
            if let Some(w) = self.window.as_mut() {
                if due(w) {
                    w.observe(&self.state)?;
                }
            }
            if due(&self.phase) {
                self.phase.observe(&self.state)?;
            }
            let mut leak_checked = false;
            if due(&self.leak) {
                self.leak.observe(&self.state)?;
                leak_checked = true;
            }
            for o in extra.iter_mut() {
                if due(&**o) {
                    o.observe(&self.state)?;
                }
            }
            if leak_checked && self.leak.last_leaked() >= target {
                reason = StopReason::LeakedTarget;
                break;
            }
        }
        let last = self.final_sample()?;
        Ok(RunSummary {
            config_hash: self.config_hash.clone(),
            stop_reason: reason,
            steps: self.state.step_index(),
            t_final: self.state.time(),
            leaked: last.leaked,
            norm: last.norm,
            wall_time_s: started.elapsed().as_secs_f64(),
            error,
        })
    }

    fn final_sample(&self) -> Result<NormSample> {
        match self.leak.samples.last() {
            Some(s) if s.step == self.state.step_index() => Ok(*s),
            _ => self
                .leak
                .sample(&self.state.psi, self.state.step_index(), self.state.time()),
        }
    }

    pub fn profile(&self) -> IntensityProfile {
        let mut p = IntensityProfile::from_record(&self.screen);
        p.meta.config_hash = Some(self.config_hash.clone());
        p.meta.leaked = self.leak.samples.last().map(|s| s.leaked);
        p
    }

    pub fn window_profile(&self) -> Option<IntensityProfile> {
        self.window.as_ref().map(|w| {
            let mut p = IntensityProfile::from_record(w);
            p.meta.config_hash = Some(self.config_hash.clone());
            p
        })
    }
}

/// Runs `config` to completion with the built-in observers only.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(Experiment, RunSummary)> {
    let mut exp = Experiment::new(config.clone())?;
    let summary = exp.run(&mut [])?;
    Ok((exp, summary))
}

/// Copy of `config` with only slit `a` (`which == 0`) or slit `b` open.
pub fn one_slit_config(config: &ExperimentConfig, which: usize) -> ExperimentConfig {
    let mut c = config.clone();
    c.slits.open_a = which == 0;
    c.slits.open_b = which == 1;
    c.name = format!(
        "{}_slit_{}",
        config.name,
        if which == 0 { "a" } else { "b" }
    );
    c
}

/// Intensities of the two one-slit runs, their sum, and the comparison
/// with the two-slit profile when given.
#[derive(Clone, Debug, Serialize)]
pub struct OneSlitPair {
    pub slit_a: IntensityProfile,
    pub slit_b: IntensityProfile,
    pub sum: IntensityProfile,
    pub summaries: [RunSummary; 2],
    pub score: Option<f64>,
}

pub fn run_one_slit_pair(
    config: &ExperimentConfig,
    two_slit: Option<&IntensityProfile>,
) -> Result<OneSlitPair> {
    let (a, sa) = run_experiment(&one_slit_config(config, 0))?;
    let (b, sb) = run_experiment(&one_slit_config(config, 1))?;
    let (pa, pb) = (a.profile(), b.profile());
    let sum = pa.sum(&pb)?;
    let score = two_slit
        .map(|two| incoherent_sum_compare(two, &pa, &pb))
        .transpose()?;
    Ok(OneSlitPair {
        slit_a: pa,
        slit_b: pb,
        sum,
        summaries: [sa, sb],
        score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.grid.spacing = 0.004;
        c.stepper.tau = 2e-6;
        c.stopping.max_steps = 300;
        c
    }

    #[test]
    fn step_cap_stops_the_run() {
        let (exp, s) = run_experiment(&small_config()).unwrap();
        assert_eq!(s.stop_reason, StopReason::MaxSteps);
        assert_eq!(s.steps, 300);
        assert_eq!(exp.screen.steps, 300);
        assert_eq!(exp.phase.samples.len(), 30);
        assert_eq!(exp.leak.samples.len(), 4);
        // The front of the packet already reaches the slits.
        assert!(s.leaked > 0.0 && s.leaked < 0.05, "{}", s.leaked);
    }

    #[test]
    fn leak_target_stops_the_run() {
        let mut c = small_config();
        c.stopping.leaked_target = 1e-9;
        c.observers.norm_stride = 20;
        let (_, s) = run_experiment(&c).unwrap();
        assert_eq!(s.stop_reason, StopReason::LeakedTarget);
        assert!(s.steps <= 300 && s.steps % 20 == 0);
    }

    #[test]
    fn unstable_step_aborts_with_reason() {
        let mut c = small_config();
        c.stepper.tau = 2e-5;
        c.stepper.check_every = 10;
        let (_, s) = run_experiment(&c).unwrap();
        assert_eq!(s.stop_reason, StopReason::Abort);
        assert!(s.error.is_some());
    }

    #[test]
    fn reruns_are_bit_identical() {
        let c = small_config();
        let (a, _) = run_experiment(&c).unwrap();
        let (b, _) = run_experiment(&c).unwrap();
        assert_eq!(a.state.psi, b.state.psi);
        assert_eq!(a.screen.intensity, b.screen.intensity);
    }

    #[test]
    fn window_record_stops_accumulating() {
        let mut c = small_config();
        c.stopping.intensity_window_steps = Some(100);
        let (exp, _) = run_experiment(&c).unwrap();
        assert_eq!(exp.window.as_ref().unwrap().steps, 100);
    }

    #[test]
    fn one_slit_configs_close_one_slit() {
        let c = small_config();
        let a = one_slit_config(&c, 0);
        assert!(a.slits.open_a && !a.slits.open_b);
        let b = one_slit_config(&c, 1);
        assert!(!b.slits.open_a && b.slits.open_b);
        assert_ne!(a.hash(), b.hash());
    }
}

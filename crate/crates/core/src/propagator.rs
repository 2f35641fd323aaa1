//! Time stepping with the truncated exponential series.
//!
//! One step applies `Σ_{n=0}^{p} (−iτH)ⁿ/n!` to ψ, evaluated in Horner form
//!
//! ```text
//! a_p = ψ − (iτ/p) H ψ
//! a_n = ψ − (iτ/n) H a_{n+1},   n = p−1, …, 1
//! ```
//!
//! so a fourth-order step costs four stencil sweeps and two scratch fields.
//! `H = −½Δ + V_B − iV_A` with the five-point Laplacian and ψ = 0 beyond the
//! stored nodes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::PotentialField;
use crate::grid::{ComplexField, GridSpec};

/// Largest `τ·‖H‖` accepted for the fourth-order series. The exact
/// imaginary-axis stability boundary of the degree-4 Taylor polynomial is
/// `2√2 ≈ 2.83`; the dense-oracle test `stability_limit_matches_oracle`
/// confirms growth just above it and none at this value.
pub const STABILITY_LIMIT_ORDER4: f64 = 2.8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperConfig {
    /// Time step.
    pub tau: f64,
    /// Series truncation order, 1..=6.
    pub order: u32,
    /// Abort when ‖ψ‖² exceeds its initial value by this relative amount.
    pub drift_tolerance: f64,
    /// Steps between norm and finiteness checks.
    pub check_every: u64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            tau: 1e-6,
            order: 4,
            drift_tolerance: 1e-4,
            check_every: 100,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::config(format!(
                "time step must be positive, got {}",
                self.tau
            )));
        }
        if !(1..=6).contains(&self.order) {
            return Err(Error::config(format!(
                "series order must be in 1..=6, got {}",
                self.order
            )));
        }
        if !(self.drift_tolerance > 0.0) || self.check_every == 0 {
            return Err(Error::config(
                "drift tolerance and check interval must be positive",
            ));
        }
        Ok(())
    }
}

/// A linear operator that can produce one Horner term of the series.
pub trait Operator: Sync {
    fn dim(&self) -> usize;

    /// `out = base − i·scale·(H src)`.
    fn series_term(&self, src: &[Complex64], base: &[Complex64], scale: f64, out: &mut [Complex64]);

    /// `out = H src`.
    fn apply(&self, src: &[Complex64], out: &mut [Complex64]) {
        // H src = i·(0 − i·1·H src)
        let zero = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.series_term(src, &zero, 1.0, out);
        out.iter_mut().for_each(|v| *v *= Complex64::new(0.0, 1.0));
    }
}

/// Five-point finite-difference Hamiltonian with complex potential.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    grid: GridSpec,
    /// `2/δ² + V_B − iV_A`.
    diag: Vec<Complex64>,
    /// `1/(2δ²)`.
    hop: f64,
    zero_row: Vec<Complex64>,
    exec: Execution,
    max_barrier: f64,
    max_absorber: f64,
}

impl Hamiltonian {
    pub fn new(potential: &PotentialField) -> Self {
        let grid = *potential.grid();
        let d = grid.spacing();
        let hop = 0.5 / (d * d);
        let diag = potential
            .barrier()
            .iter()
            .zip(potential.absorber())
            .map(|(&vb, &va)| Complex64::new(4.0 * hop + vb, -va))
            .collect();
        Self {
            grid,
            diag,
            hop,
            zero_row: vec![Complex64::new(0.0, 0.0); grid.ncols()],
            exec: Execution::default(),
            max_barrier: potential.max_barrier(),
            max_absorber: potential.max_absorber(),
        }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `4/δ² + max V_B + max V_A`.
    pub fn spectral_bound(&self) -> f64 {
        8.0 * self.hop + self.max_barrier + self.max_absorber
    }

    pub fn apply_field(&self, psi: &ComplexField) -> Result<ComplexField> {
        self.grid.require_same(psi.grid())?;
        let mut out = ComplexField::zeros(self.grid);
        self.apply(psi.values(), out.values_mut());
        Ok(out)
    }
}

impl Operator for Hamiltonian {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn series_term(
        &self,
        src: &[Complex64],
        base: &[Complex64],
        scale: f64,
        out: &mut [Complex64],
    ) {
        let n = self.grid.ncols();
        let nrows = self.grid.nrows();
        assert!(src.len() == self.dim() && base.len() == self.dim() && out.len() == self.dim());
        let hop = self.hop;
        exec::for_each_row(self.exec, out, n, |i, out_row| {
            let row = |r: usize| &src[r * n..(r + 1) * n];
            let c = row(i);
            let up = if i + 1 < nrows {
                row(i + 1)
            } else {
                &self.zero_row[..]
            };
            let down = if i > 0 {
                row(i - 1)
            } else {
                &self.zero_row[..]
            };
            let diag = &self.diag[i * n..(i + 1) * n];
            let base = &base[i * n..(i + 1) * n];
            let term = |j: usize, left: Complex64, right: Complex64| {
                // Grouping keeps the sum invariant under left/right exchange.
                let nb = (up[j] + down[j]) + (left + right);
                let h = diag[j] * c[j] - nb * hop;
                Complex64::new(base[j].re + scale * h.im, base[j].im - scale * h.re)
            };
            let zero = Complex64::new(0.0, 0.0);
            if n == 1 {
                out_row[0] = term(0, zero, zero);
                return;
            }
            out_row[0] = term(0, zero, c[1]);
            out_row[n - 1] = term(n - 1, c[n - 2], zero);
            let (up, down, diag, base) = (
                &up[1..n - 1],
                &down[1..n - 1],
                &diag[1..n - 1],
                &base[1..n - 1],
            );
            let mid = &c[1..n - 1];
            let out_mid = &mut out_row[1..n - 1];
            for (k, w) in c.windows(3).enumerate() {
                let nb = (up[k] + down[k]) + (w[0] + w[2]);
                let h = diag[k] * mid[k] - nb * hop;
                out_mid[k] = Complex64::new(base[k].re + scale * h.im, base[k].im - scale * h.re);
            }
        });
    }
}

/// `(Hψ)ᵢⱼ = −½[ψᵢ₊₁ⱼ + ψᵢ₋₁ⱼ + ψᵢⱼ₊₁ + ψᵢⱼ₋₁ − 4ψᵢⱼ]/δ² + (V_B − iV_A)ᵢⱼ ψᵢⱼ`.
pub fn apply_hamiltonian(psi: &ComplexField, potential: &PotentialField) -> Result<ComplexField> {
    psi.grid().require_same(potential.grid())?;
    Hamiltonian::new(potential).apply_field(psi)
}

/// Scratch buffers for [`taylor_step`].
#[derive(Clone, Debug, Default)]
pub struct SeriesScratch {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl SeriesScratch {
    pub fn new(dim: usize) -> Self {
        Self {
            a: vec![Complex64::new(0.0, 0.0); dim],
            b: vec![Complex64::new(0.0, 0.0); dim],
        }
    }
}

/// Replaces `psi` by the order-`order` truncated series applied to it.
pub fn taylor_step<O: Operator + ?Sized>(
    op: &O,
    psi: &mut Vec<Complex64>,
    scratch: &mut SeriesScratch,
    tau: f64,
    order: u32,
) {
    let dim = op.dim();
    if scratch.a.len() != dim {
        *scratch = SeriesScratch::new(dim);
    }
    let SeriesScratch { a, b } = scratch;
    op.series_term(psi, psi, tau / order as f64, a);
    for n in (1..order).rev() {
        op.series_term(a, psi, tau / n as f64, b);
        std::mem::swap(a, b);
    }
    std::mem::swap(psi, a);
}

/// Polynomial `R(z) = Σ_{n≤p} zⁿ/n!` evaluated at `z = −iy`.
pub fn series_amplification(y: f64, order: u32) -> f64 {
    let z = Complex64::new(0.0, -y);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 1..=order {
        term = term * z / n as f64;
        sum += term;
    }
    sum.norm()
}

/// Largest `y` with `|R(−iy')| <= 1` for all `0 < y' <= y`, or 0 when the
/// series amplifies arbitrarily small frequencies.
pub fn stability_limit(order: u32) -> f64 {
    if order == 4 {
        return STABILITY_LIMIT_ORDER4;
    }
    let dy = 1e-3;
    let mut y = dy;
    while y < 10.0 {
        if series_amplification(y, order) > 1.0 + 1e-14 {
            return (y - dy).max(0.0);
        }
        y += dy;
    }
    10.0
}

/// Wave function and bookkeeping of a running evolution.
#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub psi: ComplexField,
    step: u64,
    tau: f64,
    /// `(step, ‖ψ‖²)` at every stability check.
    pub norm_history: Vec<(u64, f64)>,
    reference_norm_sq: f64,
}

impl EvolutionState {
    pub fn new(psi: ComplexField, tau: f64) -> Self {
        let n = psi.norm_squared();
        Self {
            psi,
            step: 0,
            tau,
            norm_history: vec![(0, n)],
            reference_norm_sq: n,
        }
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `t = n·τ`.
    pub fn time(&self) -> f64 {
        self.step as f64 * self.tau
    }

    pub fn initial_norm_sq(&self) -> f64 {
        self.reference_norm_sq
    }
}

/// Callback run after steps of an evolution.
pub trait Observer {
    /// Invoked after every `stride()`-th step.
    fn stride(&self) -> u64 {
        1
    }

    fn observe(&mut self, state: &EvolutionState) -> Result<()>;
}

/// Records `(step, ‖ψ‖²)`.
#[derive(Clone, Debug)]
pub struct NormRecorder {
    pub stride: u64,
    pub samples: Vec<(u64, f64)>,
}

impl NormRecorder {
    pub fn new(stride: u64) -> Self {
        Self {
            stride: stride.max(1),
            samples: vec![],
        }
    }
}

impl Observer for NormRecorder {
    fn stride(&self) -> u64 {
        self.stride
    }

    fn observe(&mut self, state: &EvolutionState) -> Result<()> {
        self.samples
            .push((state.step_index(), state.psi.norm_squared()));
        Ok(())
    }
}

/// Hamiltonian, configuration, and scratch space for stepping one system.
#[derive(Clone, Debug)]
pub struct Stepper {
    hamiltonian: Hamiltonian,
    cfg: StepperConfig,
    scratch: SeriesScratch,
}

impl Stepper {
    pub fn new(potential: &PotentialField, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        let hamiltonian = Hamiltonian::new(potential);
        let scratch = SeriesScratch::new(hamiltonian.dim());
        Ok(Self {
            hamiltonian,
            cfg,
            scratch,
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.hamiltonian = self.hamiltonian.with_execution(exec);
        self
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    /// Advances by one time step.
    pub fn step(&mut self, state: &mut EvolutionState) -> Result<()> {
        self.hamiltonian.grid.require_same(state.psi.grid())?;
        taylor_step(
            &self.hamiltonian,
            state.psi.buffer_mut(),
            &mut self.scratch,
            self.cfg.tau,
            self.cfg.order,
        );
        state.step += 1;
        if state.step.is_multiple_of(self.cfg.check_every) {
            self.check(state)?;
        }
        Ok(())
    }

    fn check(&self, state: &mut EvolutionState) -> Result<()> {
        if !state.psi.is_finite() {
            return Err(Error::Numerical {
                step: state.step,
                reason: "non-finite amplitude".into(),
            });
        }
        let n = state.psi.norm_squared();
        state.norm_history.push((state.step, n));
        let limit = state.reference_norm_sq * (1.0 + self.cfg.drift_tolerance);
        if n > limit {
            return Err(Error::Numerical {
                step: state.step,
                reason: format!(
                    "norm grew from {:.9} to {n:.9}, beyond the drift tolerance {:e}; the time step is likely unstable",
                    state.reference_norm_sq, self.cfg.drift_tolerance
                ),
            });
        }
        Ok(())
    }
}

/// Runs `n_steps` steps, calling each observer at its stride.
pub fn evolve(
    state: &mut EvolutionState,
    stepper: &mut Stepper,
    observers: &mut [&mut dyn Observer],
    n_steps: u64,
) -> Result<()> {
    for _ in 0..n_steps {
        stepper.step(state)?;
        let n = state.step_index();
        for obs in observers.iter_mut() {
            if n.is_multiple_of(obs.stride().max(1)) {
                obs.observe(state)?;
            }
        }
    }
    Ok(())
}

/// Advisory stability assessment of a configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub kinetic_bound: f64,
    pub max_barrier: f64,
    pub max_absorber: f64,
    /// `4/δ² + max V_B + max V_A`.
    pub spectral_bound: f64,
    pub tau_times_bound: f64,
    /// `τ·(4/δ² + max V_A)`, ignoring the barrier.
    pub tau_times_kinetic: f64,
    pub limit: f64,
    pub stable: bool,
    pub notes: Vec<String>,
}

pub fn stability_report(
    grid: &GridSpec,
    potential: &PotentialField,
    cfg: &StepperConfig,
) -> StabilityReport {
    let d = grid.spacing();
    let kinetic_bound = 4.0 / (d * d);
    let max_barrier = potential.max_barrier();
    let max_absorber = potential.max_absorber();
    let spectral_bound = kinetic_bound + max_barrier + max_absorber;
    let tau_times_bound = cfg.tau * spectral_bound;
    let tau_times_kinetic = cfg.tau * (kinetic_bound + max_absorber);
    let limit = stability_limit(cfg.order);
    let stable = tau_times_bound <= limit;
    let mut notes = vec![];
    if limit == 0.0 {
        notes.push(format!(
            "order {} amplifies every frequency; norm growth is bounded only by the drift check",
            cfg.order
        ));
    }
    if !stable && tau_times_kinetic <= limit {
        notes.push(format!(
            "τ·‖H‖ = {tau_times_bound:.3} exceeds {limit} only through the barrier; barrier-interior modes would grow"
        ));
    }
    if stable && max_barrier > 0.0 {
        notes.push(format!(
            "barrier-interior amplitudes are exponentially small; the effective bound is kinetic-only, τ·(4/δ² + V_A) = {tau_times_kinetic:.3}"
        ));
    }
    if !stable && tau_times_kinetic > limit {
        notes.push(format!(
            "τ·‖H‖ = {tau_times_bound:.3} exceeds the stability limit {limit}"
        ));
    }
    StabilityReport {
        kinetic_bound,
        max_barrier,
        max_absorber,
        spectral_bound,
        tau_times_bound,
        tau_times_kinetic,
        limit,
        stable,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_billiard, Billiard};
    use crate::grid::{make_grid, GridSpec};
    use crate::packet::{gaussian_packet, PacketSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_field_has_zero_kinetic_energy_in_the_interior() {
        let g = make_grid(1.0, 1.0, 0.125).unwrap();
        let v = PotentialField::zeros(g);
        let psi = ComplexField::from_fn(g, |_, _| c(1.0, 2.0));
        let h = apply_hamiltonian(&psi, &v).unwrap();
        for i in 1..g.nrows() - 1 {
            for j in 1..g.ncols() - 1 {
                assert_eq!(h.at(i, j), c(0.0, 0.0));
            }
        }
        // Border nodes see the zero closure.
        assert_eq!(h.at(0, 3), c(1.0, 2.0) * (0.5 / (0.125 * 0.125)));
    }

    #[test]
    fn plane_wave_matches_discrete_dispersion() {
        // Periodic test harness: sin(kx) on a Dirichlet grid is an exact
        // eigenvector when k·(nx+2)·δ is a multiple of π.
        let nx = 30;
        let d = 0.01;
        let g = GridSpec::new(nx, 2, d, nx / 2, 1).unwrap();
        let m = 3.0;
        let k = m * std::f64::consts::PI / ((nx + 2) as f64 * d);
        let psi = ComplexField::from_fn(g, |x, y| {
            let col = x / d + (nx / 2) as f64 + 1.0;
            let row = y / d + 2.0;
            c(
                (k * col * d).sin() * (std::f64::consts::PI * row / 4.0).sin(),
                0.0,
            )
        });
        let h = apply_hamiltonian(&psi, &PotentialField::zeros(g)).unwrap();
        let ky = std::f64::consts::PI / (4.0 * d);
        let expect = (1.0 - (k * d).cos()) / (d * d) + (1.0 - (ky * d).cos()) / (d * d);
        for (a, b) in h.values().iter().zip(psi.values()) {
            assert!(
                (a - b * expect).norm() < 1e-9 * expect,
                "{a} vs {}",
                b * expect
            );
        }
    }

    #[test]
    fn barrier_node_dominates() {
        let g = make_grid(1.0, 1.0, 0.25).unwrap();
        let mut v = PotentialField::zeros(g);
        let k = g.index(2, 2);
        v.barrier_mut()[k] = 1e6;
        let mut psi = ComplexField::zeros(g);
        psi.values_mut()[k] = c(1.0, 0.0);
        let h = apply_hamiltonian(&psi, &v).unwrap();
        assert_eq!(h.values()[k], c(1e6 + 2.0 / 0.0625, 0.0));
    }

    #[test]
    fn grid_mismatch_is_structural() {
        let a = make_grid(1.0, 1.0, 0.25).unwrap();
        let b = make_grid(1.0, 1.0, 0.125).unwrap();
        let err =
            apply_hamiltonian(&ComplexField::zeros(a), &PotentialField::zeros(b)).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn operator_apply_matches_field_apply() {
        let g = make_grid(1.0, 1.0, 0.125).unwrap();
        let mut v = PotentialField::zeros(g);
        v.barrier_mut()[10] = 7.0;
        let psi = ComplexField::from_fn(g, |x, y| c(x - y * y, x * y + 0.3));
        let h = Hamiltonian::new(&v);
        let mut out = vec![c(0.0, 0.0); g.len()];
        h.apply(psi.values(), &mut out);
        let direct = h.apply_field(&psi).unwrap();
        for (a, b) in out.iter().zip(direct.values()) {
            assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn zero_steps_leave_state_unchanged() {
        let g = make_grid(1.0, 1.0, 0.125).unwrap();
        let v = PotentialField::zeros(g);
        let psi = ComplexField::from_fn(g, |x, _| c(x, 1.0));
        let mut state = EvolutionState::new(psi.clone(), 1e-4);
        let mut stepper = Stepper::new(
            &v,
            StepperConfig {
                tau: 1e-4,
                ..Default::default()
            },
        )
        .unwrap();
        evolve(&mut state, &mut stepper, &mut [], 0).unwrap();
        assert_eq!(state.psi, psi);
        assert_eq!(state.step_index(), 0);
    }

    #[test]
    fn time_is_derived_from_step_count() {
        let g = make_grid(1.0, 1.0, 0.125).unwrap();
        let v = PotentialField::zeros(g);
        let mut state = EvolutionState::new(ComplexField::from_fn(g, |_, _| c(1.0, 0.0)), 1e-4);
        let mut stepper = Stepper::new(
            &v,
            StepperConfig {
                tau: 1e-4,
                ..Default::default()
            },
        )
        .unwrap();
        evolve(&mut state, &mut stepper, &mut [], 7).unwrap();
        assert_eq!(state.time(), 7.0 * 1e-4);
    }

    #[test]
    fn amplification_polynomial() {
        // |R(−iy)|² = 1 − y⁶/72 + y⁸/576 for order 4.
        for y in [0.1f64, 1.0, 2.0, 2.8] {
            let expect = (1.0 - y.powi(6) / 72.0 + y.powi(8) / 576.0).sqrt();
            assert!((series_amplification(y, 4) - expect).abs() < 1e-12);
        }
        assert!(series_amplification(2.9, 4) > 1.0);
        assert_eq!(stability_limit(2), 0.0);
        let l3 = stability_limit(3);
        assert!((l3 - 3f64.sqrt()).abs() < 2e-3, "{l3}");
    }

    #[test]
    fn stability_report_cases() {
        let g = GridSpec::placed(1.6, 1.2, 0.002, -1.12).unwrap();
        let v = build_billiard(&Billiard::default(), 1e6, 0.008, &g).unwrap();
        let r = stability_report(&g, &v, &StepperConfig::default());
        assert!((r.kinetic_bound - 1e6).abs() < 1e-3);
        assert!((r.tau_times_bound - 2.0).abs() < 1e-9);
        assert!(r.stable);
        assert!(r.notes.iter().any(|n| n.contains("kinetic-only")));

        let coarse = make_grid(1.0, 1.0, 0.01).unwrap();
        let r = stability_report(
            &coarse,
            &PotentialField::zeros(coarse),
            &StepperConfig::default(),
        );
        assert!((r.tau_times_bound - 0.04).abs() < 1e-12);
        assert!(r.stable);

        let r = stability_report(
            &g,
            &v,
            &StepperConfig {
                tau: 1e-3,
                ..Default::default()
            },
        );
        assert!(!r.stable);
    }

    #[test]
    fn unstable_step_aborts() {
        let g = make_grid(0.4, 0.4, 0.01).unwrap();
        let v = PotentialField::zeros(g);
        let psi = ComplexField::from_fn(g, |x, y| c((x * 7919.0 + y * 104729.0).sin(), 0.0));
        let mut state = EvolutionState::new(psi, 1e-4);
        // τ·4/δ² = 4 > 2√2.
        let cfg = StepperConfig {
            tau: 1e-4,
            check_every: 10,
            ..Default::default()
        };
        let mut stepper = Stepper::new(&v, cfg).unwrap();
        let err = evolve(&mut state, &mut stepper, &mut [], 10_000).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }), "{err}");
    }

    #[test]
    fn closed_box_conserves_norm_and_stays_symmetric() {
        let g = GridSpec::placed(0.8, 0.6, 0.004, -0.6).unwrap();
        let b = Billiard {
            side: 0.5,
            ..Billiard::default()
        };
        let v = build_billiard(&b, 1e6, 0.008, &g).unwrap();
        let spec = PacketSpec {
            center: [0.0, -0.25],
            k: [0.0, 180.0],
            sigma: 0.04,
        };
        let psi = gaussian_packet(&spec, &g).unwrap();
        let mut state = EvolutionState::new(psi, 1e-6);
        let mut stepper = Stepper::new(&v, StepperConfig::default()).unwrap();
        let mut norms = NormRecorder::new(50);
        evolve(&mut state, &mut stepper, &mut [&mut norms], 500).unwrap();
        assert_eq!(norms.samples.len(), 10);
        for &(_, n) in &norms.samples {
            assert!((n - 1.0).abs() < 1e-8, "{n}");
        }
        assert_eq!(state.psi.mirror_defect().unwrap(), 0.0);
    }

    #[test]
    fn execution_modes_agree_bitwise() {
        let g = GridSpec::placed(0.4, 0.4, 0.01, -0.2).unwrap();
        let v = PotentialField::zeros(g);
        let spec = PacketSpec {
            center: [0.03, -0.02],
            k: [40.0, 10.0],
            sigma: 0.05,
        };
        let psi = gaussian_packet(&spec, &g).unwrap();
        let cfg = StepperConfig {
            tau: 1e-5,
            ..Default::default()
        };
        let mut runs = vec![];
        for exec in [Execution::Sequential, Execution::Parallel] {
            let mut state = EvolutionState::new(psi.clone(), cfg.tau);
            let mut stepper = Stepper::new(&v, cfg.clone()).unwrap().with_execution(exec);
            evolve(&mut state, &mut stepper, &mut [], 20).unwrap();
            runs.push(state.psi);
        }
        assert_eq!(runs[0], runs[1]);
    }
}

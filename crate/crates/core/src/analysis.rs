//! Post-processing of screen profiles and perturbation estimates.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PotentialField;
use crate::grid::ComplexField;
use crate::observables::{PhaseSample, ScreenRecord};
use crate::packet::{gaussian_packet, PacketSpec};
use crate::propagator::{taylor_step, Hamiltonian, Operator, SeriesScratch, StepperConfig};

/// Default half-width of the window searched for fringes.
pub const DEFAULT_WINDOW: f64 = 0.3;

/// Default normalized L¹ distance below which a two-slit profile is taken to
/// coincide with the incoherent sum of its one-slit profiles.
pub const DECOHERENCE_THRESHOLD: f64 = 0.1;

/// Worst-case values of the coefficients `A`, `B`, `|C|` in the small-`Δk`
/// estimate of `‖ψ0 − ψ̃0‖²`.
pub const K_BOUND_COEFFICIENTS: [f64; 3] = [0.25, 1.0, 0.5];

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ProfileMeta {
    pub config_hash: Option<String>,
    pub steps: Option<u64>,
    pub leaked: Option<f64>,
}

/// Screen intensity `I(x)` on evenly spaced positions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntensityProfile {
    pub x: Vec<f64>,
    pub intensity: Vec<f64>,
    pub meta: ProfileMeta,
}

impl IntensityProfile {
    pub fn new(x: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        if x.len() != intensity.len() {
            return Err(Error::analysis(format!(
                "profile has {} positions but {} values",
                x.len(),
                intensity.len()
            )));
        }
        if x.len() < 3 {
            return Err(Error::analysis("profile needs at least three points"));
        }
        if !x.iter().chain(&intensity).all(|v| v.is_finite()) {
            return Err(Error::analysis("profile contains non-finite values"));
        }
        Ok(Self {
            x,
            intensity,
            meta: ProfileMeta::default(),
        })
    }

    pub fn from_record(record: &ScreenRecord) -> Self {
        Self {
            x: record.x.clone(),
            intensity: record.intensity.clone(),
            meta: ProfileMeta {
                steps: Some(record.steps),
                ..ProfileMeta::default()
            },
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    fn require_same_positions(&self, other: &Self) -> Result<()> {
        let tol = 1e-9 * self.spacing().abs();
        if self.len() != other.len()
            || self
                .x
                .iter()
                .zip(&other.x)
                .any(|(a, b)| (a - b).abs() > tol)
        {
            return Err(Error::analysis(
                "profiles are sampled on different screen positions",
            ));
        }
        Ok(())
    }

    /// Pointwise sum of two profiles on the same positions.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.require_same_positions(other)?;
        let intensity = self
            .intensity
            .iter()
            .zip(&other.intensity)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            x: self.x.clone(),
            intensity,
            meta: ProfileMeta::default(),
        })
    }

    /// Profile reflected about `x = 0`.
    pub fn mirrored(&self) -> Self {
        let mut intensity = self.intensity.clone();
        intensity.reverse();
        Self {
            x: self.x.clone(),
            intensity,
            meta: self.meta.clone(),
        }
    }
}

/// Three-point moving average; end points average with their one neighbor.
pub fn smooth3(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Indices of local maxima and minima of the smoothed profile strictly
/// inside `|x| <= half_width`. Plateaus count once, at their first index.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Extrema {
    pub maxima: Vec<usize>,
    pub minima: Vec<usize>,
    pub smoothed: Vec<f64>,
}

pub fn find_extrema(profile: &IntensityProfile, half_width: f64) -> Extrema {
    let s = smooth3(&profile.intensity);
    let n = s.len();
    let mut out = Extrema {
        smoothed: s.clone(),
        ..Extrema::default()
    };
    let mut i = 1;
    while i + 1 < n {
        if profile.x[i].abs() > half_width {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && s[j + 1] == s[i] {
            j += 1;
        }
        if j + 1 >= n {
            break;
        }
        if s[i] > s[i - 1] && s[i] > s[j + 1] {
            out.maxima.push(i);
        } else if s[i] < s[i - 1] && s[i] < s[j + 1] {
            out.minima.push(i);
        }
        i = j + 1;
    }
    out
}

/// Fringe visibility `(I_max − I_min)/(I_max + I_min)` in `|x| <= half_width`,
/// with `I_max` the largest interior maximum and `I_min` the smallest interior
/// minimum (clamped at zero) of the smoothed profile.
pub fn fringe_visibility(profile: &IntensityProfile, half_width: f64) -> Result<f64> {
    let ext = find_extrema(profile, half_width);
    if ext.maxima.len() < 2 || ext.minima.is_empty() {
        return Err(Error::analysis(format!(
            "fringe visibility needs two maxima and a minimum in |x| <= {half_width}, found {} and {}",
            ext.maxima.len(),
            ext.minima.len()
        )));
    }
    let s = &ext.smoothed;
    let hi = ext
        .maxima
        .iter()
        .map(|&i| s[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = ext
        .minima
        .iter()
        .map(|&i| s[i])
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    if hi <= 0.0 {
        return Err(Error::analysis("no positive maximum in the window"));
    }
    Ok(((hi - lo) / (hi + lo)).clamp(0.0, 1.0))
}

/// Time of the first emission burst: the first local maximum of
/// `|ψ_a|² + |ψ_b|²` that reaches half of the largest sampled value.
pub fn first_emission_peak(samples: &[PhaseSample]) -> Option<f64> {
    let amp: Vec<f64> = samples
        .iter()
        .map(|s| s.psi_a.norm_sqr() + s.psi_b.norm_sqr())
        .collect();
    let max = amp.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return None;
    }
    (0..amp.len())
        .find(|&i| {
            amp[i] >= 0.5 * max
                && (i == 0 || amp[i] >= amp[i - 1])
                && (i + 1 == amp.len() || amp[i] >= amp[i + 1])
        })
        .map(|i| samples[i].t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `Σ|I(x) − I(−x)| / Σ|I(x)|`.
    pub defect: f64,
    pub central_max: bool,
}

pub fn pattern_symmetry_defect(profile: &IntensityProfile) -> Result<SymmetryReport> {
    let n = profile.len();
    let tol = 1e-9 * profile.spacing().abs();
    if (0..n).any(|i| (profile.x[i] + profile.x[n - 1 - i]).abs() > tol) {
        return Err(Error::analysis(
            "screen positions are not symmetric about x = 0",
        ));
    }
    let total: f64 = profile.intensity.iter().map(|v| v.abs()).sum();
    let diff: f64 = (0..n)
        .map(|i| (profile.intensity[i] - profile.intensity[n - 1 - i]).abs())
        .sum();
    let defect = if total > 0.0 { diff / total } else { 0.0 };
    let central_max = n % 2 == 1 && {
        let c = n / 2;
        let v = &profile.intensity;
        v[c] > v[c - 1] && v[c] > v[c + 1]
    };
    Ok(SymmetryReport {
        defect,
        central_max,
    })
}

/// L¹ distance between the two-slit profile and the sum of the one-slit
/// profiles, each normalized to unit `Σ|I|`. Ranges over `[0, 2]`.
pub fn incoherent_sum_compare(
    two: &IntensityProfile,
    a: &IntensityProfile,
    b: &IntensityProfile,
) -> Result<f64> {
    let sum = a.sum(b)?;
    two.require_same_positions(&sum)?;
    let unit = |v: &[f64]| -> Result<Vec<f64>> {
        let t: f64 = v.iter().map(|x| x.abs()).sum();
        if t == 0.0 {
            return Err(Error::analysis("cannot compare an all-zero profile"));
        }
        Ok(v.iter().map(|x| x / t).collect())
    };
    let p = unit(&two.intensity)?;
    let q = unit(&sum.intensity)?;
    Ok(p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum())
}

/// Comparison of two packets that differ only in their wave vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KPerturbation {
    /// `sqrt(Δkx²·A + Δky²·B + 2|Δkx Δky|·|C|)` with the worst-case
    /// coefficients.
    pub worst_case_bound: f64,
    /// `‖ψ0 − ψ̃0‖` computed on the grid.
    pub exact: f64,
    /// Same expansion with `A = ⟨x²⟩`, `B = ⟨y²⟩`, `C = ⟨xy⟩` of `|ψ0|²`.
    pub moment_estimate: f64,
}

pub fn k_perturbation_bound(
    spec: &PacketSpec,
    k_tilde: [f64; 2],
    grid: &crate::grid::GridSpec,
) -> Result<KPerturbation> {
    let [a, b, c] = K_BOUND_COEFFICIENTS;
    let dkx = spec.k[0] - k_tilde[0];
    let dky = spec.k[1] - k_tilde[1];
    let worst_case_bound = (dkx * dkx * a + dky * dky * b + 2.0 * (dkx * dky).abs() * c).sqrt();
    let psi = gaussian_packet(spec, grid)?;
    let other = gaussian_packet(
        &PacketSpec {
            k: k_tilde,
            ..spec.clone()
        },
        grid,
    )?;
    let exact = psi.distance(&other)?;
    let m = moments(&psi);
    let moment_estimate =
        (dkx * dkx * m.second[0] + dky * dky * m.second[1] + 2.0 * dkx * dky * m.cross)
            .max(0.0)
            .sqrt();
    Ok(KPerturbation {
        worst_case_bound,
        exact,
        moment_estimate,
    })
}

/// Position moments of `|ψ|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub norm: f64,
    pub mean: [f64; 2],
    /// rms width about the mean, per axis.
    pub sigma: [f64; 2],
    /// `⟨x²⟩`, `⟨y²⟩` about the origin.
    pub second: [f64; 2],
    /// `⟨xy⟩` about the origin.
    pub cross: f64,
}

pub fn moments(psi: &ComplexField) -> Moments {
    let g = psi.grid();
    let (mut n, mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..g.nrows() {
        let y = g.y(i);
        for (j, v) in psi.row(i).iter().enumerate() {
            let x = g.x(j);
            let p = v.norm_sqr();
            n += p;
            sx += p * x;
            sy += p * y;
            sxx += p * x * x;
            syy += p * y * y;
            sxy += p * x * y;
        }
    }
    let mean = [sx / n, sy / n];
    let second = [sxx / n, syy / n];
    let sigma = [
        (second[0] - mean[0] * mean[0]).max(0.0).sqrt(),
        (second[1] - mean[1] * mean[1]).max(0.0).sqrt(),
    ];
    let d2 = g.spacing() * g.spacing();
    Moments {
        norm: n * d2,
        mean,
        sigma,
        second,
        cross: sxy / n,
    }
}

/// Comparison of the exact change of the evolution under a potential
/// change with its first-order estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DuhamelReport {
    pub steps: u64,
    pub t: f64,
    /// `‖ψ̃(t) − ψ(t)‖` from two evolutions.
    pub exact_norm: f64,
    /// Norm of the first-order estimate.
    pub first_order_norm: f64,
    /// `first_order_norm / exact_norm`.
    pub ratio: f64,
    /// `‖(ψ̃(t) − ψ(t)) − first-order estimate‖ / exact_norm`.
    pub relative_error: f64,
    /// `exact_norm / ‖ψ(t)‖`.
    pub relative_change: f64,
}

/// Evolves `psi0` under `v` and `v_tilde` for `steps` steps and compares the
/// difference with `−i ∫₀ᵗ e^{−iH(t−s)} (Ṽ_B − V_B) e^{−iHs} ψ0 ds`.
///
/// The integral is the trapezoid rule on the step grid, accumulated by the
/// recurrence `R_n = U R_{n−1} + w_n ΔV ψ_n`, so no snapshots are stored.
/// Both potentials must share the absorber.
pub fn duhamel_firstorder_check(
    psi0: &ComplexField,
    v: &PotentialField,
    v_tilde: &PotentialField,
    steps: u64,
    cfg: &StepperConfig,
) -> Result<DuhamelReport> {
    cfg.validate()?;
    let grid = *psi0.grid();
    if v.grid() != &grid || v_tilde.grid() != &grid {
        return Err(Error::structural(
            "potentials and initial state must share the grid",
        ));
    }
    if v.absorber() != v_tilde.absorber() {
        return Err(Error::analysis(
            "potentials must differ only in the barrier",
        ));
    }
    let dv: Vec<f64> = v_tilde
        .barrier()
        .iter()
        .zip(v.barrier())
        .map(|(a, b)| a - b)
        .collect();
    let h = Hamiltonian::new(v);
    let h_tilde = Hamiltonian::new(v_tilde);
    let mut scratch = SeriesScratch::new(h.dim());
    let (tau, order) = (cfg.tau, cfg.order);

    let apply_dv = |psi: &[Complex64], w: f64, acc: &mut [Complex64]| {
        for ((a, p), d) in acc.iter_mut().zip(psi).zip(&dv) {
            *a += p * (d * w);
        }
    };
    let mut psi = psi0.values().to_vec();
    let mut psi_tilde = psi.clone();
    let mut acc = vec![Complex64::new(0.0, 0.0); psi.len()];
    apply_dv(&psi, 0.5, &mut acc);
    for n in 1..=steps {
        taylor_step(&h, &mut psi, &mut scratch, tau, order);
        taylor_step(&h_tilde, &mut psi_tilde, &mut scratch, tau, order);
        taylor_step(&h, &mut acc, &mut scratch, tau, order);
        apply_dv(&psi, if n == steps { 0.5 } else { 1.0 }, &mut acc);
    }
    let d2 = grid.spacing() * grid.spacing();
    let norm =
        |v: &mut dyn Iterator<Item = Complex64>| (v.map(|c| c.norm_sqr()).sum::<f64>() * d2).sqrt();
    // −iτ·R
    let first: Vec<Complex64> = acc.iter().map(|r| Complex64::new(0.0, -tau) * r).collect();
    let exact_norm = norm(&mut psi_tilde.iter().zip(&psi).map(|(a, b)| a - b));
    let first_order_norm = norm(&mut first.iter().copied());
    let err = norm(
        &mut psi_tilde
            .iter()
            .zip(&psi)
            .zip(&first)
            .map(|((a, b), f)| a - b - f),
    );
    let psi_norm = norm(&mut psi.iter().copied());
    let safe = |num: f64, den: f64| {
        if den > 0.0 {
            num / den
        } else if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    Ok(DuhamelReport {
        steps,
        t: steps as f64 * tau,
        exact_norm,
        first_order_norm,
        ratio: safe(first_order_norm, exact_norm),
        relative_error: safe(err, exact_norm),
        relative_change: safe(exact_norm, psi_norm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_billiard, Billiard, BilliardShape};
    use crate::grid::GridSpec;

    fn profile(f: impl Fn(f64) -> f64) -> IntensityProfile {
        let x: Vec<f64> = (-150..=150).map(|i| i as f64 * 0.004).collect();
        let i = x.iter().map(|&x| f(x)).collect();
        IntensityProfile::new(x, i).unwrap()
    }

    fn fringes(x: f64) -> f64 {
        (-x * x / 0.08).exp() * (180.0 * 0.1 * x / 0.3 / 2.0).cos().powi(2)
    }

    #[test]
    fn perfect_fringes_have_full_visibility() {
        let v = fringe_visibility(&profile(fringes), DEFAULT_WINDOW).unwrap();
        assert!(v > 0.95, "{v}");
    }

    #[test]
    fn shallow_fringes_have_low_visibility() {
        let p = profile(|x| (-x * x / 0.5).exp() * (1.0 + 0.1 * (100.0 * x).cos()));
        let v = fringe_visibility(&p, DEFAULT_WINDOW).unwrap();
        // Smoothing scales the ripple by (1 + 2cos 0.4)/3; the deepest
        // minimum sits at x = 0.9π/100.
        let r = 0.1 * (1.0 + 2.0 * 0.4f64.cos()) / 3.0;
        let lo = (-(0.09 * std::f64::consts::PI).powi(2) / 0.5).exp() * (1.0 - r);
        let expected = (1.0 + r - lo) / (1.0 + r + lo);
        assert!((v - expected).abs() < 2e-3, "{v} vs {expected}");
    }

    #[test]
    fn first_emission_peak_skips_small_bumps() {
        let sample = |i: u64, a: f64| PhaseSample {
            step: i,
            t: i as f64,
            cos_dphi: 1.0,
            psi_a: Complex64::new(a, 0.0),
            psi_b: Complex64::new(0.0, a),
            valid: true,
        };
        let amps = [0.0, 0.2, 0.1, 0.8, 0.9, 0.7, 1.0, 0.3];
        let s: Vec<_> = amps
            .iter()
            .enumerate()
            .map(|(i, &a)| sample(i as u64, a))
            .collect();
        assert_eq!(first_emission_peak(&s), Some(4.0));
        assert_eq!(first_emission_peak(&[sample(0, 0.0)]), None);
    }

    #[test]
    fn constant_profile_has_no_extrema() {
        assert!(fringe_visibility(&profile(|_| 1.0), DEFAULT_WINDOW).is_err());
    }

    #[test]
    fn visibility_is_bounded() {
        let p = profile(|x| (40.0 * x).sin() - 0.5);
        let v = fringe_visibility(&p, DEFAULT_WINDOW).unwrap();
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn symmetry_of_even_and_odd_profiles() {
        let r = pattern_symmetry_defect(&profile(|x| x * x)).unwrap();
        assert_eq!(r.defect, 0.0);
        assert!(!r.central_max);
        let r = pattern_symmetry_defect(&profile(fringes)).unwrap();
        assert_eq!(r.defect, 0.0);
        assert!(r.central_max);
        let r = pattern_symmetry_defect(&profile(|x| fringes(x - 0.05))).unwrap();
        assert!(r.defect > 0.1, "{}", r.defect);
    }

    #[test]
    fn incoherent_compare_cases() {
        let a = profile(|x| (-(x + 0.05) * (x + 0.05) / 0.08).exp());
        let b = a.mirrored();
        let sum = a.sum(&b).unwrap();
        assert_eq!(incoherent_sum_compare(&sum, &a, &b).unwrap(), 0.0);
        // Scale does not matter.
        let mut scaled = sum.clone();
        scaled.intensity.iter_mut().for_each(|v| *v *= 3.0);
        assert!(incoherent_sum_compare(&scaled, &a, &b).unwrap() < 1e-12);
        let fringed = profile(fringes);
        let d = incoherent_sum_compare(&fringed, &a, &b).unwrap();
        assert!(d > 0.3, "{d}");
        // Symmetric in its first and summed arguments.
        let zero = profile(|_| 0.0);
        let back = incoherent_sum_compare(&sum, &fringed, &zero).unwrap();
        assert!((back - d).abs() < 1e-12);
        let short = IntensityProfile::new(vec![0.0, 1.0, 2.0], vec![1.0; 3]).unwrap();
        assert!(incoherent_sum_compare(&short, &a, &b).is_err());
    }

    #[test]
    fn smoothing_preserves_constants() {
        assert_eq!(smooth3(&[2.0; 5]), vec![2.0; 5]);
        assert_eq!(smooth3(&[0.0, 3.0, 0.0]), vec![1.5, 1.0, 1.5]);
    }

    #[test]
    fn k_bound_cases() {
        let g = GridSpec::placed(1.6, 1.2, 0.004, -1.12).unwrap();
        let spec = PacketSpec::default();
        let same = k_perturbation_bound(&spec, spec.k, &g).unwrap();
        assert_eq!(
            (same.worst_case_bound, same.exact, same.moment_estimate),
            (0.0, 0.0, 0.0)
        );
        let r = k_perturbation_bound(&spec, [-2.0, 179.99], &g).unwrap();
        let expect_bound = (4.0 * 0.25 + 1e-4 + 2.0 * 0.02 * 0.5f64).sqrt();
        assert!((r.worst_case_bound - expect_bound).abs() < 1e-12);
        // Exact: ‖ψ(e^{iΔk·r} − 1)‖ with Δk·r0 ≈ 0 is sqrt(2 − 2e^{−σ²|Δk|²/2}).
        let exact = (2.0 - 2.0 * (-0.09f64.powi(2) * (4.0 + 1e-4) / 2.0).exp()).sqrt();
        assert!((r.exact - exact).abs() < 1e-4, "{} vs {exact}", r.exact);
        assert!(r.exact < r.worst_case_bound);
        assert!((r.moment_estimate - r.exact).abs() / r.exact < 0.01);
    }

    #[test]
    fn moments_of_packet() {
        let g = GridSpec::placed(1.6, 1.2, 0.004, -1.12).unwrap();
        let spec = PacketSpec {
            center: [0.1, -0.3],
            ..PacketSpec::default()
        };
        let m = moments(&gaussian_packet(&spec, &g).unwrap());
        assert!((m.norm - 1.0).abs() < 1e-12);
        // The right edge at 5.6σ trims the x tail slightly.
        assert!(
            (m.mean[0] - 0.1).abs() < 1e-7 && (m.mean[1] + 0.3).abs() < 1e-9,
            "{:?}",
            m.mean
        );
        assert!((m.sigma[0] - 0.09).abs() < 1e-6 && (m.sigma[1] - 0.09).abs() < 1e-6);
        assert!((m.cross - 0.1 * -0.3).abs() < 1e-7);
    }

    fn duhamel_setup() -> (GridSpec, ComplexField, PotentialField) {
        let g = GridSpec::placed(0.8, 0.6, 0.004, -0.6).unwrap();
        let b = Billiard {
            side: 0.5,
            ..Billiard::default()
        };
        let v = build_billiard(&b, 1e6, 0.008, &g).unwrap();
        let spec = PacketSpec {
            center: [0.0, -0.25],
            k: [0.0, 100.0],
            sigma: 0.05,
        };
        (g, gaussian_packet(&spec, &g).unwrap(), v)
    }

    #[test]
    fn duhamel_identical_potentials() {
        let (_, psi, v) = duhamel_setup();
        let cfg = StepperConfig {
            tau: 2e-6,
            ..Default::default()
        };
        let r = duhamel_firstorder_check(&psi, &v, &v, 50, &cfg).unwrap();
        assert_eq!((r.exact_norm, r.first_order_norm), (0.0, 0.0));
    }

    #[test]
    fn duhamel_weak_bump_is_first_order() {
        let (g, psi, v) = duhamel_setup();
        let mut vt = v.clone();
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let (x, y) = (g.x(j), g.y(i) + 0.2);
                vt.barrier_mut()[g.index(i, j)] += 1e3 * (-(x * x + y * y) / 0.005).exp();
            }
        }
        let cfg = StepperConfig {
            tau: 2e-6,
            ..Default::default()
        };
        let r = duhamel_firstorder_check(&psi, &v, &vt, 200, &cfg).unwrap();
        assert!(r.exact_norm > 1e-3, "{r:?}");
        assert!(r.relative_error < 0.2, "{r:?}");
        assert!((r.ratio - 1.0).abs() < 0.2, "{r:?}");
    }

    #[test]
    fn duhamel_ring_shift_is_not_small() {
        let g = GridSpec::placed(1.6, 1.2, 0.004, -1.12).unwrap();
        let ring = |cx: f64| Billiard {
            shape: BilliardShape::SinaiRing {
                center: [cx, -0.6],
                radius: 0.2,
            },
            side: 1.0,
        };
        let v = build_billiard(&ring(0.0), 1e6, 0.008, &g).unwrap();
        let vt = build_billiard(&ring(0.01), 1e6, 0.008, &g).unwrap();
        let spec = PacketSpec {
            center: [0.0, -0.25],
            k: [0.0, -180.0],
            sigma: 0.05,
        };
        let psi = gaussian_packet(&spec, &g).unwrap();
        let cfg = StepperConfig {
            tau: 2e-6,
            ..Default::default()
        };
        // The packet reaches the ring top (y = −0.4) after about 0.1/180.
        let r = duhamel_firstorder_check(&psi, &v, &vt, 600, &cfg).unwrap();
        assert!(r.relative_change > 0.1, "{r:?}");
        assert!(r.relative_error > 1.0, "{r:?}");
    }
}

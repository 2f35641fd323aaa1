//! Initial Gaussian wave packet and its mirror-symmetry defect.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PotentialField;
use crate::grid::{ComplexField, GridSpec};

/// Gaussian packet parameters: center `r0`, wave vector `k`, rms width
/// `sigma` of `|ψ|²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketSpec {
    pub center: [f64; 2],
    pub k: [f64; 2],
    pub sigma: f64,
}

impl Default for PacketSpec {
    fn default() -> Self {
        Self {
            center: [0.0, -0.25],
            k: [0.0, 180.0],
            sigma: 0.09,
        }
    }
}

impl PacketSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::config(format!(
                "packet width must be positive, got {}",
                self.sigma
            )));
        }
        if !self.center.iter().chain(&self.k).all(|v| v.is_finite()) {
            return Err(Error::config(
                "packet center and wave vector must be finite",
            ));
        }
        Ok(())
    }

    pub fn k_norm(&self) -> f64 {
        self.k[0].hypot(self.k[1])
    }

    /// rms width in momentum space, `1/(2σ)`.
    pub fn sigma_k(&self) -> f64 {
        1.0 / (2.0 * self.sigma)
    }

    /// `σ_k / ‖k‖`, the packet's relative spectral width.
    pub fn spectral_ratio(&self) -> f64 {
        self.sigma_k() / self.k_norm()
    }

    /// Whether the packet satisfies its half of the mirror condition.
    pub fn is_mirror_symmetric(&self) -> bool {
        self.center[0] == 0.0 && self.k[0] == 0.0
    }

    /// Continuous packet value at `(x, y)`.
    pub fn value(&self, x: f64, y: f64) -> Complex64 {
        let [x0, y0] = self.center;
        let [kx, ky] = self.k;
        let s2 = self.sigma * self.sigma;
        let (dx, dy) = (x - x0, y - y0);
        let amp = (2.0 * PI * s2).sqrt().recip() * (-(dx * dx + dy * dy) / (4.0 * s2)).exp();
        Complex64::from_polar(amp, kx * x + ky * y)
    }
}

/// Samples the packet on the grid and renormalizes it to unit discrete norm.
pub fn gaussian_packet(spec: &PacketSpec, grid: &GridSpec) -> Result<ComplexField> {
    spec.validate()?;
    let mut psi = ComplexField::from_fn(*grid, |x, y| spec.value(x, y));
    psi.normalize()?;
    Ok(psi)
}

/// Largest `|ψ|` on a barrier node, when it exceeds `threshold`.
pub fn barrier_overlap(
    psi: &ComplexField,
    potential: &PotentialField,
    threshold: f64,
) -> Option<f64> {
    let max = psi
        .values()
        .iter()
        .zip(potential.barrier())
        .filter(|(_, &v)| v > 0.0)
        .map(|(p, _)| p.norm())
        .fold(0.0, f64::max);
    (max > threshold).then_some(max)
}

/// `‖ψ0 − mirror_x(ψ0)‖ / ‖ψ0‖`.
pub fn packet_symmetry_defect(psi: &ComplexField) -> Result<f64> {
    psi.mirror_defect()
}

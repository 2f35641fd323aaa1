//! Reference solutions for small problems: a dense Hamiltonian with exact
//! matrix exponential, and the closed-form free Gaussian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::PotentialField;
use crate::grid::{ComplexField, GridSpec};
use crate::packet::PacketSpec;

/// Largest dense dimension accepted.
pub const MAX_DENSE_DIM: usize = 4096;

/// Dense matrix of the five-point Hamiltonian on a small grid.
#[derive(Clone, Debug)]
pub struct DenseHamiltonian {
    grid: GridSpec,
    matrix: DMatrix<Complex64>,
}

impl DenseHamiltonian {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `max |M − M†|` over all entries.
    pub fn hermitian_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&self, psi: &ComplexField) -> Result<ComplexField> {
        self.grid.require_same(psi.grid())?;
        let v = DVector::from_column_slice(psi.values());
        ComplexField::from_values(self.grid, (&self.matrix * v).as_slice().to_vec())
    }
}

pub fn dense_hamiltonian(potential: &PotentialField) -> Result<DenseHamiltonian> {
    let grid = *potential.grid();
    let n = grid.len();
    if n > MAX_DENSE_DIM {
        return Err(Error::config(format!(
            "dense oracle is limited to {MAX_DENSE_DIM} nodes, grid has {n}"
        )));
    }
    let d = grid.spacing();
    let hop = Complex64::new(-0.5 / (d * d), 0.0);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..grid.nrows() {
        for j in 0..grid.ncols() {
            let k = grid.index(i, j);
            m[(k, k)] = Complex64::new(
                2.0 / (d * d) + potential.barrier()[k],
                -potential.absorber()[k],
            );
            if i > 0 {
                m[(k, grid.index(i - 1, j))] = hop;
            }
            if i + 1 < grid.nrows() {
                m[(k, grid.index(i + 1, j))] = hop;
            }
            if j > 0 {
                m[(k, grid.index(i, j - 1))] = hop;
            }
            if j + 1 < grid.ncols() {
                m[(k, grid.index(i, j + 1))] = hop;
            }
        }
    }
    Ok(DenseHamiltonian { grid, matrix: m })
}

/// Exact propagator `exp(−iMt)` for repeated use.
#[derive(Clone, Debug)]
pub struct DensePropagator {
    grid: GridSpec,
    matrix: DMatrix<Complex64>,
}

impl DensePropagator {
    /// Eigendecomposition when `M` is Hermitian, Padé scaling and squaring
    /// otherwise.
    pub fn new(h: &DenseHamiltonian, t: f64) -> Self {
        let matrix = if h.hermitian_defect() == 0.0 {
            let eig = SymmetricEigen::new(h.matrix.clone());
            let q = &eig.eigenvectors;
            let phases = DMatrix::from_diagonal(
                &eig.eigenvalues
                    .map(|lambda| Complex64::from_polar(1.0, -lambda * t)),
            );
            q * phases * q.adjoint()
        } else {
            (&h.matrix * Complex64::new(0.0, -t)).exp()
        };
        Self {
            grid: h.grid,
            matrix,
        }
    }

    pub fn apply(&self, psi: &ComplexField) -> Result<ComplexField> {
        self.grid.require_same(psi.grid())?;
        let v = DVector::from_column_slice(psi.values());
        ComplexField::from_values(self.grid, (&self.matrix * v).as_slice().to_vec())
    }
}

/// `exp(−iMt) ψ`.
pub fn expm_propagate(psi: &ComplexField, h: &DenseHamiltonian, t: f64) -> Result<ComplexField> {
    DensePropagator::new(h, t).apply(psi)
}

/// One axis of the freely evolving Gaussian, with `|ψ|²` of rms width `σ0`
/// at `t = 0`.
fn free_axis(x: f64, x0: f64, k: f64, sigma0: f64, t: f64) -> Complex64 {
    let s2 = sigma0 * sigma0;
    let a = Complex64::new(1.0, t / (2.0 * s2));
    let u = x - x0 - k * t;
    let pre = (2.0 * std::f64::consts::PI * s2).powf(-0.25) / a.sqrt();
    let expo =
        -Complex64::new(u * u, 0.0) / (4.0 * s2 * a) + Complex64::new(0.0, k * x - 0.5 * k * k * t);
    pre * expo.exp()
}

/// Closed-form free evolution of the packet of `spec` to time `t`.
pub fn free_gaussian_analytic(spec: &PacketSpec, grid: &GridSpec, t: f64) -> Result<ComplexField> {
    spec.validate()?;
    let [x0, y0] = spec.center;
    let [kx, ky] = spec.k;
    let s = spec.sigma;
    Ok(ComplexField::from_fn(*grid, |x, y| {
        free_axis(x, x0, kx, s, t) * free_axis(y, y0, ky, s, t)
    }))
}

/// Width `σ0 √(1 + (t/(2σ0²))²)` of the free packet.
pub fn free_gaussian_width(sigma0: f64, t: f64) -> f64 {
    sigma0 * (1.0 + (t / (2.0 * sigma0 * sigma0)).powi(2)).sqrt()
}

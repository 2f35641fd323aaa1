//! Grid geometry, complex field storage, and discrete norms.
//!
//! Coordinates follow the experiment layout: the origin sits at the midpoint
//! of the billiard's slit side `l`, `x` runs along `l`, and `y` increases
//! from the billiard interior (`y < 0`) through the slits towards the screen
//! (`y = +s`). Node `(i, j)` lives at `x = (j - origin_col)·δ`,
//! `y = (i - origin_row)·δ`; storage is row-major with rows of constant `y`.
//!
//! A grid with `nx` cells along `x` has `nx + 1` node columns. The wave
//! function vanishes one node beyond the stored array on every side.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// Relative tolerance for "integral" cell counts.
const INTEGRAL_TOL: f64 = 1e-6;

/// Discretization of the rectangular integration region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    spacing: f64,
    nx: usize,
    ny: usize,
    origin_col: usize,
    origin_row: usize,
}

/// Number of whole cells in `length`, or an error naming `what`.
pub(crate) fn cell_count(length: f64, spacing: f64, what: &str) -> Result<usize> {
    if !(length.is_finite() && length >= 0.0) {
        return Err(Error::config(format!(
            "{what} must be finite and non-negative, got {length}"
        )));
    }
    let ratio = length / spacing;
    let n = ratio.round();
    if (n * spacing - length).abs() > INTEGRAL_TOL * length.max(spacing) {
        return Err(Error::config(format!(
            "{what} = {length} is not an integral multiple of the spacing {spacing} (ratio {ratio:.6})"
        )));
    }
    Ok(n as usize)
}

impl GridSpec {
    /// Grid with `nx × ny` cells and the coordinate origin on node
    /// `(origin_row, origin_col)`.
    pub fn new(
        nx: usize,
        ny: usize,
        spacing: f64,
        origin_col: usize,
        origin_row: usize,
    ) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::config(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::config("grid needs at least one cell per axis"));
        }
        if origin_col > nx || origin_row > ny {
            return Err(Error::config("grid origin lies outside the grid"));
        }
        Ok(Self {
            spacing,
            nx,
            ny,
            origin_col,
            origin_row,
        })
    }

    /// Region `[-L/2, L/2] × [y_min, y_min + H]`.
    pub fn placed(height: f64, width: f64, spacing: f64, y_min: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::config(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        for (v, what) in [(height, "height H"), (width, "width L")] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{what} must be positive, got {v}")));
            }
        }
        let ny = cell_count(height, spacing, "height H")?;
        let nx = cell_count(width, spacing, "width L")?;
        if nx < 2 || ny < 2 {
            return Err(Error::config("grid needs at least two cells per axis"));
        }
        if nx % 2 != 0 {
            return Err(Error::config(format!(
                "width L = {width} gives an odd cell count {nx}: no node column at x = 0"
            )));
        }
        if !(y_min <= 0.0 && y_min >= -height) {
            return Err(Error::config(format!(
                "y_min = {y_min} must place the origin inside the region"
            )));
        }
        let origin_row = cell_count(-y_min, spacing, "origin offset -y_min")?;
        Self::new(nx, ny, spacing, nx / 2, origin_row)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Cell count along `x`.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Cell count along `y`.
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn ncols(&self) -> usize {
        self.nx + 1
    }

    pub fn nrows(&self) -> usize {
        self.ny + 1
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.ncols() * self.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.spacing
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.spacing
    }

    pub fn origin_col(&self) -> usize {
        self.origin_col
    }

    pub fn origin_row(&self) -> usize {
        self.origin_row
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.ncols() + col
    }

    /// Signed column offset from the origin.
    #[inline]
    pub fn col_offset(&self, col: usize) -> i64 {
        col as i64 - self.origin_col as i64
    }

    #[inline]
    pub fn row_offset(&self, row: usize) -> i64 {
        row as i64 - self.origin_row as i64
    }

    #[inline]
    pub fn x(&self, col: usize) -> f64 {
        self.col_offset(col) as f64 * self.spacing
    }

    #[inline]
    pub fn y(&self, row: usize) -> f64 {
        self.row_offset(row) as f64 * self.spacing
    }

    /// Column whose signed offset from the origin is `offset`.
    pub fn col_at_offset(&self, offset: i64) -> Option<usize> {
        let c = self.origin_col as i64 + offset;
        (0..self.ncols() as i64).contains(&c).then_some(c as usize)
    }

    pub fn row_at_offset(&self, offset: i64) -> Option<usize> {
        let r = self.origin_row as i64 + offset;
        (0..self.nrows() as i64).contains(&r).then_some(r as usize)
    }

    /// Nearest column to `x`.
    pub fn col_nearest(&self, x: f64) -> Option<usize> {
        self.col_at_offset((x / self.spacing).round() as i64)
    }

    /// Nearest row to `y`.
    pub fn row_nearest(&self, y: f64) -> Option<usize> {
        self.row_at_offset((y / self.spacing).round() as i64)
    }

    /// Whether `x -> -x` maps node columns onto node columns.
    pub fn has_mirror(&self) -> bool {
        2 * self.origin_col == self.nx
    }

    /// Column mirrored through `x = 0`.
    #[inline]
    pub fn mirror_col(&self, col: usize) -> usize {
        debug_assert!(self.has_mirror());
        self.nx - col
    }

    pub(crate) fn require_mirror(&self) -> Result<()> {
        if self.has_mirror() {
            Ok(())
        } else {
            Err(Error::structural(format!(
                "grid has no mirror column: origin column {} of {} columns",
                self.origin_col,
                self.ncols()
            )))
        }
    }

    pub(crate) fn require_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::structural("fields live on different grids"))
        }
    }
}

/// Grid for an `H × L` region centered in `x` with the origin row in the
/// middle.
pub fn make_grid(height: f64, width: f64, spacing: f64) -> Result<GridSpec> {
    let half = cell_count(height, spacing, "height H")? / 2;
    GridSpec::placed(height, width, spacing, -(half as f64) * spacing)
}

/// Complex amplitude per grid node, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::structural(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` on every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64 + Sync + Send) -> Self {
        let mut field = Self::zeros(grid);
        let ncols = grid.ncols();
        exec::for_each_row(Execution::default(), &mut field.values, ncols, |i, row| {
            let y = grid.y(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(grid.x(j), y);
            }
        });
        field
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub(crate) fn buffer_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.values[self.grid.index(row, col)]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        let n = self.grid.ncols();
        &self.values[row * n..(row + 1) * n]
    }

    /// Discrete L² norm squared, `δ² Σ |ψ|²`.
    pub fn norm_squared(&self) -> f64 {
        norm_squared(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(&mut self, c: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    /// Rescales to unit norm. Returns the norm before rescaling.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::structural(
                "cannot normalize a zero or non-finite field",
            ));
        }
        self.scale(Complex64::new(1.0 / n, 0.0));
        Ok(n)
    }

    /// `⟨self, other⟩ = δ² Σ conj(self)·other`.
    pub fn inner(&self, other: &ComplexField) -> Result<Complex64> {
        self.grid.require_same(&other.grid)?;
        let d2 = self.grid.spacing * self.grid.spacing;
        let n = self.grid.ncols();
        let re = exec::row_sum(Execution::default(), self.grid.nrows(), |i| {
            let (a, b) = (
                &self.values[i * n..(i + 1) * n],
                &other.values[i * n..(i + 1) * n],
            );
            a.iter().zip(b).map(|(p, q)| (p.conj() * q).re).sum()
        });
        let im = exec::row_sum(Execution::default(), self.grid.nrows(), |i| {
            let (a, b) = (
                &self.values[i * n..(i + 1) * n],
                &other.values[i * n..(i + 1) * n],
            );
            a.iter().zip(b).map(|(p, q)| (p.conj() * q).im).sum()
        });
        Ok(Complex64::new(re, im) * d2)
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &ComplexField) -> Result<f64> {
        self.grid.require_same(&other.grid)?;
        let d2 = self.grid.spacing * self.grid.spacing;
        let n = self.grid.ncols();
        let s = exec::row_sum(Execution::default(), self.grid.nrows(), |i| {
            let (a, b) = (
                &self.values[i * n..(i + 1) * n],
                &other.values[i * n..(i + 1) * n],
            );
            a.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum()
        });
        Ok((s * d2).sqrt())
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Mirror image through `x = 0`.
    pub fn mirror_x(&self) -> Result<ComplexField> {
        mirror_x(self)
    }

    /// `‖ψ − mirror_x(ψ)‖ / ‖ψ‖`; zero for the zero field.
    pub fn mirror_defect(&self) -> Result<f64> {
        let n = self.norm();
        if n == 0.0 {
            self.grid.require_mirror()?;
            return Ok(0.0);
        }
        Ok(self.distance(&self.mirror_x()?)? / n)
    }
}

/// `δ² Σ |ψ_ij|²`, summed row by row in a fixed order.
pub fn norm_squared(psi: &ComplexField) -> f64 {
    let g = psi.grid;
    let n = g.ncols();
    let s = exec::row_sum(Execution::default(), g.nrows(), |i| {
        row_norm_sqr(&psi.values[i * n..(i + 1) * n])
    });
    s * g.spacing * g.spacing
}

/// Row sum of `|v|²` taken in mirror pairs `(j, n-1-j)`, so that the result
/// is bit-identical for a row and its reverse.
#[inline]
pub(crate) fn row_norm_sqr(row: &[Complex64]) -> f64 {
    let n = row.len();
    let mut s = 0.0;
    for j in 0..n / 2 {
        s += row[j].norm_sqr() + row[n - 1 - j].norm_sqr();
    }
    if n % 2 == 1 {
        s += row[n / 2].norm_sqr();
    }
    s
}

/// `output(i, j) = input(i, mirror(j))`.
pub fn mirror_x(psi: &ComplexField) -> Result<ComplexField> {
    let g = psi.grid;
    g.require_mirror()?;
    let n = g.ncols();
    let mut out = ComplexField::zeros(g);
    for (dst, src) in out.values.chunks_mut(n).zip(psi.values.chunks(n)) {
        for (j, v) in dst.iter_mut().enumerate() {
            *v = src[g.mirror_col(j)];
        }
    }
    Ok(out)
}

/// Real per-node field on the same layout, mirrored through `x = 0`.
pub(crate) fn mirror_real(grid: &GridSpec, values: &[f64]) -> Vec<f64> {
    let n = grid.ncols();
    let mut out = vec![0.0; values.len()];
    for (dst, src) in out.chunks_mut(n).zip(values.chunks(n)) {
        for (j, v) in dst.iter_mut().enumerate() {
            *v = src[grid.mirror_col(j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn table_grid_dimensions() {
        let g = make_grid(1.6, 1.2, 0.002).unwrap();
        assert_eq!((g.ny(), g.nx()), (800, 600));
        assert_eq!((g.nrows(), g.ncols()), (801, 601));
        assert!(g.has_mirror());
        assert_eq!(g.x(g.origin_col()), 0.0);
    }

    #[test]
    fn tiny_grid_has_mirror() {
        let g = make_grid(1.0, 1.0, 0.25).unwrap();
        assert_eq!((g.ny(), g.nx()), (4, 4));
        assert!(g.has_mirror());
        assert_eq!(g.mirror_col(0), 4);
        assert_eq!(g.mirror_col(2), 2);
    }

    #[test]
    fn non_integral_ratio_is_rejected() {
        let err = make_grid(1.6, 1.2, 0.0021).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Config(_)));
        assert!(msg.contains("height H"), "{msg}");
    }

    #[test]
    fn odd_width_has_no_mirror_column() {
        assert!(make_grid(1.0, 0.75, 0.25).is_err());
        let g = GridSpec::new(3, 4, 0.25, 1, 2).unwrap();
        assert!(!g.has_mirror());
        let psi = ComplexField::zeros(g);
        assert!(matches!(mirror_x(&psi), Err(Error::Structural(_))));
    }

    #[test]
    fn norm_of_zero_and_unit_fields() {
        let g = GridSpec::new(1, 1, 0.5, 0, 0).unwrap();
        assert_eq!(norm_squared(&ComplexField::zeros(g)), 0.0);
        let ones = ComplexField::from_fn(g, |_, _| c(1.0, 0.0));
        assert_eq!(norm_squared(&ones), 1.0);
    }

    #[test]
    fn mirror_moves_column_left_of_center_to_right() {
        let g = make_grid(1.0, 1.0, 0.25).unwrap();
        let mut psi = ComplexField::zeros(g);
        psi.values_mut()[g.index(3, 1)] = c(2.0, -1.0);
        let m = psi.mirror_x().unwrap();
        assert_eq!(m.at(3, 3), c(2.0, -1.0));
        assert_eq!(m.at(3, 1), c(0.0, 0.0));
        let sym = ComplexField::from_fn(g, |x, y| c(x * x + y, y));
        assert_eq!(sym.mirror_x().unwrap(), sym);
    }

    #[test]
    fn placed_grid_origin_row() {
        let g = GridSpec::placed(1.6, 1.2, 0.004, -1.12).unwrap();
        assert_eq!(g.origin_row(), 280);
        assert_eq!(g.y(0), -1.12);
        assert!(GridSpec::placed(1.6, 1.2, 0.004, -1.121).is_err());
    }

    fn random_field(vals: Vec<(f64, f64)>) -> ComplexField {
        let g = make_grid(1.0, 1.0, 0.25).unwrap();
        ComplexField::from_values(g, vals.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn mirror_is_an_involution_preserving_norm(
            vals in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 25)
        ) {
            let psi = random_field(vals);
            let m = psi.mirror_x().unwrap();
            prop_assert_eq!(m.mirror_x().unwrap(), psi.clone());
            prop_assert_eq!(norm_squared(&m), norm_squared(&psi));
        }

        #[test]
        fn norm_is_homogeneous(
            vals in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 25),
            a in -3.0f64..3.0, b in -3.0f64..3.0,
        ) {
            let psi = random_field(vals);
            let mut scaled = psi.clone();
            scaled.scale(c(a, b));
            let expect = (a * a + b * b) * norm_squared(&psi);
            prop_assert!((norm_squared(&scaled) - expect).abs() <= 1e-12 * expect.max(1.0));
        }
    }
}

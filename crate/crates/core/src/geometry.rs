//! Billiard barrier potential, slits, and the absorbing layer.
//!
//! A billiard is described by an outline: the intersection of half-planes and
//! disc constraints, each giving a signed inward distance. A node is barrier
//! when its center lies inside the outline within `barrier_width` of the
//! boundary (walls are drawn inward, so the slit side `l` occupies
//! `-width < y <= 0`), or inside an obstacle disc. All predicates depend on
//! `x` only through `|x|`-symmetric arithmetic, which makes symmetric shapes
//! produce bit-exact mirror-symmetric fields.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, GridSpec};

/// Default radius of the Sinai obstacle disc.
pub const DEFAULT_RING_RADIUS: f64 = 0.2;

/// Default arc sagitta for [`BilliardShape::TriangleArc`]; negative bulges
/// into the billiard.
pub const DEFAULT_ARC_SAGITTA: f64 = -0.1;

/// Where the right angle of a triangular billiard sits relative to `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleOrientation {
    /// `l` is a cathetus; right angle at `(-side/2, 0)`.
    RightAngleLeft,
    /// `l` is a cathetus; right angle at `(side/2, 0)`.
    RightAngleRight,
    /// `l` is the hypotenuse; right angle at `(0, -side/2)`. The only
    /// triangle that is symmetric under `x -> -x`.
    HypotenuseOnSlitSide,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BilliardShape {
    Square,
    /// Square with a filled hard disc.
    SinaiRing {
        center: [f64; 2],
        #[serde(default = "default_ring_radius")]
        radius: f64,
    },
    /// Isosceles right triangle.
    RightTriangle {
        orientation: TriangleOrientation,
    },
    /// Right triangle with its hypotenuse replaced by a circular arc of the
    /// given sagitta (positive: bulging outwards).
    TriangleArc {
        orientation: TriangleOrientation,
        #[serde(default = "default_arc_sagitta")]
        sagitta: f64,
    },
}

fn default_ring_radius() -> f64 {
    DEFAULT_RING_RADIUS
}

fn default_arc_sagitta() -> f64 {
    DEFAULT_ARC_SAGITTA
}

/// Billiard shape plus the length of its slit side `l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Billiard {
    pub shape: BilliardShape,
    pub side: f64,
}

impl Default for Billiard {
    fn default() -> Self {
        Self {
            shape: BilliardShape::Square,
            side: 1.0,
        }
    }
}

/// Two slits of width `w` centered at `(∓d/2, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlitSpec {
    pub width: f64,
    pub separation: f64,
    pub open_a: bool,
    pub open_b: bool,
}

impl Default for SlitSpec {
    fn default() -> Self {
        Self {
            width: 0.012,
            separation: 0.1,
            open_a: true,
            open_b: true,
        }
    }
}

/// Node columns of one slit, as signed offsets from the origin column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlitColumns {
    pub first: i64,
    pub last: i64,
    /// Column used as the slit center.
    pub center: i64,
}

impl SlitColumns {
    pub fn contains(&self, offset: i64) -> bool {
        (self.first..=self.last).contains(&offset)
    }

    pub fn count(&self) -> usize {
        (self.last - self.first + 1) as usize
    }
}

impl SlitSpec {
    /// Column sets of slit `a` (left, `x < 0`) and slit `b` (right). Slit `a`
    /// is the exact mirror image of slit `b`.
    pub fn columns(&self, grid: &GridSpec) -> Result<(SlitColumns, SlitColumns)> {
        let delta = grid.spacing();
        if !(self.width > 0.0) {
            return Err(Error::config(format!(
                "slit width must be positive, got {}",
                self.width
            )));
        }
        if !(self.separation > self.width) {
            return Err(Error::config(format!(
                "slit separation {} must exceed the slit width {}",
                self.separation, self.width
            )));
        }
        let count = (self.width / delta).round() as i64;
        if count < 1 {
            return Err(Error::config(format!(
                "slit width {} is below the grid spacing {delta}",
                self.width
            )));
        }
        let first = ((self.separation / 2.0 - self.width / 2.0) / delta).round() as i64;
        if first < 1 {
            return Err(Error::config("slits overlap at x = 0"));
        }
        let b = SlitColumns {
            first,
            last: first + count - 1,
            center: first + count / 2,
        };
        let a = SlitColumns {
            first: -b.last,
            last: -b.first,
            center: -b.center,
        };
        Ok((a, b))
    }

    /// Center node `(row, col)` of slits `a` and `b` on the row `y = 0`.
    pub fn center_nodes(&self, grid: &GridSpec) -> Result<[(usize, usize); 2]> {
        let (a, b) = self.columns(grid)?;
        let row = grid.origin_row();
        let col = |off: i64| {
            grid.col_at_offset(off)
                .ok_or_else(|| Error::config("slit center lies outside the grid"))
        };
        Ok([(row, col(a.center)?), (row, col(b.center)?)])
    }
}

/// Ramp law of the absorber amplitude across the layer depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    Linear,
    #[default]
    Quadratic,
    Cubic,
}

impl Ramp {
    /// Profile value at depth fraction `u ∈ [0, 1]`.
    pub fn eval(self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Ramp::Linear => u,
            Ramp::Quadratic => u * u,
            Ramp::Cubic => u * u * u,
        }
    }
}

/// Real barrier `V_B` and absorber amplitude `V_A` per node.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialField {
    grid: GridSpec,
    barrier: Vec<f64>,
    absorber: Vec<f64>,
}

impl PotentialField {
    /// Potential-free field.
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            barrier: vec![0.0; grid.len()],
            absorber: vec![0.0; grid.len()],
        }
    }

    pub fn from_parts(grid: GridSpec, barrier: Vec<f64>, absorber: Vec<f64>) -> Result<Self> {
        if barrier.len() != grid.len() || absorber.len() != grid.len() {
            return Err(Error::structural("potential arrays do not match the grid"));
        }
        if absorber.iter().any(|&a| !(a >= 0.0)) {
            return Err(Error::config("absorber amplitude must be non-negative"));
        }
        Ok(Self {
            grid,
            barrier,
            absorber,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn barrier(&self) -> &[f64] {
        &self.barrier
    }

    pub fn barrier_mut(&mut self) -> &mut [f64] {
        &mut self.barrier
    }

    pub fn absorber(&self) -> &[f64] {
        &self.absorber
    }

    pub fn max_barrier(&self) -> f64 {
        self.barrier.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn max_absorber(&self) -> f64 {
        self.absorber.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// Replaces the absorber part.
    pub fn with_absorber(mut self, absorber: Vec<f64>) -> Result<Self> {
        if absorber.len() != self.grid.len() {
            return Err(Error::structural("absorber array does not match the grid"));
        }
        self.absorber = absorber;
        Ok(self)
    }

    /// Same barrier, no absorber.
    pub fn without_absorber(&self) -> Self {
        Self {
            grid: self.grid,
            barrier: self.barrier.clone(),
            absorber: vec![0.0; self.grid.len()],
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Constraint {
    /// `normal · p <= offset`; signed distance `offset - normal · p`.
    HalfPlane {
        normal: [f64; 2],
        offset: f64,
    },
    InsideDisc {
        center: [f64; 2],
        radius: f64,
    },
    OutsideDisc {
        center: [f64; 2],
        radius: f64,
    },
}

impl Constraint {
    fn distance(&self, x: f64, y: f64) -> f64 {
        match *self {
            Constraint::HalfPlane { normal, offset } => offset - (normal[0] * x + normal[1] * y),
            Constraint::InsideDisc { center, radius } => radius - disc_dist(center, x, y),
            Constraint::OutsideDisc { center, radius } => disc_dist(center, x, y) - radius,
        }
    }
}

fn disc_dist(c: [f64; 2], x: f64, y: f64) -> f64 {
    let (dx, dy) = (x - c[0], y - c[1]);
    (dx * dx + dy * dy).sqrt()
}

/// Geometric description of a billiard as seen by the grid.
#[derive(Clone, Debug)]
struct Outline {
    constraints: Vec<Constraint>,
    /// Filled hard discs.
    obstacles: Vec<([f64; 2], f64)>,
    /// Bounding box `[x_min, x_max, y_min, y_max]`.
    bbox: [f64; 4],
}

impl Outline {
    fn inward_distance(&self, x: f64, y: f64) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.distance(x, y))
            .fold(f64::INFINITY, f64::min)
    }

    fn in_obstacle(&self, x: f64, y: f64, eps: f64) -> bool {
        self.obstacles
            .iter()
            .any(|&(c, r)| disc_dist(c, x, y) <= r + eps)
    }
}

impl Billiard {
    fn validate(&self, barrier_width: f64) -> Result<()> {
        let s = self.side;
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::config(format!(
                "billiard side must be positive, got {s}"
            )));
        }
        match self.shape {
            BilliardShape::Square | BilliardShape::RightTriangle { .. } => Ok(()),
            BilliardShape::SinaiRing {
                center: [cx, cy],
                radius,
            } => {
                if !(radius > 0.0) {
                    return Err(Error::config(format!(
                        "ring radius must be positive, got {radius}"
                    )));
                }
                let inner = s / 2.0 - barrier_width;
                if cx.abs() + radius >= inner
                    || cy + radius >= -barrier_width
                    || cy - radius <= -s + barrier_width
                {
                    return Err(Error::config(format!(
                        "ring at ({cx}, {cy}) with radius {radius} overlaps the outer wall"
                    )));
                }
                Ok(())
            }
            BilliardShape::TriangleArc {
                orientation,
                sagitta,
            } => {
                if orientation == TriangleOrientation::HypotenuseOnSlitSide {
                    return Err(Error::config(
                        "an arc replaces the hypotenuse, which must not be the slit side",
                    ));
                }
                let half_chord = s * FRAC_1_SQRT_2;
                if sagitta == 0.0 || sagitta.abs() >= half_chord {
                    return Err(Error::config(format!(
                        "arc sagitta must be nonzero and below {half_chord}, got {sagitta}"
                    )));
                }
                Ok(())
            }
        }
    }

    fn outline(&self) -> Outline {
        let s = self.side;
        let h = s / 2.0;
        let r2 = FRAC_1_SQRT_2;
        let plane = |nx: f64, ny: f64, offset: f64| Constraint::HalfPlane {
            normal: [nx, ny],
            offset,
        };
        let top = plane(0.0, 1.0, 0.0);
        let square = vec![
            top,
            plane(1.0, 0.0, h),
            plane(-1.0, 0.0, h),
            plane(0.0, -1.0, s),
        ];
        match self.shape {
            BilliardShape::Square => Outline {
                constraints: square,
                obstacles: vec![],
                bbox: [-h, h, -s, 0.0],
            },
            BilliardShape::SinaiRing { center, radius } => Outline {
                constraints: square,
                obstacles: vec![(center, radius)],
                bbox: [-h, h, -s, 0.0],
            },
            BilliardShape::RightTriangle { orientation } => match orientation {
                TriangleOrientation::HypotenuseOnSlitSide => Outline {
                    constraints: vec![top, plane(r2, -r2, h * r2), plane(-r2, -r2, h * r2)],
                    obstacles: vec![],
                    bbox: [-h, h, -h, 0.0],
                },
                _ => {
                    let (legs, hyp, _) = cathetus_triangle(s, orientation);
                    let mut constraints = legs.to_vec();
                    constraints.push(hyp);
                    Outline {
                        constraints,
                        obstacles: vec![],
                        bbox: [-h, h, -s, 0.0],
                    }
                }
            },
            BilliardShape::TriangleArc {
                orientation,
                sagitta,
            } => {
                let (legs, hyp, out_normal) = cathetus_triangle(s, orientation);
                let mut constraints = legs.to_vec();
                // Chord from the far vertex to the end of `l`; midpoint (0, -s/2).
                let chord = s * std::f64::consts::SQRT_2;
                let radius = (chord * chord / 4.0 + sagitta * sagitta) / (2.0 * sagitta.abs());
                let mid = [0.0, -h];
                let mut bbox = [-h, h, -s, 0.0];
                if sagitta > 0.0 {
                    let off = sagitta - radius;
                    let center = [mid[0] + off * out_normal[0], mid[1] + off * out_normal[1]];
                    constraints.push(Constraint::InsideDisc { center, radius });
                    let apex = [
                        mid[0] + sagitta * out_normal[0],
                        mid[1] + sagitta * out_normal[1],
                    ];
                    bbox = [
                        bbox[0].min(apex[0] - sagitta),
                        bbox[1].max(apex[0] + sagitta),
                        bbox[2].min(apex[1] - sagitta),
                        0.0,
                    ];
                } else {
                    let off = radius + sagitta;
                    let center = [mid[0] + off * out_normal[0], mid[1] + off * out_normal[1]];
                    constraints.push(hyp);
                    constraints.push(Constraint::OutsideDisc { center, radius });
                }
                Outline {
                    constraints,
                    obstacles: vec![],
                    bbox,
                }
            }
        }
    }

    /// Whether the point lies inside the billiard's outer boundary (walls
    /// and obstacles included).
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.outline().inward_distance(x, y) >= 0.0
    }

    /// Per-node flag: node center inside the outer boundary.
    pub fn mask(&self, grid: &GridSpec) -> Vec<bool> {
        let outline = self.outline();
        let eps = node_eps(grid);
        let mut mask = vec![false; grid.len()];
        for i in 0..grid.nrows() {
            let y = grid.y(i);
            for j in 0..grid.ncols() {
                mask[grid.index(i, j)] = outline.inward_distance(grid.x(j), y) >= -eps;
            }
        }
        mask
    }
}

/// Legs (including `l`), hypotenuse half-plane, and the hypotenuse's outward
/// normal of a triangle with `l` as a cathetus.
fn cathetus_triangle(
    s: f64,
    orientation: TriangleOrientation,
) -> ([Constraint; 2], Constraint, [f64; 2]) {
    let h = s / 2.0;
    let r2 = FRAC_1_SQRT_2;
    let sign = match orientation {
        TriangleOrientation::RightAngleRight => -1.0,
        _ => 1.0,
    };
    let top = Constraint::HalfPlane {
        normal: [0.0, 1.0],
        offset: 0.0,
    };
    // Vertical leg at x = -sign·h.
    let leg = Constraint::HalfPlane {
        normal: [-sign, 0.0],
        offset: h,
    };
    // Hypotenuse through (sign·h, 0) and (-sign·h, -s).
    let normal = [sign * r2, -r2];
    let hyp = Constraint::HalfPlane {
        normal,
        offset: h * r2,
    };
    ([top, leg], hyp, normal)
}

fn node_eps(grid: &GridSpec) -> f64 {
    1e-7 * grid.spacing()
}

fn check_barrier_width(barrier_width: f64, grid: &GridSpec) -> Result<()> {
    if !(barrier_width >= 2.0 * grid.spacing() * (1.0 - 1e-9)) {
        return Err(Error::config(format!(
            "barrier width {barrier_width} is thinner than two grid spacings ({})",
            2.0 * grid.spacing()
        )));
    }
    Ok(())
}

/// Barrier potential of a closed billiard (no slits, no absorber).
pub fn build_billiard(
    billiard: &Billiard,
    barrier_height: f64,
    barrier_width: f64,
    grid: &GridSpec,
) -> Result<PotentialField> {
    check_barrier_width(barrier_width, grid)?;
    if !(barrier_height > 0.0 && barrier_height.is_finite()) {
        return Err(Error::config(format!(
            "barrier height must be positive, got {barrier_height}"
        )));
    }
    billiard.validate(barrier_width)?;
    let outline = billiard.outline();
    let [bx0, bx1, by0, by1] = outline.bbox;
    let (gx0, gx1) = (grid.x(0), grid.x(grid.ncols() - 1));
    let (gy0, gy1) = (grid.y(0), grid.y(grid.nrows() - 1));
    if bx0 < gx0 || bx1 > gx1 || by0 < gy0 || by1 > gy1 {
        return Err(Error::config(format!(
            "billiard [{bx0}, {bx1}] x [{by0}, {by1}] does not fit in the region [{gx0}, {gx1}] x [{gy0}, {gy1}]"
        )));
    }

    let eps = node_eps(grid);
    let mut field = PotentialField::zeros(*grid);
    for i in 0..grid.nrows() {
        let y = grid.y(i);
        for j in 0..grid.ncols() {
            let x = grid.x(j);
            let d = outline.inward_distance(x, y);
            let wall = d >= -eps && d < barrier_width - eps;
            if wall || outline.in_obstacle(x, y, eps) {
                field.barrier[grid.index(i, j)] = barrier_height;
            }
        }
    }
    Ok(field)
}

/// Opens the slits on `l` by zeroing `V_B` over the barrier band of `l`.
pub fn carve_slits(
    mut field: PotentialField,
    slits: &SlitSpec,
    billiard: &Billiard,
    barrier_width: f64,
) -> Result<PotentialField> {
    let grid = field.grid;
    let (a, b) = slits.columns(&grid)?;
    let half_l = billiard.side / 2.0;
    let reach = slits.separation / 2.0 + slits.width / 2.0 + slits.width;
    if reach > half_l + node_eps(&grid) {
        return Err(Error::config(format!(
            "slits with separation {} and width {} do not fit on l of length {} away from its corners",
            slits.separation, slits.width, billiard.side
        )));
    }
    let eps = node_eps(&grid);
    let outline = billiard.outline();
    for i in 0..grid.nrows() {
        let y = grid.y(i);
        if !(y <= eps && -y < barrier_width - eps) {
            continue;
        }
        for j in 0..grid.ncols() {
            let off = grid.col_offset(j);
            let open = (slits.open_a && a.contains(off)) || (slits.open_b && b.contains(off));
            if open && outline.inward_distance(grid.x(j), y) >= -eps {
                field.barrier[grid.index(i, j)] = 0.0;
            }
        }
    }
    Ok(field)
}

/// Absorber amplitude: zero in the interior, rising along `ramp` from the
/// inner edge of a layer of width `layer_width` to `strength` on the border
/// of the region.
pub fn build_absorber(
    layer_width: f64,
    strength: f64,
    ramp: Ramp,
    grid: &GridSpec,
) -> Result<Vec<f64>> {
    let delta = grid.spacing();
    if !(layer_width >= 4.0 * delta * (1.0 - 1e-9)) {
        return Err(Error::config(format!(
            "absorber width {layer_width} is below four grid spacings ({})",
            4.0 * delta
        )));
    }
    if !(strength >= 0.0 && strength.is_finite()) {
        return Err(Error::config(format!(
            "absorber strength must be non-negative, got {strength}"
        )));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = vec![0.0; grid.len()];
    for i in 0..grid.nrows() {
        for j in 0..grid.ncols() {
            let cells = j.min(nx - j).min(i).min(ny - i);
            let dist = cells as f64 * delta;
            if dist < layer_width - node_eps(grid) {
                let depth = (layer_width - dist) / layer_width;
                out[grid.index(i, j)] = strength * ramp.eval(depth);
            }
        }
    }
    Ok(out)
}

/// Fails if any node inside the billiard carries absorber amplitude.
pub fn check_absorber_clearance(
    absorber: &[f64],
    billiard: &Billiard,
    grid: &GridSpec,
) -> Result<()> {
    let mask = billiard.mask(grid);
    if let Some(k) = (0..grid.len()).find(|&k| mask[k] && absorber[k] > 0.0) {
        let (i, j) = (k / grid.ncols(), k % grid.ncols());
        return Err(Error::config(format!(
            "absorbing layer overlaps the billiard at ({:.4}, {:.4})",
            grid.x(j),
            grid.y(i)
        )));
    }
    Ok(())
}

/// `Σ|V_B(x, y) − V_B(−x, y)| / Σ V_B`; zero iff the barrier is mirror
/// symmetric.
pub fn potential_symmetry_defect(field: &PotentialField) -> Result<f64> {
    let grid = field.grid;
    grid.require_mirror()?;
    let mirrored = grid::mirror_real(&grid, &field.barrier);
    let total: f64 = field.barrier.iter().map(|v| v.abs()).sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let diff: f64 = field
        .barrier
        .iter()
        .zip(&mirrored)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(diff / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn table_grid() -> GridSpec {
        GridSpec::placed(1.6, 1.2, 0.002, -1.12).unwrap()
    }

    fn coarse_grid() -> GridSpec {
        GridSpec::placed(1.6, 1.2, 0.004, -1.12).unwrap()
    }

    fn square() -> Billiard {
        Billiard::default()
    }

    fn ring(cx: f64, cy: f64) -> Billiard {
        Billiard {
            shape: BilliardShape::SinaiRing {
                center: [cx, cy],
                radius: 0.2,
            },
            side: 1.0,
        }
    }

    fn barrier_rows_at(field: &PotentialField, col: usize) -> Vec<f64> {
        let g = field.grid();
        (0..g.nrows())
            .filter(|&i| field.barrier()[g.index(i, col)] > 0.0)
            .map(|i| g.y(i))
            .collect()
    }

    #[test]
    fn square_walls_are_four_cells_thick() {
        let g = table_grid();
        let v = build_billiard(&square(), 1e6, 0.008, &g).unwrap();
        let ys = barrier_rows_at(&v, g.origin_col());
        // Lower side l and the far side y = -1.
        assert_eq!(ys.len(), 8, "{ys:?}");
        assert!(ys
            .iter()
            .filter(|&&y| y > -0.5)
            .all(|&y| y <= 0.0 && y > -0.008));
        let row = g.origin_row() - 100;
        let cols: Vec<_> = (0..g.ncols())
            .filter(|&j| v.barrier()[g.index(row, j)] > 0.0)
            .collect();
        assert_eq!(cols.len(), 8);
        assert_eq!(v.max_barrier(), 1e6);
        assert_eq!(potential_symmetry_defect(&v).unwrap(), 0.0);
    }

    #[test]
    fn thin_barrier_is_rejected() {
        let g = table_grid();
        assert!(build_billiard(&square(), 1e6, 0.003, &g).is_err());
    }

    #[test]
    fn ring_overlapping_wall_is_rejected() {
        let g = table_grid();
        let b = Billiard {
            shape: BilliardShape::SinaiRing {
                center: [0.35, -0.6],
                radius: 0.2,
            },
            side: 1.0,
        };
        assert!(matches!(
            build_billiard(&b, 1e6, 0.008, &g),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn centered_ring_is_symmetric_and_shifted_rings_are_not() {
        let g = coarse_grid();
        let sym = build_billiard(&ring(0.0, -0.6), 1e6, 0.008, &g).unwrap();
        assert_eq!(potential_symmetry_defect(&sym).unwrap(), 0.0);
        let small =
            potential_symmetry_defect(&build_billiard(&ring(0.01, -0.6), 1e6, 0.008, &g).unwrap())
                .unwrap();
        let large =
            potential_symmetry_defect(&build_billiard(&ring(0.2, -0.7), 1e6, 0.008, &g).unwrap())
                .unwrap();
        assert!(small > 0.0 && small < large, "{small} {large}");
        // The disc is filled: its center is barrier.
        let c = g.index(g.row_nearest(-0.6).unwrap(), g.origin_col());
        assert_eq!(sym.barrier()[c], 1e6);
    }

    #[test]
    fn slit_columns_match_table_values() {
        let g = table_grid();
        let (a, b) = SlitSpec::default().columns(&g).unwrap();
        assert_eq!(b.count(), 6);
        assert_eq!((b.first, b.last, b.center), (22, 27, 25));
        assert_eq!((a.first, a.last, a.center), (-27, -22, -25));
    }

    #[test]
    fn carved_slits_are_mirror_images_inside_the_band() {
        let g = table_grid();
        let bw = 0.008;
        let closed = build_billiard(&square(), 1e6, bw, &g).unwrap();
        let open = carve_slits(closed.clone(), &SlitSpec::default(), &square(), bw).unwrap();
        assert_eq!(potential_symmetry_defect(&open).unwrap(), 0.0);
        let mut changed = vec![];
        for k in 0..g.len() {
            if closed.barrier()[k] != open.barrier()[k] {
                changed.push((g.row_offset(k / g.ncols()), g.col_offset(k % g.ncols())));
            }
        }
        assert_eq!(changed.len(), 2 * 6 * 4);
        assert!(changed
            .iter()
            .all(|&(r, c)| (-3..=0).contains(&r) && (22..=27).contains(&c.abs())));
    }

    #[test]
    fn closing_one_slit_keeps_its_barrier() {
        let g = table_grid();
        let bw = 0.008;
        let closed = build_billiard(&square(), 1e6, bw, &g).unwrap();
        let spec = SlitSpec {
            open_b: false,
            ..SlitSpec::default()
        };
        let v = carve_slits(closed, &spec, &square(), bw).unwrap();
        let row = g.origin_row();
        let a = g.col_at_offset(-25).unwrap();
        let b = g.col_at_offset(25).unwrap();
        assert_eq!(v.barrier()[g.index(row, a)], 0.0);
        assert_eq!(v.barrier()[g.index(row, b)], 1e6);
        assert!(potential_symmetry_defect(&v).unwrap() > 0.0);
    }

    #[test]
    fn slits_outside_l_are_rejected() {
        let g = table_grid();
        let closed = build_billiard(&square(), 1e6, 0.008, &g).unwrap();
        let spec = SlitSpec {
            separation: 1.2,
            ..SlitSpec::default()
        };
        assert!(carve_slits(closed, &spec, &square(), 0.008).is_err());
    }

    #[test]
    fn ramp_values() {
        assert_eq!(Ramp::Quadratic.eval(0.5), 0.25);
        assert_eq!(Ramp::Quadratic.eval(0.0), 0.0);
        assert_eq!(Ramp::Quadratic.eval(1.0), 1.0);
        assert_eq!(Ramp::Linear.eval(0.25), 0.25);
    }

    #[test]
    fn absorber_layer_profile() {
        let g = coarse_grid();
        let va = build_absorber(0.1, 2e4, Ramp::Quadratic, &g).unwrap();
        let mid = g.origin_row();
        assert_eq!(va[g.index(mid, 0)], 2e4);
        assert_eq!(va[g.index(mid, g.origin_col())], 0.0);
        // 12 cells in: depth fraction (0.1 - 0.048)/0.1 = 0.52.
        assert!((va[g.index(mid, 12)] - 0.52f64.powi(2) * 2e4).abs() < 1e-8);
        assert_eq!(va[g.index(mid, 25)], 0.0);
        let mirrored = grid::mirror_real(&g, &va);
        assert_eq!(mirrored, va);
        check_absorber_clearance(&va, &square(), &g).unwrap();
        let too_wide = build_absorber(0.12, 2e4, Ramp::Quadratic, &g).unwrap();
        assert!(check_absorber_clearance(&too_wide, &square(), &g).is_err());
        assert!(build_absorber(0.01, 2e4, Ramp::Quadratic, &g).is_err());
    }

    #[test]
    fn triangles() {
        let g = coarse_grid();
        let sym = Billiard {
            shape: BilliardShape::RightTriangle {
                orientation: TriangleOrientation::HypotenuseOnSlitSide,
            },
            side: 1.0,
        };
        let v = build_billiard(&sym, 1e6, 0.008, &g).unwrap();
        assert_eq!(potential_symmetry_defect(&v).unwrap(), 0.0);
        assert!(sym.contains(0.0, -0.25));
        assert!(!sym.contains(0.3, -0.3));

        let left = Billiard {
            shape: BilliardShape::RightTriangle {
                orientation: TriangleOrientation::RightAngleLeft,
            },
            side: 1.0,
        };
        let v = build_billiard(&left, 1e6, 0.008, &g).unwrap();
        assert!(potential_symmetry_defect(&v).unwrap() > 0.1);
        assert!(left.contains(-0.4, -0.8));
        assert!(!left.contains(0.4, -0.8));

        let right = Billiard {
            shape: BilliardShape::RightTriangle {
                orientation: TriangleOrientation::RightAngleRight,
            },
            side: 1.0,
        };
        let vr = build_billiard(&right, 1e6, 0.008, &g).unwrap();
        assert_eq!(grid::mirror_real(&g, v.barrier()), vr.barrier());
    }

    #[test]
    fn arc_triangle_bulges_as_requested() {
        let g = coarse_grid();
        let inward = Billiard {
            shape: BilliardShape::TriangleArc {
                orientation: TriangleOrientation::RightAngleLeft,
                sagitta: -0.1,
            },
            side: 1.0,
        };
        let outward = Billiard {
            shape: BilliardShape::TriangleArc {
                orientation: TriangleOrientation::RightAngleLeft,
                sagitta: 0.1,
            },
            side: 1.0,
        };
        let plain = Billiard {
            shape: BilliardShape::RightTriangle {
                orientation: TriangleOrientation::RightAngleLeft,
            },
            side: 1.0,
        };
        // Chord midpoint (0, -0.5); outward normal (1, -1)/√2.
        let probe_in = (-0.05, -0.45);
        let probe_out = (0.05, -0.55);
        assert!(
            plain.contains(probe_in.0, probe_in.1) && !plain.contains(probe_out.0, probe_out.1)
        );
        assert!(!inward.contains(probe_in.0, probe_in.1));
        assert!(outward.contains(probe_out.0, probe_out.1));
        for b in [&inward, &outward] {
            assert!(b.contains(-0.45, -0.05));
            build_billiard(b, 1e6, 0.008, &g).unwrap();
        }
        let bad = Billiard {
            shape: BilliardShape::TriangleArc {
                orientation: TriangleOrientation::HypotenuseOnSlitSide,
                sagitta: 0.1,
            },
            side: 1.0,
        };
        assert!(build_billiard(&bad, 1e6, 0.008, &g).is_err());
    }

    #[test]
    fn construction_is_deterministic() {
        let g = coarse_grid();
        let a = build_billiard(&ring(0.2, -0.7), 1e6, 0.008, &g).unwrap();
        let b = build_billiard(&ring(0.2, -0.7), 1e6, 0.008, &g).unwrap();
        assert_eq!(a, b);
    }
}

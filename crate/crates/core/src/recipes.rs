//! Built-in configurations for the standard experiment cases.
//!
//! | case | billiard | k |
//! |------|----------|---|
//! | a | square | (0, 180) |
//! | b | ring at (0, −0.6) | (0, 180) |
//! | c | square | (−113, 140) |
//! | d | ring at (0, −0.6) | (−113, 140) |
//! | e | ring at (0.2, −0.7) | (0, 180) |
//! | f | ring at (0.2, −0.7) | (113, 140) |
//! | g | right triangle, right angle on `l` | (180, 0) |
//! | h | right triangle, hypotenuse on `l` | (0, 180) |
//! | i | square | (−2, 179.99) |
//! | l | ring at (0.01, −0.6) | (0, 180) |
//! | m | ring at (0.2, −0.7), windowed intensity | (0, 180) |

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::geometry::{BilliardShape, TriangleOrientation, DEFAULT_RING_RADIUS};

pub const RECIPE_NAMES: [&str; 11] = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "l", "m"];

/// Window of case `m`, in steps of the standard time step.
pub const CASE_M_WINDOW_STEPS: u64 = 13_000;

/// Window of case `m` as a duration.
pub const CASE_M_WINDOW_TIME: f64 = 1.3e-2;

/// Free-flight time from the packet center to the slit side `l` along `k_y`.
pub fn ballistic_transit_time(config: &ExperimentConfig) -> f64 {
    config.packet.center[1].abs() / config.packet.k[1].abs()
}

/// Case-`m` window in steps of `config`, stretched by the ratio of the
/// measured first-emission time to the ballistic transit time. On coarse
/// grids the lattice group velocity is lower than `‖k‖`, so the packet
/// arrives late and the window has to follow it.
pub fn scaled_window_steps(config: &ExperimentConfig, measured_transit: f64) -> u64 {
    let stretch = measured_transit / ballistic_transit_time(config);
    (CASE_M_WINDOW_TIME * stretch / config.stepper.tau).round() as u64
}

fn ring(cx: f64, cy: f64) -> BilliardShape {
    BilliardShape::SinaiRing {
        center: [cx, cy],
        radius: DEFAULT_RING_RADIUS,
    }
}

/// Configuration of case `name` at standard resolution.
pub fn recipe(name: &str) -> Result<ExperimentConfig> {
    let key = name.trim_start_matches("case_");
    let (shape, k) = match key {
        "a" => (BilliardShape::Square, [0.0, 180.0]),
        "b" => (ring(0.0, -0.6), [0.0, 180.0]),
        "c" => (BilliardShape::Square, [-113.0, 140.0]),
        "d" => (ring(0.0, -0.6), [-113.0, 140.0]),
        "e" => (ring(0.2, -0.7), [0.0, 180.0]),
        "f" => (ring(0.2, -0.7), [113.0, 140.0]),
        "g" => (
            BilliardShape::RightTriangle {
                orientation: TriangleOrientation::RightAngleLeft,
            },
            [180.0, 0.0],
        ),
        "h" => (
            BilliardShape::RightTriangle {
                orientation: TriangleOrientation::HypotenuseOnSlitSide,
            },
            [0.0, 180.0],
        ),
        "i" => (BilliardShape::Square, [-2.0, 179.99]),
        "l" => (ring(0.01, -0.6), [0.0, 180.0]),
        "m" => (ring(0.2, -0.7), [0.0, 180.0]),
        _ => {
            return Err(Error::config(format!(
                "unknown recipe {name:?}; known: {}",
                RECIPE_NAMES.join(", ")
            )))
        }
    };
    let mut c = ExperimentConfig {
        name: format!("case_{key}"),
        ..ExperimentConfig::default()
    };
    c.billiard.shape = shape;
    c.packet.k = k;
    if key == "m" {
        c.stopping.intensity_window_steps = Some(CASE_M_WINDOW_STEPS);
    }
    Ok(c)
}

fn rescale_steps(n: u64, factor: f64) -> u64 {
    (n as f64 / factor).round() as u64
}

/// Same experiment on a grid coarsened by `factor`, with the time step
/// scaled to keep `τ/δ²` fixed up to the barrier limit. Step counts are
/// rescaled so that physical durations are unchanged.
pub fn coarsened(config: &ExperimentConfig, factor: u32) -> ExperimentConfig {
    let f = factor as f64;
    let mut c = config.clone();
    c.grid.spacing *= f;
    // τ·V_B must stay below the stability limit, so τ grows linearly only.
    c.stepper.tau *= f;
    c.stopping.max_steps = rescale_steps(c.stopping.max_steps, f);
    c.stopping.intensity_window_steps = c
        .stopping
        .intensity_window_steps
        .map(|n| rescale_steps(n, f));
    c.name = format!("{}_x{factor}", config.name);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate_config;

    #[test]
    fn every_recipe_builds() {
        for name in RECIPE_NAMES {
            let c = coarsened(&recipe(name).unwrap(), 2);
            let r = validate_config(&c);
            assert!(r.is_valid(), "{name}: {:?}", r.errors);
        }
    }

    #[test]
    fn symmetry_verdicts() {
        let expect = [
            ("a", true),
            ("b", true),
            ("c", false),
            ("d", false),
            ("e", false),
            ("f", false),
            ("g", false),
            ("h", true),
            ("i", false),
            ("l", false),
            ("m", false),
        ];
        for (name, sc) in expect {
            let r = validate_config(&coarsened(&recipe(name).unwrap(), 2));
            assert_eq!(r.sc_satisfied, Some(sc), "{name}");
        }
        // Case g breaks the potential symmetry whatever k is.
        let mut g = coarsened(&recipe("g").unwrap(), 2);
        g.packet.k = [0.0, 180.0];
        let r = validate_config(&g);
        assert!(r.potential_symmetry_defect.unwrap() > 0.0);
        assert_eq!(r.packet_symmetry_defect, Some(0.0));
    }

    #[test]
    fn case_m_window_and_names() {
        let m = recipe("case_m").unwrap();
        assert_eq!(m.stopping.intensity_window_steps, Some(13_000));
        assert_eq!(m.name, "case_m");
        let r = coarsened(&m, 2);
        assert_eq!(r.stopping.intensity_window_steps, Some(6_500));
        assert_eq!(r.grid.spacing, 0.004);
        assert_eq!(r.stepper.tau, 2e-6);
        assert!(recipe("z").is_err());
        let t = ballistic_transit_time(&r);
        assert!((t - 0.25 / 180.0).abs() < 1e-15);
        assert_eq!(scaled_window_steps(&r, t), 6_500);
        assert_eq!(scaled_window_steps(&r, 1.1 * t), 7_150);
    }

    #[test]
    fn shipped_recipe_files_match() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../recipes");
        for name in RECIPE_NAMES {
            let path = dir.join(format!("case_{name}.json"));
            let expected = recipe(name).unwrap();
            if std::env::var_os("TWOSLIT_WRITE_RECIPES").is_some() {
                std::fs::write(&path, expected.to_json_pretty() + "\n").unwrap();
            }
            let shipped = ExperimentConfig::from_file(&path).unwrap();
            assert_eq!(shipped, expected, "{}", path.display());
        }
    }
}

use serde::{Deserialize, Serialize};

use super::{DynamicalSystem, Resolution};
use crate::{Error, Result};

/// Reduces `x` into `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid rounds tiny negative inputs up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Representative of `x - y` on ℝ/ℤ in `[-1/2, 1/2)`.
#[inline]
pub fn signed_circle_diff(x: f64, y: f64) -> f64 {
    let d = frac(x - y);
    if d >= 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// The usual distance on ℝ/ℤ, in `[0, 1/2]`.
#[inline]
pub fn circle_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    let d = if d >= 1.0 { frac(d) } else { d };
    d.min(1.0 - d)
}

/// A point of the circle ℝ/ℤ, stored in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(angle: f64) -> Self {
        Self(frac(angle))
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    pub fn dist(self, other: Self) -> f64 {
        circle_dist(self.0, other.0)
    }
}

/// Rigid rotation `x ↦ x + θ` of the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    theta: f64,
}

impl Rotation {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("rotation angle {theta}")));
        }
        Ok(Self { theta: frac(theta) })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl DynamicalSystem for Rotation {
    type Point = CirclePoint;

    fn distance(&self, x: &CirclePoint, y: &CirclePoint) -> f64 {
        x.dist(*y)
    }

    fn forward(&self, x: &CirclePoint) -> CirclePoint {
        CirclePoint::new(x.0 + self.theta)
    }

    fn inverse(&self, x: &CirclePoint) -> Option<CirclePoint> {
        Some(CirclePoint::new(x.0 - self.theta))
    }

    fn iterate(&self, x: &CirclePoint, k: i64) -> Option<CirclePoint> {
        Some(CirclePoint::new(x.0 + frac(k as f64 * self.theta)))
    }

    fn cheap_iterate(&self) -> bool {
        true
    }

    fn sample(&self, res: &Resolution) -> Result<Vec<CirclePoint>> {
        if res.points == 0 {
            return Err(Error::EmptySample);
        }
        let g = res.points as f64;
        Ok((0..res.points)
            .map(|j| CirclePoint::new(j as f64 / g))
            .collect())
    }

    // Rotations are isometries: every term equals the first.
    fn bowen_capped(&self, x: &CirclePoint, y: &CirclePoint, _n: u64, cap: f64) -> Option<f64> {
        let d = x.dist(*y);
        (d <= cap).then_some(d)
    }

    fn label(&self) -> String {
        format!("rotation:{}", self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_dist_examples() {
        assert!((circle_dist(0.1, 0.9) - 0.2).abs() < 1e-15);
        assert_eq!(circle_dist(0.25, 0.25), 0.0);
        assert_eq!(circle_dist(0.0, 0.5), 0.5);
    }

    #[test]
    fn frac_never_returns_one() {
        assert_eq!(frac(-1e-20), 0.0);
        assert_eq!(frac(3.0), 0.0);
        assert!((frac(-0.25) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn signed_diff_range() {
        assert_eq!(signed_circle_diff(0.0, 0.5), -0.5);
        assert!((signed_circle_diff(0.9, 0.1) + 0.2).abs() < 1e-15);
        assert!((signed_circle_diff(0.1, 0.9) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rotation_iterate_matches_forward() {
        let rot = Rotation::new(0.3).unwrap();
        let x = CirclePoint::new(0.05);
        let mut p = x;
        for _ in 0..7 {
            p = rot.forward(&p);
        }
        assert!(rot.iterate(&x, 7).unwrap().dist(p) < 1e-12);
        let back = rot.iterate(&p, -7).unwrap();
        assert!(back.dist(x) < 1e-12);
    }
}

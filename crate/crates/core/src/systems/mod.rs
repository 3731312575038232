//! Dynamical systems behind one interface.
//!
//! Every system is immutable once built and all operations are pure, so a
//! system can be shared freely between threads.

mod any;
mod circle;
mod finite;
mod product;
mod shift;
mod tower;

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

pub use any::{AnyPoint, AnySystem};
pub use circle::{circle_dist, frac, signed_circle_diff, CirclePoint, Rotation};
pub use finite::FiniteSystem;
pub use product::{product_system, Product};
pub use shift::{
    shift_metric, sturmian_generate, ShiftDistance, ShiftKind, ShiftSystem, SymbolSource,
    SymbolicPoint, SymbolicWord, DEFAULT_SHIFT_WINDOW, GOLDEN_ALPHA, STURMIAN_INDEX_BUDGET,
};
pub use tower::{
    tower_dist, tower_iterate, tower_map, Level, SequenceFamily, TowerPoint, TowerSystem,
};

/// Tolerance for comparing angles and distances built from angles.
pub const ANGLE_TOL: f64 = 1e-9;

/// Resolution for a canonical sampler.
///
/// `points` is the number of points per circle (towers, rotations) or the
/// number of orbit / random points (subshifts). `levels` caps the tower levels
/// included in a sample; other systems ignore it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub points: usize,
    pub levels: u64,
}

impl Resolution {
    pub fn new(points: usize, levels: u64) -> Self {
        Self { points, levels }
    }
}

/// A homeomorphism (or at least a continuous map) of a compact metric space,
/// together with a sampler producing finite subsets at a requested resolution.
pub trait DynamicalSystem: Send + Sync {
    type Point: Clone + Debug + Send + Sync;

    /// The metric of the phase space.
    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    fn forward(&self, x: &Self::Point) -> Self::Point;

    /// `None` when the map has no inverse.
    fn inverse(&self, x: &Self::Point) -> Option<Self::Point>;

    /// `f^k(x)`, `None` when `k < 0` and the system has no inverse.
    fn iterate(&self, x: &Self::Point, k: i64) -> Option<Self::Point> {
        let mut p = x.clone();
        if k >= 0 {
            for _ in 0..k {
                p = self.forward(&p);
            }
        } else {
            for _ in 0..k.unsigned_abs() {
                p = self.inverse(&p)?;
            }
        }
        Some(p)
    }

    /// Whether [`iterate`](Self::iterate) runs in constant time. Bowen
    /// distances then probe iterates out of order to find large terms early.
    fn cheap_iterate(&self) -> bool {
        false
    }

    fn sample(&self, res: &Resolution) -> crate::Result<Vec<Self::Point>>;

    /// Bowen distance `max_{0 <= k < n} d(f^k x, f^k y)`, or `None` as soon as
    /// some term exceeds `cap`. Implementations may use closed forms; the
    /// returned value must agree with term-by-term iteration up to
    /// [`ANGLE_TOL`].
    fn bowen_capped(&self, x: &Self::Point, y: &Self::Point, n: u64, cap: f64) -> Option<f64> {
        crate::bowen::bowen_by_iteration(self, x, y, n, cap)
    }

    /// Short human-readable name, e.g. `tower-power:2`.
    fn label(&self) -> String;
}

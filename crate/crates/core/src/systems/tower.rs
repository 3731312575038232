//! The tower of circles `M = S¹ × ({a_n : n ≥ 1} ∪ {0})` with the max metric
//! and the map `f(x, y) = (x + y, y)`: level `n` is rotated by `a_n`, the base
//! circle (height 0) is fixed pointwise.

use serde::{Deserialize, Serialize};

use super::circle::{circle_dist, frac, signed_circle_diff};
use super::{DynamicalSystem, Resolution};
use crate::{Error, Result};

/// Largest integer exponent evaluated through exact integer powers.
const MAX_INT_EXPONENT: f64 = 64.0;

/// Heights cached per system.
const HEIGHT_CACHE: u64 = 4096;

/// The decreasing sequence `a_n → 0` giving the circle heights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceFamily {
    /// `a_n = e^{-n}`. Heights underflow to `0.0` for `n > 745`.
    Exp,
    /// `a_n = n^{-c}` with `c ≥ 1`.
    Power(f64),
    /// Explicit strictly decreasing positive terms `a_1, a_2, ...`.
    Custom(Vec<f64>),
}

impl SequenceFamily {
    pub fn power(c: f64) -> Result<Self> {
        let fam = Self::Power(c);
        fam.validate()?;
        Ok(fam)
    }

    pub fn custom(terms: Vec<f64>) -> Result<Self> {
        let fam = Self::Custom(terms);
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Exp => Ok(()),
            Self::Power(c) if c.is_finite() && *c >= 1.0 => Ok(()),
            Self::Power(c) => Err(Error::InvalidFamily(format!("power exponent {c} < 1"))),
            Self::Custom(terms) => {
                if terms.is_empty() {
                    return Err(Error::InvalidFamily("empty custom sequence".into()));
                }
                if terms.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
                    return Err(Error::InvalidFamily("custom terms must be positive".into()));
                }
                if terms.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::InvalidFamily(
                        "custom terms must be strictly decreasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Exponent `c` as an integer when the family is an integral power.
    fn integer_exponent(&self) -> Option<u32> {
        match self {
            Self::Power(c) if c.fract() == 0.0 && *c <= MAX_INT_EXPONENT => Some(*c as u32),
            _ => None,
        }
    }

    /// Exact `n^c` for integral `c`, when it fits in 128 bits.
    fn int_power(n: u64, c: u32) -> Option<u128> {
        (n as u128).checked_pow(c)
    }

    /// `a_n` for `n ≥ 1`; `None` outside the family's index range.
    pub fn term(&self, n: u64) -> Option<f64> {
        if n == 0 {
            return None;
        }
        match self {
            Self::Exp => Some((-(n as f64)).exp()),
            Self::Power(c) => match self.integer_exponent().and_then(|e| Self::int_power(n, e)) {
                Some(p) => Some(1.0 / p as f64),
                None => Some((n as f64).powf(-c)),
            },
            Self::Custom(terms) => terms.get(n as usize - 1).copied(),
        }
    }

    /// `N · a_n`, evaluated as a single division `N / n^c` for integral powers.
    pub fn scaled_term(&self, n: u64, big_n: u64) -> Option<f64> {
        if let (Some(e), true) = (self.integer_exponent(), n > 0) {
            if let Some(p) = Self::int_power(n, e) {
                return Some(big_n as f64 / p as f64);
            }
        }
        self.term(n).map(|a| big_n as f64 * a)
    }

    /// Highest valid level, `None` for infinite families.
    pub fn max_level(&self) -> Option<u64> {
        match self {
            Self::Custom(terms) => Some(terms.len() as u64),
            _ => None,
        }
    }

    pub fn is_valid_level(&self, level: Level) -> bool {
        match level {
            Level::Base => true,
            Level::Finite(n) => n >= 1 && self.max_level().is_none_or(|m| n <= m),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Exp => "exp".into(),
            Self::Power(c) => format!("power:{c}"),
            Self::Custom(t) => format!("custom:{}", t.len()),
        }
    }
}

/// Which circle of the tower a point sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Finite(u64),
    Base,
}

/// A point of the tower: an angle in `[0, 1)` and a level. The height is
/// derived from the level and the family, never stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerPoint {
    pub angle: f64,
    pub level: Level,
}

impl TowerPoint {
    pub fn new(angle: f64, level: Level) -> Self {
        Self {
            angle: frac(angle),
            level,
        }
    }

    pub fn base(angle: f64) -> Self {
        Self::new(angle, Level::Base)
    }

    pub fn finite(angle: f64, n: u64) -> Self {
        Self::new(angle, Level::Finite(n))
    }

    /// Height of the point's circle.
    ///
    /// # Panics
    /// If the level is not valid for `fam`.
    pub fn height(&self, fam: &SequenceFamily) -> f64 {
        match self.level {
            Level::Base => 0.0,
            Level::Finite(n) => fam
                .term(n)
                .unwrap_or_else(|| panic!("level {n} not valid for {}", fam.label())),
        }
    }
}

/// `max{dist_S(x₁, x₂), |y₂ − y₁|}`.
pub fn tower_dist(p: &TowerPoint, q: &TowerPoint, fam: &SequenceFamily) -> f64 {
    circle_dist(p.angle, q.angle).max((p.height(fam) - q.height(fam)).abs())
}

pub fn tower_map(p: &TowerPoint, fam: &SequenceFamily) -> TowerPoint {
    TowerPoint::new(p.angle + p.height(fam), p.level)
}

/// `f^k(p)` as one multiply-then-reduce.
pub fn tower_iterate(p: &TowerPoint, k: i64, fam: &SequenceFamily) -> TowerPoint {
    rotate(p, k, p.height(fam))
}

#[inline]
fn rotate(p: &TowerPoint, k: i64, h: f64) -> TowerPoint {
    TowerPoint::new(p.angle + frac(k as f64 * h), p.level)
}

/// The tower homeomorphism for one sequence family.
#[derive(Clone, Debug)]
pub struct TowerSystem {
    family: SequenceFamily,
    heights: Vec<f64>,
}

impl TowerSystem {
    pub fn new(family: SequenceFamily) -> Result<Self> {
        family.validate()?;
        let cap = family.max_level().unwrap_or(HEIGHT_CACHE).min(HEIGHT_CACHE);
        let heights = (1..=cap).map(|n| family.term(n).unwrap()).collect();
        Ok(Self { family, heights })
    }

    pub fn family(&self) -> &SequenceFamily {
        &self.family
    }

    /// Builds a point, checking the level against the family.
    pub fn point(&self, angle: f64, level: Level) -> Result<TowerPoint> {
        if !self.family.is_valid_level(level) {
            let n = match level {
                Level::Finite(n) => n,
                Level::Base => 0,
            };
            return Err(Error::InvalidLevel {
                level: n,
                family: self.family.label(),
            });
        }
        Ok(TowerPoint::new(angle, level))
    }

    #[inline]
    pub fn height(&self, level: Level) -> f64 {
        match level {
            Level::Base => 0.0,
            Level::Finite(n) => match self.heights.get((n as usize).wrapping_sub(1)) {
                Some(h) => *h,
                None => self
                    .family
                    .term(n)
                    .unwrap_or_else(|| panic!("level {n} not valid for {}", self.family.label())),
            },
        }
    }

    /// Sample with `g` equally spaced angles on each of levels `1..=levels`
    /// (clipped to the family) and on the base circle, level-major with the
    /// base circle last.
    pub fn grid_sample(&self, g: usize, levels: u64) -> Result<Vec<TowerPoint>> {
        if g == 0 {
            return Err(Error::EmptySample);
        }
        let top = self.family.max_level().map_or(levels, |m| m.min(levels));
        let gf = g as f64;
        let mut out = Vec::with_capacity(g * (top as usize + 1));
        for lvl in (1..=top)
            .map(Level::Finite)
            .chain(std::iter::once(Level::Base))
        {
            out.extend((0..g).map(|j| TowerPoint::new(j as f64 / gf, lvl)));
        }
        Ok(out)
    }
}

#[inline]
fn circ(t: f64) -> f64 {
    let t = t.abs();
    if t <= 0.5 {
        t
    } else {
        circle_dist(t, 0.0)
    }
}

impl DynamicalSystem for TowerSystem {
    type Point = TowerPoint;

    fn distance(&self, p: &TowerPoint, q: &TowerPoint) -> f64 {
        circle_dist(p.angle, q.angle).max((self.height(p.level) - self.height(q.level)).abs())
    }

    fn forward(&self, p: &TowerPoint) -> TowerPoint {
        TowerPoint::new(p.angle + self.height(p.level), p.level)
    }

    fn inverse(&self, p: &TowerPoint) -> Option<TowerPoint> {
        Some(TowerPoint::new(p.angle - self.height(p.level), p.level))
    }

    fn iterate(&self, p: &TowerPoint, k: i64) -> Option<TowerPoint> {
        Some(rotate(p, k, self.height(p.level)))
    }

    fn cheap_iterate(&self) -> bool {
        true
    }

    fn sample(&self, res: &Resolution) -> Result<Vec<TowerPoint>> {
        self.grid_sample(res.points, res.levels)
    }

    /// Closed form: with `δ` the signed angle difference and `w` the signed
    /// rotation difference, the circle terms are `‖δ + k·w‖`. While the
    /// progression stays inside `[-1/2, 1/2]` the maximum sits at an endpoint.
    /// Progressions crossing a half turn with a large step fall back to
    /// evaluating the terms.
    fn bowen_capped(&self, p: &TowerPoint, q: &TowerPoint, n: u64, cap: f64) -> Option<f64> {
        let (hp, hq) = (self.height(p.level), self.height(q.level));
        let hd = (hp - hq).abs();
        let delta = signed_circle_diff(p.angle, q.angle);
        let first = hd.max(delta.abs());
        if first > cap {
            return None;
        }
        let w = signed_circle_diff(hp, hq);
        let n = n.max(1);
        if w == 0.0 || n == 1 {
            return Some(first);
        }
        let last = delta + (n - 1) as f64 * w;
        if last.abs() <= 0.5 {
            let m = first.max(last.abs());
            return (m <= cap).then_some(m);
        }
        // Last k before the progression leaves [-1/2, 1/2].
        let s = w.signum();
        let k_exit = (((0.5 - s * delta) / w.abs()).floor().max(0.0) as u64).min(n - 1);
        let prefix = first.max(circ(delta + k_exit as f64 * w));
        if prefix > cap || 0.5 - 0.5 * w.abs() > cap {
            return None;
        }
        let mut best = first;
        for k in crate::bowen::probe_order(n) {
            let t = hd.max(circ(frac(delta + k as f64 * w)));
            if t > best {
                best = t;
                if best > cap {
                    return None;
                }
            }
        }
        Some(best)
    }

    fn label(&self) -> String {
        format!("tower-{}", self.family.label())
    }
}

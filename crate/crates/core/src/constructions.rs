//! Closed-form witness sets for the tower and for aperiodic words.
//!
//! For the tower with heights `a_n` and a window of `N` iterates:
//!
//! - `A(N, ε) = P × ({a_n : n ≤ H} ∪ {0})` spans, where `P` is a grid of
//!   `r = ⌊1/ε⌋ + 1` angles and `H = min{n : N·a_n < ε}`.
//! - For `a_n = n^{-c}`, `S(N, ε) = Y × {a_n : n < D}` is separated, where `Y`
//!   holds `r − 1` angles pairwise `ε` apart and `D = (cN/ε)^{1/(c+1)}`.
//!
//! Both are stored lazily as a [`TowerGrid`]: for `Power(1)` the cardinality
//! of `A` reaches billions long before `N` gets large.

use serde::{Deserialize, Serialize};

use crate::bowen::{verify_separated, verify_spanning, SeparationCheck, SpanningCheck};
use crate::systems::{
    DynamicalSystem, Level, SequenceFamily, ShiftSystem, SymbolicPoint, SymbolicWord, TowerPoint,
    TowerSystem,
};
use crate::{Error, Result};

/// Levels above `H` (or `⌈D⌉`) included in canonical verification samples.
pub const SAMPLE_EXTRA_LEVELS: u64 = 5;

/// Largest witness set materialized for verification.
pub const MATERIALIZE_LIMIT: u128 = 4_000_000;

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps = {eps} must be > 0")))
    }
}

fn check_window(big_n: u64) -> Result<()> {
    if big_n == 0 {
        Err(Error::InvalidParameter("N must be positive".into()))
    } else {
        Ok(())
    }
}

/// `⌊1/ε⌋ + 1`.
pub fn grid_size(eps: f64) -> u64 {
    (1.0 / eps).floor() as u64 + 1
}

/// `H = min{n ≥ 1 : N·a_n < ε}`.
///
/// Closed-form candidates (`⌈ln(N/ε)⌉` for `Exp`, `⌈(N/ε)^{1/c}⌉` for powers)
/// are corrected by evaluating the terms on both sides of the boundary.
pub fn threshold_h(big_n: u64, eps: f64, fam: &SequenceFamily) -> Result<u64> {
    check_eps(eps)?;
    check_window(big_n)?;
    fam.validate()?;
    let below = |n: u64| fam.scaled_term(n, big_n).is_some_and(|v| v < eps);
    let ratio = big_n as f64 / eps;
    let candidate = match fam {
        SequenceFamily::Custom(terms) => {
            return (1..=terms.len() as u64)
                .find(|&n| below(n))
                .ok_or(Error::SequenceTooShort { len: terms.len() });
        }
        SequenceFamily::Exp => ratio.ln().ceil(),
        SequenceFamily::Power(c) => ratio.powf(1.0 / c).ceil(),
    };
    let mut h = candidate.max(1.0) as u64;
    while !below(h) {
        h += 1;
    }
    while h > 1 && below(h - 1) {
        h -= 1;
    }
    Ok(h)
}

/// `D = (cN/ε)^{1/(c+1)}`.
pub fn threshold_d(big_n: u64, eps: f64, c: f64) -> f64 {
    (c * big_n as f64 / eps).powf(1.0 / (c + 1.0))
}

/// Product of an angle grid with levels `1..=top_level` (and optionally the
/// base circle), enumerated level-major with the base circle last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerGrid {
    pub angles: Vec<f64>,
    pub top_level: u64,
    pub include_base: bool,
}

impl TowerGrid {
    pub fn level_count(&self) -> u64 {
        self.top_level + u64::from(self.include_base)
    }

    pub fn len(&self) -> u128 {
        self.angles.len() as u128 * self.level_count() as u128
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn levels(&self) -> impl Iterator<Item = Level> + '_ {
        (1..=self.top_level)
            .map(Level::Finite)
            .chain(self.include_base.then_some(Level::Base))
    }

    pub fn iter(&self) -> impl Iterator<Item = TowerPoint> + '_ {
        self.levels()
            .flat_map(move |l| self.angles.iter().map(move |&a| TowerPoint::new(a, l)))
    }

    pub fn materialize(&self) -> Result<Vec<TowerPoint>> {
        if self.len() > MATERIALIZE_LIMIT {
            return Err(Error::TooLarge {
                count: self.len(),
                limit: MATERIALIZE_LIMIT,
            });
        }
        Ok(self.iter().collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstructionKind {
    #[serde(rename = "A")]
    Spanning,
    #[serde(rename = "S")]
    Separated,
    #[serde(rename = "hedlund")]
    Hedlund,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Tower(TowerGrid),
    /// Shift exponents `i`: the witness points are `σ^i` of the base point.
    ShiftIndices(Vec<i64>),
}

/// A closed-form witness set with its predicted size and verification state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub kind: ConstructionKind,
    /// Orbit window `N` (or word length `n` for the Hedlund family).
    pub window: u64,
    pub eps: f64,
    pub system: String,
    pub points: Witness,
    pub predicted_cardinality: u64,
    /// `H` for `A`, `D` for `S`.
    pub threshold: Option<f64>,
    /// Set once a verifier has passed; `false` until then.
    pub verified: bool,
    /// Strict inequality everywhere, when checked.
    pub strict: Option<bool>,
    /// For `S`: every pair of points sharing an angle is strictly separated.
    pub same_angle_strict: Option<bool>,
    /// Top levels removed from `S` after failing strict separation.
    pub levels_trimmed: u64,
    /// Description of the first failure, if any.
    pub failure: Option<String>,
}

impl ConstructionReport {
    pub fn cardinality(&self) -> u128 {
        match &self.points {
            Witness::Tower(g) => g.len(),
            Witness::ShiftIndices(v) => v.len() as u128,
        }
    }

    pub fn grid(&self) -> Option<&TowerGrid> {
        match &self.points {
            Witness::Tower(g) => Some(g),
            Witness::ShiftIndices(_) => None,
        }
    }

    /// Verifies `A` against `sample` with window `N`, recording the outcome.
    pub fn certify_spanning(
        &mut self,
        sys: &TowerSystem,
        sample: &[TowerPoint],
    ) -> Result<SpanningCheck> {
        let set = self.tower_points()?;
        let check = verify_spanning(sys, &set, sample, self.window, self.eps);
        self.verified = check.spans;
        self.strict = Some(check.strict);
        self.failure = check
            .uncovered
            .map(|i| format!("sample point {:?} not covered", sample[i]));
        Ok(check)
    }

    /// Verifies `S` with window `N`: every pair at distance `≥ ε` and every
    /// pair sharing an angle strictly beyond it. When a pair sharing an angle at the top
    /// level fails strict separation, that level is dropped and the check is
    /// repeated.
    pub fn certify_separated(&mut self, sys: &TowerSystem) -> Result<SeparationCheck> {
        loop {
            let grid = self
                .grid()
                .ok_or_else(|| Error::InvalidParameter("not a tower construction".into()))?;
            if grid.top_level <= 1 || self.top_level_strict(sys, grid) {
                break;
            }
            if let Witness::Tower(g) = &mut self.points {
                g.top_level -= 1;
            }
            self.levels_trimmed += 1;
        }
        let set = self.tower_points()?;
        let check = verify_separated(sys, &set, self.window, self.eps);
        let same_angle = check.witness.is_none()
            && check
                .ties
                .iter()
                .all(|&(i, j)| set[i].angle != set[j].angle);
        self.verified = check.separated && same_angle;
        self.strict = Some(check.strict);
        self.same_angle_strict = Some(same_angle);
        self.failure = check.witness.map(|(i, j, d)| {
            format!(
                "{:?} and {:?} at Bowen distance {d} < {}",
                set[i], set[j], self.eps
            )
        });
        Ok(check)
    }

    fn top_level_strict(&self, sys: &TowerSystem, grid: &TowerGrid) -> bool {
        let cap = self.eps + crate::ANGLE_TOL;
        grid.angles.iter().all(|&a| {
            let top = TowerPoint::new(a, Level::Finite(grid.top_level));
            (1..grid.top_level).all(|m| {
                sys.bowen_capped(
                    &top,
                    &TowerPoint::new(a, Level::Finite(m)),
                    self.window,
                    cap,
                )
                .is_none()
            })
        })
    }

    fn tower_points(&self) -> Result<Vec<TowerPoint>> {
        self.grid()
            .ok_or_else(|| Error::InvalidParameter("not a tower construction".into()))?
            .materialize()
    }
}

/// The spanning set `A(N, ε)`, unverified.
pub fn build_a(big_n: u64, eps: f64, fam: &SequenceFamily) -> Result<ConstructionReport> {
    check_eps(eps)?;
    let h = threshold_h(big_n, eps, fam)?;
    let r = grid_size(eps);
    let angles = (0..r).map(|j| j as f64 / r as f64).collect();
    Ok(ConstructionReport {
        kind: ConstructionKind::Spanning,
        window: big_n,
        eps,
        system: format!("tower-{}", fam.label()),
        points: Witness::Tower(TowerGrid {
            angles,
            top_level: h,
            include_base: true,
        }),
        predicted_cardinality: r * (h + 1),
        threshold: Some(h as f64),
        verified: false,
        strict: None,
        same_angle_strict: None,
        levels_trimmed: 0,
        failure: None,
    })
}

/// The separated set `S(N, ε)` for `a_n = n^{-c}`, unverified.
pub fn build_s(big_n: u64, eps: f64, c: f64) -> Result<ConstructionReport> {
    check_eps(eps)?;
    check_window(big_n)?;
    if eps > 0.5 {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} must be at most 1/2"
        )));
    }
    let fam = SequenceFamily::power(c)?;
    let d = threshold_d(big_n, eps, c);
    if d <= 1.0 {
        return Err(Error::EmptyLevelRange { d });
    }
    // integers strictly below D
    let top = d.ceil() as u64 - 1;
    let y = grid_size(eps) - 1;
    let angles = (0..y).map(|j| j as f64 * eps).collect();
    Ok(ConstructionReport {
        kind: ConstructionKind::Separated,
        window: big_n,
        eps,
        system: format!("tower-{}", fam.label()),
        points: Witness::Tower(TowerGrid {
            angles,
            top_level: top,
            include_base: false,
        }),
        predicted_cardinality: y * top,
        threshold: Some(d),
        verified: false,
        strict: None,
        same_angle_strict: None,
        levels_trimmed: 0,
        failure: None,
    })
}

/// Canonical sample for checking `A(N, ε)`: `g` angles on levels
/// `1..=H+5` and on the base circle.
pub fn spanning_sample(
    sys: &TowerSystem,
    big_n: u64,
    eps: f64,
    g: usize,
) -> Result<Vec<TowerPoint>> {
    let h = threshold_h(big_n, eps, sys.family())?;
    sys.grid_sample(g, h + SAMPLE_EXTRA_LEVELS)
}

/// Sample for separated experiments on `Power(c)`: levels `1..=⌈D⌉+5`.
pub fn separated_sample(
    sys: &TowerSystem,
    big_n: u64,
    eps: f64,
    g: usize,
) -> Result<Vec<TowerPoint>> {
    let levels = match sys.family() {
        SequenceFamily::Power(c) => threshold_d(big_n, eps, *c).ceil() as u64,
        fam => threshold_h(big_n, eps, fam)?,
    };
    sys.grid_sample(g, levels + SAMPLE_EXTRA_LEVELS)
}

/// Indices `i_1 < … < i_{n+1}` whose length-`n` windows are pairwise
/// distinct, taken as first occurrences in the word.
pub fn hedlund_separated(word: &SymbolicWord, n: usize) -> Result<Vec<i64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if word.len() < n {
        return Err(Error::RangeTooShort { len: word.len(), n });
    }
    let occ = word.first_occurrences(n);
    if occ.len() < n + 1 {
        return Err(Error::NotEnoughFactors {
            n,
            found: occ.len(),
            needed: n + 1,
        });
    }
    Ok(occ.into_iter().take(n + 1).map(|(i, _)| i).collect())
}

/// Builds the `n + 1` separated orbit points of the system's base word over
/// coordinates `0..range` and verifies them at `(n, 1)`.
pub fn build_hedlund(sys: &ShiftSystem, n: usize, range: usize) -> Result<ConstructionReport> {
    let base = sys
        .base_point()
        .ok_or_else(|| Error::InvalidParameter("system has no base word".into()))?;
    if range == 0 {
        return Err(Error::RangeTooShort { len: 0, n });
    }
    let word = base.window(0, range as i64 - 1);
    let indices = hedlund_separated(&word, n)?;
    let points: Vec<SymbolicPoint> = indices.iter().map(|&i| base.shifted(i)).collect();
    let check = verify_separated(sys, &points, n as u64, 1.0);
    Ok(ConstructionReport {
        kind: ConstructionKind::Hedlund,
        window: n as u64,
        eps: 1.0,
        system: sys.label(),
        predicted_cardinality: n as u64 + 1,
        points: Witness::ShiftIndices(indices),
        threshold: None,
        verified: check.separated,
        strict: Some(check.strict),
        same_angle_strict: None,
        levels_trimmed: 0,
        failure: check
            .witness
            .map(|(i, j, d)| format!("points {i} and {j} at distance {d}")),
    })
}

/// `{x, f^{-1}x, …, f^{-m}x}`.
pub fn backward_orbit_set<S: DynamicalSystem>(
    sys: &S,
    x: &S::Point,
    m: u64,
) -> Result<Vec<S::Point>> {
    let mut out = Vec::with_capacity(m as usize + 1);
    let mut p = x.clone();
    out.push(p.clone());
    for _ in 0..m {
        p = sys.inverse(&p).ok_or(Error::NoInverse)?;
        out.push(p.clone());
    }
    Ok(out)
}

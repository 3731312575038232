//! Count tables and entropy estimates.
//!
//! Polynomial entropy at scale `ε` is estimated by the least-squares slope of
//! `log count` against `log n` over the tail of the table; the topological
//! rate uses `n` in place of `log n`. The `ε → 0` limit is replaced by the
//! maximum over the supplied grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bowen::{greedy_separated, greedy_spanning, CountRecord, Method};
use crate::constructions::{build_a, build_s};
use crate::systems::{DynamicalSystem, SequenceFamily, ShiftKind, ShiftSystem};
use crate::{Error, Result};

pub const DEFAULT_EPS_GRID: [f64; 4] = [0.2, 0.1, 0.05, 0.02];
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// Records whose `eps` is within this distance of a requested value match it.
pub const EPS_MATCH_TOL: f64 = 1e-12;

/// Symbols of the base word read per unit of factor length by [`SymbolicExact`].
pub const COMPLEXITY_RANGE_FACTOR: usize = 20;

/// Produces one count per `(n, eps)` cell.
pub trait Counter: Sync {
    fn method(&self) -> Method;
    fn count(&self, n: u64, eps: f64) -> Result<u64>;
}

impl<C: Counter + ?Sized> Counter for Box<C> {
    fn method(&self) -> Method {
        (**self).method()
    }
    fn count(&self, n: u64, eps: f64) -> Result<u64> {
        (**self).count(n, eps)
    }
}

/// `#A(N, ε)` from the closed form.
#[derive(Clone, Debug)]
pub struct AnalyticA(pub SequenceFamily);

impl Counter for AnalyticA {
    fn method(&self) -> Method {
        Method::ConstructionA
    }
    fn count(&self, n: u64, eps: f64) -> Result<u64> {
        Ok(build_a(n, eps, &self.0)?.predicted_cardinality)
    }
}

/// `#S(N, ε)` for `a_n = n^{-c}` from the closed form.
#[derive(Clone, Copy, Debug)]
pub struct AnalyticS(pub f64);

impl Counter for AnalyticS {
    fn method(&self) -> Method {
        Method::ConstructionS
    }
    fn count(&self, n: u64, eps: f64) -> Result<u64> {
        Ok(build_s(n, eps, self.0)?.predicted_cardinality)
    }
}

/// Exact maximal separated-set sizes on a subshift, from word complexity.
///
/// Two points are `(n, ε)`-separated iff they differ somewhere on
/// `[-j, n-1+j]`, where `j` is the largest index `≤ window` with `2^{-j} ≥ ε`,
/// so the count is the number of factors of length `n + 2j`.
#[derive(Clone, Debug)]
pub struct SymbolicExact(pub ShiftSystem);

impl SymbolicExact {
    /// Radius `j` of the coordinate block that `ε` resolves.
    pub fn radius(&self, eps: f64) -> u32 {
        let mut j = 0;
        while j < self.0.window() && 0.5f64.powi(j as i32 + 1) >= eps {
            j += 1;
        }
        j
    }
}

impl Counter for SymbolicExact {
    fn method(&self) -> Method {
        Method::SymbolicExact
    }
    fn count(&self, n: u64, eps: f64) -> Result<u64> {
        check_eps(eps)?;
        if n == 0 || eps > 1.0 {
            return Ok(1);
        }
        let len = n + 2 * u64::from(self.radius(eps));
        match self.0.kind() {
            ShiftKind::FullShift { symbols, .. } => {
                let len = u32::try_from(len).map_err(|_| Error::Overflow)?;
                u64::from(*symbols).checked_pow(len).ok_or(Error::Overflow)
            }
            ShiftKind::Sturmian { .. } | ShiftKind::Periodic { .. } => {
                let len = len as usize;
                let base = self.0.base_point().expect("base word");
                let range = COMPLEXITY_RANGE_FACTOR * len + COMPLEXITY_RANGE_FACTOR;
                Ok(base.window(0, range as i64 - 1).distinct_factors(len) as u64)
            }
        }
    }
}

/// Count on a product system: the product of the factor counts.
pub struct ProductCounter<A, B>(pub A, pub B);

impl<A: Counter, B: Counter> Counter for ProductCounter<A, B> {
    fn method(&self) -> Method {
        self.0.method()
    }
    fn count(&self, n: u64, eps: f64) -> Result<u64> {
        self.0
            .count(n, eps)?
            .checked_mul(self.1.count(n, eps)?)
            .ok_or(Error::Overflow)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Greedy {
    Separated,
    Spanning,
}

/// Greedy counts on a finite sample chosen per cell by `sampler(n, eps)`.
pub struct GreedyCounter<S, F> {
    sys: S,
    sampler: F,
    kind: Greedy,
}

impl<S, F> GreedyCounter<S, F>
where
    S: DynamicalSystem,
    F: Fn(u64, f64) -> Result<Vec<S::Point>> + Sync,
{
    pub fn separated(sys: S, sampler: F) -> Self {
        Self {
            sys,
            sampler,
            kind: Greedy::Separated,
        }
    }

    pub fn spanning(sys: S, sampler: F) -> Self {
        Self {
            sys,
            sampler,
            kind: Greedy::Spanning,
        }
    }
}

impl<S, F> Counter for GreedyCounter<S, F>
where
    S: DynamicalSystem,
    F: Fn(u64, f64) -> Result<Vec<S::Point>> + Sync,
{
    fn method(&self) -> Method {
        match self.kind {
            Greedy::Separated => Method::GreedySeparated,
            Greedy::Spanning => Method::GreedySpanning,
        }
    }

    fn count(&self, n: u64, eps: f64) -> Result<u64> {
        check_eps(eps)?;
        let sample = (self.sampler)(n, eps)?;
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let picked = match self.kind {
            Greedy::Separated => greedy_separated(&self.sys, &sample, n, eps),
            Greedy::Spanning => greedy_spanning(&self.sys, &sample, n, eps),
        };
        Ok(picked.len() as u64)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps = {eps} must be > 0")))
    }
}

/// `n_0, n_0·r, …` with `steps` terms, rounded to integers.
pub fn geometric_ns(n0: u64, ratio: f64, steps: usize) -> Result<Vec<u64>> {
    if n0 == 0 || ratio.is_nan() || ratio <= 1.0 || steps == 0 {
        return Err(Error::InvalidGrid(format!(
            "n0 = {n0}, ratio = {ratio}, steps = {steps}"
        )));
    }
    let ns: Vec<u64> = (0..steps)
        .map(|k| (n0 as f64 * ratio.powi(k as i32)).round() as u64)
        .collect();
    check_ns(&ns)?;
    Ok(ns)
}

fn check_ns(ns: &[u64]) -> Result<()> {
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid(format!(
            "n values must be positive and strictly increasing: {ns:?}"
        )));
    }
    Ok(())
}

fn check_epss(epss: &[f64]) -> Result<()> {
    if epss.is_empty()
        || epss.iter().any(|e| !(e.is_finite() && *e > 0.0))
        || epss.windows(2).any(|w| w[0] <= w[1])
    {
        return Err(Error::InvalidGrid(format!(
            "eps values must be positive and strictly decreasing: {epss:?}"
        )));
    }
    Ok(())
}

/// One record per cell, ordered by `eps` (outer) then `n`. Cells are
/// computed in parallel.
pub fn count_table<C: Counter + ?Sized>(
    counter: &C,
    ns: &[u64],
    epss: &[f64],
) -> Result<Vec<CountRecord>> {
    check_ns(ns)?;
    check_epss(epss)?;
    let cells: Vec<(u64, f64)> = epss
        .iter()
        .flat_map(|&e| ns.iter().map(move |&n| (n, e)))
        .collect();
    let method = counter.method();
    cells
        .par_iter()
        .map(|&(n, eps)| Ok(CountRecord::new(n, eps, counter.count(n, eps)?, method)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of the residuals.
    pub residual: f64,
    /// `(n_min, n_max)` of the points used.
    pub window: (u64, u64),
    pub points_used: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    /// `log count` against `log n`.
    Polynomial,
    /// `log count` against `n`.
    Topological,
}

fn tail_points(records: &[CountRecord], eps: f64, tail_fraction: f64) -> Result<Vec<(u64, f64)>> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail fraction {tail_fraction} outside (0, 1]"
        )));
    }
    let mut rows: Vec<&CountRecord> = records
        .iter()
        .filter(|r| (r.eps - eps).abs() <= EPS_MATCH_TOL)
        .collect();
    rows.sort_by_key(|r| r.n);
    let keep = (rows.len() as f64 * tail_fraction).ceil() as usize;
    let tail = &rows[rows.len() - keep..];
    if tail.len() < 3 {
        return Err(Error::TooFewPoints { found: tail.len() });
    }
    tail.iter()
        .map(|r| {
            if r.count == 0 {
                Err(Error::ZeroCount { n: r.n, eps: r.eps })
            } else {
                Ok((r.n, (r.count as f64).ln()))
            }
        })
        .collect()
}

/// Ordinary least squares of `ys` on `xs`, summed in index order.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    (slope, intercept, (sse / m).sqrt())
}

fn fit(records: &[CountRecord], eps: f64, tail_fraction: f64, mode: FitMode) -> Result<SlopeFit> {
    let pts = tail_points(records, eps, tail_fraction)?;
    let xs: Vec<f64> = pts
        .iter()
        .map(|&(n, _)| match mode {
            FitMode::Polynomial => (n as f64).ln(),
            FitMode::Topological => n as f64,
        })
        .collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, y)| y).collect();
    let (slope, intercept, residual) = least_squares(&xs, &ys);
    Ok(SlopeFit {
        slope,
        intercept,
        residual,
        window: (pts[0].0, pts[pts.len() - 1].0),
        points_used: pts.len(),
    })
}

/// Slope of `log count` against `log n` over the largest `tail_fraction`
/// of the n-values recorded at `eps`.
pub fn fit_poly_slope(records: &[CountRecord], eps: f64, tail_fraction: f64) -> Result<SlopeFit> {
    fit(records, eps, tail_fraction, FitMode::Polynomial)
}

/// Slope of `log count` against `n`.
pub fn fit_exp_rate(records: &[CountRecord], eps: f64, tail_fraction: f64) -> Result<SlopeFit> {
    fit(records, eps, tail_fraction, FitMode::Topological)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsFit {
    pub eps: f64,
    pub fit: SlopeFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub mode: FitMode,
    pub tail_fraction: f64,
    pub per_eps: Vec<EpsFit>,
    /// Maximum slope over `per_eps`.
    pub headline: f64,
    pub note: String,
}

/// Fits every `eps` in `epss` and takes the maximum slope.
pub fn estimate(
    records: &[CountRecord],
    epss: &[f64],
    mode: FitMode,
    tail_fraction: f64,
) -> Result<EntropyEstimate> {
    check_epss(epss)?;
    let per_eps = epss
        .iter()
        .map(|&eps| {
            Ok(EpsFit {
                eps,
                fit: fit(records, eps, tail_fraction, mode)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let headline = per_eps
        .iter()
        .map(|f| f.fit.slope)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_eps = epss[epss.len() - 1];
    Ok(EntropyEstimate {
        mode,
        tail_fraction,
        per_eps,
        headline,
        note: format!(
            "finite-resolution surrogate: max of tail slopes over eps >= {min_eps}, not the eps -> 0 limit"
        ),
    })
}

/// [`count_table`] followed by [`estimate`].
pub fn eps_sweep<C: Counter + ?Sized>(
    counter: &C,
    ns: &[u64],
    epss: &[f64],
    mode: FitMode,
    tail_fraction: f64,
) -> Result<(Vec<CountRecord>, EntropyEstimate)> {
    let records = count_table(counter, ns, epss)?;
    let est = estimate(&records, epss, mode, tail_fraction)?;
    Ok((records, est))
}

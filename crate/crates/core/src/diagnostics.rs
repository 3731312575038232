//! Recurrence times, distality gaps and word complexity.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::systems::{DynamicalSystem, SymbolSource, SymbolicPoint, SymbolicWord};
use crate::{Error, Result};

/// Least `n` in `1..=m_max` with `d(f^n x, x) < eps`.
pub fn return_time<S: DynamicalSystem>(sys: &S, x: &S::Point, eps: f64, m_max: u64) -> Option<u64> {
    let mut p = x.clone();
    for n in 1..=m_max {
        p = sys.forward(&p);
        if sys.distance(&p, x) < eps {
            return Some(n);
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub eps: f64,
    pub m_bound: u64,
    /// Return time of each sample point, `None` when there is none `≤ m_bound`.
    pub return_times: Vec<Option<u64>>,
    pub all_within: bool,
    /// Index of the first sample point without a return.
    pub first_witness: Option<usize>,
}

/// Applies [`return_time`] with bound `m` to every sample point.
pub fn uniform_recurrence_check<S: DynamicalSystem>(
    sys: &S,
    sample: &[S::Point],
    eps: f64,
    m: u64,
) -> RecurrenceReport {
    let return_times: Vec<Option<u64>> = sample
        .par_iter()
        .map(|x| return_time(sys, x, eps, m))
        .collect();
    let first_witness = return_times.iter().position(Option::is_none);
    RecurrenceReport {
        eps,
        m_bound: m,
        all_within: first_witness.is_none(),
        first_witness,
        return_times,
    }
}

/// `min_{|n| ≤ window} d(f^n x, f^n y)`, an upper estimate of the distality
/// infimum.
pub fn distality_gap<S: DynamicalSystem>(
    sys: &S,
    x: &S::Point,
    y: &S::Point,
    window: u64,
) -> Result<f64> {
    let mut gap = sys.distance(x, y);
    let (mut p, mut q) = (x.clone(), y.clone());
    for _ in 0..window {
        p = sys.forward(&p);
        q = sys.forward(&q);
        gap = gap.min(sys.distance(&p, &q));
    }
    let (mut p, mut q) = (x.clone(), y.clone());
    for _ in 0..window {
        p = sys.inverse(&p).ok_or(Error::NoInverse)?;
        q = sys.inverse(&q).ok_or(Error::NoInverse)?;
        gap = gap.min(sys.distance(&p, &q));
    }
    Ok(gap)
}

/// Number of distinct length-`n` factors in `word`.
pub fn word_complexity(word: &SymbolicWord, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "factor length must be positive".into(),
        ));
    }
    if word.len() < n {
        return Err(Error::RangeTooShort { len: word.len(), n });
    }
    Ok(word.distinct_factors(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MorseHedlund {
    /// `p(n) = p(n+1)` at the recorded `n`.
    EventuallyPeriodic { n: usize },
    /// `p(n) ≥ n + 1` for every tabulated `n`.
    Aperiodic,
    /// Neither holds on the tabulated range.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityProfile {
    /// Length of the word the factors were read from.
    pub range: usize,
    /// `(n, p(n))` for `n = 1..=n_max`.
    pub rows: Vec<(usize, usize)>,
    pub verdict: MorseHedlund,
}

pub fn complexity_profile(word: &SymbolicWord, n_max: usize) -> Result<ComplexityProfile> {
    let rows = (1..=n_max)
        .map(|n| Ok((n, word_complexity(word, n)?)))
        .collect::<Result<Vec<_>>>()?;
    let verdict = if let Some(w) = rows.windows(2).find(|w| w[0].1 == w[1].1) {
        MorseHedlund::EventuallyPeriodic { n: w[0].0 }
    } else if rows.iter().all(|&(n, p)| p > n) {
        MorseHedlund::Aperiodic
    } else {
        MorseHedlund::Inconclusive
    };
    Ok(ComplexityProfile {
        range: word.len(),
        rows,
        verdict,
    })
}

/// Binary point with `x_0 = 0`, `x_k = 1` for `1 ≤ |k| ≤ m` and `0` beyond.
///
/// It has no return within distance 1 in `m` steps, and its backward orbit
/// `{x, σ^{-1}x, …, σ^{-m}x}` is `(m, 1)`-separated: `σ^{-i}x` and `σ^{-i'}x`
/// differ at time `i`, where one reads `x_0` and the other `x_{i-i'}`.
pub fn no_return_witness(m: usize) -> SymbolicPoint {
    let mut symbols = vec![1u8; 2 * m + 1];
    symbols[m] = 0;
    SymbolicPoint::new(
        Arc::new(SymbolSource::Explicit {
            origin: -(m as i64),
            symbols,
            fill: 0,
            alphabet: 2,
        }),
        0,
    )
}

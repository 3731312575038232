//! Two-sided subshifts: symbol sources, finite words and the shift map.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DynamicalSystem, Resolution};
use crate::{Error, Result};

/// `(√5 − 1) / 2`.
pub const GOLDEN_ALPHA: f64 = 0.618_033_988_749_894_8;

/// Sturmian symbols are evaluated in `f64`; indices beyond this bound lose
/// the precision needed to get every floor right.
pub const STURMIAN_INDEX_BUDGET: i64 = 10_000_000;

/// Denominators checked when rejecting nearly rational slopes.
const RATIONAL_MAX_DENOMINATOR: u64 = 1000;
const RATIONAL_TOL: f64 = 1e-9;

/// Default coordinate window of the subshift metric.
pub const DEFAULT_SHIFT_WINDOW: u32 = 32;

/// Rejects slopes outside `(0, 1)` or within `1e-9·q` of some `p/q`, `q ≤ 1000`.
fn check_sturmian_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Sturmian alpha {alpha} outside (0, 1)"
        )));
    }
    for q in 1..=RATIONAL_MAX_DENOMINATOR {
        let x = q as f64 * alpha;
        if (x - x.round()).abs() <= RATIONAL_TOL * q as f64 {
            return Err(Error::NearlyRational {
                alpha,
                q,
                tol: RATIONAL_TOL,
            });
        }
    }
    Ok(())
}

#[inline]
fn sturmian_symbol(alpha: f64, k: i64) -> u8 {
    (((k + 1) as f64 * alpha).floor() - (k as f64 * alpha).floor()) as u8
}

/// Where the coordinates of a symbolic point come from.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolSource {
    /// `s_k = pattern[k mod p]`.
    Periodic(Vec<u8>),
    /// `s_k = ⌊(k+1)α⌋ − ⌊kα⌋`.
    Sturmian(f64),
    /// `symbols[k - origin]` inside the stored window, `fill` outside it.
    Explicit {
        origin: i64,
        symbols: Vec<u8>,
        fill: u8,
        alphabet: u8,
    },
    /// Independent uniform symbols, reproducible from the seed.
    Random { seed: u64, alphabet: u8 },
}

impl SymbolSource {
    pub fn symbol(&self, k: i64) -> u8 {
        match self {
            Self::Periodic(p) => p[k.rem_euclid(p.len() as i64) as usize],
            Self::Sturmian(alpha) => sturmian_symbol(*alpha, k),
            Self::Explicit {
                origin,
                symbols,
                fill,
                ..
            } => {
                let i = k - origin;
                if i >= 0 && (i as usize) < symbols.len() {
                    symbols[i as usize]
                } else {
                    *fill
                }
            }
            Self::Random { seed, alphabet } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos((k as i128 - i64::MIN as i128) as u128);
                (rng.next_u32() % *alphabet as u32) as u8
            }
        }
    }

    pub fn alphabet(&self) -> u8 {
        match self {
            Self::Periodic(p) => p
                .iter()
                .copied()
                .max()
                .unwrap_or(0)
                .saturating_add(1)
                .max(2),
            Self::Sturmian(_) => 2,
            Self::Explicit { alphabet, .. } | Self::Random { alphabet, .. } => *alphabet,
        }
    }

    /// Materializes coordinates `k_lo..=k_hi`.
    pub fn word(&self, k_lo: i64, k_hi: i64) -> SymbolicWord {
        SymbolicWord {
            start: k_lo,
            symbols: (k_lo..=k_hi).map(|k| self.symbol(k)).collect(),
            alphabet: self.alphabet(),
        }
    }
}

/// A finite window `s_start, …, s_{start+len-1}` of a symbol sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicWord {
    start: i64,
    symbols: Vec<u8>,
    alphabet: u8,
}

impl SymbolicWord {
    pub fn new(start: i64, symbols: Vec<u8>, alphabet: u8) -> Result<Self> {
        if alphabet < 2 {
            return Err(Error::InvalidParameter(format!(
                "alphabet size {alphabet} < 2"
            )));
        }
        if let Some(s) = symbols.iter().find(|&&s| s >= alphabet) {
            return Err(Error::InvalidParameter(format!(
                "symbol {s} outside alphabet of size {alphabet}"
            )));
        }
        Ok(Self {
            start,
            symbols,
            alphabet,
        })
    }

    /// Binary word from a string of `0`/`1` characters, starting at index 0.
    pub fn from_binary(s: &str) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidParameter(format!("non-binary symbol {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(0, symbols, 2)
    }

    /// `len` symbols of the periodic extension of `pattern`, from index 0.
    pub fn periodic(pattern: &[u8], len: usize) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::InvalidParameter("empty period".into()));
        }
        let src = SymbolSource::Periodic(pattern.to_vec());
        Self::new(
            0,
            (0..len as i64).map(|k| src.symbol(k)).collect(),
            src.alphabet(),
        )
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// Symbol at absolute index `k`.
    pub fn get(&self, k: i64) -> Option<u8> {
        let i = k.checked_sub(self.start)?;
        usize::try_from(i)
            .ok()
            .and_then(|i| self.symbols.get(i).copied())
    }

    /// Length-`n` factor starting at absolute index `k`.
    pub fn factor_at(&self, k: i64, n: usize) -> Option<&[u8]> {
        let i = usize::try_from(k.checked_sub(self.start)?).ok()?;
        self.symbols.get(i..i.checked_add(n)?)
    }

    /// Distinct length-`n` factors, with the absolute index of each first
    /// occurrence, in order of first occurrence.
    pub fn first_occurrences(&self, n: usize) -> Vec<(i64, &[u8])> {
        if n == 0 || n > self.len() {
            return Vec::new();
        }
        let mut seen = HashSet::new();
        self.symbols
            .windows(n)
            .enumerate()
            .filter(|(_, w)| seen.insert(*w))
            .map(|(i, w)| (self.start + i as i64, w))
            .collect()
    }

    pub fn distinct_factors(&self, n: usize) -> usize {
        if n == 0 || n > self.len() {
            return 0;
        }
        self.symbols.windows(n).collect::<HashSet<_>>().len()
    }
}

impl fmt::Display for SymbolicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// `s_k = ⌊(k+1)α⌋ − ⌊kα⌋` for `k_lo ≤ k ≤ k_hi`.
///
/// `alpha` must lie in `(0, 1)` and stay at least `1e-9·q` away from every
/// `p/q` with `q ≤ 1000`; indices must satisfy `|k| ≤ 10^7`.
pub fn sturmian_generate(alpha: f64, k_lo: i64, k_hi: i64) -> Result<SymbolicWord> {
    check_sturmian_alpha(alpha)?;
    if k_lo > k_hi {
        return Err(Error::InvalidParameter(format!(
            "k_lo {k_lo} > k_hi {k_hi}"
        )));
    }
    for k in [k_lo, k_hi] {
        if k.abs() > STURMIAN_INDEX_BUDGET {
            return Err(Error::PrecisionBudget {
                index: k,
                budget: STURMIAN_INDEX_BUDGET,
            });
        }
    }
    Ok(SymbolSource::Sturmian(alpha).word(k_lo, k_hi))
}

/// A point of a two-sided subshift: coordinate `k` is
/// `source.symbol(offset + k)`.
#[derive(Clone)]
pub struct SymbolicPoint {
    source: Arc<SymbolSource>,
    offset: i64,
}

impl SymbolicPoint {
    pub fn new(source: Arc<SymbolSource>, offset: i64) -> Self {
        Self { source, offset }
    }

    pub fn from_source(source: SymbolSource) -> Self {
        Self::new(Arc::new(source), 0)
    }

    #[inline]
    pub fn coord(&self, k: i64) -> u8 {
        self.source.symbol(self.offset + k)
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn source(&self) -> &Arc<SymbolSource> {
        &self.source
    }

    /// `σ^k` of this point.
    pub fn shifted(&self, k: i64) -> Self {
        Self {
            source: Arc::clone(&self.source),
            offset: self.offset + k,
        }
    }

    /// Coordinates `lo..=hi` of the point.
    pub fn window(&self, lo: i64, hi: i64) -> SymbolicWord {
        let mut w = self.source.word(self.offset + lo, self.offset + hi);
        w.start = lo;
        w
    }
}

impl PartialEq for SymbolicPoint {
    fn eq(&self, other: &Self) -> bool {
        self.offset == other.offset
            && (Arc::ptr_eq(&self.source, &other.source) || self.source == other.source)
    }
}

impl fmt::Debug for SymbolicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolicPoint(offset={}, ", self.offset)?;
        for k in -4..0 {
            write!(f, "{}", self.coord(k))?;
        }
        write!(f, ".")?;
        for k in 0..8 {
            write!(f, "{}", self.coord(k))?;
        }
        write!(f, ")")
    }
}

/// Result of [`shift_metric`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftDistance {
    pub value: f64,
    /// The points agree on every coordinate `|k| ≤ window`; `value` is then 0.
    pub window_limited: bool,
    pub window: u32,
}

/// `2^{-m}` with `m = min{|k| ≤ window : x_k ≠ y_k}`.
pub fn shift_metric(x: &SymbolicPoint, y: &SymbolicPoint, window: u32) -> ShiftDistance {
    let same_sequence = x.offset == y.offset && Arc::ptr_eq(&x.source, &y.source);
    if !same_sequence {
        for m in 0..=window as i64 {
            if x.coord(m) != y.coord(m) || (m > 0 && x.coord(-m) != y.coord(-m)) {
                return ShiftDistance {
                    value: (-(m as f64)).exp2(),
                    window_limited: false,
                    window,
                };
            }
        }
    }
    ShiftDistance {
        value: 0.0,
        window_limited: true,
        window,
    }
}

/// Which subshift a [`ShiftSystem`] lives on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftKind {
    /// Orbit closure of the Sturmian word with slope `alpha`.
    Sturmian { alpha: f64 },
    /// Full shift on `symbols` letters; samples are seeded random sequences.
    FullShift { symbols: u8, seed: u64 },
    /// Orbit of a periodic word.
    Periodic { pattern: Vec<u8> },
}

/// The shift map `σ` on a subshift, with the metric of [`shift_metric`].
#[derive(Clone, Debug)]
pub struct ShiftSystem {
    kind: ShiftKind,
    window: u32,
    base: Option<SymbolicPoint>,
}

impl ShiftSystem {
    pub fn sturmian(alpha: f64) -> Result<Self> {
        check_sturmian_alpha(alpha)?;
        Ok(Self {
            kind: ShiftKind::Sturmian { alpha },
            window: DEFAULT_SHIFT_WINDOW,
            base: Some(SymbolicPoint::from_source(SymbolSource::Sturmian(alpha))),
        })
    }

    pub fn full_shift(symbols: u8, seed: u64) -> Result<Self> {
        if symbols < 2 {
            return Err(Error::InvalidParameter(format!(
                "full shift needs at least 2 symbols, got {symbols}"
            )));
        }
        Ok(Self {
            kind: ShiftKind::FullShift { symbols, seed },
            window: DEFAULT_SHIFT_WINDOW,
            base: None,
        })
    }

    pub fn periodic(pattern: Vec<u8>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::InvalidParameter("empty period".into()));
        }
        Ok(Self {
            base: Some(SymbolicPoint::from_source(SymbolSource::Periodic(
                pattern.clone(),
            ))),
            kind: ShiftKind::Periodic { pattern },
            window: DEFAULT_SHIFT_WINDOW,
        })
    }

    pub fn with_window(mut self, window: u32) -> Self {
        self.window = window;
        self
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn kind(&self) -> &ShiftKind {
        &self.kind
    }

    pub fn alphabet(&self) -> u8 {
        match &self.kind {
            ShiftKind::Sturmian { .. } => 2,
            ShiftKind::FullShift { symbols, .. } => *symbols,
            ShiftKind::Periodic { pattern } => SymbolSource::Periodic(pattern.clone()).alphabet(),
        }
    }

    /// The generating point of a Sturmian or periodic system.
    pub fn base_point(&self) -> Option<&SymbolicPoint> {
        self.base.as_ref()
    }
}

impl DynamicalSystem for ShiftSystem {
    type Point = SymbolicPoint;

    fn distance(&self, x: &SymbolicPoint, y: &SymbolicPoint) -> f64 {
        shift_metric(x, y, self.window).value
    }

    fn forward(&self, x: &SymbolicPoint) -> SymbolicPoint {
        x.shifted(1)
    }

    fn inverse(&self, x: &SymbolicPoint) -> Option<SymbolicPoint> {
        Some(x.shifted(-1))
    }

    fn iterate(&self, x: &SymbolicPoint, k: i64) -> Option<SymbolicPoint> {
        Some(x.shifted(k))
    }

    fn cheap_iterate(&self) -> bool {
        true
    }

    /// Orbit points `σ^i(base)` for `i < points` (Sturmian, periodic up to one
    /// period) or `points` seeded random sequences (full shift).
    fn sample(&self, res: &Resolution) -> Result<Vec<SymbolicPoint>> {
        if res.points == 0 {
            return Err(Error::EmptySample);
        }
        match (&self.kind, &self.base) {
            (ShiftKind::FullShift { symbols, seed }, _) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..res.points)
                    .map(|_| {
                        SymbolicPoint::from_source(SymbolSource::Random {
                            seed: rng.next_u64(),
                            alphabet: *symbols,
                        })
                    })
                    .collect())
            }
            (ShiftKind::Periodic { pattern }, Some(base)) => Ok((0..res.points.min(pattern.len()))
                .map(|i| base.shifted(i as i64))
                .collect()),
            (_, Some(base)) => Ok((0..res.points).map(|i| base.shifted(i as i64)).collect()),
            (_, None) => unreachable!("non-random shift without base point"),
        }
    }

    fn label(&self) -> String {
        match &self.kind {
            ShiftKind::Sturmian { alpha } => format!("sturmian:{alpha}"),
            ShiftKind::FullShift { symbols, .. } => format!("full-shift:{symbols}"),
            ShiftKind::Periodic { pattern } => {
                let p: String = pattern.iter().map(|s| s.to_string()).collect();
                format!("periodic:{p}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_word_from_floor_formula() {
        let w = sturmian_generate(GOLDEN_ALPHA, 0, 4).unwrap();
        assert_eq!(w.symbols(), &[0, 1, 0, 1, 1]);
        let w = sturmian_generate(GOLDEN_ALPHA, 1, 5).unwrap();
        assert_eq!(w.symbols(), &[1, 0, 1, 1, 0]);
        let w = sturmian_generate(GOLDEN_ALPHA, 0, 0).unwrap();
        assert_eq!(w.symbols(), &[0]);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn golden_word_has_two_letters() {
        let w = sturmian_generate(GOLDEN_ALPHA, 0, 99).unwrap();
        assert_eq!(w.distinct_factors(1), 2);
    }

    #[test]
    fn rejects_rational_and_out_of_budget() {
        assert!(matches!(
            sturmian_generate(0.5, 0, 10),
            Err(Error::NearlyRational { q: 2, .. })
        ));
        assert!(matches!(
            sturmian_generate(2.0 / 7.0, 0, 10),
            Err(Error::NearlyRational { q: 7, .. })
        ));
        assert!(sturmian_generate(1.5, 0, 10).is_err());
        assert!(sturmian_generate(GOLDEN_ALPHA, 5, 4).is_err());
        assert!(matches!(
            sturmian_generate(GOLDEN_ALPHA, 0, STURMIAN_INDEX_BUDGET + 1),
            Err(Error::PrecisionBudget { .. })
        ));
        assert!(sturmian_generate(std::f64::consts::SQRT_2 - 1.0, -5, 5).is_ok());
    }

    fn explicit(symbols: &[u8], origin: i64) -> SymbolicPoint {
        SymbolicPoint::from_source(SymbolSource::Explicit {
            origin,
            symbols: symbols.to_vec(),
            fill: 0,
            alphabet: 2,
        })
    }

    #[test]
    fn metric_examples() {
        let x = explicit(&[1], 0);
        let y = explicit(&[0], 0);
        assert_eq!(shift_metric(&x, &y, 8).value, 1.0);

        let d = shift_metric(&x, &x.clone(), 8);
        assert_eq!(d.value, 0.0);
        assert!(d.window_limited);

        let a = explicit(&[1], 3);
        let b = explicit(&[1], -3);
        let z = explicit(&[], 0);
        assert_eq!(shift_metric(&a, &z, 8).value, 0.125);
        assert_eq!(shift_metric(&b, &z, 8).value, 0.125);
        assert!(!shift_metric(&b, &z, 8).window_limited);
        // difference beyond the window is invisible
        let d = shift_metric(&a, &z, 2);
        assert_eq!(d.value, 0.0);
        assert!(d.window_limited);
    }

    #[test]
    fn shift_moves_coordinates() {
        let sys = ShiftSystem::sturmian(GOLDEN_ALPHA).unwrap();
        let x = sys.base_point().unwrap().clone();
        let y = sys.forward(&x);
        for k in -10..10 {
            assert_eq!(y.coord(k), x.coord(k + 1));
        }
        assert_eq!(sys.inverse(&y).unwrap(), x);
    }

    #[test]
    fn random_source_is_reproducible() {
        let s = SymbolSource::Random {
            seed: 7,
            alphabet: 3,
        };
        let a: Vec<u8> = (-20..20).map(|k| s.symbol(k)).collect();
        let b: Vec<u8> = (-20..20).map(|k| s.symbol(k)).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x < 3));
        assert!(a.iter().any(|&x| x != a[0]));
    }

    #[test]
    fn samples() {
        let sys = ShiftSystem::full_shift(2, 1).unwrap();
        let s = sys.sample(&Resolution::new(5, 0)).unwrap();
        assert_eq!(s.len(), 5);
        let p = ShiftSystem::periodic(vec![0, 1]).unwrap();
        assert_eq!(p.sample(&Resolution::new(5, 0)).unwrap().len(), 2);
        assert!(ShiftSystem::full_shift(1, 0).is_err());
    }

    #[test]
    fn word_helpers() {
        let w = SymbolicWord::from_binary("0110").unwrap();
        assert_eq!(w.factor_at(1, 2), Some(&[1u8, 1][..]));
        assert_eq!(w.factor_at(3, 2), None);
        assert_eq!(w.get(-1), None);
        assert_eq!(w.to_string(), "0110");
        let occ = w.first_occurrences(2);
        assert_eq!(occ.len(), 3);
        assert_eq!(occ[2].0, 2);
        assert!(SymbolicWord::new(0, vec![2], 2).is_err());
        let p = SymbolicWord::periodic(&[0, 1], 6).unwrap();
        assert_eq!(p.to_string(), "010101");
    }
}

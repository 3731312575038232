//! Bowen metrics and (n, ε)-separated / (n, ε)-spanning sets.
//!
//! All counts here are relative to a finite sample: a greedy separated set is
//! a lower bound for `s_n(ε)`, a greedy spanning set of the sample an upper
//! bound for the sample's minimal cover. Greedy scans follow sample order, so
//! results do not depend on the number of threads.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::systems::{DynamicalSystem, Resolution, ANGLE_TOL};
use crate::{Error, Result};

/// Kept sets larger than this are scanned in parallel.
const PAR_SCAN_MIN: usize = 512;

/// Largest sample accepted by [`exact_max_separated`].
pub const EXACT_MAX_SAMPLE: usize = 20;

/// Every `k` in `[0, n)` exactly once: `0`, `n − 1`, then odd multiples of
/// decreasing powers of two. Far-apart iterates come first, which lets capped
/// distances bail out early.
pub fn probe_order(n: u64) -> impl Iterator<Item = u64> {
    let n = n.max(1);
    let last = n - 1;
    let top = if last == 0 {
        0
    } else {
        1u64 << (63 - last.leading_zeros())
    };
    let strides = std::iter::successors((top > 0).then_some(top), |&s| (s > 1).then_some(s / 2));
    std::iter::once(0).chain((last > 0).then_some(last)).chain(
        strides
            .flat_map(move |s| (s..n).step_by(2 * s as usize))
            .filter(move |&k| k != last),
    )
}

/// `max_{0 ≤ k < n} d(f^k x, f^k y)` evaluated term by term; `None` once a
/// term exceeds `cap`. `n = 0` is treated as `n = 1`.
pub fn bowen_by_iteration<S: DynamicalSystem + ?Sized>(
    sys: &S,
    x: &S::Point,
    y: &S::Point,
    n: u64,
    cap: f64,
) -> Option<f64> {
    let n = n.max(1);
    let mut best = 0.0f64;
    if sys.cheap_iterate() {
        for k in probe_order(n) {
            let (fx, fy) = (sys.iterate(x, k as i64)?, sys.iterate(y, k as i64)?);
            best = best.max(sys.distance(&fx, &fy));
            if best > cap {
                return None;
            }
        }
    } else {
        let (mut fx, mut fy) = (x.clone(), y.clone());
        for k in 0..n {
            if k > 0 {
                fx = sys.forward(&fx);
                fy = sys.forward(&fy);
            }
            best = best.max(sys.distance(&fx, &fy));
            if best > cap {
                return None;
            }
        }
    }
    Some(best)
}

/// Wraps a system so that Bowen distances are always computed by iterating
/// the map, bypassing any closed form the system provides.
#[derive(Clone, Copy, Debug)]
pub struct PlainIteration<'a, S>(pub &'a S);

impl<S: DynamicalSystem> DynamicalSystem for PlainIteration<'_, S> {
    type Point = S::Point;

    fn distance(&self, x: &S::Point, y: &S::Point) -> f64 {
        self.0.distance(x, y)
    }
    fn forward(&self, x: &S::Point) -> S::Point {
        self.0.forward(x)
    }
    fn inverse(&self, x: &S::Point) -> Option<S::Point> {
        self.0.inverse(x)
    }
    fn iterate(&self, x: &S::Point, k: i64) -> Option<S::Point> {
        self.0.iterate(x, k)
    }
    fn cheap_iterate(&self) -> bool {
        self.0.cheap_iterate()
    }
    fn sample(&self, res: &Resolution) -> Result<Vec<S::Point>> {
        self.0.sample(res)
    }
    fn label(&self) -> String {
        self.0.label()
    }
}

/// Bowen distance over the first `n` iterates.
pub fn bowen_dist<S: DynamicalSystem>(sys: &S, x: &S::Point, y: &S::Point, n: u64) -> f64 {
    sys.bowen_capped(x, y, n, f64::INFINITY)
        .expect("uncapped Bowen distance")
}

/// Greedy (n, ε)-separated subset of `sample`: scans in order and keeps a
/// point iff its Bowen distance to every kept point is `≥ eps`. Returns the
/// kept indices, in sample order.
pub fn greedy_separated<S: DynamicalSystem>(
    sys: &S,
    sample: &[S::Point],
    n: u64,
    eps: f64,
) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    // separated from y iff the capped distance exceeds eps or equals it
    let apart = |x: &S::Point, y: &S::Point| match sys.bowen_capped(x, y, n, eps) {
        None => true,
        Some(d) => d >= eps,
    };
    for (i, x) in sample.iter().enumerate() {
        let ok = if kept.len() >= PAR_SCAN_MIN {
            kept.par_iter().all(|&j| apart(x, &sample[j]))
        } else {
            kept.iter().all(|&j| apart(x, &sample[j]))
        };
        if ok {
            kept.push(i);
        }
    }
    kept
}

/// Greedy set cover of `sample` by Bowen ε-balls (`d ≤ eps`) centred at
/// sample points. Each round picks the point covering the most uncovered
/// points, ties going to the earliest index. Returns the chosen indices in
/// pick order.
pub fn greedy_spanning<S: DynamicalSystem>(
    sys: &S,
    sample: &[S::Point],
    n: u64,
    eps: f64,
) -> Vec<usize> {
    let balls: Vec<Vec<u32>> = (0..sample.len())
        .into_par_iter()
        .map(|i| {
            (0..sample.len())
                .filter(|&j| sys.bowen_capped(&sample[i], &sample[j], n, eps).is_some())
                .map(|j| j as u32)
                .collect()
        })
        .collect();

    let mut covered = vec![false; sample.len()];
    let mut remaining = sample.len();
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = balls
        .iter()
        .enumerate()
        .map(|(i, b)| (b.len(), Reverse(i)))
        .collect();
    let mut picked = Vec::new();

    // Lazy greedy: gains only shrink, so a popped entry whose stored gain is
    // current is the true maximum.
    while remaining > 0 {
        let Some((g, Reverse(i))) = heap.pop() else {
            break;
        };
        let current = balls[i].iter().filter(|&&j| !covered[j as usize]).count();
        if current != g {
            heap.push((current, Reverse(i)));
            continue;
        }
        if current == 0 {
            break;
        }
        for &j in &balls[i] {
            if !covered[j as usize] {
                covered[j as usize] = true;
                remaining -= 1;
            }
        }
        picked.push(i);
    }
    picked
}

/// Outcome of [`verify_separated`]. Indices refer to the verified set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationCheck {
    /// Every distinct pair has Bowen distance `≥ eps − ANGLE_TOL`.
    pub separated: bool,
    /// Every distinct pair has Bowen distance `> eps + ANGLE_TOL`.
    pub strict: bool,
    /// Pairs within `ANGLE_TOL` of `eps`.
    pub ties: Vec<(usize, usize)>,
    /// First failing pair in lexicographic order, with its distance.
    pub witness: Option<(usize, usize, f64)>,
    pub pairs_checked: u64,
}

enum PairVerdict {
    Strict,
    Tie,
    Fail(f64),
}

/// Checks that `set` is (n, ε)-separated: every distinct pair has Bowen
/// distance at least `eps` (up to [`ANGLE_TOL`]), with strictness reported
/// per pair.
pub fn verify_separated<S: DynamicalSystem>(
    sys: &S,
    set: &[S::Point],
    n: u64,
    eps: f64,
) -> SeparationCheck {
    type Row = (Vec<(usize, usize)>, Option<(usize, usize, f64)>);
    let per_row: Vec<Row> = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let mut ties = Vec::new();
            for j in i + 1..set.len() {
                match pair_verdict(sys, &set[i], &set[j], n, eps) {
                    PairVerdict::Strict => {}
                    PairVerdict::Tie => ties.push((i, j)),
                    PairVerdict::Fail(d) => return (ties, Some((i, j, d))),
                }
            }
            (ties, None)
        })
        .collect();

    let witness = per_row.iter().find_map(|(_, w)| *w);
    let ties: Vec<(usize, usize)> = per_row.into_iter().flat_map(|(t, _)| t).collect();
    let len = set.len() as u64;
    SeparationCheck {
        separated: witness.is_none(),
        strict: witness.is_none() && ties.is_empty(),
        ties,
        witness,
        pairs_checked: len * len.saturating_sub(1) / 2,
    }
}

fn pair_verdict<S: DynamicalSystem>(
    sys: &S,
    x: &S::Point,
    y: &S::Point,
    n: u64,
    eps: f64,
) -> PairVerdict {
    match sys.bowen_capped(x, y, n, eps + ANGLE_TOL) {
        None => PairVerdict::Strict,
        Some(d) if d >= eps - ANGLE_TOL => PairVerdict::Tie,
        Some(d) => PairVerdict::Fail(d),
    }
}

/// Outcome of [`verify_spanning`]. Indices refer to the sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanningCheck {
    /// Every sample point is within `eps + ANGLE_TOL` of some set point.
    pub spans: bool,
    /// Every sample point is within `eps − ANGLE_TOL` of some set point.
    pub strict: bool,
    /// Sample points covered only within tolerance of `eps`.
    pub non_strict: Vec<usize>,
    /// First uncovered sample point.
    pub uncovered: Option<usize>,
}

enum Coverage {
    Strict,
    Tie,
    Uncovered,
}

/// Checks that every sample point lies within `eps` of some point of `set`
/// in the Bowen metric over `n` iterates.
///
/// Candidates are those already within `eps` at time 0, tried nearest first.
pub fn verify_spanning<S: DynamicalSystem>(
    sys: &S,
    set: &[S::Point],
    sample: &[S::Point],
    n: u64,
    eps: f64,
) -> SpanningCheck {
    let hi = eps + ANGLE_TOL;
    let lo = eps - ANGLE_TOL;
    let verdicts: Vec<Coverage> = sample
        .par_iter()
        .map(|y| {
            let mut cands: Vec<(f64, usize)> = set
                .iter()
                .enumerate()
                .filter_map(|(i, x)| {
                    let d = sys.distance(x, y);
                    (d <= hi).then_some((d, i))
                })
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut best = Coverage::Uncovered;
            for (_, i) in cands {
                match sys.bowen_capped(&set[i], y, n, hi) {
                    Some(d) if d < lo => return Coverage::Strict,
                    Some(_) => best = Coverage::Tie,
                    None => {}
                }
            }
            best
        })
        .collect();

    let uncovered = verdicts
        .iter()
        .position(|v| matches!(v, Coverage::Uncovered));
    let non_strict: Vec<usize> = verdicts
        .iter()
        .enumerate()
        .filter(|(_, v)| matches!(v, Coverage::Tie))
        .map(|(i, _)| i)
        .collect();
    SpanningCheck {
        spans: uncovered.is_none(),
        strict: uncovered.is_none() && non_strict.is_empty(),
        non_strict,
        uncovered,
    }
}

/// Largest (n, ε)-separated subset of a sample of at most
/// [`EXACT_MAX_SAMPLE`] points, by exhaustive search. Ties go to the
/// lexicographically smallest index set.
pub fn exact_max_separated<S: DynamicalSystem>(
    sys: &S,
    sample: &[S::Point],
    n: u64,
    eps: f64,
) -> Result<Vec<usize>> {
    let m = sample.len();
    if m > EXACT_MAX_SAMPLE {
        return Err(Error::TooLarge {
            count: m as u128,
            limit: EXACT_MAX_SAMPLE as u128,
        });
    }
    // compat[i]: points separated from i
    let mut compat = vec![0u32; m];
    for i in 0..m {
        for j in i + 1..m {
            let apart = match sys.bowen_capped(&sample[i], &sample[j], n, eps) {
                None => true,
                Some(d) => d >= eps,
            };
            if apart {
                compat[i] |= 1 << j;
                compat[j] |= 1 << i;
            }
        }
    }
    let mut best = 0u32;
    for mask in 1u32..(1u32 << m) {
        if mask.count_ones() < best.count_ones() {
            continue;
        }
        let valid = (0..m)
            .filter(|i| mask >> i & 1 == 1)
            .all(|i| mask & !(1 << i) & !compat[i] == 0);
        if valid && mask.count_ones() > best.count_ones() {
            best = mask;
        }
    }
    Ok((0..m).filter(|i| best >> i & 1 == 1).collect())
}

/// How a count was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "greedy-separated")]
    GreedySeparated,
    #[serde(rename = "greedy-spanning")]
    GreedySpanning,
    #[serde(rename = "construction-A")]
    ConstructionA,
    #[serde(rename = "construction-S")]
    ConstructionS,
    #[serde(rename = "symbolic-exact")]
    SymbolicExact,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::GreedySeparated => "greedy-separated",
            Self::GreedySpanning => "greedy-spanning",
            Self::ConstructionA => "construction-A",
            Self::ConstructionS => "construction-S",
            Self::SymbolicExact => "symbolic-exact",
        }
    }

    /// What a count from this method bounds.
    pub fn bound(self) -> Bound {
        match self {
            Self::GreedySeparated | Self::ConstructionS => Bound::LowerOnSeparated,
            Self::GreedySpanning | Self::ConstructionA => Bound::UpperOnSpanning,
            Self::SymbolicExact => Bound::Exact,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bound {
    #[serde(rename = "lower-bound-on-s_n")]
    LowerOnSeparated,
    #[serde(rename = "upper-bound-on-r_n")]
    UpperOnSpanning,
    #[serde(rename = "exact")]
    Exact,
}

impl Bound {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LowerOnSeparated => "lower-bound-on-s_n",
            Self::UpperOnSpanning => "upper-bound-on-r_n",
            Self::Exact => "exact",
        }
    }
}

/// One measured count at `(n, eps)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub n: u64,
    pub eps: f64,
    pub count: u64,
    pub method: Method,
    pub bound: Bound,
}

impl CountRecord {
    /// The bound direction follows from the method.
    pub fn new(n: u64, eps: f64, count: u64, method: Method) -> Self {
        Self {
            n,
            eps,
            count,
            method,
            bound: method.bound(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{
        CirclePoint, FiniteSystem, Level, Rotation, SequenceFamily, TowerPoint, TowerSystem,
    };
    use proptest::prelude::*;

    #[test]
    fn probe_order_is_a_permutation() {
        for n in 0..200u64 {
            let mut ks: Vec<u64> = probe_order(n).collect();
            ks.sort_unstable();
            let expected: Vec<u64> = (0..n.max(1)).collect();
            assert_eq!(ks, expected, "n = {n}");
        }
        let first: Vec<u64> = probe_order(10).take(3).collect();
        assert_eq!(first, vec![0, 9, 8]);
    }

    #[test]
    fn bowen_examples() {
        let rot = Rotation::new(0.1).unwrap();
        let x = CirclePoint::new(0.0);
        let y = CirclePoint::new(0.2);
        assert_eq!(bowen_dist(&rot, &x, &y, 1), rot.distance(&x, &y));
        assert_eq!(bowen_dist(&rot, &x, &x, 17), 0.0);
        assert_eq!(bowen_dist(&rot, &x, &y, 5), 0.2);
        let plain = bowen_by_iteration(&PlainIteration(&rot), &x, &y, 5, f64::INFINITY).unwrap();
        assert!((plain - 0.2).abs() < 1e-12);
    }

    #[test]
    fn bowen_early_exit() {
        let sys = FiniteSystem::cycle(4).unwrap();
        assert_eq!(bowen_by_iteration(&sys, &0, &1, 10, 0.1), None);
        assert_eq!(bowen_by_iteration(&sys, &0, &1, 10, 0.3), Some(0.25));
    }

    #[test]
    fn greedy_separated_examples() {
        let sys = FiniteSystem::equally_spaced(3).unwrap();
        assert_eq!(greedy_separated(&sys, &[0, 1, 2], 1, 0.3), vec![0, 1, 2]);
        assert_eq!(greedy_separated(&sys, &[1, 1, 1], 1, 0.3), vec![0]);
    }

    #[test]
    fn greedy_spanning_examples() {
        let sys = FiniteSystem::equally_spaced(3).unwrap();
        assert_eq!(greedy_spanning(&sys, &[0, 1, 2], 4, 0.5).len(), 1);
        assert_eq!(greedy_spanning(&sys, &[0, 1], 4, 0.2).len(), 2);
    }

    #[test]
    fn greedy_spanning_covers_circle_with_five_or_six_arcs() {
        let rot = Rotation::new(0.0123).unwrap();
        let sample = rot.sample(&Resolution::new(10_000, 0)).unwrap();
        let cover = greedy_spanning(&rot, &sample, 7, 0.1);
        assert!((5..=6).contains(&cover.len()), "{}", cover.len());
        let set: Vec<_> = cover.iter().map(|&i| sample[i]).collect();
        assert!(verify_spanning(&rot, &set, &sample, 7, 0.1).spans);
    }

    #[test]
    fn verify_separated_examples() {
        let sys = FiniteSystem::equally_spaced(4).unwrap();
        let one = verify_separated(&sys, &[2], 3, 0.1);
        assert!(one.separated && one.strict);
        let dup = verify_separated(&sys, &[0, 1, 1], 3, 0.1);
        assert!(!dup.separated);
        assert_eq!(dup.witness.map(|w| (w.0, w.1)), Some((1, 2)));
        let tie = verify_separated(&sys, &[0, 1], 3, 0.25);
        assert!(tie.separated && !tie.strict);
        assert_eq!(tie.ties, vec![(0, 1)]);
    }

    #[test]
    fn verify_spanning_examples() {
        let sys = FiniteSystem::equally_spaced(4).unwrap();
        let s = [0, 1, 2, 3];
        assert!(verify_spanning(&sys, &s, &s, 5, 0.1).strict);
        let empty = verify_spanning(&sys, &[], &s, 5, 0.1);
        assert!(!empty.spans);
        assert_eq!(empty.uncovered, Some(0));
        let tie = verify_spanning(&sys, &[0, 2], &s, 5, 0.25);
        assert!(tie.spans && !tie.strict);
        assert_eq!(tie.non_strict, vec![1, 3]);
    }

    #[test]
    fn exact_oracle_small() {
        let sys = FiniteSystem::equally_spaced(6).unwrap();
        let s: Vec<usize> = (0..6).collect();
        assert_eq!(
            exact_max_separated(&sys, &s, 1, 0.3).unwrap(),
            vec![0, 2, 4]
        );
        let big: Vec<usize> = vec![0; 21];
        assert!(exact_max_separated(&sys, &big, 1, 0.3).is_err());
    }

    #[test]
    fn record_bound_follows_method() {
        assert_eq!(
            CountRecord::new(4, 0.1, 3, Method::GreedySeparated).bound,
            Bound::LowerOnSeparated
        );
        assert_eq!(
            CountRecord::new(4, 0.1, 3, Method::GreedySpanning).bound,
            Bound::UpperOnSpanning
        );
        assert_eq!(
            CountRecord::new(4, 0.1, 3, Method::SymbolicExact).bound,
            Bound::Exact
        );
    }

    fn small_tower_sample() -> impl Strategy<Value = (SequenceFamily, Vec<TowerPoint>)> {
        let fam = prop_oneof![
            Just(SequenceFamily::Exp),
            Just(SequenceFamily::Power(1.0)),
            Just(SequenceFamily::Power(2.0)),
        ];
        let pt = (0u32..40, prop_oneof![Just(0u64), 1u64..12]).prop_map(|(a, l)| {
            let level = if l == 0 {
                Level::Base
            } else {
                Level::Finite(l)
            };
            TowerPoint::new(a as f64 / 40.0, level)
        });
        (fam, proptest::collection::vec(pt, 1..14))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn greedy_separated_verifies_and_spans((fam, sample) in small_tower_sample(),
                                               n in 1u64..60, eps in 0.03f64..0.4) {
            let sys = TowerSystem::new(fam).unwrap();
            let kept = greedy_separated(&sys, &sample, n, eps);
            let set: Vec<_> = kept.iter().map(|&i| sample[i]).collect();
            prop_assert!(verify_separated(&sys, &set, n, eps).separated);
            prop_assert!(verify_spanning(&sys, &set, &sample, n, eps).spans);
        }

        #[test]
        fn greedy_is_a_lower_bound_of_exact((fam, sample) in small_tower_sample(),
                                            n in 1u64..30, eps in 0.03f64..0.4) {
            let sys = TowerSystem::new(fam).unwrap();
            let greedy = greedy_separated(&sys, &sample, n, eps).len();
            let exact = exact_max_separated(&sys, &sample, n, eps).unwrap();
            prop_assert!(greedy <= exact.len());
            let set: Vec<_> = exact.iter().map(|&i| sample[i]).collect();
            prop_assert!(verify_separated(&sys, &set, n, eps).separated);
        }

        #[test]
        fn counts_monotone((fam, sample) in small_tower_sample(),
                           n in 1u64..40, eps in 0.03f64..0.3) {
            let sys = TowerSystem::new(fam).unwrap();
            let sep = |n, e| greedy_separated(&sys, &sample, n, e).len();
            let span = |n, e| greedy_spanning(&sys, &sample, n, e).len();
            prop_assert!(sep(n, eps * 1.5) <= sep(n, eps));
            prop_assert!(sep(n, eps) <= sep(n * 2, eps));
            prop_assert!(span(n, eps * 1.5) <= span(n, eps));
            prop_assert!(span(n, eps) <= span(n * 2, eps));
        }

        #[test]
        fn separated_at_double_eps_fits_in_any_spanning_set((fam, sample) in small_tower_sample(),
                                                            n in 1u64..40, eps in 0.03f64..0.2) {
            let sys = TowerSystem::new(fam).unwrap();
            let cover: Vec<_> = greedy_spanning(&sys, &sample, n, eps).iter().map(|&i| sample[i]).collect();
            prop_assert!(verify_spanning(&sys, &cover, &sample, n, eps).spans);
            let sep: Vec<_> = greedy_separated(&sys, &sample, n, 2.0 * eps + 3.0 * ANGLE_TOL)
                .iter().map(|&i| sample[i]).collect();
            prop_assert!(sep.len() <= cover.len());
        }
    }

    #[test]
    fn greedy_is_thread_count_independent() {
        let sys = TowerSystem::new(SequenceFamily::Power(2.0)).unwrap();
        let sample = sys.grid_sample(200, 30).unwrap();
        let run = |t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .unwrap()
                .install(|| {
                    (
                        greedy_separated(&sys, &sample, 64, 0.1),
                        greedy_spanning(&sys, &sample[..2000], 64, 0.1),
                    )
                })
        };
        assert_eq!(run(1), run(4));
    }
}

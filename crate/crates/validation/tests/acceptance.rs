//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::time::{Duration, Instant};

use polyent::bowen::Method;
use polyent::bowen::{verify_separated, verify_spanning, CountRecord};
use polyent::constructions::{
    backward_orbit_set, build_a, build_hedlund, build_s, separated_sample, spanning_sample,
};
use polyent::diagnostics::{no_return_witness, return_time, uniform_recurrence_check};
use polyent::estimation::{
    count_table, eps_sweep, fit_exp_rate, fit_poly_slope, AnalyticA, AnalyticS, FitMode,
    GreedyCounter, ProductCounter, SymbolicExact, DEFAULT_EPS_GRID, DEFAULT_TAIL_FRACTION,
};
use polyent::systems::{
    product_system, CirclePoint, Rotation, SequenceFamily, ShiftSystem, TowerSystem, GOLDEN_ALPHA,
};
use polyent_cli::{cmd_estimate, with_threads, Config, Settings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pow2(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 1u64 << k).collect()
}

/// The grid values are `1/k` for these `k`.
const INV_EPS: [u64; 4] = [5, 10, 20, 50];

/// `H` by exact integer arithmetic, for `eps = 1/k`: the least `n` with
/// `n^c > kN` (powers) or `n > ln(kN)` (exponential).
fn h_oracle(fam: &SequenceFamily, big_n: u64, k: u64) -> u64 {
    let target = (k * big_n) as u128;
    match fam {
        SequenceFamily::Exp => (target as f64).ln().floor() as u64 + 1,
        SequenceFamily::Power(c) => {
            let c = *c as u32;
            let mut n = ((target as f64).powf(1.0 / c as f64).floor() as u128).max(1);
            while n > 1 && (n - 1).pow(c) > target {
                n -= 1;
            }
            while n.pow(c) <= target {
                n += 1;
            }
            n as u64
        }
        SequenceFamily::Custom(_) => unreachable!(),
    }
}

fn families() -> [SequenceFamily; 4] {
    [
        SequenceFamily::Exp,
        SequenceFamily::Power(1.0),
        SequenceFamily::Power(2.0),
        SequenceFamily::Power(3.0),
    ]
}

fn criterion_1() -> Outcome {
    let mut cases = 0;
    for fam in &families() {
        for e in 1..=6 {
            let big_n = 10u64.pow(e);
            for k in INV_EPS {
                let eps = 1.0 / k as f64;
                let a = build_a(big_n, eps, fam).map_err(|e| e.to_string())?;
                let expected = (k + 1) as u128 * (h_oracle(fam, big_n, k) + 1) as u128;
                ensure(a.cardinality() == expected, || {
                    format!(
                        "{fam:?} N={big_n} eps={eps}: #A = {} expected {expected}",
                        a.cardinality()
                    )
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (family, N, eps) cases"))
}

fn criterion_2() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut cases = 0;
    for fam in [SequenceFamily::Exp, SequenceFamily::Power(2.0)] {
        let sys = TowerSystem::new(fam.clone()).map_err(|e| e.to_string())?;
        for big_n in [10, 100, 1000] {
            for eps in [0.2, 0.1, 0.05] {
                let a = build_a(big_n, eps, &fam).map_err(|e| e.to_string())?;
                let set = a
                    .grid()
                    .expect("tower grid")
                    .materialize()
                    .map_err(|e| e.to_string())?;
                let sample = spanning_sample(&sys, big_n, eps, 2000).map_err(|e| e.to_string())?;
                let check = verify_spanning(&sys, &set, &sample, big_n, eps);
                ensure(check.spans && check.strict, || {
                    format!(
                        "{fam:?} N={big_n} eps={eps}: spans {} strict {} uncovered {:?}",
                        check.spans, check.strict, check.uncovered
                    )
                })?;
                worst = worst.min(sample.len() as f64);
                cases += 1;
            }
        }
    }
    Ok(format!(
        "{cases} cases strictly spanning, samples >= {worst} points"
    ))
}

fn criterion_3() -> Outcome {
    let mut cases = 0;
    let mut non_strict_pairs = 0;
    for c in [1.0, 2.0, 3.0] {
        let sys = TowerSystem::new(SequenceFamily::Power(c)).map_err(|e| e.to_string())?;
        for big_n in [100, 1000, 10_000] {
            for eps in [0.2, 0.1] {
                let mut s = build_s(big_n, eps, c).map_err(|e| e.to_string())?;
                let check = s.certify_separated(&sys).map_err(|e| e.to_string())?;
                ensure(s.verified && s.same_angle_strict == Some(true), || {
                    format!(
                        "c={c} N={big_n} eps={eps}: separated {} same-angle strict {:?} ({:?})",
                        check.separated, s.same_angle_strict, s.failure
                    )
                })?;
                ensure(s.levels_trimmed == 0, || {
                    format!(
                        "c={c} N={big_n} eps={eps}: {} levels trimmed",
                        s.levels_trimmed
                    )
                })?;
                non_strict_pairs += check.ties.len();
                cases += 1;
            }
        }
    }
    Ok(format!(
        "{cases} cases; all pairs >= eps, same-angle pairs > eps; {non_strict_pairs} distinct-angle pairs at exactly eps"
    ))
}

fn fit_each(
    records: &[CountRecord],
    epss: &[f64],
    ok: impl Fn(f64) -> bool,
    what: &str,
) -> Result<Vec<f64>, String> {
    let mut slopes = Vec::new();
    for &eps in epss {
        let f = fit_poly_slope(records, eps, DEFAULT_TAIL_FRACTION).map_err(|e| e.to_string())?;
        ensure(ok(f.slope), || {
            format!("{what} eps={eps}: slope {}", f.slope)
        })?;
        slopes.push(f.slope);
    }
    Ok(slopes)
}

fn fmt_slopes(s: &[f64]) -> String {
    s.iter()
        .map(|x| format!("{x:.4}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn criterion_4() -> Outcome {
    let ns = pow2(10, 24);
    let t = count_table(&AnalyticA(SequenceFamily::Exp), &ns, &DEFAULT_EPS_GRID)
        .map_err(|e| e.to_string())?;
    let slopes: Vec<f64> = DEFAULT_EPS_GRID
        .iter()
        .map(|&eps| fit_poly_slope(&t, eps, DEFAULT_TAIL_FRACTION).map(|f| f.slope))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let detail = format!("Exp slopes over eps grid: [{}]", fmt_slopes(&slopes));
    if slopes.iter().all(|&s| s <= 0.05) {
        Ok(detail)
    } else {
        Err(format!("{detail}, bound 0.05"))
    }
}

fn criterion_5() -> Outcome {
    let ns = pow2(10, 24);
    let mut parts = Vec::new();
    for c in [1.0f64, 2.0, 3.0] {
        let upper = 1.0 / c;
        let lower = 1.0 / (c + 1.0);
        let t = count_table(&AnalyticA(SequenceFamily::Power(c)), &ns, &DEFAULT_EPS_GRID)
            .map_err(|e| e.to_string())?;
        let a = fit_each(
            &t,
            &DEFAULT_EPS_GRID,
            |s| (s - upper).abs() <= 0.03,
            &format!("#A c={c}"),
        )?;
        let t = count_table(&AnalyticS(c), &ns, &DEFAULT_EPS_GRID).map_err(|e| e.to_string())?;
        let s = fit_each(
            &t,
            &DEFAULT_EPS_GRID,
            |s| (s - lower).abs() <= 0.03,
            &format!("#S c={c}"),
        )?;

        let sys = TowerSystem::new(SequenceFamily::Power(c)).map_err(|e| e.to_string())?;
        let sampler_sys = sys.clone();
        let greedy = GreedyCounter::separated(sys, move |n, eps| {
            separated_sample(&sampler_sys, n, eps, 1000)
        });
        let t = count_table(&greedy, &pow2(6, 12), &[0.1]).map_err(|e| e.to_string())?;
        let g = fit_each(
            &t,
            &[0.1],
            |s| s >= lower - 0.1 && s <= upper + 0.1,
            &format!("greedy c={c}"),
        )?;
        parts.push(format!(
            "c={c}: A [{}] S [{}] greedy {:.4}",
            fmt_slopes(&a),
            fmt_slopes(&s),
            g[0]
        ));
    }
    Ok(parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    for alpha in [GOLDEN_ALPHA, std::f64::consts::SQRT_2 - 1.0] {
        let sys = ShiftSystem::sturmian(alpha).map_err(|e| e.to_string())?;
        let exact = SymbolicExact(sys.clone());
        let ns: Vec<u64> = (1..=64).collect();
        let t = count_table(&exact, &ns, &[1.0]).map_err(|e| e.to_string())?;
        if let Some(r) = t.iter().find(|r| r.count != r.n + 1) {
            return Err(format!("alpha={alpha}: count {} at n={}", r.count, r.n));
        }
        let (_, est) = eps_sweep(
            &exact,
            &pow2(4, 12),
            &DEFAULT_EPS_GRID,
            FitMode::Polynomial,
            DEFAULT_TAIL_FRACTION,
        )
        .map_err(|e| e.to_string())?;
        ensure((0.95..=1.05).contains(&est.headline), || {
            format!("alpha={alpha}: headline {}", est.headline)
        })?;
        for n in 1..=64usize {
            let r = build_hedlund(&sys, n, 20 * n + 20).map_err(|e| e.to_string())?;
            ensure(r.verified && r.cardinality() == n as u128 + 1, || {
                format!(
                    "alpha={alpha} n={n}: verified {} size {}",
                    r.verified,
                    r.cardinality()
                )
            })?;
        }
        parts.push(format!("alpha={alpha:.6}: headline {:.4}", est.headline));
    }
    Ok(parts.join("; "))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid: [f64; 4] = [0.5, 0.25, 0.1, 0.05];
    for _ in 0..100 {
        let theta: f64 = rng.gen();
        let x: f64 = rng.gen();
        let rot = Rotation::new(theta).map_err(|e| e.to_string())?;
        for eps in grid {
            let m = (1.0 / eps).ceil() as u64;
            ensure(
                return_time(&rot, &CirclePoint::new(x), eps, m).is_some(),
                || format!("theta={theta} x={x} eps={eps}: no return within {m}"),
            )?;
        }
    }
    let shift = ShiftSystem::full_shift(2, 0).map_err(|e| e.to_string())?;
    for m in 1..=32u64 {
        let x = no_return_witness(m as usize);
        let report = uniform_recurrence_check(&shift, std::slice::from_ref(&x), 1.0, m);
        ensure(!report.all_within, || format!("m={m}: witness returns"))?;
        let set = backward_orbit_set(&shift, &x, m).map_err(|e| e.to_string())?;
        let check = verify_separated(&shift, &set, m, 1.0);
        ensure(set.len() as u64 == m + 1 && check.separated, || {
            format!("m={m}: {} points, separated {}", set.len(), check.separated)
        })?;
    }
    Ok("400 rotation cases return within ceil(1/eps); m = 1..32 backward orbits separated".into())
}

fn criterion_8() -> Outcome {
    let (big_n, eps, c) = (100, 0.1, 2.0);
    let sys = TowerSystem::new(SequenceFamily::Power(c)).map_err(|e| e.to_string())?;
    let mut s = build_s(big_n, eps, c).map_err(|e| e.to_string())?;
    s.certify_separated(&sys).map_err(|e| e.to_string())?;
    ensure(s.verified, || {
        format!("factor S not verified: {:?}", s.failure)
    })?;
    let factor = s
        .grid()
        .expect("tower grid")
        .materialize()
        .map_err(|e| e.to_string())?;
    let prod = product_system(sys.clone(), sys);
    let points: Vec<_> = factor
        .iter()
        .flat_map(|p| factor.iter().map(move |q| (*p, *q)))
        .collect();
    ensure(points.len() == factor.len() * factor.len(), || {
        "cardinality".into()
    })?;
    let check = verify_separated(&prod, &points, big_n, eps);
    ensure(check.separated, || {
        format!("product not separated: {:?}", check.witness)
    })?;

    let counter = ProductCounter(AnalyticS(c), AnalyticS(c));
    let (_, est) = eps_sweep(
        &counter,
        &pow2(10, 24),
        &DEFAULT_EPS_GRID,
        FitMode::Polynomial,
        DEFAULT_TAIL_FRACTION,
    )
    .map_err(|e| e.to_string())?;
    let bound = 2.0 / 3.0 - 0.05;
    ensure(est.headline >= bound, || {
        format!("product headline {} < {bound}", est.headline)
    })?;
    Ok(format!(
        "{} x {} = {} points separated; product headline {:.4}",
        factor.len(),
        factor.len(),
        points.len(),
        est.headline
    ))
}

fn synthetic(ns: &[u64], f: impl Fn(u64) -> u64) -> Vec<CountRecord> {
    ns.iter()
        .map(|&n| CountRecord::new(n, 0.1, f(n), Method::GreedySeparated))
        .collect()
}

fn criterion_9() -> Outcome {
    let ns = pow2(8, 16);
    let mut worst: f64 = 0.0;
    for s in [0.0, 0.25, 0.5, 1.0, 2.0] {
        for c in [1.0, 3.7, 250.0] {
            let r = synthetic(&ns, |n| (c * (n as f64).powf(s)).round() as u64);
            let f = fit_poly_slope(&r, 0.1, DEFAULT_TAIL_FRACTION).map_err(|e| e.to_string())?;
            ensure((f.slope - s).abs() <= 0.02, || {
                format!("s={s} C={c}: slope {}", f.slope)
            })?;
            worst = worst.max((f.slope - s).abs());
        }
    }
    let r = synthetic(&(4..=16).collect::<Vec<_>>(), |n| 1 << n);
    let f = fit_exp_rate(&r, 0.1, DEFAULT_TAIL_FRACTION).map_err(|e| e.to_string())?;
    let err = (f.slope - std::f64::consts::LN_2).abs();
    ensure(err <= 1e-9, || {
        format!("rate {} off ln 2 by {err}", f.slope)
    })?;
    Ok(format!("max slope error {worst:.2e}; rate error {err:.1e}"))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let max = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let configs = [
        "system = tower-power:2\nmethod = greedy\nn0 = 16\nsteps = 5\neps = 0.2,0.1\n",
        "system = sturmian\nn0 = 16\nsteps = 6\n",
        "system = tower-exp\nn0 = 1024\nsteps = 10\n",
    ];
    for (i, text) in configs.iter().enumerate() {
        let conf = dir.path().join(format!("exp{i}.conf"));
        std::fs::write(&conf, text).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for (run, threads) in [1, 1, max, max].into_iter().enumerate() {
            let out = dir.path().join(format!("out{i}-{run}"));
            let config = Config::resolve(Settings {
                config: Some(conf.clone()),
                out: Some(out.clone()),
                ..Settings::default()
            })
            .map_err(|e| e.to_string())?;
            with_threads(Some(threads), || cmd_estimate(&config)).map_err(|e| e.to_string())?;
            let read = |f: &str| std::fs::read(out.join(f)).map_err(|e| e.to_string());
            outputs.push((read("counts.csv")?, read("fits.json")?));
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || {
            format!("config {i}: outputs differ between runs")
        })?;
    }
    Ok(format!(
        "{} configs byte-identical across 2 runs at 1 and {max} threads",
        configs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            1,
            "cardinality identity",
            Duration::from_secs(1),
            criterion_1,
        ),
        (
            2,
            "spanning certification",
            Duration::from_secs(120),
            criterion_2,
        ),
        (
            3,
            "separated certification",
            Duration::from_secs(60),
            criterion_3,
        ),
        (
            4,
            "vanishing-entropy slope",
            Duration::from_secs(1),
            criterion_4,
        ),
        (
            5,
            "power-family band",
            Duration::from_secs(300),
            criterion_5,
        ),
        (
            6,
            "Sturmian exactness",
            Duration::from_secs(30),
            criterion_6,
        ),
        (7, "recurrence suite", Duration::from_secs(10), criterion_7),
        (
            8,
            "product lower bound",
            Duration::from_secs(60),
            criterion_8,
        ),
        (
            9,
            "estimator calibration",
            Duration::from_secs(1),
            criterion_9,
        ),
        (10, "determinism", Duration::from_secs(600), criterion_10),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|v| v.parse().ok());
    let mut failed = Vec::new();
    for (id, name, budget, run) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {id:2} PASS {name} ({elapsed:.2?}): {detail}"),
            Err(detail) => {
                println!("criterion {id:2} FAIL {name} ({elapsed:.2?}): {detail}");
                failed.push(id);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

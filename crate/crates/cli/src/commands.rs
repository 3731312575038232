//! The three commands. Computation finishes before any file is written.

use std::path::PathBuf;

use polyent::bowen::{verify_separated, CountRecord};
use polyent::constructions::{
    backward_orbit_set, build_a, build_hedlund, build_s, separated_sample, spanning_sample,
    ConstructionKind, ConstructionReport, Witness,
};
use polyent::diagnostics::{
    complexity_profile, distality_gap, uniform_recurrence_check, MorseHedlund, RecurrenceReport,
};
use polyent::estimation::{
    count_table, estimate, geometric_ns, AnalyticA, AnalyticS, Counter, EntropyEstimate,
    GreedyCounter, ProductCounter, SymbolicExact, COMPLEXITY_RANGE_FACTOR,
};
use polyent::systems::{
    AnyPoint, AnySystem, CirclePoint, DynamicalSystem, Level, Resolution, Rotation, ShiftSystem,
    TowerPoint, TowerSystem,
};
use serde::Serialize;

use crate::config::{Config, MethodChoice, SystemSpec};
use crate::output;
use crate::{Check, CliError, Which};

/// Tower levels sampled when greedy counts run on a product or a
/// non-tower system and `--levels` is absent.
pub const DEFAULT_GREEDY_LEVELS: u64 = 16;
/// Largest sample a greedy count on a product system may use.
pub const PRODUCT_SAMPLE_LIMIT: usize = 250_000;
/// Sample levels for recurrence and distality checks when `--levels` is absent.
pub const DEFAULT_DIAGNOSE_LEVELS: u64 = 20;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn system_of(spec: &SystemSpec, config: &Config) -> Result<AnySystem, CliError> {
    Ok(match spec {
        SystemSpec::TowerExp | SystemSpec::TowerPower(_) => {
            AnySystem::Tower(TowerSystem::new(spec.family().expect("tower family"))?)
        }
        SystemSpec::Sturmian(a) => {
            AnySystem::Shift(ShiftSystem::sturmian(*a)?.with_window(config.window))
        }
        SystemSpec::FullShift(l) => {
            AnySystem::Shift(ShiftSystem::full_shift(*l, config.seed)?.with_window(config.window))
        }
        SystemSpec::Rotation(t) => AnySystem::Rotation(Rotation::new(*t)?),
        SystemSpec::Product(a, b) => {
            AnySystem::product(system_of(a, config)?, system_of(b, config)?)
        }
    })
}

fn shift_of(spec: &SystemSpec, config: &Config) -> Result<ShiftSystem, CliError> {
    match system_of(spec, config)? {
        AnySystem::Shift(s) => Ok(s),
        _ => Err(usage(format!("{spec} is not a subshift"))),
    }
}

/// Closed-form or exact counter for `spec`.
fn exact_counter(
    spec: &SystemSpec,
    method: MethodChoice,
    config: &Config,
) -> Result<Box<dyn Counter>, CliError> {
    match (spec, method) {
        (SystemSpec::Product(a, b), _) => Ok(Box::new(ProductCounter(
            exact_counter(a, method, config)?,
            exact_counter(b, method, config)?,
        ))),
        (SystemSpec::TowerExp | SystemSpec::TowerPower(_), MethodChoice::Analytic) => {
            Ok(Box::new(AnalyticA(spec.family().expect("tower family"))))
        }
        (SystemSpec::TowerPower(c), MethodChoice::AnalyticS) => Ok(Box::new(AnalyticS(*c))),
        (
            SystemSpec::Sturmian(_) | SystemSpec::FullShift(_),
            MethodChoice::Symbolic | MethodChoice::Analytic,
        ) => Ok(Box::new(SymbolicExact(shift_of(spec, config)?))),
        _ => Err(usage(format!(
            "method {} is not available for {spec}",
            method_name(method)
        ))),
    }
}

fn method_name(m: MethodChoice) -> &'static str {
    match m {
        MethodChoice::Greedy => "greedy",
        MethodChoice::Analytic => "analytic",
        MethodChoice::AnalyticS => "analytic-s",
        MethodChoice::Symbolic => "symbolic",
    }
}

fn greedy_counter(config: &Config) -> Result<Box<dyn Counter>, CliError> {
    let g = config.grid;
    match system_of(&config.system, config)? {
        AnySystem::Tower(sys) => {
            let levels = config.levels;
            let sampler_sys = sys.clone();
            Ok(Box::new(GreedyCounter::separated(
                sys,
                move |n, eps| match levels {
                    Some(l) => sampler_sys.grid_sample(g, l),
                    None => separated_sample(&sampler_sys, n, eps, g),
                },
            )))
        }
        any => {
            let res = Resolution::new(g, config.levels.unwrap_or(DEFAULT_GREEDY_LEVELS));
            let sample = any.sample(&res)?;
            if matches!(any, AnySystem::Product(_)) && sample.len() > PRODUCT_SAMPLE_LIMIT {
                return Err(usage(format!(
                    "product sample has {} points (limit {PRODUCT_SAMPLE_LIMIT}); lower --grid or --levels",
                    sample.len()
                )));
            }
            Ok(Box::new(GreedyCounter::separated(any, move |_, _| {
                Ok(sample.clone())
            })))
        }
    }
}

pub struct EstimateOutcome {
    pub records: Vec<CountRecord>,
    pub estimate: EntropyEstimate,
    pub files: Vec<PathBuf>,
}

/// Writes `counts.csv`, `fits.json` and one `loglog-<eps>.dat` per eps.
pub fn cmd_estimate(config: &Config) -> Result<EstimateOutcome, CliError> {
    let counter = match config.method {
        MethodChoice::Greedy => greedy_counter(config)?,
        m => exact_counter(&config.system, m, config)?,
    };
    let ns = geometric_ns(config.n0, config.ratio, config.steps)?;
    let records = count_table(&counter, &ns, &config.eps)?;
    let est = estimate(&records, &config.eps, config.mode, config.tail).map_err(|e| match e {
        polyent::Error::TooFewPoints { found } => usage(format!(
            "only {found} n-values in the fit tail; raise --steps or --tail"
        )),
        other => other.into(),
    })?;

    let mut files = vec![
        output::write_file(config, "counts.csv", &output::counts_csv(config, &records))?,
        output::write_file(
            config,
            "fits.json",
            &output::json_report(config, "estimate", &est)?,
        )?,
    ];
    for &eps in &config.eps {
        files.push(output::write_file(
            config,
            &output::loglog_name(eps),
            &output::loglog_dat(config, &records, eps),
        )?);
    }
    Ok(EstimateOutcome {
        records,
        estimate: est,
        files,
    })
}

fn hedlund_failure(
    config: &Config,
    sys: &ShiftSystem,
    n: u64,
    err: &polyent::Error,
) -> ConstructionReport {
    ConstructionReport {
        kind: ConstructionKind::Hedlund,
        window: n,
        eps: 1.0,
        system: sys.label(),
        points: Witness::ShiftIndices(Vec::new()),
        predicted_cardinality: n + 1,
        threshold: None,
        verified: false,
        strict: None,
        same_angle_strict: None,
        levels_trimmed: 0,
        failure: Some(format!("{err} (range {})", range_for(config))),
    }
}

fn range_for(config: &Config) -> usize {
    COMPLEXITY_RANGE_FACTOR * config.horizon as usize + COMPLEXITY_RANGE_FACTOR
}

/// Builds and verifies the requested witness set for every eps in the
/// config (once, at eps = 1, for `hedlund`), writes `construction.json`,
/// and fails with a verification error if any report is unverified.
pub fn cmd_verify_construction(
    config: &Config,
    which: Which,
) -> Result<Vec<ConstructionReport>, CliError> {
    let big_n = config.horizon;
    let mut reports = Vec::new();
    match which {
        Which::A => {
            let fam = config.system.family().ok_or_else(|| {
                usage(format!(
                    "construction A needs a tower system, got {}",
                    config.system
                ))
            })?;
            let sys = TowerSystem::new(fam.clone())?;
            for &eps in &config.eps {
                let mut r = build_a(big_n, eps, &fam)?;
                let sample = spanning_sample(&sys, big_n, eps, config.grid)?;
                r.certify_spanning(&sys, &sample)?;
                reports.push(r);
            }
        }
        Which::S => {
            let SystemSpec::TowerPower(c) = config.system else {
                return Err(usage(format!(
                    "construction S needs tower-power:c, got {}",
                    config.system
                )));
            };
            let sys = TowerSystem::new(config.system.family().expect("tower family"))?;
            for &eps in &config.eps {
                let mut r = build_s(big_n, eps, c)?;
                r.certify_separated(&sys)?;
                reports.push(r);
            }
        }
        Which::Hedlund => {
            let sys = shift_of(&config.system, config)?;
            if sys.base_point().is_none() {
                return Err(usage(format!("{} has no base word", config.system)));
            }
            let r = match build_hedlund(&sys, big_n as usize, range_for(config)) {
                Ok(r) => r,
                Err(
                    e @ (polyent::Error::NotEnoughFactors { .. }
                    | polyent::Error::RangeTooShort { .. }),
                ) => hedlund_failure(config, &sys, big_n, &e),
                Err(e) => return Err(e.into()),
            };
            reports.push(r);
        }
    }
    output::write_file(
        config,
        "construction.json",
        &output::json_report(config, "reports", &reports)?,
    )?;
    if let Some(r) = reports.iter().find(|r| !r.verified) {
        return Err(CliError::Verification(format!(
            "{:?} at eps {}: {}",
            r.kind,
            r.eps,
            r.failure.as_deref().unwrap_or("not verified")
        )));
    }
    Ok(reports)
}

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceEntry {
    #[serde(flatten)]
    pub report: RecurrenceReport,
    /// For a point without a return: whether `{x, f^{-1}x, …, f^{-m}x}` is
    /// `(m, eps)`-separated.
    pub witness_orbit_separated: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistalityReport {
    pub x: String,
    pub y: String,
    pub window: u64,
    /// Minimum distance over the window; an upper bound on the infimum.
    pub gap: f64,
    /// `|a_i − a_j|` when both points lie on tower levels.
    pub height_gap: Option<f64>,
}

fn describe(p: &AnyPoint) -> String {
    match p {
        AnyPoint::Tower(t) => match t.level {
            Level::Finite(n) => format!("{}@{n}", t.angle),
            Level::Base => format!("{}@base", t.angle),
        },
        AnyPoint::Circle(c) => format!("{}", c.angle()),
        AnyPoint::Symbolic(s) => format!("{s:?}"),
        AnyPoint::Finite(i) => format!("#{i}"),
        AnyPoint::Pair(b) => format!("({}, {})", describe(&b.0), describe(&b.1)),
    }
}

fn distality_pair(sys: &AnySystem, config: &Config) -> Result<(AnyPoint, AnyPoint), CliError> {
    Ok(match sys {
        AnySystem::Tower(_) => (
            AnyPoint::Tower(TowerPoint::new(0.0, Level::Finite(1))),
            AnyPoint::Tower(TowerPoint::new(0.5, Level::Finite(2))),
        ),
        AnySystem::Rotation(_) => (
            AnyPoint::Circle(CirclePoint::new(0.0)),
            AnyPoint::Circle(CirclePoint::new(0.25)),
        ),
        _ => {
            let s = sys.sample(&Resolution::new(config.grid.max(2), 1))?;
            (s[0].clone(), s[1].clone())
        }
    })
}

pub struct DiagnoseOutcome {
    pub path: PathBuf,
    pub summary: String,
}

/// Runs one diagnostic and writes `recurrence.json`, `distality.json` or
/// `complexity.csv`.
pub fn cmd_diagnose(config: &Config, check: Check) -> Result<DiagnoseOutcome, CliError> {
    match check {
        Check::Recurrence => {
            let sys = system_of(&config.system, config)?;
            let levels = config.levels.unwrap_or(DEFAULT_DIAGNOSE_LEVELS);
            let sample = sys.sample(&Resolution::new(config.grid, levels))?;
            let entries: Vec<RecurrenceEntry> = config
                .eps
                .iter()
                .map(|&eps| {
                    let m = config.m.unwrap_or((1.0 / eps).ceil() as u64);
                    let report = uniform_recurrence_check(&sys, &sample, eps, m);
                    let witness_orbit_separated = report.first_witness.and_then(|i| {
                        backward_orbit_set(&sys, &sample[i], m)
                            .ok()
                            .map(|set| verify_separated(&sys, &set, m, eps).separated)
                    });
                    RecurrenceEntry {
                        report,
                        witness_orbit_separated,
                    }
                })
                .collect();
            let summary = entries
                .iter()
                .map(|e| {
                    format!(
                        "eps {}, m {}: all_within {}",
                        e.report.eps, e.report.m_bound, e.report.all_within
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            let path = output::write_file(
                config,
                "recurrence.json",
                &output::json_report(config, "reports", &entries)?,
            )?;
            Ok(DiagnoseOutcome { path, summary })
        }
        Check::Distality => {
            let sys = system_of(&config.system, config)?;
            let (x, y) = distality_pair(&sys, config)?;
            let gap = distality_gap(&sys, &x, &y, config.horizon)?;
            let height_gap = match (&sys, &x, &y) {
                (AnySystem::Tower(t), AnyPoint::Tower(p), AnyPoint::Tower(q)) => {
                    Some((t.height(p.level) - t.height(q.level)).abs())
                }
                _ => None,
            };
            let report = DistalityReport {
                x: describe(&x),
                y: describe(&y),
                window: config.horizon,
                gap,
                height_gap,
            };
            let path = output::write_file(
                config,
                "distality.json",
                &output::json_report(config, "report", &report)?,
            )?;
            Ok(DiagnoseOutcome {
                path,
                summary: format!("distality gap over |n| <= {}: {gap}", config.horizon),
            })
        }
        Check::Complexity => {
            let sys = shift_of(&config.system, config)?;
            let n_max = config.horizon as usize;
            let range = range_for(config);
            let word = match sys.base_point() {
                Some(base) => base.window(0, range as i64 - 1),
                None => {
                    let s = sys.sample(&Resolution::new(1, 0))?;
                    s[0].window(0, range as i64 - 1)
                }
            };
            let profile = complexity_profile(&word, n_max)?;
            let verdict = match profile.verdict {
                MorseHedlund::EventuallyPeriodic { n } => format!("eventually-periodic at n = {n}"),
                MorseHedlund::Aperiodic => "aperiodic".to_string(),
                MorseHedlund::Inconclusive => "inconclusive".to_string(),
            };
            let path = output::write_file(
                config,
                "complexity.csv",
                &output::complexity_csv(config, profile.range, &verdict, &profile.rows),
            )?;
            Ok(DiagnoseOutcome {
                path,
                summary: format!("complexity up to n = {n_max}: {verdict}"),
            })
        }
    }
}

//! Experiment configuration: a flat `key = value` file merged with flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use polyent::estimation::{FitMode, DEFAULT_EPS_GRID, DEFAULT_TAIL_FRACTION};
use polyent::systems::{SequenceFamily, GOLDEN_ALPHA};
use serde::Serialize;

use crate::CliError;

/// A system named on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemSpec {
    TowerExp,
    TowerPower(f64),
    Sturmian(f64),
    FullShift(u8),
    Rotation(f64),
    Product(Box<SystemSpec>, Box<SystemSpec>),
}

impl SystemSpec {
    pub fn family(&self) -> Option<SequenceFamily> {
        match self {
            Self::TowerExp => Some(SequenceFamily::Exp),
            Self::TowerPower(c) => Some(SequenceFamily::Power(*c)),
            _ => None,
        }
    }

    fn default_method(&self) -> MethodChoice {
        match self {
            Self::TowerExp | Self::TowerPower(_) | Self::Product(..) => MethodChoice::Analytic,
            Self::Sturmian(_) | Self::FullShift(_) => MethodChoice::Symbolic,
            Self::Rotation(_) => MethodChoice::Greedy,
        }
    }

    fn default_mode(&self) -> FitMode {
        match self {
            Self::FullShift(_) => FitMode::Topological,
            _ => FitMode::Polynomial,
        }
    }
}

fn parse_f64(what: &str, s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("invalid {what} `{s}`"))
}

impl FromStr for SystemSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("product:") {
            let (a, b) = rest
                .split_once(',')
                .ok_or_else(|| format!("product needs two comma-separated systems: `{s}`"))?;
            return Ok(Self::Product(Box::new(a.parse()?), Box::new(b.parse()?)));
        }
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("tower-exp", None) => Ok(Self::TowerExp),
            ("tower-power", Some(c)) => {
                let c = parse_f64("exponent", c)?;
                SequenceFamily::power(c).map_err(|e| e.to_string())?;
                Ok(Self::TowerPower(c))
            }
            ("sturmian", None) => Ok(Self::Sturmian(GOLDEN_ALPHA)),
            ("sturmian", Some(a)) => Ok(Self::Sturmian(parse_f64("slope", a)?)),
            ("full-shift", Some(l)) => l
                .trim()
                .parse::<u8>()
                .ok()
                .filter(|&l| l >= 2)
                .map(Self::FullShift)
                .ok_or_else(|| format!("invalid alphabet size `{l}`")),
            ("rotation", Some(t)) => Ok(Self::Rotation(parse_f64("angle", t)?)),
            _ => Err(format!("unknown system `{s}`")),
        }
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TowerExp => write!(f, "tower-exp"),
            Self::TowerPower(c) => write!(f, "tower-power:{c}"),
            Self::Sturmian(a) => write!(f, "sturmian:{a}"),
            Self::FullShift(l) => write!(f, "full-shift:{l}"),
            Self::Rotation(t) => write!(f, "rotation:{t}"),
            Self::Product(a, b) => write!(f, "product:{a},{b}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Greedy,
    Analytic,
    AnalyticS,
    Symbolic,
}

impl FromStr for MethodChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s.trim(), false)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    Poly,
    Top,
}

impl From<ModeChoice> for FitMode {
    fn from(m: ModeChoice) -> Self {
        match m {
            ModeChoice::Poly => FitMode::Polynomial,
            ModeChoice::Top => FitMode::Topological,
        }
    }
}

impl FromStr for ModeChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s.trim(), false)
    }
}

fn parse_eps_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|e| parse_f64("eps", e)).collect()
}

/// Settings shared by every command. Each may also be given in the config
/// file under the same name as its flag.
#[derive(Args, Clone, Debug, Default)]
pub struct Settings {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// tower-exp | tower-power:c | sturmian[:alpha] | full-shift:l | rotation:theta | product:a,b
    #[arg(long)]
    pub system: Option<SystemSpec>,
    #[arg(long)]
    pub n0: Option<u64>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Sample points per circle (or per orbit).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Tower levels sampled by greedy counts; derived from the window when absent.
    #[arg(long)]
    pub levels: Option<u64>,
    /// Coordinate window of the subshift metric.
    #[arg(long)]
    pub window: Option<u32>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeChoice>,
    /// Fraction of the largest n-values used by slope fits.
    #[arg(long)]
    pub tail: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Orbit window N for constructions, word length for hedlund and
    /// complexity, and the two-sided window for distality.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Return-time bound for the recurrence check.
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Settings {
    /// Fills every unset field from the config file, if one was given.
    pub fn merge_file(mut self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let file = Self::parse_file(&text, &path)?;
        macro_rules! fill {
            ($($f:ident),*) => { $( if self.$f.is_none() { self.$f = file.$f; } )* };
        }
        fill!(
            system, n0, ratio, steps, eps, grid, levels, window, method, mode, tail, seed, horizon,
            m, out, threads
        );
        Ok(self)
    }

    fn parse_file(text: &str, path: &Path) -> Result<Self, CliError> {
        let mut s = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err =
                |msg: String| CliError::Usage(format!("{}:{}: {msg}", path.display(), lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let value = value.trim();
            fn num<T: FromStr>(v: &str) -> Result<T, String> {
                v.parse().map_err(|_| format!("invalid number `{v}`"))
            }
            let r: Result<(), String> = match key.trim() {
                "system" => value.parse().map(|v| s.system = Some(v)),
                "n0" => num(value).map(|v| s.n0 = Some(v)),
                "ratio" => num(value).map(|v| s.ratio = Some(v)),
                "steps" => num(value).map(|v| s.steps = Some(v)),
                "eps" => parse_eps_list(value).map(|v| s.eps = Some(v)),
                "grid" => num(value).map(|v| s.grid = Some(v)),
                "levels" => num(value).map(|v| s.levels = Some(v)),
                "window" => num(value).map(|v| s.window = Some(v)),
                "method" => value.parse().map(|v| s.method = Some(v)),
                "mode" => value.parse().map(|v| s.mode = Some(v)),
                "tail" => num(value).map(|v| s.tail = Some(v)),
                "seed" => num(value).map(|v| s.seed = Some(v)),
                "horizon" => num(value).map(|v| s.horizon = Some(v)),
                "m" => num(value).map(|v| s.m = Some(v)),
                "out" => {
                    s.out = Some(PathBuf::from(value));
                    Ok(())
                }
                "threads" => num(value).map(|v| s.threads = Some(v)),
                other => Err(format!("unknown key `{other}`")),
            };
            r.map_err(err)?;
        }
        Ok(s)
    }
}

/// Fully resolved configuration. Everything here except the output
/// directory is embedded in each output file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    #[serde(serialize_with = "as_display")]
    pub system: SystemSpec,
    pub n0: u64,
    pub ratio: f64,
    pub steps: usize,
    pub eps: Vec<f64>,
    pub grid: usize,
    pub levels: Option<u64>,
    pub window: u32,
    pub method: MethodChoice,
    pub mode: FitMode,
    pub tail: f64,
    pub seed: u64,
    pub horizon: u64,
    pub m: Option<u64>,
    #[serde(skip)]
    pub out: PathBuf,
}

fn as_display<S: serde::Serializer>(v: &SystemSpec, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub const DEFAULT_N0: u64 = 16;
pub const DEFAULT_RATIO: f64 = 2.0;
pub const DEFAULT_STEPS: usize = 8;
pub const DEFAULT_HORIZON: u64 = 100;

impl Config {
    pub fn resolve(settings: Settings) -> Result<Self, CliError> {
        let s = settings.merge_file()?;
        let system = s
            .system
            .ok_or_else(|| CliError::Usage("--system is required".into()))?;
        let eps = s.eps.unwrap_or_else(|| DEFAULT_EPS_GRID.to_vec());
        if eps.is_empty() || eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(CliError::Usage(format!(
                "eps values must be positive: {eps:?}"
            )));
        }
        if eps.windows(2).any(|w| w[0] <= w[1]) {
            return Err(CliError::Usage(format!(
                "eps values must be strictly decreasing: {eps:?}"
            )));
        }
        let min_eps = eps[eps.len() - 1];
        let min_grid = (10.0 / min_eps).ceil() as usize;
        let grid = s.grid.unwrap_or(min_grid);
        if grid < min_grid {
            return Err(CliError::Usage(format!(
                "--grid {grid} is below 10/min(eps) = {min_grid}"
            )));
        }
        let tail = s.tail.unwrap_or(DEFAULT_TAIL_FRACTION);
        if !(tail > 0.0 && tail <= 1.0) {
            return Err(CliError::Usage(format!("--tail {tail} outside (0, 1]")));
        }
        Ok(Self {
            n0: s.n0.unwrap_or(DEFAULT_N0),
            ratio: s.ratio.unwrap_or(DEFAULT_RATIO),
            steps: s.steps.unwrap_or(DEFAULT_STEPS),
            eps,
            grid,
            levels: s.levels,
            window: s.window.unwrap_or(polyent::systems::DEFAULT_SHIFT_WINDOW),
            method: s.method.unwrap_or_else(|| system.default_method()),
            mode: s
                .mode
                .map(FitMode::from)
                .unwrap_or_else(|| system.default_mode()),
            tail,
            seed: s.seed.unwrap_or(0),
            horizon: s.horizon.unwrap_or(DEFAULT_HORIZON),
            m: s.m,
            out: s.out.unwrap_or_else(|| PathBuf::from(".")),
            system,
        })
    }

    /// `key = value` lines in the config-file format, keys sorted.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let value = serde_json::to_value(self).expect("config serializes");
        value
            .as_object()
            .expect("config is an object")
            .iter()
            .filter(|(_, v)| !v.is_null())
            .map(|(k, v)| {
                let text = match v {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Array(items) => items
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    other => other.to_string(),
                };
                (k.clone(), text)
            })
            .collect()
    }
}

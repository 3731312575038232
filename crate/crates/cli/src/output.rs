//! File writers. Every file starts with the tool version and the resolved
//! configuration; floats use Rust's shortest round-trip formatting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use polyent::bowen::CountRecord;
use serde::Serialize;

use crate::{CliError, Config};

pub const TOOL: &str = concat!("polyent ", env!("CARGO_PKG_VERSION"));

fn comment_header(config: &Config) -> String {
    let mut s = format!("# {TOOL}\n");
    for (k, v) in config.pairs() {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn counts_csv(config: &Config, records: &[CountRecord]) -> String {
    let mut s = comment_header(config);
    s.push_str("n,eps,count,method,bound\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.n,
            r.eps,
            r.count,
            r.method.as_str(),
            r.bound.as_str()
        );
    }
    s
}

/// Two columns, `ln n` and `ln count`, for the records at `eps`.
pub fn loglog_dat(config: &Config, records: &[CountRecord], eps: f64) -> String {
    let mut s = comment_header(config);
    let _ = writeln!(s, "# eps = {eps}");
    s.push_str("# ln_n ln_count\n");
    for r in records.iter().filter(|r| r.eps == eps && r.count > 0) {
        let _ = writeln!(s, "{} {}", (r.n as f64).ln(), (r.count as f64).ln());
    }
    s
}

pub fn loglog_name(eps: f64) -> String {
    format!("loglog-{eps}.dat")
}

/// `{"config": …, <key>: body, "tool": …}`, pretty-printed.
pub fn json_report<T: Serialize>(config: &Config, key: &str, body: &T) -> Result<String, CliError> {
    let mut map = serde_json::Map::new();
    map.insert("tool".into(), TOOL.into());
    map.insert("config".into(), serde_json::to_value(config)?);
    map.insert(key.into(), serde_json::to_value(body)?);
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(map))?;
    s.push('\n');
    Ok(s)
}

pub fn complexity_csv(
    config: &Config,
    range: usize,
    verdict: &str,
    rows: &[(usize, usize)],
) -> String {
    let mut s = comment_header(config);
    let _ = writeln!(s, "# range = {range}");
    let _ = writeln!(s, "# verdict = {verdict}");
    s.push_str("n,complexity\n");
    for (n, p) in rows {
        let _ = writeln!(s, "{n},{p}");
    }
    s
}

pub fn write_file(config: &Config, name: &str, text: &str) -> Result<PathBuf, CliError> {
    write(&config.out, name, text)
}

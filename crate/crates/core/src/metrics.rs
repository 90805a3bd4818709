//! Comparison metrics against the full-horizon baseline and the benchmark
//! CSV format.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "# bench-csv v1";
pub const CSV_COLUMNS: &str = "instance,method,S,t,L,p";
/// Instance label of the per-method mean rows.
pub const MEAN_ROW: &str = "mean";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AlgBasic,
    AlgFast,
    WinBasic,
    WinMl,
    Seqasg,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::AlgBasic, Method::AlgFast, Method::WinBasic, Method::WinMl, Method::Seqasg];
    pub const BASELINE: Method = Method::AlgBasic;

    pub fn name(self) -> &'static str {
        match self {
            Method::AlgBasic => "alg_basic",
            Method::AlgFast => "alg_fast",
            Method::WinBasic => "win_basic",
            Method::WinMl => "win_ml",
            Method::Seqasg => "seqasg",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accepts both `win_ml` and `win-ml`.
impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::Parameter(format!("unknown method '{s}'")))
    }
}

/// Percent loss of satisfaction relative to the baseline objective.
pub fn metric_l(s: f64, s_baseline: f64) -> Result<f64> {
    if !(s_baseline > 0.0) || !s.is_finite() {
        return Err(Error::UndefinedMetric(format!("L needs a positive baseline objective, got {s_baseline}")));
    }
    Ok(100.0 * (1.0 - s / s_baseline))
}

/// Runtime as a percentage of the baseline runtime.
pub fn metric_p(t: f64, t_baseline: f64) -> Result<f64> {
    if !(t_baseline > 0.0) || !t.is_finite() {
        return Err(Error::UndefinedMetric(format!("p needs a positive baseline runtime, got {t_baseline}")));
    }
    Ok(100.0 * t / t_baseline)
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (x * f).round() / f
}

/// L as reported: two decimals.
pub fn round_l(l: f64) -> f64 {
    round_to(l, 2)
}

/// p as reported: one decimal.
pub fn round_p(p: f64) -> f64 {
    round_to(p, 1)
}

/// Runtimes are kept to the millisecond.
pub fn round_t(t: f64) -> f64 {
    round_to(t, 3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub instance: String,
    pub method: Method,
    pub s: f64,
    pub t: f64,
    /// `None` when no usable baseline exists for the instance.
    pub l: Option<f64>,
    pub p: Option<f64>,
}

/// Builds records from raw `(instance, method, S, t)` results. L and p are
/// computed against the alg_basic row of the same instance from the rounded
/// runtimes, so they can be recomputed from the CSV columns.
pub fn records_from_raw(raw: &[(String, Method, f64, f64)]) -> Vec<BenchmarkRecord> {
    let mut rows: Vec<BenchmarkRecord> = raw
        .iter()
        .map(|(inst, m, s, t)| BenchmarkRecord { instance: inst.clone(), method: *m, s: *s, t: round_t(*t), l: None, p: None })
        .collect();
    rows.sort_by(|a, b| a.instance.cmp(&b.instance).then(a.method.cmp(&b.method)));
    let baselines: BTreeMap<String, (f64, f64)> = rows
        .iter()
        .filter(|r| r.method == Method::BASELINE)
        .map(|r| (r.instance.clone(), (r.s, r.t)))
        .collect();
    for r in &mut rows {
        if let Some(&(sb, tb)) = baselines.get(&r.instance) {
            r.l = metric_l(r.s, sb).ok().map(round_l);
            r.p = metric_p(r.t, tb).ok().map(round_p);
        }
    }
    rows
}

/// Per-method arithmetic means of the row values. Undefined L or p cells are
/// left out of their mean.
pub fn method_means(rows: &[BenchmarkRecord]) -> Vec<BenchmarkRecord> {
    let mut by_method: BTreeMap<Method, Vec<&BenchmarkRecord>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.instance != MEAN_ROW) {
        by_method.entry(r.method).or_default().push(r);
    }
    let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    by_method
        .into_iter()
        .map(|(m, rs)| BenchmarkRecord {
            instance: MEAN_ROW.to_string(),
            method: m,
            s: mean(rs.iter().map(|r| r.s).collect()).unwrap_or(f64::NAN),
            t: round_t(mean(rs.iter().map(|r| r.t).collect()).unwrap_or(f64::NAN)),
            l: mean(rs.iter().filter_map(|r| r.l).collect()).map(round_l),
            p: mean(rs.iter().filter_map(|r| r.p).collect()).map(round_p),
        })
        .collect()
}

fn opt(x: Option<f64>, decimals: usize) -> String {
    x.map(|v| format!("{v:.decimals$}")).unwrap_or_default()
}

/// CSV with the per-row records followed by one mean row per method.
pub fn write_csv(rows: &[BenchmarkRecord]) -> String {
    let mut out = format!("{CSV_HEADER}\n{CSV_COLUMNS}\n");
    for r in rows.iter().chain(method_means(rows).iter()) {
        if r.instance.contains(',') {
            log::warn!("instance label '{}' contains a comma", r.instance);
        }
        out.push_str(&format!("{},{},{},{:.3},{},{}\n", r.instance, r.method, r.s, r.t, opt(r.l, 2), opt(r.p, 1)));
    }
    out
}

/// Parses a benchmark CSV, mean rows included.
pub fn parse_csv(text: &str) -> Result<Vec<BenchmarkRecord>> {
    let bad = |line: usize, m: String| Error::Parse { path: "<bench csv>".into(), line, column: 1, message: m };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((_, h)) => match h.trim().strip_prefix("# bench-csv v").and_then(|v| v.parse().ok()) {
            Some(found) => return Err(Error::Version { kind: "bench-csv", found, expected: 1 }),
            None => return Err(bad(1, format!("expected '{CSV_HEADER}', found '{h}'"))),
        },
        None => return Err(bad(1, "empty file".into())),
    }
    match lines.next() {
        Some((_, c)) if c.trim() == CSV_COLUMNS => {}
        _ => return Err(bad(2, format!("expected column line '{CSV_COLUMNS}'"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(i + 1, format!("expected 6 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(i + 1, format!("bad number '{s}': {e}")));
        let optional = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        rows.push(BenchmarkRecord {
            instance: f[0].to_string(),
            method: f[1].parse()?,
            s: num(f[2])?,
            t: num(f[3])?,
            l: optional(f[4])?,
            p: optional(f[5])?,
        });
    }
    Ok(rows)
}

/// Aligned text table: one line per instance with S, t, L, p for each method.
pub fn format_table(rows: &[BenchmarkRecord]) -> String {
    let means = method_means(rows);
    let methods: Vec<Method> = means.iter().map(|r| r.method).collect();
    let mut instances: Vec<&str> = rows.iter().map(|r| r.instance.as_str()).filter(|i| *i != MEAN_ROW).collect();
    instances.dedup();
    let mut header = vec!["instance".to_string()];
    for m in &methods {
        for col in ["S", "t", "L", "p"] {
            header.push(format!("{col}[{m}]"));
        }
    }
    let mut table = vec![header];
    let all: Vec<&BenchmarkRecord> = rows.iter().filter(|r| r.instance != MEAN_ROW).chain(means.iter()).collect();
    for inst in instances.into_iter().chain(std::iter::once(MEAN_ROW)) {
        let mut line = vec![inst.to_string()];
        for m in &methods {
            match all.iter().find(|r| r.instance == inst && r.method == *m) {
                Some(r) => line.extend([format!("{:.0}", r.s), format!("{:.2}", r.t), opt(r.l, 2), opt(r.p, 1)]),
                None => line.extend(std::iter::repeat(String::new()).take(4)),
            }
        }
        table.push(line);
    }
    let widths: Vec<usize> = (0..table[0].len()).map(|c| table.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for line in &table {
        let cells: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

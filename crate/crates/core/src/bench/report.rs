//! Deterministic CSV/JSON report files and the table printed by `report`.
//!
//! Layout of a report directory:
//!
//! ```text
//! manifest.json          configuration, seeds, skipped seeds, flags
//! summary.csv            one aggregate row per (method, qubits)
//! rows.csv               one row per (seed, method)
//! trends.csv             parameter-trend fractions per method
//! params.csv             best angles per run and layer
//! traces/<seed>_<method>.csv
//! ```
//!
//! Every float is written with six decimals.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{mean, median, normalized_ratio, std_dev, Aggregate, BenchReport, Manifest, Method, TrendSummary};
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "step,p,energy,norm_ratio,success_prob,cnots_step,cnots_cumulative";
pub const SUMMARY_HEADER: &str =
    "method,qubits,mean_ratio,std_ratio,median_ratio,mean_succ,std_succ,median_succ,mean_cumulative_cnots";
pub const ROWS_HEADER: &str =
    "seed,method,qubits,expectation,raw_ratio,norm_ratio,success_prob,cnots_per_layer,cumulative_cnots,final_depth";
pub const TRENDS_HEADER: &str = "method,runs,skipped,frac_gamma_increasing,frac_beta_decreasing,frac_both";
pub const PARAMS_HEADER: &str = "seed,method,layer,gamma,beta";

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv(header: &str, lines: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Writes the report files under `dir`, creating it if needed. Returns the
/// paths written, in write order.
pub fn emit_report(report: &BenchReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let traces = dir.join("traces");
    fs::create_dir_all(&traces).map_err(|e| Error::io(&traces, e))?;
    let mut written = Vec::new();

    for row in &report.rows {
        let per_layer = row.metrics.cnots_per_layer;
        let mut cumulative = 0u64;
        let lines = row.record.trace.iter().map(|s| {
            let step_cnots = per_layer * s.depth as u64;
            cumulative += step_cnots;
            format!(
                "{},{},{},{},{},{},{}",
                s.step,
                s.depth,
                f6(s.energy),
                f6(normalized_ratio(s.energy, row.e_min, row.e_max)),
                f6(s.success_prob),
                step_cnots,
                cumulative
            )
        });
        let path = traces.join(format!("{}_{}.csv", row.seed, row.method));
        write_file(&path, &csv(TRACE_HEADER, lines))?;
        written.push(path);
    }

    let summary = report.aggregates.iter().map(|a| {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            a.method,
            a.qubits,
            f6(a.mean_ratio),
            f6(a.std_ratio),
            f6(a.median_ratio),
            f6(a.mean_succ),
            f6(a.std_succ),
            f6(a.median_succ),
            f6(a.mean_cumulative_cnots)
        )
    });
    let path = dir.join("summary.csv");
    write_file(&path, &csv(SUMMARY_HEADER, summary))?;
    written.push(path);

    let rows = report.rows.iter().map(|r| {
        let m = &r.metrics;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.method,
            r.qubits,
            f6(m.expectation),
            m.raw_ratio.map_or_else(|| "NA".to_string(), f6),
            f6(m.norm_ratio),
            f6(m.success_prob),
            m.cnots_per_layer,
            m.cumulative_cnots,
            m.final_depth
        )
    });
    let path = dir.join("rows.csv");
    write_file(&path, &csv(ROWS_HEADER, rows))?;
    written.push(path);

    let trends = report.trends.iter().map(|t| {
        format!(
            "{},{},{},{},{},{}",
            t.method,
            t.runs,
            t.skipped,
            f6(t.frac_gamma_increasing),
            f6(t.frac_beta_decreasing),
            f6(t.frac_both)
        )
    });
    let path = dir.join("trends.csv");
    write_file(&path, &csv(TRENDS_HEADER, trends))?;
    written.push(path);

    let params = report.rows.iter().flat_map(|r| {
        let p = &r.record.best_params;
        (0..p.depth()).map(move |l| {
            format!(
                "{},{},{},{},{}",
                r.seed,
                r.method,
                l + 1,
                f6(p.gammas()[l]),
                f6(p.betas()[l])
            )
        })
    });
    let path = dir.join("params.csv");
    write_file(&path, &csv(PARAMS_HEADER, params))?;
    written.push(path);

    let path = dir.join("manifest.json");
    let mut manifest = serde_json::to_string_pretty(&report.manifest).map_err(|source| Error::Json {
        path: path.clone(),
        source,
    })?;
    manifest.push('\n');
    write_file(&path, &manifest)?;
    written.push(path);

    Ok(written)
}

/// Per-run values read back from `rows.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedRow {
    pub seed: u64,
    pub method: Method,
    pub qubits: usize,
    pub norm_ratio: f64,
    pub success_prob: f64,
    pub cumulative_cnots: u64,
    pub final_depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedReport {
    pub manifest: Manifest,
    pub rows: Vec<LoadedRow>,
    pub aggregates: Vec<Aggregate>,
    pub trends: Vec<TrendSummary>,
}

fn read_csv(path: &Path, header: &str) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(Error::MalformedReport(format!("{}: unexpected header", path.display())));
    }
    let width = header.split(',').count();
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let fields: Vec<String> = l.split(',').map(str::to_string).collect();
            if fields.len() != width {
                return Err(Error::MalformedReport(format!("{}: bad row {l:?}", path.display())));
            }
            Ok(fields)
        })
        .collect()
}

fn field<T: std::str::FromStr>(path: &Path, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::MalformedReport(format!("{}: cannot parse {s:?}", path.display())))
}

/// Tolerance when re-deriving six-decimal aggregates from six-decimal rows.
const AGGREGATE_TOL: f64 = 2e-6;

/// Reads a report directory and checks that `summary.csv` agrees with the
/// aggregates recomputed from `rows.csv`.
pub fn load_report(dir: impl AsRef<Path>) -> Result<LoadedReport> {
    let dir = dir.as_ref();
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.clone(),
        source,
    })?;

    let path = dir.join("rows.csv");
    let rows = read_csv(&path, ROWS_HEADER)?
        .into_iter()
        .map(|f| {
            Ok(LoadedRow {
                seed: field(&path, &f[0])?,
                method: field(&path, &f[1])?,
                qubits: field(&path, &f[2])?,
                norm_ratio: field(&path, &f[5])?,
                success_prob: field(&path, &f[6])?,
                cumulative_cnots: field(&path, &f[8])?,
                final_depth: field(&path, &f[9])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let path = dir.join("summary.csv");
    let aggregates = read_csv(&path, SUMMARY_HEADER)?
        .into_iter()
        .map(|f| {
            Ok(Aggregate {
                method: field(&path, &f[0])?,
                qubits: field(&path, &f[1])?,
                mean_ratio: field(&path, &f[2])?,
                std_ratio: field(&path, &f[3])?,
                median_ratio: field(&path, &f[4])?,
                mean_succ: field(&path, &f[5])?,
                std_succ: field(&path, &f[6])?,
                median_succ: field(&path, &f[7])?,
                mean_cumulative_cnots: field(&path, &f[8])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let path = dir.join("trends.csv");
    let trends = read_csv(&path, TRENDS_HEADER)?
        .into_iter()
        .map(|f| {
            Ok(TrendSummary {
                method: field(&path, &f[0])?,
                runs: field(&path, &f[1])?,
                skipped: field(&path, &f[2])?,
                frac_gamma_increasing: field(&path, &f[3])?,
                frac_beta_decreasing: field(&path, &f[4])?,
                frac_both: field(&path, &f[5])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    for a in &aggregates {
        let group: Vec<&LoadedRow> = rows
            .iter()
            .filter(|r| r.method == a.method && r.qubits == a.qubits)
            .collect();
        if group.is_empty() {
            return Err(Error::MalformedReport(format!(
                "summary row {} / {} qubits has no per-run rows",
                a.method, a.qubits
            )));
        }
        let ratios: Vec<f64> = group.iter().map(|r| r.norm_ratio).collect();
        let succ: Vec<f64> = group.iter().map(|r| r.success_prob).collect();
        let cnots: Vec<f64> = group.iter().map(|r| r.cumulative_cnots as f64).collect();
        let checks = [
            ("mean_ratio", a.mean_ratio, mean(&ratios)),
            ("std_ratio", a.std_ratio, std_dev(&ratios)),
            ("median_ratio", a.median_ratio, median(&ratios)),
            ("mean_succ", a.mean_succ, mean(&succ)),
            ("std_succ", a.std_succ, std_dev(&succ)),
            ("median_succ", a.median_succ, median(&succ)),
            ("mean_cumulative_cnots", a.mean_cumulative_cnots, mean(&cnots)),
        ];
        for (name, stored, recomputed) in checks {
            if (stored - recomputed).abs() > AGGREGATE_TOL {
                return Err(Error::MalformedReport(format!(
                    "{name} for {} is {stored} but rows give {recomputed}",
                    a.method
                )));
            }
        }
    }

    Ok(LoadedReport {
        manifest,
        rows,
        aggregates,
        trends,
    })
}

/// Human-readable comparison table.
pub fn format_table(report: &LoadedReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<8} {:>6} {:>20} {:>8} {:>20} {:>8} {:>14}",
        "method", "qubits", "mean ratio (std)", "median", "mean succ (std)", "median", "mean cum CNOT"
    )
    .unwrap();
    for a in &report.aggregates {
        writeln!(
            out,
            "{:<8} {:>6} {:>20} {:>8.3} {:>20} {:>8.3} {:>14.0}",
            a.method.to_string(),
            a.qubits,
            format!("{:.3} ({:.3})", a.mean_ratio, a.std_ratio),
            a.median_ratio,
            format!("{:.3} ({:.3})", a.mean_succ, a.std_succ),
            a.median_succ,
            a.mean_cumulative_cnots
        )
        .unwrap();
    }
    if !report.trends.is_empty() {
        writeln!(out).unwrap();
        writeln!(
            out,
            "{:<8} {:>6} {:>8} {:>10} {:>10} {:>10}",
            "method", "runs", "skipped", "gamma up", "beta down", "both"
        )
        .unwrap();
        for t in &report.trends {
            writeln!(
                out,
                "{:<8} {:>6} {:>8} {:>10.3} {:>10.3} {:>10.3}",
                t.method.to_string(),
                t.runs,
                t.skipped,
                t.frac_gamma_increasing,
                t.frac_beta_decreasing,
                t.frac_both
            )
            .unwrap();
        }
    }
    let m = &report.manifest;
    writeln!(out).unwrap();
    writeln!(
        out,
        "{} instances requested, {} skipped, {} penalty rejections",
        m.seeds.len(),
        m.skipped.len(),
        m.penalty_rejections
    )
    .unwrap();
    out
}

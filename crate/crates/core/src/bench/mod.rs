//! Benchmark harness: batch generation, method execution, metrics and
//! aggregation.

mod report;

pub use report::{
    emit_report, format_table, load_report, LoadedReport, LoadedRow, PARAMS_HEADER, ROWS_HEADER, SUMMARY_HEADER,
    TRACE_HEADER, TRENDS_HEADER,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cspp::{self, CsppInstance, GenConfig};
use crate::driver::{self, DdqaoaConfig, RunRecord};
use crate::error::{Error, Result};
use crate::qubo::{self, DiagonalSpectrum, IsingHamiltonian};
use crate::statevector;

/// Slack allowed when checking that an expectation lies in the spectrum range.
pub const RANGE_SLACK: f64 = 1e-9;

/// `(raw, normalized)` approximation ratios. `raw` is `<H> / E_min` and is
/// `None` when `E_min` is zero; `normalized` is the min-max position of the
/// expectation, 1 at the ground energy and 0 at the top of the spectrum.
pub fn approximation_ratio(expectation: f64, e_min: f64, e_max: f64) -> Result<(Option<f64>, f64)> {
    if e_max < e_min || expectation < e_min - RANGE_SLACK || expectation > e_max + RANGE_SLACK {
        return Err(Error::ExpectationOutOfRange {
            value: expectation,
            e_min,
            e_max,
        });
    }
    let raw = (e_min != 0.0).then(|| expectation / e_min);
    Ok((raw, normalized_ratio(expectation, e_min, e_max)))
}

pub(crate) fn normalized_ratio(expectation: f64, e_min: f64, e_max: f64) -> f64 {
    if e_max == e_min {
        1.0
    } else {
        ((e_max - expectation) / (e_max - e_min)).clamp(0.0, 1.0)
    }
}

/// Two CNOTs per ZZ coupling in one cost layer.
pub fn cnot_count_per_layer(ising: &IsingHamiltonian) -> u64 {
    2 * ising.couplings().len() as u64
}

/// Per-layer CNOTs times depth, summed over every optimizer step.
pub fn cumulative_cnots(record: &RunRecord, ising: &IsingHamiltonian) -> u64 {
    let per_layer = cnot_count_per_layer(ising);
    record.trace.iter().map(|s| per_layer * s.depth as u64).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub expectation: f64,
    pub raw_ratio: Option<f64>,
    pub norm_ratio: f64,
    pub success_prob: f64,
    pub cnots_per_layer: u64,
    pub cumulative_cnots: u64,
    pub final_depth: usize,
}

/// Recomputes the state at the run's best angles and scores it.
pub fn evaluate_run(
    instance: &CsppInstance,
    ising: &IsingHamiltonian,
    diag: &DiagonalSpectrum,
    record: &RunRecord,
) -> Result<MetricSet> {
    if instance.num_edges() != ising.n() || ising.n() != diag.n() {
        return Err(Error::LengthMismatch {
            expected: instance.num_edges(),
            actual: diag.n(),
        });
    }
    let state = statevector::prepare_qaoa_state(diag, &record.best_params)?;
    let expectation = statevector::expectation(&state, diag)?;
    let (raw_ratio, norm_ratio) = approximation_ratio(expectation, diag.e_min(), diag.e_max())?;
    Ok(MetricSet {
        expectation,
        raw_ratio,
        norm_ratio,
        success_prob: statevector::ground_state_probability(&state, diag.ground_set()),
        cnots_per_layer: cnot_count_per_layer(ising),
        cumulative_cnots: cumulative_cnots(record, ising),
        final_depth: record.final_depth,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Method {
    Ddqaoa,
    Fixed(usize),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Ddqaoa => f.write_str("ddqaoa"),
            Method::Fixed(p) => write!(f, "p{p}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("ddqaoa") {
            return Ok(Method::Ddqaoa);
        }
        s.strip_prefix('p')
            .and_then(|d| d.parse().ok())
            .filter(|&p| p >= 1)
            .map(Method::Fixed)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?} (expected ddqaoa or pN)")))
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl Method {
    pub fn run(self, diag: &DiagonalSpectrum, config: &DdqaoaConfig, seed: u64) -> Result<RunRecord> {
        match self {
            Method::Ddqaoa => driver::run_ddqaoa(diag, config, seed),
            Method::Fixed(p) => driver::run_fixed_depth(diag, p, config, seed),
        }
    }

    /// `ddqaoa,p3,p5` style lists.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let methods: Vec<Method> = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        if methods.is_empty() {
            return Err(Error::InvalidArgument("method list is empty".into()));
        }
        Ok(methods)
    }
}

/// The default comparison set.
pub fn default_methods() -> Vec<Method> {
    vec![
        Method::Ddqaoa,
        Method::Fixed(3),
        Method::Fixed(5),
        Method::Fixed(10),
        Method::Fixed(15),
    ]
}

/// Step budget used when none is given: 1200 up to 10 edges, 150 above.
pub fn default_steps(num_edges: usize) -> usize {
    if num_edges <= 10 {
        1200
    } else {
        150
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub num_edges: usize,
    pub count: usize,
    /// Instance `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub ddqaoa: DdqaoaConfig,
    pub generator: GenConfig,
    /// Regenerate instances whose compiled ground states miss the optimum.
    pub require_sound_penalties: bool,
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            num_edges: 10,
            count: 20,
            base_seed: 1,
            methods: default_methods(),
            ddqaoa: DdqaoaConfig::default(),
            generator: GenConfig::default(),
            require_sound_penalties: true,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSeed {
    pub seed: u64,
    pub reason: String,
}

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    /// Command-line flags as given.
    pub flags: BTreeMap<String, String>,
    pub num_edges: usize,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub ddqaoa: DdqaoaConfig,
    pub generator: GenConfig,
    pub require_sound_penalties: bool,
    pub skipped: Vec<SkippedSeed>,
    /// Feasible candidates discarded because their ground states missed the optimum.
    pub penalty_rejections: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub seed: u64,
    pub method: Method,
    pub qubits: usize,
    pub e_min: f64,
    pub e_max: f64,
    pub metrics: MetricSet,
    pub record: RunRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub qubits: usize,
    pub mean_ratio: f64,
    pub std_ratio: f64,
    pub median_ratio: f64,
    pub mean_succ: f64,
    pub std_succ: f64,
    pub median_succ: f64,
    pub mean_cumulative_cnots: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub method: Method,
    /// Runs with depth >= 2.
    pub runs: usize,
    /// Runs skipped for having a single layer.
    pub skipped: usize,
    pub frac_gamma_increasing: f64,
    pub frac_beta_decreasing: f64,
    pub frac_both: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub manifest: Manifest,
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<Aggregate>,
    pub trends: Vec<TrendSummary>,
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub(crate) fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    driver::population_variance(xs).sqrt()
}

pub(crate) fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    }
}

/// One aggregate per `(method, qubits)` pair, in `methods` order.
pub fn aggregate(rows: &[BenchRow], methods: &[Method]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &method in methods {
        let mut by_qubits: BTreeMap<usize, Vec<&BenchRow>> = BTreeMap::new();
        for r in rows.iter().filter(|r| r.method == method) {
            by_qubits.entry(r.qubits).or_default().push(r);
        }
        for (qubits, group) in by_qubits {
            let ratios: Vec<f64> = group.iter().map(|r| r.metrics.norm_ratio).collect();
            let succ: Vec<f64> = group.iter().map(|r| r.metrics.success_prob).collect();
            let cnots: Vec<f64> = group.iter().map(|r| r.metrics.cumulative_cnots as f64).collect();
            out.push(Aggregate {
                method,
                qubits,
                mean_ratio: mean(&ratios),
                std_ratio: std_dev(&ratios),
                median_ratio: median(&ratios),
                mean_succ: mean(&succ),
                std_succ: std_dev(&succ),
                median_succ: median(&succ),
                mean_cumulative_cnots: mean(&cnots),
            });
        }
    }
    out
}

/// Least-squares slope of `values` against their index.
pub fn index_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = mean(values);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, y) in values.iter().enumerate() {
        let dx = i as f64 - x_mean;
        num += dx * (y - y_mean);
        den += dx * dx;
    }
    num / den
}

fn slope_sign(values: &[f64]) -> i8 {
    let slope = index_slope(values);
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if slope > 1e-12 * scale {
        1
    } else if slope < -1e-12 * scale {
        -1
    } else {
        0
    }
}

/// Fraction of runs whose best angles follow the annealing-like pattern:
/// gamma rising and beta falling across layers.
pub fn parameter_trend_stats<'a>(records: impl IntoIterator<Item = (Method, &'a RunRecord)>) -> Vec<TrendSummary> {
    let mut tallies: Vec<(Method, [usize; 5])> = Vec::new();
    for (method, rec) in records {
        let slot = match tallies.iter().position(|(m, _)| *m == method) {
            Some(i) => i,
            None => {
                tallies.push((method, [0; 5]));
                tallies.len() - 1
            }
        };
        let t = &mut tallies[slot].1;
        if rec.best_params.depth() < 2 {
            t[1] += 1;
            continue;
        }
        t[0] += 1;
        let up = slope_sign(rec.best_params.gammas()) > 0;
        let down = slope_sign(rec.best_params.betas()) < 0;
        t[2] += up as usize;
        t[3] += down as usize;
        t[4] += (up && down) as usize;
    }
    tallies
        .into_iter()
        .map(|(method, [runs, skipped, up, down, both])| {
            let frac = |k: usize| if runs == 0 { f64::NAN } else { k as f64 / runs as f64 };
            TrendSummary {
                method,
                runs,
                skipped,
                frac_gamma_increasing: frac(up),
                frac_beta_decreasing: frac(down),
                frac_both: frac(both),
            }
        })
        .collect()
}

/// A generated instance plus its compiled artifacts.
#[derive(Debug, Clone)]
pub struct PreparedInstance {
    pub instance: CsppInstance,
    pub ising: IsingHamiltonian,
    pub spectrum: DiagonalSpectrum,
    pub penalty_rejections: u32,
}

/// Generates and compiles one benchmark instance with default penalties.
pub fn prepare_instance(
    seed: u64,
    num_edges: usize,
    generator: &GenConfig,
    require_sound: bool,
) -> Result<PreparedInstance> {
    let generated = if require_sound {
        qubo::generate_sound_instance(seed, num_edges, generator)?
    } else {
        cspp::generate_instance_where(seed, num_edges, generator, |_| true)?
    };
    let instance = generated.instance;
    let compiled = qubo::compile(&instance, qubo::default_penalties(&instance))?;
    Ok(PreparedInstance {
        instance,
        ising: compiled.ising,
        spectrum: compiled.spectrum,
        penalty_rejections: generated.rejected_by_predicate,
    })
}

/// Runs one method on a prepared instance and scores it.
pub fn run_method(prepared: &PreparedInstance, method: Method, config: &DdqaoaConfig) -> Result<BenchRow> {
    let seed = prepared.instance.seed();
    let record = method.run(&prepared.spectrum, config, seed)?;
    let metrics = evaluate_run(&prepared.instance, &prepared.ising, &prepared.spectrum, &record)?;
    Ok(BenchRow {
        seed,
        method,
        qubits: prepared.instance.num_edges(),
        e_min: prepared.spectrum.e_min(),
        e_max: prepared.spectrum.e_max(),
        metrics,
        record,
    })
}

/// Runs every configured method on every instance. Output is independent of
/// the worker count: results are merged in `(seed, method)` order.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    run_benchmark_with_flags(config, "bench", BTreeMap::new())
}

pub fn run_benchmark_with_flags(
    config: &BenchConfig,
    command: &str,
    flags: BTreeMap<String, String>,
) -> Result<BenchReport> {
    config.ddqaoa.validate()?;
    if config.methods.is_empty() {
        return Err(Error::InvalidArgument("no methods configured".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    let seeds: Vec<u64> = (0..config.count as u64).map(|i| config.base_seed + i).collect();
    let per_seed: Vec<Result<(PreparedInstance, Vec<BenchRow>)>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let prepared = prepare_instance(
                    seed,
                    config.num_edges,
                    &config.generator,
                    config.require_sound_penalties,
                )?;
                let rows = config
                    .methods
                    .par_iter()
                    .map(|&m| run_method(&prepared, m, &config.ddqaoa))
                    .collect::<Result<Vec<_>>>()?;
                Ok((prepared, rows))
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut penalty_rejections = 0u64;
    for (seed, result) in seeds.iter().zip(per_seed) {
        match result {
            Ok((prepared, r)) => {
                penalty_rejections += prepared.penalty_rejections as u64;
                rows.extend(r);
            }
            Err(e @ Error::NoFeasibleInstance { .. }) => {
                warn!("skipping seed {seed}: {e}");
                skipped.push(SkippedSeed {
                    seed: *seed,
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    if !skipped.is_empty() {
        warn!("{} of {} seeds skipped", skipped.len(), seeds.len());
    }
    info!(
        "{} runs over {} instances ({} penalty rejections)",
        rows.len(),
        seeds.len() - skipped.len(),
        penalty_rejections
    );

    let aggregates = aggregate(&rows, &config.methods);
    let trends = parameter_trend_stats(rows.iter().map(|r| (r.method, &r.record)));
    Ok(BenchReport {
        manifest: Manifest {
            command: command.to_string(),
            flags,
            num_edges: config.num_edges,
            seeds,
            methods: config.methods.clone(),
            ddqaoa: config.ddqaoa.clone(),
            generator: config.generator.clone(),
            require_sound_penalties: config.require_sound_penalties,
            skipped,
            penalty_rejections,
        },
        rows,
        aggregates,
        trends,
    })
}

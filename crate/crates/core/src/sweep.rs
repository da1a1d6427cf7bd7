//! Replicated parameter sweeps.
//!
//! A sweep point is one parameter combination. Each point is evaluated on
//! `realizations` independently generated networks with
//! `runs_per_realization` independent dynamics runs on each, and summarized
//! by the mean and spread of the per-run cooperator fractions.
//!
//! Seeds depend only on `(master_seed, realization, run, point index)`, so a
//! sweep's output is the same for any number of worker threads.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{run_simulation, Absorbed, SimProtocol};
use crate::error::{config, Error, Result};
use crate::game::{GameParams, UpdateRule};
use crate::graph::{degree_stats, generate_hnw};
use crate::seed::{derive_seed, topology_seed, MAX_POINT, MAX_REALIZATION, MAX_RUN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Replication {
    pub realizations: usize,
    pub runs_per_realization: usize,
}

impl Default for Replication {
    fn default() -> Self {
        Self {
            realizations: 10,
            runs_per_realization: 10,
        }
    }
}

impl Replication {
    pub fn total(&self) -> usize {
        self.realizations * self.runs_per_realization
    }
}

/// One parameter combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub node_count: usize,
    pub kappa: usize,
    pub hub_count: usize,
    pub shortcut_count: usize,
    pub temptation: f64,
    pub rule: UpdateRule,
}

/// Cross product of grids at a fixed ring size.
///
/// Points are enumerated with `shortcut_counts` outermost, then `rules`,
/// `hub_counts`, and `temptations` innermost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub node_count: usize,
    pub kappa: usize,
    pub shortcut_counts: Vec<usize>,
    pub hub_counts: Vec<usize>,
    pub temptations: Vec<f64>,
    pub rules: Vec<UpdateRule>,
    /// Template for every run; its `seed` is replaced per run.
    pub protocol: SimProtocol,
    pub replication: Replication,
    pub master_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("shortcut count", self.shortcut_counts.is_empty()),
            ("hub count", self.hub_counts.is_empty()),
            ("temptation", self.temptations.is_empty()),
            ("update rule", self.rules.is_empty()),
        ] {
            if empty {
                return config(format!("{name} grid is empty"));
            }
        }
        let r = self.replication;
        if r.realizations == 0 || r.runs_per_realization == 0 {
            return config("replicate counts must be at least 1");
        }
        if r.realizations > MAX_REALIZATION + 1 || r.runs_per_realization > MAX_RUN + 1 {
            return config("replicate counts exceed the seed derivation range");
        }
        if self.point_count() > MAX_POINT {
            return config("too many sweep points");
        }
        for &h in &self.hub_counts {
            if h == 0 || h > self.node_count {
                return config(format!(
                    "hub count {h} outside 1..={}",
                    self.node_count
                ));
            }
        }
        for &b in &self.temptations {
            GameParams::new(b, UpdateRule::Accumulated)?;
        }
        self.protocol.validate()
    }

    pub fn point_count(&self) -> usize {
        self.shortcut_counts.len() * self.rules.len() * self.hub_counts.len() * self.temptations.len()
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::with_capacity(self.point_count());
        for &m in &self.shortcut_counts {
            for &rule in &self.rules {
                for &h in &self.hub_counts {
                    for &b in &self.temptations {
                        out.push(SweepPoint {
                            node_count: self.node_count,
                            kappa: self.kappa,
                            hub_count: h,
                            shortcut_count: m,
                            temptation: b,
                            rule,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Outcome of a single dynamics run inside a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub realization: usize,
    pub run: usize,
    pub topology_seed: u64,
    pub seed: u64,
    pub rho_c: f64,
    pub absorbed: Absorbed,
    pub generations: usize,
}

/// Aggregate over all replicates of one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    #[serde(flatten)]
    pub point: SweepPoint,
    pub initial_coop_fraction: f64,
    /// False for `b = 1` or `b = 2`, where the game is not a strict
    /// Prisoner's Dilemma.
    pub proper_pd: bool,
    pub rho_c_mean: f64,
    /// Sample standard deviation of per-run values.
    pub rho_c_std: f64,
    pub rho_c_stderr: f64,
    pub n_replicates: usize,
    pub absorbed_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub record: SweepRecord,
    pub runs: Vec<RunRecord>,
}

/// Sample mean and standard deviation (`n - 1` denominator, 0 for `n = 1`).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Evaluates one point. `point_index` selects the seed family.
pub fn run_point(
    point: &SweepPoint,
    protocol: &SimProtocol,
    replication: Replication,
    master_seed: u64,
    point_index: usize,
) -> Result<PointResult> {
    let params = GameParams::new(point.temptation, point.rule)?;
    let per_realization: Vec<Result<Vec<RunRecord>>> = (0..replication.realizations)
        .into_par_iter()
        .map(|r| {
            let topo = topology_seed(master_seed, r, point_index);
            let g = generate_hnw(
                point.node_count,
                point.kappa,
                point.hub_count,
                point.shortcut_count,
                &mut ChaCha8Rng::seed_from_u64(topo),
            )?;
            (0..replication.runs_per_realization)
                .into_par_iter()
                .map(|run| {
                    let seed = derive_seed(master_seed, r, run, point_index);
                    let proto = SimProtocol {
                        seed,
                        record_series: false,
                        ..protocol.clone()
                    };
                    let res = run_simulation(&g, &params, &proto)?;
                    Ok(RunRecord {
                        realization: r,
                        run,
                        topology_seed: topo,
                        seed,
                        rho_c: res.mean_coop_frequency,
                        absorbed: res.absorbed,
                        generations: res.generations_executed,
                    })
                })
                .collect()
        })
        .collect();

    let mut runs = Vec::with_capacity(replication.total());
    for chunk in per_realization {
        runs.extend(chunk?);
    }
    let values: Vec<f64> = runs.iter().map(|r| r.rho_c).collect();
    let (mean, std) = mean_std(&values);
    let n = runs.len();
    let absorbed = runs.iter().filter(|r| r.absorbed.is_absorbed()).count();
    Ok(PointResult {
        record: SweepRecord {
            point: *point,
            initial_coop_fraction: protocol.initial_coop_fraction,
            proper_pd: params.is_proper_pd(),
            rho_c_mean: mean,
            rho_c_std: std,
            rho_c_stderr: std / (n as f64).sqrt(),
            n_replicates: n,
            absorbed_fraction: absorbed as f64 / n as f64,
        },
        runs,
    })
}

/// A sweep that stopped on a failing point. `completed` holds every point
/// that finished, in sweep order.
#[derive(Debug)]
pub struct SweepFailure {
    pub completed: Vec<PointResult>,
    pub failed_point: SweepPoint,
    pub error: Error,
}

impl std::fmt::Display for SweepFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "sweep point (N_h={}, m={}, b={}) failed: {}",
            self.failed_point.hub_count,
            self.failed_point.shortcut_count,
            self.failed_point.temptation,
            self.error
        )
    }
}

impl std::error::Error for SweepFailure {}

impl From<Error> for SweepFailure {
    fn from(error: Error) -> Self {
        SweepFailure {
            completed: Vec::new(),
            failed_point: SweepPoint {
                node_count: 0,
                kappa: 0,
                hub_count: 0,
                shortcut_count: 0,
                temptation: f64::NAN,
                rule: UpdateRule::Accumulated,
            },
            error,
        }
    }
}

/// Runs every point of `spec`, in parallel on the current rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<PointResult>, SweepFailure> {
    spec.validate()?;
    let points = spec.points();
    let results: Vec<Result<PointResult>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| run_point(p, &spec.protocol, spec.replication, spec.master_seed, i))
        .collect();

    let mut completed = Vec::with_capacity(results.len());
    let mut first_error = None;
    for (point, res) in points.iter().zip(results) {
        match res {
            Ok(r) => completed.push(r),
            Err(e) if first_error.is_none() => first_error = Some((*point, e)),
            Err(_) => {}
        }
    }
    match first_error {
        None => Ok(completed),
        Some((failed_point, error)) => Err(SweepFailure {
            completed,
            failed_point,
            error,
        }),
    }
}

/// Runs `f` on a dedicated rayon pool of `workers` threads (0 = one per core).
pub fn with_workers<T, F>(workers: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// [`run_sweep`] on a dedicated pool of `workers` threads.
pub fn run_sweep_with_workers(
    spec: &SweepSpec,
    workers: usize,
) -> Result<Vec<PointResult>, SweepFailure> {
    with_workers(workers, || run_sweep(spec))?
}

fn require_single<T>(name: &str, grid: &[T]) -> Result<()> {
    if grid.len() != 1 {
        return config(format!("this sweep needs exactly one {name}, got {}", grid.len()));
    }
    Ok(())
}

/// Cooperation against hub count at fixed `b`, `m` and rule. One result per
/// entry of `hub_counts`, in order.
pub fn sweep_hub_fraction(spec: &SweepSpec) -> Result<Vec<PointResult>, SweepFailure> {
    require_single("temptation", &spec.temptations)?;
    require_single("shortcut count", &spec.shortcut_counts)?;
    require_single("update rule", &spec.rules)?;
    run_sweep(spec)
}

/// Cooperation against `b`, one curve per hub count. Results are grouped by
/// hub count, with `b` varying fastest.
pub fn sweep_b(spec: &SweepSpec) -> Result<Vec<PointResult>, SweepFailure> {
    require_single("shortcut count", &spec.shortcut_counts)?;
    require_single("update rule", &spec.rules)?;
    run_sweep(spec)
}

/// Dense `(b, N_h)` matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub temptations: Vec<f64>,
    pub hub_counts: Vec<usize>,
    /// `cells[i][j]` is the point `(temptations[i], hub_counts[j])`.
    pub cells: Vec<Vec<PointResult>>,
}

pub fn sweep_grid(spec: &SweepSpec) -> Result<SweepGrid, SweepFailure> {
    require_single("shortcut count", &spec.shortcut_counts)?;
    require_single("update rule", &spec.rules)?;
    let flat = run_sweep(spec)?;
    let nb = spec.temptations.len();
    let mut cells: Vec<Vec<PointResult>> = (0..nb).map(|_| Vec::new()).collect();
    // Flat order is hub-major with b fastest.
    for (i, r) in flat.into_iter().enumerate() {
        cells[i % nb].push(r);
    }
    Ok(SweepGrid {
        temptations: spec.temptations.clone(),
        hub_counts: spec.hub_counts.clone(),
        cells,
    })
}

/// Hub-fraction curves for several shortcut counts. Results are grouped by
/// `m` in the order given.
pub fn sweep_m(spec: &SweepSpec) -> Result<Vec<Vec<PointResult>>, SweepFailure> {
    require_single("temptation", &spec.temptations)?;
    require_single("update rule", &spec.rules)?;
    let flat = run_sweep(spec)?;
    let per_m = spec.hub_counts.len();
    let mut out = Vec::with_capacity(spec.shortcut_counts.len());
    let mut it = flat.into_iter();
    for _ in &spec.shortcut_counts {
        out.push(it.by_ref().take(per_m).collect());
    }
    Ok(out)
}

/// One point of the degree-dispersion curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterogeneityPoint {
    pub hub_count: usize,
    pub hub_fraction: f64,
    pub node_count: usize,
    pub kappa: usize,
    pub shortcut_count: usize,
    pub mean_degree: f64,
    pub paper_h: f64,
    pub variance: f64,
    pub realizations: usize,
}

/// Degree statistics averaged over `realizations` networks per hub count.
/// No dynamics are run.
pub fn heterogeneity_curve(
    node_count: usize,
    kappa: usize,
    shortcut_count: usize,
    hub_counts: &[usize],
    realizations: usize,
    master_seed: u64,
) -> Result<Vec<HeterogeneityPoint>> {
    if hub_counts.is_empty() {
        return config("hub count grid is empty");
    }
    if realizations == 0 || realizations > MAX_REALIZATION + 1 {
        return config("realization count out of range");
    }
    hub_counts
        .par_iter()
        .enumerate()
        .map(|(i, &h)| {
            let mut sums = (0.0, 0.0, 0.0);
            for r in 0..realizations {
                let mut rng = ChaCha8Rng::seed_from_u64(topology_seed(master_seed, r, i));
                let g = generate_hnw(node_count, kappa, h, shortcut_count, &mut rng)?;
                let s = degree_stats(&g);
                sums.0 += s.mean_degree;
                sums.1 += s.paper_h;
                sums.2 += s.variance;
            }
            let k = realizations as f64;
            Ok(HeterogeneityPoint {
                hub_count: h,
                hub_fraction: h as f64 / node_count as f64,
                node_count,
                kappa,
                shortcut_count,
                mean_degree: sums.0 / k,
                paper_h: sums.1 / k,
                variance: sums.2 / k,
                realizations,
            })
        })
        .collect()
}

/// Hub counts spaced evenly in `log(N_h / N)` from 1 to `node_count`,
/// rounded and deduplicated. Always contains both endpoints.
pub fn log_hub_grid(node_count: usize, points: usize) -> Vec<usize> {
    assert!(node_count >= 1);
    if points < 2 || node_count == 1 {
        let mut grid = vec![1, node_count];
        grid.dedup();
        return grid;
    }
    let top = (node_count as f64).ln();
    let mut grid: Vec<usize> = (0..points)
        .map(|i| {
            let x = (top * i as f64 / (points - 1) as f64).exp().round() as usize;
            x.clamp(1, node_count)
        })
        .collect();
    grid.dedup();
    grid
}

/// `start, start + step, ..., end` computed on a hundredths lattice so grid
/// values are exact decimal literals.
pub fn decimal_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let s = (start * 100.0).round() as i64;
    let e = (end * 100.0).round() as i64;
    let d = (step * 100.0).round() as i64;
    assert!(d > 0, "grid step must be at least 0.01");
    (0..)
        .map(|i| s + i * d)
        .take_while(|&v| v <= e)
        .map(|v| v as f64 / 100.0)
        .collect()
}

/// `b = 1.00, 1.05, ..., 2.00`.
pub fn default_temptation_grid() -> Vec<f64> {
    decimal_grid(1.0, 2.0, 0.05)
}

/// Formats like C's `%.6g`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub const RECORD_CSV_HEADER: &str =
    "b,N_h,N,kappa,m,rule,rho_c_mean,rho_c_std,rho_c_stderr,n_replicates,absorbed_fraction";

pub fn write_records_csv<'a, W, I>(records: I, mut sink: W) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a SweepRecord>,
{
    writeln!(sink, "{RECORD_CSV_HEADER}")?;
    for r in records {
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{},{},{}",
            format_sig6(r.point.temptation),
            r.point.hub_count,
            r.point.node_count,
            r.point.kappa,
            r.point.shortcut_count,
            r.point.rule,
            format_sig6(r.rho_c_mean),
            format_sig6(r.rho_c_std),
            format_sig6(r.rho_c_stderr),
            r.n_replicates,
            format_sig6(r.absorbed_fraction),
        )?;
    }
    sink.flush()
}

pub const HETEROGENEITY_CSV_HEADER: &str =
    "nh_fraction,N_h,N,kappa,m,mean_degree,paper_h,variance,n_realizations";

pub fn write_heterogeneity_csv<W: Write>(points: &[HeterogeneityPoint], mut sink: W) -> io::Result<()> {
    writeln!(sink, "{HETEROGENEITY_CSV_HEADER}")?;
    for p in points {
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{}",
            format_sig6(p.hub_fraction),
            p.hub_count,
            p.node_count,
            p.kappa,
            p.shortcut_count,
            format_sig6(p.mean_degree),
            format_sig6(p.paper_h),
            format_sig6(p.variance),
            p.realizations,
        )?;
    }
    sink.flush()
}

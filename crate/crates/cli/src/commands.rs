use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use hnw_core::dynamics::write_trace;
use hnw_core::edgelist::{read_edge_list, write_edge_list};
use hnw_core::seed::{derive_seed, topology_seed};
use hnw_core::sweep::{
    format_sig6, heterogeneity_curve, run_sweep_with_workers, sweep_grid, write_heterogeneity_csv,
    with_workers, write_records_csv, PointResult, SweepFailure, SweepGrid,
};
use hnw_core::{
    degree_stats, generate_hnw, run_simulation, GameParams, Graph, Replication, SweepSpec,
    UpdateRule,
};

use crate::config::{ConfigError, OutputFormat, RunConfig, SweepGrids, SweepKind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "hnw",
    version,
    about = "Evolutionary Prisoner's Dilemma on heterogeneous Newman-Watts networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one network, write its edge list and print degree statistics.
    Generate(Common),
    /// Run one simulation and print the equilibrium cooperator fraction.
    Run {
        #[command(flatten)]
        common: Common,
        /// Simulate on this edge list instead of generating a network.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run a replicated parameter sweep and write CSV/JSON results.
    Sweep(Common),
    /// Print degree statistics of an edge list or of a generated network.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Flags shared by every subcommand. Each one overrides the config key of
/// the same name.
#[derive(Debug, Default, Args)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// protocol.seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// output.dir
    #[arg(long)]
    pub out: Option<String>,
    /// sweep.workers (0 = all cores)
    #[arg(long)]
    pub workers: Option<usize>,
    /// output.format
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// network.N
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// network.kappa
    #[arg(long)]
    pub kappa: Option<usize>,
    /// network.Nh
    #[arg(long = "Nh")]
    pub nh: Option<usize>,
    /// network.m
    #[arg(long)]
    pub m: Option<usize>,
    /// game.b
    #[arg(long)]
    pub b: Option<f64>,
    /// game.rule
    #[arg(long)]
    pub rule: Option<UpdateRule>,
    /// protocol.transient
    #[arg(long)]
    pub transient: Option<usize>,
    /// protocol.measure
    #[arg(long)]
    pub measure: Option<usize>,
    /// protocol.rho0
    #[arg(long)]
    pub rho0: Option<f64>,
    /// protocol.early_absorb_exit
    #[arg(long)]
    pub early_absorb_exit: Option<bool>,
    /// sweep.kind
    #[arg(long, value_enum)]
    pub kind: Option<SweepKind>,
    /// sweep.realizations
    #[arg(long)]
    pub realizations: Option<usize>,
    /// sweep.runs
    #[arg(long)]
    pub runs: Option<usize>,
    /// sweep.Nh_log_points
    #[arg(long = "Nh-log-points")]
    pub nh_log_points: Option<usize>,
    /// output.trace
    #[arg(long)]
    pub trace: bool,
}

impl Common {
    /// Loads the config file (if any) and applies flag overrides.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Validation(format!("cannot read {}: {e}", path.display()))
                })?;
                RunConfig::from_toml_str(&text)?
            }
            None => RunConfig::default(),
        };
        macro_rules! apply {
            ($flag:expr => $slot:expr) => {
                if let Some(v) = $flag.clone() {
                    $slot = v;
                }
            };
        }
        apply!(self.seed => cfg.protocol.seed);
        apply!(self.out => cfg.output.dir);
        apply!(self.workers => cfg.sweep.workers);
        apply!(self.format => cfg.output.format);
        apply!(self.n => cfg.network.n);
        apply!(self.kappa => cfg.network.kappa);
        apply!(self.nh => cfg.network.nh);
        apply!(self.m => cfg.network.m);
        apply!(self.b => cfg.game.b);
        apply!(self.rule => cfg.game.rule);
        apply!(self.transient => cfg.protocol.transient);
        apply!(self.measure => cfg.protocol.measure);
        apply!(self.rho0 => cfg.protocol.rho0);
        apply!(self.early_absorb_exit => cfg.protocol.early_absorb_exit);
        apply!(self.realizations => cfg.sweep.realizations);
        apply!(self.runs => cfg.sweep.runs);
        apply!(self.nh_log_points => cfg.sweep.nh_log_points);
        if self.kind.is_some() {
            cfg.sweep.kind = self.kind;
        }
        if self.trace {
            cfg.output.trace = true;
        }
        Ok(cfg)
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(common) => generate(&common.resolve()?),
        Command::Run { common, input } => run(&common.resolve()?, input.as_deref()),
        Command::Sweep(common) => sweep(&common.resolve()?),
        Command::Stats { common, input } => stats(&common.resolve()?, input.as_deref()),
    }
}

fn prepare_out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
    fs::write(dir.join("config.toml"), cfg.to_toml_string()).map_err(runtime)?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| runtime(format!("cannot create {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(runtime)?;
    writeln!(w).and_then(|_| w.flush()).map_err(runtime)
}

fn build_network(cfg: &RunConfig) -> Result<Graph, CliError> {
    let net = &cfg.network;
    let mut rng = ChaCha8Rng::seed_from_u64(topology_seed(cfg.protocol.seed, 0, 0));
    generate_hnw(net.n, net.kappa, net.nh, net.m, &mut rng).map_err(runtime)
}

fn load_network(path: &Path) -> Result<Graph, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Validation(format!("cannot open {}: {e}", path.display())))?;
    read_edge_list(file).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn print_stats(g: &Graph, format: OutputFormat) {
    let s = degree_stats(g);
    match format {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&s).unwrap()),
        OutputFormat::Csv => {
            println!(
                "N={} kappa={} Nh={} m={}",
                g.node_count(),
                g.kappa(),
                g.hub_count(),
                g.shortcut_count()
            );
            println!(
                "mean_degree={} paper_h={} variance={}",
                format_sig6(s.mean_degree),
                format_sig6(s.paper_h),
                format_sig6(s.variance)
            );
        }
    }
}

pub fn generate(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate_network()?;
    let g = build_network(cfg)?;
    let dir = prepare_out_dir(cfg)?;
    let path = dir.join("graph.edges");
    write_edge_list(&g, create(&path)?).map_err(runtime)?;
    write_json(&dir.join("stats.json"), &degree_stats(&g))?;
    print_stats(&g, cfg.output.format);
    Ok(())
}

pub fn stats(cfg: &RunConfig, input: Option<&Path>) -> Result<(), CliError> {
    let g = match input {
        Some(path) => load_network(path)?,
        None => {
            cfg.validate_network()?;
            build_network(cfg)?
        }
    };
    print_stats(&g, cfg.output.format);
    Ok(())
}

pub fn run(cfg: &RunConfig, input: Option<&Path>) -> Result<(), CliError> {
    let g = match input {
        Some(path) => {
            cfg.validate_game()?;
            cfg.validate_protocol()?;
            load_network(path)?
        }
        None => {
            cfg.validate_single()?;
            build_network(cfg)?
        }
    };
    let params = GameParams::new(cfg.game.b, cfg.game.rule).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut proto = cfg.sim_protocol();
    proto.seed = derive_seed(cfg.protocol.seed, 0, 0, 0);
    let result = run_simulation(&g, &params, &proto).map_err(runtime)?;

    let dir = prepare_out_dir(cfg)?;
    if let Some(series) = &result.series {
        write_trace(series, create(&dir.join("trace.csv"))?).map_err(runtime)?;
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        rho_c: f64,
        absorbed: &'a str,
        generations: usize,
        proper_pd: bool,
    }
    let summary = Summary {
        rho_c: result.mean_coop_frequency,
        absorbed: result.absorbed.as_str(),
        generations: result.generations_executed,
        proper_pd: params.is_proper_pd(),
    };
    write_json(&dir.join("result.json"), &summary)?;
    match cfg.output.format {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&summary).unwrap()),
        OutputFormat::Csv => {
            println!(
                "rho_c={} absorbed={} generations={}",
                format_sig6(summary.rho_c),
                summary.absorbed,
                summary.generations
            );
            if !summary.proper_pd {
                println!("warning: b={} is not a proper Prisoner's Dilemma", cfg.game.b);
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    status: &'a str,
    kind: SweepKind,
    total_points: usize,
    completed_points: usize,
    files: Vec<String>,
    error: Option<String>,
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let grids = cfg.sweep_grids()?;
    let dir = prepare_out_dir(cfg)?;
    if grids.kind == SweepKind::Heterogeneity {
        return heterogeneity(cfg, &grids, &dir);
    }

    let mut files = Vec::new();
    let mut completed = 0;
    let mut total = 0;
    let multi = grids.rho0_values.len() > 1;
    for &rho0 in &grids.rho0_values {
        let spec = SweepSpec {
            node_count: cfg.network.n,
            kappa: cfg.network.kappa,
            shortcut_counts: grids.shortcut_counts.clone(),
            hub_counts: grids.hub_counts.clone(),
            temptations: grids.temptations.clone(),
            rules: grids.rules.clone(),
            protocol: hnw_core::SimProtocol {
                initial_coop_fraction: rho0,
                record_series: false,
                ..cfg.sim_protocol()
            },
            replication: Replication {
                realizations: cfg.sweep.realizations,
                runs_per_realization: cfg.sweep.runs,
            },
            master_seed: cfg.protocol.seed,
        };
        total += spec.point_count();
        let suffix = if multi {
            format!("_rho0-{}", format_sig6(rho0))
        } else {
            String::new()
        };
        let stem = format!("{}{suffix}", grids.kind.file_stem());

        let outcome = if grids.kind == SweepKind::Grid {
            with_workers(cfg.sweep.workers, || sweep_grid(&spec))
                .map_err(runtime)?
                .map(|grid| {
                write_grid_matrix(&grid, &dir.join(format!("{stem}_matrix.csv")), &mut files)
                    .map(|_| grid_flat(grid))
            })
        } else {
            run_sweep_with_workers(&spec, cfg.sweep.workers).map(Ok)
        };

        match outcome {
            Ok(results) => {
                let results = results?;
                completed += results.len();
                write_results(cfg, &dir, &stem, &results, &mut files)?;
            }
            Err(SweepFailure {
                completed: partial,
                failed_point,
                error,
            }) => {
                completed += partial.len();
                write_results(cfg, &dir, &stem, &partial, &mut files)?;
                let msg = format!(
                    "point N_h={} m={} b={} failed: {error}",
                    failed_point.hub_count, failed_point.shortcut_count, failed_point.temptation
                );
                write_manifest(&dir, "failed", grids.kind, total, completed, files, Some(msg.clone()))?;
                return Err(CliError::Runtime(msg));
            }
        }
    }
    write_manifest(&dir, "complete", grids.kind, total, completed, files.clone(), None)?;
    for f in files {
        println!("wrote {}", dir.join(f).display());
    }
    Ok(())
}

fn grid_flat(grid: SweepGrid) -> Vec<PointResult> {
    // Back to hub-major order with b fastest, matching the other sweeps.
    let nb = grid.cells.len();
    let nh = grid.hub_counts.len();
    let mut cells: Vec<std::vec::IntoIter<PointResult>> =
        grid.cells.into_iter().map(|row| row.into_iter()).collect();
    let mut out = Vec::with_capacity(nb * nh);
    for _ in 0..nh {
        for row in cells.iter_mut() {
            out.extend(row.next());
        }
    }
    out
}

fn write_grid_matrix(grid: &SweepGrid, path: &Path, files: &mut Vec<String>) -> Result<(), CliError> {
    let mut w = create(path)?;
    let header: Vec<String> = grid.hub_counts.iter().map(|h| h.to_string()).collect();
    writeln!(w, "b\\N_h,{}", header.join(",")).map_err(runtime)?;
    for (b, row) in grid.temptations.iter().zip(&grid.cells) {
        let cells: Vec<String> = row.iter().map(|c| format_sig6(c.record.rho_c_mean)).collect();
        writeln!(w, "{},{}", format_sig6(*b), cells.join(",")).map_err(runtime)?;
    }
    w.flush().map_err(runtime)?;
    files.push(path.file_name().unwrap().to_string_lossy().into_owned());
    Ok(())
}

fn write_results(
    cfg: &RunConfig,
    dir: &Path,
    stem: &str,
    results: &[PointResult],
    files: &mut Vec<String>,
) -> Result<(), CliError> {
    match cfg.output.format {
        OutputFormat::Csv => {
            let name = format!("{stem}.csv");
            write_records_csv(results.iter().map(|r| &r.record), create(&dir.join(&name))?)
                .map_err(runtime)?;
            files.push(name);
            let raw = format!("{stem}_raw_runs.json");
            write_json(&dir.join(&raw), &results)?;
            files.push(raw);
        }
        OutputFormat::Json => {
            let name = format!("{stem}.json");
            write_json(&dir.join(&name), &results)?;
            files.push(name);
        }
    }
    Ok(())
}

fn write_manifest(
    dir: &Path,
    status: &str,
    kind: SweepKind,
    total_points: usize,
    completed_points: usize,
    files: Vec<String>,
    error: Option<String>,
) -> Result<(), CliError> {
    write_json(
        &dir.join("manifest.json"),
        &Manifest {
            status,
            kind,
            total_points,
            completed_points,
            files,
            error,
        },
    )
}

fn heterogeneity(cfg: &RunConfig, grids: &SweepGrids, dir: &Path) -> Result<(), CliError> {
    let mut points = Vec::new();
    for &m in &grids.shortcut_counts {
        let curve = heterogeneity_curve(
            cfg.network.n,
            cfg.network.kappa,
            m,
            &grids.hub_counts,
            cfg.sweep.realizations,
            cfg.protocol.seed,
        );
        match curve {
            Ok(c) => points.extend(c),
            Err(e) => {
                write_manifest(
                    dir,
                    "failed",
                    grids.kind,
                    grids.hub_counts.len() * grids.shortcut_counts.len(),
                    points.len(),
                    Vec::new(),
                    Some(e.to_string()),
                )?;
                return Err(runtime(e));
            }
        }
    }
    let name = match cfg.output.format {
        OutputFormat::Csv => {
            let name = "heterogeneity.csv".to_string();
            write_heterogeneity_csv(&points, create(&dir.join(&name))?).map_err(runtime)?;
            name
        }
        OutputFormat::Json => {
            let name = "heterogeneity.json".to_string();
            write_json(&dir.join(&name), &points)?;
            name
        }
    };
    write_manifest(
        dir,
        "complete",
        grids.kind,
        points.len(),
        points.len(),
        vec![name.clone()],
        None,
    )?;
    println!("wrote {}", dir.join(name).display());
    Ok(())
}

//! Run configuration: a TOML document with `network`, `game`, `protocol`,
//! `sweep` and `output` sections. Every section and key is optional and
//! falls back to the defaults below; unknown keys are rejected.
//!
//! ```toml
//! [network]
//! N = 2001          # ring size
//! kappa = 2         # ring half-width
//! Nh = 41           # number of hubs
//! m = 1000          # number of shortcuts
//!
//! [game]
//! b = 1.2           # temptation to defect, 1 <= b <= 2
//! rule = "accumulated"   # or "average"
//!
//! [protocol]
//! transient = 10000
//! measure = 2000
//! rho0 = 0.5        # initial cooperator fraction
//! seed = 0
//! early_absorb_exit = true
//!
//! [sweep]
//! kind = "hub-fraction"  # b | hub-fraction | grid | m | heterogeneity
//! b_grid = [1.1, 1.2]    # default: game.b, or 1.00..2.00 step 0.05 for b and grid
//! Nh_grid = [1, 41, 2001]  # default: log grid of Nh_log_points, or network.Nh for b
//! Nh_log_points = 12
//! m_grid = [800, 1000, 1200]  # default: network.m
//! rules = ["accumulated", "average"]  # default: game.rule
//! rho0_values = [0.2, 0.5, 0.8]  # default: protocol.rho0; one CSV per value
//! realizations = 10
//! runs = 10
//! workers = 0       # 0 = all available cores
//!
//! [output]
//! dir = "hnw-out"
//! format = "csv"    # or "json"
//! trace = false     # write trace.csv from `run`
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use hnw_core::graph::guaranteed_shortcut_capacity;
use hnw_core::sweep::{default_temptation_grid, log_hub_grid};
use hnw_core::{GameParams, SimProtocol, UpdateRule};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub kappa: usize,
    #[serde(rename = "Nh")]
    pub nh: usize,
    pub m: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n: 2001,
            kappa: 2,
            nh: 41,
            m: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameConfig {
    pub b: f64,
    pub rule: UpdateRule,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            b: 1.2,
            rule: UpdateRule::Accumulated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub transient: usize,
    pub measure: usize,
    pub rho0: f64,
    pub seed: u64,
    pub early_absorb_exit: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        let d = SimProtocol::default();
        Self {
            transient: d.transient_generations,
            measure: d.measure_generations,
            rho0: d.initial_coop_fraction,
            seed: d.seed,
            early_absorb_exit: d.early_absorb_exit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    B,
    HubFraction,
    Grid,
    M,
    Heterogeneity,
}

impl SweepKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            SweepKind::B => "b",
            SweepKind::HubFraction => "hub_fraction",
            SweepKind::Grid => "grid",
            SweepKind::M => "m",
            SweepKind::Heterogeneity => "heterogeneity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<SweepKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_grid: Option<Vec<f64>>,
    #[serde(rename = "Nh_grid", skip_serializing_if = "Option::is_none")]
    pub nh_grid: Option<Vec<usize>>,
    #[serde(rename = "Nh_log_points")]
    pub nh_log_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rules: Option<Vec<UpdateRule>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho0_values: Option<Vec<f64>>,
    pub realizations: usize,
    pub runs: usize,
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            kind: None,
            b_grid: None,
            nh_grid: None,
            nh_log_points: 12,
            m_grid: None,
            rules: None,
            rho0_values: None,
            realizations: 10,
            runs: 10,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub format: OutputFormat,
    pub trace: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "hnw-out".to_string(),
            format: OutputFormat::Csv,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub network: NetworkConfig,
    pub game: GameConfig,
    pub protocol: ProtocolConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

/// Fully resolved sweep grids.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrids {
    pub kind: SweepKind,
    pub temptations: Vec<f64>,
    pub hub_counts: Vec<usize>,
    pub shortcut_counts: Vec<usize>,
    pub rules: Vec<UpdateRule>,
    pub rho0_values: Vec<f64>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate_network(&self) -> Result<(), ConfigError> {
        let net = &self.network;
        validate_ring(net.n, net.kappa)?;
        validate_hubs(net.n, net.nh)?;
        validate_shortcuts(net.n, net.kappa, net.nh, net.m)
    }

    pub fn validate_game(&self) -> Result<(), ConfigError> {
        GameParams::new(self.game.b, self.game.rule)
            .map(|_| ())
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn validate_protocol(&self) -> Result<(), ConfigError> {
        self.sim_protocol()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Validates every section a `generate` or `run` invocation touches.
    pub fn validate_single(&self) -> Result<(), ConfigError> {
        self.validate_network()?;
        self.validate_game()?;
        self.validate_protocol()
    }

    pub fn sim_protocol(&self) -> SimProtocol {
        SimProtocol {
            transient_generations: self.protocol.transient,
            measure_generations: self.protocol.measure,
            initial_coop_fraction: self.protocol.rho0,
            seed: self.protocol.seed,
            early_absorb_exit: self.protocol.early_absorb_exit,
            record_series: self.output.trace,
        }
    }

    /// Resolves and validates the sweep grids, filling defaults.
    pub fn sweep_grids(&self) -> Result<SweepGrids, ConfigError> {
        let s = &self.sweep;
        let net = &self.network;
        let Some(kind) = s.kind else {
            return invalid("sweep.kind is required for the sweep command");
        };
        validate_ring(net.n, net.kappa)?;

        let temptations = match (&s.b_grid, kind) {
            (Some(grid), _) => grid.clone(),
            (None, SweepKind::B | SweepKind::Grid) => default_temptation_grid(),
            (None, _) => vec![self.game.b],
        };
        let hub_counts = match (&s.nh_grid, kind) {
            (Some(grid), _) => grid.clone(),
            (None, SweepKind::B) => vec![net.nh],
            (None, _) => {
                if s.nh_log_points == 0 || s.nh_log_points > net.n {
                    return invalid(format!(
                        "sweep.Nh_log_points must lie in 1..={}",
                        net.n
                    ));
                }
                log_hub_grid(net.n, s.nh_log_points)
            }
        };
        let shortcut_counts = s.m_grid.clone().unwrap_or_else(|| vec![net.m]);
        let rules = s.rules.clone().unwrap_or_else(|| vec![self.game.rule]);
        let rho0_values = s.rho0_values.clone().unwrap_or_else(|| vec![self.protocol.rho0]);

        for (name, empty) in [
            ("sweep.b_grid", temptations.is_empty()),
            ("sweep.Nh_grid", hub_counts.is_empty()),
            ("sweep.m_grid", shortcut_counts.is_empty()),
            ("sweep.rules", rules.is_empty()),
            ("sweep.rho0_values", rho0_values.is_empty()),
        ] {
            if empty {
                return invalid(format!("{name} must not be empty"));
            }
        }
        if kind == SweepKind::Grid && (shortcut_counts.len() != 1 || rules.len() != 1) {
            return invalid("a grid sweep needs exactly one shortcut count and one rule");
        }
        if s.realizations == 0 || s.runs == 0 {
            return invalid("sweep.realizations and sweep.runs must be at least 1");
        }
        for &h in &hub_counts {
            validate_hubs(net.n, h)?;
            for &m in &shortcut_counts {
                validate_shortcuts(net.n, net.kappa, h, m)?;
            }
        }
        if kind != SweepKind::Heterogeneity {
            for &b in &temptations {
                GameParams::new(b, UpdateRule::Accumulated)
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
            for &rho0 in &rho0_values {
                let proto = SimProtocol {
                    initial_coop_fraction: rho0,
                    ..self.sim_protocol()
                };
                proto
                    .validate()
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
        }
        Ok(SweepGrids {
            kind,
            temptations,
            hub_counts,
            shortcut_counts,
            rules,
            rho0_values,
        })
    }
}

fn validate_ring(n: usize, kappa: usize) -> Result<(), ConfigError> {
    if kappa == 0 {
        return invalid("network.kappa must be at least 1");
    }
    if kappa > n.saturating_sub(1) / 2 {
        return invalid(format!(
            "network.N={n} is too small for kappa={kappa} (need N >= 2*kappa+1)"
        ));
    }
    Ok(())
}

fn validate_hubs(n: usize, nh: usize) -> Result<(), ConfigError> {
    if nh == 0 || nh > n {
        return invalid(format!("hub count Nh={nh} must lie in 1..={n}"));
    }
    Ok(())
}

fn validate_shortcuts(n: usize, kappa: usize, nh: usize, m: usize) -> Result<(), ConfigError> {
    let cap = guaranteed_shortcut_capacity(n, kappa, nh);
    if m > cap {
        return invalid(format!(
            "m={m} shortcuts may not fit: with N={n}, kappa={kappa}, Nh={nh} only {cap} \
             non-ring hub pairs are guaranteed"
        ));
    }
    Ok(())
}

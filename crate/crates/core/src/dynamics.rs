//! Synchronous imitation dynamics and equilibrium measurement.
//!
//! Each generation every node plays one round with all neighbors, then every
//! node samples one neighbor and may copy it. All copies take effect at once.
//! The random draws of node `x` in generation `t` come from a stream keyed by
//! `(seed, t, x)`, so a generation's outcome does not depend on the order or
//! the thread in which nodes are visited.

use std::io::{self, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::game::{accumulate_payoffs, adoption_probability, GameParams, Strategy};
use crate::graph::Graph;
use crate::seed::node_stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimProtocol {
    pub transient_generations: usize,
    pub measure_generations: usize,
    pub initial_coop_fraction: f64,
    pub seed: u64,
    /// Stop as soon as the population is all-C or all-D. Both states are
    /// absorbing, so the measured mean is unchanged.
    pub early_absorb_exit: bool,
    /// Keep the cooperator fraction of every executed generation.
    pub record_series: bool,
}

impl Default for SimProtocol {
    fn default() -> Self {
        Self {
            transient_generations: 10_000,
            measure_generations: 2_000,
            initial_coop_fraction: 0.5,
            seed: 0,
            early_absorb_exit: true,
            record_series: false,
        }
    }
}

impl SimProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.measure_generations == 0 {
            return config("measurement window must span at least one generation");
        }
        if !(0.0..=1.0).contains(&self.initial_coop_fraction) {
            return config(format!(
                "initial cooperator fraction must lie in [0, 1], got {}",
                self.initial_coop_fraction
            ));
        }
        Ok(())
    }

    pub fn total_generations(&self) -> usize {
        self.transient_generations + self.measure_generations
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Absorbed {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "all-C")]
    AllCooperate,
    #[serde(rename = "all-D")]
    AllDefect,
}

impl Absorbed {
    fn classify(cooperators: usize, n: usize) -> Self {
        if cooperators == 0 {
            Absorbed::AllDefect
        } else if cooperators == n {
            Absorbed::AllCooperate
        } else {
            Absorbed::None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Absorbed::None => "none",
            Absorbed::AllCooperate => "all-C",
            Absorbed::AllDefect => "all-D",
        }
    }

    pub fn is_absorbed(self) -> bool {
        self != Absorbed::None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Mean cooperator fraction over the measurement window.
    pub mean_coop_frequency: f64,
    /// State of the population when the run ended.
    pub absorbed: Absorbed,
    pub generations_executed: usize,
    pub series: Option<Vec<f64>>,
}

/// Exactly `round(fraction * n)` cooperators (halves round up) at uniformly
/// random positions.
pub fn init_strategies<R: Rng + ?Sized>(n: usize, fraction: f64, rng: &mut R) -> Vec<Strategy> {
    assert!((0.0..=1.0).contains(&fraction), "fraction out of [0, 1]");
    let cooperators = ((fraction * n as f64) + 0.5).floor() as usize;
    let cooperators = cooperators.min(n);
    let mut s = vec![Strategy::Defect; n];
    for x in index::sample(rng, n, cooperators) {
        s[x] = Strategy::Cooperate;
    }
    s
}

/// Next strategy of node `x`, given this generation's payoffs.
#[inline]
pub fn node_update(
    g: &Graph,
    strategies: &[Strategy],
    payoffs: &[f64],
    params: &GameParams,
    x: usize,
    run_seed: u64,
    generation: u64,
) -> Strategy {
    let adj = g.neighbors(x);
    let mut rng = node_stream(run_seed, generation, x);
    let y = adj[rng.random_range(0..adj.len())];
    if strategies[y] == strategies[x] {
        return strategies[x];
    }
    let w = adoption_probability(payoffs[x], payoffs[y], adj.len(), g.degree(y), params);
    if w > 0.0 && rng.random::<f64>() < w {
        strategies[y]
    } else {
        strategies[x]
    }
}

/// One synchronous generation. The result depends only on the input state
/// and the `(run_seed, generation)` key.
pub fn generation_step(
    g: &Graph,
    strategies: &[Strategy],
    params: &GameParams,
    run_seed: u64,
    generation: u64,
) -> Vec<Strategy> {
    let payoffs = accumulate_payoffs(g, strategies, params);
    (0..g.node_count())
        .map(|x| node_update(g, strategies, &payoffs, params, x, run_seed, generation))
        .collect()
}

/// [`generation_step`] with nodes spread over the rayon pool. Output is
/// identical to the sequential version.
pub fn generation_step_parallel(
    g: &Graph,
    strategies: &[Strategy],
    params: &GameParams,
    run_seed: u64,
    generation: u64,
) -> Vec<Strategy> {
    let payoffs = accumulate_payoffs(g, strategies, params);
    (0..g.node_count())
        .into_par_iter()
        .map(|x| node_update(g, strategies, &payoffs, params, x, run_seed, generation))
        .collect()
}

pub fn cooperator_count(strategies: &[Strategy]) -> usize {
    strategies.iter().filter(|s| s.is_cooperator()).count()
}

/// Runs the transient, then averages the cooperator fraction over the
/// measurement window.
///
/// The initial condition is drawn from `ChaCha8Rng::seed_from_u64(seed)`;
/// updates use per-node streams keyed by the same seed.
pub fn run_simulation(g: &Graph, params: &GameParams, proto: &SimProtocol) -> Result<SimResult> {
    proto.validate()?;
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(proto.seed);
    let mut strategies = init_strategies(n, proto.initial_coop_fraction, &mut rng);
    let mut cooperators = cooperator_count(&strategies);

    let total = proto.total_generations();
    let mut series = proto.record_series.then(|| Vec::with_capacity(total));
    let mut window_sum = 0.0;
    let mut executed = 0;

    while executed < total {
        let state = Absorbed::classify(cooperators, n);
        if proto.early_absorb_exit && state.is_absorbed() {
            let value = if state == Absorbed::AllCooperate { 1.0 } else { 0.0 };
            let measured = executed.saturating_sub(proto.transient_generations);
            window_sum += value * (proto.measure_generations - measured) as f64;
            break;
        }
        strategies = generation_step(g, &strategies, params, proto.seed, executed as u64);
        cooperators = cooperator_count(&strategies);
        let rho = cooperators as f64 / n as f64;
        if let Some(series) = series.as_mut() {
            series.push(rho);
        }
        if executed >= proto.transient_generations {
            window_sum += rho;
        }
        executed += 1;
    }

    Ok(SimResult {
        mean_coop_frequency: window_sum / proto.measure_generations as f64,
        absorbed: Absorbed::classify(cooperators, n),
        generations_executed: executed,
        series,
    })
}

/// Writes `generation,rho_c` lines, generations numbered from 1.
pub fn write_trace<W: Write>(series: &[f64], mut sink: W) -> io::Result<()> {
    for (t, rho) in series.iter().enumerate() {
        writeln!(sink, "{},{}", t + 1, rho)?;
    }
    sink.flush()
}

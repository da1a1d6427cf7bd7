//! Rescaled Prisoner's Dilemma payoffs and imitation probabilities.
//!
//! The payoff matrix is fixed by the temptation `b` alone: `R = 1`,
//! `S = P = 0`, `T = b`.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "C")]
    Cooperate,
    #[serde(rename = "D")]
    Defect,
}

impl Strategy {
    /// `(1, 0)` for a cooperator, `(0, 1)` for a defector.
    pub fn unit_vector(self) -> [f64; 2] {
        match self {
            Strategy::Cooperate => [1.0, 0.0],
            Strategy::Defect => [0.0, 1.0],
        }
    }

    pub fn is_cooperator(self) -> bool {
        self == Strategy::Cooperate
    }
}

/// Which payoff the imitation step compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum UpdateRule {
    /// Accumulated payoffs, normalized by `b * max(k_x, k_y)`.
    Accumulated,
    /// Degree-averaged payoffs `P_x / k_x`, normalized by `b`.
    Average,
}

impl UpdateRule {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateRule::Accumulated => "accumulated",
            UpdateRule::Average => "average",
        }
    }
}

impl std::fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for UpdateRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "accumulated" => Ok(UpdateRule::Accumulated),
            "average" => Ok(UpdateRule::Average),
            other => Err(format!(
                "unknown update rule `{other}` (expected accumulated or average)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    temptation: f64,
    rule: UpdateRule,
}

impl GameParams {
    /// Accepts `1 <= b <= 2`. The endpoints are allowed for sweeps but are
    /// not a strict Prisoner's Dilemma; see [`GameParams::is_proper_pd`].
    pub fn new(temptation: f64, rule: UpdateRule) -> Result<Self> {
        if !(1.0..=2.0).contains(&temptation) {
            return config(format!("temptation b must lie in [1, 2], got {temptation}"));
        }
        Ok(Self { temptation, rule })
    }

    pub fn temptation(&self) -> f64 {
        self.temptation
    }

    pub fn rule(&self) -> UpdateRule {
        self.rule
    }

    /// True for `1 < b < 2`.
    pub fn is_proper_pd(&self) -> bool {
        self.temptation > 1.0 && self.temptation < 2.0
    }

    /// Row player's payoff matrix, rows and columns ordered (C, D).
    pub fn payoff_matrix(&self) -> [[f64; 2]; 2] {
        [[1.0, 0.0], [self.temptation, 0.0]]
    }
}

/// Payoff to a player using `own` against `other`.
#[inline]
pub fn pair_payoff(own: Strategy, other: Strategy, temptation: f64) -> f64 {
    match (own, other) {
        (Strategy::Cooperate, Strategy::Cooperate) => 1.0,
        (Strategy::Defect, Strategy::Cooperate) => temptation,
        (_, Strategy::Defect) => 0.0,
    }
}

/// Total payoff of every node from one round against each of its neighbors.
///
/// Terms are summed in adjacency order.
pub fn accumulate_payoffs(g: &Graph, strategies: &[Strategy], params: &GameParams) -> Vec<f64> {
    assert_eq!(
        strategies.len(),
        g.node_count(),
        "strategy vector length must equal node count"
    );
    let b = params.temptation;
    (0..g.node_count())
        .map(|x| {
            let own = strategies[x];
            g.neighbors(x)
                .iter()
                .map(|&y| pair_payoff(own, strategies[y], b))
                .sum()
        })
        .collect()
}

/// Probability that `x` copies the strategy of its sampled neighbor `y`.
///
/// Zero unless `y` does strictly better on the rule's comparison quantity.
///
/// # Panics
///
/// If either degree is zero.
#[inline]
pub fn adoption_probability(
    payoff_x: f64,
    payoff_y: f64,
    degree_x: usize,
    degree_y: usize,
    params: &GameParams,
) -> f64 {
    assert!(degree_x > 0 && degree_y > 0, "isolated node in imitation step");
    let b = params.temptation;
    match params.rule {
        UpdateRule::Accumulated => {
            if payoff_y <= payoff_x {
                return 0.0;
            }
            ((payoff_y - payoff_x) / (b * degree_x.max(degree_y) as f64)).min(1.0)
        }
        UpdateRule::Average => {
            let avg_x = payoff_x / degree_x as f64;
            let avg_y = payoff_y / degree_y as f64;
            if avg_y <= avg_x {
                return 0.0;
            }
            // Rounding in the two quotients can overshoot 1 by an ulp.
            ((avg_y - avg_x) / b).min(1.0)
        }
    }
}

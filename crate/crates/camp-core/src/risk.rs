//! Co-occurrence graph and cumulative exposure scoring.
//!
//! One node per entity type seen in the session; an edge marks joint
//! presence. Each node's weight is amplified by `1 + alpha * deg(v)`, and
//! the session score is the sum of amplified weights, so risk grows
//! superlinearly as new types join an already-populated session. The math
//! is generic over the float type; `f64` is the crate-wide default.

use std::collections::BTreeSet;

use num_traits::Float;
use serde::Serialize;
use thiserror::Error;

use crate::entities::{EntityType, SensitivityWeights};

#[derive(Debug, Error, PartialEq)]
pub enum RiskError {
    #[error("{0} is not a node of the co-occurrence graph")]
    NodeNotInGraph(EntityType),
    #[error("alpha {0} outside (0, 1)")]
    InvalidAlpha(f64),
    #[error("tau {0} must be positive")]
    InvalidTau(f64),
}

/// How edges form between entity types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgePolicy {
    /// Edge between every pair of types seen anywhere in the session
    /// (complete graph over the node set). The default.
    SessionComplete,
    /// Edges only between types co-occurring within a single message.
    SameTurn,
}

/// Monotonically growing graph over the entity types seen in a session.
#[derive(Debug, Clone)]
pub struct CooccurrenceGraph {
    nodes: BTreeSet<EntityType>,
    edges: BTreeSet<(EntityType, EntityType)>,
    policy: EdgePolicy,
}

fn edge_key(a: EntityType, b: EntityType) -> (EntityType, EntityType) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl CooccurrenceGraph {
    pub fn new(policy: EdgePolicy) -> Self {
        CooccurrenceGraph { nodes: BTreeSet::new(), edges: BTreeSet::new(), policy }
    }

    pub fn policy(&self) -> EdgePolicy {
        self.policy
    }

    /// Fold in one message's detected types. Nodes and edges are only ever
    /// added; updating with already-present types is a no-op.
    pub fn update(&mut self, observed: &[EntityType]) {
        self.nodes.extend(observed.iter().copied());
        match self.policy {
            EdgePolicy::SessionComplete => {
                let nodes: Vec<_> = self.nodes.iter().copied().collect();
                for (i, &u) in nodes.iter().enumerate() {
                    for &v in &nodes[i + 1..] {
                        self.edges.insert(edge_key(u, v));
                    }
                }
            }
            EdgePolicy::SameTurn => {
                let turn: BTreeSet<_> = observed.iter().copied().collect();
                let turn: Vec<_> = turn.into_iter().collect();
                for (i, &u) in turn.iter().enumerate() {
                    for &v in &turn[i + 1..] {
                        self.edges.insert(edge_key(u, v));
                    }
                }
            }
        }
    }

    pub fn contains(&self, v: EntityType) -> bool {
        self.nodes.contains(&v)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = EntityType> + '_ {
        self.nodes.iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (EntityType, EntityType)> + '_ {
        self.edges.iter().copied()
    }

    /// Degree of `v` in the full graph.
    pub fn degree(&self, v: EntityType) -> Result<usize, RiskError> {
        if !self.contains(v) {
            return Err(RiskError::NodeNotInGraph(v));
        }
        Ok(self.edges.iter().filter(|(a, b)| *a == v || *b == v).count())
    }

    /// Degree of `v` counting only edges whose both endpoints satisfy the
    /// filter: the subgraph induced by the scored types.
    fn induced_degree(&self, v: EntityType, keep: impl Fn(EntityType) -> bool) -> usize {
        self.edges
            .iter()
            .filter(|(a, b)| (*a == v && keep(*b)) || (*b == v && keep(*a)))
            .count()
    }
}

/// Combination amplifier `1 + alpha * deg(v)` over the full graph.
/// An isolated node contributes exactly its base weight.
pub fn amplifier<F: Float>(
    graph: &CooccurrenceGraph,
    v: EntityType,
    alpha: F,
) -> Result<F, RiskError> {
    let deg = graph.degree(v)?;
    Ok(F::one() + alpha * F::from(deg).expect("degree fits"))
}

/// Scoring and trigger configuration.
#[derive(Debug, Clone)]
pub struct RiskConfig<F: Float = f64> {
    pub alpha: F,
    pub tau: F,
    pub weights: SensitivityWeights<F>,
    /// Hard-blocked types never reach the upstream model, so by default
    /// they contribute nothing to the exposure score.
    pub include_hard_blocked_in_score: bool,
    pub edge_policy: EdgePolicy,
}

impl<F: Float> RiskConfig<F> {
    /// Validates `alpha` in (0, 1) and `tau > 0`.
    pub fn new(alpha: F, tau: F) -> Result<Self, RiskError> {
        if alpha <= F::zero() || alpha >= F::one() {
            return Err(RiskError::InvalidAlpha(alpha.to_f64().unwrap_or(f64::NAN)));
        }
        if tau <= F::zero() {
            return Err(RiskError::InvalidTau(tau.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(RiskConfig {
            alpha,
            tau,
            weights: SensitivityWeights::standard(),
            include_hard_blocked_in_score: false,
            edge_policy: EdgePolicy::SessionComplete,
        })
    }

    pub fn with_weights(mut self, weights: SensitivityWeights<F>) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_edge_policy(mut self, policy: EdgePolicy) -> Self {
        self.edge_policy = policy;
        self
    }

    pub fn with_hard_blocked_scored(mut self, include: bool) -> Self {
        self.include_hard_blocked_in_score = include;
        self
    }

    fn scores(&self, v: EntityType) -> bool {
        self.include_hard_blocked_in_score || !v.is_hard_blocked()
    }
}

/// Cumulative exposure: sum of amplified weights over the scored nodes.
///
/// When hard-blocked types are excluded they are excluded entirely: they
/// neither contribute weight nor inflate scored nodes' degrees. An empty
/// graph scores zero.
pub fn cpe_score<F: Float>(graph: &CooccurrenceGraph, config: &RiskConfig<F>) -> F {
    graph
        .nodes()
        .filter(|v| config.scores(*v))
        .fold(F::zero(), |acc, v| {
            let deg = graph.induced_degree(v, |u| config.scores(u));
            let amp = F::one() + config.alpha * F::from(deg).expect("degree fits");
            acc + config.weights.weight(v) * amp
        })
}

/// Per-turn score series with the first threshold crossing pinned.
#[derive(Debug, Clone, Default)]
pub struct CpeTrace<F: Float = f64> {
    values: Vec<F>,
    trigger_turn: Option<usize>,
}

impl<F: Float> CpeTrace<F> {
    pub fn new() -> Self {
        CpeTrace { values: Vec::new(), trigger_turn: None }
    }

    pub fn append(&mut self, score: F) {
        self.values.push(score);
    }

    /// True iff the current turn's score meets or exceeds `tau` (>=, not >).
    /// The trigger turn is recorded on the first crossing only.
    pub fn check_threshold(&mut self, score: F, tau: F) -> bool {
        debug_assert!(
            self.values.last().map(|v| *v == score).unwrap_or(false),
            "score must be appended before the threshold check"
        );
        let triggered = score >= tau;
        if triggered && self.trigger_turn.is_none() {
            self.trigger_turn = Some(self.values.len() - 1);
        }
        triggered
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    /// 0-based index of the first crossing, if any.
    pub fn trigger_turn(&self) -> Option<usize> {
        self.trigger_turn
    }
}

/// Graph snapshot for the risk-inspection endpoint and plot emitters.
#[derive(Debug, Clone, Serialize)]
pub struct GraphExport {
    pub nodes: Vec<GraphNodeExport>,
    pub edges: Vec<[EntityType; 2]>,
    pub cpe: f64,
    pub tau: f64,
    pub alpha: f64,
    pub triggered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphNodeExport {
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub weight: f64,
    pub degree: usize,
    pub amplifier: f64,
}

pub fn graph_export<F: Float>(
    graph: &CooccurrenceGraph,
    config: &RiskConfig<F>,
    trace: &CpeTrace<F>,
) -> GraphExport {
    let f = |v: F| v.to_f64().unwrap_or(f64::NAN);
    GraphExport {
        nodes: graph
            .nodes()
            .map(|v| {
                let degree = graph.degree(v).expect("node present");
                GraphNodeExport {
                    entity_type: v,
                    weight: f(config.weights.weight(v)),
                    degree,
                    amplifier: f(amplifier(graph, v, config.alpha).expect("node present")),
                }
            })
            .collect(),
        edges: graph.edges().map(|(a, b)| [a, b]).collect(),
        cpe: f(trace.values().last().copied().unwrap_or_else(F::zero)),
        tau: f(config.tau),
        alpha: f(config.alpha),
        triggered: trace.trigger_turn().is_some(),
    }
}

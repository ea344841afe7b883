//! Recursive exploration: expand the unexplored node with the smallest
//! effective barrier until nothing kinetically accessible remains or the
//! budget runs out.

use super::ReactionNetwork;
use crate::molgraph::MolGraph;
use crate::pes::Calculator;
use crate::pipeline::{
    evaluate_step, prepare_species, CascadeParams, FastEstimator, PipelineError, Species,
    SpeciesCache, StageAudit, StepEvaluation,
};
use crate::util::{derive_seed, fnv1a};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BinaryHeap};
use std::time::{Duration, Instant};

/// Hard limits on an exploration run. Defaults are generous; candidate
/// pools explode combinatorially with atom count, so some ceiling is
/// always wanted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Maximum node expansions.
    pub max_nodes: usize,
    /// Maximum wall-clock seconds.
    pub max_wall_seconds: f64,
    /// Maximum calculator evaluations (enforced when the evaluator reports
    /// usage).
    pub max_calc_calls: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 200,
            max_wall_seconds: 86_400.0,
            max_calc_calls: u64::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExploreConfig {
    /// Stop exploring nodes whose effective barrier exceeds this, kcal/mol.
    pub explore_barrier: f64,
    pub budget: Budget,
}

/// Something that evaluates one node expansion. The production
/// implementation runs the full cascade; tests substitute synthetic
/// expanders.
pub trait StepEvaluator {
    /// Prepare the root species (embed + relax) and return its absolute
    /// energy.
    fn prepare_root(&self, graph: &MolGraph, key: &str) -> Result<Species, PipelineError>;

    /// Evaluate all elementary steps out of a node.
    fn evaluate(
        &self,
        key: &str,
        graph: &MolGraph,
        species: &Species,
    ) -> Result<StepEvaluation, PipelineError>;

    /// Calculator evaluations used so far, when the evaluator tracks them.
    fn calls_used(&self) -> Option<u64> {
        None
    }
}

/// The production evaluator: full cascade against a calculator and fast
/// estimator, with a concurrent species cache.
pub struct CascadeEvaluator<'a> {
    pub calc: &'a dyn Calculator,
    pub estimator: &'a dyn FastEstimator,
    pub params: CascadeParams,
    pub seed: u64,
    pub cache: SpeciesCache,
    /// Shared evaluation counter for budget enforcement.
    pub call_counter: Option<std::sync::Arc<std::sync::atomic::AtomicU64>>,
}

impl<'a> CascadeEvaluator<'a> {
    pub fn new(
        calc: &'a dyn Calculator,
        estimator: &'a dyn FastEstimator,
        params: CascadeParams,
        seed: u64,
    ) -> Self {
        CascadeEvaluator {
            calc,
            estimator,
            params,
            seed,
            cache: SpeciesCache::new(),
            call_counter: None,
        }
    }

    pub fn with_call_counter(
        mut self,
        counter: std::sync::Arc<std::sync::atomic::AtomicU64>,
    ) -> Self {
        self.call_counter = Some(counter);
        self
    }

    fn species_for(&self, key: &str, graph: &MolGraph) -> Result<Species, PipelineError> {
        if let Some(sp) = self.cache.get(key) {
            return Ok(sp);
        }
        let seed = derive_seed(self.seed, "species", fnv1a(key.as_bytes()));
        let sp = prepare_species(graph, self.calc, seed, &self.params)?;
        self.cache.insert(key.to_string(), sp.clone());
        Ok(sp)
    }
}

impl StepEvaluator for CascadeEvaluator<'_> {
    fn prepare_root(&self, graph: &MolGraph, key: &str) -> Result<Species, PipelineError> {
        self.species_for(key, graph)
    }

    fn evaluate(
        &self,
        key: &str,
        graph: &MolGraph,
        species: &Species,
    ) -> Result<StepEvaluation, PipelineError> {
        let node_seed = derive_seed(self.seed, "node", fnv1a(key.as_bytes()));
        evaluate_step(
            graph,
            key,
            species,
            self.calc,
            self.estimator,
            &self.params,
            node_seed,
        )
    }

    fn calls_used(&self) -> Option<u64> {
        self.call_counter
            .as_ref()
            .map(|c| c.load(std::sync::atomic::Ordering::Relaxed))
    }
}

/// Priority-queue exploration state: the frontier holds exactly the
/// unexplored nodes reachable at or below the exploration threshold.
pub struct ExploreState {
    pub network: ReactionNetwork,
    pub config: ExploreConfig,
    eff: BTreeMap<String, f64>,
    heap: BinaryHeap<HeapEntry>,
}

#[derive(PartialEq)]
struct HeapEntry {
    eff: f64,
    key: String,
}

impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on (eff, key): ties break on the smaller canonical key
        other
            .eff
            .total_cmp(&self.eff)
            .then_with(|| other.key.cmp(&self.key))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl ExploreState {
    pub fn new(network: ReactionNetwork, config: ExploreConfig) -> ExploreState {
        let mut state = ExploreState {
            network,
            config,
            eff: BTreeMap::new(),
            heap: BinaryHeap::new(),
        };
        // seed the frontier from current effective barriers (supports both
        // fresh roots and resumed networks)
        for (key, eff) in state.network.effective_barriers() {
            if !state.network.nodes[&key].explored {
                state.eff.insert(key.clone(), eff);
                state.heap.push(HeapEntry { eff, key });
            } else {
                state.eff.insert(key, eff);
            }
        }
        state
    }

    /// Pop the unexplored node with the smallest effective barrier. Returns
    /// `None` when the frontier is empty or everything left exceeds the
    /// exploration threshold.
    pub fn select_next(&mut self) -> Option<(String, f64)> {
        while let Some(HeapEntry { eff, key }) = self.heap.pop() {
            if self.eff.get(&key).is_none_or(|cur| eff > *cur) {
                continue; // stale entry
            }
            if self.network.nodes[&key].explored {
                continue;
            }
            if eff > self.config.explore_barrier {
                // monotone pops: everything behind is at least as high
                return None;
            }
            return Some((key, eff));
        }
        None
    }

    /// Relax the frontier after new edges out of `from` were added.
    fn relax_from(&mut self, from: &str) {
        let base = *self.eff.get(from).expect("expanded node has a barrier");
        let edges: Vec<(String, f64)> = self
            .network
            .edges
            .iter()
            .filter(|e| e.from_key == from)
            .map(|e| (e.to_key.clone(), e.ts_energy_rel))
            .collect();
        for (to, ts) in edges {
            let cand = base.max(ts);
            if self.eff.get(&to).is_none_or(|cur| cand < *cur) {
                self.eff.insert(to.clone(), cand);
                self.heap.push(HeapEntry { eff: cand, key: to });
            }
        }
    }
}

/// Result of an exploration run.
pub struct ExploreOutcome {
    pub network: ReactionNetwork,
    pub budget_exhausted: bool,
    /// Expansion order with effective barriers, for monotonicity audits.
    pub pop_trace: Vec<(String, f64)>,
    /// Per-node cascade audits in expansion order.
    pub audits: Vec<(String, StageAudit)>,
    /// Per-node candidate verdicts in expansion order, for decision logs.
    pub verdicts: Vec<(String, Vec<CandidateVerdict>)>,
}

/// Final verdict of one candidate, kept light for logging.
#[derive(Debug, Clone)]
pub struct CandidateVerdict {
    pub product_key: String,
    pub stage: crate::pipeline::Stage,
    pub best_barrier: Option<f64>,
}

/// Explore from a root system. The root must itself survive a stability
/// check before calling this (the command layer enforces it).
pub fn explore(
    root: &MolGraph,
    evaluator: &dyn StepEvaluator,
    config: ExploreConfig,
) -> Result<ExploreOutcome, PipelineError> {
    let root_key = root.canonical_key();
    let root_species = evaluator.prepare_root(root, &root_key)?;
    let network = ReactionNetwork::new(root_key, root.clone(), root_species.energy);
    run_loop(network, evaluator, config)
}

/// Continue exploring an imported network.
pub fn explore_resumed(
    network: ReactionNetwork,
    evaluator: &dyn StepEvaluator,
    config: ExploreConfig,
) -> Result<ExploreOutcome, PipelineError> {
    run_loop(network, evaluator, config)
}

fn run_loop(
    network: ReactionNetwork,
    evaluator: &dyn StepEvaluator,
    config: ExploreConfig,
) -> Result<ExploreOutcome, PipelineError> {
    let started = Instant::now();
    let mut state = ExploreState::new(network, config);
    let mut pop_trace = Vec::new();
    let mut audits = Vec::new();
    let mut verdicts = Vec::new();
    let mut budget_exhausted = false;

    while let Some((key, eff)) = state.select_next() {
        let calls_over = evaluator
            .calls_used()
            .is_some_and(|n| n > config.budget.max_calc_calls);
        if pop_trace.len() >= config.budget.max_nodes
            || started.elapsed() > Duration::from_secs_f64(config.budget.max_wall_seconds)
            || calls_over
        {
            budget_exhausted = true;
            break;
        }
        pop_trace.push((key.clone(), eff));

        let node = &state.network.nodes[&key];
        let graph = node.graph.clone();
        let species = evaluator.prepare_root(&graph, &key)?;
        let evaluation = evaluator.evaluate(&key, &graph, &species)?;
        audits.push((key.clone(), evaluation.audit.clone()));
        verdicts.push((
            key.clone(),
            evaluation
                .candidates
                .iter()
                .map(|c| CandidateVerdict {
                    product_key: c.product_key.clone(),
                    stage: c.stage.clone(),
                    best_barrier: c.best_barrier(),
                })
                .collect(),
        ));

        let root_abs = state.network.root_energy_abs;
        for &idx in &evaluation.selected {
            let candidate = &evaluation.candidates[idx];
            for outcome in &candidate.outcomes {
                let Some(best) = outcome.paths.first() else {
                    continue;
                };
                state.network.upsert_node(
                    outcome.product_key.clone(),
                    outcome.product_graph.clone(),
                    outcome.product_energy - root_abs,
                );
                state.network.add_step(
                    &key,
                    &outcome.product_key,
                    best.ts_refined.energy - root_abs,
                    candidate.mv.clone(),
                    best.clone(),
                );
            }
        }
        state.network.nodes.get_mut(&key).unwrap().explored = true;
        state.relax_from(&key);
    }

    Ok(ExploreOutcome {
        network: state.network,
        budget_exhausted,
        pop_trace,
        audits,
        verdicts,
    })
}

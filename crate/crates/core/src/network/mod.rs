//! Reaction-network data model: species nodes, elementary-step edges,
//! effective barriers, and the exploration loop that grows the network in
//! order of kinetic accessibility.

mod explore;
mod export;

pub use explore::{
    explore, explore_resumed, Budget, CandidateVerdict, CascadeEvaluator, ExploreConfig,
    ExploreOutcome, ExploreState, StepEvaluator,
};
pub use export::{export_dot, export_structured, import_structured, ImportError};

use crate::enumerate::Move;
use crate::molgraph::MolGraph;
use crate::path::PathResult;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BinaryHeap};

/// A species in the network. Energies are relative to the root reactant's
/// minimized energy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkNode {
    pub key: String,
    pub graph: MolGraph,
    pub energy_rel: f64,
    pub explored: bool,
}

/// A directed elementary step. Barriers derive from the stored transition
/// state energy and the endpoint node energies, which keeps the edge
/// identities exact by construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub from_key: String,
    pub to_key: String,
    /// Transition-state energy relative to the root, kcal/mol.
    pub ts_energy_rel: f64,
    pub mv: Move,
    /// Index into the network's stored paths.
    pub path_id: usize,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum NetworkError {
    #[error("node {0:?} is not reachable from the root")]
    Unreachable(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
}

/// Species nodes and elementary-step edges, annotated with relative
/// energies and barriers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReactionNetwork {
    pub schema_version: u32,
    pub root_key: String,
    /// Absolute minimized energy of the root system, kcal/mol.
    pub root_energy_abs: f64,
    pub nodes: BTreeMap<String, NetworkNode>,
    pub edges: Vec<NetworkEdge>,
    pub paths: Vec<PathResult>,
}

pub const SCHEMA_VERSION: u32 = 1;

impl ReactionNetwork {
    pub fn new(root_key: String, root_graph: MolGraph, root_energy_abs: f64) -> ReactionNetwork {
        let mut nodes = BTreeMap::new();
        nodes.insert(
            root_key.clone(),
            NetworkNode {
                key: root_key.clone(),
                graph: root_graph,
                energy_rel: 0.0,
                explored: false,
            },
        );
        ReactionNetwork {
            schema_version: SCHEMA_VERSION,
            root_key,
            root_energy_abs,
            nodes,
            edges: Vec::new(),
            paths: Vec::new(),
        }
    }

    pub fn node(&self, key: &str) -> Option<&NetworkNode> {
        self.nodes.get(key)
    }

    /// Forward barrier of an edge: TS energy minus the source node energy.
    pub fn barrier_fwd(&self, edge: &NetworkEdge) -> f64 {
        edge.ts_energy_rel - self.nodes[&edge.from_key].energy_rel
    }

    /// Reverse barrier of an edge: TS energy minus the target node energy.
    pub fn barrier_rev(&self, edge: &NetworkEdge) -> f64 {
        edge.ts_energy_rel - self.nodes[&edge.to_key].energy_rel
    }

    /// Insert or update a node; existing nodes keep the lower energy (the
    /// best conformer seen).
    pub fn upsert_node(&mut self, key: String, graph: MolGraph, energy_rel: f64) {
        self.nodes
            .entry(key.clone())
            .and_modify(|n| n.energy_rel = n.energy_rel.min(energy_rel))
            .or_insert(NetworkNode {
                key,
                graph,
                energy_rel,
                explored: false,
            });
    }

    /// Add a verified elementary step in both directions (an IRC certifies
    /// both). Returns the path id.
    pub fn add_step(
        &mut self,
        from_key: &str,
        to_key: &str,
        ts_energy_rel: f64,
        mv: Move,
        path: PathResult,
    ) -> usize {
        let path_id = self.paths.len();
        self.paths.push(path);
        self.edges.push(NetworkEdge {
            from_key: from_key.to_string(),
            to_key: to_key.to_string(),
            ts_energy_rel,
            mv: mv.clone(),
            path_id,
        });
        self.edges.push(NetworkEdge {
            from_key: to_key.to_string(),
            to_key: from_key.to_string(),
            ts_energy_rel,
            mv: mv.reversed(),
            path_id,
        });
        path_id
    }

    /// Effective barriers from the root: for every reachable node, the
    /// minimum over root paths of the highest transition-state energy
    /// encountered (relative to root). Bottleneck Dijkstra over TS
    /// energies. The root maps to negative infinity (no TS crossed).
    pub fn effective_barriers(&self) -> BTreeMap<String, f64> {
        #[derive(PartialEq)]
        struct Entry(f64, String);
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                // reversed for a min-heap
                other
                    .0
                    .total_cmp(&self.0)
                    .then_with(|| other.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }

        let mut adj: BTreeMap<&str, Vec<&NetworkEdge>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(e.from_key.as_str()).or_default().push(e);
        }

        let mut eff: BTreeMap<String, f64> = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        eff.insert(self.root_key.clone(), f64::NEG_INFINITY);
        heap.push(Entry(f64::NEG_INFINITY, self.root_key.clone()));
        let mut settled = std::collections::BTreeSet::new();

        while let Some(Entry(d, key)) = heap.pop() {
            if !settled.insert(key.clone()) {
                continue;
            }
            if let Some(edges) = adj.get(key.as_str()) {
                for e in edges {
                    let cand = d.max(e.ts_energy_rel);
                    let better = eff
                        .get(&e.to_key)
                        .is_none_or(|current| cand < *current);
                    if better {
                        eff.insert(e.to_key.clone(), cand);
                        heap.push(Entry(cand, e.to_key.clone()));
                    }
                }
            }
        }
        eff
    }

    /// Effective barrier of one node.
    pub fn effective_barrier(&self, target_key: &str) -> Result<f64, NetworkError> {
        if !self.nodes.contains_key(target_key) {
            return Err(NetworkError::UnknownNode(target_key.to_string()));
        }
        self.effective_barriers()
            .get(target_key)
            .copied()
            .ok_or_else(|| NetworkError::Unreachable(target_key.to_string()))
    }

    /// Structural sanity: every edge endpoint exists and every non-root
    /// node has at least one incoming edge.
    pub fn check_consistency(&self) -> Result<(), String> {
        for e in &self.edges {
            if !self.nodes.contains_key(&e.from_key) || !self.nodes.contains_key(&e.to_key) {
                return Err(format!("edge {} -> {} has an orphan endpoint", e.from_key, e.to_key));
            }
        }
        for key in self.nodes.keys() {
            if *key != self.root_key && !self.edges.iter().any(|e| e.to_key == *key) {
                return Err(format!("node {key} has no incoming edge"));
            }
        }
        for e in &self.edges {
            let diff = (self.nodes[&e.to_key].energy_rel - self.nodes[&e.from_key].energy_rel)
                - (self.barrier_fwd(e) - self.barrier_rev(e));
            if diff.abs() > 1e-6 {
                return Err(format!(
                    "edge {} -> {} violates energy consistency by {diff:e}",
                    e.from_key, e.to_key
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod test_nets {
    use super::*;
    use crate::molgraph::test_mols::ch4;

    /// Build a synthetic network from (from, to, ts_rel) triples; node
    /// energies are zero, graphs are placeholders.
    pub fn synthetic(root: &str, edges: &[(&str, &str, f64)]) -> ReactionNetwork {
        let g = ch4();
        let mut net = ReactionNetwork::new(root.to_string(), g.clone(), 0.0);
        for &(a, b, _) in edges {
            net.upsert_node(a.to_string(), g.clone(), 0.0);
            net.upsert_node(b.to_string(), g.clone(), 0.0);
        }
        for &(a, b, ts) in edges {
            // direct edge insertion keeps full control over direction
            net.paths.push(fake_path());
            let path_id = net.paths.len() - 1;
            net.edges.push(NetworkEdge {
                from_key: a.to_string(),
                to_key: b.to_string(),
                ts_energy_rel: ts,
                mv: Move::new(vec![], vec![]),
                path_id,
            });
        }
        net
    }

    pub fn fake_path() -> PathResult {
        use crate::geom::Geometry;
        let g = Geometry::new(vec![crate::elements::Element::H], vec![[0.0; 3]]);
        PathResult {
            ts_guess: g.clone(),
            ts_refined: crate::optimize::OptResult {
                geometry: g.clone(),
                energy: 0.0,
                n_steps: 0,
                converged: true,
                max_grad_component: 0.0,
                rms_grad: 0.0,
            },
            barrier_fwd: 0.0,
            barrier_rev: 0.0,
            irc_forward_key: "a".into(),
            irc_backward_key: "b".into(),
            verified: true,
            band: crate::path::Band {
                images: vec![g.clone(), g.clone(), g],
                energies: vec![0.0; 3],
                spring_k: 1.0,
                climbing_index: None,
            },
        }
    }
}

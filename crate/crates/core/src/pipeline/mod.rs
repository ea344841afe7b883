//! The staged filter cascade for single-step evaluation: stability triage,
//! fast 2-D energy screen, calculator reaction-energy screen, kinetic
//! evaluation, top-k selection.
//!
//! Candidates only ever move forward through the stages; a rejection
//! records the stage and reason, so the per-stage audit always satisfies
//! `rejected + survivors == enumerated`.

mod estimator;

pub use estimator::{BondIncrementEstimator, FastEstimator, IdentityEstimator};

use crate::enumerate::{enumerate_moves, EnumConfig, Move};
use crate::geom::{embed_with, select_conformer_pairs, EmbedError, Geometry, PairParams};
use crate::molgraph::{
    find_stereo_sites, perceive_adjacency, MolGraph, Parity, StereoAssignment,
};
use crate::optimize::{fire_minimize, lbfgs_minimize, OptParams};
use crate::path::{dedup_transition_states, find_path, PathParams, PathResult};
use crate::pes::{CalcError, Calculator};
use crate::util::{derive_seed, fnv1a};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::RwLock;
use std::time::Instant;

/// Energetic thresholds of the cascade, kcal/mol (and the top-k cap).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Fast-estimator reaction energy ceiling (strictly-greater rejects).
    pub e_fast: f64,
    /// Calculator reaction energy ceiling (strictly-greater rejects).
    pub e_rxn: f64,
    /// Barrier ceiling (at-or-below passes).
    pub e_barrier: f64,
    /// Survivors kept after barrier sorting.
    pub top_k: usize,
    /// Exploration stops at nodes whose effective barrier exceeds this.
    pub explore_barrier: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            e_fast: 60.0,
            e_rxn: 30.0,
            e_barrier: 60.0,
            top_k: 100,
            explore_barrier: 30.0,
        }
    }
}

/// Names of the cascade stages, in funnel order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageName {
    Stability,
    FastEnergy,
    RxnEnergy,
    Kinetic,
}

/// Where a candidate stands in the cascade. Transitions are monotone
/// forward; a rejected candidate keeps the rejecting stage and reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Stage {
    Enumerated,
    StablePassed,
    FastEnergyPassed,
    RxnEnergyPassed,
    KineticPassed,
    Rejected { at: StageName, reason: String },
}

/// Kinetic outcome for one stereo-resolved product.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StereoOutcome {
    pub product_key: String,
    pub product_graph: MolGraph,
    /// Minimized single-conformer product energy, kcal/mol.
    pub product_energy: f64,
    pub product_geometry: Geometry,
    /// Verified, deduplicated paths, barrier ascending.
    pub paths: Vec<PathResult>,
    /// Numerical failures recorded per conformer pair (never fatal).
    pub failures: Vec<String>,
}

impl StereoOutcome {
    pub fn best_barrier(&self) -> Option<f64> {
        self.paths.first().map(|p| p.barrier_fwd)
    }
}

/// One enumerated elementary-step candidate moving through the cascade.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateStep {
    pub reactant_key: String,
    /// Canonical key of the product as enumerated (stereo not yet
    /// expanded).
    pub product_key: String,
    pub product_graph: MolGraph,
    pub mv: Move,
    pub stage: Stage,
    pub delta_e_fast: Option<f64>,
    pub delta_e_rxn: Option<f64>,
    /// Filled by the kinetic stage: one entry per realizable stereoisomer.
    pub outcomes: Vec<StereoOutcome>,
}

impl CandidateStep {
    /// Lowest verified barrier across stereo outcomes.
    pub fn best_barrier(&self) -> Option<f64> {
        self.outcomes
            .iter()
            .filter_map(|o| o.best_barrier())
            .min_by(f64::total_cmp)
    }

    fn reject(&mut self, at: StageName, reason: impl Into<String>) {
        self.stage = Stage::Rejected {
            at,
            reason: reason.into(),
        };
    }
}

/// Per-stage survivor counts in funnel order (Table-style audit row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub enumerated: usize,
    pub stable: usize,
    pub fast_energy: usize,
    pub rxn_energy: usize,
    pub kinetic: usize,
    /// After the top-k cap.
    pub selected: usize,
}

impl StageCounts {
    pub fn monotone(&self) -> bool {
        self.enumerated >= self.stable
            && self.stable >= self.fast_energy
            && self.fast_energy >= self.rxn_energy
            && self.rxn_energy >= self.kinetic
            && self.kinetic >= self.selected
    }
}

/// Audit record for one step evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageAudit {
    pub counts: StageCounts,
    /// Wall seconds per stage: stability, fast, rxn, kinetic.
    pub wall_seconds: [f64; 4],
    pub rejected_per_stage: Vec<(StageName, usize)>,
}

impl StageAudit {
    /// `rejected + survivors == enumerated`, exactly.
    pub fn identity_holds(&self) -> bool {
        let rejected: usize = self.rejected_per_stage.iter().map(|(_, n)| n).sum();
        rejected + self.counts.kinetic == self.counts.enumerated
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error("reactant preparation failed: {0}")]
    ReactantPrep(#[from] EmbedError),
    #[error("reactant rearranged during relaxation; not a stable species")]
    ReactantUnstable,
}

/// All cascade tunables in one place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CascadeParams {
    pub thresholds: Thresholds,
    pub enumeration: EnumConfig,
    pub pairs: PairParams,
    pub path: PathParams,
    /// Relaxation settings for species energies.
    pub relax: OptParams,
    pub perception_scale: f64,
}

impl Default for CascadeParams {
    fn default() -> Self {
        CascadeParams {
            thresholds: Thresholds::default(),
            enumeration: EnumConfig::default(),
            pairs: PairParams::default(),
            path: PathParams::default(),
            relax: OptParams {
                max_cycles: 300,
                ..OptParams::default()
            },
            perception_scale: crate::molgraph::DEFAULT_PERCEPTION_SCALE,
        }
    }
}

/// A relaxed 3-D realization of a species: geometry and energy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Species {
    pub geometry: Geometry,
    pub energy: f64,
}

/// Embed and relax a species: FIRE (bounded cycles) then an L-BFGS polish.
/// The relaxed adjacency must match the graph, otherwise the species is not
/// a minimum of its own identity.
pub fn prepare_species(
    g: &MolGraph,
    calc: &dyn Calculator,
    seed: u64,
    params: &CascadeParams,
) -> Result<Species, PipelineError> {
    let geom = embed_with(g, seed, &params.pairs.embed)?;
    let fire = fire_minimize(calc, &geom, &params.relax)?;
    let polish = lbfgs_minimize(calc, &fire.geometry, &OptParams {
        max_cycles: 2000,
        ..params.relax
    })?;
    if perceive_adjacency(&polish.geometry, params.perception_scale) != g.adjacency_pairs() {
        return Err(PipelineError::ReactantUnstable);
    }
    Ok(Species {
        geometry: polish.geometry,
        energy: polish.energy,
    })
}

/// Whether a species keeps its own adjacency through embedding and
/// geometry optimization. Embedding failure means the graph is not
/// physically realizable and counts as unstable.
pub fn stability_check(
    g: &MolGraph,
    calc: &dyn Calculator,
    seed: u64,
    params: &CascadeParams,
) -> Result<bool, CalcError> {
    let Ok(geom) = embed_with(g, seed, &params.pairs.embed) else {
        return Ok(false);
    };
    let relaxed = fire_minimize(calc, &geom, &params.relax)?;
    Ok(perceive_adjacency(&relaxed.geometry, params.perception_scale) == g.adjacency_pairs())
}

/// Concurrent species cache keyed by canonical key: concurrent reads,
/// single-writer inserts.
#[derive(Default)]
pub struct SpeciesCache {
    map: RwLock<HashMap<String, Species>>,
}

impl SpeciesCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<Species> {
        self.map.read().expect("cache lock").get(key).cloned()
    }

    pub fn insert(&self, key: String, species: Species) {
        self.map.write().expect("cache lock").insert(key, species);
    }
}

/// Boundary rule of the fast screen: reject strictly above the ceiling.
pub fn fast_energy_accepts(delta_e: f64, thresholds: &Thresholds) -> bool {
    delta_e <= thresholds.e_fast
}

/// Boundary rule of the reaction-energy screen: reject strictly above the
/// ceiling.
pub fn rxn_energy_accepts(delta_e: f64, thresholds: &Thresholds) -> bool {
    delta_e <= thresholds.e_rxn
}

/// Boundary rule of the barrier screen: at-or-below passes.
pub fn barrier_accepts(barrier: f64, thresholds: &Thresholds) -> bool {
    barrier <= thresholds.e_barrier
}

/// Stage 2: fast estimator screen. Candidates whose estimated reaction
/// energy strictly exceeds `e_fast` are rejected; the boundary value
/// passes.
pub fn fast_energy_screen(
    reactant: &MolGraph,
    mut candidates: Vec<CandidateStep>,
    estimator: &dyn FastEstimator,
    thresholds: &Thresholds,
) -> Vec<CandidateStep> {
    for c in &mut candidates {
        if c.stage != Stage::StablePassed {
            continue;
        }
        let de = estimator.delta_e(reactant, &c.product_graph);
        c.delta_e_fast = Some(de);
        if fast_energy_accepts(de, thresholds) {
            c.stage = Stage::FastEnergyPassed;
        } else {
            c.reject(StageName::FastEnergy, format!("delta_e_fast {de:.2} > {}", thresholds.e_fast));
        }
    }
    candidates
}

/// Stage 5: keep the `top_k` lowest-barrier survivors, ties broken by
/// product key ascending.
pub fn select_top_k(candidates: &mut Vec<CandidateStep>, thresholds: &Thresholds) {
    candidates.sort_by(|a, b| {
        let ba = a.best_barrier().unwrap_or(f64::INFINITY);
        let bb = b.best_barrier().unwrap_or(f64::INFINITY);
        ba.total_cmp(&bb).then_with(|| a.product_key.cmp(&b.product_key))
    });
    candidates.truncate(thresholds.top_k);
}

/// Outcome of a full single-step evaluation from one reactant node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepEvaluation {
    pub reactant_key: String,
    pub reactant: Species,
    /// Every enumerated candidate with its final stage.
    pub candidates: Vec<CandidateStep>,
    /// Kinetic survivors after the top-k cap, barrier ascending.
    pub selected: Vec<usize>,
    pub audit: StageAudit,
}

/// Run the whole cascade from one reactant. The reactant species must be
/// prepared (and cached) by the caller; every enumerated candidate comes
/// back with a final stage so audits balance exactly.
pub fn evaluate_step(
    reactant_graph: &MolGraph,
    reactant_key: &str,
    reactant: &Species,
    calc: &dyn Calculator,
    estimator: &dyn FastEstimator,
    params: &CascadeParams,
    seed: u64,
) -> Result<StepEvaluation, PipelineError> {
    let thresholds = &params.thresholds;

    // stage 0: enumerate
    let t0 = Instant::now();
    let mut candidates: Vec<CandidateStep> = enumerate_moves(reactant_graph, &params.enumeration)
        .into_iter()
        .map(|c| CandidateStep {
            reactant_key: reactant_key.to_string(),
            product_key: c.key,
            product_graph: c.graph,
            mv: c.mv,
            stage: Stage::Enumerated,
            delta_e_fast: None,
            delta_e_rxn: None,
            outcomes: Vec::new(),
        })
        .collect();
    let enumerated = candidates.len();

    // stage 1: 2-D stability triage
    for c in &mut candidates {
        if estimator.stable(&c.product_graph) {
            c.stage = Stage::StablePassed;
        } else {
            c.reject(StageName::Stability, "predicted unstable");
        }
    }
    let wall_stability = t0.elapsed().as_secs_f64();

    // stage 2: fast energy screen
    let t1 = Instant::now();
    let mut candidates = fast_energy_screen(reactant_graph, candidates, estimator, thresholds);
    let wall_fast = t1.elapsed().as_secs_f64();

    // stage 3: calculator reaction energy
    let t2 = Instant::now();
    let rxn_results: Vec<Option<(f64, Species)>> = candidates
        .par_iter()
        .map(|c| {
            if c.stage != Stage::FastEnergyPassed {
                return None;
            }
            let cand_seed = derive_seed(seed, "product", fnv1a(c.product_key.as_bytes()));
            match prepare_species(&c.product_graph, calc, cand_seed, params) {
                Ok(sp) => Some((sp.energy - reactant.energy, sp)),
                Err(_) => None,
            }
        })
        .collect();
    for (c, res) in candidates.iter_mut().zip(rxn_results) {
        if c.stage != Stage::FastEnergyPassed {
            continue;
        }
        match res {
            None => c.reject(StageName::RxnEnergy, "unrealizable or rearranged"),
            Some((de, _sp)) => {
                c.delta_e_rxn = Some(de);
                if rxn_energy_accepts(de, thresholds) {
                    c.stage = Stage::RxnEnergyPassed;
                } else {
                    c.reject(StageName::RxnEnergy, format!("delta_e_rxn {de:.2} > {}", thresholds.e_rxn));
                }
            }
        }
    }
    let wall_rxn = t2.elapsed().as_secs_f64();

    // stage 4: kinetic evaluation on stereo-expanded products
    let t3 = Instant::now();
    let kinetic: Vec<Option<Vec<StereoOutcome>>> = candidates
        .par_iter()
        .map(|c| {
            if c.stage != Stage::RxnEnergyPassed {
                return None;
            }
            Some(kinetic_evaluate(
                reactant_graph,
                reactant_key,
                c,
                calc,
                params,
                seed,
            ))
        })
        .collect();
    for (c, res) in candidates.iter_mut().zip(kinetic) {
        let Some(outcomes) = res else { continue };
        let passing = outcomes
            .iter()
            .any(|o| o.best_barrier().is_some_and(|b| barrier_accepts(b, thresholds)));
        c.outcomes = outcomes;
        if passing {
            c.stage = Stage::KineticPassed;
        } else {
            let detail = c
                .outcomes
                .iter()
                .flat_map(|o| o.failures.iter())
                .next()
                .cloned()
                .unwrap_or_else(|| "no verified path at or below the barrier threshold".into());
            c.reject(StageName::Kinetic, detail);
        }
    }
    let wall_kinetic = t3.elapsed().as_secs_f64();

    // stage 5: top-k selection over the survivors
    let mut selected: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.stage == Stage::KineticPassed)
        .map(|(i, _)| i)
        .collect();
    selected.sort_by(|&a, &b| {
        let ba = candidates[a].best_barrier().unwrap_or(f64::INFINITY);
        let bb = candidates[b].best_barrier().unwrap_or(f64::INFINITY);
        ba.total_cmp(&bb)
            .then_with(|| candidates[a].product_key.cmp(&candidates[b].product_key))
    });
    selected.truncate(thresholds.top_k);

    let count_at = |f: &dyn Fn(&Stage) -> bool| candidates.iter().filter(|c| f(&c.stage)).count();
    let survived_stability = count_at(&|s| {
        !matches!(s, Stage::Rejected { at: StageName::Stability, .. } | Stage::Enumerated)
    });
    let survived_fast = count_at(&|s| {
        matches!(
            s,
            Stage::FastEnergyPassed | Stage::RxnEnergyPassed | Stage::KineticPassed
        ) || matches!(s, Stage::Rejected { at: StageName::RxnEnergy, .. } | Stage::Rejected { at: StageName::Kinetic, .. })
    });
    let survived_rxn = count_at(&|s| {
        matches!(s, Stage::RxnEnergyPassed | Stage::KineticPassed)
            || matches!(s, Stage::Rejected { at: StageName::Kinetic, .. })
    });
    let survived_kinetic = count_at(&|s| matches!(s, Stage::KineticPassed));

    let mut rejected_per_stage = Vec::new();
    for name in [
        StageName::Stability,
        StageName::FastEnergy,
        StageName::RxnEnergy,
        StageName::Kinetic,
    ] {
        let n = candidates
            .iter()
            .filter(|c| matches!(&c.stage, Stage::Rejected { at, .. } if *at == name))
            .count();
        rejected_per_stage.push((name, n));
    }

    let audit = StageAudit {
        counts: StageCounts {
            enumerated,
            stable: survived_stability,
            fast_energy: survived_fast,
            rxn_energy: survived_rxn,
            kinetic: survived_kinetic,
            selected: selected.len(),
        },
        wall_seconds: [wall_stability, wall_fast, wall_rxn, wall_kinetic],
        rejected_per_stage,
    };

    Ok(StepEvaluation {
        reactant_key: reactant_key.to_string(),
        reactant: reactant.clone(),
        candidates,
        selected,
        audit,
    })
}

/// Kinetic evaluation of one candidate: expand unassigned stereo sites of
/// the product, and for each realizable stereoisomer run conformer pairing,
/// interpolation, band optimization, saddle refinement and IRC
/// confirmation. Paths verify only when the IRC endpoints reproduce the
/// intended reactant and product keys. Failures are recorded, never fatal.
fn kinetic_evaluate(
    reactant_graph: &MolGraph,
    reactant_key: &str,
    candidate: &CandidateStep,
    calc: &dyn Calculator,
    params: &CascadeParams,
    seed: u64,
) -> Vec<StereoOutcome> {
    let stereo_products = expand_unassigned_sites(&candidate.product_graph);
    stereo_products
        .into_par_iter()
        .filter_map(|product| {
            let product_key = product.canonical_key();
            let sp_seed = derive_seed(seed, "stereo-product", fnv1a(product_key.as_bytes()));
            // physically unrealizable stereoisomers drop out here
            let species = prepare_species(&product, calc, sp_seed, params).ok()?;

            let mut failures = Vec::new();
            let pairs = match select_conformer_pairs(
                reactant_graph,
                &product,
                sp_seed,
                &params.pairs,
            ) {
                Ok(p) => p,
                Err(e) => {
                    failures.push(format!("conformer pairing: {e}"));
                    Vec::new()
                }
            };

            let path_results: Vec<Result<PathResult, String>> = pairs
                .par_iter()
                .map(|pair| run_pair(reactant_graph, &product, pair.clone(), reactant_key, &product_key, calc, params))
                .collect();
            let mut verified = Vec::new();
            for r in path_results {
                match r {
                    Ok(p) if p.verified => verified.push(p),
                    Ok(p) => failures.push(format!(
                        "irc mismatch: endpoints {} / {}",
                        p.irc_forward_key, p.irc_backward_key
                    )),
                    Err(e) => failures.push(e),
                }
            }
            let mut paths = dedup_transition_states(verified);
            paths.sort_by(|a, b| a.barrier_fwd.total_cmp(&b.barrier_fwd));

            Some(StereoOutcome {
                product_key,
                product_graph: product,
                product_energy: species.energy,
                product_geometry: species.geometry,
                paths,
                failures,
            })
        })
        .collect()
}

fn run_pair(
    reactant_graph: &MolGraph,
    product_graph: &MolGraph,
    pair: crate::geom::ConformerPair,
    reactant_key: &str,
    product_key: &str,
    calc: &dyn Calculator,
    params: &CascadeParams,
) -> Result<PathResult, String> {
    // short endpoint touch-up: adapt bond lengths to the calculator without
    // letting weakly interacting components drift apart and unpair
    let relax = |g: &Geometry| -> Result<crate::optimize::OptResult, String> {
        fire_minimize(calc, g, &OptParams {
            max_cycles: 120,
            ..params.relax
        })
        .map_err(|e| e.to_string())
    };
    let r = relax(&pair.reactant)?;
    let p = relax(&pair.product)?;
    if perceive_adjacency(&r.geometry, params.perception_scale) != reactant_graph.adjacency_pairs()
    {
        return Err("reactant conformer rearranged during relaxation".into());
    }
    if perceive_adjacency(&p.geometry, params.perception_scale) != product_graph.adjacency_pairs()
    {
        return Err("product conformer rearranged during relaxation".into());
    }
    let seed = crate::geom::exchange_seed(
        &r.geometry,
        reactant_graph,
        product_graph,
        params.path.exchange_stretch,
        &params.pairs.embed,
    )
    .ok();
    find_path(
        calc,
        &r.geometry,
        &p.geometry,
        seed.as_ref(),
        (reactant_key, product_key),
        &params.path,
    )
    .map_err(|e| e.to_string())
}

/// Stereoisomers over the *unassigned* sites only: sites that persisted
/// through the producing edit keep their parity, since an elementary step
/// cannot invert an untouched center.
fn expand_unassigned_sites(g: &MolGraph) -> Vec<MolGraph> {
    let sites = find_stereo_sites(g);
    let assigned: Vec<StereoAssignment> = g.stereo().to_vec();
    let free: Vec<_> = sites
        .iter()
        .filter(|s| !assigned.iter().any(|a| a.site == **s))
        .copied()
        .collect();
    let mut out = Vec::with_capacity(1 << free.len());
    for mask in 0..(1usize << free.len()) {
        let mut assigns = assigned.clone();
        for (k, site) in free.iter().enumerate() {
            assigns.push(StereoAssignment {
                site: *site,
                parity: if mask >> k & 1 == 0 {
                    Parity::Plus
                } else {
                    Parity::Minus
                },
            });
        }
        out.push(g.with_stereo(assigns).expect("sites are valid"));
    }
    // key-level dedup folds meso-type collapses
    let mut seen = std::collections::BTreeMap::new();
    for g in out {
        seen.entry(g.canonical_key()).or_insert(g);
    }
    seen.into_values().collect()
}

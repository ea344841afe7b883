//! Command implementations behind the binary: standalone enumeration,
//! double-ended path search, and full network exploration with exported
//! artifacts. Exit codes: 0 success, 2 input error, 3 numerical
//! non-convergence (path mode), 4 budget exhaustion.

use crate::config::RunConfig;
use crate::enumerate::{count_moves, enumerate_moves, EnumConfig};
use crate::geom::{exchange_seed, parse_xyz, write_xyz, Geometry};
use crate::molgraph::{perceive_graph, MolGraph};
use crate::network::{explore, explore_resumed, export_dot, export_structured, import_structured,
    CascadeEvaluator, ExploreConfig, ExploreOutcome};
use crate::path::{find_path, PathResult};
use crate::pes::Calculator;
use crate::pipeline::{stability_check, BondIncrementEstimator, StageAudit};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Unconverged(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Unconverged(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Read a molecule from a file: `.xyz` goes through bond perception,
/// anything else parses as molecular-graph text.
pub fn read_molecule(path: &Path) -> Result<MolGraph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().and_then(|s| s.to_str()) == Some("xyz") {
        let geom = parse_xyz(&text).map_err(input_err)?;
        perceive_graph(&geom, crate::molgraph::DEFAULT_PERCEPTION_SCALE).map_err(input_err)
    } else {
        MolGraph::parse_text(&text).map_err(input_err)
    }
}

/// Read one or several molecule files as a single (possibly
/// multi-component) reactant system.
pub fn read_system(paths: &[&std::path::PathBuf], base: &Path) -> Result<MolGraph, CliError> {
    let mut combined: Option<MolGraph> = None;
    for path in paths {
        let g = read_molecule(&base.join(path))?;
        combined = Some(match combined {
            None => g,
            Some(acc) => {
                let offset = acc.natoms();
                let mut elements = acc.elements().to_vec();
                elements.extend_from_slice(g.elements());
                let mut bonds = acc.bonds();
                bonds.extend(g.bonds().into_iter().map(|(i, j, o)| (i + offset, j + offset, o)));
                MolGraph::build(elements, &bonds).map_err(input_err)?
            }
        });
    }
    combined.ok_or_else(|| input_err("no input files given"))
}

/// `enumerate`: list candidate products of one reactant, or just count them
/// per edit size.
pub fn cmd_enumerate(
    input: &Path,
    cfg: &EnumConfig,
    count_only: bool,
    out: &mut impl std::io::Write,
) -> Result<(), CliError> {
    let g = read_molecule(input)?;
    if count_only {
        let counts = count_moves(&g, cfg);
        let total: usize = counts.iter().sum();
        for (n, c) in counts.iter().enumerate().skip(1) {
            writeln!(out, "n={n}\t{c}").map_err(internal)?;
        }
        writeln!(out, "total\t{total}").map_err(internal)?;
    } else {
        for cand in enumerate_moves(&g, cfg) {
            writeln!(
                out,
                "{}\tn={}\tbroken={:?}\tformed={:?}",
                cand.key,
                cand.mv.size(),
                cand.mv.broken,
                cand.mv.formed
            )
            .map_err(internal)?;
        }
    }
    Ok(())
}

pub struct PathArtifacts {
    pub result: PathResult,
    pub verdict: String,
}

/// `path`: standalone double-ended search between two XYZ structures.
/// Artifacts land in `out_dir`: `band.xyz`, `ts.xyz`, `energies.tsv` and
/// `verdict.txt`. Partial artifacts are retained on non-convergence.
pub fn cmd_path(
    reactant_path: &Path,
    product_path: &Path,
    calc: &dyn Calculator,
    params: &crate::path::PathParams,
    pairs_embed: &crate::geom::EmbedParams,
    out_dir: &Path,
) -> Result<PathArtifacts, CliError> {
    let load = |p: &Path| -> Result<Geometry, CliError> {
        let text = std::fs::read_to_string(p)
            .map_err(|e| input_err(format!("cannot read {}: {e}", p.display())))?;
        parse_xyz(&text).map_err(input_err)
    };
    let reactant = load(reactant_path)?;
    let product = load(product_path)?;
    if reactant.elements != product.elements {
        return Err(input_err(
            "reactant and product element lists differ (same atoms, same order required)",
        ));
    }
    std::fs::create_dir_all(out_dir).map_err(internal)?;

    // graph identities when perceivable (single-atom surface inputs are not)
    let perceive_key = |g: &Geometry| {
        perceive_graph(g, params.perception_scale)
            .map(|m| m.canonical_key())
            .ok()
    };
    let rkey = perceive_key(&reactant);
    let pkey = perceive_key(&product);
    let seed = match (&rkey, &pkey) {
        (Some(rk), Some(pk)) if rk != pk => {
            let rg = perceive_graph(&reactant, params.perception_scale).unwrap();
            let pg = perceive_graph(&product, params.perception_scale).unwrap();
            exchange_seed(&reactant, &rg, &pg, params.exchange_stretch, pairs_embed).ok()
        }
        _ => None,
    };

    let outcome = find_path(
        calc,
        &reactant,
        &product,
        seed.as_ref(),
        (
            rkey.as_deref().unwrap_or("unperceived-reactant"),
            pkey.as_deref().unwrap_or("unperceived-product"),
        ),
        params,
    );

    let result = match outcome {
        Ok(r) => r,
        Err(failure) => {
            // retain partial artifacts for diagnosis
            if let Some(band) = &failure.band {
                let (band_xyz, energy_table) = band.dump();
                let _ = std::fs::write(out_dir.join("band.xyz"), band_xyz);
                let _ = std::fs::write(out_dir.join("energies.tsv"), energy_table);
            }
            let verdict = format!("unconverged: {failure}");
            let _ = std::fs::write(out_dir.join("verdict.txt"), format!("{verdict}\n"));
            return Err(CliError::Unconverged(format!("path search failed: {failure}")));
        }
    };

    let (band_xyz, energy_table) = result.band.dump();
    std::fs::write(out_dir.join("band.xyz"), band_xyz).map_err(internal)?;
    std::fs::write(out_dir.join("energies.tsv"), energy_table).map_err(internal)?;
    std::fs::write(
        out_dir.join("ts.xyz"),
        write_xyz(
            &result.ts_refined.geometry,
            &format!("refined transition state, E = {:.6} kcal/mol", result.ts_refined.energy),
        ),
    )
    .map_err(internal)?;

    let verdict = format!(
        "{} barrier_fwd={:.4} kcal/mol barrier_rev={:.4} kcal/mol ts_energy={:.6} irc_forward={} irc_backward={}",
        if result.verified { "verified" } else { "unverified" },
        result.barrier_fwd,
        result.barrier_rev,
        result.ts_refined.energy,
        result.irc_forward_key,
        result.irc_backward_key,
    );
    std::fs::write(out_dir.join("verdict.txt"), format!("{verdict}\n")).map_err(internal)?;
    Ok(PathArtifacts { result, verdict })
}

/// Table-style audit report: per-node survivor counts in funnel column
/// order plus wall time per stage, then aggregate totals.
pub fn render_audit(audits: &[(String, StageAudit)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "node\ttotal\tstability\tfast_energy\trxn_energy\tbarrier\tselected"
    );
    let mut agg = [0usize; 6];
    for (key, audit) in audits {
        let c = &audit.counts;
        let _ = writeln!(
            out,
            "{key}\t{}\t{}\t{}\t{}\t{}\t{}",
            c.enumerated, c.stable, c.fast_energy, c.rxn_energy, c.kinetic, c.selected
        );
        for (slot, v) in agg.iter_mut().zip([
            c.enumerated,
            c.stable,
            c.fast_energy,
            c.rxn_energy,
            c.kinetic,
            c.selected,
        ]) {
            *slot += v;
        }
    }
    let _ = writeln!(
        out,
        "aggregate\t{}\t{}\t{}\t{}\t{}\t{}",
        agg[0], agg[1], agg[2], agg[3], agg[4], agg[5]
    );
    let _ = writeln!(out, "\nwall seconds per stage (stability, fast, rxn, kinetic):");
    for (key, audit) in audits {
        let w = audit.wall_seconds;
        let _ = writeln!(out, "{key}\t{:.3}\t{:.3}\t{:.3}\t{:.3}", w[0], w[1], w[2], w[3]);
    }
    out
}

pub struct ExploreArtifacts {
    pub outcome: ExploreOutcome,
    pub out_dir: PathBuf,
}

/// Structured decision log: one line per candidate with the node, the
/// candidate product key, the final verdict and its deciding value. The
/// audit table is derivable from these lines alone.
pub fn render_decision_log(outcome: &ExploreOutcome) -> String {
    use crate::pipeline::Stage;
    let mut out = String::from("node\tcandidate\tdecision\tvalue\n");
    for (node, verdicts) in &outcome.verdicts {
        for v in verdicts {
            let (decision, value) = match &v.stage {
                Stage::KineticPassed => (
                    "pass".to_string(),
                    format!("barrier={:.4}", v.best_barrier.unwrap_or(f64::NAN)),
                ),
                Stage::Rejected { at, reason } => (format!("reject@{at:?}"), reason.clone()),
                other => (format!("{other:?}"), String::new()),
            };
            let _ = writeln!(out, "{node}\t{}\t{decision}\t{value}", v.product_key);
        }
    }
    out
}

/// `explore`: the full recursive search. Writes into the output directory:
/// `network.json`, `network.dot`, `audit.txt`, `config.resolved.toml`,
/// `seeds.txt` and `version.txt`; a run directory is sufficient to
/// reproduce the run exactly.
pub fn cmd_explore(config: &RunConfig, config_dir: &Path) -> Result<ExploreArtifacts, CliError> {
    let raw = read_system(&config.input.paths(), config_dir)?;

    let workers = if config.workers == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        config.workers
    };
    let calc = config
        .calculator
        .build(workers)
        .map_err(|e| input_err(format!("calculator: {e}")))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(internal)?;

    let out_dir = config_dir.join(&config.output_dir);
    std::fs::create_dir_all(&out_dir).map_err(internal)?;

    let outcome = pool.install(|| -> Result<ExploreOutcome, CliError> {
        // stereo-resolve the root through its own embedding
        let geom = crate::geom::embed_with(&raw, config.seed, &config.cascade.pairs.embed)
            .map_err(|e| input_err(format!("root embedding failed: {e}")))?;
        let root = perceive_graph(&geom, config.cascade.perception_scale)
            .map_err(|e| input_err(format!("root perception failed: {e}")))?;
        if root.adjacency_pairs() != raw.adjacency_pairs() {
            return Err(input_err("root geometry does not reproduce the input adjacency"));
        }

        let stable = stability_check(&root, calc.as_ref(), config.seed, &config.cascade)
            .map_err(|e| internal(format!("stability check: {e}")))?;
        if !stable {
            return Err(input_err(
                "root system is not stable under the calculator (adjacency changes on relaxation)",
            ));
        }

        let counting = crate::pes::CountingCalculator::new(calc);
        let evaluator = CascadeEvaluator::new(
            &counting,
            &BondIncrementEstimator,
            config.cascade.clone(),
            config.seed,
        )
        .with_call_counter(counting.counter());
        let explore_config = ExploreConfig {
            explore_barrier: config.cascade.thresholds.explore_barrier,
            budget: config.budget,
        };
        let outcome = match &config.resume_from {
            None => explore(&root, &evaluator, explore_config),
            Some(path) => {
                let text = std::fs::read_to_string(config_dir.join(path))
                    .map_err(|e| input_err(format!("cannot read resume file: {e}")))?;
                let network = import_structured(&text).map_err(input_err)?;
                return explore_resumed(network, &evaluator, explore_config)
                    .map_err(|e| internal(format!("exploration failed: {e}")));
            }
        };
        outcome.map_err(|e| internal(format!("exploration failed: {e}")))
    })?;

    outcome
        .network
        .check_consistency()
        .map_err(|e| internal(format!("network consistency: {e}")))?;

    std::fs::write(out_dir.join("network.json"), export_structured(&outcome.network))
        .map_err(internal)?;
    std::fs::write(out_dir.join("network.dot"), export_dot(&outcome.network))
        .map_err(internal)?;
    std::fs::write(out_dir.join("audit.txt"), render_audit(&outcome.audits)).map_err(internal)?;
    std::fs::write(out_dir.join("decisions.log"), render_decision_log(&outcome))
        .map_err(internal)?;
    std::fs::write(out_dir.join("config.resolved.toml"), config.resolved()).map_err(internal)?;
    std::fs::write(out_dir.join("seeds.txt"), format!("seed = {}\n", config.seed))
        .map_err(internal)?;
    std::fs::write(
        out_dir.join("version.txt"),
        format!("mechsearch {}\nnetwork schema {}\n", env!("CARGO_PKG_VERSION"), crate::network::SCHEMA_VERSION),
    )
    .map_err(internal)?;

    if outcome.budget_exhausted {
        return Err(CliError::Budget(format!(
            "stopped after {} node expansions; partial outputs in {}",
            outcome.pop_trace.len(),
            out_dir.display()
        )));
    }
    Ok(ExploreArtifacts { outcome, out_dir })
}

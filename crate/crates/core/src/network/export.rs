//! Network export and import: DOT text for rendering, a versioned
//! structured document for round-tripping and resumed exploration.

use super::{ReactionNetwork, SCHEMA_VERSION};
use std::fmt::Write as _;

/// DOT digraph: one node per species labeled with its formula, key and
/// relative energy; one directed edge per elementary step annotated
/// `barrier=<value> kcal/mol`. Deterministic output.
pub fn export_dot(net: &ReactionNetwork) -> String {
    let mut out = String::from("digraph reaction_network {\n");
    out.push_str("  rankdir=LR;\n  node [shape=box];\n");
    let ids: std::collections::BTreeMap<&str, usize> = net
        .nodes
        .keys()
        .enumerate()
        .map(|(i, k)| (k.as_str(), i))
        .collect();
    for (key, node) in &net.nodes {
        let marker = if *key == net.root_key { " (root)" } else { "" };
        let _ = writeln!(
            out,
            "  n{} [label=\"{}{}\\nE_rel={:.2} kcal/mol\\n{}\"];",
            ids[key.as_str()],
            node.graph.formula(),
            marker,
            node.energy_rel,
            escape(key),
        );
    }
    let mut order: Vec<usize> = (0..net.edges.len()).collect();
    order.sort_by(|&a, &b| {
        let ea = &net.edges[a];
        let eb = &net.edges[b];
        (&ea.from_key, &ea.to_key, ea.path_id).cmp(&(&eb.from_key, &eb.to_key, eb.path_id))
    });
    for i in order {
        let e = &net.edges[i];
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"barrier={:.2} kcal/mol\"];",
            ids[e.from_key.as_str()],
            ids[e.to_key.as_str()],
            net.barrier_fwd(e),
        );
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Full-fidelity structured export. Deterministic, so exporting an imported
/// document reproduces it byte for byte.
pub fn export_structured(net: &ReactionNetwork) -> String {
    let mut doc = serde_json::to_string_pretty(net).expect("network serializes");
    doc.push('\n');
    doc
}

#[derive(Debug, thiserror::Error)]
pub enum ImportError {
    #[error("malformed network document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema version {found} (supported: {supported})")]
    SchemaVersion { found: u32, supported: u32 },
    #[error("inconsistent network document: {0}")]
    Inconsistent(String),
}

/// Import a structured export for inspection or resumed exploration.
pub fn import_structured(text: &str) -> Result<ReactionNetwork, ImportError> {
    let net: ReactionNetwork = serde_json::from_str(text)?;
    if net.schema_version != SCHEMA_VERSION {
        return Err(ImportError::SchemaVersion {
            found: net.schema_version,
            supported: SCHEMA_VERSION,
        });
    }
    net.check_consistency().map_err(ImportError::Inconsistent)?;
    Ok(net)
}

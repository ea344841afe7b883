//! Geometry to graph: distance-cutoff bond detection plus valence-driven
//! order assignment and stereo read-off.

use super::stereo::{find_stereo_sites, measure_parity, StereoAssignment};
use super::MolGraph;
use crate::geom::Geometry;

/// Bond present when `distance <= scale * (r_cov_i + r_cov_j)`.
pub const DEFAULT_PERCEPTION_SCALE: f64 = 1.2;

#[derive(Debug, Clone, thiserror::Error)]
pub enum PerceiveError {
    #[error("coordinates are not finite")]
    NonFinite,
    #[error("no valence-consistent bond order assignment exists ({detail})")]
    NoAssignment { detail: String },
    #[error("bond order assignment is not unique")]
    MultipleAssignments,
}

/// Bonded pairs `(i, j)` with `i < j` under the distance cutoff.
pub fn perceive_adjacency(geom: &Geometry, scale: f64) -> Vec<(usize, usize)> {
    let n = geom.natoms();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let cut = scale
                * (geom.elements[i].covalent_radius() + geom.elements[j].covalent_radius());
            if geom.distance(i, j) <= cut {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Perceive a full molecular graph from a geometry: cutoff adjacency, a
/// unique valence-satisfying order assignment, and stereo parities measured
/// from the coordinates.
pub fn perceive_graph(geom: &Geometry, scale: f64) -> Result<MolGraph, PerceiveError> {
    if !geom.is_finite() {
        return Err(PerceiveError::NonFinite);
    }
    let pairs = perceive_adjacency(geom, scale);
    let n = geom.natoms();

    // remaining valence after all perceived bonds at order 1
    let mut deficiency = vec![0i32; n];
    for i in 0..n {
        deficiency[i] = geom.elements[i].standard_valence() as i32;
    }
    for &(i, j) in &pairs {
        deficiency[i] -= 1;
        deficiency[j] -= 1;
    }
    if let Some(atom) = deficiency.iter().position(|&d| d < 0) {
        return Err(PerceiveError::NoAssignment {
            detail: format!("atom {atom} has more neighbors than valence"),
        });
    }

    // distribute deficiencies as order increments (0..=2 per bond)
    let mut solutions = Vec::new();
    let mut extra = vec![0u8; pairs.len()];
    assign_orders(&pairs, &mut deficiency, 0, &mut extra, &mut solutions);
    match solutions.len() {
        0 => Err(PerceiveError::NoAssignment {
            detail: "leftover valence cannot be placed on perceived bonds".into(),
        }),
        1 => {
            let bonds: Vec<(usize, usize, u8)> = pairs
                .iter()
                .zip(&solutions[0])
                .map(|(&(i, j), &e)| (i, j, 1 + e))
                .collect();
            let g = MolGraph::build(geom.elements.clone(), &bonds).map_err(|e| {
                PerceiveError::NoAssignment {
                    detail: format!("{e}"),
                }
            })?;
            // read stereo off the coordinates
            let assigns: Vec<StereoAssignment> = find_stereo_sites(&g)
                .into_iter()
                .map(|site| StereoAssignment {
                    site,
                    parity: measure_parity(&g, geom, &site),
                })
                .collect();
            g.with_stereo(assigns).map_err(|e| PerceiveError::NoAssignment {
                detail: format!("{e}"),
            })
        }
        _ => Err(PerceiveError::MultipleAssignments),
    }
}

/// Backtracking search for order increments; collects up to two solutions.
fn assign_orders(
    pairs: &[(usize, usize)],
    deficiency: &mut [i32],
    idx: usize,
    extra: &mut [u8],
    solutions: &mut Vec<Vec<u8>>,
) {
    if solutions.len() >= 2 {
        return;
    }
    if idx == pairs.len() {
        if deficiency.iter().all(|&d| d == 0) {
            solutions.push(extra.to_vec());
        }
        return;
    }
    let (i, j) = pairs[idx];
    let cap = deficiency[i].min(deficiency[j]).clamp(0, 2);
    // remaining bonds must be able to absorb what this choice leaves behind
    for e in 0..=cap as u8 {
        deficiency[i] -= e as i32;
        deficiency[j] -= e as i32;
        extra[idx] = e;
        let feasible = {
            // every atom's remaining deficiency must be coverable by its
            // not-yet-assigned bonds (2 units each)
            let mut room = vec![0i32; deficiency.len()];
            for &(a, b) in &pairs[idx + 1..] {
                room[a] += 2;
                room[b] += 2;
            }
            deficiency.iter().zip(&room).all(|(&d, &r)| d <= r)
        };
        if feasible {
            assign_orders(pairs, deficiency, idx + 1, extra, solutions);
        }
        deficiency[i] += e as i32;
        deficiency[j] += e as i32;
    }
}

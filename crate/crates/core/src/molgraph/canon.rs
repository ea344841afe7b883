//! Canonical graph keys by iterative neighborhood refinement with a
//! branch-and-bound search over refinement ties.
//!
//! The key is invariant under atom relabeling and distinct for distinct
//! labeled graphs up to isomorphism, stereo assignments included. The
//! certificate is the lexicographic minimum, over all labelings reachable by
//! individualization-refinement, of the serialized (elements, bonds, stereo)
//! triple; exploring every tie branch makes automorphic labelings collapse,
//! which is what folds meso-type stereoisomer pairs onto one key.

use super::stereo::StereoSite;
use super::MolGraph;

/// Upper bound on tie branches explored; beyond this the best certificate
/// found so far is used. Organic molecules at pipeline scale stay far below
/// the cap.
const MAX_LEAVES: usize = 200_000;

/// Canonical key of a graph.
pub fn canonical_key(g: &MolGraph) -> String {
    canonical_key_colored(g, &[])
}

/// Canonical key with extra distinguishing colors on selected atoms, used
/// for branch-identity tests. `extra` entries are `(atom, tag)` with tag > 0.
pub fn canonical_key_colored(g: &MolGraph, extra: &[(usize, u32)]) -> String {
    let n = g.natoms();
    let mut tags = vec![0u32; n];
    for &(atom, tag) in extra {
        tags[atom] = tag;
    }

    // initial color: (extra tag, element, sorted incident orders)
    let init: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            let mut orders: Vec<u32> = g
                .neighbors(i)
                .iter()
                .map(|&u| g.order(i, u) as u32)
                .collect();
            orders.sort_unstable();
            let mut sig = vec![tags[i], g.element(i).index() as u32];
            sig.extend(orders);
            sig
        })
        .collect();
    let colors = assign_ids(&init);
    let colors = refine(g, colors);

    let mut search = Search {
        g,
        best: None,
        leaves: 0,
    };
    search.descend(colors);
    let (cert, _) = search.best.expect("at least one labeling");
    cert
}

/// Map arbitrary signatures to dense ids ordered by signature.
fn assign_ids<T: Ord + Clone>(sigs: &[T]) -> Vec<u32> {
    let mut sorted: Vec<&T> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    sigs.iter()
        .map(|s| sorted.binary_search(&s).unwrap() as u32)
        .collect()
}

/// Stable neighborhood refinement: split color classes by the multiset of
/// (order, neighbor color) pairs until the partition stops changing.
fn refine(g: &MolGraph, mut colors: Vec<u32>) -> Vec<u32> {
    let n = g.natoms();
    loop {
        let before = distinct(&colors);
        let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..n)
            .map(|i| {
                let mut nb: Vec<(u32, u32)> = g
                    .neighbors(i)
                    .iter()
                    .map(|&u| (g.order(i, u) as u32, colors[u]))
                    .collect();
                nb.sort_unstable();
                (colors[i], nb)
            })
            .collect();
        colors = assign_ids(&sigs);
        if distinct(&colors) == before {
            return colors;
        }
    }
}

fn distinct(colors: &[u32]) -> usize {
    let mut v = colors.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

struct Search<'a> {
    g: &'a MolGraph,
    best: Option<(String, Vec<usize>)>,
    leaves: usize,
}

impl<'a> Search<'a> {
    fn descend(&mut self, colors: Vec<u32>) {
        if self.leaves >= MAX_LEAVES {
            return;
        }
        let n = self.g.natoms();

        // find the first non-singleton color class
        let mut cells: Vec<Vec<usize>> = Vec::new();
        {
            let max = colors.iter().copied().max().unwrap_or(0) as usize;
            let mut by_color = vec![Vec::new(); max + 1];
            for (i, &c) in colors.iter().enumerate() {
                by_color[c as usize].push(i);
            }
            cells.extend(by_color.into_iter().filter(|c| !c.is_empty()));
        }
        let target = cells.iter().find(|c| c.len() > 1);

        match target {
            None => {
                // discrete partition: labeling = rank by color
                self.leaves += 1;
                let mut perm = vec![0usize; n];
                for (i, &c) in colors.iter().enumerate() {
                    perm[i] = c as usize;
                }
                let cert = certificate(self.g, &perm);
                if self.best.as_ref().is_none_or(|(b, _)| cert < *b) {
                    self.best = Some((cert, perm));
                }
            }
            Some(cell) => {
                for &v in cell {
                    // individualize v: give it a color just below its cell
                    let mut branched: Vec<(u32, u32)> =
                        colors.iter().map(|&c| (c, 1)).collect();
                    branched[v] = (colors[v], 0);
                    let ids = assign_ids(&branched);
                    let refined = refine(self.g, ids);
                    self.descend(refined);
                    if self.leaves >= MAX_LEAVES {
                        return;
                    }
                }
            }
        }
    }
}

/// Serialize a graph under a labeling as a compact comparable string:
/// `<elements>|<bonds>|<stereo>` in new-label order.
fn certificate(g: &MolGraph, perm: &[usize]) -> String {
    let h = g.relabeled(perm);
    let n = h.natoms();
    let mut out = String::with_capacity(4 * n);
    for i in 0..n {
        out.push_str(h.element(i).symbol());
    }
    out.push('|');
    let mut first = true;
    for (i, j, o) in h.bonds() {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&format!("{i}-{j}:{o}"));
    }
    out.push('|');
    let mut first = true;
    for a in h.stereo() {
        if !first {
            out.push(',');
        }
        first = false;
        let p = match a.parity {
            super::Parity::Plus => '+',
            super::Parity::Minus => '-',
        };
        match a.site {
            StereoSite::Tetrahedral { center } => out.push_str(&format!("t{center}{p}")),
            StereoSite::DoubleBond { atoms: (i, j) } => {
                out.push_str(&format!("d{i}-{j}{p}"))
            }
        }
    }
    out
}

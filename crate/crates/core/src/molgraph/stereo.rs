//! Stereo sites and two-valued local configurations.
//!
//! Parity conventions, which every producer and consumer in the crate
//! shares:
//!
//! * Tetrahedral center: let `n0 < n1 < n2 < n3` be the neighbor indices.
//!   `Plus` means the signed volume `det[p(n1)-p(n0), p(n2)-p(n0),
//!   p(n3)-p(n0)]` is positive in any realizing geometry.
//! * Double bond `(i, j)`: the reference substituent on each end is the
//!   lowest-index one. `Plus` means the references are cis (dihedral
//!   magnitude below 90 degrees), `Minus` trans.

use super::{canonical_key_colored, MolGraph};
use crate::geom::Geometry;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn flipped(self) -> Parity {
        match self {
            Parity::Plus => Parity::Minus,
            Parity::Minus => Parity::Plus,
        }
    }

    pub fn flip_if(self, cond: bool) -> Parity {
        if cond {
            self.flipped()
        } else {
            self
        }
    }
}

/// A site where two distinguishable local configurations exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StereoSite {
    Tetrahedral { center: usize },
    DoubleBond { atoms: (usize, usize) },
}

impl StereoSite {
    pub fn double_bond(i: usize, j: usize) -> StereoSite {
        StereoSite::DoubleBond {
            atoms: (i.min(j), i.max(j)),
        }
    }

    /// All atoms whose bonding defines the site's configuration.
    pub fn involved_atoms(&self, g: &MolGraph) -> Vec<usize> {
        match *self {
            StereoSite::Tetrahedral { center } => {
                let mut v = g.neighbors(center);
                v.push(center);
                v.sort_unstable();
                v
            }
            StereoSite::DoubleBond { atoms: (i, j) } => {
                let mut v = g.substituents(i, j);
                v.extend(g.substituents(j, i));
                v.push(i);
                v.push(j);
                v.sort_unstable();
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StereoAssignment {
    pub site: StereoSite,
    pub parity: Parity,
}

/// Sign of the permutation that sorts `vals` ascending (false = even).
fn sort_parity_odd(vals: &[usize]) -> bool {
    let mut v = vals.to_vec();
    let mut swaps = 0;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            if v[j] < v[i] {
                v.swap(i, j);
                swaps += 1;
            }
        }
    }
    swaps % 2 == 1
}

/// Transport an assignment across a relabeling `perm[old] = new`.
pub(super) fn relabel_assignment(
    g: &MolGraph,
    a: &StereoAssignment,
    perm: &[usize],
) -> StereoAssignment {
    match a.site {
        StereoSite::Tetrahedral { center } => {
            let nbrs = g.neighbors(center);
            debug_assert_eq!(nbrs.len(), 4);
            // parity flips with the sign of the permutation that re-sorts
            // the relabeled neighbors
            let imgs: Vec<usize> = nbrs.iter().map(|&u| perm[u]).collect();
            let parity = a.parity.flip_if(sort_parity_odd(&imgs));
            StereoAssignment {
                site: StereoSite::Tetrahedral {
                    center: perm[center],
                },
                parity,
            }
        }
        StereoSite::DoubleBond { atoms: (i, j) } => {
            let ref_i = g.substituents(i, j)[0];
            let ref_j = g.substituents(j, i)[0];
            let (ni, nj) = (perm[i], perm[j]);
            let new_ref_i = g
                .substituents(i, j)
                .iter()
                .map(|&u| perm[u])
                .min()
                .unwrap();
            let new_ref_j = g
                .substituents(j, i)
                .iter()
                .map(|&u| perm[u])
                .min()
                .unwrap();
            let parity = a
                .parity
                .flip_if(perm[ref_i] != new_ref_i)
                .flip_if(perm[ref_j] != new_ref_j);
            StereoAssignment {
                site: StereoSite::double_bond(ni, nj),
                parity,
            }
        }
    }
}

/// Find all stereogenic sites: tetrahedral centers whose four branches are
/// pairwise non-isomorphic, and order-2 bonds with distinguishable
/// substituents on each end. Deterministic ascending order.
pub fn find_stereo_sites(g: &MolGraph) -> Vec<StereoSite> {
    let mut sites = Vec::new();

    for center in 0..g.natoms() {
        let nbrs = g.neighbors(center);
        if nbrs.len() != 4 || nbrs.iter().any(|&u| g.order(center, u) != 1) {
            continue;
        }
        // branch identity in full graph context: color the center and one
        // neighbor, compare whole-graph canonical keys
        let sigs: Vec<String> = nbrs
            .iter()
            .map(|&u| canonical_key_colored(g, &[(center, 1), (u, 2)]))
            .collect();
        let distinct = sigs
            .iter()
            .enumerate()
            .all(|(k, s)| sigs.iter().skip(k + 1).all(|t| t != s));
        if distinct {
            sites.push(StereoSite::Tetrahedral { center });
        }
    }

    for (i, j, o) in g.bonds() {
        if o != 2 {
            continue;
        }
        if end_is_stereogenic(g, i, j) && end_is_stereogenic(g, j, i) {
            sites.push(StereoSite::double_bond(i, j));
        }
    }

    sites.sort();
    sites
}

fn end_is_stereogenic(g: &MolGraph, end: usize, other: usize) -> bool {
    // the end atom must carry exactly this one multiple bond
    let multi = g
        .neighbors(end)
        .iter()
        .filter(|&&u| g.order(end, u) >= 2)
        .count();
    if multi != 1 {
        return false;
    }
    let subs = g.substituents(end, other);
    match subs.len() {
        0 => false,
        1 => true,
        2 => {
            let a = canonical_key_colored(g, &[(end, 1), (other, 2), (subs[0], 3)]);
            let b = canonical_key_colored(g, &[(end, 1), (other, 2), (subs[1], 3)]);
            a != b
        }
        _ => false,
    }
}

/// Read the parity of a site off a realizing geometry.
pub fn measure_parity(g: &MolGraph, geom: &Geometry, site: &StereoSite) -> Parity {
    match *site {
        StereoSite::Tetrahedral { center } => {
            let n = g.neighbors(center);
            let v = geom.signed_volume(n[0], n[1], n[2], n[3]);
            if v >= 0.0 {
                Parity::Plus
            } else {
                Parity::Minus
            }
        }
        StereoSite::DoubleBond { atoms: (i, j) } => {
            let ref_i = g.substituents(i, j)[0];
            let ref_j = g.substituents(j, i)[0];
            let phi = geom.dihedral(ref_i, i, j, ref_j);
            if phi.abs() <= std::f64::consts::FRAC_PI_2 {
                Parity::Plus
            } else {
                Parity::Minus
            }
        }
    }
}

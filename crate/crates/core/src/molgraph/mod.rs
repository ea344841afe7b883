//! Molecular graphs: valence-saturated 2-D species identity.
//!
//! A [`MolGraph`] is an ordered element list plus a symmetric integer
//! bond-order matrix (orders 0..=3) and optional stereo assignments. Every
//! atom's bond-order sum must equal its element's standard valence exactly,
//! which models neutral closed-shell species and makes per-atom conservation
//! checkable during enumeration. A single graph may hold several molecules
//! (disconnected components), e.g. bimolecular reactants.

mod canon;
mod perceive;
mod serial;
mod stereo;

pub use canon::{canonical_key, canonical_key_colored};
pub use perceive::{perceive_adjacency, perceive_graph, PerceiveError, DEFAULT_PERCEPTION_SCALE};
pub use serial::ParseError;
pub use stereo::{find_stereo_sites, measure_parity, Parity, StereoAssignment, StereoSite};

use crate::elements::Element;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, thiserror::Error)]
pub enum GraphError {
    #[error("atom {atom} ({element}) has bond-order sum {actual}, expected {expected}")]
    ValenceViolation {
        atom: usize,
        element: Element,
        expected: u8,
        actual: u32,
    },
    #[error("malformed graph input: {0}")]
    MalformedInput(String),
}

/// Molecular graph with exact valence saturation.
///
/// Immutable after construction; all operations that "modify" a graph
/// return a new value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MolGraph {
    elements: Vec<Element>,
    /// Row-major symmetric n*n order matrix, zero diagonal.
    orders: Vec<u8>,
    /// Sorted, at most one assignment per site.
    stereo: Vec<StereoAssignment>,
}

impl MolGraph {
    /// Validate and construct a graph from bonds given as `(i, j, order)`.
    pub fn build(
        elements: Vec<Element>,
        bonds: &[(usize, usize, u8)],
    ) -> Result<MolGraph, GraphError> {
        let n = elements.len();
        if n == 0 {
            return Err(GraphError::MalformedInput("empty element list".into()));
        }
        let mut orders = vec![0u8; n * n];
        for &(i, j, o) in bonds {
            if i >= n || j >= n {
                return Err(GraphError::MalformedInput(format!(
                    "bond ({i},{j}) references an atom out of range 0..{n}"
                )));
            }
            if i == j {
                return Err(GraphError::MalformedInput(format!("self bond on atom {i}")));
            }
            if !(1..=3).contains(&o) {
                return Err(GraphError::MalformedInput(format!(
                    "bond ({i},{j}) has order {o}, allowed 1..=3"
                )));
            }
            if orders[i * n + j] != 0 {
                return Err(GraphError::MalformedInput(format!(
                    "duplicate bond ({i},{j})"
                )));
            }
            orders[i * n + j] = o;
            orders[j * n + i] = o;
        }
        let g = MolGraph {
            elements,
            orders,
            stereo: Vec::new(),
        };
        g.check_valences()?;
        Ok(g)
    }

    fn check_valences(&self) -> Result<(), GraphError> {
        for i in 0..self.natoms() {
            let sum = self.order_sum(i);
            let expected = self.elements[i].standard_valence();
            if sum != expected as u32 {
                return Err(GraphError::ValenceViolation {
                    atom: i,
                    element: self.elements[i],
                    expected,
                    actual: sum,
                });
            }
        }
        Ok(())
    }

    /// Replace the stereo assignments wholesale. Assignments must reference
    /// structurally valid sites (an existing order-2 bond, or a center with
    /// four single-bonded neighbors) and be unique per site.
    pub fn with_stereo(&self, mut stereo: Vec<StereoAssignment>) -> Result<MolGraph, GraphError> {
        stereo.sort();
        for w in stereo.windows(2) {
            if w[0].site == w[1].site {
                return Err(GraphError::MalformedInput(format!(
                    "duplicate stereo assignment for {:?}",
                    w[0].site
                )));
            }
        }
        for a in &stereo {
            match a.site {
                StereoSite::Tetrahedral { center } => {
                    if center >= self.natoms()
                        || self.neighbors(center).len() != 4
                        || self.neighbors(center).iter().any(|&u| self.order(center, u) != 1)
                    {
                        return Err(GraphError::MalformedInput(format!(
                            "atom {center} is not a tetrahedral stereo site"
                        )));
                    }
                }
                StereoSite::DoubleBond { atoms: (i, j) } => {
                    if i >= self.natoms() || j >= self.natoms() || self.order(i, j) != 2 {
                        return Err(GraphError::MalformedInput(format!(
                            "atoms {i}-{j} are not an order-2 bond"
                        )));
                    }
                }
            }
        }
        Ok(MolGraph {
            elements: self.elements.clone(),
            orders: self.orders.clone(),
            stereo,
        })
    }

    pub fn natoms(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> Element {
        self.elements[i]
    }

    pub fn order(&self, i: usize, j: usize) -> u8 {
        self.orders[i * self.natoms() + j]
    }

    pub fn order_sum(&self, i: usize) -> u32 {
        let n = self.natoms();
        self.orders[i * n..(i + 1) * n].iter().map(|&o| o as u32).sum()
    }

    /// Indices bonded to atom `i`, ascending.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let n = self.natoms();
        (0..n).filter(|&j| self.orders[i * n + j] > 0).collect()
    }

    /// All bonds as `(i, j, order)` with `i < j`, ascending.
    pub fn bonds(&self) -> Vec<(usize, usize, u8)> {
        let n = self.natoms();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let o = self.orders[i * n + j];
                if o > 0 {
                    out.push((i, j, o));
                }
            }
        }
        out
    }

    /// Bonded pairs `(i, j)` with `i < j`, ignoring order.
    pub fn adjacency_pairs(&self) -> Vec<(usize, usize)> {
        self.bonds().into_iter().map(|(i, j, _)| (i, j)).collect()
    }

    pub fn stereo(&self) -> &[StereoAssignment] {
        &self.stereo
    }

    /// Connected components as sorted atom-index lists, ordered by their
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.natoms();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for u in self.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Hill-order molecular formula of the whole graph (C first, then H,
    /// then remaining elements alphabetically).
    pub fn formula(&self) -> String {
        let mut counts = [0usize; 4];
        for e in &self.elements {
            counts[e.index()] += 1;
        }
        let mut out = String::new();
        for (sym, cnt) in [
            ("C", counts[Element::C.index()]),
            ("H", counts[Element::H.index()]),
            ("N", counts[Element::N.index()]),
            ("O", counts[Element::O.index()]),
        ] {
            match cnt {
                0 => {}
                1 => out.push_str(sym),
                k => out.push_str(&format!("{sym}{k}")),
            }
        }
        out
    }

    /// Apply an atom relabeling: `perm[old] = new`. Stereo parities are
    /// transported so that the relabeled graph describes the same molecule.
    pub fn relabeled(&self, perm: &[usize]) -> MolGraph {
        let n = self.natoms();
        assert_eq!(perm.len(), n);
        let mut elements = vec![Element::H; n];
        let mut orders = vec![0u8; n * n];
        for i in 0..n {
            elements[perm[i]] = self.elements[i];
            for j in 0..n {
                orders[perm[i] * n + perm[j]] = self.orders[i * n + j];
            }
        }
        let stereo = self
            .stereo
            .iter()
            .map(|a| stereo::relabel_assignment(self, a, perm))
            .collect::<Vec<_>>();
        let mut g = MolGraph {
            elements,
            orders,
            stereo,
        };
        g.stereo.sort();
        g
    }

    /// Substituents of `end` across a double bond to `other`: single-bonded
    /// neighbors excluding `other`, ascending.
    pub(crate) fn substituents(&self, end: usize, other: usize) -> Vec<usize> {
        self.neighbors(end)
            .into_iter()
            .filter(|&u| u != other)
            .collect()
    }

    pub fn canonical_key(&self) -> String {
        canon::canonical_key(self)
    }
}

/// Serde representation mirrors the text format: elements, sparse upper
/// triangle, stereo list.
#[derive(Serialize, Deserialize)]
struct MolGraphRepr {
    elements: Vec<Element>,
    bonds: Vec<(usize, usize, u8)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    stereo: Vec<StereoAssignment>,
}

impl Serialize for MolGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MolGraphRepr {
            elements: self.elements.clone(),
            bonds: self.bonds(),
            stereo: self.stereo.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MolGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = MolGraphRepr::deserialize(d)?;
        let g = MolGraph::build(repr.elements, &repr.bonds).map_err(serde::de::Error::custom)?;
        g.with_stereo(repr.stereo).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
pub(crate) mod test_mols {
    use super::*;
    use crate::elements::Element::*;

    pub fn ch4() -> MolGraph {
        MolGraph::build(
            vec![C, H, H, H, H],
            &[(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1)],
        )
        .unwrap()
    }

    pub fn ethylene() -> MolGraph {
        MolGraph::build(
            vec![C, C, H, H, H, H],
            &[(0, 1, 2), (0, 2, 1), (0, 3, 1), (1, 4, 1), (1, 5, 1)],
        )
        .unwrap()
    }

    pub fn ethane() -> MolGraph {
        MolGraph::build(
            vec![C, C, H, H, H, H, H, H],
            &[
                (0, 1, 1),
                (0, 2, 1),
                (0, 3, 1),
                (0, 4, 1),
                (1, 5, 1),
                (1, 6, 1),
                (1, 7, 1),
            ],
        )
        .unwrap()
    }

    /// H2 and C2H4 as one two-component system (atoms 0,1 = H2).
    pub fn h2_c2h4() -> MolGraph {
        MolGraph::build(
            vec![H, H, C, C, H, H, H, H],
            &[
                (0, 1, 1),
                (2, 3, 2),
                (2, 4, 1),
                (2, 5, 1),
                (3, 6, 1),
                (3, 7, 1),
            ],
        )
        .unwrap()
    }

    /// 2-butene skeleton: C0H3-C1=C2-C3H3, stereo unassigned.
    pub fn butene2() -> MolGraph {
        MolGraph::build(
            vec![C, C, C, C, H, H, H, H, H, H, H, H],
            &[
                (0, 1, 1),
                (1, 2, 2),
                (2, 3, 1),
                (0, 4, 1),
                (0, 5, 1),
                (0, 6, 1),
                (1, 7, 1),
                (2, 8, 1),
                (3, 9, 1),
                (3, 10, 1),
                (3, 11, 1),
            ],
        )
        .unwrap()
    }

    /// Ethanol CH3-CH2-OH.
    pub fn ethanol() -> MolGraph {
        MolGraph::build(
            vec![C, C, O, H, H, H, H, H, H],
            &[
                (0, 1, 1),
                (1, 2, 1),
                (0, 3, 1),
                (0, 4, 1),
                (0, 5, 1),
                (1, 6, 1),
                (1, 7, 1),
                (2, 8, 1),
            ],
        )
        .unwrap()
    }

    /// Dimethyl ether CH3-O-CH3 (same formula as ethanol).
    pub fn dimethyl_ether() -> MolGraph {
        MolGraph::build(
            vec![C, O, C, H, H, H, H, H, H],
            &[
                (0, 1, 1),
                (1, 2, 1),
                (0, 3, 1),
                (0, 4, 1),
                (0, 5, 1),
                (2, 6, 1),
                (2, 7, 1),
                (2, 8, 1),
            ],
        )
        .unwrap()
    }

    /// 2,3-dihydroxybutanedial: OHC-CH(OH)-CH(OH)-CHO, two stereocenters
    /// whose branches are mirror-related (meso-capable).
    pub fn dihydroxybutanedial() -> MolGraph {
        // atoms: C0 (CHO), C1, C2, C3 (CHO), O4=C0, O5-C1, O6-C2, O7=C3,
        // H8 (C0), H9 (C1), H10 (O5), H11 (C2), H12 (O6), H13 (C3)
        MolGraph::build(
            vec![C, C, C, C, O, O, O, O, H, H, H, H, H, H],
            &[
                (0, 1, 1),
                (1, 2, 1),
                (2, 3, 1),
                (0, 4, 2),
                (1, 5, 1),
                (2, 6, 1),
                (3, 7, 2),
                (0, 8, 1),
                (1, 9, 1),
                (5, 10, 1),
                (2, 11, 1),
                (6, 12, 1),
                (3, 13, 1),
            ],
        )
        .unwrap()
    }
}

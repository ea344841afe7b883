//! Elementary-step enumeration as bond-matrix edits, and stereoisomer
//! expansion.
//!
//! A [`Move`] breaks and forms the same number of bond-order units, with
//! per-atom conservation, so applying it to a valence-saturated graph
//! yields another valence-saturated graph. Enumeration walks multisets of
//! broken bond units, then all multigraph pairings of the freed valence
//! stubs; the conditional rule prunes 3- and 4-unit edits that touch no
//! multiple bond. The unconstrained space of binary bond matrices grows as
//! 2^(N(N-1)/2), which is why this constrained scheme exists at all.

use crate::molgraph::{canonical_key, find_stereo_sites, MolGraph, StereoAssignment};
use serde::{Deserialize, Serialize};
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

/// An elementary-step edit: each `broken` entry decrements that pair's bond
/// order by one, each `formed` entry increments by one. Entries may repeat
/// (a double decrement of one bond is two entries).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Move {
    pub broken: Vec<(usize, usize)>,
    pub formed: Vec<(usize, usize)>,
}

impl Move {
    pub fn new(mut broken: Vec<(usize, usize)>, mut formed: Vec<(usize, usize)>) -> Move {
        for p in broken.iter_mut().chain(formed.iter_mut()) {
            *p = (p.0.min(p.1), p.0.max(p.1));
        }
        broken.sort_unstable();
        formed.sort_unstable();
        Move { broken, formed }
    }

    /// Number of bond units rearranged (the "n" in an n-break n-form step).
    pub fn size(&self) -> usize {
        self.broken.len()
    }

    pub fn reversed(&self) -> Move {
        Move {
            broken: self.formed.clone(),
            formed: self.broken.clone(),
        }
    }

    /// Atoms touched by any broken or formed pair.
    pub fn touched_atoms(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .broken
            .iter()
            .chain(&self.formed)
            .flat_map(|&(i, j)| [i, j])
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Per-atom appearance counts in broken and formed; conservation means
    /// the two maps are equal.
    fn degree_counts(pairs: &[(usize, usize)]) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for &(i, j) in pairs {
            *m.entry(i).or_insert(0) += 1;
            *m.entry(j).or_insert(0) += 1;
        }
        m
    }

    pub fn conserves_atoms(&self) -> bool {
        Move::degree_counts(&self.broken) == Move::degree_counts(&self.formed)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum MoveError {
    #[error("move breaks {broken} and forms {formed} units; counts must match and lie in 1..={n_max}")]
    BadShape {
        broken: usize,
        formed: usize,
        n_max: usize,
    },
    #[error("move does not conserve per-atom bond counts")]
    NotConserving,
    #[error("bond ({i},{j}) would get order {order}, outside 0..=3")]
    OrderRange { i: usize, j: usize, order: i32 },
    #[error("pair ({i},{j}) out of range for {natoms} atoms")]
    OutOfRange { i: usize, j: usize, natoms: usize },
}

/// Enumeration settings. `n_max` is the bond-rearrangement ceiling
/// (default 4); `conditional` admits 3- and 4-unit edits only when at least
/// one broken pair has order 2 or higher in the reactant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumConfig {
    pub n_max: usize,
    pub conditional: bool,
    pub allow_identity: bool,
    /// Hard cap on distinct products kept (None = unbounded).
    pub max_products: Option<usize>,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            n_max: 4,
            conditional: true,
            allow_identity: false,
            max_products: None,
        }
    }
}

/// Apply a move, validating conservation and order bounds. The resulting
/// graph keeps stereo assignments whose sites are untouched by the edit.
pub fn apply_move(g: &MolGraph, m: &Move) -> Result<MolGraph, MoveError> {
    let n = g.natoms();
    if m.broken.len() != m.formed.len() {
        return Err(MoveError::BadShape {
            broken: m.broken.len(),
            formed: m.formed.len(),
            n_max: usize::MAX,
        });
    }
    for &(i, j) in m.broken.iter().chain(&m.formed) {
        if i >= n || j >= n {
            return Err(MoveError::OutOfRange { i, j, natoms: n });
        }
    }
    if !m.conserves_atoms() {
        return Err(MoveError::NotConserving);
    }

    let mut delta: BTreeMap<(usize, usize), i32> = BTreeMap::new();
    for &(i, j) in &m.broken {
        *delta.entry((i.min(j), i.max(j))).or_insert(0) -= 1;
    }
    for &(i, j) in &m.formed {
        *delta.entry((i.min(j), i.max(j))).or_insert(0) += 1;
    }

    let mut bonds: BTreeMap<(usize, usize), i32> = g
        .bonds()
        .into_iter()
        .map(|(i, j, o)| ((i, j), o as i32))
        .collect();
    for (&(i, j), &d) in &delta {
        let o = bonds.entry((i, j)).or_insert(0);
        *o += d;
        if !(0..=3).contains(o) {
            return Err(MoveError::OrderRange { i, j, order: *o });
        }
    }

    let bond_list: Vec<(usize, usize, u8)> = bonds
        .into_iter()
        .filter(|&(_, o)| o > 0)
        .map(|((i, j), o)| (i, j, o as u8))
        .collect();
    let out = MolGraph::build(g.elements().to_vec(), &bond_list)
        .expect("conserving move preserves valence saturation");

    // keep stereo assignments whose defining atoms the edit does not touch
    let touched = m.touched_atoms();
    let new_sites = find_stereo_sites(&out);
    let kept: Vec<StereoAssignment> = g
        .stereo()
        .iter()
        .filter(|a| {
            new_sites.contains(&a.site)
                && a.site
                    .involved_atoms(g)
                    .iter()
                    .all(|at| touched.binary_search(at).is_err())
        })
        .cloned()
        .collect();
    Ok(out.with_stereo(kept).expect("kept sites remain valid"))
}

/// A candidate product: its canonical key, graph, and the representative
/// move that produced it (the smallest edit by `(size, broken, formed)`).
#[derive(Debug, Clone)]
pub struct Candidate {
    pub key: String,
    pub graph: MolGraph,
    pub mv: Move,
}

/// Enumerate all distinct products reachable by one conserving edit of at
/// most `cfg.n_max` bond units. Products are deduplicated by canonical key;
/// the reactant's own key is excluded unless `allow_identity`.
pub fn enumerate_moves(g: &MolGraph, cfg: &EnumConfig) -> Vec<Candidate> {
    let mut out: BTreeMap<String, (Move, MolGraph)> = BTreeMap::new();
    let self_key = canonical_key(g);
    let mut full = false;
    visit_moves(g, cfg, &mut |mv| {
        if full {
            return false;
        }
        let product = apply_move(g, &mv).expect("enumerated moves are valid");
        let key = canonical_key(&product);
        if !cfg.allow_identity && key == self_key {
            return true;
        }
        let at_cap = cfg.max_products.is_some_and(|cap| out.len() >= cap);
        match out.entry(key) {
            Entry::Vacant(e) => {
                if at_cap {
                    full = true;
                    return false;
                }
                e.insert((mv, product));
            }
            Entry::Occupied(mut e) => {
                let current = &e.get().0;
                if (mv.size(), &mv.broken, &mv.formed)
                    < (current.size(), &current.broken, &current.formed)
                {
                    e.get_mut().0 = mv;
                }
            }
        }
        true
    });
    out.into_iter()
        .map(|(key, (mv, graph))| Candidate { key, graph, mv })
        .collect()
}

/// Count distinct products per edit size without materializing the
/// candidate list. Index k of the result is the count for k-unit edits
/// (index 0 unused).
pub fn count_moves(g: &MolGraph, cfg: &EnumConfig) -> Vec<usize> {
    let self_key = canonical_key(g);
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    visit_moves(g, cfg, &mut |mv| {
        let product = apply_move(g, &mv).expect("enumerated moves are valid");
        let key = canonical_key(&product);
        if cfg.allow_identity || key != self_key {
            let n = mv.size();
            seen.entry(key).and_modify(|k| *k = (*k).min(n)).or_insert(n);
        }
        true
    });
    let mut counts = vec![0usize; cfg.n_max + 1];
    for (_, n) in seen {
        counts[n] += 1;
    }
    counts
}

/// Walk every valid move; the callback returns false to stop early.
fn visit_moves(g: &MolGraph, cfg: &EnumConfig, f: &mut impl FnMut(Move) -> bool) {
    // bond units available for breaking: one entry per pair with its order
    let bonds = g.bonds();
    for n in 1..=cfg.n_max {
        let mut chosen: Vec<usize> = Vec::with_capacity(n);
        if !break_rec(g, cfg, &bonds, n, 0, &mut chosen, f) {
            return;
        }
    }
}

/// Choose a multiset of `n` broken units from `bonds` (each bond usable up
/// to its order), then enumerate formings.
fn break_rec(
    g: &MolGraph,
    cfg: &EnumConfig,
    bonds: &[(usize, usize, u8)],
    n: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    f: &mut impl FnMut(Move) -> bool,
) -> bool {
    if chosen.len() == n {
        // conditional rule: 3+ unit edits must break some multiple bond
        if cfg.conditional && n >= 3 {
            let has_multiple = chosen.iter().any(|&b| bonds[b].2 >= 2);
            if !has_multiple {
                return true;
            }
        }
        return form_enumerate(g, bonds, chosen, f);
    }
    for b in start..bonds.len() {
        let used = chosen.iter().filter(|&&c| c == b).count();
        if used < bonds[b].2 as usize {
            chosen.push(b);
            // allow repeats of the same bond but keep multisets sorted
            if !break_rec(g, cfg, bonds, n, b, chosen, f) {
                chosen.pop();
                return false;
            }
            chosen.pop();
        }
    }
    true
}

/// Enumerate all multigraph pairings of the freed stubs, excluding pairings
/// that re-form a broken pair (those reduce to smaller edits).
fn form_enumerate(
    g: &MolGraph,
    bonds: &[(usize, usize, u8)],
    chosen: &[usize],
    f: &mut impl FnMut(Move) -> bool,
) -> bool {
    let broken: Vec<(usize, usize)> = chosen.iter().map(|&b| (bonds[b].0, bonds[b].1)).collect();

    // stub list: each atom appears once per broken unit
    let mut stubs: Vec<usize> = broken.iter().flat_map(|&(i, j)| [i, j]).collect();
    stubs.sort_unstable();

    // broken multiplicity per pair, for exclusion and capacity checks
    let mut broken_count: BTreeMap<(usize, usize), u8> = BTreeMap::new();
    for &(i, j) in &broken {
        *broken_count.entry((i, j)).or_insert(0) += 1;
    }

    let mut formed: Vec<(usize, usize)> = Vec::with_capacity(broken.len());
    pair_stubs(g, &stubs, &broken_count, &mut formed, &mut |formed| {
        f(Move::new(broken.clone(), formed.to_vec()))
    })
}

fn pair_stubs(
    g: &MolGraph,
    stubs: &[usize],
    broken_count: &BTreeMap<(usize, usize), u8>,
    formed: &mut Vec<(usize, usize)>,
    f: &mut impl FnMut(&[(usize, usize)]) -> bool,
) -> bool {
    if stubs.is_empty() {
        return f(formed);
    }
    let a = stubs[0];
    let mut tried: Vec<usize> = Vec::new();
    for (idx, &b) in stubs.iter().enumerate().skip(1) {
        if a == b || tried.contains(&b) {
            continue;
        }
        tried.push(b);
        let pair = (a.min(b), a.max(b));
        // no re-forming of a broken pair
        if broken_count.contains_key(&pair) {
            continue;
        }
        // order cap: existing order plus already-formed copies stays <= 3
        let existing = g.order(pair.0, pair.1) as usize;
        let planned = formed.iter().filter(|&&p| p == pair).count();
        if existing + planned + 1 > 3 {
            continue;
        }
        let mut rest: Vec<usize> = Vec::with_capacity(stubs.len() - 2);
        rest.extend_from_slice(&stubs[1..idx]);
        rest.extend_from_slice(&stubs[idx + 1..]);
        formed.push(pair);
        let keep_going = pair_stubs(g, &rest, broken_count, formed, f);
        formed.pop();
        if !keep_going {
            return false;
        }
    }
    true
}

/// Expand a graph into all distinct stereoisomers over its stereo sites,
/// deduplicated by canonical key (meso-type collapses included). Outputs
/// differ from the input only in stereo assignments.
pub fn enumerate_stereoisomers(g: &MolGraph) -> Vec<MolGraph> {
    let sites = find_stereo_sites(g);
    let mut out: BTreeMap<String, MolGraph> = BTreeMap::new();
    let combos = 1usize << sites.len();
    for mask in 0..combos {
        let assigns: Vec<StereoAssignment> = sites
            .iter()
            .enumerate()
            .map(|(k, site)| StereoAssignment {
                site: *site,
                parity: if mask >> k & 1 == 0 {
                    crate::molgraph::Parity::Plus
                } else {
                    crate::molgraph::Parity::Minus
                },
            })
            .collect();
        let iso = g.with_stereo(assigns).expect("sites are valid");
        out.entry(canonical_key(&iso)).or_insert(iso);
    }
    out.into_values().collect()
}

/// Size of the unconstrained binary bond-matrix space for `n` atoms:
/// 2^(n(n-1)/2). None when it exceeds u128.
pub fn unconstrained_space_size(n: u64) -> Option<u128> {
    let exp = unconstrained_space_log2(n);
    if exp < 128 {
        Some(1u128 << exp)
    } else {
        None
    }
}

/// log2 of the unconstrained space: n(n-1)/2.
pub fn unconstrained_space_log2(n: u64) -> u64 {
    n * (n - 1) / 2
}

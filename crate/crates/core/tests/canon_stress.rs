//! Canonicalization stress: symmetric molecules, Kekulé relabelings, and
//! randomized valid graphs.

mod common;

use mechsearch::elements::Element::{C, H, O};
use mechsearch::molgraph::MolGraph;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;

/// Kekulé benzene: alternating 1-2 ring orders, one H per carbon.
fn benzene(rotated: bool) -> MolGraph {
    let mut bonds = Vec::new();
    for i in 0..6usize {
        let j = (i + 1) % 6;
        // the two Kekulé assignments differ by which parity gets the double
        let order = if (i % 2 == 0) != rotated { 2 } else { 1 };
        bonds.push((i, j, order));
        bonds.push((i, 6 + i, 1));
    }
    MolGraph::build(vec![C, C, C, C, C, C, H, H, H, H, H, H], &bonds).unwrap()
}

#[test]
fn kekule_forms_share_one_key() {
    let a = benzene(false);
    let b = benzene(true);
    assert!(common::isomorphic(&a, &b), "Kekulé forms are isomorphic");
    assert_eq!(a.canonical_key(), b.canonical_key());
}

/// Neopentane C(CH3)4: a 31104-automorphism stress case for the tie search.
#[test]
fn neopentane_key_is_permutation_invariant_and_fast() {
    let mut bonds = vec![(0usize, 1usize, 1u8), (0, 2, 1), (0, 3, 1), (0, 4, 1)];
    let mut elements = vec![C, C, C, C, C];
    for methyl in 1..=4usize {
        for _ in 0..3 {
            let h = elements.len();
            elements.push(H);
            bonds.push((methyl, h, 1));
        }
    }
    let g = MolGraph::build(elements, &bonds).unwrap();
    let t0 = std::time::Instant::now();
    let key = g.canonical_key();
    assert!(
        t0.elapsed().as_secs_f64() < 5.0,
        "canonicalization too slow: {:?}",
        t0.elapsed()
    );
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..5 {
        let mut perm: Vec<usize> = (0..g.natoms()).collect();
        perm.shuffle(&mut rng);
        assert_eq!(g.relabeled(&perm).canonical_key(), key);
    }
}

/// Random valid graphs by assembly: grow trees with valence stubs, then
/// randomly close some rings and upgrade some bonds, then saturate with
/// hydrogens. Checks serde and text round-trips plus key invariance.
#[test]
fn random_valid_graphs_roundtrip_and_canonicalize() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
    for trial in 0..40 {
        let g = random_graph(&mut rng);
        // text round-trip
        let back = MolGraph::parse_text(&g.to_text()).unwrap();
        assert_eq!(back, g, "trial {trial}: text roundtrip");
        // serde round-trip
        let json = serde_json::to_string(&g).unwrap();
        let back: MolGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g, "trial {trial}: serde roundtrip");
        // key invariance under a random relabeling
        let mut perm: Vec<usize> = (0..g.natoms()).collect();
        perm.shuffle(&mut rng);
        assert_eq!(
            g.relabeled(&perm).canonical_key(),
            g.canonical_key(),
            "trial {trial}: key changed under relabeling"
        );
    }
}

fn random_graph(rng: &mut impl Rng) -> MolGraph {
    // heavy-atom skeleton as a random tree
    let n_heavy = rng.random_range(2..=7);
    let mut elements = Vec::new();
    let mut bonds: Vec<(usize, usize, u8)> = Vec::new();
    let mut free = Vec::new(); // remaining valence per atom
    for i in 0..n_heavy {
        let e = if rng.random_bool(0.7) { C } else { O };
        elements.push(e);
        free.push(e.standard_valence() as i32);
        if i > 0 {
            // attach to a previous atom with spare valence
            let candidates: Vec<usize> = (0..i).filter(|&j| free[j] >= 1).collect();
            if candidates.is_empty() {
                free.pop();
                elements.pop();
                break;
            }
            let j = candidates[rng.random_range(0..candidates.len())];
            bonds.push((j, i, 1));
            free[j] -= 1;
            free[i] -= 1;
        }
    }
    let n_heavy = elements.len();
    // occasional bond order upgrade
    for b in bonds.iter_mut() {
        if free[b.0] >= 1 && free[b.1] >= 1 && rng.random_bool(0.3) {
            b.2 += 1;
            free[b.0] -= 1;
            free[b.1] -= 1;
        }
    }
    // occasional ring closure
    if n_heavy >= 3 && rng.random_bool(0.4) {
        for _ in 0..2 {
            let i = rng.random_range(0..n_heavy);
            let j = rng.random_range(0..n_heavy);
            if i != j
                && free[i] >= 1
                && free[j] >= 1
                && !bonds.iter().any(|&(a, b, _)| (a, b) == (i.min(j), i.max(j)))
            {
                bonds.push((i.min(j), i.max(j), 1));
                free[i] -= 1;
                free[j] -= 1;
                break;
            }
        }
    }
    // saturate with hydrogens
    for i in 0..n_heavy {
        while free[i] > 0 {
            let h = elements.len();
            elements.push(H);
            bonds.push((i, h, 1));
            free[i] -= 1;
        }
    }
    MolGraph::build(elements, &bonds).unwrap()
}

//! Acceptance suite: one test per release criterion, each printing a
//! PASS line. Run with `cargo test -p mechsearch --test acceptance --
//! --nocapture` to see the lines; every tolerance is pinned in code here.

mod common;

use common::fixtures;
use mechsearch::elements::Element;
use mechsearch::geom::{embed, kabsch_rmsd, Geometry};
use mechsearch::molgraph::MolGraph;
use mechsearch::pes::{gradient_fd_error, MorseSurrogate, Surface2D};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pass(criterion: u32, what: &str) {
    println!("ACCEPTANCE {criterion:02} PASS: {what}");
}

/// Criterion 1: Every shipped calculator passes central finite-difference gradient
/// checks on 100 random geometries/points, relative error below 1e-4.
#[test]
fn acceptance_01_gradient_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);

    // molecular surrogate on random CHON clusters
    let surrogate = MorseSurrogate::default();
    let mut checked = 0;
    while checked < 100 {
        let n = rng.random_range(2..=6);
        let elements: Vec<Element> = (0..n)
            .map(|_| match rng.random_range(0..4) {
                0 => Element::H,
                1 => Element::C,
                2 => Element::N,
                _ => Element::O,
            })
            .collect();
        let coords: Vec<[f64; 3]> = (0..n)
            .map(|_| std::array::from_fn(|_| rng.random_range(-2.5..2.5)))
            .collect();
        let geom = Geometry::new(elements, coords);
        let too_close = (0..geom.natoms())
            .any(|i| (0..i).any(|j| geom.distance(i, j) < 0.5));
        if too_close {
            continue;
        }
        let err = gradient_fd_error(&surrogate, &geom, 1e-5).unwrap();
        assert!(err < 1e-4, "surrogate fd error {err:.2e} on sample {checked}");
        checked += 1;
    }

    // every 2-D surface on 100 random points
    for surface in [
        Surface2D::MullerBrown,
        Surface2D::QuadraticBowl,
        Surface2D::Rosenbrock,
        Surface2D::SaddleQuad,
        Surface2D::DoubleWell,
    ] {
        for k in 0..100 {
            let x = rng.random_range(-1.6..1.1);
            let y = rng.random_range(-0.4..2.2);
            let point = Surface2D::point(x, y);
            let err = gradient_fd_error(&surface, &point, 1e-6).unwrap();
            assert!(err < 1e-4, "{surface:?} fd error {err:.2e} on sample {k}");
        }
    }
    pass(1, "gradient consistency: 100 random checks per shipped calculator, rel err < 1e-4");
}

/// Criterion 2: CI-NEB plus P-RFO on the Müller-Brown surface locate the inter-basin
/// saddle within 1e-3 of the grid oracle, with exactly one negative mode,
/// and the IRC reaches both oracle minima within 1e-3.
#[test]
fn acceptance_02_saddle_search_fidelity() {
    use mechsearch::optimize::{
        analyze_modes, hessian_fd, prfo_ts_optimize, OptParams, PrfoParams,
    };
    use mechsearch::path::{cineb, idpp_interpolate, irc_descend, IrcParams, NebParams};

    let oracle = common::mb_oracle();
    let mut by_y = oracle.minima.clone();
    by_y.sort_by(|a, b| b[1].total_cmp(&a[1]));
    let (a, b) = (by_y[0], by_y[1]);
    let saddle = common::mb_saddle_between(a, b);

    let band = idpp_interpolate(
        &Surface2D::point(a[0], a[1]),
        &Surface2D::point(b[0], b[1]),
        15,
        50.0,
    )
    .band;
    let neb = cineb(
        &Surface2D::MullerBrown,
        band,
        &NebParams {
            tol_force: 0.02,
            max_iter: 4000,
            ..NebParams::default()
        },
    )
    .unwrap();
    assert!(neb.converged, "CI-NEB unconverged: {}", neb.max_force);

    let hi = neb.band.highest_index();
    let prfo = prfo_ts_optimize(
        &Surface2D::MullerBrown,
        &neb.band.images[hi],
        &PrfoParams {
            opt: OptParams {
                tol_max_grad: 1e-7,
                tol_rms_grad: 1e-7,
                max_cycles: 300,
                ..OptParams::default()
            },
            ..PrfoParams::default()
        },
    )
    .unwrap();
    assert!(prfo.converged);
    let (x, y) = Surface2D::coords(&prfo.geometry);
    assert!(
        (x - saddle[0]).abs() < 1e-3 && (y - saddle[1]).abs() < 1e-3,
        "saddle ({x}, {y}) vs oracle {saddle:?}"
    );

    let hessian = hessian_fd(&Surface2D::MullerBrown, &prfo.geometry).unwrap();
    let analysis = analyze_modes(&hessian, &[1.0], &prfo.geometry);
    assert_eq!(analysis.n_negative, 1);

    let irc = irc_descend(
        &Surface2D::MullerBrown,
        &prfo.geometry,
        &analysis.imaginary_mode,
        &[1.0],
        &IrcParams {
            grad_done: 1.0,
            endpoint_opt: OptParams {
                tol_max_grad: 1e-8,
                tol_rms_grad: 1e-8,
                max_cycles: 40_000,
                ..OptParams::default()
            },
            ..IrcParams::default()
        },
    )
    .unwrap();
    let pf = Surface2D::coords(&irc.forward.geometry);
    let pb = Surface2D::coords(&irc.backward.geometry);
    let close = |p: (f64, f64), q: [f64; 2]| (p.0 - q[0]).abs() < 1e-3 && (p.1 - q[1]).abs() < 1e-3;
    assert!(
        (close(pf, a) && close(pb, b)) || (close(pf, b) && close(pb, a)),
        "IRC endpoints {pf:?}/{pb:?} vs minima {a:?}/{b:?}"
    );
    pass(2, "Müller-Brown saddle within 1e-3 of grid oracle, one negative mode, IRC hits both minima");
}

/// Criterion 3: Enumeration matches an independent brute-force oracle exactly on a
/// fixture set of small CHON graphs at n_max <= 2, and conditional pruning
/// removes only all-single-bond-breaking moves.
#[test]
fn acceptance_03_enumeration_correctness() {
    use mechsearch::enumerate::{enumerate_moves, EnumConfig};
    use std::collections::BTreeSet;

    // independent oracle: try every multiset of broken bond units and
    // formed pairs up to size 2, filter by the invariants, apply as a raw
    // matrix edit and collect canonical keys
    fn oracle_keys(g: &MolGraph, n_max: usize) -> BTreeSet<String> {
        let n = g.natoms();
        let self_key = g.canonical_key();
        let mut bond_units: Vec<(usize, usize)> = Vec::new();
        for (i, j, o) in g.bonds() {
            for _ in 0..o {
                bond_units.push((i, j));
            }
        }
        let mut all_pairs: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                all_pairs.push((i, j));
            }
        }

        let mut keys = BTreeSet::new();
        let mut try_move = |broken: &[(usize, usize)], formed: &[(usize, usize)]| {
            // per-atom conservation
            let mut delta = vec![0i32; n];
            for &(i, j) in broken {
                delta[i] -= 1;
                delta[j] -= 1;
            }
            for &(i, j) in formed {
                delta[i] += 1;
                delta[j] += 1;
            }
            if delta.iter().any(|&d| d != 0) {
                return;
            }
            // net matrix edit with order bounds
            let mut orders = std::collections::BTreeMap::new();
            for (i, j, o) in g.bonds() {
                orders.insert((i, j), o as i32);
            }
            for &(i, j) in broken {
                *orders.entry((i, j)).or_insert(0) -= 1;
            }
            for &(i, j) in formed {
                *orders.entry((i, j)).or_insert(0) += 1;
            }
            if orders.values().any(|&o| !(0..=3).contains(&o)) {
                return;
            }
            let bonds: Vec<(usize, usize, u8)> = orders
                .into_iter()
                .filter(|&(_, o)| o > 0)
                .map(|((i, j), o)| (i, j, o as u8))
                .collect();
            let Ok(product) = MolGraph::build(g.elements().to_vec(), &bonds) else {
                return;
            };
            let key = product.canonical_key();
            if key != self_key {
                keys.insert(key);
            }
        };

        // size 1
        if n_max >= 1 {
            for b in &bond_units {
                for f in &all_pairs {
                    try_move(&[*b], &[*f]);
                }
            }
        }
        // size 2 (multisets on both sides)
        if n_max >= 2 {
            for (bi, b1) in bond_units.iter().enumerate() {
                for b2 in bond_units.iter().skip(bi) {
                    for (fi, f1) in all_pairs.iter().enumerate() {
                        for f2 in all_pairs.iter().skip(fi) {
                            try_move(&[*b1, *b2], &[*f1, *f2]);
                        }
                    }
                }
            }
        }
        keys
    }

    let hcn = MolGraph::build(vec![Element::H, Element::C, Element::N], &[(0, 1, 1), (1, 2, 3)])
        .unwrap();
    let formaldehyde = MolGraph::build(
        vec![Element::C, Element::O, Element::H, Element::H],
        &[(0, 1, 2), (0, 2, 1), (0, 3, 1)],
    )
    .unwrap();
    let corpus = [
        ("CH4", fixtures::ch4()),
        ("H2O", fixtures::h2o()),
        ("NH3", fixtures::nh3()),
        ("C2H4", fixtures::ethylene()),
        ("H2+C2H4", fixtures::h2_c2h4()),
        ("HCN", hcn),
        ("CH2O", formaldehyde),
        ("C2H6", fixtures::ethane()),
    ];
    for (name, g) in &corpus {
        for n_max in 1..=2 {
            let cfg = EnumConfig {
                n_max,
                ..EnumConfig::default()
            };
            let got: BTreeSet<String> = enumerate_moves(g, &cfg).into_iter().map(|c| c.key).collect();
            let want = oracle_keys(g, n_max);
            assert_eq!(got, want, "{name} n_max={n_max}");
        }
    }

    // conditional pruning removes only all-single-bond-breaking moves
    let two_methane = MolGraph::build(
        vec![
            Element::C, Element::H, Element::H, Element::H, Element::H,
            Element::C, Element::H, Element::H, Element::H, Element::H,
        ],
        &[
            (0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1),
            (5, 6, 1), (5, 7, 1), (5, 8, 1), (5, 9, 1),
        ],
    )
    .unwrap();
    for g in [&fixtures::h2_c2h4(), &two_methane] {
        let run = |conditional| {
            let cfg = EnumConfig {
                n_max: 4,
                conditional,
                ..EnumConfig::default()
            };
            enumerate_moves(g, &cfg)
                .into_iter()
                .map(|c| (c.key, c.mv))
                .collect::<std::collections::BTreeMap<_, _>>()
        };
        let with = run(true);
        let without = run(false);
        for key in with.keys() {
            assert!(without.contains_key(key), "pruning added a product");
        }
        for (key, mv) in &without {
            if !with.contains_key(key) {
                assert!(
                    mv.broken.iter().all(|&(i, j)| g.order(i, j) == 1),
                    "pruned move breaks a multiple bond: {mv:?}"
                );
            }
        }
    }
    pass(3, "enumeration equals brute-force oracle on 8 fixtures; pruning removes only single-bond edits");
}

/// Criterion 4: The documented intractability bound reproduces 2^(N(N-1)/2).
#[test]
fn acceptance_04_unconstrained_space_arithmetic() {
    use mechsearch::enumerate::{unconstrained_space_log2, unconstrained_space_size};
    assert_eq!(unconstrained_space_size(4), Some(64));
    assert_eq!(unconstrained_space_size(10), Some(1u128 << 45));
    assert_eq!(unconstrained_space_log2(10), 45);
    assert_eq!(unconstrained_space_log2(52), 1326);
    assert_eq!(unconstrained_space_size(52), None);
    pass(4, "unconstrained space bound: N=4 -> 64, N=10 -> 2^45");
}

/// Criterion 5: Funnel property: per-stage survivor counts are monotone
/// non-increasing and the audit identity (rejected + survivors ==
/// enumerated) holds exactly, on the hydrogenation fixture and on 20
/// randomized small fixtures.
#[test]
fn acceptance_05_funnel_property() {
    use mechsearch::pipeline::{
        evaluate_step, prepare_species, BondIncrementEstimator, CascadeParams,
    };

    let calc = MorseSurrogate::default();
    let check = |g: &MolGraph, params: &CascadeParams, seed: u64, label: &str| {
        let key = g.canonical_key();
        let species = prepare_species(g, &calc, seed, params)
            .unwrap_or_else(|e| panic!("{label}: reactant prep failed: {e}"));
        let eval = evaluate_step(g, &key, &species, &calc, &BondIncrementEstimator, params, seed)
            .unwrap();
        assert!(
            eval.audit.counts.monotone(),
            "{label}: counts not monotone: {:?}",
            eval.audit.counts
        );
        assert!(eval.audit.identity_holds(), "{label}: audit identity broken");
    };

    check(&fixtures::h2_c2h4(), &fixtures::fixture_params(), 42, "hydrogenation");

    // randomized small fixtures: random pairs of small species with
    // randomized thresholds
    let pool: Vec<MolGraph> = vec![
        fixtures::h2(),
        fixtures::ch4(),
        fixtures::h2o(),
        fixtures::nh3(),
        fixtures::ethylene(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for trial in 0..20 {
        let a = &pool[rng.random_range(0..pool.len())];
        let b = &pool[rng.random_range(0..pool.len())];
        let system = combine(a, b);
        let mut params = fixtures::fixture_params();
        params.thresholds.e_fast = rng.random_range(10.0..80.0);
        params.thresholds.e_rxn = rng.random_range(5.0..40.0);
        params.thresholds.e_barrier = rng.random_range(20.0..120.0);
        params.thresholds.top_k = rng.random_range(1..5);
        // keep the kinetic stage affordable on the random systems
        params.pairs.n_trials = 3;
        params.pairs.n_pairs = 1;
        params.path.neb.max_iter = 400;
        params.enumeration.max_products = Some(12);
        check(&system, &params, 1000 + trial, &format!("random fixture {trial}"));
    }
    pass(5, "funnel monotone and audit identity exact on hydrogenation fixture plus 20 randomized fixtures");
}

/// Concatenate two graphs into one multi-component system.
fn combine(a: &MolGraph, b: &MolGraph) -> MolGraph {
    let mut elements = a.elements().to_vec();
    elements.extend_from_slice(b.elements());
    let offset = a.natoms();
    let mut bonds = a.bonds();
    bonds.extend(b.bonds().into_iter().map(|(i, j, o)| (i + offset, j + offset, o)));
    MolGraph::build(elements, &bonds).unwrap()
}

/// Criterion 6: A fresh configuration resolves to the documented threshold defaults,
/// and loosening any single threshold never shrinks the surviving set.
#[test]
fn acceptance_06_threshold_defaults_and_monotonicity() {
    use mechsearch::pipeline::{
        barrier_accepts, fast_energy_accepts, rxn_energy_accepts, Thresholds,
    };

    let cfg = mechsearch::config::RunConfig::parse("input = \"m.mol\"\noutput_dir = \"o\"\n")
        .unwrap();
    let t = cfg.cascade.thresholds;
    assert_eq!(
        (t.e_fast, t.e_rxn, t.e_barrier, t.top_k, t.explore_barrier),
        (60.0, 30.0, 60.0, 100, 30.0)
    );

    // synthetic candidates: (delta_e_fast, delta_e_rxn, barrier)
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let candidates: Vec<(f64, f64, f64)> = (0..400)
        .map(|_| {
            (
                rng.random_range(-40.0..120.0),
                rng.random_range(-60.0..80.0),
                rng.random_range(0.0..140.0),
            )
        })
        .collect();

    // survivors before the top-k cap (set semantics) and after it
    let screened = |t: &Thresholds| -> Vec<usize> {
        candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                fast_energy_accepts(c.0, t) && rxn_energy_accepts(c.1, t) && barrier_accepts(c.2, t)
            })
            .map(|(i, _)| i)
            .collect()
    };
    let selected = |t: &Thresholds| -> Vec<usize> {
        let mut pass: Vec<(usize, f64)> = screened(t)
            .into_iter()
            .map(|i| (i, candidates[i].2))
            .collect();
        pass.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        pass.truncate(t.top_k);
        pass.into_iter().map(|(i, _)| i).collect()
    };

    for trial in 0..200 {
        let base = Thresholds {
            e_fast: rng.random_range(0.0..100.0),
            e_rxn: rng.random_range(0.0..60.0),
            e_barrier: rng.random_range(0.0..120.0),
            top_k: rng.random_range(1..400),
            explore_barrier: 30.0,
        };
        let screened_before = screened(&base);
        let selected_before = selected(&base);
        for loosened in [
            Thresholds { e_fast: base.e_fast + rng.random_range(0.0..50.0), ..base },
            Thresholds { e_rxn: base.e_rxn + rng.random_range(0.0..50.0), ..base },
            Thresholds { e_barrier: base.e_barrier + rng.random_range(0.0..50.0), ..base },
            Thresholds { top_k: base.top_k + rng.random_range(1..100), ..base },
        ] {
            // the threshold-screened set only grows
            let screened_after = screened(&loosened);
            assert!(
                screened_before.iter().all(|i| screened_after.contains(i)),
                "trial {trial}: loosening shrank the screened set"
            );
            // and the top-k selection never gets smaller
            assert!(
                selected(&loosened).len() >= selected_before.len(),
                "trial {trial}: loosening shrank the selection count"
            );
        }
        // loosening only the cap preserves membership outright
        let wider = Thresholds { top_k: base.top_k + 50, ..base };
        let wide_sel = selected(&wider);
        assert!(selected_before.iter().all(|i| wide_sel.contains(i)));
    }
    pass(6, "defaults are 60/30/60/100/30; loosening any threshold never shrinks survivors (200 random trials)");
}

/// Criterion 7: Incremental exploration reproduces exhaustive min-max path
/// enumeration on 50 random synthetic networks, and the termination
/// threshold is honored.
#[test]
fn acceptance_07_network_search_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for trial in 0..50 {
        let n_nodes = rng.random_range(3..=10usize);
        let names: Vec<String> = (0..n_nodes)
            .map(|i| if i == 0 { "root".into() } else { format!("N{i}") })
            .collect();
        let mut edges: Vec<(String, String, f64)> = Vec::new();
        // a spanning arc list keeps most of the graph reachable
        for i in 1..n_nodes {
            let from = rng.random_range(0..i);
            edges.push((
                names[from].clone(),
                names[i].clone(),
                rng.random_range(0.0..60.0),
            ));
        }
        for _ in 0..rng.random_range(0..=8) {
            let a = rng.random_range(0..n_nodes);
            let b = rng.random_range(0..n_nodes);
            if a != b {
                edges.push((
                    names[a].clone(),
                    names[b].clone(),
                    rng.random_range(0.0..60.0),
                ));
            }
        }

        let net = common::synthetic_network("root", &edges);
        let eff = net.effective_barriers();
        for name in &names {
            if name == "root" {
                assert_eq!(eff.get(name), Some(&f64::NEG_INFINITY));
                continue;
            }
            let oracle = common::bottleneck_oracle(&edges, "root", name);
            match (eff.get(name), oracle) {
                (Some(&got), Some(want)) => {
                    assert_eq!(got, want, "trial {trial}, node {name}");
                }
                (None, None) => {}
                (got, want) => panic!("trial {trial}, node {name}: {got:?} vs {want:?}"),
            }
        }
    }

    // termination: under default thresholds no explored node exceeds 30
    use mechsearch::network::{explore_resumed, Budget, ExploreConfig};
    struct NoOp;
    impl mechsearch::network::StepEvaluator for NoOp {
        fn prepare_root(
            &self,
            _: &MolGraph,
            _: &str,
        ) -> Result<mechsearch::pipeline::Species, mechsearch::pipeline::PipelineError> {
            Ok(mechsearch::pipeline::Species {
                geometry: Geometry::new(vec![Element::H], vec![[0.0; 3]]),
                energy: 0.0,
            })
        }
        fn evaluate(
            &self,
            key: &str,
            graph: &MolGraph,
            species: &mechsearch::pipeline::Species,
        ) -> Result<mechsearch::pipeline::StepEvaluation, mechsearch::pipeline::PipelineError>
        {
            let _ = (graph, species);
            Ok(mechsearch::pipeline::StepEvaluation {
                reactant_key: key.into(),
                reactant: mechsearch::pipeline::Species {
                    geometry: Geometry::new(vec![Element::H], vec![[0.0; 3]]),
                    energy: 0.0,
                },
                candidates: vec![],
                selected: vec![],
                audit: mechsearch::pipeline::StageAudit {
                    counts: mechsearch::pipeline::StageCounts {
                        enumerated: 0,
                        stable: 0,
                        fast_energy: 0,
                        rxn_energy: 0,
                        kinetic: 0,
                        selected: 0,
                    },
                    wall_seconds: [0.0; 4],
                    rejected_per_stage: vec![],
                },
            })
        }
    }
    let default_barrier = mechsearch::pipeline::Thresholds::default().explore_barrier;
    for trial in 0..10 {
        let mut edges = Vec::new();
        for i in 1..8 {
            edges.push((
                if i == 1 { "root".to_string() } else { format!("N{}", i - 1) },
                format!("N{i}"),
                rng.random_range(0.0..60.0),
            ));
        }
        let net = common::synthetic_network("root", &edges);
        let outcome = explore_resumed(
            net,
            &NoOp,
            ExploreConfig {
                explore_barrier: default_barrier,
                budget: Budget::default(),
            },
        )
        .unwrap();
        for (key, eff) in &outcome.pop_trace {
            assert!(
                *eff <= default_barrier,
                "trial {trial}: explored {key} at eff {eff} > {default_barrier}"
            );
        }
        // pop order is monotone non-decreasing
        for w in outcome.pop_trace.windows(2) {
            assert!(w[0].1 <= w[1].1);
        }
    }
    pass(7, "effective barriers equal exhaustive min-max oracle on 50 random networks; 30 kcal/mol termination honored");
}

/// Criterion 8: The end-to-end exploration fixture completes with exit 0, contains
/// the verified hydrogenation edge and reruns byte-identically.
#[test]
fn acceptance_08_end_to_end_fixture() {
    use std::process::Command;
    const MOL: &str = "atoms H H C C H H H H\nbond 0 1 1\nbond 2 3 2\nbond 2 4 1\nbond 2 5 1\nbond 3 6 1\nbond 3 7 1\n";
    const CONFIG: &str = r#"
input = "h2_c2h4.mol"
seed = 42
workers = 2
output_dir = "run-out"

[thresholds]
e_barrier = 120.0
explore_barrier = 60.0

[enumeration]
n_max = 2

[pairs.embed]
component_gap = 1.2

[budget]
max_nodes = 8
max_wall_seconds = 240.0
"#;

    let run = |dir: &std::path::Path| {
        std::fs::write(dir.join("h2_c2h4.mol"), MOL).unwrap();
        let cfg = dir.join("explore.toml");
        std::fs::write(&cfg, CONFIG).unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_mechsearch"))
            .arg("explore")
            .arg(&cfg)
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    run(dir1.path());
    run(dir2.path());

    let doc = std::fs::read_to_string(dir1.path().join("run-out/network.json")).unwrap();
    let net = mechsearch::network::import_structured(&doc).unwrap();
    let ethane_key = fixtures::ethane_on_fixture_indices().canonical_key();
    assert!(net.nodes.contains_key(&ethane_key), "ethane node missing");
    let edge = net
        .edges
        .iter()
        .find(|e| e.from_key == net.root_key && e.to_key == ethane_key)
        .expect("hydrogenation edge missing");
    let path = &net.paths[edge.path_id];
    assert!(path.verified, "edge path not verified");
    assert!(path.ts_refined.converged);

    for f in ["network.json", "network.dot"] {
        let a = std::fs::read(dir1.path().join("run-out").join(f)).unwrap();
        let b = std::fs::read(dir2.path().join("run-out").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
    pass(8, "end-to-end fixture: exit 0, verified hydrogenation edge, byte-identical rerun");
}

/// Criterion 9: Transition states within 0.5 Å RMSD collapse to the lowest-energy
/// representative, and Kabsch RMSD passes its identity, rotation-invariance
/// and symmetry suites.
#[test]
fn acceptance_09_dedup_and_kabsch() {
    use mechsearch::path::dedup_transition_states;
    use nalgebra::{Rotation3, Vector3};

    // dedup contract on synthetic path results
    let base = Geometry::new(
        vec![Element::C, Element::O, Element::H],
        vec![[0.0, 0.0, 0.0], [1.2, 0.0, 0.0], [-0.6, 0.9, 0.2]],
    );
    let near = {
        let mut g = base.clone();
        g.coords[2][1] += 0.2; // ~0.12 Å rmsd from base
        g
    };
    let far = {
        let mut g = base.clone();
        g.coords[2][1] += 2.5;
        g
    };
    let mk = |g: &Geometry, e: f64| {
        let mut p = common::fake_path_result();
        p.ts_refined.geometry = g.clone();
        p.ts_refined.energy = e;
        p
    };
    let out = dedup_transition_states(vec![mk(&near, 8.0), mk(&far, 9.0), mk(&base, 5.0)]);
    assert_eq!(out.len(), 2);
    assert_eq!(out[0].ts_refined.energy, 5.0, "lowest representative kept");
    assert_eq!(out[1].ts_refined.energy, 9.0);

    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for _ in 0..50 {
        let n = rng.random_range(3..=7);
        let elements = vec![Element::C; n];
        let coords: Vec<[f64; 3]> = (0..n)
            .map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0)))
            .collect();
        let g = Geometry::new(elements.clone(), coords);

        // identity
        assert!(kabsch_rmsd(&g, &g) < 1e-12);

        // rigid motion removed
        let rot = Rotation3::from_euler_angles(
            rng.random_range(-3.0..3.0),
            rng.random_range(-1.5..1.5),
            rng.random_range(-3.0..3.0),
        );
        let shift = Vector3::new(
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
        );
        let moved = Geometry::new(
            elements.clone(),
            g.coords
                .iter()
                .map(|c| {
                    let p = rot * Vector3::from(*c) + shift;
                    [p.x, p.y, p.z]
                })
                .collect(),
        );
        assert!(kabsch_rmsd(&g, &moved) < 1e-8);

        // symmetry and invariance under rigid motion of one argument
        let mut h = g.clone();
        for c in &mut h.coords {
            c[0] += rng.random_range(-0.3..0.3);
            c[1] += rng.random_range(-0.3..0.3);
        }
        assert!((kabsch_rmsd(&g, &h) - kabsch_rmsd(&h, &g)).abs() < 1e-10);
        let h_moved = Geometry::new(
            elements.clone(),
            h.coords
                .iter()
                .map(|c| {
                    let p = rot * Vector3::from(*c) + shift;
                    [p.x, p.y, p.z]
                })
                .collect(),
        );
        assert!((kabsch_rmsd(&g, &h) - kabsch_rmsd(&g, &h_moved)).abs() < 1e-8);
    }

    // rotation-grid oracle agreement on a displaced 3-atom case
    let a = Geometry::new(
        vec![Element::C, Element::O, Element::H],
        vec![[0.0, 0.0, 0.0], [1.4, 0.0, 0.0], [0.0, 1.1, 0.0]],
    );
    let mut b = a.clone();
    b.coords[2][0] += 0.3;
    let direct = kabsch_rmsd(&a, &b);
    let oracle = common::grid_rmsd_oracle(&a, &b);
    assert!(
        (direct - oracle).abs() < 1e-3,
        "kabsch {direct} vs grid oracle {oracle}"
    );
    pass(9, "0.5 Å dedup keeps lowest-energy representative; Kabsch passes identity/invariance/symmetry and grid oracle");
}

/// Criterion 10: Stereoisomer counts equal 2^sites minus key collisions on the
/// fixture corpus, double-checked by brute-force isomorphism, and
/// embeddings of differing stereoisomers realize opposite configurations.
#[test]
fn acceptance_10_stereo_machinery() {
    use mechsearch::enumerate::enumerate_stereoisomers;
    use mechsearch::molgraph::{find_stereo_sites, measure_parity, StereoSite};

    for (name, g, expected) in [
        ("2-butene", fixtures::butene2(), 2usize),
        ("CH4", fixtures::ch4(), 1),
        ("chiral center", fixtures::chiral_center(), 2),
        ("dihydroxybutanedial", fixtures::dihydroxybutanedial(), 3),
    ] {
        let sites = find_stereo_sites(&g);
        let isos = enumerate_stereoisomers(&g);
        assert_eq!(isos.len(), expected, "{name}");
        assert!(isos.len() <= 1 << sites.len(), "{name}: count exceeds 2^sites");
        // collision count certified by brute-force isomorphism
        for (i, a) in isos.iter().enumerate() {
            for b in isos.iter().skip(i + 1) {
                assert!(!common::isomorphic(a, b), "{name}: duplicate stereoisomers");
            }
        }
    }

    // opposite dihedral classes for the double-bond pair
    let isos = enumerate_stereoisomers(&fixtures::butene2());
    let phis: Vec<f64> = isos
        .iter()
        .map(|g| embed(g, 7).unwrap().dihedral(0, 1, 2, 3).to_degrees().abs())
        .collect();
    assert!(
        (phis[0] < 30.0) != (phis[1] < 30.0),
        "expected one cis and one trans realization: {phis:?}"
    );

    // opposite signed volumes for the tetrahedral pair
    let isos = enumerate_stereoisomers(&fixtures::chiral_center());
    let site = StereoSite::Tetrahedral { center: 0 };
    let parities: Vec<_> = isos
        .iter()
        .map(|g| measure_parity(g, &embed(g, 9).unwrap(), &site))
        .collect();
    assert_ne!(parities[0], parities[1]);
    pass(10, "stereo counts match 2^sites minus collisions; embeddings realize opposite parities");
}

//! Shared test oracles, independent of the optimizer implementations they
//! check.

#![allow(dead_code)]

use mechsearch::pes::muller_brown;
use std::sync::OnceLock;

pub const MB_X: (f64, f64) = (-1.8, 1.2);
pub const MB_Y: (f64, f64) = (-0.5, 2.3);
pub const MB_GRID: usize = 2001;

#[derive(Debug, Clone)]
pub struct MbOracle {
    /// Refined minima, sorted by x.
    pub minima: Vec<[f64; 2]>,
    /// Refined first-order saddles, sorted by x.
    pub saddles: Vec<[f64; 2]>,
}

static ORACLE: OnceLock<MbOracle> = OnceLock::new();

/// Grid-scan oracle for the Müller-Brown surface: locate stationary points
/// on a 2001x2001 grid, refine each candidate with damped Newton on the
/// analytic gradient, and classify by the 2x2 finite-difference Hessian.
pub fn mb_oracle() -> &'static MbOracle {
    ORACLE.get_or_init(|| {
        let nx = MB_GRID;
        let ny = MB_GRID;
        let dx = (MB_X.1 - MB_X.0) / (nx - 1) as f64;
        let dy = (MB_Y.1 - MB_Y.0) / (ny - 1) as f64;

        // energy and gradient-norm fields
        let mut energy = vec![0.0_f64; nx * ny];
        let mut gnorm = vec![0.0_f64; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let x = MB_X.0 + ix as f64 * dx;
                let y = MB_Y.0 + iy as f64 * dy;
                let (e, g) = muller_brown(x, y);
                energy[iy * nx + ix] = e;
                gnorm[iy * nx + ix] = (g[0] * g[0] + g[1] * g[1]).sqrt();
            }
        }

        let neighbors = |ix: usize, iy: usize| {
            let mut v = Vec::with_capacity(8);
            for sy in -1i64..=1 {
                for sx in -1i64..=1 {
                    if sx == 0 && sy == 0 {
                        continue;
                    }
                    let jx = ix as i64 + sx;
                    let jy = iy as i64 + sy;
                    if jx >= 0 && jy >= 0 && (jx as usize) < nx && (jy as usize) < ny {
                        v.push((jy as usize) * nx + jx as usize);
                    }
                }
            }
            v
        };

        let mut candidates: Vec<[f64; 2]> = Vec::new();
        for iy in 1..ny - 1 {
            for ix in 1..nx - 1 {
                let idx = iy * nx + ix;
                // stationary points show up as local minima of |grad|
                let is_gnorm_min = neighbors(ix, iy).iter().all(|&j| gnorm[idx] <= gnorm[j]);
                if is_gnorm_min && gnorm[idx] < 5.0 {
                    candidates.push([MB_X.0 + ix as f64 * dx, MB_Y.0 + iy as f64 * dy]);
                }
            }
        }

        let mut minima: Vec<[f64; 2]> = Vec::new();
        let mut saddles: Vec<[f64; 2]> = Vec::new();
        for cand in candidates {
            if let Some(p) = newton_refine(cand) {
                if p[0] < MB_X.0 || p[0] > MB_X.1 || p[1] < MB_Y.0 || p[1] > MB_Y.1 {
                    continue;
                }
                let (lo, hi) = hessian_eigs(p);
                let list = if lo > 1e-8 && hi > 1e-8 {
                    &mut minima
                } else if lo < -1e-8 && hi > 1e-8 {
                    &mut saddles
                } else {
                    continue;
                };
                if !list.iter().any(|q| dist2(*q, p) < 1e-8) {
                    list.push(p);
                }
            }
        }
        minima.sort_by(|a, b| a[0].total_cmp(&b[0]));
        saddles.sort_by(|a, b| a[0].total_cmp(&b[0]));
        MbOracle { minima, saddles }
    })
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Damped Newton iteration on the analytic gradient; converges to the
/// nearest stationary point of any index.
fn newton_refine(start: [f64; 2]) -> Option<[f64; 2]> {
    let mut p = start;
    for _ in 0..200 {
        let (_, g) = muller_brown(p[0], p[1]);
        if (g[0] * g[0] + g[1] * g[1]).sqrt() < 1e-11 {
            return Some(p);
        }
        let h = fd_hessian(p);
        let det = h[0] * h[3] - h[1] * h[2];
        if det.abs() < 1e-14 {
            return None;
        }
        let mut step = [
            -(h[3] * g[0] - h[1] * g[1]) / det,
            -(-h[2] * g[0] + h[0] * g[1]) / det,
        ];
        let n = (step[0] * step[0] + step[1] * step[1]).sqrt();
        if n > 0.05 {
            step[0] *= 0.05 / n;
            step[1] *= 0.05 / n;
        }
        p[0] += step[0];
        p[1] += step[1];
    }
    None
}

/// 2x2 Hessian by central differences of the analytic gradient.
fn fd_hessian(p: [f64; 2]) -> [f64; 4] {
    let h = 1e-6;
    let gxp = muller_brown(p[0] + h, p[1]).1;
    let gxm = muller_brown(p[0] - h, p[1]).1;
    let gyp = muller_brown(p[0], p[1] + h).1;
    let gym = muller_brown(p[0], p[1] - h).1;
    [
        (gxp[0] - gxm[0]) / (2.0 * h),
        (gyp[0] - gym[0]) / (2.0 * h),
        (gxp[1] - gxm[1]) / (2.0 * h),
        (gyp[1] - gym[1]) / (2.0 * h),
    ]
}

/// Eigenvalues of the 2x2 Hessian at a point, ascending.
pub fn hessian_eigs(p: [f64; 2]) -> (f64, f64) {
    let h = fd_hessian(p);
    let tr = h[0] + h[3];
    let det = h[0] * h[3] - h[1] * h[2];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 - disc, tr / 2.0 + disc)
}

/// Which oracle minimum a steepest-descent walk on the fine grid reaches
/// from a starting point.
pub fn mb_grid_descent_basin(start: [f64; 2]) -> [f64; 2] {
    let oracle = mb_oracle();
    let step = 2.0e-3;
    let mut p = start;
    for _ in 0..200_000 {
        let (_, g) = muller_brown(p[0], p[1]);
        let n = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if n < 1e-6 {
            break;
        }
        p[0] -= step * g[0] / n.max(1.0);
        p[1] -= step * g[1] / n.max(1.0);
    }
    *oracle
        .minima
        .iter()
        .min_by(|a, b| dist2(**a, p).total_cmp(&dist2(**b, p)))
        .expect("oracle has minima")
}

/// The saddle connecting two given minima: displace along the saddle's
/// negative-curvature eigenvector in both senses and check that grid
/// descent reaches exactly those basins.
pub fn mb_saddle_between(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let oracle = mb_oracle();
    for s in &oracle.saddles {
        let h = fd_hessian(*s);
        let (lo, _) = hessian_eigs(*s);
        // eigenvector for the negative eigenvalue of [[h0,h1],[h2,h3]]
        let v = if h[1].abs() > 1e-12 {
            [h[1], lo - h[0]]
        } else {
            [lo - h[3], h[2]]
        };
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt().max(1e-300);
        let d = 0.02;
        let p1 = mb_grid_descent_basin([s[0] + d * v[0] / n, s[1] + d * v[1] / n]);
        let p2 = mb_grid_descent_basin([s[0] - d * v[0] / n, s[1] - d * v[1] / n]);
        let hits = |p: [f64; 2], q: [f64; 2]| dist2(p, q) < 1e-6;
        if (hits(p1, a) && hits(p2, b)) || (hits(p1, b) && hits(p2, a)) {
            return *s;
        }
    }
    panic!("no saddle connects {a:?} and {b:?}");
}

/// The saddle between the two upper-basin minima (the two with the larger
/// y coordinates).
pub fn mb_upper_saddle() -> [f64; 2] {
    let oracle = mb_oracle();
    let mut by_y = oracle.minima.clone();
    by_y.sort_by(|a, b| b[1].total_cmp(&a[1]));
    mb_saddle_between(by_y[0], by_y[1])
}

/// Brute-force graph isomorphism including stereo: search all element- and
/// degree-consistent atom mappings. Independent of canonical keys.
pub fn isomorphic(a: &mechsearch::MolGraph, b: &mechsearch::MolGraph) -> bool {
    let n = a.natoms();
    if n != b.natoms() {
        return false;
    }
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    search_mapping(a, b, 0, &mut perm, &mut used)
}

fn search_mapping(
    a: &mechsearch::MolGraph,
    b: &mechsearch::MolGraph,
    i: usize,
    perm: &mut [usize],
    used: &mut [bool],
) -> bool {
    let n = a.natoms();
    if i == n {
        return a.relabeled(perm) == *b;
    }
    for cand in 0..n {
        if used[cand]
            || a.element(i) != b.element(cand)
            || a.neighbors(i).len() != b.neighbors(cand).len()
        {
            continue;
        }
        // bond consistency with already-mapped atoms
        let ok = (0..i).all(|j| a.order(i, j) == b.order(cand, perm[j]));
        if !ok {
            continue;
        }
        perm[i] = cand;
        used[cand] = true;
        if search_mapping(a, b, i + 1, perm, used) {
            return true;
        }
        used[cand] = false;
        perm[i] = usize::MAX;
    }
    false
}

/// Molecule fixtures shared across integration tests.
pub mod fixtures {
    use mechsearch::elements::Element::*;
    use mechsearch::molgraph::MolGraph;
    use mechsearch::pipeline::CascadeParams;

    pub fn ch4() -> MolGraph {
        MolGraph::build(
            vec![C, H, H, H, H],
            &[(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1)],
        )
        .unwrap()
    }

    pub fn h2() -> MolGraph {
        MolGraph::build(vec![H, H], &[(0, 1, 1)]).unwrap()
    }

    pub fn h2o() -> MolGraph {
        MolGraph::build(vec![O, H, H], &[(0, 1, 1), (0, 2, 1)]).unwrap()
    }

    pub fn nh3() -> MolGraph {
        MolGraph::build(vec![N, H, H, H], &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]).unwrap()
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

    /// H2 and ethylene as one two-component reactant system.
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

    /// Ethane on the same atom indices as [`h2_c2h4`].
    pub fn ethane_on_fixture_indices() -> MolGraph {
        MolGraph::build(
            vec![H, H, C, C, H, H, H, H],
            &[
                (2, 3, 1),
                (0, 2, 1),
                (1, 3, 1),
                (2, 4, 1),
                (2, 5, 1),
                (3, 6, 1),
                (3, 7, 1),
            ],
        )
        .unwrap()
    }

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

    pub fn dihydroxybutanedial() -> MolGraph {
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

    /// C(H)(CH3)(OH)(NH2): one tetrahedral stereocenter at atom 0.
    pub fn chiral_center() -> MolGraph {
        MolGraph::build(
            vec![C, H, C, H, H, H, O, H, N, H, H],
            &[
                (0, 1, 1),
                (0, 2, 1),
                (2, 3, 1),
                (2, 4, 1),
                (2, 5, 1),
                (0, 6, 1),
                (6, 7, 1),
                (0, 8, 1),
                (8, 9, 1),
                (8, 10, 1),
            ],
        )
        .unwrap()
    }

    /// Strained O4 ring; rearranges under surrogate relaxation.
    pub fn cyclotetraoxygen() -> MolGraph {
        MolGraph::build(
            vec![O, O, O, O],
            &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)],
        )
        .unwrap()
    }

    /// Five mutually bonded carbons: a valence-valid graph whose distance
    /// constraints are contradictory in three dimensions.
    pub fn k5_carbon_cage() -> MolGraph {
        let mut bonds = Vec::new();
        for i in 0..5usize {
            for j in (i + 1)..5 {
                bonds.push((i, j, 1u8));
            }
        }
        MolGraph::build(vec![C; 5], &bonds).unwrap()
    }

    /// Cascade settings used by the hydrogenation fixture: small
    /// enumeration, a barrier ceiling that admits the surrogate's stiff
    /// four-center saddle, close component packing.
    pub fn fixture_params() -> CascadeParams {
        let mut params = CascadeParams::default();
        params.enumeration.n_max = 2;
        params.thresholds.e_barrier = 120.0;
        params.thresholds.explore_barrier = 120.0;
        params.pairs.embed.component_gap = 1.2;
        params
    }
}

/// Hierarchical rotation-grid oracle for minimal RMSD: coarse Euler-angle
/// scan refined around the best cell down to sub-0.5-degree resolution,
/// with centroids matched at every trial. Independent of the SVD route.
pub fn grid_rmsd_oracle(moving: &mechsearch::Geometry, target: &mechsearch::Geometry) -> f64 {
    use nalgebra::{Rotation3, Vector3};
    let n = moving.natoms() as f64;
    let cm = Vector3::from(moving.centroid());
    let ct = Vector3::from(target.centroid());
    let centered_moving: Vec<Vector3<f64>> = moving
        .coords
        .iter()
        .map(|c| Vector3::from(*c) - cm)
        .collect();
    let centered_target: Vec<Vector3<f64>> = target
        .coords
        .iter()
        .map(|c| Vector3::from(*c) - ct)
        .collect();

    let rmsd_for = |angles: [f64; 3]| {
        let r = Rotation3::from_euler_angles(angles[0], angles[1], angles[2]);
        let ss: f64 = centered_moving
            .iter()
            .zip(&centered_target)
            .map(|(p, q)| (r * p - q).norm_squared())
            .sum();
        (ss / n).sqrt()
    };

    let mut best = (f64::INFINITY, [0.0; 3]);
    let two_pi = std::f64::consts::TAU;
    // coarse: 15-degree cells
    let step0 = two_pi / 24.0;
    for i in 0..24 {
        for j in 0..12 {
            for k in 0..24 {
                let angles = [i as f64 * step0, j as f64 * step0, k as f64 * step0];
                let v = rmsd_for(angles);
                if v < best.0 {
                    best = (v, angles);
                }
            }
        }
    }
    // two refinement rounds around the best cell
    let mut step = step0;
    for _ in 0..3 {
        let center = best.1;
        let fine = step / 5.0;
        for i in -5i32..=5 {
            for j in -5i32..=5 {
                for k in -5i32..=5 {
                    let angles = [
                        center[0] + i as f64 * fine,
                        center[1] + j as f64 * fine,
                        center[2] + k as f64 * fine,
                    ];
                    let v = rmsd_for(angles);
                    if v < best.0 {
                        best = (v, angles);
                    }
                }
            }
        }
        step = fine;
    }
    best.0
}

/// Build a synthetic reaction network directly from (from, to, ts_rel)
/// triples; nodes carry placeholder graphs and zero energies.
pub fn synthetic_network(
    root: &str,
    edges: &[(String, String, f64)],
) -> mechsearch::network::ReactionNetwork {
    use mechsearch::network::{NetworkEdge, ReactionNetwork};
    let g = fixtures::ch4();
    let mut net = ReactionNetwork::new(root.to_string(), g.clone(), 0.0);
    for (a, b, _) in edges {
        net.upsert_node(a.clone(), g.clone(), 0.0);
        net.upsert_node(b.clone(), g.clone(), 0.0);
    }
    for (a, b, ts) in edges {
        net.paths.push(fake_path_result());
        let path_id = net.paths.len() - 1;
        net.edges.push(NetworkEdge {
            from_key: a.clone(),
            to_key: b.clone(),
            ts_energy_rel: *ts,
            mv: mechsearch::enumerate::Move::new(vec![], vec![]),
            path_id,
        });
    }
    net
}

pub fn fake_path_result() -> mechsearch::path::PathResult {
    use mechsearch::geom::Geometry;
    let g = Geometry::new(vec![mechsearch::Element::H], vec![[0.0; 3]]);
    mechsearch::path::PathResult {
        ts_guess: g.clone(),
        ts_refined: mechsearch::optimize::OptResult {
            geometry: g.clone(),
            energy: 0.0,
            n_steps: 0,
            converged: true,
            max_grad_component: 0.0,
            rms_grad: 0.0,
        },
        barrier_fwd: 0.0,
        barrier_rev: 0.0,
        irc_forward_key: "a".into(),
        irc_backward_key: "b".into(),
        verified: true,
        band: mechsearch::path::Band {
            images: vec![g.clone(), g.clone(), g],
            energies: vec![0.0; 3],
            spring_k: 1.0,
            climbing_index: None,
        },
    }
}

/// Exhaustive min-max simple-path oracle on an edge list.
pub fn bottleneck_oracle(
    edges: &[(String, String, f64)],
    root: &str,
    target: &str,
) -> Option<f64> {
    fn rec(
        edges: &[(String, String, f64)],
        at: &str,
        target: &str,
        seen: &mut Vec<String>,
        cur_max: f64,
        best: &mut f64,
    ) {
        if at == target {
            *best = best.min(cur_max);
            return;
        }
        for (a, b, ts) in edges {
            if a == at && !seen.contains(b) {
                seen.push(b.clone());
                rec(edges, b, target, seen, cur_max.max(*ts), best);
                seen.pop();
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(edges, root, target, &mut vec![], f64::NEG_INFINITY, &mut best);
    best.is_finite().then_some(best)
}

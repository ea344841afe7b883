//! Deterministic 3-D embedding of molecular graphs.
//!
//! Coordinates start from seeded random positions and are relaxed under a
//! constraint objective parameterized by the target graph: harmonic bond
//! length targets (covalent radii scaled by order), 1-3 distance targets
//! from idealized angles (which force sp2 centers planar), soft excluded
//! volume between distant pairs, distance-encoded cis/trans targets and
//! signed-volume penalties for assigned stereo, plus a weak tether keeping
//! disconnected components near each other. Success requires the relaxed
//! coordinates to perceive back to the target adjacency with every assigned
//! stereo parity realized; otherwise the embedding retries with derived
//! seeds and eventually reports the graph as physically unrealizable.

use super::Geometry;
use crate::elements::Element;
use crate::molgraph::{perceive_adjacency, measure_parity, MolGraph, Parity, StereoSite};
use crate::optimize::{fire_nd, FireParams, OptParams};
use crate::util::derive_seed;
use rand::Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, thiserror::Error)]
pub enum EmbedError {
    #[error("embedding failed after {attempts} attempts; graph is physically unrealizable under the embedder tolerances")]
    Unrealizable { attempts: usize },
    #[error("atom count mismatch: geometry has {geometry} atoms, graph has {graph}")]
    AtomMismatch { geometry: usize, graph: usize },
    #[error("relaxation did not reach the product adjacency")]
    MappingFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedParams {
    /// Seeded restarts before declaring the graph unrealizable.
    pub max_attempts: usize,
    /// FIRE cycles for the bonds-and-angles stage.
    pub coarse_cycles: usize,
    /// FIRE cycles for the full-objective stage.
    pub full_cycles: usize,
    /// Perception cutoff scale used for the success check.
    pub perception_scale: f64,
    /// Gap between component surfaces in the tether target, Å.
    pub component_gap: f64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            max_attempts: 4,
            coarse_cycles: 400,
            full_cycles: 900,
            perception_scale: crate::molgraph::DEFAULT_PERCEPTION_SCALE,
            component_gap: 2.5,
        }
    }
}

fn vdw_radius(e: Element) -> f64 {
    match e {
        Element::H => 1.1,
        Element::C => 1.7,
        Element::N => 1.55,
        Element::O => 1.52,
    }
}

/// Bond length target by order: sum of covalent radii scaled down for
/// multiple bonds.
fn bond_target(a: Element, b: Element, order: u8) -> f64 {
    let base = a.covalent_radius() + b.covalent_radius();
    match order {
        1 => base,
        2 => 0.87 * base,
        _ => 0.78 * base,
    }
}

/// Ideal angle at a center, radians, from a steric-count heuristic.
fn ideal_angle(g: &MolGraph, center: usize) -> f64 {
    let nbrs = g.neighbors(center);
    let n_multi = nbrs.iter().filter(|&&u| g.order(center, u) >= 2).count();
    let has_triple = nbrs.iter().any(|&u| g.order(center, u) == 3);
    let deg = nbrs.len();
    let degrees: f64 = if has_triple || n_multi >= 2 {
        180.0
    } else if n_multi == 1 && deg <= 3 {
        120.0
    } else if deg == 4 {
        109.471
    } else if deg == 3 {
        107.0
    } else {
        109.471
    };
    degrees.to_radians()
}

struct DistTerm {
    i: usize,
    j: usize,
    target: f64,
    k: f64,
}

struct LowerBoundTerm {
    i: usize,
    j: usize,
    lower: f64,
    k: f64,
}

struct VolumeTerm {
    atoms: [usize; 4],
    sign: f64,
    min_volume: f64,
    k: f64,
}

struct TetherTerm {
    a: Vec<usize>,
    b: Vec<usize>,
    target: f64,
    k: f64,
}

/// The graph-parameterized constraint field.
struct ConstraintField {
    bonds: Vec<DistTerm>,
    one_three: Vec<DistTerm>,
    stereo_dist: Vec<DistTerm>,
    nonbonded: Vec<LowerBoundTerm>,
    volumes: Vec<VolumeTerm>,
    tethers: Vec<TetherTerm>,
    /// Weak guidance targets, e.g. pre-complex alignment of atoms that are
    /// about to bond.
    bias: Vec<DistTerm>,
}

/// A soft extra distance target for embedding, `(i, j, target)`.
pub type BiasTarget = (usize, usize, f64);

const K_BOND: f64 = 120.0;
const K_ANGLE: f64 = 35.0;
const K_STEREO_DIST: f64 = 40.0;
const K_NONBONDED: f64 = 50.0;
const K_VOLUME: f64 = 60.0;
const K_TETHER: f64 = 4.0;
const K_BIAS: f64 = 2.5;

impl ConstraintField {
    fn build(g: &MolGraph, gap: f64, bias_targets: &[BiasTarget]) -> ConstraintField {
        let n = g.natoms();
        let mut bonds = Vec::new();
        for (i, j, o) in g.bonds() {
            bonds.push(DistTerm {
                i,
                j,
                target: bond_target(g.element(i), g.element(j), o),
                k: K_BOND,
            });
        }

        let mut one_three = Vec::new();
        for center in 0..n {
            let nbrs = g.neighbors(center);
            let theta = ideal_angle(g, center);
            for (a, &u) in nbrs.iter().enumerate() {
                for &v in nbrs.iter().skip(a + 1) {
                    let tu = bond_target(g.element(center), g.element(u), g.order(center, u));
                    let tv = bond_target(g.element(center), g.element(v), g.order(center, v));
                    let d13 = (tu * tu + tv * tv - 2.0 * tu * tv * theta.cos()).sqrt();
                    one_three.push(DistTerm {
                        i: u.min(v),
                        j: u.max(v),
                        target: d13,
                        k: K_ANGLE,
                    });
                }
            }
        }

        // graph distances up to 2 to exclude bonded and angle pairs
        let mut graph_dist = vec![vec![u32::MAX; n]; n];
        for s in 0..n {
            let mut q = std::collections::VecDeque::new();
            graph_dist[s][s] = 0;
            q.push_back(s);
            while let Some(v) = q.pop_front() {
                if graph_dist[s][v] >= 4 {
                    continue;
                }
                for u in g.neighbors(v) {
                    if graph_dist[s][u] == u32::MAX {
                        graph_dist[s][u] = graph_dist[s][v] + 1;
                        q.push_back(u);
                    }
                }
            }
        }
        let mut nonbonded = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if graph_dist[i][j] >= 3 {
                    nonbonded.push(LowerBoundTerm {
                        i,
                        j,
                        lower: 0.75 * (vdw_radius(g.element(i)) + vdw_radius(g.element(j))),
                        k: K_NONBONDED,
                    });
                }
            }
        }

        // stereo constraints
        let mut stereo_dist = Vec::new();
        let mut volumes = Vec::new();
        for a in g.stereo() {
            match a.site {
                StereoSite::Tetrahedral { center } => {
                    let nb = g.neighbors(center);
                    volumes.push(VolumeTerm {
                        atoms: [nb[0], nb[1], nb[2], nb[3]],
                        sign: if a.parity == Parity::Plus { 1.0 } else { -1.0 },
                        min_volume: 0.4,
                        k: K_VOLUME,
                    });
                }
                StereoSite::DoubleBond { atoms: (i, j) } => {
                    let subs_i = g.substituents(i, j);
                    let subs_j = g.substituents(j, i);
                    let refs = (subs_i[0], subs_j[0]);
                    // targets for every cross pair keep the assignment
                    // unambiguous
                    for &u in &subs_i {
                        for &v in &subs_j {
                            let same_side_as_refs = (u == refs.0) == (v == refs.1);
                            let cis = (a.parity == Parity::Plus) == same_side_as_refs;
                            let target = cross_pair_distance(g, i, j, u, v, cis);
                            stereo_dist.push(DistTerm {
                                i: u.min(v),
                                j: u.max(v),
                                target,
                                k: K_STEREO_DIST,
                            });
                        }
                    }
                }
            }
        }

        // chain tether between consecutive components
        let comps = g.components();
        let mut tethers = Vec::new();
        for w in comps.windows(2) {
            let ra = 0.8 * (w[0].len() as f64).cbrt() + 0.6;
            let rb = 0.8 * (w[1].len() as f64).cbrt() + 0.6;
            tethers.push(TetherTerm {
                a: w[0].clone(),
                b: w[1].clone(),
                target: ra + rb + gap,
                k: K_TETHER,
            });
        }

        let bias = bias_targets
            .iter()
            .map(|&(i, j, target)| DistTerm {
                i: i.min(j),
                j: i.max(j),
                target,
                k: K_BIAS,
            })
            .collect();

        ConstraintField {
            bonds,
            one_three,
            stereo_dist,
            nonbonded,
            volumes,
            tethers,
            bias,
        }
    }

    fn eval(&self, x: &[f64], include_full: bool) -> (f64, Vec<f64>) {
        let mut e = 0.0;
        let mut grad = vec![0.0; x.len()];

        let mut dist_terms: Vec<&DistTerm> = self.bonds.iter().collect();
        dist_terms.extend(self.one_three.iter());
        dist_terms.extend(self.bias.iter());
        if include_full {
            dist_terms.extend(self.stereo_dist.iter());
        }
        for t in dist_terms {
            let (r, ux) = pair_dist(x, t.i, t.j);
            let d = r - t.target;
            e += t.k * d * d;
            let f = 2.0 * t.k * d;
            for k in 0..3 {
                grad[3 * t.i + k] += f * ux[k];
                grad[3 * t.j + k] -= f * ux[k];
            }
        }

        if include_full {
            for t in &self.nonbonded {
                let (r, ux) = pair_dist(x, t.i, t.j);
                if r < t.lower {
                    let d = t.lower - r;
                    e += t.k * d * d;
                    let f = -2.0 * t.k * d;
                    for k in 0..3 {
                        grad[3 * t.i + k] += f * ux[k];
                        grad[3 * t.j + k] -= f * ux[k];
                    }
                }
            }

            for t in &self.volumes {
                let [a, b, c, d] = t.atoms;
                let va = vec3(x, a);
                let vb = vec3(x, b);
                let vc = vec3(x, c);
                let vd = vec3(x, d);
                let u = sub(vb, va);
                let v = sub(vc, va);
                let w = sub(vd, va);
                let vol = dot3(cross(u, v), w);
                let signed = t.sign * vol;
                if signed < t.min_volume {
                    let def = t.min_volume - signed;
                    e += t.k * def * def;
                    let f = -2.0 * t.k * def * t.sign;
                    let gb = cross(v, w);
                    let gc = cross(w, u);
                    let gd = cross(u, v);
                    let ga = [-(gb[0] + gc[0] + gd[0]), -(gb[1] + gc[1] + gd[1]), -(gb[2] + gc[2] + gd[2])];
                    for k in 0..3 {
                        grad[3 * a + k] += f * ga[k];
                        grad[3 * b + k] += f * gb[k];
                        grad[3 * c + k] += f * gc[k];
                        grad[3 * d + k] += f * gd[k];
                    }
                }
            }
        }

        for t in &self.tethers {
            let ca = centroid_of(x, &t.a);
            let cb = centroid_of(x, &t.b);
            let dx = [ca[0] - cb[0], ca[1] - cb[1], ca[2] - cb[2]];
            let r = (dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]).sqrt().max(1e-8);
            let d = r - t.target;
            e += t.k * d * d;
            let f = 2.0 * t.k * d / r;
            for k in 0..3 {
                let fa = f * dx[k] / t.a.len() as f64;
                let fb = f * dx[k] / t.b.len() as f64;
                for &i in &t.a {
                    grad[3 * i + k] += fa;
                }
                for &i in &t.b {
                    grad[3 * i + k] -= fb;
                }
            }
        }

        (e, grad)
    }
}

fn vec3(x: &[f64], i: usize) -> [f64; 3] {
    [x[3 * i], x[3 * i + 1], x[3 * i + 2]]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn pair_dist(x: &[f64], i: usize, j: usize) -> (f64, [f64; 3]) {
    let d = [
        x[3 * i] - x[3 * j],
        x[3 * i + 1] - x[3 * j + 1],
        x[3 * i + 2] - x[3 * j + 2],
    ];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if r < 1e-8 {
        // coincident points: deterministic push-apart direction
        (1e-8, [1.0, 0.0, 0.0])
    } else {
        (r, [d[0] / r, d[1] / r, d[2] / r])
    }
}

fn centroid_of(x: &[f64], atoms: &[usize]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for &i in atoms {
        c[0] += x[3 * i];
        c[1] += x[3 * i + 1];
        c[2] += x[3 * i + 2];
    }
    let n = atoms.len() as f64;
    [c[0] / n, c[1] / n, c[2] / n]
}

/// Distance between substituents u (on i) and v (on j) across the double
/// bond i=j in the ideal planar local geometry, cis or trans.
fn cross_pair_distance(g: &MolGraph, i: usize, j: usize, u: usize, v: usize, cis: bool) -> f64 {
    let t_ij = bond_target(g.element(i), g.element(j), g.order(i, j));
    let t_iu = bond_target(g.element(i), g.element(u), g.order(i, u));
    let t_jv = bond_target(g.element(j), g.element(v), g.order(j, v));
    let a = 120.0_f64.to_radians();
    // i at origin, j on +x; u in the xy plane on +y side
    let pu = [-t_iu * (std::f64::consts::PI - a).cos(), t_iu * a.sin(), 0.0];
    let sign = if cis { 1.0 } else { -1.0 };
    let pv = [t_ij - t_jv * a.cos(), sign * t_jv * a.sin(), 0.0];
    let d = sub(pu, pv);
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Check that a geometry realizes the graph: perceived adjacency matches
/// and every assigned stereo parity measures correctly.
fn realizes(g: &MolGraph, geom: &Geometry, scale: f64) -> bool {
    if perceive_adjacency(geom, scale) != g.adjacency_pairs() {
        return false;
    }
    g.stereo()
        .iter()
        .all(|a| measure_parity(g, geom, &a.site) == a.parity)
}

fn relax(field: &ConstraintField, x0: &[f64], cycles: usize, full: bool) -> Vec<f64> {
    let params = OptParams {
        tol_max_grad: 1e-4,
        tol_rms_grad: 5e-5,
        max_cycles: cycles,
        max_step: 0.25,
    };
    let fire = FireParams::default();
    let f = |x: &[f64]| Ok::<_, std::convert::Infallible>(field.eval(x, full));
    let result = fire_nd(f, x0, &params, &fire).unwrap();
    result.x
}

/// Embed a graph as 3-D coordinates. Deterministic for a fixed seed.
pub fn embed(g: &MolGraph, seed: u64) -> Result<Geometry, EmbedError> {
    embed_with(g, seed, &EmbedParams::default())
}

pub fn embed_with(g: &MolGraph, seed: u64, params: &EmbedParams) -> Result<Geometry, EmbedError> {
    embed_biased(g, seed, params, &[])
}

/// Embed with extra weak distance targets, used to pre-align reacting
/// partners before a double-ended search.
pub fn embed_biased(
    g: &MolGraph,
    seed: u64,
    params: &EmbedParams,
    bias: &[BiasTarget],
) -> Result<Geometry, EmbedError> {
    let field = ConstraintField::build(g, params.component_gap, bias);
    let n = g.natoms();
    let box_side = 1.6 * (n as f64).cbrt() + 1.2;

    for attempt in 0..params.max_attempts {
        let mut rng =
            rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, "embed-attempt", attempt as u64));
        let x0: Vec<f64> = (0..3 * n)
            .map(|_| rng.random_range(-box_side..box_side))
            .collect();
        let coarse = relax(&field, &x0, params.coarse_cycles, false);
        let full = relax(&field, &coarse, params.full_cycles, true);
        let geom = Geometry::new(g.elements().to_vec(), unflatten(&full));
        if realizes(g, &geom, params.perception_scale) {
            return Ok(geom);
        }
    }
    Err(EmbedError::Unrealizable {
        attempts: params.max_attempts,
    })
}

/// Map a reactant geometry onto a product graph: relax the reactant
/// coordinates under the constraint field parameterized by the product.
pub fn map_product_geometry(
    reactant_geom: &Geometry,
    product: &MolGraph,
) -> Result<Geometry, EmbedError> {
    map_product_geometry_with(reactant_geom, product, &EmbedParams::default())
}

pub fn map_product_geometry_with(
    reactant_geom: &Geometry,
    product: &MolGraph,
    params: &EmbedParams,
) -> Result<Geometry, EmbedError> {
    map_product_biased(reactant_geom, product, params, &[])
}

/// Product mapping with extra weak distance targets (e.g. to keep a
/// breaking pair adjacent in the product conformer).
pub fn map_product_biased(
    reactant_geom: &Geometry,
    product: &MolGraph,
    params: &EmbedParams,
    bias: &[BiasTarget],
) -> Result<Geometry, EmbedError> {
    if reactant_geom.natoms() != product.natoms() {
        return Err(EmbedError::AtomMismatch {
            geometry: reactant_geom.natoms(),
            graph: product.natoms(),
        });
    }
    let field = ConstraintField::build(product, params.component_gap, bias);
    let x = relax(&field, &reactant_geom.flat(), params.full_cycles, true);
    let geom = Geometry::new(product.elements().to_vec(), unflatten(&x));
    if realizes(product, &geom, params.perception_scale) {
        Ok(geom)
    } else {
        Err(EmbedError::MappingFailed)
    }
}

fn unflatten(x: &[f64]) -> Vec<[f64; 3]> {
    x.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

/// Build a mid-exchange seed geometry for a double-ended search: every pair
/// whose bond count changes between reactant and product is held at
/// `stretch` times its covalent distance, bonds common to both graphs keep
/// their usual targets, and the rest of the frame relaxes from the reactant
/// coordinates. This plants the initial band inside the concerted exchange
/// channel instead of a sequential dissociation valley.
pub fn exchange_seed(
    reactant_geom: &Geometry,
    reactant: &MolGraph,
    product: &MolGraph,
    stretch: f64,
    params: &EmbedParams,
) -> Result<Geometry, EmbedError> {
    if reactant_geom.natoms() != reactant.natoms() || reactant.natoms() != product.natoms() {
        return Err(EmbedError::AtomMismatch {
            geometry: reactant_geom.natoms(),
            graph: product.natoms(),
        });
    }
    let n = reactant.natoms();
    let mut bonds = Vec::new();
    let mut changing = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let ro = reactant.order(i, j);
            let po = product.order(i, j);
            if ro == 0 && po == 0 {
                continue;
            }
            if ro > 0 && po > 0 {
                bonds.push(DistTerm {
                    i,
                    j,
                    target: bond_target(reactant.element(i), reactant.element(j), ro.min(po)),
                    k: K_BOND,
                });
            } else {
                let re = reactant.element(i).covalent_radius()
                    + reactant.element(j).covalent_radius();
                changing.push(DistTerm {
                    i,
                    j,
                    target: stretch * re,
                    k: 0.8 * K_BOND,
                });
            }
        }
    }
    // angles only where the center keeps its bonding in both graphs
    let mut one_three = Vec::new();
    for center in 0..n {
        let nbrs: Vec<usize> = (0..n)
            .filter(|&u| u != center && reactant.order(center, u) > 0 && product.order(center, u) > 0)
            .collect();
        let theta = ideal_angle(reactant, center);
        for (a, &u) in nbrs.iter().enumerate() {
            for &v in nbrs.iter().skip(a + 1) {
                let tu = bond_target(reactant.element(center), reactant.element(u), 1);
                let tv = bond_target(reactant.element(center), reactant.element(v), 1);
                let d13 = (tu * tu + tv * tv - 2.0 * tu * tv * theta.cos()).sqrt();
                one_three.push(DistTerm {
                    i: u.min(v),
                    j: u.max(v),
                    target: d13,
                    k: 0.5 * K_ANGLE,
                });
            }
        }
    }
    bonds.extend(changing);
    let field = ConstraintField {
        bonds,
        one_three,
        stereo_dist: Vec::new(),
        nonbonded: Vec::new(),
        volumes: Vec::new(),
        tethers: Vec::new(),
        bias: Vec::new(),
    };
    let x = relax(&field, &reactant_geom.flat(), params.full_cycles, true);
    let geom = Geometry::new(reactant.elements().to_vec(), unflatten(&x));
    if geom.is_finite() {
        Ok(geom)
    } else {
        Err(EmbedError::MappingFailed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::find_stereo_sites;
    use crate::molgraph::StereoAssignment;

    fn ch4() -> MolGraph {
        use crate::elements::Element::*;
        MolGraph::build(
            vec![C, H, H, H, H],
            &[(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1)],
        )
        .unwrap()
    }

    #[test]
    fn ch4_embeds_tetrahedral() {
        let g = ch4();
        let geom = embed(&g, 11).unwrap();
        for h in 1..5 {
            let d = geom.distance(0, h);
            assert!((d - 1.09).abs() < 0.1, "C-H distance {d}");
        }
        // H-C-H angles near 109.5 degrees
        for a in 1..5 {
            for b in (a + 1)..5 {
                let da = nalgebra::Vector3::from(geom.coords[a]) - nalgebra::Vector3::from(geom.coords[0]);
                let db = nalgebra::Vector3::from(geom.coords[b]) - nalgebra::Vector3::from(geom.coords[0]);
                let ang = da.angle(&db).to_degrees();
                assert!((ang - 109.47).abs() < 8.0, "angle {ang}");
            }
        }
    }

    #[test]
    fn embed_is_bitwise_deterministic() {
        let g = ch4();
        let a = embed(&g, 5).unwrap();
        let b = embed(&g, 5).unwrap();
        assert_eq!(a.coords, b.coords);
        let c = embed(&g, 6).unwrap();
        assert_ne!(a.coords, c.coords);
    }

    #[test]
    fn trans_butene_dihedral() {
        let g = crate::molgraph::test_mols::butene2();
        let site = find_stereo_sites(&g)[0];
        let trans = g
            .with_stereo(vec![StereoAssignment {
                site,
                parity: Parity::Minus,
            }])
            .unwrap();
        let geom = embed(&trans, 3).unwrap();
        // methyl carbons are the reference substituents: C0 on C1, C3 on C2
        let phi = geom.dihedral(0, 1, 2, 3).to_degrees().abs();
        assert!((phi - 180.0).abs() < 30.0, "dihedral {phi}");

        let cis = g
            .with_stereo(vec![StereoAssignment {
                site,
                parity: Parity::Plus,
            }])
            .unwrap();
        let geom = embed(&cis, 3).unwrap();
        let phi = geom.dihedral(0, 1, 2, 3).to_degrees().abs();
        assert!(phi < 30.0, "dihedral {phi}");
    }

    #[test]
    fn two_components_stay_separate() {
        let g = crate::molgraph::test_mols::h2_c2h4();
        let geom = embed(&g, 9).unwrap();
        // perceive must find exactly the input adjacency (no cross bonds)
        assert_eq!(
            perceive_adjacency(&geom, 1.2),
            g.adjacency_pairs()
        );
    }

    #[test]
    fn mapping_identity_keeps_adjacency() {
        let g = ch4();
        let geom = embed(&g, 2).unwrap();
        let mapped = map_product_geometry(&geom, &g).unwrap();
        assert_eq!(perceive_adjacency(&mapped, 1.2), g.adjacency_pairs());
    }

    #[test]
    fn mapping_atom_mismatch_rejected() {
        let g = ch4();
        let geom = embed(&g, 2).unwrap();
        let h2 = MolGraph::build(vec![crate::elements::Element::H; 2], &[(0, 1, 1)]).unwrap();
        assert!(matches!(
            map_product_geometry(&geom, &h2),
            Err(EmbedError::AtomMismatch { .. })
        ));
    }
}

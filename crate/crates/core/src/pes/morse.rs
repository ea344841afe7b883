//! Reactive pairwise-Morse molecular surrogate.
//!
//! The surrogate is a smooth function of coordinates only, so bonds can
//! break and form along a path. Each unordered atom pair contributes a
//! Morse interaction split into an always-on exponential core repulsion and
//! an attractive well gated by a valence-saturation screen and a range
//! cutoff:
//!
//! ```text
//! E = sum_{i<j}  D e^{-2a(r-re)}  +  S_ij * w_ij(r) * (-2 D e^{-a(r-re)})
//! S_ij = sat(V_i - c_i\j) * sat(V_j - c_j\i)
//! c_i\j = sum_{k != i,j} w_ik(r_ik)
//! ```
//!
//! `w` is a smooth per-pair window (full below `1.2 r_e`, zero above
//! `2.0 r_e`) used for both the coordination count and the attraction
//! range, `V_i` is the element's standard valence and `sat` is a C2 clamp
//! to [0, 1]. An isolated pair at bonding distance has `S = w = 1` and sees
//! the exact Morse curve, so the dissociation limit and the `-D_e` minimum
//! identity hold verbatim. The two gates work together: saturated atoms
//! stop attracting extra partners, and the attraction dies on the same
//! footing as the coordination count. A bare pair sum cannot keep saturated
//! molecules at their own adjacency (every hydrogen would rather pair with
//! another hydrogen than stay on its carbon), and a screen whose window is
//! shorter-ranged than the attraction it gates lets multi-center clusters
//! collect large binding while barely registering as coordinated.
//!
//! Well depths come from the single-bond energy table with no explicit
//! bond-order dependence; `r_e` is the sum of covalent radii. The surrogate
//! exercises the pipeline with smooth, qualitatively sane barriers; it makes
//! no claim to quantitative energetics.

use super::{CalcError, Calculator, Gradient};
use crate::elements::{single_bond_energy, Element, PairTable};
use crate::geom::Geometry;
use crate::util::{smootherstep, smootherstep_d};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseSurrogate {
    /// Well depth per element pair, kcal/mol.
    pub well_depth: PairTable,
    /// Equilibrium distance per element pair, Å.
    pub equilibrium: PairTable,
    /// Morse width parameter, 1/Å.
    pub width: f64,
    /// Coordination window: full weight below `win_lo * r_e`.
    pub win_lo: f64,
    /// Coordination window: zero weight above `win_hi * r_e`.
    pub win_hi: f64,
}

impl Default for MorseSurrogate {
    fn default() -> Self {
        MorseSurrogate {
            well_depth: PairTable::from_fn(single_bond_energy),
            equilibrium: PairTable::from_fn(|a, b| a.covalent_radius() + b.covalent_radius()),
            width: 2.0,
            win_lo: 1.2,
            win_hi: 2.0,
        }
    }
}

impl MorseSurrogate {
    /// Smooth coordination weight of a contact at distance `r` for the
    /// element pair `(a, b)`, and its radial derivative.
    fn weight(&self, a: Element, b: Element, r: f64) -> (f64, f64) {
        let re = self.equilibrium.get(a, b);
        let lo = self.win_lo * re;
        let hi = self.win_hi * re;
        let u = (r - lo) / (hi - lo);
        (1.0 - smootherstep(u), -smootherstep_d(u) / (hi - lo))
    }

    pub fn evaluate(&self, geom: &Geometry) -> Result<(f64, Gradient), CalcError> {
        let n = geom.natoms();
        let a = self.width;

        // pair distances, coordination weights and their derivatives
        let mut r = vec![0.0; n * n];
        let mut w = vec![0.0; n * n];
        let mut wd = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = geom.distance(i, j);
                if d < 1e-6 {
                    return Err(CalcError::CoincidentAtoms { i, j, r: d });
                }
                let (wij, wdij) = self.weight(geom.elements[i], geom.elements[j], d);
                r[i * n + j] = d;
                r[j * n + i] = d;
                w[i * n + j] = wij;
                w[j * n + i] = wij;
                wd[i * n + j] = wdij;
                wd[j * n + i] = wdij;
            }
        }

        // total coordination per atom
        let total_coord: Vec<f64> = (0..n)
            .map(|i| (0..n).filter(|&k| k != i).map(|k| w[i * n + k]).sum())
            .collect();

        // screens: s[i][j] = sat(V_i - c_i\j), c_i\j = total_i - w_ij
        let mut s = vec![0.0; n * n];
        let mut sd = vec![0.0; n * n]; // sat'(V_i - c_i\j)
        for i in 0..n {
            let v = geom.elements[i].standard_valence() as f64;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let x = v - (total_coord[i] - w[i * n + j]);
                s[i * n + j] = smootherstep(x);
                sd[i * n + j] = smootherstep_d(x);
            }
        }

        let mut energy = 0.0;
        // alpha[i][j] = attr_ij * s_j\i * sat'_i\j  (chain factor for c_i\j)
        let mut alpha = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = self.well_depth.get(geom.elements[i], geom.elements[j]);
                let re = self.equilibrium.get(geom.elements[i], geom.elements[j]);
                // attraction carries the same range window as the
                // coordination count
                let attr = -2.0 * d * (-a * (r[i * n + j] - re)).exp() * w[i * n + j];
                alpha[i * n + j] = attr * s[j * n + i] * sd[i * n + j];
                if i < j {
                    let rep = d * (-2.0 * a * (r[i * n + j] - re)).exp();
                    energy += rep + s[i * n + j] * s[j * n + i] * attr;
                }
            }
        }

        // beta_i = sum_j alpha_ij
        let beta: Vec<f64> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).map(|j| alpha[i * n + j]).sum())
            .collect();

        // radial force coefficient per unordered pair:
        //   F_ij = rep' + S (attr w)' + (alpha_ij + alpha_ji - beta_i - beta_j) w'_ij
        let mut grad = vec![[0.0; 3]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.well_depth.get(geom.elements[i], geom.elements[j]);
                let re = self.equilibrium.get(geom.elements[i], geom.elements[j]);
                let dist = r[i * n + j];
                let rep_d = -2.0 * a * d * (-2.0 * a * (dist - re)).exp();
                let attr_bare = -2.0 * d * (-a * (dist - re)).exp();
                let attr_d = -a * attr_bare * w[i * n + j] + attr_bare * wd[i * n + j];
                let s_pair = s[i * n + j] * s[j * n + i];
                let screen_term = (alpha[i * n + j] + alpha[j * n + i] - beta[i] - beta[j])
                    * wd[i * n + j];
                let f = rep_d + s_pair * attr_d + screen_term;
                let inv = f / dist;
                for k in 0..3 {
                    let dxk = (geom.coords[i][k] - geom.coords[j][k]) * inv;
                    grad[i][k] += dxk;
                    grad[j][k] -= dxk;
                }
            }
        }

        Ok((energy, grad))
    }
}

impl Calculator for MorseSurrogate {
    fn energy(&self, geom: &Geometry) -> Result<f64, CalcError> {
        Ok(self.evaluate(geom)?.0)
    }

    fn gradient(&self, geom: &Geometry) -> Result<Gradient, CalcError> {
        Ok(self.evaluate(geom)?.1)
    }

    fn energy_gradient(&self, geom: &Geometry) -> Result<(f64, Gradient), CalcError> {
        self.evaluate(geom)
    }
}

/// Energy of a geometry under the default surrogate parameters.
pub fn morse_energy(geom: &Geometry) -> Result<f64, CalcError> {
    MorseSurrogate::default().energy(geom)
}

/// Energy and gradient under the default surrogate parameters.
pub fn morse_energy_gradient(geom: &Geometry) -> Result<(f64, Gradient), CalcError> {
    MorseSurrogate::default().evaluate(geom)
}

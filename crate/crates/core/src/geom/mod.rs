//! 3-D structures: embedding, alignment, conformer pairing, XYZ text format.

mod embed;
mod kabsch;
mod pairs;
mod xyz;

pub use embed::{
    embed, embed_biased, embed_with, exchange_seed, map_product_biased, map_product_geometry,
    map_product_geometry_with, BiasTarget, EmbedError, EmbedParams,
};
pub use kabsch::{kabsch_align, kabsch_rmsd, Alignment};
pub use pairs::{select_conformer_pairs, ConformerPair, PairParams};
pub use xyz::{parse_xyz, write_xyz, write_xyz_frames, XyzError};

use crate::elements::Element;
use serde::{Deserialize, Serialize};

/// Cartesian realization of a set of atoms, in Å. Atom order matches the
/// generating molecular graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub elements: Vec<Element>,
    pub coords: Vec<[f64; 3]>,
}

impl Geometry {
    pub fn new(elements: Vec<Element>, coords: Vec<[f64; 3]>) -> Self {
        assert_eq!(
            elements.len(),
            coords.len(),
            "element list and coordinate rows must match"
        );
        Geometry { elements, coords }
    }

    pub fn natoms(&self) -> usize {
        self.elements.len()
    }

    /// Flatten coordinates into a 3N vector.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.coords.len());
        for c in &self.coords {
            v.extend_from_slice(c);
        }
        v
    }

    /// Rebuild from a flat 3N vector, keeping the element list.
    pub fn with_flat(&self, flat: &[f64]) -> Geometry {
        assert_eq!(flat.len(), 3 * self.natoms());
        let coords = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Geometry {
            elements: self.elements.clone(),
            coords,
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let a = self.coords[i];
        let b = self.coords[j];
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        let dz = a[2] - b[2];
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn centroid(&self) -> [f64; 3] {
        let n = self.natoms().max(1) as f64;
        let mut c = [0.0; 3];
        for p in &self.coords {
            c[0] += p[0];
            c[1] += p[1];
            c[2] += p[2];
        }
        [c[0] / n, c[1] / n, c[2] / n]
    }

    pub fn translate(&mut self, t: [f64; 3]) {
        for p in &mut self.coords {
            p[0] += t[0];
            p[1] += t[1];
            p[2] += t[2];
        }
    }

    pub fn masses(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.mass()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.iter().all(|x| x.is_finite()))
    }

    /// Dihedral angle a-b-c-d in radians, signed, in (-pi, pi].
    pub fn dihedral(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let p = |i: usize| nalgebra::Vector3::from(self.coords[i]);
        let b1 = p(b) - p(a);
        let b2 = p(c) - p(b);
        let b3 = p(d) - p(c);
        let n1 = b1.cross(&b2);
        let n2 = b2.cross(&b3);
        let m1 = n1.cross(&b2.normalize());
        let x = n1.dot(&n2);
        let y = m1.dot(&n2);
        y.atan2(x)
    }

    /// Signed volume of the tetrahedron spanned by atoms (a, b, c, d):
    /// det[b-a, c-a, d-a]. The sign encodes tetrahedral handedness.
    pub fn signed_volume(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let p = |i: usize| nalgebra::Vector3::from(self.coords[i]);
        let u = p(b) - p(a);
        let v = p(c) - p(a);
        let w = p(d) - p(a);
        u.cross(&v).dot(&w)
    }
}

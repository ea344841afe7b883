//! Optimal rigid superposition (Kabsch) and RMSD.

use super::Geometry;
use nalgebra::{Matrix3, Vector3};

/// Proper rotation + translation mapping one structure onto another.
#[derive(Debug, Clone)]
pub struct Alignment {
    /// Rotation applied to the centered moving structure.
    pub rotation: Matrix3<f64>,
    /// Translation applied after rotation.
    pub translation: Vector3<f64>,
    /// Root-mean-square deviation after alignment, in Å.
    pub rmsd: f64,
}

/// Align `moving` onto `target` over all atoms (no symmetry permutation
/// search) and return the transform plus the minimal RMSD.
///
/// Panics if the element lists differ; callers compare like with like.
pub fn kabsch_align(moving: &Geometry, target: &Geometry) -> Alignment {
    assert_eq!(
        moving.elements, target.elements,
        "kabsch alignment requires identical element lists"
    );
    let n = moving.natoms();
    assert!(n > 0);

    let cm = Vector3::from(moving.centroid());
    let ct = Vector3::from(target.centroid());

    // cross-covariance of centered coordinates
    let mut cov = Matrix3::<f64>::zeros();
    for i in 0..n {
        let p = Vector3::from(moving.coords[i]) - cm;
        let q = Vector3::from(target.coords[i]) - ct;
        cov += q * p.transpose();
    }

    let svd = cov.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let d = (u * v_t).determinant();
    let sign = if d < 0.0 { -1.0 } else { 1.0 };
    let flip = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, sign));
    let rotation = u * flip * v_t;

    let translation = ct - rotation * cm;

    let mut ss = 0.0;
    for i in 0..n {
        let p = rotation * Vector3::from(moving.coords[i]) + translation;
        let q = Vector3::from(target.coords[i]);
        ss += (p - q).norm_squared();
    }
    let rmsd = (ss / n as f64).sqrt();

    Alignment {
        rotation,
        translation,
        rmsd,
    }
}

/// Minimal RMSD between two geometries over proper rotations and
/// translations.
pub fn kabsch_rmsd(a: &Geometry, b: &Geometry) -> f64 {
    kabsch_align(a, b).rmsd
}

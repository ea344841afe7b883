//! Finite-difference Hessians and vibrational mode analysis.

use crate::geom::Geometry;
use crate::pes::{CalcError, Calculator};
use nalgebra::{DMatrix, DVector, Vector3};

/// Central-difference Hessian of the calculator's energy, built from
/// gradient columns with step 1e-3 Å and symmetrized as (H + Hᵀ)/2.
/// Falls back to a one-sided difference when the calculator errors at a
/// displaced point.
pub fn hessian_fd(calc: &dyn Calculator, geom: &Geometry) -> Result<DMatrix<f64>, CalcError> {
    const STEP: f64 = 1e-3;
    let n = 3 * geom.natoms();
    let flat = geom.flat();
    let g0 = flatten(&calc.gradient(geom)?);

    let mut h = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut xp = flat.clone();
        xp[k] += STEP;
        let gp = calc.gradient(&geom.with_flat(&xp)).map(|g| flatten(&g));
        let mut xm = flat.clone();
        xm[k] -= STEP;
        let gm = calc.gradient(&geom.with_flat(&xm)).map(|g| flatten(&g));

        let col: Vec<f64> = match (gp, gm) {
            (Ok(gp), Ok(gm)) => gp
                .iter()
                .zip(&gm)
                .map(|(p, m)| (p - m) / (2.0 * STEP))
                .collect(),
            (Ok(gp), Err(_)) => gp.iter().zip(&g0).map(|(p, o)| (p - o) / STEP).collect(),
            (Err(_), Ok(gm)) => g0.iter().zip(&gm).map(|(o, m)| (o - m) / STEP).collect(),
            (Err(e), Err(_)) => return Err(e),
        };
        for r in 0..n {
            h[(r, k)] = col[r];
        }
    }
    // symmetrize
    let ht = h.transpose();
    Ok((h + ht) * 0.5)
}

fn flatten(g: &[[f64; 3]]) -> Vec<f64> {
    g.iter().flat_map(|row| row.iter().copied()).collect()
}

/// Eigenvalue threshold for counting a mode as negative, in mass-weighted
/// units.
#[derive(Debug, Clone, Copy)]
pub struct ModeEps(pub f64);

impl Default for ModeEps {
    fn default() -> Self {
        ModeEps(1e-4)
    }
}

/// Mass-weighted, rigid-projected mode analysis of a Hessian.
#[derive(Debug, Clone)]
pub struct HessianAnalysis {
    /// Eigenvalues ascending, mass-weighted units, rigid modes projected to
    /// (near) zero.
    pub eigenvalues: Vec<f64>,
    /// Matching eigenvectors as columns, mass-weighted coordinates.
    pub eigenvectors: DMatrix<f64>,
    /// Count of eigenvalues below -eps after rigid-mode projection.
    pub n_negative: usize,
    /// Number of projected rigid modes: 0 for a single atom, 5 for linear
    /// molecules, 6 otherwise.
    pub n_rigid: usize,
    /// Eigenvector of the lowest eigenvalue, mass-weighted coordinates.
    pub imaginary_mode: Vec<f64>,
}

impl HessianAnalysis {
    /// Count of eigenvalues above +eps (bound vibrations).
    pub fn n_positive(&self, eps: ModeEps) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > eps.0).count()
    }

    /// Convert a mass-weighted mode to a Cartesian displacement direction,
    /// normalized.
    pub fn cartesian_mode(&self, mode: &[f64], masses: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = mode
            .iter()
            .enumerate()
            .map(|(k, q)| q / masses[k / 3].sqrt())
            .collect();
        let n = crate::util::norm(&v).max(1e-300);
        v.iter_mut().for_each(|x| *x /= n);
        v
    }
}

/// Analyze a symmetric Hessian: mass-weight, project out rigid-body
/// translations and rotations (for two or more atoms), eigendecompose and
/// count negative modes with the default threshold.
pub fn analyze_modes(hessian: &DMatrix<f64>, masses: &[f64], geom: &Geometry) -> HessianAnalysis {
    analyze_modes_with(hessian, masses, geom, ModeEps::default())
}

pub fn analyze_modes_with(
    hessian: &DMatrix<f64>,
    masses: &[f64],
    geom: &Geometry,
    eps: ModeEps,
) -> HessianAnalysis {
    let natoms = geom.natoms();
    let n = 3 * natoms;
    assert_eq!(hessian.nrows(), n);
    assert_eq!(masses.len(), natoms);

    // mass weighting
    let mut h = hessian.clone();
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] /= (masses[i / 3] * masses[j / 3]).sqrt();
        }
    }

    let rigid = if natoms >= 2 {
        rigid_basis(masses, geom)
    } else {
        Vec::new()
    };
    let n_rigid = rigid.len();
    if n_rigid > 0 {
        // P H P with P = I - sum v vᵀ
        let mut p = DMatrix::identity(n, n);
        for v in &rigid {
            p -= v * v.transpose();
        }
        h = &p * h * &p;
    }

    let eig = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        eigenvectors.set_column(col, &eig.eigenvectors.column(i));
    }

    let n_negative = eigenvalues.iter().filter(|&&l| l < -eps.0).count();
    let imaginary_mode = eigenvectors.column(0).iter().copied().collect();

    HessianAnalysis {
        eigenvalues,
        eigenvectors,
        n_negative,
        n_rigid,
        imaginary_mode,
    }
}

/// Orthonormal rigid-body basis in mass-weighted coordinates: 3
/// translations plus 2 or 3 rotations depending on linearity.
fn rigid_basis(masses: &[f64], geom: &Geometry) -> Vec<DVector<f64>> {
    let natoms = geom.natoms();
    let n = 3 * natoms;
    let total_mass: f64 = masses.iter().sum();
    let mut com = Vector3::zeros();
    for (i, c) in geom.coords.iter().enumerate() {
        com += masses[i] * Vector3::from(*c);
    }
    com /= total_mass;

    let mut raw: Vec<DVector<f64>> = Vec::with_capacity(6);
    for axis in 0..3 {
        let mut v = DVector::zeros(n);
        for i in 0..natoms {
            v[3 * i + axis] = masses[i].sqrt();
        }
        raw.push(v);
    }
    for axis in [
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.0, 1.0, 0.0),
        Vector3::new(0.0, 0.0, 1.0),
    ] {
        let mut v = DVector::zeros(n);
        for i in 0..natoms {
            let r = Vector3::from(geom.coords[i]) - com;
            let t = axis.cross(&r) * masses[i].sqrt();
            v[3 * i] = t.x;
            v[3 * i + 1] = t.y;
            v[3 * i + 2] = t.z;
        }
        raw.push(v);
    }

    // modified Gram-Schmidt, dropping dependent vectors (linear molecules)
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(6);
    for mut v in raw {
        for b in &basis {
            let d = b.dot(&v);
            v -= b * d;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    basis
}

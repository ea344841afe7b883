//! Restricted-step partitioned rational function optimization: eigenvector
//! following toward a first-order saddle point.
//!
//! The energy is maximized along the lowest-eigenvalue Hessian mode and
//! minimized along all others, each with its own RFO level shift, under an
//! adaptive per-atom trust radius. Rigid-body directions are removed from
//! the working subspace before partitioning.

use super::{analyze_modes, hessian_fd, OptError, OptParams, OptResult};
use crate::geom::Geometry;
use crate::pes::Calculator;
use crate::util::{max_abs, rms};
use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrfoParams {
    pub opt: OptParams,
    /// Initial per-atom trust radius, Å.
    pub trust_init: f64,
    /// Upper bound on the trust radius, Å.
    pub trust_max: f64,
    /// Recompute the finite-difference Hessian every this many steps.
    pub hess_every: usize,
}

impl Default for PrfoParams {
    fn default() -> Self {
        PrfoParams {
            opt: OptParams::default(),
            trust_init: 0.1,
            trust_max: 0.3,
            hess_every: 1,
        }
    }
}

/// Refine a saddle point from a starting structure that already has one
/// negative curvature direction (typically the highest CI-NEB image).
///
/// Returns converged only when the gradient thresholds are met and the
/// final mode analysis shows exactly one negative eigenvalue.
pub fn prfo_ts_optimize(
    calc: &dyn Calculator,
    g0: &Geometry,
    params: &PrfoParams,
) -> Result<OptResult, OptError> {
    let mut geom = g0.clone();
    let mut trust = params.trust_init;
    let (mut energy, mut grad) = flat_eval(calc, &geom)?;
    let masses = geom.masses();

    let mut hessian: Option<DMatrix<f64>> = None;
    let mut steps_since_hessian = usize::MAX;

    for step in 0..params.opt.max_cycles {
        if params.opt.converged(&grad) {
            let h = hessian_fd(calc, &geom)?;
            let analysis = analyze_modes(&h, &masses, &geom);
            if analysis.n_negative != 1 {
                return Err(OptError::WrongCurvature {
                    n_negative: analysis.n_negative,
                });
            }
            return Ok(OptResult {
                geometry: geom,
                energy,
                n_steps: step,
                converged: true,
                max_grad_component: max_abs(&grad),
                rms_grad: rms(&grad),
            });
        }

        if steps_since_hessian >= params.hess_every {
            hessian = Some(hessian_fd(calc, &geom)?);
            steps_since_hessian = 0;
        }
        let h = hessian.as_ref().expect("hessian computed");

        // reduced problem in the non-rigid subspace
        let q = nonrigid_basis(&geom);
        let m = q.ncols();
        let h_red = q.transpose() * h * &q;
        let g_red = q.transpose() * DVector::from_vec(grad.clone());
        let eig = nalgebra::SymmetricEigen::new(h_red);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let b: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut v = DMatrix::zeros(m, m);
        for (col, &i) in order.iter().enumerate() {
            v.set_column(col, &eig.eigenvectors.column(i));
        }
        let gt = v.transpose() * &g_red;

        if step == 0 && b[0] > -1e-8 {
            return Err(OptError::NoNegativeMode);
        }

        // uphill RFO step along the followed (lowest) mode
        let mut hstep = DVector::zeros(m);
        let lam_p = 0.5 * b[0] + 0.5 * (b[0] * b[0] + 4.0 * gt[0] * gt[0]).sqrt();
        hstep[0] = if (lam_p - b[0]).abs() > 1e-12 {
            gt[0] / (lam_p - b[0])
        } else {
            0.0
        };

        // downhill shifted-Newton step along the remaining modes
        if m > 1 {
            let rest = m - 1;
            let mut aug = DMatrix::zeros(rest + 1, rest + 1);
            for i in 0..rest {
                aug[(i, i)] = b[i + 1];
                aug[(i, rest)] = gt[i + 1];
                aug[(rest, i)] = gt[i + 1];
            }
            let nu = nalgebra::SymmetricEigen::new(aug)
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            for i in 1..m {
                let denom = b[i] - nu;
                hstep[i] = if denom.abs() > 1e-12 { -gt[i] / denom } else { 0.0 };
            }
        }

        // map to Cartesian, cap to the trust radius
        let mut step_cart: Vec<f64> = (&q * &v * &hstep).iter().copied().collect();
        let worst = step_cart
            .chunks(3)
            .map(|a| a.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0_f64, f64::max);
        let capped = worst > trust;
        if capped && worst > 0.0 {
            let s = trust / worst;
            step_cart.iter_mut().for_each(|x| *x *= s);
            hstep *= s;
        }

        let predicted: f64 = (0..m)
            .map(|i| gt[i] * hstep[i] + 0.5 * b[i] * hstep[i] * hstep[i])
            .sum();

        let flat = geom.flat();
        let new_flat: Vec<f64> = flat.iter().zip(&step_cart).map(|(x, d)| x + d).collect();
        let new_geom = geom.with_flat(&new_flat);
        let (new_energy, new_grad) = flat_eval(calc, &new_geom)?;

        let rho = if predicted.abs() > 1e-14 {
            (new_energy - energy) / predicted
        } else {
            1.0
        };
        if rho < 0.25 {
            trust = (trust * 0.5).max(1e-4);
        } else if rho > 0.75 && capped {
            trust = (trust * 1.2).min(params.trust_max);
        }

        geom = new_geom;
        energy = new_energy;
        grad = new_grad;
        steps_since_hessian += 1;
    }

    Ok(OptResult {
        geometry: geom,
        energy,
        n_steps: params.opt.max_cycles,
        converged: false,
        max_grad_component: max_abs(&grad),
        rms_grad: rms(&grad),
    })
}

fn flat_eval(calc: &dyn Calculator, geom: &Geometry) -> Result<(f64, Vec<f64>), OptError> {
    let (e, g) = calc.energy_gradient(geom)?;
    Ok((e, g.iter().flat_map(|r| r.iter().copied()).collect()))
}

/// Orthonormal basis of the subspace complementary to rigid translations
/// and rotations (plain Cartesian, no mass weighting). For one atom the
/// full space is returned.
fn nonrigid_basis(geom: &Geometry) -> DMatrix<f64> {
    let natoms = geom.natoms();
    let n = 3 * natoms;
    if natoms == 1 {
        return DMatrix::identity(3, 3);
    }

    let centroid = Vector3::from(geom.centroid());
    let mut rigid: Vec<DVector<f64>> = Vec::with_capacity(6);
    for axis in 0..3 {
        let mut v = DVector::zeros(n);
        for i in 0..natoms {
            v[3 * i + axis] = 1.0;
        }
        rigid.push(v);
    }
    for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
        let mut v = DVector::zeros(n);
        for i in 0..natoms {
            let t = axis.cross(&(Vector3::from(geom.coords[i]) - centroid));
            v[3 * i] = t.x;
            v[3 * i + 1] = t.y;
            v[3 * i + 2] = t.z;
        }
        rigid.push(v);
    }

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut n_rigid = 0;
    for cand in rigid.into_iter().chain((0..n).map(|k| {
        let mut e = DVector::zeros(n);
        e[k] = 1.0;
        e
    })) {
        let mut v = cand;
        for b in &basis {
            let d = b.dot(&v);
            v -= b * d;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
            if basis.len() <= 6 && n_rigid == basis.len() - 1 {
                n_rigid = basis.len();
            }
        }
    }
    // rigid vectors were fed first; everything after them spans the
    // complement
    let n_rigid = n_rigid.min(basis.len());
    let cols = &basis[n_rigid..];
    let mut q = DMatrix::zeros(n, cols.len());
    for (c, v) in cols.iter().enumerate() {
        q.set_column(c, v);
    }
    q
}

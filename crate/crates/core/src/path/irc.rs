//! Intrinsic reaction coordinate descent: mass-weighted damped steepest
//! descent from a transition state, then full minimization of both
//! endpoints. The endpoints identify which reaction a saddle mediates.

use super::PathError;
use crate::geom::Geometry;
use crate::optimize::{lbfgs_minimize, OptParams, OptResult};
use crate::pes::Calculator;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IrcParams {
    /// Initial displacement along the imaginary mode, Å·amu^1/2.
    pub displacement: f64,
    /// Descent step in mass-weighted coordinates, Å·amu^1/2.
    pub step: f64,
    /// Stop descending when the largest Cartesian gradient component drops
    /// below this, kcal/mol/Å; the endpoint is then fully minimized.
    pub grad_done: f64,
    pub max_steps: usize,
    /// Final endpoint minimization settings.
    pub endpoint_opt: OptParams,
}

impl Default for IrcParams {
    fn default() -> Self {
        IrcParams {
            displacement: 0.05,
            step: 0.02,
            grad_done: 1.0,
            max_steps: 4000,
            endpoint_opt: OptParams {
                max_cycles: 2000,
                ..OptParams::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct IrcOutcome {
    pub forward: OptResult,
    pub backward: OptResult,
}

/// Descend from a transition state along both senses of its mass-weighted
/// imaginary mode.
pub fn irc_descend(
    calc: &dyn Calculator,
    ts: &Geometry,
    mode_mw: &[f64],
    masses: &[f64],
    params: &IrcParams,
) -> Result<IrcOutcome, PathError> {
    let forward = descend_one(calc, ts, mode_mw, masses, params, 1.0)?;
    let backward = descend_one(calc, ts, mode_mw, masses, params, -1.0)?;
    Ok(IrcOutcome { forward, backward })
}

fn descend_one(
    calc: &dyn Calculator,
    ts: &Geometry,
    mode_mw: &[f64],
    masses: &[f64],
    params: &IrcParams,
    sense: f64,
) -> Result<OptResult, PathError> {
    let dof = 3 * ts.natoms();
    assert_eq!(mode_mw.len(), dof);
    let sqrt_m: Vec<f64> = (0..dof).map(|k| masses[k / 3].sqrt()).collect();

    // normalize the mode in mass-weighted coordinates and displace
    let norm = crate::util::norm(mode_mw).max(1e-300);
    let mut q: Vec<f64> = ts
        .flat()
        .iter()
        .enumerate()
        .map(|(k, x)| x * sqrt_m[k])
        .collect();
    for k in 0..dof {
        q[k] += sense * params.displacement * mode_mw[k] / norm;
    }

    let mut step = params.step;
    let mut prev_dir: Option<Vec<f64>> = None;
    let mut done = false;
    for _ in 0..params.max_steps {
        let x: Vec<f64> = q.iter().enumerate().map(|(k, qk)| qk / sqrt_m[k]).collect();
        let geom = ts.with_flat(&x);
        let grad = calc.gradient(&geom).map_err(PathError::Calc)?;
        let grad_flat: Vec<f64> = grad.iter().flat_map(|r| r.iter().copied()).collect();
        if crate::util::max_abs(&grad_flat) <= params.grad_done {
            done = true;
            break;
        }
        // gradient in mass-weighted coordinates
        let mut gq: Vec<f64> = grad_flat
            .iter()
            .enumerate()
            .map(|(k, g)| g / sqrt_m[k])
            .collect();
        let gn = crate::util::norm(&gq).max(1e-300);
        gq.iter_mut().for_each(|g| *g /= gn);

        // damp on oscillation: direction reversal halves the step
        if let Some(prev) = &prev_dir {
            if crate::util::dot(prev, &gq) < -0.5 {
                step = (step * 0.5).max(1e-4);
            }
        }
        for k in 0..dof {
            q[k] -= step * gq[k];
        }
        prev_dir = Some(gq);
    }
    if !done {
        return Err(PathError::DescentStalled);
    }

    let x: Vec<f64> = q.iter().enumerate().map(|(k, qk)| qk / sqrt_m[k]).collect();
    let geom = ts.with_flat(&x);
    lbfgs_minimize(calc, &geom, &params.endpoint_opt).map_err(PathError::Calc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pes::Surface2D;

    #[test]
    fn double_well_endpoints_are_mirror_symmetric() {
        // saddle of (x^2-1)^2 + y^2 at origin; imaginary mode along x
        let ts = Surface2D::point(0.0, 0.0);
        let mode = vec![1.0, 0.0, 0.0];
        let masses = vec![1.0];
        let params = IrcParams {
            grad_done: 0.05,
            endpoint_opt: OptParams {
                tol_max_grad: 1e-9,
                tol_rms_grad: 1e-9,
                max_cycles: 5000,
                ..OptParams::default()
            },
            ..IrcParams::default()
        };
        let out = irc_descend(&Surface2D::DoubleWell, &ts, &mode, &masses, &params).unwrap();
        let (xf, yf) = Surface2D::coords(&out.forward.geometry);
        let (xb, yb) = Surface2D::coords(&out.backward.geometry);
        assert!((xf + xb).abs() < 1e-6, "mirror symmetry: {xf} vs {xb}");
        assert!(yf.abs() < 1e-6 && yb.abs() < 1e-6);
        assert!((xf.abs() - 1.0).abs() < 1e-6);
        // endpoints lie strictly below the saddle
        let (e_ts, _) = Surface2D::DoubleWell.eval(0.0, 0.0);
        assert!(out.forward.energy < e_ts - 1e-6);
        assert!(out.backward.energy < e_ts - 1e-6);
    }
}

//! Numerical optimizers and curvature analysis: FIRE and L-BFGS
//! minimization, restricted-step partitioned-RFO saddle refinement,
//! finite-difference Hessians and vibrational mode counting.

mod fire;
mod hessian;
mod lbfgs;
mod prfo;

pub use fire::{fire_minimize, fire_nd, FireParams, FireStepper};
pub use hessian::{analyze_modes, analyze_modes_with, hessian_fd, HessianAnalysis, ModeEps};
pub use lbfgs::{lbfgs_minimize, lbfgs_nd, LbfgsStepper};
pub use prfo::{prfo_ts_optimize, PrfoParams};

use crate::geom::Geometry;
use crate::pes::{CalcError, Calculator};
use serde::{Deserialize, Serialize};

/// Convergence thresholds and step control shared by the optimizers.
/// The defaults are the documented "tight" profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptParams {
    /// Converged when the largest gradient component is at or below this,
    /// kcal/mol/Å.
    pub tol_max_grad: f64,
    /// ... and the RMS gradient is at or below this, kcal/mol/Å.
    pub tol_rms_grad: f64,
    /// Give up (converged = false) after this many cycles.
    pub max_cycles: usize,
    /// Largest per-atom displacement per step, Å.
    pub max_step: f64,
}

impl Default for OptParams {
    fn default() -> Self {
        OptParams {
            tol_max_grad: 2e-3,
            tol_rms_grad: 1e-3,
            max_cycles: 300,
            max_step: 0.2,
        }
    }
}

impl OptParams {
    pub fn with_max_cycles(mut self, n: usize) -> Self {
        self.max_cycles = n;
        self
    }

    pub fn converged(&self, grad: &[f64]) -> bool {
        crate::util::max_abs(grad) <= self.tol_max_grad
            && crate::util::rms(grad) <= self.tol_rms_grad
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum OptError {
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error("no negative curvature mode at the starting point")]
    NoNegativeMode,
    #[error("converged to a stationary point with {n_negative} negative modes, expected 1")]
    WrongCurvature { n_negative: usize },
}

/// Outcome of a geometry optimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptResult {
    pub geometry: Geometry,
    pub energy: f64,
    pub n_steps: usize,
    pub converged: bool,
    pub max_grad_component: f64,
    pub rms_grad: f64,
}

/// Result of a flat-vector optimization, before re-wrapping as a geometry.
#[derive(Debug, Clone)]
pub struct NdResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    pub n_steps: usize,
    pub converged: bool,
}

impl NdResult {
    pub fn into_opt_result(self, template: &Geometry) -> OptResult {
        OptResult {
            geometry: template.with_flat(&self.x),
            energy: self.value,
            n_steps: self.n_steps,
            converged: self.converged,
            max_grad_component: crate::util::max_abs(&self.grad),
            rms_grad: crate::util::rms(&self.grad),
        }
    }
}

/// Scale a proposed step so no atom (coordinate triple) moves farther than
/// `max_step`.
pub(crate) fn cap_step(step: &mut [f64], max_step: f64) {
    let mut worst = 0.0_f64;
    for atom in step.chunks(3) {
        worst = worst.max(atom.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    if worst > max_step && worst > 0.0 {
        let s = max_step / worst;
        for x in step.iter_mut() {
            *x *= s;
        }
    }
}

pub(crate) fn calc_objective<'a>(
    calc: &'a dyn Calculator,
    template: &'a Geometry,
) -> impl FnMut(&[f64]) -> Result<(f64, Vec<f64>), CalcError> + 'a {
    move |x: &[f64]| {
        let geom = template.with_flat(x);
        let (e, g) = calc.energy_gradient(&geom)?;
        let mut flat = Vec::with_capacity(3 * g.len());
        for row in &g {
            flat.extend_from_slice(row);
        }
        Ok((e, flat))
    }
}

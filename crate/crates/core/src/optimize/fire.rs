//! Fast Inertial Relaxation Engine.
//!
//! Velocity-mixing semi-implicit Euler with adaptive timestep: the velocity
//! is steered toward the force direction while the power F·v stays
//! positive, and reset (with a timestep cut) on uphill motion.

use super::{cap_step, calc_objective, NdResult, OptParams, OptResult};
use crate::geom::Geometry;
use crate::pes::{CalcError, Calculator};
use crate::util::{dot, norm};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FireParams {
    pub dt_start: f64,
    pub dt_max: f64,
    pub f_inc: f64,
    pub f_dec: f64,
    pub alpha_start: f64,
    pub f_alpha: f64,
    /// Downhill steps required before the timestep may grow.
    pub n_min: usize,
}

impl Default for FireParams {
    fn default() -> Self {
        FireParams {
            dt_start: 0.02,
            dt_max: 0.12,
            f_inc: 1.1,
            f_dec: 0.5,
            alpha_start: 0.1,
            f_alpha: 0.99,
            n_min: 5,
        }
    }
}

/// Minimize a flat-vector objective with FIRE. Returns the best visited
/// point, so the reported value never exceeds the starting value.
pub fn fire_nd<E>(
    mut f: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>), E>,
    x0: &[f64],
    params: &OptParams,
    fire: &FireParams,
) -> Result<NdResult, E> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut v = vec![0.0; n];
    let mut dt = fire.dt_start;
    let mut alpha = fire.alpha_start;
    let mut n_pos = 0usize;

    let (mut energy, mut grad) = f(&x)?;
    let mut best = NdResult {
        x: x.clone(),
        value: energy,
        grad: grad.clone(),
        n_steps: 0,
        converged: params.converged(&grad),
    };
    if best.converged {
        return Ok(best);
    }

    for step in 1..=params.max_cycles {
        // force is the negative gradient
        let force: Vec<f64> = grad.iter().map(|g| -g).collect();
        let power = dot(&force, &v);
        if power > 0.0 {
            let vn = norm(&v);
            let fn_ = norm(&force).max(1e-300);
            for k in 0..n {
                v[k] = (1.0 - alpha) * v[k] + alpha * vn * force[k] / fn_;
            }
            if n_pos > fire.n_min {
                dt = (dt * fire.f_inc).min(fire.dt_max);
                alpha *= fire.f_alpha;
            }
            n_pos += 1;
        } else {
            v.iter_mut().for_each(|vk| *vk = 0.0);
            dt *= fire.f_dec;
            alpha = fire.alpha_start;
            n_pos = 0;
        }
        for k in 0..n {
            v[k] += dt * force[k];
        }

        let mut dx: Vec<f64> = v.iter().map(|vk| vk * dt).collect();
        cap_step(&mut dx, params.max_step);
        for k in 0..n {
            x[k] += dx[k];
        }

        let (e, g) = f(&x)?;
        energy = e;
        grad = g;
        if energy < best.value {
            best.x.copy_from_slice(&x);
            best.value = energy;
            best.grad.copy_from_slice(&grad);
        }
        best.n_steps = step;
        if params.converged(&grad) {
            return Ok(NdResult {
                x,
                value: energy,
                grad,
                n_steps: step,
                converged: true,
            });
        }
    }

    best.converged = false;
    Ok(best)
}

/// FIRE minimization of a geometry under a calculator.
pub fn fire_minimize(
    calc: &dyn Calculator,
    g0: &Geometry,
    params: &OptParams,
) -> Result<OptResult, CalcError> {
    let fire = FireParams::default();
    let result = fire_nd(calc_objective(calc, g0), &g0.flat(), params, &fire)?;
    Ok(result.into_opt_result(g0))
}

/// Incremental FIRE stepper over an externally supplied force field, for
/// optimizers whose forces are not the gradient of any scalar (band
/// forces). Same interface as [`super::LbfgsStepper`].
pub struct FireStepper {
    params: FireParams,
    v: Vec<f64>,
    dt: f64,
    alpha: f64,
    n_pos: usize,
    max_step: f64,
}

impl FireStepper {
    pub fn new(max_step: f64) -> Self {
        let params = FireParams::default();
        FireStepper {
            dt: params.dt_start,
            alpha: params.alpha_start,
            v: Vec::new(),
            n_pos: 0,
            max_step,
            params,
        }
    }

    pub fn reset(&mut self) {
        self.v.clear();
        self.dt = self.params.dt_start;
        self.alpha = self.params.alpha_start;
        self.n_pos = 0;
    }

    /// Propose a displacement given the effective gradient (negative
    /// force).
    pub fn step(&mut self, grad: &[f64]) -> Vec<f64> {
        let n = grad.len();
        if self.v.len() != n {
            self.v = vec![0.0; n];
        }
        let force: Vec<f64> = grad.iter().map(|g| -g).collect();
        let power = dot(&force, &self.v);
        if power > 0.0 {
            let vn = norm(&self.v);
            let fn_ = norm(&force).max(1e-300);
            for k in 0..n {
                self.v[k] = (1.0 - self.alpha) * self.v[k] + self.alpha * vn * force[k] / fn_;
            }
            if self.n_pos > self.params.n_min {
                self.dt = (self.dt * self.params.f_inc).min(self.params.dt_max);
                self.alpha *= self.params.f_alpha;
            }
            self.n_pos += 1;
        } else {
            self.v.iter_mut().for_each(|vk| *vk = 0.0);
            self.dt *= self.params.f_dec;
            self.alpha = self.params.alpha_start;
            self.n_pos = 0;
        }
        for k in 0..n {
            self.v[k] += self.dt * force[k];
        }
        let mut dx: Vec<f64> = self.v.iter().map(|vk| vk * self.dt).collect();
        cap_step(&mut dx, self.max_step);
        dx
    }
}

//! Limited-memory BFGS with backtracking line search, plus a line-search-free
//! stepper used by the band optimizer where forces are not a gradient.

use super::{cap_step, calc_objective, NdResult, OptParams, OptResult};
use crate::geom::Geometry;
use crate::pes::{CalcError, Calculator};
use crate::util::dot;
use std::collections::VecDeque;

const HISTORY: usize = 10;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 30;

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: approximate -H*g from the stored history.
fn two_loop(history: &VecDeque<Pair>, grad: &[f64]) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for pair in history.iter().rev() {
        let a = pair.rho * dot(&pair.s, &q);
        for k in 0..q.len() {
            q[k] -= a * pair.y[k];
        }
        alphas.push(a);
    }
    // initial inverse-Hessian scaling from the most recent pair
    if let Some(last) = history.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y).max(1e-300);
        q.iter_mut().for_each(|x| *x *= gamma);
    }
    for (pair, a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = pair.rho * dot(&pair.y, &q);
        for k in 0..q.len() {
            q[k] += (a - b) * pair.s[k];
        }
    }
    q.iter_mut().for_each(|x| *x = -*x);
    q
}

/// Minimize a flat-vector objective with L-BFGS. A non-descending proposal
/// triggers a history reset and backtracking, so the accepted energy never
/// rises.
pub fn lbfgs_nd<E>(
    mut f: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>), E>,
    x0: &[f64],
    params: &OptParams,
) -> Result<NdResult, E> {
    let mut x = x0.to_vec();
    let (mut energy, mut grad) = f(&x)?;
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(HISTORY);

    if params.converged(&grad) {
        return Ok(NdResult {
            x,
            value: energy,
            grad,
            n_steps: 0,
            converged: true,
        });
    }

    for step in 1..=params.max_cycles {
        let mut dir = two_loop(&history, &grad);
        if dot(&dir, &grad) >= 0.0 {
            history.clear();
            dir = grad.iter().map(|g| -g).collect();
        }
        cap_step(&mut dir, params.max_step);

        // Armijo backtracking
        let slope = dot(&dir, &grad);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let xt: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
            let (et, gt) = f(&xt)?;
            if et <= energy + ARMIJO_C1 * t * slope {
                accepted = Some((xt, et, gt, t));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, en, gn, t)) = accepted else {
            // line search failed along this direction: drop the history and
            // stop if the steepest direction cannot make progress either
            if history.is_empty() {
                return Ok(NdResult {
                    x,
                    value: energy,
                    grad,
                    n_steps: step,
                    converged: false,
                });
            }
            history.clear();
            continue;
        };

        let s: Vec<f64> = dir.iter().map(|d| d * t).collect();
        let y: Vec<f64> = gn.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == HISTORY {
                history.pop_front();
            }
            history.push_back(Pair { s, y, rho: 1.0 / sy });
        }

        x = xn;
        energy = en;
        grad = gn;
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

    Ok(NdResult {
        x,
        value: energy,
        grad,
        n_steps: params.max_cycles,
        converged: false,
    })
}

/// L-BFGS minimization of a geometry under a calculator. History length 10,
/// per-atom step cap from `params.max_step` (default 0.2 Å).
pub fn lbfgs_minimize(
    calc: &dyn Calculator,
    g0: &Geometry,
    params: &OptParams,
) -> Result<OptResult, CalcError> {
    let result = lbfgs_nd(calc_objective(calc, g0), &g0.flat(), params)?;
    Ok(result.into_opt_result(g0))
}

/// History-based quasi-Newton stepper for force fields that are not the
/// gradient of any scalar (projected band forces). No line search; steps are
/// trust-capped and the history pair is skipped unless it has positive
/// curvature.
pub struct LbfgsStepper {
    history: VecDeque<Pair>,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    max_step: f64,
}

impl LbfgsStepper {
    pub fn new(max_step: f64) -> Self {
        LbfgsStepper {
            history: VecDeque::with_capacity(HISTORY),
            prev: None,
            max_step,
        }
    }

    pub fn reset(&mut self) {
        self.history.clear();
        self.prev = None;
    }

    /// Propose a displacement for the given position and effective gradient
    /// (negative force).
    pub fn step(&mut self, x: &[f64], grad: &[f64]) -> Vec<f64> {
        if let Some((px, pg)) = &self.prev {
            let s: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = grad.iter().zip(pg).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 {
                if self.history.len() == HISTORY {
                    self.history.pop_front();
                }
                self.history.push_back(Pair { s, y, rho: 1.0 / sy });
            }
        }
        self.prev = Some((x.to_vec(), grad.to_vec()));

        let mut dir = two_loop(&self.history, grad);
        if dot(&dir, grad) >= 0.0 {
            self.history.clear();
            dir = grad.iter().map(|g| -g).collect();
        }
        cap_step(&mut dir, self.max_step);
        dir
    }
}

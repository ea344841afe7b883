//! Climbing-image nudged elastic band with improved tangents.
//!
//! Interior images feel the spring force along the path tangent plus the
//! true force perpendicular to it. Once the band is roughly converged the
//! highest image switches to climbing: springs removed, tangent-parallel
//! true force inverted, so it ascends to the saddle along the path.

use super::Band;
use crate::optimize::{FireStepper, LbfgsStepper};
use crate::pes::{CalcError, Calculator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which stepper drives the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandOptimizer {
    Lbfgs,
    Fire,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NebParams {
    /// Converged when the largest band-force component is at or below
    /// this, kcal/mol/Å.
    pub tol_force: f64,
    pub max_iter: usize,
    /// Climbing activates when the force metric drops below
    /// `climb_factor * tol_force`.
    pub climb_factor: f64,
    /// Per-atom displacement cap per iteration, Å.
    pub max_step: f64,
    pub optimizer: BandOptimizer,
}

impl Default for NebParams {
    fn default() -> Self {
        NebParams {
            tol_force: 0.1,
            max_iter: 1500,
            climb_factor: 10.0,
            max_step: 0.1,
            optimizer: BandOptimizer::Fire,
        }
    }
}

enum Stepper {
    Lbfgs(LbfgsStepper),
    Fire(FireStepper),
}

impl Stepper {
    fn new(params: &NebParams) -> Stepper {
        match params.optimizer {
            BandOptimizer::Lbfgs => Stepper::Lbfgs(LbfgsStepper::new(params.max_step)),
            BandOptimizer::Fire => Stepper::Fire(FireStepper::new(params.max_step)),
        }
    }

    fn reset(&mut self) {
        match self {
            Stepper::Lbfgs(s) => s.reset(),
            Stepper::Fire(s) => s.reset(),
        }
    }

    fn step(&mut self, x: &[f64], grad: &[f64]) -> Vec<f64> {
        match self {
            Stepper::Lbfgs(s) => s.step(x, grad),
            Stepper::Fire(s) => s.step(grad),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NebOutcome {
    pub band: Band,
    pub converged: bool,
    pub n_iter: usize,
    /// Largest band-force component at exit.
    pub max_force: f64,
}

/// Optimize a band under a calculator. Endpoints never move; their energies
/// are evaluated once. Returns the best band seen when the iteration budget
/// runs out (`converged = false`).
pub fn cineb(calc: &dyn Calculator, band: Band, params: &NebParams) -> Result<NebOutcome, CalcError> {
    let n = band.n_images();
    let natoms = band.images[0].natoms();
    let dof = 3 * natoms;
    let mut band = band;

    let e_first = calc.energy(&band.images[0])?;
    let e_last = calc.energy(&band.images[n - 1])?;

    let mut stepper = Stepper::new(params);
    let mut climbing = false;
    let mut best: Option<(f64, Band)> = None;

    for iter in 0..params.max_iter {
        // per-image energies and forces for the interior
        let evals: Vec<(f64, Vec<f64>)> = band.images[1..n - 1]
            .par_iter()
            .map(|g| {
                let (e, grad) = calc.energy_gradient(g)?;
                let force: Vec<f64> = grad.iter().flat_map(|r| r.iter().map(|x| -x)).collect();
                Ok((e, force))
            })
            .collect::<Result<_, CalcError>>()?;

        let mut energies = Vec::with_capacity(n);
        energies.push(e_first);
        energies.extend(evals.iter().map(|(e, _)| *e));
        energies.push(e_last);
        band.energies = energies;

        if climbing {
            band.climbing_index = Some(interior_argmax(&band.energies));
        }

        let forces = band_forces(&band, &evals);
        let max_force = forces
            .iter()
            .flat_map(|f| f.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()));

        if best.as_ref().is_none_or(|(bf, _)| max_force < *bf) {
            best = Some((max_force, band.clone()));
        }

        if max_force <= params.tol_force {
            if climbing {
                return Ok(NebOutcome {
                    band,
                    converged: true,
                    n_iter: iter,
                    max_force,
                });
            }
            // converged the plain band: turn on climbing and keep going
            climbing = true;
            band.climbing_index = Some(interior_argmax(&band.energies));
            stepper.reset();
            continue;
        }
        if !climbing && max_force <= params.climb_factor * params.tol_force {
            climbing = true;
            band.climbing_index = Some(interior_argmax(&band.energies));
            stepper.reset();
        }

        // stack interior coordinates, step on the negative band force
        let mut x = Vec::with_capacity((n - 2) * dof);
        for img in &band.images[1..n - 1] {
            x.extend(img.flat());
        }
        let neg_force: Vec<f64> = forces.iter().flatten().map(|f| -f).collect();
        let dx = stepper.step(&x, &neg_force);
        for (k, img) in band.images[1..n - 1].iter_mut().enumerate() {
            let flat: Vec<f64> = x[k * dof..(k + 1) * dof]
                .iter()
                .zip(&dx[k * dof..(k + 1) * dof])
                .map(|(a, b)| a + b)
                .collect();
            *img = img.with_flat(&flat);
        }
    }

    let (max_force, band) = best.expect("at least one iteration ran");
    Ok(NebOutcome {
        band,
        converged: false,
        n_iter: params.max_iter,
        max_force,
    })
}

fn interior_argmax(energies: &[f64]) -> usize {
    let n = energies.len();
    (1..n - 1)
        .max_by(|&a, &b| energies[a].total_cmp(&energies[b]))
        .expect("interior images exist")
}

/// Band forces for the interior images, given their true (energy, force)
/// evaluations. Exposed for post-hoc convergence verification.
pub fn neb_forces(calc: &dyn Calculator, band: &Band) -> Result<Vec<Vec<f64>>, CalcError> {
    let n = band.n_images();
    let evals: Vec<(f64, Vec<f64>)> = band.images[1..n - 1]
        .iter()
        .map(|g| {
            let (e, grad) = calc.energy_gradient(g)?;
            let force: Vec<f64> = grad.iter().flat_map(|r| r.iter().map(|x| -x)).collect();
            Ok((e, force))
        })
        .collect::<Result<_, CalcError>>()?;
    Ok(band_forces(band, &evals))
}

/// Improved-tangent NEB forces (spring along tangent, true force
/// perpendicular; climbing image sees the inverted parallel true force and
/// no spring).
fn band_forces(band: &Band, interior: &[(f64, Vec<f64>)]) -> Vec<Vec<f64>> {
    let n = band.n_images();
    let energies = &band.energies;
    let flat: Vec<Vec<f64>> = band.images.iter().map(|g| g.flat()).collect();

    let mut out = Vec::with_capacity(n - 2);
    for idx in 1..n - 1 {
        let tau = improved_tangent(&flat, energies, idx);
        let true_force = &interior[idx - 1].1;
        let f_par = crate::util::dot(true_force, &tau);

        let force: Vec<f64> = if band.climbing_index == Some(idx) {
            // full true force with the parallel component inverted
            true_force
                .iter()
                .zip(&tau)
                .map(|(f, t)| f - 2.0 * f_par * t)
                .collect()
        } else {
            let d_next = dist(&flat[idx + 1], &flat[idx]);
            let d_prev = dist(&flat[idx], &flat[idx - 1]);
            let spring = band.spring_k * (d_next - d_prev);
            true_force
                .iter()
                .zip(&tau)
                .map(|(f, t)| f - f_par * t + spring * t)
                .collect()
        };
        out.push(force);
    }
    out
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Energy-weighted upwind tangent (the improved-tangent rule).
fn improved_tangent(flat: &[Vec<f64>], energies: &[f64], idx: usize) -> Vec<f64> {
    let dof = flat[0].len();
    let next: Vec<f64> = (0..dof).map(|k| flat[idx + 1][k] - flat[idx][k]).collect();
    let prev: Vec<f64> = (0..dof).map(|k| flat[idx][k] - flat[idx - 1][k]).collect();
    let (e_prev, e_this, e_next) = (energies[idx - 1], energies[idx], energies[idx + 1]);

    let mut tau: Vec<f64> = if e_next > e_this && e_this > e_prev {
        next
    } else if e_next < e_this && e_this < e_prev {
        prev
    } else {
        let d_max = (e_next - e_this).abs().max((e_prev - e_this).abs());
        let d_min = (e_next - e_this).abs().min((e_prev - e_this).abs());
        if e_next > e_prev {
            (0..dof).map(|k| next[k] * d_max + prev[k] * d_min).collect()
        } else {
            (0..dof).map(|k| next[k] * d_min + prev[k] * d_max).collect()
        }
    };
    let norm = crate::util::norm(&tau).max(1e-300);
    tau.iter_mut().for_each(|t| *t /= norm);
    tau
}

//! The calculator contract and its shipped implementations.
//!
//! A [`Calculator`] provides energies (kcal/mol) and gradients (kcal/mol/Å)
//! for geometries. Implementations must be deterministic and
//! gradient-consistent: central finite differences of the energy reproduce
//! the gradient. Shipped calculators: analytic 2-D verification surfaces,
//! the reactive screened-Morse molecular surrogate, and a line-protocol
//! bridge to external backend processes.

mod external;
mod morse;
mod surfaces;

pub use external::{serve_backend, BackendMode, ExternalCalculator, ExternalError};
pub use morse::{morse_energy, morse_energy_gradient, MorseSurrogate};
pub use surfaces::{muller_brown, Surface2D, MULLER_BROWN_PARAMS};

use crate::geom::Geometry;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub type Gradient = Vec<[f64; 3]>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum CalcError {
    #[error("atoms {i} and {j} are coincident (r = {r:.2e} Å)")]
    CoincidentAtoms { i: usize, j: usize, r: f64 },
    #[error("calculator expects {expected} atoms, geometry has {actual}")]
    WrongAtomCount { expected: usize, actual: usize },
    #[error("backend crashed: {0}")]
    BackendCrashed(String),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("backend response timed out after {0:.1} s")]
    TimeoutExceeded(f64),
    #[error("{0}")]
    Other(String),
}

/// Energy and gradient provider. Implementations are stateless with respect
/// to geometries and shareable across threads.
pub trait Calculator: Send + Sync {
    fn energy(&self, geom: &Geometry) -> Result<f64, CalcError>;

    fn gradient(&self, geom: &Geometry) -> Result<Gradient, CalcError>;

    /// Combined evaluation; override when one pass yields both.
    fn energy_gradient(&self, geom: &Geometry) -> Result<(f64, Gradient), CalcError> {
        Ok((self.energy(geom)?, self.gradient(geom)?))
    }

    /// Whether an analytic Hessian is available (none of the shipped
    /// calculators provide one; finite differences are used instead).
    fn has_analytic_hessian(&self) -> bool {
        false
    }
}

impl Calculator for Box<dyn Calculator> {
    fn energy(&self, geom: &Geometry) -> Result<f64, CalcError> {
        (**self).energy(geom)
    }
    fn gradient(&self, geom: &Geometry) -> Result<Gradient, CalcError> {
        (**self).gradient(geom)
    }
    fn energy_gradient(&self, geom: &Geometry) -> Result<(f64, Gradient), CalcError> {
        (**self).energy_gradient(geom)
    }
    fn has_analytic_hessian(&self) -> bool {
        (**self).has_analytic_hessian()
    }
}

impl<C: Calculator + ?Sized> Calculator for &C {
    fn energy(&self, geom: &Geometry) -> Result<f64, CalcError> {
        (**self).energy(geom)
    }
    fn gradient(&self, geom: &Geometry) -> Result<Gradient, CalcError> {
        (**self).gradient(geom)
    }
    fn energy_gradient(&self, geom: &Geometry) -> Result<(f64, Gradient), CalcError> {
        (**self).energy_gradient(geom)
    }
    fn has_analytic_hessian(&self) -> bool {
        (**self).has_analytic_hessian()
    }
}

/// Wrapper that counts evaluations, for budget enforcement and audits.
/// The counter is shared, so budget checks can watch it while the
/// calculator is borrowed elsewhere.
pub struct CountingCalculator<C> {
    inner: C,
    calls: Arc<AtomicU64>,
}

impl<C: Calculator> CountingCalculator<C> {
    pub fn new(inner: C) -> Self {
        CountingCalculator {
            inner,
            calls: Arc::new(AtomicU64::new(0)),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    /// Shared handle to the evaluation counter.
    pub fn counter(&self) -> Arc<AtomicU64> {
        Arc::clone(&self.calls)
    }

    pub fn into_inner(self) -> C {
        self.inner
    }
}

impl<C: Calculator> Calculator for CountingCalculator<C> {
    fn energy(&self, geom: &Geometry) -> Result<f64, CalcError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.energy(geom)
    }
    fn gradient(&self, geom: &Geometry) -> Result<Gradient, CalcError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(geom)
    }
    fn energy_gradient(&self, geom: &Geometry) -> Result<(f64, Gradient), CalcError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.energy_gradient(geom)
    }
    fn has_analytic_hessian(&self) -> bool {
        self.inner.has_analytic_hessian()
    }
}

/// Check gradient consistency against central finite differences of the
/// energy. Returns the worst relative error over all components.
pub fn gradient_fd_error(
    calc: &dyn Calculator,
    geom: &Geometry,
    step: f64,
) -> Result<f64, CalcError> {
    let analytic = calc.gradient(geom)?;
    let mut flat = geom.flat();
    let scale = analytic
        .iter()
        .flat_map(|g| g.iter())
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(1.0);
    let mut worst = 0.0_f64;
    for k in 0..flat.len() {
        let orig = flat[k];
        flat[k] = orig + step;
        let ep = calc.energy(&geom.with_flat(&flat))?;
        flat[k] = orig - step;
        let em = calc.energy(&geom.with_flat(&flat))?;
        flat[k] = orig;
        let fd = (ep - em) / (2.0 * step);
        let a = analytic[k / 3][k % 3];
        worst = worst.max((fd - a).abs() / scale);
    }
    Ok(worst)
}

/// Wrapper that records every evaluated geometry with its energy, for
/// optimizer trajectory dumps.
pub struct TracingCalculator<C> {
    inner: C,
    trace: std::sync::Mutex<Vec<(Geometry, f64)>>,
}

impl<C: Calculator> TracingCalculator<C> {
    pub fn new(inner: C) -> Self {
        TracingCalculator {
            inner,
            trace: std::sync::Mutex::new(Vec::new()),
        }
    }

    /// The visited geometries as a multi-frame XYZ document.
    pub fn trajectory_xyz(&self) -> String {
        let trace = self.trace.lock().expect("trace lock");
        crate::geom::write_xyz_frames(
            trace
                .iter()
                .enumerate()
                .map(|(i, (g, e))| (g, format!("frame {i} energy {e:.8} kcal/mol"))),
        )
    }

    pub fn n_frames(&self) -> usize {
        self.trace.lock().expect("trace lock").len()
    }
}

impl<C: Calculator> Calculator for TracingCalculator<C> {
    fn energy(&self, geom: &Geometry) -> Result<f64, CalcError> {
        let e = self.inner.energy(geom)?;
        self.trace.lock().expect("trace lock").push((geom.clone(), e));
        Ok(e)
    }

    fn gradient(&self, geom: &Geometry) -> Result<Gradient, CalcError> {
        self.inner.gradient(geom)
    }

    fn energy_gradient(&self, geom: &Geometry) -> Result<(f64, Gradient), CalcError> {
        let (e, g) = self.inner.energy_gradient(geom)?;
        self.trace.lock().expect("trace lock").push((geom.clone(), e));
        Ok((e, g))
    }

    fn has_analytic_hessian(&self) -> bool {
        self.inner.has_analytic_hessian()
    }
}

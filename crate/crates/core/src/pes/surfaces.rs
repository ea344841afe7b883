//! Analytic 2-D verification surfaces.
//!
//! Each surface is a [`Calculator`] over a single-atom geometry whose x and
//! y coordinates are the surface variables; the z gradient is identically
//! zero. These exist to verify the optimizers and path machinery against
//! grid oracles, not to model chemistry. Energies are treated as kcal/mol
//! for unit consistency.

use super::{CalcError, Calculator, Gradient};
use crate::geom::Geometry;
use serde::{Deserialize, Serialize};

/// Four-term Gaussian parameter set of the Müller-Brown surface, in the form
/// `E = sum_k A_k exp(a_k dx^2 + b_k dx dy + c_k dy^2)` with
/// `dx = x - x0_k`, `dy = y - y0_k`. Treated as configuration; the stationary
/// points asserted in tests come from a grid oracle, not from this table.
pub const MULLER_BROWN_PARAMS: [[f64; 6]; 4] = [
    // A, a, b, c, x0, y0
    [-200.0, -1.0, 0.0, -10.0, 1.0, 0.0],
    [-100.0, -1.0, 0.0, -10.0, 0.0, 0.5],
    [-170.0, -6.5, 11.0, -6.5, -0.5, 1.5],
    [15.0, 0.7, 0.6, 0.7, -1.0, 1.0],
];

/// Müller-Brown energy and gradient at a point.
pub fn muller_brown(x: f64, y: f64) -> (f64, [f64; 2]) {
    let mut e = 0.0;
    let mut gx = 0.0;
    let mut gy = 0.0;
    for [big_a, a, b, c, x0, y0] in MULLER_BROWN_PARAMS {
        let dx = x - x0;
        let dy = y - y0;
        let term = big_a * (a * dx * dx + b * dx * dy + c * dy * dy).exp();
        e += term;
        gx += term * (2.0 * a * dx + b * dy);
        gy += term * (b * dx + 2.0 * c * dy);
    }
    (e, [gx, gy])
}

/// A 2-D analytic test surface embedded as a one-atom calculator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Surface2D {
    MullerBrown,
    /// `0.5 (x^2 + y^2)`, minimum at the origin.
    QuadraticBowl,
    /// `(1 - x)^2 + 100 (y - x^2)^2`, minimum at (1, 1).
    Rosenbrock,
    /// `x^2 - y^2`, saddle at the origin.
    SaddleQuad,
    /// `(x^2 - 1)^2 + y^2`, minima at (±1, 0), saddle at the origin.
    DoubleWell,
}

impl Surface2D {
    pub fn eval(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        match self {
            Surface2D::MullerBrown => muller_brown(x, y),
            Surface2D::QuadraticBowl => (0.5 * (x * x + y * y), [x, y]),
            Surface2D::Rosenbrock => {
                let e = (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2);
                let gx = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
                let gy = 200.0 * (y - x * x);
                (e, [gx, gy])
            }
            Surface2D::SaddleQuad => (x * x - y * y, [2.0 * x, -2.0 * y]),
            Surface2D::DoubleWell => {
                let e = (x * x - 1.0).powi(2) + y * y;
                (e, [4.0 * x * (x * x - 1.0), 2.0 * y])
            }
        }
    }

    /// Wrap a surface point as the one-atom geometry the calculator expects.
    pub fn point(x: f64, y: f64) -> Geometry {
        Geometry::new(vec![crate::elements::Element::H], vec![[x, y, 0.0]])
    }

    pub fn coords(geom: &Geometry) -> (f64, f64) {
        (geom.coords[0][0], geom.coords[0][1])
    }
}

impl Calculator for Surface2D {
    fn energy(&self, geom: &Geometry) -> Result<f64, CalcError> {
        if geom.natoms() != 1 {
            return Err(CalcError::WrongAtomCount {
                expected: 1,
                actual: geom.natoms(),
            });
        }
        let [x, y, _] = geom.coords[0];
        Ok(self.eval(x, y).0)
    }

    fn gradient(&self, geom: &Geometry) -> Result<Gradient, CalcError> {
        if geom.natoms() != 1 {
            return Err(CalcError::WrongAtomCount {
                expected: 1,
                actual: geom.natoms(),
            });
        }
        let [x, y, _] = geom.coords[0];
        let (_, [gx, gy]) = self.eval(x, y);
        Ok(vec![[gx, gy, 0.0]])
    }
}

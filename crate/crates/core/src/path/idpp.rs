//! Image-dependent pair potential interpolation.
//!
//! Each interior image relaxes toward pair distances linearly interpolated
//! between the endpoint distance matrices, weighted 1/d^4 so short contacts
//! dominate. The result is a chemically plausible initial band; the
//! exact-path work belongs to the band optimizer.

use super::Band;
use crate::geom::Geometry;
use crate::optimize::{fire_nd, FireParams, OptParams};

#[derive(Debug, Clone)]
pub struct IdppResult {
    pub band: Band,
    /// True when relaxation diverged and the band fell back to linear
    /// interpolation.
    pub fallback: bool,
}

/// Interpolate `n_images` total images (endpoints included, preserved
/// bitwise) between two geometries.
pub fn idpp_interpolate(a: &Geometry, b: &Geometry, n_images: usize, spring_k: f64) -> IdppResult {
    assert_eq!(a.elements, b.elements, "endpoints must share element lists");
    let n_images = n_images.max(3);
    let natoms = a.natoms();

    let fa = a.flat();
    let fb = b.flat();
    let linear: Vec<Vec<f64>> = (0..n_images)
        .map(|k| {
            let t = k as f64 / (n_images - 1) as f64;
            fa.iter().zip(&fb).map(|(x, y)| x + t * (y - x)).collect()
        })
        .collect();

    // endpoint distance matrices
    let dist = |g: &Geometry| {
        let mut d = vec![0.0; natoms * natoms];
        for i in 0..natoms {
            for j in (i + 1)..natoms {
                let r = g.distance(i, j);
                d[i * natoms + j] = r;
                d[j * natoms + i] = r;
            }
        }
        d
    };
    let da = dist(a);
    let db = dist(b);

    let mut images = Vec::with_capacity(n_images);
    let mut fallback = false;
    images.push(a.clone());
    for (k, start) in linear.iter().enumerate().take(n_images - 1).skip(1) {
        let t = k as f64 / (n_images - 1) as f64;
        let targets: Vec<f64> = da.iter().zip(&db).map(|(x, y)| x + t * (y - x)).collect();
        match relax_image(start, natoms, &targets) {
            Some(x) => images.push(a.with_flat(&x)),
            None => {
                fallback = true;
                images.push(a.with_flat(start));
            }
        }
    }
    images.push(b.clone());

    IdppResult {
        band: Band::new(images, spring_k),
        fallback,
    }
}

/// IDPP objective for one image: sum over pairs of (d_target - d)^2 / d^4,
/// with analytic gradient.
pub(crate) fn idpp_objective(x: &[f64], natoms: usize, targets: &[f64]) -> (f64, Vec<f64>) {
    let mut e = 0.0;
    let mut grad = vec![0.0; x.len()];
    for i in 0..natoms {
        for j in (i + 1)..natoms {
            let dx = [
                x[3 * i] - x[3 * j],
                x[3 * i + 1] - x[3 * j + 1],
                x[3 * i + 2] - x[3 * j + 2],
            ];
            let r = (dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]).sqrt().max(1e-6);
            let t = targets[i * natoms + j];
            let diff = t - r;
            let w = r.powi(-4);
            e += w * diff * diff;
            // dE/dr = -2 w diff - 4 diff^2 / r^5
            let dedr = -2.0 * w * diff - 4.0 * diff * diff * r.powi(-5);
            let f = dedr / r;
            for c in 0..3 {
                grad[3 * i + c] += f * dx[c];
                grad[3 * j + c] -= f * dx[c];
            }
        }
    }
    (e, grad)
}

fn relax_image(start: &[f64], natoms: usize, targets: &[f64]) -> Option<Vec<f64>> {
    let params = OptParams {
        tol_max_grad: 5e-4,
        tol_rms_grad: 2e-4,
        max_cycles: 700,
        max_step: 0.1,
    };
    let f = |x: &[f64]| Ok::<_, std::convert::Infallible>(idpp_objective(x, natoms, targets));
    let (e0, _) = idpp_objective(start, natoms, targets);
    let res = fire_nd(f, start, &params, &FireParams::default()).unwrap();
    let ok = res.x.iter().all(|v| v.is_finite()) && res.value <= e0 + 1e-12;
    ok.then_some(res.x)
}

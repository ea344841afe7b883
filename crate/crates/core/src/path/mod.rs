//! Minimum-energy-path machinery: IDPP interpolation, climbing-image NEB,
//! IRC descent, transition-state deduplication, and the double-ended
//! search driver that chains them.

mod idpp;
mod irc;
mod neb;

pub use idpp::{idpp_interpolate, IdppResult};
pub use irc::{irc_descend, IrcOutcome, IrcParams};
pub use neb::{cineb, neb_forces, BandOptimizer, NebOutcome, NebParams};

use crate::geom::{kabsch_rmsd, Geometry};
use crate::molgraph::{perceive_graph, PerceiveError};
use crate::optimize::{analyze_modes, hessian_fd, OptError, OptResult, PrfoParams};
use crate::pes::{CalcError, Calculator};
use serde::{Deserialize, Serialize};

/// A chain of images between two endpoint geometries. Endpoints are
/// immutable during band optimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Band {
    pub images: Vec<Geometry>,
    /// Per-image energies, kcal/mol; filled by the band optimizer.
    pub energies: Vec<f64>,
    /// Spring constant, kcal/mol/Å².
    pub spring_k: f64,
    /// The climbing image, once activated: always the argmax-energy
    /// interior image.
    pub climbing_index: Option<usize>,
}

impl Band {
    pub fn new(images: Vec<Geometry>, spring_k: f64) -> Band {
        assert!(images.len() >= 3, "a band needs at least 3 images");
        Band {
            images,
            energies: Vec::new(),
            spring_k,
            climbing_index: None,
        }
    }

    pub fn n_images(&self) -> usize {
        self.images.len()
    }

    /// Index of the highest-energy image (requires computed energies).
    pub fn highest_index(&self) -> usize {
        self.energies
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("band has energies")
    }

    /// Multi-frame XYZ dump plus a tab-separated per-image energy table.
    pub fn dump(&self) -> (String, String) {
        let frames = self
            .images
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let e = self.energies.get(i).copied().unwrap_or(f64::NAN);
                (g, format!("image {i} energy {e:.8} kcal/mol"))
            })
            .collect::<Vec<_>>();
        let xyz = crate::geom::write_xyz_frames(frames.iter().map(|(g, c)| (*g, c.clone())));
        let mut table = String::from("image\tenergy_kcal_mol\n");
        for (i, e) in self.energies.iter().enumerate() {
            table.push_str(&format!("{i}\t{e:.8}\n"));
        }
        (xyz, table)
    }
}

/// One refined, verified (or not) reaction path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathResult {
    pub band: Band,
    /// The highest band image that seeded refinement.
    pub ts_guess: Geometry,
    pub ts_refined: OptResult,
    /// TS energy minus reactant-endpoint energy, kcal/mol.
    pub barrier_fwd: f64,
    /// TS energy minus product-endpoint energy, kcal/mol.
    pub barrier_rev: f64,
    pub irc_forward_key: String,
    pub irc_backward_key: String,
    /// True when the TS refined to a single negative mode and the IRC
    /// endpoints match the intended reactant and product.
    pub verified: bool,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum PathError {
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error("transition state refinement failed: {0}")]
    TsRefinement(#[from] OptError),
    #[error("transition state refinement did not converge")]
    TsUnconverged,
    #[error("IRC descent stalled before reaching a minimum basin")]
    DescentStalled,
    #[error("IRC endpoint perception failed: {0}")]
    EndpointPerception(#[from] PerceiveError),
}

/// A failed search, with whatever band was optimized before the failure so
/// partial artifacts can be retained.
#[derive(Debug)]
pub struct PathFailure {
    pub error: PathError,
    pub band: Option<Band>,
}

impl std::fmt::Display for PathFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl From<PathError> for PathFailure {
    fn from(error: PathError) -> Self {
        PathFailure { error, band: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathParams {
    /// Total image count, endpoints included.
    pub n_images: usize,
    /// Spring constant, kcal/mol/Å².
    pub spring_k: f64,
    /// Changing-pair stretch factor for the mid-exchange seed geometry.
    pub exchange_stretch: f64,
    pub neb: NebParams,
    pub prfo: PrfoParams,
    pub irc: IrcParams,
    /// Bond perception cutoff scale for endpoint identification.
    pub perception_scale: f64,
}

impl Default for PathParams {
    fn default() -> Self {
        PathParams {
            n_images: 20,
            spring_k: 25.0,
            exchange_stretch: 1.25,
            neb: NebParams::default(),
            prfo: PrfoParams::default(),
            irc: IrcParams::default(),
            perception_scale: crate::molgraph::DEFAULT_PERCEPTION_SCALE,
        }
    }
}

/// Double-ended search: IDPP guess, CI-NEB, P-RFO refinement with a
/// single-imaginary-mode check, then IRC confirmation of the endpoint
/// identities. `intended` carries the canonical keys the IRC endpoints
/// must reproduce (reactant, product) for the path to verify. When a
/// mid-exchange `seed` geometry is supplied the interpolation runs through
/// it, which keeps the band in the concerted channel.
///
/// An unconverged band is not fatal: the saddle refinement and IRC are the
/// binding checks, so the search proceeds from the best band found.
pub fn find_path(
    calc: &dyn Calculator,
    reactant: &Geometry,
    product: &Geometry,
    seed: Option<&Geometry>,
    intended: (&str, &str),
    params: &PathParams,
) -> Result<PathResult, PathFailure> {
    let band = match seed {
        None => idpp_interpolate(reactant, product, params.n_images, params.spring_k).band,
        Some(mid) => {
            let n1 = params.n_images / 2 + 1;
            let n2 = params.n_images - n1 + 1;
            let first = idpp_interpolate(reactant, mid, n1, params.spring_k).band;
            let second = idpp_interpolate(mid, product, n2, params.spring_k).band;
            let mut images = first.images;
            images.extend(second.images.into_iter().skip(1));
            Band::new(images, params.spring_k)
        }
    };
    let outcome = cineb(calc, band, &params.neb).map_err(PathError::Calc)?;
    let band = outcome.band;
    let fail = |error: PathError, band: &Band| PathFailure {
        error,
        band: Some(band.clone()),
    };
    let hi = band.highest_index();
    let ts_guess = band.images[hi].clone();

    let ts_refined = crate::optimize::prfo_ts_optimize(calc, &ts_guess, &params.prfo)
        .map_err(|e| fail(e.into(), &band))?;
    if !ts_refined.converged {
        return Err(fail(PathError::TsUnconverged, &band));
    }

    let masses = ts_refined.geometry.masses();
    let hessian = hessian_fd(calc, &ts_refined.geometry)
        .map_err(|e| fail(PathError::Calc(e), &band))?;
    let analysis = analyze_modes(&hessian, &masses, &ts_refined.geometry);
    if analysis.n_negative != 1 {
        return Err(fail(
            PathError::TsRefinement(OptError::WrongCurvature {
                n_negative: analysis.n_negative,
            }),
            &band,
        ));
    }

    let irc = irc_descend(
        calc,
        &ts_refined.geometry,
        &analysis.imaginary_mode,
        &masses,
        &params.irc,
    )
    .map_err(|e| fail(e, &band))?;

    let fwd_key = perceive_graph(&irc.forward.geometry, params.perception_scale)
        .map(|g| g.canonical_key())
        .unwrap_or_else(|e| format!("unperceivable:{e}"));
    let bwd_key = perceive_graph(&irc.backward.geometry, params.perception_scale)
        .map(|g| g.canonical_key())
        .unwrap_or_else(|e| format!("unperceivable:{e}"));

    let wanted = {
        let mut v = [intended.0.to_string(), intended.1.to_string()];
        v.sort();
        v
    };
    let got = {
        let mut v = [fwd_key.clone(), bwd_key.clone()];
        v.sort();
        v
    };
    let verified = wanted == got;

    let e_react = band.energies[0];
    let e_prod = *band.energies.last().unwrap();
    Ok(PathResult {
        ts_guess,
        barrier_fwd: ts_refined.energy - e_react,
        barrier_rev: ts_refined.energy - e_prod,
        irc_forward_key: fwd_key,
        irc_backward_key: bwd_key,
        verified,
        ts_refined,
        band,
    })
}

/// Collapse transition states of one reaction that lie within 0.5 Å RMSD of
/// each other, keeping the lowest-energy representative of each cluster.
pub fn dedup_transition_states(mut candidates: Vec<PathResult>) -> Vec<PathResult> {
    const RMSD_THRESHOLD: f64 = 0.5;
    candidates.sort_by(|a, b| a.ts_refined.energy.total_cmp(&b.ts_refined.energy));
    let mut kept: Vec<PathResult> = Vec::new();
    for cand in candidates {
        let dup = kept.iter().any(|k| {
            kabsch_rmsd(&k.ts_refined.geometry, &cand.ts_refined.geometry) <= RMSD_THRESHOLD
        });
        if !dup {
            kept.push(cand);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::Element::H;

    fn fake_path(ts: Geometry, energy: f64) -> PathResult {
        let band = Band {
            images: vec![ts.clone(), ts.clone(), ts.clone()],
            energies: vec![0.0, energy, 0.0],
            spring_k: 1.0,
            climbing_index: Some(1),
        };
        PathResult {
            ts_guess: ts.clone(),
            ts_refined: OptResult {
                geometry: ts,
                energy,
                n_steps: 0,
                converged: true,
                max_grad_component: 0.0,
                rms_grad: 0.0,
            },
            barrier_fwd: energy,
            barrier_rev: energy,
            irc_forward_key: "r".into(),
            irc_backward_key: "p".into(),
            verified: true,
            band,
        }
    }

    fn geom3(shift: f64) -> Geometry {
        Geometry::new(
            vec![H, H, H],
            vec![
                [0.0 + shift, 0.0, 0.0],
                [1.0 + shift, 0.0, 0.0],
                [0.0 + shift, 1.3, 0.0],
            ],
        )
    }

    #[test]
    fn identical_ts_collapse_to_lowest() {
        let a = fake_path(geom3(0.0), 5.0);
        let b = fake_path(geom3(0.0), 7.0);
        let out = dedup_transition_states(vec![b, a]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].ts_refined.energy, 5.0);
    }

    #[test]
    fn distant_ts_both_survive() {
        // one atom displaced enough that aligned rmsd exceeds 0.5
        let mut far = geom3(0.0);
        far.coords[2][1] += 2.0;
        let out = dedup_transition_states(vec![fake_path(geom3(0.0), 5.0), fake_path(far, 6.0)]);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn cluster_representative_rule() {
        let a = fake_path(geom3(0.0), 5.0);
        let mut b_g = geom3(0.0);
        b_g.coords[2][1] += 0.1; // ~0.06 rmsd from a
        let b = fake_path(b_g, 6.0);
        let mut c_g = geom3(0.0);
        c_g.coords[2][1] += 3.0;
        let c = fake_path(c_g, 7.0);
        let out = dedup_transition_states(vec![b, c.clone(), a.clone()]);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].ts_refined.energy, 5.0);
        assert_eq!(out[1].ts_refined.energy, 7.0);
    }
}

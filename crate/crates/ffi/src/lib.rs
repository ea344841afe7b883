//! C ABI for the reaction mechanism search engine.
//!
//! Conventions: handles are opaque pointers created and freed by paired
//! functions; every fallible call returns an [`MsStatus`] code and writes
//! results through out-pointers; string returns are NUL-terminated, owned
//! by the caller and released with [`ms_string_free`]. A thread-local
//! message describing the most recent failure is available through
//! [`ms_last_error_message`].

use libc::{c_char, size_t};
use mechsearch::elements::Element;
use mechsearch::enumerate::{count_moves, EnumConfig};
use mechsearch::geom::{exchange_seed, parse_xyz, Geometry};
use mechsearch::molgraph::{perceive_graph, MolGraph, DEFAULT_PERCEPTION_SCALE};
use mechsearch::path::{find_path, PathParams};
use mechsearch::pes::{Calculator, MorseSurrogate, Surface2D};
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::ptr;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    /// A pointer argument was null or an argument was out of range.
    InvalidArgument = 1,
    /// Input text could not be parsed.
    ParseError = 2,
    /// The graph violates valence rules.
    ValenceError = 3,
    /// Geometry-to-graph perception failed.
    PerceptionError = 4,
    /// Embedding or mapping failed.
    EmbedError = 5,
    /// The calculator reported an error.
    CalcError = 6,
    /// A numerical search did not converge or verify.
    Unconverged = 7,
    InternalError = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: impl std::fmt::Display) {
    let cleaned = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn fail(status: MsStatus, msg: impl std::fmt::Display) -> MsStatus {
    set_error(msg);
    status
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Opaque molecular graph handle.
pub struct MsMolGraph(MolGraph);

/// Opaque calculator handle.
pub struct MsCalculator(Box<dyn Calculator>);

/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. The returned handle is freed with [`ms_molgraph_free`].
#[no_mangle]
pub unsafe extern "C" fn ms_molgraph_parse(
    text: *const c_char,
    out: *mut *mut MsMolGraph,
) -> MsStatus {
    if text.is_null() || out.is_null() {
        return fail(MsStatus::InvalidArgument, "null pointer");
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return fail(MsStatus::InvalidArgument, "text is not valid UTF-8");
    };
    match MolGraph::parse_text(text) {
        Ok(g) => {
            *out = Box::into_raw(Box::new(MsMolGraph(g)));
            MsStatus::Ok
        }
        Err(e) => {
            let status = match &e {
                mechsearch::molgraph::ParseError::Graph(_) => MsStatus::ValenceError,
                _ => MsStatus::ParseError,
            };
            fail(status, e)
        }
    }
}

/// Parse an XYZ document and perceive its bonding.
///
/// # Safety
/// As [`ms_molgraph_parse`].
#[no_mangle]
pub unsafe extern "C" fn ms_molgraph_from_xyz(
    text: *const c_char,
    out: *mut *mut MsMolGraph,
) -> MsStatus {
    if text.is_null() || out.is_null() {
        return fail(MsStatus::InvalidArgument, "null pointer");
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return fail(MsStatus::InvalidArgument, "text is not valid UTF-8");
    };
    let geom = match parse_xyz(text) {
        Ok(g) => g,
        Err(e) => return fail(MsStatus::ParseError, e),
    };
    match perceive_graph(&geom, DEFAULT_PERCEPTION_SCALE) {
        Ok(g) => {
            *out = Box::into_raw(Box::new(MsMolGraph(g)));
            MsStatus::Ok
        }
        Err(e) => fail(MsStatus::PerceptionError, e),
    }
}

/// # Safety
/// `g` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ms_molgraph_free(g: *mut MsMolGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ms_molgraph_natoms(g: *const MsMolGraph) -> size_t {
    if g.is_null() {
        return 0;
    }
    (*g).0.natoms()
}

fn string_out(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Canonical key of a graph: equal keys mean the same species, stereo
/// included. Free with [`ms_string_free`].
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ms_molgraph_canonical_key(g: *const MsMolGraph) -> *mut c_char {
    if g.is_null() {
        return ptr::null_mut();
    }
    string_out((*g).0.canonical_key())
}

/// Hill-order formula. Free with [`ms_string_free`].
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ms_molgraph_formula(g: *const MsMolGraph) -> *mut c_char {
    if g.is_null() {
        return ptr::null_mut();
    }
    string_out((*g).0.formula())
}

/// Plain-text serialization of a graph. Free with [`ms_string_free`].
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ms_molgraph_to_text(g: *const MsMolGraph) -> *mut c_char {
    if g.is_null() {
        return ptr::null_mut();
    }
    string_out((*g).0.to_text())
}

/// # Safety
/// `s` must have been returned by a string-returning function of this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ms_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Count distinct elementary-step products per edit size. Writes counts
/// for sizes 1..=n_max into `out_counts` (length `n_max`).
///
/// # Safety
/// `g` must be a live handle; `out_counts` must point to at least `n_max`
/// writable entries.
#[no_mangle]
pub unsafe extern "C" fn ms_enumerate_count(
    g: *const MsMolGraph,
    n_max: size_t,
    conditional: bool,
    out_counts: *mut size_t,
) -> MsStatus {
    if g.is_null() || out_counts.is_null() || n_max == 0 {
        return fail(MsStatus::InvalidArgument, "null pointer or zero n_max");
    }
    let cfg = EnumConfig {
        n_max,
        conditional,
        ..EnumConfig::default()
    };
    let counts = count_moves(&(*g).0, &cfg);
    for n in 1..=n_max {
        *out_counts.add(n - 1) = counts.get(n).copied().unwrap_or(0);
    }
    MsStatus::Ok
}

/// The reactive screened-Morse surrogate with default parameters.
///
/// # Safety
/// `out` must be a valid pointer. Free the handle with
/// [`ms_calculator_free`].
#[no_mangle]
pub unsafe extern "C" fn ms_calculator_morse(out: *mut *mut MsCalculator) -> MsStatus {
    if out.is_null() {
        return fail(MsStatus::InvalidArgument, "null pointer");
    }
    *out = Box::into_raw(Box::new(MsCalculator(Box::new(MorseSurrogate::default()))));
    MsStatus::Ok
}

/// A 2-D verification surface by name: "muller-brown", "quadratic-bowl",
/// "rosenbrock", "saddle-quad" or "double-well".
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_calculator_surface(
    name: *const c_char,
    out: *mut *mut MsCalculator,
) -> MsStatus {
    if name.is_null() || out.is_null() {
        return fail(MsStatus::InvalidArgument, "null pointer");
    }
    let Ok(name) = CStr::from_ptr(name).to_str() else {
        return fail(MsStatus::InvalidArgument, "name is not valid UTF-8");
    };
    let surface = match name {
        "muller-brown" => Surface2D::MullerBrown,
        "quadratic-bowl" => Surface2D::QuadraticBowl,
        "rosenbrock" => Surface2D::Rosenbrock,
        "saddle-quad" => Surface2D::SaddleQuad,
        "double-well" => Surface2D::DoubleWell,
        other => return fail(MsStatus::InvalidArgument, format!("unknown surface {other:?}")),
    };
    *out = Box::into_raw(Box::new(MsCalculator(Box::new(surface))));
    MsStatus::Ok
}

/// # Safety
/// `calc` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ms_calculator_free(calc: *mut MsCalculator) {
    if !calc.is_null() {
        drop(Box::from_raw(calc));
    }
}

unsafe fn geometry_from_raw(
    n_atoms: size_t,
    symbols: *const u8,
    coords: *const f64,
) -> Result<Geometry, String> {
    if symbols.is_null() || coords.is_null() || n_atoms == 0 {
        return Err("null pointer or zero atom count".into());
    }
    let mut elements = Vec::with_capacity(n_atoms);
    for i in 0..n_atoms {
        let sym = *symbols.add(i) as char;
        let el: Element = sym
            .to_string()
            .parse()
            .map_err(|e| format!("atom {i}: {e}"))?;
        elements.push(el);
    }
    let mut xyz = Vec::with_capacity(n_atoms);
    for i in 0..n_atoms {
        xyz.push([
            *coords.add(3 * i),
            *coords.add(3 * i + 1),
            *coords.add(3 * i + 2),
        ]);
    }
    Ok(Geometry::new(elements, xyz))
}

/// Energy (kcal/mol) and optional gradient (kcal/mol/Å, 3 entries per
/// atom) of a structure. `symbols` holds one ASCII element letter per atom
/// ('H', 'C', 'N', 'O'); `coords` is row-major Nx3 in Å.
///
/// # Safety
/// `calc` must be a live handle; `symbols` and `coords` must point to
/// `n_atoms` and `3 * n_atoms` readable entries; `out_energy` must be
/// writable; `out_gradient` is either null or `3 * n_atoms` writable
/// entries.
#[no_mangle]
pub unsafe extern "C" fn ms_energy(
    calc: *const MsCalculator,
    n_atoms: size_t,
    symbols: *const u8,
    coords: *const f64,
    out_energy: *mut f64,
    out_gradient: *mut f64,
) -> MsStatus {
    if calc.is_null() || out_energy.is_null() {
        return fail(MsStatus::InvalidArgument, "null pointer");
    }
    let geom = match geometry_from_raw(n_atoms, symbols, coords) {
        Ok(g) => g,
        Err(e) => return fail(MsStatus::InvalidArgument, e),
    };
    if out_gradient.is_null() {
        match (*calc).0.energy(&geom) {
            Ok(e) => {
                *out_energy = e;
                MsStatus::Ok
            }
            Err(e) => fail(MsStatus::CalcError, e),
        }
    } else {
        match (*calc).0.energy_gradient(&geom) {
            Ok((e, grad)) => {
                *out_energy = e;
                for (i, row) in grad.iter().enumerate() {
                    for (k, v) in row.iter().enumerate() {
                        *out_gradient.add(3 * i + k) = *v;
                    }
                }
                MsStatus::Ok
            }
            Err(e) => fail(MsStatus::CalcError, e),
        }
    }
}

/// Double-ended transition-state search between two structures sharing the
/// same atoms in the same order. Writes the forward barrier (kcal/mol) and
/// whether the path verified (single imaginary mode and IRC endpoints
/// matching the perceived endpoint identities).
///
/// # Safety
/// `calc` must be a live handle; `symbols`, `r_coords` and `p_coords`
/// must point to `n_atoms` / `3 * n_atoms` readable entries;
/// `out_barrier` and `out_verified` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_find_path(
    calc: *const MsCalculator,
    n_atoms: size_t,
    symbols: *const u8,
    r_coords: *const f64,
    p_coords: *const f64,
    n_images: size_t,
    out_barrier: *mut f64,
    out_verified: *mut bool,
) -> MsStatus {
    if calc.is_null() || out_barrier.is_null() || out_verified.is_null() {
        return fail(MsStatus::InvalidArgument, "null pointer");
    }
    let reactant = match geometry_from_raw(n_atoms, symbols, r_coords) {
        Ok(g) => g,
        Err(e) => return fail(MsStatus::InvalidArgument, e),
    };
    let product = match geometry_from_raw(n_atoms, symbols, p_coords) {
        Ok(g) => g,
        Err(e) => return fail(MsStatus::InvalidArgument, e),
    };

    let mut params = PathParams::default();
    if n_images >= 3 {
        params.n_images = n_images;
    }
    let perceive = |g: &Geometry| perceive_graph(g, params.perception_scale).ok();
    let (rg, pg) = (perceive(&reactant), perceive(&product));
    let keys = (
        rg.as_ref().map(|g| g.canonical_key()),
        pg.as_ref().map(|g| g.canonical_key()),
    );
    let seed = match (&rg, &pg) {
        (Some(rg), Some(pg)) if keys.0 != keys.1 => exchange_seed(
            &reactant,
            rg,
            pg,
            params.exchange_stretch,
            &mechsearch::geom::EmbedParams::default(),
        )
        .ok(),
        _ => None,
    };
    match find_path(
        (*calc).0.as_ref(),
        &reactant,
        &product,
        seed.as_ref(),
        (
            keys.0.as_deref().unwrap_or("unperceived-reactant"),
            keys.1.as_deref().unwrap_or("unperceived-product"),
        ),
        &params,
    ) {
        Ok(result) => {
            *out_barrier = result.barrier_fwd;
            *out_verified = result.verified;
            MsStatus::Ok
        }
        Err(e) => fail(MsStatus::Unconverged, e),
    }
}

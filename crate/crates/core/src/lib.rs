//! Reaction mechanism search engine.
//!
//! The crate models chemical species as valence-saturated molecular graphs
//! over C/H/N/O, enumerates candidate elementary steps as bond-matrix edits,
//! filters them through a staged thermodynamic/kinetic cascade against a
//! pluggable energy calculator, locates transition states with CI-NEB and
//! P-RFO refinement, verifies them by IRC, and assembles the surviving steps
//! into a reaction network explored in order of effective barrier.
//!
//! Units throughout: energies in kcal/mol, lengths in Å, masses in amu.

pub mod cli;
pub mod config;
pub mod elements;
pub mod enumerate;
pub mod geom;
pub mod molgraph;
pub mod network;
pub mod optimize;
pub mod path;
pub mod pes;
pub mod pipeline;
pub mod util;

pub use elements::Element;
pub use geom::Geometry;
pub use molgraph::MolGraph;
pub use pes::Calculator;

//! Hybrid projection iterations for equilibrium problems and relatively
//! nonexpansive mappings.
//!
//! The crate works in finite-dimensional `p`-norm spaces, which are smooth,
//! strictly convex and uniformly convex, so the normalized duality map `J`
//! is single valued and explicit. On top of that geometry it provides:
//!
//! * [`sets`]: convex set descriptions, metric and generalized projections,
//!   and the half-space cuts used by hybrid (CQ) methods.
//! * [`equilibrium`]: monotone bifunctions and their resolvents `T_r`.
//! * [`mappings`]: relatively nonexpansive self-maps with known fixed-point
//!   sets.
//! * [`solver`]: the hybrid Ishikawa projection iteration, its three
//!   specializations, and seven classical baseline schemes.
//! * [`harness`]: JSON problem files, CSV traces, reports and scheme
//!   comparison used by the `hybrid-ep` command line tool.

pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod mappings;
pub mod numeric;
pub mod sampling;
pub mod sets;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{DualVector, Space, SpaceKind, Vector};

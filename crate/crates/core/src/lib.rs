//! Desk-scale laboratory for frame-dependent spin histories of colliding
//! spin-1/2 particles, and for the locality obstruction facing the contact
//! interactions that produce them.
//!
//! - [`geometry`]: exact boosts, flat foliations, worldlines, collision schedules.
//! - [`quantum`]: spin states over fixed slots, contact unitaries, total-spin norms.
//! - [`narrative`]: histories along foliations and the two-rule verdict.
//! - [`clusterkit`]: delta-function structure of momentum kernels.
//! - [`algebra`]: boost-generator corrections and ray-history checks on toy matrices.

pub mod algebra;
pub mod clusterkit;
pub mod geometry;
pub mod narrative;
pub mod quantum;

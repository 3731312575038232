//! Polynomial entropy of concrete dynamical systems.
//!
//! The crate is organised around a single [`DynamicalSystem`] trait. Concrete
//! systems live in [`systems`]: circle rotations, the tower of circles
//! `S¹ × ({a_n} ∪ {0})` rotated by `a_n` on level `n`, two-sided subshifts and
//! finite products. On top of that:
//!
//! - [`bowen`] computes Bowen distances and greedy (n, ε)-separated and
//!   (n, ε)-spanning sets, with verifiers for both.
//! - [`constructions`] builds the closed-form witness sets for the tower
//!   (the spanning grid `A(N, ε)`, the separated grid `S(N, ε)`) and the
//!   `n + 1` pairwise separated orbit points of an aperiodic word.
//! - [`estimation`] turns count tables into log-log slopes.
//! - [`diagnostics`] covers recurrence times, distality gaps and word
//!   complexity.

pub mod bowen;
pub mod constructions;
pub mod diagnostics;
pub mod error;
pub mod estimation;
pub mod systems;

pub use error::{Error, Result};
pub use systems::{DynamicalSystem, Resolution, ANGLE_TOL};

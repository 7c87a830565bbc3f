//! Classical quantum state reconstruction.
//!
//! A cloud holds `M` identical copies of an unknown pure qudit state, measures
//! them with a POVM built from a *completely symmetric set* (CSS) of pure
//! states, and broadcasts only the outcome index. Any number of users then
//! prepare the announced state locally. This crate provides the numerics
//! behind that scheme:
//!
//! - [`symspace`]: the `M`-copy symmetric subspace (composition basis,
//!   product-state embedding, basis splitting, partial traces, Haar moments)
//!   and a brute-force full tensor oracle used for cross-validation.
//! - [`css`]: weighted state sets, CSS defect measurement, the copy-reduction
//!   chain and a nonnegative least-squares CSS constructor.
//! - [`mub`]: mutually unbiased bases for `d = 2` and odd prime `d`.
//! - [`estimation`]: the measure-and-prepare channel, the optimality operator,
//!   fidelities, depolarizing fits and the universality probe.
//! - [`protocol`]: an end-to-end seeded simulation of the cloud, broadcast wire
//!   and users.
//!
//! All matrices are dense and expressed in the lexicographically descending
//! composition basis returned by [`symspace::enumerate_compositions`].

pub mod css;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod mub;
pub mod protocol;
pub mod symspace;

pub use error::{Error, Result};
pub use num_complex::Complex64;

//! Combinations of adaptive filters.
//!
//! The crate is organised bottom-up:
//!
//! * [`filters`] holds the component filters (LMS, NLMS, RLS, ZA-NLMS) behind the
//!   [`AdaptiveFilter`] contract, so every combination layer is filter-agnostic.
//! * [`combo2`] mixes two filters through a convex or affine mixing parameter and
//!   implements the four gradient rules for learning it. [`pair`] wires two
//!   filters, a mixer and an optional [`transfer`] policy into one object.
//! * [`multi`] extends mixing to K filters (binary hierarchies, softmax and
//!   one-layer affine layers).
//! * [`lowcost`] runs the second filter as a reduced-wordlength difference filter.
//! * [`sparse`] and [`volterra`] contain the application schemes for sparse plants
//!   and nonlinear echo cancellation.
//! * [`theory`] gives closed-form steady-state tracking results, and [`scenario`]
//!   generates data and runs seeded Monte-Carlo ensembles to check them.

pub mod combo2;
pub mod error;
pub mod filters;
pub mod lowcost;
pub mod multi;
pub mod pair;
pub mod scenario;
pub mod sparse;
pub mod theory;
pub mod transfer;
pub mod volterra;

pub use combo2::{Activation, MixerState, MixingRule};
pub use error::{Error, Result};
pub use filters::{AdaptiveFilter, Algorithm, FilterState, StepResult};
pub use pair::CombinedPair;
pub use transfer::TransferPolicy;

/// `10 log10(x)`.
pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Inverse of [`db`].
pub fn from_db(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

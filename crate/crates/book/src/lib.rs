//! The chapters of the guide in `book/`, included so that `cargo test` runs
//! every code block.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/filters.md")]
pub mod filters {}

#[doc = include_str!("../../../book/src/combinations.md")]
pub mod combinations {}

#[doc = include_str!("../../../book/src/theory.md")]
pub mod theory {}

#[doc = include_str!("../../../book/src/simulations.md")]
pub mod simulations {}

#[doc = include_str!("../../../book/src/applications.md")]
pub mod applications {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

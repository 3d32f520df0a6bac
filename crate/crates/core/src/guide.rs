//! The book, embedded chapter by chapter so that every code block in it
//! compiles and runs under `cargo test --doc`. The rendered version lives
//! in `book/` (build with `mdbook build book`); this module keeps the two
//! in lockstep.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/hyperbolic-plane.md")]
pub mod hyperbolic_plane {}

#[doc = include_str!("../../../book/src/lattice-counting.md")]
pub mod lattice_counting {}

#[doc = include_str!("../../../book/src/quotient-surface.md")]
pub mod quotient_surface {}

#[doc = include_str!("../../../book/src/shrinking-targets.md")]
pub mod shrinking_targets {}

#[doc = include_str!("../../../book/src/conditions.md")]
pub mod condition_evaluators {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod command_line {}

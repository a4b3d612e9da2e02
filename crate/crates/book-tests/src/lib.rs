//! The guide's chapters, one module each, so that `cargo test` runs every
//! listing in the book as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/tables.md")]
pub mod tables {}
#[doc = include_str!("../../../book/src/exact.md")]
pub mod exact {}
#[doc = include_str!("../../../book/src/asymptotic.md")]
pub mod asymptotic {}
#[doc = include_str!("../../../book/src/fbst.md")]
pub mod fbst {}
#[doc = include_str!("../../../book/src/fisher.md")]
pub mod fisher {}
#[doc = include_str!("../../../book/src/power.md")]
pub mod power {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}

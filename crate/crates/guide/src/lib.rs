//! The book's chapters as doc comments, so `cargo test` runs every listing.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/statistics.md")]
pub mod statistics {}
#[doc = include_str!("../../../book/src/generators.md")]
pub mod generators {}
#[doc = include_str!("../../../book/src/screening.md")]
pub mod screening {}
#[doc = include_str!("../../../book/src/concord.md")]
pub mod concord {}
#[doc = include_str!("../../../book/src/regimes.md")]
pub mod regimes {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

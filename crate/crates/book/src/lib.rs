//! The guide's chapters, one module each, so `cargo test --doc` runs
//! every snippet against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/series.md")]
pub mod series {}
#[doc = include_str!("../../../book/src/sampling.md")]
pub mod sampling {}
#[doc = include_str!("../../../book/src/dimension.md")]
pub mod dimension {}
#[doc = include_str!("../../../book/src/charfn.md")]
pub mod charfn {}
#[doc = include_str!("../../../book/src/predictions.md")]
pub mod predictions {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

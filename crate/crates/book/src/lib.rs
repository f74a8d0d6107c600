//! Runs the guide's code blocks as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/scenes.md")]
pub mod scenes {}

#[doc = include_str!("../../../book/src/visibility.md")]
pub mod visibility {}

#[doc = include_str!("../../../book/src/cutlines.md")]
pub mod cutlines {}

#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}

#[doc = include_str!("../../../book/src/queries.md")]
pub mod queries {}

#[doc = include_str!("../../../book/src/weighted.md")]
pub mod weighted {}

#[doc = include_str!("../../../book/src/testing.md")]
pub mod testing {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

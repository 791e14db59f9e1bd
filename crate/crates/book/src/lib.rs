//! The chapters of the guide in `book/src`, included so that `cargo test`
//! compiles and runs every Rust sample in them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/divergence.md")]
pub mod divergence {}

#[doc = include_str!("../../../book/src/constants.md")]
pub mod constants {}

#[doc = include_str!("../../../book/src/algorithm.md")]
pub mod algorithm {}

#[doc = include_str!("../../../book/src/oracle.md")]
pub mod oracle {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

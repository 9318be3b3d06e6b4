//! Discrete Hajlasz–Sobolev machinery.
//!
//! Sampled functions on point clouds, Hardy–Littlewood and grand maximal
//! operators, pointwise (Hajlasz) gradients and their certified minimal
//! values via linear programming, Whitney-cover extension from uniform
//! domains, and Hardy inequalities, capacities and Hausdorff contents.
//!
//! The guide in `book/` walks through each piece; its code listings are
//! compiled as doc-tests of this crate.

pub mod corpus;
pub mod error;
pub mod extension;
pub mod field;
pub mod geometry;
pub mod hajlasz;
pub mod hardy;
pub mod lp;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/intro.md")]
    struct Intro;
    #[doc = include_str!("../../../book/src/fields.md")]
    struct Fields;
    #[doc = include_str!("../../../book/src/gradients.md")]
    struct Gradients;
    #[doc = include_str!("../../../book/src/extension.md")]
    struct Extension;
    #[doc = include_str!("../../../book/src/hardy.md")]
    struct Hardy;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}

//! Self-supervised graph representation learning in mixed-curvature
//! product spaces.
//!
//! The crate provides:
//! - κ-stereographic geometry kernels ([`geometry`]) and their
//!   tape-recorded differentiable counterparts ([`diffgeo`]),
//! - signature-defined product spaces ([`product`]),
//! - a reverse-mode tape and optimizer ([`tape`], [`optim`], [`params`]),
//! - personalized-PageRank graph diffusion ([`diffusion`]),
//! - a product-space attentional GNN encoder ([`encoder`]),
//! - dual (single-view + cross-view) contrastive training ([`contrastive`]),
//! - link-prediction and node-classification evaluators ([`eval`]),
//! - dataset/config plumbing and the CLI commands ([`dataset`], [`config`],
//!   [`cli`]).

pub mod dataset;
pub mod diffgeo;
pub mod cli;
pub mod config;
pub mod contrastive;
pub mod encoder;
pub mod diffusion;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod graph;
pub mod optim;
pub mod params;
pub mod product;
pub mod tape;
pub mod vecmath;

pub use error::{Error, Result};

//! Weighted Sobolev extension on finite trees and its planar counterpart.
//!
//! A finite ordered tree with radially decaying weights is embedded in the
//! plane as a point set `E = E1 ∪ E2`: a uniform grid `E1` on the segment
//! `[0, 2) × {0}` and one point `E2 ∋ (Ψ(v), W_v)` per leaf. This crate builds
//! that set, the dyadic Whitney decomposition of `[-3, 5)²` relative to it, a
//! C² partition of unity, the cluster tree of `E2` with its ball family, and
//! the two extension pipelines that turn a tree extension operator into a
//! planar one and back.
//!
//! Everything here is pure computation: no IO, no global state. The crate is
//! `no_std` and needs only `alloc`; file formats and the command-line front
//! end live in the `treeplane` crate.
//!
//! Module map:
//!
//! - [`tree`]: weighted trees, node/leaf functions, the discrete seminorm.
//! - [`extension`]: trace seminorm, optimal / averaging / brute-force extensions.
//! - [`embedding`]: `Ψ`, `Δ`, the planar set and its separation checks.
//! - [`whitney`]: dyadic squares, decomposition, basepoints, partition of unity.
//! - [`clusters`]: cluster tree, balls `B_C`, square-to-cluster map.
//! - [`interpolant`]: affine pieces and the patched interpolant `F̃`.
//! - [`analysis`]: quadrature seminorms and ball averages.
//! - [`operators`]: the plane-from-tree and tree-from-plane pipelines.
//! - [`verify`]: one-shot lemma verification report for an instance.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > a)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// 2×2 tensor loops read closer to the index notation than iterator chains.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod clusters;
pub mod embedding;
pub mod extension;
pub mod geometry;
pub mod interpolant;
pub mod math;
pub mod operators;
pub mod tree;
pub mod verify;
pub mod whitney;

pub use clusters::{BallConfig, ClusterAssignment, ClusterTree};
pub use embedding::PlanarSet;
pub use extension::{ExtensionBackend, SolverConfig};
pub use geometry::{Point, Rect};
pub use interpolant::{AffinePolynomial, Field, Jet, PatchedInterpolant};
pub use operators::{Instance, InstanceConfig, PlanarData};
pub use tree::{LeafFunction, NodeFunction, NodeId, WeightedTree};
pub use whitney::{DyadicSquare, SquareType, WhitneyDecomposition};

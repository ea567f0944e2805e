// SPDX-License-Identifier: Apache-2.0

//! Translation-invariant splitting Gibbs measures of the hard-core
//! Blume-Capel model on the "wand" constraint graph over Cayley trees.
//!
//! The crate is organised bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`model`] | spins, constraint graphs, parameters, boundary laws |
//! | [`boundary`] | boundary-law fixed points, critical activity, Ferrari closed form |
//! | [`chain`] | tree-indexed Markov chain, spectrum, Kesten-Stigum test |
//! | [`extremality`] | contraction quantities κ, γ and the κ·γ certificate |
//! | [`tree_oracle`] | exact enumeration on small finite trees |
//! | [`scan`] | θ grids, per-point regime rows, CSV/JSON/SVG emitters |
//!
//! All quantities are parametrised by the tree order `k` and the activity
//! `θ = exp(-Jβ)`; the coupling and the inverse temperature never appear
//! separately.

pub mod boundary;
pub mod chain;
pub mod error;
pub mod extremality;
pub mod model;
pub mod scan;
pub mod tree_oracle;

pub use boundary::{
    find_asymmetric, rhs_general, solve_ferrari_k3, solve_symmetric, theta_critical, tisgm_set,
    AsymmetricRoots, SolverConfig, TisgmSet,
};
pub use chain::{spectrum, transition_matrix, SpectralReport, TransitionMatrix};
pub use error::{Error, Result};
pub use extremality::{extremality_certificate, ExtremalityReport};
pub use model::{BoundaryLaw, InteractionGraph, ModelParams, Spin};

// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid interaction graph: {0}")]
    InvalidGraph(String),

    #[error("configuration is not defined on a connected tree: {0}")]
    Disconnected(String),

    #[error("configuration is not admissible for the interaction graph")]
    NotAdmissible,

    #[error("degenerate denominator in boundary-law recursion")]
    DegenerateDenominator,

    #[error("iteration failed: {0}")]
    IterationFailure(String),

    #[error("negative radicand {value:e} in {name}")]
    Domain { name: &'static str, value: f64 },

    #[error("no sign change found: {0}")]
    NoBracket(String),

    #[error("complex eigenvalue pair with imaginary part {0:e}")]
    ComplexEigenvalues(f64),

    #[error("closed-form eigenvalues disagree with characteristic roots by {0:e}")]
    SpectralMismatch(f64),

    #[error("law is not symmetric (z1 = {z1}, z2 = {z2})")]
    AsymmetricLaw { z1: f64, z2: f64 },

    #[error("tree has {vertices} vertices, enumeration cap is {cap}")]
    SizeGuard { vertices: usize, cap: usize },
}

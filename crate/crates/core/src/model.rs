// SPDX-License-Identifier: Apache-2.0

//! Domain types shared by the solvers: spins, constraint graphs, model
//! parameters and boundary laws.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Spin value at a tree vertex.
///
/// Internally spins address 3×3 arrays as `-1 → 0`, `0 → 1`, `+1 → 2`;
/// anything user-facing uses the physical label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Minus,
    Zero,
    Plus,
}

impl Spin {
    pub const ALL: [Spin; 3] = [Spin::Minus, Spin::Zero, Spin::Plus];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Spin::Minus => 0,
            Spin::Zero => 1,
            Spin::Plus => 2,
        }
    }

    #[inline]
    pub fn from_index(i: usize) -> Spin {
        Spin::ALL[i]
    }

    #[inline]
    pub fn value(self) -> i32 {
        self.index() as i32 - 1
    }

    pub fn from_value(v: i32) -> Option<Spin> {
        match v {
            -1 => Some(Spin::Minus),
            0 => Some(Spin::Zero),
            1 => Some(Spin::Plus),
            _ => None,
        }
    }

    /// The −1 ↔ +1 relabelling.
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Minus => Spin::Plus,
            Spin::Zero => Spin::Zero,
            Spin::Plus => Spin::Minus,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// Hard-core constraint graph on the spin alphabet {−1, 0, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteractionGraph {
    adjacency: [[u8; 3]; 3],
}

impl InteractionGraph {
    /// Builds a graph from a 0/1 adjacency matrix indexed by [`Spin::index`].
    pub fn new(adjacency: [[u8; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                if adjacency[i][j] > 1 {
                    return Err(Error::InvalidGraph(format!(
                        "entry ({i},{j}) = {} is not boolean",
                        adjacency[i][j]
                    )));
                }
                if adjacency[i][j] != adjacency[j][i] {
                    return Err(Error::InvalidGraph(format!(
                        "entry ({i},{j}) breaks symmetry"
                    )));
                }
            }
        }
        Ok(Self { adjacency })
    }

    /// The wand: edges {0,−1}, {0,1}, {−1,−1}, {1,1}.
    pub fn wand() -> Self {
        Self {
            adjacency: [[1, 1, 0], [1, 0, 1], [0, 1, 1]],
        }
    }

    #[inline]
    pub fn a(&self, s: Spin, t: Spin) -> u8 {
        self.adjacency[s.index()][t.index()]
    }

    #[inline]
    pub fn allows(&self, s: Spin, t: Spin) -> bool {
        self.a(s, t) == 1
    }

    pub fn adjacency(&self) -> [[u8; 3]; 3] {
        self.adjacency
    }

    /// Number of undirected edges, loops included.
    pub fn edge_count(&self) -> usize {
        let mut n = 0;
        for i in 0..3 {
            for j in i..3 {
                n += self.adjacency[i][j] as usize;
            }
        }
        n
    }
}

/// Tree order `k` and activity `θ = exp(-Jβ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub k: u32,
    pub theta: f64,
}

impl ModelParams {
    pub fn new(k: u32, theta: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParams(format!(
                "tree order k = {k} must be at least 2"
            )));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "activity theta = {theta} must be positive and finite"
            )));
        }
        Ok(Self { k, theta })
    }
}

/// Translation-invariant boundary law `(z1, z2) = (z_{+1}, z_{-1})`.
///
/// `residual` is the scale-free defect of the fixed-point equations,
/// `max_i |z_i - rhs_i| / max(1, z_i)`; it is `+∞` for laws that were never
/// checked against a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryLaw {
    pub z1: f64,
    pub z2: f64,
    pub residual: f64,
}

impl BoundaryLaw {
    pub fn new(z1: f64, z2: f64, residual: f64) -> Result<Self> {
        if !(z1 > 0.0 && z1.is_finite() && z2 > 0.0 && z2.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "boundary law ({z1}, {z2}) must be positive"
            )));
        }
        if residual.is_nan() || residual < 0.0 {
            return Err(Error::InvalidParams(format!(
                "residual {residual} must be nonnegative"
            )));
        }
        Ok(Self { z1, z2, residual })
    }

    /// A trial point with no fixed-point certificate.
    pub fn uncertified(z1: f64, z2: f64) -> Result<Self> {
        Self::new(z1, z2, f64::INFINITY)
    }

    pub fn is_certified(&self, tol: f64) -> bool {
        self.residual <= tol
    }

    pub fn is_symmetric(&self) -> bool {
        self.z1 == self.z2
    }

    /// The image under −1 ↔ +1, which is again a solution whenever `self` is.
    pub fn swapped(&self) -> Self {
        Self {
            z1: self.z2,
            z2: self.z1,
            residual: self.residual,
        }
    }

    /// Boundary weight `exp(h_s − h_0)` for spin `s`; the 0-component is 1.
    #[inline]
    pub fn weight(&self, s: Spin) -> f64 {
        match s {
            Spin::Minus => self.z2,
            Spin::Zero => 1.0,
            Spin::Plus => self.z1,
        }
    }
}

/// Scale-free defect of a fixed-point candidate against its image.
pub fn fixed_point_defect(z: (f64, f64), rhs: (f64, f64)) -> f64 {
    let d1 = (z.0 - rhs.0).abs() / z.0.max(1.0);
    let d2 = (z.1 - rhs.1).abs() / z.1.max(1.0);
    d1.max(d2)
}

/// Checks that every edge of a connected finite tree carries an allowed
/// spin pair.
///
/// `config[v]` is the spin at vertex `v`; `edges` must connect all
/// `config.len()` vertices.
pub fn is_admissible(
    config: &[Spin],
    edges: &[(usize, usize)],
    graph: &InteractionGraph,
) -> Result<bool> {
    let n = config.len();
    if n == 0 {
        return Err(Error::Disconnected("empty vertex set".into()));
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for &(x, y) in edges {
        if x >= n || y >= n {
            return Err(Error::Disconnected(format!(
                "edge ({x},{y}) leaves the vertex set of size {n}"
            )));
        }
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        if rx != ry {
            parent[rx] = ry;
            components -= 1;
        }
    }
    if components != 1 {
        return Err(Error::Disconnected(format!("{components} components")));
    }
    Ok(edges
        .iter()
        .all(|&(x, y)| graph.allows(config[x], config[y])))
}

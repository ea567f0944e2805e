// SPDX-License-Identifier: Apache-2.0

//! Exact finite-volume measures on small Cayley trees.
//!
//! Everything here is brute-force enumeration over admissible
//! configurations, and serves as the independent reference for the
//! fixed-point machinery in [`crate::boundary`].

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{is_admissible, BoundaryLaw, InteractionGraph, Spin};

/// Largest vertex count that [`enumerate_admissible`] will accept.
pub const ENUMERATION_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    /// Root with `k` children: the rooted recursion.
    HalfTree,
    /// Root with `k + 1` children, as in the unrooted tree.
    FullTree,
}

/// Ball `V_n` of a Cayley tree, vertices numbered in breadth-first order so
/// that every generation `W_m` is a contiguous range and parents precede
/// children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteCayleyTree {
    k: u32,
    depth: u32,
    geometry: Geometry,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    // generation_start[m]..generation_start[m + 1] is W_m
    generation_start: Vec<usize>,
}

impl FiniteCayleyTree {
    pub fn new(k: u32, depth: u32, geometry: Geometry) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParams("tree order must be positive".into()));
        }
        let mut parent = vec![None];
        let mut children = vec![Vec::new()];
        let mut generation_start = vec![0, 1];
        for m in 0..depth as usize {
            let (lo, hi) = (generation_start[m], generation_start[m + 1]);
            for v in lo..hi {
                let branching = if v == 0 && geometry == Geometry::FullTree {
                    k + 1
                } else {
                    k
                };
                for _ in 0..branching {
                    let c = parent.len();
                    parent.push(Some(v));
                    children.push(Vec::new());
                    children[v].push(c);
                }
            }
            generation_start.push(parent.len());
        }
        Ok(Self {
            k,
            depth,
            geometry,
            parent,
            children,
            generation_start,
        })
    }

    pub fn half(k: u32, depth: u32) -> Result<Self> {
        Self::new(k, depth, Geometry::HalfTree)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Vertices at distance `m` from the root.
    pub fn generation(&self, m: u32) -> std::ops::Range<usize> {
        let m = m as usize;
        self.generation_start[m]..self.generation_start[m + 1]
    }

    /// Number of vertices at distance at most `m`.
    pub fn ball_size(&self, m: u32) -> usize {
        self.generation_start[m as usize + 1]
    }

    pub fn leaves(&self) -> std::ops::Range<usize> {
        self.generation(self.depth)
    }

    /// `(parent, child)` pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (1..self.vertex_count())
            .map(|v| (self.parent[v].unwrap(), v))
            .collect()
    }

    fn guard(&self) -> Result<()> {
        if self.vertex_count() > ENUMERATION_CAP {
            Err(Error::SizeGuard {
                vertices: self.vertex_count(),
                cap: ENUMERATION_CAP,
            })
        } else {
            Ok(())
        }
    }
}

/// `Σ_{edges} (σ(x) − σ(y))²`; the energy in units of `J`.
pub fn hamiltonian(
    config: &[Spin],
    tree: &FiniteCayleyTree,
    graph: &InteractionGraph,
) -> Result<u32> {
    if config.len() != tree.vertex_count() {
        return Err(Error::InvalidParams(format!(
            "configuration has {} spins, tree has {} vertices",
            config.len(),
            tree.vertex_count()
        )));
    }
    let edges = tree.edges();
    if !is_admissible(config, &edges, graph)? {
        return Err(Error::NotAdmissible);
    }
    Ok(edge_energy(config, &edges))
}

fn edge_energy(config: &[Spin], edges: &[(usize, usize)]) -> u32 {
    edges
        .iter()
        .map(|&(x, y)| {
            let d = config[x].value() - config[y].value();
            (d * d) as u32
        })
        .sum()
}

/// All admissible configurations, in lexicographic order of the
/// breadth-first spin sequence.
pub fn enumerate_admissible(
    tree: &FiniteCayleyTree,
    graph: &InteractionGraph,
) -> Result<Vec<Vec<Spin>>> {
    tree.guard()?;
    let n = tree.vertex_count();
    let mut out = Vec::new();
    let mut cfg = vec![Spin::Zero; n];
    fn extend(
        v: usize,
        tree: &FiniteCayleyTree,
        graph: &InteractionGraph,
        cfg: &mut Vec<Spin>,
        out: &mut Vec<Vec<Spin>>,
    ) {
        if v == cfg.len() {
            out.push(cfg.clone());
            return;
        }
        for s in Spin::ALL {
            if let Some(p) = tree.parent(v) {
                if !graph.allows(cfg[p], s) {
                    continue;
                }
            }
            cfg[v] = s;
            extend(v + 1, tree, graph, cfg, out);
        }
    }
    extend(0, tree, graph, &mut cfg, &mut out);
    Ok(out)
}

/// Number of admissible configurations by the leaf-to-root recursion
/// `c_v(i) = Π_{c ∈ S(v)} Σ_j a_ij c_c(j)`. No size cap.
pub fn count_admissible(tree: &FiniteCayleyTree, graph: &InteractionGraph) -> u128 {
    let n = tree.vertex_count();
    let mut counts = vec![[1u128; 3]; n];
    for v in (0..n).rev() {
        let mut c = [1u128; 3];
        for &child in tree.children(v) {
            for s in Spin::ALL {
                let through: u128 = Spin::ALL
                    .iter()
                    .filter(|&&t| graph.allows(s, t))
                    .map(|t| counts[child][t.index()])
                    .sum();
                c[s.index()] *= through;
            }
        }
        counts[v] = c;
    }
    counts[0].iter().sum()
}

/// Finite-volume Gibbs distribution on `V_n` with boundary weights on `W_n`.
///
/// The weight of σ is `θ^{H(σ)} Π_{x ∈ W_n} z_{σ(x)}` with `z_0 = 1`.
#[derive(Debug, Clone)]
pub struct FiniteVolumeMeasure {
    pub tree: FiniteCayleyTree,
    pub theta: f64,
    pub law: BoundaryLaw,
    pub configs: Vec<Vec<Spin>>,
    pub probabilities: Vec<f64>,
    pub partition: f64,
    pub log_partition: f64,
}

impl FiniteVolumeMeasure {
    pub fn probability_of(&self, config: &[Spin]) -> Option<f64> {
        self.configs
            .iter()
            .position(|c| c == config)
            .map(|i| self.probabilities[i])
    }

    pub fn total_mass(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// Unnormalised log-weight of an admissible configuration.
pub fn log_weight(config: &[Spin], tree: &FiniteCayleyTree, theta: f64, law: &BoundaryLaw) -> f64 {
    let energy = edge_energy(config, &tree.edges());
    let boundary: f64 = tree.leaves().map(|x| law.weight(config[x]).ln()).sum();
    f64::from(energy) * theta.ln() + boundary
}

pub fn finite_volume_measure(
    tree: &FiniteCayleyTree,
    theta: f64,
    law: &BoundaryLaw,
) -> Result<FiniteVolumeMeasure> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "activity theta = {theta} must be positive and finite"
        )));
    }
    let graph = InteractionGraph::wand();
    let configs = enumerate_admissible(tree, &graph)?;
    let edges = tree.edges();
    let ln_theta = theta.ln();
    let log_w: Vec<f64> = configs
        .iter()
        .map(|c| {
            let boundary: f64 = tree.leaves().map(|x| law.weight(c[x]).ln()).sum();
            f64::from(edge_energy(c, &edges)) * ln_theta + boundary
        })
        .collect();
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let scaled_partition: f64 = shifted.iter().sum();
    let probabilities = shifted.iter().map(|w| w / scaled_partition).collect();
    let log_partition = max + scaled_partition.ln();
    Ok(FiniteVolumeMeasure {
        tree: tree.clone(),
        theta,
        law: *law,
        configs,
        probabilities,
        partition: log_partition.exp(),
        log_partition,
    })
}

fn encode(config: &[Spin]) -> u64 {
    config
        .iter()
        .fold(0u64, |acc, s| acc * 3 + s.index() as u64)
}

/// Largest discrepancy between the marginal of `μ^(n)` on `V_{n−1}` and
/// `μ^(n−1)`.
pub fn check_consistency(
    inner: &FiniteCayleyTree,
    outer: &FiniteCayleyTree,
    theta: f64,
    law: &BoundaryLaw,
) -> Result<f64> {
    if inner.k() != outer.k()
        || inner.geometry() != outer.geometry()
        || outer.depth() != inner.depth() + 1
    {
        return Err(Error::InvalidParams(
            "consistency needs trees of the same order and geometry with depths n-1 and n".into(),
        ));
    }
    let small = finite_volume_measure(inner, theta, law)?;
    let big = finite_volume_measure(outer, theta, law)?;
    let n = inner.vertex_count();
    let mut marginal: HashMap<u64, f64> = HashMap::new();
    for (c, p) in big.configs.iter().zip(&big.probabilities) {
        *marginal.entry(encode(&c[..n])).or_insert(0.0) += p;
    }
    let mut defect: f64 = 0.0;
    for (c, p) in small.configs.iter().zip(&small.probabilities) {
        let m = marginal.remove(&encode(c)).unwrap_or(0.0);
        defect = defect.max((m - p).abs());
    }
    // mass on prefixes outside the support of μ^(n−1)
    for m in marginal.into_values() {
        defect = defect.max(m);
    }
    Ok(defect)
}

/// Distribution of the root spin, indexed by [`Spin::index`].
pub fn root_marginal(tree: &FiniteCayleyTree, theta: f64, law: &BoundaryLaw) -> Result<[f64; 3]> {
    let mu = finite_volume_measure(tree, theta, law)?;
    let mut out = [0.0; 3];
    for (c, p) in mu.configs.iter().zip(&mu.probabilities) {
        out[c[0].index()] += p;
    }
    Ok(out)
}

/// Bound on the consistency defect of a certified fixed point.
pub const CERTIFIED_DEFECT_TOL: f64 = 1e-10;
/// A law that is not a fixed point must produce at least this defect.
pub const PERTURBED_DEFECT_MIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    /// Certified fixed point: defect at most [`CERTIFIED_DEFECT_TOL`].
    Consistent,
    /// Perturbed law: defect above [`PERTURBED_DEFECT_MIN`].
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyCase {
    pub theta: f64,
    pub label: String,
    pub law: BoundaryLaw,
    pub defect: f64,
    pub expectation: Expectation,
    pub passed: bool,
}

/// Enumeration check of every certified law at `θ` plus the perturbed law
/// `(1.1 z*, 0.9 z*)` on half-trees of depth `depth - 1` and `depth`.
pub fn verify_theta(
    k: u32,
    depth: u32,
    theta: f64,
    cfg: &crate::boundary::SolverConfig,
) -> Result<Vec<VerifyCase>> {
    if depth < 1 {
        return Err(Error::InvalidParams("depth must be at least 1".into()));
    }
    let params = crate::model::ModelParams::new(k, theta)?;
    let inner = FiniteCayleyTree::half(k, depth - 1)?;
    let outer = FiniteCayleyTree::half(k, depth)?;
    outer.guard()?;
    let set = crate::boundary::tisgm_set_with(&params, cfg)?;

    let mut cases = vec![(
        "symmetric".to_string(),
        set.symmetric,
        Expectation::Consistent,
    )];
    for (i, law) in set.asymmetric.iter().enumerate() {
        cases.push((
            format!("asymmetric-{}", i + 1),
            *law,
            Expectation::Consistent,
        ));
    }
    let z = set.symmetric.z1;
    cases.push((
        "perturbed".to_string(),
        crate::boundary::certify(1.1 * z, 0.9 * z, &params)?,
        Expectation::Inconsistent,
    ));

    cases
        .into_iter()
        .map(|(label, law, expectation)| {
            let defect = check_consistency(&inner, &outer, theta, &law)?;
            let passed = match expectation {
                Expectation::Consistent => defect <= CERTIFIED_DEFECT_TOL,
                Expectation::Inconsistent => defect > PERTURBED_DEFECT_MIN,
            };
            Ok(VerifyCase {
                theta,
                label,
                law,
                defect,
                expectation,
                passed,
            })
        })
        .collect()
}

// SPDX-License-Identifier: Apache-2.0

//! Translation-invariant boundary laws.
//!
//! A constant boundary law `(z1, z2)` gives a consistent family of
//! finite-volume measures iff it is a fixed point of the tree recursion
//!
//! ```text
//! z1 = ((a₁,₋₁ θ⁴ z2 + a₁,₀ θ + a₁,₁ z1) / D)^k
//! z2 = ((a₋₁,₋₁ z2 + a₋₁,₀ θ + a₋₁,₁ θ⁴ z1) / D)^k
//! D  = a₀,₋₁ θ z2 + a₀,₀ + a₀,₁ θ z1
//! ```
//!
//! which on the wand graph reduces to `z_i = ((θ + z_i) / (θ z1 + θ z2))^k`.
//! The symmetric root `z1 = z2 = z*` always exists and is unique; below the
//! critical activity [`theta_critical`] a swap-symmetric pair of asymmetric
//! roots appears.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{fixed_point_defect, BoundaryLaw, InteractionGraph, ModelParams, Spin};

/// Default residual acceptance for a certified fixed point.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-12;
/// Width of the window around `θ_cr` in which the asymmetric pair is
/// flagged as nearly merged with the symmetric root.
pub const NEAR_CRITICAL_WINDOW: f64 = 1e-4;
/// A root counts as asymmetric only if `|z1 - z2| > ASYMMETRY_THRESHOLD * max(z1, z2)`.
pub const ASYMMETRY_THRESHOLD: f64 = 1e-7;
/// Roots closer than this (in log coordinates, i.e. relative) are merged.
pub const DEDUP_TOL: f64 = 1e-8;

const SYMMETRIC_LOWER_BRACKET: f64 = 1e-12;
const MAX_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 200;
const SEED_OFFSETS: [f64; 3] = [0.1, 0.5, 0.9];
const SEED_GRID: usize = 40;
const NEWTON_MAX_ITER: usize = 100;
// keeps exp(u) finite
const LOG_BOUND: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub residual_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            residual_tol: DEFAULT_RESIDUAL_TOL,
        }
    }
}

/// Right-hand side of the translation-invariant recursion for an arbitrary
/// constraint graph. `z = (z1, z2) = (z_{+1}, z_{-1})`.
pub fn rhs_general(
    z: (f64, f64),
    params: &ModelParams,
    graph: &InteractionGraph,
) -> Result<(f64, f64)> {
    let (z1, z2) = z;
    let t = params.theta;
    let t4 = t.powi(4);
    let a = |s, u| f64::from(graph.a(s, u));
    use Spin::{Minus, Plus, Zero};

    let num_plus = a(Plus, Minus) * t4 * z2 + a(Plus, Zero) * t + a(Plus, Plus) * z1;
    let num_minus = a(Minus, Minus) * z2 + a(Minus, Zero) * t + a(Minus, Plus) * t4 * z1;
    let den = a(Zero, Minus) * t * z2 + a(Zero, Zero) + a(Zero, Plus) * t * z1;
    if den == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let k = params.k as i32;
    Ok(((num_plus / den).powi(k), (num_minus / den).powi(k)))
}

/// Attaches the wand fixed-point residual to `(z1, z2)`.
pub fn certify(z1: f64, z2: f64, params: &ModelParams) -> Result<BoundaryLaw> {
    let rhs = rhs_general((z1, z2), params, &InteractionGraph::wand())?;
    BoundaryLaw::new(z1, z2, fixed_point_defect((z1, z2), rhs))
}

/// `f(z) = ((θ + z) / (2θz))^k`, the symmetric reduction of the recursion.
pub fn symmetric_map(z: f64, params: &ModelParams) -> f64 {
    let t = params.theta;
    ((t + z) / (2.0 * t * z)).powi(params.k as i32)
}

/// Unique positive root of `z = f(z)` by bisection.
pub fn solve_symmetric(params: &ModelParams) -> Result<BoundaryLaw> {
    solve_symmetric_with(params, &SolverConfig::default())
}

pub fn solve_symmetric_with(params: &ModelParams, cfg: &SolverConfig) -> Result<BoundaryLaw> {
    let k = f64::from(params.k);
    let t = params.theta;
    let ln_2t = (2.0 * t).ln();
    // sign(g) = sign(z - f(z)); g is strictly increasing
    let g = |z: f64| z.ln() - k * ((t + z).ln() - ln_2t - z.ln());

    let mut lo = SYMMETRIC_LOWER_BRACKET;
    if g(lo) >= 0.0 {
        return Err(Error::IterationFailure(format!(
            "lower bracket {lo:e} does not bound the root"
        )));
    }
    let mut hi = 1.0;
    let mut doublings = 0;
    loop {
        let v = g(hi);
        if v == 0.0 {
            return accept(hi, hi, params, cfg);
        }
        if v > 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::IterationFailure(format!(
                "no upper bracket after {MAX_DOUBLINGS} doublings"
            )));
        }
    }

    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        // geometric midpoint while the bracket spans orders of magnitude
        let mid = if hi > 4.0 * lo {
            (lo * hi).sqrt()
        } else {
            lo + 0.5 * (hi - lo)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v == 0.0 {
            return accept(mid, mid, params, cfg);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    accept(z, z, params, cfg)
}

fn accept(z1: f64, z2: f64, params: &ModelParams, cfg: &SolverConfig) -> Result<BoundaryLaw> {
    let law = certify(z1, z2, params)?;
    if law.is_certified(cfg.residual_tol) {
        Ok(law)
    } else {
        Err(Error::IterationFailure(format!(
            "residual {:e} exceeds tolerance {:e} at ({z1}, {z2})",
            law.residual, cfg.residual_tol
        )))
    }
}

fn nonnegative_radicand(name: &'static str, value: f64) -> Result<f64> {
    if value < -1e-12 {
        Err(Error::Domain { name, value })
    } else {
        Ok(value.max(0.0))
    }
}

/// Closed-form (Ferrari) root of `z = ((θ + z) / (2θz))³`.
pub fn solve_ferrari_k3(theta: f64) -> Result<f64> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "activity theta = {theta} must be positive and finite"
        )));
    }
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let t4 = t2 * t2;
    let t6 = t3 * t3;
    let t8 = t4 * t4;
    let t12 = t6 * t6;

    let inner = nonnegative_radicand("discriminant of y", 6144.0 * t12 + 81.0 * t8)?;
    let cube = (108.0 * t4 + 12.0 * inner.sqrt()).cbrt();
    let y = (cube / 24.0 - 4.0 * t4 / cube - 0.125) / t2;
    let a = nonnegative_radicand("A", 1.0 / (256.0 * t6) + 3.0 / (8.0 * t2) + y)?;
    let c = nonnegative_radicand("C", y * y / 4.0 + 0.125)?;
    let b = a.sqrt() + 1.0 / (16.0 * t3);
    let d = nonnegative_radicand("outer discriminant", b * b - 4.0 * (y / 2.0 - c.sqrt()))?;
    Ok((b + d.sqrt()) / 2.0)
}

/// `θ_cr(k) = (k^k (k-1) / 2^k)^(1/(k+1))`.
pub fn theta_critical(k: u32) -> f64 {
    let kf = f64::from(k);
    ((kf * (kf / 2.0).ln() + (kf - 1.0).ln()) / (kf + 1.0)).exp()
}

/// Result of the asymmetric root search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetricRoots {
    /// Certified asymmetric laws, each followed by its swap image.
    pub laws: Vec<BoundaryLaw>,
    /// `|θ - θ_cr| < NEAR_CRITICAL_WINDOW`: the pair is close to merging
    /// with the symmetric root and the count depends on the dedup tolerance.
    pub near_critical: bool,
    /// More than one swap pair was certified.
    pub extra_roots: bool,
}

pub fn find_asymmetric(params: &ModelParams) -> Result<AsymmetricRoots> {
    find_asymmetric_with(params, &SolverConfig::default())
}

/// Multi-start damped Newton on the wand recursion in log coordinates
/// `u_i = ln z_i`.
///
/// Seeds are the symmetric root pushed apart along the anti-diagonal and the
/// local minima of the residual on a coarse log grid. Converged roots are
/// folded onto `z1 ≥ z2`, symmetric ones dropped, duplicates merged, and every
/// surviving root is emitted together with its exact swap image.
pub fn find_asymmetric_with(params: &ModelParams, cfg: &SolverConfig) -> Result<AsymmetricRoots> {
    let sym = solve_symmetric_with(params, cfg)?;
    let system = LogSystem::new(params);
    let center = sym.z1.ln();

    let mut seeds: Vec<[f64; 2]> = SEED_OFFSETS
        .iter()
        .map(|d| [center + d.ln_1p(), center + (-d).ln_1p()])
        .collect();
    seeds.extend(grid_minima(&system, center));

    let mut roots: Vec<(BoundaryLaw, [f64; 2], f64)> = Vec::new();
    for seed in seeds {
        let Some((mut u, uncertainty)) = system.newton(seed) else {
            continue;
        };
        if u[0] < u[1] {
            u.swap(0, 1);
        }
        let (z1, z2) = (u[0].exp(), u[1].exp());
        if z1 - z2 <= ASYMMETRY_THRESHOLD * z1 || u[0] - u[1] <= 10.0 * uncertainty {
            continue;
        }
        let law = certify(z1, z2, params)?;
        if !law.is_certified(cfg.residual_tol) {
            continue;
        }
        match roots.iter_mut().find(|(_, v, unc)| {
            let dist = (u[0] - v[0]).abs().max((u[1] - v[1]).abs());
            dist <= DEDUP_TOL + 10.0 * (uncertainty + unc)
        }) {
            Some(slot) => {
                if law.residual < slot.0.residual {
                    *slot = (law, u, uncertainty);
                }
            }
            None => roots.push((law, u, uncertainty)),
        }
    }
    roots.sort_by(|a, b| b.0.z1.total_cmp(&a.0.z1));

    let extra_roots = roots.len() > 1;
    let laws = roots
        .iter()
        .flat_map(|(law, _, _)| [*law, law.swapped()])
        .collect();
    Ok(AsymmetricRoots {
        laws,
        near_critical: (params.theta - theta_critical(params.k)).abs() < NEAR_CRITICAL_WINDOW,
        extra_roots,
    })
}

fn grid_minima(system: &LogSystem, center: f64) -> Vec<[f64; 2]> {
    let half =
        (f64::from(system.k) * f64::from(system.k) + 2.0) * system.ln_theta.abs().max(1.0) + 5.0;
    let lo = (center - half).max(-LOG_BOUND);
    let hi = (center + half).min(LOG_BOUND);
    let n = SEED_GRID;
    let axis: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let mut r = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        for j in 0..n {
            let g = system.residual([axis[i], axis[j]]);
            let v = g[0].abs().max(g[1].abs());
            if v.is_finite() {
                r[i][j] = v;
            }
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !r[i][j].is_finite() {
                continue;
            }
            let is_min = (i.saturating_sub(1)..=(i + 1).min(n - 1))
                .flat_map(|a| (j.saturating_sub(1)..=(j + 1).min(n - 1)).map(move |b| (a, b)))
                .all(|(a, b)| r[i][j] <= r[a][b]);
            if is_min {
                out.push([axis[i], axis[j]]);
            }
        }
    }
    out
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

/// `G_i(u) = u_i - k [ln(θ + e^{u_i}) - ln θ - ln(e^{u_1} + e^{u_2})]`.
struct LogSystem {
    k: u32,
    ln_theta: f64,
}

impl LogSystem {
    fn new(params: &ModelParams) -> Self {
        Self {
            k: params.k,
            ln_theta: params.theta.ln(),
        }
    }

    fn residual(&self, u: [f64; 2]) -> [f64; 2] {
        let k = f64::from(self.k);
        let ls = log_add_exp(u[0], u[1]);
        [0, 1].map(|i| u[i] - k * (log_add_exp(self.ln_theta, u[i]) - self.ln_theta - ls))
    }

    // rounding floor of `residual`, used to bound how well a root is resolved
    fn residual_floor(&self, u: [f64; 2]) -> f64 {
        let k = f64::from(self.k);
        let ls = log_add_exp(u[0], u[1]).abs();
        let worst = (0..2)
            .map(|i| {
                u[i].abs() + k * (log_add_exp(self.ln_theta, u[i]).abs() + self.ln_theta.abs() + ls)
            })
            .fold(0.0, f64::max);
        4.0 * f64::EPSILON * worst.max(1.0)
    }

    fn jacobian(&self, u: [f64; 2]) -> [[f64; 2]; 2] {
        let k = f64::from(self.k);
        // share of z_j in z1 + z2, and z_i / (θ + z_i)
        let w = [
            1.0 / (1.0 + (u[1] - u[0]).exp()),
            1.0 / (1.0 + (u[0] - u[1]).exp()),
        ];
        let q = [0, 1].map(|i| 1.0 / (1.0 + (self.ln_theta - u[i]).exp()));
        let mut j = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let delta = if a == b { 1.0 } else { 0.0 };
                j[a][b] = delta - k * (delta * q[a] - w[b]);
            }
        }
        j
    }

    /// Returns the converged point and an a-posteriori bound on its error.
    fn newton(&self, seed: [f64; 2]) -> Option<([f64; 2], f64)> {
        let norm = |g: [f64; 2]| g[0].abs().max(g[1].abs());
        let mut u = seed;
        let mut g = self.residual(u);
        let mut n = norm(g);
        if !n.is_finite() {
            return None;
        }
        for _ in 0..NEWTON_MAX_ITER {
            let jac = self.jacobian(u);
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if !det.is_finite() || det.abs() < 1e-300 {
                return None;
            }
            let du = [
                -(jac[1][1] * g[0] - jac[0][1] * g[1]) / det,
                -(-jac[1][0] * g[0] + jac[0][0] * g[1]) / det,
            ];
            let mut lambda = 1.0;
            let mut accepted = None;
            while lambda > 1e-10 {
                let cand = [u[0] + lambda * du[0], u[1] + lambda * du[1]];
                if cand.iter().all(|x| x.abs() < LOG_BOUND) {
                    let gc = self.residual(cand);
                    let nc = norm(gc);
                    if nc < n * (1.0 - 1e-4 * lambda) {
                        accepted = Some((cand, gc, nc));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((cand, gc, nc)) => {
                    let step = (cand[0] - u[0]).abs().max((cand[1] - u[1]).abs());
                    u = cand;
                    g = gc;
                    n = nc;
                    if n == 0.0 || step <= 1e-16 * (1.0 + u[0].abs().max(u[1].abs())) {
                        break;
                    }
                }
                // no further decrease: at the rounding floor or stuck
                None => break,
            }
        }
        let floor = self.residual_floor(u);
        if n > 1e3 * floor {
            return None;
        }
        let jac = self.jacobian(u);
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv_norm =
            (jac[1][1].abs() + jac[0][1].abs()).max(jac[1][0].abs() + jac[0][0].abs()) / det.abs();
        Some((u, inv_norm * (n + floor)))
    }
}

/// All translation-invariant splitting Gibbs measures at `(k, θ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TisgmSet {
    pub params: ModelParams,
    pub symmetric: BoundaryLaw,
    pub asymmetric: Vec<BoundaryLaw>,
    pub theta_cr: f64,
    pub near_critical: bool,
    pub extra_roots: bool,
}

impl TisgmSet {
    pub fn count(&self) -> usize {
        1 + self.asymmetric.len()
    }
}

pub fn tisgm_set(params: &ModelParams) -> Result<TisgmSet> {
    tisgm_set_with(params, &SolverConfig::default())
}

pub fn tisgm_set_with(params: &ModelParams, cfg: &SolverConfig) -> Result<TisgmSet> {
    let symmetric = solve_symmetric_with(params, cfg)?;
    let asym = find_asymmetric_with(params, cfg)?;
    Ok(TisgmSet {
        params: *params,
        symmetric,
        asymmetric: asym.laws,
        theta_cr: theta_critical(params.k),
        near_critical: asym.near_critical,
        extra_roots: asym.extra_roots,
    })
}

/// Locates the activity below which asymmetric roots exist, using only the
/// root search: a log-uniform scan over `[1e-2, 1e2]` brackets the last
/// θ with asymmetric roots, then bisection narrows it to `tol`.
pub fn locate_asymmetric_onset(k: u32, cfg: &SolverConfig, tol: f64) -> Result<f64> {
    let has_pair = |theta: f64| -> Result<bool> {
        let params = ModelParams::new(k, theta)?;
        Ok(!find_asymmetric_with(&params, cfg)?.laws.is_empty())
    };
    let grid = log_grid(1e-2, 1e2, 121);
    let mut bracket = None;
    let mut prev = has_pair(grid[0])?;
    for w in grid.windows(2) {
        let next = has_pair(w[1])?;
        if prev && !next {
            bracket = Some((w[0], w[1]));
            break;
        }
        prev = next;
    }
    let (mut lo, mut hi) = bracket
        .ok_or_else(|| Error::NoBracket(format!("no onset of asymmetric roots for k = {k}")))?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if has_pair(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `n` log-uniform points from `min` to `max`, with both endpoints exact.
pub fn log_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    let (a, b) = (min.ln(), max.ln());
    (0..n)
        .map(|i| match i {
            0 => min,
            _ if i + 1 == n => max,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

// SPDX-License-Identifier: Apache-2.0

//! Tree-indexed Markov chain of a boundary law and the Kesten-Stigum test.
//!
//! For the law `(z1, z2)` the chain moves from spin `s` to spin `t` with
//! probability proportional to `a_st θ^{(s-t)²} z_t` (`z_0 = 1`). Its
//! spectrum is `{1, s1, s2}`; the measure is non-extremal whenever
//! `k λ₂² > 1` with `λ₂ = max(|s1|, |s2|)`.

use serde::Serialize;

use crate::boundary::{log_grid, solve_symmetric, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{BoundaryLaw, ModelParams};

/// Imaginary parts below this are treated as rounding.
pub const IMAGINARY_TOL: f64 = 1e-10;
/// Closed-form eigenvalues must agree with the characteristic roots to this.
pub const CLOSED_FORM_TOL: f64 = 1e-12;
/// Bisection width for threshold searches.
pub const THRESHOLD_TOL: f64 = 1e-8;
const PRESCAN_POINTS: usize = 1000;

/// Row-stochastic 3×3 matrix, rows and columns indexed by `Spin::index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionMatrix {
    pub entries: [[f64; 3]; 3],
}

impl TransitionMatrix {
    pub fn row_sums(&self) -> [f64; 3] {
        self.entries.map(|r| r.iter().sum())
    }

    /// The −1 ↔ +1 relabelling `Π P Π`.
    pub fn relabelled(&self) -> Self {
        let mut e = [[0.0; 3]; 3];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.entries[2 - i][2 - j];
            }
        }
        Self { entries: e }
    }

    fn trace(&self) -> f64 {
        (0..3).map(|i| self.entries[i][i]).sum()
    }

    fn det(&self) -> f64 {
        let m = &self.entries;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    // shape of a matrix built from a law with z1 = z2
    fn is_symmetric_law(&self) -> bool {
        let m = &self.entries;
        m[1] == [0.5, 0.0, 0.5] && m[0][0] == m[2][2] && m[0][1] == m[2][1]
    }
}

pub fn transition_matrix(law: &BoundaryLaw, theta: f64) -> TransitionMatrix {
    let (z1, z2, t) = (law.z1, law.z2, theta);
    TransitionMatrix {
        entries: [
            [z2 / (z2 + t), t / (z2 + t), 0.0],
            [z2 / (z1 + z2), 0.0, z1 / (z1 + z2)],
            [0.0, t / (z1 + t), z1 / (z1 + t)],
        ],
    }
}

/// Roots of `det(P - sI)` after dividing out `(s - 1)`.
///
/// With characteristic polynomial `s³ - T s² + M s - D`, the quotient is
/// `s² + (1 - T) s + D`. Returned as `(larger, smaller)`.
pub fn deflated_roots(p: &TransitionMatrix) -> Result<(f64, f64)> {
    let b = 1.0 - p.trace();
    let c = p.det();
    let disc = b * b - 4.0 * c;
    if disc < 0.0 {
        let imag = (-disc).sqrt() / 2.0;
        if imag > IMAGINARY_TOL {
            return Err(Error::ComplexEigenvalues(imag));
        }
        return Ok((-b / 2.0, -b / 2.0));
    }
    let sq = disc.sqrt();
    // cancellation-free pair
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 { (0.0, -b) } else { (q, c / q) };
    Ok(if r1 >= r2 { (r1, r2) } else { (r2, r1) })
}

/// Whether the spectral figures carry a proven extremality statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    /// Symmetric law: Kesten-Stigum applies with proven consequences.
    Supported,
    /// Asymmetric law: figures are exploratory only.
    NoClaim,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralReport {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub lambda2: f64,
    pub ks_value: f64,
    pub claim: Claim,
}

impl SpectralReport {
    /// All three eigenvalues ordered by decreasing modulus.
    pub fn by_modulus(&self) -> [f64; 3] {
        let mut v = [self.s3, self.s1, self.s2];
        v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        v
    }
}

/// Spectrum of `p` and the Kesten-Stigum value `k λ₂²`.
///
/// Symmetric-law matrices use the closed forms `s1 = z/(z+θ)`,
/// `s2 = -θ/(z+θ)`, cross-checked against the deflated characteristic
/// polynomial; other matrices report the deflated roots with
/// [`Claim::NoClaim`].
pub fn spectrum(p: &TransitionMatrix, k: u32) -> Result<SpectralReport> {
    let (r1, r2) = deflated_roots(p)?;
    let (s1, s2, claim) = if p.is_symmetric_law() {
        let (s1, s2) = (p.entries[0][0], -p.entries[0][1]);
        let gap = (s1 - r1).abs().max((s2 - r2).abs());
        if gap > CLOSED_FORM_TOL {
            return Err(Error::SpectralMismatch(gap));
        }
        (s1, s2, Claim::Supported)
    } else {
        (r1, r2, Claim::NoClaim)
    };
    let lambda2 = s1.abs().max(s2.abs());
    Ok(SpectralReport {
        s1,
        s2,
        s3: 1.0,
        lambda2,
        ks_value: f64::from(k) * lambda2 * lambda2,
        claim,
    })
}

/// Outcome of the Kesten-Stigum test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KsVerdict {
    /// `k λ₂² > 1`.
    NonExtremal,
    /// `k λ₂² = 1`: the strict criterion is silent.
    Boundary,
    /// `k λ₂² < 1`.
    Inconclusive,
}

pub fn ks_verdict(ks_value: f64) -> KsVerdict {
    if ks_value > 1.0 {
        KsVerdict::NonExtremal
    } else if ks_value == 1.0 {
        KsVerdict::Boundary
    } else {
        KsVerdict::Inconclusive
    }
}

pub fn kesten_stigum_nonextremal(params: &ModelParams, law: &BoundaryLaw) -> Result<bool> {
    let report = spectrum(&transition_matrix(law, params.theta), params.k)?;
    Ok(report.ks_value > 1.0)
}

/// `k λ₂(θ)² − 1` split into the two branches used for the threshold
/// search: `k s1² − 1` on `(0, 1)` and `k s2² − 1` on `(1, ∞)`.
fn ks_branch(k: u32, theta: f64, below_one: bool) -> Result<f64> {
    let params = ModelParams::new(k, theta)?;
    let law = solve_symmetric(&params)?;
    let r = spectrum(&transition_matrix(&law, theta), k)?;
    let s = if below_one { r.s1 } else { r.s2 };
    Ok(f64::from(k) * s * s - 1.0)
}

/// Bracket a sign change of `f` on a log grid, then bisect to `tol`.
pub(crate) fn bracketed_root(
    f: impl Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
    what: &str,
) -> Result<f64> {
    let grid = log_grid(lo, hi, PRESCAN_POINTS);
    let mut prev = (grid[0], f(grid[0])?);
    let mut bracket = None;
    for &t in &grid[1..] {
        let v = f(t)?;
        if prev.1 == 0.0 {
            return Ok(prev.0);
        }
        if prev.1.signum() != v.signum() {
            bracket = Some((prev, (t, v)));
            break;
        }
        prev = (t, v);
    }
    let ((mut a, fa), (mut b, _)) = bracket.ok_or_else(|| Error::NoBracket(what.to_string()))?;
    let sign_a = fa.signum();
    while b - a > tol {
        let m = 0.5 * (a + b);
        let v = f(m)?;
        if v == 0.0 {
            return Ok(m);
        }
        if v.signum() == sign_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// The activities bounding the Kesten-Stigum non-extremality region of the
/// symmetric law, one on each side of θ = 1.
pub fn ks_thresholds(k: u32) -> Result<(f64, f64)> {
    let lower = bracketed_root(
        |t| ks_branch(k, t, true),
        1e-3,
        1.0,
        THRESHOLD_TOL,
        "k s1^2 - 1 on (0, 1)",
    )?;
    let upper = bracketed_root(
        |t| ks_branch(k, t, false),
        1.0,
        1e3,
        THRESHOLD_TOL,
        "k s2^2 - 1 on (1, inf)",
    )?;
    Ok((lower, upper))
}

pub fn ks_thresholds_k3() -> Result<(f64, f64)> {
    ks_thresholds(3)
}

/// Kesten-Stigum sweep of the symmetric law over a θ grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsSweepReport {
    pub k: u32,
    pub min_ks_value: f64,
    pub argmin_theta: f64,
    pub all_above_one: bool,
    /// `k / 4`, the bound that holds whenever `z/θ` sits on the correct side of 1.
    pub lower_bound: f64,
    /// `z/θ > 1` for θ < 1 and `z/θ < 1` for θ > 1 at every grid point.
    pub ratio_side_ok: bool,
    /// Grid points where `k λ₂² = 1` exactly.
    pub boundary_points: Vec<f64>,
}

pub fn ks_all_theta_nonextremal(k: u32, grid: &[f64]) -> Result<KsSweepReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("empty θ grid".into()));
    }
    let cfg = SolverConfig::default();
    let mut min = (f64::INFINITY, f64::NAN);
    let mut ratio_side_ok = true;
    let mut boundary_points = Vec::new();
    for &theta in grid {
        let params = ModelParams::new(k, theta)?;
        let law = crate::boundary::solve_symmetric_with(&params, &cfg)?;
        let r = spectrum(&transition_matrix(&law, theta), k)?;
        if r.ks_value < min.0 {
            min = (r.ks_value, theta);
        }
        let ratio = law.z1 / theta;
        if (theta < 1.0 && ratio <= 1.0) || (theta > 1.0 && ratio >= 1.0) {
            ratio_side_ok = false;
        }
        if ks_verdict(r.ks_value) == KsVerdict::Boundary {
            boundary_points.push(theta);
        }
    }
    Ok(KsSweepReport {
        k,
        min_ks_value: min.0,
        argmin_theta: min.1,
        all_above_one: min.0 > 1.0,
        lower_bound: f64::from(k) / 4.0,
        ratio_side_ok,
        boundary_points,
    })
}

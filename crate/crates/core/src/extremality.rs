// SPDX-License-Identifier: Apache-2.0

//! Sufficient condition for extremality of the symmetric measure:
//! `k κ γ < 1`, where κ bounds how far a single edge of the chain can move
//! the distribution of a spin and γ bounds the same influence through a
//! boundary vertex of a finite subtree.
//!
//! γ is only bounded from above, so a certificate that does not fire says
//! nothing about non-extremality.

use serde::Serialize;

use crate::boundary::solve_symmetric;
use crate::chain::{bracketed_root, TransitionMatrix, THRESHOLD_TOL};
use crate::error::{Error, Result};
use crate::model::{BoundaryLaw, ModelParams};

pub const DEFAULT_P0: f64 = 0.5;

fn require_symmetric(law: &BoundaryLaw) -> Result<f64> {
    if law.z1 == law.z2 {
        Ok(law.z1)
    } else {
        Err(Error::AsymmetricLaw {
            z1: law.z1,
            z2: law.z2,
        })
    }
}

fn require_open_unit(p0: f64) -> Result<()> {
    if p0 > 0.0 && p0 < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "p0 = {p0} must lie in (0, 1)"
        )))
    }
}

/// Closed-form κ of the symmetric chain: `z/(z+θ)` for θ < 1, `θ/(z+θ)` otherwise.
pub fn kappa(law: &BoundaryLaw, theta: f64) -> Result<f64> {
    let z = require_symmetric(law)?;
    Ok(if theta < 1.0 {
        z / (z + theta)
    } else {
        theta / (z + theta)
    })
}

/// `½ max_{i,j} Σ_l |P_il − P_jl|`, the maximal total-variation distance
/// between two rows.
pub fn kappa_from_matrix(p: &TransitionMatrix) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let d: f64 = (0..3)
                .map(|l| (p.entries[i][l] - p.entries[j][l]).abs())
                .sum();
            best = best.max(d);
        }
    }
    0.5 * best
}

/// Distributions of the spin at a vertex given that its neighbour on the
/// boundary is −1, 0 or +1 (rows in that order), when the free
/// distribution puts mass `p0` on the vertex agreeing with the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalSpinDistribution {
    pub rows: [[f64; 3]; 3],
    /// `A = z p0 / (z p0 + θ (1 − p0))`.
    pub a: f64,
}

pub fn conditional_distributions(
    p0: f64,
    z: f64,
    theta: f64,
) -> Result<ConditionalSpinDistribution> {
    require_open_unit(p0)?;
    if !(z > 0.0 && theta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "z = {z} and theta = {theta} must be positive"
        )));
    }
    let a = z * p0 / (z * p0 + theta * (1.0 - p0));
    let b = 1.0 - a;
    Ok(ConditionalSpinDistribution {
        rows: [[a, b, 0.0], [0.5, 0.0, 0.5], [0.0, b, a]],
        a,
    })
}

/// `|p^i(s) − p^j(s)|` for the pairs (0,1), (0,2), (1,2) and every `s`.
pub fn pairwise_differences(dist: &ConditionalSpinDistribution) -> [f64; 9] {
    let r = &dist.rows;
    let mut out = [0.0; 9];
    let mut n = 0;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        for s in 0..3 {
            out[n] = (r[i][s] - r[j][s]).abs();
            n += 1;
        }
    }
    out
}

pub fn pairwise_max_discrepancy(dist: &ConditionalSpinDistribution) -> f64 {
    pairwise_differences(dist).into_iter().fold(0.0, f64::max)
}

/// Upper bound on γ for the symmetric law; the two branches meet at
/// `p0 = θ/(z+θ)` with value ½.
pub fn gamma_bound(p0: f64, law: &BoundaryLaw, theta: f64) -> Result<f64> {
    require_open_unit(p0)?;
    let z = require_symmetric(law)?;
    let den = (z - theta) * p0 + theta;
    Ok(if p0 >= theta / (z + theta) {
        z * p0 / den
    } else {
        theta * (1.0 - p0) / den
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalityReport {
    pub kappa: f64,
    pub gamma_bound: f64,
    /// `k κ γ`.
    pub product: f64,
    pub p0_used: f64,
    /// `product < 1`: the symmetric measure is extremal.
    pub fires: bool,
    /// Set for `k ≠ 3`, where the bound is reported without a proven claim.
    pub exploratory: bool,
}

pub fn extremality_certificate(params: &ModelParams, p0: f64) -> Result<ExtremalityReport> {
    let law = solve_symmetric(params)?;
    certificate_for(params, &law, p0)
}

pub fn certificate_for(
    params: &ModelParams,
    law: &BoundaryLaw,
    p0: f64,
) -> Result<ExtremalityReport> {
    let kappa = kappa(law, params.theta)?;
    let gamma = gamma_bound(p0, law, params.theta)?;
    let product = f64::from(params.k) * kappa * gamma;
    Ok(ExtremalityReport {
        kappa,
        gamma_bound: gamma,
        product,
        p0_used: p0,
        fires: product < 1.0,
        exploratory: params.k != 3,
    })
}

/// Activities on either side of θ = 1 where `k κ γ = 1`.
pub fn extremality_thresholds(k: u32, p0: f64) -> Result<(f64, f64)> {
    require_open_unit(p0)?;
    let excess = |theta: f64| -> Result<f64> {
        let params = ModelParams::new(k, theta)?;
        Ok(extremality_certificate(&params, p0)?.product - 1.0)
    };
    let lower = bracketed_root(
        excess,
        1e-3,
        1.0,
        THRESHOLD_TOL,
        "k kappa gamma - 1 on (0, 1)",
    )?;
    let upper = bracketed_root(
        excess,
        1.0,
        1e3,
        THRESHOLD_TOL,
        "k kappa gamma - 1 on (1, inf)",
    )?;
    Ok((lower, upper))
}

pub fn extremality_thresholds_k3(p0: f64) -> Result<(f64, f64)> {
    extremality_thresholds(3, p0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::transition_matrix;

    fn sym(z: f64) -> BoundaryLaw {
        BoundaryLaw::uncertified(z, z).unwrap()
    }

    #[test]
    fn kappa_at_unit_law() {
        assert_eq!(kappa(&sym(1.0), 1.0).unwrap(), 0.5);
    }

    #[test]
    fn kappa_branches() {
        for &t in &[0.5, 2.0] {
            let params = ModelParams::new(3, t).unwrap();
            let law = solve_symmetric(&params).unwrap();
            let z = law.z1;
            let expected = if t < 1.0 { z / (z + t) } else { t / (z + t) };
            assert_eq!(kappa(&law, t).unwrap(), expected);
            let direct = kappa_from_matrix(&transition_matrix(&law, t));
            assert!((direct - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn kappa_rejects_asymmetric() {
        let law = BoundaryLaw::uncertified(1.0, 2.0).unwrap();
        assert!(matches!(kappa(&law, 1.0), Err(Error::AsymmetricLaw { .. })));
        assert!(gamma_bound(0.5, &law, 1.0).is_err());
    }

    #[test]
    fn conditional_examples() {
        let (z, t) = (2.0, 0.7);
        let d = conditional_distributions(t / (z + t), z, t).unwrap();
        assert!((d.a - 0.5).abs() < 1e-15);
        assert_eq!(conditional_distributions(0.5, 1.3, 1.3).unwrap().a, 0.5);
        let d = conditional_distributions(0.5, 2.0, 1.0).unwrap();
        assert!((d.a - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.rows[1], [0.5, 0.0, 0.5]);
        assert_eq!((d.rows[0][2], d.rows[2][0]), (0.0, 0.0));
        for row in d.rows {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn conditional_rejects_degenerate_p0() {
        assert!(conditional_distributions(0.0, 1.0, 1.0).is_err());
        assert!(conditional_distributions(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn discrepancy_examples() {
        // A = 1/2, 2/3, 0.9 via z·p0/(z·p0 + θ(1 - p0)) with p0 = 1/2, θ = 1
        for &(z, a) in &[(1.0, 0.5), (2.0, 2.0 / 3.0), (9.0, 0.9)] {
            let d = conditional_distributions(0.5, z, 1.0).unwrap();
            assert!((pairwise_max_discrepancy(&d) - a).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_examples() {
        let (z, t) = (1.7, 0.6);
        let g = gamma_bound(t / (z + t), &sym(z), t).unwrap();
        assert!((g - 0.5).abs() < 1e-15);
        assert_eq!(gamma_bound(0.5, &sym(1.0), 1.0).unwrap(), 0.5);
        assert!((gamma_bound(0.5, &sym(2.0), 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_continuous_at_switch() {
        for &(z, t) in &[(1.7, 0.6), (0.4, 3.0), (1.0, 1.0)] {
            let p = t / (z + t);
            let below = gamma_bound(p * (1.0 - 1e-12), &sym(z), t).unwrap();
            let above = gamma_bound(p * (1.0 + 1e-12), &sym(z), t).unwrap();
            assert!((below - 0.5).abs() < 1e-9 && (above - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn certificate_examples() {
        let at = |t| extremality_certificate(&ModelParams::new(3, t).unwrap(), DEFAULT_P0).unwrap();
        let r = at(1.0);
        assert_eq!(r.product, 0.75);
        assert!(r.fires && !r.exploratory);
        assert!(!at(0.5).fires);
        assert!(at(1.2).fires);
        assert!(
            extremality_certificate(&ModelParams::new(4, 1.0).unwrap(), 0.5)
                .unwrap()
                .exploratory
        );
    }

    #[test]
    fn k3_thresholds() {
        let (a, b) = extremality_thresholds_k3(DEFAULT_P0).unwrap();
        assert!(
            (a - 0.83).abs() < 0.01 && (b - 1.226).abs() < 0.01,
            "{a} {b}"
        );
        let mid = extremality_certificate(&ModelParams::new(3, 1.0).unwrap(), 0.5).unwrap();
        assert!(mid.fires);
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Reference computations that share no code with the library solvers.

#![allow(dead_code)]

/// Symmetric root by plain bisection on `g(z) = z − ((θ+z)/(2θz))^k` in
/// log coordinates, bracket `[1e-300, 1e300]`.
pub fn symmetric_bisection(k: u32, theta: f64) -> f64 {
    let k = f64::from(k);
    let g = |u: f64| {
        let z = u.exp();
        u - k * ((theta + z).ln() - (2.0 * theta).ln() - u)
    };
    let (mut lo, mut hi) = (-690.0_f64, 690.0_f64);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// The two positive roots of `w^k − θ S w + θ`, or `None` if they do not exist.
fn poly_roots(k: u32, theta: f64, s: f64) -> Option<(f64, f64)> {
    let kf = f64::from(k);
    let h = |w: f64| w.powi(k as i32) - theta * s * w + theta;
    let wm = (theta * s / kf).powf(1.0 / (kf - 1.0));
    if h(wm) >= 0.0 {
        return None;
    }
    let root = |mut lo: f64, mut hi: f64, increasing: bool| {
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if (h(mid) < 0.0) != increasing {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let top = (theta * s).powf(1.0 / (kf - 1.0)) * (1.0 + 1e-12) + 1e-300;
    Some((root(0.0, wm, false), root(wm, top.max(wm * 2.0), true)))
}

/// Asymmetric fixed points through `S = z1 + z2`: with `w_i = z_i^{1/k}`
/// both `w_i` solve `w^k − θ S w + θ = 0`, so an asymmetric solution is an
/// `S` with `a(S)^k + b(S)^k = S` for the two distinct roots `a < b`.
/// Returns `(z_large, z_small)` for every such `S` found on a log scan.
pub fn asymmetric_by_sum(k: u32, theta: f64) -> Vec<(f64, f64)> {
    let kf = f64::from(k);
    // h(w_m) = 0 gives the smallest admissible S
    let s_min = (kf / (kf - 1.0)).powf((kf - 1.0) / kf) * (kf / theta).powf(1.0 / kf);
    let f = |s: f64| -> Option<f64> {
        poly_roots(k, theta, s).map(|(a, b)| (a.powi(k as i32) + b.powi(k as i32)) / s - 1.0)
    };
    let n = 6000;
    let (l0, l1) = ((s_min * (1.0 + 1e-9)).ln(), (s_min * 1e40).ln());
    let grid: Vec<f64> = (0..=n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / n as f64).exp())
        .collect();
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &s in &grid {
        let Some(v) = f(s) else {
            prev = None;
            continue;
        };
        if let Some((ps, pv)) = prev {
            if pv.signum() != v.signum() {
                let (mut lo, mut hi) = (ps, s);
                for _ in 0..300 {
                    let mid = (0.5 * (lo.ln() + hi.ln())).exp();
                    if mid == lo || mid == hi {
                        break;
                    }
                    match f(mid) {
                        Some(m) if m.signum() == pv.signum() => lo = mid,
                        _ => hi = mid,
                    }
                }
                let (a, b) = poly_roots(k, theta, 0.5 * (lo + hi)).expect("roots inside bracket");
                out.push((b.powi(k as i32), a.powi(k as i32)));
            }
        }
        prev = Some((s, v));
    }
    out
}

/// Neumaier-compensated sum.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0_f64, 0.0_f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Partition function of the half-tree of order `k` and depth `n` by brute
/// force over all `3^|V|` spin assignments; spins are −1, 0, 1 and the
/// boundary weight of a leaf is `z2`, `1`, `z1`.
pub fn brute_partition(k: usize, n: usize, theta: f64, z1: f64, z2: f64) -> f64 {
    let mut parent = vec![usize::MAX];
    let mut frontier = vec![0usize];
    for _ in 0..n {
        let mut next = Vec::new();
        for &v in &frontier {
            for _ in 0..k {
                parent.push(v);
                next.push(parent.len() - 1);
            }
        }
        frontier = next;
    }
    let leaves = frontier;
    let nv = parent.len();
    let allowed = |a: i32, b: i32| (a == 0) != (b == 0) || (a == b && a != 0);
    let mut weights = Vec::new();
    let mut spins = vec![0i32; nv];
    for code in 0..3usize.pow(nv as u32) {
        let mut c = code;
        for s in spins.iter_mut() {
            *s = (c % 3) as i32 - 1;
            c /= 3;
        }
        let mut ok = true;
        let mut energy = 0;
        for v in 1..nv {
            let (a, b) = (spins[v], spins[parent[v]]);
            if !allowed(a, b) {
                ok = false;
                break;
            }
            energy += (a - b) * (a - b);
        }
        if !ok {
            continue;
        }
        let bw: f64 = leaves
            .iter()
            .map(|&x| match spins[x] {
                -1 => z2,
                0 => 1.0,
                _ => z1,
            })
            .product();
        weights.push(theta.powi(energy) * bw);
    }
    kahan_sum(weights)
}

pub fn log_uniform(rng: &mut impl rand::Rng, min: f64, max: f64) -> f64 {
    rng.gen_range(min.ln()..max.ln()).exp()
}

// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use wand_gibbs::boundary::{find_asymmetric, symmetric_map};
use wand_gibbs::chain::deflated_roots;
use wand_gibbs::extremality::{
    conditional_distributions, kappa, kappa_from_matrix, pairwise_differences,
};
use wand_gibbs::model::{BoundaryLaw, InteractionGraph, ModelParams};
use wand_gibbs::{rhs_general, solve_symmetric, spectrum, transition_matrix};

fn activity() -> impl Strategy<Value = f64> {
    (-4.6f64..4.6).prop_map(f64::exp)
}

fn law_value() -> impl Strategy<Value = f64> {
    (-6.0f64..6.0).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn symmetric_map_is_decreasing(k in 2u32..=10, t in activity(), a in law_value(), b in law_value()) {
        prop_assume!(a < b);
        let p = ModelParams::new(k, t).unwrap();
        prop_assert!(symmetric_map(a, &p) >= symmetric_map(b, &p));
    }

    #[test]
    fn symmetric_root_side_of_theta(k in 2u32..=10, t in activity()) {
        let law = solve_symmetric(&ModelParams::new(k, t).unwrap()).unwrap();
        let z = law.z1;
        prop_assert!(law.residual <= 1e-12);
        if t != 1.0 {
            prop_assert!((z - t) * (t - 1.0) < 0.0, "k={} θ={} z={}", k, t, z);
        }
    }

    #[test]
    fn rhs_commutes_with_swap(k in 2u32..=10, t in activity(), a in law_value(), b in law_value()) {
        let p = ModelParams::new(k, t).unwrap();
        let g = InteractionGraph::wand();
        let (r1, r2) = rhs_general((a, b), &p, &g).unwrap();
        let (s1, s2) = rhs_general((b, a), &p, &g).unwrap();
        prop_assert_eq!((r1, r2), (s2, s1));
    }

    #[test]
    fn asymmetric_roots_come_in_swap_pairs(k in 2u32..=5, frac in 0.05f64..0.95) {
        let t = frac * wand_gibbs::theta_critical(k);
        let roots = find_asymmetric(&ModelParams::new(k, t).unwrap()).unwrap();
        prop_assert_eq!(roots.laws.len(), 2);
        prop_assert_eq!(roots.laws[1], roots.laws[0].swapped());
    }

    #[test]
    fn transition_rows_are_stochastic(t in activity(), a in law_value(), b in law_value()) {
        let p = transition_matrix(&BoundaryLaw::uncertified(a, b).unwrap(), t);
        for s in p.row_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-14);
        }
        for row in p.entries {
            for v in row {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn swap_conjugates_the_chain(t in activity(), a in law_value(), b in law_value()) {
        let law = BoundaryLaw::uncertified(a, b).unwrap();
        let p = transition_matrix(&law, t);
        let q = transition_matrix(&law.swapped(), t);
        prop_assert_eq!(q, p.relabelled());
        let (x1, x2) = deflated_roots(&p).unwrap();
        let (y1, y2) = deflated_roots(&q).unwrap();
        prop_assert!((x1 - y1).abs() <= 1e-10 && (x2 - y2).abs() <= 1e-10);
    }

    #[test]
    fn closed_form_spectrum_matches_cubic(k in 2u32..=10, t in activity(), z in law_value()) {
        let p = transition_matrix(&BoundaryLaw::uncertified(z, z).unwrap(), t);
        let r = spectrum(&p, k).unwrap();
        let (d1, d2) = deflated_roots(&p).unwrap();
        prop_assert!((r.s1 - d1).abs() <= 1e-12 && (r.s2 - d2).abs() <= 1e-12);
        prop_assert!((r.s1 - z / (z + t)).abs() <= 1e-15);
        prop_assert!((r.s2 + t / (z + t)).abs() <= 1e-15);
    }

    #[test]
    fn kappa_closed_form_matches_rows(k in 2u32..=10, t in activity()) {
        let law = solve_symmetric(&ModelParams::new(k, t).unwrap()).unwrap();
        let direct = kappa_from_matrix(&transition_matrix(&law, t));
        prop_assert!((kappa(&law, t).unwrap() - direct).abs() <= 1e-14);
    }

    #[test]
    fn pairwise_differences_multiset(p0 in 0.001f64..0.999, z in law_value(), t in activity()) {
        let d = conditional_distributions(p0, z, t).unwrap();
        let a = d.a;
        let b = 1.0 - a;
        let h = (a - 0.5).abs();
        let mut got = pairwise_differences(&d).to_vec();
        let mut want = vec![a, a, 0.0, b, b, 0.5, 0.5, h, h];
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        prop_assert_eq!(got, want);
    }
}

use proptest::prelude::*;

use rpv_core::lrt::{log_likelihood, log_likelihood_gradient};
use rpv_core::rank::{mann_whitney_u, z_proportion};
use rpv_core::{summarize, ZiLogNormalParams};

fn brute_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

// Small integer-valued samples so ties are common.
fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((1u32..12).prop_map(f64::from), 1..=30)
}

proptest! {
    #[test]
    fn u_matches_brute_force(a in sample(), b in sample()) {
        prop_assert_eq!(mann_whitney_u(&a, &b).unwrap(), brute_u(&a, &b));
    }

    #[test]
    fn u_wins_and_ties_partition_pairs(a in sample(), b in sample()) {
        let total = mann_whitney_u(&a, &b).unwrap() + mann_whitney_u(&b, &a).unwrap();
        prop_assert_eq!(total, (a.len() * b.len()) as f64);
    }

    #[test]
    fn z_proportion_is_antisymmetric(
        n1 in 2usize..500, n2 in 2usize..500, f1 in 0.0f64..1.0, f2 in 0.0f64..1.0,
    ) {
        let k1 = ((n1 as f64) * f1) as usize;
        let k2 = ((n2 as f64) * f2) as usize;
        prop_assume!(k1 + k2 > 0 && k1 + k2 < n1 + n2);
        let group = |n: usize, k: usize| {
            let v: Vec<f64> = (0..n).map(|i| if i < k { 0.0 } else { 1.0 }).collect();
            summarize(&v).unwrap()
        };
        let (a, b) = (group(n1, k1), group(n2, k2));
        let forward = z_proportion(&a, &b).unwrap();
        let backward = z_proportion(&b, &a).unwrap();
        prop_assert!((forward + backward).abs() <= 1e-12 * forward.abs().max(1.0));
    }

    #[test]
    fn likelihood_gradient_matches_finite_differences(
        rc in 0.05f64..0.95, muc in -1.0f64..3.0, s2c in 0.2f64..3.0,
        rt in 0.05f64..0.95, mut_ in -1.0f64..3.0, s2t in 0.2f64..3.0,
    ) {
        let c = summarize(&[0.0, 0.0, 0.0, 1.5, 2.0, 7.0, 0.3, 0.0]).unwrap();
        let t = summarize(&[0.0, 4.0, 0.0, 0.0, 0.0, 11.0, 2.5]).unwrap();
        let x = [rc, muc, s2c, rt, mut_, s2t];
        let ll = |x: &[f64; 6]| {
            let pc = ZiLogNormalParams::new(x[0], x[1], x[2]).unwrap();
            let pt = ZiLogNormalParams::new(x[3], x[4], x[5]).unwrap();
            log_likelihood(&pc, &pt, (&c, &t)).unwrap()
        };
        let g = log_likelihood_gradient(
            &ZiLogNormalParams::new(rc, muc, s2c).unwrap(),
            &ZiLogNormalParams::new(rt, mut_, s2t).unwrap(),
            (&c, &t),
        ).unwrap();
        for i in 0..6 {
            let h = 1e-5 * x[i].abs().max(1e-2);
            let (mut up, mut dn) = (x, x);
            up[i] += h;
            dn[i] -= h;
            let fd = (ll(&up) - ll(&dn)) / (2.0 * h);
            let scale = g[i].abs().max(1.0);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * scale, "component {}: fd {} vs {}", i, fd, g[i]);
        }
    }
}

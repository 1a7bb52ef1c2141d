//! Invariants checked on random inputs.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use pslab::expsum::{vaughan_decompose, vdc_check};
use pslab::gamma::{gamma14_direct, gamma_direct};
use pslab::kernel::build_kernel;
use pslab::numeric::sum::{neumaier_sum, pairwise};
use pslab::numeric::{e_dd, Dd};
use pslab::params::{almost_prime_order, derive_instance, Overrides};
use pslab::primes::{coprime_to_pz, omega_multiplicity};
use pslab::sieve::{build_rosser, frak_values, lemma3_lower, sandwich_check};

fn omega_trial(mut n: u64) -> u32 {
    let mut k = 0;
    let mut d = 2;
    while d * d <= n {
        while n % d == 0 {
            n /= d;
            k += 1;
        }
        d += 1;
    }
    k + u32::from(n > 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn phase_conjugation(n in 2u64..10_000_000, x in -50.0f64..50.0, c in 1.0f64..1.07) {
        let t = Dd::powf(n as f64, c).mul_f64(x);
        let u = Dd::powf(n as f64, c).mul_f64(-x);
        let (a, b) = (e_dd(t), e_dd(u));
        prop_assert!((a - b.conj()).norm() <= 1e-15);
        prop_assert!((a.norm() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn kernel_shape(r in 1u32..=8, y in -1.5f64..1.5) {
        let k = build_kernel(0.875, 0.125, r).unwrap();
        let t = k.theta(y);
        prop_assert!((0.0..=1.0).contains(&t));
        prop_assert_eq!(t, k.theta(-y));
        if y.abs() <= k.a - k.d_k {
            prop_assert_eq!(t, 1.0);
        }
        if y.abs() >= k.a + k.d_k {
            prop_assert_eq!(t, 0.0);
        }
    }

    #[test]
    fn kernel_monotone_outside_plateau(r in 1u32..=8, y in 0.0f64..1.2, dy in 0.0f64..0.1) {
        let k = build_kernel(0.875, 0.125, r).unwrap();
        prop_assert!(k.theta(y + dy) <= k.theta(y) + 1e-15);
    }

    #[test]
    fn transform_within_bound(r in 1u32..=64, lx in -3.0f64..6.0) {
        let k = build_kernel(0.875, 0.125, r).unwrap();
        let x = 10f64.powf(lx);
        prop_assert!(k.log_abs_theta_hat(x) <= k.log_bound(x) + 1e-12);
        prop_assert_eq!(k.theta_hat(x), k.theta_hat(-x));
    }

    #[test]
    fn sandwich_random(z in 3.0f64..60.0, e in 2.0f64..3.0, mask in any::<u32>()) {
        let w = build_rosser(z.powf(e), z).unwrap();
        let n: u64 = w.primes.iter().enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &p)| p as u64)
            .product();
        let (lo, mid, hi) = sandwich_check(&w, n).unwrap();
        prop_assert!(lo <= mid && mid <= hi, "n={} {} {} {}", n, lo, mid, hi);
        prop_assert_eq!(mid, i64::from(n == 1));
    }

    #[test]
    fn frak_sandwich(z in 3.0f64..60.0, e in 2.0f64..3.0) {
        let s = frak_values(&build_rosser(z.powf(e), z).unwrap());
        prop_assert!(s.sandwich_holds(), "{:?}", s);
    }

    #[test]
    fn omega_additive(a in 1u64..100_000, b in 1u64..100_000) {
        prop_assert_eq!(omega_multiplicity(a * b), omega_multiplicity(a) + omega_multiplicity(b));
        prop_assert_eq!(omega_multiplicity(a), omega_trial(a));
    }

    #[test]
    fn coprime_matches_trial(n in 1u64..1_000_000, z in 2.0f64..200.0) {
        let expect = common::odd_primes_below(z).iter().all(|&q| n % q != 0);
        prop_assert_eq!(coprime_to_pz(n, z), expect);
    }

    #[test]
    fn triple_product_lower_bound(
        l in prop::array::uniform3(0i32..=1),
        dm in prop::array::uniform3(0i32..4),
        dp in prop::array::uniform3(0i32..4),
    ) {
        // Λ⁻ ≤ Λ ≤ Λ⁺ with Λ ∈ {0, 1} and Λ⁺ ≥ 0.
        let lm = [0, 1, 2].map(|i| (l[i] - dm[i]) as f64);
        let lp = [0, 1, 2].map(|i| (l[i] + dp[i]) as f64);
        let prod = (l[0] * l[1] * l[2]) as f64;
        prop_assert!(prod >= lemma3_lower(lm, lp));
    }

    #[test]
    fn order_formula(c in 1.0f64..(15.0 / 14.0)) {
        prop_assume!(c > 1.0);
        let o = almost_prime_order(c).unwrap() as f64;
        let q = 369.0 / (180.0 - 168.0 * c);
        prop_assert!(o <= q && q < o + 1.0);
        prop_assert!(o >= 30.0);
    }

    #[test]
    fn summation_orders_agree(v in prop::collection::vec(-1e6f64..1e6, 0..500)) {
        let a = neumaier_sum(v.iter().copied());
        let b = pairwise(&v);
        let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((a - b).abs() <= 1e-13 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn van_der_corput(
        parts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=200),
        h in 1usize..=20,
    ) {
        let seq: Vec<Complex64> = parts.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let h = h.min(seq.len());
        let (lhs, rhs) = vdc_check(&seq, h).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{} > {}", lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn vaughan_exact(x in -3.0f64..3.0, big_x in 500.0f64..3000.0) {
        let inst = derive_instance(1.05, 1e4, 1.0, &Overrides::new().with("x", big_x).with("mu", 0.4)).unwrap();
        let v = vaughan_decompose(&inst, |n| e_dd(Dd::powf(n as f64, 1.05).mul_f64(x))).unwrap();
        prop_assert!(v.residual <= 1e-9 * v.lambda_mass);
        prop_assert!(v.c_bound_holds);
        prop_assert!(v.a_ratio_max <= 1.0);
    }

    #[test]
    fn gamma_chain(x in 400.0f64..1500.0, delta in 0.5f64..6.0, z in 3.0f64..12.0, r in 1u32..=8) {
        let inst = common::centered(x, delta, z, z * z, r);
        let ctx = common::context(&inst);
        let (g, gp) = gamma_direct(&ctx);
        let (g1, g4) = gamma14_direct(&ctx);
        let slack = 1e-12 * g.abs();
        prop_assert!(g >= gp - slack, "{} < {}", g, gp);
        prop_assert!(gp >= 3.0 * g1 - 2.0 * g4 - slack, "{} < {}", gp, 3.0 * g1 - 2.0 * g4);
    }
}

//! Property tests for the structural invariants: symbol multiplicativity,
//! character periodicity, multiplicative solution counts, reduction
//! inequalities, summation accuracy, and rounding direction.

use num_complex::Complex64;
use proptest::prelude::*;
use siegel_margin_core::analytic::{partial_fraction_residual, round_down_3, round_up_3};
use siegel_margin_core::prime_tools::KahanSum;
use siegel_margin_core::quad_arith::{
    kronecker, nu_bruteforce, reduced_forms, FundamentalDiscriminant, NuOracle,
};

/// Small pool of fundamental `d` covering both parity classes.
const FUNDAMENTAL_POOL: [u64; 8] = [3, 4, 8, 15, 23, 24, 163, 2_383_747];

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

proptest! {
    #[test]
    fn kronecker_is_multiplicative_in_the_top_argument(
        a in -300i64..=300,
        b in -300i64..=300,
        n in 1i64..=400,
    ) {
        prop_assert_eq!(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
    }

    #[test]
    fn kronecker_is_multiplicative_in_the_bottom_argument(
        a in -300i64..=300,
        m in 1i64..=120,
        n in 1i64..=120,
    ) {
        prop_assert_eq!(kronecker(a, m * n), kronecker(a, m) * kronecker(a, n));
    }

    #[test]
    fn character_is_periodic_and_odd(
        pool_index in 0usize..FUNDAMENTAL_POOL.len(),
        n in 1i64..=100_000,
    ) {
        let disc = FundamentalDiscriminant::new(FUNDAMENTAL_POOL[pool_index]).unwrap();
        let period = disc.d() as i64;
        prop_assert_eq!(disc.chi(n + period), disc.chi(n));
        // Odd character: chi(-1) = -1, so chi(-n) = -chi(n) away from the
        // conductor and both vanish on it.
        prop_assert_eq!(disc.chi(-n), -disc.chi(n));
    }

    #[test]
    fn character_support_is_exactly_the_coprime_residues(
        pool_index in 0usize..FUNDAMENTAL_POOL.len(),
        n in 1u64..=50_000,
    ) {
        let disc = FundamentalDiscriminant::new(FUNDAMENTAL_POOL[pool_index]).unwrap();
        let value = disc.chi(n as i64);
        if gcd(n, disc.d()) == 1 {
            prop_assert!(value == 1 || value == -1);
        } else {
            prop_assert_eq!(value, 0);
        }
    }

    #[test]
    fn solution_count_is_multiplicative_on_coprime_parts(
        pool_index in 0usize..FUNDAMENTAL_POOL.len(),
        m in 1u64..=600,
        n in 1u64..=600,
    ) {
        prop_assume!(gcd(m, n) == 1);
        let disc = FundamentalDiscriminant::new(FUNDAMENTAL_POOL[pool_index]).unwrap();
        let oracle = NuOracle::new(disc, 360_000).unwrap();
        prop_assert_eq!(oracle.nu(m * n), oracle.nu(m) * oracle.nu(n));
    }

    #[test]
    fn solution_count_matches_congruence_enumeration(
        pool_index in 0usize..FUNDAMENTAL_POOL.len(),
        a in 1u64..=400,
    ) {
        let disc = FundamentalDiscriminant::new(FUNDAMENTAL_POOL[pool_index]).unwrap();
        let oracle = NuOracle::new(disc, 400).unwrap();
        prop_assert_eq!(oracle.nu(a), nu_bruteforce(&disc, a));
    }

    #[test]
    fn reduced_forms_satisfy_the_reduction_conditions(d in 3u64..=30_000) {
        let Ok(disc) = FundamentalDiscriminant::new(d) else {
            return Ok(());
        };
        let set = reduced_forms(&disc);
        prop_assert!(!set.forms.is_empty());
        for form in &set.forms {
            let (a, b, c) = (form.a as i64, form.b, form.c as i64);
            // Discriminant identity and the reduction box.
            prop_assert_eq!(b * b - 4 * a * c, -(d as i64));
            let reduced = (-a < b && b <= a && a < c) || (0 <= b && b <= a && a == c);
            prop_assert!(reduced, "form ({a}, {b}, {c}) of -{d} is not reduced");
        }
        // Exactly one principal form (b minimal residue, a = 1).
        let principal = set.forms.iter().filter(|f| f.a == 1).count();
        prop_assert_eq!(principal, 1);
    }

    #[test]
    fn compensated_summation_tracks_the_exact_sum(
        values in prop::collection::vec(-1.0e6f64..1.0e6, 1..200),
    ) {
        let mut kahan = KahanSum::new();
        for &v in &values {
            kahan.add(v);
        }
        // Exact reference via i128 arithmetic on scaled values would be
        // overkill; f64 inputs summed in two different orders bracket the
        // compensated result well inside a loose tolerance.
        let forward: f64 = values.iter().sum();
        let magnitude: f64 = values.iter().map(|v| v.abs()).sum();
        prop_assert!((kahan.value() - forward).abs() <= 1e-9 * magnitude.max(1.0));
    }

    #[test]
    fn third_decimal_rounding_brackets_conservatively(x in -1.0e4f64..1.0e4) {
        let up = round_up_3(x);
        let down = round_down_3(x);
        prop_assert!(down <= x && x <= up);
        prop_assert!(up - down <= 1e-3 + 1e-12);
        // Re-rounding keeps the bound direction; `k/1000 * 1000` can land
        // one ulp past the integer `k`, so it may drift one further milli,
        // never back across `x`.
        prop_assert!(round_up_3(up) >= up && round_up_3(up) - up <= 1e-3 + 1e-12);
        prop_assert!(round_down_3(down) <= down && down - round_down_3(down) <= 1e-3 + 1e-12);
    }

    #[test]
    fn partial_fraction_identity_holds_off_the_poles(
        re in -10.0f64..10.0,
        im in -10.0f64..10.0,
    ) {
        let s = Complex64::new(re, im);
        for pole in [0.0, -2.0, -3.0] {
            prop_assume!((s - Complex64::new(pole, 0.0)).norm() > 1e-2);
        }
        let residual = partial_fraction_residual(s).unwrap();
        prop_assert!(residual < 1e-9, "residual {residual:.3e} at {s}");
    }
}

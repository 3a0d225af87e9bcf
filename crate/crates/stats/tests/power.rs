use coach_stats::power::{chisq_critical, chisq_power};
use coach_stats::{chisq_power_n, noncentral_chisq_cdf, PowerSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Empirical CDF of a noncentral chi-square built from its definition as a
/// sum of squared shifted normals.
fn monte_carlo_cdf(df: usize, lambda: f64, xs: &[f64], draws: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = lambda.sqrt();
    let mut below = vec![0usize; xs.len()];
    for _ in 0..draws {
        let z0: f64 = StandardNormal.sample(&mut rng);
        let mut v = (z0 + shift).powi(2);
        for _ in 1..df {
            let z: f64 = StandardNormal.sample(&mut rng);
            v += z * z;
        }
        for (k, &x) in xs.iter().enumerate() {
            if v <= x {
                below[k] += 1;
            }
        }
    }
    below.iter().map(|&b| b as f64 / draws as f64).collect()
}

#[test]
fn cdf_matches_monte_carlo() {
    for &(df, lambda) in &[(9usize, 0.25 * 63.0), (1, 8.0), (4, 2.5)] {
        let xs = [2.0, 8.0, chisq_critical(df as f64, 0.05), 25.0, 40.0];
        let mc = monte_carlo_cdf(df, lambda, &xs, 1_000_000, 7 + df as u64);
        for (x, m) in xs.iter().zip(mc) {
            let exact = noncentral_chisq_cdf(*x, df as f64, lambda);
            assert!((exact - m).abs() < 2e-3, "df={df} λ={lambda} x={x}: {exact} vs {m}");
        }
    }
}

#[test]
fn nine_df_medium_effect_brackets_reference_size() {
    let n = chisq_power_n(&PowerSpec { w: 0.5, alpha: 0.05, df: 9, power: 0.80 }).unwrap();
    assert!((60..=66).contains(&n), "{n}");
    assert!(chisq_power(0.5, 0.05, 9, n) >= 0.80);
    assert!(chisq_power(0.5, 0.05, 9, n - 1) < 0.80);
}

#[test]
fn unit_effect_single_df() {
    assert_eq!(chisq_power_n(&PowerSpec { w: 1.0, alpha: 0.05, df: 1, power: 0.80 }).unwrap(), 8);
}

proptest! {
    #[test]
    fn power_increases_with_n(w in 0.1f64..1.5, df in 1u32..12, n in 1u64..200) {
        prop_assert!(chisq_power(w, 0.05, df, n + 1) >= chisq_power(w, 0.05, df, n) - 1e-12);
    }

    #[test]
    fn required_n_shrinks_with_effect(w in 0.2f64..1.0, df in 1u32..10, target in 0.5f64..0.95) {
        let small = chisq_power_n(&PowerSpec { w, alpha: 0.05, df, power: target }).unwrap();
        let large = chisq_power_n(&PowerSpec { w: w * 1.5, alpha: 0.05, df, power: target }).unwrap();
        prop_assert!(large <= small);
    }

    #[test]
    fn cdf_is_a_probability(x in 0.0f64..100.0, df in 1u32..20, lambda in 0.0f64..80.0) {
        let v = noncentral_chisq_cdf(x, f64::from(df), lambda);
        prop_assert!((0.0..=1.0).contains(&v));
    }
}

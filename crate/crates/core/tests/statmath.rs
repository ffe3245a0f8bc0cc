mod common;

use common::{simpson, std_phi, summarize};
use corrlink::sources::rng::{std_normal, substream};
use corrlink::statmath::*;
use proptest::prelude::*;

#[test]
fn q_reference_values() {
    assert_eq!(q(0.0), 0.5);
    assert!((q(-1.7) + q(1.7) - 1.0).abs() < 1e-15);
    let oracle = simpson(std_phi, 2.0, 40.0, 200_000);
    assert!((q(2.0) - oracle).abs() < 1e-12, "{} vs {oracle}", q(2.0));
    assert!((q(2.0) - 0.022750131948179).abs() < 1e-14);
}

#[test]
fn q_matches_quadrature_on_a_grid() {
    for i in 0..30 {
        let x = -3.0 + 0.4 * i as f64;
        let upper = simpson(std_phi, x.abs(), 40.0, 400_000);
        let oracle = if x >= 0.0 { upper } else { 1.0 - upper };
        assert!((q(x) - oracle).abs() < 1e-12, "x = {x}: {} vs {oracle}", q(x));
    }
}

#[test]
fn q_inv_examples() {
    assert!(q_inv(0.5).unwrap().abs() < 1e-12);
    assert!((q_inv(q(3.2)).unwrap() - 3.2).abs() < 1e-9);
    assert!((q_inv(0.0227501).unwrap() - 2.0).abs() < 1e-4);
    assert!(q_inv(0.0).is_err());
    assert!(q_inv(1.0).is_err());
    assert!(q_inv(-0.1).is_err());
}

#[test]
fn ln_q_deep_tail() {
    // continued fraction region against a log-space quadrature of φ
    for &t in &[12.0, 20.0, 37.5, 60.0] {
        let ln_phi_t = -0.5 * t * t - 0.5 * (2.0 * std::f64::consts::PI).ln();
        let tail = simpson(|x| (-0.5 * (x * x - t * t)).exp(), t, t + 5.0, 200_000);
        let oracle = ln_phi_t + tail.ln();
        assert!((ln_q(t) - oracle).abs() < 1e-9, "t = {t}");
        assert!((q_inv_ln(ln_q(t)).unwrap() - t).abs() < 1e-9 * t);
    }
}

#[test]
fn inverse_mills_examples() {
    assert!((inverse_mills(0.0) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
    assert!((inverse_mills(2.0) - std_phi(2.0) / q(2.0)).abs() < 1e-12);
    assert!((inverse_mills(2.0) - 2.3732155).abs() < 1e-6);
    let s10 = inverse_mills(10.0);
    assert!((10.0..=10.1).contains(&s10));
}

#[test]
fn inverse_mills_series_from_four() {
    // five-term expansion of 1/s; at t = 3 the error is 8.3e-3 against a 4.6e-3 allowance
    for i in 0..400 {
        let t = 4.0 + 0.1 * i as f64;
        let series = 1.0 / t - 1.0 / t.powi(3) + 3.0 / t.powi(5) - 15.0 / t.powi(7) + 105.0 / t.powi(9);
        let exact = 1.0 / inverse_mills(t);
        assert!(((series - exact) / exact).abs() <= 10.0 / t.powi(7), "t = {t}");
    }
}

#[test]
fn truncated_moments_examples() {
    let m0 = truncated_normal_moments(0.0);
    assert!((m0.mean - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
    assert!((m0.second_moment - 1.0).abs() < 1e-14);
    let m2 = truncated_normal_moments(2.0);
    let s = inverse_mills(2.0);
    assert!((m2.variance - (1.0 + 2.0 * s - s * s)).abs() < 1e-12);
    assert!((m2.variance - 0.1145).abs() < 1e-3);
    let m50 = truncated_normal_moments(50.0);
    assert!((m50.variance * 2500.0 - 1.0).abs() < 0.01);
}

#[test]
fn truncated_moments_against_quadrature() {
    for &t in &[0.5, 1.0, 2.0, 3.0, 5.0] {
        let z = simpson(std_phi, t, t + 30.0, 200_000);
        let m1 = simpson(|x| x * std_phi(x), t, t + 30.0, 200_000) / z;
        let m2 = simpson(|x| x * x * std_phi(x), t, t + 30.0, 200_000) / z;
        let m = truncated_normal_moments(t);
        assert!((m.mean - m1).abs() < 1e-10, "t = {t}");
        assert!((m.second_moment - m2).abs() < 1e-9, "t = {t}");
    }
}

#[test]
fn truncated_moments_against_rejection_sampling() {
    let mut rng = substream(99, 0);
    for &t in &[0.5, 1.0, 2.0, 3.0] {
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| std_normal(&mut rng))
            .filter(|z| *z > t)
            .collect();
        let s = summarize(&xs);
        let m = truncated_normal_moments(t);
        assert!((s.mean - m.mean).abs() < 4.0 * s.mean_se, "t = {t}");
        assert!((s.var - m.variance).abs() < 4.0 * s.var_se, "t = {t}");
    }
}

#[test]
fn geometric_entropy_examples() {
    assert!((geometric_entropy(0.5).unwrap() - 2.0).abs() < 1e-15);
    for k in [2.5, 10.0, 30.0, 400.0] {
        let p = geometric_entropy_inv(k).unwrap();
        assert!((geometric_entropy(p).unwrap() - k).abs() < 1e-9, "k = {k}");
    }
    let h = geometric_entropy(2f64.powi(-20)).unwrap();
    assert!((h - 21.4427).abs() < 1e-3);
    // h_g falls from infinity to 0 on (0, 1], so every k > 0 has a preimage
    assert_eq!(geometric_entropy(1.0).unwrap(), 0.0);
    let p1 = geometric_entropy_inv(1.0).unwrap();
    assert!((geometric_entropy(p1).unwrap() - 1.0).abs() < 1e-9);
    assert!(geometric_entropy_inv(0.0).is_err());
    assert!(geometric_entropy_inv(-3.0).is_err());
    assert!(geometric_entropy(0.0).is_err());
}

#[test]
fn geometric_entropy_log_domain_agrees() {
    for &p in &[0.3, 1e-3, 1e-9, 1e-30] {
        let a = geometric_entropy(p).unwrap();
        let b = geometric_entropy_ln(f64::ln(p));
        assert!((a - b).abs() < 1e-9 * a);
    }
    // beyond f64 range only the log form works
    let ln_p = geometric_entropy_inv_ln(10_000.0).unwrap();
    assert!((geometric_entropy_ln(ln_p) - 10_000.0).abs() < 1e-6);
}

#[test]
fn max_moments_small_n() {
    let m = max_normal_moments(2.0).unwrap();
    assert!((m.mean - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-10);
    assert!((m.second_moment - 1.0).abs() < 1e-10);
    assert!(max_normal_moments(1.0).is_err());
}

#[test]
fn max_moments_against_quadrature_and_monte_carlo() {
    // order-statistic density n φ Φ^{n-1}, integrated by Simpson
    let n = 1024.0;
    let dens = |x: f64| n * std_phi(x) * (1.0 - q(x)).powf(n - 1.0);
    let m1 = simpson(|x| x * dens(x), -3.0, 9.0, 200_000);
    let m2 = simpson(|x| x * x * dens(x), -3.0, 9.0, 200_000);
    let m = max_normal_moments_pow2(10).unwrap();
    assert!((m.mean - m1).abs() < 1e-9);
    assert!((m.second_moment - m2).abs() < 1e-8);
    assert!((m.mean - 3.24824).abs() < 1e-4);
    let ratio = m.mean / (20.0 * std::f64::consts::LN_2).sqrt();
    assert!((0.85..=1.0).contains(&ratio));

    let mut rng = substream(5, 1);
    let xs: Vec<f64> = (0..20_000)
        .map(|_| (0..1024).map(|_| std_normal(&mut rng)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let s = summarize(&xs);
    assert!((s.mean - m.mean).abs() < 4.0 * s.mean_se);
    assert!((s.var - m.variance).abs() < 4.0 * s.var_se);
}

#[test]
fn max_moments_variance_shrinks() {
    let v10 = max_normal_moments_pow2(10).unwrap().variance;
    let v20 = max_normal_moments_pow2(20).unwrap().variance;
    let v80 = max_normal_moments_pow2(80).unwrap();
    assert!(v20 <= v10);
    assert!((v80.mean - 10.27266).abs() < 1e-4);
    assert!((v80.variance - 0.015107).abs() < 1e-5);
}

proptest! {
    #[test]
    fn q_is_decreasing_and_invertible(t in -6.0f64..40.0, dt in 1e-3f64..1.0) {
        // Q itself underflows past about 38.4; its logarithm does not
        if t + dt < 37.0 {
            prop_assert!(q(t + dt) < q(t));
        }
        prop_assert!(ln_q(t + dt) < ln_q(t));
        let back = q_inv_ln(ln_q(t)).unwrap();
        prop_assert!((back - t).abs() < 1e-9 * t.abs().max(1.0));
    }

    #[test]
    fn q_inv_relative_round_trip(p in 1e-300f64..0.999) {
        let t = q_inv(p).unwrap();
        prop_assert!(((q(t) - p) / p).abs() < 1e-10);
    }

    #[test]
    fn inverse_mills_bracket(t in 1e-3f64..200.0) {
        let s = inverse_mills(t);
        prop_assert!(s >= t && s <= t + 1.0 / t, "t = {}, s = {}", t, s);
    }

    #[test]
    fn truncated_moment_identities(t in -5.0f64..100.0) {
        let m = truncated_normal_moments(t);
        prop_assert!((m.second_moment - (1.0 + t * m.mean)).abs() < 1e-9 * m.second_moment);
        prop_assert!(m.variance > 0.0);
    }

    #[test]
    fn geometric_entropy_small_p_bound(p in 1e-300f64..0.2) {
        let h = geometric_entropy(p).unwrap();
        prop_assert!((h + p.log2()).abs() <= std::f64::consts::LOG2_E + 1.0);
    }

    #[test]
    fn geometric_entropy_inverse_round_trip(k in 2.01f64..5000.0) {
        let ln_p = geometric_entropy_inv_ln(k).unwrap();
        prop_assert!((geometric_entropy_ln(ln_p) - k).abs() < 1e-9 * k.max(1.0));
    }
}

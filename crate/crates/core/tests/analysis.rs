mod common;

use std::f64::consts::{LN_2, PI};

use common::{simpson, std_phi, summarize};
use corrlink::analysis::*;
use corrlink::linalg::{CorrelationMatrix, Matrix};
use corrlink::sources::*;
use corrlink::statmath::{inverse_mills, max_normal_moments_pow2, q, truncated_normal_moments};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn zhang_berger_examples() {
    assert!((zhang_berger_optimal(0.0, 10.0) - 1.0 / (20.0 * LN_2)).abs() < 1e-15);
    assert!((zhang_berger_optimal(0.0, 10.0) - 0.07214).abs() < 1e-5);
    assert_eq!(zhang_berger_optimal(1.0, 10.0), 0.0);
    assert!(zhang_berger_variance(0.5, 10.0, 0.0).is_err());
    for &rho in &[0.0, 0.4, 0.9] {
        let k = 25.0;
        // log grid on [1e-8, 2]
        let best = (0..=4000)
            .map(|i| zhang_berger_variance(rho, k, 1e-8 * 2e8f64.powf(i as f64 / 4000.0)).unwrap())
            .fold(f64::INFINITY, f64::min);
        let opt = zhang_berger_optimal(rho, k);
        assert!(best >= opt * (1.0 - 1e-12));
        assert!(rel(best, opt) < 1e-6, "rho {rho}: {best} vs {opt}");
    }
}

fn log_density_y_given_x(rho: f64, x: f64, y: f64) -> f64 {
    let v = 1.0 - rho * rho;
    -0.5 * (2.0 * PI * v).ln() - (y - rho * x).powi(2) / (2.0 * v)
}

#[test]
fn scalar_fisher_against_finite_differences() {
    assert_eq!(fisher_scalar_given_x(0.0, 1.7), 1.7 * 1.7);
    let r = 0.6f64;
    assert!((fisher_scalar_given_x(r, 0.0) - 2.0 * r * r / (1.0 - r * r).powi(2)).abs() < 1e-14);
    let (rho, x) = (0.4f64, 2.0);
    let h = 1e-5;
    let sd = (1.0 - rho * rho).sqrt();
    // E[score²] with the score from a central difference
    let integrand = |y: f64| {
        let score = (log_density_y_given_x(rho + h, x, y) - log_density_y_given_x(rho - h, x, y)) / (2.0 * h);
        score * score * log_density_y_given_x(rho, x, y).exp()
    };
    let oracle = simpson(integrand, rho * x - 12.0 * sd, rho * x + 12.0 * sd, 4000);
    assert!((fisher_scalar_given_x(rho, x) - oracle).abs() < 1e-5, "{oracle}");
}

#[test]
fn threshold_and_max_fisher_examples() {
    for &t in &[-1.0, 0.0, 1.5, 4.0] {
        let s = inverse_mills(t);
        assert!((fisher_threshold(0.0, t) - (1.0 + t * s)).abs() < 1e-12);
    }
    for &rho in &[0.0f64, 0.3, 0.8] {
        let r2 = rho * rho;
        let want = ((1.0 - r2) + 2.0 * r2) / (1.0 - r2).powi(2);
        assert!((fisher_max(rho, 1).unwrap() - want).abs() < 1e-10);
    }
}

#[test]
fn threshold_efficiency_tends_to_one() {
    let rho = 0.7;
    let mut prev = f64::INFINITY;
    for &k in &[5.0, 20.0, 100.0, 1000.0] {
        let t = threshold_for_bits(k).unwrap();
        let eff = exact_threshold_variance(rho, t) * fisher_threshold(rho, t);
        let gap = eff - 1.0;
        assert!(gap >= 0.0 && gap < prev);
        prev = gap;
    }
    assert!(prev < 0.01);
}

#[test]
fn exact_threshold_variance_examples() {
    for &t in &[-0.5, 0.0, 2.0] {
        let s = inverse_mills(t);
        assert!((exact_threshold_variance(0.0, t) - 1.0 / (s * s)).abs() < 1e-14);
    }
    let rho = 0.5f64;
    let c = (2.0 / PI).sqrt();
    let at0 = (PI / 2.0) * (1.0 - rho * rho * c * c);
    assert!((exact_threshold_variance(rho, 0.0) - at0).abs() < 1e-13);
    for &t in &[-1.0, 0.5, 3.0, 6.0] {
        let m = truncated_normal_moments(t);
        for &rho in &[0.1, 0.9] {
            let a = exact_threshold_variance(rho, t);
            let b = selected_sample_variance(rho, m.mean, m.variance);
            assert!(rel(a, b) < 1e-10);
            assert_eq!(additive_exact(MarginalLaw::StdNormal, rho, t).unwrap(), b);
        }
    }
}

#[test]
fn exact_max_variance_against_quadrature() {
    // density of the max of n = 8 normals
    let n = 8.0f64;
    let cdf = |x: f64| 1.0 - q(x);
    let f = |x: f64| n * cdf(x).powf(n - 1.0) * std_phi(x);
    let m1 = simpson(|x| x * f(x), -10.0, 10.0, 8000);
    let m2 = simpson(|x| x * x * f(x), -10.0, 10.0, 8000);
    let rho = 0.6;
    let want = selected_sample_variance(rho, m1, m2 - m1 * m1);
    assert!(rel(exact_max_variance(rho, 3).unwrap(), want) < 1e-8);
}

fn random_yvec(vals: &[f64], d: usize) -> (Vec<f64>, CorrelationMatrix) {
    let rho: Vec<f64> = vals[..d].iter().map(|v| 0.9 * v).collect();
    let model = JointModel::yvec_independent_noise(&rho).unwrap();
    let JointModel::GaussianYVec { sigma_y, .. } = model else { unreachable!() };
    (rho, sigma_y)
}

proptest! {
    #[test]
    fn crlb_below_exact_scalar(rho in -0.99f64..0.99, t in -2.0f64..8.0) {
        let exact = exact_threshold_variance(rho, t);
        let crlb = 1.0 / fisher_threshold(rho, t);
        prop_assert!(exact >= crlb * (1.0 - 1e-12));
    }

    #[test]
    fn crlb_below_exact_max(rho in -0.99f64..0.99, k in 1u32..40) {
        let r = theory_max(rho, k).unwrap();
        prop_assert!(r.exact_variance.unwrap() >= r.crlb_trace * (1.0 - 1e-12));
        prop_assert!(r.asymptotic_variance > 0.0);
    }

    #[test]
    fn sherman_morrison_yvec(vals in prop::collection::vec(-1.0f64..1.0, 4), ex2 in 0.5f64..50.0) {
        let (rho, sigma_y) = random_yvec(&vals, 4);
        let f = fisher_yvec(&rho, &sigma_y, ex2).unwrap();
        let direct = to_na(&f.fisher).try_inverse().unwrap();
        let diff = (to_na(&f.inverse) - &direct).norm();
        prop_assert!(diff < 1e-9 * direct.norm().max(1.0), "diff {}", diff);
        prop_assert!(to_na(&f.fisher).symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn yvec_crlb_below_exact(vals in prop::collection::vec(-1.0f64..1.0, 3), k in 2.0f64..200.0) {
        let (rho, sigma_y) = random_yvec(&vals, 3);
        let r = theory_yvec(&rho, &sigma_y, k).unwrap();
        prop_assert!(r.exact_variance.unwrap() >= r.crlb_trace * (1.0 - 1e-10));
    }

    #[test]
    fn xvec_fisher_inverse_consistent(
        vals in prop::collection::vec(-0.5f64..0.5, 3),
        c in -0.3f64..0.6,
        alpha in 1.0f64..100.0,
        sigma2 in 0.05f64..1.0,
    ) {
        let sigma_x = CorrelationMatrix::equicorrelated(3, c).unwrap();
        let f = fisher_xvec(&vals, &sigma_x, alpha, sigma2).unwrap();
        let prod = f.fisher.matmul(&f.inverse).sub(&Matrix::identity(3));
        prop_assert!(prod.frobenius_norm() < 1e-9);
    }
}

#[test]
fn yvec_fisher_reductions() {
    let sy = CorrelationMatrix::equicorrelated(3, 0.2).unwrap();
    let f = fisher_yvec(&[0.0; 3], &sy, 4.0).unwrap();
    assert!(f.fisher.max_abs_diff(&corrlink::linalg::invert(sy.matrix()).unwrap().scale(4.0)) < 1e-12);
    assert!(f.inverse.max_abs_diff(&sy.matrix().scale(0.25)) < 1e-12);
    let t = 1.3;
    let ex2 = truncated_normal_moments(t).second_moment;
    let one = fisher_yvec(&[0.6], &CorrelationMatrix::identity(1), ex2).unwrap();
    assert!(rel(one.fisher[(0, 0)], fisher_threshold(0.6, t)) < 1e-12);
}

#[test]
fn xvec_fisher_reductions() {
    let sx = CorrelationMatrix::equicorrelated(2, 0.4).unwrap();
    let f = fisher_xvec(&[0.0, 0.0], &sx, 30.0, 1.0).unwrap();
    assert!(f.inverse.max_abs_diff(&sx.matrix().scale(1.0 / 30.0)) < 1e-14);
}

#[test]
fn xvec_bound_examples() {
    let rho = [0.5, 0.5, 0.5];
    assert!(rel(xvec_bound(&rho, 3, 100.0), naive_scalar_bound(&rho, 100.0)) < 1e-14);
    assert_eq!(xvec_bound(&[1.0, 0.2], 2, 100.0), 0.0);
    let uneven = [0.95, 0.1];
    assert!(xvec_bound(&uneven, 2, 100.0) < naive_scalar_bound(&uneven, 100.0));
}

#[test]
fn stopping_set_alpha_against_quadrature() {
    let (a, b, d) = (5.0, 0.5, 3);
    let strong = simpson(|w| w * w * std_phi(w), a, a + 15.0, 4000) / q(a);
    let weak = simpson(|w| w * w * std_phi(w), -b, b, 400) / (1.0 - 2.0 * q(b));
    let want = strong + (d as f64 - 1.0) * weak;
    // α here is the per-column mean square, tr E WWᵀ / d
    assert!(rel(stopping_set_alpha(a, b, d), want) < 1e-9);
    let (lo, hi) = stopping_set_bracket(a, b, d).unwrap();
    let inv = 1.0 / stopping_set_alpha(a, b, d);
    assert!(lo <= inv && inv <= hi);
    assert!(stopping_set_bracket(1.0, 1.0, 3).is_err());
}

#[test]
fn quantization_bounds() {
    let want = 4f64.powi(6) * ((-18.0f64).exp() + 2f64.powi(-8));
    assert!(rel(quantization_loss_bound(6.0, 8.0, 2), want) < 1e-14);
    assert!(quantization_loss_bound(60.0, 200.0, 2) < 1e-50);
}

#[test]
fn linear_transform_trace_against_direct() {
    let m = Matrix::from_rows(&[vec![0.9, 0.3], vec![-0.2, 1.1]]);
    let (v1, v2) = (0.4, 0.7);
    let inv = corrlink::linalg::invert(&m).unwrap();
    let direct = inv.matmul(&Matrix::from_diag(&[v1, v2])).matmul(&inv.transpose()).trace();
    assert!(rel(linear_transform_trace(&m, v1, v2).unwrap(), direct) < 1e-12);
    let sing = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]);
    assert!(linear_transform_trace(&sing, 1.0, 1.0).is_err());
}

#[test]
fn additive_and_pareto_examples() {
    assert!((pareto_exponent(4.0) - 1.0 / 3.0).abs() < 1e-15);
    assert!(rel(laplace_theory(1.0, 10.0), 1.0 / (LN_2 * LN_2 * 100.0)) < 1e-14);
    assert!((pareto_unquantized_floor(4.0, 0.8) - 0.08).abs() < 1e-15);
    let (mean, var) = MarginalLaw::Laplace.conditional_moments(2.0).unwrap();
    assert_eq!((mean, var), (2.0 + 0.5f64.sqrt(), 0.5));
    let p = pareto_theory(4.0, 0.5, 60.0).unwrap();
    assert!(p.finite_bound > 0.0 && p.mse_bound > 0.0);
    let p2 = pareto_theory(4.0, 0.5, 120.0).unwrap();
    assert!(p2.finite_bound < p.finite_bound);
}

#[test]
fn laplace_exact_tends_to_asymptotic() {
    let rho = 0.5;
    let k = 400.0;
    let r = theory_additive(MarginalLaw::Laplace, rho, k).unwrap();
    assert!(rel(r.exact_variance.unwrap(), laplace_theory(rho, k)) < 0.05);
}

#[test]
fn binary_example_values() {
    let (g, n) = binary_example_theory(0.5, 10.0);
    assert!((g - 0.25 / (20.0 * LN_2)).abs() < 1e-15);
    assert!((n - 0.025).abs() < 1e-15);
    assert_eq!(binary_example_theory(0.0, 10.0), (0.0, 0.0));
    assert_eq!(binary_example_theory(1.0, 10.0), (0.0, 0.0));
    for &(p, k) in &[(0.1, 5.0), (0.3, 70.0)] {
        let (g, n) = binary_example_theory(p, k);
        assert!((g / n - 1.0 / (2.0 * LN_2)).abs() < 1e-14);
        assert!((1.0 / (2.0 * LN_2) - 0.7213).abs() < 1e-4);
    }
}

#[test]
fn clt_binary_exact_against_monte_carlo() {
    let (flip, m, t) = (0.2, 64, 1.5);
    let th = clt_binary_exact(flip, m, t).unwrap();
    let model = JointModel::BlockAveraged {
        inner: Box::new(JointModel::DoublySymmetricBinary { p: flip }),
        m,
    };
    let src = Source::new(&model).unwrap();
    let plan = src.threshold_plan(Statistic::Coordinate(0), t).unwrap();
    assert!(rel(plan.ln_p.unwrap().exp(), th.crossing_probability) < 1e-12);
    let s = inverse_mills(t);
    let rho = 1.0 - 2.0 * flip;
    let (mut err, mut sq) = (vec![], vec![]);
    for trial in 0..100_000 {
        let mut st = src.stream(8, trial);
        let h = st.scan_threshold(&plan, f64::INFINITY).unwrap();
        let e = st.bob_sample(h.index).unwrap()[0] / s - rho;
        err.push(e);
        sq.push(e * e);
    }
    let se = summarize(&err);
    let ss = summarize(&sq);
    assert!((se.mean - th.bias).abs() < 5.0 * se.mean_se, "{} vs {}", se.mean, th.bias);
    assert!((ss.mean - th.mse).abs() < 5.0 * ss.mean_se, "{} vs {}", ss.mean, th.mse);
    assert!(clt_binary_exact(flip, 4, 2.5).is_err());
}

#[test]
fn theory_reports_are_consistent() {
    let r = theory_threshold(0.6, 20.0).unwrap();
    let t = r.bound("t").unwrap();
    assert!(rel(r.exact_variance.unwrap(), exact_threshold_variance(0.6, t)) < 1e-15);
    assert!(r.exact_variance.unwrap() >= r.crlb_trace);
    assert!(rel(r.asymptotic_variance, zhang_berger_optimal(0.6, 20.0)) < 1e-15);
    let m = max_normal_moments_pow2(10).unwrap();
    let rm = theory_max(0.3, 10).unwrap();
    assert!(rel(rm.crlb_trace, 1.0 / fisher_from_second_moment(0.3, m.second_moment)) < 1e-14);
    let params = corrlink::protocol::allocate_bits_xvec(400.0, 2, 0.3).unwrap();
    let rx = theory_xvec(&[0.95, 0.1], &CorrelationMatrix::identity(2), &params).unwrap();
    assert!(rel(rx.k, 400.0) < 1e-12);
    assert!(rx.bound("unquantized_lower").unwrap() <= rx.bound("unquantized_upper").unwrap());
    assert!(!rx.to_string().is_empty());
}

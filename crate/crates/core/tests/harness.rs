use corrlink::analysis::exact_threshold_variance;
use corrlink::harness::*;
use corrlink::Error;
use proptest::prelude::*;

const THRESHOLD_CFG: &str = "
# two-point threshold sweep
scheme = threshold
grid.k = 20
grid.rho = 0, 0.5
trials = 100000
seed = 42
";

#[test]
fn threshold_sweep_matches_exact_variance() {
    let cfg = ExperimentConfig::parse(THRESHOLD_CFG).unwrap();
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let rho = row.point.rho[0];
        let exact = row.theory.exact.unwrap();
        let th = corrlink::analysis::threshold_for_bits(20.0).unwrap();
        assert!((exact - exact_threshold_variance(rho, th)).abs() < 1e-15);
        assert!((row.variance - exact).abs() <= 4.0 * row.variance_se, "rho {rho}");
        assert!(row.bias.abs() <= 4.0 * row.bias_se);
        assert!(row.variance >= 0.0 && row.failures <= row.trials);
        assert!((row.bits_expected_mean - 20.0).abs() < 1e-6);
        assert_eq!(row.d, 1);
        assert_eq!(row.bits_realized_mean, None);
    }
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let text = "
scheme = xvec
grid.k = 200
grid.rho = 0.95|0.1, 0.5|0.5
model.sigma_x = 0.2
trials = 3000
seed = 7
ledger = realized
";
    let cfg = ExperimentConfig::parse(text).unwrap();
    let one = csv_string(&run_sweep_threads(&cfg, Some(1)).unwrap());
    let four = csv_string(&run_sweep_threads(&cfg, Some(4)).unwrap());
    assert_eq!(one, four);
    let again = csv_string(&run_sweep_threads(&cfg, Some(3)).unwrap());
    assert_eq!(one, again);
}

#[test]
fn config_validation_errors() {
    let bad = |text: &str| ExperimentConfig::parse(text).unwrap_err();
    assert!(matches!(
        bad("scheme = threshold\ngrid.k = 20\ngrid.rho = 0.5\ntrials = 0"),
        Error::Config(m) if m.contains("trials")
    ));
    assert!(matches!(bad("grid.k = 20\ngrid.rho = 0.5"), Error::Config(m) if m.contains("scheme")));
    assert!(matches!(
        bad("scheme = threshold\ngrid.k = 20\ngrid.rho = 0.5\ncolour = red"),
        Error::Parse { line: 4, .. }
    ));
    assert!(matches!(
        bad("scheme = threshold\ngrid.k = 20\ngrid.k = 30\ngrid.rho = 0.5"),
        Error::Parse { line: 3, .. }
    ));
    assert!(matches!(bad("scheme = threshold\ngrid.k = 20\ngrid.rho = 1.5"), Error::Config(_)));
    assert!(matches!(bad("scheme = max\ngrid.k = 2.5\ngrid.rho = 0.5"), Error::Config(m) if m.contains("grid.k")));
    assert!(matches!(bad("scheme = clt\ngrid.k = 20\ngrid.rho = 0.5"), Error::Config(m) if m.contains("grid.m")));
    // infeasible grid point names the point
    match bad("scheme = clt\ngrid.k = 20\ngrid.rho = 0.5\ngrid.m = 16") {
        Error::Config(m) => assert!(m.contains("k = 20") && m.contains("need m >="), "{m}"),
        e => panic!("{e}"),
    }
    assert!(matches!(bad("scheme = threshold\nnot a pair"), Error::Parse { line: 2, .. }));
    assert!(matches!(bad("scheme = bogus\ngrid.k = 20\ngrid.rho = 0.5"), Error::Config(_)));
}

#[test]
fn config_defaults_and_points() {
    let cfg = ExperimentConfig::parse("scheme = pareto\ngrid.k = 30, 60\ngrid.rho = 0.6\ngrid.alpha = 4, 5").unwrap();
    assert_eq!(cfg.trials, 10_000);
    assert_eq!(cfg.seed, 1);
    assert_eq!(cfg.wait_cap.factor, 1024.0);
    let pts = cfg.points();
    assert_eq!(pts.len(), 4);
    assert_eq!((pts[0].k, pts[0].alpha), (30.0, Some(4.0)));
    assert_eq!((pts[1].k, pts[1].alpha), (30.0, Some(5.0)));
    assert_eq!(pts[3].k, 60.0);
    let v = ExperimentConfig::parse("scheme = yvec\ngrid.k = 40\ngrid.rho = 0.9|0.5|0.1|-0.3").unwrap();
    assert_eq!(v.points()[0].rho_spec(), "0.9|0.5|0.1|-0.3");
    for s in Scheme::ALL {
        assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
    }
}

#[test]
fn excessive_failures_abort_the_sweep() {
    let cfg = ExperimentConfig::parse("scheme = threshold\ngrid.k = 12\ngrid.rho = 0.5\ntrials = 2000\nwait_cap = 1").unwrap();
    match run_sweep(&cfg) {
        Err(Error::FailureRate { failures, trials }) => {
            assert_eq!(trials, 2000);
            assert!(failures * 10 > trials);
        }
        other => panic!("expected a failure-rate error, got {other:?}"),
    }
}

#[test]
fn failures_below_limit_are_counted() {
    // a cap of 8/p loses about e^-8 of the trials
    let cfg = ExperimentConfig::parse("scheme = threshold\ngrid.k = 12\ngrid.rho = 0.5\ntrials = 20000\nwait_cap = 4").unwrap();
    let rows = run_sweep(&cfg).unwrap();
    assert!(rows[0].failures > 0 && rows[0].failures * 10 < 20_000, "{}", rows[0].failures);
}

#[test]
fn csv_layout_and_round_trip() {
    assert_eq!(COLUMNS.len(), 18);
    let empty = csv_string(&[]);
    assert_eq!(empty.trim_end(), COLUMNS.join(","));
    let text = "scheme = yvec\ngrid.k = 20, 40\ngrid.rho = 0.9|0.5, 0.3|0.1\ntrials = 500";
    let cfg = ExperimentConfig::parse(text).unwrap();
    let rows = run_sweep(&cfg).unwrap();
    let out = csv_string(&rows);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5);
    for l in &lines {
        assert_eq!(l.split(',').count(), 18);
    }
    let recs = parse_csv(&out).unwrap();
    assert_eq!(recs.len(), 4);
    assert_eq!(records_csv_string(&recs), out);
    for (rec, row) in recs.iter().zip(&rows) {
        assert_eq!(*rec, CsvRecord::from_row(row));
        assert_eq!(rec.rho_spec, row.point.rho_spec());
        assert_eq!(rec.d, 2);
        // ten significant digits
        let printed: f64 = format_real(Some(row.mse)).parse().unwrap();
        assert_eq!(rec.mse, Some(printed));
        assert!((printed - row.mse).abs() <= 1e-9 * row.mse.abs());
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    emit_csv(&rows, &path).unwrap();
    assert_eq!(read_csv(&path).unwrap(), recs);
    let bad = dir.path().join("missing").join("rows.csv");
    match emit_csv(&rows, &bad) {
        Err(Error::Io { path, .. }) => assert_eq!(path, bad),
        other => panic!("expected an I/O error, got {other:?}"),
    }
    assert!(parse_csv("a,b,c\n1,2,3\n").is_err());
}

#[test]
fn na_fields() {
    assert_eq!(format_real(None), "NA");
    assert_eq!(format_real(Some(f64::NAN)), "NA");
    assert_eq!(format_real(Some(0.0721347520)), "7.213475200e-2");
    let cfg = ExperimentConfig::parse("scheme = naive\ngrid.k = 40\ngrid.rho = 0.6|0.3\ntrials = 200").unwrap();
    let rec = CsvRecord::from_row(&run_sweep(&cfg).unwrap()[0]);
    assert_eq!(rec.theory_bound, None);
    assert_eq!(rec.alpha, None);
    assert_eq!(rec.m, None);
}

fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn one_pass_moments_match_two_pass() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    // a large offset is where naive sum-of-squares formulas break down
    let xs: Vec<f64> = (0..1_000_000).map(|_| 1e6 + rng.random::<f64>()).collect();
    let mut m = Moments::new();
    for &x in &xs {
        m.push(x);
    }
    let (mean, var) = two_pass(&xs);
    assert_eq!(m.count(), 1_000_000);
    assert!(((m.mean() - mean) / mean).abs() < 1e-12);
    assert!(((m.variance() - var) / var).abs() < 1e-9);
    // merging chunks gives the same answer
    let mut merged = Moments::new();
    for chunk in xs.chunks(4096) {
        let mut c = Moments::new();
        for &x in chunk {
            c.push(x);
        }
        merged.merge(&c);
    }
    assert!(((merged.variance() - var) / var).abs() < 1e-9);
    // uniform: Var(s²) has a closed form through μ4 = 1/80
    let se = m.variance_se();
    let want = ((1.0 / 80.0 - (1.0f64 / 12.0).powi(2) * (1e6 - 3.0) / (1e6 - 1.0)) / 1e6).sqrt();
    assert!((se / want - 1.0).abs() < 0.01);
}

proptest! {
    #[test]
    fn merge_is_order_free(xs in prop::collection::vec(-1e3f64..1e3, 2..200), cut in 0usize..200) {
        let cut = cut.min(xs.len());
        let mut whole = Moments::new();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Moments::new(), Moments::new());
        xs[..cut].iter().for_each(|&x| a.push(x));
        xs[cut..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let (mean, var) = two_pass(&xs);
        prop_assert!((a.mean() - mean).abs() <= 1e-9 * (1.0 + mean.abs()));
        prop_assert!((a.variance() - var).abs() <= 1e-8 * (1.0 + var));
        prop_assert!((whole.variance() - var).abs() <= 1e-8 * (1.0 + var));
        prop_assert!(a.variance() >= 0.0);
    }
}

#[test]
fn selftest_passes() {
    let checks = selftest();
    assert!(checks.len() >= 8);
    for c in &checks {
        assert!(c.passed, "{}: {}", c.name, c.detail);
    }
}

mod common;

use common::summarize;
use corrlink::analysis::w_quantization_error_bound;
use corrlink::linalg::{CorrelationMatrix, Matrix};
use corrlink::protocol::golomb::*;
use corrlink::protocol::*;
use corrlink::sources::*;
use corrlink::statmath::{geometric_entropy, geometric_entropy_inv, geometric_entropy_ln, q, q_inv};
use proptest::prelude::*;

#[test]
fn golomb_examples() {
    // m = 3: remainders 0 -> "0", 1 -> "10", 2 -> "11"
    let mut w = BitWriter::new();
    assert_eq!(golomb_encode(&mut w, 7, 3), 5);
    let mut r = w.reader();
    assert_eq!(golomb_decode(&mut r, 3).unwrap(), 7);
    assert_eq!(r.position(), 5);
    assert_eq!(golomb_length(0.0, 1.0), 1);
    assert_eq!(golomb_length(5.0, 1.0), 6);
    assert_eq!(golomb_parameter(0.5), 1.0);
    // p small: m ≈ ln2 / p
    let m = golomb_parameter(1e-6);
    assert!((m - std::f64::consts::LN_2 * 1e6).abs() < 2.0);
    assert!(golomb_parameter_ln(-500.0).is_finite());
    assert!(golomb_decode(&mut BitWriter::new().reader(), 4).is_err());
}

proptest! {
    #[test]
    fn golomb_round_trip(n in 0u64..100_000, m in 1u64..5_000) {
        let mut w = BitWriter::new();
        let len = golomb_encode(&mut w, n, m);
        prop_assert_eq!(len as u64, golomb_length(n as f64, m as f64));
        let mut r = w.reader();
        prop_assert_eq!(golomb_decode(&mut r, m).unwrap(), n);
        prop_assert_eq!(r.position(), w.len());
    }

    #[test]
    fn golomb_concatenated(ns in prop::collection::vec(0u64..5000, 1..20), m in 1u64..300) {
        let mut w = BitWriter::new();
        for &n in &ns {
            golomb_encode(&mut w, n, m);
        }
        let mut r = w.reader();
        for &n in &ns {
            prop_assert_eq!(golomb_decode(&mut r, m).unwrap(), n);
        }
    }

    #[test]
    fn quantizer_error_within_half_cell(x in -3.0f64..3.0, bits in 1u32..12) {
        let qz = UniformQuantizer::new(-2.0, 2.0, 2f64.powi(bits as i32));
        let v = qz.quantize(x);
        if x.abs() <= 2.0 {
            prop_assert!((v - x).abs() <= qz.width() / 2.0 + 1e-12);
        } else {
            prop_assert!((v.abs() - (2.0 - qz.width() / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn pareto_value_error_bound(frac in 0.0001f64..1.0, k_q in 0u32..16) {
        let (t, u) = (1.5, 7.0);
        let x = t + frac * (u - t);
        let (xh, bits) = quantize_pareto_value(x, t, u, k_q).unwrap();
        prop_assert_eq!(bits, k_q);
        prop_assert!((x - xh).abs() <= 2f64.powi(-(k_q as i32)) * (u - t) / 2.0 + 1e-12);
    }
}

#[test]
fn pareto_value_examples() {
    let (x, _) = quantize_pareto_value(2.2, 1.0, 3.0, 0).unwrap();
    assert_eq!(x, 2.0);
    assert_eq!(quantize_pareto_value(8.0, 1.0, 3.0, 4).unwrap().0, 3.0);
    let (x, bits) = quantize_pareto_value(1.6, 1.0, 3.0, 2).unwrap();
    assert_eq!((x, bits), (1.75, 2));
    assert!((1.6f64 - 1.75).abs() <= 0.5);
    assert!(matches!(
        quantize_pareto_value(0.9, 1.0, 3.0, 2),
        Err(corrlink::Error::Contract(_))
    ));
}

fn raw_params(a: f64, b: f64, d: usize, k_q: u32) -> StoppingSetParams {
    StoppingSetParams { a, b, d, k_l: 0.0, k_q }
}

#[test]
fn w_matrix_quantizer_examples() {
    let p = raw_params(4.0, 1.0, 2, 6);
    let w = Matrix::from_rows(&[vec![4.3, 0.71], vec![-0.99, -5.2]]);
    let (wh, bits) = quantize_w_matrix(&w, &p);
    assert_eq!(bits, 24);
    assert!((wh[(0, 1)] - 0.71).abs() <= 1.0 / 32.0);
    assert!((wh[(1, 0)] + 0.99).abs() <= 1.0 / 32.0);
    assert!(wh[(1, 1)] < 0.0 && wh[(0, 0)] > 0.0);
    // past c = √3 a the diagonal saturates
    let big = Matrix::from_rows(&[vec![100.0, 0.0], vec![0.0, -100.0]]);
    let (bh, _) = quantize_w_matrix(&big, &p);
    assert!(bh[(0, 0)] <= p.c() && bh[(0, 0)] > p.c() - 0.1);
    // many bits: entries inside the range come back almost unchanged
    let fine = raw_params(4.0, 1.0, 2, 40);
    let (wf, _) = quantize_w_matrix(&w, &fine);
    assert!(wf.max_abs_diff(&w) < 1e-9);
}

#[test]
fn w_matrix_error_bound_holds_empirically() {
    let p = StoppingSetParams::from_thresholds(5.0, 0.5, 2, 4).unwrap();
    let model = JointModel::GaussianXVec {
        rho: vec![0.5, 0.2],
        sigma_x: CorrelationMatrix::identity(2),
    };
    let src = Source::new(&model).unwrap();
    let plan = src.stopping_plan(&Matrix::identity(2), p.a, p.b).unwrap();
    let mut errs = vec![];
    for trial in 0..20_000 {
        let mut s = src.stream(31, trial);
        let hits = s.scan_stopping(&plan, f64::INFINITY).unwrap();
        let mut w = Matrix::zeros(2, 2);
        for (l, h) in hits.iter().enumerate() {
            for i in 0..2 {
                w[(i, l)] = h.x[i];
            }
        }
        let (wh, _) = quantize_w_matrix(&w, &p);
        errs.push(wh.sub(&w).frobenius_norm().powi(2));
    }
    let s = summarize(&errs);
    let bound = w_quantization_error_bound(&p);
    assert!(s.mean + 3.0 * s.mean_se <= bound, "{} vs {bound}", s.mean);
}

#[test]
fn stopping_params_invariants() {
    assert!(StoppingSetParams::from_thresholds(3.0, 1.0, 2, 4).is_err());
    assert!(StoppingSetParams::from_thresholds(5.0, 1.0, 2, 0).is_err());
    let p = StoppingSetParams::from_thresholds(5.0, 1.0, 2, 4).unwrap();
    assert!((p.crossing_probability() - 2.0 * q(5.0) * (1.0 - 2.0 * q(1.0))).abs() < 1e-18);
    assert!((geometric_entropy(p.crossing_probability()).unwrap() - p.k_l).abs() < 1e-9);
    assert!((p.budget() - (2.0 * p.k_l + 16.0)).abs() < 1e-12);
    // d = 1: two-sided threshold
    let one = StoppingSetParams::from_thresholds(3.0, 1.0, 1, 2).unwrap();
    assert!((one.crossing_probability() - 2.0 * q(3.0)).abs() < 1e-18);
}

#[test]
fn xvec_allocation_examples() {
    for &(k, d) in &[(100.0, 1usize), (400.0, 2), (900.0, 3), (1e4, 2)] {
        let p = allocate_bits_xvec(k, d, 0.3).unwrap();
        let df = d as f64;
        assert!((p.budget() - k).abs() < 1e-9, "budget at k {k}");
        let k_l0 = ((k + 1.0f64).sqrt() - 1.0).powi(2) / df;
        assert!(p.k_l >= k_l0 - 1e-9 && p.k_l < k_l0 + df, "k_l {} vs {k_l0}", p.k_l);
        let hg = geometric_entropy_ln(p.ln_crossing_probability());
        assert!((hg - p.k_l).abs() < 1e-6);
        assert!(p.a > df * (p.b + 1.0));
    }
    let p = allocate_bits_xvec(400.0, 2, 0.3).unwrap();
    assert_eq!(p.k_q, 9);
    assert!((p.k_l - 182.0).abs() < 1e-12);
    let big = allocate_bits_xvec(1e4, 2, 0.3).unwrap();
    assert!(((big.k_l / 1e4) * 2.0 - 1.0).abs() < 0.1);
    match allocate_bits_xvec(12.0, 3, 0.3) {
        Err(corrlink::Error::Config(msg)) => assert!(msg.contains("smallest feasible budget")),
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

#[test]
fn pareto_allocation_examples() {
    let a = allocate_bits_pareto(60.0, 4.0).unwrap();
    assert_eq!(a.k_q, 20);
    assert_eq!(a.k_l, 40.0);
    let law = MarginalLaw::ParetoTwoSided { alpha: 4.0 };
    let hg = geometric_entropy(law.survival(a.t)).unwrap();
    assert!((hg - 40.0).abs() < 1e-8);
    assert!((a.u - a.t * a.t).abs() < 1e-9 * a.u);
    let x0 = MarginalLaw::pareto_x0(4.0);
    assert!((law.survival(a.t) - 0.5 * (x0 / a.t).powi(4)).abs() < 1e-20);
    let b = allocate_bits_pareto(600.0, 4.0).unwrap();
    assert_eq!(b.k_l, 400.0);
    assert!((b.t.log2() / 100.0 - 1.0).abs() < 0.1);
    assert!(allocate_bits_pareto(60.0, 2.0).is_err());
    assert!(allocate_bits_pareto(1.0, 4.0).is_err());
}

#[test]
fn max_selection_ledger_and_argmax() {
    let model = JointModel::gaussian_scalar(0.4).unwrap();
    let src = Source::new(&model).unwrap().literal();
    let plan = src.max_plan(Statistic::Coordinate(0)).unwrap();
    for trial in 0..20 {
        let mut tr = Transcript::new("max", LedgerMode::Realized);
        let mut s = src.stream(1, trial);
        let h = select_max_index(&mut s, &plan, 1024.0, &mut tr).unwrap();
        assert_eq!(tr.ledger.total_expected(), 10.0);
        assert_eq!(tr.ledger.total_realized(), Some(10));
        assert_eq!(tr.samples_consumed, 1024.0);
        let mut replay = src.stream(1, trial);
        let xs: Vec<f64> = (0..1024).map(|_| replay.next_pair().0[0]).collect();
        let best = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(h.x[0], best);
        assert_eq!(xs[h.index as usize - 1], best);
    }
    let mut tr = Transcript::new("max", LedgerMode::ExpectedOnly);
    let mut s = src.stream(1, 0);
    assert!(matches!(
        select_max_index(&mut s, &plan, 1000.0, &mut tr),
        Err(corrlink::Error::Config(_))
    ));
}

#[test]
fn threshold_selection_ledger() {
    let model = JointModel::gaussian_scalar(0.4).unwrap();
    let src = Source::new(&model).unwrap();
    let run = |t: f64, mode| {
        let plan = src.threshold_plan(Statistic::Coordinate(0), t).unwrap();
        let mut tr = Transcript::new("threshold", mode);
        let mut s = src.stream(2, 0);
        select_threshold_index(&mut s, &plan, plan.ln_p.unwrap(), &WaitCap::default(), &mut tr).unwrap();
        tr
    };
    assert!((run(0.0, LedgerMode::ExpectedOnly).ledger.total_expected() - 2.0).abs() < 1e-12);
    let t20 = q_inv(geometric_entropy_inv(20.0).unwrap()).unwrap();
    let tr = run(t20, LedgerMode::ExpectedOnly);
    assert!((tr.ledger.total_expected() - 20.0).abs() < 1e-6);
    assert_eq!(tr.ledger.total_realized(), None);
    assert_eq!(tr.samples_consumed, tr.indices[0]);
}

#[test]
fn realized_bits_within_one_of_entropy() {
    let model = JointModel::gaussian_scalar(0.4).unwrap();
    let src = Source::new(&model).unwrap();
    let t = q_inv(geometric_entropy_inv(20.0).unwrap()).unwrap();
    let plan = src.threshold_plan(Statistic::Coordinate(0), t).unwrap();
    let ln_p = plan.ln_p.unwrap();
    let mut bits = vec![];
    for trial in 0..100_000 {
        let mut tr = Transcript::new("threshold", LedgerMode::Realized);
        let mut s = src.stream(3, trial);
        select_threshold_index(&mut s, &plan, ln_p, &WaitCap::default(), &mut tr).unwrap();
        bits.push(tr.ledger.total_realized().unwrap() as f64);
    }
    let s = summarize(&bits);
    assert!(s.mean <= 21.0, "mean realized {}", s.mean);
    assert!(s.mean >= 20.0 - 4.0 * s.mean_se);
}

#[test]
fn transcript_record_round_trip() {
    let mut tr = Transcript::new("xvec", LedgerMode::Realized);
    tr.indices = vec![17.0, 4096.0, 1e17];
    tr.ledger.charge_fixed("w_matrix", 36);
    tr.ledger.charge_index("stopping_index", 17.0, (0.01f64).ln()).unwrap();
    let rec: TranscriptRecord = tr.to_record().parse().unwrap();
    assert_eq!(rec.label, "xvec");
    assert_eq!(rec.indices, tr.indices);
    assert_eq!(rec.expected_bits, tr.ledger.total_expected());
    assert_eq!(rec.realized_bits, tr.ledger.total_realized());
    let empty = Transcript::new("naive", LedgerMode::ExpectedOnly);
    let rec: TranscriptRecord = empty.to_record().parse().unwrap();
    assert!(rec.indices.is_empty() && rec.realized_bits.is_none());
    assert!("a\tb".parse::<TranscriptRecord>().is_err());
    let mut l = BitLedger::new(LedgerMode::ExpectedOnly);
    assert!(l.charge_index("x", 0.0, -1.0).is_err());
}

/// Upper 1% point of chi-square with `df` degrees of freedom (Wilson-Hilferty).
fn chi2_crit_99(df: f64) -> f64 {
    let z = 2.326_347_874;
    let c = 2.0 / (9.0 * df);
    df * (1.0 - c + z * c.sqrt()).powi(3)
}

#[test]
fn stopping_gaps_are_geometric() {
    let (a, b) = (1.5, 1.0);
    let p = 2.0 * q(a) * (1.0 - 2.0 * q(b));
    let model = JointModel::GaussianXVec {
        rho: vec![0.3, 0.3],
        sigma_x: CorrelationMatrix::identity(2),
    };
    let src = Source::new(&model).unwrap().literal();
    let plan = src.stopping_plan(&Matrix::identity(2), a, b).unwrap();
    let bins = 40usize;
    let mut counts = vec![0u64; bins + 1];
    let trials = 100_000;
    for trial in 0..trials {
        let mut tr = Transcript::new("xvec", LedgerMode::ExpectedOnly);
        let mut s = src.stream(4, trial);
        let hits = select_stopping_set_indices(&mut s, &plan, &WaitCap::default(), &mut tr).unwrap();
        assert!(hits[0].index < hits[1].index);
        let gaps = [hits[0].index, hits[1].index - hits[0].index];
        for g in gaps {
            counts[(g as usize - 1).min(bins)] += 1;
        }
        assert!((tr.ledger.total_expected() - 2.0 * geometric_entropy(p).unwrap()).abs() < 1e-9);
    }
    let n = 2.0 * trials as f64;
    let mut chi2 = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let prob = if i < bins {
            p * (1.0 - p).powi(i as i32)
        } else {
            (1.0 - p).powi(bins as i32)
        };
        let e = n * prob;
        chi2 += (c as f64 - e).powi(2) / e;
    }
    let crit = chi2_crit_99(bins as f64);
    assert!(chi2 < crit, "chi2 {chi2} vs {crit}");
}

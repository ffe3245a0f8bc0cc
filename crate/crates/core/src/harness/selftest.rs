use super::config::{ExperimentConfig, GridPoint};
use super::moments::Moments;
use super::sweep::run_point;
use crate::analysis::{exact_threshold_variance, fisher_xvec, fisher_yvec, threshold_for_bits};
use crate::estimators::{Estimator, ProtocolOptions, ThresholdEstimator};
use crate::linalg::{invert, CorrelationMatrix, Matrix};
use crate::protocol::golomb::{golomb_decode, golomb_encode, BitWriter};
use crate::sources::JointModel;
use crate::statmath::{geometric_entropy, geometric_entropy_inv, q};

/// Outcome of one built-in check.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> SelfCheck {
    SelfCheck { name, passed, detail }
}

/// A fast subset of the invariant suite, runnable from the command line.
pub fn selftest() -> Vec<SelfCheck> {
    let mut out = Vec::new();

    let v = q(2.0);
    out.push(check(
        "normal tail at 2",
        (v - 0.022750131948179).abs() < 1e-14,
        format!("Q(2) = {v:.15}"),
    ));

    let rt = geometric_entropy_inv(20.0).map(geometric_entropy);
    out.push(match rt {
        Ok(Ok(h)) => check("entropy round trip", (h - 20.0).abs() < 1e-9, format!("h_g(h_g^-1(20)) = {h}")),
        _ => check("entropy round trip", false, "inversion failed".into()),
    });

    let mut w = BitWriter::new();
    golomb_encode(&mut w, 12345, 37);
    let back = golomb_decode(&mut w.reader(), 37);
    out.push(check(
        "golomb round trip",
        matches!(back, Ok(12345)),
        format!("decoded {back:?}"),
    ));

    let rho = [0.9, 0.5, 0.1, -0.3];
    let yvec = JointModel::yvec_independent_noise(&rho);
    let sm = match yvec {
        Ok(JointModel::GaussianYVec { rho, sigma_y }) => fisher_yvec(&rho, &sigma_y, 25.0)
            .and_then(|f| Ok(invert(&f.fisher)?.max_abs_diff(&f.inverse))),
        _ => Err(crate::Error::Config("model".into())),
    };
    out.push(match sm {
        Ok(e) => check("Sherman-Morrison inverse", e < 1e-9, format!("max deviation {e:e}")),
        Err(e) => check("Sherman-Morrison inverse", false, e.to_string()),
    });

    let fx = CorrelationMatrix::equicorrelated(2, 0.4)
        .and_then(|s| fisher_xvec(&[0.7, 0.2], &s, 30.0, 0.5))
        .map(|f| f.fisher.matmul(&f.inverse).max_abs_diff(&Matrix::identity(2)));
    out.push(match fx {
        Ok(e) => check("vector-X Fisher inverse", e < 1e-9, format!("max deviation {e:e}")),
        Err(e) => check("vector-X Fisher inverse", false, e.to_string()),
    });

    let mut two_pass = Moments::new();
    let xs: Vec<f64> = (0..100_000).map(|i| 1e6 + ((i * 7919) % 1000) as f64 * 1e-3).collect();
    xs.iter().for_each(|x| two_pass.push(*x));
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0);
    let rel = (two_pass.variance() - var).abs() / var;
    out.push(check("one-pass variance", rel < 1e-9, format!("relative gap {rel:e}")));

    let mc = (|| -> crate::Result<SelfCheck> {
        let model = JointModel::gaussian_scalar(0.5)?;
        let est = ThresholdEstimator::gaussian(&model, 10.0, ProtocolOptions::default())?;
        let budget = est.budget();
        let stats = run_point(&est, 2024, 40_000)?;
        let m = &stats.coords[0];
        let exact = exact_threshold_variance(0.5, threshold_for_bits(10.0)?);
        let z_var = (m.variance() - exact) / m.variance_se();
        let z_bias = m.mean() / m.mean_se();
        Ok(check(
            "threshold variance matches exact formula",
            z_var.abs() < 4.0 && z_bias.abs() < 4.0 && (budget - 10.0).abs() < 1e-6,
            format!("var {:.6} vs {exact:.6} (z = {z_var:.2}), bias z = {z_bias:.2}, bits {budget}", m.variance()),
        ))
    })();
    out.push(mc.unwrap_or_else(|e| check("threshold variance matches exact formula", false, e.to_string())));

    let cfg = ExperimentConfig::parse("scheme = threshold\ngrid.k = 10\ngrid.rho = 0.3\ntrials = 100\n");
    out.push(check(
        "config parsing",
        cfg.as_ref().is_ok_and(|c| c.points() == vec![GridPoint { k: 10.0, rho: vec![0.3], m: None, alpha: None, b0: None }]),
        format!("{:?}", cfg.map(|c| c.points().len())),
    ));
    out
}

//! Closed-form variances, Fisher information and bounds.

mod clt;
mod pareto;
mod report;
mod scalar;
mod vector;

pub use clt::{clt_binary_exact, BinaryBlockTheory};
pub use pareto::{pareto_exponent, pareto_theory, ParetoTheory};
pub use report::{
    theory_additive, theory_max, theory_pareto, theory_threshold, theory_xvec, theory_yvec,
    TheoryReport,
};
pub use scalar::{
    additive_exact, asymptotic_scalar_variance, binary_example_theory, exact_max_variance,
    exact_threshold_variance, fisher_from_second_moment, fisher_max, fisher_scalar_given_x,
    fisher_threshold, laplace_theory, law_threshold_for_bits, pareto_unquantized_floor,
    selected_sample_variance, threshold_for_bits, zhang_berger_optimal, zhang_berger_variance,
};
pub use vector::{
    exact_yvec_trace, fisher_xvec, fisher_yvec, stopping_set_bracket, linear_transform_trace,
    naive_scalar_bound, quantization_loss_bound, stopping_set_alpha, w_quantization_error_bound,
    xvec_bound, FisherPair,
};

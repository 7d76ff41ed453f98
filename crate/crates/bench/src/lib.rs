//! Fixtures shared by the benchmarks.

use stricttest_core::coeffspec::{parse_problem, ProblemSpec};

/// `dY = |Y|^α dt + dW`, `b(x) = x`, with declared tails.
pub fn power_drift(alpha: f64) -> ProblemSpec {
    parse_problem(&format!(
        "interval = (-inf, inf); param alpha = {alpha}; x0 = 0\n\
         mu = abs(x)^alpha; sigma = 1; b = x\n\
         asym right mu = C=1 p=alpha; asym left mu = C=1 p=alpha\n\
         asym right sigma = C=1; asym left sigma = C=1\n\
         asym right b = C=1 p=1; asym left b = C=-1 p=1"
    ))
    .expect("valid fixture")
}

/// The same dynamics with nothing declared, so every test is numeric.
pub fn power_drift_numeric(alpha: f64) -> ProblemSpec {
    parse_problem(&format!(
        "interval = (-inf, inf); x0 = 0; mu = abs(x)^{alpha}; sigma = 1; b = x"
    ))
    .expect("valid fixture")
}

/// Generalized CEV with `μ₀ = σ₀ = 1`.
pub fn cev(alpha: f64, beta: f64) -> ProblemSpec {
    parse_problem(&format!(
        "interval = (0, inf); x0 = 1; param alpha = {alpha}; param beta = {beta}\n\
         mu = x^alpha; sigma = x^beta; b = -x^(alpha-beta)\n\
         asym left mu = C=1 p=alpha; asym right mu = C=1 p=alpha\n\
         asym left sigma = C=1 p=beta; asym right sigma = C=1 p=beta\n\
         asym left b = C=-1 p=alpha-beta; asym right b = C=-1 p=alpha-beta"
    ))
    .expect("valid fixture")
}

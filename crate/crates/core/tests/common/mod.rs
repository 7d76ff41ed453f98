//! Specs shared by the integration tests.
#![allow(dead_code)]

use stricttest_core::bubbles::VolModel;
use stricttest_core::coeffspec::{parse_problem, ProblemSpec};

pub fn spec(text: &str) -> ProblemSpec {
    parse_problem(text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

/// `dY = |Y|^α dt + dW`, `b(x) = x`, started at 0.
pub fn power_drift(alpha: f64) -> ProblemSpec {
    spec(&format!(
        "interval = (-inf, inf)\nparam alpha = {alpha}\nx0 = 0\nmu = abs(x)^alpha\nsigma = 1\nb = x\n\
         asym right mu = C=1 p=alpha\nasym left mu = C=1 p=alpha\n\
         asym right sigma = C=1\nasym left sigma = C=1\n\
         asym right b = C=1 p=1\nasym left b = C=-1 p=1"
    ))
}

/// The power-drift model without declarations: everything goes through the quadrature probes.
pub fn power_drift_numeric(alpha: f64) -> ProblemSpec {
    spec(&format!(
        "interval = (-inf, inf)\nx0 = 0\nmu = abs(x)^{alpha}\nsigma = 1\nb = x"
    ))
}

/// `dY = μ₀Y^α dt + σ₀Y^β dW` on `(0, ∞)` with `b = -(μ₀/σ₀)x^{α-β}`.
pub fn cev(alpha: f64, beta: f64, mu0: f64, sigma0: f64) -> ProblemSpec {
    spec(&format!(
        "interval = (0, inf)\nx0 = 1\nparam mu0 = {mu0}\nparam sigma0 = {sigma0}\n\
         param alpha = {alpha}\nparam beta = {beta}\n\
         mu = mu0*x^alpha\nsigma = sigma0*x^beta\nb = -(mu0/sigma0)*x^(alpha-beta)\n\
         asym left mu = C=mu0 p=alpha\nasym right mu = C=mu0 p=alpha\n\
         asym left sigma = C=sigma0 p=beta\nasym right sigma = C=sigma0 p=beta\n\
         asym left b = C=-(mu0/sigma0) p=alpha-beta\nasym right b = C=-(mu0/sigma0) p=alpha-beta"
    ))
}

pub fn cev_price(alpha: f64, mu0: f64) -> VolModel {
    VolModel::cev(0.4, alpha, mu0, 1.0)
}

/// Named specs covering declared and numeric routes, finite and infinite
/// endpoints, and all three verdicts.
pub fn battery() -> Vec<(String, ProblemSpec)> {
    let mut out = Vec::new();
    for alpha in [-0.5, 0.5, 1.0, 2.0, 3.0, 4.0] {
        out.push((format!("power_drift alpha={alpha}"), power_drift(alpha)));
    }
    for alpha in [0.5, 2.0, 4.0] {
        out.push((
            format!("power_drift numeric alpha={alpha}"),
            power_drift_numeric(alpha),
        ));
    }
    for (a, b) in [
        (0.0, 0.0),
        (0.0, 0.5),
        (1.0, 1.0),
        (-1.0, 0.5),
        (2.0, 2.0),
        (0.5, 1.5),
    ] {
        out.push((format!("cev alpha={a} beta={b}"), cev(a, b, 1.0, 1.0)));
    }
    for (alpha, mu0) in [(0.5, 0.05), (1.0, 0.0), (2.0, 0.05), (2.0, 0.0)] {
        out.push((
            format!("cev_price alpha={alpha} mu0={mu0}"),
            cev_price(alpha, mu0).to_spec().unwrap(),
        ));
    }
    let extra = [
        (
            "brownian b=0",
            "interval=(-inf,inf); x0=0; mu=0; sigma=1; b=0",
        ),
        (
            "brownian b=1",
            "interval=(-inf,inf); x0=0; mu=0; sigma=1; b=1",
        ),
        ("ou b=x", "interval=(-inf,inf); x0=0.3; mu=-x; sigma=1; b=x"),
        (
            "gbm b=1 numeric",
            "interval=(0,inf); x0=1; mu=0; sigma=x; b=1",
        ),
        (
            "bessel3 b=1/x",
            "interval=(0,inf); x0=1; mu=1/x; sigma=1; b=1/x",
        ),
        (
            "wright-fisher b=1",
            "interval=(0,1); x0=0.5; mu=0; sigma=sqrt(x*(1-x)); b=1",
        ),
        (
            "interval drift b=x",
            "interval=(0,1); x0=0.25; mu=1-2*x; sigma=x*(1-x); b=x",
        ),
        (
            "cubic volatility b=x^2",
            "interval=(0,inf); x0=1; mu=0; sigma=x^2; b=x",
        ),
    ];
    for (name, text) in extra {
        out.push((name.to_string(), spec(text)));
    }
    out
}

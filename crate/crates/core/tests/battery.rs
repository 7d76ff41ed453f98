//! Verdicts over the shared battery.

mod common;

use stricttest_core::bubbles::cev_region;
use stricttest_core::classify::{classify_martingale, Verdict};
use stricttest_core::quad::ProbeOptions;

use Verdict::*;

/// Expected verdict by battery name. The power drift splits at α = 1 and
/// α = 3, CEV models follow their region map; the rest are worked by hand
/// from `s`, `ρ` and the exit tests.
fn expected(name: &str) -> Verdict {
    let num = |key: &str| -> f64 {
        let start = name.find(key).unwrap() + key.len();
        name[start..]
            .split_whitespace()
            .next()
            .unwrap()
            .parse()
            .unwrap()
    };
    if name.starts_with("power_drift") {
        let a = num("alpha=");
        return if a <= 1.0 {
            MartingaleNotUI
        } else if a <= 3.0 {
            StrictLocalMartingale
        } else {
            UniformlyIntegrableMartingale
        };
    }
    if name.starts_with("cev alpha") {
        return cev_region(num("alpha="), num("beta=")).verdict();
    }
    if name.starts_with("cev_price") {
        let (a, mu0) = (num("alpha="), num("mu0="));
        return if a > 1.0 {
            StrictLocalMartingale
        } else if a < 1.0 && mu0 > 0.0 {
            UniformlyIntegrableMartingale
        } else {
            MartingaleNotUI
        };
    }
    match name {
        // Z = 1.
        "brownian b=0" => UniformlyIntegrableMartingale,
        // Z = exp(W - t/2).
        "brownian b=1" => MartingaleNotUI,
        // The auxiliary diffusion is Brownian motion; s(±∞) = ±∞.
        "ou b=x" => MartingaleNotUI,
        // Z = exp(W - t/2) again; 0 is bad since x/x² is not integrable.
        "gbm b=1 numeric" => MartingaleNotUI,
        // Neither diffusion exits; s = -1/x makes ∞ bad (weight 1/x).
        "bessel3 b=1/x" => MartingaleNotUI,
        // s = x, weights x/(x(1-x)) and (1-x)/(x(1-x)) are integrable.
        "wright-fisher b=1" => UniformlyIntegrableMartingale,
        // ρ and ρ̃ blow up like exp(2/x) and exp(2/(1-x)): no exits, no good ends.
        "interval drift b=x" => MartingaleNotUI,
        // ρ̃ = x^-2 and the Feller integrand is x^-3: Y~ exits at ∞, which is bad.
        "cubic volatility b=x^2" => StrictLocalMartingale,
        other => panic!("no expectation for {other}"),
    }
}

#[test]
fn battery_verdicts() {
    let opts = ProbeOptions::default();
    let mut wrong = Vec::new();
    for (name, spec) in common::battery() {
        let got = classify_martingale(&spec, &opts).verdict;
        if got != expected(&name) {
            wrong.push(format!("{name}: got {got}, want {}", expected(&name)));
        }
    }
    assert!(wrong.is_empty(), "{wrong:#?}");
}

#[test]
fn battery_has_every_verdict_and_route() {
    let battery = common::battery();
    assert!(battery.len() >= 20);
    for v in [
        StrictLocalMartingale,
        MartingaleNotUI,
        UniformlyIntegrableMartingale,
    ] {
        assert!(battery.iter().any(|(n, _)| expected(n) == v), "{v}");
    }
    assert!(battery.iter().any(|(_, s)| s.asym.is_empty()));
    assert!(battery
        .iter()
        .any(|(_, s)| s.interval.left.is_finite() && s.interval.right.is_finite()));
}

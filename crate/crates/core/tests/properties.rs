//! Property tests for the invariants of each module.

mod common;

use proptest::prelude::*;

use stricttest_core::asymp::{AsymptoticForm, ConvergenceVerdict, Frame, Side};
use stricttest_core::classify::{classify_martingale, classify_no_exit, Verdict};
use stricttest_core::coeffspec::parse_problem;
use stricttest_core::error::SimError;
use stricttest_core::mcsim::{simulate_ez, SimConfig};
use stricttest_core::quad::{integrate, probe_tail, IntegralVerdict, ProbeOptions};
use stricttest_core::septime::{
    arrangement_of_exponential, mutual_arrangement, ArrangementReport, SdePair,
};
use stricttest_core::tristate::TriState;

fn opts() -> ProbeOptions {
    ProbeOptions::default()
}

fn implies(a: TriState, b: TriState) -> bool {
    !(a == TriState::Yes && b == TriState::No)
}

fn lattice_holds(a: &ArrangementReport) -> bool {
    implies(a.equivalent, a.abs_continuous)
        && implies(a.abs_continuous, a.loc_abs_continuous)
        && implies(a.equivalent, a.loc_equivalent)
        && implies(a.loc_equivalent, a.loc_abs_continuous)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn config_round_trip_agrees_on_probe_grid(alpha in -2.0f64..2.0, beta in -2.0f64..2.0, mu0 in 0.1f64..3.0) {
        let spec = common::cev(alpha, beta, mu0, 1.0);
        let back = parse_problem(&spec.to_config()).unwrap();
        let (p, q) = (spec.param_values(), back.param_values());
        for x in spec.interval.probe_grid().into_iter().step_by(97) {
            for (a, b) in [(&spec.mu, &back.mu), (&spec.sigma, &back.sigma), (&spec.b, &back.b)] {
                let (u, v) = (a.eval(x, p).unwrap(), b.eval(x, q).unwrap());
                prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1e-300), "x={x}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn power_drift_drift_matches_closed_form(alpha in -0.99f64..5.0, x in -50.0f64..50.0) {
        let spec = common::power_drift(alpha);
        prop_assume!(x != 0.0 || alpha >= 0.0);
        let got = spec.mu.eval(x, spec.param_values()).unwrap();
        let want = x.abs().powf(alpha);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn asymptotic_verdict_never_contradicts_quadrature(
        p in -4.0f64..4.0,
        q in prop::sample::select(vec![-1.0, 0.0, 1.0]),
        a in prop::sample::select(vec![-1.0, 0.0, 1.0]),
        gamma in prop::sample::select(vec![1.0, 2.0]),
        c in 0.1f64..10.0,
    ) {
        let form = AsymptoticForm::new(Frame::PlusInfinity, c, a, gamma, p, q).unwrap();
        let analytic = form.decide_convergence();
        let f = move |u: f64| Ok(c * (a * u.powf(gamma)).exp() * u.powf(p) * u.ln().powf(q));
        let numeric = probe_tail(f, 2.0, f64::INFINITY, Side::Right, &opts()).unwrap();
        match numeric {
            IntegralVerdict::Finite { .. } => prop_assert_eq!(analytic, ConvergenceVerdict::Converges, "{}", form),
            IntegralVerdict::Divergent => prop_assert_eq!(analytic, ConvergenceVerdict::Diverges, "{}", form),
            IntegralVerdict::Inconclusive(_) => {}
        }
    }

    #[test]
    fn mul_is_commutative_and_associative(
        p in prop::collection::vec(-4.0f64..4.0, 3),
        q in prop::collection::vec(-2.0f64..2.0, 3),
        rate in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let f: Vec<AsymptoticForm> = (0..3)
            .map(|i| AsymptoticForm::new(Frame::PlusInfinity, 1.0 + i as f64, rate[i], 1.0, p[i], q[i]).unwrap())
            .collect();
        prop_assert_eq!(f[0].mul(&f[1]).unwrap(), f[1].mul(&f[0]).unwrap());
        let left = f[0].mul(&f[1]).unwrap().mul(&f[2]).unwrap();
        let right = f[0].mul(&f[1].mul(&f[2]).unwrap()).unwrap();
        prop_assert!((left.coeff - right.coeff).abs() <= 1e-12 * left.coeff.abs());
        prop_assert!((left.power - right.power).abs() <= 1e-12);
        prop_assert!((left.log_power - right.log_power).abs() <= 1e-12);
        prop_assert_eq!(left.exp_terms.len(), right.exp_terms.len());
    }

    #[test]
    fn tail_integral_differentiates_back(p in -4.0f64..4.0, rate in prop::sample::select(vec![-1.0, -0.5, 0.0]), gamma in 0.5f64..2.0) {
        prop_assume!(rate < 0.0 || p < -1.05);
        let f = AsymptoticForm::new(Frame::PlusInfinity, 2.0, rate, gamma, p, 0.0).unwrap();
        let back = f.integrate_tail().unwrap().differentiate();
        prop_assert!((back.power - f.power).abs() < 1e-9, "{} -> {}", f, back);
        prop_assert_eq!(back.exp_terms.len(), f.exp_terms.len());
        for (x, y) in back.exp_terms.iter().zip(&f.exp_terms) {
            prop_assert!((x.rate - y.rate).abs() < 1e-9 && (x.order - y.order).abs() < 1e-9);
        }
        prop_assert!((back.coeff.abs() - f.coeff.abs()).abs() < 1e-9 * f.coeff.abs());
    }

    #[test]
    fn reference_point_does_not_change_verdicts(alpha in -0.9f64..5.0, c in -3.0f64..3.0) {
        let base = common::power_drift(alpha);
        let moved = parse_problem(&format!("{}\nc = {c}", base.to_config())).unwrap();
        let (a, b) = (classify_martingale(&base, &opts()), classify_martingale(&moved, &opts()));
        prop_assert_eq!(a.verdict, b.verdict);
        for side in Side::both() {
            prop_assert_eq!(a.endpoint(side).good, b.endpoint(side).good);
            prop_assert_eq!(a.endpoint(side).y_exits, b.endpoint(side).y_exits);
        }
    }

    #[test]
    fn cev_verdict_ignores_mu0_and_sigma0(
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
        mu0 in prop::sample::select(vec![-2.0, -1.0, 0.5, 1.0, 2.0]),
        sigma0 in prop::sample::select(vec![0.25, 0.5, 1.0, 2.0, 3.0]),
    ) {
        let base = classify_martingale(&common::cev(alpha, beta, 1.0, 1.0), &opts()).verdict;
        let other = classify_martingale(&common::cev(alpha, beta, mu0, sigma0), &opts()).verdict;
        prop_assert_eq!(base, other);
    }

    #[test]
    fn arrangement_is_symmetric_and_ordered(
        theta in 0.0f64..2.0,
        m in -1.0f64..1.0,
        shift in -1.0f64..1.0,
        scale in prop::sample::select(vec![1.0, 1.0, 2.0]),
    ) {
        let spec = parse_problem(&format!(
            "interval=(-inf,inf); x0=0; mu={theta}*({m}-x); sigma=1; mu_tilde={shift}-{theta}*x; sigma_tilde={scale}"
        ))
        .unwrap();
        let pair = SdePair::from_spec(&spec);
        let a = mutual_arrangement(&pair, &opts());
        let b = mutual_arrangement(&pair.swapped(), &opts());
        prop_assert_eq!(a.swapped().flags(), b.flags());
        prop_assert!(lattice_holds(&a));
        prop_assert!(lattice_holds(&b));
    }

    #[test]
    fn seeds_determine_estimates(seed in any::<u64>()) {
        let spec = common::power_drift(2.0);
        let cfg = SimConfig { paths: 64, step: 1e-2, seed, ..SimConfig::default() };
        let a = simulate_ez(&spec, &cfg, &opts()).unwrap().report;
        let b = simulate_ez(&spec, &cfg, &opts()).unwrap().report;
        prop_assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        prop_assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
}

#[test]
fn classification_invariants_on_battery() {
    for (name, spec) in common::battery() {
        let c = classify_martingale(&spec, &opts());
        if c.verdict == Verdict::UniformlyIntegrableMartingale {
            assert_eq!(c.martingale_all_t, TriState::Yes, "{name}");
        }
        for side in Side::both() {
            let e = c.endpoint(side);
            if let (Some(y), Some(t)) = (e.y_exits.known(), e.ytilde_exits.known()) {
                if y != t {
                    for g in [e.good_via_scale, e.good_via_aux_scale] {
                        assert_ne!(
                            g,
                            TriState::Yes,
                            "{name} {side}: exactly one exits, yet good"
                        );
                    }
                }
            }
        }
        let no_exit = Side::both()
            .iter()
            .all(|s| c.endpoint(*s).y_exits == TriState::No);
        match classify_no_exit(&spec, &opts()) {
            Ok(d) => {
                assert!(no_exit, "{name}: precondition should have failed");
                assert_eq!(d.verdict, c.verdict, "{name}");
            }
            Err(_) => assert!(!no_exit, "{name}"),
        }
        let a = arrangement_of_exponential(&spec, &opts());
        assert!(lattice_holds(&a), "{name}");
    }
}

#[test]
fn transform_invariance_on_half_line() {
    let cases: [fn(f64) -> f64; 6] = [
        |x| (-x).exp(),
        |x| x * (-x).exp(),
        |x| (1.0 + x).powi(-2),
        |x| 1.0 / (1.0 + x * x),
        |x| 1.0 / x.cosh(),
        |x| (-x).exp() / x.sqrt(),
    ];
    let o = opts();
    for f in cases {
        let direct = integrate(move |x| Ok(f(x)), 0.0, f64::INFINITY, &o)
            .unwrap()
            .value()
            .unwrap();
        let mapped = integrate(
            move |u| {
                let x = u / (1.0 - u);
                Ok(f(x) / ((1.0 - u) * (1.0 - u)))
            },
            0.0,
            1.0,
            &o,
        )
        .unwrap()
        .value()
        .unwrap();
        assert!(
            (direct - mapped).abs() <= 10.0 * o.tol * direct.abs().max(1.0),
            "{direct} vs {mapped}"
        );
    }
}

#[test]
fn simulated_mean_respects_supermartingale_bound() {
    let cfg = SimConfig {
        paths: 400,
        step: 1e-2,
        ..SimConfig::default()
    };
    let mut ran = 0;
    for (name, spec) in common::battery() {
        match simulate_ez(&spec, &cfg, &opts()) {
            Ok(run) => {
                ran += 1;
                assert!(
                    run.report.within_supermartingale_bound(),
                    "{name}: {:?}",
                    run.report
                );
                assert!(run.report.estimate >= 0.0);
            }
            // The drift is singular at x0 for negative powers, so Euler cannot start.
            Err(SimError::Evaluation { path: 0, .. }) if spec.mu_at(spec.x0()).is_err() => {}
            Err(e) => panic!("{name}: {e}"),
        }
    }
    assert!(ran >= 20);
}

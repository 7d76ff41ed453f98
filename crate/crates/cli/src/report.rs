//! Human-readable run reports.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use stricttest_core::asymp::Side;
use stricttest_core::bubbles::{BubbleReport, VolModel};
use stricttest_core::classify::{Classification, Condition, EndpointReport};
use stricttest_core::coeffspec::ProblemSpec;
use stricttest_core::mcsim::{EstimateReport, SimConfig};
use stricttest_core::septime::ArrangementReport;
use stricttest_core::tristate::TriState;

fn echo(out: &mut String, path: &Path, spec: &ProblemSpec) {
    let _ = writeln!(out, "input: {}", path.display());
    for line in spec.to_config().lines() {
        let _ = writeln!(out, "  | {line}");
    }
}

fn cite(c: &Classification, conds: &[Condition]) -> String {
    let fired: Vec<String> = conds
        .iter()
        .filter(|k| c.fired(**k))
        .map(|k| k.to_string())
        .collect();
    if fired.is_empty() {
        let all: Vec<String> = conds.iter().map(|k| k.to_string()).collect();
        format!("none of {}", all.join(", "))
    } else {
        fired.join(", ")
    }
}

fn endpoint_block(out: &mut String, e: &EndpointReport) {
    let _ = writeln!(
        out,
        "  {} endpoint: Y exits {}, Y~ exits {}, good {}, s finite {}, s~ finite {}",
        e.side, e.y_exits, e.ytilde_exits, e.good, e.s_limit_finite, e.stilde_limit_finite
    );
    for ev in &e.evidence {
        let _ = writeln!(out, "    {:<12} {}", ev.condition, ev.result);
    }
    for d in e.disagreements() {
        let _ = writeln!(out, "    ! equivalent {d} tests disagree");
    }
    for n in &e.notes {
        let _ = writeln!(out, "    note: {n}");
    }
}

pub fn classification(
    path: &Path,
    spec: &ProblemSpec,
    c: &Classification,
    elapsed: Duration,
) -> String {
    let mut out = String::new();
    echo(&mut out, path, spec);
    let _ = writeln!(out, "verdict: {}", c.verdict);
    let _ = writeln!(
        out,
        "martingale on every [0,T]: {} (right: {}; left: {})",
        c.martingale_all_t,
        cite(c, &[Condition::NoAuxExitRight, Condition::GoodRight]),
        cite(c, &[Condition::NoAuxExitLeft, Condition::GoodLeft]),
    );
    let _ = writeln!(
        out,
        "uniformly integrable: {} ({})",
        c.ui_martingale,
        cite(
            c,
            &[
                Condition::BZero,
                Condition::GoodRightAuxRecurrentLeft,
                Condition::GoodLeftAuxRecurrentRight,
                Condition::BothGood
            ]
        )
    );
    let triggered: Vec<String> = c.triggered.iter().map(|k| k.to_string()).collect();
    let _ = writeln!(
        out,
        "conditions holding: {}",
        if triggered.is_empty() {
            "none".into()
        } else {
            triggered.join(" ")
        }
    );
    let _ = writeln!(out, "evidence:");
    for side in Side::both() {
        endpoint_block(&mut out, c.endpoint(side));
    }
    for n in &c.notes {
        let _ = writeln!(out, "note: {n}");
    }
    let _ = writeln!(out, "time: {elapsed:.2?}");
    out
}

pub fn bubble(
    path: &Path,
    model: &VolModel,
    r: &BubbleReport,
    dichotomy: Option<&BubbleReport>,
    elapsed: Duration,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "input: {}", path.display());
    let _ = writeln!(
        out,
        "  | sigma = {}; mu0 = {}; x0 = {}",
        model.sigma, model.mu0, model.x0
    );
    let _ = writeln!(out, "verdict: {}", r.label());
    let _ = writeln!(
        out,
        "  type 3: {}, type 2: {}, none: {} ({})",
        r.type3, r.type2, r.none, r.detail
    );
    if let Some(d) = dichotomy {
        let agree = if d.label() == r.label() {
            "agrees"
        } else {
            "DISAGREES"
        };
        let _ = writeln!(
            out,
            "driftless dichotomy: {} ({}); {agree}",
            d.label(),
            d.detail
        );
    }
    if let Some(c) = &r.classification {
        let triggered: Vec<String> = c.triggered.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(
            out,
            "conditions holding: {}",
            if triggered.is_empty() {
                "none".into()
            } else {
                triggered.join(" ")
            }
        );
        let _ = writeln!(out, "evidence:");
        for side in Side::both() {
            endpoint_block(&mut out, c.endpoint(side));
        }
    }
    let _ = writeln!(out, "time: {elapsed:.2?}");
    out
}

pub fn arrangement(
    path: &Path,
    spec: &ProblemSpec,
    paired: bool,
    a: &ArrangementReport,
    elapsed: Duration,
) -> String {
    let mut out = String::new();
    echo(&mut out, path, spec);
    let _ = writeln!(
        out,
        "laws: {}",
        if paired {
            "P of (mu, sigma), P~ of (mu_tilde, sigma_tilde)"
        } else {
            "P of Y, P~ of the auxiliary diffusion"
        }
    );
    let headline = match (a.equivalent, a.loc_equivalent, a.singular) {
        (TriState::Yes, _, _) => "P~ ∼ P",
        (_, _, TriState::Yes) => "P~ ⊥ P",
        (TriState::No, TriState::Yes, _) => "P~ loc∼ P but not P~ ∼ P",
        _ if a.flags().iter().all(|(_, f)| f.known().is_some()) => "partial absolute continuity",
        _ => "unknown",
    };
    let _ = writeln!(out, "verdict: {headline}");
    for (name, flag) in a.flags() {
        let _ = writeln!(out, "  {name:<14} {flag}");
    }
    let s = &a.separating;
    let _ = writeln!(
        out,
        "separating set: alpha = {}, beta = {}",
        s.alpha, s.beta
    );
    let _ = writeln!(
        out,
        "  left endpoint separating {}, right endpoint separating {}",
        s.left_endpoint_separating, s.right_endpoint_separating
    );
    for (lo, hi) in &s.interior_separating {
        let _ = writeln!(out, "  interior separating stretch [{lo}, {hi}]");
    }
    for (lo, hi) in &s.interior_unknown {
        let _ = writeln!(out, "  undecided stretch [{lo}, {hi}]");
    }
    let _ = writeln!(out, "evidence:");
    for ev in &s.evidence {
        let _ = writeln!(out, "  {:<28} {}", ev.condition, ev.result);
    }
    for t in a.trace.iter().chain(&s.notes) {
        let _ = writeln!(out, "note: {t}");
    }
    let _ = writeln!(out, "time: {elapsed:.2?}");
    out
}

fn estimate_line(out: &mut String, name: &str, r: &EstimateReport) {
    let _ = writeln!(
        out,
        "{name}: {:.6} ± {:.6} (paths {}, absorbed left {}, right {}, zero mass {}; within supermartingale bound: {})",
        r.estimate,
        r.std_error,
        r.paths,
        r.absorbed_left,
        r.absorbed_right,
        r.zero_mass,
        r.within_supermartingale_bound()
    );
}

pub fn simulation(
    path: &Path,
    cfg: &SimConfig,
    c: &Classification,
    direct: Option<&EstimateReport>,
    survival: Option<&EstimateReport>,
    elapsed: Duration,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "input: {}", path.display());
    let levels = direct
        .or(survival)
        .map(|r| r.levels)
        .unwrap_or((f64::NAN, f64::NAN));
    let _ = writeln!(
        out,
        "T = {}, h = {}, N = {}, seed = {}, truncation ({}, {})",
        cfg.horizon, cfg.step, cfg.paths, cfg.seed, levels.0, levels.1
    );
    let _ = writeln!(out, "classifier: {}", c.verdict);
    if let Some(d) = direct {
        estimate_line(&mut out, "E Z_T (direct)", d);
    }
    if let Some(s) = survival {
        estimate_line(&mut out, "P~(S > T) (auxiliary)", s);
    }
    if let (Some(d), Some(s)) = (direct, survival) {
        let gap = (d.estimate - s.estimate).abs() / d.std_error.hypot(s.std_error);
        let _ = writeln!(
            out,
            "estimators agree within 3 SE: {} ({gap:.2} combined SE apart)",
            d.agrees_with(s, 3.0)
        );
    }
    let _ = writeln!(out, "time: {elapsed:.2?}");
    out
}

//! Martingale and uniform-integrability classification of `Z`.
//!
//! `Z` is a martingale iff at each endpoint either `Ỹ` does not exit there
//! or the endpoint is good:
//!
//! * (a) `Ỹ` does not exit at `r`, (b) `r` is good,
//! * (c) `Ỹ` does not exit at `l`, (d) `l` is good,
//!
//! and it is uniformly integrable iff one of
//!
//! * (A) `b = 0` a.e.,
//! * (B) `r` good and `s̃(l) = -∞`,
//! * (C) `l` good and `s̃(r) = +∞`,
//! * (D) both endpoints good.
//!
//! An endpoint `E` is good when `s(E)` is finite and
//! `(s(E) - s)·b²/(ρσ²)` is integrable at `E`; the same test with `s̃, ρ̃`
//! is equivalent and both are run. The martingale condition does not depend
//! on the horizon, so `martingale_all_T` also answers the question on each
//! `[0, T]`.

use std::fmt;
use std::ops::Not;

use crate::asymp::{AsymptoticForm, Side};
use crate::coeffspec::{is_b_zero_ae, AsymTarget, ProblemSpec};
use crate::error::ClassifyError;
use crate::quad::ProbeOptions;
use crate::scale::{build_scale, feller_of_bundle, Finiteness, ScaleBundle, TailWeight, Which};
use crate::tristate::TriState;

/// One integral test that went into a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub condition: String,
    pub result: Finiteness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointReport {
    pub side: Side,
    pub y_exits: TriState,
    pub ytilde_exits: TriState,
    pub good: TriState,
    /// Goodness from `s`, `ρ`.
    pub good_via_scale: TriState,
    /// Goodness from `s̃`, `ρ̃`.
    pub good_via_aux_scale: TriState,
    pub s_limit_finite: TriState,
    pub stilde_limit_finite: TriState,
    pub evidence: Vec<Evidence>,
    pub notes: Vec<String>,
}

impl EndpointReport {
    /// Pairs of equivalent tests that both came out conclusive but
    /// disagree.
    pub fn disagreements(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let pairs = [
            ("Y exit", "Y exit (v)", "Y exit (s)"),
            ("Y~ exit", "Y~ exit (v)", "Y~ exit (s)"),
            ("goodness", "good (s)", "good (s~)"),
        ];
        for (name, a, b) in pairs {
            if self
                .evidence_for(a)
                .reconcile(self.evidence_for(b))
                .is_none()
            {
                out.push(name);
            }
        }
        out
    }

    pub fn evidence_for(&self, condition: &str) -> TriState {
        self.evidence
            .iter()
            .find(|e| e.condition == condition)
            .map_or(TriState::Unknown, |e| e.result.finite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// (a) `Ỹ` does not exit at `r`.
    NoAuxExitRight,
    /// (b) `r` is good.
    GoodRight,
    /// (c) `Ỹ` does not exit at `l`.
    NoAuxExitLeft,
    /// (d) `l` is good.
    GoodLeft,
    /// (A) `b = 0` a.e.
    BZero,
    /// (B) `r` good and `s̃(l) = -∞`.
    GoodRightAuxRecurrentLeft,
    /// (C) `l` good and `s̃(r) = ∞`.
    GoodLeftAuxRecurrentRight,
    /// (D) both endpoints good.
    BothGood,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::NoAuxExitRight => "a",
            Condition::GoodRight => "b",
            Condition::NoAuxExitLeft => "c",
            Condition::GoodLeft => "d",
            Condition::BZero => "A",
            Condition::GoodRightAuxRecurrentLeft => "B",
            Condition::GoodLeftAuxRecurrentRight => "C",
            Condition::BothGood => "D",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    StrictLocalMartingale,
    MartingaleNotUI,
    UniformlyIntegrableMartingale,
    Unknown,
}

impl Verdict {
    pub fn is_conclusive(self) -> bool {
        self != Verdict::Unknown
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::StrictLocalMartingale => "StrictLocalMartingale",
            Verdict::MartingaleNotUI => "MartingaleNotUI",
            Verdict::UniformlyIntegrableMartingale => "UniformlyIntegrableMartingale",
            Verdict::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub martingale_all_t: TriState,
    pub ui_martingale: TriState,
    pub verdict: Verdict,
    /// Conditions that hold, in the order (a)-(d), (A)-(D).
    pub triggered: Vec<Condition>,
    /// Left, then right.
    pub endpoints: [EndpointReport; 2],
    pub notes: Vec<String>,
}

impl Classification {
    pub fn endpoint(&self, side: Side) -> &EndpointReport {
        match side {
            Side::Left => &self.endpoints[0],
            Side::Right => &self.endpoints[1],
        }
    }

    pub fn fired(&self, c: Condition) -> bool {
        self.triggered.contains(&c)
    }
}

/// Scale data of `Y` and `Ỹ`, shared by the per-endpoint reports.
struct Scales<'a> {
    spec: &'a ProblemSpec,
    y: ScaleBundle,
    ytilde: ScaleBundle,
    b_squared: TailWeight,
}

impl<'a> Scales<'a> {
    fn new(spec: &'a ProblemSpec, opts: &ProbeOptions) -> Self {
        let b_squared = TailWeight {
            expr: spec.b.clone() * spec.b.clone(),
            forms: Side::both().map(|side| {
                spec.asym_form(side, AsymTarget::B)
                    .map(|f| f.and_then(|b: AsymptoticForm| b.mul(&b)))
            }),
        };
        Scales {
            spec,
            y: build_scale(spec, Which::Original, opts),
            ytilde: build_scale(spec, Which::Auxiliary, opts),
            b_squared,
        }
    }

    fn report(&self, side: Side) -> EndpointReport {
        let mut evidence = Vec::new();
        let mut notes = Vec::new();
        let mut push = |condition: &str, result: &Finiteness| {
            evidence.push(Evidence {
                condition: condition.to_string(),
                result: result.clone(),
            });
            result.finite
        };

        let fy = feller_of_bundle(&self.y, side);
        push("Y exit (v)", &fy.v_limit);
        push("Y exit (s)", &fy.s_route);
        let ft = feller_of_bundle(&self.ytilde, side);
        push("Y~ exit (v)", &ft.v_limit);
        push("Y~ exit (s)", &ft.s_route);
        notes.extend(fy.note.clone());
        notes.extend(ft.note.clone());

        let s_limit = push("s limit", self.y.limit_finite(side));
        let stilde_limit = push("s~ limit", self.ytilde.limit_finite(side));
        let via_s = push("good (s)", &self.y.weighted_tail(side, &self.b_squared));
        let via_stilde = push(
            "good (s~)",
            &self.ytilde.weighted_tail(side, &self.b_squared),
        );

        let mut good = match via_s.reconcile(via_stilde) {
            Some(g) => g,
            None => {
                notes.push(format!(
                    "goodness tests disagree at {side}: s-form {via_s}, s~-form {via_stilde}"
                ));
                TriState::Unknown
            }
        };
        if let (Some(a), Some(b)) = (fy.exits.known(), ft.exits.known()) {
            if a != b {
                if good.is_yes() {
                    notes.push(format!(
                        "exactly one of Y, Y~ exits at {side}, yet the integral tests call it good"
                    ));
                }
                good = TriState::No;
            }
        }
        EndpointReport {
            side,
            y_exits: fy.exits,
            ytilde_exits: ft.exits,
            good,
            good_via_scale: via_s,
            good_via_aux_scale: via_stilde,
            s_limit_finite: s_limit,
            stilde_limit_finite: stilde_limit,
            evidence,
            notes,
        }
    }

    fn b_zero(&self) -> TriState {
        let spec = self.spec;
        if is_b_zero_ae(spec) {
            return TriState::Yes;
        }
        let params = spec.param_values();
        let nonzero_somewhere = spec
            .interval
            .probe_grid()
            .into_iter()
            .any(|x| matches!(spec.b.eval(x, params), Ok(v) if v != 0.0));
        let nonzero_form = self
            .b_squared
            .forms
            .iter()
            .any(|f| matches!(f, Some(Ok(f)) if !f.is_zero()));
        if nonzero_somewhere || nonzero_form {
            TriState::No
        } else {
            TriState::Unknown
        }
    }
}

pub fn endpoint_report(spec: &ProblemSpec, side: Side, opts: &ProbeOptions) -> EndpointReport {
    Scales::new(spec, opts).report(side)
}

/// Assemble flags and verdict; the UI flag settles the martingale flag when
/// it is Yes and vice versa when the martingale flag is No.
fn assemble(
    mut martingale: TriState,
    mut ui: TriState,
    triggered: Vec<Condition>,
    endpoints: [EndpointReport; 2],
    mut notes: Vec<String>,
) -> Classification {
    if ui.is_yes() && martingale.is_no() {
        notes.push("uniform integrability and strict local martingale both derived".into());
        martingale = TriState::Unknown;
        ui = TriState::Unknown;
    } else if ui.is_yes() {
        martingale = TriState::Yes;
    } else if martingale.is_no() {
        ui = TriState::No;
    }
    let verdict = match (martingale, ui) {
        (_, TriState::Yes) => Verdict::UniformlyIntegrableMartingale,
        (TriState::No, _) => Verdict::StrictLocalMartingale,
        (TriState::Yes, TriState::No) => Verdict::MartingaleNotUI,
        _ => Verdict::Unknown,
    };
    for e in &endpoints {
        notes.extend(e.notes.iter().cloned());
    }
    Classification {
        martingale_all_t: martingale,
        ui_martingale: ui,
        verdict,
        triggered,
        endpoints,
        notes,
    }
}

fn ui_conditions(
    scales: &Scales,
    l: &EndpointReport,
    r: &EndpointReport,
) -> [(Condition, TriState); 4] {
    [
        (Condition::BZero, scales.b_zero()),
        (
            Condition::GoodRightAuxRecurrentLeft,
            r.good.and(l.stilde_limit_finite.not()),
        ),
        (
            Condition::GoodLeftAuxRecurrentRight,
            l.good.and(r.stilde_limit_finite.not()),
        ),
        (Condition::BothGood, l.good.and(r.good)),
    ]
}

pub fn classify_martingale(spec: &ProblemSpec, opts: &ProbeOptions) -> Classification {
    let scales = Scales::new(spec, opts);
    let [l, r] = Side::both().map(|s| scales.report(s));
    let mart = [
        (Condition::NoAuxExitRight, r.ytilde_exits.not()),
        (Condition::GoodRight, r.good),
        (Condition::NoAuxExitLeft, l.ytilde_exits.not()),
        (Condition::GoodLeft, l.good),
    ];
    let ui = ui_conditions(&scales, &l, &r);
    let martingale = mart[0].1.or(mart[1].1).and(mart[2].1.or(mart[3].1));
    let ui_flag = TriState::any(ui.iter().map(|c| c.1));
    let triggered = mart
        .iter()
        .chain(&ui)
        .filter(|(_, t)| t.is_yes())
        .map(|(c, _)| *c)
        .collect();
    assemble(martingale, ui_flag, triggered, [l, r], Vec::new())
}

/// Classification for a `Y` that exits at neither endpoint: `Z` is then a
/// martingale iff `Ỹ` does not exit either.
pub fn classify_no_exit(
    spec: &ProblemSpec,
    opts: &ProbeOptions,
) -> Result<Classification, ClassifyError> {
    let scales = Scales::new(spec, opts);
    let [l, r] = Side::both().map(|s| scales.report(s));
    for e in [&l, &r] {
        match e.y_exits {
            TriState::No => {}
            TriState::Yes => {
                return Err(ClassifyError::Precondition(format!(
                    "Y exits at the {} endpoint",
                    e.side
                )));
            }
            TriState::Unknown => {
                return Err(ClassifyError::Precondition(format!(
                    "could not establish that Y stays away from the {} endpoint",
                    e.side
                )));
            }
        }
    }
    let mart = [
        (Condition::NoAuxExitRight, r.ytilde_exits.not()),
        (Condition::NoAuxExitLeft, l.ytilde_exits.not()),
    ];
    let ui = ui_conditions(&scales, &l, &r);
    let martingale = mart[0].1.and(mart[1].1);
    let ui_flag = TriState::any(ui.iter().map(|c| c.1));
    let triggered = mart
        .iter()
        .chain(&ui)
        .filter(|(_, t)| t.is_yes())
        .map(|(c, _)| *c)
        .collect();
    Ok(assemble(martingale, ui_flag, triggered, [l, r], Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspec::parse_problem;

    fn power_drift(alpha: f64) -> ProblemSpec {
        let text = format!(
            "interval = (-inf, inf)\nparam alpha = {alpha}\nx0 = 0.5\nmu = abs(x)^alpha\nsigma = 1\nb = x\n\
             asym right mu = C=1 p=alpha\nasym left mu = C=1 p=alpha\n\
             asym right sigma = C=1\nasym left sigma = C=1\n\
             asym right b = C=1 p=1\nasym left b = C=-1 p=1"
        );
        parse_problem(&text).unwrap()
    }

    fn opts() -> ProbeOptions {
        ProbeOptions::default()
    }

    #[test]
    fn power_drift_three_regimes() {
        for (alpha, want) in [
            (0.5, Verdict::MartingaleNotUI),
            (2.0, Verdict::StrictLocalMartingale),
            (4.0, Verdict::UniformlyIntegrableMartingale),
        ] {
            let c = classify_martingale(&power_drift(alpha), &opts());
            assert_eq!(c.verdict, want, "alpha = {alpha}: {c:#?}");
        }
    }

    #[test]
    fn power_drift_endpoint_facts() {
        let c = classify_martingale(&power_drift(4.0), &opts());
        let (l, r) = (c.endpoint(Side::Left), c.endpoint(Side::Right));
        assert_eq!(r.good, TriState::Yes);
        assert_eq!(l.good, TriState::No);
        assert_eq!(l.s_limit_finite, TriState::No);
        assert_eq!(l.stilde_limit_finite, TriState::No);
        assert_eq!(l.ytilde_exits, TriState::No);
        assert!(c.fired(Condition::GoodRightAuxRecurrentLeft));
        assert!(!c.fired(Condition::BothGood));
        assert!(l.disagreements().is_empty() && r.disagreements().is_empty());
    }

    #[test]
    fn brownian_motion_with_zero_b_is_ui_through_a() {
        let spec = parse_problem("interval=(-inf,inf)\nx0=0\nmu=0\nsigma=1\nb=0").unwrap();
        let c = classify_martingale(&spec, &opts());
        assert_eq!(c.verdict, Verdict::UniformlyIntegrableMartingale);
        assert_eq!(
            c.triggered
                .iter()
                .filter(|t| t.label().chars().all(char::is_uppercase))
                .copied()
                .collect::<Vec<_>>(),
            vec![Condition::BZero]
        );
        assert_eq!(c.endpoint(Side::Right).good, TriState::No);
        assert_eq!(c.endpoint(Side::Left).good, TriState::No);
    }

    #[test]
    fn no_exit_variant_agrees_and_checks_precondition() {
        let spec = power_drift(0.5);
        let a = classify_no_exit(&spec, &opts()).unwrap();
        let b = classify_martingale(&spec, &opts());
        assert_eq!(a.martingale_all_t, TriState::Yes);
        assert_eq!(a.martingale_all_t, b.martingale_all_t);
        assert!(matches!(
            classify_no_exit(&power_drift(2.0), &opts()),
            Err(ClassifyError::Precondition(_))
        ));
    }

    #[test]
    fn geometric_brownian_motion_is_martingale_not_ui() {
        let spec = parse_problem(
            "interval=(0,inf)\nx0=1\nmu=x\nsigma=x\nb=1\n\
             asym left mu = C=1 p=1\nasym right mu = C=1 p=1\n\
             asym left sigma = C=1 p=1\nasym right sigma = C=1 p=1\n\
             asym left b = C=1\nasym right b = C=1",
        )
        .unwrap();
        assert_eq!(
            classify_martingale(&spec, &opts()).verdict,
            Verdict::MartingaleNotUI
        );
    }
}

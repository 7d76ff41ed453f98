//! Bubbles in local-volatility models `dY = μ₀Y dt + σ(Y) dW` on `(0, ∞)`.
//!
//! The discounted price `e^{-μ₀t}Y` equals `x₀Z` with `b(x) = σ(x)/x`, so
//! its martingale type is read off [`classify_martingale`]: a strict local
//! martingale is a type-3 bubble, a martingale that is not uniformly
//! integrable a type-2 bubble.

use std::fmt;
use std::ops::Not;

use crate::asymp::{AsymptoticForm, ConvergenceVerdict, Side};
use crate::classify::{classify_martingale, Classification, Verdict};
use crate::coeffspec::{parse_problem, AsymDecl, AsymTarget, Expr, Interval, Params, ProblemSpec};
use crate::error::{ClassifyError, SpecError};
use crate::quad::{probe_tail, ProbeOptions};
use crate::tristate::TriState;

#[derive(Debug, Clone, PartialEq)]
pub struct VolModel {
    pub sigma: Expr,
    pub params: Params,
    /// Declared behaviour of `σ` at `0` and at `∞`.
    pub sigma_asym: [Option<AsymDecl>; 2],
    pub mu0: f64,
    pub x0: f64,
}

impl VolModel {
    pub fn new(sigma: Expr, mu0: f64, x0: f64) -> Self {
        VolModel {
            sigma,
            params: Params::new(),
            sigma_asym: [None, None],
            mu0,
            x0,
        }
    }

    /// `σ(x) = σ₀ x^α` with both endpoint forms declared.
    pub fn cev(sigma0: f64, alpha: f64, mu0: f64, x0: f64) -> Self {
        let mut params = Params::new();
        let s0 = params.declare("sigma0", sigma0);
        let a = params.declare("alpha", alpha);
        let p = |slot, name: &str| Expr::param(slot, name);
        let sigma = p(s0, "sigma0") * Expr::var().pow(p(a, "alpha"));
        let decl =
            |side| AsymDecl::power_law(side, AsymTarget::Sigma, p(s0, "sigma0"), p(a, "alpha"));
        VolModel {
            sigma,
            params,
            sigma_asym: [Some(decl(Side::Left)), Some(decl(Side::Right))],
            mu0,
            x0,
        }
    }

    /// Model from a configuration: the interval must be `(0, inf)`, `σ` and
    /// `x0` are taken as given, `μ₀` is the parameter `mu0` (zero when
    /// absent). `mu` and `b` are derived and must not be supplied.
    pub fn from_config(text: &str) -> Result<Self, SpecError> {
        let spec = parse_problem(&format!("mu = 0\n{text}"))?;
        if !spec.mu.is_literal_zero() || !spec.b.is_literal_zero() {
            return Err(SpecError::Validation(
                "bubble models derive mu = mu0*x and b = sigma/x; remove the mu and b lines".into(),
            ));
        }
        if spec.interval.left != 0.0 || spec.interval.right != f64::INFINITY {
            return Err(SpecError::Validation(
                "bubble models live on (0, inf)".into(),
            ));
        }
        Ok(VolModel {
            sigma: spec.sigma.clone(),
            mu0: spec.params.get("mu0").unwrap_or(0.0),
            x0: spec.x0(),
            sigma_asym: Side::both().map(|s| spec.asym_decl(s, AsymTarget::Sigma).cloned()),
            params: spec.params,
        })
    }

    /// The spec of `Z` whose type decides the bubble: `μ = μ₀x`,
    /// `b = σ/x`.
    pub fn to_spec(&self) -> Result<ProblemSpec, SpecError> {
        let interval = Interval::new(0.0, f64::INFINITY)?;
        let x = Expr::var();
        let mu = if self.mu0 == 0.0 {
            Expr::zero()
        } else {
            Expr::constant(self.mu0) * x.clone()
        };
        let mut spec = ProblemSpec::new(
            interval,
            self.x0,
            mu,
            self.sigma.clone(),
            self.sigma.clone() / x,
        );
        spec.params = self.params.clone();
        for decl in self.sigma_asym.iter().flatten() {
            spec.asym.push(decl.clone());
            spec.asym.push(AsymDecl {
                target: AsymTarget::B,
                power: decl.power.clone() - Expr::constant(1.0),
                ..decl.clone()
            });
            if self.mu0 != 0.0 {
                spec.asym.push(AsymDecl::power_law(
                    decl.side,
                    AsymTarget::Mu,
                    Expr::constant(self.mu0),
                    Expr::constant(1.0),
                ));
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    fn sigma_form(&self, side: Side) -> Option<Result<AsymptoticForm, crate::error::AsympError>> {
        let interval = Interval::new(0.0, f64::INFINITY).expect("valid");
        self.sigma_asym[match side {
            Side::Left => 0,
            Side::Right => 1,
        }]
        .as_ref()
        .map(|d| d.form(&interval, self.params.values()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BubbleReport {
    pub type3: TriState,
    pub type2: TriState,
    pub none: TriState,
    /// The full classification, absent for the driftless shortcut.
    pub classification: Option<Classification>,
    pub detail: String,
}

impl BubbleReport {
    fn from_flags(martingale: TriState, ui: TriState) -> (TriState, TriState, TriState) {
        (martingale.not(), martingale.and(ui.not()), ui)
    }

    pub fn label(&self) -> &'static str {
        match (self.type3, self.type2, self.none) {
            (TriState::Yes, _, _) => "type 3 bubble",
            (_, TriState::Yes, _) => "type 2 bubble",
            (_, _, TriState::Yes) => "no bubble",
            _ => "unknown",
        }
    }
}

impl fmt::Display for BubbleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.detail)
    }
}

pub fn bubble_classify(model: &VolModel, opts: &ProbeOptions) -> Result<BubbleReport, SpecError> {
    let spec = model.to_spec()?;
    let c = classify_martingale(&spec, opts);
    let (type3, type2, none) = BubbleReport::from_flags(c.martingale_all_t, c.ui_martingale);
    Ok(BubbleReport {
        type3,
        type2,
        none,
        detail: format!("discounted price is {}", c.verdict),
        classification: Some(c),
    })
}

/// Driftless case: the price is a strict local martingale on every `[0, T]`
/// iff `x/σ²(x)` is integrable at `∞`, and a non-UI martingale otherwise.
pub fn driftless_dichotomy(
    model: &VolModel,
    opts: &ProbeOptions,
) -> Result<BubbleReport, ClassifyError> {
    if model.mu0 != 0.0 {
        return Err(ClassifyError::Precondition(format!(
            "the dichotomy needs mu0 = 0, got {}",
            model.mu0
        )));
    }
    let analytic = match model.sigma_form(Side::Right) {
        Some(Ok(s)) => {
            let x = AsymptoticForm::power_law(s.frame, 1.0, 1.0);
            s.pow(-2.0).and_then(|inv| x.mul(&inv)).ok().map(|f| {
                let ok = f.decide_convergence() == ConvergenceVerdict::Converges;
                (TriState::from_bool(ok), format!("x/σ² ~ {f}"))
            })
        }
        _ => None,
    };
    let (integrable, detail) = match analytic {
        Some(a) => a,
        None => {
            let params = model.params.values();
            let f = |x: f64| {
                let s = model.sigma.eval(x, params)?;
                Ok(x / (s * s))
            };
            match probe_tail(f, model.x0, f64::INFINITY, Side::Right, opts) {
                Ok(v) => (
                    v.finiteness()
                        .map_or(TriState::Unknown, TriState::from_bool),
                    format!("x/σ² tail: {v}"),
                ),
                Err(e) => (TriState::Unknown, format!("x/σ² tail failed: {e}")),
            }
        }
    };
    Ok(BubbleReport {
        type3: integrable,
        type2: integrable.not(),
        none: integrable
            .known()
            .map_or(TriState::Unknown, |_| TriState::No),
        classification: None,
        detail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    UI,
    StrictLocal,
    MartingaleNotUI,
}

impl RegionLabel {
    pub fn verdict(self) -> Verdict {
        match self {
            RegionLabel::UI => Verdict::UniformlyIntegrableMartingale,
            RegionLabel::StrictLocal => Verdict::StrictLocalMartingale,
            RegionLabel::MartingaleNotUI => Verdict::MartingaleNotUI,
        }
    }
}

/// Inputs are decimal grid values; the region lines are compared at this
/// resolution so that e.g. `2·(-0.2) - (-1.4)` counts as on the line.
const REGION_EPS: f64 = 1e-9;

/// Closed-form region of the generalized CEV model
/// `dY = μ₀Y^α dt + σ₀Y^β dW` with `b = -(μ₀/σ₀)x^{α-β}`, `μ₀ ≠ 0`.
pub fn cev_region(alpha: f64, beta: f64) -> RegionLabel {
    if 2.0 * beta - alpha < 1.0 - REGION_EPS {
        RegionLabel::UI
    } else if beta < 1.0 - REGION_EPS {
        RegionLabel::StrictLocal
    } else {
        RegionLabel::MartingaleNotUI
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> ProbeOptions {
        ProbeOptions::default()
    }

    #[test]
    fn cev_bubbles() {
        let cases = [
            (2.0, 0.05, "type 3 bubble"),
            (2.0, 0.0, "type 3 bubble"),
            (0.5, 0.05, "no bubble"),
            (0.5, 0.0, "type 2 bubble"),
            (1.0, 0.05, "type 2 bubble"),
        ];
        for (alpha, mu0, want) in cases {
            let r = bubble_classify(&VolModel::cev(0.4, alpha, mu0, 1.0), &opts()).unwrap();
            assert_eq!(r.label(), want, "alpha={alpha} mu0={mu0}: {r}");
        }
    }

    #[test]
    fn dichotomy_matches_pipeline() {
        for alpha in [0.5, 1.0, 1.25, 2.0, 3.0] {
            let m = VolModel::cev(1.0, alpha, 0.0, 1.0);
            let d = driftless_dichotomy(&m, &opts()).unwrap();
            let b = bubble_classify(&m, &opts()).unwrap();
            assert_eq!(d.type3, TriState::from_bool(alpha > 1.0), "alpha={alpha}");
            assert_eq!(d.label(), b.label(), "alpha={alpha}");
        }
    }

    #[test]
    fn dichotomy_without_declared_forms() {
        let m = VolModel::new(Expr::var().pow(Expr::constant(2.0)), 0.0, 1.0);
        assert_eq!(
            driftless_dichotomy(&m, &opts()).unwrap().type3,
            TriState::Yes
        );
        let m = VolModel::new(Expr::var(), 0.0, 1.0);
        assert_eq!(
            driftless_dichotomy(&m, &opts()).unwrap().type2,
            TriState::Yes
        );
    }

    #[test]
    fn config_round_trip() {
        let m = VolModel::from_config(
            "interval=(0,inf)\nx0=1\nparam mu0=0.05\nsigma=x^2\nasym right sigma = C=1 p=2",
        )
        .unwrap();
        assert_eq!(m.mu0, 0.05);
        assert!(m.sigma_asym[1].is_some() && m.sigma_asym[0].is_none());
        assert!(VolModel::from_config("interval=(0,inf)\nx0=1\nmu=x\nsigma=x").is_err());
        assert!(VolModel::from_config("interval=(-1,inf)\nx0=1\nsigma=1").is_err());
    }

    #[test]
    fn cev_region_examples() {
        assert_eq!(cev_region(0.0, 0.0), RegionLabel::UI);
        assert_eq!(cev_region(0.0, 0.5), RegionLabel::StrictLocal);
        assert_eq!(cev_region(1.0, 1.0), RegionLabel::MartingaleNotUI);
        assert_eq!(cev_region(-1.4, -0.2), RegionLabel::StrictLocal);
    }
}

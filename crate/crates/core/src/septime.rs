//! Mutual arrangement of the laws `P`, `P̃` of two diffusions on the same
//! interval started at the same point, through their separating time.
//!
//! A point of `J` is non-separating when `σ² = σ̃²` around it and
//! `(μ - μ̃)²/σ⁴` is integrable there. An endpoint `r` is non-separating
//! when `[x₀, r)` is and `s(r) < ∞` with `(s(r) - s)(μ - μ̃)²/(ρσ⁴)`
//! integrable at `r` (equivalently with `s̃, ρ̃, σ̃`). With `α`, `β` the
//! separating points nearest to `x₀` on either side, the separating time is
//! the first time the path reaches `α` or `β`, where reaching an endpoint
//! means exiting there (or oscillating toward it when the path lives
//! forever).
//!
//! Everything below only needs zero/positive/one statements about hitting
//! and converging, which follow from the scale functions:
//!
//! * an interior point is hit with positive probability under either law;
//! * convergence to `r` has positive probability iff `s(r) < ∞`, and then
//!   even without ever going below any fixed level under `x₀`;
//! * if `s(l) = -∞` and `s(r) = ∞` the path oscillates between the ends.

use std::fmt;
use std::ops::Not;

use crate::asymp::{AsymptoticForm, Side};
use crate::classify::Evidence;
use crate::coeffspec::{is_b_zero_ae, AsymTarget, Expr, Interval, ProblemSpec};
use crate::error::{AsympError, EvalError, QuadError};
use crate::quad::{integrate_proper, ProbeOptions};
use crate::scale::{feller_of_bundle, Law, ScaleBundle, TailWeight, Which};
use crate::tristate::TriState;

/// Relative tolerance for pointwise equality of `σ²` and `σ̃²` on the grid.
const VOL_EQ_TOL: f64 = 1e-12;
const INTERIOR_PIECES: usize = 64;

/// Two diffusions on a shared interval with a shared start.
#[derive(Debug, Clone)]
pub struct SdePair {
    pub interval: Interval,
    pub x0: f64,
    pub p: Law,
    pub ptilde: Law,
    /// `(μ - μ̃)²/σ²`, the weight of the endpoint tests.
    pub gap: TailWeight,
    identical: Option<bool>,
}

fn gap_forms(
    drift: [Option<Result<AsymptoticForm, AsympError>>; 2],
    drift_tilde: [Option<Result<AsymptoticForm, AsympError>>; 2],
    vol: [Option<Result<AsymptoticForm, AsympError>>; 2],
    structurally_equal: bool,
    interval: &Interval,
) -> [Option<Result<AsymptoticForm, AsympError>>; 2] {
    let mut out: [Option<Result<AsymptoticForm, AsympError>>; 2] = [None, None];
    for (i, side) in Side::both().into_iter().enumerate() {
        if structurally_equal {
            out[i] = Some(Ok(AsymptoticForm::zero(interval.frame(side))));
            continue;
        }
        out[i] = match (drift[i].clone(), drift_tilde[i].clone(), vol[i].clone()) {
            (Some(m), Some(mt), Some(s)) => Some((|| {
                let d = m?.add(&mt?.scale(-1.0))?;
                d.mul(&d)?.mul(&s?.pow(-2.0)?)
            })()),
            _ => None,
        };
    }
    out
}

impl SdePair {
    /// Pair from a spec with `mu_tilde` and/or `sigma_tilde`; a missing one
    /// repeats the first diffusion's coefficient.
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        let p = Law::of_spec(spec, Which::Original);
        let ptilde = Law::tilde_of_spec(spec);
        let params = spec.param_values();
        let same_drift = ptilde.drift.same_as(&p.drift, params);
        let same_vol = ptilde.vol.same_as(&p.vol, params);
        let gap_expr = (p.drift.clone() - ptilde.drift.clone()).pow(Expr::constant(2.0))
            / (p.vol.clone() * p.vol.clone());
        let forms = gap_forms(
            Side::both().map(|s| spec.asym_form(s, AsymTarget::Mu)),
            Side::both().map(|s| {
                if spec.mu_tilde.is_some() {
                    spec.asym_form(s, AsymTarget::MuTilde)
                } else {
                    spec.asym_form(s, AsymTarget::Mu)
                }
            }),
            Side::both().map(|s| spec.asym_form(s, AsymTarget::Sigma)),
            same_drift,
            &spec.interval,
        );
        SdePair {
            interval: spec.interval,
            x0: spec.x0(),
            p,
            ptilde,
            gap: TailWeight {
                expr: if same_drift { Expr::zero() } else { gap_expr },
                forms,
            },
            identical: (same_drift && same_vol).then_some(true),
        }
    }

    /// `Y` against the auxiliary diffusion `Ỹ` (drift `μ + bσ`, same `σ`),
    /// so that `(μ - μ̃)²/σ² = b²`.
    pub fn of_exponential(spec: &ProblemSpec) -> Self {
        let b_zero = is_b_zero_ae(spec);
        SdePair {
            interval: spec.interval,
            x0: spec.x0(),
            p: Law::of_spec(spec, Which::Original),
            ptilde: Law::of_spec(spec, Which::Auxiliary),
            gap: TailWeight {
                expr: spec.b.clone() * spec.b.clone(),
                forms: Side::both().map(|s| {
                    spec.asym_form(s, AsymTarget::B)
                        .map(|f| f.and_then(|b| b.mul(&b)))
                }),
            },
            identical: Some(b_zero),
        }
    }

    /// Roles of `P` and `P̃` exchanged.
    pub fn swapped(&self) -> Self {
        SdePair {
            p: self.ptilde.clone(),
            ptilde: self.p.clone(),
            ..self.clone()
        }
    }

    fn params(&self) -> &[f64] {
        &self.p.params
    }

    fn vol_sq_equal_at(&self, x: f64) -> Result<bool, EvalError> {
        let a = self.p.vol.eval(x, self.params())?.powi(2);
        let b = self.ptilde.vol.eval(x, self.params())?.powi(2);
        Ok((a - b).abs() <= VOL_EQ_TOL * (a + b))
    }

    fn drift_equal_at(&self, x: f64) -> Result<bool, EvalError> {
        let a = self.p.drift.eval(x, self.params())?;
        let b = self.ptilde.drift.eval(x, self.params())?;
        Ok((a - b).abs() <= VOL_EQ_TOL * (a.abs() + b.abs()))
    }

    /// `P = P̃`, structurally or else on the probe grid.
    fn identical(&self, notes: &mut Vec<String>) -> bool {
        if let Some(v) = self.identical {
            return v;
        }
        let same = self.interval.probe_grid().into_iter().all(|x| {
            matches!(
                (self.vol_sq_equal_at(x), self.drift_equal_at(x)),
                (Ok(true), Ok(true))
            )
        });
        if same {
            notes.push("coefficients agree on the probe grid; laws treated as equal".into());
        }
        same
    }
}

/// Nearest separating point on one side of `x₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nearest {
    /// No separating point on this side.
    None,
    Interior(f64),
    Endpoint,
    Unknown,
}

impl Nearest {
    fn is_none(self) -> TriState {
        match self {
            Nearest::None => TriState::Yes,
            Nearest::Unknown => TriState::Unknown,
            _ => TriState::No,
        }
    }
}

impl fmt::Display for Nearest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nearest::None => f.write_str("none"),
            Nearest::Interior(x) => write!(f, "{x}"),
            Nearest::Endpoint => f.write_str("endpoint"),
            Nearest::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatingSetReport {
    pub identical_laws: bool,
    /// Closed stretches of `J` made of separating points.
    pub interior_separating: Vec<(f64, f64)>,
    /// Stretches where local integrability could not be settled.
    pub interior_unknown: Vec<(f64, f64)>,
    pub left_endpoint_separating: TriState,
    pub right_endpoint_separating: TriState,
    /// Nearest separating point left of `x₀`.
    pub alpha: Nearest,
    /// Nearest separating point right of `x₀`.
    pub beta: Nearest,
    pub evidence: Vec<Evidence>,
    pub notes: Vec<String>,
}

impl SeparatingSetReport {
    pub fn endpoint_separating(&self, side: Side) -> TriState {
        match side {
            Side::Left => self.left_endpoint_separating,
            Side::Right => self.right_endpoint_separating,
        }
    }

    pub fn nearest(&self, side: Side) -> Nearest {
        match side {
            Side::Left => self.alpha,
            Side::Right => self.beta,
        }
    }

    pub fn is_empty(&self) -> TriState {
        self.alpha.is_none().and(self.beta.is_none())
    }
}

/// Maximal runs of consecutive grid points where `σ² ≠ σ̃²`.
fn vol_runs(pair: &SdePair, notes: &mut Vec<String>) -> Vec<(f64, f64)> {
    let mut grid = pair.interval.probe_grid();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut runs = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for x in grid {
        let differs = match pair.vol_sq_equal_at(x) {
            Ok(eq) => !eq,
            Err(e) => {
                notes.push(format!("volatility comparison failed at {x}: {e}"));
                true
            }
        };
        open = match (open, differs) {
            (Some((a, _)), true) => Some((a, x)),
            (None, true) => Some((x, x)),
            (Some(run), false) => {
                runs.push(run);
                None
            }
            (None, false) => None,
        };
    }
    runs.extend(open);
    runs
}

/// Pieces of the outer probe interval on which `(μ - μ̃)²/σ⁴` fails to be
/// integrable (first list) or could not be settled (second list). A
/// failing piece is narrowed by bisection toward the offending point.
fn gap_singularities(pair: &SdePair) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let mut bad = Vec::new();
    let mut unsure = Vec::new();
    if pair.gap.expr.is_literal_zero() {
        return (bad, unsure);
    }
    let Some(&(lo, hi)) = pair.interval.probe_intervals().last() else {
        return (bad, unsure);
    };
    let params = pair.params();
    let f = |x: f64| -> Result<f64, QuadError> {
        let eval = || -> Result<f64, EvalError> {
            let w = pair.gap.expr.eval(x, params)?;
            let s = pair.p.vol.eval(x, params)?;
            Ok(w / (s * s))
        };
        eval().map_err(|source| QuadError::Evaluation { x, source })
    };
    let test = |a: f64, b: f64| -> TriState {
        match integrate_proper(f, a, b, 1e-9) {
            Ok(r) if !r.value.is_finite() => TriState::No,
            Ok(r) if r.abs_err <= 1e-6 * r.abs_value.max(1.0) => TriState::Yes,
            Ok(_) => TriState::Unknown,
            Err(_) => TriState::No,
        }
    };
    let (ta, tb) = (lo.atan(), hi.atan());
    let nodes: Vec<f64> = (0..=INTERIOR_PIECES)
        .map(|j| (ta + (tb - ta) * j as f64 / INTERIOR_PIECES as f64).tan())
        .collect();
    for w in nodes.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        match test(a, b) {
            TriState::Yes => {}
            TriState::Unknown => unsure.push((a, b)),
            TriState::No => {
                while b - a > 1e-9 * a.abs().max(1.0) {
                    let m = 0.5 * (a + b);
                    if test(a, m) != TriState::Yes {
                        b = m;
                    } else if test(m, b) != TriState::Yes {
                        a = m;
                    } else {
                        break;
                    }
                }
                bad.push((a, b));
            }
        }
    }
    (bad, unsure)
}

struct Bundles {
    p: ScaleBundle,
    ptilde: ScaleBundle,
}

impl Bundles {
    fn new(pair: &SdePair, opts: &ProbeOptions) -> Self {
        Bundles {
            p: ScaleBundle::new(pair.p.clone(), Which::Original, opts),
            ptilde: ScaleBundle::new(pair.ptilde.clone(), Which::Auxiliary, opts),
        }
    }
}

fn separating_with(pair: &SdePair, bundles: &Bundles) -> SeparatingSetReport {
    let mut notes = Vec::new();
    let mut evidence = Vec::new();
    if pair.identical(&mut notes) {
        return SeparatingSetReport {
            identical_laws: true,
            interior_separating: Vec::new(),
            interior_unknown: Vec::new(),
            left_endpoint_separating: TriState::No,
            right_endpoint_separating: TriState::No,
            alpha: Nearest::None,
            beta: Nearest::None,
            evidence,
            notes,
        };
    }
    let mut interior = vol_runs(pair, &mut notes);
    let (bad, unsure) = gap_singularities(pair);
    interior.extend(bad);
    interior.sort_by(|a, b| a.0.total_cmp(&b.0));

    let x0 = pair.x0;
    let mut report_side = |side: Side| -> (TriState, Nearest) {
        let on_side = |&(a, b): &(f64, f64)| match side {
            Side::Left => a <= x0,
            Side::Right => b >= x0,
        };
        let hits: Vec<(f64, f64)> = interior.iter().copied().filter(on_side).collect();
        if !hits.is_empty() {
            let nearest = match side {
                Side::Left => hits
                    .iter()
                    .map(|&(_, b)| b.min(x0))
                    .fold(f64::NEG_INFINITY, f64::max),
                Side::Right => hits
                    .iter()
                    .map(|&(a, _)| a.max(x0))
                    .fold(f64::INFINITY, f64::min),
            };
            return (TriState::Yes, Nearest::Interior(nearest));
        }
        if unsure.iter().any(on_side) {
            return (TriState::Unknown, Nearest::Unknown);
        }
        let via_p = bundles.p.weighted_tail(side, &pair.gap);
        let via_pt = bundles.ptilde.weighted_tail(side, &pair.gap);
        let (a, b) = (via_p.finite, via_pt.finite);
        evidence.push(Evidence {
            condition: format!("{side} non-separating (s)"),
            result: via_p,
        });
        evidence.push(Evidence {
            condition: format!("{side} non-separating (s~)"),
            result: via_pt,
        });
        let non_sep = match a.reconcile(b) {
            Some(t) => t,
            None => {
                notes.push(format!(
                    "endpoint tests disagree at {side}: s-form {a}, s~-form {b}"
                ));
                TriState::Unknown
            }
        };
        let nearest = match non_sep {
            TriState::Yes => Nearest::None,
            TriState::No => Nearest::Endpoint,
            TriState::Unknown => Nearest::Unknown,
        };
        (non_sep.not(), nearest)
    };
    let (left, alpha) = report_side(Side::Left);
    let (right, beta) = report_side(Side::Right);
    SeparatingSetReport {
        identical_laws: false,
        interior_separating: interior,
        interior_unknown: unsure,
        left_endpoint_separating: left,
        right_endpoint_separating: right,
        alpha,
        beta,
        evidence,
        notes,
    }
}

pub fn separating_set(pair: &SdePair, opts: &ProbeOptions) -> SeparatingSetReport {
    separating_with(pair, &Bundles::new(pair, opts))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrangementReport {
    pub separating: SeparatingSetReport,
    /// `P̃ ∼ P`.
    pub equivalent: TriState,
    /// `P̃ ≪ P`.
    pub abs_continuous: TriState,
    /// `P̃ loc∼ P`.
    pub loc_equivalent: TriState,
    /// `P̃ loc≪ P`.
    pub loc_abs_continuous: TriState,
    /// `P̃ ⊥ P`.
    pub singular: TriState,
    /// `P̃₀ ⊥ P₀`.
    pub singular_at_zero: TriState,
    /// `P ≪ P̃`.
    pub reverse_abs_continuous: TriState,
    /// `P loc≪ P̃`.
    pub reverse_loc_abs_continuous: TriState,
    pub trace: Vec<String>,
}

impl ArrangementReport {
    /// The report with `P` and `P̃` exchanged (the separating set is
    /// symmetric).
    pub fn swapped(&self) -> ArrangementReport {
        ArrangementReport {
            abs_continuous: self.reverse_abs_continuous,
            loc_abs_continuous: self.reverse_loc_abs_continuous,
            reverse_abs_continuous: self.abs_continuous,
            reverse_loc_abs_continuous: self.loc_abs_continuous,
            ..self.clone()
        }
    }

    /// `(name, flag)` for every relation, in a fixed order.
    pub fn flags(&self) -> [(&'static str, TriState); 8] {
        [
            ("P~ ~ P", self.equivalent),
            ("P~ << P", self.abs_continuous),
            ("P~ loc~ P", self.loc_equivalent),
            ("P~ loc<< P", self.loc_abs_continuous),
            ("P~ _|_ P", self.singular),
            ("P~_0 _|_ P_0", self.singular_at_zero),
            ("P << P~", self.reverse_abs_continuous),
            ("P loc<< P~", self.reverse_loc_abs_continuous),
        ]
    }
}

/// `(loc≪, ≪)` of the law whose scale data is `q` with respect to the
/// other one.
fn dominated_by(
    sep: &SeparatingSetReport,
    q: &ScaleBundle,
    who: &str,
    trace: &mut Vec<String>,
) -> (TriState, TriState) {
    let mut loc = TriState::Yes;
    let mut abs = TriState::Yes;
    for side in Side::both() {
        let (l, a) = match sep.nearest(side) {
            Nearest::None => (TriState::Yes, TriState::Yes),
            Nearest::Unknown => (TriState::Unknown, TriState::Unknown),
            Nearest::Interior(x) => {
                trace.push(format!("{who}: separating point {x} is reached in finite time with positive probability"));
                (TriState::No, TriState::No)
            }
            Nearest::Endpoint => {
                let exits = feller_of_bundle(q, side).exits;
                let here = q.limit_finite(side).finite;
                let there = q.limit_finite(side.other()).finite;
                let avoids = here.not().and(there);
                trace.push(format!(
                    "{who}: {side} endpoint separating; exits there: {exits}; scale limit finite there: {here}, at the {} end: {there}",
                    side.other()
                ));
                (exits.not(), avoids)
            }
        };
        loc = loc.and(l);
        abs = abs.and(a);
    }
    (loc, abs)
}

/// `P̃ ⊥ P` read under the law with scale data `q`: the separating time is
/// finite or infinite almost surely unless the path can converge to a
/// non-separating endpoint with no separating point in between.
fn singular_under(sep: &SeparatingSetReport, q: &ScaleBundle) -> TriState {
    let escape = |side: Side| sep.nearest(side).is_none().and(q.limit_finite(side).finite);
    sep.is_empty()
        .not()
        .and(escape(Side::Left).not())
        .and(escape(Side::Right).not())
}

fn arrangement_with(pair: &SdePair, bundles: &Bundles) -> ArrangementReport {
    let sep = separating_with(pair, bundles);
    let mut trace = Vec::new();
    if sep.identical_laws {
        trace.push("P = P~: the separating time is never reached".into());
        return ArrangementReport {
            separating: sep,
            equivalent: TriState::Yes,
            abs_continuous: TriState::Yes,
            loc_equivalent: TriState::Yes,
            loc_abs_continuous: TriState::Yes,
            singular: TriState::No,
            singular_at_zero: TriState::No,
            reverse_abs_continuous: TriState::Yes,
            reverse_loc_abs_continuous: TriState::Yes,
            trace,
        };
    }
    let (loc, abs) = dominated_by(&sep, &bundles.ptilde, "under P~", &mut trace);
    let (rloc, rabs) = dominated_by(&sep, &bundles.p, "under P", &mut trace);
    let sing_p = singular_under(&sep, &bundles.p);
    let sing_pt = singular_under(&sep, &bundles.ptilde);
    let singular = match sing_p.reconcile(sing_pt) {
        Some(t) => t,
        None => {
            trace.push(format!(
                "singularity read under P ({sing_p}) and under P~ ({sing_pt}) disagree"
            ));
            TriState::Unknown
        }
    };
    let at_zero = match (sep.alpha, sep.beta) {
        (Nearest::Interior(a), _) if a == pair.x0 => TriState::Yes,
        (_, Nearest::Interior(b)) if b == pair.x0 => TriState::Yes,
        (Nearest::Unknown, _) | (_, Nearest::Unknown) => TriState::Unknown,
        _ => TriState::No,
    };
    ArrangementReport {
        separating: sep,
        equivalent: abs.and(rabs),
        abs_continuous: abs,
        loc_equivalent: loc.and(rloc),
        loc_abs_continuous: loc,
        singular,
        singular_at_zero: at_zero,
        reverse_abs_continuous: rabs,
        reverse_loc_abs_continuous: rloc,
        trace,
    }
}

pub fn mutual_arrangement(pair: &SdePair, opts: &ProbeOptions) -> ArrangementReport {
    arrangement_with(pair, &Bundles::new(pair, opts))
}

/// Arrangement of the law of `Y` and of the auxiliary diffusion: `Z` is a
/// martingale iff `P̃ loc≪ P`, and uniformly integrable iff `P̃ ≪ P`.
pub fn arrangement_of_exponential(spec: &ProblemSpec, opts: &ProbeOptions) -> ArrangementReport {
    mutual_arrangement(&SdePair::of_exponential(spec), opts)
}

//! Scale density `ρ = exp(-∫_c 2μ/σ²)`, scale function `s = ∫_c ρ`, their
//! endpoint limits and the Feller functional `v`.
//!
//! Every endpoint test has the shape "`∫ f` converges toward the endpoint"
//! and is answered twice when possible:
//!
//! * analytically, from declared leading-order forms of the coefficients,
//!   through [`crate::asymp`];
//! * numerically, on a profile of the diffusion along the ladder chart of
//!   [`crate::quad`]: `ln ρ` is accumulated panel by panel with a spectral
//!   integration matrix, and the inner integrals `(s(E) - s(x))/ρ(x)` and
//!   `ρ(x)·M(x)` (with `M = ∫_c 1/(ρσ²)`) are carried as scaled recursions so
//!   that neither `ρ` nor `s` is ever formed where it over- or underflows.
//!
//! The analytic route is authoritative when it is available.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::asymp::{AsymptoticForm, ConvergenceVerdict, Side};
use crate::coeffspec::{AsymTarget, Expr, Interval, ProblemSpec};
use crate::error::{AsympError, EvalError};
use crate::quad::{Chart, GaussLegendre, IntegralVerdict, LadderDecider, ProbeOptions, RUNG_WIDTH};
use crate::tristate::TriState;

const NODES: usize = 12;
const PANELS_PER_RUNG: usize = 8;
const GUARD_RUNGS: usize = 2;
const LAPLACE_THRESHOLD: f64 = 40.0;

type FormSlot = Option<Result<AsymptoticForm, AsympError>>;

fn rule() -> &'static (GaussLegendre, Vec<Vec<f64>>) {
    static RULE: OnceLock<(GaussLegendre, Vec<Vec<f64>>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let gl = GaussLegendre::new(NODES);
        let q = gl.integration_matrix();
        (gl, q)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Which {
    /// The diffusion `Y` itself.
    Original,
    /// `Ỹ`, with drift `μ + bσ`.
    Auxiliary,
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::Original => "Y",
            Which::Auxiliary => "Y~",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Analytic,
    Numeric,
}

/// Outcome of one convergence test, with how it was reached.
#[derive(Debug, Clone, PartialEq)]
pub struct Finiteness {
    pub finite: TriState,
    pub route: Route,
    pub detail: String,
}

impl Finiteness {
    fn analytic(finite: bool, detail: impl Into<String>) -> Self {
        Finiteness {
            finite: TriState::from_bool(finite),
            route: Route::Analytic,
            detail: detail.into(),
        }
    }

    fn numeric(v: &IntegralVerdict) -> Self {
        Finiteness {
            finite: match v.finiteness() {
                Some(b) => TriState::from_bool(b),
                None => TriState::Unknown,
            },
            route: Route::Numeric,
            detail: v.to_string(),
        }
    }

    fn unknown(detail: impl Into<String>) -> Self {
        Finiteness {
            finite: TriState::Unknown,
            route: Route::Numeric,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Finiteness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let route = match self.route {
            Route::Analytic => "analytic",
            Route::Numeric => "numeric",
        };
        write!(f, "{} [{route}: {}]", self.finite, self.detail)
    }
}

fn convergence(form: &AsymptoticForm) -> bool {
    form.decide_convergence() == ConvergenceVerdict::Converges
}

/// A weight `w` for the tail test `(s(E) - s)·w/(ρσ²) ∈ L¹` at an endpoint.
#[derive(Debug, Clone)]
pub struct TailWeight {
    pub expr: Expr,
    pub forms: [FormSlot; 2],
}

impl TailWeight {
    pub fn one(interval: &Interval) -> Self {
        TailWeight {
            expr: Expr::constant(1.0),
            forms: Side::both().map(|s| Some(Ok(AsymptoticForm::constant(interval.frame(s), 1.0)))),
        }
    }
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

/// One diffusion `dX = drift dt + vol dW` on an interval, as the scale
/// computations see it.
#[derive(Debug, Clone)]
pub struct Law {
    pub interval: Interval,
    pub reference: f64,
    pub drift: Expr,
    pub vol: Expr,
    pub params: Arc<[f64]>,
    pub density_forms: [FormSlot; 2],
    pub vol_forms: [FormSlot; 2],
}

fn density_from(drift: FormSlot, vol: &FormSlot) -> FormSlot {
    let (drift, vol) = match (drift?, vol.clone()?) {
        (Ok(d), Ok(v)) => (d, v),
        (Err(e), _) | (_, Err(e)) => return Some(Err(e)),
    };
    Some((|| {
        let g = drift.scale(2.0).mul(&vol.pow(-2.0)?)?;
        AsymptoticForm::exp_neg_integral(&g)
    })())
}

impl Law {
    pub fn new(interval: Interval, reference: f64, drift: Expr, vol: Expr, params: &[f64]) -> Self {
        Law {
            interval,
            reference,
            drift,
            vol,
            params: params.into(),
            density_forms: [None, None],
            vol_forms: [None, None],
        }
    }

    pub fn of_spec(spec: &ProblemSpec, which: Which) -> Self {
        let mut law = match which {
            Which::Original => Law::new(
                spec.interval,
                spec.reference_point(),
                spec.mu.clone(),
                spec.sigma.clone(),
                spec.param_values(),
            ),
            Which::Auxiliary => Law::new(
                spec.interval,
                spec.reference_point(),
                spec.mu.clone() + spec.b.clone() * spec.sigma.clone(),
                spec.sigma.clone(),
                spec.param_values(),
            ),
        };
        for side in Side::both() {
            let i = side_index(side);
            let vol = spec.asym_form(side, AsymTarget::Sigma);
            let mut density = density_from(spec.asym_form(side, AsymTarget::Mu), &vol);
            if which == Which::Auxiliary {
                density = match (density, spec.asym_form(side, AsymTarget::B), vol.clone()) {
                    (Some(Ok(r)), Some(Ok(b)), Some(Ok(s))) => Some((|| {
                        let g = b.scale(2.0).mul(&s.recip()?)?;
                        r.mul(&AsymptoticForm::exp_neg_integral(&g)?)
                    })()),
                    (Some(Err(e)), _, _) | (_, Some(Err(e)), _) | (_, _, Some(Err(e))) => {
                        Some(Err(e))
                    }
                    _ => None,
                };
            }
            law.density_forms[i] = density;
            law.vol_forms[i] = vol;
        }
        law
    }

    /// The second diffusion of a pair (`mu_tilde`, `sigma_tilde`), falling
    /// back to `mu`/`sigma` for whichever is not overridden.
    pub fn tilde_of_spec(spec: &ProblemSpec) -> Self {
        let mut law = Law::new(
            spec.interval,
            spec.reference_point(),
            spec.mu_tilde.clone().unwrap_or_else(|| spec.mu.clone()),
            spec.sigma_tilde
                .clone()
                .unwrap_or_else(|| spec.sigma.clone()),
            spec.param_values(),
        );
        for side in Side::both() {
            let i = side_index(side);
            let vol = if spec.sigma_tilde.is_some() {
                spec.asym_form(side, AsymTarget::SigmaTilde)
            } else {
                spec.asym_form(side, AsymTarget::Sigma)
            };
            let drift = if spec.mu_tilde.is_some() {
                spec.asym_form(side, AsymTarget::MuTilde)
            } else {
                spec.asym_form(side, AsymTarget::Mu)
            };
            law.density_forms[i] = density_from(drift, &vol);
            law.vol_forms[i] = vol;
        }
        law
    }

    fn drift_at(&self, x: f64) -> Result<f64, EvalError> {
        self.drift.eval(x, &self.params)
    }

    fn vol_at(&self, x: f64) -> Result<f64, EvalError> {
        self.vol.eval(x, &self.params)
    }
}

struct Node {
    w: f64,
    x: f64,
    jac: f64,
    ell: f64,
    /// `dℓ/dw`.
    slope: f64,
    log_s2: f64,
    quad_weight: f64,
}

/// Numeric picture of one side of a law along the ladder chart.
struct Profile {
    chart: Chart,
    nodes: Vec<Node>,
    /// `∫ e^ℓ |dx/dw| dw` from the reference point to each panel start.
    cum_s: Vec<f64>,
    /// `(s(E) - s(x_i))/ρ(x_i)`, infinite when the tail of `ρ` diverges.
    r_tail: Vec<f64>,
    /// `ρ(x_i)·|M(x_i)|`.
    q: Vec<f64>,
    rungs: usize,
    stop: Option<String>,
}

fn panel_width() -> f64 {
    RUNG_WIDTH / PANELS_PER_RUNG as f64
}

impl Profile {
    fn build(law: &Law, side: Side, depth: usize) -> Profile {
        let chart = Chart::new(law.reference, law.interval.endpoint(side), side)
            .expect("reference is interior");
        let (gl, qmat) = rule();
        let kappa = side.orientation();
        let pw = panel_width();
        let h = 0.5 * pw;
        let mut nodes: Vec<Node> = Vec::new();
        let mut cum_s = vec![0.0];
        let mut ell_start = 0.0;
        let mut stop = None;
        let mut rungs = 0;
        let mut last_x = law.reference;
        'rungs: for rung in 0..depth + GUARD_RUNGS {
            let mut pending: Vec<Node> = Vec::with_capacity(NODES * PANELS_PER_RUNG);
            let mut pending_s = Vec::with_capacity(PANELS_PER_RUNG);
            let mut ell = ell_start;
            let mut px = last_x;
            for p in 0..PANELS_PER_RUNG {
                let w0 = (rung * PANELS_PER_RUNG + p) as f64 * pw;
                let mut slope = [0.0; NODES];
                let mut panel: Vec<Node> = Vec::with_capacity(NODES);
                for k in 0..NODES {
                    let w = w0 + h * (gl.nodes[k] + 1.0);
                    let x = chart.x(w);
                    let inside =
                        x.is_finite() && law.interval.contains(x) && (x - px) * kappa > 0.0;
                    if !inside {
                        stop = Some(format!("endpoint not resolvable beyond rung {rung}"));
                        break 'rungs;
                    }
                    px = x;
                    let jac = chart.jacobian(w);
                    let (drift, vol) = match (law.drift_at(x), law.vol_at(x)) {
                        (Ok(d), Ok(v)) => (d, v),
                        (Err(e), _) | (_, Err(e)) => {
                            stop =
                                Some(format!("coefficient evaluation failed in rung {rung}: {e}"));
                            break 'rungs;
                        }
                    };
                    let s2 = vol * vol;
                    slope[k] = -kappa * 2.0 * drift / s2 * jac;
                    if !(slope[k].is_finite() && s2 > 0.0 && s2.is_finite()) {
                        stop = Some(format!("coefficients overflow in rung {rung}"));
                        break 'rungs;
                    }
                    panel.push(Node {
                        w,
                        x,
                        jac,
                        ell: 0.0,
                        slope: slope[k],
                        log_s2: s2.ln(),
                        quad_weight: h * gl.weights[k],
                    });
                }
                for (k, node) in panel.iter_mut().enumerate() {
                    node.ell = ell + h * (0..NODES).map(|j| qmat[k][j] * slope[j]).sum::<f64>();
                }
                let ell_end = ell + h * (0..NODES).map(|j| gl.weights[j] * slope[j]).sum::<f64>();
                if !ell_end.is_finite() || panel.iter().any(|n| !n.ell.is_finite()) {
                    stop = Some(format!("log-density overflows in rung {rung}"));
                    break 'rungs;
                }
                pending_s.push(
                    panel
                        .iter()
                        .map(|n| n.quad_weight * n.ell.exp() * n.jac)
                        .sum::<f64>(),
                );
                pending.extend(panel);
                ell = ell_end;
            }
            nodes.extend(pending);
            for s in pending_s {
                let last = *cum_s.last().expect("seeded");
                cum_s.push(last + s);
            }
            ell_start = ell;
            last_x = px;
            rungs += 1;
        }
        let mut profile = Profile {
            chart,
            nodes,
            cum_s,
            r_tail: Vec::new(),
            q: Vec::new(),
            rungs,
            stop,
        };
        profile.r_tail = profile.tail_ratios();
        profile.q = profile.accumulated_ratios();
        profile
    }

    fn panels(&self) -> usize {
        self.nodes.len() / NODES
    }

    fn panel_of(&self, w: f64) -> usize {
        let p = (w / panel_width()).floor();
        (p.max(0.0) as usize).min(self.panels().saturating_sub(1))
    }

    fn interp(&self, w: f64, field: impl Fn(&Node) -> f64) -> f64 {
        let (gl, _) = rule();
        let p = self.panel_of(w);
        let w0 = p as f64 * panel_width();
        let t = (w - w0) / (0.5 * panel_width()) - 1.0;
        let mut vals = [0.0; NODES];
        for (v, n) in vals.iter_mut().zip(&self.nodes[p * NODES..(p + 1) * NODES]) {
            *v = field(n);
        }
        gl.interpolate(&vals, t)
    }

    fn ell_at(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        self.interp(w, |n| n.ell)
    }

    /// `∫_a^b f(w) dw` by the profile's Gauss rule.
    fn segment(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (gl, _) = rule();
        let h = 0.5 * (b - a);
        gl.nodes
            .iter()
            .zip(&gl.weights)
            .map(|(t, wt)| wt * f(a + h * (t + 1.0)))
            .sum::<f64>()
            * h
    }

    /// `∫_a^b e^{E(w)} g(w) dw` where `E` vanishes at the anchor end and
    /// falls at rate `rate` moving away from it. A steep fall is a boundary
    /// layer no fixed rule resolves, so it is replaced by its Laplace value
    /// `g(anchor)/rate`; moderate rates are handled by subdividing.
    fn anchored(
        a: f64,
        b: f64,
        anchor_left: bool,
        rate: f64,
        exponent: impl Fn(f64) -> f64,
        g: impl Fn(f64) -> f64,
    ) -> f64 {
        let len = b - a;
        if rate * len > LAPLACE_THRESHOLD {
            return g(if anchor_left { a } else { b }) / rate;
        }
        let pieces = ((rate.abs() * len / 4.0).ceil() as usize).clamp(1, 16);
        let step = len / pieces as f64;
        (0..pieces)
            .map(|k| {
                let lo = a + k as f64 * step;
                Self::segment(lo, lo + step, |w| exponent(w).exp() * g(w))
            })
            .sum()
    }

    fn tail_ratios(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut r = vec![f64::INFINITY; n];
        if n < 2 * NODES {
            return r;
        }
        let last = &self.nodes[n - 1];
        let back = &self.nodes[n - 1 - NODES];
        let log_f = |node: &Node| node.ell + node.jac.ln();
        let decay = -(log_f(last) - log_f(back)) / (last.w - back.w);
        r[n - 1] = if decay > 0.0 {
            last.jac / decay
        } else {
            f64::INFINITY
        };
        for i in (0..n - 1).rev() {
            let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
            let local = Self::anchored(
                a.w,
                b.w,
                true,
                -a.slope,
                |w| self.ell_at(w) - a.ell,
                |w| self.chart.jacobian(w),
            );
            let factor = (b.ell - a.ell).exp();
            let carried = if factor == 0.0 {
                0.0
            } else {
                factor * r[i + 1]
            };
            r[i] = local + carried;
        }
        r
    }

    fn accumulated_ratios(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut q = vec![0.0; n];
        let mut prev_w = 0.0;
        let mut prev_ell = 0.0;
        let mut prev_q = 0.0;
        for (i, node) in self.nodes.iter().enumerate() {
            let inv_s2 = |w: f64| (-self.interp(w, |m| m.log_s2)).exp();
            let local = Self::anchored(
                prev_w,
                node.w,
                false,
                -node.slope,
                |w| node.ell - self.ell_at(w),
                |w| inv_s2(w) * self.chart.jacobian(w),
            );
            let factor = (node.ell - prev_ell).exp();
            let carried = if prev_q == 0.0 { 0.0 } else { factor * prev_q };
            q[i] = local + carried;
            prev_w = node.w;
            prev_ell = node.ell;
            prev_q = q[i];
        }
        q
    }

    /// Feed per-node integrand values (in `x`, not yet multiplied by the
    /// Jacobian) rung by rung into the ladder decision rule.
    fn decide(&self, values: &[f64], depth: usize, opts: &ProbeOptions) -> IntegralVerdict {
        let opts = ProbeOptions {
            accept_geometric: true,
            ..*opts
        };
        let mut decider = LadderDecider::new(opts);
        let per_rung = NODES * PANELS_PER_RUNG;
        let usable = self.rungs.min(depth);
        for k in 0..usable {
            let range = k * per_rung..(k + 1) * per_rung;
            let mut signed = 0.0;
            let mut abs = 0.0;
            for i in range.clone() {
                let v = values[i] * self.nodes[i].jac * self.nodes[i].quad_weight;
                signed += v;
                abs += v.abs();
            }
            let end = &self.nodes[range.end - 1];
            let (l, dxdl) = self.chart.log_coordinate(end.w);
            let edge = values[range.end - 1].abs() * dxdl;
            if let Some(v) = decider.push(signed, abs, 0.0, (l, edge)) {
                return v;
            }
        }
        let reason = match &self.stop {
            Some(s) if self.rungs < depth => s.as_str(),
            _ => "ladder depth exhausted",
        };
        decider.inconclusive(reason)
    }
}

#[derive(Default)]
struct SideData {
    profile: OnceLock<Profile>,
    limit: OnceLock<Finiteness>,
}

/// Density, scale function and endpoint limits of one law.
pub struct ScaleBundle {
    pub which: Which,
    law: Law,
    opts: ProbeOptions,
    sides: [SideData; 2],
}

impl fmt::Debug for ScaleBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScaleBundle")
            .field("which", &self.which)
            .field("left_limit", &self.sides[0].limit.get())
            .field("right_limit", &self.sides[1].limit.get())
            .finish()
    }
}

/// Scale objects of `Y` or `Ỹ` for a validated spec.
pub fn build_scale(spec: &ProblemSpec, which: Which, opts: &ProbeOptions) -> ScaleBundle {
    ScaleBundle::new(Law::of_spec(spec, which), which, opts)
}

impl ScaleBundle {
    pub fn new(law: Law, which: Which, opts: &ProbeOptions) -> Self {
        ScaleBundle {
            which,
            law,
            opts: *opts,
            sides: Default::default(),
        }
    }

    /// Numeric profile of one side, built on first use.
    fn profile(&self, side: Side) -> &Profile {
        self.sides[side_index(side)]
            .profile
            .get_or_init(|| Profile::build(&self.law, side, self.opts.depth))
    }

    fn numeric_limit(&self, side: Side) -> Finiteness {
        let p = self.profile(side);
        let values: Vec<f64> = p.nodes.iter().map(|n| n.ell.exp()).collect();
        Finiteness::numeric(&p.decide(&values, self.opts.depth, &self.opts))
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn reference(&self) -> f64 {
        self.law.reference
    }

    fn side_of(&self, x: f64) -> Side {
        if x >= self.law.reference {
            Side::Right
        } else {
            Side::Left
        }
    }

    fn locate(&self, x: f64) -> Option<(&Profile, f64)> {
        if !self.law.interval.contains(x) {
            return None;
        }
        let side = self.side_of(x);
        let profile = self.profile(side);
        if x == self.law.reference {
            return Some((profile, 0.0));
        }
        let w = profile.chart.w_of(x);
        let covered = profile.panels() as f64 * panel_width();
        (w.is_finite() && w <= covered).then_some((profile, w))
    }

    /// `ρ(x)`, or `None` outside the profiled range.
    pub fn density(&self, x: f64) -> Option<f64> {
        let (p, w) = self.locate(x)?;
        Some(p.ell_at(w).exp())
    }

    /// `s(x)`, or `None` outside the profiled range.
    pub fn scale(&self, x: f64) -> Option<f64> {
        let side = self.side_of(x);
        let (p, w) = self.locate(x)?;
        if w == 0.0 {
            return Some(0.0);
        }
        let panel = p.panel_of(w);
        let w0 = panel as f64 * panel_width();
        let partial = Profile::segment(w0, w, |v| p.ell_at(v).exp() * p.chart.jacobian(v));
        Some(side.orientation() * (p.cum_s[panel] + partial))
    }

    /// Declared-form density at an endpoint, when derivable.
    pub fn density_form(&self, side: Side) -> Option<&AsymptoticForm> {
        match &self.law.density_forms[side_index(side)] {
            Some(Ok(f)) => Some(f),
            _ => None,
        }
    }

    /// Is `|s(E)|` finite?
    pub fn limit_finite(&self, side: Side) -> &Finiteness {
        self.sides[side_index(side)].limit.get_or_init(|| {
            match &self.law.density_forms[side_index(side)] {
                Some(Ok(r)) => Finiteness::analytic(convergence(r), format!("ρ ~ {r}")),
                _ => self.numeric_limit(side),
            }
        })
    }

    fn analytic_tail(
        &self,
        side: Side,
        weight: &AsymptoticForm,
    ) -> Result<(bool, String), AsympError> {
        let i = side_index(side);
        let r = match &self.law.density_forms[i] {
            Some(r) => r.clone()?,
            None => return Err(AsympError::InvalidForm("density form unavailable".into())),
        };
        let s = match &self.law.vol_forms[i] {
            Some(s) => s.clone()?,
            None => {
                return Err(AsympError::InvalidForm(
                    "volatility form unavailable".into(),
                ))
            }
        };
        if !convergence(&r) {
            return Ok((false, format!("ρ ~ {r} is not integrable")));
        }
        if weight.is_zero() {
            return Ok((true, "weight vanishes".into()));
        }
        let tail = r.integrate_tail()?;
        let f = tail.mul(&r.recip()?)?.mul(&s.pow(-2.0)?)?.mul(weight)?;
        Ok((convergence(&f), format!("integrand ~ {f}")))
    }

    /// Analytic answer to `s(E) < ∞ ∧ (s(E) - s)·w/(ρσ²) ∈ L¹`, if the forms
    /// allow one.
    pub fn weighted_tail_analytic(
        &self,
        side: Side,
        weight: &TailWeight,
    ) -> Option<Result<Finiteness, AsympError>> {
        let w = match weight.forms[side_index(side)].clone()? {
            Ok(w) => w,
            Err(e) => return Some(Err(e)),
        };
        self.law.density_forms[side_index(side)].as_ref()?;
        self.law.vol_forms[side_index(side)].as_ref()?;
        Some(
            self.analytic_tail(side, &w)
                .map(|(ok, detail)| Finiteness::analytic(ok, detail)),
        )
    }

    pub fn weighted_tail_numeric(&self, side: Side, weight: &TailWeight) -> Finiteness {
        let p = self.profile(side);
        let limit = self.limit_finite(side);
        let values: Result<Vec<f64>, EvalError> = p
            .nodes
            .iter()
            .zip(&p.r_tail)
            .map(|(n, r)| {
                let w = weight.expr.eval(n.x, &self.law.params)?;
                Ok(if w == 0.0 {
                    0.0
                } else {
                    r * w * (-n.log_s2).exp()
                })
            })
            .collect();
        match values {
            Ok(v) => {
                let limit = if limit.route == Route::Numeric {
                    limit.finite
                } else {
                    self.numeric_limit(side).finite
                };
                match limit {
                    TriState::No => Finiteness {
                        finite: TriState::No,
                        route: Route::Numeric,
                        detail: "tail of ρ diverges".into(),
                    },
                    TriState::Unknown => Finiteness::unknown("tail of ρ undecided"),
                    TriState::Yes => {
                        Finiteness::numeric(&p.decide(&v, self.opts.depth, &self.opts))
                    }
                }
            }
            Err(e) => Finiteness::unknown(format!("weight evaluation failed: {e}")),
        }
    }

    /// `s(E) < ∞` and `(s(E) - s)·w/(ρσ²)` integrable at `E`.
    pub fn weighted_tail(&self, side: Side, weight: &TailWeight) -> Finiteness {
        match self.weighted_tail_analytic(side, weight) {
            Some(Ok(f)) => f,
            Some(Err(e)) => {
                let mut f = self.weighted_tail_numeric(side, weight);
                f.detail = format!("{} (analytic route failed: {e})", f.detail);
                f
            }
            None => self.weighted_tail_numeric(side, weight),
        }
    }

    pub fn v_limit_analytic(&self, side: Side) -> Option<Result<Finiteness, AsympError>> {
        let i = side_index(side);
        let r = self.law.density_forms[i].clone()?;
        let s = self.law.vol_forms[i].clone()?;
        Some((|| {
            let (r, s) = (r?, s?);
            let k = r.recip()?.mul(&s.pow(-2.0)?)?;
            if convergence(&k) {
                return Ok(Finiteness::analytic(
                    convergence(&r),
                    format!("M has a finite limit; ρ ~ {r}"),
                ));
            }
            let m = k.integrate_accumulated()?;
            let f = r.mul(&m)?;
            Ok(Finiteness::analytic(convergence(&f), format!("ρM ~ {f}")))
        })())
    }

    pub fn v_limit_numeric(&self, side: Side) -> Finiteness {
        let p = self.profile(side);
        Finiteness::numeric(&p.decide(&p.q, self.opts.depth, &self.opts))
    }

    /// Finiteness of `v(E) = ∫_c^E ρ(z) ∫_c^z 1/(ρσ²)`.
    pub fn v_limit(&self, side: Side) -> Finiteness {
        match self.v_limit_analytic(side) {
            Some(Ok(f)) => f,
            Some(Err(e)) => {
                let mut f = self.v_limit_numeric(side);
                f.detail = format!("{} (analytic route failed: {e})", f.detail);
                f
            }
            None => self.v_limit_numeric(side),
        }
    }
}

/// Exit verdict at one endpoint, from the `v` functional and from the
/// equivalent scale-function condition.
#[derive(Debug, Clone, PartialEq)]
pub struct FellerFunctional {
    pub side: Side,
    pub which: Which,
    pub v_limit: Finiteness,
    pub s_route: Finiteness,
    /// Reconciled: the process exits at this endpoint with positive
    /// probability.
    pub exits: TriState,
    pub note: Option<String>,
}

pub fn feller_of_bundle(bundle: &ScaleBundle, side: Side) -> FellerFunctional {
    let v_limit = bundle.v_limit(side);
    let s_route = bundle.weighted_tail(side, &TailWeight::one(&bundle.law.interval));
    let (exits, note) = match v_limit.finite.reconcile(s_route.finite) {
        Some(t) => (t, None),
        None => (
            TriState::Unknown,
            Some(format!(
                "exit tests disagree: v-route {v_limit}, s-route {s_route}"
            )),
        ),
    };
    FellerFunctional {
        side,
        which: bundle.which,
        v_limit,
        s_route,
        exits,
        note,
    }
}

pub fn feller_limit(
    spec: &ProblemSpec,
    which: Which,
    side: Side,
    opts: &ProbeOptions,
) -> FellerFunctional {
    feller_of_bundle(&build_scale(spec, which, opts), side)
}

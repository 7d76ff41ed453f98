//! Problem configuration: interval, start point, coefficients and declared
//! endpoint asymptotics.
//!
//! ```text
//! # generalized CEV
//! interval = (0, inf)
//! x0 = 1
//! param mu0 = 1
//! param sigma0 = 1
//! param alpha = 0
//! param beta = 0.5
//! mu = mu0*x^alpha
//! sigma = sigma0*x^beta
//! b = -(mu0/sigma0)*x^(alpha-beta)
//! asym right sigma = C=sigma0 p=beta
//! ```
//!
//! Statements may also be separated by `;`. `J` is accepted for `interval`.
//! `c = <value>` fixes the reference point (default `x0`). A second diffusion
//! for pair comparisons is given by `mu_tilde` and `sigma_tilde`.
//! Values of `x0`, `c` and asymptotic fields are constant expressions and may
//! use parameters, so re-binding a parameter moves them too.

pub mod expr;
pub mod parser;

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use crate::asymp::{AsymptoticForm, Frame, Side};
use crate::error::{AsympError, EvalError, ParseError, SpecError};
use crate::quad::integrate_proper;

pub use expr::Expr;
pub use parser::{parse_expr, ParamResolver};

/// Chebyshev points per compact probe interval.
pub const PROBE_POINTS: usize = 512;
/// Number of nested compact probe intervals.
pub const PROBE_LEVELS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self, SpecError> {
        if left.is_nan()
            || right.is_nan()
            || !(left < right)
            || left == f64::INFINITY
            || right == f64::NEG_INFINITY
        {
            return Err(SpecError::Validation(format!(
                "interval ({left}, {right}) is empty"
            )));
        }
        Ok(Interval { left, right })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.left < x && x < self.right
    }

    pub fn endpoint(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    pub fn frame(&self, side: Side) -> Frame {
        Frame::for_endpoint(side, self.endpoint(side))
    }

    /// Endpoints in the arctan coordinate.
    pub fn theta_range(&self) -> (f64, f64) {
        (self.left.atan(), self.right.atan())
    }

    /// Nested compact intervals `[l + δ_k, r - δ_k]` in arctan coordinates,
    /// mapped back to `x`, from the innermost outward.
    pub fn probe_intervals(&self) -> Vec<(f64, f64)> {
        let (tl, tr) = self.theta_range();
        let width = tr - tl;
        (0..PROBE_LEVELS)
            .map(|k| {
                let delta = width * 0.5f64.powi(k as i32 + 2);
                ((tl + delta).tan(), (tr - delta).tan())
            })
            .collect()
    }

    /// Chebyshev points (in arctan coordinates) of every probe interval.
    pub fn probe_grid(&self) -> Vec<f64> {
        let (tl, tr) = self.theta_range();
        let width = tr - tl;
        let mut pts = Vec::with_capacity(PROBE_LEVELS * PROBE_POINTS);
        for k in 0..PROBE_LEVELS {
            let delta = width * 0.5f64.powi(k as i32 + 2);
            let (a, b) = (tl + delta, tr - delta);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for j in 0..PROBE_POINTS {
                let t = mid
                    + half * (std::f64::consts::PI * (j as f64 + 0.5) / PROBE_POINTS as f64).cos();
                let x = t.tan();
                if self.contains(x) {
                    pts.push(x);
                }
            }
        }
        pts
    }
}

/// Default point strictly inside the interval, used when none is given.
pub fn interior_point(interval: &Interval) -> f64 {
    let (tl, tr) = interval.theta_range();
    let t = 0.5 * (tl + tr);
    if t.abs() < FRAC_PI_2 {
        t.tan()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params {
    names: Vec<String>,
    values: Vec<f64>,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a parameter, returning its slot. Re-declaring a name overwrites.
    pub fn declare(&mut self, name: &str, value: f64) -> usize {
        match self.slot(name) {
            Some(i) => {
                self.values[i] = value;
                i
            }
            None => {
                self.names.push(name.to_string());
                self.values.push(value);
                self.names.len() - 1
            }
        }
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.slot(name).map(|i| self.values[i])
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), SpecError> {
        let i = self
            .slot(name)
            .ok_or_else(|| SpecError::UnknownParameter(name.to_string()))?;
        self.values[i] = value;
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Coefficient an asymptotic declaration refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AsymTarget {
    Mu,
    Sigma,
    B,
    MuTilde,
    SigmaTilde,
}

impl AsymTarget {
    pub fn key(self) -> &'static str {
        match self {
            AsymTarget::Mu => "mu",
            AsymTarget::Sigma => "sigma",
            AsymTarget::B => "b",
            AsymTarget::MuTilde => "mu_tilde",
            AsymTarget::SigmaTilde => "sigma_tilde",
        }
    }

    fn from_key(key: &str) -> Option<Self> {
        Some(match key {
            "mu" => AsymTarget::Mu,
            "sigma" => AsymTarget::Sigma,
            "b" => AsymTarget::B,
            "mu_tilde" => AsymTarget::MuTilde,
            "sigma_tilde" => AsymTarget::SigmaTilde,
            _ => return None,
        })
    }
}

/// Declared leading behaviour `C·exp(a u^γ)·u^p·|ln u|^q` of one coefficient
/// at one endpoint. Fields are constant expressions over the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymDecl {
    pub side: Side,
    pub target: AsymTarget,
    pub coeff: Expr,
    pub rate: Expr,
    pub order: Expr,
    pub power: Expr,
    pub log_power: Expr,
}

impl AsymDecl {
    pub fn power_law(side: Side, target: AsymTarget, coeff: Expr, power: Expr) -> Self {
        AsymDecl {
            side,
            target,
            coeff,
            rate: Expr::zero(),
            order: Expr::zero(),
            power,
            log_power: Expr::zero(),
        }
    }

    pub fn form(&self, interval: &Interval, params: &[f64]) -> Result<AsymptoticForm, AsympError> {
        let value = |e: &Expr| {
            e.eval(f64::NAN, params)
                .map_err(|err| AsympError::InvalidForm(err.to_string()))
        };
        AsymptoticForm::new(
            interval.frame(self.side),
            value(&self.coeff)?,
            value(&self.rate)?,
            value(&self.order)?,
            value(&self.power)?,
            value(&self.log_power)?,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub interval: Interval,
    pub x0: Expr,
    /// Reference point `c` of the scale function; `x0` when absent.
    pub reference: Option<Expr>,
    pub params: Params,
    pub mu: Expr,
    pub sigma: Expr,
    pub b: Expr,
    pub mu_tilde: Option<Expr>,
    pub sigma_tilde: Option<Expr>,
    pub asym: Vec<AsymDecl>,
}

impl ProblemSpec {
    /// Spec without parameters or asymptotics. Not validated.
    pub fn new(interval: Interval, x0: f64, mu: Expr, sigma: Expr, b: Expr) -> Self {
        ProblemSpec {
            interval,
            x0: Expr::constant(x0),
            reference: None,
            params: Params::new(),
            mu,
            sigma,
            b,
            mu_tilde: None,
            sigma_tilde: None,
            asym: Vec::new(),
        }
    }

    pub fn param_values(&self) -> &[f64] {
        self.params.values()
    }

    pub fn x0(&self) -> f64 {
        self.x0
            .eval(f64::NAN, self.param_values())
            .unwrap_or(f64::NAN)
    }

    pub fn reference_point(&self) -> f64 {
        match &self.reference {
            Some(c) => c.eval(f64::NAN, self.param_values()).unwrap_or(f64::NAN),
            None => self.x0(),
        }
    }

    pub fn mu_at(&self, x: f64) -> Result<f64, EvalError> {
        self.mu.eval(x, self.param_values())
    }

    pub fn sigma_at(&self, x: f64) -> Result<f64, EvalError> {
        self.sigma.eval(x, self.param_values())
    }

    pub fn b_at(&self, x: f64) -> Result<f64, EvalError> {
        self.b.eval(x, self.param_values())
    }

    pub fn asym_decl(&self, side: Side, target: AsymTarget) -> Option<&AsymDecl> {
        self.asym
            .iter()
            .rev()
            .find(|d| d.side == side && d.target == target)
    }

    /// Declared form of a coefficient at an endpoint. A coefficient that is
    /// literally zero has the zero form without a declaration.
    pub fn asym_form(
        &self,
        side: Side,
        target: AsymTarget,
    ) -> Option<Result<AsymptoticForm, AsympError>> {
        let frame = self.interval.frame(side);
        if let Some(d) = self.asym_decl(side, target) {
            return Some(d.form(&self.interval, self.param_values()));
        }
        let expr = match target {
            AsymTarget::Mu => Some(&self.mu),
            AsymTarget::B => Some(&self.b),
            AsymTarget::MuTilde => self.mu_tilde.as_ref(),
            AsymTarget::Sigma | AsymTarget::SigmaTilde => None,
        }?;
        expr.normalized(self.param_values())
            .is_literal_zero()
            .then(|| Ok(AsymptoticForm::zero(frame)))
    }

    /// Copy with parameters re-bound, validated again.
    pub fn with_params(&self, bindings: &[(&str, f64)]) -> Result<ProblemSpec, SpecError> {
        let mut spec = self.clone();
        for (name, value) in bindings {
            spec.params.set(name, *value)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let params = self.param_values();
        let constant = |what: &str, e: &Expr| -> Result<f64, SpecError> {
            if e.depends_on_x() {
                return Err(SpecError::Validation(format!(
                    "{what} must not depend on x"
                )));
            }
            e.eval(f64::NAN, params)
                .map_err(|err| SpecError::Validation(format!("{what}: {err}")))
        };
        let x0 = constant("x0", &self.x0)?;
        if !self.interval.contains(x0) {
            return Err(SpecError::Validation(format!(
                "x0 = {x0} is not inside ({}, {})",
                self.interval.left, self.interval.right
            )));
        }
        if let Some(c) = &self.reference {
            let c = constant("c", c)?;
            if !self.interval.contains(c) {
                return Err(SpecError::Validation(format!(
                    "reference point c = {c} is not inside the interval"
                )));
            }
        }
        for decl in &self.asym {
            let form = decl.form(&self.interval, params).map_err(|e| {
                SpecError::Validation(format!("asym {} {}: {e}", decl.side, decl.target.key()))
            })?;
            if matches!(decl.target, AsymTarget::Sigma | AsymTarget::SigmaTilde) && form.is_zero() {
                return Err(SpecError::Validation(format!(
                    "asym {} {}: leading constant must be nonzero",
                    decl.side,
                    decl.target.key()
                )));
            }
            if matches!(decl.target, AsymTarget::MuTilde) && self.mu_tilde.is_none()
                || matches!(decl.target, AsymTarget::SigmaTilde) && self.sigma_tilde.is_none()
            {
                return Err(SpecError::Validation(format!(
                    "asym for {} without a `{}` line",
                    decl.target.key(),
                    decl.target.key()
                )));
            }
        }
        check_coefficients(&self.interval, &self.mu, &self.sigma, Some(&self.b), params)?;
        if self.mu_tilde.is_some() || self.sigma_tilde.is_some() {
            let mu = self.mu_tilde.as_ref().unwrap_or(&self.mu);
            let sigma = self.sigma_tilde.as_ref().unwrap_or(&self.sigma);
            check_coefficients(&self.interval, mu, sigma, None, params)?;
        }
        Ok(())
    }

    /// Serialize back to the configuration grammar.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let end = |v: f64| {
            if v == f64::INFINITY {
                "inf".to_string()
            } else if v == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                format!("{v:?}")
            }
        };
        let _ = writeln!(
            out,
            "interval = ({}, {})",
            end(self.interval.left),
            end(self.interval.right)
        );
        for (name, value) in self.params.iter() {
            let _ = writeln!(out, "param {name} = {value:?}");
        }
        let _ = writeln!(out, "x0 = {}", self.x0);
        if let Some(c) = &self.reference {
            let _ = writeln!(out, "c = {c}");
        }
        let _ = writeln!(out, "mu = {}", self.mu);
        let _ = writeln!(out, "sigma = {}", self.sigma);
        let _ = writeln!(out, "b = {}", self.b);
        if let Some(e) = &self.mu_tilde {
            let _ = writeln!(out, "mu_tilde = {e}");
        }
        if let Some(e) = &self.sigma_tilde {
            let _ = writeln!(out, "sigma_tilde = {e}");
        }
        for d in &self.asym {
            let _ = writeln!(
                out,
                "asym {} {} = C={} a={} gamma={} p={} q={}",
                d.side,
                d.target.key(),
                d.coeff,
                d.rate,
                d.order,
                d.power,
                d.log_power
            );
        }
        out
    }
}

/// `σ ≠ 0` on the probe grid and local integrability of `1/σ²`, `μ/σ²` and
/// (when given) `b²/σ²` on the outermost compact probe interval.
pub(crate) fn check_coefficients(
    interval: &Interval,
    mu: &Expr,
    sigma: &Expr,
    b: Option<&Expr>,
    params: &[f64],
) -> Result<(), SpecError> {
    for x in interval.probe_grid() {
        let s = sigma
            .eval(x, params)
            .map_err(|e| SpecError::Validation(format!("sigma: {e}")))?;
        if s == 0.0 {
            return Err(SpecError::Validation(format!("sigma vanishes at x = {x}")));
        }
    }
    let Some(&(lo, hi)) = interval.probe_intervals().last() else {
        return Ok(());
    };
    let pieces: Vec<(&str, Box<dyn Fn(f64) -> Result<f64, EvalError> + '_>)> = {
        let mut v: Vec<(&str, Box<dyn Fn(f64) -> Result<f64, EvalError> + '_>)> = vec![
            (
                "1/sigma^2",
                Box::new(move |x| Ok(1.0 / sigma.eval(x, params)?.powi(2))),
            ),
            (
                "mu/sigma^2",
                Box::new(move |x| Ok(mu.eval(x, params)? / sigma.eval(x, params)?.powi(2))),
            ),
        ];
        if let Some(b) = b {
            v.push((
                "b^2/sigma^2",
                Box::new(move |x| Ok((b.eval(x, params)? / sigma.eval(x, params)?).powi(2))),
            ));
        }
        v
    };
    let mut nodes: Vec<f64> = {
        let (a, b) = (lo.atan(), hi.atan());
        (0..=64)
            .map(|j| (a + (b - a) * j as f64 / 64.0).tan())
            .collect()
    };
    nodes.dedup();
    for (name, f) in &pieces {
        for w in nodes.windows(2) {
            let r = integrate_proper(
                |x| f(x).map_err(|source| crate::error::QuadError::Evaluation { x, source }),
                w[0],
                w[1],
                1e-6,
            )
            .map_err(|e| SpecError::Validation(format!("{name} on [{}, {}]: {e}", w[0], w[1])))?;
            if !r.value.is_finite() {
                return Err(SpecError::Validation(format!(
                    "{name} is not locally integrable near [{}, {}]",
                    w[0], w[1]
                )));
            }
        }
    }
    Ok(())
}

/// `b = 0` at every probe point and every declared form of `b` is zero.
pub fn is_b_zero_ae(spec: &ProblemSpec) -> bool {
    let params = spec.param_values();
    if spec.b.normalized(params).is_literal_zero() {
        return true;
    }
    let declared_zero = spec
        .asym
        .iter()
        .filter(|d| d.target == AsymTarget::B)
        .all(|d| {
            d.form(&spec.interval, params)
                .map(|f| f.is_zero())
                .unwrap_or(false)
        });
    declared_zero
        && spec
            .interval
            .probe_grid()
            .into_iter()
            .all(|x| matches!(spec.b.eval(x, params), Ok(v) if v == 0.0))
}

struct Statement<'a> {
    text: &'a str,
    line: usize,
    col0: usize,
}

fn statements(text: &str) -> Vec<Statement<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut offset = 0;
        for piece in content.split(';') {
            let lead = piece.len() - piece.trim_start().len();
            let trimmed = piece.trim();
            if !trimmed.is_empty() {
                out.push(Statement {
                    text: trimmed,
                    line: i + 1,
                    col0: offset + lead,
                });
            }
            offset += piece.len() + 1;
        }
    }
    out
}

fn err(line: usize, column: usize, message: impl Into<String>) -> SpecError {
    SpecError::Syntax(ParseError {
        line,
        column,
        message: message.into(),
    })
}

fn split_key<'a>(stmt: &Statement<'a>) -> Result<(&'a str, &'a str, usize), SpecError> {
    let eq = stmt
        .text
        .find('=')
        .ok_or_else(|| err(stmt.line, stmt.col0 + 1, "expected `key = value`"))?;
    let key = stmt.text[..eq].trim();
    let value = &stmt.text[eq + 1..];
    let lead = value.len() - value.trim_start().len();
    Ok((key, value.trim(), stmt.col0 + eq + 1 + lead))
}

fn parse_endpoint(s: &str, line: usize, col: usize) -> Result<f64, SpecError> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| err(line, col, format!("expected a real or ±inf, got `{t}`"))),
    }
}

fn parse_interval(value: &str, line: usize, col: usize) -> Result<Interval, SpecError> {
    let inner = value
        .strip_prefix('(')
        .and_then(|v| v.strip_suffix(')'))
        .ok_or_else(|| err(line, col, "interval must be written `(L, R)`"))?;
    let (l, r) = inner
        .split_once(',')
        .ok_or_else(|| err(line, col, "interval needs two endpoints"))?;
    let left = parse_endpoint(l, line, col + 1)?;
    let right = parse_endpoint(r, line, col + 2 + l.len())?;
    Interval::new(left, right)
}

/// Parse and validate a configuration document.
pub fn parse_problem(text: &str) -> Result<ProblemSpec, SpecError> {
    let stmts = statements(text);
    let mut params = Params::new();
    for stmt in &stmts {
        if let Some(rest) = stmt.text.strip_prefix("param ") {
            let (name, value, col) = split_key(&Statement {
                text: rest,
                line: stmt.line,
                col0: stmt.col0 + 6,
            })?;
            if name.is_empty()
                || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                || name.starts_with(|c: char| c.is_ascii_digit())
            {
                return Err(err(
                    stmt.line,
                    stmt.col0 + 7,
                    format!("invalid parameter name `{name}`"),
                ));
            }
            if matches!(
                name,
                "x" | "pi" | "inf" | "abs" | "exp" | "log" | "ln" | "sqrt"
            ) {
                return Err(err(
                    stmt.line,
                    stmt.col0 + 7,
                    format!("`{name}` is reserved"),
                ));
            }
            let none = |_: &str| None;
            let e = parser::parse_expr_at(value, &none, stmt.line, col)?;
            let v = e
                .eval(f64::NAN, &[])
                .map_err(|e| err(stmt.line, col + 1, e.to_string()))?;
            params.declare(name, v);
        }
    }
    let resolver = |name: &str| params.slot(name);

    let mut interval = None;
    let mut x0 = None;
    let mut reference = None;
    let (mut mu, mut sigma, mut b) = (None, None, None);
    let (mut mu_tilde, mut sigma_tilde) = (None, None);
    let mut asym = Vec::new();

    for stmt in &stmts {
        if stmt.text.starts_with("param ") {
            continue;
        }
        if let Some(rest) = stmt.text.strip_prefix("asym ") {
            asym.push(parse_asym(rest, stmt.line, stmt.col0 + 5, &resolver)?);
            continue;
        }
        let (key, value, col) = split_key(stmt)?;
        let expr = || parser::parse_expr_at(value, &resolver, stmt.line, col);
        match key {
            "interval" | "J" => interval = Some(parse_interval(value, stmt.line, col + 1)?),
            "x0" => x0 = Some(expr()?),
            "c" => reference = Some(expr()?),
            "mu" => mu = Some(expr()?),
            "sigma" => sigma = Some(expr()?),
            "b" => b = Some(expr()?),
            "mu_tilde" => mu_tilde = Some(expr()?),
            "sigma_tilde" => sigma_tilde = Some(expr()?),
            other => {
                return Err(err(
                    stmt.line,
                    stmt.col0 + 1,
                    format!("unknown key `{other}`"),
                ));
            }
        }
    }

    let spec = ProblemSpec {
        interval: interval.ok_or(SpecError::MissingKey("interval"))?,
        x0: x0.ok_or(SpecError::MissingKey("x0"))?,
        reference,
        params,
        mu: mu.ok_or(SpecError::MissingKey("mu"))?,
        sigma: sigma.ok_or(SpecError::MissingKey("sigma"))?,
        b: b.unwrap_or_else(Expr::zero),
        mu_tilde,
        sigma_tilde,
        asym,
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_asym(
    rest: &str,
    line: usize,
    col0: usize,
    resolver: &dyn ParamResolver,
) -> Result<AsymDecl, SpecError> {
    let (head, fields) = rest
        .split_once('=')
        .ok_or_else(|| err(line, col0 + 1, "expected `asym <side> <coefficient> = ...`"))?;
    let words: Vec<&str> = head.split_whitespace().collect();
    let [side, target] = words.as_slice() else {
        return Err(err(
            line,
            col0 + 1,
            "expected `asym <left|right> <coefficient>`",
        ));
    };
    let side = match *side {
        "left" => Side::Left,
        "right" => Side::Right,
        s => return Err(err(line, col0 + 1, format!("unknown side `{s}`"))),
    };
    let target = AsymTarget::from_key(target)
        .ok_or_else(|| err(line, col0 + 1, format!("unknown coefficient `{target}`")))?;

    let base = col0 + head.len() + 1;
    let mut slots: [Option<Expr>; 5] = Default::default();
    let mut pos = 0;
    while pos < fields.len() {
        let rest = &fields[pos..];
        let skip = rest.len() - rest.trim_start().len();
        pos += skip;
        if pos >= fields.len() {
            break;
        }
        let rest = &fields[pos..];
        let eq = rest
            .find('=')
            .ok_or_else(|| err(line, base + pos + 1, "expected `name=value`"))?;
        let key = rest[..eq].trim();
        let index = match key {
            "C" => 0,
            "a" => 1,
            "gamma" => 2,
            "p" => 3,
            "q" => 4,
            k => {
                return Err(err(
                    line,
                    base + pos + 1,
                    format!("unknown asymptotic field `{k}`"),
                ))
            }
        };
        if slots[index].is_some() {
            return Err(err(
                line,
                base + pos + 1,
                format!("field `{key}` given twice"),
            ));
        }
        let value_start = pos + eq + 1;
        let (e, used) =
            parser::parse_expr_prefix(&fields[value_start..], resolver, line, base + value_start)?;
        if e.depends_on_x() {
            return Err(err(
                line,
                base + value_start + 1,
                "asymptotic fields must be constant",
            ));
        }
        slots[index] = Some(e);
        pos = value_start + used;
    }
    let [coeff, rate, order, power, log_power] = slots;
    Ok(AsymDecl {
        side,
        target,
        coeff: coeff.ok_or_else(|| err(line, base + 1, "asymptotic declaration needs `C`"))?,
        rate: rate.unwrap_or_else(Expr::zero),
        order: order.unwrap_or_else(Expr::zero),
        power: power.unwrap_or_else(Expr::zero),
        log_power: log_power.unwrap_or_else(Expr::zero),
    })
}

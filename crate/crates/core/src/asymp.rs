//! Leading-order algebra of exp-power-log forms near an endpoint.
//!
//! A form is `C · exp(Σ a_i u^{γ_i}) · u^p · |ln u|^q` in the local variable
//! `u` of an endpoint frame: `u = x` as `x → +∞`, `u = -x` as `x → -∞`,
//! `u = r - x` as `x ↑ r` and `u = x - l` as `x ↓ l`. Infinite frames send
//! `u → ∞`, finite ones `u → 0+`.
//!
//! Internally every form is rewritten in a growth variable `t → ∞`
//! (`t = u` for infinite frames, `t = 1/u` for finite ones, with the
//! Jacobian `t^{-2}` whenever a `du` integral is taken). All integration and
//! convergence rules are then stated once, for `t → ∞`.
//!
//! The exponent of the exponential factor is kept as a sum of power terms,
//! not a single one: multiplying `exp(-2u^3/3)` by `exp(-u^2)` must keep both
//! terms, because ratios such as `(s(r) - s)/ρ` cancel the dominant one and
//! leave the other in charge.

use std::cmp::Ordering;
use std::fmt;

use crate::error::AsympError;

/// Exponents closer than this are treated as equal. Exponent arithmetic on
/// user parameters (e.g. `1 + 2α - 4β`) accumulates rounding well below it.
pub const EXPONENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn both() -> [Side; 2] {
        [Side::Left, Side::Right]
    }

    /// `+1` for the right endpoint, `-1` for the left one.
    pub fn orientation(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which local variable a form is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    /// `u = x`, `x → +∞`.
    PlusInfinity,
    /// `u = -x`, `x → -∞`.
    MinusInfinity,
    /// `u = r - x`, `x ↑ r` finite.
    BelowFinite,
    /// `u = x - l`, `x ↓ l` finite.
    AboveFinite,
}

impl Frame {
    pub fn for_endpoint(side: Side, endpoint: f64) -> Frame {
        match (side, endpoint.is_infinite()) {
            (Side::Right, true) => Frame::PlusInfinity,
            (Side::Right, false) => Frame::BelowFinite,
            (Side::Left, true) => Frame::MinusInfinity,
            (Side::Left, false) => Frame::AboveFinite,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Frame::PlusInfinity | Frame::MinusInfinity)
    }

    pub fn side(self) -> Side {
        match self {
            Frame::PlusInfinity | Frame::BelowFinite => Side::Right,
            Frame::MinusInfinity | Frame::AboveFinite => Side::Left,
        }
    }

    /// Local variable `u` for the point `x` near `endpoint`.
    pub fn local(self, x: f64, endpoint: f64) -> f64 {
        match self {
            Frame::PlusInfinity => x,
            Frame::MinusInfinity => -x,
            Frame::BelowFinite => endpoint - x,
            Frame::AboveFinite => x - endpoint,
        }
    }
}

/// One term `rate · u^order` of the exponential factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub rate: f64,
    pub order: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceVerdict {
    Converges,
    Diverges,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticForm {
    pub coeff: f64,
    /// Significant exponential terms, most dominant first.
    pub exp_terms: Vec<ExpTerm>,
    pub power: f64,
    pub log_power: f64,
    pub frame: Frame,
}

/// `coeff · exp(Σ rate_i t^{order_i}) · t^power · (ln t)^log_power` as
/// `t → ∞`, with every `order_i > 0` and the terms sorted by decreasing
/// order.
#[derive(Debug, Clone, PartialEq)]
struct Growth {
    coeff: f64,
    exps: Vec<(f64, f64)>,
    power: f64,
    log_power: f64,
}

fn same_exponent(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXPONENT_TOL * (1.0 + a.abs().max(b.abs()))
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= EXPONENT_TOL * (1.0 + v.abs()) {
        r
    } else {
        v
    }
}

impl Growth {
    fn zero() -> Self {
        Growth {
            coeff: 0.0,
            exps: Vec::new(),
            power: 0.0,
            log_power: 0.0,
        }
    }

    fn is_zero(&self) -> bool {
        self.coeff == 0.0
    }

    fn normalize(mut self) -> Self {
        if self.coeff == 0.0 || !self.coeff.is_finite() && self.coeff.is_nan() {
            return Growth::zero();
        }
        self.exps
            .sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(self.exps.len());
        for (rate, order) in self.exps {
            match merged.last_mut() {
                Some(last) if same_exponent(last.1, order) => {
                    let scale = last.0.abs().max(rate.abs());
                    last.0 += rate;
                    if last.0.abs() <= 1e-10 * scale {
                        merged.pop();
                    }
                }
                _ => {
                    if rate != 0.0 {
                        merged.push((rate, order));
                    }
                }
            }
        }
        self.exps = merged;
        self.power = snap(self.power);
        self.log_power = snap(self.log_power);
        self
    }

    fn mul(&self, other: &Growth) -> Growth {
        if self.is_zero() || other.is_zero() {
            return Growth::zero();
        }
        let mut exps = self.exps.clone();
        exps.extend_from_slice(&other.exps);
        Growth {
            coeff: self.coeff * other.coeff,
            exps,
            power: self.power + other.power,
            log_power: self.log_power + other.log_power,
        }
        .normalize()
    }

    fn with_power_shift(&self, dp: f64) -> Growth {
        let mut g = self.clone();
        g.power += dp;
        g.normalize()
    }

    fn converges(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        if let Some(&(rate, _)) = self.exps.first() {
            return rate < 0.0;
        }
        let p = self.power;
        if same_exponent(p, -1.0) {
            self.log_power < -1.0 && !same_exponent(self.log_power, -1.0)
        } else {
            p < -1.0
        }
    }

    /// Leading term of `∫ h dt` over the tail `(t, ∞)` when it converges,
    /// or over `(t₀, t)` when it diverges. Both reduce to the same rules
    /// up to the sign of the constant.
    fn antiderivative(&self) -> Result<Growth, AsympError> {
        if self.is_zero() {
            return Ok(Growth::zero());
        }
        if let Some(&(rate, order)) = self.exps.first() {
            let mut g = self.clone();
            g.coeff /= rate.abs() * order;
            g.power += 1.0 - order;
            return Ok(g.normalize());
        }
        let p = self.power;
        let q = self.log_power;
        if !same_exponent(p, -1.0) {
            let mut g = self.clone();
            g.coeff /= (p + 1.0).abs();
            g.power = p + 1.0;
            return Ok(g.normalize());
        }
        if same_exponent(q, -1.0) {
            return Err(AsympError::NotIntegrableAtLeadingOrder(
                "t^-1 (ln t)^-1 integrates to ln ln t".into(),
            ));
        }
        Ok(Growth {
            coeff: self.coeff / (q + 1.0).abs(),
            exps: Vec::new(),
            power: 0.0,
            log_power: q + 1.0,
        }
        .normalize())
    }

    /// Sign of `log|self| - log|other|` as `t → ∞` (+1: self dominates).
    fn dominance(&self, other: &Growth) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let mut diff: Vec<(f64, f64)> = self.exps.clone();
        diff.extend(other.exps.iter().map(|&(a, g)| (-a, g)));
        let diff = Growth {
            coeff: 1.0,
            exps: diff,
            power: 0.0,
            log_power: 0.0,
        }
        .normalize();
        if let Some(&(rate, _)) = diff.exps.first() {
            return if rate > 0.0 {
                Ordering::Greater
            } else {
                Ordering::Less
            };
        }
        if !same_exponent(self.power, other.power) {
            return self
                .power
                .partial_cmp(&other.power)
                .unwrap_or(Ordering::Equal);
        }
        if !same_exponent(self.log_power, other.log_power) {
            return self
                .log_power
                .partial_cmp(&other.log_power)
                .unwrap_or(Ordering::Equal);
        }
        Ordering::Equal
    }
}

impl AsymptoticForm {
    /// Build a single-exponential form from the declared fields.
    ///
    /// An exponential factor whose exponent does not blow up toward the
    /// endpoint tends to one and is dropped; `gamma = 0` folds `e^a` into
    /// the constant.
    pub fn new(
        frame: Frame,
        coeff: f64,
        rate: f64,
        order: f64,
        power: f64,
        log_power: f64,
    ) -> Result<Self, AsympError> {
        for (name, v) in [
            ("C", coeff),
            ("a", rate),
            ("gamma", order),
            ("p", power),
            ("q", log_power),
        ] {
            if !v.is_finite() {
                return Err(AsympError::InvalidForm(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        let mut form = AsymptoticForm {
            coeff,
            exp_terms: Vec::new(),
            power,
            log_power,
            frame,
        };
        if rate != 0.0 {
            if order == 0.0 {
                form.coeff *= rate.exp();
            } else {
                form.exp_terms.push(ExpTerm { rate, order });
            }
        }
        Ok(form.normalized())
    }

    pub fn power_law(frame: Frame, coeff: f64, power: f64) -> Self {
        AsymptoticForm {
            coeff,
            exp_terms: Vec::new(),
            power,
            log_power: 0.0,
            frame,
        }
        .normalized()
    }

    pub fn constant(frame: Frame, coeff: f64) -> Self {
        Self::power_law(frame, coeff, 0.0)
    }

    pub fn zero(frame: Frame) -> Self {
        Self::constant(frame, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == 0.0
    }

    fn to_growth(&self) -> Growth {
        let infinite = self.frame.is_infinite();
        let exps = self
            .exp_terms
            .iter()
            .filter_map(|t| {
                let order = if infinite { t.order } else { -t.order };
                (order > 0.0).then_some((t.rate, order))
            })
            .collect();
        Growth {
            coeff: self.coeff,
            exps,
            power: if infinite { self.power } else { -self.power },
            log_power: self.log_power,
        }
        .normalize()
    }

    fn from_growth(g: Growth, frame: Frame) -> Self {
        let infinite = frame.is_infinite();
        if g.is_zero() {
            return AsymptoticForm {
                coeff: 0.0,
                exp_terms: Vec::new(),
                power: 0.0,
                log_power: 0.0,
                frame,
            };
        }
        AsymptoticForm {
            coeff: g.coeff,
            exp_terms: g
                .exps
                .iter()
                .map(|&(rate, order)| ExpTerm {
                    rate,
                    order: if infinite { order } else { -order },
                })
                .collect(),
            power: if infinite { g.power } else { -g.power },
            log_power: g.log_power,
            frame,
        }
    }

    /// Integrand for `∫ f du` rewritten as `∫ h dt` with `t → ∞`.
    fn measure_growth(&self) -> Growth {
        let g = self.to_growth();
        if self.frame.is_infinite() {
            g
        } else {
            g.with_power_shift(-2.0)
        }
    }

    fn from_measure_growth(g: Growth, frame: Frame) -> Self {
        Self::from_growth(g, frame)
    }

    fn normalized(&self) -> Self {
        Self::from_growth(self.to_growth(), self.frame)
    }

    fn check_frame(&self, other: &Self) -> Result<(), AsympError> {
        if self.frame == other.frame {
            Ok(())
        } else {
            Err(AsympError::FrameMismatch)
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AsympError> {
        self.check_frame(other)?;
        Ok(Self::from_growth(
            self.to_growth().mul(&other.to_growth()),
            self.frame,
        ))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut g = self.to_growth();
        g.coeff *= factor;
        Self::from_growth(g.normalize(), self.frame)
    }

    /// `f^k` for real `k`. A negative constant is only allowed with an
    /// integer exponent.
    pub fn pow(&self, k: f64) -> Result<Self, AsympError> {
        if self.is_zero() {
            return if k > 0.0 {
                Ok(self.clone())
            } else {
                Err(AsympError::InvalidForm(
                    "zero form raised to a nonpositive power".into(),
                ))
            };
        }
        let coeff = if self.coeff < 0.0 {
            if k.fract() != 0.0 {
                return Err(AsympError::InvalidForm(
                    "negative leading constant raised to a fractional power".into(),
                ));
            }
            self.coeff.powi(k as i32)
        } else {
            self.coeff.powf(k)
        };
        let g = self.to_growth();
        Ok(Self::from_growth(
            Growth {
                coeff,
                exps: g.exps.iter().map(|&(a, o)| (a * k, o)).collect(),
                power: g.power * k,
                log_power: g.log_power * k,
            }
            .normalize(),
            self.frame,
        ))
    }

    pub fn recip(&self) -> Result<Self, AsympError> {
        self.pow(-1.0)
    }

    /// Leading-order sum. Equal leading terms whose constants cancel give
    /// [`AsympError::Cancellation`].
    pub fn add(&self, other: &Self) -> Result<Self, AsympError> {
        self.check_frame(other)?;
        let (a, b) = (self.to_growth(), other.to_growth());
        match a.dominance(&b) {
            Ordering::Greater => Ok(self.clone()),
            Ordering::Less => Ok(other.clone()),
            Ordering::Equal => {
                if a.is_zero() {
                    return Ok(self.clone());
                }
                let sum = a.coeff + b.coeff;
                if sum.abs() <= 1e-12 * a.coeff.abs().max(b.coeff.abs()) {
                    return Err(AsympError::Cancellation);
                }
                let mut g = a;
                g.coeff = sum;
                Ok(Self::from_growth(g, self.frame))
            }
        }
    }

    /// Does `∫ |f| du` converge toward the endpoint?
    pub fn decide_convergence(&self) -> ConvergenceVerdict {
        if self.measure_growth().converges() {
            ConvergenceVerdict::Converges
        } else {
            ConvergenceVerdict::Diverges
        }
    }

    /// Leading term of the tail integral over the part of the frame between
    /// `u` and the endpoint. Requires convergence.
    pub fn integrate_tail(&self) -> Result<Self, AsympError> {
        let h = self.measure_growth();
        if !h.converges() {
            return Err(AsympError::NotIntegrableAtLeadingOrder(format!(
                "tail of {self} diverges"
            )));
        }
        Ok(Self::from_measure_growth(h.antiderivative()?, self.frame))
    }

    /// Leading term of the integral from a fixed interior point up to `u`,
    /// for an integrand that is not integrable at the endpoint.
    pub fn integrate_accumulated(&self) -> Result<Self, AsympError> {
        let h = self.measure_growth();
        if h.converges() {
            return Err(AsympError::NotIntegrableAtLeadingOrder(format!(
                "{self} is integrable; the accumulated integral has a finite limit"
            )));
        }
        Ok(Self::from_measure_growth(h.antiderivative()?, self.frame))
    }

    /// Leading-order `du` derivative (sign included), the formal inverse of
    /// the two integration rules.
    pub fn differentiate(&self) -> Self {
        let g = self.to_growth();
        if g.is_zero() {
            return self.clone();
        }
        let d = if let Some(&(rate, order)) = g.exps.first() {
            Growth {
                coeff: g.coeff * rate * order,
                power: g.power + order - 1.0,
                ..g.clone()
            }
        } else if !same_exponent(g.power, 0.0) {
            Growth {
                coeff: g.coeff * g.power,
                power: g.power - 1.0,
                ..g.clone()
            }
        } else if !same_exponent(g.log_power, 0.0) {
            Growth {
                coeff: g.coeff * g.log_power,
                power: -1.0,
                log_power: g.log_power - 1.0,
                ..g.clone()
            }
        } else {
            Growth::zero()
        }
        .normalize();
        if self.frame.is_infinite() {
            Self::from_growth(d, self.frame)
        } else {
            // d/du = -t^2 d/dt
            let mut d = d.with_power_shift(2.0);
            d.coeff = -d.coeff;
            Self::from_growth(d, self.frame)
        }
    }

    /// Form of `exp(-F)` where `F(x) = ∫_c^x g(y) dy`, written in this
    /// frame. Only the leading term of `g` is used, so the result is exact
    /// when that term is exact (the power-law coefficients of every worked
    /// example are).
    ///
    /// `F` is a constant plus `κ·A(u)`, with `A` the accumulated integral
    /// of `g` toward the endpoint and `κ` the endpoint orientation.
    pub fn exp_neg_integral(g: &Self) -> Result<Self, AsympError> {
        let frame = g.frame;
        let h = g.measure_growth();
        if h.converges() {
            return Ok(Self::constant(frame, 1.0));
        }
        let acc = h.antiderivative()?;
        let kappa = frame.side().orientation();
        // sign restored: antiderivative() returns |coefficient| scaling but
        // keeps the sign of g's constant.
        if !acc.exps.is_empty() {
            return Err(AsympError::OutsideAlgebra(
                "exponential of an exponential".into(),
            ));
        }
        let (p, q) = (acc.power, acc.log_power);
        if p > 0.0 && same_exponent(q, 0.0) {
            return Ok(Self::from_growth(
                Growth {
                    coeff: 1.0,
                    exps: vec![(-kappa * acc.coeff, p)],
                    power: 0.0,
                    log_power: 0.0,
                }
                .normalize(),
                frame,
            ));
        }
        if same_exponent(p, 0.0) && same_exponent(q, 1.0) {
            return Ok(Self::from_growth(
                Growth {
                    coeff: 1.0,
                    exps: Vec::new(),
                    power: -kappa * acc.coeff,
                    log_power: 0.0,
                }
                .normalize(),
                frame,
            ));
        }
        Err(AsympError::OutsideAlgebra(format!(
            "exp of t^{p} (ln t)^{q} is not an exp-power-log form"
        )))
    }
}

impl fmt::Display for AsymptoticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        write!(f, "{}", self.coeff)?;
        if !self.exp_terms.is_empty() {
            write!(f, "·exp(")?;
            for (i, t) in self.exp_terms.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "{}·u^{}", t.rate, t.order)?;
            }
            write!(f, ")")?;
        }
        if self.power != 0.0 {
            write!(f, "·u^{}", self.power)?;
        }
        if self.log_power != 0.0 {
            write!(f, "·|ln u|^{}", self.log_power)?;
        }
        Ok(())
    }
}

use std::fmt;
use std::sync::Arc;

use crate::error::EvalError;

/// Coefficient expression in the single variable `x`.
///
/// Parameters are resolved to slots at parse time, so a tree can be
/// re-evaluated under a different binding without re-parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Param {
        slot: usize,
        name: Arc<str>,
    },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// `base ^ exponent`. A negative base needs an integer exponent;
    /// write `abs(x)^k` for the guarded power.
    Pow(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Const(value)
    }

    pub fn var() -> Self {
        Expr::Var
    }

    pub fn param(slot: usize, name: &str) -> Self {
        Expr::Param {
            slot,
            name: Arc::from(name),
        }
    }

    pub fn zero() -> Self {
        Expr::Const(0.0)
    }

    pub fn pow(self, exponent: Expr) -> Self {
        Expr::Pow(Box::new(self), Box::new(exponent))
    }

    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// Evaluate at `x` with parameter values `params` (indexed by slot).
    pub fn eval(&self, x: f64, params: &[f64]) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Param { slot, name } => *params
                .get(*slot)
                .ok_or_else(|| EvalError::UnboundParameter(name.to_string()))?,
            Expr::Neg(a) => -a.eval(x, params)?,
            Expr::Add(a, b) => a.eval(x, params)? + b.eval(x, params)?,
            Expr::Sub(a, b) => a.eval(x, params)? - b.eval(x, params)?,
            Expr::Mul(a, b) => a.eval(x, params)? * b.eval(x, params)?,
            Expr::Div(a, b) => {
                let num = a.eval(x, params)?;
                let den = b.eval(x, params)?;
                if den == 0.0 {
                    return Err(self.domain_error("division by zero", x));
                }
                num / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x, params)?;
                let exponent = b.eval(x, params)?;
                checked_pow(base, exponent)
                    .ok_or_else(|| self.domain_error("power outside its real domain", x))?
            }
            Expr::Abs(a) => a.eval(x, params)?.abs(),
            Expr::Exp(a) => a.eval(x, params)?.exp(),
            Expr::Log(a) => {
                let arg = a.eval(x, params)?;
                if arg <= 0.0 {
                    return Err(self.domain_error("log of a nonpositive value", x));
                }
                arg.ln()
            }
            Expr::Sqrt(a) => {
                let arg = a.eval(x, params)?;
                if arg < 0.0 {
                    return Err(self.domain_error("sqrt of a negative value", x));
                }
                arg.sqrt()
            }
        };
        if value.is_nan() {
            return Err(self.domain_error("result is not a number", x));
        }
        Ok(value)
    }

    fn domain_error(&self, reason: &'static str, x: f64) -> EvalError {
        EvalError::Domain {
            reason,
            subtree: self.to_string(),
            x,
        }
    }

    /// True when the tree references the variable `x`.
    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Const(_) | Expr::Param { .. } => false,
            Expr::Neg(a) | Expr::Abs(a) | Expr::Exp(a) | Expr::Log(a) | Expr::Sqrt(a) => {
                a.depends_on_x()
            }
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on_x() || b.depends_on_x(),
        }
    }

    /// Substitute parameter values and fold constants.
    ///
    /// Identity elements are dropped and commutative operands are put in a
    /// canonical order, so two trees that differ only by such rewrites
    /// compare equal afterwards.
    pub fn normalized(&self, params: &[f64]) -> Expr {
        use Expr::*;
        match self {
            Const(c) => Const(*c),
            Var => Var,
            Param { slot, .. } => match params.get(*slot) {
                Some(v) => Const(*v),
                None => self.clone(),
            },
            Neg(a) => match a.normalized(params) {
                Const(c) => Const(-c),
                Neg(inner) => *inner,
                other => Neg(Box::new(other)),
            },
            Abs(a) => fold_unary(a.normalized(params), f64::abs, Abs),
            Exp(a) => fold_unary(a.normalized(params), f64::exp, Exp),
            Log(a) => match a.normalized(params) {
                Const(c) if c > 0.0 => Const(c.ln()),
                other => Log(Box::new(other)),
            },
            Sqrt(a) => match a.normalized(params) {
                Const(c) if c >= 0.0 => Const(c.sqrt()),
                other => Sqrt(Box::new(other)),
            },
            Add(a, b) => {
                let (a, b) = (a.normalized(params), b.normalized(params));
                match (a, b) {
                    (Const(x), Const(y)) => Const(x + y),
                    (Const(0.0), e) | (e, Const(0.0)) => e,
                    (a, b) => {
                        let (a, b) = canonical_pair(a, b);
                        Add(Box::new(a), Box::new(b))
                    }
                }
            }
            Sub(a, b) => {
                let (a, b) = (a.normalized(params), b.normalized(params));
                match (a, b) {
                    (Const(x), Const(y)) => Const(x - y),
                    (e, Const(0.0)) => e,
                    (Const(0.0), e) => Neg(Box::new(e)).normalized(params),
                    (a, b) if a == b => Const(0.0),
                    (a, b) => Sub(Box::new(a), Box::new(b)),
                }
            }
            Mul(a, b) => {
                let (a, b) = (a.normalized(params), b.normalized(params));
                match (a, b) {
                    (Const(x), Const(y)) => Const(x * y),
                    (Const(z), _) | (_, Const(z)) if z == 0.0 => Const(0.0),
                    (Const(1.0), e) | (e, Const(1.0)) => e,
                    (a, b) => {
                        let (a, b) = canonical_pair(a, b);
                        Mul(Box::new(a), Box::new(b))
                    }
                }
            }
            Div(a, b) => {
                let (a, b) = (a.normalized(params), b.normalized(params));
                match (a, b) {
                    (Const(x), Const(y)) if y != 0.0 => Const(x / y),
                    (e, Const(1.0)) => e,
                    (a, b) => Div(Box::new(a), Box::new(b)),
                }
            }
            Pow(a, b) => {
                let (a, b) = (a.normalized(params), b.normalized(params));
                match (a, b) {
                    (Const(x), Const(y)) => match checked_pow(x, y) {
                        Some(v) => Const(v),
                        None => Pow(Box::new(Const(x)), Box::new(Const(y))),
                    },
                    (e, Const(1.0)) => e,
                    (_, Const(0.0)) => Const(1.0),
                    (a, b) => Pow(Box::new(a), Box::new(b)),
                }
            }
        }
    }

    /// Structural equality after normalization under `params`.
    pub fn same_as(&self, other: &Expr, params: &[f64]) -> bool {
        self.normalized(params) == other.normalized(params)
    }
}

fn fold_unary(arg: Expr, f: fn(f64) -> f64, wrap: fn(Box<Expr>) -> Expr) -> Expr {
    match arg {
        Expr::Const(c) => Expr::Const(f(c)),
        other => wrap(Box::new(other)),
    }
}

fn canonical_pair(a: Expr, b: Expr) -> (Expr, Expr) {
    let (ka, kb) = (a.to_string(), b.to_string());
    if ka <= kb {
        (a, b)
    } else {
        (b, a)
    }
}

/// Real power with the domain rules of the DSL.
pub(crate) fn checked_pow(base: f64, exponent: f64) -> Option<f64> {
    if base == 0.0 && exponent < 0.0 {
        return None;
    }
    if base < 0.0 {
        if exponent.fract() != 0.0 {
            return None;
        }
        if exponent.abs() < i32::MAX as f64 {
            return Some(base.powi(exponent as i32));
        }
    }
    Some(base.powf(exponent))
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var => write!(f, "x"),
            Expr::Param { name, .. } => write!(f, "{name}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_operand(f, a, 4)
            }
            Expr::Add(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, " + ")?;
                write_operand(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, " - ")?;
                write_operand(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, "*")?;
                write_operand(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, "/")?;
                write_operand(f, b, 3)
            }
            Expr::Pow(a, b) => {
                write_operand(f, a, 5)?;
                write!(f, "^")?;
                write_operand(f, b, 5)
            }
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pow(a: Expr, k: f64) -> Expr {
        Expr::Pow(Box::new(a), Box::new(Expr::Const(k)))
    }

    #[test]
    fn guarded_power() {
        let e = pow(Expr::Abs(Box::new(Expr::Var)), 0.5);
        assert_eq!(e.eval(4.0, &[]).unwrap(), 2.0);
        assert_eq!(e.eval(-4.0, &[]).unwrap(), 2.0);
    }

    #[test]
    fn negative_power_at_zero_is_domain_error() {
        let e = pow(Expr::Var, -1.0);
        let err = e.eval(0.0, &[]).unwrap_err();
        assert!(matches!(err, EvalError::Domain { .. }));
        assert!(err.to_string().contains("x^"));
    }

    #[test]
    fn fractional_power_of_negative_base_rejected() {
        assert!(pow(Expr::Var, 0.5).eval(-1.0, &[]).is_err());
        assert_eq!(pow(Expr::Var, 3.0).eval(-2.0, &[]).unwrap(), -8.0);
    }

    #[test]
    fn log_domain() {
        let e = Expr::Log(Box::new(Expr::Var));
        assert!(e.eval(0.0, &[]).is_err());
        assert!((e.eval(std::f64::consts::E, &[]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalization_folds_identities() {
        let e = (Expr::Var - Expr::Var) * Expr::Const(3.0);
        assert_eq!(e.normalized(&[]), Expr::Const(0.0));
        let a = Expr::Const(1.0) * Expr::Var + Expr::Const(0.0);
        assert_eq!(a.normalized(&[]), Expr::Var);
        let p = Expr::param(0, "k") * Expr::Var;
        assert_eq!(p.normalized(&[2.0]), Expr::Const(2.0) * Expr::Var);
    }

    #[test]
    fn commutative_operands_are_canonical() {
        let a = Expr::Var * Expr::Const(2.0);
        let b = Expr::Const(2.0) * Expr::Var;
        assert!(a.same_as(&b, &[]));
    }
}

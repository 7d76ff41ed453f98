//! Adaptive quadrature with a geometric ladder toward each endpoint.
//!
//! An improper integral is cut into rungs of a ladder approaching the
//! endpoint. In the ladder coordinate `w` every rung has width `ln 8`:
//!
//! * finite endpoint `E`: `x = E ∓ δ₀ e^{-w}`, so each rung shrinks the
//!   distance to `E` by a factor of 8;
//! * infinite endpoint: `x = x₀ ± h (e^w - 1)` with `h = max(1, |x₀|)`, so
//!   `|x|` grows by about 8 per rung. The map is entire, which keeps panels
//!   near the start point as well resolved as those far out.
//!
//! Each rung is integrated by adaptive Gauss–Kronrod (10/21) in `w`, and the
//! sequence of rung integrals `I_k` of `|f|` is fed to a decision rule:
//!
//! * **Finite** when the last rung ratios are at most `0.95` and the
//!   geometric tail bound `I_k r/(1-r)` is below `tol·max(1, |S|)`, or when
//!   three rungs in a row are exactly zero;
//! * **Divergent** when six consecutive rungs do not decrease, when a rung is
//!   infinite, or when the log-slope `η = -d ln F / d ln L` stays at or below
//!   `1.005` (spread at most `0.02`) over six rungs. Here `L` is `ln|x|` (or
//!   `-ln` of the distance to a finite endpoint) and `F = |f| dx/dL`, so
//!   `η ≤ 1` is the harmonic borderline `1/(x ln x)`;
//! * **Inconclusive** when the ladder depth is exhausted first.

use std::f64::consts::LN_2;
use std::fmt;

use crate::asymp::Side;
use crate::error::{EvalError, QuadError};

/// Width of a ladder rung in the `w` coordinate.
pub const RUNG_WIDTH: f64 = 3.0 * LN_2;

const RATIO_CEILING: f64 = 0.95;
const ETA_CEILING: f64 = 1.005;
const ETA_SPREAD: f64 = 0.02;
const GEOMETRIC_SPREAD: f64 = 0.01;
const STREAK: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    /// Mixed tolerance: a finite verdict needs error `≤ tol·max(1, |value|)`.
    pub tol: f64,
    /// Maximum number of ladder rungs.
    pub depth: usize,
    /// Also accept a tail whose rung ratios are stable and below `0.95`
    /// (a power law `x^{-1-ε}`), extrapolating the geometric remainder.
    /// Such a verdict certifies convergence, but its error bound is the
    /// extrapolated remainder rather than `tol`.
    pub accept_geometric: bool,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            tol: 1e-9,
            depth: 60,
            accept_geometric: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub rungs: usize,
    pub partial_sum: f64,
    pub last_ratio: f64,
    pub reason: String,
}

impl fmt::Display for ProbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} after {} rungs (partial sum {:.6e}, last ratio {:.4})",
            self.reason, self.rungs, self.partial_sum, self.last_ratio
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegralVerdict {
    Finite { value: f64, abs_err: f64 },
    Divergent,
    Inconclusive(ProbeReport),
}

impl IntegralVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, IntegralVerdict::Finite { .. })
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, IntegralVerdict::Divergent)
    }

    /// `Some(true)` for finite, `Some(false)` for divergent.
    pub fn finiteness(&self) -> Option<bool> {
        match self {
            IntegralVerdict::Finite { .. } => Some(true),
            IntegralVerdict::Divergent => Some(false),
            IntegralVerdict::Inconclusive(_) => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            IntegralVerdict::Finite { value, .. } => Some(*value),
            _ => None,
        }
    }
}

impl fmt::Display for IntegralVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegralVerdict::Finite { value, abs_err } => {
                write!(f, "finite ({value:.10e} ± {abs_err:.1e})")
            }
            IntegralVerdict::Divergent => write!(f, "divergent"),
            IntegralVerdict::Inconclusive(r) => write!(f, "inconclusive: {r}"),
        }
    }
}

// Gauss–Kronrod 10/21 abscissae and weights on [-1, 1].
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    abs_value: f64,
    err: f64,
}

fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = WGK[10] * fc;
    let mut abs_k = WGK[10] * fc.abs();
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx)?;
        let f2 = f(c + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * h;
    Ok(Segment {
        a,
        b,
        value,
        abs_value: abs_k * h.abs(),
        err: ((kronrod - gauss) * h).abs(),
    })
}

/// Result of an adaptive rule on a proper interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProperIntegral {
    pub value: f64,
    /// Integral of `|f|`.
    pub abs_value: f64,
    pub abs_err: f64,
}

/// Adaptive Gauss–Kronrod on a proper interval `[a, b]`.
pub fn integrate_proper<F>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<ProperIntegral, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::InvalidRange { lo: a, hi: b });
    }
    if a == b {
        return Ok(ProperIntegral {
            value: 0.0,
            abs_value: 0.0,
            abs_err: 0.0,
        });
    }
    let mut segments = vec![gk21(&mut f, a, b)?];
    for _ in 0..400 {
        let total_err: f64 = segments.iter().map(|s| s.err).sum();
        if !(total_err > abs_tol) {
            break;
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| {
                x.1.err
                    .partial_cmp(&y.1.err)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            segments.push(seg);
            break;
        }
        segments.push(gk21(&mut f, seg.a, mid)?);
        segments.push(gk21(&mut f, mid, seg.b)?);
    }
    Ok(ProperIntegral {
        value: segments.iter().map(|s| s.value).sum(),
        abs_value: segments.iter().map(|s| s.abs_value).sum(),
        abs_err: segments.iter().map(|s| s.err).sum(),
    })
}

/// Ladder coordinate from an interior start point toward one endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    pub side: Side,
    pub endpoint: f64,
    pub start: f64,
    delta0: f64,
}

impl Chart {
    pub fn new(start: f64, endpoint: f64, side: Side) -> Result<Chart, QuadError> {
        let ok = match side {
            Side::Right => endpoint > start,
            Side::Left => endpoint < start,
        };
        if !ok || !start.is_finite() || endpoint.is_nan() {
            return Err(QuadError::InvalidRange {
                lo: start.min(endpoint),
                hi: start.max(endpoint),
            });
        }
        let delta0 = if endpoint.is_infinite() {
            start.abs().max(1.0)
        } else {
            (endpoint - start).abs()
        };
        Ok(Chart {
            side,
            endpoint,
            start,
            delta0,
        })
    }

    pub fn is_infinite(&self) -> bool {
        self.endpoint.is_infinite()
    }

    /// Distance-like local variable: `|x|` for infinite endpoints, the
    /// distance to the endpoint for finite ones.
    pub fn local(&self, w: f64) -> f64 {
        if self.is_infinite() {
            self.x(w).abs()
        } else {
            self.delta0 * (-w).exp()
        }
    }

    pub fn x(&self, w: f64) -> f64 {
        let kappa = self.side.orientation();
        if self.is_infinite() {
            self.start + kappa * self.delta0 * w.exp_m1()
        } else {
            self.endpoint - kappa * self.delta0 * (-w).exp()
        }
    }

    /// `|dx/dw|`.
    pub fn jacobian(&self, w: f64) -> f64 {
        if self.is_infinite() {
            self.delta0 * w.exp()
        } else {
            self.delta0 * (-w).exp()
        }
    }

    /// Inverse of [`Chart::x`] for points between the start and the endpoint.
    pub fn w_of(&self, x: f64) -> f64 {
        if self.is_infinite() {
            (self.side.orientation() * (x - self.start) / self.delta0).ln_1p()
        } else {
            (self.delta0 / (self.endpoint - x).abs()).ln()
        }
    }

    /// `L` coordinate used by the log-slope rule, with `|dx/dL|`.
    pub fn log_coordinate(&self, w: f64) -> (f64, f64) {
        let u = self.local(w);
        if self.is_infinite() {
            (u.ln(), u)
        } else {
            (-u.ln(), u)
        }
    }

    /// Whether `x(w)` is still a representable interior point distinct from
    /// `x(w_prev)`.
    pub fn resolvable(&self, w: f64, w_prev: f64) -> bool {
        let x = self.x(w);
        x.is_finite() && x != self.endpoint && x != self.x(w_prev)
    }
}

/// Sequential decision rule over rung integrals.
#[derive(Debug, Clone)]
pub struct LadderDecider {
    opts: ProbeOptions,
    rungs: Vec<f64>,
    signed_sum: f64,
    abs_sum: f64,
    quad_err: f64,
    slope_points: Vec<(f64, f64)>,
}

impl LadderDecider {
    pub fn new(opts: ProbeOptions) -> Self {
        LadderDecider {
            opts,
            rungs: Vec::new(),
            signed_sum: 0.0,
            abs_sum: 0.0,
            quad_err: 0.0,
            slope_points: Vec::new(),
        }
    }

    pub fn rungs(&self) -> &[f64] {
        &self.rungs
    }

    fn ratio(&self, k: usize) -> f64 {
        let (prev, cur) = (self.rungs[k - 1], self.rungs[k]);
        if prev == 0.0 {
            if cur == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            cur / prev
        }
    }

    /// Feed one rung: integral of `f` and of `|f|`, its quadrature error,
    /// and `(L, |f| dx/dL)` at the outer end of the rung.
    pub fn push(
        &mut self,
        signed: f64,
        abs: f64,
        err: f64,
        slope_point: (f64, f64),
    ) -> Option<IntegralVerdict> {
        if abs.is_nan() || signed.is_nan() {
            return Some(self.inconclusive("integrand produced NaN"));
        }
        if abs == f64::INFINITY {
            return Some(IntegralVerdict::Divergent);
        }
        self.rungs.push(abs);
        self.signed_sum += signed;
        self.abs_sum += abs;
        self.quad_err += err;
        self.slope_points.push(slope_point);
        self.decide()
    }

    fn budget(&self) -> f64 {
        self.opts.tol * self.signed_sum.abs().max(1.0)
    }

    fn decide(&self) -> Option<IntegralVerdict> {
        let n = self.rungs.len();
        if n >= 3 && self.rungs[n - 3..].iter().all(|&r| r == 0.0) {
            return Some(IntegralVerdict::Finite {
                value: self.signed_sum,
                abs_err: self.quad_err,
            });
        }
        if n >= 4 {
            let r = (n - 3..n).map(|k| self.ratio(k)).fold(0.0, f64::max);
            if r <= RATIO_CEILING {
                let tail = self.rungs[n - 1] * r / (1.0 - r);
                let sign = if self.signed_sum < 0.0 { -1.0 } else { 1.0 };
                if tail + self.quad_err <= self.budget() {
                    return Some(IntegralVerdict::Finite {
                        value: self.signed_sum + sign * tail,
                        abs_err: tail + self.quad_err,
                    });
                }
                if self.opts.accept_geometric && n > STREAK {
                    let ratios: Vec<f64> = (n - STREAK..n).map(|k| self.ratio(k)).collect();
                    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = ratios.iter().cloned().fold(0.0, f64::max);
                    if hi <= RATIO_CEILING && hi - lo <= GEOMETRIC_SPREAD {
                        return Some(IntegralVerdict::Finite {
                            value: self.signed_sum + sign * tail,
                            abs_err: tail + self.quad_err,
                        });
                    }
                }
            }
        }
        if n > STREAK {
            let last = self.rungs[n - 1];
            let rising = (n - STREAK..n).all(|k| self.rungs[k] >= self.rungs[k - 1] * (1.0 - 1e-9));
            if rising && last > 0.0 {
                return Some(IntegralVerdict::Divergent);
            }
        }
        if self.slope_points.len() > STREAK {
            let pts = &self.slope_points[self.slope_points.len() - STREAK - 1..];
            let mut etas = Vec::with_capacity(STREAK);
            for pair in pts.windows(2) {
                let ((l0, f0), (l1, f1)) = (pair[0], pair[1]);
                if !(l0 >= 1.0
                    && l1 > l0
                    && f0 > 0.0
                    && f1 > 0.0
                    && f0.is_finite()
                    && f1.is_finite())
                {
                    etas.clear();
                    break;
                }
                etas.push(-(f1.ln() - f0.ln()) / (l1.ln() - l0.ln()));
            }
            if etas.len() == STREAK {
                let lo = etas.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = etas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if hi <= ETA_CEILING && hi - lo <= ETA_SPREAD {
                    return Some(IntegralVerdict::Divergent);
                }
            }
        }
        None
    }

    /// The ladder cannot get closer to the endpoint. A tail whose recent
    /// rung ratios sit in a narrow band `[lo, hi]` below the ceiling is
    /// extrapolated geometrically; the error covers every ratio in the band.
    pub fn exhausted(&self) -> IntegralVerdict {
        let n = self.rungs.len();
        if n > STREAK {
            let ratios: Vec<f64> = (n - STREAK..n).map(|k| self.ratio(k)).collect();
            let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().cloned().fold(0.0, f64::max);
            if hi <= RATIO_CEILING && hi - lo <= GEOMETRIC_SPREAD {
                let last = self.rungs[n - 1];
                let (t_lo, t_hi) = (last * lo / (1.0 - lo), last * hi / (1.0 - hi));
                let sign = if self.signed_sum < 0.0 { -1.0 } else { 1.0 };
                let err = 0.5 * (t_hi - t_lo) + self.quad_err;
                if err <= self.budget() {
                    return IntegralVerdict::Finite {
                        value: self.signed_sum + sign * 0.5 * (t_lo + t_hi),
                        abs_err: err,
                    };
                }
            }
        }
        self.inconclusive("endpoint no longer resolvable in floating point")
    }

    pub fn inconclusive(&self, reason: &str) -> IntegralVerdict {
        let n = self.rungs.len();
        IntegralVerdict::Inconclusive(ProbeReport {
            rungs: n,
            partial_sum: self.signed_sum,
            last_ratio: if n >= 2 { self.ratio(n - 1) } else { f64::NAN },
            reason: reason.to_string(),
        })
    }
}

fn evaluate<F>(f: &F, x: f64) -> Result<f64, QuadError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    f(x).map_err(|source| QuadError::Evaluation { x, source })
}

/// Integrability of `f` on the one-sided neighbourhood between `from` and
/// `endpoint`, approached from the given side of the interval.
pub fn probe_tail<F>(
    f: F,
    from: f64,
    endpoint: f64,
    side: Side,
    opts: &ProbeOptions,
) -> Result<IntegralVerdict, QuadError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let chart = Chart::new(from, endpoint, side)?;
    let mut decider = LadderDecider::new(*opts);
    let rung_tol = opts.tol / 64.0;
    for k in 0..opts.depth {
        let (w0, w1) = (k as f64 * RUNG_WIDTH, (k + 1) as f64 * RUNG_WIDTH);
        if !chart.resolvable(w1, w0) {
            return Ok(decider.exhausted());
        }
        let tol = rung_tol * decider.signed_sum.abs().max(1.0);
        let rung = integrate_proper(
            |w| {
                let x = chart.x(w);
                Ok(evaluate(&f, x)? * chart.jacobian(w))
            },
            w0,
            w1,
            tol,
        )?;
        let (l, dxdl) = chart.log_coordinate(w1);
        let edge = evaluate(&f, chart.x(w1))?.abs() * dxdl;
        if let Some(v) = decider.push(rung.value, rung.abs_value, rung.abs_err, (l, edge)) {
            return Ok(v);
        }
    }
    Ok(decider.inconclusive("ladder depth exhausted"))
}

/// Integral of `f` over `(lo, hi)`; either end may be infinite or singular.
pub fn integrate<F>(
    f: F,
    lo: f64,
    hi: f64,
    opts: &ProbeOptions,
) -> Result<IntegralVerdict, QuadError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    if !(lo < hi) {
        return Err(QuadError::InvalidRange { lo, hi });
    }
    let mid = if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else {
        (0.5 * (lo.atan() + hi.atan())).tan()
    };
    let half = ProbeOptions {
        tol: opts.tol / 2.0,
        ..*opts
    };
    let right = probe_tail(&f, mid, hi, Side::Right, &half)?;
    if right.is_divergent() {
        return Ok(right);
    }
    let left = probe_tail(&f, mid, lo, Side::Left, &half)?;
    Ok(match (left, right) {
        (IntegralVerdict::Divergent, _) => IntegralVerdict::Divergent,
        (
            IntegralVerdict::Finite {
                value: a,
                abs_err: ea,
            },
            IntegralVerdict::Finite {
                value: b,
                abs_err: eb,
            },
        ) => IntegralVerdict::Finite {
            value: a + b,
            abs_err: ea + eb,
        },
        (IntegralVerdict::Inconclusive(r), _) | (_, IntegralVerdict::Inconclusive(r)) => {
            IntegralVerdict::Inconclusive(r)
        }
        (_, IntegralVerdict::Divergent) => unreachable!("handled above"),
    })
}

/// Gauss–Legendre rule with barycentric interpolation on its nodes.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    bary: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, t);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { t } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (t * pn - pm) / (t * t - 1.0);
                let step = pn / dp;
                t -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -t;
            weights[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let bary = (0..n)
            .map(|j| {
                1.0 / (0..n)
                    .filter(|&k| k != j)
                    .map(|k| nodes[j] - nodes[k])
                    .product::<f64>()
            })
            .collect();
        GaussLegendre {
            nodes,
            weights,
            bary,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lagrange basis values at `t ∈ [-1, 1]`.
    pub fn basis(&self, t: f64) -> Vec<f64> {
        let n = self.len();
        if let Some(j) = self.nodes.iter().position(|&x| x == t) {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            return e;
        }
        let terms: Vec<f64> = (0..n).map(|j| self.bary[j] / (t - self.nodes[j])).collect();
        let denom: f64 = terms.iter().sum();
        terms.into_iter().map(|v| v / denom).collect()
    }

    /// Interpolate nodal `values` at `t ∈ [-1, 1]`.
    pub fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((&x, &c), &v) in self.nodes.iter().zip(&self.bary).zip(values) {
            if x == t {
                return v;
            }
            let k = c / (t - x);
            num += k * v;
            den += k;
        }
        num / den
    }

    /// `Q[i][j] = ∫_{-1}^{t_i} ℓ_j(t) dt` for the Lagrange basis `ℓ_j`.
    pub fn integration_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n {
            let half = 0.5 * (self.nodes[i] + 1.0);
            for k in 0..n {
                let tau = -1.0 + half * (self.nodes[k] + 1.0);
                let b = self.basis(tau);
                for j in 0..n {
                    q[i][j] += half * self.weights[k] * b[j];
                }
            }
        }
        q
    }
}

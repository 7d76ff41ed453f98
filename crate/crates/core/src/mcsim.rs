//! Monte-Carlo oracle for `E Z_T`.
//!
//! Paths of `Y` (or of `Ỹ`) are generated by Euler–Maruyama and absorbed at
//! truncation levels `l_n < x₀ < r_n` standing in for the endpoints. A step
//! that would cross a level is clamped to it. On absorption next to an
//! endpoint where the process genuinely exits and which is bad, `Z` drops to
//! zero; elsewhere it is frozen.
//!
//! Every path draws from its own ChaCha stream keyed by the master seed and
//! the path index, and per-path results are reduced in index order, so
//! estimates are bit-identical for any thread count. `STRICTTEST_THREADS`
//! caps the worker pool.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::asymp::Side;
use crate::classify::{classify_martingale, Classification};
use crate::coeffspec::ProblemSpec;
use crate::error::{EvalError, SimError};
use crate::quad::{GaussLegendre, ProbeOptions};
use crate::tristate::TriState;

/// Arctan quantile toward each endpoint used for default truncation.
pub const DEFAULT_TRUNCATION_QUANTILE: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Direct,
    Auxiliary,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub horizon: f64,
    pub step: f64,
    pub paths: u64,
    /// `(l_n, r_n)`; derived from the arctan quantile when absent.
    pub truncation: Option<(f64, f64)>,
    pub seed: u64,
    pub estimator: Estimator,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon: 1.0,
            step: 1e-3,
            paths: 10_000,
            truncation: None,
            seed: 0x5eed,
            estimator: Estimator::Both,
        }
    }
}

/// Levels at arctan quantile `q` of the way from `x₀` to each endpoint.
pub fn truncation_at_quantile(spec: &ProblemSpec, q: f64) -> (f64, f64) {
    let t0 = spec.x0().atan();
    let (tl, tr) = spec.interval.theta_range();
    ((t0 + q * (tl - t0)).tan(), (t0 + q * (tr - t0)).tan())
}

impl SimConfig {
    pub fn levels(&self, spec: &ProblemSpec) -> Result<(f64, f64), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.step > 0.0 && self.step <= self.horizon) {
            return bad(format!("step must lie in (0, horizon], got {}", self.step));
        }
        if self.paths == 0 {
            return bad("at least one path is needed".into());
        }
        let (lo, hi) = self
            .truncation
            .unwrap_or_else(|| truncation_at_quantile(spec, DEFAULT_TRUNCATION_QUANTILE));
        let x0 = spec.x0();
        let (l, r) = (spec.interval.left, spec.interval.right);
        if !(l < lo && lo < x0 && x0 < hi && hi < r) {
            return bad(format!(
                "truncation levels need l < l_n < x0 < r_n < r, got ({lo}, {hi}) around {x0}"
            ));
        }
        Ok((lo, hi))
    }

    fn steps(&self) -> u64 {
        (self.horizon / self.step).round().max(1.0) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectRecord {
    pub path_id: u64,
    pub absorbed_at: Option<Side>,
    pub t_absorbed: Option<f64>,
    pub z_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalRecord {
    pub path_id: u64,
    pub survived: bool,
    pub exit_side: Option<Side>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimate: f64,
    pub std_error: f64,
    pub paths: u64,
    pub absorbed_left: u64,
    pub absorbed_right: u64,
    /// Paths whose value was set to zero at absorption.
    pub zero_mass: u64,
    pub levels: (f64, f64),
}

impl EstimateReport {
    fn from_values(values: impl Iterator<Item = f64>, n: u64, levels: (f64, f64)) -> Self {
        let (mut sum, mut sq) = (0.0, 0.0);
        for v in values {
            sum += v;
            sq += v * v;
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        EstimateReport {
            estimate: mean,
            std_error: (var / nf).sqrt(),
            paths: n,
            absorbed_left: 0,
            absorbed_right: 0,
            zero_mass: 0,
            levels,
        }
    }

    /// `estimate ≤ 1 + 5·SE`.
    pub fn within_supermartingale_bound(&self) -> bool {
        self.estimate <= 1.0 + 5.0 * self.std_error
    }

    /// `|a - b| ≤ k·√(SE_a² + SE_b²)`.
    pub fn agrees_with(&self, other: &EstimateReport, k: f64) -> bool {
        (self.estimate - other.estimate).abs() <= k * self.std_error.hypot(other.std_error)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectRun {
    pub report: EstimateReport,
    pub records: Vec<DirectRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalRun {
    pub report: EstimateReport,
    pub records: Vec<SurvivalRecord>,
}

/// Worker pool honouring `STRICTTEST_THREADS`.
pub fn thread_pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("STRICTTEST_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        b = b.num_threads(n.max(1));
    }
    b.build().expect("thread pool")
}

const DIRECT_STREAM: u64 = 0;
const AUX_STREAM: u64 = 1 << 62;
const OCCUPATION_STREAM: u64 = 2 << 62;

fn path_rng(seed: u64, stream: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream | path);
    rng
}

/// One Euler path; returns the absorption side and time, and the final
/// state. `visit(x, dW)` sees the state at the start of every step.
fn euler_path(
    drift: &dyn Fn(f64) -> Result<f64, EvalError>,
    vol: &dyn Fn(f64) -> Result<f64, EvalError>,
    x0: f64,
    levels: (f64, f64),
    cfg: &SimConfig,
    rng: &mut ChaCha8Rng,
    mut visit: impl FnMut(f64, f64) -> Result<(), EvalError>,
) -> Result<(Option<(Side, f64)>, f64), EvalError> {
    let h = cfg.step;
    let sqrt_h = h.sqrt();
    let mut x = x0;
    for k in 0..cfg.steps() {
        let z: f64 = StandardNormal.sample(rng);
        let dw = sqrt_h * z;
        visit(x, dw)?;
        x += drift(x)? * h + vol(x)? * dw;
        let t = (k + 1) as f64 * h;
        if !(x > levels.0) {
            return Ok((Some((Side::Left, t)), levels.0));
        }
        if !(x < levels.1) {
            return Ok((Some((Side::Right, t)), levels.1));
        }
    }
    Ok((None, x))
}

/// Whether absorption next to `side` kills `Z`: the endpoint is bad and
/// the simulated process exits there.
fn kill_flags(c: &Classification, aux: bool) -> Result<[bool; 2], SimError> {
    let mut out = [false; 2];
    for (i, side) in Side::both().into_iter().enumerate() {
        let e = c.endpoint(side);
        let exits = if aux { e.ytilde_exits } else { e.y_exits };
        out[i] = match (e.good, exits) {
            (TriState::Yes, _) | (_, TriState::No) => false,
            (TriState::No, TriState::Yes) => true,
            _ => {
                return Err(SimError::Refused(format!(
                "goodness or exit at the {side} endpoint is undecided (good: {}, exits: {exits})",
                e.good
            )))
            }
        };
    }
    Ok(out)
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

pub fn simulate_ez(
    spec: &ProblemSpec,
    cfg: &SimConfig,
    opts: &ProbeOptions,
) -> Result<DirectRun, SimError> {
    let levels = cfg.levels(spec)?;
    let c = classify_martingale(spec, opts);
    simulate_ez_with(spec, cfg, levels, &c)
}

/// [`simulate_ez`] with a classification computed beforehand.
pub fn simulate_ez_with(
    spec: &ProblemSpec,
    cfg: &SimConfig,
    levels: (f64, f64),
    c: &Classification,
) -> Result<DirectRun, SimError> {
    let params = spec.param_values();
    let b_zero = spec.b.normalized(params).is_literal_zero();
    let kill = if b_zero {
        [false; 2]
    } else {
        kill_flags(c, false)?
    };
    let drift = |x: f64| spec.mu.eval(x, params);
    let vol = |x: f64| spec.sigma.eval(x, params);
    let x0 = spec.x0();
    let run = |path: u64| -> Result<DirectRecord, SimError> {
        let mut rng = path_rng(cfg.seed, DIRECT_STREAM, path);
        let mut log_z = 0.0;
        let (absorbed, _) = euler_path(&drift, &vol, x0, levels, cfg, &mut rng, |x, dw| {
            if !b_zero {
                let b = spec.b.eval(x, params)?;
                log_z += b * dw - 0.5 * b * b * cfg.step;
            }
            Ok(())
        })
        .map_err(|source| SimError::Evaluation { path, source })?;
        let killed = absorbed.is_some_and(|(s, _)| kill[side_index(s)]);
        let z = if killed { 0.0 } else { log_z.exp() };
        if !z.is_finite() {
            return Err(SimError::Overflow { path });
        }
        Ok(DirectRecord {
            path_id: path,
            absorbed_at: absorbed.map(|a| a.0),
            t_absorbed: absorbed.map(|a| a.1),
            z_t: z,
        })
    };
    let records: Vec<DirectRecord> = thread_pool().install(|| {
        (0..cfg.paths)
            .into_par_iter()
            .map(run)
            .collect::<Result<_, _>>()
    })?;
    let mut report = EstimateReport::from_values(records.iter().map(|r| r.z_t), cfg.paths, levels);
    for r in &records {
        match r.absorbed_at {
            Some(Side::Left) => report.absorbed_left += 1,
            Some(Side::Right) => report.absorbed_right += 1,
            None => {}
        }
        if r.absorbed_at.is_some_and(|s| kill[side_index(s)]) {
            report.zero_mass += 1;
        }
    }
    Ok(DirectRun { report, records })
}

/// `P̃(S > T)`: the share of `Ỹ` paths not absorbed by `T` next to a bad
/// endpoint where `Ỹ` exits.
pub fn simulate_survival(
    spec: &ProblemSpec,
    cfg: &SimConfig,
    opts: &ProbeOptions,
) -> Result<SurvivalRun, SimError> {
    let levels = cfg.levels(spec)?;
    let c = classify_martingale(spec, opts);
    simulate_survival_with(spec, cfg, levels, &c)
}

pub fn simulate_survival_with(
    spec: &ProblemSpec,
    cfg: &SimConfig,
    levels: (f64, f64),
    c: &Classification,
) -> Result<SurvivalRun, SimError> {
    let kill = kill_flags(c, true)?;
    let params = spec.param_values();
    let drift = |x: f64| {
        Ok(spec.mu.eval(x, params)? + spec.b.eval(x, params)? * spec.sigma.eval(x, params)?)
    };
    let vol = |x: f64| spec.sigma.eval(x, params);
    let x0 = spec.x0();
    let run = |path: u64| -> Result<SurvivalRecord, SimError> {
        let mut rng = path_rng(cfg.seed, AUX_STREAM, path);
        let (absorbed, _) = euler_path(&drift, &vol, x0, levels, cfg, &mut rng, |_, _| Ok(()))
            .map_err(|source| SimError::Evaluation { path, source })?;
        let side = absorbed.map(|a| a.0);
        Ok(SurvivalRecord {
            path_id: path,
            survived: !side.is_some_and(|s| kill[side_index(s)]),
            exit_side: side,
        })
    };
    let records: Vec<SurvivalRecord> = thread_pool().install(|| {
        (0..cfg.paths)
            .into_par_iter()
            .map(run)
            .collect::<Result<_, _>>()
    })?;
    let mut report = EstimateReport::from_values(
        records.iter().map(|r| if r.survived { 1.0 } else { 0.0 }),
        cfg.paths,
        levels,
    );
    for r in &records {
        match r.exit_side {
            Some(Side::Left) => report.absorbed_left += 1,
            Some(Side::Right) => report.absorbed_right += 1,
            None => {}
        }
        if !r.survived {
            report.zero_mass += 1;
        }
    }
    Ok(SurvivalRun { report, records })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupationReport {
    /// Median of `|lhs - rhs|/|lhs|` over paths alive at `T`.
    pub median_discrepancy: f64,
    pub used_paths: u64,
    /// Paths absorbed before `T`, left out of the median.
    pub excluded_paths: u64,
    pub bin_width: f64,
}

/// Compare `∫₀ᵀ b²(Y_u) du` with `∫ (b²/σ²)(y) L̂_T^y dy`. The occupation
/// density is `L̂^y = (time in the bin around y)·σ²(y)/width`, piecewise in
/// the bin but with `σ²` taken at `y`; the `dy` integral over each bin uses a
/// four-point Gauss–Legendre rule. The bin width is the one-step spatial
/// resolution `|σ(x₀)|·√h`.
pub fn occupation_check(spec: &ProblemSpec, cfg: &SimConfig) -> Result<OccupationReport, SimError> {
    let levels = cfg.levels(spec)?;
    let params = spec.param_values();
    let x0 = spec.x0();
    let s0 = spec
        .sigma_at(x0)
        .map_err(|source| SimError::Evaluation { path: 0, source })?
        .abs();
    let width = s0 * cfg.step.sqrt();
    let gl = GaussLegendre::new(4);
    let drift = |x: f64| spec.mu.eval(x, params);
    let vol = |x: f64| spec.sigma.eval(x, params);
    // ∫_bin (b²/σ²)(y)·σ²(y) dy / width
    let bin_weight = |center: f64| -> Result<f64, EvalError> {
        let mut acc = 0.0;
        for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
            let y = center + 0.5 * width * t;
            let b = spec.b.eval(y, params)?;
            let s = spec.sigma.eval(y, params)?;
            acc += 0.5 * w * (b * b / (s * s)) * (s * s);
        }
        Ok(acc)
    };
    let run = |path: u64| -> Result<Option<f64>, SimError> {
        let mut rng = path_rng(cfg.seed, OCCUPATION_STREAM, path);
        let mut lhs = 0.0;
        let mut occupation: BTreeMap<i64, f64> = BTreeMap::new();
        let (absorbed, _) = euler_path(&drift, &vol, x0, levels, cfg, &mut rng, |x, _| {
            let b = spec.b.eval(x, params)?;
            lhs += b * b * cfg.step;
            let bin = ((x - x0) / width + 0.5).floor() as i64;
            *occupation.entry(bin).or_default() += cfg.step;
            Ok(())
        })
        .map_err(|source| SimError::Evaluation { path, source })?;
        if absorbed.is_some() {
            return Ok(None);
        }
        let mut rhs = 0.0;
        for (bin, time) in occupation {
            let weight = bin_weight(x0 + bin as f64 * width)
                .map_err(|source| SimError::Evaluation { path, source })?;
            rhs += time * weight;
        }
        Ok(Some(if lhs == 0.0 {
            (rhs - lhs).abs()
        } else {
            ((lhs - rhs) / lhs).abs()
        }))
    };
    let results: Vec<Option<f64>> = thread_pool().install(|| {
        (0..cfg.paths)
            .into_par_iter()
            .map(run)
            .collect::<Result<_, _>>()
    })?;
    let mut used: Vec<f64> = results.iter().flatten().copied().collect();
    let excluded = cfg.paths - used.len() as u64;
    if used.is_empty() {
        return Err(SimError::Refused(
            "every path was absorbed before the horizon".into(),
        ));
    }
    used.sort_by(f64::total_cmp);
    let n = used.len();
    let median = if n % 2 == 1 {
        used[n / 2]
    } else {
        0.5 * (used[n / 2 - 1] + used[n / 2])
    };
    Ok(OccupationReport {
        median_discrepancy: median,
        used_paths: n as u64,
        excluded_paths: excluded,
        bin_width: width,
    })
}

/// `E Z_T` for each truncation quantile, innermost first.
pub fn truncation_ladder(
    spec: &ProblemSpec,
    cfg: &SimConfig,
    quantiles: &[f64],
    opts: &ProbeOptions,
) -> Result<Vec<EstimateReport>, SimError> {
    let c = classify_martingale(spec, opts);
    quantiles
        .iter()
        .map(|&q| {
            let cfg = SimConfig {
                truncation: Some(truncation_at_quantile(spec, q)),
                ..*cfg
            };
            let levels = cfg.levels(spec)?;
            Ok(simulate_ez_with(spec, &cfg, levels, &c)?.report)
        })
        .collect()
}

/// Outward truncation never raises the estimate by more than `3·SE`.
pub fn truncation_monotone(ladder: &[EstimateReport]) -> bool {
    ladder
        .windows(2)
        .all(|w| w[1].estimate - w[0].estimate <= 3.0 * w[0].std_error.hypot(w[1].std_error))
}

fn side_label(side: Option<Side>) -> &'static str {
    match side {
        Some(Side::Left) => "left",
        Some(Side::Right) => "right",
        None => "none",
    }
}

pub fn write_direct_csv(records: &[DirectRecord], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "path_id,absorbed_at,t_absorbed,Z_T")?;
    for r in records {
        let t = r.t_absorbed.map_or(String::new(), |t| format!("{t:?}"));
        writeln!(
            out,
            "{},{},{},{:?}",
            r.path_id,
            side_label(r.absorbed_at),
            t,
            r.z_t
        )?;
    }
    Ok(())
}

pub fn write_survival_csv(records: &[SurvivalRecord], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "path_id,survived,exit_side")?;
    for r in records {
        writeln!(
            out,
            "{},{},{}",
            r.path_id,
            r.survived,
            side_label(r.exit_side)
        )?;
    }
    Ok(())
}

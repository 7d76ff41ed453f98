//! Decide whether the stochastic exponential `Z = E(∫ b(Y) dW)` of a
//! one-dimensional diffusion `dY = μ(Y) dt + σ(Y) dW` is a strict local
//! martingale, a martingale, or a uniformly integrable martingale.
//!
//! The decision reduces to integrability of scale-function expressions at
//! the two endpoints of the state space. Each test is answered by an
//! asymptotic algebra when leading-order behaviour is declared, and by a
//! ladder quadrature probe otherwise; anything neither route can settle is
//! reported as unknown.
//!
//! On top of the classifier sit bubble detection for local-volatility
//! models ([`bubbles`]), the mutual arrangement of two diffusion laws via
//! separating times ([`septime`]), and a Monte-Carlo oracle for `E Z_T`
//! ([`mcsim`]).

// Negated float comparisons are deliberate: NaN must take the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod asymp;
pub mod bubbles;
pub mod classify;
pub mod coeffspec;
pub mod error;
pub mod mcsim;
pub mod quad;
pub mod scale;
pub mod septime;
pub mod tristate;

pub use asymp::{AsymptoticForm, ConvergenceVerdict, Frame, Side};
pub use bubbles::{
    bubble_classify, cev_region, driftless_dichotomy, BubbleReport, RegionLabel, VolModel,
};
pub use classify::{
    classify_martingale, classify_no_exit, endpoint_report, Classification, Condition,
    EndpointReport, Evidence, Verdict,
};
pub use coeffspec::{is_b_zero_ae, parse_problem, AsymTarget, Expr, Interval, ProblemSpec};
pub use error::{AsympError, ClassifyError, EvalError, ParseError, QuadError, SimError, SpecError};
pub use mcsim::{
    occupation_check, simulate_ez, simulate_survival, truncation_ladder, EstimateReport, Estimator,
    OccupationReport, SimConfig,
};
pub use quad::{IntegralVerdict, ProbeOptions};
pub use scale::{build_scale, feller_limit, FellerFunctional, ScaleBundle, Which};
pub use septime::{
    arrangement_of_exponential, mutual_arrangement, separating_set, ArrangementReport, Nearest,
    SdePair, SeparatingSetReport,
};
pub use tristate::TriState;

//! parinf: a numerical laboratory for restricted n-body dynamics near the
//! degenerate (parabolic) fixed point at infinity.
//!
//! The library is organized around the pipeline
//!
//! 1. [`models`] — the three physical models (RC3BP, Sitnikov, RPC4BP) and
//!    the Jacobi reduction to 1 1/2 degrees of freedom;
//! 2. [`mcgehee`] — compactified coordinates in which escape to infinity
//!    becomes approach to a degenerate saddle at the origin;
//! 3. [`series`] — Fourier-Taylor algebra and the finite-order normal form
//!    around that saddle;
//! 4. [`flow`] — numerical integration, the Poincare return map and local
//!    invariant-manifold series;
//! 5. [`shilnikov`] — transition maps past the saddle as fixed points of an
//!    integral operator, with passage-time asymptotics;
//! 6. [`splitting`] — Melnikov splitting functions for the three models;
//! 7. [`tangency`] — secondary homoclinic tangencies and the local global-map
//!    model around them;
//! 8. [`renorm`] — the renormalization harness whose limit is the
//!    conservative Henon map;
//! 9. [`exp`] — experiment runner, configuration and CSV/JSON emission.
//!
//! Each runnable capability has a corresponding example under `examples/`.

pub mod exp;
pub mod flow;
pub mod mcgehee;
pub mod models;
pub mod num;
pub mod renorm;
pub mod series;
pub mod shilnikov;
pub mod splitting;
pub mod tangency;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("evaluation point collides with a primary (r = {r}, separation = {sep})")]
    Domain { r: f64, sep: f64 },
    #[error("Jacobi reduction invalid at (r = {r}, y = {y}): discriminant {disc} <= 0")]
    ReductionInvalid { r: f64, y: f64, disc: f64 },
    #[error("trajectory left the chart box at (q = {q}, p = {p})")]
    ChartExit { q: f64, p: f64 },
    #[error("integrator step underflow near t = {t}")]
    StepUnderflow { t: f64 },
    #[error("integrator exceeded the step budget")]
    TooManySteps,
    #[error("integration aborted by the observer at t = {t}")]
    ObserverStop { t: f64 },
    #[error("Newton iteration diverged (last iterate {x})")]
    NewtonDiverged { x: f64 },
    #[error("no sign change on [{a}, {b}]")]
    NoBracket { a: f64, b: f64 },
    #[error("Picard iteration failed to contract (update {update} after {sweeps} sweeps)")]
    NoContraction { update: f64, sweeps: usize },
    #[error("grid resolution {n} too coarse for passage time {s_star}")]
    GridResolution { n: usize, s_star: f64 },
    #[error("resonant obstruction: {what}")]
    ResonanceObstruction { what: String },
    #[error("series degree {deg} exceeds cap {cap}")]
    CapOverflow { deg: usize, cap: usize },
    #[error("series order mismatch: {what}")]
    OrderMismatch { what: String },
    #[error("no phase-equation root inside the window [{lo}, {hi}]")]
    SeedFailure { lo: f64, hi: f64 },
    #[error("least-squares fit is ill conditioned")]
    IllConditionedFit,
    #[error("inversion target {target} outside the covered strip")]
    InversionFailure { target: f64 },
    #[error("u-window too small: image [{lo}, {hi}] does not cover the requested range")]
    WindowTooSmall { lo: f64, hi: f64 },
    #[error("underflow: requested mode below 1e-300")]
    ModeUnderflow,
    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("cache corrupt: {0}")]
    CacheCorrupt(String),
    #[error("no tangency line solution at xi = {xi}")]
    NoTangencyLine { xi: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Discretized Brownian motion: grid paths, Monte Carlo `E_t`, the
//! bit-array/path isomorphism, hitting times, continuous-time transforms
//! and the divergent-expectation counterexample.

mod continuous;
mod hitting;
mod iso;
mod mc;
pub mod normal;
mod path;
mod quadrature;
mod remark;

pub use continuous::{
    continuous_savings_path, continuous_upcrossing_path, extend_grid_martingale, ContinuousSavings,
    ContinuousStop, ContinuousUpcrossing, Markov, PathMartingale, TimeGrid,
};
pub use hitting::{hitting_time, local_extrema, select_nonatom_levels, HitTime};
pub use iso::{bits_to_path, path_to_bits};
pub use mc::{
    cond_expectation_t, hoeffding_half_width, ClampedTerminal, ConstantFunctional, Estimate,
    FnFunctional, PathFunctional, DELTA,
};
pub use path::{grid_steps, sample_path, sample_path_with, sample_paths, GridPath};
pub use quadrature::{gk15_adaptive, Quadrature};
pub use remark::{remark_counterexample, RemarkReport};

use crate::bitspace::BitspaceError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BrownianError {
    #[error(transparent)]
    Bitspace(#[from] BitspaceError),
    #[error("grid step must be positive")]
    BadStep,
    #[error("a path needs at least one point")]
    EmptyPath,
    #[error("time {time} is not on the grid of step {dt} within the path")]
    OffGrid { time: f64, dt: f64 },
    #[error("paths have different grid steps")]
    StepMismatch,
    #[error("the appended path does not start at 0")]
    NotFromOrigin,
    #[error("the functional has no finite bound")]
    Unbounded,
    #[error("at least one sample is required")]
    NoSamples,
    #[error("horizon lies before the conditioning time")]
    HorizonBeforeTime,
    #[error("bits per coefficient must be in 2..=16, got {0}")]
    BadQuantization(u32),
    #[error("depth {0} exceeds 20")]
    DepthTooLarge(u32),
    #[error("path grid does not match the requested depth and rows")]
    IncompatibleGrid,
    #[error("level interval is empty")]
    EmptyInterval,
    #[error("no atom-free level left in the interval")]
    Saturated,
    #[error("upcrossing band needs a < b")]
    EmptyBand,
    #[error("savings transform needs a positive starting value, got {0}")]
    ZeroAtDoubling(f64),
    #[error("time grid must be strictly increasing and nonnegative")]
    BadTimeGrid,
    #[error("no grid time at or after {0}")]
    NoLaterGridTime(f64),
    #[error("martingale evaluation produced a non-finite value")]
    NonFinite,
    #[error("radius must be positive")]
    BadRadius,
    #[error("quadrature did not converge: value {value}, residual {residual}")]
    NotConverged { value: f64, residual: f64 },
}

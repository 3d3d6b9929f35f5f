//! Exact martingale machinery on fair-coin bit arrays and a discretized
//! Brownian-motion backend.
//!
//! * [`bitspace`]: cylinder functions and exact conditional expectation.
//! * [`martingale`]: verification and the repair, upcrossing, savings,
//!   array-extension and oracle-conversion transforms.
//! * [`lab`]: the row-progression betting game, scenario generators and
//!   Monte Carlo convergence diagnostics.
//! * [`brownian`]: grid paths, Monte Carlo `E_t`, the bit-array/path
//!   isomorphism, hitting times and continuous-time transforms.

pub mod bitspace;
pub mod brownian;
pub mod lab;
pub mod martingale;
pub mod random;
pub mod rational;
pub mod rng;

pub use bitspace::{BitAssignment, CylinderFunction, Position, PositionSet};
pub use martingale::{MartingaleSpec, TimeChain, Trajectory};
pub use rational::Rational;

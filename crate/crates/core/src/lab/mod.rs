//! The row-progression betting game, scenario generators and Monte Carlo
//! convergence diagnostics.

mod convergence;
mod game;
mod source;

pub use convergence::{
    convergence_report, count_upcrossings, BinaryExpansion, ConvergenceOptions, ConvergenceReport,
    DecayingProduct, GameMartingale, LadderStat, SampleMartingale, SampleSummary,
};
pub use game::{
    materialize_game, run_game, AllInOnZero, Bet, GameConfig, GameRecord, HashedStrategy,
    OracleCopy, RowSchedule, RowStrategy, View, Wager, ZeroStake,
};
pub use source::{BitMatrix, BitSource, SampleBits, Scenario, ScenarioSource};

use crate::bitspace::{BitspaceError, Position};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Bitspace(#[from] BitspaceError),
    #[error("strategy at {at} asked for bit {requested}, which it may not see yet")]
    FutureBit { at: Position, requested: Position },
    #[error("stake {stake} at {at} exceeds capital {capital}")]
    StakeExceedsCapital {
        at: Position,
        stake: Rational,
        capital: Rational,
    },
    #[error("stake fraction {0} is outside [0, 1]")]
    BadFraction(Rational),
    #[error("starting capital must be nonnegative")]
    NegativeCapital,
    #[error("sample {sample} has negative capital at step {step}")]
    NegativeCapitalAt { sample: u64, step: usize },
    #[error("a run needs at least one step")]
    NoSteps,
    #[error("a report needs at least one sample")]
    NoSamples,
    #[error("upcrossing band needs a < b")]
    EmptyBand,
    #[error("horizon {horizon} exceeds the {available} materialized steps")]
    HorizonTooLong { horizon: usize, available: usize },
    #[error("scenario file: {0}")]
    BadScenarioFile(String),
}

//! The row-progression betting game: bet on the bits of row `m` left to
//! right, using every earlier row as an oracle, and move on to row `m+1`
//! whenever the strategy (or a fixed schedule) says so.

use super::source::BitSource;
use super::LabError;
use crate::bitspace::{BitAssignment, BitspaceError, CylinderFunction, Position};
use crate::martingale::{MartingaleSpec, TimeChain, Trajectory};
use crate::rational::{self, Rational};
use crate::rng::mix64;
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A stake on the value of the next bit: win `stake` if the bit equals
/// `guess`, lose it otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wager {
    pub stake: Rational,
    pub guess: bool,
}

impl Wager {
    pub fn none() -> Self {
        Wager {
            stake: Rational::zero(),
            guess: false,
        }
    }
}

/// What a strategy sees at position `(row, col)`: its capital, every bit of
/// earlier rows and the bits of the current row before `col`.
pub struct View<'a> {
    row: u64,
    col: u64,
    capital: &'a Rational,
    bits: &'a mut dyn FnMut(Position) -> bool,
}

impl View<'_> {
    pub fn row(&self) -> u64 {
        self.row
    }

    pub fn col(&self) -> u64 {
        self.col
    }

    pub fn capital(&self) -> &Rational {
        self.capital
    }

    pub fn bit(&mut self, p: Position) -> Result<bool, LabError> {
        if p >= Position::new(self.row, self.col) {
            return Err(LabError::FutureBit {
                at: Position::new(self.row, self.col),
                requested: p,
            });
        }
        Ok((self.bits)(p))
    }
}

pub trait RowStrategy: Send + Sync {
    /// `true` moves on to the next row without betting at the current column.
    fn advance(&self, view: &mut View<'_>) -> Result<bool, LabError>;

    fn bet(&self, view: &mut View<'_>) -> Result<Wager, LabError>;
}

/// Forced row changes: the game leaves row `m` on reaching column `k(m)`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RowSchedule {
    #[serde(default)]
    pub table: BTreeMap<u64, u64>,
    pub default: u64,
}

impl RowSchedule {
    pub fn constant(k: u64) -> Self {
        RowSchedule {
            table: BTreeMap::new(),
            default: k,
        }
    }

    pub fn at(&self, row: u64) -> u64 {
        self.table.get(&row).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    /// Number of decisions (bets or row changes).
    pub steps: usize,
    #[serde(with = "rational::serde_rational")]
    pub start_capital: Rational,
    #[serde(default)]
    pub k_schedule: Option<RowSchedule>,
    /// Stop on entering this row.
    #[serde(default)]
    pub stop_row: Option<u64>,
}

impl GameConfig {
    pub fn new(steps: usize, start_capital: Rational) -> Self {
        GameConfig {
            steps,
            start_capital,
            k_schedule: None,
            stop_row: None,
        }
    }
}

/// One bet as it happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bet {
    pub position: Position,
    pub wager: Wager,
    pub bit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameRecord {
    /// Capital after each decision, starting with the initial capital.
    pub trajectory: Trajectory,
    pub bets: Vec<Bet>,
    pub final_position: Position,
}

impl GameRecord {
    pub fn final_capital(&self) -> &Rational {
        self.trajectory.values.last().expect("trajectory starts with the initial capital")
    }

    /// Capital after every bet placed on a position before `t`.
    pub fn capital_before(&self, t: Position, start: &Rational) -> Rational {
        let mut c = start.clone();
        for b in self.bets.iter().take_while(|b| b.position < t) {
            if b.bit == b.wager.guess {
                c += &b.wager.stake;
            } else {
                c -= &b.wager.stake;
            }
        }
        c
    }
}

/// Plays the game against `source`.
pub fn run_game(
    strategy: &dyn RowStrategy,
    source: &mut dyn BitSource,
    config: &GameConfig,
) -> Result<GameRecord, LabError> {
    if config.steps == 0 {
        return Err(LabError::NoSteps);
    }
    if config.start_capital.is_negative() {
        return Err(LabError::NegativeCapital);
    }
    let mut seen: BTreeMap<Position, bool> = BTreeMap::new();
    let mut capital = config.start_capital.clone();
    let mut values = vec![capital.clone()];
    let mut bets = Vec::new();
    let (mut row, mut col) = (0u64, 0u64);
    for _ in 0..config.steps {
        if config.stop_row == Some(row) {
            break;
        }
        let mut read = |p: Position| *seen.entry(p).or_insert_with(|| source.bit(p));
        let forced = config.k_schedule.as_ref().is_some_and(|k| col >= k.at(row));
        let moves_on = forced || {
            let mut view = View {
                row,
                col,
                capital: &capital,
                bits: &mut read,
            };
            strategy.advance(&mut view)?
        };
        if moves_on {
            row += 1;
            col = 0;
        } else {
            let wager = {
                let mut view = View {
                    row,
                    col,
                    capital: &capital,
                    bits: &mut read,
                };
                strategy.bet(&mut view)?
            };
            if wager.stake.is_negative() || wager.stake > capital {
                return Err(LabError::StakeExceedsCapital {
                    at: Position::new(row, col),
                    stake: wager.stake,
                    capital,
                });
            }
            let position = Position::new(row, col);
            let bit = read(position);
            if bit == wager.guess {
                capital += &wager.stake;
            } else {
                capital -= &wager.stake;
            }
            bets.push(Bet {
                position,
                wager,
                bit,
            });
            col += 1;
        }
        values.push(capital.clone());
    }
    Ok(GameRecord {
        trajectory: Trajectory {
            sample: seen.into_iter().collect::<BitAssignment>(),
            values,
            stops: Vec::new(),
        },
        bets,
        final_position: Position::new(row, col),
    })
}

/// Tabulates the game as a martingale at lexicographic times over the window
/// of `rows` rows and `cols` columns: the level at `t` is the capital after
/// all bets on positions before `t`. The game is forced to leave each row at
/// column `cols` and stops at row `rows`.
pub fn materialize_game(
    strategy: &dyn RowStrategy,
    start_capital: &Rational,
    rows: u64,
    cols: u64,
    support_cap: usize,
) -> Result<MartingaleSpec, LabError> {
    let window: Vec<Position> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| Position::new(r, c)))
        .collect();
    if window.len() > support_cap {
        return Err(LabError::Bitspace(BitspaceError::SupportCap {
            needed: window.len(),
            cap: support_cap,
        }));
    }
    let mut times: Vec<Position> = window.clone();
    times.push(Position::new(rows, 0));
    let config = GameConfig {
        steps: (rows * (cols + 1)) as usize + 1,
        start_capital: start_capital.clone(),
        k_schedule: Some(RowSchedule::constant(cols)),
        stop_row: Some(rows),
    };
    let mut tables = vec![Vec::with_capacity(1 << window.len()); times.len()];
    for pattern in 0..1usize << window.len() {
        let mut omega = BitAssignment::from_pattern(&window, pattern);
        let record = run_game(strategy, &mut omega, &config)?;
        for (table, &t) in tables.iter_mut().zip(&times) {
            table.push(record.capital_before(t, start_capital));
        }
    }
    let levels = tables
        .into_iter()
        .map(|t| CylinderFunction::new(window.clone(), t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MartingaleSpec {
        chain: TimeChain::Lex(times),
        levels,
        nonneg: true,
        growth_bound: None,
    })
}

/// Never bets.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroStake;

impl RowStrategy for ZeroStake {
    fn advance(&self, _: &mut View<'_>) -> Result<bool, LabError> {
        Ok(false)
    }

    fn bet(&self, _: &mut View<'_>) -> Result<Wager, LabError> {
        Ok(Wager::none())
    }
}

/// Stays on row 0 and stakes everything on each bit being 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllInOnZero;

impl RowStrategy for AllInOnZero {
    fn advance(&self, _: &mut View<'_>) -> Result<bool, LabError> {
        Ok(false)
    }

    fn bet(&self, view: &mut View<'_>) -> Result<Wager, LabError> {
        Ok(Wager {
            stake: view.capital().clone(),
            guess: false,
        })
    }
}

/// Bets that bit `(m, n)` repeats bit `(m-1, n)` of the oracle row above,
/// staking the fraction `fractions(m)` of current capital. Row 0 is skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCopy {
    fractions: Vec<Rational>,
    tail: Rational,
}

impl OracleCopy {
    /// `fractions[m]` for row `m`, then `tail` for all later rows. Each must
    /// lie in `[0, 1]`.
    pub fn new(fractions: Vec<Rational>, tail: Rational) -> Result<Self, LabError> {
        let ok = |f: &Rational| !f.is_negative() && *f <= Rational::from_integer(1.into());
        if let Some(bad) = fractions.iter().chain([&tail]).find(|f| !ok(f)) {
            return Err(LabError::BadFraction(bad.clone()));
        }
        Ok(OracleCopy { fractions, tail })
    }

    fn fraction(&self, row: u64) -> &Rational {
        self.fractions.get(row as usize).unwrap_or(&self.tail)
    }
}

impl RowStrategy for OracleCopy {
    fn advance(&self, view: &mut View<'_>) -> Result<bool, LabError> {
        Ok(view.row() == 0)
    }

    fn bet(&self, view: &mut View<'_>) -> Result<Wager, LabError> {
        let guess = view.bit(Position::new(view.row() - 1, view.col()))?;
        Ok(Wager {
            stake: view.capital() * self.fraction(view.row()),
            guess,
        })
    }
}

/// A pseudo-random but deterministic strategy: every decision is a hash of
/// the seed, the current position and the visible bits of the current row
/// and the row above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedStrategy {
    pub seed: u64,
    /// How many columns of the row above are consulted.
    pub lookback: u64,
}

impl HashedStrategy {
    fn key(&self, view: &mut View<'_>, salt: u64) -> Result<u64, LabError> {
        let (row, col) = (view.row(), view.col());
        let mut h = mix64(self.seed ^ salt) ^ mix64(row << 32 | col);
        for c in 0..col {
            h = mix64(h ^ u64::from(view.bit(Position::new(row, c))?) ^ c << 1);
        }
        if row > 0 {
            for c in 0..self.lookback {
                h = mix64(h ^ u64::from(view.bit(Position::new(row - 1, c))?) << 7 ^ c << 9);
            }
        }
        Ok(h)
    }
}

impl RowStrategy for HashedStrategy {
    fn advance(&self, view: &mut View<'_>) -> Result<bool, LabError> {
        Ok(view.col() > 0 && self.key(view, 1)? % 4 == 0)
    }

    fn bet(&self, view: &mut View<'_>) -> Result<Wager, LabError> {
        let h = self.key(view, 2)?;
        let quarters = (h % 5) as i64;
        Ok(Wager {
            stake: view.capital() * Rational::new(quarters.into(), 4.into()),
            guess: (h >> 8) & 1 == 1,
        })
    }
}

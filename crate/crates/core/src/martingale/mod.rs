//! Martingales over bit arrays: specification, exact verification, and the
//! constructive transforms between characterizations of convergence.
//!
//! A [`MartingaleSpec`] is a finite run of levels `M_0, M_1, …` together
//! with the chain of pasts they are adapted to. Three chains are supported:
//! row times (`M_n` sees rows `< n`), lexicographic times (`M_{m,n}` sees
//! positions `< (m,n)`) and explicit increasing chains of position sets.
//!
//! Lexicographic chains store only the times that were materialized. Any
//! time `t` between two stored times `s < u` is determined by the martingale
//! identity as `E_t(M_u)`, see [`MartingaleSpec::level_at`].

mod array;
mod oracle;
mod trajectory;
mod transforms;

pub use array::{extend_to_array, restrict_rows, stopping_row_bound};
pub use oracle::{convert_oracle_martingale, OracleMartingale, SavingsCheck};
pub use trajectory::{
    crossing_times, savings_path, upcrossing_path, CrossingTimes, Extended, StopKind, StopMark,
    Trajectory,
};
pub use transforms::{repair, savings_transform, upcrossing_transform, Repaired};

use crate::bitspace::{BitspaceError, CylinderFunction, Position, PositionSet, DEFAULT_SUPPORT_CAP};
use crate::rational::{self, Rational};
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

pub const DEFAULT_HORIZON: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Bitspace(#[from] BitspaceError),
    #[error("upcrossing band needs a < b, got a = {a}, b = {b}")]
    EmptyBand { a: Rational, b: Rational },
    #[error("level {index} has a negative value {min}")]
    Negative { index: usize, min: Rational },
    #[error("level {index} reads {position}, outside its past")]
    NotAdapted { index: usize, position: Position },
    #[error("input is not a martingale: identity fails at level {index}")]
    NotAMartingale { index: usize },
    #[error("capital is zero at doubling time {step}; the savings ratio is undefined")]
    ZeroCapitalAtDoubling { step: usize },
    #[error("operation needs a {expected} chain")]
    WrongChain { expected: &'static str },
    #[error("lexicographic times must be strictly increasing (at index {index})")]
    TimesNotIncreasing { index: usize },
    #[error("time {time} lies past the last materialized level")]
    BeyondHorizon { time: Position },
    #[error("savings property fails: N_{later} < N_{earlier}/2 somewhere")]
    SavingsPropertyViolated { earlier: usize, later: usize },
    #[error("chain has {sets} sets for {levels} levels")]
    ChainTooShort { sets: usize, levels: usize },
    #[error("row bound k({row}) = {k} does not stabilize the row")]
    RowBoundNotCertified { row: u64, k: u64 },
    #[error("invalid oracle martingale: {0}")]
    InvalidOracle(String),
    #[error("empty martingale: no levels")]
    Empty,
}

/// Materialization limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub horizon: usize,
    pub support_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            horizon: DEFAULT_HORIZON,
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }
}

/// Index structure of a martingale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeChain {
    /// Level `n` is adapted to rows `0..n`.
    Rows,
    /// Level `i` sits at time `times[i]` and is adapted to positions below it.
    Lex(Vec<Position>),
    /// Level `i` is adapted to `sets[i]`; sets must be increasing.
    Sets(Vec<PositionSet>),
}

impl TimeChain {
    fn name(&self) -> &'static str {
        match self {
            TimeChain::Rows => "rows",
            TimeChain::Lex(_) => "lex",
            TimeChain::Sets(_) => "sets",
        }
    }
}

/// A finite run of a martingale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct MartingaleSpec {
    pub chain: TimeChain,
    pub levels: Vec<CylinderFunction>,
    pub nonneg: bool,
    /// `d(i)` with `|levels[i]| <= d(i)`.
    pub growth_bound: Option<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawChain {
    Named(String),
    Sets { sets: Vec<PositionSet> },
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    chain: RawChain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    times: Option<Vec<Position>>,
    levels: Vec<CylinderFunction>,
    #[serde(default)]
    nonneg: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    growth_bound: Option<Vec<String>>,
}

impl TryFrom<RawSpec> for MartingaleSpec {
    type Error = String;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        let chain = match (raw.chain, raw.times) {
            (RawChain::Named(n), None) if n == "rows" => TimeChain::Rows,
            (RawChain::Named(n), Some(times)) if n == "lex" => TimeChain::Lex(times),
            (RawChain::Named(n), None) if n == "lex" => {
                return Err("a \"lex\" chain needs a \"times\" array".into())
            }
            (RawChain::Sets { sets }, None) => TimeChain::Sets(sets),
            (RawChain::Named(n), _) => return Err(format!("unknown chain {n:?}")),
            (_, Some(_)) => return Err("\"times\" is only valid for a \"lex\" chain".into()),
        };
        let growth_bound = raw
            .growth_bound
            .map(|v| {
                v.iter()
                    .map(|s| rational::parse_rational(s).map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        Ok(MartingaleSpec {
            chain,
            levels: raw.levels,
            nonneg: raw.nonneg,
            growth_bound,
        })
    }
}

impl From<MartingaleSpec> for RawSpec {
    fn from(spec: MartingaleSpec) -> Self {
        let (chain, times) = match spec.chain {
            TimeChain::Rows => (RawChain::Named("rows".into()), None),
            TimeChain::Lex(t) => (RawChain::Named("lex".into()), Some(t)),
            TimeChain::Sets(sets) => (RawChain::Sets { sets }, None),
        };
        RawSpec {
            chain,
            times,
            levels: spec.levels,
            nonneg: spec.nonneg,
            growth_bound: spec
                .growth_bound
                .map(|v| v.iter().map(rational::format_rational).collect()),
        }
    }
}

/// Outcome of [`verify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Verified { levels_checked: usize },
    Failed { index: usize, failure: Failure },
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Failure {
    /// The level reads a position outside its past.
    NotAdapted { position: Position },
    Negative {
        #[serde(with = "rational::serde_rational")]
        min: Rational,
    },
    GrowthBoundExceeded {
        #[serde(with = "rational::serde_rational")]
        bound: Rational,
        #[serde(with = "rational::serde_rational")]
        sup: Rational,
    },
    /// `levels[i] - E_{D_i}(levels[i+1])`, nonzero.
    NotMartingale { discrepancy: CylinderFunction },
    /// `D_i ⊄ D_{i+1}` on the positions the levels touch.
    ChainNotMonotone,
    TimesNotIncreasing,
}

impl MartingaleSpec {
    pub fn rows(levels: Vec<CylinderFunction>) -> Self {
        let nonneg = levels.iter().all(|f| !f.min_value().is_negative());
        MartingaleSpec {
            chain: TimeChain::Rows,
            levels,
            nonneg,
            growth_bound: None,
        }
    }

    pub fn lex(times: Vec<Position>, levels: Vec<CylinderFunction>) -> Self {
        let nonneg = levels.iter().all(|f| !f.min_value().is_negative());
        MartingaleSpec {
            chain: TimeChain::Lex(times),
            levels,
            nonneg,
            growth_bound: None,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// The past `D_i` of level `i`.
    pub fn past(&self, i: usize) -> Result<PositionSet, EngineError> {
        match &self.chain {
            TimeChain::Rows => Ok(PositionSet::RowPrefix(i as u64)),
            TimeChain::Lex(times) => times
                .get(i)
                .map(|&t| PositionSet::LexPrefix(t))
                .ok_or(EngineError::ChainTooShort {
                    sets: times.len(),
                    levels: self.levels.len(),
                }),
            TimeChain::Sets(sets) => sets.get(i).cloned().ok_or(EngineError::ChainTooShort {
                sets: sets.len(),
                levels: self.levels.len(),
            }),
        }
    }

    /// Lexicographic times of a lex chain.
    pub fn times(&self) -> Result<&[Position], EngineError> {
        match &self.chain {
            TimeChain::Lex(t) => Ok(t),
            _ => Err(EngineError::WrongChain { expected: "lex" }),
        }
    }

    /// Level at an arbitrary lexicographic time up to the last stored one.
    ///
    /// Unstored times are filled in as `E_t(M_u)` with `u` the next stored time.
    pub fn level_at(&self, t: Position) -> Result<CylinderFunction, EngineError> {
        let times = self.times()?;
        let i = times.partition_point(|&s| s < t);
        match times.get(i) {
            Some(&s) if s == t => Ok(self.levels[i].clone()),
            Some(_) => Ok(self.levels[i].cond_expectation(&PositionSet::LexPrefix(t))),
            None => Err(EngineError::BeyondHorizon { time: t }),
        }
    }

    /// Values of every level on one sample.
    pub fn path_on(&self, bit: impl Fn(Position) -> bool) -> Vec<Rational> {
        self.levels.iter().map(|f| f.eval_with(&bit).clone()).collect()
    }
}

/// Exact check of adaptedness, sign, growth bound and the martingale
/// identity `E_{D_i}(M_{i+1}) = M_i` on levels `0..=horizon`.
pub fn verify(spec: &MartingaleSpec, limits: Limits) -> Result<Verdict, EngineError> {
    let n = spec.levels.len().min(limits.horizon.saturating_add(1));
    if n == 0 {
        return Err(EngineError::Empty);
    }
    for f in &spec.levels[..n] {
        if f.support().len() > limits.support_cap {
            return Err(BitspaceError::SupportCap {
                needed: f.support().len(),
                cap: limits.support_cap,
            }
            .into());
        }
    }
    let pasts = (0..n).map(|i| spec.past(i)).collect::<Result<Vec<_>, _>>()?;
    let window: Vec<Position> = {
        let mut w: Vec<Position> = spec.levels[..n]
            .iter()
            .flat_map(|f| f.support().iter().copied())
            .collect();
        w.sort_unstable();
        w.dedup();
        w
    };
    let fail = |index, failure| Ok(Verdict::Failed { index, failure });

    for i in 0..n {
        let f = &spec.levels[i];
        if let TimeChain::Lex(times) = &spec.chain {
            if i + 1 < n && times[i] >= times[i + 1] {
                return fail(i, Failure::TimesNotIncreasing);
            }
        }
        if i + 1 < n && !pasts[i].is_subset_on(&pasts[i + 1], &window) {
            return fail(i, Failure::ChainNotMonotone);
        }
        if let Some(&p) = f.support().iter().find(|p| !pasts[i].contains(p)) {
            return fail(i, Failure::NotAdapted { position: p });
        }
        if spec.nonneg && f.min_value().is_negative() {
            return fail(
                i,
                Failure::Negative {
                    min: f.min_value().clone(),
                },
            );
        }
        if let Some(bound) = spec.growth_bound.as_ref().and_then(|d| d.get(i)) {
            let sup = f.sup_norm();
            if &sup > bound {
                return fail(
                    i,
                    Failure::GrowthBoundExceeded {
                        bound: bound.clone(),
                        sup,
                    },
                );
            }
        }
        if i + 1 < n {
            let projected = spec.levels[i + 1].cond_expectation(&pasts[i]);
            if &projected != f {
                let discrepancy = f.zip_with(&projected, usize::MAX >> 1, |x, y| x - y)?;
                return fail(i, Failure::NotMartingale { discrepancy });
            }
        }
    }
    Ok(Verdict::Verified { levels_checked: n })
}

/// Means of all levels, which a martingale keeps constant.
pub fn level_means(spec: &MartingaleSpec) -> Vec<Rational> {
    spec.levels.iter().map(|f| f.expectation()).collect()
}

pub(crate) fn check_nonneg(spec: &MartingaleSpec) -> Result<(), EngineError> {
    for (index, f) in spec.levels.iter().enumerate() {
        if f.min_value() < &Rational::zero() {
            return Err(EngineError::Negative {
                index,
                min: f.min_value().clone(),
            });
        }
    }
    Ok(())
}

pub(crate) fn expect_chain(spec: &MartingaleSpec, expected: &'static str) -> Result<(), EngineError> {
    if spec.chain.name() == expected {
        Ok(())
    } else {
        Err(EngineError::WrongChain { expected })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn w00() -> CylinderFunction {
        CylinderFunction::bit(Position::new(0, 0))
    }

    #[test]
    fn verify_accepts_fair_bet() {
        let m = MartingaleSpec::rows(vec![CylinderFunction::constant(rat(1, 2)), w00()]);
        assert!(verify(&m, Limits::default()).unwrap().is_verified());
    }

    #[test]
    fn verify_reports_discrepancy() {
        let m1 = w00().add(&CylinderFunction::constant(int(1))).unwrap();
        let m = MartingaleSpec::rows(vec![CylinderFunction::constant(rat(1, 2)), m1]);
        match verify(&m, Limits::default()).unwrap() {
            Verdict::Failed {
                index: 0,
                failure: Failure::NotMartingale { discrepancy },
            } => assert_eq!(discrepancy, CylinderFunction::constant(int(-1))),
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn constants_are_martingales() {
        let c = CylinderFunction::constant(rat(7, 3));
        let m = MartingaleSpec::rows(vec![c.clone(), c.clone(), c]);
        assert!(verify(&m, Limits::default()).unwrap().is_verified());
    }

    #[test]
    fn verify_flags_non_adapted_level() {
        // M_1 may only read row 0.
        let m = MartingaleSpec::rows(vec![
            CylinderFunction::constant(rat(1, 2)),
            CylinderFunction::bit(Position::new(1, 0)),
        ]);
        assert!(matches!(
            verify(&m, Limits::default()).unwrap(),
            Verdict::Failed {
                index: 1,
                failure: Failure::NotAdapted { .. }
            }
        ));
    }

    #[test]
    fn verify_enforces_support_cap() {
        let f = CylinderFunction::from_fn((0..6).map(|c| Position::new(0, c)).collect(), 20, |a| {
            int(a.iter().filter(|(_, b)| *b).count() as i64)
        })
        .unwrap();
        let m = MartingaleSpec::rows(vec![CylinderFunction::constant(int(3)), f]);
        let limits = Limits {
            horizon: 8,
            support_cap: 4,
        };
        assert!(matches!(
            verify(&m, limits),
            Err(EngineError::Bitspace(BitspaceError::SupportCap { .. }))
        ));
    }

    #[test]
    fn spec_json_round_trip() {
        let m = MartingaleSpec::lex(
            vec![Position::new(0, 0), Position::new(0, 1)],
            vec![CylinderFunction::constant(rat(1, 2)), w00()],
        );
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains(r#""chain":"lex""#));
        let back: MartingaleSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let sets = r#"{"chain":{"sets":[{"row_prefix":0}]},"levels":[{"support":[],"table":["1/1"]}]}"#;
        let parsed: MartingaleSpec = serde_json::from_str(sets).unwrap();
        assert_eq!(parsed.chain, TimeChain::Sets(vec![PositionSet::RowPrefix(0)]));
        assert!(serde_json::from_str::<MartingaleSpec>(r#"{"chain":"lex","levels":[]}"#).is_err());
    }

    #[test]
    fn level_at_fills_gaps_by_conditioning() {
        // N_{0,0} = 1, N_{1,0} = 2*w00.
        let m = MartingaleSpec::lex(
            vec![Position::new(0, 0), Position::new(1, 0)],
            vec![CylinderFunction::constant(int(1)), w00().scale(&int(2))],
        );
        assert_eq!(m.level_at(Position::new(0, 1)).unwrap(), w00().scale(&int(2)));
        assert_eq!(m.level_at(Position::new(0, 0)).unwrap(), CylinderFunction::constant(int(1)));
        assert!(m.level_at(Position::new(1, 1)).is_err());
    }
}

use super::LabError;
use crate::bitspace::{BitAssignment, Position};
use crate::rng::{mix64, substream};
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Read access to the bits of one sample array.
pub trait BitSource {
    fn bit(&mut self, p: Position) -> bool;
}

impl<F: FnMut(Position) -> bool> BitSource for F {
    fn bit(&mut self, p: Position) -> bool {
        self(p)
    }
}

/// How sample arrays are produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSource {
    /// Independent fair bits.
    Uniform { seed: u64 },
    /// Row 0 is all zeros, the rest fair.
    ZeroFirstRow { seed: u64 },
    /// Fair bits at columns `n < g(m)`, zeros from `g(m)` on, so every row
    /// ends in zeros. Rows missing from `g` use `default`.
    BelowG {
        g: BTreeMap<u64, u64>,
        #[serde(default)]
        default: u64,
        seed: u64,
    },
    /// A fixed bit matrix read from a text file, one row per line of '0'/'1'
    /// characters. Bits past the end of a row or of the file are 0.
    FromFile { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Uniform,
    ZeroFirstRow,
    BelowG,
}

/// A scenario ready to hand out per-sample bit sources.
#[derive(Debug, Clone)]
pub struct Scenario {
    inner: Prepared,
}

#[derive(Debug, Clone)]
enum Prepared {
    Random {
        mode: Mode,
        seed: u64,
        g: Arc<(BTreeMap<u64, u64>, u64)>,
    },
    Fixed(Arc<BitMatrix>),
}

impl ScenarioSource {
    pub fn uniform(seed: u64) -> Self {
        ScenarioSource::Uniform { seed }
    }

    /// Loads any file and freezes the parameters.
    pub fn open(&self) -> Result<Scenario, LabError> {
        let random = |mode, seed, g| Scenario {
            inner: Prepared::Random {
                mode,
                seed,
                g: Arc::new(g),
            },
        };
        Ok(match self {
            ScenarioSource::Uniform { seed } => random(Mode::Uniform, *seed, Default::default()),
            ScenarioSource::ZeroFirstRow { seed } => {
                random(Mode::ZeroFirstRow, *seed, Default::default())
            }
            ScenarioSource::BelowG { g, default, seed } => {
                random(Mode::BelowG, *seed, (g.clone(), *default))
            }
            ScenarioSource::FromFile { path } => Scenario {
                inner: Prepared::Fixed(Arc::new(BitMatrix::read(path)?)),
            },
        })
    }
}

impl Scenario {
    /// Bits of sample number `index`. Fixed scenarios ignore the index.
    pub fn sample(&self, index: u64) -> SampleBits {
        match &self.inner {
            Prepared::Random { mode, seed, g } => SampleBits::Lazy(LazyBits {
                mode: *mode,
                seed: substream(*seed, index).next_u64(),
                g: Arc::clone(g),
                rows: HashMap::new(),
            }),
            Prepared::Fixed(m) => SampleBits::Fixed(Arc::clone(m)),
        }
    }
}

/// Bits of one sample; rows are drawn on first use from their own stream.
#[derive(Debug, Clone)]
pub enum SampleBits {
    Lazy(LazyBits),
    Fixed(Arc<BitMatrix>),
}

#[derive(Debug, Clone)]
pub struct LazyBits {
    mode: Mode,
    seed: u64,
    g: Arc<(BTreeMap<u64, u64>, u64)>,
    rows: HashMap<u64, (ChaCha8Rng, Vec<u64>)>,
}

impl LazyBits {
    fn fair(&mut self, p: Position) -> bool {
        let seed = self.seed;
        let (rng, words) = self
            .rows
            .entry(p.row)
            .or_insert_with(|| (substream(mix64(seed), p.row), Vec::new()));
        let word = (p.col / 64) as usize;
        while words.len() <= word {
            words.push(rng.next_u64());
        }
        (words[word] >> (p.col % 64)) & 1 == 1
    }
}

impl BitSource for SampleBits {
    fn bit(&mut self, p: Position) -> bool {
        match self {
            SampleBits::Fixed(m) => m.get(p),
            SampleBits::Lazy(lazy) => match lazy.mode {
                Mode::Uniform => lazy.fair(p),
                Mode::ZeroFirstRow => p.row != 0 && lazy.fair(p),
                Mode::BelowG => {
                    let (table, default) = &*lazy.g;
                    let g = table.get(&p.row).copied().unwrap_or(*default);
                    p.col < g && lazy.fair(p)
                }
            },
        }
    }
}

/// A finite bit array in row-major text form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitMatrix {
    pub rows: Vec<Vec<bool>>,
}

impl BitMatrix {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            let row = line
                .chars()
                .enumerate()
                .map(|(j, c)| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(LabError::BadScenarioFile(format!(
                        "line {}, column {}: unexpected {other:?}",
                        i + 1,
                        j + 1
                    ))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(BitMatrix { rows })
    }

    pub fn read(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::BadScenarioFile(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, p: Position) -> bool {
        self.rows
            .get(p.row as usize)
            .and_then(|r| r.get(p.col as usize))
            .copied()
            .unwrap_or(false)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.extend(row.iter().map(|&b| if b { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }
}

impl BitSource for BitAssignment {
    /// Unlisted positions read as 0.
    fn bit(&mut self, p: Position) -> bool {
        self.get(&p).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: u64, c: u64) -> Position {
        Position::new(r, c)
    }

    #[test]
    fn samples_are_reproducible_and_lazy() {
        let s = ScenarioSource::uniform(11).open().unwrap();
        let mut a = s.sample(0);
        let mut b = s.sample(0);
        // Reading in different orders gives the same bits.
        let fwd: Vec<bool> = (0..100).map(|c| a.bit(p(3, c))).collect();
        let back: Vec<bool> = (0..100).rev().map(|c| b.bit(p(3, c))).collect();
        assert_eq!(fwd, back.into_iter().rev().collect::<Vec<_>>());
        let mut c = s.sample(1);
        assert_ne!(fwd, (0..100).map(|i| c.bit(p(3, i))).collect::<Vec<_>>());
    }

    #[test]
    fn zero_first_row_and_below_g() {
        let mut z = ScenarioSource::ZeroFirstRow { seed: 1 }.open().unwrap().sample(0);
        assert!((0..200).all(|c| !z.bit(p(0, c))));
        assert!((0..200).any(|c| z.bit(p(1, c))));
        let g = ScenarioSource::BelowG {
            g: BTreeMap::from([(0, 3)]),
            default: 64,
            seed: 2,
        };
        let mut b = g.open().unwrap().sample(5);
        assert!((3..100).all(|c| !b.bit(p(0, c))));
        assert!((64..200).all(|c| !b.bit(p(7, c))));
        assert!((0..64).any(|c| b.bit(p(7, c))));
    }

    #[test]
    fn matrix_text_round_trip() {
        let m = BitMatrix::parse("0110\n1\n\n01\n").unwrap();
        assert!(m.get(p(0, 1)) && !m.get(p(0, 3)) && m.get(p(1, 0)) && !m.get(p(2, 0)));
        assert!(!m.get(p(9, 9)));
        assert_eq!(BitMatrix::parse(&m.to_text()).unwrap(), m);
        assert!(BitMatrix::parse("01x").is_err());
    }
}

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{Color, Instance};
use crate::error::{Error, Result};

/// Color frequencies of an initial configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorCensus {
    counts: BTreeMap<Color, u64>,
}

impl ColorCensus {
    pub fn from_colors(colors: &[Color]) -> Self {
        let mut counts = BTreeMap::new();
        for &c in colors {
            *counts.entry(c).or_insert(0) += 1;
        }
        Self { counts }
    }

    pub fn from_instance(instance: &Instance) -> Self {
        Self::from_colors(&instance.colors)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count(&self, color: Color) -> u64 {
        self.counts.get(&color).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<Color, u64> {
        &self.counts
    }

    /// The colors attaining the maximum supporter count.
    pub fn plurality_set(&self) -> Result<BTreeSet<Color>> {
        let max = self
            .counts
            .values()
            .max()
            .copied()
            .ok_or(Error::EmptyCensus)?;
        Ok(self
            .counts
            .iter()
            .filter(|(_, &n)| n == max)
            .map(|(&c, _)| c)
            .collect())
    }
}

/// See [`ColorCensus::plurality_set`].
pub fn plurality_set(census: &ColorCensus) -> Result<BTreeSet<Color>> {
    census.plurality_set()
}

/// Independent oracle for the label tournament: the knockout winner over
/// true supporter counts, with exact ties resolved toward the minus (binary
/// 0) side. Returns the winning label value, or `None` when no label has any
/// supporters.
///
/// The protocol lands exactly tied duels on a scheduler-dependent side, so
/// the oracle pins the converged winner only on instances whose duels are
/// all tie-free; on tied instances any winner it could return is
/// count-equivalent, and tests fall back to plurality-set membership.
pub fn tournament_winner(counts: &BTreeMap<u16, u64>, m: u8) -> Option<u16> {
    fn go(counts: &BTreeMap<u16, u64>, prefix: u16, depth: u8, m: u8) -> Option<u16> {
        if depth == m {
            return (counts.get(&prefix).copied().unwrap_or(0) > 0).then_some(prefix);
        }
        let minus = go(counts, prefix << 1, depth + 1, m);
        let plus = go(counts, (prefix << 1) | 1, depth + 1, m);
        let count = |l: Option<u16>| l.map(|v| counts.get(&v).copied().unwrap_or(0)).unwrap_or(0);
        if count(plus) > count(minus) {
            plus
        } else {
            minus.or(plus)
        }
    }
    go(counts, 0, 0, m)
}

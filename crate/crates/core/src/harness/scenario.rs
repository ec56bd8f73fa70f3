//! Scenario identifiers such as `A-2,C-12` or `A-234,SC-1234`.
//!
//! The part before the comma names the attacked taps, the part after it the
//! taps the receiver combines and whether it combines them naively (`C`) or
//! smartly (`SC`). Tap numbers are 1-based in the text and 0-based in
//! [`Scenario`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Combining mode named in a scenario id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CombineMode {
    /// `C`: maximal-ratio combining of the listed taps.
    Naive,
    /// `SC`: smart combining of the listed taps.
    Smart,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scenario {
    /// 0-based attacked taps; empty for `A-none`.
    pub attacked: BTreeSet<usize>,
    pub mode: CombineMode,
    /// 0-based combined taps, never empty.
    pub combined: BTreeSet<usize>,
}

fn fail(id: &str, reason: impl Into<String>) -> Error {
    Error::Scenario {
        id: id.to_string(),
        reason: reason.into(),
    }
}

fn parse_taps(id: &str, digits: &str) -> Result<BTreeSet<usize>> {
    if digits.is_empty() {
        return Err(fail(id, "empty tap list"));
    }
    let mut taps = BTreeSet::new();
    for ch in digits.chars() {
        let d = ch
            .to_digit(10)
            .ok_or_else(|| fail(id, format!("`{ch}` is not a tap number")))?;
        if d == 0 {
            return Err(fail(id, "tap numbers start at 1"));
        }
        if !taps.insert(d as usize - 1) {
            return Err(fail(id, format!("tap {d} listed twice")));
        }
    }
    Ok(taps)
}

impl Scenario {
    /// Parses an id without a channel in mind; see [`parse_scenario`] for
    /// the tap-count check.
    pub fn parse(id: &str) -> Result<Self> {
        let (attack, combine) = id
            .split_once(',')
            .ok_or_else(|| fail(id, "expected `A-<taps>,<C|SC>-<taps>`"))?;
        let combine = combine.strip_prefix(' ').unwrap_or(combine);
        let attack = attack
            .strip_prefix("A-")
            .ok_or_else(|| fail(id, "attack part must start with `A-`"))?;
        let attacked = if attack == "none" {
            BTreeSet::new()
        } else {
            parse_taps(id, attack)?
        };
        if attacked.contains(&0) {
            return Err(fail(id, "tap 1 is the main tap and cannot be attacked"));
        }
        let (mode, taps) = if let Some(rest) = combine.strip_prefix("SC-") {
            (CombineMode::Smart, rest)
        } else if let Some(rest) = combine.strip_prefix("C-") {
            (CombineMode::Naive, rest)
        } else {
            return Err(fail(id, "combining part must start with `C-` or `SC-`"));
        };
        Ok(Self {
            attacked,
            mode,
            combined: parse_taps(id, taps)?,
        })
    }

    /// Largest 0-based tap index mentioned anywhere in the id.
    pub fn max_tap(&self) -> usize {
        self.attacked.iter().chain(&self.combined).copied().max().unwrap_or(0)
    }

    /// Canonical text form: no space after the comma.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

fn write_taps(f: &mut fmt::Formatter<'_>, taps: &BTreeSet<usize>) -> fmt::Result {
    taps.iter().try_for_each(|t| write!(f, "{}", t + 1))
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("A-")?;
        if self.attacked.is_empty() {
            f.write_str("none")?;
        } else {
            write_taps(f, &self.attacked)?;
        }
        f.write_str(match self.mode {
            CombineMode::Naive => ",C-",
            CombineMode::Smart => ",SC-",
        })?;
        write_taps(f, &self.combined)
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::parse(s)
    }
}

/// Parses `id` and checks every tap exists in a `num_taps`-tap channel.
pub fn parse_scenario(id: &str, num_taps: usize) -> Result<Scenario> {
    let scenario = Scenario::parse(id)?;
    if scenario.max_tap() >= num_taps {
        return Err(fail(
            id,
            format!("tap {} exceeds the {num_taps}-tap channel", scenario.max_tap() + 1),
        ));
    }
    Ok(scenario)
}

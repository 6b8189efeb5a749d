//! Seeded counterexample hunts.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::games::{rural_hospital_check, scan_firms_game, GameConfig, RuralWitness, ScanViolation, StableRule};
use crate::generate::{random_market, Family};
use crate::market::Market;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// A market, with some firm violating LAD, whose stable matchings give
    /// some agent different numbers of partners.
    NonLadRuralViolation,
    /// A market and an equilibrium of the firms-only game whose outcome is
    /// unstable under the true market.
    FirmsStrategicStableFailure,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::NonLadRuralViolation => "non-lad-rural-violation",
            Target::FirmsStrategicStableFailure => "firms-strategic-stable-failure",
        })
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non-lad-rural-violation" => Ok(Target::NonLadRuralViolation),
            "firms-strategic-stable-failure" => Ok(Target::FirmsStrategicStableFailure),
            _ => Err(Error::Input(format!("unknown search target {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finding {
    Rural(RuralWitness),
    FirmsGame { rule: StableRule, violation: ScanViolation },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    /// Markets examined, including the one that was found.
    pub examined: usize,
    pub found: Option<(Market, Finding)>,
}

/// Draw markets from a stream seeded by `seed` until the target is hit or
/// `budget` markets have been examined.
pub fn search(target: Target, seed: u64, budget: usize) -> Result<SearchResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for examined in 1..=budget {
        let market_seed: u64 = rng.gen();
        if let Some(found) = examine(target, market_seed)? {
            return Ok(SearchResult {
                examined,
                found: Some(found),
            });
        }
    }
    Ok(SearchResult {
        examined: budget,
        found: None,
    })
}

fn examine(target: Target, market_seed: u64) -> Result<Option<(Market, Finding)>> {
    match target {
        Target::NonLadRuralViolation => {
            let mkt = random_market(market_seed, 3, 2, Family::PathIndependent)?;
            let report = rural_hospital_check(&mkt)?;
            if report.lad {
                return Ok(None);
            }
            Ok(report.witness.map(|w| (mkt, Finding::Rural(w))))
        }
        Target::FirmsStrategicStableFailure => {
            let mkt = random_market(market_seed, 3, 2, Family::Mixed)?;
            for rule in [StableRule::FirmOptimal, StableRule::WorkerOptimal] {
                let scan = scan_firms_game(&mkt, rule, &GameConfig::default())?;
                if let Some(violation) = scan.violations.into_iter().next() {
                    return Ok(Some((mkt, Finding::FirmsGame { rule, violation })));
                }
            }
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_names_roundtrip() {
        for t in [Target::NonLadRuralViolation, Target::FirmsStrategicStableFailure] {
            assert_eq!(t.to_string().parse::<Target>().unwrap(), t);
        }
    }

    #[test]
    fn search_is_deterministic() {
        let a = search(Target::NonLadRuralViolation, 5, 300).unwrap();
        let b = search(Target::NonLadRuralViolation, 5, 300).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_budget_finds_nothing() {
        let r = search(Target::NonLadRuralViolation, 0, 0).unwrap();
        assert_eq!(r.examined, 0);
        assert!(r.found.is_none());
    }
}

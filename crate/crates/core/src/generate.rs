//! Seeded random markets.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::choice::{admissible_family, ChoiceFunction, ENUMERATION_BOUND};
use crate::error::{capacity, Error, Result};
use crate::market::{Market, WorkerPreference};
use crate::workerset::MAX_WORKERS;

/// Largest firm count for the path-independent and mixed families.
pub const PATH_INDEPENDENT_FIRM_BOUND: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Responsive,
    /// Uniform over all substitutable and consistent choice functions.
    PathIndependent,
    /// Each firm independently responsive or path-independent with equal odds.
    Mixed,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Responsive => "responsive",
            Family::PathIndependent => "path-independent",
            Family::Mixed => "mixed",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "responsive" => Ok(Family::Responsive),
            "path-independent" => Ok(Family::PathIndependent),
            "mixed" => Ok(Family::Mixed),
            _ => Err(Error::Input(format!("unknown family {s:?}"))),
        }
    }
}

fn responsive(rng: &mut ChaCha8Rng, nw: usize) -> ChoiceFunction {
    let mut ranking: Vec<usize> = (0..nw).collect();
    ranking.shuffle(rng);
    let len = if nw == 0 { 0 } else { rng.gen_range(1..=nw) };
    ranking.truncate(len);
    let quota = rng.gen_range(1..=nw.max(1));
    ChoiceFunction::responsive(ranking, quota, nw).expect("valid responsive draw")
}

/// A list drawn uniformly over all strict lists on subsets of the firms.
fn worker_list(rng: &mut ChaCha8Rng, nf: usize) -> WorkerPreference {
    // Number of lists of each length k: nf! / (nf - k)!.
    let mut counts = vec![1u128; nf + 1];
    for k in 1..=nf {
        counts[k] = counts[k - 1] * (nf - k + 1) as u128;
    }
    let total: u128 = counts.iter().sum();
    let mut pick = rng.gen_range(0..total);
    let mut len = 0;
    while pick >= counts[len] {
        pick -= counts[len];
        len += 1;
    }
    let mut firms: Vec<usize> = (0..nf).collect();
    let (chosen, _) = firms.partial_shuffle(rng, len);
    WorkerPreference::new(chosen.to_vec()).expect("distinct firms")
}

/// A market drawn deterministically from `seed`, with agents named `w1..`
/// and `f1..`. Responsive firms rank a random nonempty prefix of a random
/// permutation of the workers with a uniform quota in `1..=nw`.
pub fn random_market(seed: u64, nw: usize, nf: usize, family: Family) -> Result<Market> {
    capacity("worker set", nw, MAX_WORKERS)?;
    if family != Family::Responsive {
        capacity("worker set", nw, ENUMERATION_BOUND)?;
        capacity("firm set", nf, PATH_INDEPENDENT_FIRM_BOUND)?;
    }
    let family_table = match family {
        Family::Responsive => &[][..],
        _ => admissible_family(nw, true)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let choices = (0..nf)
        .map(|_| {
            let pi = match family {
                Family::Responsive => false,
                Family::PathIndependent => true,
                Family::Mixed => rng.gen_bool(0.5),
            };
            if pi {
                family_table[rng.gen_range(0..family_table.len())].clone()
            } else {
                responsive(&mut rng, nw)
            }
        })
        .collect();
    let preferences = (0..nw).map(|_| worker_list(&mut rng, nf)).collect();
    Market::with_default_names(preferences, choices)
}

/// `count` mixed-family markets with between one and `max_workers` workers
/// and one and `max_firms` firms, all derived from `seed`.
pub fn seeded_suite(seed: u64, count: usize, max_workers: usize, max_firms: usize) -> Result<Vec<Market>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let nw = rng.gen_range(1..=max_workers.max(1));
            let nf = rng.gen_range(1..=max_firms.max(1));
            random_market(rng.gen(), nw, nf, Family::Mixed)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        for family in [Family::Responsive, Family::PathIndependent, Family::Mixed] {
            assert_eq!(
                random_market(9, 3, 2, family).unwrap(),
                random_market(9, 3, 2, family).unwrap()
            );
        }
        assert_ne!(
            random_market(1, 4, 3, Family::Mixed).unwrap(),
            random_market(2, 4, 3, Family::Mixed).unwrap()
        );
    }

    #[test]
    fn responsive_draws_pass_every_checker() {
        for seed in 0..200 {
            let mkt = random_market(seed, 4, 3, Family::Responsive).unwrap();
            for c in mkt.choices() {
                c.check_admissible(true).unwrap();
                c.check_path_independent().unwrap();
                c.check_lad().unwrap();
            }
        }
    }

    #[test]
    fn path_independent_draws_are_admissible_and_sometimes_not_lad() {
        let mut non_lad = 0;
        for seed in 0..200 {
            let mkt = random_market(seed, 3, 2, Family::PathIndependent).unwrap();
            for c in mkt.choices() {
                c.check_admissible(true).unwrap();
                non_lad += usize::from(c.check_lad().is_err());
            }
        }
        assert!(non_lad > 0);
    }

    #[test]
    fn capacity_errors() {
        assert!(random_market(0, 5, 1, Family::PathIndependent).is_err());
        assert!(random_market(0, 2, 4, Family::Mixed).is_err());
        assert!(random_market(0, 13, 1, Family::Responsive).is_err());
        assert!(random_market(0, 6, 5, Family::Responsive).is_ok());
    }

    #[test]
    fn worker_lists_cover_every_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = [0usize; 4];
        for _ in 0..2000 {
            seen[worker_list(&mut rng, 3).acceptable().len()] += 1;
        }
        // Expected shares 1, 3, 6, 6 out of 16.
        assert!(seen.iter().all(|&n| n > 0));
        assert!(seen[3] > seen[1] && seen[2] > seen[0]);
    }

    #[test]
    fn suite_sizes() {
        let suite = seeded_suite(1, 60, 4, 3).unwrap();
        assert_eq!(suite, seeded_suite(1, 60, 4, 3).unwrap());
        assert!(suite
            .iter()
            .all(|m| (1..=4).contains(&m.workers().len()) && (1..=3).contains(&m.firms().len())));
        assert!(suite.iter().any(|m| m.workers().len() == 4 && m.firms().len() == 3));
    }

    #[test]
    fn family_names_roundtrip() {
        for family in [Family::Responsive, Family::PathIndependent, Family::Mixed] {
            assert_eq!(family.to_string().parse::<Family>().unwrap(), family);
        }
        assert!("lad".parse::<Family>().is_err());
    }
}

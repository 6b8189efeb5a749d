//! Harnesses for the two implementation results, the firms-only game and the
//! equal-partner-count property.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::scan::{exhaustive, PackedOutcome, ProfileSpace};
use super::{
    apply_rule_unchecked, enumerate_worker_strategies, firm_gains, is_nash_full_game, is_nash_workers_game,
    theorem1_profile, theorem2_profile, Deviation, FullGameProfile, GameConfig, StableRule, WorkersGameProfile,
};
use crate::choice::{admissible_family, ChoiceFunction, ChoiceWitness};
use crate::da::{check_preconditions, firm_proposing_unchecked};
use crate::error::{Error, Result, Side};
use crate::market::{Instance, Market, Matching, ProfileView};
use crate::stability::{ir_set, is_individually_rational, is_stable, partner_counts, stable_set};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    Exhaustive,
    Sampled { seed: u64, samples: usize },
}

/// An equilibrium whose outcome falls outside the target correspondence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanViolation {
    pub profile: FullGameProfile,
    pub outcome: Matching,
}

/// Result of scanning a game's profile space for equilibria.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumScan {
    pub mode: ScanMode,
    pub profiles: usize,
    pub equilibria: usize,
    /// Profiles at which the rule has no outcome.
    pub undefined: usize,
    pub outcomes: BTreeSet<Matching>,
    pub violations: Vec<ScanViolation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstructionFailure {
    /// The rule does not return the target at the constructed profile.
    WrongOutcome(Matching),
    /// The target is not the unique stable matching of the constructed profile.
    NotUniqueStable(Vec<Matching>),
    NotEquilibrium(Deviation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionViolation {
    pub target: Matching,
    pub failure: ConstructionFailure,
}

/// Result of building and checking the equilibrium profile for every target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionCheck {
    pub targets: usize,
    pub violations: Vec<ConstructionViolation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem1Report {
    pub rule: StableRule,
    pub ir_set: Vec<Matching>,
    pub clause_i: EquilibriumScan,
    pub clause_ii: ConstructionCheck,
}

impl Theorem1Report {
    pub fn holds(&self) -> bool {
        self.clause_i.violations.is_empty() && self.clause_ii.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem2Report {
    /// First LAD failure among the firms, if the harness ran in exploratory mode.
    pub lad_failure: Option<(usize, ChoiceWitness)>,
    pub stable_set: Vec<Matching>,
    pub clause_i: EquilibriumScan,
    pub clause_ii: ConstructionCheck,
}

impl Theorem2Report {
    /// With an exhaustive scan: equilibrium outcomes are exactly the stable set.
    pub fn outcomes_equal_stable_set(&self) -> Option<bool> {
        (self.clause_i.mode == ScanMode::Exhaustive).then(|| self.clause_i.outcomes.iter().eq(self.stable_set.iter()))
    }

    pub fn holds(&self) -> bool {
        self.clause_i.violations.is_empty()
            && self.clause_ii.violations.is_empty()
            && self.outcomes_equal_stable_set().unwrap_or(true)
    }
}

fn rule_outcome<I: Instance + ?Sized>(rule: StableRule, inst: &I) -> Result<Option<Matching>> {
    match apply_rule_unchecked(rule, inst) {
        Ok(m) => Ok(Some(m)),
        Err(Error::NoStableMatching) => Ok(None),
        Err(e) => Err(e),
    }
}

fn profile_space(radices: Vec<usize>) -> Result<ProfileSpace> {
    ProfileSpace::new(radices).ok_or(Error::Capacity {
        what: "profile space",
        size: usize::MAX,
        bound: usize::MAX - 1,
    })
}

/// Check both implementation clauses for the full game under `rule`: every
/// equilibrium outcome is individually rational, and every individually
/// rational matching is the outcome of the constructed equilibrium.
pub fn verify_theorem1(true_mkt: &Market, rule: StableRule, config: &GameConfig) -> Result<Theorem1Report> {
    config.check_rule(rule)?;
    check_preconditions(true_mkt)?;
    let (nw, nf) = (true_mkt.num_workers(), true_mkt.num_firms());
    let strategies = enumerate_worker_strategies(nf)?;
    let family = admissible_family(nw, config.require_consistency)?;
    let ir = ir_set(true_mkt)?;

    let mut radices = vec![strategies.len(); nw];
    radices.extend(std::iter::repeat_n(family.len(), nf));
    let space = profile_space(radices)?;
    let build = |digits: &[usize]| FullGameProfile {
        preferences: digits[..nw].iter().map(|&d| strategies[d].clone()).collect(),
        choices: digits[nw..].iter().map(|&d| family[d].clone()).collect(),
    };

    let clause_i = if space.size() <= config.max_exhaustive_profiles {
        let packed = PackedOutcome::new(nw, nf);
        let scan = exhaustive(
            &space,
            &packed,
            |digits| {
                let view = ProfileView {
                    preferences: digits[..nw].iter().map(|&d| &strategies[d]).collect(),
                    choices: digits[nw..].iter().map(|&d| &family[d]).collect(),
                };
                rule_outcome(rule, &view)
            },
            |player, base, alt| {
                if player < nw {
                    let w = player;
                    true_mkt
                        .preference(w)
                        .prefers(packed.worker(alt, w), packed.worker(base, w))
                } else {
                    let f = player - nw;
                    firm_gains(true_mkt.choice(f), packed.firm(base, f), packed.firm(alt, f))
                }
            },
        )?;
        let mut report = EquilibriumScan {
            mode: ScanMode::Exhaustive,
            profiles: space.size(),
            equilibria: scan.equilibria.len(),
            undefined: scan.undefined(),
            outcomes: BTreeSet::new(),
            violations: Vec::new(),
        };
        for &i in &scan.equilibria {
            let outcome = packed.decode(scan.table[i]);
            if !is_individually_rational(&outcome, true_mkt) {
                report.violations.push(ScanViolation {
                    profile: build(&space.decode(i)),
                    outcome: outcome.clone(),
                });
            }
            report.outcomes.insert(outcome);
        }
        report
    } else {
        sampled(&space, config, |digits| {
            let profile = build(digits);
            let nash = is_nash_full_game(rule, true_mkt, &profile, config)?;
            let ok = is_individually_rational(&nash.outcome, true_mkt);
            Ok((nash.is_equilibrium, nash.outcome, ok, profile))
        })?
    };

    let clause_ii = construction_check(&ir, |mu| {
        let profile = theorem1_profile(mu, true_mkt)?;
        let outcome = apply_rule_unchecked(rule, &profile)?;
        if &outcome != mu {
            return Ok(Some(ConstructionFailure::WrongOutcome(outcome)));
        }
        let stable = stable_set(&profile)?;
        if stable.len() != 1 || &stable[0] != mu {
            return Ok(Some(ConstructionFailure::NotUniqueStable(stable)));
        }
        let nash = is_nash_full_game(rule, true_mkt, &profile, config)?;
        Ok(nash.witness.map(ConstructionFailure::NotEquilibrium))
    })?;

    Ok(Theorem1Report {
        rule,
        ir_set: ir,
        clause_i,
        clause_ii,
    })
}

/// Check both implementation clauses for the workers game under the
/// firm-optimal rule: equilibrium outcomes are stable, and every stable
/// matching is reached by the truncation profile.
///
/// Refuses markets with a firm violating LAD unless `config.allow_non_lad`.
pub fn verify_theorem2(true_mkt: &Market, config: &GameConfig) -> Result<Theorem2Report> {
    check_preconditions(true_mkt)?;
    let mut lad_failure = None;
    for f in 0..true_mkt.num_firms() {
        if let Err(witness) = true_mkt.choice(f).check_lad() {
            if !config.allow_non_lad {
                return Err(Error::Precondition { firm: f, witness });
            }
            lad_failure.get_or_insert((f, witness));
        }
    }
    let rule = StableRule::FirmOptimal;
    let (nw, nf) = (true_mkt.num_workers(), true_mkt.num_firms());
    let strategies = enumerate_worker_strategies(nf)?;
    let stable = stable_set(true_mkt)?;
    let space = profile_space(vec![strategies.len(); nw])?;
    let build = |digits: &[usize]| FullGameProfile {
        preferences: digits.iter().map(|&d| strategies[d].clone()).collect(),
        choices: true_mkt.choices().to_vec(),
    };

    let clause_i = if space.size() <= config.max_exhaustive_profiles {
        let packed = PackedOutcome::new(nw, nf);
        let truth = ProfileView::of(true_mkt);
        let scan = exhaustive(
            &space,
            &packed,
            |digits| {
                let view = ProfileView {
                    preferences: digits.iter().map(|&d| &strategies[d]).collect(),
                    choices: truth.choices.clone(),
                };
                Ok(Some(firm_proposing_unchecked(&view)))
            },
            |w, base, alt| {
                true_mkt
                    .preference(w)
                    .prefers(packed.worker(alt, w), packed.worker(base, w))
            },
        )?;
        let mut report = EquilibriumScan {
            mode: ScanMode::Exhaustive,
            profiles: space.size(),
            equilibria: scan.equilibria.len(),
            undefined: scan.undefined(),
            outcomes: BTreeSet::new(),
            violations: Vec::new(),
        };
        for &i in &scan.equilibria {
            let outcome = packed.decode(scan.table[i]);
            if !is_stable(&outcome, true_mkt) {
                report.violations.push(ScanViolation {
                    profile: build(&space.decode(i)),
                    outcome: outcome.clone(),
                });
            }
            report.outcomes.insert(outcome);
        }
        report
    } else {
        sampled(&space, config, |digits| {
            let profile = build(digits);
            let nash = is_nash_workers_game(
                rule,
                true_mkt,
                &WorkersGameProfile {
                    preferences: profile.preferences.clone(),
                },
            )?;
            let ok = is_stable(&nash.outcome, true_mkt);
            Ok((nash.is_equilibrium, nash.outcome, ok, profile))
        })?
    };

    let clause_ii = construction_check(&stable, |mu| {
        let profile = theorem2_profile(mu);
        let submitted = true_mkt.with_preferences(profile.preferences.clone())?;
        let outcome = firm_proposing_unchecked(&submitted);
        if &outcome != mu {
            return Ok(Some(ConstructionFailure::WrongOutcome(outcome)));
        }
        let unique = stable_set(&submitted)?;
        if unique.len() != 1 || &unique[0] != mu {
            return Ok(Some(ConstructionFailure::NotUniqueStable(unique)));
        }
        let nash = is_nash_workers_game(rule, true_mkt, &profile)?;
        Ok(nash.witness.map(ConstructionFailure::NotEquilibrium))
    })?;

    Ok(Theorem2Report {
        lad_failure,
        stable_set: stable,
        clause_i,
        clause_ii,
    })
}

/// Scan the game in which only firms are strategic (workers report truthfully)
/// and flag every equilibrium whose outcome is unstable under the true market.
/// Exhaustive only; larger spaces are a capacity error.
pub fn scan_firms_game(true_mkt: &Market, rule: StableRule, config: &GameConfig) -> Result<EquilibriumScan> {
    config.check_rule(rule)?;
    check_preconditions(true_mkt)?;
    let (nw, nf) = (true_mkt.num_workers(), true_mkt.num_firms());
    let family = admissible_family(nw, config.require_consistency)?;
    let space = profile_space(vec![family.len(); nf])?;
    if space.size() > config.max_exhaustive_profiles {
        return Err(Error::Capacity {
            what: "firms-game profile space",
            size: space.size(),
            bound: config.max_exhaustive_profiles,
        });
    }
    let packed = PackedOutcome::new(nw, nf);
    let truth = ProfileView::of(true_mkt);
    let scan = exhaustive(
        &space,
        &packed,
        |digits| {
            let view = ProfileView {
                preferences: truth.preferences.clone(),
                choices: digits.iter().map(|&d| &family[d]).collect(),
            };
            rule_outcome(rule, &view)
        },
        |f, base, alt| firm_gains(true_mkt.choice(f), packed.firm(base, f), packed.firm(alt, f)),
    )?;
    let mut report = EquilibriumScan {
        mode: ScanMode::Exhaustive,
        profiles: space.size(),
        equilibria: scan.equilibria.len(),
        undefined: scan.undefined(),
        outcomes: BTreeSet::new(),
        violations: Vec::new(),
    };
    for &i in &scan.equilibria {
        let outcome = packed.decode(scan.table[i]);
        if !is_stable(&outcome, true_mkt) {
            report.violations.push(ScanViolation {
                profile: FullGameProfile {
                    preferences: true_mkt.preferences().to_vec(),
                    choices: space
                        .decode(i)
                        .iter()
                        .map(|&d| family[d].clone())
                        .collect::<Vec<ChoiceFunction>>(),
                },
                outcome: outcome.clone(),
            });
        }
        report.outcomes.insert(outcome);
    }
    Ok(report)
}

type SampleResult = (bool, Matching, bool, FullGameProfile);

fn sampled(
    space: &ProfileSpace,
    config: &GameConfig,
    check: impl Fn(&[usize]) -> Result<SampleResult> + Sync,
) -> Result<EquilibriumScan> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let draws: Vec<Vec<usize>> = (0..config.samples)
        .map(|_| (0..space.players()).map(|p| rng.gen_range(0..space.radix(p))).collect())
        .collect();
    let results = draws.par_iter().map(|d| check(d)).collect::<Result<Vec<_>>>()?;
    let mut report = EquilibriumScan {
        mode: ScanMode::Sampled {
            seed: config.seed,
            samples: config.samples,
        },
        profiles: config.samples,
        equilibria: 0,
        undefined: 0,
        outcomes: BTreeSet::new(),
        violations: Vec::new(),
    };
    for (is_eq, outcome, in_target, profile) in results {
        if !is_eq {
            continue;
        }
        report.equilibria += 1;
        if !in_target {
            report.violations.push(ScanViolation {
                profile,
                outcome: outcome.clone(),
            });
        }
        report.outcomes.insert(outcome);
    }
    Ok(report)
}

fn construction_check(
    targets: &[Matching],
    check: impl Fn(&Matching) -> Result<Option<ConstructionFailure>> + Sync,
) -> Result<ConstructionCheck> {
    let failures = targets.par_iter().map(&check).collect::<Result<Vec<_>>>()?;
    Ok(ConstructionCheck {
        targets: targets.len(),
        violations: targets
            .iter()
            .zip(failures)
            .filter_map(|(mu, f)| {
                f.map(|failure| ConstructionViolation {
                    target: mu.clone(),
                    failure,
                })
            })
            .collect(),
    })
}

/// Two stable matchings giving some agent different numbers of partners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuralWitness {
    pub side: Side,
    pub agent: usize,
    pub first: Matching,
    pub second: Matching,
    pub counts: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuralReport {
    pub lad: bool,
    pub stable_set: Vec<Matching>,
    pub witness: Option<RuralWitness>,
}

impl RuralReport {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// Whether every agent has the same number of partners in every stable
/// matching. The check itself does not require LAD; `lad` records whether
/// every firm satisfies it.
pub fn rural_hospital_check(mkt: &Market) -> Result<RuralReport> {
    let stable = stable_set(mkt)?;
    let lad = mkt.choices().iter().all(|c| c.check_lad().is_ok());
    let nw = mkt.num_workers();
    let mut witness = None;
    if let Some(first) = stable.first() {
        let reference = partner_counts(first);
        'search: for m in &stable[1..] {
            let counts = partner_counts(m);
            for (agent, (&a, &b)) in reference.iter().zip(&counts).enumerate() {
                if a != b {
                    let (side, agent) = if agent < nw {
                        (Side::Worker, agent)
                    } else {
                        (Side::Firm, agent - nw)
                    };
                    witness = Some(RuralWitness {
                        side,
                        agent,
                        first: first.clone(),
                        second: m.clone(),
                        counts: (a, b),
                    });
                    break 'search;
                }
            }
        }
    }
    Ok(RuralReport {
        lad,
        stable_set: stable,
        witness,
    })
}

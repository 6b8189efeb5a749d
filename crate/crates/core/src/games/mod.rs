//! Matching games induced by stable rules.
//!
//! Two games are modeled. In the full game every worker submits a preference
//! list and every firm a choice function; in the workers game the firms'
//! choice functions are fixed at their true values. Outcomes are always
//! evaluated with the true preferences and choice functions of the market.

mod scan;
mod theorems;

use std::fmt;

use crate::choice::{admissible_family, ChoiceFunction};
use crate::da::{firm_proposing_unchecked, worker_proposing_unchecked};
use crate::error::{capacity, Error, Result, Side};
use crate::market::{validate_matching, Instance, Market, Matching, ProfileView, Validity, WorkerPreference};
use crate::stability::{first_stable, is_individually_rational, stable_set};
use crate::workerset::WorkerSet;

pub use scan::{PackedOutcome, ProfileSpace};
pub use theorems::{
    rural_hospital_check, scan_firms_game, verify_theorem1, verify_theorem2, ConstructionCheck, ConstructionFailure,
    ConstructionViolation, EquilibriumScan, RuralReport, RuralWitness, ScanMode, ScanViolation, Theorem1Report,
    Theorem2Report,
};

/// Default bound on the number of firms for enumerating worker strategies.
pub const WORKER_STRATEGY_BOUND: usize = 4;

/// A selector from the stable set used by [`StableRule::Custom`]: returns an
/// index into the stable matchings, given in canonical order.
pub type Selector = fn(&[Matching]) -> usize;

/// A rule mapping every submitted profile to one of its stable matchings.
#[derive(Debug, Clone, Copy)]
pub enum StableRule {
    FirmOptimal,
    WorkerOptimal,
    /// The smallest stable matching in canonical order (worker-side
    /// assignment vectors compared lexicographically, unmatched first).
    Lexicographic,
    Custom(Selector),
}

impl StableRule {
    pub fn name(&self) -> &'static str {
        match self {
            StableRule::FirmOptimal => "firm-optimal",
            StableRule::WorkerOptimal => "worker-optimal",
            StableRule::Lexicographic => "lexicographic",
            StableRule::Custom(_) => "custom",
        }
    }

    fn runs_deferred_acceptance(&self) -> bool {
        matches!(self, StableRule::FirmOptimal | StableRule::WorkerOptimal)
    }
}

impl PartialEq for StableRule {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (StableRule::Custom(a), StableRule::Custom(b)) => *a as usize == *b as usize,
            _ => std::mem::discriminant(self) == std::mem::discriminant(other),
        }
    }
}

impl Eq for StableRule {}

impl fmt::Display for StableRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Knobs shared by the equilibrium checks and verification harnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameConfig {
    /// Restrict firms' strategies to consistent choice functions. When off,
    /// any substitutable function may be submitted, and only selector rules
    /// (which do not rely on deferred acceptance) are accepted.
    pub require_consistency: bool,
    /// Largest profile space scanned exhaustively; larger spaces are sampled.
    pub max_exhaustive_profiles: usize,
    pub samples: usize,
    pub seed: u64,
    /// Run the workers-game harness even when some firm violates LAD.
    pub allow_non_lad: bool,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            require_consistency: true,
            max_exhaustive_profiles: 1_000_000,
            samples: 200,
            seed: 0,
            allow_non_lad: false,
        }
    }
}

impl GameConfig {
    fn check_rule(&self, rule: StableRule) -> Result<()> {
        if !self.require_consistency && rule.runs_deferred_acceptance() {
            return Err(Error::Input(format!(
                "the {rule} rule needs consistent choice functions; \
                 use a selector rule when consistency is not required"
            )));
        }
        Ok(())
    }
}

/// Submitted strategies of every agent in the full game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullGameProfile {
    pub preferences: Vec<WorkerPreference>,
    pub choices: Vec<ChoiceFunction>,
}

impl Instance for FullGameProfile {
    fn num_workers(&self) -> usize {
        self.preferences.len()
    }
    fn num_firms(&self) -> usize {
        self.choices.len()
    }
    fn preference(&self, w: usize) -> &WorkerPreference {
        &self.preferences[w]
    }
    fn choice(&self, f: usize) -> &ChoiceFunction {
        &self.choices[f]
    }
}

/// Submitted preference lists in the workers game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkersGameProfile {
    pub preferences: Vec<WorkerPreference>,
}

/// A profitable unilateral deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Deviation {
    Worker {
        worker: usize,
        strategy: WorkerPreference,
        before: Option<usize>,
        after: Option<usize>,
    },
    Firm {
        firm: usize,
        strategy: ChoiceFunction,
        before: WorkerSet,
        after: WorkerSet,
    },
}

impl Deviation {
    pub fn describe(&self, mkt: &Market) -> String {
        match self {
            Deviation::Worker {
                worker,
                strategy,
                before,
                after,
            } => format!(
                "worker {} deviates to {}: {} -> {}",
                mkt.workers()[*worker],
                mkt.format_preference(strategy),
                mkt.format_firm(*before),
                mkt.format_firm(*after)
            ),
            Deviation::Firm {
                firm, before, after, ..
            } => format!(
                "firm {} deviates: {} -> {}",
                mkt.firms()[*firm],
                mkt.format_set(*before),
                mkt.format_set(*after)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NashReport {
    pub is_equilibrium: bool,
    pub outcome: Matching,
    pub witness: Option<Deviation>,
    pub deviations_checked: usize,
    /// Deviations under which the rule has no outcome (no stable matching).
    pub undefined_deviations: usize,
}

/// Every strict list over every subset of `num_firms` firms, ordered by
/// length and then lexicographically.
pub fn enumerate_worker_strategies(num_firms: usize) -> Result<Vec<WorkerPreference>> {
    capacity("firm set", num_firms, WORKER_STRATEGY_BOUND)?;
    let mut out = vec![WorkerPreference::empty()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..num_firms {
        let mut next = Vec::new();
        for list in &layer {
            for f in (0..num_firms).filter(|f| !list.contains(f)) {
                let mut longer = list.clone();
                longer.push(f);
                next.push(longer);
            }
        }
        out.extend(
            next.iter()
                .map(|l| WorkerPreference::new(l.clone()).expect("distinct firms")),
        );
        layer = next;
    }
    Ok(out)
}

/// Apply a rule to a submitted profile, checking that every choice function
/// is substitutable and consistent first.
pub fn apply_rule<I: Instance + ?Sized>(rule: StableRule, inst: &I) -> Result<Matching> {
    crate::da::check_preconditions(inst)?;
    apply_rule_unchecked(rule, inst)
}

/// [`apply_rule`] without the admissibility check.
pub fn apply_rule_unchecked<I: Instance + ?Sized>(rule: StableRule, inst: &I) -> Result<Matching> {
    match rule {
        StableRule::FirmOptimal => Ok(firm_proposing_unchecked(inst)),
        StableRule::WorkerOptimal => Ok(worker_proposing_unchecked(inst)),
        StableRule::Lexicographic => first_stable(inst)?.ok_or(Error::NoStableMatching),
        StableRule::Custom(select) => {
            let stable = stable_set(inst)?;
            if stable.is_empty() {
                return Err(Error::NoStableMatching);
            }
            let i = select(&stable);
            stable
                .get(i)
                .cloned()
                .ok_or_else(|| Error::Input(format!("selector returned index {i} of {}", stable.len())))
        }
    }
}

/// Whether a firm with true choice `c_true` strictly gains by moving from
/// `held` to `alternative`: anything but `held ⪰ alternative` in the Blair
/// order counts, incomparability included.
pub fn firm_gains(c_true: &ChoiceFunction, held: WorkerSet, alternative: WorkerSet) -> bool {
    !c_true.blair_geq(held, alternative)
}

fn check_shape<I: Instance + ?Sized>(true_mkt: &Market, profile: &I) -> Result<()> {
    if profile.num_workers() != true_mkt.num_workers() || profile.num_firms() != true_mkt.num_firms() {
        return Err(Error::Input(format!(
            "profile covers {} workers and {} firms, market has {} and {}",
            profile.num_workers(),
            profile.num_firms(),
            true_mkt.num_workers(),
            true_mkt.num_firms()
        )));
    }
    for w in 0..profile.num_workers() {
        if let Some(&f) = profile
            .preference(w)
            .acceptable()
            .iter()
            .find(|&&f| f >= true_mkt.num_firms())
        {
            return Err(Error::UnknownAgent {
                side: Side::Firm,
                index: f,
            });
        }
    }
    Ok(())
}

fn check_submitted_choices<I: Instance + ?Sized>(profile: &I, require_consistency: bool) -> Result<()> {
    for f in 0..profile.num_firms() {
        let c = profile.choice(f);
        if c.ground_size() != profile.num_workers() {
            return Err(Error::Input(format!(
                "choice function of firm {f} has the wrong ground set"
            )));
        }
        if let Err(witness) = c.check_admissible(require_consistency) {
            return Err(Error::Precondition { firm: f, witness });
        }
    }
    Ok(())
}

/// Scan every worker deviation against `base`, mutating `view` in place.
fn scan_worker_deviations(
    rule: StableRule,
    true_mkt: &Market,
    view: &ProfileView<'_>,
    strategies: &[WorkerPreference],
    base: &Matching,
    report: &mut NashReport,
) -> Result<()> {
    for w in 0..true_mkt.num_workers() {
        let submitted = view.preferences[w];
        for s in strategies.iter().filter(|s| *s != submitted) {
            let mut trial: ProfileView<'_> = view.clone();
            trial.preferences[w] = s;
            report.deviations_checked += 1;
            let out = match apply_rule_unchecked(rule, &trial) {
                Ok(m) => m,
                Err(Error::NoStableMatching) => {
                    report.undefined_deviations += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if true_mkt.preference(w).prefers(out.worker(w), base.worker(w)) {
                report.is_equilibrium = false;
                report.witness = Some(Deviation::Worker {
                    worker: w,
                    strategy: s.clone(),
                    before: base.worker(w),
                    after: out.worker(w),
                });
                return Ok(());
            }
        }
    }
    Ok(())
}

/// Nash check for the full game: no worker and no firm gains, by its true
/// preferences or choice function, from any unilateral deviation.
pub fn is_nash_full_game(
    rule: StableRule,
    true_mkt: &Market,
    profile: &FullGameProfile,
    config: &GameConfig,
) -> Result<NashReport> {
    config.check_rule(rule)?;
    check_shape(true_mkt, profile)?;
    check_submitted_choices(profile, config.require_consistency)?;
    let strategies = enumerate_worker_strategies(true_mkt.num_firms())?;
    let family = admissible_family(true_mkt.num_workers(), config.require_consistency)?;
    let base = apply_rule_unchecked(rule, profile)?;
    let mut report = NashReport {
        is_equilibrium: true,
        outcome: base.clone(),
        witness: None,
        deviations_checked: 0,
        undefined_deviations: 0,
    };
    let view = ProfileView::of(profile);
    scan_worker_deviations(rule, true_mkt, &view, &strategies, &base, &mut report)?;
    if !report.is_equilibrium {
        return Ok(report);
    }
    for f in 0..true_mkt.num_firms() {
        let submitted = view.choices[f];
        for c in family.iter().filter(|c| !c.same_choices(submitted)) {
            let mut trial: ProfileView<'_> = view.clone();
            trial.choices[f] = c;
            report.deviations_checked += 1;
            let out = match apply_rule_unchecked(rule, &trial) {
                Ok(m) => m,
                Err(Error::NoStableMatching) => {
                    report.undefined_deviations += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if firm_gains(true_mkt.choice(f), base.firm(f), out.firm(f)) {
                report.is_equilibrium = false;
                report.witness = Some(Deviation::Firm {
                    firm: f,
                    strategy: c.clone(),
                    before: base.firm(f),
                    after: out.firm(f),
                });
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// Nash check for the workers game: firms submit their true choice functions.
pub fn is_nash_workers_game(rule: StableRule, true_mkt: &Market, profile: &WorkersGameProfile) -> Result<NashReport> {
    let submitted = true_mkt.with_preferences(profile.preferences.clone())?;
    crate::da::check_preconditions(true_mkt)?;
    let strategies = enumerate_worker_strategies(true_mkt.num_firms())?;
    let base = apply_rule_unchecked(rule, &submitted)?;
    let mut report = NashReport {
        is_equilibrium: true,
        outcome: base.clone(),
        witness: None,
        deviations_checked: 0,
        undefined_deviations: 0,
    };
    let view = ProfileView::of(&submitted);
    scan_worker_deviations(rule, true_mkt, &view, &strategies, &base, &mut report)?;
    Ok(report)
}

/// The equilibrium profile supporting an individually rational matching:
/// each firm submits `C(S) = μ(f) ∩ S` and each worker lists only `μ(w)`.
pub fn theorem1_profile(mu: &Matching, true_mkt: &Market) -> Result<FullGameProfile> {
    if let Validity::Invalid(v) = validate_matching(mu, true_mkt)? {
        return Err(Error::Input(format!("not a matching: {v:?}")));
    }
    if !is_individually_rational(mu, true_mkt) {
        return Err(Error::Input(format!(
            "{} is not individually rational",
            true_mkt.format_matching(mu)
        )));
    }
    let nw = true_mkt.num_workers();
    Ok(FullGameProfile {
        preferences: (0..nw).map(|w| WorkerPreference::only(mu.worker(w))).collect(),
        choices: (0..true_mkt.num_firms())
            .map(|f| ChoiceFunction::intersect(mu.firm(f), nw))
            .collect::<Result<_>>()?,
    })
}

/// Each worker lists only her partner under `mu`.
pub fn theorem2_profile(mu: &Matching) -> WorkersGameProfile {
    WorkersGameProfile {
        preferences: (0..mu.num_workers())
            .map(|w| WorkerPreference::only(mu.worker(w)))
            .collect(),
    }
}

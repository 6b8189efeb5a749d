//! Deferred acceptance with substitutable choice functions, in both
//! orientations.
//!
//! Firms never rank workers internally: every holding update goes through the
//! firm's choice function. The `*_unchecked` entry points skip the
//! admissibility check and are what the game scans call in their inner loops.

use crate::error::{Error, Result, Side};
use crate::market::{Instance, Matching};
use crate::workerset::WorkerSet;

/// Order in which proposals are made.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Schedule {
    /// Every active proposer moves in the same round.
    #[default]
    Simultaneous,
    /// One proposer per round, lowest index first.
    Sequential,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DaOptions {
    pub trace: bool,
    pub schedule: Schedule,
}

/// One round of the algorithm. Pairs are `(firm, worker)` in both orientations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Round {
    /// New proposals (worker-proposing) or new offers (firm-proposing).
    pub proposals: Vec<(usize, usize)>,
    /// Each firm's tentatively held workers after the round.
    pub holdings: Vec<WorkerSet>,
    /// Pairs broken off this round, including immediate refusals.
    pub rejections: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaTrace {
    pub proposing: Side,
    pub rounds: Vec<Round>,
}

impl DaTrace {
    /// Rebuild the outcome from proposals and rejections alone. Returns `None`
    /// if some round's recorded holdings disagree with the replay.
    pub fn replay(&self, num_workers: usize, num_firms: usize) -> Option<Matching> {
        let mut holdings = vec![WorkerSet::EMPTY; num_firms];
        for round in &self.rounds {
            for &(f, w) in &round.proposals {
                holdings[f].insert(w);
            }
            for &(f, w) in &round.rejections {
                holdings[f].remove(w);
            }
            if holdings != round.holdings {
                return None;
            }
        }
        Some(Matching::from_firm_side(num_workers, holdings))
    }
}

/// Fail with the first firm whose choice function is not substitutable and
/// consistent.
pub fn check_preconditions<I: Instance + ?Sized>(inst: &I) -> Result<()> {
    for f in 0..inst.num_firms() {
        if let Err(witness) = inst.choice(f).check_admissible(true) {
            return Err(Error::Precondition { firm: f, witness });
        }
    }
    Ok(())
}

/// The worker-optimal stable matching `μ_W`.
pub fn da_worker_proposing<I: Instance + ?Sized>(inst: &I) -> Result<Matching> {
    check_preconditions(inst)?;
    Ok(worker_proposing_unchecked(inst))
}

/// The firm-optimal stable matching `μ_F`.
pub fn da_firm_proposing<I: Instance + ?Sized>(inst: &I) -> Result<Matching> {
    check_preconditions(inst)?;
    Ok(firm_proposing_unchecked(inst))
}

/// Run either orientation with options, returning the trace when requested.
pub fn run<I: Instance + ?Sized>(inst: &I, proposing: Side, options: DaOptions) -> Result<(Matching, Option<DaTrace>)> {
    check_preconditions(inst)?;
    let mut rounds = options.trace.then(Vec::new);
    let m = match proposing {
        Side::Worker => worker_engine(inst, options.schedule, rounds.as_mut()),
        Side::Firm => firm_engine(inst, options.schedule, rounds.as_mut()),
    };
    Ok((m, rounds.map(|rounds| DaTrace { proposing, rounds })))
}

pub fn worker_proposing_unchecked<I: Instance + ?Sized>(inst: &I) -> Matching {
    worker_engine(inst, Schedule::Simultaneous, None)
}

pub fn firm_proposing_unchecked<I: Instance + ?Sized>(inst: &I) -> Matching {
    firm_engine(inst, Schedule::Simultaneous, None)
}

fn worker_engine<I: Instance + ?Sized>(inst: &I, schedule: Schedule, mut trace: Option<&mut Vec<Round>>) -> Matching {
    let (nw, nf) = (inst.num_workers(), inst.num_firms());
    let mut next = vec![0usize; nw];
    let mut holdings = vec![WorkerSet::EMPTY; nf];
    let mut proposals: Vec<(usize, usize)> = Vec::new();
    loop {
        let held = holdings.iter().fold(WorkerSet::EMPTY, |acc, s| acc.union(*s));
        proposals.clear();
        for w in (0..nw).filter(|&w| !held.contains(w)) {
            let list = inst.preference(w).acceptable();
            if let Some(&f) = list.get(next[w]) {
                next[w] += 1;
                proposals.push((f, w));
                if schedule == Schedule::Sequential {
                    break;
                }
            }
        }
        if proposals.is_empty() {
            break;
        }
        let mut pools = holdings.clone();
        for &(f, w) in &proposals {
            pools[f].insert(w);
        }
        let mut rejections = Vec::new();
        for f in 0..nf {
            if pools[f] == holdings[f] {
                continue;
            }
            let kept = inst.choice(f).choose(pools[f]);
            if trace.is_some() {
                rejections.extend(pools[f].difference(kept).iter().map(|w| (f, w)));
            }
            holdings[f] = kept;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(Round {
                proposals: proposals.clone(),
                holdings: holdings.clone(),
                rejections,
            });
        }
    }
    Matching::from_firm_side(nw, holdings)
}

fn firm_engine<I: Instance + ?Sized>(inst: &I, schedule: Schedule, mut trace: Option<&mut Vec<Round>>) -> Matching {
    let (nw, nf) = (inst.num_workers(), inst.num_firms());
    let everyone = WorkerSet::full(nw);
    let mut refused = vec![WorkerSet::EMPTY; nf];
    let mut holdings = vec![WorkerSet::EMPTY; nf];
    // Sequential: firms move one at a time, cycling until a full quiet pass.
    let mut quiet = 0usize;
    let mut turn = 0usize;
    loop {
        let movers: Vec<usize> = match schedule {
            Schedule::Simultaneous => (0..nf).collect(),
            Schedule::Sequential => {
                if nf == 0 || quiet >= nf {
                    break;
                }
                let f = turn % nf;
                turn += 1;
                vec![f]
            }
        };
        let mut offers = holdings.clone();
        for &f in &movers {
            offers[f] = inst.choice(f).choose(everyone.difference(refused[f]));
        }
        let mut proposals = Vec::new();
        let mut rejections = Vec::new();
        for &f in &movers {
            for w in offers[f].difference(holdings[f]).iter() {
                proposals.push((f, w));
            }
        }
        for w in 0..nw {
            let pref = inst.preference(w);
            // Offering firms this round, including any it already holds.
            let offering = (0..nf).filter(|&f| offers[f].contains(w));
            let mut best: Option<usize> = None;
            for f in offering {
                if pref.prefers(Some(f), best) {
                    if let Some(g) = best {
                        rejections.push((g, w));
                    }
                    best = Some(f);
                } else {
                    rejections.push((f, w));
                }
            }
        }
        for &(f, w) in &rejections {
            refused[f].insert(w);
            offers[f].remove(w);
        }
        holdings = offers;
        let changed = !rejections.is_empty() || !proposals.is_empty();
        if let Some(t) = trace.as_deref_mut() {
            if changed {
                rejections.sort_unstable();
                t.push(Round {
                    proposals,
                    holdings: holdings.clone(),
                    rejections: rejections.clone(),
                });
            }
        }
        match schedule {
            Schedule::Simultaneous => {
                if rejections.is_empty() {
                    break;
                }
            }
            Schedule::Sequential => {
                quiet = if changed { 0 } else { quiet + 1 };
            }
        }
    }
    Matching::from_firm_side(nw, holdings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::ChoiceFunction;
    use crate::fixtures::{market_a, single_firm_take_all};
    use crate::market::{Market, WorkerPreference};

    fn mu1() -> Matching {
        Matching::from_pairs(2, 2, &[(0, 1), (1, 0)]).unwrap()
    }

    fn mu2() -> Matching {
        Matching::from_pairs(2, 2, &[(0, 0), (1, 1)]).unwrap()
    }

    #[test]
    fn market_a_both_sides() {
        let mkt = market_a();
        assert_eq!(da_worker_proposing(&mkt).unwrap(), mu1());
        assert_eq!(da_firm_proposing(&mkt).unwrap(), mu2());
    }

    #[test]
    fn empty_lists_give_empty_matching() {
        let mkt = market_a().with_preferences(vec![WorkerPreference::empty(); 2]).unwrap();
        assert_eq!(da_worker_proposing(&mkt).unwrap(), Matching::empty(2, 2));
        assert_eq!(da_firm_proposing(&mkt).unwrap(), Matching::empty(2, 2));
    }

    #[test]
    fn single_firm_takes_everyone() {
        let mkt = single_firm_take_all();
        let all = Matching::from_pairs(2, 1, &[(0, 0), (1, 0)]).unwrap();
        assert_eq!(da_worker_proposing(&mkt).unwrap(), all);
        assert_eq!(da_firm_proposing(&mkt).unwrap(), all);
    }

    #[test]
    fn rejects_non_substitutable_profile() {
        let complements = ChoiceFunction::from_fn(2, |s| if s.len() == 2 { s } else { WorkerSet::EMPTY }).unwrap();
        let mkt = market_a()
            .with_choices(vec![complements, ChoiceFunction::empty(2)])
            .unwrap();
        match da_worker_proposing(&mkt) {
            Err(Error::Precondition { firm: 0, witness }) => {
                assert_eq!(witness.property, crate::choice::Property::Substitutability)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn traces_replay_to_output() {
        let mkt = market_a();
        for side in [Side::Worker, Side::Firm] {
            for schedule in [Schedule::Simultaneous, Schedule::Sequential] {
                let (m, trace) = run(&mkt, side, DaOptions { trace: true, schedule }).unwrap();
                let trace = trace.unwrap();
                assert_eq!(trace.replay(2, 2).as_ref(), Some(&m), "{side} {schedule:?}");
            }
        }
        let (_, none) = run(&mkt, Side::Worker, DaOptions::default()).unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn worker_proposing_rounds_on_market_a() {
        let (_, trace) = run(
            &market_a(),
            Side::Worker,
            DaOptions {
                trace: true,
                ..DaOptions::default()
            },
        )
        .unwrap();
        // Everyone gets a first choice in round one.
        let rounds = trace.unwrap().rounds;
        assert_eq!(rounds.len(), 1);
        assert_eq!(rounds[0].proposals, vec![(1, 0), (0, 1)]);
        assert!(rounds[0].rejections.is_empty());
    }

    #[test]
    fn manager_firm_can_drop_held_workers() {
        // w2 and w3 are held by the manager firm until w1 arrives.
        let mkt = Market::with_default_names(
            vec![
                WorkerPreference::new(vec![1, 0]).unwrap(),
                WorkerPreference::new(vec![0, 1]).unwrap(),
                WorkerPreference::new(vec![0]).unwrap(),
            ],
            vec![
                crate::fixtures::manager_choice(),
                ChoiceFunction::responsive(vec![1, 2], 1, 3).unwrap(),
            ],
        )
        .unwrap();
        let m = da_worker_proposing(&mkt).unwrap();
        assert!(crate::stability::is_stable(&m, &mkt));
    }
}

//! Blocking, individual rationality and stability, plus brute-force
//! enumeration of the individually rational and stable sets.

use std::collections::BTreeSet;

use crate::error::{capacity, Result};
use crate::market::{Instance, Matching};
use crate::workerset::WorkerSet;

/// Bounds for enumerating every matching of a market.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingBounds {
    pub max_workers: usize,
    pub max_firms: usize,
}

impl Default for MatchingBounds {
    fn default() -> Self {
        MatchingBounds {
            max_workers: 6,
            max_firms: 4,
        }
    }
}

/// Everything that blocks a matching. Empty iff the matching is stable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlockReport {
    pub worker_blocks: BTreeSet<usize>,
    pub firm_blocks: BTreeSet<usize>,
    /// `(firm, worker)` pairs.
    pub pair_blocks: BTreeSet<(usize, usize)>,
}

impl BlockReport {
    pub fn is_empty(&self) -> bool {
        self.worker_blocks.is_empty() && self.firm_blocks.is_empty() && self.pair_blocks.is_empty()
    }
}

/// The worker is matched to a firm she finds unacceptable.
pub fn is_blocked_by_worker<I: Instance + ?Sized>(m: &Matching, w: usize, inst: &I) -> bool {
    m.worker(w).is_some_and(|f| !inst.preference(w).is_acceptable(f))
}

/// The firm would fire some of its workers.
pub fn is_blocked_by_firm<I: Instance + ?Sized>(m: &Matching, f: usize, inst: &I) -> bool {
    inst.choice(f).choose(m.firm(f)) != m.firm(f)
}

/// Whether `(f, w)` blocks `m`: `w ∈ C_f(μ(f) ∪ {w})` and `f P_w μ(w)`.
pub fn is_blocking_pair<I: Instance + ?Sized>(m: &Matching, f: usize, w: usize, inst: &I) -> bool {
    m.worker(w) != Some(f)
        && inst.preference(w).prefers(Some(f), m.worker(w))
        && inst.choice(f).choose(m.firm(f).with(w)).contains(w)
}

pub fn blocking_pairs<I: Instance + ?Sized>(m: &Matching, inst: &I) -> BTreeSet<(usize, usize)> {
    let mut pairs = BTreeSet::new();
    for f in 0..inst.num_firms() {
        for w in 0..inst.num_workers() {
            if is_blocking_pair(m, f, w, inst) {
                pairs.insert((f, w));
            }
        }
    }
    pairs
}

pub fn block_report<I: Instance + ?Sized>(m: &Matching, inst: &I) -> BlockReport {
    BlockReport {
        worker_blocks: (0..inst.num_workers())
            .filter(|&w| is_blocked_by_worker(m, w, inst))
            .collect(),
        firm_blocks: (0..inst.num_firms())
            .filter(|&f| is_blocked_by_firm(m, f, inst))
            .collect(),
        pair_blocks: blocking_pairs(m, inst),
    }
}

pub fn is_individually_rational<I: Instance + ?Sized>(m: &Matching, inst: &I) -> bool {
    (0..inst.num_workers()).all(|w| !is_blocked_by_worker(m, w, inst))
        && (0..inst.num_firms()).all(|f| !is_blocked_by_firm(m, f, inst))
}

pub fn is_stable<I: Instance + ?Sized>(m: &Matching, inst: &I) -> bool {
    is_individually_rational(m, inst)
        && (0..inst.num_firms()).all(|f| (0..inst.num_workers()).all(|w| !is_blocking_pair(m, f, w, inst)))
}

/// Every matching (every map from workers to firms or unmatched), in
/// canonical order: the worker-side vector compared lexicographically with
/// unmatched before any firm.
pub fn all_matchings<I: Instance + ?Sized>(inst: &I) -> Result<Vec<Matching>> {
    all_matchings_with_bounds(inst, MatchingBounds::default())
}

pub fn all_matchings_with_bounds<I: Instance + ?Sized>(inst: &I, bounds: MatchingBounds) -> Result<Vec<Matching>> {
    let (nw, nf) = (inst.num_workers(), inst.num_firms());
    capacity("worker set", nw, bounds.max_workers)?;
    capacity("firm set", nf, bounds.max_firms)?;
    let mut out = Vec::with_capacity((nf + 1).pow(nw as u32));
    let mut digits = vec![0usize; nw];
    loop {
        let side = digits.iter().map(|&d| d.checked_sub(1)).collect();
        out.push(Matching::from_assignment(side, nf)?);
        // Increment with the last worker as the least significant digit.
        let mut i = nw;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] <= nf {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// `I(P, C)`, in canonical order.
pub fn ir_set<I: Instance + ?Sized>(inst: &I) -> Result<Vec<Matching>> {
    Ok(all_matchings(inst)?
        .into_iter()
        .filter(|m| is_individually_rational(m, inst))
        .collect())
}

/// `S(P, C)`, in canonical order.
pub fn stable_set<I: Instance + ?Sized>(inst: &I) -> Result<Vec<Matching>> {
    Ok(all_matchings(inst)?
        .into_iter()
        .filter(|m| is_stable(m, inst))
        .collect())
}

/// The first stable matching in canonical order, without materializing the
/// whole set.
pub fn first_stable<I: Instance + ?Sized>(inst: &I) -> Result<Option<Matching>> {
    Ok(all_matchings(inst)?.into_iter().find(|m| is_stable(m, inst)))
}

/// `m1 ⪰_F m2`: every firm weakly prefers its `m1` workers in the Blair order.
pub fn matching_blair_geq<I: Instance + ?Sized>(m1: &Matching, m2: &Matching, inst: &I) -> bool {
    (0..inst.num_firms()).all(|f| inst.choice(f).blair_geq(m1.firm(f), m2.firm(f)))
}

/// `m1 R_W m2`: every worker weakly prefers her `m1` partner.
pub fn matching_workers_weakly_prefer<I: Instance + ?Sized>(m1: &Matching, m2: &Matching, inst: &I) -> bool {
    (0..inst.num_workers()).all(|w| inst.preference(w).weakly_prefers(m1.worker(w), m2.worker(w)))
}

/// Number of partners of every agent: workers first, then firms.
pub fn partner_counts(m: &Matching) -> Vec<usize> {
    m.worker_side()
        .iter()
        .map(|f| usize::from(f.is_some()))
        .chain(m.firm_side().iter().map(|s: &WorkerSet| s.len()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::ChoiceFunction;
    use crate::fixtures::market_a;
    use crate::market::{Market, WorkerPreference};

    #[test]
    fn worker_blocks() {
        let mkt = market_a();
        let m = Matching::empty(2, 2);
        assert!(!is_blocked_by_worker(&m, 0, &mkt));
        let m = Matching::from_pairs(2, 2, &[(0, 1)]).unwrap();
        assert!(!is_blocked_by_worker(&m, 0, &mkt));
        let lone = mkt.with_preference(0, WorkerPreference::new(vec![1]).unwrap()).unwrap();
        let m = Matching::from_pairs(2, 2, &[(0, 0)]).unwrap();
        assert!(is_blocked_by_worker(&m, 0, &lone));
        assert!(!is_individually_rational(&m, &lone));
    }

    #[test]
    fn firm_blocks() {
        let one = |ranking: Vec<usize>, q| {
            Market::with_default_names(
                vec![WorkerPreference::new(vec![0]).unwrap(); 2],
                vec![ChoiceFunction::responsive(ranking, q, 2).unwrap()],
            )
            .unwrap()
        };
        assert!(!is_blocked_by_firm(&Matching::empty(2, 1), 0, &one(vec![0], 1)));
        let m = Matching::from_pairs(2, 1, &[(1, 0)]).unwrap();
        assert!(is_blocked_by_firm(&m, 0, &one(vec![0], 1)));
        let m = Matching::from_pairs(2, 1, &[(0, 0), (1, 0)]).unwrap();
        assert!(!is_blocked_by_firm(&m, 0, &one(vec![0, 1], 2)));
    }

    #[test]
    fn empty_matching_is_ir() {
        let mkt = market_a();
        assert!(is_individually_rational(&Matching::empty(2, 2), &mkt));
    }

    #[test]
    fn counts_of_all_matchings() {
        let mk = |nw: usize, nf: usize| {
            Market::with_default_names(vec![WorkerPreference::empty(); nw], vec![ChoiceFunction::empty(nw); nf])
                .unwrap()
        };
        assert_eq!(all_matchings(&mk(1, 1)).unwrap().len(), 2);
        assert_eq!(all_matchings(&mk(2, 2)).unwrap().len(), 9);
        assert_eq!(all_matchings(&mk(3, 2)).unwrap().len(), 27);
        assert!(all_matchings(&mk(7, 1)).is_err());
        assert!(all_matchings(&mk(1, 5)).is_err());
        let all = all_matchings(&mk(3, 2)).unwrap();
        assert!(all.windows(2).all(|p| p[0] < p[1]));
    }
}

//! Agents, preferences, matchings and markets.
//!
//! Agents are addressed by position: worker `i` is the `i`-th entry of
//! [`Market::workers`], firm `j` the `j`-th entry of [`Market::firms`]. String
//! identifiers only matter at the I/O boundary.

use std::collections::HashSet;
use std::fmt;

use crate::choice::ChoiceFunction;
use crate::error::{Error, Result, Side};
use crate::workerset::{WorkerSet, MAX_WORKERS};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorkerId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FirmId(pub String);

impl fmt::Display for WorkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for FirmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for WorkerId {
    fn from(s: &str) -> Self {
        WorkerId(s.to_owned())
    }
}

impl From<&str> for FirmId {
    fn from(s: &str) -> Self {
        FirmId(s.to_owned())
    }
}

/// Outcome of comparing two options under a worker's preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    StrictlyBetter,
    Equal,
    StrictlyWorse,
}

/// A worker's strict ranking of acceptable firms, best first.
///
/// Firms not in the list are unacceptable: worse than being unmatched.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorkerPreference {
    acceptable: Vec<usize>,
}

impl WorkerPreference {
    pub fn new(acceptable: Vec<usize>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &f in &acceptable {
            if !seen.insert(f) {
                return Err(Error::Input(format!("firm index {f} listed twice")));
            }
        }
        Ok(WorkerPreference { acceptable })
    }

    pub fn empty() -> Self {
        WorkerPreference::default()
    }

    /// The truncation `f, ∅` (or the empty list for `None`).
    pub fn only(firm: Option<usize>) -> Self {
        WorkerPreference {
            acceptable: firm.into_iter().collect(),
        }
    }

    pub fn acceptable(&self) -> &[usize] {
        &self.acceptable
    }

    pub fn rank(&self, firm: usize) -> Option<usize> {
        self.acceptable.iter().position(|&f| f == firm)
    }

    pub fn is_acceptable(&self, firm: usize) -> bool {
        self.acceptable.contains(&firm)
    }

    // Listed firms by position, then ∅, then every unlisted firm.
    fn tier(&self, option: Option<usize>) -> (u8, usize) {
        match option {
            None => (1, 0),
            Some(f) => match self.rank(f) {
                Some(r) => (0, r),
                None => (2, 0),
            },
        }
    }

    /// Compare two outcomes (`None` = unmatched). Unknown indices count as
    /// unacceptable.
    pub fn compare(&self, a: Option<usize>, b: Option<usize>) -> Preference {
        match self.tier(a).cmp(&self.tier(b)) {
            std::cmp::Ordering::Less => Preference::StrictlyBetter,
            std::cmp::Ordering::Equal => Preference::Equal,
            std::cmp::Ordering::Greater => Preference::StrictlyWorse,
        }
    }

    /// Strict preference `a P_w b`.
    pub fn prefers(&self, a: Option<usize>, b: Option<usize>) -> bool {
        self.compare(a, b) == Preference::StrictlyBetter
    }

    /// Weak preference `a R_w b`.
    pub fn weakly_prefers(&self, a: Option<usize>, b: Option<usize>) -> bool {
        self.compare(a, b) != Preference::StrictlyWorse
    }
}

/// Compare two outcomes for a worker, rejecting firm indices outside `0..num_firms`.
pub fn worker_prefers(
    p: &WorkerPreference,
    a: Option<usize>,
    b: Option<usize>,
    num_firms: usize,
) -> Result<Preference> {
    for f in [a, b].into_iter().flatten().chain(p.acceptable.iter().copied()) {
        if f >= num_firms {
            return Err(Error::UnknownAgent {
                side: Side::Firm,
                index: f,
            });
        }
    }
    Ok(p.compare(a, b))
}

/// A many-to-one matching, stored in both directions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    worker_side: Vec<Option<usize>>,
    firm_side: Vec<WorkerSet>,
}

impl Matching {
    pub fn empty(num_workers: usize, num_firms: usize) -> Self {
        Matching {
            worker_side: vec![None; num_workers],
            firm_side: vec![WorkerSet::EMPTY; num_firms],
        }
    }

    /// Build from the worker side; the firm side is the transpose.
    pub fn from_assignment(worker_side: Vec<Option<usize>>, num_firms: usize) -> Result<Self> {
        let mut firm_side = vec![WorkerSet::EMPTY; num_firms];
        for (w, f) in worker_side.iter().enumerate() {
            if let Some(f) = *f {
                let slot = firm_side.get_mut(f).ok_or(Error::UnknownAgent {
                    side: Side::Firm,
                    index: f,
                })?;
                slot.insert(w);
            }
        }
        Ok(Matching { worker_side, firm_side })
    }

    pub fn from_pairs(num_workers: usize, num_firms: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut side = vec![None; num_workers];
        for &(w, f) in pairs {
            let slot = side.get_mut(w).ok_or(Error::UnknownAgent {
                side: Side::Worker,
                index: w,
            })?;
            if slot.is_some() {
                return Err(Error::Input(format!("worker index {w} assigned twice")));
            }
            *slot = Some(f);
        }
        Matching::from_assignment(side, num_firms)
    }

    /// Raw constructor; nothing is checked. See [`validate_matching`].
    pub fn from_parts(worker_side: Vec<Option<usize>>, firm_side: Vec<WorkerSet>) -> Self {
        Matching { worker_side, firm_side }
    }

    pub(crate) fn from_firm_side(num_workers: usize, firm_side: Vec<WorkerSet>) -> Self {
        let mut worker_side = vec![None; num_workers];
        for (f, set) in firm_side.iter().enumerate() {
            for w in set.iter() {
                worker_side[w] = Some(f);
            }
        }
        Matching { worker_side, firm_side }
    }

    pub fn num_workers(&self) -> usize {
        self.worker_side.len()
    }

    pub fn num_firms(&self) -> usize {
        self.firm_side.len()
    }

    pub fn worker(&self, w: usize) -> Option<usize> {
        self.worker_side[w]
    }

    pub fn firm(&self, f: usize) -> WorkerSet {
        self.firm_side[f]
    }

    pub fn worker_side(&self) -> &[Option<usize>] {
        &self.worker_side
    }

    pub fn firm_side(&self) -> &[WorkerSet] {
        &self.firm_side
    }

    /// Matched `(worker, firm)` pairs in worker order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.worker_side
            .iter()
            .enumerate()
            .filter_map(|(w, f)| f.map(|f| (w, f)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    /// A worker holds at most one firm.
    AtMostOneFirm,
    /// A firm holds a set of workers.
    FirmHoldsWorkers,
    /// `w ∈ μ(f)` iff `μ(w) = f`.
    Symmetry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingViolation {
    pub clause: Clause,
    pub worker: usize,
    pub firm: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid(MatchingViolation),
}

/// Check the structural matching definition against an instance.
///
/// Out-of-range agents are input errors; broken symmetry is reported as the
/// first offending pair, scanning workers before firms.
pub fn validate_matching<I: Instance + ?Sized>(m: &Matching, inst: &I) -> Result<Validity> {
    let (nw, nf) = (inst.num_workers(), inst.num_firms());
    if m.worker_side.len() != nw || m.firm_side.len() != nf {
        return Err(Error::Input(format!(
            "matching covers {} workers and {} firms, market has {nw} and {nf}",
            m.worker_side.len(),
            m.firm_side.len()
        )));
    }
    for f in m.worker_side.iter().flatten() {
        if *f >= nf {
            return Err(Error::UnknownAgent {
                side: Side::Firm,
                index: *f,
            });
        }
    }
    for set in &m.firm_side {
        if set.span() > nw {
            return Err(Error::UnknownAgent {
                side: Side::Worker,
                index: set.span() - 1,
            });
        }
    }
    for (w, f) in m.pairs() {
        if !m.firm_side[f].contains(w) {
            return Ok(Validity::Invalid(MatchingViolation {
                clause: Clause::Symmetry,
                worker: w,
                firm: f,
            }));
        }
    }
    for (f, set) in m.firm_side.iter().enumerate() {
        for w in set.iter() {
            if m.worker_side[w] != Some(f) {
                return Ok(Validity::Invalid(MatchingViolation {
                    clause: Clause::Symmetry,
                    worker: w,
                    firm: f,
                }));
            }
        }
    }
    Ok(Validity::Valid)
}

/// Read access to a (possibly submitted) profile of preferences and choice
/// functions over fixed agent sets.
pub trait Instance {
    fn num_workers(&self) -> usize;
    fn num_firms(&self) -> usize;
    fn preference(&self, w: usize) -> &WorkerPreference;
    fn choice(&self, f: usize) -> &ChoiceFunction;
}

/// A profile assembled from borrowed parts; cheap to modify one agent at a time.
#[derive(Debug, Clone)]
pub struct ProfileView<'a> {
    pub preferences: Vec<&'a WorkerPreference>,
    pub choices: Vec<&'a ChoiceFunction>,
}

impl<'a> ProfileView<'a> {
    pub fn of<I: Instance + ?Sized>(inst: &'a I) -> Self {
        ProfileView {
            preferences: (0..inst.num_workers()).map(|w| inst.preference(w)).collect(),
            choices: (0..inst.num_firms()).map(|f| inst.choice(f)).collect(),
        }
    }
}

impl Instance for ProfileView<'_> {
    fn num_workers(&self) -> usize {
        self.preferences.len()
    }
    fn num_firms(&self) -> usize {
        self.choices.len()
    }
    fn preference(&self, w: usize) -> &WorkerPreference {
        self.preferences[w]
    }
    fn choice(&self, f: usize) -> &ChoiceFunction {
        self.choices[f]
    }
}

/// The market `(W, F, P, C)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    workers: Vec<WorkerId>,
    firms: Vec<FirmId>,
    preferences: Vec<WorkerPreference>,
    choices: Vec<ChoiceFunction>,
}

impl Market {
    pub fn new(
        workers: Vec<WorkerId>,
        firms: Vec<FirmId>,
        preferences: Vec<WorkerPreference>,
        choices: Vec<ChoiceFunction>,
    ) -> Result<Self> {
        if workers.len() > MAX_WORKERS {
            return Err(Error::Capacity {
                what: "worker set",
                size: workers.len(),
                bound: MAX_WORKERS,
            });
        }
        let mut names = HashSet::new();
        for name in workers.iter().map(|w| &w.0).chain(firms.iter().map(|f| &f.0)) {
            if !names.insert(name.as_str()) {
                return Err(Error::Input(format!("agent id {name:?} is not unique")));
            }
        }
        if preferences.len() != workers.len() {
            return Err(Error::Input(format!(
                "{} preferences for {} workers",
                preferences.len(),
                workers.len()
            )));
        }
        if choices.len() != firms.len() {
            return Err(Error::Input(format!(
                "{} choice functions for {} firms",
                choices.len(),
                firms.len()
            )));
        }
        for p in &preferences {
            if let Some(&f) = p.acceptable().iter().find(|&&f| f >= firms.len()) {
                return Err(Error::UnknownAgent {
                    side: Side::Firm,
                    index: f,
                });
            }
        }
        for (f, c) in choices.iter().enumerate() {
            if c.ground_size() != workers.len() {
                return Err(Error::Input(format!(
                    "choice function of {} is over {} workers, market has {}",
                    firms[f],
                    c.ground_size(),
                    workers.len()
                )));
            }
        }
        Ok(Market {
            workers,
            firms,
            preferences,
            choices,
        })
    }

    /// Market with generated identifiers `w1..` and `f1..`.
    pub fn with_default_names(preferences: Vec<WorkerPreference>, choices: Vec<ChoiceFunction>) -> Result<Self> {
        let workers = (1..=preferences.len()).map(|i| WorkerId(format!("w{i}"))).collect();
        let firms = (1..=choices.len()).map(|i| FirmId(format!("f{i}"))).collect();
        Market::new(workers, firms, preferences, choices)
    }

    pub fn workers(&self) -> &[WorkerId] {
        &self.workers
    }

    pub fn firms(&self) -> &[FirmId] {
        &self.firms
    }

    pub fn preferences(&self) -> &[WorkerPreference] {
        &self.preferences
    }

    pub fn choices(&self) -> &[ChoiceFunction] {
        &self.choices
    }

    pub fn worker_index(&self, id: &str) -> Option<usize> {
        self.workers.iter().position(|w| w.0 == id)
    }

    pub fn firm_index(&self, id: &str) -> Option<usize> {
        self.firms.iter().position(|f| f.0 == id)
    }

    /// The same market with a different preference profile.
    pub fn with_preferences(&self, preferences: Vec<WorkerPreference>) -> Result<Self> {
        Market::new(
            self.workers.clone(),
            self.firms.clone(),
            preferences,
            self.choices.clone(),
        )
    }

    /// The same market with one worker's list replaced.
    pub fn with_preference(&self, w: usize, p: WorkerPreference) -> Result<Self> {
        let mut prefs = self.preferences.clone();
        *prefs.get_mut(w).ok_or(Error::UnknownAgent {
            side: Side::Worker,
            index: w,
        })? = p;
        self.with_preferences(prefs)
    }

    pub fn with_choices(&self, choices: Vec<ChoiceFunction>) -> Result<Self> {
        Market::new(
            self.workers.clone(),
            self.firms.clone(),
            self.preferences.clone(),
            choices,
        )
    }

    pub fn worker_preferences(&self, w: usize, a: Option<usize>, b: Option<usize>) -> Result<Preference> {
        let p = self.preferences.get(w).ok_or(Error::UnknownAgent {
            side: Side::Worker,
            index: w,
        })?;
        worker_prefers(p, a, b, self.firms.len())
    }

    pub fn format_set(&self, s: WorkerSet) -> String {
        let names: Vec<&str> = s.iter().map(|w| self.workers[w].0.as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }

    pub fn format_firm(&self, f: Option<usize>) -> &str {
        f.map_or("∅", |f| self.firms[f].0.as_str())
    }

    pub fn format_preference(&self, p: &WorkerPreference) -> String {
        let names: Vec<&str> = p.acceptable().iter().map(|&f| self.firms[f].0.as_str()).collect();
        format!("[{}]", names.join(", "))
    }

    /// One-line rendering: each firm with its workers, then the unmatched.
    pub fn format_matching(&self, m: &Matching) -> String {
        let mut parts: Vec<String> = (0..self.firms.len())
            .map(|f| format!("{}: {}", self.firms[f], self.format_set(m.firm(f))))
            .collect();
        let unmatched: WorkerSet = (0..self.workers.len()).filter(|&w| m.worker(w).is_none()).collect();
        parts.push(format!("unmatched: {}", self.format_set(unmatched)));
        parts.join("; ")
    }
}

impl Instance for Market {
    fn num_workers(&self) -> usize {
        self.workers.len()
    }
    fn num_firms(&self) -> usize {
        self.firms.len()
    }
    fn preference(&self, w: usize) -> &WorkerPreference {
        &self.preferences[w]
    }
    fn choice(&self, f: usize) -> &ChoiceFunction {
        &self.choices[f]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pref(v: &[usize]) -> WorkerPreference {
        WorkerPreference::new(v.to_vec()).unwrap()
    }

    fn two_by_two() -> Market {
        Market::with_default_names(
            vec![pref(&[0]), pref(&[0])],
            vec![ChoiceFunction::empty(2), ChoiceFunction::empty(2)],
        )
        .unwrap()
    }

    #[test]
    fn empty_matching_is_valid() {
        let m = Matching::empty(2, 2);
        assert_eq!(validate_matching(&m, &two_by_two()).unwrap(), Validity::Valid);
    }

    #[test]
    fn symmetric_singleton_is_valid() {
        let m = Matching::from_parts(vec![Some(0), None], vec![WorkerSet::singleton(0), WorkerSet::EMPTY]);
        assert_eq!(validate_matching(&m, &two_by_two()).unwrap(), Validity::Valid);
    }

    #[test]
    fn asymmetry_reports_pair() {
        let m = Matching::from_parts(vec![Some(0), None], vec![WorkerSet::EMPTY, WorkerSet::EMPTY]);
        assert_eq!(
            validate_matching(&m, &two_by_two()).unwrap(),
            Validity::Invalid(MatchingViolation {
                clause: Clause::Symmetry,
                worker: 0,
                firm: 0
            })
        );
    }

    #[test]
    fn unknown_agents_are_input_errors() {
        let mkt = two_by_two();
        let m = Matching::from_parts(vec![Some(5), None], vec![WorkerSet::EMPTY; 2]);
        assert!(matches!(
            validate_matching(&m, &mkt),
            Err(Error::UnknownAgent {
                side: Side::Firm,
                index: 5
            })
        ));
        let m = Matching::from_parts(vec![None, None], vec![WorkerSet::singleton(3), WorkerSet::EMPTY]);
        assert!(matches!(
            validate_matching(&m, &mkt),
            Err(Error::UnknownAgent { side: Side::Worker, .. })
        ));
    }

    #[test]
    fn preference_examples() {
        let p = pref(&[0, 1]);
        assert_eq!(
            worker_prefers(&p, Some(0), Some(1), 2).unwrap(),
            Preference::StrictlyBetter
        );
        let p = pref(&[0]);
        assert_eq!(
            worker_prefers(&p, None, Some(1), 2).unwrap(),
            Preference::StrictlyBetter
        );
        assert_eq!(worker_prefers(&p, Some(0), Some(0), 2).unwrap(), Preference::Equal);
        assert_eq!(
            worker_prefers(&p, Some(1), Some(0), 2).unwrap(),
            Preference::StrictlyWorse
        );
        assert!(worker_prefers(&p, Some(7), None, 2).is_err());
    }

    #[test]
    fn duplicate_firm_rejected() {
        assert!(WorkerPreference::new(vec![1, 0, 1]).is_err());
    }

    #[test]
    fn market_rejects_shared_ids() {
        let r = Market::new(
            vec!["a".into()],
            vec!["a".into()],
            vec![WorkerPreference::empty()],
            vec![ChoiceFunction::empty(1)],
        );
        assert!(r.is_err());
    }

    fn options(nf: usize) -> impl Strategy<Value = Option<usize>> {
        prop::option::of(0..nf)
    }

    proptest! {
        #[test]
        fn preference_is_strict_weak_order(
            list in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle(),
            len in 0..=4usize,
            a in options(4), b in options(4), c in options(4),
        ) {
            let p = pref(&list[..len]);
            use Preference::*;
            let ab = p.compare(a, b);
            let ba = p.compare(b, a);
            prop_assert_eq!(ab == StrictlyBetter, ba == StrictlyWorse);
            prop_assert_eq!(ab == Equal, ba == Equal);
            if p.prefers(a, b) && p.prefers(b, c) {
                prop_assert!(p.prefers(a, c));
            }
            if a == b {
                prop_assert_eq!(ab, Equal);
            }
            // Distinct acceptable options and ∅ are never tied.
            let tier_ok = |x: Option<usize>| x.is_none_or(|f| p.is_acceptable(f));
            if a != b && tier_ok(a) && tier_ok(b) {
                prop_assert_ne!(ab, Equal);
            }
        }

        #[test]
        fn validity_matches_transpose(side in prop::collection::vec(options(3), 0..5), flip in any::<u32>()) {
            let nw = side.len();
            let built = Matching::from_assignment(side.clone(), 3).unwrap();
            let mut firm_side = built.firm_side().to_vec();
            let f = (flip % 3) as usize;
            firm_side[f] = WorkerSet::from_bits(firm_side[f].bits() ^ ((flip >> 2) & ((1 << nw) - 1)));
            let m = Matching::from_parts(side, firm_side.clone());
            let mkt = Market::with_default_names(
                vec![WorkerPreference::empty(); nw],
                vec![ChoiceFunction::empty(nw); 3],
            ).unwrap();
            let valid = validate_matching(&m, &mkt).unwrap() == Validity::Valid;
            prop_assert_eq!(valid, built.firm_side() == &firm_side[..]);
        }
    }
}

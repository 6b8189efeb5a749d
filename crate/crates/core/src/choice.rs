//! Firms' choice functions.
//!
//! A choice function is materialized as a full table indexed by the bit
//! pattern of the available set, so every checker here is an exhaustive scan
//! over subset pairs. Witnesses are the first violating pair in the order
//! `(|S|, |S'|, S, S')` with sets compared canonically.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{capacity, Error, Result, Side};
use crate::workerset::{canonical_subsets, WorkerSet, MAX_WORKERS};

/// Default bound on the ground set for exhaustive enumeration of choice functions.
pub const ENUMERATION_BOUND: usize = 4;

/// How a choice function was specified. Kept so a market can be written back
/// in the form it was read.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChoiceSource {
    /// The `quota` best available workers of `ranking`.
    Responsive {
        ranking: Vec<usize>,
        quota: usize,
    },
    /// `C(S) = target ∩ S`.
    Intersect {
        target: WorkerSet,
    },
    Table,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChoiceFunction {
    ground: usize,
    table: Vec<WorkerSet>,
    source: ChoiceSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    Substitutability,
    Consistency,
    PathIndependence,
    Lad,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Substitutability => "substitutability",
            Property::Consistency => "consistency",
            Property::PathIndependence => "path-independence",
            Property::Lad => "lad",
        })
    }
}

/// A pair of sets on which a property fails.
///
/// `left` and `right` are the two computed choices the property relates:
/// - substitutability: `C(S) ∩ S'` and `C(S')` (left should be a subset of right)
/// - consistency: `C(S)` and `C(S')` (should be equal)
/// - path independence: `C(S ∪ S')` and `C(C(S) ∪ S')` (should be equal)
/// - LAD: `C(S')` and `C(S)` (left should be no larger than right)
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChoiceWitness {
    pub property: Property,
    pub s: WorkerSet,
    pub s_prime: WorkerSet,
    pub left: WorkerSet,
    pub right: WorkerSet,
}

impl ChoiceWitness {
    /// Re-evaluate the property on the witness sets; true iff it still fails.
    pub fn replays(&self, c: &ChoiceFunction) -> bool {
        let (s, sp) = (self.s, self.s_prime);
        match self.property {
            Property::Substitutability => sp.is_subset(s) && !c.choose(s).intersection(sp).is_subset(c.choose(sp)),
            Property::Consistency => c.choose(s).is_subset(sp) && sp.is_subset(s) && c.choose(sp) != c.choose(s),
            Property::PathIndependence => c.choose(s.union(sp)) != c.choose(c.choose(s).union(sp)),
            Property::Lad => sp.is_subset(s) && c.choose(sp).len() > c.choose(s).len(),
        }
    }
}

impl fmt::Display for ChoiceWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} check at S={:?}, S'={:?} ({:?} vs {:?})",
            self.property, self.s, self.s_prime, self.left, self.right
        )
    }
}

impl ChoiceFunction {
    pub fn from_table(ground: usize, table: Vec<WorkerSet>) -> Result<Self> {
        capacity("choice ground set", ground, MAX_WORKERS)?;
        if table.len() != 1 << ground {
            return Err(Error::Input(format!(
                "choice table has {} entries, expected {}",
                table.len(),
                1usize << ground
            )));
        }
        for (bits, &chosen) in table.iter().enumerate() {
            let s = WorkerSet::from_bits(bits as u32);
            if !chosen.is_subset(s) {
                return Err(Error::Input(format!("choice {chosen:?} from {s:?} is not a subset")));
            }
        }
        Ok(ChoiceFunction {
            ground,
            table,
            source: ChoiceSource::Table,
        })
    }

    pub fn from_fn(ground: usize, f: impl Fn(WorkerSet) -> WorkerSet) -> Result<Self> {
        capacity("choice ground set", ground, MAX_WORKERS)?;
        let table = (0..1u32 << ground).map(|b| f(WorkerSet::from_bits(b))).collect();
        ChoiceFunction::from_table(ground, table)
    }

    /// The function choosing nobody from any set.
    pub fn empty(ground: usize) -> Self {
        ChoiceFunction::intersect(WorkerSet::EMPTY, ground).expect("empty target fits any ground")
    }

    /// Responsive choice: the `quota` highest-ranked available workers of
    /// `ranking`; unlisted workers are never chosen.
    pub fn responsive(ranking: Vec<usize>, quota: usize, ground: usize) -> Result<Self> {
        capacity("choice ground set", ground, MAX_WORKERS)?;
        if quota == 0 {
            return Err(Error::Input("quota must be at least 1".into()));
        }
        let mut seen = WorkerSet::EMPTY;
        for &w in &ranking {
            if w >= ground {
                return Err(Error::UnknownAgent {
                    side: Side::Worker,
                    index: w,
                });
            }
            if seen.contains(w) {
                return Err(Error::Input(format!("worker index {w} ranked twice")));
            }
            seen.insert(w);
        }
        let table = (0..1u32 << ground)
            .map(|b| {
                let s = WorkerSet::from_bits(b);
                ranking.iter().copied().filter(|&w| s.contains(w)).take(quota).collect()
            })
            .collect();
        Ok(ChoiceFunction {
            ground,
            table,
            source: ChoiceSource::Responsive { ranking, quota },
        })
    }

    /// `C(S) = target ∩ S`: the firm accepts exactly the workers of `target`
    /// that are available. With `target = ∅` this is the empty function.
    pub fn intersect(target: WorkerSet, ground: usize) -> Result<Self> {
        capacity("choice ground set", ground, MAX_WORKERS)?;
        if !target.is_subset(WorkerSet::full(ground)) {
            return Err(Error::Input(format!("{target:?} is not contained in the ground set")));
        }
        let table = (0..1u32 << ground)
            .map(|b| WorkerSet::from_bits(b).intersection(target))
            .collect();
        Ok(ChoiceFunction {
            ground,
            table,
            source: ChoiceSource::Intersect { target },
        })
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn ground(&self) -> WorkerSet {
        WorkerSet::full(self.ground)
    }

    pub fn source(&self) -> &ChoiceSource {
        &self.source
    }

    pub fn table(&self) -> &[WorkerSet] {
        &self.table
    }

    /// Same table, regardless of how the functions were specified.
    pub fn same_choices(&self, other: &ChoiceFunction) -> bool {
        self.table == other.table
    }

    /// `C(s)` for `s` inside the ground set; no bounds check beyond indexing.
    #[inline]
    pub fn choose(&self, s: WorkerSet) -> WorkerSet {
        self.table[s.bits() as usize]
    }

    pub fn evaluate(&self, s: WorkerSet) -> Result<WorkerSet> {
        if !s.is_subset(self.ground()) {
            return Err(Error::Input(format!(
                "{s:?} is not contained in the ground set of {} workers",
                self.ground
            )));
        }
        Ok(self.choose(s))
    }

    /// Blair comparison `s ⪰ t`, i.e. `s = C(s ∪ t)`.
    pub fn blair_geq(&self, s: WorkerSet, t: WorkerSet) -> bool {
        self.choose(s.union(t)) == s
    }

    /// First nested pair `S' ⊆ S`, in witness order, on which `violated` holds.
    fn first_nested(&self, mut violated: impl FnMut(WorkerSet, WorkerSet) -> bool) -> Option<(WorkerSet, WorkerSet)> {
        let by_size = subsets_by_size(self.ground);
        for ks in 0..=self.ground {
            for kp in 0..=ks {
                for &s in &by_size[ks] {
                    for &sp in by_size[kp].iter().filter(|sp| sp.is_subset(s)) {
                        if violated(s, sp) {
                            return Some((s, sp));
                        }
                    }
                }
            }
        }
        None
    }

    /// First pair `(S, S')`, in witness order, on which `violated` holds.
    fn first_pair(&self, mut violated: impl FnMut(WorkerSet, WorkerSet) -> bool) -> Option<(WorkerSet, WorkerSet)> {
        let by_size = subsets_by_size(self.ground);
        for ks in 0..=self.ground {
            for kp in 0..=self.ground {
                for &s in &by_size[ks] {
                    for &sp in &by_size[kp] {
                        if violated(s, sp) {
                            return Some((s, sp));
                        }
                    }
                }
            }
        }
        None
    }

    /// `C(S) ∩ S' ⊆ C(S')` for all `S' ⊆ S`.
    pub fn check_substitutable(&self) -> Result<(), ChoiceWitness> {
        match self.first_nested(|s, sp| !self.choose(s).intersection(sp).is_subset(self.choose(sp))) {
            None => Ok(()),
            Some((s, sp)) => Err(ChoiceWitness {
                property: Property::Substitutability,
                s,
                s_prime: sp,
                left: self.choose(s).intersection(sp),
                right: self.choose(sp),
            }),
        }
    }

    /// `C(S') = C(S)` whenever `C(S) ⊆ S' ⊆ S`.
    pub fn check_consistent(&self) -> Result<(), ChoiceWitness> {
        let violated = |s, sp| {
            let cs = self.choose(s);
            cs.is_subset(sp) && self.choose(sp) != cs
        };
        match self.first_nested(violated) {
            None => Ok(()),
            Some((s, sp)) => Err(ChoiceWitness {
                property: Property::Consistency,
                s,
                s_prime: sp,
                left: self.choose(s),
                right: self.choose(sp),
            }),
        }
    }

    /// `C(S ∪ S') = C(C(S) ∪ S')` for all pairs.
    pub fn check_path_independent(&self) -> Result<(), ChoiceWitness> {
        let direct = |s: WorkerSet, sp: WorkerSet| self.choose(s.union(sp));
        let staged = |s: WorkerSet, sp: WorkerSet| self.choose(self.choose(s).union(sp));
        match self.first_pair(|s, sp| direct(s, sp) != staged(s, sp)) {
            None => Ok(()),
            Some((s, sp)) => Err(ChoiceWitness {
                property: Property::PathIndependence,
                s,
                s_prime: sp,
                left: direct(s, sp),
                right: staged(s, sp),
            }),
        }
    }

    /// `|C(S')| ≤ |C(S)|` for all `S' ⊆ S`.
    pub fn check_lad(&self) -> Result<(), ChoiceWitness> {
        match self.first_nested(|s, sp| self.choose(sp).len() > self.choose(s).len()) {
            None => Ok(()),
            Some((s, sp)) => Err(ChoiceWitness {
                property: Property::Lad,
                s,
                s_prime: sp,
                left: self.choose(sp),
                right: self.choose(s),
            }),
        }
    }

    /// Substitutable and (optionally) consistent: the strategy space of firms.
    pub fn check_admissible(&self, require_consistency: bool) -> Result<(), ChoiceWitness> {
        self.check_substitutable()?;
        if require_consistency {
            self.check_consistent()?;
        }
        Ok(())
    }
}

fn subsets_by_size(n: usize) -> Vec<Vec<WorkerSet>> {
    let mut by_size = vec![Vec::new(); n + 1];
    for s in canonical_subsets(n) {
        by_size[s.len()].push(s);
    }
    by_size
}

/// Every substitutable and consistent choice function on `ground` workers,
/// in canonical order (tables compared image by image over the canonical
/// subset order).
pub fn enumerate_path_independent(ground: usize) -> Result<Vec<ChoiceFunction>> {
    enumerate_path_independent_with_bound(ground, ENUMERATION_BOUND)
}

pub fn enumerate_path_independent_with_bound(ground: usize, bound: usize) -> Result<Vec<ChoiceFunction>> {
    capacity("choice ground set", ground, bound.min(MAX_WORKERS))?;
    Ok(enumerate(ground, true))
}

/// Every substitutable choice function on `ground` workers, consistent or not.
pub fn enumerate_substitutable(ground: usize) -> Result<Vec<ChoiceFunction>> {
    capacity("choice ground set", ground, ENUMERATION_BOUND)?;
    Ok(enumerate(ground, false))
}

/// Cached [`enumerate_path_independent`] / [`enumerate_substitutable`] for
/// grounds within [`ENUMERATION_BOUND`].
pub fn admissible_family(ground: usize, require_consistency: bool) -> Result<&'static [ChoiceFunction]> {
    const SLOTS: usize = ENUMERATION_BOUND + 1;
    static CONSISTENT: [OnceLock<Vec<ChoiceFunction>>; SLOTS] = [const { OnceLock::new() }; SLOTS];
    static SUBSTITUTABLE: [OnceLock<Vec<ChoiceFunction>>; SLOTS] = [const { OnceLock::new() }; SLOTS];
    capacity("choice ground set", ground, ENUMERATION_BOUND)?;
    let slot = if require_consistency {
        &CONSISTENT[ground]
    } else {
        &SUBSTITUTABLE[ground]
    };
    Ok(slot.get_or_init(|| enumerate(ground, require_consistency)))
}

fn enumerate(ground: usize, require_consistency: bool) -> Vec<ChoiceFunction> {
    let order = canonical_subsets(ground);
    let candidates: Vec<Vec<WorkerSet>> = order
        .iter()
        .map(|&s| {
            let mut c: Vec<WorkerSet> = s.subsets().collect();
            c.sort();
            c
        })
        .collect();
    let mut table = vec![WorkerSet::EMPTY; 1 << ground];
    let mut out = Vec::new();
    extend(
        0,
        &order,
        &candidates,
        &mut table,
        require_consistency,
        ground,
        &mut out,
    );
    out
}

fn extend(
    i: usize,
    order: &[WorkerSet],
    candidates: &[Vec<WorkerSet>],
    table: &mut Vec<WorkerSet>,
    require_consistency: bool,
    ground: usize,
    out: &mut Vec<ChoiceFunction>,
) {
    if i == order.len() {
        out.push(ChoiceFunction {
            ground,
            table: table.clone(),
            source: ChoiceSource::Table,
        });
        return;
    }
    let s = order[i];
    for &c in &candidates[i] {
        // Every proper subset of `s` precedes it in canonical order.
        let fits = s.subsets().skip(1).all(|sp| {
            let held = table[sp.bits() as usize];
            c.intersection(sp).is_subset(held) && !(require_consistency && c.is_subset(sp) && held != c)
        });
        if fits {
            table[s.bits() as usize] = c;
            extend(i + 1, order, candidates, table, require_consistency, ground, out);
        }
    }
    table[s.bits() as usize] = WorkerSet::EMPTY;
}

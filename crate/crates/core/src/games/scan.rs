//! Exhaustive scans of a joint strategy space.
//!
//! Each player's strategies are numbered, a profile is a mixed-radix index,
//! and the rule outcome of every profile is computed once into a table. A
//! profile is an equilibrium if no single-digit change leads to an outcome the
//! changing player strictly prefers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market::Matching;
use crate::workerset::WorkerSet;

/// Mixed-radix numbering of joint strategy profiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSpace {
    radices: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl ProfileSpace {
    /// `None` if the space does not fit in `usize`.
    pub fn new(radices: Vec<usize>) -> Option<Self> {
        let mut strides = vec![0; radices.len()];
        let mut size = 1usize;
        for i in (0..radices.len()).rev() {
            strides[i] = size;
            size = size.checked_mul(radices[i])?;
        }
        Some(ProfileSpace { radices, strides, size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn players(&self) -> usize {
        self.radices.len()
    }

    pub fn radix(&self, player: usize) -> usize {
        self.radices[player]
    }

    pub fn digit(&self, index: usize, player: usize) -> usize {
        index / self.strides[player] % self.radices[player]
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        (0..self.players()).map(|p| self.digit(index, p)).collect()
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn with_digit(&self, index: usize, player: usize, digit: usize) -> usize {
        index - self.digit(index, player) * self.strides[player] + digit * self.strides[player]
    }
}

/// A matching packed into its worker-side assignment code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedOutcome {
    num_workers: usize,
    num_firms: usize,
    powers: Vec<u64>,
}

impl PackedOutcome {
    pub const UNDEFINED: u64 = u64::MAX;

    pub fn new(num_workers: usize, num_firms: usize) -> Self {
        let base = num_firms as u64 + 1;
        let powers = (0..num_workers).map(|w| base.pow(w as u32)).collect();
        PackedOutcome {
            num_workers,
            num_firms,
            powers,
        }
    }

    pub fn encode(&self, m: &Matching) -> u64 {
        (0..self.num_workers)
            .map(|w| m.worker(w).map_or(0, |f| f as u64 + 1) * self.powers[w])
            .sum()
    }

    pub fn worker(&self, code: u64, w: usize) -> Option<usize> {
        let digit = code / self.powers[w] % (self.num_firms as u64 + 1);
        digit.checked_sub(1).map(|f| f as usize)
    }

    pub fn firm(&self, code: u64, f: usize) -> WorkerSet {
        (0..self.num_workers)
            .filter(|&w| self.worker(code, w) == Some(f))
            .collect()
    }

    pub fn decode(&self, code: u64) -> Matching {
        let side = (0..self.num_workers).map(|w| self.worker(code, w)).collect();
        Matching::from_assignment(side, self.num_firms).expect("codes stay in range")
    }
}

pub(crate) struct Scan {
    pub table: Vec<u64>,
    pub equilibria: Vec<usize>,
}

impl Scan {
    pub fn undefined(&self) -> usize {
        self.table.iter().filter(|&&c| c == PackedOutcome::UNDEFINED).count()
    }
}

/// Tabulate `outcome` over the whole space and collect equilibria.
///
/// `outcome` returns `None` where the rule has no outcome; such profiles are
/// never equilibria and deviations into them are ignored. `gains(player,
/// base, alternative)` decides whether moving between two packed outcomes is
/// a strict improvement for that player.
pub(crate) fn exhaustive<O, G>(space: &ProfileSpace, packed: &PackedOutcome, outcome: O, gains: G) -> Result<Scan>
where
    O: Fn(&[usize]) -> Result<Option<Matching>> + Sync,
    G: Fn(usize, u64, u64) -> bool + Sync,
{
    let table = (0..space.size())
        .into_par_iter()
        .map(|i| {
            Ok(match outcome(&space.decode(i))? {
                Some(m) => packed.encode(&m),
                None => PackedOutcome::UNDEFINED,
            })
        })
        .collect::<Result<Vec<u64>, Error>>()?;
    let is_equilibrium = |i: usize| {
        let base = table[i];
        if base == PackedOutcome::UNDEFINED {
            return false;
        }
        (0..space.players()).all(|p| {
            let own = space.digit(i, p);
            (0..space.radix(p)).filter(|&d| d != own).all(|d| {
                let alt = table[space.with_digit(i, p, d)];
                alt == PackedOutcome::UNDEFINED || !gains(p, base, alt)
            })
        })
    };
    let equilibria = (0..space.size())
        .into_par_iter()
        .filter(|&i| is_equilibrium(i))
        .collect();
    Ok(Scan { table, equilibria })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_radix_roundtrip() {
        let space = ProfileSpace::new(vec![5, 5, 6, 6]).unwrap();
        assert_eq!(space.size(), 900);
        for i in [0, 1, 37, 899] {
            assert_eq!(space.encode(&space.decode(i)), i);
        }
        let i = space.encode(&[1, 2, 3, 4]);
        assert_eq!(space.decode(space.with_digit(i, 2, 0)), vec![1, 2, 0, 4]);
        assert!(ProfileSpace::new(vec![usize::MAX, 2]).is_none());
    }

    #[test]
    fn packed_roundtrip() {
        let packed = PackedOutcome::new(3, 2);
        let m = Matching::from_pairs(3, 2, &[(0, 1), (2, 1)]).unwrap();
        let code = packed.encode(&m);
        assert_eq!(packed.decode(code), m);
        assert_eq!(packed.worker(code, 1), None);
        assert_eq!(packed.firm(code, 1), [0, 2].into_iter().collect());
    }

    #[test]
    fn matching_pennies_has_no_equilibrium() {
        // Two players, two strategies; encode "who wins" as worker 0's firm.
        let space = ProfileSpace::new(vec![2, 2]).unwrap();
        let packed = PackedOutcome::new(1, 2);
        let scan = exhaustive(
            &space,
            &packed,
            |d| {
                Ok(Some(
                    Matching::from_assignment(vec![Some(usize::from(d[0] != d[1]))], 2).unwrap(),
                ))
            },
            |p, base, alt| {
                let winner = |c| packed.worker(c, 0).unwrap();
                winner(alt) == p && winner(base) != p
            },
        )
        .unwrap();
        assert!(scan.equilibria.is_empty());
        assert_eq!(scan.undefined(), 0);
    }
}

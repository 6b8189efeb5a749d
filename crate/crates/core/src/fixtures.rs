//! Small named markets used across tests, benches and documentation.

use crate::choice::ChoiceFunction;
use crate::market::{Market, WorkerPreference};
use crate::workerset::WorkerSet;

/// Two workers, two firms, two stable matchings.
///
/// `f1` ranks `w1` over `w2`, `f2` ranks `w2` over `w1`, both with quota 1;
/// `w1` prefers `f2` to `f1`, `w2` prefers `f1` to `f2`.
pub fn market_a() -> Market {
    Market::with_default_names(
        vec![
            WorkerPreference::new(vec![1, 0]).unwrap(),
            WorkerPreference::new(vec![0, 1]).unwrap(),
        ],
        vec![
            ChoiceFunction::responsive(vec![0, 1], 1, 2).unwrap(),
            ChoiceFunction::responsive(vec![1, 0], 1, 2).unwrap(),
        ],
    )
    .unwrap()
}

/// The non-LAD "manager" choice on three workers: hire `w1` alone whenever
/// available, otherwise everyone.
pub fn manager_choice() -> ChoiceFunction {
    let boss = WorkerSet::singleton(0);
    ChoiceFunction::from_fn(3, |s| if s.contains(0) { boss } else { s }).unwrap()
}

/// One firm that accepts any set of workers, listed by both of two workers.
pub fn single_firm_take_all() -> Market {
    Market::with_default_names(
        vec![WorkerPreference::new(vec![0]).unwrap(); 2],
        vec![ChoiceFunction::from_fn(2, |s| s).unwrap()],
    )
    .unwrap()
}

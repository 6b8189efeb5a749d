//! Many-to-one matching markets where firms choose with substitutable choice
//! functions: stability, deferred acceptance, and the strategic games induced
//! by stable rules.

pub mod choice;
pub mod da;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod games;
pub mod generate;
pub mod market;
pub mod search;
pub mod stability;
pub mod workerset;

pub use choice::{ChoiceFunction, ChoiceSource, ChoiceWitness, Property};
pub use da::{da_firm_proposing, da_worker_proposing, DaOptions, DaTrace, Schedule};
pub use error::{Error, Result, Side};
pub use format::{emit_market, emit_profile, parse_market, parse_profile};
pub use games::{GameConfig, StableRule};
pub use generate::{random_market, seeded_suite, Family};
pub use market::{FirmId, Instance, Market, Matching, Preference, WorkerId, WorkerPreference};
pub use stability::{ir_set, is_stable, stable_set};
pub use workerset::WorkerSet;

use std::fmt;

use thiserror::Error;

use crate::choice::ChoiceWitness;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Worker,
    Firm,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Worker => "worker",
            Side::Firm => "firm",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown {side} index {index}")]
    UnknownAgent { side: Side, index: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{what} of size {size} exceeds the enumeration bound {bound}")]
    Capacity {
        what: &'static str,
        size: usize,
        bound: usize,
    },

    /// A submitted choice function is outside the admissible family.
    #[error("choice function of firm {firm} fails the {witness}")]
    Precondition { firm: usize, witness: ChoiceWitness },

    #[error("no stable matching exists under the submitted profile")]
    NoStableMatching,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn capacity(what: &'static str, size: usize, bound: usize) -> Result<()> {
    if size > bound {
        Err(Error::Capacity { what, size, bound })
    } else {
        Ok(())
    }
}

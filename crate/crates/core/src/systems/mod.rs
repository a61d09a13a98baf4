//! The unlabelled systems CLC0, CLC, CLC+ and R.

mod oracle;
mod rules;
mod trace;

pub use oracle::{
    conversion_search_clc0, contract, eq, joinable, normalize, redexes, ContractError, EqVerdict,
    EqWitness, Join, NoReason, Normalized, Oracle, Redex, RedexScan, ReplayError,
};
pub use rules::{CondAtom, EqualityOf, Rule, SystemId};
pub use trace::{ConvStep, ConversionSequence, Dir, Step, Trace, TraceFormatError, TraceStep};

use serde::{Deserialize, Serialize};

/// Search budget shared by every bounded procedure.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fuel {
    /// Steps of a normalization, or nodes visited by a breadth-first search.
    pub max_steps: usize,
    /// Terms with more nodes than this are pruned.
    pub max_term_size: usize,
    /// Deepest level at which conditions are evaluated.
    pub max_level: u32,
}

impl Default for Fuel {
    fn default() -> Fuel {
        Fuel {
            max_steps: 10_000,
            max_term_size: 60,
            max_level: 8,
        }
    }
}

impl Fuel {
    pub fn new(max_steps: usize, max_term_size: usize, max_level: u32) -> Fuel {
        assert!(max_steps > 0 && max_term_size > 0 && max_level > 0);
        Fuel {
            max_steps,
            max_term_size,
            max_level,
        }
    }

    pub fn with_level(&self, max_level: u32) -> Fuel {
        Fuel {
            max_level,
            ..self.clone()
        }
    }
}

//! Term enumeration, random generation and the property suites.

mod dot;
mod enumerate;
mod gen;
mod suites;

pub use dot::sgraph_to_dot;
pub use enumerate::{count_terms, enumerate_lterms, enumerate_terms};
pub use gen::{
    gen_convertible_to_f, gen_term, mix, random_lterm, random_redex_term, random_reduction, random_term, GenConfig,
};
pub use suites::{
    run_case, run_suite, standardness_leaves, Failure, SuiteConfig, SuiteError, SuiteReport,
    Tally, SUITES,
};

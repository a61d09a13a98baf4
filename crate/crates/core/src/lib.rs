pub mod clcs;
pub mod harness;
pub mod labelled;
pub mod simulation;
pub mod syntax;
pub mod systems;
pub mod term;

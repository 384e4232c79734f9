pub mod kripke;
pub mod rng;
pub mod syntax;
pub mod semantics;
pub mod fo;
pub mod gen;
pub mod translation;
pub mod configspace;
pub mod equivalence;
pub mod games;
pub mod analysis;
pub mod suite;

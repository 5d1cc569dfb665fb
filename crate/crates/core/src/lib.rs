//! Zone-based reachability for timed automata with the LU-simulation
//! abstraction `a≼LU` and its quadratic inclusion test.

pub mod alu;
pub mod automaton;
pub mod dbm;
pub mod explorer;
pub mod model_io;
pub mod oracles;
pub mod regions;
pub mod weights;

pub use automaton::{Atom, Automaton, Comparison, Guard, LuBounds, Transition};
pub use dbm::{DbmError, DistanceGraph, ScaledGraph, Valuation};
pub use weights::{LuConstant, Relation, Weight, WeightError};

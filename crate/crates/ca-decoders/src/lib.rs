//! Cellular-automaton decoders (SCALA and Harrington) for repetition and toric
//! codes under bit-flip noise, exact reference decoders, Markov-chain lifetime
//! models and a reproducible Monte Carlo harness.

pub mod bits;
pub mod error;
pub mod harness;
pub mod harrington;
pub mod lattice;
pub mod markov;
pub mod oracles;
pub mod record;
pub mod scala;

pub use error::{Error, Result};
pub use lattice::{Direction, RepetitionState, Syndrome1D, Syndrome2D, ToricState};
pub use scala::{ResetSchedule, Scala1D, Scala2D, ScalaCell1D, ScalaCell2D};

//! Gate-level compiler, simulator, and resource analyzer for nearest-neighbor
//! modular-exponentiation circuits.
//!
//! The crate is organized around a small gate IR ([`circuit`]) with an
//! as-soon-as-possible depth scheduler, a library of reusable sub-circuit
//! builders ([`library`]), the quantum arithmetic compilers ([`qarith`]),
//! a reversible-classical variant ([`carith`]), simulation backends
//! ([`sim`]), and Monte Carlo / resource analysis ([`analysis`]).
//!
//! All rotation angles in the IR are exact dyadic fractions of a turn
//! ([`phase::DyadicPhase`]); floating point enters only in the simulator.
//!
//! Cost model: any two-wire gate between adjacent line positions costs one
//! unit of depth and size. Plain one-wire gates (`H`, `X`, `Rz`) are free in
//! depth but count one unit of size; measurements and classically-controlled
//! rotations occupy a time slice on their wire.

pub mod analysis;
pub mod carith;
pub mod circuit;
pub mod gate;
pub mod library;
pub mod phase;
pub mod qarith;
pub mod sim;
pub mod text;

pub use circuit::{Circuit, CostModel, ResourceReport};
pub use gate::Gate;
pub use phase::DyadicPhase;

//! Simulation and analysis library for a two-way butterfly relay network.
//!
//! Four sources talk to four destinations through two hops of relays: side
//! relays `R1`/`R3` each hear two sources, the center relay `R2` hears all
//! four, and each destination is co-located with (and shares everything with)
//! the source transmitting in the opposite direction. The library models the
//! channel ([`netmodel`]), implements the relaying schemes whose sum-rate
//! slopes this network supports ([`schemes`], [`beamform`]), and measures
//! those slopes together with the matching cut-set upper bounds
//! ([`analysis`]).
//!
//! Everything is deterministic: channels, noise, and codebooks are drawn from
//! independent ChaCha streams keyed by `(seed, tag, index)`, so identical
//! inputs reproduce identical outputs byte for byte.
//!
//! The crate is `no_std` (with `alloc`); IO, serialization, and the CLI live
//! in the companion `butterfly-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod beamform;
pub mod bits;
pub mod linalg;
pub mod netmodel;
pub mod rng;
pub mod schemes;

pub use num_complex::Complex64;

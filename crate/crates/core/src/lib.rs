//! Lattice-based data hiding.
//!
//! Nested lattice pairs `Λc ⊂ Λf` split the fine lattice into `|det J|`
//! cosets, one per message symbol. Classic QIM moves the host onto the
//! nearest point of the chosen coset; the minimum-distortion variant only
//! moves it as far as the packing sphere around that point, which is all the
//! closest-coset decoder needs.
//!
//! * [`lattice`]: lattices, geometry and exact nearest-point decoders.
//! * [`coset`]: nested codes and the message-index ↔ coset map.
//! * [`embed`]: QIM / minimum-distortion embedding and decoding.
//! * [`analysis`]: MSE/PSNR/PRD, distortion theory, Monte Carlo oracles, AWGN.
//! * [`signal`]: CSV and WFDB format 212 input, blocking, message packing.
//! * [`harness`]: experiment configuration, reports and the CLI commands.

pub mod analysis;
pub mod coset;
pub mod embed;
mod error;
pub mod harness;
pub mod lattice;
mod rng;
pub mod signal;

pub use coset::{CodeSpec, NestedCode};
pub use embed::{DecodeOutcome, EmbedKind, EmbedOutcome, Epsilon, Method};
pub use error::{Error, Result};
pub use lattice::{Lattice, LatticeGeometry, LatticeKind, LatticePoint};

/// Library version recorded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

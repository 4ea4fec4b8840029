//! Density-operator simulator for the quantum Newcomb game.
//!
//! * [`linalg`]: small dense complex matrices, kets, DFT and a Jacobi
//!   eigensolver for Hermitian matrices.
//! * [`game`]: game states, payoff observables and per-player tactics.
//! * [`newcomb`]: the Hadamard sandwich protocol and its restoration check.
//! * [`market`]: the market variant over projective strategy coordinates.
//! * [`cli`]: game-spec documents, reports, landscape CSV and the command line.

pub mod cli;
pub mod error;
pub mod game;
pub mod linalg;
pub mod market;
pub mod newcomb;
pub mod random;

pub use error::{Error, ErrorCategory, Result};
pub use game::{GameState, MixedTactic, PayoffMatrix, PayoffObservable, Player};
pub use linalg::{ComplexMatrix, Ket, C64};
pub use market::{Chart, LandscapeSample, ProjectivePoint, ScanConfig};
pub use newcomb::{ProtocolParams, ProtocolRun};

//! Unique word OFDM baseband simulation.
//!
//! The crate generates UW-OFDM symbols with the two-step and the direct
//! unique word approach, passes them through a cyclic multipath channel with
//! AWGN, decodes them with the LMMSE (Wiener smoothing) receiver, computes
//! closed-form mean symbol energies and runs Monte Carlo BER sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod energy;
pub mod error;
pub mod generator;
pub mod linalg;
pub mod receiver;
pub mod sequences;
pub mod sim;

pub use channel::{ChannelTaps, NoiseModel};
pub use config::SystemConfig;
pub use energy::{db_shift, energy_direct, energy_two_step, EnergyBreakdown};
pub use error::{ConfigError, Error, Result};
pub use generator::{build_generator, Approach, GeneratorMatrices, SymbolFrames};
pub use linalg::{ComplexMatrix, ComplexVector};
pub use receiver::{build_receiver, Constellation, Modulation, ReceiverOperator};
pub use sequences::{SequenceKind, SequenceSpec, UniqueWord};
pub use sim::{run_sweep, BerPoint, SweepSpec};

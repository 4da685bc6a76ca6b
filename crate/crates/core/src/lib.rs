//! Exact numerical simulation of joint weak measurement on pre/postselected
//! qubit registers, built to reproduce the quantum violation of the
//! pigeonhole principle.
//!
//! The crate has two measurement engines that must agree with each other:
//!
//! * [`weakmeas`] — an abstract circuit model: entangled meter states are
//!   coupled to signal qubits through CNOT gates, the signal is postselected,
//!   and normalized readouts of the conditional meter statistics converge to
//!   (joint) weak values as the measurement strength goes to zero.
//! * [`photonics`] — a second-quantized linear-optics model of the proposed
//!   experiment: three-photon entangled-polarization meter preparation on a
//!   beam-splitter network, coincidence postselection, and Mach-Zehnder
//!   pre/postselection of each photon's path.
//!
//! Both sit on the dense state-vector algebra in [`qstate`]. The [`harness`]
//! module drives parameter sweeps, table output, and the acceptance suite;
//! the `qpigeon` binary exposes it on the command line.

// pub mod harness;
pub mod photonics;
pub mod qstate;
pub mod weakmeas;

pub use qstate::{Ket, Label, Operator};


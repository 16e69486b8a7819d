//! Numerical toolkit for a lossy bosonic channel under semi-classical jamming.
//!
//! The channel is a two-mode beam splitter of transmissivity `tau`: the sender
//! drives one input port with coherent states, an adversary drives the other
//! with semi-classical (positive P-representation) states, and the receiver
//! observes one output port. Everything is computed on a truncated Fock basis
//! with explicit bookkeeping of the probability weight lost to truncation.
//!
//! Modules:
//! - [`fock`]: states of a single mode (coherent, thermal, phase-averaged),
//!   energies, trace distances, sub-Gaussian tail checks.
//! - [`beamsplitter`]: the photon-number-conserving block unitary, the jammed
//!   channel, and the pruning channel that folds high excitations to vacuum.
//! - [`entropy`]: von Neumann and relative entropy, the Gordon function and
//!   its inverse, Holevo quantities, effective photon numbers through loss.
//! - [`epi`]: gap evaluation and scan harness for entropy power inequalities.
//! - [`capacity`]: discretized min-max evaluation of the jammed-channel
//!   capacity and its closed form.
//! - [`lemmas`]: desk-scale verification of the supporting concentration,
//!   typicality, and gentle-measurement bounds.
//! - [`coding`]: small-blocklength codebooks, pretty-good-measurement
//!   decoding, worst-case jammer search, and common-randomness averaging.
//!
//! All entropies are in bits. With the default `parallel` feature the scan
//! and Monte Carlo loops run on rayon; disabling it yields a sequential
//! build with identical (bit-for-bit) results.

pub mod beamsplitter;
pub mod capacity;
pub mod coding;
pub mod entropy;
pub mod epi;
pub mod error;
pub mod fock;
pub mod lemmas;
pub(crate) mod optim;
pub(crate) mod par;

pub use error::{AvcError, Result};

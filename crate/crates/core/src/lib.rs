//! Reliability of slotted ALOHA with capture in an indoor optical wireless
//! (OWC) IoT cell.
//!
//! Users are dropped uniformly on a disk below a ceiling-mounted photodetector.
//! Each active user reaches the receiver over a Lambertian line-of-sight
//! channel, and the receiver tries to decode one randomly chosen active user
//! even when the slot holds a collision. The crate computes the distribution
//! of that user's SINR and the resulting outage probability two ways:
//!
//! * analytically, by building the density of interference plus noise with
//!   a log-domain convolution and integrating the SINR ratio against it
//!   ([`aggregate`], [`sinr`]), cross-checked against numerical inversion of
//!   the characteristic function ([`cf`], [`inversion`]);
//! * by Monte Carlo simulation of individual slots ([`montecarlo`]).
//!
//! [`reliability`] mixes the conditional outage over Bernoulli arrivals and
//! produces parameter sweeps, including the classical destructive-collision
//! baseline.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel execution live in the companion `owc-capture-cli` crate.

#![no_std]
// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod aggregate;
pub mod cf;
pub mod channel;
mod error;
pub mod inversion;
pub mod montecarlo;
pub mod quadrature;
pub mod reliability;
pub mod sinr;
pub mod tabulated;

pub use cf::{interference_cf, single_interferer_cf, ComplexValue};
pub use channel::{CellGeometry, LedTransmitter, PhotoDetector, PowerNoiseParams, SystemModel};
pub use error::{Error, Result};
pub use inversion::{interference_pdf, interference_pdf_convolution};
pub use montecarlo::{McConfig, McEstimate};
pub use quadrature::QuadratureSpec;
pub use reliability::{CaptureMode, MixtureMode, OutageQuery, SweepAxis, SweepResult, SweepRow, TrafficModel};
pub use sinr::{conditional_sinr_cdf, conditional_sinr_pdf};
pub use tabulated::TabulatedDistribution;

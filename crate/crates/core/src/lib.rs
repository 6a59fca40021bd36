//! Core algorithms for signal quality assessment of periodic time series.
//!
//! Everything in this crate is pure computation over in-memory samples: no
//! files, no clocks, no threads. The companion `sqa-cli` crate layers record
//! parsing, noise benchmarks, and the command-line interface on top.
//!
//! The crate is `no_std` (with `alloc`) so the quality indices and detectors
//! can run on embedded acquisition front ends as well as on hosts.

#![cfg_attr(not(test), no_std)]
#![cfg_attr(test, allow(unused_imports))]

#[macro_use]
extern crate alloc;

pub mod ae;
pub mod classify;
pub mod emd;
mod error;
pub mod fft;
pub mod filter;
pub mod outlier;
pub mod peaks;
pub mod signal;
pub mod spectrum;
pub mod sqi;
pub mod stats;
pub mod synth;
pub mod wavelet;

pub use error::{Error, Result};
pub use signal::Signal;
pub use stats::Flagged;

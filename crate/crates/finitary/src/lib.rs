//! Perfect simulation of random fields and one-dimensional processes as
//! finitary codings of i.i.d. noise, plus empirical verification of the
//! Gaussian concentration bounds such codings are supposed to satisfy.
//!
//! The crate has three layers:
//!
//! * **Simulation** — a counter-based replayable noise field ([`noise`]),
//!   lattice geometry and local observables ([`lattice`]), a generic PCA
//!   engine ([`pca`]), coupling-from-the-past certification ([`cftp`]),
//!   and concrete models ([`models`]): heat-bath Ising, the parking
//!   process, Doeblin chains with multigamma coupling, the Toboggan chain,
//!   renewal processes, and chains with unbounded memory.
//! * **Measurement** — coding radii and their moments, overlap kernels and
//!   the Toeplitz quadratic form ([`toeplitz`]), truncation and
//!   composition checks ([`radius`]).
//! * **Verdicts** — moment-based concentration coefficients, MGF/tail/
//!   variance margin checks, Marton-type influence bounds, short-range
//!   factorization tests, and quantitative blow-up checks ([`conc`]).
//!
//! Every sampler is a pure function of `(seed, stream, site, time)`, so
//! runs replay bit-for-bit regardless of thread count; replicas are
//! embarrassingly parallel with `stream = replica id`.
//!
//! The `examples/` directory holds one runnable program per capability;
//! the thin `finitary` binary drives batch experiments from config files.

pub mod cftp;
pub mod conc;
pub mod config;
pub mod error;
pub mod lattice;
pub mod models;
pub mod noise;
pub mod pca;
pub mod radius;
pub mod report;
pub mod runner;
pub mod stats;
pub mod toeplitz;

pub use error::{Error, Result};

//! Event-driven simulator and numerical toolkit for the one-dimensional
//! symmetric simple exclusion process on a ring with a single slow bond.
//!
//! The lattice has `N` sites on `Z/NZ`. Neighbouring occupancies swap at
//! rate `N^2` across every bond except the one between sites `N-1` and `0`,
//! which runs at rate `N`. On top of the raw dynamics the crate provides
//! the spectral machinery used to study density fluctuations around the
//! Bernoulli product state at intermediate (moderate) scalings `N^alpha`
//! with `1/2 < alpha < 1`:
//!
//! - [`basis`]: the orthogonal eigenbasis of the half-line-coupled Laplacian
//!   (sine modes with transcendental wavenumbers plus cosine modes), with
//!   projections, a Frechet-style metric, and boundary-condition residuals.
//! - [`process`]: exact continuous-time simulation (Gillespie), product
//!   initial states, event logs, and a pluggable observer interface.
//! - [`fields`]: fluctuation fields along trajectories, slow-bond occupation
//!   integrals, gradient-square integrals, and block density profiles.
//! - [`hydro`]: heat semigroup with the slow-bond boundary condition and the
//!   linear-response mode system driven by a test function.
//! - [`rate`]: the energy bilinear form, its path version, the linear path
//!   functional, and the initial/dynamic rate functions with certificates.
//! - [`martingale`]: exponential (Feynman-Kac) and linear (Dynkin)
//!   martingales along simulated paths, expansion terms, and brackets.
//! - [`moments`]: Cramer rate function for Bernoulli block means, tail and
//!   moment bound constants, and exact binomial verification.
//! - [`experiment`]: named scenarios, flat-file configuration, and
//!   deterministic CSV/JSONL result emission used by the `slowbond` binary.
//!
//! # Runnable examples
//!
//! Each major capability has a runnable example; start there:
//!
//! ```text
//! cargo run --release --example basis_tour           # eigenbasis numbers
//! cargo run --release --example stationarity_check   # invariance of the product state
//! cargo run --release --example hydro_profile        # block densities vs heat flow
//! cargo run --release --example fluctuation_fields   # mode trajectories and variances
//! cargo run --release --example rate_identities      # rate function cross-checks
//! cargo run --release --example martingale_mean_one  # exponential martingale check
//! cargo run --release --example dynkin_brackets      # brackets and pathwise bounds
//! cargo run --release --example moment_bounds        # Chernoff and moment constants
//! ```
//!
//! The thin `slowbond` binary wraps the same scenarios behind a
//! `run`/`selftest` command line for scripted use.

pub mod basis;
pub mod experiment;
pub mod fields;
pub mod hydro;
pub mod martingale;
pub mod moments;
pub mod process;
pub mod quad;
pub mod rate;

/// Errors surfaced by fallible operations across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A requested site occupation probability left [0, 1].
    #[error("site occupation probability {0} is outside [0, 1]")]
    OutOfRangeDensity(f64),
    /// Two objects that must share a mode cutoff disagree.
    #[error("mode cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(usize, usize),
    /// A linear solve hit a pivot too small to trust.
    #[error("singular normal equations (pivot {0:e})")]
    SingularSystem(f64),
    /// Configuration file or key-value parse failure.
    #[error("config: {0}")]
    Config(String),
    /// Output-file failure while emitting results.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

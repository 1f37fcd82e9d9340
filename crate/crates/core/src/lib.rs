//! Exact zero-temperature quench dynamics of the spin-1/2 XY chain in a
//! transverse field.
//!
//! The chain
//!
//! ```text
//! H = -1/2 Σ_n [(1+δ) σˣₙσˣₙ₊₁ + (1-δ) σʸₙσʸₙ₊₁] - h Σ_n σᶻₙ
//! ```
//!
//! maps onto free fermions, so every observable reduces to a sum over
//! momentum modes. The crate evaluates those sums for single quenches
//! (`h_i → h_f1`) and cyclic quenches (`h_i → h_f1 → h_f2` after a dwell
//! time `T`), and carries a brute-force exact-diagonalization oracle that
//! checks every formula on small periodic chains.
//!
//! Modules:
//! - [`spectral`]: parameters, momentum grids, dispersion, Bogoliubov angles
//!   and ground-state observables.
//! - [`quench`]: single-quench time series, long-time averages, ergodicity
//!   diagnostics, `|C_0|` and stationary modes.
//! - [`cyclic`]: double-quench kernels, time series and dwell-time sweeps.
//! - [`oracle`]: dense exact diagonalization of the spin Hamiltonian.

pub mod cyclic;
pub mod error;
pub mod oracle;
pub mod quench;
pub mod spectral;

mod sum;

pub use error::{Error, Result};
pub use quench::{Observables, QuenchProtocol, TimeSeries};
pub use spectral::{Angle, BogoliubovFrame, GridScheme, ModelParams, MomentumGrid};

//! Repelling point configurations on compact manifolds.
//!
//! Points interact through a heat-kernel pair: a radial potential `k`, its
//! force law `H = -k'`, and the spectral weights `h(λ) = e^{-λt}`. The crate
//! evaluates the energy geometrically (sum over connecting geodesics) and, on
//! flat tori, spectrally (weighted Weyl sums), checks that the two agree,
//! minimizes it, and certifies equidistribution of the minimizers.
//!
//! Supported models are flat tori in dimensions 1 to 3 and the Bolza surface
//! of genus 2.

pub mod cli;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod kernels;
pub mod manifolds;
pub mod optimize;
pub mod spectrum;
pub mod sum;

pub use error::{Error, Result};

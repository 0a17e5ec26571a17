//! Monte Carlo and exact numerics for Brownian loop soups on planar discs.
//!
//! The crate samples Poisson ensembles of discretized Brownian loops,
//! measures their winding numbers around marked points, and assembles the
//! renormalized winding field `δ^{-α a(β)} W_x` together with the reference
//! values it is checked against.
//!
//! Module map:
//! - [`geometry`]: disc domains, Möbius uniformizers and pullback balls.
//! - [`sampler`]: Brownian bridges and the truncated loop soup.
//! - [`winding`]: winding numbers and winding spectra.
//! - [`field`]: the winding field, its martingale traces and field integrals.
//! - [`exact`]: Bessel functions, rooted winding masses and closed forms.
//! - [`stats`]: estimators and goodness-of-fit machinery.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod field;
pub mod geometry;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod winding;

pub use error::{Error, Result};
pub use geometry::{DiscDomain, PlanePoint, PullbackBall};
pub use rng::RngStream;
pub use sampler::{Loop, LoopSoup, SoupConfig};

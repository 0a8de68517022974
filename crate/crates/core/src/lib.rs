//! Numerical laboratory for large, moderate and noncentral moderate
//! deviations of sums and maxima of i.i.d. samples, and of sums of partial
//! minima of exponentials.
//!
//! The crate is organised bottom-up:
//!
//! - [`distmodel`]: the i.i.d. distribution families and their truncations.
//! - [`cgf`]: the conditional cumulant generating function of a truncated draw.
//! - [`legendre`]: one-dimensional Legendre–Fenchel conjugation.
//! - [`rates`]: the catalog of rate functions.
//! - [`simulate`]: seeded Monte Carlo engines and scaling families.
//! - [`verify`]: experiments that confront limit statements with exact
//!   formulas or Monte Carlo estimates.

pub mod cgf;
pub mod distmodel;
pub mod error;
pub mod ext;
pub mod legendre;
pub mod quadrature;
pub mod rates;
pub mod rng;
pub mod simulate;
pub mod stats;
pub mod verify;

pub use cgf::{ConditionalCgf, CgfMode, KappaPartials};
pub use distmodel::{DistributionModel, DistributionSpec, Family, Support};
pub use error::{Error, Result};
pub use ext::ExtReal;
pub use legendre::{conjugate, Argmax, ConjugateResult, Interval};
pub use rates::{RateFunction, RateKey, Speed};
pub use rng::{derive_seed, stream, Stream};
pub use simulate::{LSequence, MinimaSample, Regime, ScalingFamily, SpeedKind, SumMaxSample};
pub use verify::{LogProbEstimate, Method, SlopeFitReport};

//! Large and moderate deviations for linear combinations of exponential
//! spacings.
//!
//! For i.i.d. `Exp(λ)` observations with order statistics `X_{k:n}` (and
//! `X_{0:n} = 0`), the statistic
//!
//! ```text
//! C_n(w) = Σ_{k=0}^{n-1} w(k/n) (X_{k+1:n} − X_{k:n})
//! ```
//!
//! is a sum of independent exponential spacings. This crate simulates it
//! exactly, computes its limiting cumulant function `Λ_w` and rate function
//! `Λ_w*`, evaluates the associated bounds and asymptotic moments, and ships
//! the empirical cumulative-entropy estimators that are special cases of it.
//!
//! Module map:
//!
//! - [`weights`]: weight functions `w`, the ratio `h_w = w/(1−x)`, score
//!   functions and the regularity checks.
//! - [`sampler`]: exact and exponentially tilted simulation, exact moments
//!   and MGF.
//! - [`rate`]: `Λ_w`, its derivatives, the Legendre transform, steepness,
//!   the relative-entropy upper bound and the Jensen bound.
//! - [`asymptotics`]: Monte Carlo harnesses for large deviations, moderate
//!   deviations, the CLT, and the L-statistic mean/variance identities.
//! - [`entropy`]: empirical cumulative entropies.

pub mod asymptotics;
pub mod entropy;
pub mod error;
pub mod ext;
pub mod parallel;
pub mod quad;
pub mod rate;
pub mod rng;
pub mod sampler;
pub mod search;
pub mod special;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use weights::{ScoreFunction, WeightFamily, WeightFunction};

//! Branching Brownian motion in the inhomogeneous breeding potential `beta |x|^p`.
//!
//! Particles diffuse as independent Brownian motions and split into `1 + A`
//! offspring at rate `beta |x|^p`, with `p` in `[0, 2)`. After rescaling space
//! by `T^{2/(2-p)}` and time by `T`, the number of particles tracking a
//! rescaled path `f : [0,1] -> R` is governed by the functional
//!
//! ```text
//! K(f, t) = integral_0^t [ m beta |f(s)|^p - f'(s)^2 / 2 ] ds .
//! ```
//!
//! This crate computes the objects attached to that functional and checks
//! them against direct simulation:
//!
//! * [`model`] — model parameters and the branching rate.
//! * [`rate`] — discretized paths, `K(f, t)`, extinction times, presence rates.
//! * [`euler_lagrange`] — the frontier `r(s)` and the optimal-path boundary
//!   value problems (unconstrained and frontier-constrained), solved in
//!   first-integral form.
//! * [`profiles`] — growth profiles `K(z)` for expected and almost-sure
//!   counts, optimal endpoints, closed forms, and the profile ODE residual.
//! * [`sim`] — a Monte Carlo engine for the particle system with tube
//!   counting, additive-martingale and many-to-one validators, and the
//!   confined spine walk.
//! * [`acceptance`] — the runnable acceptance checks used by `bbm verify`.
//!
//! All numerical kernels are generic over the scalar type through the
//! [`Scalar`] trait; [`Real`] (`f64`) is the concrete type used by the CLI
//! and the acceptance suite.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub mod acceptance;
pub mod euler_lagrange;
pub mod io;
pub mod model;
pub mod numerics;
pub mod profiles;
pub mod rate;
pub mod sim;

/// Default scalar type for concrete use of the crate.
pub type Real = f64;

/// Floating-point scalar the numerical kernels are generic over.
///
/// `f32` satisfies the bounds but the default tolerances in this crate are
/// chosen for `f64`; instantiate at `f32` only for low-accuracy work.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for converting an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    /// `self` as `f64`, for reporting and serialization boundaries.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

/// Error type shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Model parameters violate an invariant (for example `p >= 2`).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// An operation was called with an argument outside its domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A numerical routine failed to converge or produced an inconsistent state.
    #[error("solver failure: {0}")]
    Solver(String),
    /// The particle population exceeded the configured cap.
    #[error("particle capacity {cap} exceeded at t = {time_reached}")]
    CapacityExceeded { time_reached: f64, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub use euler_lagrange::OptimalPathResult;
pub use model::{OffspringLaw, PotentialParams};

pub use rate::{RateCurve, SampledPath};


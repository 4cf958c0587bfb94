//! Restricted nonlinear approximation in dyadic sequence spaces.
//!
//! Everything works on finitely supported sequences indexed by dyadic cubes
//! `Q_{j,k} = 2^{-j}([0,1)^d + k)`, and every quasi-norm is evaluated exactly
//! (up to floating-point rounding) wherever a closed form exists:
//!
//! - [`dyadic`]: cubes, the measures `nu_alpha(Q) = |Q|^alpha`, exact
//!   integration of piecewise-constant cube functions.
//! - [`weights`]: weight functions `eta` of the classes `W` and `W_+`.
//! - [`lorentz`]: nu-rearrangements and discrete Lorentz quasi-norms.
//! - [`spaces`]: Triebel-Lizorkin and Besov sequence quasi-norms.
//! - [`approx`]: the restricted approximation error `sigma_nu(t, s)`,
//!   approximation-space quasi-norms, and Jackson/Bernstein constants.
//! - [`democracy`]: the two-sided democracy check for normalized indicators.
//! - [`verify`]: the acceptance suites, shared by the test harness and the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod democracy;
pub mod dyadic;
pub mod error;
pub mod lorentz;
mod quad;
pub mod report;
pub mod seq;
pub mod spaces;
pub mod verify;
pub mod weights;

pub use dyadic::{CubeSet, DyadicCube, MeasureSpec};
pub use error::{Error, Result};
pub use seq::{CoeffSeq, CubeWeights, UnitWeights};
pub use spaces::{SpaceKind, SpaceParams, WeightSeq};
pub use weights::WeightFn;

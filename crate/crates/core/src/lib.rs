//! Time-stepping schemes for first-order differential inclusions
//! `ẋ ∈ f(x) − N(S, x)` where `S = S_1 ∩ … ∩ S_m` is an intersection of
//! uniformly prox-regular sets with cheap exact projections.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the benchmark
//! driver and the command line live in the `proxflow` crate.
//!
//! Layout:
//! - [`geometry`]: elementary constraint sets with closed-form projections.
//! - [`intersection`]: constraint systems, Gauss-Seidel projection sweeps,
//!   the repeated-sweep projection oracle and metric-calmness constructions
//!   for disk systems.
//! - [`solvers`]: position-based dynamics (PBD) and the baseline schemes,
//!   fixed-step integration and piecewise-linear trajectories.
//! - [`problems`]: the sliding benchmark with a closed-form solution and the
//!   non-overlapping disks benchmark.
//! - [`bench`]: error measurement and convergence-order fitting.
//! - [`verify`]: randomized property suites for the projection estimates.
#![no_std]

extern crate alloc;

pub mod bench;
mod error;
pub mod geometry;
pub mod intersection;
pub(crate) mod linalg;
pub mod problems;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{Ball, Constraint, ExcludedBall, HalfSpace, PairwiseDistance, StateVector};
pub use intersection::{ConstraintSystem, OracleTolerances, SweepTrace};
pub use solvers::{SchemeSpec, Trajectory, VectorField};

//! Pinned-ball pseudo-collision dynamics.
//!
//! A family of unit balls with fixed centers carries one pseudo-velocity per
//! ball. Touching, approaching pairs exchange the velocity components along
//! their line of centers, in an order chosen from outside the system. Each
//! such exchange is a folding of `R^{nd}` across the hyperplane orthogonal to
//! the pair's collision direction.
//!
//! The crate is organized by subsystem:
//!
//! - [`geometry`]: configurations, contact graphs, collision directions.
//! - [`dynamics`]: the pairwise exchange, schedules, traces, the monotone
//!   functional and the span/complement decomposition of states.
//! - [`foldings`]: general half-space foldings and their orbits.
//! - [`rigidity`]: the index of approximate rigidity and stress certificates.
//! - [`lattice`]: exact `Z[√3]` arithmetic for triangular-lattice packings.
//! - [`bounds`]: collision-count bounds evaluated in log space.
//! - [`search`]: greedy and exhaustive exploration of collision orders.
//! - [`verify`]: the invariant suite run by `pinned verify` and the
//!   acceptance tests.

pub mod bounds;
pub mod dynamics;
pub mod foldings;
pub mod generate;
pub mod geometry;
pub mod highprec;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod rigidity;
pub mod search;
pub mod verify;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use dynamics::{Schedule, SimulationTrace, StateVector};
pub use foldings::{HalfSpace, OrbitPolicy, OrbitResult};
pub use geometry::{BallConfiguration, CollisionDirection, ContactGraph, Edge};
pub use rigidity::AlphaReport;

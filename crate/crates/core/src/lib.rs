//! Exact maximal flows from convex lattice regions to infinity under i.i.d.
//! random capacities on the bonds of Z^2, together with the first-passage
//! machinery needed to compare them with their deterministic limit.
//!
//! The pieces:
//!
//! * [`lattice`]: sites, bonds, the dual lattice and the bond involution `s`.
//! * [`capacity`]: seed-keyed capacity fields in integer micro-units.
//! * [`fpp`]: passage times, time-constant estimates and cylinder crossings.
//! * [`cutflow`]: max flow / min cut to infinity, cut-to-cycle conversion,
//!   a brute-force cycle oracle and disjoint open paths.
//! * [`geometry`]: convex rational polygons and their mu-length.
//! * [`experiments`]: Monte Carlo drivers for convergence, tails and paths.

pub mod capacity;
pub mod cutflow;
pub mod error;
pub mod experiments;
pub mod fpp;
pub mod geometry;
pub mod lattice;
pub mod rational;
pub mod schema;
pub mod seed;
pub mod stats;

pub use capacity::{CapacityField, Capacities, DistributionSpec, DEFAULT_SCALE};
pub use cutflow::{mincut_infinity, truncated_maxflow, MaxFlowResult};
pub use error::{CutError, ExperimentError, FppError, GeometryError, LatticeError, ParseError};
pub use geometry::{i_functional, ConvexPolygon};
pub use lattice::{Bond, DualBond, DualSite, Site, SiteSet};
pub use rational::Rational;

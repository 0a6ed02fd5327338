use thiserror::Error;

use crate::cutflow::MaxFlowResult;
use crate::lattice::{DualSite, Site};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid number `{0}`")]
    Number(String),
    #[error("invalid distribution `{0}` (expected const:c, bern:p, exp:rate or unif:lo:hi)")]
    Distribution(String),
    #[error("invalid distribution parameters in `{0}`")]
    DistributionParameters(String),
    #[error("invalid polygon `{0}` (expected square:r, ngon:k:r or @file)")]
    Polygon(String),
    #[error("invalid vector `{0}` (expected x,y)")]
    Vector(String),
    #[error("cannot read polygon file `{path}`: {reason}")]
    PolygonFile { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("sites {0:?} and {1:?} are not nearest neighbours")]
    NotAdjacent(Site, Site),
    #[error("dual sites {0:?} and {1:?} are not nearest neighbours")]
    DualNotAdjacent(DualSite, DualSite),
    #[error("no lattice point lies in the scaled region")]
    EmptyRegion,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("a polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertices are not in strictly convex counterclockwise position (at vertex {0})")]
    NotStrictlyConvex(usize),
    #[error("scale factor must be positive")]
    NonPositiveScale,
    #[error("regular polygon needs k >= 3 and r > 0")]
    BadRegularPolygon,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FppError {
    #[error("target is unreachable inside the allowed region")]
    Unreachable,
    #[error("endpoint {0:?} lies outside the search box")]
    OutsideBox((i64, i64)),
    #[error("direction must be a nonzero primitive integer vector, got {0:?}")]
    NotPrimitive((i64, i64)),
    #[error("need n >= 4 and reps >= 2 (got n = {n}, reps = {reps})")]
    BadSampleSize { n: u32, reps: u32 },
    #[error("no tabulated direction matches {0:?} up to 90-degree rotations")]
    MissingDirection((i64, i64)),
    #[error("direction {0:?} is too long to estimate by direct simulation")]
    DirectionTooLong((i64, i64)),
    #[error("cylinder parameters need R >= 1, h >= 1 and a unit direction")]
    BadCylinder,
    #[error("the discrete cylinder contains no lattice point")]
    EmptyCylinder,
}

#[derive(Debug, Clone, Error)]
pub enum CutError {
    #[error("source site {0:?} is on or beyond the boundary of the box")]
    SourceTouchesBoundary(Site),
    #[error("source set is empty")]
    EmptySource,
    #[error("box doubling reached its budget (n = {}) without stabilizing", best.box_used)]
    BudgetExceeded { best: Box<MaxFlowResult> },
    #[error("enumeration radius {0} exceeds the oracle guard of 8")]
    OracleRadius(i64),
    #[error("cutset image is not a single simple dual cycle")]
    NotACycle,
    #[error("probability must lie in [0, 1]")]
    BadProbability,
}

#[derive(Debug, Clone, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Fpp(#[from] FppError),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("infeasible flow at n = {n}, replicate {replicate}: {violation}")]
    InfeasibleFlow { n: u32, replicate: u32, violation: String },
}

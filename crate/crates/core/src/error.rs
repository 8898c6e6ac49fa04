use crate::grid::Vertex;

/// Every failure the library reports. Residuals are carried as `f64` so the
/// error type does not depend on the scalar parameter.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate lift: <F,Q> vanishes")]
    DegenerateLift,
    #[error("degenerate pair: <P,P'> vanishes")]
    DegeneratePair,
    #[error("singular parameter q = 0")]
    SingularParameter,
    #[error("degenerate quadruple: a denominator inner product vanishes")]
    DegenerateQuadruple,
    #[error("singular linear system")]
    SingularSystem,
    #[error("vector is not lightlike (relative residual {0:e})")]
    NotLightlike(f64),
    #[error("vertex {0} lies outside the domain")]
    OutOfDomain(Vertex),
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(Vertex, Vertex),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("face at {face} is not concircular (imaginary part {imag:e})")]
    NonConcircularFace { face: Vertex, imag: f64 },
    #[error("points are not concircular (imaginary part {0:e})")]
    NotConcircular(f64),
    #[error("cross ratios do not factorize at vertex {vertex} (residual {residual:e})")]
    FactorizationFailure { vertex: Vertex, residual: f64 },
    #[error("face at {face} is not regular: two vertices coincide")]
    IrregularFace { face: Vertex },
    #[error("degenerate edge {0} - {1}")]
    DegenerateEdge(Vertex, Vertex),
    #[error("lift at {vertex} disagrees with the Moutard construction (residual {residual:e})")]
    MoutardMismatch { vertex: Vertex, residual: f64 },
    #[error("spectral parameter hits a pole{}", match edge { Some((i, j)) => format!(" on edge {i} - {j}"), None => String::new() })]
    PoleParameter { edge: Option<(Vertex, Vertex)> },
    #[error("connection is not flat (residual {0:e})")]
    NotFlat(f64),
    #[error("vertex star is spherical: the linear system is singular")]
    SphericalStar,
    #[error("not a conserved quantity (residual {residual:e} at {vertex})")]
    NotConserved { vertex: Vertex, residual: f64 },
    #[error("P(mu) does not vanish (residual {0:e})")]
    NonzeroRoot(f64),
    #[error("top coefficient is lightlike; cannot normalize")]
    DegenerateTop,
    #[error("conserved quantity is not normalized linear: {0}")]
    NotNormalizedLinear(String),
    #[error("degenerate Darboux start: {0}")]
    DegenerateStart(String),
    #[error("P(mu) has no real lightlike directions orthogonal to it")]
    EmptyConic,
    #[error("result is not polynomial (residual {0:e})")]
    NotPolynomial(f64),
    #[error("Darboux transform is not a Baecklund transform (residual {0:e})")]
    NotBacklund(f64),
    #[error("Darboux transforms coincide at vertex {0}")]
    CoincidentTransforms(Vertex),
    #[error("section is not parallel (residual {0:e})")]
    NotParallel(f64),
    #[error("incidence fails (residual {0:e})")]
    IncidenceFailure(f64),
    #[error("edge form is not closed (residual {0:e})")]
    NotClosed(f64),
    #[error("nets are not Christoffel dual (residual {0:e})")]
    NotChristoffel(f64),
    #[error("sphere is a plane")]
    PlanarSphere,
    #[error("vertex lies on the rotation axis")]
    AxisPoint,
    #[error("repeated point in the profile")]
    RepeatedPoint,
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("meridian reached the infinity boundary")]
    InfinityBoundary,
    #[error("meridian alternates between the endpoints of one edge")]
    Alternating,
    #[error("Q, M0, M1 do not span R^{{2,1}}")]
    DegenerateBasis,
    #[error("X vanishes: the sphere meets the axis")]
    VanishingX,
    #[error("meridian crosses the rotation axis")]
    AxisCrossing,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("model does not match the space form: {0}")]
    ModelMismatch(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

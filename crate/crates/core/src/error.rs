use crate::complex::CellId;

/// Every domain failure in the crate.
///
/// The `Display` form always starts with the variant name so that callers
/// (the CLI in particular) can surface a stable, greppable error string.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("DuplicateCell: cell id {0} appears more than once")]
    DuplicateCell(CellId),
    #[error("DanglingBoundary: cell {cell} references missing cell {missing}")]
    DanglingBoundary { cell: CellId, missing: CellId },
    #[error("DimensionMismatch: cell {cell} (dim {dim}) lists cell {face} of dim {face_dim} in its boundary")]
    DimensionMismatch { cell: CellId, dim: usize, face: CellId, face_dim: usize },
    #[error("FiltrationViolation: cell {cell} is born at {birth} before its face {face} (born {face_birth})")]
    FiltrationViolation { cell: CellId, birth: f64, face: CellId, face_birth: f64 },
    #[error("InvalidBirth: cell {cell} has birth {birth}; births must be finite and non-negative")]
    InvalidBirth { cell: CellId, birth: f64 },
    #[error("IndexOutOfRange: cell {cell} is not a {dim}-cell of the complex")]
    IndexOutOfRange { cell: CellId, dim: usize },
    #[error("DimensionOutOfRange: dimension {dim} exceeds the complex dimension {max_dim}")]
    DimensionOutOfRange { dim: usize, max_dim: usize },
    #[error("NotACycle: the chain has a nonzero boundary")]
    NotACycle,
    #[error("BandEmpty: band lower end {lo} exceeds upper end {hi}")]
    BandEmpty { lo: f64, hi: f64 },
    #[error("TrivialCycle: the cycle bounds and carries no homology class")]
    TrivialCycle,
    #[error("DisconnectedSupport: the cycle's support is not a connected subgraph")]
    DisconnectedSupport,
    #[error("EmptyBundle: a trace bundle needs at least one trace")]
    EmptyBundle,
    #[error("EmptyStore: the memory store has no entries")]
    EmptyStore,
    #[error("MissingRestriction: no restriction map for vertex {vertex} on edge {edge}")]
    MissingRestriction { vertex: CellId, edge: CellId },
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("InvalidBase: {0}")]
    InvalidBase(String),
    #[error("MissingAssignment: no stalk value for vertex {0}")]
    MissingAssignment(CellId),
    #[error("CoverageGap: vertex {0} is not covered by any local section")]
    CoverageGap(CellId),
    #[error("NotClosed: the trajectory never returns to its start")]
    NotClosed,
    #[error("NotAdjacent: vertices {0} and {1} are not joined by an edge")]
    NotAdjacent(CellId, CellId),
    #[error("UnknownVertex: {0} is not a vertex of the graph")]
    UnknownVertex(CellId),
    #[error("KeyAbsent: the context key is not in the store")]
    KeyAbsent,
    #[error("AdaptationFailed: {0}")]
    AdaptationFailed(String),
    #[error("Unreachable: no route from {0} to {1}")]
    Unreachable(CellId, CellId),
    #[error("CycleConflict: memoizing the trajectory would create a next-hop loop")]
    CycleConflict,
    #[error("ConfigInvalid: {0}")]
    ConfigInvalid(String),
    #[error("UnsupportedVersion: document version {0} is not supported")]
    UnsupportedVersion(u32),
    #[error("Parse: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

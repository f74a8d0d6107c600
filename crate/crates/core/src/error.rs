use thiserror::Error;

use crate::geom::Point;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("obstacles {a} and {b} are not disjoint")]
    DisjointnessViolation { a: usize, b: usize },

    #[error("obstacle vertices {first:?} and {second:?} share {axis}-coordinate {value}")]
    GeneralPositionViolation {
        /// (obstacle, vertex) of each offending vertex.
        first: (usize, usize),
        second: (usize, usize),
        axis: char,
        value: i64,
    },

    #[error("edge {edge} of obstacle {obstacle} is not axis-parallel")]
    NonRectilinearEdge { obstacle: usize, edge: usize },

    #[error("obstacle {obstacle} has a negative weight")]
    NegativeWeight { obstacle: usize },

    #[error("obstacle {obstacle} is malformed: {reason}")]
    MalformedPolygon { obstacle: usize, reason: String },

    #[error("coordinate of obstacle {obstacle} vertex {vertex} exceeds the 2^62 limit")]
    CoordinateOutOfRange { obstacle: usize, vertex: usize },

    #[error("infeasible generator parameters: {0}")]
    InfeasibleParameters(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("point {0:?} lies inside obstacle {1}")]
    PointInsideObstacle(Point, usize),

    #[error("point {0:?} lies outside the bounding box")]
    OutOfBbox(Point),

    #[error("operation requires {expected} mode")]
    WrongMode { expected: &'static str },

    #[error("index needs {needed} bytes, budget is {budget}")]
    IndexTooLarge { needed: u128, budget: u128 },

    #[error("cut-line tree needs at least one point")]
    EmptyPointSet,

    #[error("index file mismatch: {0}")]
    IndexMismatch(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("no path between {0:?} and {1:?}")]
    NoPath(Point, Point),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn parse(e: &serde_json::Error) -> Self {
        Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }

    /// Stable upper-case identifier of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DisjointnessViolation { .. } => "DISJOINTNESS_VIOLATION",
            Error::GeneralPositionViolation { .. } => "GENERAL_POSITION_VIOLATION",
            Error::NonRectilinearEdge { .. } => "NON_RECTILINEAR_EDGE",
            Error::NegativeWeight { .. } => "NEGATIVE_WEIGHT",
            Error::MalformedPolygon { .. } => "MALFORMED_POLYGON",
            Error::CoordinateOutOfRange { .. } => "COORDINATE_OUT_OF_RANGE",
            Error::InfeasibleParameters(_) => "INFEASIBLE_PARAMETERS",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::PointInsideObstacle(..) => "POINT_INSIDE_OBSTACLE",
            Error::OutOfBbox(_) => "OUT_OF_BBOX",
            Error::WrongMode { .. } => "WRONG_MODE",
            Error::IndexTooLarge { .. } => "INDEX_TOO_LARGE",
            Error::EmptyPointSet => "EMPTY_POINT_SET",
            Error::IndexMismatch(_) => "INDEX_MISMATCH",
            Error::Io(_) => "IO_ERROR",
            Error::NoPath(..) => "NO_PATH",
        }
    }

    /// True for errors caused by the scene content rather than its syntax.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DisjointnessViolation { .. }
                | Error::GeneralPositionViolation { .. }
                | Error::NonRectilinearEdge { .. }
                | Error::NegativeWeight { .. }
                | Error::MalformedPolygon { .. }
                | Error::CoordinateOutOfRange { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

use crate::world_model::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrmError {
    #[error("invalid lattice dimensions {width}x{height} with cell width {cell_width}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        cell_width: f64,
    },
    #[error("node ({}, {}) is outside the lattice", .0.col, .0.row)]
    OutOfBounds(NodeId),
    #[error("edge risk must be non-negative, got {0}")]
    NegativeRisk(f64),
    #[error("nodes ({}, {}) and ({}, {}) are not adjacent", .0.col, .0.row, .1.col, .1.row)]
    NotAdjacent(NodeId, NodeId),
    #[error("robot node ({}, {}) is occupied", .0.col, .0.row)]
    RobotOnOccupied(NodeId),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaskError {
    #[error("adaptive range must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("adaptive range {r_adapt} exceeds the sensor maximum {r_max}")]
    RangeAboveMax { r_adapt: f64, r_max: f64 },
    #[error("invalid sensor parameters: {0}")]
    InvalidParams(&'static str),
}

/// Environment file parse failure, positioned at a 1-based line and column.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("pose ({x:.3}, {y:.3}) is inside an occupied or off-map cell")]
    PoseBlocked { x: f64, y: f64 },
}

#[derive(Debug, Error)]
pub enum MissionError {
    #[error("invariant violated at step {step}: {message}")]
    Invariant { step: usize, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Irm(#[from] IrmError),
    #[error(transparent)]
    Mask(#[from] MaskError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {message}")]
    BadValue { key: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("map: {0}")]
    Map(#[from] ParseError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

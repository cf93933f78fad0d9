use thiserror::Error;

use crate::grid::NodeId;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid grid spec: {0}")]
    InvalidGrid(String),
    #[error("invalid zone: {0}")]
    InvalidZone(String),
    #[error("environment fully blocked")]
    EnvironmentBlocked,
    #[error("invalid weights: w_L = {w_l}, w_B = {w_b}")]
    InvalidWeights { w_l: f64, w_b: f64 },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("routing infeasible: {0}")]
    RoutingInfeasible(String),
    #[error("terminals disconnected: no path from {from:?} to {to:?}")]
    TerminalsDisconnected { from: NodeId, to: NodeId },
    #[error("bound not positive: {0}")]
    BoundNotPositive(f64),
    #[error("negative simplex budget: {0}")]
    NegativeBudget(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("move cap of {0} exceeded; local search failed to terminate")]
    MoveCapExceeded(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

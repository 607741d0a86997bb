//! Error types shared across the crate.

use thiserror::Error;

/// Coarse error classes; the CLI maps each class to a distinct exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Geometry,
    Model,
    Numeric,
    Internal,
}

/// Errors raised while building or querying a table.
#[derive(Debug, Clone, Error)]
pub enum GeometryError {
    #[error("table must contain at least one scatterer")]
    EmptyTable,
    #[error("scatterer {index} has invalid radius {radius} (must be in (0, 1/2))")]
    InvalidRadius { index: usize, radius: f64 },
    #[error("scatterer {index} center {center:?} outside [0,1)^2")]
    InvalidCenter { index: usize, center: [f64; 2] },
    #[error(
        "scatterers {first} and {second} overlap under translate ({dx}, {dy}): \
         center distance {distance} <= radius sum {radius_sum}"
    )]
    Overlap {
        first: usize,
        second: usize,
        dx: i64,
        dy: i64,
        distance: f64,
        radius_sum: f64,
    },
    #[error(
        "infinite horizon: open corridor in direction ({p}, {q}), \
         normal offset {offset}, width {width}"
    )]
    InfiniteHorizon { p: i64, q: i64, offset: f64, width: f64 },
    #[error("cannot certify horizon: scan bound {bound} below required {required}")]
    ScanBoundTooSmall { bound: i64, required: i64 },
    #[error("arc length {s} outside [0, {perimeter})")]
    ArcOutOfRange { s: f64, perimeter: f64 },
    #[error("table has no horizon certificate but one is required")]
    MissingCertificate,
}

/// Errors raised by the collision dynamics.
#[derive(Debug, Clone, Error)]
pub enum DynamicsError {
    #[error("grazing collision: |cos(phi_pre)| = {cos_phi} below tolerance {tolerance}")]
    Grazing { cos_phi: f64, tolerance: f64 },
    #[error(
        "horizon violation: free flight from s = {s}, phi = {phi} found no scatterer \
         within {search_radius} (certified tau_max {certified:?})"
    )]
    HorizonViolation {
        s: f64,
        phi: f64,
        search_radius: f64,
        certified: Option<f64>,
    },
    #[error("free path {tau} outside certified range [{tau_min}, {tau_max}]")]
    FreePathOutOfRange { tau: f64, tau_min: f64, tau_max: f64 },
    #[error("phase point invalid: s = {s}, phi = {phi}")]
    InvalidPhasePoint { s: f64, phi: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors raised by restitution models and cone computations.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("restitution coefficient {eta} at normal speed {w} outside [0, 1)")]
    EtaOutOfRange { eta: f64, w: f64 },
    #[error("model parameter invalid: {0}")]
    InvalidParameter(String),
    #[error("unknown q-profile `{0}`")]
    UnknownProfile(String),
    #[error("profile `{0}` has unbounded derivative sups; not usable for simulation")]
    UnboundedSups(String),
    #[error("tabulated profile needs at least 2 strictly increasing knots")]
    BadTable,
    #[error("operation requires a constant-restitution model, got `{0}`")]
    WrongKind(String),
    #[error("contraction condition (C) fails: {0}")]
    ConditionC(String),
    #[error("cone parameters infeasible: {0}")]
    Infeasible(String),
}

/// Errors raised by quadrature, ODE solving, and fitting.
#[derive(Debug, Clone, Error)]
pub enum NumericError {
    #[error("quadrature order {0} too small (need >= 2)")]
    QuadratureOrder(usize),
    #[error("step size {0} must be positive and divide the interval sensibly")]
    StepSize(f64),
    #[error("averaged speed fell below floor {floor} at t_bar = {t_bar}")]
    SpeedFloor { floor: f64, t_bar: f64 },
    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),
}

/// Errors raised by ensemble configuration and execution.
#[derive(Debug, Clone, Error)]
pub enum EnsembleError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("boundary curve spec invalid: {0}")]
    CurveSpec(String),
    #[error("paths and averaged solution disagree on the time horizon: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Crate-level error with a class for exit-code mapping.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Class used for CLI exit codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Geometry(_) => ErrorClass::Geometry,
            Error::Dynamics(e) => match e {
                DynamicsError::HorizonViolation { .. }
                | DynamicsError::FreePathOutOfRange { .. } => ErrorClass::Internal,
                DynamicsError::Geometry(_) => ErrorClass::Geometry,
                DynamicsError::Model(_) => ErrorClass::Model,
                _ => ErrorClass::Numeric,
            },
            Error::Model(_) => ErrorClass::Model,
            Error::Numeric(_) => ErrorClass::Numeric,
            Error::Ensemble(e) => match e {
                EnsembleError::Config(_) | EnsembleError::CurveSpec(_) => ErrorClass::Config,
                EnsembleError::Dynamics(d) => {
                    Error::Dynamics(d.clone()).class()
                }
                EnsembleError::Numeric(_) => ErrorClass::Numeric,
                EnsembleError::GridMismatch(_) => ErrorClass::Numeric,
            },
            Error::Config(_) => ErrorClass::Config,
            Error::Io(_) => ErrorClass::Config,
            Error::Internal(_) => ErrorClass::Internal,
        }
    }
}

use thiserror::Error;

/// Everything that can go wrong inside the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("dimension {0} is not supported (only 2-D kernels exist)")]
    UnsupportedDimension(usize),
    #[error("data length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("negative duration {0}")]
    NegativeTime(f64),
    #[error("dyadic index {j} outside [{min}, {max}]")]
    BlockOutOfRange { j: i32, min: i32, max: i32 },
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("time mesh is not uniform (step {index} has width {width}, expected {expected})")]
    NonUniformMesh { index: usize, width: f64, expected: f64 },
    #[error("time {0} is not on the mesh")]
    TimeNotOnMesh(f64),
    #[error("flow degenerate at t = {time}: min |det DX| = {min_det}")]
    FlowDegenerate { time: f64, min_det: f64 },
    #[error("flow not invertible at tolerance at t = {time} (residual {residual:e})")]
    FlowNotInvertible { time: f64, residual: f64 },
    #[error("density {min} falls below the positivity floor {floor}")]
    DensityBelowFloor { min: f64, floor: f64 },
    #[error("coefficient function must equal 1 at rho = 1")]
    CoefficientNormalization,
    #[error("initial velocity is not solenoidal (||div u0|| = {0:e})")]
    NonSolenoidal(f64),
    #[error("step rejected at t = {time}: explicit part grew by {growth:.3}; halve dt")]
    StepRejected { time: f64, growth: f64 },
    #[error("variable-coefficient pressure solve stalled (residual {residual:e})")]
    PressureSolve { residual: f64 },
    #[error("no contraction at this T (ratios {ratios:?})")]
    NoContraction { ratios: Vec<f64> },
    #[error("epsilon0 exceeded at t = {time} (running integral {value:e} > {epsilon0:e})")]
    EpsilonExceeded { time: f64, value: f64, epsilon0: f64 },
    #[error("density too far from 1 for the small-density route: {norm:e} > {limit:e}")]
    DensityNotSmall { norm: f64, limit: f64 },
    #[error("density bound violated at t = {time}: range [{min}, {max}] leaves [{lo}, {hi}]")]
    DensityBoundViolated { time: f64, min: f64, max: f64, lo: f64, hi: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

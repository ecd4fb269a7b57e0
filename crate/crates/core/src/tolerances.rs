//! Tolerances pinned by the acceptance suite.

/// Special-function identities, absolute.
pub const SPECIAL_IDENTITY: f64 = 1e-12;
/// Closed-form geodesic against RK4 with 10⁴ steps, absolute.
pub const GEODESIC_VS_RK4: f64 = 1e-8;
/// Half-space projection: distance and foot, absolute.
pub const HALFSPACE_PROJECTION: f64 = 1e-10;
/// Distance to `{t = 0}` from the axis, relative.
pub const PLANE_AXIS_DISTANCE: f64 = 1e-8;
/// `exp_S` focusing on the axis, absolute.
pub const PLANE_FOCUS: f64 = 1e-10;
/// Saddle examples, absolute.
pub const SADDLE_DISTANCE: f64 = 1e-8;
/// Jacobi fields against finite differences, relative.
pub const JACOBI_FD: f64 = 1e-5;
/// Taylor coefficients of `det B` at `s = 0`, relative.
pub const DET_B_TAYLOR: f64 = 1e-5;
/// Quadrature against Monte Carlo, in standard errors.
pub const MC_SIGMAS: f64 = 3.0;
/// Fitted order of the series remainder.
pub const SERIES_MIN_ORDER: f64 = 3.9;
/// Umbilic product formula against the general determinant, relative.
pub const UMBILIC_VS_DET: f64 = 1e-8;
/// Metric invariances, absolute.
pub const METRIC_INVARIANCE: f64 = 1e-9;
/// Length of arcs with `|λs| < π` against the distance, absolute.
pub const MINIMIZING_ARC: f64 = 1e-8;

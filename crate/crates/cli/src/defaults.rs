//! Default resolutions. Each is the smallest setting at which the matching
//! acceptance tolerance holds with a factor-2 margin.

/// Radial elements for ball spectra (σ error ~1e-8 against 1e-6).
pub const BALL_ELEMENTS: usize = 2000;
/// Radial elements for catenoid spectra (σ error ~1e-7 against 1e-4).
pub const CATENOID_ELEMENTS: usize = 2000;
/// Radial elements for Morse and energy indices; counts are stable from 200 up.
pub const INDEX_ELEMENTS: usize = fbms_core::index_forms::DEFAULT_INDEX_ELEMENTS;
pub const MMAX: usize = fbms_core::index_forms::DEFAULT_MMAX;
pub const PER_MODE: usize = 3;

/// Triangle refinement for the 2D cap check: 1.4e-4 at level 4 against 1e-3
/// (level 3 gives 5.5e-4, short of the margin).
pub const TRI_LEVEL: usize = 4;
/// Robin claims do not depend on resolution beyond orthogonality; level 3 keeps the suite fast.
pub const ROBIN_LEVEL: usize = 3;

/// Certificate grid 250·2^level: level 4 leaves 2.6e-7 against 1e-6.
pub const CERT_LEVEL: usize = 4;
pub const CERT_TOL: f64 = 1e-6;

pub const SEED: u64 = 7;
pub const BOUND_SAMPLES: usize = 100;

pub const BALL_R: f64 = 0.7;
pub const CATENOID_R_HYPERBOLIC: f64 = 1.0;
pub const CATENOID_R_SPHERICAL: f64 = 0.6;

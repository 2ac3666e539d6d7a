//! Every default tolerance and size used by the library and the CLI.

/// Power-iteration tolerance (max-norm change of successive iterates).
pub const EIGEN_TOL: f64 = 1e-12;
/// `|λ(θ) - 1|` stopping tolerance of the Markov θ search.
pub const MARKOV_ROOT_TOL: f64 = 1e-12;
/// Stopping tolerance of scalar root finders (queueing key parameter).
pub const ROOT_TOL: f64 = 1e-10;
/// Largest `|θ|` the Markov search will try.
pub const THETA_CAP: f64 = 50.0;

/// `1 + 2R` must exceed this for a Gaussian model to admit a tilt.
pub const DEGENERACY_EPS: f64 = 1e-8;
/// Truncation doubling for the limiting Gaussian tilt coefficients.
pub const TRUNCATION_START: usize = 64;
pub const TRUNCATION_CAP: usize = 1 << 20;
pub const TRUNCATION_DELTA: f64 = 1e-9;
/// Largest Gaussian window `2k + 1` conditioned on.
pub const MAX_WINDOW: usize = 129;
/// Largest path length sampled from an explicit correlation list.
pub const EXPLICIT_SAMPLE_CAP: usize = 4096;

/// Monte Carlo sample count.
pub const MC_SAMPLES: usize = 100_000;
/// Acceptance band, in standard errors, for martingale residuals.
pub const MARTINGALE_Z: f64 = 4.0;
/// Largest number of cylinders enumerated by the cylinder-ratio check.
pub const CYLINDER_CAP: usize = 100_000;

/// Burn-in as a fraction of simulated customers.
pub const BURN_IN_FRACTION: f64 = 0.01;
/// Survival-function window of the tail regression.
pub const TAIL_LOWER_Q: f64 = 0.90;
pub const TAIL_UPPER_Q: f64 = 0.999;
/// Minimum strictly positive waits for a tail regression.
pub const MIN_POSITIVE_WAITS: usize = 10_000;
/// Batches for the batch-means stderr of the tail-decay estimate.
pub const STDERR_BATCHES: usize = 10;

//! Stationary Gaussian increments: correlation sums, the closed-form tilt,
//! exact Laplace transforms of `S_n`, stationary sampling, and the limiting
//! tilt and martingale coefficients.

mod conditional;
mod model;
mod sampler;
mod tilt;

pub use conditional::{
    conditional_tilt_coeffs, gaussian_exponential_moment, martingale_coeffs, martingale_mass,
    tilt_density_mass, ConditionalTiltCoeffs, MartingaleCoeffs,
};
pub use model::{Correlation, GaussianModel};
pub use sampler::GaussianSampler;
pub use tilt::{
    associated_model, gaussian_tilt, laplace_sn_exact, log_laplace_sn_exact, var_sn_exact, GaussianTilt,
};

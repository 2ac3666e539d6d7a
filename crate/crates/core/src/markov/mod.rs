//! Finite-state Markov increments: tilted matrix, Perron–Frobenius solve,
//! the associated chain, exact cylinder expectations, the martingale
//! `c_{X_k} e^{-θ S_k}` and the duality round trip.

mod model;
mod perron;
mod tilt;

pub use model::{MarkovModel, Violation};
pub use perron::{perron, PerronPair, MAX_POWER_ITERATIONS};
pub use tilt::{
    associated, cylinder_pstar, cylinder_pstar_indices, duality_roundtrip, exact_laplace, exact_tilted_cylinder,
    exact_two_sided_laplace, log_exact_laplace, martingale_path, one_step_martingale_identity,
    perron_eigenvalue, q_value, solve_theta, solve_tilt, tilt_at, tilt_matrix, Duality,
    SolveOptions, TiltSolution, TiltedCylinders,
};

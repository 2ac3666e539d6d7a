//! Single-server queues: the Lindley recursion, the key tilt parameter for
//! Poisson and appointment arrivals, and tail-decay estimation from
//! simulated waits.

mod dist;
mod model;
mod sim;
mod tail;
mod theta;

pub use dist::{spot_check_service_laplace, ErrorDist, ServiceDist};
pub use model::{Arrivals, QueueModel};
pub use sim::{lindley, simulate_queue, WaitingSample};
pub use tail::{tail_decay_batch_stderr, tail_decay_estimate, tail_decay_from_values, TailFit};
pub use theta::{
    appointments_g, appointments_laplace_sn, appointments_theta, comparison_factor, key_parameter, mm1_theta,
};

use rand_distr::{Distribution, Exp};

use crate::mc::stream_rng;
use crate::{Error, Result, Scalar};

use super::{Arrivals, QueueModel};

/// Arrival and service draws use separate streams of one seed, so two
/// queues run with the same seed share their service times.
const ARRIVAL_STREAM: u64 = 0;
const SERVICE_STREAM: u64 = 1;

/// `W_1 = 0`, `W_{j+1} = (W_j + U_j - T_j)^+`; returns `len + 1` waits.
pub fn lindley<T: Scalar>(interarrivals: &[T], services: &[T]) -> Result<Vec<T>> {
    if interarrivals.len() != services.len() {
        return Err(Error::InvalidArgument(format!(
            "{} inter-arrival times but {} service times",
            interarrivals.len(),
            services.len()
        )));
    }
    let mut waits = Vec::with_capacity(services.len() + 1);
    let mut w = T::zero();
    waits.push(w);
    for (t, u) in interarrivals.iter().zip(services) {
        w = (w + *u - *t).max(T::zero());
        waits.push(w);
    }
    Ok(waits)
}

/// Waiting times of the customers kept after burn-in.
#[derive(Debug, Clone, PartialEq)]
pub struct WaitingSample<T> {
    pub waits: Vec<T>,
    pub n_customers: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl<T: Scalar> WaitingSample<T> {
    pub fn positive_waits(&self) -> usize {
        self.waits.iter().filter(|w| **w > T::zero()).count()
    }
}

/// Simulates `n` customers from `W_1 = 0` and drops the first `burn_in`.
pub fn simulate_queue<T: Scalar>(model: &QueueModel<T>, n: usize, burn_in: usize, seed: u64) -> Result<WaitingSample<T>> {
    model.validate()?;
    if n == 0 || burn_in >= n {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= burn_in < n (got burn_in = {burn_in}, n = {n})"
        )));
    }
    let mut arrival_rng = stream_rng(seed, ARRIVAL_STREAM);
    let mut service_rng = stream_rng(seed, SERVICE_STREAM);
    let mut next_interarrival: Box<dyn FnMut() -> T> = match &model.arrivals {
        Arrivals::Poisson { lambda } => {
            let exp = Exp::new(lambda.to_f64_lossy()).expect("rate validated");
            Box::new(move || T::lit(exp.sample(&mut arrival_rng)))
        }
        Arrivals::Appointments { lambda, error } => {
            // T_j = 1/λ + ε_{j+1} - ε_j
            let spacing = lambda.recip();
            let error = error.clone();
            let mut previous = error.sample(&mut arrival_rng);
            Box::new(move || {
                let next = error.sample(&mut arrival_rng);
                let t = spacing + next - previous;
                previous = next;
                t
            })
        }
    };

    let mut waits = Vec::with_capacity(n - burn_in);
    let mut w = T::zero();
    for j in 0..n {
        if j >= burn_in {
            waits.push(w);
        }
        let u = model.service.sample(&mut service_rng);
        let t = next_interarrival();
        w = (w + u - t).max(T::zero());
    }
    Ok(WaitingSample {
        waits,
        n_customers: n,
        burn_in,
        seed,
    })
}

//! Closed-form M/M/1 steady-state analytics and the response-time curves
//! everything else in the crate builds on.
//!
//! The curve comes in two parameterizations: response time as a function of
//! utilization for a fixed service time, `R(U; S) = S / (1 - U)`, and as a
//! function of throughput for a fixed service rate, `R(lambda; mu) =
//! 1 / (mu - lambda)`. Both are upper-half branches of rectangular
//! hyperbolas.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{lossy, Error, Result};

/// Operating point of an M/M/1 queue.
///
/// Only the two rates are stored; the service time is always derived as the
/// reciprocal of the service rate, so the two can never disagree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueParameters<F> {
    arrival_rate: F,
    service_rate: F,
}

impl<F: Float> QueueParameters<F> {
    /// Requires `service_rate > 0` and `arrival_rate >= 0`. Stability
    /// (`arrival_rate < service_rate`) is checked where it matters, not here,
    /// so unstable operating points can still be described.
    pub fn new(arrival_rate: F, service_rate: F) -> Result<Self> {
        if !(service_rate > F::zero()) {
            return Err(Error::InvalidParameter {
                name: "service_rate",
                value: lossy(service_rate),
                reason: "must be > 0",
            });
        }
        if !(arrival_rate >= F::zero()) {
            return Err(Error::InvalidParameter {
                name: "arrival_rate",
                value: lossy(arrival_rate),
                reason: "must be >= 0",
            });
        }
        Ok(Self {
            arrival_rate,
            service_rate,
        })
    }

    pub fn arrival_rate(&self) -> F {
        self.arrival_rate
    }

    pub fn service_rate(&self) -> F {
        self.service_rate
    }

    /// Mean service time per customer, `S = 1 / mu`.
    pub fn service_time(&self) -> F {
        self.service_rate.recip()
    }

    /// Offered load `U = lambda / mu`.
    pub fn utilization(&self) -> F {
        self.arrival_rate / self.service_rate
    }

    pub fn is_stable(&self) -> bool {
        self.arrival_rate < self.service_rate
    }
}

/// The five steady-state metrics of a stable M/M/1 queue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateMetrics<F> {
    /// Fraction of time the server is busy, `U = lambda * S`.
    pub utilization: F,
    /// Mean time in system (waiting plus service), `R = S / (1 - U)`.
    pub response_time: F,
    /// Mean number of customers in the system, `r = U / (1 - U)`.
    pub residents: F,
    /// Mean time spent waiting before service, `Q = R - S`.
    pub queue_delay: F,
    /// Mean number of waiting customers, `q = r - U`.
    pub queue_length: F,
}

/// Computes all five steady-state metrics for a stable operating point.
///
/// Fails with [`Error::UnstableSystem`] when `lambda >= mu`: at the boundary
/// the queue grows without limit, so there is no steady state to report.
pub fn steady_state<F: Float>(params: &QueueParameters<F>) -> Result<SteadyStateMetrics<F>> {
    if !params.is_stable() {
        return Err(Error::UnstableSystem {
            lambda: lossy(params.arrival_rate()),
            mu: lossy(params.service_rate()),
        });
    }
    let service_time = params.service_time();
    let utilization = params.utilization();
    let response_time = service_time / (F::one() - utilization);
    let residents = utilization / (F::one() - utilization);
    Ok(SteadyStateMetrics {
        utilization,
        response_time,
        residents,
        queue_delay: response_time - service_time,
        queue_length: residents - utilization,
    })
}

/// `R(U; S) = S / (1 - U)` for `S > 0` and `0 <= U < 1`.
pub fn response_time_of_utilization<F: Float>(service_time: F, utilization: F) -> Result<F> {
    if !(service_time > F::zero()) {
        return Err(Error::InvalidParameter {
            name: "service_time",
            value: lossy(service_time),
            reason: "must be > 0",
        });
    }
    if !(utilization >= F::zero() && utilization < F::one()) {
        return Err(Error::OutOfDomain {
            name: "utilization",
            value: lossy(utilization),
            domain: "[0, 1)",
        });
    }
    Ok(service_time / (F::one() - utilization))
}

/// `R(lambda; mu) = 1 / (mu - lambda)` for `mu > 0` and `0 <= lambda < mu`.
///
/// Evaluated through the utilization form with `S = 1 / mu` and
/// `U = lambda / mu`, so the two parameterizations agree bit for bit.
pub fn response_time_of_throughput<F: Float>(service_rate: F, arrival_rate: F) -> Result<F> {
    if !(service_rate > F::zero()) {
        return Err(Error::InvalidParameter {
            name: "service_rate",
            value: lossy(service_rate),
            reason: "must be > 0",
        });
    }
    if !(arrival_rate >= F::zero() && arrival_rate < service_rate) {
        return Err(Error::OutOfDomain {
            name: "arrival_rate",
            value: lossy(arrival_rate),
            domain: "[0, mu)",
        });
    }
    response_time_of_utilization(service_rate.recip(), arrival_rate / service_rate)
}

/// Network-delay alias of the utilization curve, `D = D0 / (1 - U)`.
///
/// Identical to [`response_time_of_utilization`]; it exists so networking
/// callers can speak in terms of base delay `D0` and link utilization.
pub fn network_delay<F: Float>(base_delay: F, utilization: F) -> Result<F> {
    response_time_of_utilization(base_delay, utilization)
}

//! Seeded discrete-event simulation of the M/M/1/inf/FCFS queue, used as an
//! empirical oracle for the closed-form model.
//!
//! Per-customer waiting times come from the Lindley recurrence
//! `W[n+1] = max(0, W[n] + S[n] - A[n+1])`; time-averaged quantities
//! (residents, queue length, utilization) come from an event sweep over the
//! merged arrival and departure streams. Both streams are already sorted for
//! a FCFS single server, so no event calendar is needed.
//!
//! The PRNG is ChaCha12 seeded from the config's 64-bit seed, and each
//! customer draws its interarrival gap then its service time, in that order.
//! Results are therefore bit-reproducible for a given build.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::mm1::{steady_state, QueueParameters};

/// Configuration of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub arrival_rate: f64,
    pub service_rate: f64,
    pub seed: u64,
    pub total_customers: usize,
    /// Leading fraction of customers (and the matching time span) discarded
    /// as transient. Default 0.1.
    pub warmup_fraction: f64,
    /// Nonoverlapping batches for the 95% confidence interval. Default 20.
    pub batch_count: usize,
}

impl SimConfig {
    pub fn new(arrival_rate: f64, service_rate: f64, total_customers: usize, seed: u64) -> Self {
        Self {
            arrival_rate,
            service_rate,
            seed,
            total_customers,
            warmup_fraction: 0.1,
            batch_count: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.arrival_rate > 0.0) {
            return Err(Error::InvalidParameter {
                name: "arrival_rate",
                value: self.arrival_rate,
                reason: "must be > 0",
            });
        }
        if !(self.service_rate > 0.0) {
            return Err(Error::InvalidParameter {
                name: "service_rate",
                value: self.service_rate,
                reason: "must be > 0",
            });
        }
        if self.arrival_rate >= self.service_rate {
            return Err(Error::UnstableSystem {
                lambda: self.arrival_rate,
                mu: self.service_rate,
            });
        }
        if self.total_customers < 1000 {
            return Err(Error::InvalidParameter {
                name: "total_customers",
                value: self.total_customers as f64,
                reason: "must be >= 1000",
            });
        }
        if !(0.0..=0.5).contains(&self.warmup_fraction) {
            return Err(Error::InvalidParameter {
                name: "warmup_fraction",
                value: self.warmup_fraction,
                reason: "must be in [0, 0.5]",
            });
        }
        if self.batch_count < 2 {
            return Err(Error::InvalidParameter {
                name: "batch_count",
                value: self.batch_count as f64,
                reason: "must be >= 2",
            });
        }
        let observed = self.total_customers as f64 * (1.0 - self.warmup_fraction);
        if observed < (self.batch_count * 50) as f64 {
            return Err(Error::InvalidParameter {
                name: "total_customers",
                value: self.total_customers as f64,
                reason: "too few observed customers for the requested batch count (need 50 per batch)",
            });
        }
        Ok(())
    }
}

/// Empirical counterparts of the five steady-state metrics, plus the
/// measured throughput and a confidence interval on the response time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Busy time divided by observed time.
    pub empirical_utilization: f64,
    pub mean_response_time: f64,
    /// 95% half-width from nonoverlapping batch means.
    pub ci_half_width: f64,
    /// Time-averaged number in system.
    pub mean_residents: f64,
    pub mean_queue_delay: f64,
    /// Time-averaged number waiting.
    pub mean_queue_length: f64,
    pub measured_throughput: f64,
    pub customers_served: usize,
}

/// Draws an exponential variate by inverse transform. The uniform draw lies
/// in [0, 1), so `1 - u` is in (0, 1] and the logarithm never sees zero.
fn sample_exp<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

/// Runs the queue for `total_customers` arrivals and reports post-warm-up
/// statistics. Deterministic for a given config.
pub fn run_mm1(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let n = config.total_customers;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut arrivals = Vec::with_capacity(n);
    let mut waits = Vec::with_capacity(n);
    let mut services = Vec::with_capacity(n);
    let mut departures = Vec::with_capacity(n);

    let mut clock = 0.0_f64;
    let mut wait = 0.0_f64;
    let mut prev_service = 0.0_f64;
    for i in 0..n {
        let gap = sample_exp(&mut rng, config.arrival_rate);
        let service = sample_exp(&mut rng, config.service_rate);
        clock += gap;
        if i > 0 {
            wait = (wait + prev_service - gap).max(0.0);
        }
        arrivals.push(clock);
        waits.push(wait);
        services.push(service);
        departures.push(clock + wait + service);
        prev_service = service;
    }

    let warmup = (n as f64 * config.warmup_fraction).floor() as usize;
    let t0 = arrivals[warmup];
    let t1 = departures[n - 1];
    let span = t1 - t0;
    let observed = n - warmup;

    let mut response_sum = 0.0;
    let mut wait_sum = 0.0;
    for i in warmup..n {
        response_sum += waits[i] + services[i];
        wait_sum += waits[i];
    }
    let mean_response_time = response_sum / observed as f64;
    let mean_queue_delay = wait_sum / observed as f64;

    // busy time: the service interval of every customer clipped to [t0, t1]
    let mut busy = 0.0;
    for i in 0..n {
        let lo = (departures[i] - services[i]).max(t0);
        let hi = departures[i].min(t1);
        if hi > lo {
            busy += hi - lo;
        }
    }

    // sweep the merged (sorted) arrival and departure streams for the
    // time averages of residents and queue length
    let mut area_n = 0.0;
    let mut area_q = 0.0;
    let mut in_system = 0_i64;
    let mut prev_t = 0.0_f64;
    let mut i = 0;
    let mut j = 0;
    while j < n {
        let (t, is_arrival) = if i < n && arrivals[i] <= departures[j] {
            (arrivals[i], true)
        } else {
            (departures[j], false)
        };
        let lo = prev_t.max(t0);
        let hi = t.min(t1);
        if hi > lo {
            area_n += in_system as f64 * (hi - lo);
            area_q += (in_system - 1).max(0) as f64 * (hi - lo);
        }
        if is_arrival {
            in_system += 1;
            i += 1;
        } else {
            in_system -= 1;
            j += 1;
        }
        prev_t = t;
    }

    // confidence interval on the response time from batch means
    let batches = config.batch_count;
    let per_batch = observed / batches;
    let mut means = Vec::with_capacity(batches);
    for b in 0..batches {
        let start = warmup + b * per_batch;
        let sum: f64 = (start..start + per_batch)
            .map(|i| waits[i] + services[i])
            .sum();
        means.push(sum / per_batch as f64);
    }
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    let t_crit = StudentsT::new(0.0, 1.0, (batches - 1) as f64)
        .expect("valid t distribution")
        .inverse_cdf(0.975);
    let ci_half_width = t_crit * (var / batches as f64).sqrt();

    Ok(SimResult {
        empirical_utilization: busy / span,
        mean_response_time,
        ci_half_width,
        mean_residents: area_n / span,
        mean_queue_delay,
        mean_queue_length: area_q / span,
        measured_throughput: observed as f64 / span,
        customers_served: observed,
    })
}

/// One metric line of a validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricComparison {
    pub metric: &'static str,
    pub analytic: f64,
    pub empirical: f64,
    pub relative_error: f64,
    pub pass: bool,
}

/// Per-metric comparison of a simulation run against the closed-form model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub entries: Vec<MetricComparison>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// Compares the five empirical metrics against `steady_state(params)` at the
/// given relative tolerance. A failed comparison is a report entry, not an
/// error. When the analytic value is zero the absolute error is used.
pub fn validate_against_analytic(
    result: &SimResult,
    params: &QueueParameters<f64>,
    rel_tolerance: f64,
) -> Result<ValidationReport> {
    if !(rel_tolerance > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rel_tolerance",
            value: rel_tolerance,
            reason: "must be > 0",
        });
    }
    let analytic = steady_state(params)?;
    let pairs: [(&'static str, f64, f64); 5] = [
        ("utilization", analytic.utilization, result.empirical_utilization),
        ("response_time", analytic.response_time, result.mean_response_time),
        ("residents", analytic.residents, result.mean_residents),
        ("queue_delay", analytic.queue_delay, result.mean_queue_delay),
        ("queue_length", analytic.queue_length, result.mean_queue_length),
    ];
    let entries = pairs
        .iter()
        .map(|&(metric, a, e)| {
            let relative_error = if a != 0.0 {
                ((e - a) / a).abs()
            } else {
                (e - a).abs()
            };
            MetricComparison {
                metric,
                analytic: a,
                empirical: e,
                relative_error,
                pass: relative_error <= rel_tolerance,
            }
        })
        .collect();
    Ok(ValidationReport {
        tolerance: rel_tolerance,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> SimConfig {
        SimConfig::new(0.5, 1.0, 200_000, 42)
    }

    #[test]
    fn config_rejects_instability_and_bad_counts() {
        let mut c = base_config();
        c.arrival_rate = 1.0;
        assert!(matches!(c.validate(), Err(Error::UnstableSystem { .. })));
        let mut c = base_config();
        c.total_customers = 500;
        assert!(matches!(c.validate(), Err(Error::InvalidParameter { .. })));
        let mut c = base_config();
        c.warmup_fraction = 0.6;
        assert!(matches!(c.validate(), Err(Error::InvalidParameter { .. })));
        let mut c = base_config();
        c.batch_count = 1;
        assert!(matches!(c.validate(), Err(Error::InvalidParameter { .. })));
        let mut c = base_config();
        c.total_customers = 1000;
        c.batch_count = 40;
        assert!(matches!(c.validate(), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn half_load_matches_analytic_response_time() {
        let result = run_mm1(&base_config()).unwrap();
        assert!((result.mean_response_time - 2.0).abs() / 2.0 < 0.05);
    }

    #[test]
    fn heavy_load_matches_analytic_utilization() {
        let result = run_mm1(&SimConfig::new(0.8, 1.0, 200_000, 42)).unwrap();
        assert!((result.empirical_utilization - 0.8).abs() / 0.8 < 0.02);
    }

    #[test]
    fn runs_are_bit_reproducible() {
        let a = run_mm1(&base_config()).unwrap();
        let b = run_mm1(&base_config()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn littles_law_holds_internally() {
        for (lambda, mu) in [(0.2, 1.0), (0.5, 1.0), (0.8, 1.0), (3.0, 4.0)] {
            let result = run_mm1(&SimConfig::new(lambda, mu, 100_000, 7)).unwrap();
            let little = result.mean_response_time * result.measured_throughput;
            let gap = (result.mean_residents - little).abs() / result.mean_residents;
            assert!(gap < 0.03, "lambda={lambda} mu={mu} gap={gap}");
        }
    }

    #[test]
    fn exponential_sampler_means() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for rate in [0.5, 1.0, 4.0] {
            let n = 1_000_000;
            let mean = (0..n).map(|_| sample_exp(&mut rng, rate)).sum::<f64>() / n as f64;
            assert!((mean - 1.0 / rate).abs() * rate < 0.01, "rate={rate} mean={mean}");
        }
    }

    #[test]
    fn convergence_toward_analytic_response_time() {
        // mean relative error over 10 seeds should shrink as N grows
        let analytic_r = 2.0;
        let mut errors = Vec::new();
        for n in [10_000, 100_000, 1_000_000] {
            let mut total = 0.0;
            for seed in 0..10 {
                let result = run_mm1(&SimConfig::new(0.5, 1.0, n, seed)).unwrap();
                total += (result.mean_response_time - analytic_r).abs() / analytic_r;
            }
            errors.push(total / 10.0);
        }
        assert!(errors[2] < errors[0], "errors did not shrink: {errors:?}");
    }

    #[test]
    fn validation_report_examples() {
        let result = run_mm1(&base_config()).unwrap();
        let params = QueueParameters::new(0.5, 1.0).unwrap();
        let report = validate_against_analytic(&result, &params, 0.05).unwrap();
        assert_eq!(report.entries.len(), 5);
        assert!(report.all_pass(), "{report:?}");

        let wrong = QueueParameters::new(0.5, 2.0).unwrap();
        let report = validate_against_analytic(&result, &wrong, 0.05).unwrap();
        assert!(report
            .entries
            .iter()
            .any(|e| e.metric == "response_time" && !e.pass));

        let report = validate_against_analytic(&result, &wrong, 10.0).unwrap();
        assert!(report.all_pass());
    }
}

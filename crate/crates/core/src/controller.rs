//! Review-period capacity controller that keeps the measured arrival rate
//! inside the throughput-form knee region.
//!
//! The loop is deliberately simple: at each review boundary the controller
//! estimates the arrival rate over the elapsed window. If the estimate sits
//! inside the current knee region `[mu - sqrt(2) - 1, mu - sqrt(2) + 1]` it
//! holds; otherwise it jumps capacity to `estimate + sqrt(2)`, which puts the
//! estimate at the exact center of the new region. The region's width of 2
//! is the built-in hysteresis band. Capacity changes take effect at the next
//! review boundary.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::geometry::{classify_against, load_knee_geometry, RegionLabel};

/// Lowest capacity at which the knee region fits entirely inside the region
/// of interest: `sqrt(2) + 1`.
pub const MIN_FEASIBLE_CAPACITY: f64 = SQRT_2 + 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerMode {
    /// Arrival-rate estimates are read exactly from the trace.
    Analytic,
    /// Arrivals are drawn as a Poisson process at the trace rate and the
    /// estimate is the window count divided by the review period.
    Stochastic,
}

/// Outcome of one review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Hold,
    Recenter,
    ClampLow,
    ClampHigh,
}

impl Action {
    pub fn as_str(&self) -> &'static str {
        match self {
            Action::Hold => "hold",
            Action::Recenter => "recenter",
            Action::ClampLow => "clamp_low",
            Action::ClampHigh => "clamp_high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub review_period: f64,
    /// Floor on capacity; must never go below [`MIN_FEASIBLE_CAPACITY`] so
    /// the knee region always fits in the region of interest.
    pub mu_min: f64,
    pub mu_max: f64,
    pub initial_mu: f64,
    pub mode: ControllerMode,
    /// Used only in stochastic mode.
    pub seed: u64,
}

impl ControllerConfig {
    pub fn new(review_period: f64, mu_max: f64, initial_mu: f64, mode: ControllerMode) -> Self {
        Self {
            review_period,
            mu_min: MIN_FEASIBLE_CAPACITY,
            mu_max,
            initial_mu,
            mode,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.review_period > 0.0) {
            return Err(Error::InvalidParameter {
                name: "review_period",
                value: self.review_period,
                reason: "must be > 0",
            });
        }
        if !(self.mu_min >= MIN_FEASIBLE_CAPACITY) {
            return Err(Error::InvalidParameter {
                name: "mu_min",
                value: self.mu_min,
                reason: "must be >= sqrt(2) + 1 so the knee region stays feasible",
            });
        }
        if !(self.mu_max > self.mu_min) {
            return Err(Error::InvalidParameter {
                name: "mu_max",
                value: self.mu_max,
                reason: "must be > mu_min",
            });
        }
        if !(self.initial_mu >= self.mu_min && self.initial_mu <= self.mu_max) {
            return Err(Error::InvalidParameter {
                name: "initial_mu",
                value: self.initial_mu,
                reason: "must be in [mu_min, mu_max]",
            });
        }
        Ok(())
    }
}

/// One review decision.
///
/// Holds while the estimate is inside the current knee region; otherwise
/// recenters to `estimate + sqrt(2)`, clamped to the capacity bounds. A
/// clamp that lands exactly on the current capacity is reported as Hold, so
/// repeated reviews with the same estimate are idempotent.
pub fn review(
    current_mu: f64,
    lambda_estimate: f64,
    config: &ControllerConfig,
) -> Result<(f64, Action)> {
    config.validate()?;
    if !(current_mu >= config.mu_min && current_mu <= config.mu_max) {
        return Err(Error::InvalidParameter {
            name: "current_mu",
            value: current_mu,
            reason: "must be in [mu_min, mu_max]",
        });
    }
    if !(lambda_estimate >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda_estimate",
            value: lambda_estimate,
            reason: "must be >= 0",
        });
    }
    let lower = current_mu - SQRT_2 - 1.0;
    let upper = current_mu - SQRT_2 + 1.0;
    if lambda_estimate >= lower && lambda_estimate <= upper {
        return Ok((current_mu, Action::Hold));
    }
    let target = lambda_estimate + SQRT_2;
    if target < config.mu_min {
        if config.mu_min == current_mu {
            Ok((current_mu, Action::Hold))
        } else {
            Ok((config.mu_min, Action::ClampLow))
        }
    } else if target > config.mu_max {
        if config.mu_max == current_mu {
            Ok((current_mu, Action::Hold))
        } else {
            Ok((config.mu_max, Action::ClampHigh))
        }
    } else {
        Ok((target, Action::Recenter))
    }
}

/// Piecewise-constant offered-load schedule: each breakpoint's rate holds
/// until the next breakpoint, and the last rate extends forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadTrace {
    points: Vec<(f64, f64)>,
}

impl LoadTrace {
    /// Breakpoints must start at time 0, be strictly increasing, and carry
    /// nonnegative finite rates.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::MalformedTrace("trace has no breakpoints".into()));
        }
        if points[0].0 != 0.0 {
            return Err(Error::MalformedTrace(format!(
                "first breakpoint must be at t = 0, got t = {}",
                points[0].0
            )));
        }
        for window in points.windows(2) {
            if !(window[1].0 > window[0].0) {
                return Err(Error::MalformedTrace(format!(
                    "breakpoint times must be strictly increasing ({} then {})",
                    window[0].0, window[1].0
                )));
            }
        }
        for &(t, rate) in &points {
            if !rate.is_finite() || rate < 0.0 {
                return Err(Error::MalformedTrace(format!(
                    "rate at t = {t} must be a nonnegative finite number, got {rate}"
                )));
            }
        }
        Ok(Self { points })
    }

    /// Parses the `t,lambda` CSV format: a header line followed by one
    /// breakpoint per row.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(header) if header.trim() == "t,lambda" => {}
            other => {
                return Err(Error::MalformedTrace(format!(
                    "expected header 't,lambda', got {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let mut points = Vec::new();
        for line in lines {
            let mut fields = line.trim().split(',');
            let (t, rate) = match (fields.next(), fields.next(), fields.next()) {
                (Some(t), Some(rate), None) => (t.trim(), rate.trim()),
                _ => {
                    return Err(Error::MalformedTrace(format!(
                        "expected two comma-separated fields, got {line:?}"
                    )))
                }
            };
            let t: f64 = t
                .parse()
                .map_err(|_| Error::MalformedTrace(format!("bad time value {t:?}")))?;
            let rate: f64 = rate
                .parse()
                .map_err(|_| Error::MalformedTrace(format!("bad rate value {rate:?}")))?;
            points.push((t, rate));
        }
        Self::new(points)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("t,lambda\n");
        for &(t, rate) in &self.points {
            out.push_str(&format!("{t},{rate}\n"));
        }
        out
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        let mut rate = self.points[0].1;
        for &(start, r) in &self.points {
            if start <= t {
                rate = r;
            } else {
                break;
            }
        }
        rate
    }

    /// Time-weighted mean rate over `[t0, t1]`.
    pub fn mean_rate(&self, t0: f64, t1: f64) -> f64 {
        debug_assert!(t1 > t0);
        let mut acc = 0.0;
        self.for_each_segment(t0, t1, |len, rate| acc += rate * len);
        acc / (t1 - t0)
    }

    fn for_each_segment(&self, t0: f64, t1: f64, mut f: impl FnMut(f64, f64)) {
        for (i, &(start, rate)) in self.points.iter().enumerate() {
            let end = self
                .points
                .get(i + 1)
                .map(|p| p.0)
                .unwrap_or(f64::INFINITY);
            let lo = start.max(t0);
            let hi = end.min(t1);
            if hi > lo {
                f(hi - lo, rate);
            }
        }
    }
}

/// Log line for one review interval. The region labels classify the
/// estimate against the capacity in force during the interval: `region` in
/// the throughput form the controller steers by, `load_region` in the load
/// form for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReviewEntry {
    pub interval: usize,
    pub lambda_estimate: f64,
    pub mu_before: f64,
    pub mu_after: f64,
    pub region: RegionLabel,
    pub load_region: RegionLabel,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerLog {
    pub entries: Vec<ReviewEntry>,
    /// Fraction of intervals whose estimate fell inside the knee region of
    /// the capacity in force during that interval.
    pub knee_residency_fraction: f64,
}

impl ControllerLog {
    pub fn non_hold_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.action != Action::Hold)
            .count()
    }
}

/// Labels a rate against the knee region of `mu`, tolerating estimates at or
/// beyond the asymptote (they are simply exponential-region points).
fn classify_rate(mu: f64, lambda: f64) -> RegionLabel {
    classify_against(lambda, mu - SQRT_2 - 1.0, mu - SQRT_2 + 1.0)
}

/// Load-form label of the same operating point, for the log's comparison
/// column. Utilizations at or above 1 are exponential by definition.
fn classify_load_total(mu: f64, lambda: f64) -> RegionLabel {
    let utilization = lambda / mu;
    if utilization >= 1.0 {
        return RegionLabel::Exponential;
    }
    let geometry = load_knee_geometry(mu.recip()).expect("mu > 0 checked by config");
    classify_against(utilization, geometry.knee_region.0, geometry.knee_region.1)
}

/// Runs the control loop over `[0, horizon]`, one entry per review interval.
pub fn run_controller(
    trace: &LoadTrace,
    config: &ControllerConfig,
    horizon: f64,
) -> Result<ControllerLog> {
    config.validate()?;
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: horizon,
            reason: "must be > 0",
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut mu = config.initial_mu;
    let mut entries = Vec::new();
    let mut resident = 0_usize;

    let interval_count = (horizon / config.review_period).ceil() as usize;
    for interval in 0..interval_count {
        let start = interval as f64 * config.review_period;
        let end = ((interval + 1) as f64 * config.review_period).min(horizon);
        if end <= start {
            break;
        }
        let lambda_estimate = match config.mode {
            ControllerMode::Analytic => trace.mean_rate(start, end),
            ControllerMode::Stochastic => {
                let mut count = 0.0;
                trace.for_each_segment(start, end, |len, rate| {
                    let mean = rate * len;
                    if mean > 0.0 {
                        count += Poisson::new(mean).expect("mean > 0").sample(&mut rng);
                    }
                });
                count / (end - start)
            }
        };
        let region = classify_rate(mu, lambda_estimate);
        if region == RegionLabel::Knee {
            resident += 1;
        }
        let load_region = classify_load_total(mu, lambda_estimate);
        let (mu_after, action) = review(mu, lambda_estimate, config)?;
        entries.push(ReviewEntry {
            interval,
            lambda_estimate,
            mu_before: mu,
            mu_after,
            region,
            load_region,
            action,
        });
        mu = mu_after;
    }

    let knee_residency_fraction = resident as f64 / entries.len() as f64;
    Ok(ControllerLog {
        entries,
        knee_residency_fraction,
    })
}

//! Conic geometry of the response-time hyperbolas.
//!
//! Both curve forms are upper-half branches of rectangular hyperbolas, so
//! every interesting point has a closed form: the vertex (the knee, where
//! the slope is exactly 1), the focus, and the latus-rectum endpoints that
//! bound the knee region. The flat region lies below the lower endpoint and
//! the exponential region above the upper one.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{lossy, Error, Result};

/// A point in curve coordinates, serialized as `[x, y]`.
///
/// For the load form the axes are (utilization, response time); for the
/// throughput form (arrival rate, response time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<F>(pub F, pub F);

impl<F: Float> Point<F> {
    pub fn x(&self) -> F {
        self.0
    }

    pub fn y(&self) -> F {
        self.1
    }

    pub fn distance(&self, other: &Self) -> F {
        ((self.0 - other.0).powi(2) + (self.1 - other.1).powi(2)).sqrt()
    }
}

/// Three-way classification of an operating point against the knee region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    Flat,
    Knee,
    Exponential,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::Flat => "flat",
            RegionLabel::Knee => "knee",
            RegionLabel::Exponential => "exponential",
        }
    }
}

/// Knee geometry of `R(U; S) = S / (1 - U)` for a fixed service time.
///
/// The hyperbola is centered at `(1, 0)`. Geometry is reported even when it
/// falls outside the region of interest `0 <= U < 1` (for `S > 1` the vertex
/// has negative utilization); the flags say whether it is usable there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadKneeGeometry<F> {
    pub service_time: F,
    pub center: Point<F>,
    /// The knee, `(1 - sqrt(S), sqrt(S))`.
    pub vertex: Point<F>,
    /// `(1 - sqrt(2S), sqrt(2S))`.
    pub focus: Point<F>,
    /// Lower latus-rectum endpoint, `(1 - sqrt(2S) - sqrt(S), sqrt(2S) - sqrt(S))`.
    pub latus_p: Point<F>,
    /// Upper latus-rectum endpoint, `(1 - sqrt(2S) + sqrt(S), sqrt(2S) + sqrt(S))`.
    pub latus_q: Point<F>,
    /// `2 sqrt(2S)`.
    pub latus_length: F,
    /// Closed utilization interval `[latus_p.x, latus_q.x]`.
    pub knee_region: (F, F),
    /// Both knee-region endpoints lie inside `[0, 1)` iff `S <= 3 - 2 sqrt(2)`.
    pub region_feasible: bool,
    /// The vertex has nonnegative utilization iff `S <= 1`.
    pub vertex_in_interest: bool,
}

/// Knee geometry of `R(lambda; mu) = 1 / (mu - lambda)` for a fixed service
/// rate. Centered at `(mu, 0)`; the latus rectum has constant length
/// `2 sqrt(2)` regardless of capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputKneeGeometry<F> {
    pub service_rate: F,
    pub center: Point<F>,
    /// The knee, `(mu - 1, 1)`.
    pub vertex: Point<F>,
    /// `(mu - sqrt(2), sqrt(2))`.
    pub focus: Point<F>,
    /// `(mu - sqrt(2) - 1, sqrt(2) - 1)`.
    pub latus_p: Point<F>,
    /// `(mu - sqrt(2) + 1, sqrt(2) + 1)`.
    pub latus_q: Point<F>,
    /// Always `2 sqrt(2)`.
    pub latus_length: F,
    /// Closed arrival-rate interval `[latus_p.x, latus_q.x]`.
    pub knee_region: (F, F),
    /// Both endpoints lie inside `[0, mu)` iff `mu >= sqrt(2) + 1`.
    pub region_feasible: bool,
}

fn require_positive<F: Float>(value: F, name: &'static str) -> Result<()> {
    if value > F::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: lossy(value),
            reason: "must be > 0",
        })
    }
}

/// Closed-form knee geometry of the load-form curve for service time `S > 0`.
pub fn load_knee_geometry<F: Float>(service_time: F) -> Result<LoadKneeGeometry<F>> {
    require_positive(service_time, "service_time")?;
    let one = F::one();
    let two = F::from(2.0).unwrap();
    let sqrt_s = service_time.sqrt();
    let sqrt_2s = (two * service_time).sqrt();
    let latus_p = Point(one - sqrt_2s - sqrt_s, sqrt_2s - sqrt_s);
    let latus_q = Point(one - sqrt_2s + sqrt_s, sqrt_2s + sqrt_s);
    Ok(LoadKneeGeometry {
        service_time,
        center: Point(one, F::zero()),
        vertex: Point(one - sqrt_s, sqrt_s),
        focus: Point(one - sqrt_2s, sqrt_2s),
        latus_p,
        latus_q,
        latus_length: two * sqrt_2s,
        knee_region: (latus_p.0, latus_q.0),
        region_feasible: service_time <= F::from(3.0).unwrap() - two * two.sqrt(),
        vertex_in_interest: service_time <= one,
    })
}

/// Closed-form knee geometry of the throughput-form curve for service rate
/// `mu > 0`.
pub fn throughput_knee_geometry<F: Float>(service_rate: F) -> Result<ThroughputKneeGeometry<F>> {
    require_positive(service_rate, "service_rate")?;
    let one = F::one();
    let sqrt_2 = F::from(2.0).unwrap().sqrt();
    let latus_p = Point(service_rate - sqrt_2 - one, sqrt_2 - one);
    let latus_q = Point(service_rate - sqrt_2 + one, sqrt_2 + one);
    Ok(ThroughputKneeGeometry {
        service_rate,
        center: Point(service_rate, F::zero()),
        vertex: Point(service_rate - one, one),
        focus: Point(service_rate - sqrt_2, sqrt_2),
        latus_p,
        latus_q,
        latus_length: sqrt_2 + sqrt_2,
        knee_region: (latus_p.0, latus_q.0),
        region_feasible: service_rate >= sqrt_2 + one,
    })
}

/// Classifies a utilization against the knee region for service time `S`.
///
/// The knee interval is closed on both ends; exact boundary points classify
/// as `Knee`.
pub fn classify_load<F: Float>(service_time: F, utilization: F) -> Result<RegionLabel> {
    if !(utilization >= F::zero() && utilization < F::one()) {
        return Err(Error::OutOfDomain {
            name: "utilization",
            value: lossy(utilization),
            domain: "[0, 1)",
        });
    }
    let geometry = load_knee_geometry(service_time)?;
    Ok(classify_against(
        utilization,
        geometry.knee_region.0,
        geometry.knee_region.1,
    ))
}

/// Classifies an arrival rate against the knee region for service rate `mu`.
pub fn classify_throughput<F: Float>(service_rate: F, arrival_rate: F) -> Result<RegionLabel> {
    let geometry = throughput_knee_geometry(service_rate)?;
    if !(arrival_rate >= F::zero() && arrival_rate < service_rate) {
        return Err(Error::OutOfDomain {
            name: "arrival_rate",
            value: lossy(arrival_rate),
            domain: "[0, mu)",
        });
    }
    Ok(classify_against(
        arrival_rate,
        geometry.knee_region.0,
        geometry.knee_region.1,
    ))
}

pub(crate) fn classify_against<F: Float>(x: F, lower: F, upper: F) -> RegionLabel {
    if x < lower {
        RegionLabel::Flat
    } else if x <= upper {
        RegionLabel::Knee
    } else {
        RegionLabel::Exponential
    }
}

/// Service time that places the knee at the requested utilization:
/// `S = (1 - U)^2`, the inverse of the vertex formula `U = 1 - sqrt(S)`.
pub fn capacity_for_knee_at<F: Float>(target_utilization: F) -> Result<F> {
    if !(target_utilization >= F::zero() && target_utilization < F::one()) {
        return Err(Error::OutOfDomain {
            name: "target_utilization",
            value: lossy(target_utilization),
            domain: "[0, 1)",
        });
    }
    Ok((F::one() - target_utilization).powi(2))
}

/// True iff both knee-region endpoints fit in `0 <= U < 1`, i.e.
/// `S <= 3 - 2 sqrt(2)`.
pub fn knee_region_feasible_load<F: Float>(service_time: F) -> Result<bool> {
    Ok(load_knee_geometry(service_time)?.region_feasible)
}

/// True iff both knee-region endpoints fit in `0 <= lambda < mu`, i.e.
/// `mu >= sqrt(2) + 1`.
pub fn knee_region_feasible_throughput<F: Float>(service_rate: F) -> Result<bool> {
    Ok(throughput_knee_geometry(service_rate)?.region_feasible)
}

/// Millsap's single-server knee from minimizing R/U: a constant 50%
/// utilization, independent of the service time. Exposed for comparison with
/// the vertex knee `U = 1 - sqrt(S)`; the two coincide only at `S = 1/4`.
pub fn ratio_knee_utilization<F: Float>() -> F {
    F::from(0.5).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mm1::{response_time_of_throughput, response_time_of_utilization};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const SQRT_2: f64 = std::f64::consts::SQRT_2;

    fn check_load_invariants(g: &LoadKneeGeometry<f64>) {
        let s = g.service_time;
        // vertex on the curve
        assert_relative_eq!(g.vertex.1, s / (1.0 - g.vertex.0), max_relative = 1e-12);
        // latus endpoints on the curve and on the line R = U - 1 + 2 sqrt(2S)
        let line = |u: f64| u - 1.0 + 2.0 * (2.0 * s).sqrt();
        for p in [g.latus_p, g.latus_q] {
            assert_relative_eq!(p.1, s / (1.0 - p.0), max_relative = 1e-12);
            assert_relative_eq!(p.1, line(p.0), max_relative = 1e-12, epsilon = 1e-12);
        }
        assert_relative_eq!(
            g.latus_p.distance(&g.latus_q),
            g.latus_length,
            max_relative = 1e-9
        );
        // rectangular hyperbola: focus distance = sqrt(2) * vertex distance
        assert_relative_eq!(
            g.center.distance(&g.focus),
            SQRT_2 * g.center.distance(&g.vertex),
            max_relative = 1e-12
        );
        assert!(g.latus_p.0 < g.vertex.0 && g.vertex.0 < g.latus_q.0);
    }

    fn check_throughput_invariants(g: &ThroughputKneeGeometry<f64>) {
        let mu = g.service_rate;
        assert_relative_eq!(g.vertex.1, 1.0 / (mu - g.vertex.0), max_relative = 1e-12);
        let line = |lambda: f64| lambda - mu + 8.0_f64.sqrt();
        for p in [g.latus_p, g.latus_q] {
            assert_relative_eq!(p.1, 1.0 / (mu - p.0), max_relative = 1e-12);
            assert_relative_eq!(p.1, line(p.0), max_relative = 1e-12, epsilon = 1e-12);
        }
        assert_relative_eq!(
            g.latus_p.distance(&g.latus_q),
            2.0 * SQRT_2,
            max_relative = 1e-9
        );
    }

    #[test]
    fn load_vertex_examples() {
        let g = load_knee_geometry(0.25).unwrap();
        assert_relative_eq!(g.vertex.0, 0.5, max_relative = 1e-12);
        assert_relative_eq!(g.vertex.1, 0.5, max_relative = 1e-12);
        assert!(g.vertex_in_interest);

        let g = load_knee_geometry(1.0).unwrap();
        assert_eq!(g.vertex.0, 0.0);
        assert_eq!(g.vertex.1, 1.0);
        assert!(g.vertex_in_interest);

        let g = load_knee_geometry(2.0).unwrap();
        assert_relative_eq!(g.vertex.0, 1.0 - SQRT_2, max_relative = 1e-12);
        assert_relative_eq!(g.vertex.1, SQRT_2, max_relative = 1e-12);
        assert!(!g.vertex_in_interest);
    }

    #[test]
    fn load_latus_endpoints_small_service_time() {
        let g = load_knee_geometry(0.04).unwrap();
        assert_relative_eq!(g.latus_p.0, 0.51716, max_relative = 1e-4);
        assert_relative_eq!(g.latus_q.0, 0.91716, max_relative = 1e-4);
        check_load_invariants(&g);
    }

    #[test]
    fn load_geometry_rejects_nonpositive_service_time() {
        assert!(matches!(
            load_knee_geometry(0.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            load_knee_geometry(-1.0),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn throughput_vertex_examples() {
        let g = throughput_knee_geometry(16.0).unwrap();
        assert_eq!(g.vertex.0, 15.0);
        assert_eq!(g.vertex.1, 1.0);
        assert!(g.region_feasible);

        let g = throughput_knee_geometry(1.0).unwrap();
        assert_eq!(g.vertex.0, 0.0);
        assert_eq!(g.vertex.1, 1.0);
        assert!(!g.region_feasible);

        let g = throughput_knee_geometry(4.0).unwrap();
        assert_relative_eq!(g.latus_p.0, 1.58579, max_relative = 1e-5);
        assert_relative_eq!(g.latus_p.1, 0.41421, max_relative = 1e-4);
        assert_relative_eq!(g.latus_q.0, 3.58579, max_relative = 1e-5);
        assert_relative_eq!(g.latus_q.1, 2.41421, max_relative = 1e-5);
        check_throughput_invariants(&g);
    }

    #[test]
    fn classify_load_examples() {
        assert_eq!(classify_load(0.04, 0.3).unwrap(), RegionLabel::Flat);
        assert_eq!(classify_load(0.04, 0.7).unwrap(), RegionLabel::Knee);
        assert_eq!(classify_load(0.04, 0.95).unwrap(), RegionLabel::Exponential);
        assert!(matches!(
            classify_load(0.04, 1.0),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn classify_boundary_points_are_knee() {
        let g = load_knee_geometry(0.04).unwrap();
        assert_eq!(
            classify_load(0.04, g.latus_p.0).unwrap(),
            RegionLabel::Knee
        );
        assert_eq!(
            classify_load(0.04, g.latus_q.0).unwrap(),
            RegionLabel::Knee
        );
    }

    #[test]
    fn classify_throughput_examples() {
        assert_eq!(classify_throughput(4.0, 1.0).unwrap(), RegionLabel::Flat);
        assert_eq!(classify_throughput(4.0, 2.6).unwrap(), RegionLabel::Knee);
        assert_eq!(
            classify_throughput(4.0, 3.9).unwrap(),
            RegionLabel::Exponential
        );
        assert!(matches!(
            classify_throughput(4.0, 4.0),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn classification_is_monotone_in_utilization() {
        for s in [0.01, 0.04, 3.0 - 2.0 * SQRT_2, 0.5, 1.5] {
            let mut seen_knee = false;
            let mut seen_exp = false;
            for i in 0..1000 {
                let u = i as f64 / 1000.0;
                match classify_load(s, u).unwrap() {
                    RegionLabel::Flat => assert!(!seen_knee && !seen_exp),
                    RegionLabel::Knee => {
                        assert!(!seen_exp);
                        seen_knee = true;
                    }
                    RegionLabel::Exponential => seen_exp = true,
                }
            }
        }
    }

    #[test]
    fn capacity_for_knee_examples() {
        assert_relative_eq!(capacity_for_knee_at(0.5).unwrap(), 0.25, max_relative = 1e-12);
        assert_relative_eq!(capacity_for_knee_at(0.9).unwrap(), 0.01, max_relative = 1e-12);
        assert_eq!(capacity_for_knee_at(0.0).unwrap(), 1.0);
        assert!(matches!(
            capacity_for_knee_at(1.0),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn feasibility_boundaries() {
        let boundary = 3.0 - 2.0 * SQRT_2;
        assert!(knee_region_feasible_load(boundary).unwrap());
        let g = load_knee_geometry(boundary).unwrap();
        assert!(g.latus_p.0.abs() < 1e-9);
        assert!(!knee_region_feasible_load(0.18).unwrap());
        assert!(knee_region_feasible_load(0.01).unwrap());

        assert!(knee_region_feasible_throughput(SQRT_2 + 1.0).unwrap());
        let g = throughput_knee_geometry(SQRT_2 + 1.0).unwrap();
        assert!(g.latus_p.0.abs() < 1e-12);
        assert!(!knee_region_feasible_throughput(2.0).unwrap());
        assert!(knee_region_feasible_throughput(16.0).unwrap());
    }

    #[test]
    fn ratio_knee_is_constant_half() {
        assert_eq!(ratio_knee_utilization::<f64>(), 0.5);
        // coincides with the vertex knee only at S = 1/4
        let vertex_quarter = load_knee_geometry(0.25).unwrap().vertex.0;
        assert_relative_eq!(vertex_quarter, 0.5, max_relative = 1e-12);
        let vertex_small = load_knee_geometry(0.01).unwrap().vertex.0;
        assert_relative_eq!(vertex_small, 0.9, max_relative = 1e-12);
        assert!((vertex_small - ratio_knee_utilization::<f64>()).abs() > 0.1);
    }

    #[test]
    fn slope_at_vertex_is_unity() {
        // central finite difference of each curve at its vertex
        let mut x = 0.37_f64;
        for _ in 0..50 {
            x = (x * 9301.0 + 49297.0) % 233280.0 / 233280.0;
            let s = x.max(1e-6);
            let u = load_knee_geometry(s).unwrap().vertex.0;
            let h = 1e-6 * s.sqrt();
            let slope = (response_time_of_utilization(s, u + h).unwrap()
                - response_time_of_utilization(s, u - h).unwrap())
                / (2.0 * h);
            assert!((slope - 1.0).abs() < 1e-6, "S={s} slope={slope}");

            let mu = 1.0 + 19.0 * x;
            let lambda = throughput_knee_geometry(mu).unwrap().vertex.0;
            let h = 1e-6;
            let slope = (response_time_of_throughput(mu, lambda + h).unwrap()
                - response_time_of_throughput(mu, lambda - h).unwrap())
                / (2.0 * h);
            assert!((slope - 1.0).abs() < 1e-6, "mu={mu} slope={slope}");
        }
    }

    #[test]
    fn throughput_latus_length_is_constant() {
        for mu in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 123.0] {
            let g = throughput_knee_geometry(mu).unwrap();
            assert_eq!(g.latus_length, 2.0 * SQRT_2);
        }
    }

    proptest! {
        #[test]
        fn load_geometry_invariants(s in 1e-4..4.0_f64) {
            check_load_invariants(&load_knee_geometry(s).unwrap());
        }

        #[test]
        fn throughput_geometry_invariants(mu in 1e-2..100.0_f64) {
            check_throughput_invariants(&throughput_knee_geometry(mu).unwrap());
        }

        #[test]
        fn feasibility_matches_lower_endpoint(s in 1e-4..1.0_f64) {
            let g = load_knee_geometry(s).unwrap();
            prop_assert_eq!(knee_region_feasible_load(s).unwrap(), g.latus_p.0 >= 0.0);
        }

        #[test]
        fn throughput_feasibility_matches_lower_endpoint(mu in 1e-2..10.0_f64) {
            let g = throughput_knee_geometry(mu).unwrap();
            prop_assert_eq!(knee_region_feasible_throughput(mu).unwrap(), g.latus_p.0 >= 0.0);
        }

        #[test]
        fn capacity_round_trips_through_vertex(s in 1e-6..1.0_f64) {
            let u = load_knee_geometry(s).unwrap().vertex.0;
            let back = capacity_for_knee_at(u).unwrap();
            prop_assert!((back - s).abs() <= 1e-12 * s);
        }
    }
}

//! Plot-ready sampling of the response-time curves.
//!
//! A series is a grid of curve samples plus exact marker samples for the
//! vertex and both latus-rectum endpoints, inserted at their closed-form
//! coordinates even when those fall off the grid. No rendering happens
//! here; the output is data for downstream plotters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    load_knee_geometry, throughput_knee_geometry, LoadKneeGeometry, Point, ThroughputKneeGeometry,
};
use crate::mm1::{response_time_of_throughput, response_time_of_utilization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveForm {
    /// `R(U; S)` — x is utilization, the parameter is the service time.
    LoadForm,
    /// `R(lambda; mu)` — x is the arrival rate, the parameter is the
    /// service rate.
    ThroughputForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marker {
    Vertex,
    LatusP,
    LatusQ,
}

impl Marker {
    pub fn as_str(&self) -> &'static str {
        match self {
            Marker::Vertex => "vertex",
            Marker::LatusP => "latus_p",
            Marker::LatusQ => "latus_q",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub x: f64,
    pub y: f64,
    pub marker: Option<Marker>,
}

/// The knee geometry that goes with a sampled series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CurveGeometry {
    Load(LoadKneeGeometry<f64>),
    Throughput(ThroughputKneeGeometry<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub form: CurveForm,
    /// Service time (load form) or service rate (throughput form).
    pub parameter: f64,
    pub samples: Vec<CurveSample>,
    pub geometry: CurveGeometry,
}

/// Samples one curve over `[x_from, x_to]` with the given grid step.
///
/// The range must stay strictly below the asymptote (`U = 1` or
/// `lambda = mu`); sentinel infinities are never emitted.
pub fn sample_curve(
    form: CurveForm,
    parameter: f64,
    x_from: f64,
    x_to: f64,
    step: f64,
) -> Result<CurveSeries> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "must be > 0",
        });
    }
    if !(x_from >= 0.0) {
        return Err(Error::OutOfDomain {
            name: "x_from",
            value: x_from,
            domain: "[0, asymptote)",
        });
    }
    if !(x_to >= x_from) {
        return Err(Error::InvalidParameter {
            name: "x_to",
            value: x_to,
            reason: "must be >= x_from",
        });
    }
    let (geometry, markers, asymptote) = match form {
        CurveForm::LoadForm => {
            let g = load_knee_geometry(parameter)?;
            (
                CurveGeometry::Load(g),
                [
                    (Marker::Vertex, g.vertex),
                    (Marker::LatusP, g.latus_p),
                    (Marker::LatusQ, g.latus_q),
                ],
                1.0,
            )
        }
        CurveForm::ThroughputForm => {
            let g = throughput_knee_geometry(parameter)?;
            (
                CurveGeometry::Throughput(g),
                [
                    (Marker::Vertex, g.vertex),
                    (Marker::LatusP, g.latus_p),
                    (Marker::LatusQ, g.latus_q),
                ],
                parameter,
            )
        }
    };
    if !(x_to < asymptote) {
        return Err(Error::OutOfDomain {
            name: "x_to",
            value: x_to,
            domain: "strictly below the curve asymptote",
        });
    }

    let eval = |x: f64| -> f64 {
        match form {
            CurveForm::LoadForm => response_time_of_utilization(parameter, x),
            CurveForm::ThroughputForm => response_time_of_throughput(parameter, x),
        }
        .expect("grid point inside the validated range")
    };

    let mut samples = Vec::new();
    let mut i = 0_usize;
    loop {
        let x = x_from + i as f64 * step;
        // tolerate one part in 1e9 of accumulated rounding at the far end
        if x > x_to + step * 1e-9 || x >= asymptote {
            break;
        }
        samples.push(CurveSample {
            x,
            y: eval(x),
            marker: None,
        });
        i += 1;
    }

    // exact marker samples, merged into the grid in x order
    for (marker, Point(mx, my)) in markers {
        if mx < x_from || mx > x_to {
            continue;
        }
        let pos = samples.partition_point(|s| s.x < mx);
        let sample = CurveSample {
            x: mx,
            y: my,
            marker: Some(marker),
        };
        if pos < samples.len() && samples[pos].x == mx {
            samples[pos] = sample;
        } else {
            samples.insert(pos, sample);
        }
    }

    Ok(CurveSeries {
        form,
        parameter,
        samples,
        geometry,
    })
}

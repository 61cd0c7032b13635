//! Parallel transport norms along orbits and exponent estimation.
//!
//! In the chart adapted to an orbit's chord, a transported transversal vector
//! keeps a euclidean-constant footprint v₀ scaled by √(m(w)m(w_t)), so its
//! Finsler norm along the orbit is
//!     N(t) = √(m(w_t)/m(w)) · m(x,[v₀]) / m(x_t,[v₀]),
//! normalized to N(0) = 1. The regression slope of log N against t is the
//! transport exponent η; the flow expands/contracts the two diagonal
//! subbundles by e^{±t}·N(t), which is what the Anosov rate measurement and
//! the Lyapunov assembly χ± = ±1 + η read off.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::domain::{ConvexDomain, DomainError};
use crate::flow::{self, FlowState};
use crate::metric::MetricContext;
use crate::numerics::line_fit;
use crate::projective::{adapted_chart, AffineChart, ProjectivePoint};

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("adapted chart construction failed: {0}")]
    ChartFailure(String),
    #[error("transversal direction is parallel to the chord")]
    DegenerateDirection,
    #[error("record too short: need at least 20 samples over horizon 5")]
    InsufficientSamples,
    #[error("transport requires a strictly convex domain")]
    NotStrictlyConvex,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// One sampled instant of an orbit: the state (in the ambient presentation
/// chart) and the three norms in the adapted frame.
#[derive(Debug, Clone)]
pub struct OrbitSample {
    pub t: f64,
    pub state: FlowState,
    pub transport_norm: f64,
    pub stable_norm: f64,
    pub unstable_norm: f64,
}

/// A sampled orbit with the adapted chart it was measured in and the spread
/// of the ratio against the boundary-shape comparison function
/// |x_t x⁺|^{1/2}(1/x_t y_t⁺ + 1/x_t y_t⁻).
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub samples: Vec<OrbitSample>,
    pub chart: AffineChart,
    pub comparison_ratio: (f64, f64),
}

/// Exponent data assembled from a transport regression.
#[derive(Debug, Clone, Copy)]
pub struct ExponentEstimate {
    pub eta: f64,
    pub chi_plus: f64,
    pub chi_minus: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    /// η is expected in (−1, 1); estimates outside are flagged, not fatal.
    pub eta_within_bounds: bool,
}

/// Measurement frame for one orbit: the 2D section of the adapted chart
/// spanned by the chord (the u-axis, endpoints at 0 and 1) and the
/// transversal direction.
struct OrbitFrame {
    chart: AffineChart,
    section: ConvexDomain,
    u0: f64,
    m0: f64,
    mv0: f64,
}

impl OrbitFrame {
    fn build(ctx: &MetricContext, w: &FlowState, v0: &DVector<f64>) -> Result<Self, TransportError> {
        if !ctx.domain().is_strictly_convex() {
            return Err(TransportError::NotStrictlyConvex);
        }
        if v0.norm() < 1e-14 {
            return Err(TransportError::DegenerateDirection);
        }
        let chord = ctx.domain().chord(w.point(), w.direction())?;
        let chart = adapted_chart(ctx.domain(), &chord.xplus, &chord.xminus)
            .map_err(|e| TransportError::ChartFailure(e.to_string()))?;
        let charted = ctx
            .domain()
            .in_chart(&chart)
            .map_err(|e| TransportError::ChartFailure(e.to_string()))?;
        let n = ctx.dim();
        let base = chart
            .project(&ProjectivePoint::from_affine(w.point()))
            .map_err(|e| TransportError::ChartFailure(e.to_string()))?;
        let u0 = base[0];
        if !(u0 > 0.0 && u0 < 1.0) {
            return Err(TransportError::ChartFailure(
                "base point did not land inside the normalized chord".into(),
            ));
        }
        // Push the transversal seed through the chart derivative, then drop
        // its chord component: transported footprints are orthogonal to the
        // chord in the adapted chart.
        let m = chart.matrix();
        let lifted = {
            let mut l = DVector::zeros(n + 1);
            l.rows_mut(0, n).copy_from(w.point());
            l[n] = 1.0;
            l
        };
        let dirv = {
            let mut d = DVector::zeros(n + 1);
            d.rows_mut(0, n).copy_from(v0);
            d
        };
        let image = m * &lifted;
        let dimage = m * &dirv;
        let wval = image[n];
        let dw = dimage[n];
        let mut pushed = DVector::zeros(n);
        for i in 0..n {
            pushed[i] = (dimage[i] * wval - image[i] * dw) / (wval * wval);
        }
        pushed[0] = 0.0;
        let norm = pushed.norm();
        if norm < 1e-10 {
            return Err(TransportError::DegenerateDirection);
        }
        let transversal = pushed / norm;
        // 2D section through the chord and the transversal.
        let mut e1 = DVector::zeros(n);
        e1[0] = 1.0;
        let mut base2 = DVector::zeros(2);
        base2[0] = u0;
        let section = charted
            .section2d(&DVector::zeros(n), &e1, &transversal, base2)
            .map_err(|e| TransportError::ChartFailure(e.to_string()))?;
        let m0 = 2.0 * (1.0 - u0) * u0;
        let mv0 = Self::transversal_m(&section, u0)?;
        Ok(Self {
            chart,
            section,
            u0,
            m0,
            mv0,
        })
    }

    /// m((u,0),[e₂]) in the section: harmonic mean of the two boundary
    /// distances along the transversal.
    fn transversal_m(section: &ConvexDomain, u: f64) -> Result<f64, TransportError> {
        let x = DVector::from_column_slice(&[u, 0.0]);
        let v = DVector::from_column_slice(&[0.0, 1.0]);
        let (a, b) = section.chord_distances(&x, &v)?;
        Ok(2.0 * a * b / (a + b))
    }

    /// Transport norm at time t, plus the comparison-function ratio
    /// N(t) / [√a_t·(1/y⁺ + 1/y⁻)].
    fn norm_at(&self, t: f64) -> Result<(f64, f64), TransportError> {
        let (a0, b0) = (1.0 - self.u0, self.u0);
        let (s, a_t, b_t) = flow::chord_flow(a0, b0, t);
        let u_t = self.u0 + s;
        let m_t = 2.0 * a_t * b_t;
        let mv_t = Self::transversal_m(&self.section, u_t)?;
        let norm = (m_t / self.m0).sqrt() * self.mv0 / mv_t;
        let comparison = a_t.sqrt() * 2.0 / mv_t;
        Ok((norm, norm / comparison))
    }
}

/// Sample the transport norm of the transversal seed v₀ along the orbit of w.
pub fn transport_norm_curve(
    ctx: &MetricContext,
    w: &FlowState,
    v0: &DVector<f64>,
    horizon: f64,
    steps: usize,
) -> Result<OrbitRecord, TransportError> {
    if steps < 2 || horizon <= 0.0 {
        return Err(TransportError::InsufficientSamples);
    }
    let frame = OrbitFrame::build(ctx, w, v0)?;
    let ambient_chord = ctx.domain().chord(w.point(), w.direction())?;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = f64::NEG_INFINITY;
    for k in 0..=steps {
        let t = horizon * k as f64 / steps as f64;
        let (norm, ratio) = frame.norm_at(t)?;
        ratio_min = ratio_min.min(ratio);
        ratio_max = ratio_max.max(ratio);
        let (s_amb, _, _) = flow::chord_flow(ambient_chord.a, ambient_chord.b, t);
        let state = FlowState::new(w.point() + s_amb * w.direction(), w.direction().clone())
            .expect("direction is unit");
        samples.push(OrbitSample {
            t,
            state,
            transport_norm: norm,
            stable_norm: (-t).exp() * norm,
            unstable_norm: t.exp() * norm,
        });
    }
    Ok(OrbitRecord {
        samples,
        chart: frame.chart,
        comparison_ratio: (ratio_min, ratio_max),
    })
}

/// Least-squares η from a transport record, discarding the leading 20% of the
/// horizon as transient.
pub fn eta_estimate(record: &OrbitRecord) -> Result<ExponentEstimate, TransportError> {
    eta_estimate_with_transient(record, 0.2)
}

pub fn eta_estimate_with_transient(
    record: &OrbitRecord,
    transient_fraction: f64,
) -> Result<ExponentEstimate, TransportError> {
    let samples = &record.samples;
    if samples.len() < 20 {
        return Err(TransportError::InsufficientSamples);
    }
    let horizon = samples.last().unwrap().t - samples[0].t;
    if horizon < 5.0 {
        return Err(TransportError::InsufficientSamples);
    }
    let cutoff = samples[0].t + transient_fraction * horizon;
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for s in samples {
        if s.t >= cutoff {
            ts.push(s.t);
            logs.push(s.transport_norm.ln());
        }
    }
    if ts.len() < 10 {
        return Err(TransportError::InsufficientSamples);
    }
    let fit = line_fit(&ts, &logs);
    let eta = fit.slope;
    Ok(ExponentEstimate {
        eta,
        chi_plus: 1.0 + eta,
        chi_minus: -1.0 + eta,
        stderr: fit.slope_stderr,
        window: (ts[0], *ts.last().unwrap()),
        eta_within_bounds: eta > -1.0 && eta < 1.0,
    })
}

/// Transport factors for the n−1 transversal frame directions, as consumed by
/// the tangent flow: factor_i(t) = N_i(t) with N_i the transport norm of the
/// i-th orthonormal complement direction of the chord.
pub(crate) fn frame_transport_factors(
    ctx: &MetricContext,
    w: &FlowState,
    t: f64,
) -> Result<Vec<f64>, TransportError> {
    let frame = transversal_frame(w.direction());
    let mut factors = Vec::with_capacity(frame.len());
    for v in &frame {
        let orbit = OrbitFrame::build(ctx, w, v)?;
        let (norm, _) = orbit.norm_at(t)?;
        factors.push(norm);
    }
    Ok(factors)
}

/// A convenient transversal seed: the first orthonormal complement direction.
pub fn transversal_seed(dir: &DVector<f64>) -> DVector<f64> {
    transversal_frame(dir)
        .into_iter()
        .next()
        .expect("ambient dimension is at least 2")
}

/// Orthonormal basis of the orthogonal complement of the direction.
pub(crate) fn transversal_frame(dir: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = dir.len();
    let mut cols = DMatrix::zeros(n, n);
    cols.column_mut(0).copy_from(dir);
    let mut filled = 1;
    for i in 0..n {
        if filled == n {
            break;
        }
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        // Gram-Schmidt against what we have.
        for j in 0..filled {
            let proj = cols.column(j).dot(&e);
            e -= proj * DVector::from(cols.column(j));
        }
        if e.norm() > 1e-8 {
            e /= e.norm();
            cols.column_mut(filled).copy_from(&e);
            filled += 1;
        }
    }
    (1..n).map(|j| cols.column(j).into()).collect()
}

/// Measured Anosov rates: α from the decay of stable norms e^{−t}·N(t) along
/// the forward orbit, β the same along the reversed orbit.
pub fn anosov_rates(
    ctx: &MetricContext,
    w: &FlowState,
    horizon: f64,
) -> Result<(f64, f64), TransportError> {
    let v0 = &transversal_frame(w.direction())[0];
    let steps = ((horizon * 16.0) as usize).max(64);
    let fwd = transport_norm_curve(ctx, w, v0, horizon, steps)?;
    let bwd = transport_norm_curve(ctx, &flow::flip(w), v0, horizon, steps)?;
    let eta_fwd = eta_estimate(&fwd)?.eta;
    let eta_bwd = eta_estimate(&bwd)?.eta;
    Ok((1.0 - eta_fwd, 1.0 - eta_bwd))
}

/// CSV body: t, base coordinates, and the three norms.
pub fn write_csv<W: Write>(record: &OrbitRecord, out: &mut W) -> io::Result<()> {
    let n = record
        .samples
        .first()
        .map(|s| s.state.point().len())
        .unwrap_or(0);
    let coords: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    writeln!(
        out,
        "t,{},transport_norm,stable_norm,unstable_norm",
        coords.join(",")
    )?;
    for s in &record.samples {
        let xs: Vec<String> = s.state.point().iter().map(|c| format!("{c}")).collect();
        writeln!(
            out,
            "{},{},{},{},{}",
            s.t,
            xs.join(","),
            s.transport_norm,
            s.stable_norm,
            s.unstable_norm
        )?;
    }
    Ok(())
}

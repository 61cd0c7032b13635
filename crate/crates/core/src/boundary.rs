//! Boundary-shape measurements: the local exponent of chord-to-boundary
//! distances y^±(v,x) ≍ x^{(1+η)/2} along a normal chord, β-convexity
//! (d(p', T_p∂Ω) ≥ C|pp'|^β) with its dual Hölder exponent 1/α + 1/β = 1,
//! and the entropy lower bound (2/β)(n−1) they imply.

use nalgebra::DVector;
use thiserror::Error;

use crate::domain::{ConvexDomain, DomainError};
use crate::numerics::{dyadic_scales, line_fit};
use crate::projective::adapted_chart;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("boundary tangent estimation failed: {0}")]
    TangentUnavailable(String),
    #[error("probe scale underflow: {0:e} is below 1e-10")]
    ScaleUnderflow(f64),
    #[error("beta must be at least 2 (ellipsoids attain 2), got {0}")]
    InvalidBeta(f64),
    #[error("domain must be strictly convex")]
    NotStrictlyConvex,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Measured shape data along one normal chord: probe scales with the two
/// transversal boundary distances, and the fitted log-log slope.
#[derive(Debug, Clone)]
pub struct ShapeProbe {
    pub exponent: f64,
    pub stderr: f64,
    /// Rows (scale, y⁺, y⁻) in the normalized adapted chart.
    pub rows: Vec<(f64, f64, f64)>,
}

/// Default probe scales 2^{-k}, k = 10..24 (the fit range of the dyadic grid).
pub fn default_scales() -> Vec<f64> {
    dyadic_scales(10, 24)
}

/// Exponent of y^±(v,x) against the chord parameter x at the boundary point
/// `xplus`, measured along the normal chord through `xplus` in the section
/// plane spanned by the chord and `v`. In the adapted chart the chord is
/// normalized to [0,1] with `xplus` at 1, so a scale x probes the point at
/// parameter 1 − x.
pub fn shape_exponent(
    domain: &ConvexDomain,
    xplus: &DVector<f64>,
    v: &DVector<f64>,
    scales: &[f64],
) -> Result<ShapeProbe, BoundaryError> {
    if !domain.is_strictly_convex() {
        return Err(BoundaryError::NotStrictlyConvex);
    }
    if let Some(&bad) = scales.iter().find(|&&s| s < 1e-10) {
        return Err(BoundaryError::ScaleUnderflow(bad));
    }
    let h = domain
        .boundary_tangent(xplus)
        .map_err(|e| BoundaryError::TangentUnavailable(e.to_string()))?;
    let n = domain.dim();
    let normal = DVector::from(h.rows(0, n)).normalize();
    // Other end of the normal chord, found from a point just inside.
    let probe = xplus + 1e-7 * &normal;
    if !domain.contains(&probe) {
        return Err(BoundaryError::TangentUnavailable(
            "inward normal leaves the domain".into(),
        ));
    }
    let chord = domain.chord(&probe, &normal)?;
    let xminus = chord.xplus;
    let chart = adapted_chart(domain, xplus, &xminus)
        .map_err(|e| BoundaryError::TangentUnavailable(e.to_string()))?;
    let charted = domain
        .in_chart(&chart)
        .map_err(|e| BoundaryError::TangentUnavailable(e.to_string()))?;
    // Transversal direction in the chart, orthogonal to the chord.
    let vchart = {
        let m = chart.matrix();
        let mut lifted = DVector::zeros(n + 1);
        lifted.rows_mut(0, n).copy_from(xplus);
        lifted[n] = 1.0;
        let mut dirv = DVector::zeros(n + 1);
        dirv.rows_mut(0, n).copy_from(v);
        let image = m * lifted;
        let dimage = m * dirv;
        let w = image[n];
        let dw = dimage[n];
        let mut pushed = DVector::zeros(n);
        for i in 0..n {
            pushed[i] = (dimage[i] * w - image[i] * dw) / (w * w);
        }
        pushed[0] = 0.0;
        if pushed.norm() < 1e-10 {
            return Err(BoundaryError::TangentUnavailable(
                "probe direction is parallel to the chord".into(),
            ));
        }
        pushed.normalize()
    };
    let mut e1 = DVector::zeros(n);
    e1[0] = 1.0;
    let section = charted
        .section2d(
            &DVector::zeros(n),
            &e1,
            &vchart,
            DVector::from_column_slice(&[0.5, 0.0]),
        )
        .map_err(|e| BoundaryError::TangentUnavailable(e.to_string()))?;
    let mut rows = Vec::with_capacity(scales.len());
    let mut log_x = Vec::with_capacity(scales.len());
    let mut log_y = Vec::with_capacity(scales.len());
    for &x in scales {
        let point = DVector::from_column_slice(&[1.0 - x, 0.0]);
        let t = section.chord(&point, &DVector::from_column_slice(&[0.0, 1.0]))?;
        rows.push((x, t.a, t.b));
        log_x.push(x.ln());
        log_y.push(0.5 * (t.a.ln() + t.b.ln()));
    }
    let fit = line_fit(&log_x, &log_y);
    Ok(ShapeProbe {
        exponent: fit.slope,
        stderr: fit.slope_stderr,
        rows,
    })
}

/// β-convexity estimate: β is the supremum of local flatness exponents of
/// log d(p', T_p∂Ω) against log |pp'| at small separations, sampled over
/// boundary points (the coordinate-axis points are always probed: extremal
/// flatness sits at symmetry points). α comes from 1/α + 1/β = 1.
pub fn beta_convexity(
    domain: &ConvexDomain,
    sample_pairs: usize,
) -> Result<(f64, f64), BoundaryError> {
    if !domain.is_strictly_convex() {
        return Err(BoundaryError::NotStrictlyConvex);
    }
    let n = domain.dim();
    let base = domain.base_point().clone();
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        dirs.push(e.clone());
        dirs.push(-e);
    }
    let mut rng = crate::rng::seeded(0xbe7a);
    while dirs.len() < sample_pairs.max(2 * n) {
        dirs.push(crate::rng::unit_vector(&mut rng, n));
    }
    let separations: Vec<f64> = (0..10).map(|k| 0.1 * 0.5f64.powi(k)).collect();
    let mut beta: f64 = 0.0;
    for dir in &dirs {
        let chord = domain.chord(&base, dir)?;
        let p = chord.xplus;
        let h = match domain.boundary_tangent(&p) {
            Ok(h) => h,
            Err(_) => continue,
        };
        let aff_norm = DVector::from(h.rows(0, n)).norm();
        if aff_norm < 1e-12 {
            continue;
        }
        let normal = DVector::from(h.rows(0, n)) / aff_norm;
        // A tangent direction at p.
        let tangent = {
            let seed = crate::rng::unit_vector(&mut rng, n);
            let mut t = &seed - seed.dot(&normal) * &normal;
            if t.norm() < 1e-6 {
                let mut e = DVector::zeros(n);
                e[(0..n)
                    .min_by(|&i, &j| normal[i].abs().partial_cmp(&normal[j].abs()).unwrap())
                    .unwrap()] = 1.0;
                t = &e - e.dot(&normal) * &normal;
            }
            t.normalize()
        };
        // Probe both tangent directions and keep the smaller fitted
        // exponent: a probe walking across a nearby flat spot shows a
        // transient slope above the true flatness order, the opposite one
        // does not.
        let mut point_exponent = f64::INFINITY;
        for side in [1.0, -1.0] {
            let mut log_sep = Vec::new();
            let mut log_dist = Vec::new();
            for &sep in &separations {
                // Nearby boundary point in the tangent direction.
                let target = &p + side * sep * &tangent;
                let ray = &target - &base;
                let c = domain.chord(&base, &ray)?;
                let q = c.xplus;
                let pq = (&q - &p).norm();
                // Euclidean distance from q to the tangent hyperplane at p.
                let dist = (h.rows(0, n).dot(&q) + h[n]).abs() / aff_norm;
                if pq > 1e-12 && dist > 1e-300 {
                    log_sep.push(pq.ln());
                    log_dist.push(dist.ln());
                }
            }
            if log_sep.len() >= 4 {
                let fit = line_fit(&log_sep, &log_dist);
                point_exponent = point_exponent.min(fit.slope);
            }
        }
        if point_exponent.is_finite() {
            beta = beta.max(point_exponent);
        }
    }
    if beta < 1.5 {
        return Err(BoundaryError::TangentUnavailable(
            "no usable boundary probes".into(),
        ));
    }
    let beta = beta.max(2.0);
    let alpha = beta / (beta - 1.0);
    Ok((beta, alpha))
}

/// Entropy lower bound (2/β)(n−1) from β-convexity of the boundary.
pub fn entropy_lower_bound(beta: f64, n: usize) -> Result<f64, BoundaryError> {
    if beta < 2.0 || beta.is_nan() {
        return Err(BoundaryError::InvalidBeta(beta));
    }
    Ok(2.0 / beta * (n as f64 - 1.0))
}

/// Convert a measured shape exponent to the transport exponent η of the
/// orbit approaching that endpoint: exponent = (1+η)/2.
pub fn exponent_to_eta(exponent: f64) -> f64 {
    2.0 * exponent - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn klein_disk_shape_exponent_is_half() {
        let disk = ConvexDomain::unit_ball(2).unwrap();
        let probe = shape_exponent(
            &disk,
            &dvector![1.0, 0.0],
            &dvector![0.0, 1.0],
            &default_scales(),
        )
        .unwrap();
        assert!(
            (probe.exponent - 0.5).abs() < 0.01,
            "circle exponent {}",
            probe.exponent
        );
        // Off-axis boundary points of the circle measure the same.
        let p = dvector![(0.4f64).cos(), (0.4f64).sin()];
        let v = dvector![-(0.4f64).sin(), (0.4f64).cos()];
        let probe = shape_exponent(&disk, &p, &v, &default_scales()).unwrap();
        assert!((probe.exponent - 0.5).abs() < 0.01);
    }

    #[test]
    fn quartic_ball_axis_exponent_is_quarter() {
        let p4 = ConvexDomain::p_ball(4.0, 2).unwrap();
        let probe = shape_exponent(
            &p4,
            &dvector![1.0, 0.0],
            &dvector![0.0, 1.0],
            &default_scales(),
        )
        .unwrap();
        assert!(
            (probe.exponent - 0.25).abs() < 0.01,
            "quartic axis exponent {}",
            probe.exponent
        );
        // The quartic ball is symmetric: the opposite axis endpoint measures
        // the same exponent. (Its axis orbit is not regular, so the
        // regular-orbit antisymmetry does not apply here.)
        let probe = shape_exponent(
            &p4,
            &dvector![-1.0, 0.0],
            &dvector![0.0, 1.0],
            &default_scales(),
        )
        .unwrap();
        assert!((probe.exponent - 0.25).abs() < 0.01);
    }

    #[test]
    fn power_curve_endpoints_split_the_exponent_pair() {
        // κ = 3/4 realizes the regular orbit with η = −1/2: exponents 1/4 at
        // the attracting endpoint and 3/4 at the repelling one, summing to 1
        // (η-antisymmetry at the boundary level).
        let pc = ConvexDomain::power_curve(0.75, 0.5).unwrap();
        let plus = shape_exponent(
            &pc,
            &dvector![1.0, 0.0],
            &dvector![0.0, 1.0],
            &default_scales(),
        )
        .unwrap();
        let minus = shape_exponent(
            &pc,
            &dvector![0.0, 0.0],
            &dvector![0.0, 1.0],
            &default_scales(),
        )
        .unwrap();
        assert!((plus.exponent - 0.25).abs() < 0.01, "got {}", plus.exponent);
        assert!((minus.exponent - 0.75).abs() < 0.01, "got {}", minus.exponent);
        let eta_sum = exponent_to_eta(plus.exponent) + exponent_to_eta(minus.exponent);
        assert!(eta_sum.abs() < 2.0 * (plus.stderr + minus.stderr) + 1e-3);
    }

    #[test]
    fn generic_chord_exponents_sum_to_zero_eta() {
        // Generic (positively curved) endpoints of the quartic ball both
        // measure 1/2, so the converted η's cancel.
        let p4 = ConvexDomain::p_ball(4.0, 2).unwrap();
        let x = dvector![0.05, -0.1];
        let dir = dvector![0.8, 0.59];
        let chord = p4.chord(&x, &dir).unwrap();
        let v = dvector![-0.59, 0.8];
        let plus = shape_exponent(&p4, &chord.xplus, &v, &default_scales()).unwrap();
        let minus = shape_exponent(&p4, &chord.xminus, &v, &default_scales()).unwrap();
        let eta_sum = exponent_to_eta(plus.exponent) + exponent_to_eta(minus.exponent);
        assert!(
            eta_sum.abs() < 2.0 * (plus.stderr + minus.stderr) + 2e-3,
            "eta sum {eta_sum}"
        );
    }

    #[test]
    fn exponents_stay_in_unit_interval() {
        let domains = [
            ConvexDomain::unit_ball(2).unwrap(),
            ConvexDomain::p_ball(3.0, 2).unwrap(),
            ConvexDomain::power_curve(0.6, 0.5).unwrap(),
        ];
        let mut rng = crate::rng::seeded(17);
        for d in &domains {
            for _ in 0..5 {
                let x = d.random_interior(&mut rng);
                let dir = crate::rng::unit_vector(&mut rng, 2);
                let chord = d.chord(&x, &dir).unwrap();
                let v = dvector![-dir[1], dir[0]];
                if let Ok(probe) = shape_exponent(d, &chord.xplus, &v, &default_scales()) {
                    assert!(
                        probe.exponent > 0.0 && probe.exponent < 1.0,
                        "exponent {} outside (0,1)",
                        probe.exponent
                    );
                }
            }
        }
    }

    #[test]
    fn scale_underflow_guard() {
        let disk = ConvexDomain::unit_ball(2).unwrap();
        let r = shape_exponent(
            &disk,
            &dvector![1.0, 0.0],
            &dvector![0.0, 1.0],
            &[1e-4, 1e-12],
        );
        assert!(matches!(r, Err(BoundaryError::ScaleUnderflow(_))));
    }

    #[test]
    fn beta_convexity_disk_and_quartic() {
        let disk = ConvexDomain::unit_ball(2).unwrap();
        let (beta, alpha) = beta_convexity(&disk, 64).unwrap();
        assert!((beta - 2.0).abs() < 0.05, "disk beta {beta}");
        assert!((alpha - 2.0).abs() < 0.05, "disk alpha {alpha}");

        let p4 = ConvexDomain::p_ball(4.0, 2).unwrap();
        let (beta, alpha) = beta_convexity(&p4, 64).unwrap();
        assert!((beta - 4.0).abs() < 0.1, "quartic beta {beta}");
        assert!((alpha - 4.0 / 3.0).abs() < 0.05, "quartic alpha {alpha}");
        // The pair always satisfies the duality exactly, by assembly.
        assert!((1.0 / beta + 1.0 / alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_lower_bound_values() {
        assert!((entropy_lower_bound(2.0, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!((entropy_lower_bound(4.0, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((entropy_lower_bound(4.0, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            entropy_lower_bound(1.5, 2),
            Err(BoundaryError::InvalidBeta(_))
        ));
    }
}

//! Homogeneous-coordinate arithmetic: points of P^n, homographies, cross-ratios,
//! and affine charts, including the chart adapted to a chord (the chart in which
//! the two boundary tangent hyperplanes are parallel and orthogonal to the chord).

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::domain::ConvexDomain;

#[derive(Debug, Error)]
pub enum ProjectiveError {
    #[error("homogeneous coordinate vector is zero")]
    ZeroVector,
    #[error("matrix is singular or near-singular (condition estimate {cond:.3e})")]
    Singular { cond: f64 },
    #[error("points are not collinear (rank residual {residual:.3e})")]
    NotCollinear { residual: f64 },
    #[error("degenerate configuration: coincident points zero a cross-ratio denominator")]
    DegenerateConfiguration,
    #[error("image vector vanished under the homography")]
    ZeroImage,
    #[error("point lies on the hyperplane at infinity of the chart")]
    AtInfinity,
    #[error("boundary tangent estimation failed: {0}")]
    TangentUnavailable(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A point of projective n-space, held as a nonzero homogeneous vector of
/// length n+1. Two points are equal iff their vectors are proportional.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    coords: DVector<f64>,
}

impl ProjectivePoint {
    pub fn new(coords: DVector<f64>) -> Result<Self, ProjectiveError> {
        if coords.norm() == 0.0 || !coords.iter().all(|c| c.is_finite()) {
            return Err(ProjectiveError::ZeroVector);
        }
        Ok(Self { coords })
    }

    /// Standard lift of affine coordinates: x ↦ [x : 1].
    pub fn from_affine(x: &DVector<f64>) -> Self {
        let mut v = DVector::zeros(x.len() + 1);
        v.rows_mut(0, x.len()).copy_from(x);
        v[x.len()] = 1.0;
        Self { coords: v }
    }

    /// Projective dimension n (one less than the coordinate length).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    /// Scale-free representative: unit euclidean norm, first nonzero
    /// coordinate positive. Used for all equality comparisons.
    pub fn normalized(&self) -> DVector<f64> {
        let mut v = self.coords.clone();
        v /= v.norm();
        for i in 0..v.len() {
            if v[i].abs() > 1e-14 {
                if v[i] < 0.0 {
                    v = -v;
                }
                break;
            }
        }
        v
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.normalized() - other.normalized()).norm() < tol
    }

    /// Dehomogenize in the standard chart (last coordinate to 1).
    pub fn to_affine(&self) -> Result<DVector<f64>, ProjectiveError> {
        let n = self.dim();
        let w = self.coords[n];
        if w.abs() < 1e-14 * self.coords.norm() {
            return Err(ProjectiveError::AtInfinity);
        }
        Ok(self.coords.rows(0, n).map(|c| c / w))
    }
}

/// Element of PGL(n+1, R): an invertible matrix with |det| normalized to 1.
#[derive(Debug, Clone)]
pub struct Homography {
    matrix: DMatrix<f64>,
    cond: f64,
}

impl Homography {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, ProjectiveError> {
        assert!(matrix.is_square());
        let n = matrix.nrows();
        let det = matrix.clone().lu().determinant();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(ProjectiveError::Singular { cond: f64::INFINITY });
        }
        let scale = det.abs().powf(1.0 / n as f64);
        let m = matrix / scale;
        let cond = condition_estimate(&m);
        if !cond.is_finite() {
            return Err(ProjectiveError::Singular { cond });
        }
        Ok(Self { matrix: m, cond })
    }

    pub fn identity(n_proj: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n_proj + 1, n_proj + 1),
            cond: 1.0,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// 1-norm condition estimate, reported as the invertibility guard.
    pub fn cond(&self) -> f64 {
        self.cond
    }

    pub fn compose(&self, other: &Homography) -> Homography {
        Homography::new(&self.matrix * &other.matrix).expect("product of invertible matrices")
    }

    pub fn inverse(&self) -> Homography {
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .expect("normalized homography is invertible");
        Homography::new(inv).expect("inverse is invertible")
    }

    /// Apply to a point: the class of matrix·coords.
    pub fn apply(&self, p: &ProjectivePoint) -> Result<ProjectivePoint, ProjectiveError> {
        let v = &self.matrix * p.coords();
        let norm = v.norm();
        if norm < 1e-14 * p.coords().norm() {
            return Err(ProjectiveError::ZeroImage);
        }
        ProjectivePoint::new(v)
    }
}

fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    match m.clone().try_inverse() {
        Some(inv) => one_norm(m) * one_norm(&inv),
        None => f64::INFINITY,
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Cross ratio [a,b,x,y] = (ax/bx)/(ay/by) of four collinear points, computed
/// from projective parameters along the common line so that any affine chart
/// gives the same value.
pub fn cross_ratio(
    a: &ProjectivePoint,
    b: &ProjectivePoint,
    x: &ProjectivePoint,
    y: &ProjectivePoint,
) -> Result<f64, ProjectiveError> {
    let pts = [a, b, x, y];
    let n1 = a.coords().len();
    for p in &pts {
        if p.coords().len() != n1 {
            return Err(ProjectiveError::DimensionMismatch {
                expected: n1 - 1,
                got: p.coords().len() - 1,
            });
        }
    }
    // Collinearity: the four normalized lifts must span a rank-2 subspace.
    let mut stacked = DMatrix::zeros(4, n1);
    for (i, p) in pts.iter().enumerate() {
        stacked.row_mut(i).copy_from(&p.normalized().transpose());
    }
    let svals = stacked.svd(false, false).singular_values;
    if svals.len() > 2 && svals[2] > 1e-10 * svals[0] {
        return Err(ProjectiveError::NotCollinear {
            residual: svals[2] / svals[0],
        });
    }
    if a.approx_eq(b, 1e-12) {
        return Err(ProjectiveError::DegenerateConfiguration);
    }
    // x ∈ {a,b} or y ∈ {a,b} zeroes one of the distance ratios.
    for p in [x, y] {
        if p.approx_eq(a, 1e-12) || p.approx_eq(b, 1e-12) {
            return Err(ProjectiveError::DegenerateConfiguration);
        }
    }
    // Coordinates (alpha, beta) of each point in the basis (a, b) of the line,
    // by least squares against the two lifted basis vectors.
    let mut basis = DMatrix::zeros(n1, 2);
    basis.column_mut(0).copy_from(&a.normalized());
    basis.column_mut(1).copy_from(&b.normalized());
    let gram = basis.transpose() * &basis;
    let gram_inv = gram
        .try_inverse()
        .ok_or(ProjectiveError::DegenerateConfiguration)?;
    let coord = |p: &ProjectivePoint| -> (f64, f64) {
        let rhs = basis.transpose() * p.normalized();
        let c = &gram_inv * rhs;
        (c[0], c[1])
    };
    let ca = (1.0, 0.0);
    let cb = (0.0, 1.0);
    let cx = coord(x);
    let cy = coord(y);
    let det2 = |p: (f64, f64), q: (f64, f64)| p.0 * q.1 - p.1 * q.0;
    let num = det2(ca, cx) * det2(cb, cy);
    let den = det2(cb, cx) * det2(ca, cy);
    let scale = (cx.0 * cx.0 + cx.1 * cx.1) * (cy.0 * cy.0 + cy.1 * cy.1);
    if den.abs() < 1e-24 * scale.max(1e-300) {
        return Err(ProjectiveError::DegenerateConfiguration);
    }
    Ok(num / den)
}

/// An affine chart of P^n: an invertible change of homogeneous frame whose last
/// output coordinate is the pairing against the hyperplane at infinity.
/// Points with nonzero pairing dehomogenize to chart coordinates.
#[derive(Debug, Clone)]
pub struct AffineChart {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl AffineChart {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self, ProjectiveError> {
        let h = Homography::new(matrix)?;
        let inverse = h.inverse().matrix().clone();
        Ok(Self {
            matrix: h.matrix().clone(),
            inverse,
        })
    }

    /// The standard chart x ↦ [x : 1].
    pub fn standard(n_proj: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n_proj + 1, n_proj + 1),
            inverse: DMatrix::identity(n_proj + 1, n_proj + 1),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    /// Covector cutting out the hyperplane at infinity (the last row).
    pub fn hyperplane_at_infinity(&self) -> DVector<f64> {
        self.matrix.row(self.matrix.nrows() - 1).transpose()
    }

    /// The n frame vectors spanning the affine part: preimages of the
    /// coordinate directions, i.e. the first n columns of the inverse matrix.
    pub fn frame(&self) -> Vec<DVector<f64>> {
        (0..self.dim()).map(|j| self.inverse.column(j).into()).collect()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn as_homography(&self) -> Homography {
        Homography::new(self.matrix.clone()).expect("chart matrix invertible")
    }

    /// Chart coordinates of a projective point.
    pub fn project(&self, p: &ProjectivePoint) -> Result<DVector<f64>, ProjectiveError> {
        let v = &self.matrix * p.coords();
        let n = self.dim();
        let w = v[n];
        if w.abs() < 1e-14 * v.norm() {
            return Err(ProjectiveError::AtInfinity);
        }
        Ok(v.rows(0, n).map(|c| c / w))
    }

    /// Projective point lifting the given chart coordinates.
    pub fn lift(&self, x: &DVector<f64>) -> ProjectivePoint {
        let mut homog = DVector::zeros(x.len() + 1);
        homog.rows_mut(0, x.len()).copy_from(x);
        homog[x.len()] = 1.0;
        ProjectivePoint::new(&self.inverse * homog).expect("chart lift is nonzero")
    }
}

/// Build the chart adapted to the chord x⁻x⁺ of a convex domain with C¹
/// boundary: the intersection of the two boundary tangent hyperplanes goes to
/// infinity, the tangents become parallel and orthogonal to the chord, and the
/// chord endpoints land at the origin (x⁻) and the first unit point (x⁺).
///
/// `xplus`/`xminus` are boundary points in the domain's presentation chart.
/// The returned chart maps that presentation chart's homogeneous frame to the
/// adapted frame.
pub fn adapted_chart(
    domain: &ConvexDomain,
    xplus: &DVector<f64>,
    xminus: &DVector<f64>,
) -> Result<AffineChart, ProjectiveError> {
    let n = domain.dim();
    if xplus.len() != n || xminus.len() != n {
        return Err(ProjectiveError::DimensionMismatch {
            expected: n,
            got: xplus.len(),
        });
    }
    if (xplus - xminus).norm() < 1e-12 {
        return Err(ProjectiveError::TangentUnavailable(
            "chord endpoints coincide".into(),
        ));
    }
    let h_plus = domain
        .boundary_tangent(xplus)
        .map_err(|e| ProjectiveError::TangentUnavailable(e.to_string()))?;
    let h_minus = domain
        .boundary_tangent(xminus)
        .map_err(|e| ProjectiveError::TangentUnavailable(e.to_string()))?;

    let lift = |x: &DVector<f64>| -> DVector<f64> {
        let mut v = DVector::zeros(n + 1);
        v.rows_mut(0, n).copy_from(x);
        v[n] = 1.0;
        v
    };
    let vp = lift(xplus);
    let vm = lift(xminus);
    // Tangent covectors are oriented positive on the interior, so these
    // pairings are strictly positive for a properly convex domain.
    let hp_at_minus = h_plus.dot(&vm);
    let hm_at_plus = h_minus.dot(&vp);
    if hp_at_minus <= 1e-13 || hm_at_plus <= 1e-13 {
        return Err(ProjectiveError::TangentUnavailable(
            "tangent hyperplane passes through the opposite chord endpoint".into(),
        ));
    }
    // Row u = h⁻/h⁻(x⁺): vanishes on T⁻, equals 1 at x⁺.
    // Row w = h⁺/h⁺(x⁻) + h⁻/h⁻(x⁺): vanishes exactly on T⁺ ∩ T⁻ and is
    // positive on the closed domain, so the body stays bounded in the chart.
    // Then u - w ∝ h⁺ vanishes on T⁺, which makes both tangents chart-parallel
    // coordinate hyperplanes {u = 0} and {u = 1}, orthogonal to the chord.
    let u_row = &h_minus / hm_at_plus;
    let w_row = &h_plus / hp_at_minus + &u_row;

    // Transversal rows: an orthonormal basis of covectors vanishing on both
    // chord lifts, by Gram-Schmidt against the lifted endpoints.
    let mut ortho: Vec<DVector<f64>> = vec![vp.normalize(), (&vm - vm.dot(&vp.normalize()) * vp.normalize()).normalize()];
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(n + 1);
    rows.push(u_row);
    for i in 0..n + 1 {
        if ortho.len() == n + 1 {
            break;
        }
        let mut e = DVector::zeros(n + 1);
        e[i] = 1.0;
        for q in &ortho {
            let proj = q.dot(&e);
            e -= proj * q;
        }
        if e.norm() > 1e-8 {
            let e = e.normalize();
            rows.push(e.clone());
            ortho.push(e);
        }
    }
    rows.push(w_row);

    let mut m = DMatrix::zeros(n + 1, n + 1);
    for (i, r) in rows.iter().enumerate() {
        m.row_mut(i).copy_from(&r.transpose());
    }
    AffineChart::from_matrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConvexDomain;
    use nalgebra::dvector;

    fn pt(coords: &[f64]) -> ProjectivePoint {
        ProjectivePoint::new(DVector::from_column_slice(coords)).unwrap()
    }

    fn embed_line(t: f64) -> ProjectivePoint {
        // The real line embedded in P^2 as y = 0.
        pt(&[t, 0.0, 1.0])
    }

    #[test]
    fn cross_ratio_hand_value() {
        // a=0, b=1, x=0.25, y=0.75: (ax/bx)/(ay/by) = (0.25/0.75)/(0.75/0.25) = 1/9.
        let cr = cross_ratio(
            &embed_line(0.0),
            &embed_line(1.0),
            &embed_line(0.25),
            &embed_line(0.75),
        )
        .unwrap();
        assert!((cr - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn cross_ratio_equal_arguments_is_one() {
        let cr = cross_ratio(
            &embed_line(-1.0),
            &embed_line(2.0),
            &embed_line(0.4),
            &embed_line(0.4),
        )
        .unwrap();
        assert!((cr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_ratio_homography_invariant() {
        let g = Homography::new(DMatrix::from_row_slice(
            3,
            3,
            &[1.3, 0.2, -0.4, 0.1, 0.9, 0.3, -0.2, 0.15, 1.1],
        ))
        .unwrap();
        let pts = [
            embed_line(0.0),
            embed_line(1.0),
            embed_line(0.25),
            embed_line(0.75),
        ];
        let before = cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3]).unwrap();
        let im: Vec<_> = pts.iter().map(|p| g.apply(p).unwrap()).collect();
        let after = cross_ratio(&im[0], &im[1], &im[2], &im[3]).unwrap();
        assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn cross_ratio_cocycle() {
        let a = embed_line(-1.0);
        let b = embed_line(3.0);
        let x = embed_line(0.0);
        let y = embed_line(0.5);
        let z = embed_line(1.5);
        let xz = cross_ratio(&a, &b, &x, &z).unwrap();
        let xy = cross_ratio(&a, &b, &x, &y).unwrap();
        let yz = cross_ratio(&a, &b, &y, &z).unwrap();
        assert!((xz - xy * yz).abs() < 1e-10);
    }

    #[test]
    fn cross_ratio_rejects_non_collinear() {
        let r = cross_ratio(
            &pt(&[0.0, 0.0, 1.0]),
            &pt(&[1.0, 0.0, 1.0]),
            &pt(&[0.0, 1.0, 1.0]),
            &pt(&[0.5, 0.0, 1.0]),
        );
        assert!(matches!(r, Err(ProjectiveError::NotCollinear { .. })));
    }

    #[test]
    fn cross_ratio_rejects_degenerate() {
        let r = cross_ratio(
            &embed_line(0.0),
            &embed_line(1.0),
            &embed_line(0.25),
            &embed_line(1.0),
        );
        assert!(matches!(r, Err(ProjectiveError::DegenerateConfiguration)));
    }

    #[test]
    fn apply_identity_and_diagonal() {
        let p = pt(&[1.0, 0.0, 1.0]);
        let id = Homography::identity(2);
        assert!(id.apply(&p).unwrap().approx_eq(&p, 1e-14));
        let g = Homography::new(DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ))
        .unwrap();
        let q = g.apply(&p).unwrap();
        assert!(q.approx_eq(&pt(&[2.0, 0.0, 1.0]), 1e-12));
    }

    #[test]
    fn inverse_round_trip() {
        let g = Homography::new(DMatrix::from_row_slice(
            3,
            3,
            &[1.1, 0.3, -0.2, 0.0, 0.8, 0.4, 0.2, -0.1, 1.3],
        ))
        .unwrap();
        let p = pt(&[0.3, -0.7, 1.0]);
        let back = g.inverse().apply(&g.apply(&p).unwrap()).unwrap();
        assert!(back.approx_eq(&p, 1e-12));
        let comp = g.compose(&g.inverse());
        let q = comp.apply(&p).unwrap();
        assert!(q.approx_eq(&p, 1e-12));
    }

    fn chart_tangent_directions(
        domain: &ConvexDomain,
        chart: &AffineChart,
        bp: &DVector<f64>,
    ) -> DVector<f64> {
        // Direction of the tangent line at a boundary point, in chart coords.
        let h = domain.boundary_tangent(bp).unwrap();
        // Tangent line through bp: parameterize by the kernel direction of h.
        let t = dvector![-h[1], h[0]];
        let p0 = chart
            .project(&ProjectivePoint::from_affine(bp))
            .unwrap();
        let p1 = chart
            .project(&ProjectivePoint::from_affine(&(bp + 1e-4 * &t)))
            .unwrap();
        let d = p1 - p0;
        &d / d.norm()
    }

    #[test]
    fn adapted_chart_disk_diameter_is_already_adapted() {
        let disk = ConvexDomain::unit_ball(2).unwrap();
        let xp = dvector![1.0, 0.0];
        let xm = dvector![-1.0, 0.0];
        let chart = adapted_chart(&disk, &xp, &xm).unwrap();
        let ip = chart.project(&ProjectivePoint::from_affine(&xp)).unwrap();
        let im = chart.project(&ProjectivePoint::from_affine(&xm)).unwrap();
        assert!((ip - dvector![1.0, 0.0]).norm() < 1e-10);
        assert!(im.norm() < 1e-10);
        let d1 = chart_tangent_directions(&disk, &chart, &xp);
        let d2 = chart_tangent_directions(&disk, &chart, &xm);
        // Parallel tangents, orthogonal to the chord (the u-axis).
        assert!(d1[0].abs() < 1e-8 && d2[0].abs() < 1e-8);
    }

    #[test]
    fn adapted_chart_generic_chord_parallelizes_tangents() {
        let disk = ConvexDomain::unit_ball(2).unwrap();
        let xp = dvector![(0.3f64).cos(), (0.3f64).sin()];
        let xm = dvector![(2.2f64).cos(), (2.2f64).sin()];
        let chart = adapted_chart(&disk, &xp, &xm).unwrap();
        let d1 = chart_tangent_directions(&disk, &chart, &xp);
        let d2 = chart_tangent_directions(&disk, &chart, &xm);
        let cross = d1[0] * d2[1] - d1[1] * d2[0];
        assert!(cross.abs() < 1e-8, "tangents not parallel: {cross:e}");
        assert!(d1[0].abs() < 1e-8, "tangent not orthogonal to chord");
    }

    #[test]
    fn adapted_chart_parallelism_on_random_chords() {
        let domains = [
            ConvexDomain::unit_ball(2).unwrap(),
            ConvexDomain::ellipsoid(&[1.7, 0.8]).unwrap(),
            ConvexDomain::p_ball(3.0, 2).unwrap(),
        ];
        let mut rng = crate::rng::seeded(59);
        for domain in &domains {
            for _ in 0..20 {
                let x = domain.random_interior(&mut rng);
                let v = crate::rng::unit_vector(&mut rng, 2);
                let chord = domain.chord(&x, &v).unwrap();
                let chart = adapted_chart(domain, &chord.xplus, &chord.xminus).unwrap();
                let d1 = chart_tangent_directions(domain, &chart, &chord.xplus);
                let d2 = chart_tangent_directions(domain, &chart, &chord.xminus);
                let cross = d1[0] * d2[1] - d1[1] * d2[0];
                assert!(cross.abs() < 1e-8, "tangents not parallel: {cross:e}");
                assert!(d1[0].abs() < 1e-8, "tangent not orthogonal to the chord");
            }
        }
    }

    #[test]
    fn adapted_chart_ellipse_chord() {
        let ellipse = ConvexDomain::ellipsoid(&[2.0, 1.0]).unwrap();
        let xp = dvector![2.0, 0.0];
        let xm = dvector![0.0, 1.0];
        let chart = adapted_chart(&ellipse, &xp, &xm).unwrap();
        let d1 = chart_tangent_directions(&ellipse, &chart, &xp);
        let d2 = chart_tangent_directions(&ellipse, &chart, &xm);
        let cross = d1[0] * d2[1] - d1[1] * d2[0];
        assert!(cross.abs() < 1e-8);
        let ip = chart.project(&ProjectivePoint::from_affine(&xp)).unwrap();
        let im = chart.project(&ProjectivePoint::from_affine(&xm)).unwrap();
        assert!(ip.iter().all(|c| c.is_finite()) && im.iter().all(|c| c.is_finite()));
    }
}

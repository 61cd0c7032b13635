//! Properly convex open sets with a uniform chord-endpoint oracle.
//!
//! Every domain answers three queries in its presentation chart: a signed
//! boundary value (negative inside), the two boundary hits of a line through
//! an interior point, and the supporting hyperplane at a boundary point.
//! Quadrics and polytopes answer chord queries in closed form; the other kinds
//! use bracketing plus bisection. Chart changes and plane sections pull the
//! oracle back through homogeneous coordinates, exactly for quadrics and
//! polytopes and through a mapped wrapper otherwise.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::projective::{AffineChart, Homography, ProjectivePoint};

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid domain description: {0}")]
    InvalidSpec(String),
    #[error("point is not interior to the domain")]
    NotInterior,
    #[error("chord search failed to converge: {0}")]
    NoConvergence(String),
    #[error("point does not lie on the boundary")]
    NotOnBoundary,
    #[error("boundary is not smooth at this point")]
    NonSmoothPoint,
    #[error("operation unsupported in dimension {0}")]
    UnsupportedDimension(usize),
}

/// The two boundary hits of the line {x + λv}: x⁺ = x + a·v and x⁻ = x − b·v,
/// with a, b the euclidean distances from x.
#[derive(Debug, Clone)]
pub struct ChordEndpoints {
    pub xplus: DVector<f64>,
    pub xminus: DVector<f64>,
    pub a: f64,
    pub b: f64,
}

impl ChordEndpoints {
    pub fn length(&self) -> f64 {
        self.a + self.b
    }
}

#[derive(Debug, Clone)]
enum DomainKind {
    /// Interior = { x : [x;1]ᵀ Q [x;1] < 0 } for a symmetric matrix Q.
    Quadric(DMatrix<f64>),
    /// Unit p-ball Σ|x_i|^p < 1, p > 1.
    PBall(f64),
    /// Intersection of half-spaces, each a homogeneous covector f with
    /// f·[x;1] < 0 inside and euclidean-normalized affine part.
    Polytope {
        faces: Vec<DVector<f64>>,
        vertices: Vec<DVector<f64>>,
    },
    /// 2D body { (u,y) : 0 < u < 1, |y| < scale·u^κ(1-u)^(1-κ) }, the orbit
    /// curve of a biproximal projective transformation in its eigenchart.
    PowerCurve { kappa: f64, scale: f64 },
    /// A body viewed through a homogeneous coordinate change: presented lift
    /// [y;1] maps to the inner body's chart by `to_inner` (possibly
    /// rectangular, for plane sections).
    Mapped {
        inner: Box<ConvexDomain>,
        to_inner: DMatrix<f64>,
        /// Sign of the inner dehomogenization coordinate on the presented
        /// body, fixed at the base point.
        w_sign: f64,
    },
}

/// A properly convex open set, bounded in its presentation chart.
#[derive(Debug, Clone)]
pub struct ConvexDomain {
    kind: DomainKind,
    dim: usize,
    base: DVector<f64>,
    hull_resolution: Option<f64>,
}

/// Domain description as read from experiment configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Ellipsoid { semi_axes: Vec<f64> },
    PBall { p: f64, dim: usize },
    Polytope { vertices: Vec<Vec<f64>> },
    Hull { vertices: Vec<Vec<f64>> },
    PowerCurve { kappa: f64, scale: f64 },
}

const INTERIOR_TOL: f64 = 1e-12;
const BISECT_ITERS: usize = 80;

impl ConvexDomain {
    pub fn unit_ball(n: usize) -> Result<Self, DomainError> {
        Self::ellipsoid(&vec![1.0; n])
    }

    /// Domain from an explicit homogeneous quadric, with a known interior
    /// point: {x : [x;1]ᵀQ[x;1] < 0} after orienting Q negative at the base.
    pub fn from_quadric(q: DMatrix<f64>, base: DVector<f64>) -> Result<Self, DomainError> {
        let n = base.len();
        if q.nrows() != n + 1 || q.ncols() != n + 1 {
            return Err(DomainError::InvalidSpec("quadric size mismatch".into()));
        }
        let sym = (&q + q.transpose()) * 0.5;
        let lifted = lift(&base);
        let val = (lifted.transpose() * &sym * &lifted)[(0, 0)];
        if val.abs() < 1e-300 {
            return Err(DomainError::InvalidSpec(
                "base point lies on the quadric".into(),
            ));
        }
        let oriented = if val < 0.0 { sym } else { -sym };
        let domain = Self {
            kind: DomainKind::Quadric(normalize_quadric(oriented, &base)),
            dim: n,
            base,
            hull_resolution: None,
        };
        domain.validate()?;
        Ok(domain)
    }

    /// Axis-aligned ellipsoid Σ (x_i/s_i)² < 1.
    pub fn ellipsoid(semi_axes: &[f64]) -> Result<Self, DomainError> {
        let n = semi_axes.len();
        if n < 2 {
            return Err(DomainError::InvalidSpec("dimension must be at least 2".into()));
        }
        if semi_axes.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
            return Err(DomainError::InvalidSpec("semi-axes must be positive".into()));
        }
        let mut q = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            q[(i, i)] = 1.0 / (semi_axes[i] * semi_axes[i]);
        }
        q[(n, n)] = -1.0;
        Ok(Self {
            kind: DomainKind::Quadric(q),
            dim: n,
            base: DVector::zeros(n),
            hull_resolution: None,
        })
    }

    pub fn p_ball(p: f64, n: usize) -> Result<Self, DomainError> {
        if p <= 1.0 || !p.is_finite() {
            return Err(DomainError::InvalidSpec(format!("p must exceed 1, got {p}")));
        }
        if n < 2 {
            return Err(DomainError::InvalidSpec("dimension must be at least 2".into()));
        }
        Ok(Self {
            kind: DomainKind::PBall(p),
            dim: n,
            base: DVector::zeros(n),
            hull_resolution: None,
        })
    }

    /// 2D polytope from vertices, all of which must be in convex position.
    pub fn polygon(vertices: &[DVector<f64>]) -> Result<Self, DomainError> {
        let hull = convex_hull_2d(vertices)?;
        if hull.len() != vertices.len() {
            return Err(DomainError::InvalidSpec(
                "polytope vertices must be in convex position".into(),
            ));
        }
        Self::from_hull_vertices(hull, false)
    }

    /// The open square (-1,1)².
    pub fn square() -> Self {
        let vs: Vec<DVector<f64>> = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]
            .iter()
            .map(|v| DVector::from_column_slice(v))
            .collect();
        Self::polygon(&vs).expect("square is convex")
    }

    /// Convex hull of a 2D point cloud, flagged with its angular resolution.
    pub fn hull_2d(points: &[DVector<f64>]) -> Result<Self, DomainError> {
        if points.len() < 4 {
            return Err(DomainError::InvalidSpec(
                "hull needs at least n+2 points".into(),
            ));
        }
        let hull = convex_hull_2d(points)?;
        Self::from_hull_vertices(hull, true)
    }

    fn from_hull_vertices(hull: Vec<DVector<f64>>, flag: bool) -> Result<Self, DomainError> {
        if hull.len() < 3 {
            return Err(DomainError::InvalidSpec("hull is degenerate".into()));
        }
        let k = hull.len();
        let mut centroid = DVector::zeros(2);
        for v in &hull {
            centroid += v;
        }
        centroid /= k as f64;
        let mut faces = Vec::with_capacity(k);
        for i in 0..k {
            let p = &hull[i];
            let q = &hull[(i + 1) % k];
            let d = q - p;
            let len = d.norm();
            if len < 1e-13 {
                continue;
            }
            // Outward normal of a counterclockwise edge.
            let nrm = DVector::from_column_slice(&[d[1] / len, -d[0] / len]);
            faces.push(DVector::from_column_slice(&[
                nrm[0],
                nrm[1],
                -nrm.dot(p),
            ]));
        }
        let resolution = if flag {
            let mut angles: Vec<f64> = hull
                .iter()
                .map(|v| (v[1] - centroid[1]).atan2(v[0] - centroid[0]))
                .collect();
            angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let mut gap: f64 = 0.0;
            for i in 0..angles.len() {
                let next = if i + 1 < angles.len() {
                    angles[i + 1]
                } else {
                    angles[0] + std::f64::consts::TAU
                };
                gap = gap.max(next - angles[i]);
            }
            Some(gap)
        } else {
            None
        };
        Ok(Self {
            kind: DomainKind::Polytope {
                faces,
                vertices: hull,
            },
            dim: 2,
            base: centroid,
            hull_resolution: resolution,
        })
    }

    /// The body {|y| < scale·u^κ(1-u)^(1-κ), 0 < u < 1}, strictly convex for
    /// κ in (0,1). The u-axis chord from (0,0) to (1,0) is an axis of any
    /// diagonal transformation with matching eigenvalue-ratio exponent κ.
    pub fn power_curve(kappa: f64, scale: f64) -> Result<Self, DomainError> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(DomainError::InvalidSpec(format!(
                "power-curve exponent must lie in (0,1), got {kappa}"
            )));
        }
        if scale <= 0.0 || !scale.is_finite() {
            return Err(DomainError::InvalidSpec("scale must be positive".into()));
        }
        Ok(Self {
            kind: DomainKind::PowerCurve { kappa, scale },
            dim: 2,
            base: DVector::from_column_slice(&[0.5, 0.0]),
            hull_resolution: None,
        })
    }

    /// Construct and validate a domain from a config description.
    pub fn make(spec: &DomainSpec) -> Result<Self, DomainError> {
        let domain = match spec {
            DomainSpec::Ellipsoid { semi_axes } => Self::ellipsoid(semi_axes)?,
            DomainSpec::PBall { p, dim } => Self::p_ball(*p, *dim)?,
            DomainSpec::Polytope { vertices } => {
                Self::polygon(&to_vectors(vertices)?)?
            }
            DomainSpec::Hull { vertices } => Self::hull_2d(&to_vectors(vertices)?)?,
            DomainSpec::PowerCurve { kappa, scale } => Self::power_curve(*kappa, *scale)?,
        };
        domain.validate()?;
        Ok(domain)
    }

    /// Type-invariant sweep: interior base point, chords along sample
    /// directions, midpoint convexity.
    pub fn validate(&self) -> Result<(), DomainError> {
        if !self.contains(&self.base) {
            return Err(DomainError::InvalidSpec(
                "stored base point is not interior".into(),
            ));
        }
        let mut rng = crate::rng::seeded(0x5eed);
        for _ in 0..24 {
            let v = crate::rng::unit_vector(&mut rng, self.dim);
            let chord = self.chord(&self.base, &v)?;
            if !(chord.a > 0.0 && chord.b > 0.0) {
                return Err(DomainError::InvalidSpec("degenerate chord".into()));
            }
        }
        for _ in 0..24 {
            let x = self.random_interior(&mut rng);
            let y = self.random_interior(&mut rng);
            let mid = (&x + &y) * 0.5;
            if !self.contains(&mid) {
                return Err(DomainError::InvalidSpec(
                    "midpoint of interior points escaped the body".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base_point(&self) -> &DVector<f64> {
        &self.base
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            DomainKind::Quadric(_) => "ellipsoid",
            DomainKind::PBall(_) => "p_ball",
            DomainKind::Polytope { .. } => {
                if self.hull_resolution.is_some() {
                    "hull"
                } else {
                    "polytope"
                }
            }
            DomainKind::PowerCurve { .. } => "power_curve",
            DomainKind::Mapped { inner, .. } => inner.kind_name(),
        }
    }

    pub fn is_strictly_convex(&self) -> bool {
        match &self.kind {
            DomainKind::Quadric(_) | DomainKind::PBall(_) | DomainKind::PowerCurve { .. } => true,
            DomainKind::Polytope { .. } => false,
            DomainKind::Mapped { inner, .. } => inner.is_strictly_convex(),
        }
    }

    /// Angular resolution of an approximate hull body, when applicable.
    pub fn hull_resolution(&self) -> Option<f64> {
        self.hull_resolution
    }

    pub fn vertices(&self) -> Option<&[DVector<f64>]> {
        match &self.kind {
            DomainKind::Polytope { vertices, .. } => Some(vertices),
            _ => None,
        }
    }

    /// Signed boundary value: negative inside, zero on the boundary.
    pub fn boundary_value(&self, x: &DVector<f64>) -> f64 {
        match &self.kind {
            DomainKind::Quadric(q) => {
                let v = lift(x);
                (v.transpose() * q * &v)[(0, 0)]
            }
            DomainKind::PBall(p) => x.iter().map(|c| c.abs().powf(*p)).sum::<f64>() - 1.0,
            DomainKind::Polytope { faces, .. } => {
                let n = self.dim;
                let mut worst = f64::NEG_INFINITY;
                for f in faces {
                    let mut val = f[n];
                    for i in 0..n {
                        val += f[i] * x[i];
                    }
                    worst = worst.max(val);
                }
                worst
            }
            DomainKind::PowerCurve { kappa, scale } => {
                let u = x[0];
                // Outside the u-range of the body the profile is zero; add
                // the overshoot so the value stays strictly positive there
                // (the axis ray must see a sign change at the apex points).
                let overshoot = (-u).max(u - 1.0).max(0.0);
                x[1].abs() + overshoot - power_profile(u, *kappa, *scale)
            }
            DomainKind::Mapped {
                inner,
                to_inner,
                w_sign,
            } => {
                let z = to_inner * lift(x);
                let nin = z.len() - 1;
                let w = z[nin];
                if w * w_sign <= 1e-14 * z.norm() {
                    return 1.0;
                }
                inner.boundary_value(&z.rows(0, nin).map(|c| c / w))
            }
        }
    }

    /// True iff x is interior, strictly inside the boundary beyond tolerance.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim && self.boundary_value(x) < -INTERIOR_TOL
    }

    /// The two boundary hits of the line {x + λv} through an interior point.
    pub fn chord(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<ChordEndpoints, DomainError> {
        let norm = v.norm();
        if norm < 1e-14 {
            return Err(DomainError::NoConvergence("zero direction".into()));
        }
        let dir = v / norm;
        let (a, b) = self.chord_distances_unit(x, &dir)?;
        Ok(ChordEndpoints {
            xplus: x + a * &dir,
            xminus: x - b * &dir,
            a,
            b,
        })
    }

    /// Distances to the two boundary hits only, without building the endpoint
    /// vectors. `v` need not be normalized.
    pub fn chord_distances(
        &self,
        x: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<(f64, f64), DomainError> {
        let norm = v.norm();
        if norm < 1e-14 {
            return Err(DomainError::NoConvergence("zero direction".into()));
        }
        if (norm - 1.0).abs() < 1e-14 {
            self.chord_distances_unit(x, v)
        } else {
            let dir = v / norm;
            self.chord_distances_unit(x, &dir)
        }
    }

    /// Chord distances for a point known to be interior (constructed on a
    /// chord), skipping the tolerance-based interior test: deep flow shells
    /// sit closer to the boundary than any absolute tolerance.
    pub(crate) fn chord_distances_trusted(
        &self,
        x: &DVector<f64>,
        dir: &DVector<f64>,
    ) -> Result<(f64, f64), DomainError> {
        self.chord_distances_inner(x, dir)
    }

    fn chord_distances_unit(
        &self,
        x: &DVector<f64>,
        dir: &DVector<f64>,
    ) -> Result<(f64, f64), DomainError> {
        if !self.contains(x) {
            return Err(DomainError::NotInterior);
        }
        self.chord_distances_inner(x, dir)
    }

    fn chord_distances_inner(
        &self,
        x: &DVector<f64>,
        dir: &DVector<f64>,
    ) -> Result<(f64, f64), DomainError> {
        // Quadrics solve both hits from one quadratic.
        if let DomainKind::Quadric(q) = &self.kind {
            let n = self.dim;
            let mut alpha = 0.0;
            let mut beta = 0.0;
            let mut gamma = 0.0;
            for i in 0..=n {
                let pi = if i < n { x[i] } else { 1.0 };
                let di = if i < n { dir[i] } else { 0.0 };
                for j in 0..=n {
                    let pj = if j < n { x[j] } else { 1.0 };
                    let dj = if j < n { dir[j] } else { 0.0 };
                    let qij = q[(i, j)];
                    alpha += di * qij * dj;
                    beta += pi * qij * dj + di * qij * pj;
                    gamma += pi * qij * pj;
                }
            }
            if alpha <= 0.0 {
                return Err(DomainError::NoConvergence(
                    "quadric is unbounded along this ray".into(),
                ));
            }
            let disc = beta * beta - 4.0 * alpha * gamma;
            let sq = disc.sqrt();
            let qq = -0.5 * (beta + beta.signum() * sq);
            let (r1, r2) = (qq / alpha, gamma / qq);
            let (hi, lo) = (r1.max(r2), r1.min(r2));
            if hi <= 0.0 || lo >= 0.0 {
                return Err(DomainError::NoConvergence("no chord bracket".into()));
            }
            return Ok((hi, -lo));
        }
        let a = self.ray_hit(x, dir)?;
        let mut back = dir.clone();
        back.neg_mut();
        let b = self.ray_hit(x, &back)?;
        Ok((a, b))
    }

    /// Distance from the interior point x to the boundary along the unit ray.
    fn ray_hit(&self, x: &DVector<f64>, dir: &DVector<f64>) -> Result<f64, DomainError> {
        match &self.kind {
            DomainKind::Quadric(q) => {
                let p = lift(x);
                let mut d = DVector::zeros(self.dim + 1);
                d.rows_mut(0, self.dim).copy_from(dir);
                let alpha = (d.transpose() * q * &d)[(0, 0)];
                let beta = 2.0 * (p.transpose() * q * &d)[(0, 0)];
                let gamma = (p.transpose() * q * &p)[(0, 0)];
                if alpha <= 0.0 {
                    return Err(DomainError::NoConvergence(
                        "quadric is unbounded along this ray".into(),
                    ));
                }
                let disc = beta * beta - 4.0 * alpha * gamma;
                let sq = disc.sqrt();
                // Stable larger-magnitude root first, companion via the product.
                let qq = -0.5 * (beta + beta.signum() * sq);
                let (r1, r2) = (qq / alpha, gamma / qq);
                let hit = r1.max(r2);
                if hit <= 0.0 {
                    return Err(DomainError::NoConvergence("no forward boundary hit".into()));
                }
                Ok(hit)
            }
            DomainKind::Polytope { faces, .. } => {
                let n = self.dim;
                let mut best = f64::INFINITY;
                for f in faces {
                    let mut slope = 0.0;
                    let mut val = f[n];
                    for i in 0..n {
                        slope += f[i] * dir[i];
                        val += f[i] * x[i];
                    }
                    if slope > 1e-14 {
                        best = best.min(-val / slope);
                    }
                }
                if !best.is_finite() || best <= 0.0 {
                    return Err(DomainError::NoConvergence(
                        "polytope is unbounded along this ray".into(),
                    ));
                }
                Ok(best)
            }
            _ => self.ray_hit_bisect(x, dir),
        }
    }

    fn ray_hit_bisect(&self, x: &DVector<f64>, dir: &DVector<f64>) -> Result<f64, DomainError> {
        // Bracket: double the step until the boundary value turns positive.
        // Mapped views stop short of the pullback chart's infinity, which is
        // crossed only beyond the boundary for a bounded presentation.
        let cap = match &self.kind {
            DomainKind::Mapped {
                to_inner, w_sign, ..
            } => {
                let nin = to_inner.nrows() - 1;
                let w0 = to_inner.row(nin).transpose().dot(&lift(x));
                let mut d = DVector::zeros(self.dim + 1);
                d.rows_mut(0, self.dim).copy_from(dir);
                let w1 = to_inner.row(nin).transpose().dot(&d);
                if w1 * w_sign < -1e-300 {
                    Some(0.999 * (-w0 / w1))
                } else {
                    None
                }
            }
            _ => None,
        };
        let mut lo = 0.0;
        let mut step = 0.125 * (1.0 + x.norm());
        let mut hi = None;
        for _ in 0..300 {
            let mut t = lo + step;
            if let Some(c) = cap {
                t = t.min(c);
            }
            if self.boundary_value(&(x + t * dir)) > 0.0 {
                hi = Some(t);
                break;
            }
            lo = t;
            if let Some(c) = cap {
                if t >= c {
                    break;
                }
            }
            step *= 2.0;
        }
        let mut hi = hi.ok_or_else(|| {
            DomainError::NoConvergence("no boundary crossing along ray".into())
        })?;
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.boundary_value(&(x + mid * dir)) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Supporting hyperplane at a boundary point, as a homogeneous covector h
    /// with h·[p;1] = 0, oriented positive on the interior.
    pub fn boundary_tangent(&self, p: &DVector<f64>) -> Result<DVector<f64>, DomainError> {
        let value = self.boundary_value(p);
        match &self.kind {
            DomainKind::Quadric(q) => {
                let lifted = lift(p);
                let grad = q * &lifted;
                self.on_boundary_guard(value, 2.0 * grad.rows(0, self.dim).norm())?;
                Ok(self.orient(grad))
            }
            DomainKind::PBall(pw) => {
                let grad: DVector<f64> =
                    p.map(|c| pw * c.abs().powf(pw - 1.0) * c.signum());
                self.on_boundary_guard(value, grad.norm())?;
                let mut h = DVector::zeros(self.dim + 1);
                h.rows_mut(0, self.dim).copy_from(&(-&grad));
                h[self.dim] = grad.dot(p);
                Ok(self.orient(h))
            }
            DomainKind::Polytope { faces, .. } => {
                let lifted = lift(p);
                let active: Vec<&DVector<f64>> = faces
                    .iter()
                    .filter(|f| f.dot(&lifted).abs() < 1e-9 * (1.0 + p.norm()))
                    .collect();
                match active.len() {
                    0 => Err(DomainError::NotOnBoundary),
                    1 => Ok(self.orient(-active[0])),
                    _ => Err(DomainError::NonSmoothPoint),
                }
            }
            DomainKind::PowerCurve { kappa, scale } => {
                let (u, y) = (p[0], p[1]);
                // The two apex points meet the axis with vertical tangents.
                if (u.abs() < 1e-11 || (u - 1.0).abs() < 1e-11) && y.abs() < 1e-11 {
                    let h = if u.abs() < 1e-11 {
                        DVector::from_column_slice(&[1.0, 0.0, 0.0])
                    } else {
                        DVector::from_column_slice(&[-1.0, 0.0, 1.0])
                    };
                    return Ok(h);
                }
                self.on_boundary_guard(value, 1.0)?;
                let g = power_profile(u, *kappa, *scale);
                let dg = g * (kappa / u - (1.0 - kappa) / (1.0 - u));
                let grad = DVector::from_column_slice(&[-dg, y.signum()]);
                let mut h = DVector::zeros(3);
                h.rows_mut(0, 2).copy_from(&(-&grad));
                h[2] = grad.dot(p);
                Ok(self.orient(h))
            }
            DomainKind::Mapped {
                inner, to_inner, ..
            } => {
                let z = to_inner * lift(p);
                let nin = z.len() - 1;
                let w = z[nin];
                if w.abs() < 1e-13 * z.norm() {
                    return Err(DomainError::NotOnBoundary);
                }
                let h_inner = inner.boundary_tangent(&z.rows(0, nin).map(|c| c / w))?;
                Ok(self.orient(to_inner.transpose() * h_inner))
            }
        }
    }

    fn on_boundary_guard(&self, value: f64, grad_norm: f64) -> Result<(), DomainError> {
        if value.abs() > 1e-8 * grad_norm.max(1e-8) {
            return Err(DomainError::NotOnBoundary);
        }
        Ok(())
    }

    fn orient(&self, h: DVector<f64>) -> DVector<f64> {
        let pairing = h.dot(&lift(&self.base));
        let scaled = &h / h.norm();
        if pairing < 0.0 {
            -scaled
        } else {
            scaled
        }
    }

    /// View the domain in another affine chart of the same projective space.
    pub fn in_chart(&self, chart: &AffineChart) -> Result<ConvexDomain, DomainError> {
        let minv = Homography::new(chart.matrix().clone())
            .map_err(|e| DomainError::InvalidSpec(e.to_string()))?
            .inverse();
        let base = chart
            .project(&ProjectivePoint::from_affine(&self.base))
            .map_err(|_| DomainError::InvalidSpec("base point maps to infinity".into()))?;
        self.pulled_back(minv.matrix().clone(), base)
    }

    /// The image domain g(Ω), presented in the same coordinates.
    pub fn transformed(&self, g: &Homography) -> Result<ConvexDomain, DomainError> {
        let base = g
            .apply(&ProjectivePoint::from_affine(&self.base))
            .and_then(|p| p.to_affine())
            .map_err(|_| DomainError::InvalidSpec("base point maps to infinity".into()))?;
        self.pulled_back(g.inverse().matrix().clone(), base)
    }

    /// 2D slice through `origin` spanned by `u1`, `u2`; section coordinates
    /// (s,t) present the point origin + s·u1 + t·u2. `base2` must be interior.
    pub fn section2d(
        &self,
        origin: &DVector<f64>,
        u1: &DVector<f64>,
        u2: &DVector<f64>,
        base2: DVector<f64>,
    ) -> Result<ConvexDomain, DomainError> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n + 1, 3);
        m.column_mut(0).rows_mut(0, n).copy_from(u1);
        m.column_mut(1).rows_mut(0, n).copy_from(u2);
        m.column_mut(2).rows_mut(0, n).copy_from(origin);
        m[(n, 2)] = 1.0;
        self.pulled_back(m, base2)
    }

    fn pulled_back(
        &self,
        to_native: DMatrix<f64>,
        base: DVector<f64>,
    ) -> Result<ConvexDomain, DomainError> {
        let new_dim = to_native.ncols() - 1;
        let kind = match &self.kind {
            DomainKind::Quadric(q) => DomainKind::Quadric(normalize_quadric(
                to_native.transpose() * q * &to_native,
                &base,
            )),
            DomainKind::Polytope { faces, vertices } => {
                let new_faces = faces
                    .iter()
                    .map(|f| {
                        let pulled = to_native.transpose() * f;
                        let affine_norm = pulled.rows(0, new_dim).norm();
                        if affine_norm > 1e-13 {
                            pulled / affine_norm
                        } else {
                            pulled
                        }
                    })
                    .collect();
                // Vertices survive only under square chart changes.
                let new_vertices = if to_native.is_square() && new_dim == self.dim {
                    let inv = to_native.clone().try_inverse();
                    match inv {
                        Some(inv) => vertices
                            .iter()
                            .filter_map(|v| {
                                let z = &inv * lift(v);
                                let w = z[new_dim];
                                if w.abs() > 1e-13 * z.norm() {
                                    Some(z.rows(0, new_dim).map(|c| c / w))
                                } else {
                                    None
                                }
                            })
                            .collect(),
                        None => Vec::new(),
                    }
                } else {
                    Vec::new()
                };
                DomainKind::Polytope {
                    faces: new_faces,
                    vertices: new_vertices,
                }
            }
            _ => {
                // Collapse nested wrappers so query cost stays flat.
                let (inner, map) = match &self.kind {
                    DomainKind::Mapped {
                        inner, to_inner, ..
                    } => (inner.clone(), to_inner * &to_native),
                    _ => (Box::new(self.clone()), to_native.clone()),
                };
                let z = &map * lift(&base);
                let w_sign = z[z.len() - 1].signum();
                DomainKind::Mapped {
                    inner,
                    to_inner: map,
                    w_sign,
                }
            }
        };
        let out = ConvexDomain {
            kind,
            dim: new_dim,
            base,
            hull_resolution: self.hull_resolution,
        };
        if !out.contains(&out.base) {
            return Err(DomainError::InvalidSpec(
                "pulled-back base point is not interior".into(),
            ));
        }
        Ok(out)
    }

    /// Rejection sample of an interior point.
    pub fn random_interior<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let radius = self.outer_radius();
        for _ in 0..4000 {
            let offset = DVector::from_fn(self.dim, |_, _| rng.random_range(-radius..radius));
            let candidate = &self.base + offset;
            if self.contains(&candidate) {
                return candidate;
            }
        }
        self.base.clone()
    }

    /// Radius of a ball around the base point that contains the body.
    pub fn outer_radius(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.dim {
            let mut v = DVector::zeros(self.dim);
            v[i] = 1.0;
            for sign in [1.0, -1.0] {
                if let Ok(hit) = self.ray_hit(&self.base, &(sign * &v))
                {
                    r = r.max(hit);
                }
            }
        }
        let diag = DVector::from_element(self.dim, 1.0 / (self.dim as f64).sqrt());
        if let Ok(hit) = self.ray_hit(&self.base, &diag) {
            r = r.max(hit);
        }
        (r * (self.dim as f64).sqrt()).max(1e-6)
    }
}

fn lift(x: &DVector<f64>) -> DVector<f64> {
    let mut v = DVector::zeros(x.len() + 1);
    v.rows_mut(0, x.len()).copy_from(x);
    v[x.len()] = 1.0;
    v
}

fn power_profile(u: f64, kappa: f64, scale: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    scale * u.powf(kappa) * (1.0 - u).powf(1.0 - kappa)
}

/// Scale a pulled-back quadric so its value at the base point is -1.
fn normalize_quadric(q: DMatrix<f64>, base: &DVector<f64>) -> DMatrix<f64> {
    let v = lift(base);
    let val = (v.transpose() * &q * &v)[(0, 0)];
    if val < 0.0 {
        q / (-val)
    } else {
        -q / val
    }
}

fn to_vectors(rows: &[Vec<f64>]) -> Result<Vec<DVector<f64>>, DomainError> {
    if rows.is_empty() {
        return Err(DomainError::InvalidSpec("no vertices given".into()));
    }
    let dim = rows[0].len();
    if dim != 2 {
        return Err(DomainError::InvalidSpec(
            "vertex lists are supported in dimension 2".into(),
        ));
    }
    rows.iter()
        .map(|r| {
            if r.len() == dim {
                Ok(DVector::from_column_slice(r))
            } else {
                Err(DomainError::InvalidSpec("ragged vertex list".into()))
            }
        })
        .collect()
}

/// Andrew monotone chain; returns hull vertices in counterclockwise order.
fn convex_hull_2d(points: &[DVector<f64>]) -> Result<Vec<DVector<f64>>, DomainError> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-13 && (a.1 - b.1).abs() < 1e-13);
    if pts.len() < 3 {
        return Err(DomainError::InvalidSpec("hull is degenerate".into()));
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-13
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-13
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(DomainError::InvalidSpec("hull is degenerate".into()));
    }
    Ok(lower
        .into_iter()
        .map(|(x, y)| DVector::from_column_slice(&[x, y]))
        .collect())
}

//! The Hilbert metric and its Finsler infrastructure: distance from the
//! log cross-ratio of chord endpoints, the norm
//! F(x,ξ) = |ξ|/2 · (1/xx⁺ + 1/xx⁻), the reciprocal function
//! m(x,[ξ]) = 2·(1/xx⁺ + 1/xx⁻)⁻¹ with F·m = |ξ|, and the Busemann-Hausdorff
//! volume density used by the volume-entropy estimator.

use nalgebra::DVector;
use thiserror::Error;

use crate::domain::{ConvexDomain, DomainError};
use crate::flow::FlowState;
use crate::numerics::gauss_legendre;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("point is not interior to the domain")]
    NotInterior,
    #[error("volume density supports dimensions 2 and 3, got {0}")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// A convex domain together with the affine chart in which all euclidean
/// quantities (chord distances, norms, densities) are measured. Charted
/// views are produced with [`ConvexDomain::in_chart`], so the context simply
/// owns the presented domain.
#[derive(Debug, Clone)]
pub struct MetricContext {
    domain: ConvexDomain,
}

impl MetricContext {
    pub fn new(domain: ConvexDomain) -> Self {
        Self { domain }
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Hilbert distance d(x,y) = ½|log [a,b,x,y]| with a,b the boundary
    /// points of the line (xy), evaluated from signed parameters along the
    /// chord.
    pub fn hilbert_distance(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64, MetricError> {
        if !self.domain.contains(x) {
            return Err(MetricError::NotInterior);
        }
        let diff = y - x;
        let sep = diff.norm();
        if sep == 0.0 {
            return Ok(0.0);
        }
        if !self.domain.contains(y) {
            return Err(MetricError::NotInterior);
        }
        let (a, b) = self.domain.chord_distances(x, &diff)?;
        // Along the chord: x at 0, y at sep, x⁺ at a, x⁻ at -b.
        let ratio = (a * (b + sep)) / (b * (a - sep));
        Ok(0.5 * ratio.ln().abs())
    }

    /// Finsler norm F(x,ξ).
    pub fn finsler_norm(&self, x: &DVector<f64>, xi: &DVector<f64>) -> Result<f64, MetricError> {
        if !self.domain.contains(x) {
            return Err(MetricError::NotInterior);
        }
        let speed = xi.norm();
        if speed == 0.0 {
            return Ok(0.0);
        }
        let (a, b) = self.domain.chord_distances(x, xi)?;
        Ok(speed * 0.5 * (1.0 / a + 1.0 / b))
    }

    /// m(x,[ξ]) = 2(1/xx⁺ + 1/xx⁻)⁻¹ = 2·xx⁺·xx⁻/x⁺x⁻, the conformal factor
    /// between the flow generator and the euclidean one.
    pub fn m_value(&self, w: &FlowState) -> Result<f64, MetricError> {
        let (a, b) = self.domain.chord_distances(w.point(), w.direction())?;
        Ok(2.0 * a * b / (a + b))
    }

    /// Busemann-Hausdorff density at x: ω_n over the euclidean volume of the
    /// unit Finsler ball {ξ : F(x,ξ) ≤ 1}, by polar quadrature. The polar
    /// radius in direction θ is exactly m(x,[θ]).
    pub fn volume_density(&self, x: &DVector<f64>) -> Result<f64, MetricError> {
        self.volume_density_with_nodes(x, 0)
    }

    /// Same, with an explicit angular node count (0 picks the default grid:
    /// 4096 angles in 2D, a 64×128 product grid in 3D).
    pub fn volume_density_with_nodes(
        &self,
        x: &DVector<f64>,
        nodes: usize,
    ) -> Result<f64, MetricError> {
        // Strict sign test rather than the tolerance-based one: the density
        // is well defined (and needed) arbitrarily close to the boundary.
        if self.domain.boundary_value(x) >= 0.0 {
            return Err(MetricError::NotInterior);
        }
        match self.dim() {
            2 => {
                let n = if nodes == 0 { 4096 } else { nodes };
                // Unit-ball area = ½ ∮ r(θ)² dθ; trapezoid rule on the
                // periodic smooth integrand.
                let mut acc = 0.0;
                let mut dir = DVector::zeros(2);
                for k in 0..n {
                    let th = k as f64 / n as f64 * std::f64::consts::TAU;
                    dir[0] = th.cos();
                    dir[1] = th.sin();
                    let (a, b) = self.domain.chord_distances_trusted(x, &dir)?;
                    let r = 2.0 * a * b / (a + b);
                    acc += r * r;
                }
                let area = 0.5 * acc * std::f64::consts::TAU / n as f64;
                Ok(std::f64::consts::PI / area)
            }
            3 => {
                let n_polar = if nodes == 0 { 64 } else { nodes };
                let n_azimuth = 2 * n_polar;
                let (cos_nodes, weights) = gauss_legendre(n_polar);
                // Unit-ball volume = ⅓ ∮ r(ω)³ dω over the sphere.
                let mut acc = 0.0;
                let mut dir = DVector::zeros(3);
                for (i, &c) in cos_nodes.iter().enumerate() {
                    let s = (1.0 - c * c).sqrt();
                    let mut ring = 0.0;
                    for k in 0..n_azimuth {
                        let ph = k as f64 / n_azimuth as f64 * std::f64::consts::TAU;
                        dir[0] = s * ph.cos();
                        dir[1] = s * ph.sin();
                        dir[2] = c;
                        let (a, b) = self.domain.chord_distances_trusted(x, &dir)?;
                        let r = 2.0 * a * b / (a + b);
                        ring += r * r * r;
                    }
                    acc += weights[i] * ring * std::f64::consts::TAU / n_azimuth as f64;
                }
                let volume = acc / 3.0;
                Ok(4.0 * std::f64::consts::PI / 3.0 / volume)
            }
            d => Err(MetricError::UnsupportedDimension(d)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowState;
    use nalgebra::dvector;

    fn disk() -> MetricContext {
        MetricContext::new(ConvexDomain::unit_ball(2).unwrap())
    }

    #[test]
    fn klein_distance_hand_value() {
        // d((0,0),(0.5,0)) = ½ log 3 in the Klein disk.
        let d = disk()
            .hilbert_distance(&dvector![0.0, 0.0], &dvector![0.5, 0.0])
            .unwrap();
        assert!((d - 0.5 * 3.0f64.ln()).abs() < 1e-12);
        assert!((d - 0.549306144334).abs() < 1e-10);
    }

    #[test]
    fn distance_coincident_points_is_zero() {
        let x = dvector![0.3, -0.2];
        assert_eq!(disk().hilbert_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn distance_additive_along_square_chord() {
        let ctx = MetricContext::new(ConvexDomain::square());
        let x = dvector![-0.5, -0.25];
        let z = dvector![0.6, 0.3];
        let y = &x + 0.37 * (&z - &x);
        let dxz = ctx.hilbert_distance(&x, &z).unwrap();
        let dxy = ctx.hilbert_distance(&x, &y).unwrap();
        let dyz = ctx.hilbert_distance(&y, &z).unwrap();
        assert!((dxz - dxy - dyz).abs() < 1e-10);
    }

    #[test]
    fn distance_symmetry_and_triangle() {
        let ctx = MetricContext::new(ConvexDomain::p_ball(4.0, 2).unwrap());
        let mut rng = crate::rng::seeded(11);
        for _ in 0..200 {
            let x = ctx.domain().random_interior(&mut rng);
            let y = ctx.domain().random_interior(&mut rng);
            let z = ctx.domain().random_interior(&mut rng);
            let dxy = ctx.hilbert_distance(&x, &y).unwrap();
            let dyx = ctx.hilbert_distance(&y, &x).unwrap();
            assert!((dxy - dyx).abs() < 1e-10);
            let dxz = ctx.hilbert_distance(&x, &z).unwrap();
            let dyz = ctx.hilbert_distance(&y, &z).unwrap();
            assert!(dxz <= dxy + dyz + 1e-10);
        }
    }

    #[test]
    fn disk_isometries_preserve_the_distance() {
        // Homographies preserving Ω act as isometries: symmetric-square
        // images of SL₂ preserve the unit disk.
        let ctx = disk();
        let g = crate::group::so21_embed(1.25, 0.3, 0.5, 0.92).unwrap();
        let mut rng = crate::rng::seeded(13);
        for _ in 0..100 {
            let x = ctx.domain().random_interior(&mut rng);
            let y = ctx.domain().random_interior(&mut rng);
            let gx = g.apply_affine(&x).unwrap();
            let gy = g.apply_affine(&y).unwrap();
            let before = ctx.hilbert_distance(&x, &y).unwrap();
            let after = ctx.hilbert_distance(&gx, &gy).unwrap();
            assert!((before - after).abs() < 1e-9);
        }
    }

    #[test]
    fn finsler_norm_values() {
        let ctx = disk();
        let f = ctx
            .finsler_norm(&dvector![0.0, 0.0], &dvector![0.6, 0.8])
            .unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        assert_eq!(
            ctx.finsler_norm(&dvector![0.2, 0.1], &dvector![0.0, 0.0])
                .unwrap(),
            0.0
        );
        let f = ctx
            .finsler_norm(&dvector![0.5, 0.0], &dvector![1.0, 0.0])
            .unwrap();
        assert!((f - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn finsler_norm_homogeneous_and_convex() {
        let ctx = MetricContext::new(ConvexDomain::p_ball(4.0, 2).unwrap());
        let x = dvector![0.3, -0.2];
        let xi = dvector![0.4, 0.7];
        let f1 = ctx.finsler_norm(&x, &xi).unwrap();
        let f2 = ctx.finsler_norm(&x, &(2.5 * &xi)).unwrap();
        assert!((f2 - 2.5 * f1).abs() < 1e-12);
        // Convexity on a sampled section: F(u+v) <= F(u) + F(v).
        let mut rng = crate::rng::seeded(3);
        for _ in 0..100 {
            let u = crate::rng::unit_vector(&mut rng, 2);
            let v = crate::rng::unit_vector(&mut rng, 2);
            let fu = ctx.finsler_norm(&x, &u).unwrap();
            let fv = ctx.finsler_norm(&x, &v).unwrap();
            let fuv = ctx.finsler_norm(&x, &(&u + &v)).unwrap();
            assert!(fuv <= fu + fv + 1e-12);
        }
    }

    #[test]
    fn m_value_examples_and_reciprocal_identity() {
        let ctx = disk();
        // Midpoint of a unit-length chord: xx⁺ = xx⁻ = m = ½.
        let pc = MetricContext::new(ConvexDomain::power_curve(0.5, 0.4).unwrap());
        let w = FlowState::new(dvector![0.5, 0.0], dvector![1.0, 0.0]).unwrap();
        assert!((pc.m_value(&w).unwrap() - 0.5).abs() < 1e-10);
        // a=0.5, b=1.5 gives m = 0.75.
        let w = FlowState::new(dvector![0.5, 0.0], dvector![1.0, 0.0]).unwrap();
        assert!((ctx.m_value(&w).unwrap() - 0.75).abs() < 1e-12);
        // F(x,ξ)·m(x,[ξ]) = |ξ| on random states.
        let ctx4 = MetricContext::new(ConvexDomain::p_ball(4.0, 2).unwrap());
        let mut rng = crate::rng::seeded(5);
        for _ in 0..200 {
            let x = ctx4.domain().random_interior(&mut rng);
            let xi = 3.0 * crate::rng::unit_vector(&mut rng, 2);
            let w = FlowState::new(x.clone(), xi.clone()).unwrap();
            let f = ctx4.finsler_norm(&x, &xi).unwrap();
            let m = ctx4.m_value(&w).unwrap();
            assert!((f * m - xi.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn volume_density_disk() {
        let ctx = disk();
        let center = ctx.volume_density(&dvector![0.0, 0.0]).unwrap();
        assert!((center - 1.0).abs() < 1e-9, "unit Finsler ball at the center");
        let near = ctx.volume_density(&dvector![0.9, 0.0]).unwrap();
        assert!(near > 1.0);
        // Klein-model closed form (1-r²)^{-3/2}.
        let expect = (1.0f64 - 0.81).powf(-1.5);
        assert!((near - expect).abs() / expect < 1e-6);
    }

    #[test]
    fn volume_density_square_matches_quadrature_oracle() {
        let ctx = MetricContext::new(ConvexDomain::square());
        let got = ctx.volume_density(&dvector![0.0, 0.0]).unwrap();
        // Independent oracle: Riemann sum of ½∮r(θ)²dθ for the square's
        // Finsler ball at the center, with its own chord arithmetic.
        let n = 200_000;
        let mut acc = 0.0;
        for k in 0..n {
            let th = (k as f64 + 0.5) / n as f64 * std::f64::consts::TAU;
            let (c, s) = (th.cos(), th.sin());
            // Distance from the center of (-1,1)² to the boundary along ±θ
            // is 1/max(|cos|,|sin|) both ways.
            let t = 1.0 / c.abs().max(s.abs());
            let r = 2.0 * t * t / (t + t);
            acc += r * r;
        }
        let area = 0.5 * acc * std::f64::consts::TAU / n as f64;
        let oracle = std::f64::consts::PI / area;
        assert!((got - oracle).abs() / oracle < 1e-6);
    }

    #[test]
    fn volume_density_quadrature_converged() {
        let ctx = MetricContext::new(ConvexDomain::p_ball(4.0, 2).unwrap());
        let x = dvector![0.4, 0.2];
        let coarse = ctx.volume_density_with_nodes(&x, 2048).unwrap();
        let fine = ctx.volume_density_with_nodes(&x, 8192).unwrap();
        assert!((coarse - fine).abs() / fine < 1e-6);
    }

    #[test]
    fn volume_density_ball_3d() {
        let ctx = MetricContext::new(ConvexDomain::unit_ball(3).unwrap());
        let center = ctx.volume_density(&dvector![0.0, 0.0, 0.0]).unwrap();
        assert!((center - 1.0).abs() < 1e-9);
        // Hyperbolic volume density in the 3D Klein model: (1-r²)^{-2}.
        let x = dvector![0.5, 0.0, 0.0];
        let got = ctx.volume_density(&x).unwrap();
        let expect = (1.0f64 - 0.25).powi(-2);
        assert!((got - expect).abs() / expect < 1e-8);
        assert!(matches!(
            MetricContext::new(ConvexDomain::unit_ball(4).unwrap())
                .volume_density(&DVector::zeros(4)),
            Err(MetricError::UnsupportedDimension(4))
        ));
    }
}

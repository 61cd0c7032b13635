//! Entropy estimators: volume entropy from the exponential growth of
//! metric-ball volumes (Monte Carlo over stratified Hilbert-radial shells),
//! orbit-counting entropy from the length spectrum of enumerated conjugacy
//! classes, and the Ruelle-style bound (n−1) + mean(η).

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use nalgebra::DVector;

use crate::domain::DomainError;
use crate::flow;
use crate::group::{self, GroupElement, GroupError, Presentation};
use crate::metric::{MetricContext, MetricError};
use crate::numerics::line_fit;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("volume entropy supports dimensions 2 and 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Monte-Carlo relative error {0:.3} exceeds 10% on a ball volume")]
    MonteCarloVariance(f64),
    #[error("length spectrum too small: {0} classes (need 50)")]
    SpectrumTooSmall(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMethod {
    VolumeGrowth,
    OrbitCounting,
    RuelleBound,
}

/// An entropy estimate together with the table it was fitted from:
/// (r, log vol) pairs for volume growth, (T, count) pairs for orbit counting.
#[derive(Debug, Clone)]
pub struct EntropyEstimate {
    pub value: f64,
    pub method: EntropyMethod,
    pub grid: Vec<(f64, f64)>,
    pub fit_stderr: f64,
    /// Counting/measurement conventions recorded with the result.
    pub convention: String,
}

/// Orbit-counting fit windows, as quantile pairs of the length spectrum:
/// below the lower cuts the counting asymptotics have not set in, above the
/// upper cuts the word-length truncation empties the counts. The estimate
/// averages over the ensemble and its spread enters the reported stderr, so
/// one window edge crossing a multiplicity step cannot swing the result.
const ORBIT_WINDOWS: [(f64, f64); 6] = [
    (0.25, 0.85),
    (0.25, 0.90),
    (0.30, 0.85),
    (0.30, 0.90),
    (0.35, 0.85),
    (0.35, 0.90),
];

/// Radial strata per unit of the radius grid step.
const STRATA_PER_RADIUS: usize = 8;
/// Radii in the growth table.
const RADIUS_GRID: usize = 12;
/// Shell integrands converge exponentially along each ray: past this Hilbert
/// radius they equal their limit to ~1e-11, while the sample point itself
/// stops being representable in chart coordinates (offsets below one ulp of
/// the boundary position). Deep shells are therefore evaluated at this
/// converged representative time.
const SHELL_EVAL_CAP: f64 = 12.0;

/// Volume entropy: slope of log vol B(x0, r) against r on the upper half of
/// the radius grid. Ball volumes integrate the Busemann-Hausdorff density
/// over the Hilbert ball by stratified sampling of Hilbert-radial shells:
/// within a shell, a sample picks a direction and a radius inside the shell's
/// image (rejection against the shell in the chart), and the exact chord flow
/// supplies the radial Jacobian dρ/dt = m(w_t).
pub fn volume_entropy(
    ctx: &MetricContext,
    x0: &DVector<f64>,
    r_max: f64,
    samples: usize,
) -> Result<EntropyEstimate, EntropyError> {
    let n = ctx.dim();
    if n != 2 && n != 3 {
        return Err(EntropyError::UnsupportedDimension(n));
    }
    if r_max < 4.0 {
        return Err(EntropyError::InvalidParameter(format!(
            "r_max must be at least 4, got {r_max}"
        )));
    }
    if !ctx.domain().contains(x0) {
        return Err(EntropyError::Metric(MetricError::NotInterior));
    }
    let strata = RADIUS_GRID * STRATA_PER_RADIUS;
    let per_stratum = (samples / strata).max(8);
    let dt = r_max / strata as f64;
    let sampler = AngularSampler::new(ctx, x0, r_max);
    // One pass over the largest ball; nested balls share the strata below
    // their radius.
    let totals: Vec<Result<(f64, f64), EntropyError>> = (0..strata)
        .into_par_iter()
        .map(|k| {
            let mut rng = crate::rng::substream(0x7105, k as u64);
            let t_lo = k as f64 * dt;
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..per_stratum {
                let (dir, angular_density) = sampler.sample(&mut rng);
                let t: f64 = rng.random_range(t_lo..t_lo + dt);
                let (ca, cb) = ctx.domain().chord_distances(x0, &dir)?;
                let (rho, a_t, b_t) = flow::chord_flow(ca, cb, t.min(SHELL_EVAL_CAP));
                let jac = 2.0 * a_t * b_t / (ca + cb);
                let x = x0 + rho * &dir;
                // Membership holds by construction (t ≤ r_max); deep shells
                // sit closer to the boundary than any absolute interior
                // tolerance, so only degenerate evaluations are rejected.
                let density = match ctx.volume_density(&x) {
                    Ok(d) if d.is_finite() => d,
                    _ => continue,
                };
                let w = density * rho.powi(n as i32 - 1) * jac / angular_density;
                sum += w;
                sumsq += w * w;
            }
            let mean = sum / per_stratum as f64;
            let var = (sumsq / per_stratum as f64 - mean * mean).max(0.0) / per_stratum as f64;
            Ok((mean * dt, var * dt * dt))
        })
        .collect();
    let mut shell = Vec::with_capacity(strata);
    for t in totals {
        shell.push(t?);
    }
    // Spot-check the radial parameterization against the metric itself.
    {
        let mut rng = crate::rng::substream(0x7105, strata as u64);
        for _ in 0..8 {
            let dir = crate::rng::unit_vector(&mut rng, n);
            let t: f64 = rng.random_range(0.2..r_max.min(12.0));
            let (ca, cb) = ctx.domain().chord_distances(x0, &dir)?;
            let (rho, _, _) = flow::chord_flow(ca, cb, t);
            let d = ctx.hilbert_distance(x0, &(x0 + rho * &dir))?;
            if (d - t).abs() > 1e-6 {
                return Err(EntropyError::InvalidParameter(format!(
                    "radial shells disagree with hilbert_distance by {:.2e}",
                    (d - t).abs()
                )));
            }
        }
    }
    let mut grid = Vec::with_capacity(RADIUS_GRID);
    let mut cumulative = 0.0;
    let mut cum_var = 0.0;
    for j in 0..RADIUS_GRID {
        for k in 0..STRATA_PER_RADIUS {
            let (v, var) = shell[j * STRATA_PER_RADIUS + k];
            cumulative += v;
            cum_var += var;
        }
        let r = r_max * (j + 1) as f64 / RADIUS_GRID as f64;
        let rel = cum_var.sqrt() / cumulative.max(1e-300);
        if rel > 0.10 {
            return Err(EntropyError::MonteCarloVariance(rel));
        }
        grid.push((r, cumulative.ln()));
    }
    let upper: Vec<(f64, f64)> = grid
        .iter()
        .copied()
        .filter(|(r, _)| *r >= 0.5 * r_max)
        .collect();
    let xs: Vec<f64> = upper.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = upper.iter().map(|p| p.1).collect();
    let fit = line_fit(&xs, &ys);
    Ok(EntropyEstimate {
        value: fit.slope,
        method: EntropyMethod::VolumeGrowth,
        grid,
        fit_stderr: fit.slope_stderr,
        convention: format!(
            "busemann-hausdorff density; stratified radial sampling, {} samples over {} shells",
            per_stratum * strata,
            strata
        ),
    })
}

/// Length spectrum of the biproximal conjugacy classes, sorted. Oriented
/// classes enter as-is (γ and γ⁻¹ both count); powers of shorter classes are
/// kept, matching the enumeration.
pub fn length_spectrum(
    generators: &[GroupElement],
    presentation: &Presentation,
    max_len: usize,
) -> Result<Vec<f64>, EntropyError> {
    let classes = group::enumerate_conjugacy_classes(generators, presentation, max_len)?;
    let mut lengths = Vec::new();
    for g in &classes {
        // eigen_data verifies the extreme eigenvectors; elements that fake a
        // modulus gap at the root-solver noise floor are dropped here.
        if group::is_biproximal(g) && group::eigen_data(g).is_ok() {
            lengths.push(group::translation_length(g)?);
        }
    }
    lengths.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(lengths)
}

/// Orbit-counting entropy from the Margulis asymptotic P_T ~ e^{hT}/(hT):
/// the regression reads h as the slope of log P_T + log T against T over the
/// quantile window of the length spectrum. At desk-scale T the subexponential
/// 1/(hT) factor costs ~1/T of apparent slope, so fitting the plain logarithm
/// would bias h down by ~0.3 here. Orbits are oriented: γ and γ⁻¹ are
/// counted as distinct classes.
pub fn orbit_entropy(
    generators: &[GroupElement],
    presentation: &Presentation,
    max_len: usize,
) -> Result<EntropyEstimate, EntropyError> {
    let lengths = length_spectrum(generators, presentation, max_len)?;
    if lengths.len() < 50 {
        return Err(EntropyError::SpectrumTooSmall(lengths.len()));
    }
    let grid: Vec<(f64, f64)> = lengths
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, (i + 1) as f64))
        .collect();
    let mut slopes = Vec::new();
    let mut stderrs = Vec::new();
    for &(qa, qb) in &ORBIT_WINDOWS {
        let t_lo = quantile(&lengths, qa);
        let t_hi = quantile(&lengths, qb);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &(t, c) in &grid {
            if t >= t_lo && t <= t_hi {
                xs.push(t);
                ys.push(c.ln() + t.ln());
            }
        }
        if xs.len() < 10 {
            continue;
        }
        let fit = line_fit(&xs, &ys);
        slopes.push(fit.slope);
        stderrs.push(fit.slope_stderr);
    }
    if slopes.len() < 3 {
        return Err(EntropyError::SpectrumTooSmall(lengths.len()));
    }
    let k = slopes.len() as f64;
    let value = slopes.iter().sum::<f64>() / k;
    let mean_se = stderrs.iter().sum::<f64>() / k;
    let spread = (slopes.iter().map(|h| (h - value) * (h - value)).sum::<f64>() / k).sqrt();
    Ok(EntropyEstimate {
        value,
        method: EntropyMethod::OrbitCounting,
        grid,
        fit_stderr: (mean_se * mean_se + spread * spread).sqrt(),
        convention: format!(
            "oriented closed orbits (γ and γ⁻¹ distinct), powers kept; \
             Margulis-form fit of log P_T + log T averaged over {} quantile windows",
            slopes.len()
        ),
    })
}

/// Paired comparison of two orbit-entropy estimates over the same window
/// ensemble. The two fits share the estimator, the enumeration depth and the
/// stair structure of cumulative counts, so their errors are strongly
/// positively correlated; the uncertainty of the difference is taken from
/// the spread of the per-window gaps (not divided by the window count — the
/// windows overlap), which is far tighter than quadrature over the two
/// absolute stderrs.
#[derive(Debug, Clone)]
pub struct GapEstimate {
    pub gap: f64,
    pub stderr: f64,
    pub per_window: Vec<f64>,
}

pub fn orbit_entropy_gap(
    generators_a: &[GroupElement],
    presentation_a: &Presentation,
    generators_b: &[GroupElement],
    presentation_b: &Presentation,
    max_len: usize,
) -> Result<GapEstimate, EntropyError> {
    let spec_a = length_spectrum(generators_a, presentation_a, max_len)?;
    let spec_b = length_spectrum(generators_b, presentation_b, max_len)?;
    if spec_a.len() < 50 || spec_b.len() < 50 {
        return Err(EntropyError::SpectrumTooSmall(spec_a.len().min(spec_b.len())));
    }
    let mut gaps = Vec::new();
    for &(qa, qb) in &ORBIT_WINDOWS {
        let fit = |spec: &[f64]| -> Option<f64> {
            let t_lo = quantile(spec, qa);
            let t_hi = quantile(spec, qb);
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (i, &t) in spec.iter().enumerate() {
                if t >= t_lo && t <= t_hi {
                    xs.push(t);
                    ys.push(((i + 1) as f64).ln() + t.ln());
                }
            }
            if xs.len() < 10 {
                return None;
            }
            Some(line_fit(&xs, &ys).slope)
        };
        if let (Some(ha), Some(hb)) = (fit(&spec_a), fit(&spec_b)) {
            gaps.push(ha - hb);
        }
    }
    if gaps.len() < 3 {
        return Err(EntropyError::SpectrumTooSmall(gaps.len()));
    }
    let k = gaps.len() as f64;
    let gap = gaps.iter().sum::<f64>() / k;
    let spread = (gaps.iter().map(|g| (g - gap) * (g - gap)).sum::<f64>() / k).sqrt();
    Ok(GapEstimate {
        gap,
        stderr: spread.max(1e-6),
        per_window: gaps,
    })
}

/// Interpolating empirical quantile.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = (sorted.len() - 1) as f64 * q;
    let lo = idx.floor() as usize;
    let frac = idx - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    } else {
        sorted[lo]
    }
}

/// Direction proposal for the ball-volume integral. Smooth bodies use the
/// uniform sphere measure; polytopes mix in log-uniform components around
/// the corner directions, where the density blows up and plain uniform
/// sampling has unbounded relative variance.
struct AngularSampler {
    dim: usize,
    corners: Vec<f64>,
    delta_min: f64,
    log_range: f64,
}

impl AngularSampler {
    fn new(ctx: &MetricContext, x0: &DVector<f64>, r_max: f64) -> Self {
        let dim = ctx.dim();
        let corners: Vec<f64> = if dim == 2 {
            ctx.domain()
                .vertices()
                .map(|vs| {
                    vs.iter()
                        .map(|v| (v[1] - x0[1]).atan2(v[0] - x0[0]))
                        .collect()
                })
                .unwrap_or_default()
        } else {
            Vec::new()
        };
        let delta_min = (0.01 * (-2.0 * r_max).exp()).max(1e-280);
        let log_range = (std::f64::consts::PI / delta_min).ln();
        Self {
            dim,
            corners,
            delta_min,
            log_range,
        }
    }

    /// Returns a unit direction and the proposal density per unit sphere
    /// measure at that direction.
    fn sample<R: Rng>(&self, rng: &mut R) -> (DVector<f64>, f64) {
        if self.dim != 2 || self.corners.is_empty() {
            let uniform = if self.dim == 2 {
                1.0 / std::f64::consts::TAU
            } else {
                0.25 / std::f64::consts::PI
            };
            return (crate::rng::unit_vector(rng, self.dim), uniform);
        }
        let theta = if rng.random_range(0.0..1.0) < 0.5 {
            rng.random_range(0.0..std::f64::consts::TAU)
        } else {
            let corner = self.corners[rng.random_range(0..self.corners.len())];
            let delta = self.delta_min * (rng.random_range(0.0..1.0) * self.log_range).exp();
            let side = if rng.random_range(0.0..1.0) < 0.5 { 1.0 } else { -1.0 };
            corner + side * delta
        };
        (
            DVector::from_column_slice(&[theta.cos(), theta.sin()]),
            self.density(theta),
        )
    }

    fn density(&self, theta: f64) -> f64 {
        let mut q = 0.5 / std::f64::consts::TAU;
        for &c in &self.corners {
            let mut delta = (theta - c).rem_euclid(std::f64::consts::TAU);
            if delta > std::f64::consts::PI {
                delta = std::f64::consts::TAU - delta;
            }
            if delta >= self.delta_min && delta <= std::f64::consts::PI {
                q += 0.5 / self.corners.len() as f64 * 0.5 / (delta * self.log_range);
            }
        }
        q
    }
}

/// Ruelle-style bound (n−1) + mean(η) on the entropy.
pub fn ruelle_bound(n: usize, eta_samples: &[f64]) -> f64 {
    let mean = if eta_samples.is_empty() {
        0.0
    } else {
        eta_samples.iter().sum::<f64>() / eta_samples.len() as f64
    };
    (n as f64 - 1.0) + mean
}

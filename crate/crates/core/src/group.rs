//! Projective group elements and the group-side of the dynamics: eigenvalue
//! moduli, proximality, translation lengths l_γ = ½ log(λ₀/λ_{n}), the closed
//! form η_i(γ) = −1 + 2(log λ₀ − log λ_i)/(log λ₀ − log λ_{p+1}) for periodic
//! orbits, word enumeration up to cyclic conjugacy, and construction of the
//! example families (symmetric-square embeddings of SL₂ and deformed triangle
//! reflection groups).

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::domain::{ConvexDomain, DomainError};
use crate::flow::FlowState;
use crate::projective::ProjectivePoint;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("matrix determinant must be ±1 after normalization")]
    InvalidDeterminant,
    #[error("element is not biproximal")]
    NotBiproximal,
    #[error("extreme eigenvalue moduli are separated by less than 1e-8")]
    NearDefective,
    #[error("(p,q,r) is not a hyperbolic triangle type")]
    NotHyperbolicType,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("enumeration would exceed the combinatorial guard")]
    ExplosionGuard,
    #[error("orbit hull is not properly convex: {0}")]
    NotProperlyConvex(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Unit-|determinant| matrix acting projectively, with the generator word
/// that produced it when it came from an enumeration.
#[derive(Debug, Clone)]
pub struct GroupElement {
    matrix: DMatrix<f64>,
    pub word: Option<Vec<i32>>,
}

impl GroupElement {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, GroupError> {
        assert!(matrix.is_square());
        let n = matrix.nrows();
        let mut m = matrix;
        // One refinement pass keeps |det| at 1 even for long products with
        // large entries.
        for _ in 0..2 {
            let det = m.clone().lu().determinant();
            if !det.is_finite() || det.abs() < 1e-300 {
                return Err(GroupError::InvalidDeterminant);
            }
            m /= det.abs().powf(1.0 / n as f64);
        }
        let check = m.clone().lu().determinant();
        if (check.abs() - 1.0).abs() > 1e-6 {
            return Err(GroupError::InvalidDeterminant);
        }
        Ok(Self {
            matrix: m,
            word: None,
        })
    }

    pub fn identity(size: usize) -> Self {
        Self {
            matrix: DMatrix::identity(size, size),
            word: Some(Vec::new()),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &self.matrix * &other.matrix,
            word: match (&self.word, &other.word) {
                (Some(a), Some(b)) => {
                    let mut w = a.clone();
                    w.extend_from_slice(b);
                    Some(w)
                }
                _ => None,
            },
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            matrix: self
                .matrix
                .clone()
                .try_inverse()
                .expect("group element invertible"),
            word: self
                .word
                .as_ref()
                .map(|w| w.iter().rev().map(|&l| -l).collect()),
        }
    }

    /// Projective action on affine coordinates of the standard chart.
    pub fn apply_affine(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let n = x.len();
        let mut lifted = DVector::zeros(n + 1);
        lifted.rows_mut(0, n).copy_from(x);
        lifted[n] = 1.0;
        let image = &self.matrix * lifted;
        let w = image[n];
        if w.abs() < 1e-13 * image.norm() {
            return None;
        }
        Some(image.rows(0, n).map(|c| c / w))
    }
}

/// Eigenvalue moduli sorted descending, plus the attracting and repelling
/// fixed points when the extreme eigenvalues are simple and real.
#[derive(Debug, Clone)]
pub struct EigenData {
    pub moduli: Vec<f64>,
    pub top_vector: ProjectivePoint,
    pub bottom_vector: ProjectivePoint,
}

/// Eigenvalue moduli only, sorted descending; never fails on equal moduli.
pub fn eigen_moduli(g: &GroupElement) -> Vec<f64> {
    let m = &g.matrix;
    let mut moduli: Vec<f64> = if m.nrows() == 3 {
        cubic_eigen_moduli(m)
    } else {
        m.complex_eigenvalues().iter().map(|z| z.norm()).collect()
    };
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
    moduli
}

/// 3×3 eigenvalue moduli from the characteristic polynomial, Newton-polished.
fn cubic_eigen_moduli(m: &DMatrix<f64>) -> Vec<f64> {
    let tr = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)];
    let det = m.clone().lu().determinant();
    // Monic cubic λ³ + a2λ² + a1λ + a0.
    let (a2, a1, a0) = (-tr, minors, -det);
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2.powi(3) / 27.0 - a2 * a1 / 3.0 + a0;
    let poly = |x: f64| ((x + a2) * x + a1) * x + a0;
    let dpoly = |x: f64| (3.0 * x + 2.0 * a2) * x + a1;
    let polish = |mut x: f64| {
        for _ in 0..3 {
            let d = dpoly(x);
            if d.abs() > 1e-300 {
                x -= poly(x) / d;
            }
        }
        x
    };
    let disc = -4.0 * p.powi(3) - 27.0 * q * q;
    if disc > 0.0 {
        // Three distinct real roots.
        let amp = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos();
        (0..3)
            .map(|k| {
                let y = amp * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
                polish(y - a2 / 3.0).abs()
            })
            .collect()
    } else {
        // One real root, one complex-conjugate pair.
        let half_q = -q / 2.0;
        let rad = (q * q / 4.0 + p.powi(3) / 27.0).max(0.0).sqrt();
        let u = (half_q + rad).cbrt();
        let v = if u.abs() > 1e-300 { -p / (3.0 * u) } else { 0.0 };
        let real = polish(u + v - a2 / 3.0);
        // Remaining quadratic factor λ² + Bλ + C has C = product of the pair.
        let b_coef = a2 + real;
        let c_coef = a1 + real * b_coef;
        let pair = c_coef.abs().sqrt();
        vec![real.abs(), pair, pair]
    }
}

/// Full eigen data; errors when an extreme modulus gap is below 1e-8.
pub fn eigen_data(g: &GroupElement) -> Result<EigenData, GroupError> {
    let moduli = eigen_moduli(g);
    let n = moduli.len();
    if moduli[0] - moduli[1] < 1e-8 * moduli[0]
        || moduli[n - 2] - moduli[n - 1] < 1e-8 * moduli[n - 2]
    {
        return Err(GroupError::NearDefective);
    }
    // Extreme moduli are simple, so the matching eigenvalues are real: λ and
    // -λ are distinguished by the sign of the characteristic polynomial.
    let top_val = pick_real_eigenvalue(&g.matrix, moduli[0]);
    let bottom_val = pick_real_eigenvalue(&g.matrix, moduli[n - 1]);
    let top_vector = null_vector(&g.matrix, top_val)?;
    let bottom_vector = null_vector(&g.matrix, bottom_val)?;
    // Near-defective spectra can fake a modulus gap at the root-solver noise
    // floor (and an eigenplane of a repeated eigenvalue passes any residual
    // test against its own value, but not against the polished extreme one).
    // Simple, well-separated eigenpairs sit at ~1e-13 here.
    let scale = g.matrix.norm();
    for (vec, val) in [(&top_vector, top_val), (&bottom_vector, bottom_val)] {
        let v = vec.normalized();
        let residual = (&g.matrix * &v - val * &v).norm();
        if residual > 1e-10 * (scale + val.abs()) {
            return Err(GroupError::NearDefective);
        }
    }
    Ok(EigenData {
        moduli,
        top_vector,
        bottom_vector,
    })
}

fn pick_real_eigenvalue(m: &DMatrix<f64>, modulus: f64) -> f64 {
    // Smaller |det(A − λI)| wins between ±modulus.
    let n = m.nrows();
    let val = |lam: f64| {
        (m - DMatrix::<f64>::identity(n, n) * lam)
            .lu()
            .determinant()
            .abs()
    };
    if val(modulus) <= val(-modulus) {
        modulus
    } else {
        -modulus
    }
}

fn null_vector(m: &DMatrix<f64>, lam: f64) -> Result<ProjectivePoint, GroupError> {
    let n = m.nrows();
    let shifted = m - DMatrix::<f64>::identity(n, n) * lam;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("svd requested");
    let v: DVector<f64> = v_t.row(n - 1).transpose();
    ProjectivePoint::new(v).map_err(|_| GroupError::NearDefective)
}

/// Biproximality: the largest and smallest eigenvalue moduli are simple.
pub fn is_biproximal(g: &GroupElement) -> bool {
    let moduli = eigen_moduli(g);
    let n = moduli.len();
    moduli[0] - moduli[1] > 1e-8 * moduli[0]
        && moduli[n - 2] - moduli[n - 1] > 1e-8 * moduli[n - 2]
}

/// Translation length l_γ = ½(log λ₀ − log λ_{n}) of a biproximal element.
pub fn translation_length(g: &GroupElement) -> Result<f64, GroupError> {
    if !is_biproximal(g) {
        return Err(GroupError::NotBiproximal);
    }
    let moduli = eigen_moduli(g);
    Ok(0.5 * (moduli[0].ln() - moduli[moduli.len() - 1].ln()))
}

/// Closed-form exponents of the parallel transport along the periodic orbit
/// of γ, one triple per cluster of intermediate eigenvalue moduli.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicExponents {
    pub eta: f64,
    pub chi_plus: f64,
    pub chi_minus: f64,
}

pub fn periodic_lyapunov(g: &GroupElement) -> Result<Vec<PeriodicExponents>, GroupError> {
    if !is_biproximal(g) {
        return Err(GroupError::NotBiproximal);
    }
    let moduli = eigen_moduli(g);
    let n = moduli.len();
    let l0 = moduli[0].ln();
    let l_end = moduli[n - 1].ln();
    let inner = &moduli[1..n - 1];
    // Cluster intermediate moduli at relative tolerance 1e-8.
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for &m in inner {
        match clusters.last_mut() {
            Some(c) if (c[0] - m).abs() < 1e-8 * c[0] => c.push(m),
            _ => clusters.push(vec![m]),
        }
    }
    Ok(clusters
        .iter()
        .map(|c| {
            let li = c.iter().map(|m| m.ln()).sum::<f64>() / c.len() as f64;
            let eta = -1.0 + 2.0 * (l0 - li) / (l0 - l_end);
            PeriodicExponents {
                eta,
                chi_plus: 1.0 + eta,
                chi_minus: -1.0 + eta,
            }
        })
        .collect())
}

/// Symmetric-square embedding SL₂(R) → SL₃(R), conjugated so the image
/// preserves the unit disk of the standard chart. A hyperbolic 2×2 element
/// with eigenvalues (λ, 1/λ) maps to moduli (λ², 1, λ⁻²).
pub fn so21_embed(a: f64, b: f64, c: f64, d: f64) -> Result<GroupElement, GroupError> {
    if (a * d - b * c - 1.0).abs() > 1e-10 {
        return Err(GroupError::InvalidDeterminant);
    }
    // Action on the coefficient space (x², xy, y²) of squared vectors.
    let sym = DMatrix::from_row_slice(
        3,
        3,
        &[
            a * a,
            2.0 * a * b,
            b * b,
            a * c,
            a * d + b * c,
            b * d,
            c * c,
            2.0 * c * d,
            d * d,
        ],
    );
    // Coordinates where the invariant cone q² − pr becomes u² + y² − w².
    let t = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0]);
    let t_inv = t.clone().try_inverse().expect("fixed change of basis");
    GroupElement::new(t_inv * sym * t)
}

/// Relations available to the enumerator: which generators are involutions,
/// and dihedral orders m_ij of generator pairs (0 = unconstrained).
#[derive(Debug, Clone)]
pub struct Presentation {
    pub involutions: Vec<bool>,
    pub pair_orders: Option<Vec<Vec<u32>>>,
}

impl Presentation {
    pub fn free(rank: usize) -> Self {
        Self {
            involutions: vec![false; rank],
            pair_orders: None,
        }
    }
}

/// A triangle reflection family: three reflections with prescribed dihedral
/// orders, deformed away from the symmetric (hyperbolic) point by s.
#[derive(Debug, Clone)]
pub struct TriangleFamily {
    pub generators: Vec<GroupElement>,
    pub orders: [u32; 3],
    pub s: f64,
    pub presentation: Presentation,
}

/// Reflections σ_i(x) = x − α_i(x)·b_i with α_i(b_i) = 2 and cross-pairings
/// α_i(b_j)·α_j(b_i) = 4cos²(π/m_ij). The deformation splits the pairing of
/// the first edge as −2cos(π/m₁₂)·s^{±1}; s = 1 is the symmetric point,
/// which preserves a conic.
pub fn triangle_reflection_family(
    p: u32,
    q: u32,
    r: u32,
    s: f64,
) -> Result<TriangleFamily, GroupError> {
    if p < 2 || q < 2 || r < 2 {
        return Err(GroupError::InvalidParameter("orders must be at least 2".into()));
    }
    // 1/p + 1/q + 1/r < 1, decided in integers.
    if (q as u64) * (r as u64) + (p as u64) * (r as u64) + (p as u64) * (q as u64)
        >= (p as u64) * (q as u64) * (r as u64)
    {
        return Err(GroupError::NotHyperbolicType);
    }
    if s <= 0.0 || !s.is_finite() {
        return Err(GroupError::InvalidParameter(format!(
            "deformation parameter must be positive, got {s}"
        )));
    }
    let cartan = triangle_cartan(p, q, r, s);
    let mut generators = Vec::with_capacity(3);
    for i in 0..3 {
        let mut m = DMatrix::identity(3, 3);
        for j in 0..3 {
            m[(i, j)] -= cartan[(i, j)];
        }
        generators.push(GroupElement::new(m)?);
    }
    Ok(TriangleFamily {
        generators,
        orders: [p, q, r],
        s,
        presentation: Presentation {
            involutions: vec![true; 3],
            pair_orders: Some(vec![vec![0, p, r], vec![p, 0, q], vec![r, q, 0]]),
        },
    })
}

fn triangle_cartan(p: u32, q: u32, r: u32, s: f64) -> DMatrix<f64> {
    let c = |m: u32| (std::f64::consts::PI / m as f64).cos();
    let mut a = DMatrix::zeros(3, 3);
    a[(0, 0)] = 2.0;
    a[(1, 1)] = 2.0;
    a[(2, 2)] = 2.0;
    a[(0, 1)] = -2.0 * c(p) * s;
    a[(1, 0)] = -2.0 * c(p) / s;
    a[(1, 2)] = -2.0 * c(q);
    a[(2, 1)] = -2.0 * c(q);
    a[(0, 2)] = -2.0 * c(r);
    a[(2, 0)] = -2.0 * c(r);
    a
}

/// Rotation subgroup generators (σ₁σ₂, σ₂σ₃) of the symmetric triangle
/// family, conjugated into the isometry group of the round unit disk.
pub fn triangle_rotation_disk(p: u32, q: u32, r: u32) -> Result<Vec<GroupElement>, GroupError> {
    let family = triangle_reflection_family(p, q, r, 1.0)?;
    // At s = 1 the Cartan matrix is a symmetric form of signature (2,1)
    // preserved by the reflections; diagonalize it to the standard cone.
    let a = triangle_cartan(p, q, r, 1.0);
    let eig = nalgebra::SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap()
    });
    if !(eig.eigenvalues[order[0]] > 0.0
        && eig.eigenvalues[order[1]] > 0.0
        && eig.eigenvalues[order[2]] < 0.0)
    {
        return Err(GroupError::NotHyperbolicType);
    }
    let mut e = DMatrix::zeros(3, 3);
    for (row, &idx) in order.iter().enumerate() {
        let scale = eig.eigenvalues[idx].abs().sqrt();
        for col in 0..3 {
            e[(row, col)] = scale * eig.eigenvectors[(col, idx)];
        }
    }
    let e_inv = e.clone().try_inverse().expect("signature change of basis");
    let conj = |g: &GroupElement| GroupElement::new(&e * g.matrix() * &e_inv);
    let r1 = family.generators[0].compose(&family.generators[1]);
    let r2 = family.generators[1].compose(&family.generators[2]);
    Ok(vec![conj(&r1)?, conj(&r2)?])
}

/// One representative per class of cyclically reduced words up to cyclic
/// permutation, with dihedral rewriting when pair orders are supplied.
/// Inverse pairs stay distinct. Other relations are not quotiented, so for
/// presentations beyond triangle groups the count is an over-count.
pub fn enumerate_conjugacy_classes(
    generators: &[GroupElement],
    presentation: &Presentation,
    max_len: usize,
) -> Result<Vec<GroupElement>, GroupError> {
    if max_len > 16 {
        return Err(GroupError::ExplosionGuard);
    }
    if generators.is_empty() {
        return Ok(Vec::new());
    }
    let letters: Vec<i32> = (0..generators.len() as i32)
        .flat_map(|i| {
            if presentation.involutions[i as usize] {
                vec![i + 1]
            } else {
                vec![i + 1, -(i + 1)]
            }
        })
        .collect();
    let k = letters.len() as f64;
    if max_len > 1 && k * (k - 1.0).powi(max_len as i32 - 1) > 1e7 {
        return Err(GroupError::ExplosionGuard);
    }
    let mut canon_set: BTreeSet<Vec<i32>> = BTreeSet::new();
    let mut word = Vec::with_capacity(max_len);
    enumerate_rec(&letters, presentation, max_len, &mut word, &mut canon_set);
    let mut out = Vec::with_capacity(canon_set.len());
    let mut ordered: Vec<Vec<i32>> = canon_set.into_iter().collect();
    ordered.sort_by_key(|w| (w.len(), w.clone()));
    for w in ordered {
        let mut g = word_matrix(generators, &w)?;
        g.word = Some(w);
        out.push(g);
    }
    Ok(out)
}

fn enumerate_rec(
    letters: &[i32],
    pres: &Presentation,
    max_len: usize,
    word: &mut Vec<i32>,
    out: &mut BTreeSet<Vec<i32>>,
) {
    if !word.is_empty() {
        let canon = canonical_cyclic_word(word, pres);
        if !canon.is_empty() {
            out.insert(canon);
        }
    }
    if word.len() == max_len {
        return;
    }
    for &l in letters {
        // Skip immediate cancellations so the tree stays reduced.
        if let Some(&last) = word.last() {
            if last == -l || (pres.involutions[(l.abs() - 1) as usize] && last == l) {
                continue;
            }
        }
        word.push(l);
        enumerate_rec(letters, pres, max_len, word, out);
        word.pop();
    }
}

fn word_matrix(generators: &[GroupElement], word: &[i32]) -> Result<GroupElement, GroupError> {
    let size = generators[0].matrix().nrows();
    let mut m = DMatrix::identity(size, size);
    for &l in word {
        let idx = (l.abs() - 1) as usize;
        if l > 0 {
            m *= generators[idx].matrix();
        } else {
            m *= generators[idx].inverse().matrix();
        }
    }
    GroupElement::new(m)
}

fn inverse_letter(l: i32, pres: &Presentation) -> i32 {
    if pres.involutions[(l.abs() - 1) as usize] {
        l.abs()
    } else {
        -l
    }
}

/// Cyclic free reduction: cancel adjacent inverse pairs, including around the
/// wrap, until stable.
fn cyclic_reduce(word: &[i32], pres: &Presentation) -> Vec<i32> {
    let mut w: Vec<i32> = word.to_vec();
    loop {
        let mut changed = false;
        let mut i = 0;
        while w.len() >= 2 && i < w.len() {
            let j = (i + 1) % w.len();
            if i != j && w[j] == inverse_letter(w[i], pres) {
                let (hi, lo) = (i.max(j), i.min(j));
                w.remove(hi);
                w.remove(lo);
                changed = true;
                i = 0;
            } else {
                i += 1;
            }
        }
        if !changed {
            break;
        }
    }
    w
}

/// Canonical form of a cyclic word: free reduction, dihedral shortening of
/// alternating runs longer than the pair order, then the lexicographically
/// minimal rotation over the closure of equal-length dihedral flips.
fn canonical_cyclic_word(word: &[i32], pres: &Presentation) -> Vec<i32> {
    let mut w = cyclic_reduce(word, pres);
    loop {
        if w.is_empty() {
            return w;
        }
        if let Some(reduced) = dihedral_shorten(&w, pres) {
            w = cyclic_reduce(&reduced, pres);
            continue;
        }
        break;
    }
    flip_closure_min(&w, pres)
}

/// Apply one dihedral rewrite if some maximal alternating {i,j} run exceeds
/// the pair order m: an alternating run of length ℓ > m starting with a
/// letter equals the run of length 2m − ℓ starting with the other letter.
fn dihedral_shorten(w: &[i32], pres: &Presentation) -> Option<Vec<i32>> {
    let orders = pres.pair_orders.as_ref()?;
    let n = w.len();
    if n < 2 {
        return None;
    }
    // Whole word alternating over one pair: a power of the rotation.
    if let Some((i, j)) = pure_alternating_pair(w) {
        let m = orders[i][j] as usize;
        if m >= 2 && n >= 2 {
            let k = (n / 2) % m;
            let (a, b) = (w[0], w[1]);
            let short = if k <= m - k {
                alternating_word(a, b, 2 * k)
            } else {
                alternating_word(b, a, 2 * (m - k))
            };
            if short.len() < n {
                return Some(short);
            }
        }
        return None;
    }
    // Maximal circular runs over each unordered pair.
    for start in 0..n {
        let a = w[start];
        let b = w[(start + 1) % n];
        if a == b || a <= 0 || b <= 0 {
            continue;
        }
        let (i, j) = ((a - 1) as usize, (b - 1) as usize);
        let m = orders[i][j] as usize;
        if m < 2 {
            continue;
        }
        // Run must begin here: previous letter not in the pair.
        let prev = w[(start + n - 1) % n];
        if prev == a || prev == b {
            continue;
        }
        let mut len = 1;
        while len < n {
            let next = w[(start + len) % n];
            let expect = if len % 2 == 0 { a } else { b };
            if next != expect {
                break;
            }
            len += 1;
        }
        if len > m {
            // The alternating run of length ℓ starting with `a` equals the
            // one of length ℓ mod 2m (same letter), and runs longer than m
            // flip to the complementary run of the other letter.
            let reduced = len % (2 * m);
            let replacement = if reduced == 0 {
                Vec::new()
            } else if reduced > m {
                alternating_word(b, a, 2 * m - reduced)
            } else {
                alternating_word(a, b, reduced)
            };
            if replacement.len() < len {
                let mut rotated: Vec<i32> = (0..n).map(|t| w[(start + t) % n]).collect();
                rotated.splice(0..len, replacement);
                return Some(rotated);
            }
        }
    }
    None
}

fn pure_alternating_pair(w: &[i32]) -> Option<(usize, usize)> {
    if w.len() < 2 || !w.len().is_multiple_of(2) {
        return None;
    }
    let (a, b) = (w[0], w[1]);
    if a == b || a <= 0 || b <= 0 {
        return None;
    }
    for (t, &l) in w.iter().enumerate() {
        if l != if t % 2 == 0 { a } else { b } {
            return None;
        }
    }
    Some(((a - 1) as usize, (b - 1) as usize))
}

fn alternating_word(first: i32, second: i32, len: usize) -> Vec<i32> {
    (0..len)
        .map(|t| if t % 2 == 0 { first } else { second })
        .collect()
}

fn min_rotation(w: &[i32]) -> Vec<i32> {
    let n = w.len();
    let mut best: Option<Vec<i32>> = None;
    for s in 0..n {
        let rot: Vec<i32> = (0..n).map(|t| w[(s + t) % n]).collect();
        if best.as_ref().map(|b| rot < *b).unwrap_or(true) {
            best = Some(rot);
        }
    }
    best.unwrap_or_default()
}

/// Runs of length exactly m have two equal spellings; take the minimum over
/// the closure of such flips (capped — the cap is far beyond anything a
/// length-16 word can produce).
fn flip_closure_min(w: &[i32], pres: &Presentation) -> Vec<i32> {
    let mut seen: BTreeSet<Vec<i32>> = BTreeSet::new();
    let mut stack = vec![min_rotation(w)];
    let mut best = stack[0].clone();
    while let Some(cur) = stack.pop() {
        if !seen.insert(cur.clone()) {
            continue;
        }
        if seen.len() > 4096 {
            break;
        }
        if cur < best {
            best = cur.clone();
        }
        if let Some(orders) = pres.pair_orders.as_ref() {
            let n = cur.len();
            for start in 0..n {
                let a = cur[start];
                let b = cur[(start + 1) % n];
                if a == b || a <= 0 || b <= 0 {
                    continue;
                }
                let m = orders[(a - 1) as usize][(b - 1) as usize] as usize;
                if m < 2 || n < m {
                    continue;
                }
                let prev = cur[(start + n - 1) % n];
                let whole = pure_alternating_pair(&cur).is_some();
                if !whole && (prev == a || prev == b) {
                    continue;
                }
                let mut len = 1;
                while len < n {
                    let next = cur[(start + len) % n];
                    let expect = if len % 2 == 0 { a } else { b };
                    if next != expect {
                        break;
                    }
                    len += 1;
                }
                if len == m || (whole && n == m) {
                    let mut rotated: Vec<i32> = (0..n).map(|t| cur[(start + t) % n]).collect();
                    let replacement = alternating_word(b, a, m);
                    rotated.splice(0..m.min(n), replacement);
                    stack.push(min_rotation(&rotated));
                }
            }
        }
    }
    best
}

/// True when the canonical word is not a proper power of a shorter block.
pub fn is_primitive_word(word: &[i32]) -> bool {
    let n = word.len();
    if n == 0 {
        return false;
    }
    for block in 1..n {
        if n.is_multiple_of(block) && (0..n).all(|i| word[i] == word[i % block]) {
            return false;
        }
    }
    true
}

/// Convex hull of the attracting fixed points of the biproximal enumerated
/// elements, presented in a chart where it is bounded.
#[derive(Debug)]
pub struct HullReport {
    pub domain: ConvexDomain,
    /// One-sided Hausdorff gap between generator images of the fixed points
    /// and the hull vertex set.
    pub invariance_gap: f64,
    /// Smallest-to-largest singular value ratio of the conic design matrix on
    /// the hull vertices; near zero means the hull lies on a conic.
    pub conic_residual: f64,
    pub fixed_points: Vec<DVector<f64>>,
}

pub fn generate_domain_hull(
    generators: &[GroupElement],
    presentation: &Presentation,
    max_len: usize,
) -> Result<HullReport, GroupError> {
    let classes = enumerate_conjugacy_classes(generators, presentation, max_len)?;
    let mut rays: Vec<DVector<f64>> = Vec::new();
    for g in &classes {
        if is_biproximal(g) {
            if let Ok(eig) = eigen_data(g) {
                let v = eig.top_vector.normalized();
                rays.push(v);
            }
        }
    }
    if rays.len() < 8 {
        return Err(GroupError::NotProperlyConvex(format!(
            "only {} attracting fixed points at this word length",
            rays.len()
        )));
    }
    // Orient all rays into one half-space and find an interior covector.
    // The standard chart (last coordinate) is preferred when the cone is
    // salient there, so disk-model groups come out in the round picture.
    let dim_h = rays[0].len();
    let standard = {
        let mut e = DVector::zeros(dim_h);
        e[dim_h - 1] = 1.0;
        e
    };
    let standard_ok = rays.iter().all(|v| v[dim_h - 1].abs() > 0.05);
    let mut mu = if standard_ok {
        standard
    } else {
        let mut mu = rays[0].clone();
        for _ in 0..6 {
            let mut acc = DVector::zeros(dim_h);
            for v in &rays {
                let s = if mu.dot(v) >= 0.0 { 1.0 } else { -1.0 };
                acc += s * v;
            }
            let n = acc.norm();
            if n < 1e-12 {
                return Err(GroupError::NotProperlyConvex(
                    "fixed-point cone has no interior direction".into(),
                ));
            }
            mu = acc / n;
        }
        mu
    };
    mu = mu.normalize();
    for v in rays.iter_mut() {
        if mu.dot(v) < 0.0 {
            *v = -v.clone();
        }
    }
    let min_pairing = rays.iter().map(|v| mu.dot(v)).fold(f64::INFINITY, f64::min);
    if min_pairing < 1e-4 {
        return Err(GroupError::NotProperlyConvex(
            "fixed-point cone is not salient in the sampled chart".into(),
        ));
    }
    // Coordinates in the affine slice ⟨mu, x⟩ = 1.
    let frame = crate::transport::transversal_frame(&mu);
    let (b1, b2) = (&frame[0], &frame[1]);
    let coords: Vec<DVector<f64>> = rays
        .iter()
        .map(|v| {
            let w = v / mu.dot(v);
            DVector::from_column_slice(&[b1.dot(&w), b2.dot(&w)])
        })
        .collect();
    let domain = ConvexDomain::hull_2d(&coords).map_err(|e| {
        GroupError::NotProperlyConvex(format!("hull construction failed: {e}"))
    })?;
    // Invariance diagnostic: generator images of the fixed points against
    // the hull boundary.
    let verts = domain.vertices().unwrap().to_vec();
    let mut gap: f64 = 0.0;
    for g in generators {
        for v in &rays {
            let mut image = g.matrix() * v;
            if mu.dot(&image) < 0.0 {
                image = -image;
            }
            let pairing = mu.dot(&image);
            if pairing < 1e-6 {
                continue;
            }
            let w = &image / pairing;
            let p = DVector::from_column_slice(&[b1.dot(&w), b2.dot(&w)]);
            gap = gap.max(polygon_boundary_distance(&verts, &p));
        }
    }
    let conic_residual = conic_fit_residual(&verts);
    Ok(HullReport {
        domain,
        invariance_gap: gap,
        conic_residual,
        fixed_points: coords,
    })
}

/// Distance from a point to the boundary of a polygon given by its ordered
/// vertex cycle.
fn polygon_boundary_distance(verts: &[DVector<f64>], p: &DVector<f64>) -> f64 {
    let k = verts.len();
    let mut best = f64::INFINITY;
    for i in 0..k {
        let a = &verts[i];
        let b = &verts[(i + 1) % k];
        let ab = b - a;
        let len2 = ab.norm_squared();
        let t = if len2 > 0.0 {
            ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let foot = a + t * ab;
        best = best.min((p - foot).norm());
    }
    best
}

/// The ellipse best fitting a 2D point cloud, as an exact quadric domain.
/// Intended for hulls of symmetric-family fixed points, whose limit set is a
/// conic; fails when the fitted conic is not a bounded ellipse around the
/// cloud's centroid.
pub fn fitted_conic_domain(points: &[DVector<f64>]) -> Result<ConvexDomain, GroupError> {
    if points.len() < 6 {
        return Err(GroupError::NotProperlyConvex(
            "need at least 6 points to fit a conic".into(),
        ));
    }
    let k = points.len();
    let mut centroid = DVector::zeros(2);
    for p in points {
        centroid += p;
    }
    centroid /= k as f64;
    let scale = points
        .iter()
        .map(|p| (p - &centroid).norm())
        .fold(0.0, f64::max)
        .max(1e-12);
    let mut design = DMatrix::zeros(k, 6);
    for (row, p) in points.iter().enumerate() {
        let x = (p[0] - centroid[0]) / scale;
        let y = (p[1] - centroid[1]) / scale;
        design[(row, 0)] = x * x;
        design[(row, 1)] = x * y;
        design[(row, 2)] = y * y;
        design[(row, 3)] = x;
        design[(row, 4)] = y;
        design[(row, 5)] = 1.0;
    }
    let svd = design.svd(false, true);
    let v_t = svd.v_t.expect("svd requested");
    let c: DVector<f64> = v_t.row(5).transpose();
    // Quadric in normalized coordinates, then pulled back to the original
    // frame through the recentring map.
    let q_norm = DMatrix::from_row_slice(
        3,
        3,
        &[
            c[0],
            c[1] / 2.0,
            c[3] / 2.0,
            c[1] / 2.0,
            c[2],
            c[4] / 2.0,
            c[3] / 2.0,
            c[4] / 2.0,
            c[5],
        ],
    );
    let mut to_norm = DMatrix::identity(3, 3);
    to_norm[(0, 0)] = 1.0 / scale;
    to_norm[(1, 1)] = 1.0 / scale;
    to_norm[(0, 2)] = -centroid[0] / scale;
    to_norm[(1, 2)] = -centroid[1] / scale;
    let q = to_norm.transpose() * q_norm * to_norm;
    ConvexDomain::from_quadric(q, centroid)
        .map_err(|e| GroupError::NotProperlyConvex(format!("fitted conic: {e}")))
}

/// Least-squares conic through a 2D point set: ratio of extreme singular
/// values of the quadratic design matrix after recentering.
pub fn conic_fit_residual(points: &[DVector<f64>]) -> f64 {
    let k = points.len();
    let mut center = DVector::zeros(2);
    for p in points {
        center += p;
    }
    center /= k as f64;
    let scale = points
        .iter()
        .map(|p| (p - &center).norm())
        .fold(0.0, f64::max)
        .max(1e-12);
    let mut design = DMatrix::zeros(k, 6);
    for (row, p) in points.iter().enumerate() {
        let x = (p[0] - center[0]) / scale;
        let y = (p[1] - center[1]) / scale;
        design[(row, 0)] = x * x;
        design[(row, 1)] = x * y;
        design[(row, 2)] = y * y;
        design[(row, 3)] = x;
        design[(row, 4)] = y;
        design[(row, 5)] = 1.0;
    }
    let svals = design.svd(false, false).singular_values;
    svals[svals.len() - 1] / svals[0]
}

/// γ-invariant strictly convex model of the axis of a biproximal 3×3 element:
/// the power-curve body with exponent κ = log(λ₁/λ₂)/log(λ₀/λ₂) in the
/// eigenchart where the axis is the unit segment. Transport regressions along
/// this axis are domain-faithful realizations of the periodic orbit of γ.
#[derive(Debug)]
pub struct AxisModel {
    pub domain: ConvexDomain,
    pub state: FlowState,
    pub kappa: f64,
    pub length: f64,
}

pub fn axis_benchmark(g: &GroupElement) -> Result<AxisModel, GroupError> {
    if g.matrix().nrows() != 3 {
        return Err(GroupError::InvalidParameter(
            "axis benchmark is built for 3x3 elements".into(),
        ));
    }
    if !is_biproximal(g) {
        return Err(GroupError::NotBiproximal);
    }
    let moduli = eigen_moduli(g);
    let (l0, l1, l2) = (moduli[0].ln(), moduli[1].ln(), moduli[2].ln());
    let kappa = (l1 - l2) / (l0 - l2);
    if !(kappa > 1e-6 && kappa < 1.0 - 1e-6) {
        return Err(GroupError::NearDefective);
    }
    let domain = ConvexDomain::power_curve(kappa, 0.5)?;
    let state = FlowState::new(
        DVector::from_column_slice(&[0.5, 0.0]),
        DVector::from_column_slice(&[1.0, 0.0]),
    )
    .expect("unit direction");
    Ok(AxisModel {
        domain,
        state,
        kappa,
        length: 0.5 * (l0 - l2),
    })
}

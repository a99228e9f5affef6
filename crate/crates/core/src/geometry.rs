//! Constant-curvature (κ-stereographic) geometry kernels.
//!
//! A curvature κ selects one model out of a single coordinate chart:
//! the Poincaré ball of radius 1/√(−κ) for κ < 0, the stereographic
//! projection of the sphere for κ > 0, and plain Euclidean space at κ = 0.
//! The Riemannian metric is conformal, `g_z = λ_z² I` with
//!
//! ```text
//! λ_z = 2 / (1 + κ‖z‖²)
//! ```
//!
//! All operations below are total on clamped inputs: points with κ < 0 are
//! renormalized to stay strictly inside the ball, inverse-tanh arguments are
//! clamped below 1, and norms under 1e-15 are treated as exact zeros. This
//! keeps training loops free of domain panics; the few operations whose
//! contracts call for hard failures (`conformal_factor`, `mobius_add`,
//! `weighted_midpoint`) return errors instead.

use crate::error::{Error, Result};
use crate::vecmath::{axpy, dot, norm, norm_sq, scale};

/// Relative margin kept between clamped points and the ball boundary.
pub const BALL_MARGIN: f64 = 1e-5;
/// Inverse-tanh arguments are clamped to ±(1 − 1e-12).
pub const ATANH_BOUND: f64 = 1.0 - 1e-12;
/// Norms below this are treated as exact zero.
pub const ZERO_EPS: f64 = 1e-15;
/// tan arguments are clamped to ±(π/2 − 1e-6) to stay inside one chart
/// of the stereographic sphere.
pub const TAN_BOUND: f64 = std::f64::consts::FRAC_PI_2 - 1e-6;
/// Denominators smaller than this count as degenerate.
pub const DENOM_EPS: f64 = 1e-15;

/// Sectional curvature of one constant-curvature space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Curvature {
    kappa: f64,
}

impl Curvature {
    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::invalid(format!("curvature must be finite, got {kappa}")));
        }
        Ok(Curvature { kappa })
    }

    pub fn flat() -> Self {
        Curvature { kappa: 0.0 }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_flat(&self) -> bool {
        self.kappa == 0.0
    }

    pub fn sqrt_abs(&self) -> f64 {
        self.kappa.abs().sqrt()
    }

    /// Largest admissible point norm: (1 − margin)/√(−κ) for κ < 0, ∞ otherwise.
    pub fn max_norm(&self) -> f64 {
        if self.kappa < 0.0 {
            (1.0 - BALL_MARGIN) / self.sqrt_abs()
        } else {
            f64::INFINITY
        }
    }
}

/// A point of the κ-stereographic model.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldVector {
    coords: Vec<f64>,
    kappa: Curvature,
}

impl ManifoldVector {
    /// Builds a point, renormalizing into the open ball when κ < 0.
    pub fn new(coords: Vec<f64>, kappa: Curvature) -> Self {
        let mut coords = coords;
        clamp_coords(&mut coords, kappa);
        ManifoldVector { coords, kappa }
    }

    /// Builds a point without clamping. Only for constructing deliberately
    /// invalid states (tests, raw IO); everything else should use `new`.
    pub fn new_unclamped(coords: Vec<f64>, kappa: Curvature) -> Self {
        ManifoldVector { coords, kappa }
    }

    pub fn origin(dim: usize, kappa: Curvature) -> Self {
        ManifoldVector { coords: vec![0.0; dim], kappa }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn kappa(&self) -> Curvature {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_valid(&self) -> bool {
        let k = self.kappa.kappa();
        if !crate::vecmath::all_finite(&self.coords) {
            return false;
        }
        k >= 0.0 || -k * norm_sq(&self.coords) < 1.0
    }
}

/// A tangent vector anchored at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    coords: Vec<f64>,
    at: ManifoldVector,
}

impl TangentVector {
    pub fn new(coords: Vec<f64>, at: ManifoldVector) -> Self {
        TangentVector { coords, at }
    }

    pub fn at_origin(coords: Vec<f64>, kappa: Curvature) -> Self {
        let dim = coords.len();
        TangentVector { coords, at: ManifoldVector::origin(dim, kappa) }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn base(&self) -> &ManifoldVector {
        &self.at
    }
}

fn clamp_coords(coords: &mut [f64], kappa: Curvature) {
    let max_norm = kappa.max_norm();
    if max_norm.is_finite() {
        let n = norm(coords);
        if n > max_norm {
            let s = max_norm / n;
            for c in coords.iter_mut() {
                *c *= s;
            }
        }
    }
}

/// Conformal factor λ_z = 2/(1 + κ‖z‖²); exactly 2 at the origin.
pub fn conformal_factor(z: &ManifoldVector) -> Result<f64> {
    let k = z.kappa().kappa();
    let sq = norm_sq(z.coords());
    if k < 0.0 && sq >= 1.0 / -k {
        return Err(Error::NumericalDomain(format!(
            "point norm² {sq} outside ball of radius² {}",
            1.0 / -k
        )));
    }
    Ok(2.0 / (1.0 + k * sq))
}

fn lambda_unchecked(coords: &[f64], k: f64) -> f64 {
    2.0 / (1.0 + k * norm_sq(coords))
}

/// Curvature-aware tangent: tan(u) for κ > 0, tanh(u) for κ < 0, u at κ = 0.
/// tan arguments are clamped inside (−π/2, π/2).
pub fn tan_kappa(u: f64, kappa: Curvature) -> f64 {
    let k = kappa.kappa();
    if k > 0.0 {
        u.clamp(-TAN_BOUND, TAN_BOUND).tan()
    } else if k < 0.0 {
        u.tanh()
    } else {
        u
    }
}

/// Inverse of [`tan_kappa`]: atan for κ > 0, atanh (clamped) for κ < 0.
pub fn tan_kappa_inv(u: f64, kappa: Curvature) -> f64 {
    let k = kappa.kappa();
    if k > 0.0 {
        u.atan()
    } else if k < 0.0 {
        u.clamp(-ATANH_BOUND, ATANH_BOUND).atanh()
    } else {
        u
    }
}

/// Raw gyroaddition on coordinate slices; the denominator is kept away from
/// zero so the map stays total. Callers clamp the result into the manifold.
pub(crate) fn mobius_add_coords(k: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    if k == 0.0 {
        return crate::vecmath::add(x, y);
    }
    let xy = dot(x, y);
    let x2 = norm_sq(x);
    let y2 = norm_sq(y);
    let cx = 1.0 - 2.0 * k * xy - k * y2;
    let cy = 1.0 + k * x2;
    // Non-negative for both curvature signs (Cauchy-Schwarz).
    let den = (1.0 - 2.0 * k * xy + k * k * x2 * y2).max(DENOM_EPS);
    let mut out = scale(x, cx / den);
    axpy(&mut out, cy / den, y);
    out
}

fn mobius_denominator(k: f64, x: &[f64], y: &[f64]) -> f64 {
    1.0 - 2.0 * k * dot(x, y) + k * k * norm_sq(x) * norm_sq(y)
}

/// Gyroaddition x ⊕_κ y. Reduces to x + y at κ = 0 and to Poincaré-ball
/// Möbius addition at κ < 0.
pub fn mobius_add(x: &ManifoldVector, y: &ManifoldVector) -> Result<ManifoldVector> {
    let kappa = check_same_kappa(x, y)?;
    let k = kappa.kappa();
    if k != 0.0 && mobius_denominator(k, x.coords(), y.coords()).abs() <= DENOM_EPS {
        return Err(Error::NumericalDomain("gyroaddition denominator vanished".into()));
    }
    Ok(ManifoldVector::new(mobius_add_coords(k, x.coords(), y.coords()), kappa))
}

fn check_same_kappa(x: &ManifoldVector, y: &ManifoldVector) -> Result<Curvature> {
    if x.kappa() != y.kappa() {
        return Err(Error::invalid(format!(
            "curvature mismatch: {} vs {}",
            x.kappa().kappa(),
            y.kappa().kappa()
        )));
    }
    if x.dim() != y.dim() {
        return Err(Error::shape(format!("dim mismatch: {} vs {}", x.dim(), y.dim())));
    }
    Ok(x.kappa())
}

/// Tangent vector at the origin mapped down by log_0.
pub fn log_origin(x: &ManifoldVector) -> Vec<f64> {
    let k = x.kappa().kappa();
    if k == 0.0 {
        return x.coords().to_vec();
    }
    let n = norm(x.coords());
    if n < ZERO_EPS {
        return vec![0.0; x.dim()];
    }
    let sk = x.kappa().sqrt_abs();
    // λ_0 = 2, so the general formula collapses to tanκ⁻¹(√|κ|‖x‖)·x̂/√|κ|.
    let s = tan_kappa_inv(sk * n, x.kappa()) / (sk * n);
    scale(x.coords(), s)
}

/// exp_0 of a tangent vector at the origin.
pub fn exp_origin(v: &[f64], kappa: Curvature) -> ManifoldVector {
    let k = kappa.kappa();
    if k == 0.0 {
        return ManifoldVector::new(v.to_vec(), kappa);
    }
    let n = norm(v);
    if n < ZERO_EPS {
        return ManifoldVector::origin(v.len(), kappa);
    }
    let sk = kappa.sqrt_abs();
    let s = tan_kappa(sk * n, kappa) / (sk * n);
    ManifoldVector::new(scale(v, s), kappa)
}

/// exp_x(v); the zero tangent returns x exactly.
pub fn exp_map(x: &ManifoldVector, v: &TangentVector) -> ManifoldVector {
    debug_assert_eq!(v.base(), x, "tangent vector anchored at a different base point");
    let kappa = x.kappa();
    let k = kappa.kappa();
    if k == 0.0 {
        return ManifoldVector::new(crate::vecmath::add(x.coords(), v.coords()), kappa);
    }
    let vn = norm(v.coords());
    if vn < ZERO_EPS {
        return x.clone();
    }
    let sk = kappa.sqrt_abs();
    let lx = lambda_unchecked(x.coords(), k);
    let t = tan_kappa(sk * lx * vn / 2.0, kappa);
    let u = scale(v.coords(), t / (sk * vn));
    ManifoldVector::new(mobius_add_coords(k, x.coords(), &u), kappa)
}

/// log_x(y); inverse of [`exp_map`] at the same base.
pub fn log_map(x: &ManifoldVector, y: &ManifoldVector) -> TangentVector {
    let kappa = x.kappa();
    let k = kappa.kappa();
    if k == 0.0 {
        return TangentVector::new(crate::vecmath::sub(y.coords(), x.coords()), x.clone());
    }
    let neg_x = scale(x.coords(), -1.0);
    let w = mobius_add_coords(k, &neg_x, y.coords());
    let wn = norm(&w);
    if wn < ZERO_EPS {
        return TangentVector::new(vec![0.0; x.dim()], x.clone());
    }
    let sk = kappa.sqrt_abs();
    let lx = lambda_unchecked(x.coords(), k);
    let s = 2.0 / (sk * lx) * tan_kappa_inv(sk * wn, kappa);
    TangentVector::new(scale(&w, s / wn), x.clone())
}

/// Geodesic distance d(x, y) = (2/√|κ|)·tanκ⁻¹(√|κ|‖−x ⊕ y‖).
pub fn ccs_distance(x: &ManifoldVector, y: &ManifoldVector) -> f64 {
    if x.coords() == y.coords() {
        return 0.0;
    }
    let kappa = x.kappa();
    let k = kappa.kappa();
    if k == 0.0 {
        return norm(&crate::vecmath::sub(x.coords(), y.coords()));
    }
    let neg_x = scale(x.coords(), -1.0);
    let w = mobius_add_coords(k, &neg_x, y.coords());
    let sk = kappa.sqrt_abs();
    2.0 / sk * tan_kappa_inv(sk * norm(&w), kappa)
}

/// Gyro scalar multiplication r ⊗ x = exp_0(r·log_0(x)).
pub fn scalar_mul(r: f64, x: &ManifoldVector) -> ManifoldVector {
    if r == 0.0 {
        return ManifoldVector::origin(x.dim(), x.kappa());
    }
    if r == 1.0 {
        return x.clone();
    }
    exp_origin(&scale(&log_origin(x), r), x.kappa())
}

/// Lifts a Euclidean map to the manifold: f^⊗κ(x) = exp_0(f(log_0(x))).
pub fn apply_fn<F>(f: F, x: &ManifoldVector) -> ManifoldVector
where
    F: FnOnce(&[f64]) -> Vec<f64>,
{
    if x.kappa().is_flat() {
        return ManifoldVector::new(f(x.coords()), x.kappa());
    }
    exp_origin(&f(&log_origin(x)), x.kappa())
}

/// Weighted gyromidpoint
/// mid_κ({x_i}; w) = ½ ⊗ Σ_i [w_i λ_i / Σ_j w_j (λ_j − 1)] x_i.
pub fn weighted_midpoint(points: &[ManifoldVector], weights: &[f64]) -> Result<ManifoldVector> {
    if points.is_empty() {
        return Err(Error::invalid("midpoint of an empty point set"));
    }
    if points.len() != weights.len() {
        return Err(Error::shape(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    let kappa = points[0].kappa();
    let dim = points[0].dim();
    for p in points {
        if p.kappa() != kappa || p.dim() != dim {
            return Err(Error::invalid("midpoint points must share curvature and dimension"));
        }
    }
    if weights.iter().map(|w| w.abs()).sum::<f64>() <= 0.0 {
        return Err(Error::DegenerateWeights("all midpoint weights are zero".into()));
    }
    let k = kappa.kappa();
    let lambdas: Vec<f64> = points.iter().map(|p| lambda_unchecked(p.coords(), k)).collect();
    let den: f64 = weights.iter().zip(&lambdas).map(|(w, l)| w * (l - 1.0)).sum();
    if den.abs() <= DENOM_EPS {
        return Err(Error::DegenerateWeights(format!(
            "conformal-weighted denominator {den} vanished"
        )));
    }
    let mut acc = vec![0.0; dim];
    for ((p, w), l) in points.iter().zip(weights).zip(&lambdas) {
        axpy(&mut acc, w * l / den, p.coords());
    }
    Ok(scalar_mul(0.5, &ManifoldVector::new(acc, kappa)))
}

/// Row-wise κ-left-matrix-multiplication:
/// (A ⊠ Z)_i = (Σ_j A_ij) ⊗ mid_κ(rows of Z; A_i).
pub fn kappa_left_matmul(a: &[Vec<f64>], z: &[ManifoldVector]) -> Result<Vec<ManifoldVector>> {
    if a.len() != z.len() {
        return Err(Error::shape(format!("A has {} rows for {} points", a.len(), z.len())));
    }
    a.iter()
        .map(|row| {
            if row.len() != z.len() {
                return Err(Error::shape("A must be square over the point set"));
            }
            let row_sum: f64 = row.iter().sum();
            if row_sum <= 0.0 {
                return Err(Error::invalid(format!("non-positive attention row sum {row_sum}")));
            }
            let mid = weighted_midpoint(z, row)?;
            Ok(scalar_mul(row_sum, &mid))
        })
        .collect()
}

/// How Euclidean input features are lifted onto a component manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LiftMode {
    /// exp_0 of the feature vector (the default).
    #[default]
    Exp0,
    /// Closed-form projection with factor F = (1 + κ·cosh(|κ|^{-1/2}‖v‖))‖v‖.
    Rho,
}

/// Lifts a Euclidean feature vector to a manifold point.
pub fn lift_features(v: &[f64], kappa: Curvature, mode: LiftMode) -> Result<ManifoldVector> {
    match mode {
        LiftMode::Exp0 => Ok(exp_origin(v, kappa)),
        LiftMode::Rho => {
            let k = kappa.kappa();
            if k == 0.0 {
                return Err(Error::invalid("rho lift requires nonzero curvature"));
            }
            let n = norm(v);
            if n < ZERO_EPS {
                return Ok(ManifoldVector::origin(v.len(), kappa));
            }
            let c = n / kappa.sqrt_abs();
            let f = (1.0 + k * c.cosh()) * n;
            let s = f * kappa.sqrt_abs() * c.sinh();
            Ok(ManifoldVector::new(scale(v, s), kappa))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hy(k: f64) -> Curvature {
        Curvature::new(k).unwrap()
    }

    fn pt(coords: &[f64], k: f64) -> ManifoldVector {
        ManifoldVector::new(coords.to_vec(), hy(k))
    }

    #[test]
    fn conformal_factor_cases() {
        assert_eq!(conformal_factor(&pt(&[0.0, 0.0], -1.0)).unwrap(), 2.0);
        assert_eq!(conformal_factor(&pt(&[3.0, 4.0], 0.0)).unwrap(), 2.0);
        let l = conformal_factor(&pt(&[0.5, 0.0], -1.0)).unwrap();
        assert!((l - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn conformal_factor_rejects_exterior_point() {
        let bad = ManifoldVector::new_unclamped(vec![1.5, 0.0], hy(-1.0));
        assert!(matches!(conformal_factor(&bad), Err(Error::NumericalDomain(_))));
    }

    #[test]
    fn trig_branches() {
        for k in [-2.0, -1.0, 0.0, 0.5, 1.0] {
            assert_eq!(tan_kappa(0.0, hy(k)), 0.0);
        }
        assert!((tan_kappa(0.5493, hy(-1.0)) - 0.5493f64.tanh()).abs() < 1e-15);
        assert!((tan_kappa_inv(1.0, hy(1.0)) - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        // κ = 0 is the identity in both directions.
        assert_eq!(tan_kappa(0.37, Curvature::flat()), 0.37);
        assert_eq!(tan_kappa_inv(0.37, Curvature::flat()), 0.37);
    }

    #[test]
    fn mobius_add_identity_and_euclidean_limit() {
        let x = pt(&[0.3, -0.2], -1.0);
        let zero = ManifoldVector::origin(2, hy(-1.0));
        let r = mobius_add(&x, &zero).unwrap();
        for (a, b) in r.coords().iter().zip(x.coords()) {
            assert!((a - b).abs() < 1e-15);
        }
        let e = mobius_add(&pt(&[1.0, 2.0], 0.0), &pt(&[3.0, 4.0], 0.0)).unwrap();
        assert_eq!(e.coords(), &[4.0, 6.0]);
    }

    #[test]
    fn mobius_add_one_dimensional_rule() {
        // κ=-1 in 1-D reduces to (a+b)/(1+ab).
        let r = mobius_add(&pt(&[0.3, 0.0], -1.0), &pt(&[0.2, 0.0], -1.0)).unwrap();
        assert!((r.coords()[0] - 0.5 / 1.06).abs() < 1e-15);
        assert!(r.coords()[1].abs() < 1e-15);
    }

    #[test]
    fn scalar_mul_cases() {
        let x = pt(&[0.8, 0.0], -1.0);
        assert_eq!(scalar_mul(1.0, &x).coords(), x.coords());
        assert_eq!(scalar_mul(0.0, &x).coords(), &[0.0, 0.0]);
        let h = scalar_mul(0.5, &x);
        assert!((h.coords()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exp_and_log_cases() {
        let x = pt(&[1.0, 0.0], 0.0);
        let v = TangentVector::new(vec![0.0, 2.0], x.clone());
        assert_eq!(exp_map(&x, &v).coords(), &[1.0, 2.0]);
        let y = pt(&[1.0, 2.0], 0.0);
        assert_eq!(log_map(&x, &y).coords(), &[0.0, 2.0]);

        let o = ManifoldVector::origin(2, hy(-1.0));
        let v = TangentVector::new(vec![0.5, 0.0], o.clone());
        let e = exp_map(&o, &v);
        assert!((e.coords()[0] - 0.5f64.tanh()).abs() < 1e-15);
        let back = log_map(&o, &e);
        assert!((back.coords()[0] - 0.5).abs() < 1e-12);

        // zero tangent is the identity, exactly
        let x = pt(&[0.3, 0.1], -1.0);
        let z = TangentVector::new(vec![0.0, 0.0], x.clone());
        assert_eq!(exp_map(&x, &z), x);
        assert_eq!(log_map(&x, &x).coords(), &[0.0, 0.0]);
    }

    #[test]
    fn distance_cases() {
        let a = pt(&[0.0, 0.0], 0.0);
        let b = pt(&[3.0, 4.0], 0.0);
        assert_eq!(ccs_distance(&a, &b), 5.0);
        assert_eq!(ccs_distance(&b, &b), 0.0);
        let o = ManifoldVector::origin(2, hy(-1.0));
        let p = pt(&[0.5, 0.0], -1.0);
        assert!((ccs_distance(&o, &p) - 2.0 * 0.5f64.atanh()).abs() < 1e-12);
    }

    #[test]
    fn apply_fn_cases() {
        let x = pt(&[0.8, 0.0], -1.0);
        let id = apply_fn(|t| t.to_vec(), &x);
        for (a, b) in id.coords().iter().zip(x.coords()) {
            assert!((a - b).abs() < 1e-12);
        }
        let e = apply_fn(|t| scale(t, 0.5), &pt(&[2.0, 4.0], 0.0));
        assert_eq!(e.coords(), &[1.0, 2.0]);
        let h = apply_fn(|t| scale(t, 0.5), &x);
        assert!((h.coords()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn midpoint_cases() {
        // single point, any curvature: idempotent
        let x = pt(&[0.5, 0.0], -1.0);
        let m = weighted_midpoint(&[x.clone()], &[1.0]).unwrap();
        assert!((m.coords()[0] - 0.5).abs() < 1e-12);

        // Euclidean arithmetic mean
        let m = weighted_midpoint(&[pt(&[0.0, 0.0], 0.0), pt(&[2.0, 0.0], 0.0)], &[1.0, 1.0]).unwrap();
        assert!((m.coords()[0] - 1.0).abs() < 1e-15);

        // symmetric pair collapses to the origin
        let m = weighted_midpoint(&[pt(&[0.5, 0.0], -1.0), pt(&[-0.5, 0.0], -1.0)], &[1.0, 1.0]).unwrap();
        assert!(norm(m.coords()) < 1e-15);
    }

    #[test]
    fn midpoint_rejects_degenerate_weights() {
        let pts = [pt(&[0.1, 0.0], -1.0), pt(&[0.2, 0.0], -1.0)];
        assert!(matches!(
            weighted_midpoint(&pts, &[0.0, 0.0]),
            Err(Error::DegenerateWeights(_))
        ));
    }

    #[test]
    fn left_matmul_cases() {
        // κ=0 is the plain matrix product
        let z = [pt(&[1.0, 2.0], 0.0), pt(&[3.0, -1.0], 0.0)];
        let a = vec![vec![0.25, 0.75], vec![1.0, 1.0]];
        let out = kappa_left_matmul(&a, &z).unwrap();
        assert!((out[0].coords()[0] - 2.5).abs() < 1e-10);
        assert!((out[0].coords()[1] + 0.25).abs() < 1e-10);
        assert!((out[1].coords()[0] - 4.0).abs() < 1e-10);

        // doubled one-hot rows: row i becomes 2 ⊗ z_i
        let z = [pt(&[0.3, 0.0], -1.0), pt(&[0.0, 0.4], -1.0)];
        let a = vec![vec![2.0, 0.0], vec![0.0, 2.0]];
        let out = kappa_left_matmul(&a, &z).unwrap();
        for (o, zi) in out.iter().zip(&z) {
            let want = scalar_mul(2.0, zi);
            for (u, w) in o.coords().iter().zip(want.coords()) {
                assert!((u - w).abs() < 1e-12);
            }
        }

        // symmetric pair: both rows at the origin
        let z = [pt(&[0.5, 0.0], -1.0), pt(&[-0.5, 0.0], -1.0)];
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let out = kappa_left_matmul(&a, &z).unwrap();
        assert!(norm(out[0].coords()) < 1e-15);
        assert!(norm(out[1].coords()) < 1e-15);
    }

    #[test]
    fn lift_cases() {
        let o = lift_features(&[0.0, 0.0], hy(-1.0), LiftMode::Exp0).unwrap();
        assert_eq!(o.coords(), &[0.0, 0.0]);
        let e = lift_features(&[0.5, 0.0], hy(-1.0), LiftMode::Exp0).unwrap();
        assert!((e.coords()[0] - 0.5f64.tanh()).abs() < 1e-15);

        // rho mode: direct scalar evaluation of the projection formula
        let r = lift_features(&[0.5, 0.0], hy(-1.0), LiftMode::Rho).unwrap();
        let f = (1.0 - 0.5f64.cosh()) * 0.5;
        let expect = f * 0.5f64.sinh() * 0.5;
        assert!((r.coords()[0] - expect).abs() < 1e-15);
        assert!(norm(r.coords()) < 1.0, "rho lift must stay inside the ball");
        assert!(lift_features(&[1.0], Curvature::flat(), LiftMode::Rho).is_err());
    }

    #[test]
    fn clamping_keeps_points_inside_ball() {
        let p = pt(&[5.0, 0.0], -1.0);
        assert!(norm(p.coords()) <= 1.0 - BALL_MARGIN + 1e-12);
        assert!(p.is_valid());
    }

    fn arb_point(k: f64, dim: usize, max_r: f64) -> impl Strategy<Value = ManifoldVector> {
        prop::collection::vec(-1.0f64..1.0, dim).prop_map(move |v| {
            let n = norm(&v) + 1e-9;
            let r = max_r / k.abs().sqrt().max(1e-9);
            ManifoldVector::new(scale(&v, r / n * 0.9), Curvature::new(k).unwrap())
        })
    }

    proptest! {
        #[test]
        fn exp_log_round_trip(seed in 0u64..500, kidx in 0usize..6) {
            let kappas: [f64; 6] = [-2.0, -1.0, -0.1, 0.1, 1.0, 2.0];
            let k = kappas[kidx];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = 3;
            let x_raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = 0.5 / k.abs().sqrt();
            let x = ManifoldVector::new(scale(&x_raw, r / (norm(&x_raw) + 1e-9)), hy(k));
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let tv = TangentVector::new(v.clone(), x.clone());
            let back = log_map(&x, &exp_map(&x, &tv));
            let err = norm(&crate::vecmath::sub(back.coords(), &v)) / norm(&v).max(1e-12);
            prop_assert!(err < 1e-9, "round trip error {err} at kappa {k}");
        }

        #[test]
        fn distance_symmetry_and_identity(seed in 0u64..200) {
            for k in [-1.0f64, 1.0] {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k.to_bits());
                let mut mk = || -> Vec<f64> { (0..3).map(|_| rng.gen_range(-0.4..0.4)).collect() };
                let (a, b) = (mk(), mk());
                let x = ManifoldVector::new(a, hy(k));
                let y = ManifoldVector::new(b, hy(k));
                prop_assert!((ccs_distance(&x, &y) - ccs_distance(&y, &x)).abs() < 1e-12);
                prop_assert_eq!(ccs_distance(&x, &x), 0.0);
            }
        }

        #[test]
        fn mobius_left_identity_and_inverse(x in arb_point(-1.0, 3, 0.8)) {
            let zero = ManifoldVector::origin(3, hy(-1.0));
            let r = mobius_add(&zero, &x).unwrap();
            let d = norm(&crate::vecmath::sub(r.coords(), x.coords()));
            prop_assert!(d < 1e-12);
            let neg = ManifoldVector::new(scale(x.coords(), -1.0), hy(-1.0));
            let z = mobius_add(&neg, &x).unwrap();
            prop_assert!(norm(z.coords()) < 1e-12);
        }

        #[test]
        fn midpoint_weight_rescale_invariance(seed in 0u64..200, c in 0.1f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<ManifoldVector> = (0..4)
                .map(|_| {
                    let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.4..0.4)).collect();
                    ManifoldVector::new(v, hy(-1.0))
                })
                .collect();
            let w: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..1.0)).collect();
            let m1 = weighted_midpoint(&pts, &w).unwrap();
            let w2 = scale(&w, c);
            let m2 = weighted_midpoint(&pts, &w2).unwrap();
            let d = norm(&crate::vecmath::sub(m1.coords(), m2.coords()));
            prop_assert!(d < 1e-12);
        }
    }
}

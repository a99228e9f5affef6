//! κ-stereographic operations recorded on the tape.
//!
//! These mirror the plain kernels in [`crate::geometry`], with two
//! differences: every intermediate is a tape node so gradients flow, and the
//! curvature itself may be a node (κ = ±exp(raw)) so the loss is
//! differentiable with respect to raw curvature parameters. The plain
//! kernels double as the value oracle for this module's tests.

use crate::geometry::{ATANH_BOUND, BALL_MARGIN, DENOM_EPS, TAN_BOUND, ZERO_EPS};
use crate::tape::{Tape, UnaryFn, Var};

/// Curvature as seen by the tape.
#[derive(Clone, Copy, Debug)]
pub enum TapeKappa {
    Flat,
    Curved {
        /// Signed curvature value, length-1 node.
        kappa: Var,
        /// √|κ|, length-1 node.
        sqrt_abs: Var,
        /// +1 for spherical, −1 for hyperbolic; fixed by the space kind.
        sign: f64,
    },
}

impl TapeKappa {
    /// Realizes κ = sign·exp(raw) from a raw parameter node.
    pub fn from_raw(tape: &mut Tape, raw: Var, sign: f64) -> Self {
        assert!(sign == 1.0 || sign == -1.0, "curved space sign must be ±1");
        let abs = tape.unary(raw, UnaryFn::Exp);
        let kappa = tape.mul_const(abs, sign);
        let half_raw = tape.mul_const(raw, 0.5);
        let sqrt_abs = tape.unary(half_raw, UnaryFn::Exp);
        TapeKappa::Curved { kappa, sqrt_abs, sign }
    }

    /// A fixed, non-trainable curvature (0 gives the flat space).
    pub fn constant(tape: &mut Tape, kappa: f64) -> Self {
        if kappa == 0.0 {
            return TapeKappa::Flat;
        }
        let k = tape.constant_scalar(kappa);
        let s = tape.constant_scalar(kappa.abs().sqrt());
        TapeKappa::Curved { kappa: k, sqrt_abs: s, sign: kappa.signum() }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, TapeKappa::Flat)
    }

    pub fn value(&self, tape: &Tape) -> f64 {
        match self {
            TapeKappa::Flat => 0.0,
            TapeKappa::Curved { kappa, .. } => tape.scalar(*kappa),
        }
    }
}

fn trig(tape: &mut Tape, sign: f64, arg: Var) -> Var {
    if sign > 0.0 {
        let c = tape.clamp_abs(arg, TAN_BOUND);
        tape.unary(c, UnaryFn::Tan)
    } else {
        tape.unary(arg, UnaryFn::Tanh)
    }
}

fn trig_inv(tape: &mut Tape, sign: f64, arg: Var) -> Var {
    if sign > 0.0 {
        tape.unary(arg, UnaryFn::Atan)
    } else {
        let c = tape.clamp_abs(arg, ATANH_BOUND);
        tape.unary(c, UnaryFn::Atanh)
    }
}

/// Renormalizes hyperbolic points into the open ball; identity otherwise.
pub fn clamp_point(tape: &mut Tape, k: &TapeKappa, x: Var) -> Var {
    match k {
        TapeKappa::Curved { sqrt_abs, sign, .. } if *sign < 0.0 => {
            let inv = tape.unary(*sqrt_abs, UnaryFn::Recip);
            let max_norm = tape.mul_const(inv, 1.0 - BALL_MARGIN);
            tape.clamp_norm(x, max_norm)
        }
        _ => x,
    }
}

/// Conformal factor λ = 2/(1 + κ‖x‖²) as a scalar node.
pub fn lambda(tape: &mut Tape, k: &TapeKappa, x: Var) -> Var {
    match k {
        TapeKappa::Flat => tape.constant_scalar(2.0),
        TapeKappa::Curved { kappa, .. } => {
            let sq = tape.sq_norm(x);
            let t = tape.mul(*kappa, sq);
            let den = tape.add_const(t, 1.0);
            let den = tape.clamp_min(den, DENOM_EPS);
            let inv = tape.unary(den, UnaryFn::Recip);
            tape.mul_const(inv, 2.0)
        }
    }
}

/// Gyroaddition x ⊕_κ y; the result is clamped back into the manifold.
pub fn mobius_add(tape: &mut Tape, k: &TapeKappa, x: Var, y: Var) -> Var {
    match k {
        TapeKappa::Flat => tape.add(x, y),
        TapeKappa::Curved { kappa, .. } => {
            let xy = tape.dot(x, y);
            let x2 = tape.sq_norm(x);
            let y2 = tape.sq_norm(y);
            let kxy = tape.mul(*kappa, xy);
            let kx2 = tape.mul(*kappa, x2);
            let ky2 = tape.mul(*kappa, y2);
            // cx = 1 − 2κ⟨x,y⟩ − κ‖y‖²
            let two_kxy = tape.mul_const(kxy, 2.0);
            let s = tape.add(two_kxy, ky2);
            let ns = tape.neg(s);
            let cx = tape.add_const(ns, 1.0);
            // cy = 1 + κ‖x‖²
            let cy = tape.add_const(kx2, 1.0);
            // den = 1 − 2κ⟨x,y⟩ + κ²‖x‖²‖y‖² (non-negative; floored)
            let k2 = tape.mul(*kappa, *kappa);
            let x2y2 = tape.mul(x2, y2);
            let quad = tape.mul(k2, x2y2);
            let lin = tape.sub(quad, two_kxy);
            let den = tape.add_const(lin, 1.0);
            let den = tape.clamp_min(den, DENOM_EPS);
            let inv = tape.unary(den, UnaryFn::Recip);
            let ax = tape.mul(cx, inv);
            let ay = tape.mul(cy, inv);
            let xs = tape.scale_by(x, ax);
            let ys = tape.scale_by(y, ay);
            let out = tape.add(xs, ys);
            clamp_point(tape, k, out)
        }
    }
}

/// log_0(x).
pub fn log0(tape: &mut Tape, k: &TapeKappa, x: Var) -> Var {
    match k {
        TapeKappa::Flat => x,
        TapeKappa::Curved { sqrt_abs, sign, .. } => {
            let n = tape.norm(x);
            let n_safe = tape.clamp_min(n, ZERO_EPS);
            let arg = tape.mul(*sqrt_abs, n);
            let ti = trig_inv(tape, *sign, arg);
            let den = tape.mul(*sqrt_abs, n_safe);
            let s = tape.div(ti, den);
            tape.scale_by(x, s)
        }
    }
}

/// exp_0(v).
pub fn exp0(tape: &mut Tape, k: &TapeKappa, v: Var) -> Var {
    match k {
        TapeKappa::Flat => v,
        TapeKappa::Curved { sqrt_abs, sign, .. } => {
            let n = tape.norm(v);
            let n_safe = tape.clamp_min(n, ZERO_EPS);
            let arg = tape.mul(*sqrt_abs, n);
            let t = trig(tape, *sign, arg);
            let den = tape.mul(*sqrt_abs, n_safe);
            let s = tape.div(t, den);
            let out = tape.scale_by(v, s);
            clamp_point(tape, k, out)
        }
    }
}

/// exp_x(v).
pub fn exp_map(tape: &mut Tape, k: &TapeKappa, x: Var, v: Var) -> Var {
    match k {
        TapeKappa::Flat => tape.add(x, v),
        TapeKappa::Curved { sqrt_abs, sign, .. } => {
            let lx = lambda(tape, k, x);
            let n = tape.norm(v);
            let n_safe = tape.clamp_min(n, ZERO_EPS);
            let ln = tape.mul(lx, n);
            let half = tape.mul_const(ln, 0.5);
            let arg = tape.mul(*sqrt_abs, half);
            let t = trig(tape, *sign, arg);
            let den = tape.mul(*sqrt_abs, n_safe);
            let s = tape.div(t, den);
            let u = tape.scale_by(v, s);
            mobius_add(tape, k, x, u)
        }
    }
}

/// log_x(y).
pub fn log_map(tape: &mut Tape, k: &TapeKappa, x: Var, y: Var) -> Var {
    match k {
        TapeKappa::Flat => tape.sub(y, x),
        TapeKappa::Curved { sqrt_abs, sign, .. } => {
            let nx = tape.neg(x);
            let w = mobius_add(tape, k, nx, y);
            let n = tape.norm(w);
            let n_safe = tape.clamp_min(n, ZERO_EPS);
            let arg = tape.mul(*sqrt_abs, n);
            let ti = trig_inv(tape, *sign, arg);
            let two_ti = tape.mul_const(ti, 2.0);
            let lx = lambda(tape, k, x);
            let d1 = tape.mul(*sqrt_abs, lx);
            let den = tape.mul(d1, n_safe);
            let s = tape.div(two_ti, den);
            tape.scale_by(w, s)
        }
    }
}

/// Geodesic distance.
pub fn distance(tape: &mut Tape, k: &TapeKappa, x: Var, y: Var) -> Var {
    match k {
        TapeKappa::Flat => {
            let d = tape.sub(y, x);
            tape.norm(d)
        }
        TapeKappa::Curved { sqrt_abs, sign, .. } => {
            let nx = tape.neg(x);
            let w = mobius_add(tape, k, nx, y);
            let n = tape.norm(w);
            let arg = tape.mul(*sqrt_abs, n);
            let ti = trig_inv(tape, *sign, arg);
            let two_ti = tape.mul_const(ti, 2.0);
            tape.div(two_ti, *sqrt_abs)
        }
    }
}

pub fn sq_distance(tape: &mut Tape, k: &TapeKappa, x: Var, y: Var) -> Var {
    let d = distance(tape, k, x, y);
    tape.mul(d, d)
}

/// r ⊗ x with a constant scalar.
pub fn scalar_mul_const(tape: &mut Tape, k: &TapeKappa, r: f64, x: Var) -> Var {
    let t = log0(tape, k, x);
    let s = tape.mul_const(t, r);
    exp0(tape, k, s)
}

/// r ⊗ x with a scalar node (e.g. an attention weight).
pub fn scalar_mul(tape: &mut Tape, k: &TapeKappa, r: Var, x: Var) -> Var {
    let t = log0(tape, k, x);
    let s = tape.scale_by(t, r);
    exp0(tape, k, s)
}

/// M ⊗ x = exp_0(M·log_0(x)), mapping curvature `src` to curvature `tgt`
/// (pass the same value for an ordinary within-space transform).
pub fn matvec_kappa(
    tape: &mut Tape,
    src: &TapeKappa,
    tgt: &TapeKappa,
    m: Var,
    rows: usize,
    cols: usize,
    x: Var,
) -> Var {
    let t = log0(tape, src, x);
    let u = tape.matvec(m, rows, cols, t);
    exp0(tape, tgt, u)
}

/// f^⊗κ with a leaky rectifier in the tangent space at the origin.
pub fn apply_leaky_relu(tape: &mut Tape, k: &TapeKappa, x: Var, slope: f64) -> Var {
    let t = log0(tape, k, x);
    let a = tape.unary(t, UnaryFn::LeakyRelu(slope));
    exp0(tape, k, a)
}

/// Weighted gyromidpoint over `points` with scalar-node `weights`.
pub fn weighted_midpoint(
    tape: &mut Tape,
    k: &TapeKappa,
    points: &[Var],
    weights: &[Var],
) -> Var {
    assert!(!points.is_empty() && points.len() == weights.len());
    let lambdas: Vec<Var> = points.iter().map(|p| lambda(tape, k, *p)).collect();
    // den = Σ w_i (λ_i − 1)
    let mut den: Option<Var> = None;
    for (w, l) in weights.iter().zip(&lambdas) {
        let lm1 = tape.add_const(*l, -1.0);
        let term = tape.mul(*w, lm1);
        den = Some(match den {
            None => term,
            Some(d) => tape.add(d, term),
        });
    }
    let den = tape.clamp_magnitude(den.unwrap(), DENOM_EPS);
    let inv_den = tape.unary(den, UnaryFn::Recip);
    let mut acc: Option<Var> = None;
    for ((p, w), l) in points.iter().zip(weights).zip(&lambdas) {
        let wl = tape.mul(*w, *l);
        let c = tape.mul(wl, inv_den);
        let term = tape.scale_by(*p, c);
        acc = Some(match acc {
            None => term,
            Some(a) => tape.add(a, term),
        });
    }
    let acc = clamp_point(tape, k, acc.unwrap());
    scalar_mul_const(tape, k, 0.5, acc)
}

/// One row of A ⊠ Z: (Σ_j w_j) ⊗ mid_κ(points; w).
pub fn left_matmul_row(
    tape: &mut Tape,
    k: &TapeKappa,
    points: &[Var],
    weights: &[Var],
) -> Var {
    let mid = weighted_midpoint(tape, k, points, weights);
    let mut row_sum = weights[0];
    for w in &weights[1..] {
        row_sum = tape.add(row_sum, *w);
    }
    scalar_mul(tape, k, row_sum, mid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{self, Curvature, ManifoldVector, TangentVector};
    use crate::params::{ParamStore, Tensor};
    use crate::tape::grad_check;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, kappa: f64, dim: usize) -> Vec<f64> {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = crate::vecmath::norm(&v).max(1e-9);
        let r = rng.gen_range(0.05..0.6) / kappa.abs().sqrt();
        crate::vecmath::scale(&v, r / n)
    }

    /// Tape forwards must agree with the plain geometry kernels.
    #[test]
    fn tape_ops_match_plain_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for kappa in [-2.0, -1.0, -0.1, 0.1, 1.0, 2.0] {
            for _ in 0..20 {
                let c = Curvature::new(kappa).unwrap();
                let xs = random_point(&mut rng, kappa, 3);
                let ys = random_point(&mut rng, kappa, 3);
                let x_m = ManifoldVector::new(xs.clone(), c);
                let y_m = ManifoldVector::new(ys.clone(), c);

                let mut tape = Tape::new();
                let tk = TapeKappa::constant(&mut tape, kappa);
                let x = tape.leaf(xs.clone());
                let y = tape.leaf(ys.clone());

                let add = mobius_add(&mut tape, &tk, x, y);
                let want = geometry::mobius_add(&x_m, &y_m).unwrap();
                for (a, b) in tape.value(add).iter().zip(want.coords()) {
                    assert!((a - b).abs() < 1e-12, "mobius mismatch at kappa {kappa}");
                }

                let d = distance(&mut tape, &tk, x, y);
                assert!(
                    (tape.scalar(d) - geometry::ccs_distance(&x_m, &y_m)).abs() < 1e-12,
                    "distance mismatch at kappa {kappa}"
                );

                let l = log_map(&mut tape, &tk, x, y);
                let want = geometry::log_map(&x_m, &y_m);
                for (a, b) in tape.value(l).iter().zip(want.coords()) {
                    assert!((a - b).abs() < 1e-12, "log mismatch at kappa {kappa}");
                }

                let e = exp_map(&mut tape, &tk, x, l);
                let want = geometry::exp_map(&x_m, &TangentVector::new(tape.value(l).to_vec(), x_m.clone()));
                for (a, b) in tape.value(e).iter().zip(want.coords()) {
                    assert!((a - b).abs() < 1e-12, "exp mismatch at kappa {kappa}");
                }

                let w1 = tape.constant_scalar(0.7);
                let w2 = tape.constant_scalar(1.3);
                let m = weighted_midpoint(&mut tape, &tk, &[x, y], &[w1, w2]);
                let want = geometry::weighted_midpoint(&[x_m.clone(), y_m.clone()], &[0.7, 1.3]).unwrap();
                for (a, b) in tape.value(m).iter().zip(want.coords()) {
                    assert!((a - b).abs() < 1e-12, "midpoint mismatch at kappa {kappa}");
                }
            }
        }
    }

    /// Every primitive passes a finite-difference check at random points,
    /// including through the raw curvature parameter.
    #[test]
    fn primitives_pass_grad_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kappa in [-1.0f64, -0.1, 0.1, 1.0] {
            let sign = kappa.signum();
            for rep in 0..5 {
                let mut store = ParamStore::new();
                store.insert("x", Tensor::from_vec(vec![3], random_point(&mut rng, kappa, 3)));
                store.insert("y", Tensor::from_vec(vec![3], random_point(&mut rng, kappa, 3)));
                store.insert("raw", Tensor::scalar(kappa.abs().ln()));

                for which in 0..5 {
                    let err = grad_check(
                        |tape, bound| {
                            let tk = TapeKappa::from_raw(tape, bound["raw"], sign);
                            let (x, y) = (bound["x"], bound["y"]);
                            let out = match which {
                                0 => mobius_add(tape, &tk, x, y),
                                1 => {
                                    let d = distance(tape, &tk, x, y);
                                    return Ok(d);
                                }
                                2 => log_map(tape, &tk, x, y),
                                3 => exp_map(tape, &tk, x, y),
                                _ => {
                                    let w1 = tape.constant_scalar(0.6);
                                    let w2 = tape.constant_scalar(1.1);
                                    weighted_midpoint(tape, &tk, &[x, y], &[w1, w2])
                                }
                            };
                            Ok(tape.sq_norm(out))
                        },
                        &store,
                        1e-5,
                    )
                    .unwrap();
                    assert!(
                        err < 1e-4,
                        "primitive {which} grad error {err} at kappa {kappa} rep {rep}"
                    );
                }
            }
        }
    }

    #[test]
    fn distance_gradient_matches_finite_differences_at_origin_base() {
        // d(0, y)² at κ=−1 against central differences.
        let mut store = ParamStore::new();
        store.insert("y", Tensor::from_vec(vec![2], vec![0.3, -0.2]));
        let err = grad_check(
            |tape, bound| {
                let tk = TapeKappa::constant(tape, -1.0);
                let o = tape.constant(vec![0.0, 0.0]);
                Ok(sq_distance(tape, &tk, o, bound["y"]))
            },
            &store,
            1e-5,
        )
        .unwrap();
        assert!(err < 1e-4, "sq distance grad error {err}");
    }

    #[test]
    fn left_matmul_row_matches_plain_kernel() {
        let c = Curvature::new(-1.0).unwrap();
        let pts = [
            ManifoldVector::new(vec![0.2, 0.1], c),
            ManifoldVector::new(vec![-0.3, 0.25], c),
        ];
        let weights = [1.0, 1.0];
        let want = geometry::kappa_left_matmul(
            &[vec![1.0, 1.0], vec![1.0, 1.0]],
            &pts,
        )
        .unwrap();

        let mut tape = Tape::new();
        let tk = TapeKappa::constant(&mut tape, -1.0);
        let a = tape.leaf(pts[0].coords().to_vec());
        let b = tape.leaf(pts[1].coords().to_vec());
        let w1 = tape.constant_scalar(weights[0]);
        let w2 = tape.constant_scalar(weights[1]);
        let row = left_matmul_row(&mut tape, &tk, &[a, b], &[w1, w2]);
        for (got, wanted) in tape.value(row).iter().zip(want[0].coords()) {
            assert!((got - wanted).abs() < 1e-12);
        }
    }
}

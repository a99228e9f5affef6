//! Product-space attentional GNN encoder.
//!
//! Per component space: features are lifted onto the manifold, then L
//! attentional aggregation layers run entirely on the tape,
//!
//! ```text
//! Z⁽ˡ⁾ = σ^⊗κ( A⁽ˡ⁾ ⊠_κ (Z⁽ˡ⁻¹⁾ ⊗_κ W⁽ˡ⁻¹⁾) )
//! ```
//!
//! with A = I + Â, Â row-softmaxed intra-attention scores over the
//! neighborhood. A final inter-component attention layer weighs the
//! component embeddings and the output slice i is w_i ⊗ z_i.
//!
//! Parameter names (`{br}` is the branch tag, `alpha` or `beta`):
//!
//! ```text
//! sig.c{i}.raw              raw curvature (shared across branches)
//! enc.{br}.c{i}.l{l}.w      layer weight, d_in × d_out row-major
//! enc.{br}.c{i}.l{l}.theta  intra-attention vector, length 2·d_out
//! enc.{br}.c{i}.inter.w     inter-attention map, d_i × d_t
//! enc.{br}.inter.theta      inter-attention vector, length d_t
//! ```

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::diffgeo::{self, TapeKappa};
use crate::error::{Error, Result};
use crate::geometry::LiftMode;
use crate::graph::SparseAdjacency;
use crate::product::{Signature, SpaceKind};
use crate::tape::{Tape, UnaryFn, Var};

/// Number of stacked attentional aggregation layers.
pub const DEPTH: usize = 2;
/// Leaky-rectifier slope for the tangent-space nonlinearity.
pub const LEAKY_SLOPE: f64 = 0.2;

fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<f64> {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    (0..rows * cols).map(|_| rng.gen_range(-a..a)).collect()
}

/// Common tangent dimension for inter-component attention.
pub fn inter_dim(sig: &Signature) -> usize {
    sig.components().iter().map(|c| c.dim).max().unwrap_or(1)
}

/// Appends the shared raw-curvature parameters for a signature.
pub fn init_curvature_params(store: &mut crate::params::ParamStore, sig: &Signature) {
    for (i, c) in sig.components().iter().enumerate() {
        if c.kind != SpaceKind::Euclidean {
            store.insert(&format!("sig.c{i}.raw"), crate::params::Tensor::scalar(c.raw_curvature));
        }
    }
}

/// Appends one branch's encoder parameters.
pub fn init_encoder_params(
    store: &mut crate::params::ParamStore,
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    branch: &str,
    feat_dim: usize,
) {
    let d_t = inter_dim(sig);
    for (i, c) in sig.components().iter().enumerate() {
        let mut d_in = feat_dim;
        for l in 0..DEPTH {
            let d_out = c.dim;
            store.insert(
                &format!("enc.{branch}.c{i}.l{l}.w"),
                crate::params::Tensor::from_vec(vec![d_in, d_out], xavier(rng, d_in, d_out)),
            );
            store.insert(
                &format!("enc.{branch}.c{i}.l{l}.theta"),
                crate::params::Tensor::from_vec(vec![2 * d_out], xavier(rng, 2 * d_out, 1)),
            );
            d_in = d_out;
        }
        store.insert(
            &format!("enc.{branch}.c{i}.inter.w"),
            crate::params::Tensor::from_vec(vec![c.dim, d_t], xavier(rng, c.dim, d_t)),
        );
    }
    store.insert(
        &format!("enc.{branch}.inter.theta"),
        crate::params::Tensor::from_vec(vec![d_t], xavier(rng, d_t, 1)),
    );
}

/// Realizes each component's curvature as tape nodes (Euclidean → flat).
pub fn realize_tape_kappas(
    tape: &mut Tape,
    bound: &HashMap<String, Var>,
    sig: &Signature,
) -> Vec<TapeKappa> {
    sig.components()
        .iter()
        .enumerate()
        .map(|(i, c)| match c.kind {
            SpaceKind::Euclidean => TapeKappa::Flat,
            kind => TapeKappa::from_raw(tape, bound[&format!("sig.c{i}.raw")], kind.sign()),
        })
        .collect()
}

/// Lifts a Euclidean feature node onto the component manifold.
pub fn lift_tape(tape: &mut Tape, k: &TapeKappa, x: Var, mode: LiftMode) -> Var {
    match (mode, k) {
        (LiftMode::Exp0, _) | (LiftMode::Rho, TapeKappa::Flat) => diffgeo::exp0(tape, k, x),
        (LiftMode::Rho, TapeKappa::Curved { kappa, sqrt_abs, .. }) => {
            let n = tape.norm(x);
            let inv_s = tape.unary(*sqrt_abs, UnaryFn::Recip);
            let c = tape.mul(n, inv_s);
            let ch = tape.unary(c, UnaryFn::Cosh);
            let kch = tape.mul(*kappa, ch);
            let onep = tape.add_const(kch, 1.0);
            let f = tape.mul(onep, n);
            let sh = tape.unary(c, UnaryFn::Sinh);
            let fs = tape.mul(f, *sqrt_abs);
            let s = tape.mul(fs, sh);
            let out = tape.scale_by(x, s);
            diffgeo::clamp_point(tape, k, out)
        }
    }
}

/// Intra-component attention score σ(θᵀ(W·log₀(z_i) ‖ W·log₀(z_j))).
pub fn intra_attention_score(
    tape: &mut Tape,
    k: &TapeKappa,
    z_i: Var,
    z_j: Var,
    w: Var,
    w_rows: usize,
    w_cols: usize,
    theta: Var,
) -> Var {
    let ti = diffgeo::log0(tape, k, z_i);
    let tj = diffgeo::log0(tape, k, z_j);
    let hi = tape.matvec_t(w, w_rows, w_cols, ti);
    let hj = tape.matvec_t(w, w_rows, w_cols, tj);
    let cat = tape.concat(&[hi, hj]);
    let s = tape.dot(theta, cat);
    tape.unary(s, UnaryFn::Sigmoid)
}

/// Per-node output of one encoder forward pass.
pub struct EncoderOutput {
    /// Final component embeddings before fusion: `[component][node]`.
    pub components: Vec<Vec<Var>>,
    /// Inter-attention weights per node (length-K nodes).
    pub weights: Vec<Var>,
    /// Fused slices w_i ⊗ z_i: `[component][node]`.
    pub fused: Vec<Vec<Var>>,
}

/// One attentional aggregation layer over a whole component.
///
/// `zs` holds the layer input per node; attention is computed on the
/// transformed embeddings H = Z ⊗ W whose origin tangents are the W-mapped
/// input tangents, so scores follow σ(θᵀ(W log₀ z_i ‖ W log₀ z_j)).
fn layer_forward(
    tape: &mut Tape,
    k: &TapeKappa,
    graph: &SparseAdjacency,
    zs: &[Var],
    w: Var,
    d_in: usize,
    d_out: usize,
    theta: Var,
    slope: f64,
) -> Vec<Var> {
    let n = zs.len();
    // H = Z ⊗ W, and the tangents that both attention and aggregation reuse.
    let mut hs = Vec::with_capacity(n);
    let mut th = Vec::with_capacity(n);
    for z in zs {
        let t = diffgeo::log0(tape, k, *z);
        let u = tape.matvec_t(w, d_in, d_out, t);
        th.push(u);
        hs.push(diffgeo::exp0(tape, k, u));
    }
    let theta_l = tape.slice(theta, 0, d_out);
    let theta_r = tape.slice(theta, d_out, d_out);
    let a_part: Vec<Var> = th.iter().map(|t| tape.dot(theta_l, *t)).collect();
    let b_part: Vec<Var> = th.iter().map(|t| tape.dot(theta_r, *t)).collect();

    let one = tape.constant_scalar(1.0);
    (0..n)
        .map(|i| {
            let nbrs = graph.neighbors(i);
            let (points, weights) = if nbrs.is_empty() {
                // isolated node: self-loop row only
                (vec![hs[i]], vec![one])
            } else {
                let raw: Vec<Var> = nbrs
                    .iter()
                    .map(|(j, _)| {
                        let s = tape.add(a_part[i], b_part[*j]);
                        tape.unary(s, UnaryFn::Sigmoid)
                    })
                    .collect();
                let packed = tape.concat(&raw);
                let soft = tape.softmax(packed);
                let mut points = Vec::with_capacity(nbrs.len() + 1);
                let mut weights = Vec::with_capacity(nbrs.len() + 1);
                points.push(hs[i]);
                weights.push(one);
                for (idx, (j, _)) in nbrs.iter().enumerate() {
                    points.push(hs[*j]);
                    weights.push(tape.slice(soft, idx, 1));
                }
                (points, weights)
            };
            let agg = diffgeo::left_matmul_row(tape, k, &points, &weights);
            diffgeo::apply_leaky_relu(tape, k, agg, slope)
        })
        .collect()
}

/// Inter-component attention for one node: mean-pooled centroid in the
/// common tangent space, sigmoid scores of deviations, softmax weights.
fn inter_attention(
    tape: &mut Tape,
    kappas: &[TapeKappa],
    comps: &[Var],
    maps: &[(Var, usize, usize)],
    theta: Var,
) -> Var {
    let k_count = comps.len();
    let mut lifted = Vec::with_capacity(k_count);
    for (idx, z) in comps.iter().enumerate() {
        let t = diffgeo::log0(tape, &kappas[idx], *z);
        let (m, rows, cols) = maps[idx];
        lifted.push(tape.matvec_t(m, rows, cols, t));
    }
    let mut mu = lifted[0];
    for u in &lifted[1..] {
        mu = tape.add(mu, *u);
    }
    let mu = tape.mul_const(mu, 1.0 / k_count as f64);
    let scores: Vec<Var> = lifted
        .iter()
        .map(|u| {
            let dev = tape.sub(*u, mu);
            let s = tape.dot(theta, dev);
            tape.unary(s, UnaryFn::Sigmoid)
        })
        .collect();
    let packed = tape.concat(&scores);
    tape.softmax(packed)
}

/// Full encoder forward for one branch.
pub fn encoder_forward(
    tape: &mut Tape,
    bound: &HashMap<String, Var>,
    branch: &str,
    sig: &Signature,
    kappas: &[TapeKappa],
    graph: &SparseAdjacency,
    features: &[Var],
    lift: LiftMode,
) -> Result<EncoderOutput> {
    let n = graph.n();
    if features.len() != n {
        return Err(Error::shape(format!("{} feature rows for {} nodes", features.len(), n)));
    }
    let feat_dim = features[0].len();
    let d_t = inter_dim(sig);

    let mut components = Vec::with_capacity(sig.len());
    for (i, c) in sig.components().iter().enumerate() {
        let k = &kappas[i];
        let mut zs: Vec<Var> =
            features.iter().map(|f| lift_tape(tape, k, *f, lift)).collect();
        let mut d_in = feat_dim;
        for l in 0..DEPTH {
            let w = bound[&format!("enc.{branch}.c{i}.l{l}.w")];
            let theta = bound[&format!("enc.{branch}.c{i}.l{l}.theta")];
            zs = layer_forward(tape, k, graph, &zs, w, d_in, c.dim, theta, LEAKY_SLOPE);
            d_in = c.dim;
        }
        components.push(zs);
    }

    let maps: Vec<(Var, usize, usize)> = sig
        .components()
        .iter()
        .enumerate()
        .map(|(i, c)| (bound[&format!("enc.{branch}.c{i}.inter.w")], c.dim, d_t))
        .collect();
    let theta_inter = bound[&format!("enc.{branch}.inter.theta")];

    let mut weights = Vec::with_capacity(n);
    let mut fused = vec![Vec::with_capacity(n); sig.len()];
    for node in 0..n {
        let comps: Vec<Var> = components.iter().map(|c| c[node]).collect();
        let w = inter_attention(tape, kappas, &comps, &maps, theta_inter);
        for (i, z) in comps.iter().enumerate() {
            let wi = tape.slice(w, i, 1);
            fused[i].push(diffgeo::scalar_mul(tape, &kappas[i], wi, *z));
        }
        weights.push(w);
    }
    Ok(EncoderOutput { components, weights, fused })
}

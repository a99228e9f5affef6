//! Dual contrastive training: Riemannian projector, bilinear tangent-space
//! discriminator, single-view and cross-view InfoNCE losses, and the
//! training loop over the original graph and its diffused congruent view.
//!
//! The two encoder branches (`alpha` on the input graph, `beta` on the
//! congruent graph) have disjoint parameters; the projector and the raw
//! curvatures are shared. Discriminators start at zero, which makes the
//! first-epoch loss a closed form: J_S = 6n·ln(n−1) and J_C = 6n·ln 2.
//!
//! Projector parameter names (`{i}` is the component index):
//!
//! ```text
//! proj.c{i}.l{0,1}.m / .b   MLP_κ weight and bias per layer
//! proj.c{i}.fuse.m          per-component fusion transform
//! disc.s / disc.c           single-view / cross-view discriminators
//! ```

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffgeo::{self, TapeKappa};
use crate::diffusion::DiffusionConfig;
use crate::encoder::{self, EncoderOutput};
use crate::error::{Error, Result};
use crate::geometry::LiftMode;
use crate::graph::SparseAdjacency;
use crate::optim::{AdamConfig, OptimizerState};
use crate::params::{ParamStore, Tensor};
use crate::product::{parse_signature, ProductPoint, Signature, SpaceKind};
use crate::tape::{Tape, Var};

/// Standard curvatures of the three canonical Riemannian views.
pub const VIEW_KAPPAS: [f64; 3] = [-1.0, 0.0, 1.0];

/// Per-node hyperbolic / Euclidean / spherical views, each of dimension d_v.
pub struct RiemannianViews {
    /// `[view][node]`, view order (h, e, s) matching [`VIEW_KAPPAS`].
    pub views: [Vec<Var>; 3],
    pub view_dim: usize,
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub signature: String,
    pub epochs: usize,
    pub lr: f64,
    /// Cross-view loss weight γ.
    pub gamma: f64,
    pub view_dim: usize,
    pub lift: LiftMode,
    pub diffusion: DiffusionConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            signature: "h4x2,s4x2,e8".to_string(),
            epochs: 200,
            lr: 3e-3,
            gamma: 1.0,
            view_dim: 16,
            lift: LiftMode::Exp0,
            diffusion: DiffusionConfig::default(),
            seed: 7,
        }
    }
}

/// One epoch of the loss trace.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub j_s: f64,
    pub j_c: f64,
    pub j: f64,
    /// Wall-clock time; excluded from persisted traces so identical runs
    /// stay byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

pub struct TrainResult {
    pub params: ParamStore,
    pub trace: Vec<EpochStats>,
    pub signature: Signature,
}

/// Initializes every trainable tensor for the full model.
pub fn init_model_params(
    sig: &Signature,
    feat_dim: usize,
    view_dim: usize,
    seed: u64,
) -> ParamStore {
    let mut store = ParamStore::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    encoder::init_curvature_params(&mut store, sig);
    encoder::init_encoder_params(&mut store, &mut rng, sig, "alpha", feat_dim);
    encoder::init_encoder_params(&mut store, &mut rng, sig, "beta", feat_dim);
    for (i, c) in sig.components().iter().enumerate() {
        let d = c.dim;
        store.insert(&format!("proj.c{i}.l0.m"), Tensor::from_vec(vec![d, view_dim], xavier(&mut rng, d, view_dim)));
        store.insert(&format!("proj.c{i}.l0.b"), Tensor::zeros(vec![view_dim]));
        store.insert(&format!("proj.c{i}.l1.m"), Tensor::from_vec(vec![view_dim, view_dim], xavier(&mut rng, view_dim, view_dim)));
        store.insert(&format!("proj.c{i}.l1.b"), Tensor::zeros(vec![view_dim]));
        store.insert(&format!("proj.c{i}.fuse.m"), Tensor::from_vec(vec![view_dim, view_dim], xavier(&mut rng, view_dim, view_dim)));
    }
    // zero-initialized discriminators make the init loss a self-test
    store.insert("disc.s", Tensor::zeros(vec![view_dim, view_dim]));
    store.insert("disc.c", Tensor::zeros(vec![view_dim, view_dim]));
    store
}

fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<f64> {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    (0..rows * cols).map(|_| rng.gen_range(-a..a)).collect()
}

/// One MLP_κ layer: σ^⊗κ(b ⊕_κ (M ⊗_κ x)) mapping curvature `src` → `tgt`.
pub fn mlp_kappa(
    tape: &mut Tape,
    src: &TapeKappa,
    tgt: &TapeKappa,
    m: Var,
    rows: usize,
    cols: usize,
    b: Var,
    x: Var,
    activation: Option<f64>,
) -> Var {
    let mx = {
        let t = diffgeo::log0(tape, src, x);
        let u = tape.matvec_t(m, rows, cols, t);
        diffgeo::exp0(tape, tgt, u)
    };
    let bp = diffgeo::clamp_point(tape, tgt, b);
    let y = diffgeo::mobius_add(tape, tgt, bp, mx);
    match activation {
        Some(slope) => diffgeo::apply_leaky_relu(tape, tgt, y, slope),
        None => y,
    }
}

/// Maps the encoder output into the three standard-curvature views. Each
/// fused slice runs through the shared two-layer MLP_κ into its kind's
/// standard space; slices of one kind are combined with a gyromidpoint
/// weighted by the inter-attention weights. Kinds with no components yield
/// the origin.
pub fn project_views(
    tape: &mut Tape,
    bound: &HashMap<String, Var>,
    sig: &Signature,
    kappas: &[TapeKappa],
    enc: &EncoderOutput,
    view_dim: usize,
) -> RiemannianViews {
    let n = enc.weights.len();
    let std_kappas: Vec<TapeKappa> =
        VIEW_KAPPAS.iter().map(|k| TapeKappa::constant(tape, *k)).collect();
    let kind_index = |kind: SpaceKind| match kind {
        SpaceKind::Hyperbolic => 0usize,
        SpaceKind::Euclidean => 1,
        SpaceKind::Spherical => 2,
    };

    let mut views: [Vec<Var>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for node in 0..n {
        let mut per_kind: [Vec<(Var, Var)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for (i, c) in sig.components().iter().enumerate() {
            let vi = kind_index(c.kind);
            let tgt = &std_kappas[vi];
            let x = enc.fused[i][node];
            let m0 = bound[&format!("proj.c{i}.l0.m")];
            let b0 = bound[&format!("proj.c{i}.l0.b")];
            let h0 = mlp_kappa(
                tape, &kappas[i], tgt, m0, c.dim, view_dim, b0, x,
                Some(encoder::LEAKY_SLOPE),
            );
            let m1 = bound[&format!("proj.c{i}.l1.m")];
            let b1 = bound[&format!("proj.c{i}.l1.b")];
            let h1 = mlp_kappa(tape, tgt, tgt, m1, view_dim, view_dim, b1, h0, None);
            let fm = bound[&format!("proj.c{i}.fuse.m")];
            let f = {
                let t = diffgeo::log0(tape, tgt, h1);
                let u = tape.matvec_t(fm, view_dim, view_dim, t);
                diffgeo::exp0(tape, tgt, u)
            };
            let w = tape.slice(enc.weights[node], i, 1);
            per_kind[vi].push((f, w));
        }
        for (vi, members) in per_kind.iter().enumerate() {
            let v = if members.is_empty() {
                tape.constant(vec![0.0; view_dim])
            } else {
                let points: Vec<Var> = members.iter().map(|(p, _)| *p).collect();
                let weights: Vec<Var> = members.iter().map(|(_, w)| *w).collect();
                diffgeo::weighted_midpoint(tape, &std_kappas[vi], &points, &weights)
            };
            views[vi].push(v);
        }
    }
    RiemannianViews { views, view_dim }
}

/// Bilinear tangent-space agreement: (log₀ x)ᵀ D (log₀ y).
pub fn discriminate(
    tape: &mut Tape,
    d: Var,
    dim: usize,
    kx: &TapeKappa,
    x: Var,
    ky: &TapeKappa,
    y: Var,
) -> Var {
    let tx = diffgeo::log0(tape, kx, x);
    let ty = diffgeo::log0(tape, ky, y);
    let dy = tape.matvec(d, dim, dim, ty);
    tape.dot(tx, dy)
}

/// One InfoNCE term −log(exp(pos)/Σ exp(neg)) = lse(negs) − pos.
pub fn info_nce_term(tape: &mut Tape, pos: Var, negs: Var) -> Var {
    let lse = tape.logsumexp(negs);
    tape.sub(lse, pos)
}

fn view_tangents(tape: &mut Tape, views: &RiemannianViews) -> [Vec<Var>; 3] {
    let mut out: [Vec<Var>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (vi, kappa) in VIEW_KAPPAS.iter().enumerate() {
        let k = TapeKappa::constant(tape, *kappa);
        out[vi] = views.views[vi].iter().map(|x| diffgeo::log0(tape, &k, *x)).collect();
    }
    out
}

fn drop_index(tape: &mut Tape, scores: Var, i: usize, n: usize) -> Var {
    if i == 0 {
        tape.slice(scores, 1, n - 1)
    } else if i == n - 1 {
        tape.slice(scores, 0, n - 1)
    } else {
        let head = tape.slice(scores, 0, i);
        let tail = tape.slice(scores, i + 1, n - 1 - i);
        tape.concat(&[head, tail])
    }
}

/// Directed single-view loss: anchors in `ta`, positives/negatives in `tb`.
fn single_view_directed(
    tape: &mut Tape,
    d: Var,
    dim: usize,
    ta: &[Var],
    tb: &[Var],
) -> Var {
    let n = ta.len();
    let stack = tape.concat(tb);
    let mut total: Option<Var> = None;
    for i in 0..n {
        let u = tape.matvec_t(d, dim, dim, ta[i]); // Dᵀ t_i, so scores_j = t_iᵀ D t_j
        let scores = tape.matvec(stack, n, dim, u);
        let pos = tape.slice(scores, i, 1);
        let negs = drop_index(tape, scores, i, n);
        let term = info_nce_term(tape, pos, negs);
        total = Some(match total {
            None => term,
            Some(t) => tape.add(t, term),
        });
    }
    total.expect("n >= 2 checked by caller")
}

/// J_S: both directions of the single-view contrast, summed over the three
/// Riemannian views and all nodes. Requires n ≥ 2.
pub fn loss_single_view(
    tape: &mut Tape,
    views_alpha: &RiemannianViews,
    views_beta: &RiemannianViews,
    d_s: Var,
) -> Result<Var> {
    let n = views_alpha.views[0].len();
    if n < 2 {
        return Err(Error::invalid("single-view contrast needs at least 2 nodes"));
    }
    let dim = views_alpha.view_dim;
    let ta = view_tangents(tape, views_alpha);
    let tb = view_tangents(tape, views_beta);
    let mut total: Option<Var> = None;
    for vi in 0..3 {
        let fwd = single_view_directed(tape, d_s, dim, &ta[vi], &tb[vi]);
        let bwd = single_view_directed(tape, d_s, dim, &tb[vi], &ta[vi]);
        let dir = tape.add(fwd, bwd);
        total = Some(match total {
            None => dir,
            Some(t) => tape.add(t, dir),
        });
    }
    Ok(total.unwrap())
}

/// Directed cross-view loss: for anchor view x of node i, the positive is
/// view x of node i in the other branch and the negatives are that node's
/// two other views there.
fn cross_view_directed(
    tape: &mut Tape,
    d: Var,
    dim: usize,
    ta: &[Vec<Var>; 3],
    tb: &[Vec<Var>; 3],
) -> Var {
    let n = ta[0].len();
    let mut total: Option<Var> = None;
    for anchor in 0..3 {
        for i in 0..n {
            let u = tape.matvec_t(d, dim, dim, ta[anchor][i]);
            let pos = tape.dot(u, tb[anchor][i]);
            let negs: Vec<Var> = (0..3)
                .filter(|other| *other != anchor)
                .map(|other| tape.dot(u, tb[other][i]))
                .collect();
            let packed = tape.concat(&negs);
            let term = info_nce_term(tape, pos, packed);
            total = Some(match total {
                None => term,
                Some(t) => tape.add(t, term),
            });
        }
    }
    total.expect("three views always present")
}

/// J_C: both directions of the cross-view contrast.
pub fn loss_cross_view(
    tape: &mut Tape,
    views_alpha: &RiemannianViews,
    views_beta: &RiemannianViews,
    d_c: Var,
) -> Var {
    let dim = views_alpha.view_dim;
    let ta = view_tangents(tape, views_alpha);
    let tb = view_tangents(tape, views_beta);
    let fwd = cross_view_directed(tape, d_c, dim, &ta, &tb);
    let bwd = cross_view_directed(tape, d_c, dim, &tb, &ta);
    tape.add(fwd, bwd)
}

/// J = J_S + γ·J_C.
pub fn dual_loss(tape: &mut Tape, j_s: Var, j_c: Var, gamma: f64) -> Var {
    let weighted = tape.mul_const(j_c, gamma);
    tape.add(j_s, weighted)
}

/// Builds the full dual loss on a tape; shared by training and grad checks.
pub fn build_dual_loss(
    tape: &mut Tape,
    bound: &HashMap<String, Var>,
    sig: &Signature,
    graph_alpha: &SparseAdjacency,
    graph_beta: &SparseAdjacency,
    features: &[Vec<f64>],
    cfg: &TrainConfig,
) -> Result<(Var, Var, Var)> {
    let kappas = encoder::realize_tape_kappas(tape, bound, sig);
    let fv: Vec<Var> = features.iter().map(|f| tape.constant(f.clone())).collect();
    let enc_a = encoder::encoder_forward(
        tape, bound, "alpha", sig, &kappas, graph_alpha, &fv, cfg.lift,
    )?;
    let enc_b = encoder::encoder_forward(
        tape, bound, "beta", sig, &kappas, graph_beta, &fv, cfg.lift,
    )?;
    let views_a = project_views(tape, bound, sig, &kappas, &enc_a, cfg.view_dim);
    let views_b = project_views(tape, bound, sig, &kappas, &enc_b, cfg.view_dim);
    let j_s = loss_single_view(tape, &views_a, &views_b, bound["disc.s"])?;
    let j_c = loss_cross_view(tape, &views_a, &views_b, bound["disc.c"]);
    let j = dual_loss(tape, j_s, j_c, cfg.gamma);
    Ok((j_s, j_c, j))
}

/// Full training loop. The congruent graph is computed once and cached;
/// each epoch records the dual loss on a fresh tape and applies one
/// adaptive-moment step over every parameter, curvatures included.
pub fn train(
    graph: &SparseAdjacency,
    features: &[Vec<f64>],
    cfg: &TrainConfig,
) -> Result<TrainResult> {
    if graph.n() < 2 {
        return Err(Error::invalid("training needs at least 2 nodes"));
    }
    if features.len() != graph.n() {
        return Err(Error::shape(format!(
            "{} feature rows for {} nodes",
            features.len(),
            graph.n()
        )));
    }
    if cfg.epochs == 0 {
        return Err(Error::invalid("epochs must be at least 1"));
    }
    let sig = parse_signature(&cfg.signature)?;
    let feat_dim = features[0].len();
    let mut params = init_model_params(&sig, feat_dim, cfg.view_dim, cfg.seed);
    let mut opt = OptimizerState::new(&params, AdamConfig::with_lr(cfg.lr));
    let graph_beta = crate::diffusion::congruent_graph(graph, &cfg.diffusion)?;

    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let started = Instant::now();
        let mut tape = Tape::new();
        let bound = tape.bind(&params);
        let (j_s, j_c, j) =
            build_dual_loss(&mut tape, &bound, &sig, graph, &graph_beta, features, cfg)?;
        let (js_v, jc_v, j_v) = (tape.scalar(j_s), tape.scalar(j_c), tape.scalar(j));
        if !j_v.is_finite() {
            return Err(Error::Gradient(format!(
                "non-finite loss {j_v} at epoch {epoch} (J_S={js_v}, J_C={jc_v})"
            )));
        }
        let grads = tape.gradients(j)?;
        opt.step(&mut params, &grads).map_err(|e| {
            Error::Gradient(format!("epoch {epoch}: {e}"))
        })?;
        trace.push(EpochStats {
            epoch,
            j_s: js_v,
            j_c: jc_v,
            j: j_v,
            wall_ms: Some(started.elapsed().as_millis() as u64),
        });
    }
    let signature = signature_with_raws(&sig, &params);
    Ok(TrainResult { params, trace, signature })
}

/// Copies the learned raw curvatures from a store back into a signature.
pub fn signature_with_raws(sig: &Signature, store: &ParamStore) -> Signature {
    let mut out = sig.clone();
    for i in 0..sig.len() {
        let name = format!("sig.c{i}.raw");
        if store.contains(&name) {
            if let Ok(t) = store.tensor(&name) {
                out.set_raw_curvature(i, t.data()[0]);
            }
        }
    }
    out
}

/// Frozen-encoder embeddings of every node (the `alpha` branch output).
pub fn embed(
    params: &ParamStore,
    sig: &Signature,
    graph: &SparseAdjacency,
    features: &[Vec<f64>],
    lift: LiftMode,
) -> Result<Vec<ProductPoint>> {
    let realized = signature_with_raws(sig, params);
    let mut tape = Tape::new();
    let bound = tape.bind(params);
    let kappas = encoder::realize_tape_kappas(&mut tape, &bound, &realized);
    let fv: Vec<Var> = features.iter().map(|f| tape.constant(f.clone())).collect();
    let enc = encoder::encoder_forward(
        &mut tape, &bound, "alpha", &realized, &kappas, graph, &fv, lift,
    )?;
    let mut out = Vec::with_capacity(graph.n());
    for node in 0..graph.n() {
        let mut flat = Vec::with_capacity(realized.total_dim());
        for comp in &enc.fused {
            flat.extend_from_slice(tape.value(comp[node]));
        }
        out.push(realized.split(&flat)?);
    }
    Ok(out)
}

//! Downstream evaluation on frozen embeddings: Fermi-Dirac link prediction
//! scored by AUC, and centroid-based node classification.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diffgeo::{self, TapeKappa};
use crate::error::{Error, Result};
use crate::geometry::exp_origin;
use crate::optim::{AdamConfig, OptimizerState};
use crate::params::{ParamStore, Tensor};
use crate::product::{product_sq_distance, ProductPoint, Signature};
use crate::tape::{Tape, Var};

#[derive(Clone, Copy, Debug)]
pub struct FermiDiracConfig {
    /// Offset in squared-distance units.
    pub r: f64,
    /// Temperature, strictly positive.
    pub t: f64,
}

impl Default for FermiDiracConfig {
    fn default() -> Self {
        FermiDiracConfig { r: 2.0, t: 1.0 }
    }
}

impl FermiDiracConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) {
            return Err(Error::invalid(format!("fermi temperature {} must be positive", self.t)));
        }
        if !self.r.is_finite() {
            return Err(Error::invalid("fermi offset must be finite"));
        }
        Ok(())
    }
}

/// Edge probability 1/(exp((d² − r)/t) + 1); strictly decreasing in d².
pub fn fermi_dirac_prob(sq_dist: f64, cfg: &FermiDiracConfig) -> f64 {
    1.0 / (((sq_dist - cfg.r) / cfg.t).exp() + 1.0)
}

/// Scores edges by decoder probability, chunked over `threads` workers.
/// Each score is independent, so the result is identical at any thread count.
pub fn score_edges(
    embeddings: &[ProductPoint],
    edges: &[(usize, usize)],
    cfg: &FermiDiracConfig,
    threads: usize,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let score_one = |&(a, b): &(usize, usize)| -> Result<f64> {
        let d2 = product_sq_distance(&embeddings[a], &embeddings[b])?;
        Ok(fermi_dirac_prob(d2, cfg))
    };
    let workers = threads.max(1).min(edges.len().max(1));
    if workers <= 1 {
        return edges.iter().map(score_one).collect();
    }
    let mut out = vec![0.0; edges.len()];
    let chunk = edges.len().div_ceil(workers);
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for (slot, work) in out.chunks_mut(chunk).zip(edges.chunks(chunk)) {
            handles.push(scope.spawn(move || -> Result<()> {
                for (o, e) in slot.iter_mut().zip(work) {
                    *o = score_one(e)?;
                }
                Ok(())
            }));
        }
        for h in handles {
            h.join().expect("scoring worker panicked")?;
        }
        Ok(())
    })?;
    Ok(out)
}

/// Rank-formulation AUC with ties counted 1/2: the fraction of
/// (positive, negative) pairs ranked correctly.
pub fn auc_from_scores(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::invalid("AUC needs nonempty positive and negative score sets"));
    }
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|s| (*s, true))
        .chain(neg.iter().map(|s| (*s, false)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("scores must not be NaN"));
    // average ranks over tie groups (1-based ranks)
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let avg_rank = ((i + 1) + j) as f64 / 2.0;
        for item in &all[i..j] {
            if item.1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let p = pos.len() as f64;
    let n = neg.len() as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Decoder AUC over disjoint positive/negative edge sets.
pub fn link_pred_auc(
    embeddings: &[ProductPoint],
    pos_edges: &[(usize, usize)],
    neg_edges: &[(usize, usize)],
    cfg: &FermiDiracConfig,
    threads: usize,
) -> Result<f64> {
    let pos = score_edges(embeddings, pos_edges, cfg, threads)?;
    let neg = score_edges(embeddings, neg_edges, cfg, threads)?;
    auc_from_scores(&pos, &neg)
}

/// ξ_c = d_P(μ_c, z): the vector of product distances to each centroid.
pub fn centroid_encoding(z: &ProductPoint, centroids: &[ProductPoint]) -> Result<Vec<f64>> {
    centroids
        .iter()
        .map(|mu| Ok(product_sq_distance(mu, z)?.sqrt()))
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifierConfig {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    /// Scale of the Gaussian tangent noise behind exp_0 centroid init.
    pub init_scale: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { epochs: 300, lr: 0.1, seed: 1, init_scale: 0.1 }
    }
}

/// Centroid classifier: trainable product-space centroids plus a linear
/// map over the distance encoding, trained with softmax cross-entropy.
#[derive(Clone, Debug)]
pub struct CentroidClassifier {
    pub centroids: Vec<ProductPoint>,
    /// C×C row-major class weights.
    pub weights: Vec<f64>,
    pub n_classes: usize,
}

impl CentroidClassifier {
    pub fn class_scores(&self, z: &ProductPoint) -> Result<Vec<f64>> {
        let xi = centroid_encoding(z, &self.centroids)?;
        Ok(crate::vecmath::matvec(&self.weights, self.n_classes, self.n_classes, &xi))
    }
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn classify_predict(clf: &CentroidClassifier, z: &ProductPoint) -> Result<usize> {
    if clf.n_classes == 1 {
        return Ok(0);
    }
    Ok(argmax(&clf.class_scores(z)?))
}

/// Trains centroids and class weights on the masked nodes by gradient
/// descent on multinomial cross-entropy over softmaxed W·ξ scores.
pub fn classify_train(
    embeddings: &[ProductPoint],
    labels: &[usize],
    train_mask: &[bool],
    sig: &Signature,
    cfg: &ClassifierConfig,
) -> Result<CentroidClassifier> {
    if embeddings.len() != labels.len() || embeddings.len() != train_mask.len() {
        return Err(Error::shape("embeddings, labels and mask must align"));
    }
    let n_classes = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    if n_classes == 0 {
        return Err(Error::invalid("no labels"));
    }
    let curvatures = sig.curvatures();
    if n_classes == 1 {
        return Ok(CentroidClassifier {
            centroids: vec![sig.origin()],
            weights: vec![0.0],
            n_classes: 1,
        });
    }
    let train_idx: Vec<usize> =
        (0..labels.len()).filter(|i| train_mask[*i]).collect();
    let distinct: std::collections::BTreeSet<usize> =
        train_idx.iter().map(|i| labels[*i]).collect();
    if distinct.len() < 2 {
        return Err(Error::invalid("training mask covers a single class"));
    }

    // centroids start at exp_0 of small Gaussian tangent noise
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = ParamStore::new();
    for c in 0..n_classes {
        let mut flat = Vec::with_capacity(sig.total_dim());
        for (comp, kappa) in sig.components().iter().zip(&curvatures) {
            let noise: Vec<f64> = (0..comp.dim)
                .map(|_| {
                    // Box-Muller from two uniforms
                    let u1: f64 = rng.gen_range(1e-12..1.0);
                    let u2: f64 = rng.gen_range(0.0..1.0);
                    cfg.init_scale
                        * (-2.0 * u1.ln()).sqrt()
                        * (2.0 * std::f64::consts::PI * u2).cos()
                })
                .collect();
            flat.extend_from_slice(exp_origin(&noise, *kappa).coords());
        }
        params.insert(&format!("clf.centroid{c}"), Tensor::from_vec(vec![sig.total_dim()], flat));
    }
    params.insert("clf.w", Tensor::zeros(vec![n_classes, n_classes]));

    let offsets = sig.offsets();
    let mut opt = OptimizerState::new(&params, AdamConfig::with_lr(cfg.lr));
    for _ in 0..cfg.epochs {
        let mut tape = Tape::new();
        let bound = tape.bind(&params);
        let kappas: Vec<TapeKappa> =
            curvatures.iter().map(|c| TapeKappa::constant(&mut tape, c.kappa())).collect();
        // per class, the clamped centroid slices
        let centroid_slices: Vec<Vec<Var>> = (0..n_classes)
            .map(|c| {
                let flat = bound[&format!("clf.centroid{c}")];
                sig.components()
                    .iter()
                    .enumerate()
                    .map(|(i, comp)| {
                        let s = tape.slice(flat, offsets[i], comp.dim);
                        diffgeo::clamp_point(&mut tape, &kappas[i], s)
                    })
                    .collect()
            })
            .collect();
        let w = bound["clf.w"];
        let mut loss: Option<Var> = None;
        for &i in &train_idx {
            let xi: Vec<Var> = centroid_slices
                .iter()
                .map(|slices| {
                    let mut sq: Option<Var> = None;
                    for (ci, slice) in slices.iter().enumerate() {
                        let z = tape.constant(embeddings[i].slices()[ci].coords().to_vec());
                        let d2 = diffgeo::sq_distance(&mut tape, &kappas[ci], *slice, z);
                        sq = Some(match sq {
                            None => d2,
                            Some(s) => tape.add(s, d2),
                        });
                    }
                    let sq = tape.clamp_min(sq.unwrap(), 1e-30);
                    tape.unary(sq, crate::tape::UnaryFn::Sqrt)
                })
                .collect();
            let xi = tape.concat(&xi);
            let scores = tape.matvec(w, n_classes, n_classes, xi);
            let lse = tape.logsumexp(scores);
            let gold = tape.slice(scores, labels[i], 1);
            let term = tape.sub(lse, gold);
            loss = Some(match loss {
                None => term,
                Some(l) => tape.add(l, term),
            });
        }
        let loss = loss.expect("train mask nonempty");
        let grads = tape.gradients(loss)?;
        opt.step(&mut params, &grads)?;
    }

    let centroids: Vec<ProductPoint> = (0..n_classes)
        .map(|c| sig.split(params.tensor(&format!("clf.centroid{c}")).unwrap().data()))
        .collect::<Result<_>>()?;
    Ok(CentroidClassifier {
        centroids,
        weights: params.tensor("clf.w").unwrap().data().to_vec(),
        n_classes,
    })
}

/// Fraction of masked predictions that match the gold labels.
pub fn accuracy(pred: &[usize], gold: &[usize], mask: &[bool]) -> Result<f64> {
    if pred.len() != gold.len() || pred.len() != mask.len() {
        return Err(Error::shape("prediction, gold and mask lengths differ"));
    }
    let total = mask.iter().filter(|m| **m).count();
    if total == 0 {
        return Err(Error::invalid("empty evaluation mask"));
    }
    let correct = (0..pred.len()).filter(|i| mask[*i] && pred[*i] == gold[*i]).count();
    Ok(correct as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::parse_signature;
    use rand::{Rng, SeedableRng};

    #[test]
    fn fermi_dirac_anchor_points() {
        let cfg = FermiDiracConfig { r: 2.0, t: 1.0 };
        assert!((fermi_dirac_prob(2.0, &cfg) - 0.5).abs() < 1e-15);
        assert!((fermi_dirac_prob(2.0 + 3f64.ln(), &cfg) - 0.25).abs() < 1e-15);
        assert_eq!(fermi_dirac_prob(1e9, &cfg), 0.0);
        let cfg = FermiDiracConfig { r: 0.5, t: 2.0 };
        assert!((fermi_dirac_prob(0.5, &cfg) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fermi_dirac_monotone_decreasing() {
        let cfg = FermiDiracConfig::default();
        let mut last = f64::INFINITY;
        for i in 0..200 {
            let p = fermi_dirac_prob(i as f64 * 0.1, &cfg);
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn auc_cases() {
        assert_eq!(auc_from_scores(&[0.9, 0.8], &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(auc_from_scores(&[0.5, 0.5], &[0.5, 0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(auc_from_scores(&[0.9, 0.8], &[0.1, 0.85]).unwrap(), 0.75);
        assert!(auc_from_scores(&[], &[0.5]).is_err());
    }

    fn brute_force_auc(pos: &[f64], neg: &[f64]) -> f64 {
        let mut score = 0.0;
        for p in pos {
            for n in neg {
                if p > n {
                    score += 1.0;
                } else if p == n {
                    score += 0.5;
                }
            }
        }
        score / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn auc_equals_brute_force_pair_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let np = rng.gen_range(1..30);
            let nn = rng.gen_range(1..30);
            // quantized scores so ties actually occur
            let pos: Vec<f64> = (0..np).map(|_| rng.gen_range(0..10) as f64 / 10.0).collect();
            let neg: Vec<f64> = (0..nn).map(|_| rng.gen_range(0..10) as f64 / 10.0).collect();
            let a = auc_from_scores(&pos, &neg).unwrap();
            let b = brute_force_auc(&pos, &neg);
            assert_eq!(a, b, "rank AUC must equal pair counting exactly");
        }
    }

    #[test]
    fn centroid_encoding_cases() {
        let sig = parse_signature("e1").unwrap();
        let centroids = vec![sig.split(&[0.0]).unwrap(), sig.split(&[3.0]).unwrap()];
        let z = sig.split(&[1.0]).unwrap();
        assert_eq!(centroid_encoding(&z, &centroids).unwrap(), vec![1.0, 2.0]);
        assert_eq!(centroid_encoding(&centroids[0], &centroids).unwrap()[0], 0.0);
    }

    #[test]
    fn scoring_is_thread_count_invariant() {
        let sig = parse_signature("h2,e2").unwrap();
        let emb: Vec<ProductPoint> = (0..6)
            .map(|i| {
                sig.split(&[0.05 * i as f64, -0.03 * i as f64, i as f64 * 0.2, 1.0]).unwrap()
            })
            .collect();
        let edges: Vec<(usize, usize)> = (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).collect();
        let cfg = FermiDiracConfig::default();
        let s1 = score_edges(&emb, &edges, &cfg, 1).unwrap();
        let s4 = score_edges(&emb, &edges, &cfg, 4).unwrap();
        for (a, b) in s1.iter().zip(&s4) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    fn separable_toy() -> (Signature, Vec<ProductPoint>, Vec<usize>) {
        let sig = parse_signature("h2,e2").unwrap();
        let mut emb = Vec::new();
        let mut labels = Vec::new();
        for i in 0..5 {
            let t = i as f64 * 0.02;
            emb.push(sig.split(&[0.5 + t, 0.0, 2.0 + t, 0.0]).unwrap());
            labels.push(0);
            emb.push(sig.split(&[-0.5 - t, 0.0, -2.0 - t, 0.0]).unwrap());
            labels.push(1);
        }
        (sig, emb, labels)
    }

    #[test]
    fn classifier_separates_toy_set() {
        let (sig, emb, labels) = separable_toy();
        let mask = vec![true; emb.len()];
        let clf = classify_train(&emb, &labels, &mask, &sig, &ClassifierConfig::default()).unwrap();
        let pred: Vec<usize> =
            emb.iter().map(|z| classify_predict(&clf, z).unwrap()).collect();
        assert_eq!(accuracy(&pred, &labels, &mask).unwrap(), 1.0);
    }

    #[test]
    fn classifier_degenerate_and_error_cases() {
        let (sig, emb, labels) = separable_toy();
        // C = 1: always class 0 without training
        let zeros = vec![0usize; emb.len()];
        let mask = vec![true; emb.len()];
        let clf = classify_train(&emb, &zeros, &mask, &sig, &ClassifierConfig::default()).unwrap();
        assert_eq!(classify_predict(&clf, &emb[3]).unwrap(), 0);
        // single-class training mask with C > 1 is an error
        let one_class_mask: Vec<bool> = labels.iter().map(|l| *l == 0).collect();
        assert!(
            classify_train(&emb, &labels, &one_class_mask, &sig, &ClassifierConfig::default())
                .is_err()
        );
    }

    #[test]
    fn permuting_class_ids_permutes_predictions() {
        let (sig, emb, labels) = separable_toy();
        let mask = vec![true; emb.len()];
        let cfg = ClassifierConfig::default();
        let clf = classify_train(&emb, &labels, &mask, &sig, &cfg).unwrap();
        let swapped: Vec<usize> = labels.iter().map(|l| 1 - l).collect();
        let clf2 = classify_train(&emb, &swapped, &mask, &sig, &cfg).unwrap();
        for z in &emb {
            let a = classify_predict(&clf, z).unwrap();
            let b = classify_predict(&clf2, z).unwrap();
            assert_eq!(a, 1 - b);
        }
    }

    #[test]
    fn argmax_invariant_under_increasing_transforms() {
        let (sig, emb, labels) = separable_toy();
        let mask = vec![true; emb.len()];
        let clf = classify_train(&emb, &labels, &mask, &sig, &ClassifierConfig::default()).unwrap();
        for z in &emb {
            let scores = clf.class_scores(z).unwrap();
            let direct = argmax(&scores);
            let scaled: Vec<f64> = scores.iter().map(|s| 3.0 * s + 7.0).collect();
            let exped: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
            assert_eq!(direct, argmax(&scaled));
            assert_eq!(direct, argmax(&exped));
        }
    }

    #[test]
    fn accuracy_cases() {
        let gold = vec![0, 1, 2, 1];
        assert_eq!(accuracy(&[0, 1, 2, 1], &gold, &[true; 4]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 0, 0, 0], &gold, &[true; 4]).unwrap(), 0.0);
        assert_eq!(accuracy(&[0, 1, 2, 0], &gold, &[true; 4]).unwrap(), 0.75);
        assert!(accuracy(&[0], &[0], &[false]).is_err());
    }
}

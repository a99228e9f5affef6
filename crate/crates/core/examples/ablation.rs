//! Scratch harness: mean NC accuracy per signature over train/eval seeds.
//! Usage: ablation <lr> <epochs> [sig,...]

use mixcurv::contrastive::{self, TrainConfig};
use mixcurv::dataset;
use mixcurv::eval;
use mixcurv::product::parse_signature;

fn mean_nc(
    graph: &mixcurv::graph::SparseAdjacency,
    features: &[Vec<f64>],
    labels: &[usize],
    sig_text: &str,
    lr: f64,
    epochs: usize,
    train_seed: u64,
) -> f64 {
    let cfg = TrainConfig {
        signature: sig_text.to_string(),
        epochs,
        lr,
        view_dim: 16,
        seed: train_seed,
        ..TrainConfig::default()
    };
    let result = contrastive::train(graph, features, &cfg).unwrap();
    let sig = parse_signature(sig_text).unwrap();
    let emb = contrastive::embed(
        &result.params,
        &sig,
        graph,
        features,
        mixcurv::geometry::LiftMode::Exp0,
    )
    .unwrap();
    let realized = contrastive::signature_with_raws(&sig, &result.params);
    let mut accs = Vec::new();
    for eval_seed in [11u64, 12, 13, 14, 15] {
        let (train_mask, test_mask) = dataset::stratified_node_split(labels, 0.6, eval_seed);
        let clf_cfg = eval::ClassifierConfig { seed: eval_seed, ..Default::default() };
        let clf = eval::classify_train(&emb, labels, &train_mask, &realized, &clf_cfg).unwrap();
        let pred: Vec<usize> =
            emb.iter().map(|z| eval::classify_predict(&clf, z).unwrap()).collect();
        accs.push(eval::accuracy(&pred, labels, &test_mask).unwrap());
    }
    accs.iter().sum::<f64>() / accs.len() as f64
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lr: f64 = args[1].parse().unwrap();
    let epochs: usize = args[2].parse().unwrap();
    let sigs: Vec<String> = if args.len() > 3 {
        args[3].split(';').map(|s| s.to_string()).collect()
    } else {
        vec!["h4,s4,e4".into(), "h12".into(), "s12".into(), "e12".into()]
    };
    let (graph, features, labels) = dataset::synthetic_tree_cycles(52, 8, 6);
    for sig in &sigs {
        let mut per_seed = Vec::new();
        for train_seed in [1u64, 2, 3] {
            per_seed.push(mean_nc(&graph, &features, &labels, sig, lr, epochs, train_seed));
        }
        let mean = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
        println!("sig={sig} per_seed={per_seed:?} mean={mean:.4}");
    }
}

//! Dataset ingestion, edge/node splitting and synthetic benchmark graphs.
//!
//! File formats (diff-friendly text, `#` starts a comment line):
//! - edges: one whitespace-separated integer pair per line
//! - features: one whitespace-separated decimal row per node
//! - labels: one integer per line
//! - manifest: `key: value` lines with optional `nodes`, `edges`, `classes`
//!   counts that the loader asserts after deduplication.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::SparseAdjacency;

#[derive(Clone, Debug)]
pub struct DatasetBundle {
    pub graph: SparseAdjacency,
    pub features: Vec<Vec<f64>>,
    pub labels: Option<Vec<usize>>,
    pub name: String,
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Reads an edge list; node count is the largest index + 1 unless a larger
/// `n_hint` is given.
pub fn read_edge_file(path: &Path, n_hint: Option<usize>) -> Result<(usize, Vec<(usize, usize)>)> {
    let text = std::fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    let mut max_idx = 0usize;
    for (lineno, line) in data_lines(&text) {
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            tok.ok_or_else(|| Error::Dataset(format!("{}:{lineno}: missing node index", path.display())))?
                .parse()
                .map_err(|_| Error::Dataset(format!("{}:{lineno}: bad node index", path.display())))
        };
        let a = parse(it.next())?;
        let b = parse(it.next())?;
        if it.next().is_some() {
            return Err(Error::Dataset(format!(
                "{}:{lineno}: expected exactly two indices",
                path.display()
            )));
        }
        max_idx = max_idx.max(a).max(b);
        pairs.push((a, b));
    }
    let n = n_hint.unwrap_or(0).max(if pairs.is_empty() { 0 } else { max_idx + 1 });
    Ok((n, pairs))
}

fn read_features(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in data_lines(&text) {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    Error::Dataset(format!("{}:{lineno}: bad feature value {t:?}", path.display()))
                })
            })
            .collect::<Result<_>>()?;
        if !crate::vecmath::all_finite(&row) {
            return Err(Error::Dataset(format!("{}:{lineno}: non-finite feature", path.display())));
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Dataset(format!(
                    "{}:{lineno}: ragged feature row ({} values, expected {})",
                    path.display(),
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path)?;
    data_lines(&text)
        .map(|(lineno, line)| {
            line.parse::<usize>()
                .map_err(|_| Error::Dataset(format!("{}:{lineno}: bad label", path.display())))
        })
        .collect()
}

fn read_manifest(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    Ok(data_lines(&text)
        .filter_map(|(_, line)| {
            line.split_once(':').map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect())
}

/// Loads a dataset from explicit paths; the optional manifest provides
/// node/edge/class counts that are asserted after loading.
pub fn load_dataset(
    edge_path: &Path,
    feat_path: &Path,
    label_path: Option<&Path>,
    manifest_path: Option<&Path>,
    name: &str,
) -> Result<DatasetBundle> {
    let features = read_features(feat_path)?;
    if features.is_empty() {
        return Err(Error::Dataset(format!("{}: no feature rows", feat_path.display())));
    }
    let n = features.len();
    let (edge_n, pairs) = read_edge_file(edge_path, Some(n))?;
    if edge_n > n {
        return Err(Error::Dataset(format!(
            "edge file references node {} but features cover {} nodes",
            edge_n - 1,
            n
        )));
    }
    let graph = SparseAdjacency::undirected(n, &pairs)?;
    let labels = match label_path {
        None => None,
        Some(p) => {
            let l = read_labels(p)?;
            if l.len() != n {
                return Err(Error::Dataset(format!(
                    "{} labels for {} nodes",
                    l.len(),
                    n
                )));
            }
            Some(l)
        }
    };
    if let Some(mp) = manifest_path {
        for (k, v) in read_manifest(mp)? {
            let want: usize = v.replace([',', '_'], "").parse().map_err(|_| {
                Error::Dataset(format!("manifest value {v:?} for {k:?} is not a count"))
            })?;
            let got = match k.as_str() {
                "nodes" => n,
                "edges" => graph.edge_count(),
                "classes" => labels
                    .as_ref()
                    .map(|l| l.iter().max().map(|m| m + 1).unwrap_or(0))
                    .unwrap_or(0),
                _ => continue,
            };
            if got != want {
                return Err(Error::Dataset(format!(
                    "manifest expects {want} {k}, loaded {got}"
                )));
            }
        }
    }
    Ok(DatasetBundle { graph, features, labels, name: name.to_string() })
}

/// Loads `edges.txt`, `features.txt` and optional `labels.txt` /
/// `manifest.txt` from a directory.
pub fn load_dir(dir: &Path) -> Result<DatasetBundle> {
    let opt = |name: &str| {
        let p = dir.join(name);
        p.exists().then_some(p)
    };
    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "dataset".to_string());
    load_dataset(
        &dir.join("edges.txt"),
        &dir.join("features.txt"),
        opt("labels.txt").as_deref(),
        opt("manifest.txt").as_deref(),
        &name,
    )
}

/// Writes a bundle back to its file formats (floats use the shortest
/// round-trip representation, so reloading reproduces the bundle exactly).
pub fn save_dataset(bundle: &DatasetBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut edges = String::new();
    for (a, b, _) in bundle.graph.edges() {
        edges.push_str(&format!("{a} {b}\n"));
    }
    std::fs::write(dir.join("edges.txt"), edges)?;
    let mut feats = String::new();
    for row in &bundle.features {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        feats.push_str(&cells.join(" "));
        feats.push('\n');
    }
    std::fs::write(dir.join("features.txt"), feats)?;
    if let Some(labels) = &bundle.labels {
        let mut text = String::new();
        for l in labels {
            text.push_str(&format!("{l}\n"));
        }
        std::fs::write(dir.join("labels.txt"), text)?;
    }
    Ok(())
}

/// Edge split with matched uniformly-sampled negatives per bucket.
#[derive(Clone, Debug)]
pub struct EdgeSplit {
    pub train_pos: Vec<(usize, usize)>,
    pub val_pos: Vec<(usize, usize)>,
    pub test_pos: Vec<(usize, usize)>,
    pub train_neg: Vec<(usize, usize)>,
    pub val_neg: Vec<(usize, usize)>,
    pub test_neg: Vec<(usize, usize)>,
}

impl EdgeSplit {
    /// The training graph over the same node set.
    pub fn train_graph(&self, n: usize) -> Result<SparseAdjacency> {
        SparseAdjacency::undirected(n, &self.train_pos)
    }
}

/// Floor target sizes, then hand remaining units to the largest fractional
/// parts (ties by bucket order).
fn split_sizes(total: usize, ratios: (f64, f64, f64)) -> (usize, usize, usize) {
    let raw = [ratios.0 * total as f64, ratios.1 * total as f64, ratios.2 * total as f64];
    let mut sizes = [raw[0].floor() as usize, raw[1].floor() as usize, raw[2].floor() as usize];
    let mut rest = total - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|a, b| {
        let fa = raw[*a] - raw[*a].floor();
        let fb = raw[*b] - raw[*b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(b))
    });
    for i in order {
        if rest == 0 {
            break;
        }
        sizes[i] += 1;
        rest -= 1;
    }
    (sizes[0], sizes[1], sizes[2])
}

/// Splits edges into train/val/test with a spanning forest forced into the
/// train bucket (keeping the train graph connected when the input is), and
/// samples one uniform non-edge per positive, disjoint across buckets.
pub fn split_edges(
    graph: &SparseAdjacency,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<EdgeSplit> {
    let sum = ratios.0 + ratios.1 + ratios.2;
    if (sum - 1.0).abs() > 1e-9 || ratios.0 < 0.0 || ratios.1 < 0.0 || ratios.2 < 0.0 {
        return Err(Error::invalid(format!("split ratios {ratios:?} must be nonnegative and sum to 1")));
    }
    let m = graph.edge_count();
    let (t_size, v_size, s_size) = split_sizes(m, ratios);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // spanning forest via BFS; those edges stay in train
    let n = graph.n();
    let mut seen = vec![false; n];
    let mut forest = std::collections::BTreeSet::new();
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in graph.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    forest.insert((u.min(v), u.max(v)));
                    queue.push_back(v);
                }
            }
        }
    }
    let _ = t_size;

    // non-forest edges feed val/test first; forest edges are only pulled in
    // when the spare pool runs out (connectivity is then unattainable)
    let mut spare: Vec<(usize, usize)> = graph
        .edges()
        .iter()
        .map(|(a, b, _)| (*a, *b))
        .filter(|e| !forest.contains(e))
        .collect();
    spare.shuffle(&mut rng);
    let mut forest_pool: Vec<(usize, usize)> = forest.into_iter().collect();
    forest_pool.shuffle(&mut rng);
    let mut take = |count: usize, spare: &mut Vec<(usize, usize)>| -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            match spare.pop().or_else(|| forest_pool.pop()) {
                Some(e) => out.push(e),
                None => break,
            }
        }
        out
    };
    let val_pos = take(v_size, &mut spare);
    let test_pos = take(s_size, &mut spare);
    if val_pos.len() < v_size || test_pos.len() < s_size {
        return Err(Error::invalid("split infeasible: not enough edges".to_string()));
    }
    let mut train_pos: Vec<(usize, usize)> = forest_pool;
    train_pos.extend(spare);
    train_pos.sort_unstable();

    // negatives: uniform non-edges, disjoint across buckets
    let mut used = std::collections::BTreeSet::new();
    let mut sample_negs = |count: usize, rng: &mut ChaCha8Rng| -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        let cap = count.saturating_mul(10_000).max(10_000);
        while out.len() < count {
            attempts += 1;
            if attempts > cap {
                return Err(Error::invalid("could not sample enough negative edges"));
            }
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a == b {
                continue;
            }
            let e = (a.min(b), a.max(b));
            if graph.has_edge(e.0, e.1) || used.contains(&e) {
                continue;
            }
            used.insert(e);
            out.push(e);
        }
        Ok(out)
    };
    let train_neg = sample_negs(train_pos.len(), &mut rng)?;
    let val_neg = sample_negs(val_pos.len(), &mut rng)?;
    let test_neg = sample_negs(test_pos.len(), &mut rng)?;

    Ok(EdgeSplit { train_pos, val_pos, test_pos, train_neg, val_neg, test_neg })
}

/// Seeded stratified node split: within each class the first `train_ratio`
/// of a shuffled ordering is flagged train, the rest test.
pub fn stratified_node_split(
    labels: &[usize],
    train_ratio: f64,
    seed: u64,
) -> (Vec<bool>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_classes = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    let mut train = vec![false; labels.len()];
    for c in 0..n_classes {
        let mut members: Vec<usize> =
            (0..labels.len()).filter(|i| labels[*i] == c).collect();
        members.shuffle(&mut rng);
        let k = ((members.len() as f64) * train_ratio).round() as usize;
        let k = k.clamp(members.len().min(1), members.len());
        for &i in &members[..k] {
            train[i] = true;
        }
    }
    let test: Vec<bool> = train.iter().map(|t| !t).collect();
    (train, test)
}

/// Synthetic benchmark: a complete binary tree on `tree_nodes` nodes with
/// `cycles` hexagons, each attached to a distinct tree node by one edge.
/// Features are spectral node coordinates (low-frequency eigenvectors of
/// the normalized Laplacian), so adjacent nodes have similar features;
/// labels are 0 for tree nodes and 1 for cycle nodes.
pub fn synthetic_tree_cycles(
    tree_nodes: usize,
    cycles: usize,
    cycle_len: usize,
) -> (SparseAdjacency, Vec<Vec<f64>>, Vec<usize>) {
    assert!(tree_nodes >= 2 && cycle_len >= 3);
    let n = tree_nodes + cycles * cycle_len;
    let mut pairs = Vec::new();
    for i in 1..tree_nodes {
        pairs.push(((i - 1) / 2, i));
    }
    for c in 0..cycles {
        let base = tree_nodes + c * cycle_len;
        for j in 0..cycle_len {
            pairs.push((base + j, base + (j + 1) % cycle_len));
        }
        // attach to tree nodes spread across the deeper levels
        let anchor = tree_nodes - 1 - (c * (tree_nodes / 2 / cycles.max(1))) % (tree_nodes / 2);
        pairs.push((anchor, base));
    }
    let graph = SparseAdjacency::undirected(n, &pairs).expect("valid synthetic graph");
    let features = spectral_features(&graph, 16.min(n.saturating_sub(2)).max(1));
    let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= tree_nodes)).collect();
    (graph, features, labels)
}

/// The `dim` lowest nontrivial eigenvectors of the symmetric normalized
/// Laplacian, with a canonical sign per column (largest-magnitude entry
/// positive) so the output is library-independent.
pub fn spectral_features(graph: &SparseAdjacency, dim: usize) -> Vec<Vec<f64>> {
    let n = graph.n();
    let lap = nalgebra::DMatrix::<f64>::identity(n, n) - crate::diffusion::sym_normalize(graph);
    let eig = nalgebra::SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].partial_cmp(&eig.eigenvalues[*b]).unwrap());
    let cols: Vec<Vec<f64>> = order
        .iter()
        .skip(1)
        .take(dim)
        .map(|j| {
            let col: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(i, *j)]).collect();
            let lead = col
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0);
            if col[lead] < 0.0 {
                col.iter().map(|x| -x).collect()
            } else {
                col
            }
        })
        .collect();
    (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// The 10-node toy used by `gradcheck`: a path with chords and small
/// deterministic pseudo-random features.
pub fn gradcheck_toy() -> (SparseAdjacency, Vec<Vec<f64>>) {
    let n = 10;
    let mut pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    pairs.push((0, 5));
    pairs.push((2, 7));
    pairs.push((4, 9));
    let graph = SparseAdjacency::undirected(n, &pairs).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let features: Vec<Vec<f64>> =
        (0..n).map(|_| (0..6).map(|_| rng.gen_range(-0.5..0.5)).collect()).collect();
    (graph, features)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_file_round_trip_with_counts() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("edges.txt"), "# toy\n0 1\n1 2\n").unwrap();
        std::fs::write(dir.path().join("features.txt"), "1 0\n0 1\n0.5 0.5\n").unwrap();
        let bundle = load_dir(dir.path()).unwrap();
        assert_eq!(bundle.graph.n(), 3);
        assert_eq!(bundle.graph.edge_count(), 2);
        assert!(bundle.labels.is_none());
    }

    #[test]
    fn manifest_counts_are_asserted() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("edges.txt"), "0 1\n1 2\n").unwrap();
        std::fs::write(dir.path().join("features.txt"), "1\n2\n3\n").unwrap();
        std::fs::write(dir.path().join("labels.txt"), "0\n1\n0\n").unwrap();
        std::fs::write(dir.path().join("manifest.txt"), "nodes: 3\nedges: 2\nclasses: 2\n").unwrap();
        assert!(load_dir(dir.path()).is_ok());
        std::fs::write(dir.path().join("manifest.txt"), "nodes: 3\nedges: 5\n").unwrap();
        let err = load_dir(dir.path()).unwrap_err();
        assert!(err.to_string().contains("edges"));
    }

    #[test]
    fn loader_matches_benchmark_statistics() {
        // Deterministic datasets shaped like the published Citeseer and
        // Airport statistics; the loader's count assertions must pass.
        for (name, nodes, edges, classes) in
            [("citeseer", 3327usize, 4732usize, 6usize), ("airport", 1190, 13599, 4)]
        {
            let dir = tempfile::tempdir().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(4242);
            let mut set = std::collections::BTreeSet::new();
            while set.len() < edges {
                let a = rng.gen_range(0..nodes);
                let b = rng.gen_range(0..nodes);
                if a != b {
                    set.insert((a.min(b), a.max(b)));
                }
            }
            let mut text = String::new();
            for (a, b) in &set {
                text.push_str(&format!("{a} {b}\n"));
            }
            std::fs::write(dir.path().join("edges.txt"), text).unwrap();
            let feats: String = (0..nodes).map(|i| format!("{}\n", i % 7)).collect();
            std::fs::write(dir.path().join("features.txt"), feats).unwrap();
            let labels: String = (0..nodes).map(|i| format!("{}\n", i % classes)).collect();
            std::fs::write(dir.path().join("labels.txt"), labels).unwrap();
            std::fs::write(
                dir.path().join("manifest.txt"),
                format!("nodes: {nodes}\nedges: {edges}\nclasses: {classes}\n"),
            )
            .unwrap();
            let bundle = load_dir(dir.path()).unwrap();
            assert_eq!(bundle.graph.n(), nodes, "{name}");
            assert_eq!(bundle.graph.edge_count(), edges, "{name}");
        }
    }

    #[test]
    fn ragged_features_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("edges.txt"), "0 1\n").unwrap();
        std::fs::write(dir.path().join("features.txt"), "1 2\n3\n").unwrap();
        assert!(load_dir(dir.path()).is_err());
    }

    #[test]
    fn out_of_range_edge_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("edges.txt"), "0 9\n").unwrap();
        std::fs::write(dir.path().join("features.txt"), "1\n2\n").unwrap();
        assert!(load_dir(dir.path()).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let (graph, features, labels) = synthetic_tree_cycles(7, 1, 3);
        let bundle = DatasetBundle {
            graph,
            features,
            labels: Some(labels),
            name: "toy".into(),
        };
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&bundle, dir.path()).unwrap();
        let loaded = load_dir(dir.path()).unwrap();
        assert_eq!(loaded.graph.n(), bundle.graph.n());
        assert_eq!(loaded.graph.edges(), bundle.graph.edges());
        assert_eq!(loaded.features, bundle.features);
        assert_eq!(loaded.labels, bundle.labels);
    }

    #[test]
    fn split_all_train() {
        let (graph, _, _) = synthetic_tree_cycles(8, 1, 4);
        let split = split_edges(&graph, (1.0, 0.0, 0.0), 3).unwrap();
        assert_eq!(split.train_pos.len(), graph.edge_count());
        assert!(split.val_pos.is_empty());
        assert!(split.test_pos.is_empty());
        assert_eq!(split.train_neg.len(), split.train_pos.len());
    }

    #[test]
    fn split_sizes_floor_then_distribute() {
        // 10 edges at (0.8, 0.1, 0.1) → (8, 1, 1)
        assert_eq!(split_sizes(10, (0.8, 0.1, 0.1)), (8, 1, 1));
        assert_eq!(split_sizes(7, (0.85, 0.05, 0.10)), (6, 0, 1));
    }

    #[test]
    fn split_is_deterministic_and_train_connected() {
        // ring plus chords: enough redundancy that an 80/10/10 split can
        // keep the train graph connected
        let n = 20;
        let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        for i in 0..15 {
            pairs.push((i, (i + 7) % n));
        }
        let graph = SparseAdjacency::undirected(n, &pairs).unwrap();
        let s1 = split_edges(&graph, (0.8, 0.1, 0.1), 9).unwrap();
        let s2 = split_edges(&graph, (0.8, 0.1, 0.1), 9).unwrap();
        assert_eq!(s1.train_pos, s2.train_pos);
        assert_eq!(s1.test_neg, s2.test_neg);
        let tg = s1.train_graph(graph.n()).unwrap();
        let comp = tg.components();
        assert!(comp.iter().all(|c| *c == comp[0]), "train graph disconnected");
        // negatives are non-edges and disjoint from each other
        let mut seen = std::collections::BTreeSet::new();
        for e in s1.train_neg.iter().chain(&s1.val_neg).chain(&s1.test_neg) {
            assert!(!graph.has_edge(e.0, e.1));
            assert!(seen.insert(*e), "negative {e:?} duplicated");
        }
    }

    #[test]
    fn bad_ratios_error_and_tree_split_falls_back() {
        let graph = SparseAdjacency::undirected(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(split_edges(&graph, (0.5, 0.5, 0.5), 1).is_err());
        assert!(split_edges(&graph, (0.9, 0.2, -0.1), 1).is_err());
        // a bare tree has no spare edges; val/test eat into the forest and
        // the train graph gives up connectivity rather than failing
        let s = split_edges(&graph, (0.0, 0.5, 0.5), 1).unwrap();
        assert!(s.train_pos.is_empty());
        assert_eq!(s.val_pos.len() + s.test_pos.len(), 3);
    }

    #[test]
    fn stratified_split_covers_both_classes() {
        let labels = vec![0, 0, 0, 0, 1, 1, 1, 1, 1, 1];
        let (train, test) = stratified_node_split(&labels, 0.5, 5);
        let train_classes: std::collections::BTreeSet<usize> =
            (0..labels.len()).filter(|i| train[*i]).map(|i| labels[i]).collect();
        assert_eq!(train_classes.len(), 2);
        for i in 0..labels.len() {
            assert!(train[i] ^ test[i]);
        }
    }

    #[test]
    fn synthetic_graph_shape() {
        let (graph, features, labels) = synthetic_tree_cycles(52, 8, 6);
        assert_eq!(graph.n(), 100);
        assert_eq!(features.len(), 100);
        assert_eq!(features[0].len(), 16);
        assert_eq!(labels.iter().filter(|l| **l == 0).count(), 52);
        assert_eq!(labels.iter().filter(|l| **l == 1).count(), 48);
        // connected: tree + attached cycles
        let comp = graph.components();
        assert!(comp.iter().all(|c| *c == comp[0]));
        // edge count: (tree_nodes − 1) + cycles·(len + 1)
        assert_eq!(graph.edge_count(), 51 + 8 * 7);
    }
}

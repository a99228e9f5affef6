//! Congruent-view generation: personalized-PageRank diffusion of the
//! adjacency, then sparsification back to an edge list.
//!
//! The diffusion matrix is computed exactly, Γ = α(I − (1−α)·D^{-1/2} G D^{-1/2})⁻¹,
//! via a dense LU solve; the graphs this crate targets are small enough that
//! the closed form is preferable to push-based approximations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::SparseAdjacency;

/// Sparsification rule applied to the dense diffusion matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SparsifyRule {
    /// Keep the k largest off-diagonal entries per row, symmetrized by max.
    TopK(usize),
    /// Keep off-diagonal entries ≥ ε.
    Threshold(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct DiffusionConfig {
    /// Teleport probability in (0, 1).
    pub alpha: f64,
    pub sparsify: SparsifyRule,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig { alpha: 0.2, sparsify: SparsifyRule::TopK(16) }
    }
}

impl DiffusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        match self.sparsify {
            SparsifyRule::TopK(k) if k == 0 => Err(Error::invalid("topk must be at least 1")),
            SparsifyRule::Threshold(e) if e <= 0.0 => {
                Err(Error::invalid(format!("threshold {e} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

/// Symmetric normalization S = D^{-1/2} G D^{-1/2}. Rows and columns of
/// zero-degree nodes are left zero (with a warning), so isolated nodes stay
/// isolated in the diffused view.
pub fn sym_normalize(g: &SparseAdjacency) -> DMatrix<f64> {
    let n = g.n();
    let mut inv_sqrt_deg = vec![0.0; n];
    for i in 0..n {
        let d = g.weighted_degree(i);
        if d > 0.0 {
            inv_sqrt_deg[i] = 1.0 / d.sqrt();
        } else {
            log::warn!("node {i} has zero degree; its diffusion row stays zero");
        }
    }
    let mut s = DMatrix::zeros(n, n);
    for &(a, b, w) in g.edges() {
        let v = w * inv_sqrt_deg[a] * inv_sqrt_deg[b];
        s[(a, b)] = v;
        s[(b, a)] = v;
    }
    s
}

/// Closed-form PPR diffusion Γ = α(I − (1−α)S)⁻¹.
pub fn ppr_diffuse(s: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} outside (0, 1)")));
    }
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::shape("diffusion input must be square"));
    }
    let m = DMatrix::identity(n, n) - s * (1.0 - alpha);
    let inv = m
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::NumericalDomain("singular diffusion system".into()))?;
    Ok(inv * alpha)
}

/// Sparsifies Γ into an undirected weighted edge list; the diagonal is
/// always dropped and surviving weights keep their Γ values.
pub fn sparsify(gamma: &DMatrix<f64>, rule: SparsifyRule) -> Result<SparseAdjacency> {
    let n = gamma.nrows();
    let mut triples: Vec<(usize, usize, f64)> = Vec::new();
    match rule {
        SparsifyRule::Threshold(eps) => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = gamma[(i, j)].max(gamma[(j, i)]);
                    if w >= eps && w > 0.0 {
                        triples.push((i, j, w));
                    }
                }
            }
        }
        SparsifyRule::TopK(k) => {
            let keep_all = k >= n;
            let mut kept = std::collections::BTreeSet::new();
            for i in 0..n {
                let mut row: Vec<(usize, f64)> = (0..n)
                    .filter(|j| *j != i && gamma[(i, *j)] > 0.0)
                    .map(|j| (j, gamma[(i, j)]))
                    .collect();
                if !keep_all {
                    row.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
                    row.truncate(k);
                }
                for (j, _) in row {
                    kept.insert((i.min(j), i.max(j)));
                }
            }
            for (i, j) in kept {
                triples.push((i, j, gamma[(i, j)].max(gamma[(j, i)])));
            }
        }
    }
    SparseAdjacency::undirected_weighted(n, &triples)
}

/// Full congruent-graph pipeline: normalize, diffuse, sparsify.
pub fn congruent_graph(g: &SparseAdjacency, cfg: &DiffusionConfig) -> Result<SparseAdjacency> {
    cfg.validate()?;
    let s = sym_normalize(g);
    let gamma = ppr_diffuse(&s, cfg.alpha)?;
    sparsify(&gamma, cfg.sparsify)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> SparseAdjacency {
        SparseAdjacency::undirected(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn sym_normalize_single_edge() {
        let s = sym_normalize(&two_node());
        assert_eq!(s[(0, 1)], 1.0);
        assert_eq!(s[(1, 0)], 1.0);
        assert_eq!(s[(0, 0)], 0.0);
    }

    #[test]
    fn sym_normalize_triangle() {
        let g = SparseAdjacency::undirected(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let s = sym_normalize(&g);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.0 } else { 0.5 };
                assert!((s[(i, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sym_normalize_empty_graph() {
        let g = SparseAdjacency::undirected(3, &[]).unwrap();
        let s = sym_normalize(&g);
        assert!(s.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn ppr_two_node_closed_form() {
        let s = sym_normalize(&two_node());
        let gamma = ppr_diffuse(&s, 0.5).unwrap();
        // α(I − (1−α)S)⁻¹ for S = [[0,1],[1,0]] at α = 1/2 is [[2/3,1/3],[1/3,2/3]].
        assert!((gamma[(0, 0)] - 2.0 / 3.0).abs() < 1e-12);
        assert!((gamma[(0, 1)] - 1.0 / 3.0).abs() < 1e-12);
        assert!((gamma[(1, 0)] - 1.0 / 3.0).abs() < 1e-12);
        assert!((gamma[(1, 1)] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ppr_approaches_identity_as_alpha_to_one() {
        let s = sym_normalize(&two_node());
        let gamma = ppr_diffuse(&s, 0.999).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gamma[(i, j)] - want).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn ppr_matches_truncated_series_on_path() {
        // Γ = α Σ_k (1−α)^k S^k. The geometric tail past k terms is
        // O((1−α)^k), so the series must run to k = 80 before its own
        // truncation error (≈4e-9) sits safely under the 1e-6 comparison.
        let g = SparseAdjacency::undirected(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let s = sym_normalize(&g);
        let alpha = 0.2;
        let gamma = ppr_diffuse(&s, alpha).unwrap();

        let n = 5;
        let mut series = DMatrix::<f64>::zeros(n, n);
        let mut power = DMatrix::<f64>::identity(n, n);
        for k in 0..=80 {
            series += &power * (alpha * (1.0 - alpha).powi(k));
            power = &power * &s;
        }
        for i in 0..n {
            for j in 0..n {
                assert!(
                    (gamma[(i, j)] - series[(i, j)]).abs() < 1e-6,
                    "series mismatch at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn gamma_symmetric_and_bounded() {
        let g = SparseAdjacency::undirected(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)])
            .unwrap();
        let gamma = ppr_diffuse(&sym_normalize(&g), 0.3).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((gamma[(i, j)] - gamma[(j, i)]).abs() < 1e-10);
                assert!(gamma[(i, j)] >= -1e-12 && gamma[(i, j)] <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn gamma_row_stochastic_on_cycles() {
        // A cycle is 2-regular, so S is doubly stochastic and Γ rows sum to 1.
        for n in [3usize, 4, 7] {
            let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            let g = SparseAdjacency::undirected(n, &pairs).unwrap();
            let gamma = ppr_diffuse(&sym_normalize(&g), 0.2).unwrap();
            for i in 0..n {
                let sum: f64 = (0..n).map(|j| gamma[(i, j)]).sum();
                assert!((sum - 1.0).abs() < 1e-9, "row {i} of C{n} sums to {sum}");
            }
        }
    }

    #[test]
    fn sparsify_threshold_cases() {
        let s = sym_normalize(&two_node());
        let gamma = ppr_diffuse(&s, 0.5).unwrap();
        // ε = 1: all entries < 1, nothing survives.
        let g = sparsify(&gamma, SparsifyRule::Threshold(1.0)).unwrap();
        assert_eq!(g.edge_count(), 0);
        // tiny ε on a dense positive Γ keeps every off-diagonal entry.
        let g = sparsify(&gamma, SparsifyRule::Threshold(1e-12)).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!((g.edges()[0].2 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sparsify_topk_cases() {
        let s = sym_normalize(&two_node());
        let gamma = ppr_diffuse(&s, 0.5).unwrap();
        let g = sparsify(&gamma, SparsifyRule::TopK(1)).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].0, 0);
        assert_eq!(g.edges()[0].1, 1);
        assert!((g.edges()[0].2 - 1.0 / 3.0).abs() < 1e-12);
        // k ≥ n keeps all off-diagonal entries.
        let g = sparsify(&gamma, SparsifyRule::TopK(10)).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn diffusion_preserves_component_connectivity() {
        // Two components; diffusion never links them, and with a tiny
        // threshold each stays internally connected.
        let g = SparseAdjacency::undirected(7, &[(0, 1), (1, 2), (3, 4), (4, 5), (5, 6)]).unwrap();
        let before = g.components();
        let diffused = congruent_graph(
            &g,
            &DiffusionConfig { alpha: 0.2, sparsify: SparsifyRule::Threshold(1e-12) },
        )
        .unwrap();
        let after = diffused.components();
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(before[i] == before[j], after[i] == after[j], "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(DiffusionConfig { alpha: 0.0, sparsify: SparsifyRule::TopK(4) }.validate().is_err());
        assert!(DiffusionConfig { alpha: 0.5, sparsify: SparsifyRule::TopK(0) }.validate().is_err());
        assert!(DiffusionConfig { alpha: 0.5, sparsify: SparsifyRule::Threshold(0.0) }
            .validate()
            .is_err());
        assert!(DiffusionConfig::default().validate().is_ok());
    }
}

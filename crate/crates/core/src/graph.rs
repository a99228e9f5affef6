//! Sparse adjacency storage.

use crate::error::{Error, Result};

/// Deduplicated weighted edge list with adjacency lists for traversal.
/// Undirected graphs store each edge once (row < col) but answer neighbor
/// queries in both directions.
#[derive(Clone, Debug)]
pub struct SparseAdjacency {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    neighbors: Vec<Vec<(usize, f64)>>,
    undirected: bool,
}

impl SparseAdjacency {
    /// Builds an undirected graph from unweighted pairs; self-loops are
    /// dropped and duplicate/mirrored pairs collapse to one edge.
    pub fn undirected(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let triples: Vec<(usize, usize, f64)> =
            pairs.iter().map(|(a, b)| (*a, *b, 1.0)).collect();
        Self::undirected_weighted(n, &triples)
    }

    pub fn undirected_weighted(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        let mut canonical: Vec<(usize, usize, f64)> = Vec::with_capacity(triples.len());
        for &(a, b, w) in triples {
            if a >= n || b >= n {
                return Err(Error::Dataset(format!("edge ({a}, {b}) out of range for n={n}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Dataset(format!("edge ({a}, {b}) has bad weight {w}")));
            }
            if a == b {
                continue;
            }
            canonical.push((a.min(b), a.max(b), w));
        }
        canonical.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        canonical.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

        let mut neighbors = vec![Vec::new(); n];
        for &(a, b, w) in &canonical {
            neighbors[a].push((b, w));
            neighbors[b].push((a, w));
        }
        for list in &mut neighbors {
            list.sort_by(|x, y| x.0.cmp(&y.0));
        }
        Ok(SparseAdjacency { n, edges: canonical, neighbors, undirected: true })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical (row < col) triples.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Weighted degree (sum of incident edge weights).
    pub fn weighted_degree(&self, i: usize) -> f64 {
        self.neighbors[i].iter().map(|(_, w)| w).sum()
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (lo, hi) = (a.min(b), a.max(b));
        self.edges
            .binary_search_by(|(x, y, _)| (*x, *y).cmp(&(lo, hi)))
            .is_ok()
    }

    /// Connected components by BFS; returns a component id per node.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut queue = std::collections::VecDeque::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.neighbors[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_and_mirror_collapse() {
        let g = SparseAdjacency::undirected(3, &[(0, 1), (1, 0), (0, 1), (1, 2), (2, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[(0, 1.0), (2, 1.0)]);
        assert!(g.has_edge(1, 0));
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(SparseAdjacency::undirected(2, &[(0, 5)]).is_err());
    }

    #[test]
    fn components_split() {
        let g = SparseAdjacency::undirected(5, &[(0, 1), (2, 3)]).unwrap();
        let c = g.components();
        assert_eq!(c[0], c[1]);
        assert_eq!(c[2], c[3]);
        assert_ne!(c[0], c[2]);
        assert_ne!(c[4], c[0]);
        assert_ne!(c[4], c[2]);
    }
}

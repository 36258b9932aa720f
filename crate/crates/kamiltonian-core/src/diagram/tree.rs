//! Unrooted trees whose internal vertices all have degree at least three.
//!
//! Such trees are the skeletons of mixing diagrams: leaves are external
//! excitations, internal vertices are mixers and internal edges carry
//! off-resonant excitations. Enumeration proceeds by leaf insertion (attach a
//! new leaf to an internal vertex, or subdivide an edge and hang the leaf on
//! the new vertex) and removes isomorphic copies with a canonical encoding.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

/// Unrooted tree stored as adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnrootedTree {
    /// Neighbours of every vertex.
    pub adj: Vec<Vec<usize>>,
}

impl UnrootedTree {
    /// Star with `k` leaves around a single internal vertex (vertex 0).
    pub fn star(k: usize) -> Self {
        let mut adj = alloc::vec![(1..=k).collect::<Vec<_>>()];
        for _ in 0..k {
            adj.push(alloc::vec![0]);
        }
        UnrootedTree { adj }
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    /// Whether the tree has no vertices.
    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Degree of vertex `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Whether `v` is a leaf.
    pub fn is_leaf(&self, v: usize) -> bool {
        self.adj[v].len() == 1
    }

    /// Leaf vertices in increasing order.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.is_leaf(v)).collect()
    }

    /// Internal vertices (mixers) in increasing order.
    pub fn internal(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| !self.is_leaf(v)).collect()
    }

    /// Number of leaves.
    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }

    /// Degrees of the internal vertices, sorted decreasingly (the mixer ranks).
    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.internal().iter().map(|&v| self.degree(v)).collect();
        r.sort_unstable_by(|a, b| b.cmp(a));
        r
    }

    /// Edges `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for (u, ns) in self.adj.iter().enumerate() {
            for &v in ns {
                if u < v {
                    e.push((u, v));
                }
            }
        }
        e
    }

    /// Edges joining two internal vertices.
    pub fn internal_edges(&self) -> Vec<(usize, usize)> {
        self.edges().into_iter().filter(|&(u, v)| !self.is_leaf(u) && !self.is_leaf(v)).collect()
    }

    /// Perturbative order `Σ (deg − 2)` of a diagram built on this tree.
    pub fn order(&self) -> usize {
        self.internal().iter().map(|&v| self.degree(v) - 2).sum()
    }

    /// Whether the graph is connected and acyclic with internal degrees ≥ 3.
    pub fn is_valid(&self) -> bool {
        let n = self.len();
        if n < 4 {
            return false;
        }
        let edges: usize = self.adj.iter().map(|a| a.len()).sum::<usize>() / 2;
        if edges + 1 != n {
            return false;
        }
        let mut seen = alloc::vec![false; n];
        let mut stack = alloc::vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s) && (0..n).all(|v| self.degree(v) == 1 || self.degree(v) >= 3)
    }

    fn encode_from(&self, v: usize, parent: usize) -> String {
        let mut kids: Vec<String> =
            self.adj[v].iter().filter(|&&w| w != parent).map(|&w| self.encode_from(w, v)).collect();
        kids.sort();
        let mut s = String::from("(");
        for k in kids {
            s.push_str(&k);
        }
        s.push(')');
        s
    }

    /// Isomorphism-invariant encoding (minimum over all rootings).
    pub fn canonical(&self) -> String {
        (0..self.len()).map(|r| self.encode_from(r, usize::MAX)).min().unwrap_or_default()
    }

    fn with_leaf_on(&self, v: usize) -> Self {
        let mut t = self.clone();
        let new = t.adj.len();
        t.adj.push(alloc::vec![v]);
        t.adj[v].push(new);
        t
    }

    fn with_subdivided(&self, u: usize, v: usize) -> Self {
        let mut t = self.clone();
        let w = t.adj.len();
        let leaf = w + 1;
        for x in t.adj[u].iter_mut() {
            if *x == v {
                *x = w;
            }
        }
        for x in t.adj[v].iter_mut() {
            if *x == u {
                *x = w;
            }
        }
        t.adj.push(alloc::vec![u, v, leaf]);
        t.adj.push(alloc::vec![w]);
        t
    }
}

/// All trees with `leaves` leaves and internal degrees ≥ 3, up to isomorphism.
///
/// The result is ordered by number of mixers, then by canonical encoding, so
/// the single-mixer star always comes first. Fewer than three leaves yield an
/// empty list.
pub fn enumerate_unrooted_trees(leaves: usize) -> Vec<UnrootedTree> {
    if leaves < 3 {
        return Vec::new();
    }
    let mut level = alloc::vec![UnrootedTree::star(3)];
    for _ in 3..leaves {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for t in &level {
            let mut cands = Vec::new();
            for v in t.internal() {
                cands.push(t.with_leaf_on(v));
            }
            for (u, v) in t.edges() {
                cands.push(t.with_subdivided(u, v));
            }
            for c in cands {
                if seen.insert(c.canonical()) {
                    next.push(c);
                }
            }
        }
        level = next;
    }
    level.sort_by_cached_key(|t| (t.internal().len(), t.canonical()));
    level
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_for_small_leaf_numbers() {
        let counts: Vec<usize> = (3..=6).map(|n| enumerate_unrooted_trees(n).len()).collect();
        assert_eq!(counts, alloc::vec![1, 2, 3, 7]);
        assert!(enumerate_unrooted_trees(2).is_empty());
    }

    #[test]
    fn trees_are_valid_and_distinct() {
        for n in 3..=8 {
            let ts = enumerate_unrooted_trees(n);
            let canon: BTreeSet<String> = ts.iter().map(|t| t.canonical()).collect();
            assert_eq!(canon.len(), ts.len());
            for t in &ts {
                assert!(t.is_valid());
                assert_eq!(t.leaf_count(), n);
                assert_eq!(t.order(), n - 2);
            }
        }
    }

    #[test]
    fn five_leaf_topologies() {
        let ts = enumerate_unrooted_trees(5);
        let ranks: Vec<Vec<usize>> = ts.iter().map(|t| t.ranks()).collect();
        assert_eq!(ranks, alloc::vec![alloc::vec![5], alloc::vec![4, 3], alloc::vec![3, 3, 3]]);
    }
}

//! Undirected graphs, their Laplacians, and the spectral quantities the
//! synchronization conditions consume.
//!
//! The Laplacian of an undirected graph is `L = D - A` (degree matrix minus
//! adjacency matrix). It is symmetric positive semidefinite, `L 1 = 0`, and
//! the graph is connected exactly when the second-smallest eigenvalue
//! `lambda_2` (the algebraic connectivity) is positive. `lambda_2` and the
//! largest eigenvalue `lambda_N` are the two numbers every certificate in
//! [`crate::conditions`] needs.

use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::{self, LinalgError, Matrix};

/// Validation and spectrum errors for graphs.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    /// Graphs must have at least one node.
    #[error("graph must have at least one node")]
    NoNodes,
    /// Self-loops are not allowed.
    #[error("self-loop at node {node}")]
    SelfLoop {
        /// The offending node.
        node: usize,
    },
    /// The same undirected edge was given twice.
    #[error("duplicate edge ({a}, {b})")]
    DuplicateEdge {
        /// Smaller endpoint.
        a: usize,
        /// Larger endpoint.
        b: usize,
    },
    /// An edge endpoint is not a valid node index.
    #[error("edge ({a}, {b}) has endpoint out of range for {node_count} nodes")]
    EndpointOutOfRange {
        /// First endpoint as given.
        a: usize,
        /// Second endpoint as given.
        b: usize,
        /// Number of nodes in the graph.
        node_count: usize,
    },
    /// The dense eigensolver failed.
    #[error("laplacian eigensolver failed: {0}")]
    Eigensolver(#[from] LinalgError),
}

/// An undirected simple graph on nodes `0..node_count`.
///
/// Edges are stored as sorted `(i, j)` pairs with `i < j`; construction
/// rejects self-loops, duplicates, and out-of-range endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
    name: Option<String>,
}

impl Graph {
    /// Build a graph from a node count and an edge list.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::NoNodes);
        }
        let mut normalized: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop { node: a });
            }
            if a >= node_count || b >= node_count {
                return Err(GraphError::EndpointOutOfRange { a, b, node_count });
            }
            let pair = (a.min(b), a.max(b));
            normalized.push(pair);
        }
        normalized.sort_unstable();
        for w in normalized.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge { a: w[0].0, b: w[0].1 });
            }
        }
        let mut degrees = alloc::vec![0usize; node_count];
        for &(a, b) in &normalized {
            degrees[a] += 1;
            degrees[b] += 1;
        }
        Ok(Graph { node_count, edges: normalized, degrees, name: None })
    }

    /// Attach a human-readable name.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Path graph `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path graph is valid")
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        Graph::new(n, edges).expect("complete graph is valid")
    }

    /// Complete graph on `n` nodes with the edge `(0, 1)` removed.
    ///
    /// For `n = 5` this has Laplacian spectrum `{0, 3, 5, 5, 5}`, giving a
    /// five-node topology with algebraic connectivity exactly 3.
    pub fn complete_minus_edge(n: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if (i, j) != (0, 1) {
                    edges.push((i, j));
                }
            }
        }
        Graph::new(n, edges).expect("graph is valid")
    }

    /// Star graph: node 0 is the hub, nodes `1..n` are leaves.
    pub fn star(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (0, i))).expect("star graph is valid")
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Edges as sorted `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Optional name.
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Degree of node `i`.
    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    /// Maximum node degree.
    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Dense Laplacian `L = D - A`. Row sums are exactly zero.
    pub fn laplacian(&self) -> Matrix {
        let mut l = Matrix::zeros(self.node_count);
        for &(a, b) in &self.edges {
            l.add_to(a, a, 1.0);
            l.add_to(b, b, 1.0);
            l.set(a, b, -1.0);
            l.set(b, a, -1.0);
        }
        l
    }

    /// Laplacian spectrum of this graph.
    pub fn spectrum(&self) -> Result<LaplacianSpectrum, GraphError> {
        spectrum(&self.laplacian())
    }
}

/// Ascending Laplacian eigenvalues with the two distinguished ones pulled
/// out: the algebraic connectivity `lambda_2` and the largest eigenvalue
/// `lambda_N`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LaplacianSpectrum {
    eigenvalues: Vec<f64>,
    lambda2: f64,
    lambda_n: f64,
}

impl LaplacianSpectrum {
    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Algebraic connectivity (second-smallest eigenvalue).
    ///
    /// For a single-node graph this is 0 by convention.
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Largest eigenvalue.
    pub fn lambda_n(&self) -> f64 {
        self.lambda_n
    }

    /// Connectivity test: `lambda_2 > tol`.
    ///
    /// A single-node graph is connected regardless of `tol`.
    pub fn is_connected(&self, tol: f64) -> bool {
        self.eigenvalues.len() == 1 || self.lambda2 > tol
    }

    /// Connectivity with the default relative tolerance `1e-9 * lambda_N`.
    pub fn is_connected_default(&self) -> bool {
        self.is_connected(1e-9 * self.lambda_n)
    }
}

/// Compute the spectrum of a Laplacian matrix.
///
/// The matrix must be symmetric with zero row sums; both are checked so a
/// non-Laplacian input fails loudly instead of producing a nonsense
/// connectivity verdict.
pub fn spectrum(l: &Matrix) -> Result<LaplacianSpectrum, GraphError> {
    let n = l.dim();
    let scale = l.frobenius_norm().max(1.0);
    for i in 0..n {
        let row_sum: f64 = l.row(i).iter().sum();
        if row_sum.abs() > 1e-9 * scale {
            return Err(GraphError::Eigensolver(LinalgError::NotSymmetric {
                max_asymmetry: row_sum.abs(),
            }));
        }
    }
    let eigenvalues = linalg::sym_eigenvalues(l)?;
    let lambda2 = if n >= 2 { eigenvalues[1] } else { 0.0 };
    let lambda_n = *eigenvalues.last().expect("n >= 1");
    Ok(LaplacianSpectrum { eigenvalues, lambda2, lambda_n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm2, sym_eigen};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Closed-form Laplacian eigenvalues of the path graph P_n:
    /// 2 - 2 cos(k pi / n), k = 0..n-1.
    fn path_eigenvalue(n: usize, k: usize) -> f64 {
        2.0 - 2.0 * (core::f64::consts::PI * k as f64 / n as f64).cos()
    }

    #[test]
    fn builds_single_isolated_node() {
        let g = Graph::new(1, []).unwrap();
        assert_eq!(g.node_count(), 1);
        assert!(g.edges().is_empty());
        let s = g.spectrum().unwrap();
        assert_eq!(s.eigenvalues(), &[0.0]);
        assert!(s.is_connected(1e-9));
    }

    #[test]
    fn builds_path_graph() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(2), 2);
    }

    #[test]
    fn rejects_duplicate_edge() {
        let err = Graph::new(5, [(0, 1), (0, 1)]).unwrap_err();
        assert_eq!(err, GraphError::DuplicateEdge { a: 0, b: 1 });
        // Duplicates in reversed orientation are still duplicates.
        let err = Graph::new(5, [(0, 1), (1, 0)]).unwrap_err();
        assert_eq!(err, GraphError::DuplicateEdge { a: 0, b: 1 });
    }

    #[test]
    fn rejects_self_loop_and_bad_endpoint() {
        assert_eq!(Graph::new(3, [(1, 1)]).unwrap_err(), GraphError::SelfLoop { node: 1 });
        assert_eq!(
            Graph::new(3, [(0, 3)]).unwrap_err(),
            GraphError::EndpointOutOfRange { a: 0, b: 3, node_count: 3 }
        );
        assert_eq!(Graph::new(0, []).unwrap_err(), GraphError::NoNodes);
    }

    #[test]
    fn laplacian_of_two_node_path() {
        let l = Graph::path(2).laplacian();
        assert_eq!(l.get(0, 0), 1.0);
        assert_eq!(l.get(0, 1), -1.0);
        assert_eq!(l.get(1, 0), -1.0);
        assert_eq!(l.get(1, 1), 1.0);
    }

    #[test]
    fn laplacian_of_triangle() {
        let l = Graph::complete(3).laplacian();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 2.0 } else { -1.0 };
                assert_eq!(l.get(i, j), expected);
            }
        }
    }

    #[test]
    fn laplacian_of_five_node_path_has_expected_degrees() {
        let l = Graph::path(5).laplacian();
        let degrees: Vec<f64> = (0..5).map(|i| l.get(i, i)).collect();
        assert_eq!(degrees, vec![1.0, 2.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn complete_graph_spectrum() {
        let s = Graph::complete(5).spectrum().unwrap();
        assert!(s.eigenvalues()[0].abs() < 1e-12);
        for &ev in &s.eigenvalues()[1..] {
            assert!((ev - 5.0).abs() < 1e-12);
        }
        assert!((s.lambda2() - 5.0).abs() < 1e-12);
        assert!((s.lambda_n() - 5.0).abs() < 1e-12);
        assert!(s.is_connected(1e-9));
    }

    #[test]
    fn path_graph_spectrum_matches_closed_form() {
        let s = Graph::path(5).spectrum().unwrap();
        for k in 0..5 {
            assert!(
                (s.eigenvalues()[k] - path_eigenvalue(5, k)).abs() < 1e-9,
                "eigenvalue {k}"
            );
        }
        // lambda_2 = 2 - 2 cos(pi/5) = 0.3819660112501051...
        assert!((s.lambda2() - 0.3819660112501051).abs() < 1e-9);
    }

    #[test]
    fn disconnected_graph_has_zero_lambda2() {
        // Two disjoint edges on 4 nodes.
        let s = Graph::new(4, [(0, 1), (2, 3)]).unwrap().spectrum().unwrap();
        assert!(s.lambda2().abs() < 1e-12);
        assert!(!s.is_connected(1e-9));
        assert!(!s.is_connected_default());
    }

    #[test]
    fn star_graph_spectrum() {
        let s = Graph::star(5).spectrum().unwrap();
        let expected = [0.0, 1.0, 1.0, 1.0, 5.0];
        for (got, want) in s.eigenvalues().iter().zip(expected) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn complete_minus_edge_has_lambda2_three() {
        let s = Graph::complete_minus_edge(5).spectrum().unwrap();
        let expected = [0.0, 3.0, 5.0, 5.0, 5.0];
        for (got, want) in s.eigenvalues().iter().zip(expected) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        assert!(s.is_connected_default());
    }

    #[test]
    fn spectrum_rejects_non_laplacian() {
        let mut m = Matrix::zeros(2);
        m.set(0, 0, 1.0);
        m.set(1, 1, 1.0);
        // Symmetric but row sums are 1, not 0.
        assert!(spectrum(&m).is_err());
    }

    /// Random graph on `n` nodes from an edge bitmask, forced connected by
    /// overlaying a random spanning tree.
    fn random_connected_graph(n: usize, seed: u64) -> Graph {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut edges = alloc::collections::BTreeSet::new();
        for i in 1..n {
            let parent = rng.random_range(0..i);
            edges.insert((parent, i));
        }
        let extra = rng.random_range(0..=n * (n - 1) / 2);
        for _ in 0..extra {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        Graph::new(n, edges).unwrap()
    }

    proptest! {
        #[test]
        fn laplacian_annihilates_constant_vector(n in 1usize..12, seed in any::<u64>()) {
            let g = random_connected_graph(n.max(2), seed);
            let l = g.laplacian();
            let ones = alloc::vec![1.0; g.node_count()];
            let mut out = alloc::vec![0.0; g.node_count()];
            l.mul_vec(&ones, &mut out);
            // Exactly zero: rows hold small integers.
            prop_assert!(out.iter().all(|&v| v == 0.0));
        }

        #[test]
        fn spectrum_is_permutation_invariant(n in 2usize..10, seed in any::<u64>()) {
            let g = random_connected_graph(n, seed);
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
            // Random relabeling.
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            let relabeled = Graph::new(
                n,
                g.edges().iter().map(|&(a, b)| (perm[a], perm[b])),
            ).unwrap();
            let s1 = g.spectrum().unwrap();
            let s2 = relabeled.spectrum().unwrap();
            for (a, b) in s1.eigenvalues().iter().zip(s2.eigenvalues()) {
                prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }

        #[test]
        fn lambda_n_bounded_by_twice_max_degree(n in 2usize..12, seed in any::<u64>()) {
            let g = random_connected_graph(n, seed);
            let s = g.spectrum().unwrap();
            prop_assert!(s.lambda_n() <= 2.0 * g.max_degree() as f64 + 1e-9);
        }

        /// lambda_2 minimizes the Rayleigh quotient over vectors orthogonal
        /// to the constant vector, and the minimum is attained by the
        /// second eigenvector.
        #[test]
        fn rayleigh_quotient_lower_bound(n in 2usize..10, seed in any::<u64>()) {
            let g = random_connected_graph(n, seed);
            let l = g.laplacian();
            let s = g.spectrum().unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xabcdef);
            let mut lv = alloc::vec![0.0; n];
            for _ in 0..100 {
                let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let mean = v.iter().sum::<f64>() / n as f64;
                for x in &mut v {
                    *x -= mean;
                }
                let vv = dot(&v, &v);
                if vv < 1e-12 {
                    continue;
                }
                l.mul_vec(&v, &mut lv);
                let quotient = dot(&v, &lv) / vv;
                prop_assert!(quotient >= s.lambda2() - 1e-9 * s.lambda_n().max(1.0));
            }
            // The second eigenvector attains the minimum.
            let eig = sym_eigen(&l).unwrap();
            let fiedler: Vec<f64> = (0..n).map(|i| eig.vectors.get(i, 1)).collect();
            l.mul_vec(&fiedler, &mut lv);
            let q = dot(&fiedler, &lv) / dot(&fiedler, &fiedler);
            prop_assert!((q - s.lambda2()).abs() < 1e-8 * s.lambda_n().max(1.0));
            // And it is orthogonal to the constant vector.
            let ones = alloc::vec![1.0; n];
            prop_assert!(dot(&fiedler, &ones).abs() < 1e-8 * norm2(&fiedler) * (n as f64).sqrt());
        }
    }
}

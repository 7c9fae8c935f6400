//! Undirected interaction graphs and the spectral quantities consumed by gain
//! synthesis.
//!
//! Node labels in the public API (edge lists, config files) are 1-based.
//! Matrix rows and neighbor lists are 0-based.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, EigenError};

/// Default convergence tolerance for [`spectrum`].
pub const EIGEN_TOL: f64 = 1e-10;

/// Eigenvalues below this are classified as zero.
pub const ZERO_EIGEN_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least one node")]
    Empty,
    #[error("edge ({i}, {j}) references a node outside 1..={n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("self edge ({i}, {i}) is not allowed")]
    SelfEdge { i: usize },
    #[error("spectrum needs at least two nodes, got {n}")]
    TooSmallForSpectrum { n: usize },
    #[error("Laplacian eigen-solve failed: {0}")]
    Eigen(#[from] EigenError),
}

/// An undirected, unweighted graph on nodes `1..=n`.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    /// Edges as 0-based `(tail, head)` with `tail < head`, sorted.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    adjacency: DMatrix<i64>,
    laplacian: DMatrix<i64>,
    incidence: DMatrix<i64>,
}

/// Build a graph from 1-based index pairs. Duplicate and reversed pairs
/// collapse into a single edge.
///
/// Each edge is oriented from the smaller to the larger index: the incidence
/// column holds -1 at the smaller-index row and +1 at the larger one.
pub fn build_graph(n: usize, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let mut set = BTreeSet::new();
    for &(i, j) in edges {
        if i == 0 || j == 0 || i > n || j > n {
            return Err(GraphError::IndexOutOfRange { i, j, n });
        }
        if i == j {
            return Err(GraphError::SelfEdge { i });
        }
        set.insert((i.min(j) - 1, i.max(j) - 1));
    }
    let edges: Vec<(usize, usize)> = set.into_iter().collect();

    let m = edges.len();
    let mut adjacency = DMatrix::<i64>::zeros(n, n);
    let mut incidence = DMatrix::<i64>::zeros(n, m);
    let mut neighbors = vec![Vec::new(); n];
    for (k, &(a, b)) in edges.iter().enumerate() {
        adjacency[(a, b)] = 1;
        adjacency[(b, a)] = 1;
        incidence[(a, k)] = -1;
        incidence[(b, k)] = 1;
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    let mut laplacian = -adjacency.clone();
    for i in 0..n {
        laplacian[(i, i)] = neighbors[i].len() as i64;
    }

    Ok(Graph {
        n,
        edges,
        neighbors,
        adjacency,
        laplacian,
        incidence,
    })
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// 0-based oriented edges `(tail, head)`, `tail < head`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges as 1-based pairs, the form used in scenario files.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(a, b)| (a + 1, b + 1)).collect()
    }

    /// 0-based neighbors of 0-based node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn adjacency(&self) -> &DMatrix<i64> {
        &self.adjacency
    }

    pub fn laplacian(&self) -> &DMatrix<i64> {
        &self.laplacian
    }

    pub fn incidence(&self) -> &DMatrix<i64> {
        &self.incidence
    }

    pub fn laplacian_f64(&self) -> DMatrix<f64> {
        self.laplacian.map(|v| v as f64)
    }
}

/// True iff a breadth-first traversal from node 1 reaches every node.
pub fn is_connected(g: &Graph) -> bool {
    let mut seen = vec![false; g.n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(i) = queue.pop_front() {
        for &j in g.neighbors(i) {
            if !seen[j] {
                seen[j] = true;
                reached += 1;
                queue.push_back(j);
            }
        }
    }
    reached == g.n
}

/// Laplacian eigenvalues with the two that the gain conditions use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Algebraic connectivity.
    pub lambda2: f64,
    #[serde(rename = "lambdaN")]
    pub lambda_n: f64,
}

impl Spectrum {
    /// Number of eigenvalues below [`ZERO_EIGEN_TOL`].
    pub fn zero_count(&self) -> usize {
        self.eigenvalues
            .iter()
            .filter(|&&l| l.abs() < ZERO_EIGEN_TOL)
            .count()
    }

    /// Nonzero eigenvalues `lambda_2..lambda_n`.
    pub fn nonzero(&self) -> &[f64] {
        &self.eigenvalues[1..]
    }
}

pub fn spectrum(g: &Graph, tol: f64) -> Result<Spectrum, GraphError> {
    if g.n < 2 {
        return Err(GraphError::TooSmallForSpectrum { n: g.n });
    }
    let eigenvalues = linalg::symmetric_eigenvalues(&g.laplacian_f64(), tol)?;
    Ok(Spectrum {
        lambda2: eigenvalues[1],
        lambda_n: eigenvalues[g.n - 1],
        eigenvalues,
    })
}

/// `M = I - (1/n) 1 1^T`, the projector onto the zero-sum subspace.
pub fn centering_projector(n: usize) -> DMatrix<f64> {
    let inv = 1.0 / n as f64;
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 - inv } else { -inv })
}

/// The 10-node topology every replication scenario uses: the ring
/// 1-2-...-10-1 plus chords (1,5) and (3,8).
pub fn canonical_ten_node_edges() -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..=10).map(|i| (i, i % 10 + 1)).collect();
    edges.push((1, 5));
    edges.push((3, 8));
    edges
}

pub fn canonical_ten_node_graph() -> Graph {
    build_graph(10, &canonical_ten_node_edges()).expect("canonical topology is valid")
}

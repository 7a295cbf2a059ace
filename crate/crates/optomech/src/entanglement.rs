//! Pairwise logarithmic negativity and entanglement-structure graphs.
//!
//! For each two-mode reduction of the steady-state covariance matrix the
//! logarithmic negativity is `E_N = max[0, -ln(2 nu_minus)]`, where
//! `nu_minus` is the smallest symplectic eigenvalue of the partially
//! transposed reduction (vacuum variance 1/2 convention). The pairwise
//! matrix induces a graph whose edges are the pairs with `E_N` above a
//! small threshold; [`classify_structure`] names the recurring shapes.

use std::collections::HashSet;

use nalgebra::DMatrix;
use petgraph::algo::{connected_components, is_isomorphic};
use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};

use crate::dynamics::ModeLabel;
use crate::lyapunov::CovarianceMatrix;
use crate::symplectic::symplectic_eigenvalue_moduli;
use crate::Scalar;

/// Edge threshold on `E_N` below which a pair counts as separable when
/// drawing the structure graph.
pub const EDGE_THRESHOLD: f64 = 1e-5;

/// Reduction of a covariance matrix to a subset of its modes, in the
/// order given.
pub fn reduce_cm<T: Scalar>(v: &DMatrix<T>, modes: &[usize]) -> DMatrix<T> {
    let m = modes.len();
    DMatrix::from_fn(2 * m, 2 * m, |i, j| {
        let (mi, qi) = (modes[i / 2], i % 2);
        let (mj, qj) = (modes[j / 2], j % 2);
        v[(2 * mi + qi, 2 * mj + qj)]
    })
}

/// Smallest symplectic eigenvalue of the partial transpose of a two-mode
/// covariance matrix (momentum flip on the second mode).
pub fn ptranspose_nu_min<T: Scalar>(v4: &DMatrix<T>) -> T {
    assert_eq!(v4.nrows(), 4);
    assert_eq!(v4.ncols(), 4);
    let mut pvp = v4.clone();
    for k in 0..4 {
        // P = diag(1, 1, 1, -1) flips the sign of row/column 3
        pvp[(3, k)] = -pvp[(3, k)];
    }
    for k in 0..4 {
        pvp[(k, 3)] = -pvp[(k, 3)];
    }
    symplectic_eigenvalue_moduli(&pvp)[0]
}

/// Logarithmic negativity `max[0, -ln(2 nu_minus)]` of a two-mode
/// covariance matrix.
pub fn log_negativity<T: Scalar>(v4: &DMatrix<T>) -> T {
    let nu = ptranspose_nu_min(v4);
    (-(T::lit(2.0) * nu).ln()).maxv(T::zero())
}

/// Symmetric matrix of pairwise logarithmic negativities, zero diagonal.
pub fn pairwise_matrix<T: Scalar>(cm: &CovarianceMatrix<T>) -> DMatrix<T> {
    let n = cm.n_modes();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let e = log_negativity(&reduce_cm(&cm.v, &[i, j]));
            m[(i, j)] = e;
            m[(j, i)] = e;
        }
    }
    m
}

/// Named shapes of the entanglement-structure graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeLabel {
    /// No pair is entangled above threshold.
    Disconnected,
    /// A path graph.
    Linear,
    /// The four-mode square (a 4-cycle).
    Square,
    /// Chain shape with intra-cavity, nearest- and next-nearest-cavity
    /// edges all present.
    DoubleLadder,
    /// Every pair entangled with every other.
    GhzComplete,
    Other,
}

impl std::fmt::Display for ShapeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ShapeLabel::Disconnected => "disconnected",
            ShapeLabel::Linear => "linear",
            ShapeLabel::Square => "square",
            ShapeLabel::DoubleLadder => "double_ladder",
            ShapeLabel::GhzComplete => "ghz_complete",
            ShapeLabel::Other => "other",
        };
        f.write_str(s)
    }
}

fn path_graph(n: usize) -> UnGraph<(), ()> {
    let mut g = UnGraph::new_undirected();
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for w in nodes.windows(2) {
        g.add_edge(w[0], w[1], ());
    }
    g
}

fn cycle_graph(n: usize) -> UnGraph<(), ()> {
    let mut g = path_graph(n);
    let idx: Vec<_> = g.node_indices().collect();
    g.add_edge(idx[n - 1], idx[0], ());
    g
}

/// Classifies the structure graph of a pairwise negativity matrix.
///
/// Edges are pairs with `E_N > eps`. Isolated (degree-zero) modes are
/// dropped before shape matching so that, e.g., a square among the four
/// optical modes still reads as [`ShapeLabel::Square`] when the
/// mechanical modes have disentangled.
pub fn classify_structure<T: Scalar>(
    pairwise: &DMatrix<T>,
    ordering: &[ModeLabel],
    eps: T,
) -> ShapeLabel {
    let n = ordering.len();
    assert_eq!(pairwise.nrows(), n);
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| pairwise[(i, j)] > eps)
        .collect();
    if edges.is_empty() {
        return ShapeLabel::Disconnected;
    }

    let active: Vec<usize> = {
        let mut s: Vec<usize> = edges.iter().flat_map(|&(i, j)| [i, j]).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let m = active.len();
    let pos = |v: usize| active.binary_search(&v).unwrap();

    let mut g = UnGraph::<(), ()>::new_undirected();
    let nodes: Vec<_> = (0..m).map(|_| g.add_node(())).collect();
    for &(i, j) in &edges {
        g.add_edge(nodes[pos(i)], nodes[pos(j)], ());
    }
    let connected = connected_components(&g) == 1;

    if m >= 3 && edges.len() == m * (m - 1) / 2 {
        return ShapeLabel::GhzComplete;
    }
    if m == 4 && connected && is_isomorphic(&g, &cycle_graph(4)) {
        return ShapeLabel::Square;
    }
    if connected && is_isomorphic(&g, &path_graph(m)) {
        return ShapeLabel::Linear;
    }

    // ladder test on cavity distances of the surviving edges
    let distances: HashSet<usize> = edges
        .iter()
        .map(|&(i, j)| ordering[i].cavity.abs_diff(ordering[j].cavity))
        .collect();
    if connected && distances.contains(&0) && distances.contains(&1) && distances.contains(&2) {
        return ShapeLabel::DoubleLadder;
    }

    ShapeLabel::Other
}

/// Full pairwise report of one covariance matrix, serializable as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport<T> {
    pub labels: Vec<String>,
    /// Symmetric matrix of pairwise `E_N`, row-major.
    pub pairwise: Vec<Vec<T>>,
    pub shape: ShapeLabel,
    pub edge_threshold: T,
}

impl<T: Scalar> EntanglementReport<T> {
    pub fn from_covariance(cm: &CovarianceMatrix<T>) -> Self {
        Self::with_threshold(cm, T::lit(EDGE_THRESHOLD))
    }

    pub fn with_threshold(cm: &CovarianceMatrix<T>, eps: T) -> Self {
        let pw = pairwise_matrix(cm);
        let shape = classify_structure(&pw, &cm.ordering, eps);
        let n = cm.n_modes();
        EntanglementReport {
            labels: cm.ordering.iter().map(|l| l.to_string()).collect(),
            pairwise: (0..n)
                .map(|i| (0..n).map(|j| pw[(i, j)]).collect())
                .collect(),
            shape,
            edge_threshold: eps,
        }
    }

    /// `E_N` between labeled modes, by position in the ordering.
    pub fn pair(&self, i: usize, j: usize) -> T {
        self.pairwise[i][j]
    }
}

impl<T: Scalar + Serialize> EntanglementReport<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

impl<T: Scalar> EntanglementReport<T> {
    /// Graphviz DOT rendering of the structure graph; edge labels carry
    /// the negativities.
    pub fn to_dot(&self) -> String {
        let n = self.labels.len();
        let mut out = String::from("graph entanglement {\n");
        for l in &self.labels {
            out.push_str(&format!("    \"{l}\";\n"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let e = self.pairwise[i][j];
                if e > self.edge_threshold {
                    out.push_str(&format!(
                        "    \"{}\" -- \"{}\" [label=\"{:.3e}\"];\n",
                        self.labels[i],
                        self.labels[j],
                        e.to_f64().unwrap_or(f64::NAN)
                    ));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Covariance matrix of a two-mode squeezed vacuum with parameter `r`,
/// the analytic benchmark: its logarithmic negativity is exactly `2 r`.
pub fn tmsv_covariance<T: Scalar>(r: T) -> DMatrix<T> {
    let half = T::lit(0.5);
    let c = half * (T::lit(2.0) * r).cosh();
    let s = half * (T::lit(2.0) * r).sinh();
    let mut v = DMatrix::zeros(4, 4);
    for k in 0..4 {
        v[(k, k)] = c;
    }
    v[(0, 2)] = s;
    v[(2, 0)] = s;
    v[(1, 3)] = -s;
    v[(3, 1)] = -s;
    v
}

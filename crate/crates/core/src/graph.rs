//! Time-varying digraph sequences and their row-stochastic weight matrices:
//! generation, validation, backward products, and estimation of the
//! absolute-probability (Perron) vector sequence used by the diagnostics.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2};
use petgraph::graph::DiGraph;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::stream::keyed_rng;

const ROW_SUM_TOL: f64 = 1e-12;

/// Salts separating the random-sequence substreams.
const SALT_CYCLE: u64 = 0x6379_636c;
const SALT_EXTRA: u64 = 0x6578_7472;

/// A directed graph on nodes 0..n. An edge (i, j) means node i receives from
/// node j; every node carries a self-loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Digraph {
    /// Build from receive edges; self-loops are added for every node.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for i in 0..n {
            set.insert((i, i));
        }
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::EdgeOutOfRange { i, j, n });
            }
            set.insert((i, j));
        }
        Ok(Digraph { n, edges: set })
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                edges.insert((i, j));
            }
        }
        Digraph { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    /// Nodes j with (i, j) in the edge set, in ascending order.
    pub fn in_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.has_edge(i, j)).collect()
    }

    pub fn union(graphs: &[&Digraph]) -> Result<Digraph> {
        let n = graphs.first().map(|g| g.n).ok_or(Error::EmptyProblem)?;
        let mut edges = BTreeSet::new();
        for g in graphs {
            if g.n != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: g.n,
                });
            }
            edges.extend(g.edges.iter().copied());
        }
        Ok(Digraph { n, edges })
    }

    /// Strong connectivity via a standard linear-time SCC computation.
    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut g = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..self.n).map(|_| g.add_node(())).collect();
        for &(i, j) in &self.edges {
            if i != j {
                g.add_edge(nodes[j], nodes[i], ());
            }
        }
        let sccs = petgraph::algo::tarjan_scc(&g);
        sccs.len() == 1 && sccs[0].len() == self.n
    }
}

/// A row-stochastic weight matrix adapted to a digraph; every positive entry
/// is at least gamma.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    a: Array2<f64>,
    gamma: f64,
}

impl WeightMatrix {
    /// Equal weights over in-neighbors including self: a_ij = 1/|N_i^in|.
    pub fn from_digraph_equal(g: &Digraph, gamma: f64) -> Result<Self> {
        let n = g.n();
        let mut a = Array2::zeros((n, n));
        let mut min_entry = f64::INFINITY;
        for i in 0..n {
            let neigh = g.in_neighbors(i);
            let w = 1.0 / neigh.len() as f64;
            min_entry = min_entry.min(w);
            for j in neigh {
                a[[i, j]] = w;
            }
        }
        if gamma <= 0.0 || min_entry < gamma {
            return Err(Error::GammaInfeasible { gamma, min_entry });
        }
        Ok(WeightMatrix { a, gamma })
    }

    /// Validate an explicit matrix: nonnegative, rows summing to one,
    /// positive diagonal, and every positive entry at least gamma.
    pub fn from_matrix(a: Array2<f64>, gamma: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        for i in 0..n {
            let sum: f64 = a.row(i).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotRowStochastic { row: i, sum });
            }
            if a[[i, i]] <= 0.0 {
                return Err(Error::MissingSelfLoop(i));
            }
            for j in 0..n {
                let v = a[[i, j]];
                if v < 0.0 || (v > 0.0 && v < gamma) {
                    return Err(Error::EntryBelowGamma {
                        i,
                        j,
                        value: v,
                        gamma,
                    });
                }
            }
        }
        Ok(WeightMatrix { a, gamma })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.a[[i, j]]
    }

    /// The support digraph of the positive entries.
    pub fn digraph(&self) -> Digraph {
        let n = self.n();
        let mut edges = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                if self.a[[i, j]] > 0.0 {
                    edges.insert((i, j));
                }
            }
        }
        Digraph { n, edges }
    }

    /// True if some column sum differs from one, i.e. the matrix is
    /// row- but not doubly-stochastic.
    pub fn is_unbalanced(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n).any(|j| ((0..n).map(|i| self.a[[i, j]]).sum::<f64>() - 1.0).abs() > tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceMode {
    Static(WeightMatrix),
    /// Cycles through the given matrices: A^k = phases[k mod phases.len()].
    Periodic(Vec<WeightMatrix>),
    /// Counter-seeded random graphs. Every round k with k = 0 mod B carries a
    /// fresh random Hamiltonian cycle, so each window of B consecutive rounds
    /// contains a full cycle and the union over any such window is strongly
    /// connected by construction.
    SeededRandom {
        n: usize,
        seed: u64,
        extra_edge_prob: f64,
    },
}

/// An immutable description of a time-varying weight-matrix sequence:
/// a pure function from round index to WeightMatrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSequence {
    mode: SequenceMode,
    b_window: usize,
    gamma: f64,
}

impl GraphSequence {
    pub fn fixed(matrix: WeightMatrix) -> Self {
        let gamma = matrix.gamma();
        GraphSequence {
            mode: SequenceMode::Static(matrix),
            b_window: 1,
            gamma,
        }
    }

    pub fn periodic(phases: Vec<WeightMatrix>, b_window: usize) -> Result<Self> {
        let first = phases.first().ok_or(Error::EmptyProblem)?;
        let n = first.n();
        let gamma = first.gamma();
        for ph in &phases {
            if ph.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: ph.n(),
                });
            }
        }
        Ok(GraphSequence {
            mode: SequenceMode::Periodic(phases),
            b_window,
            gamma,
        })
    }

    pub fn seeded_random(
        n: usize,
        b_window: usize,
        gamma: f64,
        seed: u64,
        extra_edge_prob: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyProblem);
        }
        // equal weights guarantee entries >= 1/n
        if gamma <= 0.0 || gamma > 1.0 / n as f64 {
            return Err(Error::GammaInfeasible {
                gamma,
                min_entry: 1.0 / n as f64,
            });
        }
        if b_window == 0 {
            return Err(Error::InvalidConfig("b_window must be >= 1".into()));
        }
        Ok(GraphSequence {
            mode: SequenceMode::SeededRandom {
                n,
                seed,
                extra_edge_prob,
            },
            b_window,
            gamma,
        })
    }

    pub fn n(&self) -> usize {
        match &self.mode {
            SequenceMode::Static(m) => m.n(),
            SequenceMode::Periodic(ph) => ph[0].n(),
            SequenceMode::SeededRandom { n, .. } => *n,
        }
    }

    pub fn b_window(&self) -> usize {
        self.b_window
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mode(&self) -> &SequenceMode {
        &self.mode
    }

    /// Number of distinct phases for periodic sequences.
    pub fn period(&self) -> Option<usize> {
        match &self.mode {
            SequenceMode::Static(_) => Some(1),
            SequenceMode::Periodic(ph) => Some(ph.len()),
            SequenceMode::SeededRandom { .. } => None,
        }
    }

    pub fn digraph(&self, k: u64) -> Digraph {
        match &self.mode {
            SequenceMode::Static(m) => m.digraph(),
            SequenceMode::Periodic(ph) => ph[(k % ph.len() as u64) as usize].digraph(),
            SequenceMode::SeededRandom {
                n,
                seed,
                extra_edge_prob,
            } => random_digraph(*n, self.b_window as u64, *seed, *extra_edge_prob, k),
        }
    }

    pub fn matrix(&self, k: u64) -> WeightMatrix {
        match &self.mode {
            SequenceMode::Static(m) => m.clone(),
            SequenceMode::Periodic(ph) => ph[(k % ph.len() as u64) as usize].clone(),
            SequenceMode::SeededRandom { .. } => {
                let g = self.digraph(k);
                WeightMatrix::from_digraph_equal(&g, self.gamma)
                    .expect("gamma validated at construction")
            }
        }
    }
}

fn random_digraph(n: usize, b: u64, seed: u64, extra_edge_prob: f64, k: u64) -> Digraph {
    let mut edges: BTreeSet<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    if k.is_multiple_of(b) {
        let window = k / b;
        let mut rng = keyed_rng(&[seed, SALT_CYCLE, window]);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        for i in 0..n {
            // perm[i+1] receives from perm[i]
            edges.insert((perm[(i + 1) % n], perm[i]));
        }
    }
    if extra_edge_prob > 0.0 {
        let mut rng = keyed_rng(&[seed, SALT_EXTRA, k]);
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.random::<f64>() < extra_edge_prob {
                    edges.insert((i, j));
                }
            }
        }
    }
    Digraph { n, edges }
}

/// True iff the union digraph over every window [t, t+b) within the horizon
/// is strongly connected.
pub fn check_joint_connectivity(seq: &GraphSequence, b: usize, horizon: u64) -> bool {
    if b == 0 || (horizon as usize) < b {
        return false;
    }
    for t in 0..=(horizon - b as u64) {
        let graphs: Vec<Digraph> = (t..t + b as u64).map(|k| seq.digraph(k)).collect();
        let refs: Vec<&Digraph> = graphs.iter().collect();
        let union = match Digraph::union(&refs) {
            Ok(u) => u,
            Err(_) => return false,
        };
        if !union.is_strongly_connected() {
            return false;
        }
    }
    true
}

/// The ordered backward product A^{s-1} ... A^k; the empty product (s = k)
/// is the identity.
pub fn backward_product(seq: &GraphSequence, k: u64, s: u64) -> Result<Array2<f64>> {
    if s < k {
        return Err(Error::InvalidWindow { s, k });
    }
    let n = seq.n();
    let mut prod = Array2::eye(n);
    for l in k..s {
        prod = seq.matrix(l).matrix().dot(&prod);
    }
    Ok(prod)
}

/// An estimate of the absolute-probability vector at round k, with the
/// achieved row-spread residual of the finite backward product.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronEstimate {
    pub k: u64,
    pub pi: Array1<f64>,
    pub residual: f64,
}

impl PerronEstimate {
    /// How well this estimate chains to its successor: the max-norm of
    /// pi^k' - pi^{k+1}' A^k, which is zero for the exact limit vectors.
    pub fn consistency_residual(&self, next: &PerronEstimate, a_k: &WeightMatrix) -> f64 {
        let mapped = next.pi.dot(a_k.matrix());
        self.pi
            .iter()
            .zip(mapped.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Analytical lower bound on the Perron entries for compliant sequences.
pub fn eta_lower_bound(gamma: f64, n: usize, b: usize) -> f64 {
    gamma.powi(((n - 1) * b) as i32)
}

fn row_spread(m: &Array2<f64>) -> f64 {
    let n = m.ncols();
    let mut spread: f64 = 0.0;
    for j in 0..n {
        let col = m.column(j);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in col.iter() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        spread = spread.max(hi - lo);
    }
    spread
}

/// Estimate pi^k by extending the backward product A^{s:k} until its rows
/// agree within `tol` (or `max_window` is exhausted; the achieved spread is
/// reported in the residual either way).
pub fn estimate_pi(seq: &GraphSequence, k: u64, tol: f64, max_window: u64) -> PerronEstimate {
    let n = seq.n();
    let mut prod = Array2::eye(n);
    let mut residual = row_spread(&prod);
    for step in 0..max_window {
        if residual <= tol {
            break;
        }
        prod = seq.matrix(k + step).matrix().dot(&prod);
        residual = row_spread(&prod);
    }
    let mut pi = prod.row(0).to_owned();
    let sum = pi.sum();
    if sum > 0.0 {
        pi /= sum;
    }
    PerronEstimate { k, pi, residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn two_node_unbalanced() -> WeightMatrix {
        WeightMatrix::from_matrix(array![[0.5, 0.5], [0.25, 0.75]], 0.25).unwrap()
    }

    #[test]
    fn equal_weights_split_over_in_neighbors() {
        // node 0 receives from node 1; node 1 only from itself
        let g = Digraph::from_edges(2, &[(0, 1)]).unwrap();
        let w = WeightMatrix::from_digraph_equal(&g, 0.4).unwrap();
        assert_eq!(w.matrix(), &array![[0.5, 0.5], [0.0, 1.0]]);
    }

    #[test]
    fn complete_graph_gives_uniform_rows() {
        let g = Digraph::complete(3);
        let w = WeightMatrix::from_digraph_equal(&g, 0.3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((w.entry(i, j) - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn self_loops_only_gives_identity() {
        let g = Digraph::from_edges(3, &[]).unwrap();
        let w = WeightMatrix::from_digraph_equal(&g, 0.9).unwrap();
        assert_eq!(w.matrix(), &Array2::<f64>::eye(3));
    }

    #[test]
    fn infeasible_gamma_is_rejected() {
        let g = Digraph::complete(4);
        assert!(matches!(
            WeightMatrix::from_digraph_equal(&g, 0.3),
            Err(Error::GammaInfeasible { .. })
        ));
    }

    #[test]
    fn explicit_matrix_validation() {
        assert!(WeightMatrix::from_matrix(array![[0.5, 0.5], [0.25, 0.75]], 0.25).is_ok());
        assert!(matches!(
            WeightMatrix::from_matrix(array![[0.6, 0.5], [0.25, 0.75]], 0.25),
            Err(Error::NotRowStochastic { .. })
        ));
        assert!(matches!(
            WeightMatrix::from_matrix(array![[0.5, 0.5], [0.1, 0.9]], 0.25),
            Err(Error::EntryBelowGamma { .. })
        ));
        assert!(matches!(
            WeightMatrix::from_matrix(array![[0.0, 1.0], [0.5, 0.5]], 0.25),
            Err(Error::MissingSelfLoop(0))
        ));
    }

    #[test]
    fn unbalance_detection() {
        assert!(two_node_unbalanced().is_unbalanced(1e-12));
        let balanced = WeightMatrix::from_matrix(array![[0.5, 0.5], [0.5, 0.5]], 0.25).unwrap();
        assert!(!balanced.is_unbalanced(1e-12));
    }

    /// The three-phase directed cycle: jointly connected for B = 3 but not 2.
    fn directed_cycle_phases() -> GraphSequence {
        let phases = [
            Digraph::from_edges(3, &[(1, 0)]).unwrap(),
            Digraph::from_edges(3, &[(2, 1)]).unwrap(),
            Digraph::from_edges(3, &[(0, 2)]).unwrap(),
        ];
        let mats = phases
            .iter()
            .map(|g| WeightMatrix::from_digraph_equal(g, 0.5).unwrap())
            .collect();
        GraphSequence::periodic(mats, 3).unwrap()
    }

    #[test]
    fn joint_connectivity_window_three() {
        let seq = directed_cycle_phases();
        assert!(check_joint_connectivity(&seq, 3, 12));
        assert!(!check_joint_connectivity(&seq, 2, 12));
    }

    #[test]
    fn static_complete_graph_connected_with_b_one() {
        let w = WeightMatrix::from_digraph_equal(&Digraph::complete(3), 0.3).unwrap();
        let seq = GraphSequence::fixed(w);
        assert!(check_joint_connectivity(&seq, 1, 5));
    }

    #[test]
    fn backward_product_boundaries() {
        let seq = GraphSequence::fixed(two_node_unbalanced());
        assert_eq!(backward_product(&seq, 3, 3).unwrap(), Array2::<f64>::eye(2));
        let a = two_node_unbalanced();
        let a2 = a.matrix().dot(a.matrix());
        assert_eq!(backward_product(&seq, 0, 2).unwrap(), a2);
        assert!(matches!(
            backward_product(&seq, 4, 2),
            Err(Error::InvalidWindow { .. })
        ));
    }

    #[test]
    fn backward_products_stay_row_stochastic() {
        let seq = directed_cycle_phases();
        for (k, s) in [(0, 5), (2, 9), (1, 1)] {
            let p = backward_product(&seq, k, s).unwrap();
            for i in 0..3 {
                assert!((p.row(i).sum() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn static_perron_estimate_matches_hand_derivation() {
        // pi' A = pi', pi'1 = 1 for A = [[.5,.5],[.25,.75]] gives (1/3, 2/3)
        let seq = GraphSequence::fixed(two_node_unbalanced());
        let est = estimate_pi(&seq, 0, 1e-13, 200);
        assert!((est.pi[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((est.pi[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!(est.residual <= 1e-13);
    }

    #[test]
    fn doubly_stochastic_perron_is_uniform() {
        let w = WeightMatrix::from_matrix(array![[0.5, 0.5], [0.5, 0.5]], 0.25).unwrap();
        let est = estimate_pi(&GraphSequence::fixed(w), 0, 1e-13, 50);
        assert!((est.pi[0] - 0.5).abs() < 1e-14);
        assert!((est.pi[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn consecutive_estimates_chain_through_the_matrix() {
        let seq = directed_cycle_phases();
        for k in 0..6 {
            let cur = estimate_pi(&seq, k, 1e-11, 500);
            let next = estimate_pi(&seq, k + 1, 1e-11, 500);
            let res = cur.consistency_residual(&next, &seq.matrix(k));
            assert!(res <= 2e-11, "k = {k}: residual {res}");
        }
    }

    #[test]
    fn random_sequences_pass_their_advertised_window() {
        for seed in 0..5u64 {
            let seq = GraphSequence::seeded_random(5, 3, 0.2, seed, 0.1).unwrap();
            assert!(check_joint_connectivity(&seq, 3, 40), "seed {seed}");
        }
    }

    #[test]
    fn random_sequence_is_a_pure_function_of_k() {
        let seq = GraphSequence::seeded_random(4, 2, 0.25, 9, 0.3).unwrap();
        for k in 0..10 {
            assert_eq!(seq.matrix(k), seq.matrix(k));
            assert_eq!(seq.digraph(k), seq.digraph(k));
        }
    }

    #[test]
    fn perron_entries_respect_eta_bound() {
        let seq = GraphSequence::seeded_random(4, 2, 0.25, 3, 0.2).unwrap();
        let eta = eta_lower_bound(seq.gamma(), 4, 2);
        for k in 0..5 {
            let est = estimate_pi(&seq, k, 1e-11, 1000);
            for v in est.pi.iter() {
                assert!(*v >= eta - 1e-10);
            }
        }
    }
}

//! Directed graphs of patrol locations, canonical topologies, and horizon
//! classification.
//!
//! Node labels are 1-based everywhere in the public API and in serialized
//! artifacts; adjacency is stored 0-based internally and converted exactly
//! once at this boundary.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite directed graph on nodes 1..=n. Self-loops are allowed; parallel
/// edges are collapsed. Every node must have at least one outgoing edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl DiGraph {
    /// Builds a graph from 1-based edge pairs. Duplicate edges collapse.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == 0 || i > n {
                return Err(Error::LabelOutOfRange { label: i, n });
            }
            if j == 0 || j > n {
                return Err(Error::LabelOutOfRange { label: j, n });
            }
            set.insert((i - 1, j - 1));
        }
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for &(u, v) in &set {
            out[u].push(v);
            inn[v].push(u);
        }
        // BTreeSet iteration is sorted, so adjacency lists come out sorted.
        if let Some(u) = out.iter().position(|o| o.is_empty()) {
            return Err(Error::DanglingNode { node: u + 1 });
        }
        Ok(DiGraph { n, edges: set, out, inn })
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct edges, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Membership test with 1-based labels.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i >= 1 && j >= 1 && i <= self.n && j <= self.n && self.edges.contains(&(i - 1, j - 1))
    }

    /// All edges as 1-based pairs in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(u, v)| (u + 1, v + 1)).collect()
    }

    /// Out-degree of 1-based node `i`, self-loop included.
    pub fn out_degree(&self, i: usize) -> usize {
        self.out[i - 1].len()
    }

    pub(crate) fn has_edge0(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u, v))
    }

    pub(crate) fn out0(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub(crate) fn in0(&self, u: usize) -> &[usize] {
        &self.inn[u]
    }

    /// Distinct nodes adjacent to `u` in either direction, self excluded.
    pub(crate) fn neighbors0(&self, u: usize) -> Vec<usize> {
        let mut nb: Vec<usize> = self.out[u]
            .iter()
            .chain(self.inn[u].iter())
            .copied()
            .filter(|&v| v != u)
            .collect();
        nb.sort_unstable();
        nb.dedup();
        nb
    }

    /// Nodes with exactly one distinct neighbor, as (leaf, neighbor) pairs,
    /// 0-based, ascending by leaf.
    pub(crate) fn leaves0(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .filter_map(|u| {
                let nb = self.neighbors0(u);
                if nb.len() == 1 {
                    Some((u, nb[0]))
                } else {
                    None
                }
            })
            .collect()
    }

    /// BFS distances from 0-based `src` over out-edges, ignoring self-loops.
    /// `usize::MAX` marks unreachable nodes.
    fn bfs0(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.out[u] {
                if v != u && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// BFS reachability from `src` with 0-based node `skip` removed.
    pub(crate) fn reachable_without0(&self, src: usize, skip: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        if src == skip {
            return seen;
        }
        seen[src] = true;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.out[u] {
                if v != skip && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// Star topology: node 1 is the hub, nodes 2..=n are leaves; every adjacency
/// is bidirectional and every node carries a self-loop.
pub fn build_star(n: usize) -> Result<DiGraph> {
    if n < 3 {
        return Err(Error::Domain(format!("star needs n >= 3, got {n}")));
    }
    let mut edges = Vec::new();
    for v in 2..=n {
        edges.push((1, v));
        edges.push((v, 1));
    }
    for v in 1..=n {
        edges.push((v, v));
    }
    DiGraph::new(n, edges)
}

/// Line topology: nodes labeled successively 1..=n with bidirectional edges
/// between consecutive labels and a self-loop at every node.
pub fn build_line(n: usize) -> Result<DiGraph> {
    if n < 2 {
        return Err(Error::Domain(format!("line needs n >= 2, got {n}")));
    }
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((v, v + 1));
        edges.push((v + 1, v));
    }
    for v in 1..=n {
        edges.push((v, v));
    }
    DiGraph::new(n, edges)
}

/// Complete topology: all n^2 ordered pairs, self-loops included.
pub fn build_complete(n: usize) -> Result<DiGraph> {
    if n < 2 {
        return Err(Error::Domain(format!("complete graph needs n >= 2, got {n}")));
    }
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            edges.push((i, j));
        }
    }
    DiGraph::new(n, edges)
}

/// True when every node reaches every other along directed edges.
pub fn is_strongly_connected(g: &DiGraph) -> bool {
    if g.n() == 1 {
        return true;
    }
    let fwd = g.bfs0(0);
    if fwd.contains(&usize::MAX) {
        return false;
    }
    // Reverse reachability from node 0 over in-edges.
    let mut seen = vec![false; g.n()];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in g.in0(u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Longest shortest-path length over ordered node pairs, self-loops ignored.
pub fn diameter(g: &DiGraph) -> Result<usize> {
    if !is_strongly_connected(g) {
        return Err(Error::NotStronglyConnected);
    }
    let mut best = 0;
    for u in 0..g.n() {
        let dist = g.bfs0(u);
        for (v, &d) in dist.iter().enumerate() {
            if v != u && d > best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// How an attack horizon relates to the graph's geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauClassification {
    /// The horizon is shorter than the diameter: some pair is uncapturable
    /// and every strategy has value exactly 0.
    TrivialZero,
    /// The game is interesting: no strategy is trivially perfect.
    Nontrivial,
    /// A closed walk through all nodes fits inside the horizon, so a
    /// deterministic sweep would capture with certainty.
    TrivialOne,
    /// The horizon is at least n and no short enough closed spanning walk
    /// was exhibited; the class could not be decided.
    Unknown,
}

/// Classification of a horizon together with the geometry that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauClass {
    pub classification: TauClassification,
    pub diameter: usize,
    /// Length of the shortest closed spanning walk this classification could
    /// exhibit, when one is known.
    pub closed_walk_bound: Option<usize>,
}

/// True when all ordered pairs of distinct nodes are edges.
pub(crate) fn is_complete_shape(g: &DiGraph) -> bool {
    (0..g.n()).all(|u| (0..g.n()).all(|v| u == v || g.has_edge0(u, v)))
}

/// The hub node of a star shape, if the graph is one (n >= 3, bidirectional
/// hub-leaf edges, no leaf-leaf edges, self-loops ignored).
fn star_center(g: &DiGraph) -> Option<usize> {
    let n = g.n();
    if n < 3 {
        return None;
    }
    'center: for c in 0..n {
        for v in 0..n {
            if v == c {
                continue;
            }
            if !g.has_edge0(c, v) || !g.has_edge0(v, c) {
                continue 'center;
            }
            for w in 0..n {
                if w != v && w != c && (g.has_edge0(v, w) || g.has_edge0(w, v)) {
                    continue 'center;
                }
            }
        }
        return Some(c);
    }
    None
}

/// True when the graph is a path under some labeling: connected, acyclic as
/// an undirected graph, two endpoints, all adjacencies bidirectional.
fn is_path_shape(g: &DiGraph) -> bool {
    let n = g.n();
    if n < 2 {
        return false;
    }
    let mut deg = vec![0usize; n];
    let mut undirected = 0usize;
    for u in 0..n {
        for v in (u + 1)..n {
            let fwd = g.has_edge0(u, v);
            let bwd = g.has_edge0(v, u);
            if fwd != bwd {
                return false;
            }
            if fwd {
                deg[u] += 1;
                deg[v] += 1;
                undirected += 1;
            }
        }
    }
    if undirected != n - 1 {
        return false;
    }
    let ones = deg.iter().filter(|&&d| d == 1).count();
    let twos = deg.iter().filter(|&&d| d == 2).count();
    // A tree with n-1 edges and path degrees is connected automatically.
    ones == 2 && twos == n - 2
}

/// Length of a closed spanning walk if one can be exhibited cheaply:
/// the canonical cycle 1 -> 2 -> ... -> n -> 1, or a doubled traversal of a
/// spanning tree of the bidirectional subgraph.
fn heuristic_closed_walk(g: &DiGraph) -> Option<usize> {
    let n = g.n();
    let cycle = (0..n).all(|u| g.has_edge0(u, (u + 1) % n));
    let mut best: Option<usize> = if cycle { Some(n) } else { None };
    // Undirected spanning tree over mutually connected pairs.
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &v in g.out0(u) {
            if v != u && !seen[v] && g.has_edge0(v, u) {
                seen[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    if reached == n && n >= 2 {
        let doubled = 2 * (n - 1);
        best = Some(best.map_or(doubled, |b| b.min(doubled)));
    }
    best
}

/// Classifies an attack horizon against a strongly connected graph.
///
/// Canonical topologies get exact thresholds; other graphs get `TrivialOne`
/// only when a closed spanning walk of length <= tau is exhibited, and
/// `Unknown` when tau >= n but no such walk was found.
pub fn classify_tau(g: &DiGraph, tau: usize) -> Result<TauClass> {
    if tau == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let d = diameter(g)?;
    let n = g.n();

    let exact_bound = if is_complete_shape(g) {
        Some(n)
    } else if star_center(g).is_some() || is_path_shape(g) {
        Some(2 * (n - 1))
    } else {
        None
    };

    if tau < d {
        return Ok(TauClass {
            classification: TauClassification::TrivialZero,
            diameter: d,
            closed_walk_bound: exact_bound.or_else(|| heuristic_closed_walk(g)),
        });
    }

    if let Some(bound) = exact_bound {
        let classification = if tau >= bound {
            TauClassification::TrivialOne
        } else {
            TauClassification::Nontrivial
        };
        return Ok(TauClass { classification, diameter: d, closed_walk_bound: Some(bound) });
    }

    // Any closed walk visiting all n nodes takes at least n steps, so
    // horizons below n cannot admit a perfect sweep.
    if tau < n {
        return Ok(TauClass {
            classification: TauClassification::Nontrivial,
            diameter: d,
            closed_walk_bound: heuristic_closed_walk(g),
        });
    }
    let walk = heuristic_closed_walk(g);
    let classification = match walk {
        Some(w) if tau >= w => TauClassification::TrivialOne,
        _ => TauClassification::Unknown,
    };
    Ok(TauClass { classification, diameter: d, closed_walk_bound: walk })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn star_3_has_exact_edge_set() {
        let g = build_star(3).unwrap();
        let want = vec![(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1), (3, 3)];
        assert_eq!(g.edges(), want);
        assert_eq!(g.edge_count(), 7);
    }

    #[test]
    fn star_4_degrees_and_count() {
        let g = build_star(4).unwrap();
        // 6 hub-leaf directed edges plus 4 self-loops.
        assert_eq!(g.edge_count(), 10);
        assert_eq!(g.out_degree(1), 4);
        assert_eq!(g.out_degree(2), 2);
    }

    #[test]
    fn star_rejects_small_n() {
        assert!(build_star(2).is_err());
    }

    #[test]
    fn line_edge_sets() {
        let g = build_line(3).unwrap();
        let want = vec![(1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (3, 2), (3, 3)];
        assert_eq!(g.edges(), want);
        let g5 = build_line(5).unwrap();
        assert_eq!(g5.edge_count(), 8 + 5);
    }

    #[test]
    fn complete_edge_counts() {
        assert_eq!(build_complete(3).unwrap().edge_count(), 9);
        assert_eq!(build_complete(2).unwrap().edge_count(), 4);
    }

    #[test]
    fn rejects_dangling_node_and_bad_labels() {
        let err = DiGraph::new(3, vec![(1, 2), (2, 1), (3, 1)]);
        assert!(err.is_ok());
        let err = DiGraph::new(3, vec![(1, 2), (2, 1)]);
        assert!(matches!(err, Err(Error::DanglingNode { node: 3 })));
        let err = DiGraph::new(3, vec![(1, 4), (2, 1), (3, 1)]);
        assert!(matches!(err, Err(Error::LabelOutOfRange { label: 4, n: 3 })));
        let err = DiGraph::new(3, vec![(0, 1), (2, 1), (3, 1)]);
        assert!(err.is_err());
    }

    #[test]
    fn strong_connectivity_cases() {
        assert!(is_strongly_connected(&build_line(4).unwrap()));
        assert!(is_strongly_connected(&build_complete(5).unwrap()));
        // One-way path cannot return.
        let g = DiGraph::new(3, vec![(1, 2), (2, 3), (3, 3)]).unwrap();
        assert!(!is_strongly_connected(&g));
    }

    #[test]
    fn diameters_of_canonical_graphs() {
        assert_eq!(diameter(&build_line(4).unwrap()).unwrap(), 3);
        assert_eq!(diameter(&build_star(5).unwrap()).unwrap(), 2);
        assert_eq!(diameter(&build_complete(6).unwrap()).unwrap(), 1);
        for n in 3..=12 {
            assert_eq!(diameter(&build_line(n).unwrap()).unwrap(), n - 1);
        }
    }

    #[test]
    fn diameter_requires_strong_connectivity() {
        let g = DiGraph::new(2, vec![(1, 2), (2, 2)]).unwrap();
        assert!(matches!(diameter(&g), Err(Error::NotStronglyConnected)));
    }

    #[test]
    fn line_horizon_thresholds() {
        let g = build_line(4).unwrap();
        let classify = |t| classify_tau(&g, t).unwrap().classification;
        assert_eq!(classify(2), TauClassification::TrivialZero);
        assert_eq!(classify(3), TauClassification::Nontrivial);
        assert_eq!(classify(4), TauClassification::Nontrivial);
        assert_eq!(classify(5), TauClassification::Nontrivial);
        assert_eq!(classify(6), TauClassification::TrivialOne);
        assert_eq!(classify_tau(&g, 2).unwrap().diameter, 3);
        assert_eq!(classify_tau(&g, 6).unwrap().closed_walk_bound, Some(6));
    }

    #[test]
    fn star_and_complete_horizon_thresholds() {
        let s = build_star(4).unwrap();
        assert_eq!(classify_tau(&s, 1).unwrap().classification, TauClassification::TrivialZero);
        assert_eq!(classify_tau(&s, 5).unwrap().classification, TauClassification::Nontrivial);
        assert_eq!(classify_tau(&s, 6).unwrap().classification, TauClassification::TrivialOne);
        let c = build_complete(4).unwrap();
        assert_eq!(classify_tau(&c, 3).unwrap().classification, TauClassification::Nontrivial);
        assert_eq!(classify_tau(&c, 4).unwrap().classification, TauClassification::TrivialOne);
    }

    #[test]
    fn general_graph_classification_falls_back_to_walks() {
        // Directed ring plus self-loops: canonical cycle of length n exists.
        let n = 5;
        let mut edges: Vec<(usize, usize)> = (1..=n).map(|v| (v, v % n + 1)).collect();
        edges.extend((1..=n).map(|v| (v, v)));
        let g = DiGraph::new(n, edges).unwrap();
        // The ring's diameter is n - 1 = 4, so one step fewer is hopeless and
        // the full circuit certifies a sweep at tau = n.
        assert_eq!(classify_tau(&g, 3).unwrap().classification, TauClassification::TrivialZero);
        assert_eq!(classify_tau(&g, 4).unwrap().classification, TauClassification::Nontrivial);
        assert_eq!(classify_tau(&g, 5).unwrap().classification, TauClassification::TrivialOne);
        assert_eq!(classify_tau(&g, 5).unwrap().closed_walk_bound, Some(5));

        // Ring with one chord: diameter drops but no better walk is found.
        let mut edges: Vec<(usize, usize)> = (1..=n).map(|v| (v, v % n + 1)).collect();
        edges.push((3, 1));
        let g = DiGraph::new(n, edges).unwrap();
        let tc = classify_tau(&g, 4).unwrap();
        assert_eq!(tc.classification, TauClassification::Nontrivial);
        let tc = classify_tau(&g, 6).unwrap();
        // No bidirectional spanning tree and the canonical cycle needs 5 <= 6,
        // so the cycle certifies a sweep.
        assert_eq!(tc.classification, TauClassification::TrivialOne);
    }

    #[test]
    fn unknown_when_no_walk_is_exhibited() {
        // Two directed triangles sharing node 1, no bidirectional edges: the
        // heuristics exhibit no closed spanning walk.
        let g = DiGraph::new(
            5,
            vec![(1, 2), (2, 3), (3, 1), (1, 4), (4, 5), (5, 1)],
        )
        .unwrap();
        let tc = classify_tau(&g, 8).unwrap();
        assert_eq!(tc.classification, TauClassification::Unknown);
        assert_eq!(tc.closed_walk_bound, None);
        // Below n the class is decidable without a walk.
        assert_eq!(classify_tau(&g, 4).unwrap().classification, TauClassification::Nontrivial);
    }

    /// Transitive-closure oracle for strong connectivity, written against the
    /// edge set alone.
    fn closure_strongly_connected(n: usize, edges: &[(usize, usize)]) -> bool {
        let mut reach = vec![vec![false; n]; n];
        for (v, row) in reach.iter_mut().enumerate() {
            row[v] = true;
        }
        for &(i, j) in edges {
            reach[i - 1][j - 1] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        (0..n).all(|i| (0..n).all(|j| reach[i][j]))
    }

    #[test]
    fn connectivity_matches_transitive_closure_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.random_range(2..=8);
            let mut edges = Vec::new();
            for i in 1..=n {
                edges.push((i, i)); // guarantees out-degree >= 1
                for j in 1..=n {
                    if i != j && rng.random::<f64>() < 0.25 {
                        edges.push((i, j));
                    }
                }
            }
            let g = DiGraph::new(n, edges.clone()).unwrap();
            assert_eq!(is_strongly_connected(&g), closure_strongly_connected(n, &edges));
        }
    }

    #[test]
    fn trivial_zero_agrees_with_diameter_across_grid() {
        for n in 3..=7 {
            for (g, bound) in [
                (build_line(n).unwrap(), 2 * (n - 1)),
                (build_star(n).unwrap(), 2 * (n - 1)),
                (build_complete(n).unwrap(), n),
            ] {
                let d = diameter(&g).unwrap();
                for tau in 1..=(2 * n) {
                    let tc = classify_tau(&g, tau).unwrap();
                    assert_eq!(
                        tc.classification == TauClassification::TrivialZero,
                        tau < d,
                        "n={n} tau={tau}"
                    );
                    assert_eq!(
                        tc.classification == TauClassification::TrivialOne,
                        tau >= bound,
                        "n={n} tau={tau}"
                    );
                }
            }
        }
    }
}

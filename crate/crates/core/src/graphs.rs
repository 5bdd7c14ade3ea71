//! Graphs, Laplacians and the symmetry reduction onto equivalence classes.
//!
//! Nodes are indexed `0..n`. A [`Graph`] is simple and undirected; the
//! marked nodes are the items being searched for. [`Graph::reduce`] computes
//! the coarsest partition of the nodes that separates marked from unmarked
//! nodes and in which every node of a class sees the same multiset of
//! distances to every other class. Such a partition is equitable, so giving
//! every node of a class the same nonlinearity and control keeps the class
//! amplitudes equal for all time.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Distance used for pairs of nodes in different connected components.
const UNREACHABLE: usize = usize::MAX;

/// A simple undirected graph with a set of marked nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    marked: BTreeSet<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are unordered; `(a, b)` and
    /// `(b, a)` denote the same edge and listing both is a duplicate.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        marked: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Config(format!(
                    "edge ({a}, {b}) references a node outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::Config(format!("self-loop at node {a}")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::Config(format!("duplicate edge ({a}, {b})")));
            }
        }
        let marked: BTreeSet<usize> = marked.into_iter().collect();
        if marked.is_empty() {
            return Err(Error::Config("at least one node must be marked".into()));
        }
        if let Some(&m) = marked.iter().find(|&&m| m >= n) {
            return Err(Error::Config(format!("marked node {m} outside 0..{n}")));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Self {
            n,
            edges: set,
            marked,
            adjacency,
        })
    }

    /// The complete graph `K_n`.
    pub fn complete(n: usize, marked: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("complete graph needs n >= 2, got {n}")));
        }
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Self::new(n, edges, marked)
    }

    /// The cycle `C_n` with edges `(i, i + 1 mod n)`.
    pub fn cycle(n: usize, marked: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("cycle needs n >= 3, got {n}")));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)), marked)
    }

    /// Builds one of the named generators (`complete` or `cycle`).
    pub fn generate(name: &str, n: usize, marked: impl IntoIterator<Item = usize>) -> Result<Self> {
        match name {
            "complete" => Self::complete(n, marked),
            "cycle" => Self::cycle(n, marked),
            other => Err(Error::Config(format!(
                "unknown graph generator `{other}` (expected `complete` or `cycle`)"
            ))),
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn marked_count(&self) -> usize {
        self.marked.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn marked(&self) -> impl Iterator<Item = usize> + '_ {
        self.marked.iter().copied()
    }

    pub fn is_marked(&self, node: usize) -> bool {
        self.marked.contains(&node)
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// `L = A - D`: adjacency minus the degree diagonal.
    pub fn laplacian(&self) -> Vec<Vec<i64>> {
        let mut l = vec![vec![0i64; self.n]; self.n];
        for (j, row) in l.iter_mut().enumerate() {
            row[j] = -(self.degree(j) as i64);
            for &k in &self.adjacency[j] {
                row[k] = 1;
            }
        }
        l
    }

    /// Breadth-first distances from `source`; unreachable nodes get `usize::MAX`.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.n];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// All-pairs shortest path lengths.
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|s| self.bfs_distances(s)).collect()
    }

    /// Coarsest equitable partition separating marked from unmarked nodes.
    pub fn reduce(&self) -> EquivalencePartition {
        let seed: Vec<usize> = (0..self.n).map(|v| usize::from(self.is_marked(v))).collect();
        self.refine_from(&seed)
    }

    /// Refines an existing partition of this graph until it is stable.
    pub fn refine(&self, partition: &EquivalencePartition) -> EquivalencePartition {
        self.refine_from(partition.class_of())
    }

    fn refine_from(&self, seed: &[usize]) -> EquivalencePartition {
        let dist = self.distance_matrix();
        let mut labels = seed.to_vec();
        let mut count = relabel(&mut labels);
        loop {
            // signature: (marked, current class, per-class sorted distance lists)
            let signatures: Vec<(bool, usize, Vec<Vec<usize>>)> = (0..self.n)
                .map(|v| {
                    let mut profile = vec![Vec::new(); count];
                    for (w, &d) in dist[v].iter().enumerate() {
                        profile[labels[w]].push(d);
                    }
                    for p in &mut profile {
                        p.sort_unstable();
                    }
                    (self.is_marked(v), labels[v], profile)
                })
                .collect();
            let mut ids: BTreeMap<&(bool, usize, Vec<Vec<usize>>), usize> = BTreeMap::new();
            let mut next: Vec<usize> = Vec::with_capacity(self.n);
            for sig in &signatures {
                let fresh = ids.len();
                next.push(*ids.entry(sig).or_insert(fresh));
            }
            let new_count = ids.len();
            labels = next;
            if new_count == count {
                break;
            }
            count = new_count;
            relabel(&mut labels);
        }
        EquivalencePartition::ordered(self, &labels, &dist)
    }

    /// Shell structure around the single marked node.
    ///
    /// Shell `i` holds the nodes at breadth-first distance `i` from the marked
    /// node. Every node of shell `i` must have exactly `c_i` neighbours in
    /// shell `i + 1`, `c_{i-1} n_{i-1} / n_i` in shell `i - 1` and
    /// `c_0 - c_{i-1} n_{i-1} / n_i - c_i` inside its own shell.
    pub fn shell_descriptor(&self) -> Result<ShellDescriptor> {
        if self.marked.len() != 1 {
            return Err(Error::NotShellRegular(format!(
                "shell structure needs exactly one marked node, found {}",
                self.marked.len()
            )));
        }
        let root = *self.marked.iter().next().unwrap();
        let dist = self.bfs_distances(root);
        if dist.contains(&UNREACHABLE) {
            return Err(Error::NotShellRegular("graph is disconnected".into()));
        }
        let diameter = *dist.iter().max().unwrap();
        if diameter == 0 {
            return Err(Error::NotShellRegular("graph has a single node".into()));
        }
        let mut sizes = vec![0usize; diameter + 1];
        for &d in &dist {
            sizes[d] += 1;
        }
        let degree = self.degree(root);
        let mut forward = vec![0usize; diameter];
        for (i, c) in forward.iter_mut().enumerate() {
            let v = (0..self.n).find(|&v| dist[v] == i).unwrap();
            *c = self.adjacency[v].iter().filter(|&&w| dist[w] == i + 1).count();
        }
        let descriptor = ShellDescriptor::new(diameter, forward, sizes)?;
        for v in 0..self.n {
            let i = dist[v];
            let (mut back, mut intra, mut fwd) = (0, 0, 0);
            for &w in &self.adjacency[v] {
                match dist[w] {
                    d if d + 1 == i => back += 1,
                    d if d == i => intra += 1,
                    _ => fwd += 1,
                }
            }
            if self.degree(v) != degree
                || fwd != descriptor.forward(i)
                || back != descriptor.backward(i)
                || intra != descriptor.intra(i)
            {
                return Err(Error::NotShellRegular(format!(
                    "node {v} in shell {i} has (back, intra, forward) = ({back}, {intra}, {fwd}), \
                     expected ({}, {}, {})",
                    descriptor.backward(i),
                    descriptor.intra(i),
                    descriptor.forward(i)
                )));
            }
        }
        Ok(descriptor)
    }

    /// Parses the plain-text edge-list format:
    ///
    /// ```text
    /// n N
    /// a b
    /// ...
    /// marked: i j ...
    /// ```
    ///
    /// Blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str, source: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: source.to_string(),
            line,
            message,
        };
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        let mut marked: Option<Vec<usize>> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("marked:") {
                if marked.is_some() {
                    return Err(err(line_no, "repeated `marked:` line".into()));
                }
                let nodes = rest
                    .split_whitespace()
                    .map(|s| s.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| err(line_no, format!("bad marked node: {e}")))?;
                marked = Some(nodes);
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(err(line_no, format!("expected two integers, got `{line}`")));
            }
            let a: usize = fields[0]
                .parse()
                .map_err(|e| err(line_no, format!("bad integer `{}`: {e}", fields[0])))?;
            let b: usize = fields[1]
                .parse()
                .map_err(|e| err(line_no, format!("bad integer `{}`: {e}", fields[1])))?;
            match header {
                None => header = Some((a, b)),
                Some(_) if marked.is_some() => {
                    return Err(err(line_no, "edge after `marked:` line".into()))
                }
                Some(_) => edges.push((a, b, line_no)),
            }
        }
        let (n, n_marked) = header.ok_or_else(|| err(1, "missing `n N` header".into()))?;
        let marked = marked.ok_or_else(|| err(text.lines().count(), "missing `marked:` line".into()))?;
        if marked.len() != n_marked {
            return Err(err(
                1,
                format!("header declares {n_marked} marked nodes, `marked:` lists {}", marked.len()),
            ));
        }
        for &(a, b, line_no) in &edges {
            if a >= n || b >= n {
                return Err(err(line_no, format!("edge ({a}, {b}) outside 0..{n}")));
            }
        }
        Self::new(n, edges.into_iter().map(|(a, b, _)| (a, b)), marked)
            .map_err(|e| err(0, e.to_string()))
    }

    /// Writes the graph in the format read by [`Graph::parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.marked.len());
        for (a, b) in self.edges() {
            let _ = writeln!(out, "{a} {b}");
        }
        out.push_str("marked:");
        for m in self.marked() {
            let _ = write!(out, " {m}");
        }
        out.push('\n');
        out
    }
}

/// Renumbers labels to `0..k` in order of first appearance; returns `k`.
fn relabel(labels: &mut [usize]) -> usize {
    let mut map = BTreeMap::new();
    for l in labels.iter_mut() {
        let fresh = map.len();
        *l = *map.entry(*l).or_insert(fresh);
    }
    map.len()
}

/// A partition of the nodes into equivalence classes.
///
/// Classes are ordered marked-first, then by increasing distance to the
/// nearest marked node, then by smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalencePartition {
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    marked: Vec<bool>,
}

impl EquivalencePartition {
    fn ordered(graph: &Graph, labels: &[usize], dist: &[Vec<usize>]) -> Self {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, &l) in labels.iter().enumerate() {
            groups.entry(l).or_default().push(v);
        }
        let to_marked = |v: usize| graph.marked().map(|m| dist[v][m]).min().unwrap_or(UNREACHABLE);
        let mut classes: Vec<Vec<usize>> = groups.into_values().collect();
        classes.sort_by_key(|c| (!graph.is_marked(c[0]), to_marked(c[0]), c[0]));
        Self::from_classes(graph, classes)
    }

    fn from_classes(graph: &Graph, classes: Vec<Vec<usize>>) -> Self {
        let mut class_of = vec![0; graph.node_count()];
        for (k, class) in classes.iter().enumerate() {
            for &v in class {
                class_of[v] = k;
            }
        }
        let marked = classes.iter().map(|c| graph.is_marked(c[0])).collect();
        Self {
            classes,
            class_of,
            marked,
        }
    }

    /// Every node in its own class (the unreduced system).
    pub fn singletons(graph: &Graph) -> Self {
        Self::from_classes(graph, (0..graph.node_count()).map(|v| vec![v]).collect())
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self) -> &[usize] {
        &self.class_of
    }

    pub fn multiplicity(&self, class: usize) -> usize {
        self.classes[class].len()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    pub fn is_marked(&self, class: usize) -> bool {
        self.marked[class]
    }

    pub fn marked_flags(&self) -> &[bool] {
        &self.marked
    }

    pub fn node_count(&self) -> usize {
        self.class_of.len()
    }

    /// Laplacian of the quotient: `Q[a][b] = sum_{k in b} L[rep(a)][k]`.
    ///
    /// For an equitable partition the row does not depend on the chosen
    /// representative, and the class amplitudes obey `i x'_a = gamma Q x + ...`.
    pub fn quotient_laplacian(&self, graph: &Graph) -> Vec<Vec<i64>> {
        let l = graph.laplacian();
        self.classes
            .iter()
            .map(|class| {
                let rep = class[0];
                let mut row = vec![0i64; self.len()];
                for (k, &lk) in l[rep].iter().enumerate() {
                    row[self.class_of[k]] += lk;
                }
                row
            })
            .collect()
    }
}

/// Shell summary of a vertex- and edge-transitive graph with one marked node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShellDescriptor {
    diameter: usize,
    forward: Vec<usize>,
    sizes: Vec<usize>,
}

impl ShellDescriptor {
    /// Validates the arithmetic consistency conditions of a shell structure:
    /// `n_0 = 1`, every back-edge count `c_i n_i / n_{i+1}` a positive integer
    /// and every intra-shell count `c_0 - c_{i-1} n_{i-1} / n_i - c_i`
    /// nonnegative.
    pub fn new(diameter: usize, forward: Vec<usize>, sizes: Vec<usize>) -> Result<Self> {
        let bad = |msg: String| Err(Error::NotShellRegular(msg));
        if diameter == 0 {
            return bad("diameter must be at least 1".into());
        }
        if forward.len() != diameter || sizes.len() != diameter + 1 {
            return bad(format!(
                "expected {diameter} forward counts and {} shell sizes, got {} and {}",
                diameter + 1,
                forward.len(),
                sizes.len()
            ));
        }
        if sizes[0] != 1 {
            return bad(format!("shell 0 must hold exactly the marked node, has {}", sizes[0]));
        }
        for i in 0..diameter {
            let edges = forward[i] * sizes[i];
            if forward[i] == 0 || sizes[i + 1] == 0 || edges % sizes[i + 1] != 0 {
                return bad(format!(
                    "c_{i} n_{i} / n_{} = {edges}/{} is not a positive integer",
                    i + 1,
                    sizes[i + 1]
                ));
            }
        }
        let s = Self {
            diameter,
            forward,
            sizes,
        };
        for i in 1..=diameter {
            let used = s.backward(i) + s.forward(i);
            if used > s.forward[0] {
                return bad(format!(
                    "shell {i} would need {used} edges per node but the degree is {}",
                    s.forward[0]
                ));
            }
        }
        Ok(s)
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    /// Number of shells, `d + 1`.
    pub fn shell_count(&self) -> usize {
        self.diameter + 1
    }

    /// `n_i`.
    pub fn size(&self, i: usize) -> usize {
        self.sizes[i]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn forward_counts(&self) -> &[usize] {
        &self.forward
    }

    /// `c_i`, with `c_d = 0`.
    pub fn forward(&self, i: usize) -> usize {
        self.forward.get(i).copied().unwrap_or(0)
    }

    /// `c_{i-1} n_{i-1} / n_i`, with zero for shell 0.
    pub fn backward(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.forward[i - 1] * self.sizes[i - 1] / self.sizes[i]
        }
    }

    /// Edges from a shell-`i` node to other nodes of shell `i`.
    pub fn intra(&self, i: usize) -> usize {
        self.degree() - self.backward(i) - self.forward(i)
    }

    /// Common node degree, `c_0`.
    pub fn degree(&self) -> usize {
        self.forward[0]
    }

    pub fn node_count(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Quotient Laplacian over shells (tridiagonal).
    pub fn quotient_laplacian(&self) -> Vec<Vec<i64>> {
        let k = self.shell_count();
        let mut q = vec![vec![0i64; k]; k];
        for (i, row) in q.iter_mut().enumerate() {
            row[i] = -((self.backward(i) + self.forward(i)) as i64);
            if i > 0 {
                row[i - 1] = self.backward(i) as i64;
            }
            if i + 1 < k {
                row[i + 1] = self.forward(i) as i64;
            }
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_edges() {
        let g = Graph::complete(3, [0]).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(Graph::complete(10, [4]).unwrap().edge_count(), 45);
        let g = Graph::complete(6, [0, 1, 2]).unwrap();
        assert!((0..6).all(|v| g.degree(v) == 5));
    }

    #[test]
    fn invalid_construction() {
        assert!(Graph::complete(1, [0]).is_err());
        assert!(Graph::complete(4, []).is_err());
        assert!(Graph::complete(4, [4]).is_err());
        assert!(Graph::cycle(2, [0]).is_err());
        assert!(Graph::new(3, [(0, 0)], [0]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)], [0]).is_err());
        assert!(Graph::generate("star", 4, [0]).is_err());
    }

    #[test]
    fn cycle_graph() {
        let g = Graph::cycle(6, [0]).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!((0..6).all(|v| g.degree(v) == 2));
        assert_eq!(Graph::cycle(3, [0]).unwrap(), Graph::complete(3, [0]).unwrap());
        let shells = Graph::cycle(4, [0]).unwrap().shell_descriptor().unwrap();
        assert_eq!(shells.sizes(), &[1, 2, 1]);
    }

    #[test]
    fn laplacians() {
        let l = Graph::complete(3, [0]).unwrap().laplacian();
        assert_eq!(l, vec![vec![-2, 1, 1], vec![1, -2, 1], vec![1, 1, -2]]);
        let l = Graph::new(2, [(0, 1)], [0]).unwrap().laplacian();
        assert_eq!(l, vec![vec![-1, 1], vec![1, -1]]);
        let l = Graph::cycle(6, [0]).unwrap().laplacian();
        for (j, row) in l.iter().enumerate() {
            assert_eq!(row[j], -2);
            assert_eq!(row.iter().filter(|&&x| x == 1).count(), 2);
            assert_eq!(row[(j + 1) % 6], 1);
            assert_eq!(row[(j + 5) % 6], 1);
        }
    }

    #[test]
    fn reduce_complete() {
        for n in 2..9 {
            for marked in 1..n {
                let g = Graph::complete(n, 0..marked).unwrap();
                let p = g.reduce();
                assert_eq!(p.multiplicities(), vec![marked, n - marked]);
                assert!(p.is_marked(0) && !p.is_marked(1));
            }
        }
        let p = Graph::complete(5, 0..5).unwrap().reduce();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn reduce_cycle() {
        let p = Graph::cycle(6, [0]).unwrap().reduce();
        assert_eq!(p.classes(), &[vec![0], vec![1, 5], vec![2, 4], vec![3]]);
        assert_eq!(Graph::cycle(6, [0]).unwrap().refine(&p), p);
        let q = p.quotient_laplacian(&Graph::cycle(6, [0]).unwrap());
        assert_eq!(
            q,
            vec![
                vec![-2, 2, 0, 0],
                vec![1, -2, 1, 0],
                vec![0, 1, -2, 1],
                vec![0, 0, 2, -2]
            ]
        );
    }

    #[test]
    fn reduce_path_separates_ends() {
        // path 0-1-2-3 marked at 1: no symmetry survives
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)], [1]).unwrap();
        let p = g.reduce();
        assert_eq!(p.len(), 4);
        assert_eq!(p.classes()[0], vec![1]);
    }

    #[test]
    fn shells() {
        let s = Graph::cycle(6, [0]).unwrap().shell_descriptor().unwrap();
        assert_eq!((s.diameter(), s.sizes(), s.forward_counts()), (3, &[1, 2, 2, 1][..], &[2, 1, 1][..]));
        assert_eq!((s.backward(3), s.intra(3)), (2, 0));
        let s = Graph::cycle(5, [0]).unwrap().shell_descriptor().unwrap();
        assert_eq!((s.diameter(), s.sizes(), s.forward_counts()), (2, &[1, 2, 2][..], &[2, 1][..]));
        assert_eq!(s.intra(2), 1);
        let s = Graph::complete(7, [0]).unwrap().shell_descriptor().unwrap();
        assert_eq!((s.diameter(), s.sizes(), s.forward_counts()), (1, &[1, 6][..], &[6][..]));
        assert_eq!(s.intra(1), 5);
    }

    #[test]
    fn shell_errors() {
        let path = Graph::new(4, [(0, 1), (1, 2), (2, 3)], [1]).unwrap();
        assert!(matches!(path.shell_descriptor(), Err(Error::NotShellRegular(_))));
        let two = Graph::complete(4, [0, 1]).unwrap();
        assert!(matches!(two.shell_descriptor(), Err(Error::NotShellRegular(_))));
        assert!(ShellDescriptor::new(2, vec![2, 1], vec![1, 3, 2]).is_err());
        assert!(ShellDescriptor::new(1, vec![3], vec![2, 3]).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::cycle(6, [0]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(Graph::parse_edge_list(&text, "mem").unwrap(), g);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let text = "3 1\n0 1\n1 x\nmarked: 0\n";
        match Graph::parse_edge_list(text, "g.txt") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Graph::parse_edge_list("3 2\n0 1\nmarked: 0\n", "g").is_err());
        assert!(Graph::parse_edge_list("3 1\n0 1\n", "g").is_err());
    }
}

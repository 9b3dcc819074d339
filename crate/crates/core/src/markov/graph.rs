use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::unionfind::UnionFind;
use rand::Rng;

use super::marginals::{pair_key, MarginalSet, PairKey};
use crate::error::{Error, Result};

/// Undirected simple graph over string labels. Edges are stored with the
/// smaller label first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssociatedGraph {
    nodes: Vec<String>,
    edges: BTreeSet<PairKey>,
}

/// A 3-chain `ends.0 - center - ends.1`, with `ends.0 < ends.1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chain3 {
    pub left: String,
    pub center: String,
    pub right: String,
}

impl std::fmt::Display for Chain3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}-{}", self.left, self.center, self.right)
    }
}

impl AssociatedGraph {
    pub fn new<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let nodes: Vec<String> = nodes.iter().map(|n| n.as_ref().to_owned()).collect();
        for n in &nodes {
            if !seen.insert(n.as_str()) {
                return Err(Error::LabelCollision(n.clone()));
            }
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            for l in [a, b] {
                if !seen.contains(l) {
                    return Err(Error::UnknownLabel(l.to_owned()));
                }
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on `{a}`")));
            }
            set.insert(pair_key(a, b));
        }
        Ok(Self { nodes, edges: set })
    }

    /// One node per subsystem, one edge per two-body marginal.
    pub fn from_marginals(set: &MarginalSet) -> Self {
        Self {
            nodes: set.labels(),
            edges: set.pairs().keys().cloned().collect(),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<PairKey> {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edges.contains(&pair_key(a, b))
    }

    /// Neighbors in lexicographic order.
    pub fn neighbors(&self, node: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .edges
            .iter()
            .filter_map(|(a, b)| {
                if a == node {
                    Some(b.as_str())
                } else if b == node {
                    Some(a.as_str())
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn degree(&self, node: &str) -> usize {
        self.edges
            .iter()
            .filter(|(a, b)| a == node || b == node)
            .count()
    }

    fn index_of(&self) -> BTreeMap<&str, usize> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let idx = self.index_of();
        let mut uf = UnionFind::<usize>::new(self.nodes.len());
        for (a, b) in &self.edges {
            uf.union(idx[a.as_str()], idx[b.as_str()]);
        }
        let root = uf.find(0);
        (0..self.nodes.len()).all(|i| uf.find(i) == root)
    }

    /// Acyclic and connected.
    pub fn is_tree(&self) -> bool {
        !self.nodes.is_empty() && self.edges.len() + 1 == self.nodes.len() && self.is_connected()
    }

    pub fn ensure_tree(&self) -> Result<()> {
        if self.is_tree() {
            Ok(())
        } else {
            Err(Error::NotATree)
        }
    }

    /// Every 3-chain `i - j - k` (two edges sharing the center `j`), each
    /// listed once with `i < k`.
    pub fn enumerate_3chains(&self) -> Vec<Chain3> {
        let mut out = Vec::new();
        for center in &self.nodes {
            let nb = self.neighbors(center);
            for (x, left) in nb.iter().enumerate() {
                for right in &nb[x + 1..] {
                    out.push(Chain3 {
                        left: (*left).to_owned(),
                        center: center.clone(),
                        right: (*right).to_owned(),
                    });
                }
            }
        }
        out
    }
}

pub fn count_3chains_path(n: usize) -> usize {
    n.saturating_sub(2)
}

pub fn count_3chains_star(n: usize) -> usize {
    n.saturating_sub(1) * n.saturating_sub(2) / 2
}

pub fn count_3chains_complete(n: usize) -> usize {
    n * n.saturating_sub(1) * n.saturating_sub(2) / 2
}

/// Node order where every node after the first has exactly one neighbor
/// among the earlier ones (its parent).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructiveOrder {
    pub order: Vec<String>,
    pub parent: BTreeMap<String, String>,
}

impl ConstructiveOrder {
    pub fn root(&self) -> &str {
        &self.order[0]
    }

    /// Checks the defining property against `graph`.
    pub fn is_prefix_connected(&self, graph: &AssociatedGraph) -> bool {
        for (k, node) in self.order.iter().enumerate().skip(1) {
            let earlier: Vec<&String> = self.order[..k]
                .iter()
                .filter(|e| graph.has_edge(node, e))
                .collect();
            if earlier.len() != 1 || self.parent.get(node) != Some(earlier[0]) {
                return false;
            }
        }
        true
    }
}

/// Breadth-first order from `root`, children visited lexicographically.
pub fn constructive_order(graph: &AssociatedGraph, root: &str) -> Result<ConstructiveOrder> {
    graph.ensure_tree()?;
    if !graph.nodes.iter().any(|n| n == root) {
        return Err(Error::UnknownLabel(root.to_owned()));
    }
    let mut order = vec![root.to_owned()];
    let mut parent = BTreeMap::new();
    let mut visited: BTreeSet<String> = BTreeSet::from([root.to_owned()]);
    let mut queue = VecDeque::from([root.to_owned()]);
    while let Some(node) = queue.pop_front() {
        for nb in graph.neighbors(&node) {
            if visited.insert(nb.to_owned()) {
                parent.insert(nb.to_owned(), node.clone());
                order.push(nb.to_owned());
                queue.push_back(nb.to_owned());
            }
        }
    }
    Ok(ConstructiveOrder { order, parent })
}

pub fn path_graph<S: AsRef<str>>(labels: &[S]) -> AssociatedGraph {
    let edges: Vec<(&str, &str)> = labels
        .windows(2)
        .map(|w| (w[0].as_ref(), w[1].as_ref()))
        .collect();
    let nodes: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
    AssociatedGraph::new(&nodes, &edges).expect("distinct labels")
}

pub fn star_graph<S: AsRef<str>>(center: &str, leaves: &[S]) -> AssociatedGraph {
    let mut nodes = vec![center];
    nodes.extend(leaves.iter().map(AsRef::as_ref));
    let edges: Vec<(&str, &str)> = leaves.iter().map(|l| (center, l.as_ref())).collect();
    AssociatedGraph::new(&nodes, &edges).expect("distinct labels")
}

pub fn complete_graph<S: AsRef<str>>(labels: &[S]) -> AssociatedGraph {
    let nodes: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
    let mut edges = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            edges.push((*a, *b));
        }
    }
    AssociatedGraph::new(&nodes, &edges).expect("distinct labels")
}

/// `X1 .. Xn`.
pub fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("X{i}")).collect()
}

/// Tree decoded from a Prüfer sequence over `labels` (entries index into
/// `labels`; length `n - 2`).
pub fn tree_from_prufer<S: AsRef<str>>(labels: &[S], seq: &[usize]) -> Result<AssociatedGraph> {
    let n = labels.len();
    if n < 2 || seq.len() != n - 2 || seq.iter().any(|&s| s >= n) {
        return Err(Error::InvalidArgument(
            "Prüfer sequence must have length n - 2 with entries below n".into(),
        ));
    }
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&i| degree[i] == 1).expect("a leaf exists");
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    let names: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
    let named: Vec<(&str, &str)> = edges.iter().map(|&(a, b)| (names[a], names[b])).collect();
    AssociatedGraph::new(&names, &named)
}

/// Every labeled tree on `labels` (`n^(n-2)` of them), via Prüfer sequences.
pub fn all_spanning_trees<S: AsRef<str>>(labels: &[S]) -> Result<Vec<AssociatedGraph>> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let mut out = Vec::with_capacity(total);
    let mut seq = vec![0usize; len];
    for mut code in 0..total {
        for s in seq.iter_mut().rev() {
            *s = code % n;
            code /= n;
        }
        out.push(tree_from_prufer(labels, &seq)?);
    }
    Ok(out)
}

/// Uniformly random labeled tree.
pub fn random_tree<S: AsRef<str>, R: Rng + ?Sized>(labels: &[S], rng: &mut R) -> Result<AssociatedGraph> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    tree_from_prufer(labels, &seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded_rng;

    #[test]
    fn path_and_triangle() {
        let p = AssociatedGraph::new(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
        assert!(p.is_tree());
        let t = AssociatedGraph::new(&["A", "B", "C"], &[("A", "B"), ("B", "C"), ("C", "A")]).unwrap();
        assert!(!t.is_tree());
        let s = star_graph("Y", &["A", "B", "C", "D"]);
        assert!(s.is_tree());
        let disconnected = AssociatedGraph::new(&["A", "B", "C", "D"], &[("A", "B"), ("C", "D")]).unwrap();
        assert!(!disconnected.is_tree());
        assert!(!disconnected.is_connected());
    }

    #[test]
    fn orders() {
        let p = path_graph(&["A", "B", "C"]);
        let o = constructive_order(&p, "A").unwrap();
        assert_eq!(o.order, vec!["A", "B", "C"]);
        assert_eq!(o.parent["B"], "A");
        assert_eq!(o.parent["C"], "B");
        let s = star_graph("Y", &["D", "A", "C", "B"]);
        let o = constructive_order(&s, "Y").unwrap();
        assert_eq!(o.order, vec!["Y", "A", "B", "C", "D"]);
        let t = complete_graph(&["A", "B", "C"]);
        assert_eq!(constructive_order(&t, "A"), Err(Error::NotATree));
    }

    #[test]
    fn random_orders_are_prefix_connected() {
        let mut rng = seeded_rng(3);
        let labels = default_labels(7);
        for _ in 0..30 {
            let t = random_tree(&labels, &mut rng).unwrap();
            assert!(t.is_tree());
            for root in &labels {
                let o = constructive_order(&t, root).unwrap();
                assert!(o.is_prefix_connected(&t));
                assert_eq!(o.order.len(), 7);
            }
        }
    }

    #[test]
    fn chain_counts() {
        assert_eq!(path_graph(&default_labels(5)).enumerate_3chains().len(), 3);
        let labels = default_labels(5);
        assert_eq!(star_graph(&labels[0], &labels[1..]).enumerate_3chains().len(), 6);
        assert_eq!(complete_graph(&default_labels(4)).enumerate_3chains().len(), 12);
        for n in 1..=8 {
            let l = default_labels(n);
            assert_eq!(path_graph(&l).enumerate_3chains().len(), count_3chains_path(n));
            assert_eq!(star_graph(&l[0], &l[1..]).enumerate_3chains().len(), count_3chains_star(n));
            assert_eq!(complete_graph(&l).enumerate_3chains().len(), count_3chains_complete(n));
        }
    }

    #[test]
    fn cayley_counts() {
        for (n, expected) in [(2, 1), (3, 3), (4, 16), (5, 125)] {
            let trees = all_spanning_trees(&default_labels(n)).unwrap();
            assert_eq!(trees.len(), expected);
            let distinct: BTreeSet<Vec<PairKey>> = trees
                .iter()
                .map(|t| t.edges().iter().cloned().collect())
                .collect();
            assert_eq!(distinct.len(), expected);
            assert!(trees.iter().all(AssociatedGraph::is_tree));
        }
    }
}

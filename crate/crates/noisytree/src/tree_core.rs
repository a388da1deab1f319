//! Labeled trees, equivalence clusters and tree generators.
//!
//! Nodes are labeled `1..=d` everywhere in the public API.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Largest `d` for which an equivalence class is enumerated explicitly.
pub const ENUMERATION_MAX_D: usize = 16;

/// A labeled tree on nodes `1..=d`, validated on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeStructure {
    d: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl TreeStructure {
    /// Builds a tree from an edge list. Edge orientation and order do not matter.
    pub fn new<I>(d: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if d == 0 {
            return Err(Error::InvalidTree("a tree needs at least one node".into()));
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(d - 1);
        for (i, j) in edges {
            if i == 0 || j == 0 || i > d || j > d {
                return Err(Error::InvalidTree(format!("edge ({i}, {j}) outside 1..={d}")));
            }
            if i == j {
                return Err(Error::InvalidTree(format!("self loop at {i}")));
            }
            norm.push((i.min(j), i.max(j)));
        }
        norm.sort_unstable();
        norm.dedup();
        if norm.len() != d - 1 {
            return Err(Error::InvalidTree(format!(
                "expected {} distinct edges, found {}",
                d - 1,
                norm.len()
            )));
        }
        let mut adj = vec![Vec::new(); d + 1];
        for &(i, j) in &norm {
            adj[i].push(j);
            adj[j].push(i);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        let tree = TreeStructure { d, edges: norm, adj };
        let (order, _) = tree.bfs(1);
        if order.len() != d {
            return Err(Error::InvalidTree("graph is not connected".into()));
        }
        Ok(tree)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Edges as `(i, j)` with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (1..=self.d).filter(|&i| self.degree(i) == 1).collect()
    }

    /// Breadth-first order from `root` and the parent of every node
    /// (`parent[root] == 0`, index 0 unused).
    pub fn bfs(&self, root: usize) -> (Vec<usize>, Vec<usize>) {
        let mut parent = vec![0usize; self.d + 1];
        let mut seen = vec![false; self.d + 1];
        let mut order = Vec::with_capacity(self.d);
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        (order, parent)
    }

    /// Nodes on the unique path from `i` to `j`, both ends included.
    pub fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let (_, parent) = self.bfs(j);
        let mut out = vec![i];
        let mut u = i;
        while u != j {
            u = parent[u];
            out.push(u);
        }
        out
    }

    /// Serializes to the plain-text tree format.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.d);
        for &(i, j) in &self.edges {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }

    /// Parses the plain-text tree format; trailing content is rejected.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let tree = Self::parse_lines(&mut lines)?;
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("unexpected trailing line `{extra}`")));
        }
        Ok(tree)
    }

    /// Reads the `d` header and exactly `d - 1` edge lines from `lines`.
    pub fn parse_lines<'a, I: Iterator<Item = &'a str>>(lines: &mut I) -> Result<Self> {
        let header = lines.next().ok_or_else(|| Error::Parse("empty tree file".into()))?;
        let d: usize = header
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad node count `{header}`")))?;
        let mut edges = Vec::with_capacity(d.saturating_sub(1));
        for _ in 0..d.saturating_sub(1) {
            let line = lines.next().ok_or_else(|| Error::Parse("missing edge line".into()))?;
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad edge line `{line}`")))
            };
            let i = parse(it.next())?;
            let j = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse(format!("bad edge line `{line}`")));
            }
            edges.push((i, j));
        }
        TreeStructure::new(d, edges)
    }
}

impl fmt::Display for TreeStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges.iter().map(|(i, j)| format!("{i}-{j}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Non-empty, trimmed lines of `text`.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty())
}

/// All degree-one nodes.
pub fn leaves(t: &TreeStructure) -> Vec<usize> {
    t.leaves()
}

/// Partition of the nodes into equivalence clusters, plus the tree they form.
///
/// Each cluster is an internal node together with its adjacent leaves.
/// Clusters are ordered by their smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceClusterPartition {
    pub clusters: Vec<Vec<usize>>,
    /// The internal node of each cluster.
    pub centers: Vec<usize>,
    /// Cluster index of every node (index 0 unused).
    pub cluster_of: Vec<usize>,
    /// Pairs of cluster indices whose internal nodes are adjacent.
    pub cluster_edges: Vec<(usize, usize)>,
}

impl EquivalenceClusterPartition {
    /// Number of leaves in each cluster.
    pub fn leaf_counts(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.len() - 1).collect()
    }
}

pub fn equivalence_clusters(t: &TreeStructure) -> EquivalenceClusterPartition {
    let d = t.d();
    if d <= 2 {
        return EquivalenceClusterPartition {
            clusters: vec![(1..=d).collect()],
            centers: vec![1],
            cluster_of: vec![0; d + 1],
            cluster_edges: Vec::new(),
        };
    }
    let mut groups: Vec<(Vec<usize>, usize)> = (1..=d)
        .filter(|&p| t.degree(p) >= 2)
        .map(|p| {
            let mut members: Vec<usize> = std::iter::once(p)
                .chain(t.neighbors(p).iter().copied().filter(|&l| t.degree(l) == 1))
                .collect();
            members.sort_unstable();
            (members, p)
        })
        .collect();
    groups.sort_by_key(|(m, _)| m[0]);
    let mut cluster_of = vec![0usize; d + 1];
    for (k, (members, _)) in groups.iter().enumerate() {
        for &m in members {
            cluster_of[m] = k;
        }
    }
    let mut cluster_edges: Vec<(usize, usize)> = t
        .edges()
        .iter()
        .filter(|&&(i, j)| t.degree(i) >= 2 && t.degree(j) >= 2)
        .map(|&(i, j)| {
            let (a, b) = (cluster_of[i], cluster_of[j]);
            (a.min(b), a.max(b))
        })
        .collect();
    cluster_edges.sort_unstable();
    let (clusters, centers) = groups.into_iter().unzip();
    EquivalenceClusterPartition { clusters, centers, cluster_of, cluster_edges }
}

/// `|[T]|`, the product of `1 + leaves` over clusters.
pub fn equivalence_class_size(t: &TreeStructure) -> u128 {
    if t.d() <= 2 {
        return 1;
    }
    equivalence_clusters(t)
        .leaf_counts()
        .iter()
        .map(|&l| 1 + l as u128)
        .product()
}

/// Every tree in `[T]`, obtained by choosing a new center inside each cluster.
pub fn enumerate_equivalence_class(t: &TreeStructure) -> Result<Vec<TreeStructure>> {
    if t.d() > ENUMERATION_MAX_D {
        return Err(Error::SizeGuard { d: t.d(), max: ENUMERATION_MAX_D });
    }
    if t.d() <= 2 {
        return Ok(vec![t.clone()]);
    }
    let part = equivalence_clusters(t);
    let k = part.clusters.len();
    let mut choice = vec![0usize; k];
    let mut out = Vec::new();
    loop {
        let centers: Vec<usize> = (0..k).map(|c| part.clusters[c][choice[c]]).collect();
        let mut edges = Vec::with_capacity(t.d() - 1);
        for (c, members) in part.clusters.iter().enumerate() {
            edges.extend(members.iter().filter(|&&m| m != centers[c]).map(|&m| (centers[c], m)));
        }
        edges.extend(part.cluster_edges.iter().map(|&(a, b)| (centers[a], centers[b])));
        out.push(TreeStructure::new(t.d(), edges)?);

        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(out);
            }
            choice[pos] += 1;
            if choice[pos] < part.clusters[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Label-level canonical form of `[T]`: the node partition and the cluster
/// adjacency, with clusters named by their smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EquivalenceKey {
    clusters: Vec<Vec<usize>>,
    links: Vec<(usize, usize)>,
}

pub fn equivalence_key(t: &TreeStructure) -> EquivalenceKey {
    let part = equivalence_clusters(t);
    let name = |c: usize| part.clusters[c][0];
    let mut links: Vec<(usize, usize)> =
        part.cluster_edges.iter().map(|&(a, b)| (name(a).min(name(b)), name(a).max(name(b)))).collect();
    links.sort_unstable();
    EquivalenceKey { clusters: part.clusters, links }
}

/// Whether `t2` lies in the equivalence class of `t1`.
pub fn is_equivalent(t1: &TreeStructure, t2: &TreeStructure) -> Result<bool> {
    if t1.d() != t2.d() {
        return Err(Error::DimensionMismatch { expected: t1.d(), got: t2.d() });
    }
    Ok(equivalence_key(t1) == equivalence_key(t2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedTree {
    Chain,
    Star,
    Hybrid12,
    GaussHybrid10,
}

impl FromStr for NamedTree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(NamedTree::Chain),
            "star" => Ok(NamedTree::Star),
            "hybrid12" => Ok(NamedTree::Hybrid12),
            "gauss_hybrid10" => Ok(NamedTree::GaussHybrid10),
            other => Err(Error::InvalidShape(format!("unknown tree kind `{other}`"))),
        }
    }
}

impl fmt::Display for NamedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NamedTree::Chain => "chain",
            NamedTree::Star => "star",
            NamedTree::Hybrid12 => "hybrid12",
            NamedTree::GaussHybrid10 => "gauss_hybrid10",
        })
    }
}

/// Chain `1-2-...-k` with nodes `k+1..=d` hanging off node `k`.
fn broom(d: usize, k: usize) -> Result<TreeStructure> {
    let edges = (1..k).map(|i| (i, i + 1)).chain((k + 1..=d).map(|j| (k, j)));
    TreeStructure::new(d, edges)
}

/// The fixed structures used by the experiment presets. Stars are centered at node 1.
pub fn make_named_tree(kind: NamedTree, d: usize) -> Result<TreeStructure> {
    match kind {
        NamedTree::Chain if d >= 1 => broom(d, d),
        NamedTree::Star if d >= 1 => TreeStructure::new(d, (2..=d).map(|j| (1, j))),
        NamedTree::Hybrid12 if d == 12 => broom(12, 6),
        NamedTree::GaussHybrid10 if d == 10 => broom(10, 5),
        _ => Err(Error::InvalidShape(format!("{kind} is not defined for d = {d}"))),
    }
}

/// Decodes a Prüfer sequence (labels `1..=d`, length `d - 2`).
pub fn prufer_decode(seq: &[usize], d: usize) -> Result<TreeStructure> {
    if d <= 2 {
        return TreeStructure::new(d, if d == 2 { vec![(1, 2)] } else { vec![] });
    }
    if seq.len() != d - 2 || seq.iter().any(|&s| s == 0 || s > d) {
        return Err(Error::InvalidTree("malformed Prüfer sequence".into()));
    }
    let mut degree = vec![1usize; d + 1];
    for &s in seq {
        degree[s] += 1;
    }
    let mut leaves: BTreeSet<usize> = (1..=d).filter(|&i| degree[i] == 1).collect();
    let mut edges = Vec::with_capacity(d - 1);
    for &s in seq {
        let leaf = leaves.pop_first().expect("a tree always has a leaf");
        edges.push((leaf, s));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.insert(s);
        }
    }
    let u = leaves.pop_first().expect("two leaves remain");
    let v = leaves.pop_first().expect("two leaves remain");
    edges.push((u, v));
    TreeStructure::new(d, edges)
}

/// A uniformly random labeled tree on `d` nodes.
pub fn random_tree<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<TreeStructure> {
    let seq: Vec<usize> = (0..d.saturating_sub(2)).map(|_| rng.random_range(1..=d)).collect();
    prufer_decode(&seq, d)
}

/// All `d^(d-2)` labeled trees on `d` nodes, in Prüfer-sequence order.
pub fn all_labeled_trees(d: usize) -> Vec<TreeStructure> {
    if d <= 2 {
        return vec![prufer_decode(&[], d).expect("small tree")];
    }
    let len = d - 2;
    let mut seq = vec![1usize; len];
    let mut out = Vec::with_capacity(d.pow(len as u32));
    loop {
        out.push(prufer_decode(&seq, d).expect("every sequence decodes"));
        let mut pos = 0;
        loop {
            if pos == len {
                return out;
            }
            seq[pos] += 1;
            if seq[pos] <= d {
                break;
            }
            seq[pos] = 1;
            pos += 1;
        }
    }
}

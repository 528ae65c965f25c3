//! Undirected graph topology and vertex-set partitions.
//!
//! Vertices are dense indices `0..N`. Edges are kept twice: as a sorted list of
//! `(i, j)` pairs with `i < j` for deterministic iteration, and as adjacency
//! lists for neighborhood queries.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, normalizing each edge to `(min, max)`.
    ///
    /// Self-loops, duplicate edges and out-of-range endpoints are rejected.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::EmptyVertexSet);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        vertex: v,
                        count: vertex_count,
                    });
                }
            }
            if a == b {
                return Err(Error::InvalidEdge(a, b, "self-loop"));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidEdge(a, b, "duplicate edge"));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            vertex_count,
            edges,
            adjacency,
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::new(n, edges).expect("complete graph is well formed")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("path graph is well formed")
    }

    /// Star with center 0 and leaves `1..n`.
    pub fn star(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (0, i))).expect("star graph is well formed")
    }

    /// Random connected graph: a random recursive tree plus each remaining
    /// pair independently with probability `extra_edge_prob`.
    pub fn random_connected<R: Rng + ?Sized>(n: usize, extra_edge_prob: f64, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut edges = BTreeSet::new();
        for k in 1..n {
            let parent = order[rng.gen_range(0..k)];
            let child = order[k];
            edges.insert((parent.min(child), parent.max(child)));
        }
        for i in 0..n {
            for j in i + 1..n {
                if !edges.contains(&(i, j)) && rng.gen_bool(extra_edge_prob) {
                    edges.insert((i, j));
                }
            }
        }
        Self::new(n, edges).expect("random graph is well formed")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_index(a, b).is_some()
    }

    /// Position of the edge in [`Graph::edges`].
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    pub fn neighbors(&self, v: usize) -> Result<&[usize]> {
        self.adjacency.get(v).map(Vec::as_slice).ok_or(Error::VertexOutOfRange {
            vertex: v,
            count: self.vertex_count,
        })
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == self.vertex_count
    }

    /// Subgraph induced by `subset`. Local vertex `k` of the result is
    /// `subset_sorted[k]` in this graph.
    pub fn induced_subgraph(&self, subset: &[usize]) -> Result<InducedSubgraph> {
        if subset.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        let mut labels = subset.to_vec();
        labels.sort_unstable();
        labels.dedup();
        if let Some(&v) = labels.iter().find(|&&v| v >= self.vertex_count) {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                count: self.vertex_count,
            });
        }
        let mut local = vec![usize::MAX; self.vertex_count];
        for (k, &v) in labels.iter().enumerate() {
            local[v] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| local[a] != usize::MAX && local[b] != usize::MAX)
            .map(|&(a, b)| (local[a], local[b]));
        let graph = Graph::new(labels.len(), edges)?;
        Ok(InducedSubgraph { graph, labels })
    }

    /// Whether the subgraph induced by `subset` is connected.
    pub fn is_connected_subset(&self, subset: &[usize]) -> bool {
        match self.induced_subgraph(subset) {
            Ok(sub) => sub.graph.is_connected(),
            Err(_) => false,
        }
    }
}

/// An induced subgraph together with its map back to the parent's vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedSubgraph {
    pub graph: Graph,
    /// `labels[k]` is the parent vertex of local vertex `k`; sorted ascending.
    pub labels: Vec<usize>,
}

/// A set partition of `0..N` in canonical form: each block sorted, blocks
/// ordered by their smallest member.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct VertexPartition {
    blocks: Vec<Vec<usize>>,
}

impl VertexPartition {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.iter().any(Vec::is_empty) {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; n];
        for &v in blocks.iter().flatten() {
            if v >= n || seen[v] {
                return Err(Error::InvalidPartition(format!(
                    "blocks do not partition 0..{n} (vertex {v})"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { blocks })
    }

    /// Partition from a block label per vertex; labels need not be contiguous.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut slot = std::collections::HashMap::new();
        for (v, &l) in labels.iter().enumerate() {
            let idx = *slot.entry(l).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[idx].push(v);
        }
        Self::new(blocks).expect("labels define a partition")
    }

    pub fn trivial(n: usize) -> Self {
        Self {
            blocks: vec![(0..n).collect()],
        }
    }

    pub fn agent_wise(n: usize) -> Self {
        Self {
            blocks: (0..n).map(|v| vec![v]).collect(),
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Block index of every vertex.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.vertex_count()];
        for (i, b) in self.blocks.iter().enumerate() {
            for &v in b {
                out[v] = i;
            }
        }
        out
    }

    /// True iff `self` has strictly fewer blocks than `finer` and every block
    /// of `finer` lies inside a block of `self`.
    pub fn is_coarser(&self, finer: &VertexPartition) -> Result<bool> {
        if self.vertex_count() != finer.vertex_count() {
            return Err(Error::MismatchedVertexSets);
        }
        if self.block_count() >= finer.block_count() {
            return Ok(false);
        }
        let owner = self.block_of();
        Ok(finer.blocks.iter().all(|b| b.iter().all(|&v| owner[v] == owner[b[0]])))
    }
}

impl TryFrom<Vec<Vec<usize>>> for VertexPartition {
    type Error = Error;

    fn try_from(blocks: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(blocks)
    }
}

impl From<VertexPartition> for Vec<Vec<usize>> {
    fn from(p: VertexPartition) -> Self {
        p.blocks
    }
}

/// All set partitions of `0..n`, generated from restricted growth strings.
/// There are Bell(n) of them.
pub fn set_partitions(n: usize) -> Vec<VertexPartition> {
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    let mut max_prefix = vec![0usize; n];
    loop {
        out.push(VertexPartition::from_labels(&rgs));
        // advance to the next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            if rgs[i] <= max_prefix[i - 1] {
                rgs[i] += 1;
                let m = max_prefix[i - 1].max(rgs[i]);
                max_prefix[i] = m;
                for j in i + 1..n {
                    rgs[j] = 0;
                    max_prefix[j] = m;
                }
                break;
            }
            i -= 1;
        }
    }
}

//! Partitions of frameworks into clusters, and dilute-partition search.
//!
//! A partition is dilute with respect to `l` when every cluster induces a
//! connected subgraph and every pair of adjacent clusters is farther apart than
//! both `l` and either cluster's diameter.

use std::collections::BTreeMap;

use crate::dynamics::{check_in_configuration_space, Configuration};
use crate::error::{Error, Result};
use crate::graph::{set_partitions, Graph, InducedSubgraph, VertexPartition};

/// Largest instance accepted by [`enumerate_dilute`].
pub const ENUMERATION_LIMIT: usize = 10;

/// A vertex partition applied to a framework `(G, p)`.
#[derive(Clone, Debug)]
pub struct FrameworkPartition {
    graph: Graph,
    config: Configuration,
    vp: VertexPartition,
    diameters: Vec<f64>,
}

impl FrameworkPartition {
    pub fn new(graph: &Graph, config: &Configuration, vp: VertexPartition) -> Result<Self> {
        if graph.vertex_count() != config.agent_count() || vp.vertex_count() != graph.vertex_count() {
            return Err(Error::MismatchedVertexSets);
        }
        let diameters = vp.blocks().iter().map(|b| config.diameter_of(b)).collect();
        Ok(Self {
            graph: graph.clone(),
            config: config.clone(),
            vp,
            diameters,
        })
    }

    pub fn vertex_partition(&self) -> &VertexPartition {
        &self.vp
    }

    pub fn into_vertex_partition(self) -> VertexPartition {
        self.vp
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn configuration(&self) -> &Configuration {
        &self.config
    }

    pub fn block_count(&self) -> usize {
        self.vp.block_count()
    }

    pub fn is_trivial(&self) -> bool {
        self.vp.is_trivial()
    }

    fn check_block(&self, i: usize) -> Result<()> {
        if i < self.block_count() {
            Ok(())
        } else {
            Err(Error::InvalidBlock(i))
        }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_block(i)?;
        self.check_block(j)?;
        if i == j {
            return Err(Error::InvalidArgument(format!("block {i} paired with itself")));
        }
        Ok(())
    }

    /// `φ` of block `i`.
    pub fn block_diameter(&self, i: usize) -> Result<f64> {
        self.check_block(i)?;
        Ok(self.diameters[i])
    }

    pub fn block_subgraph(&self, i: usize) -> Result<InducedSubgraph> {
        self.check_block(i)?;
        self.graph.induced_subgraph(&self.vp.blocks()[i])
    }

    pub fn block_configuration(&self, i: usize) -> Result<Configuration> {
        self.check_block(i)?;
        self.config.sub_configuration(&self.vp.blocks()[i])
    }

    /// Closest approach between members of blocks `i` and `j`, over all pairs.
    pub fn cluster_distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check_pair(i, j)?;
        Ok(self.raw_distance(i, j))
    }

    fn raw_distance(&self, i: usize, j: usize) -> f64 {
        let blocks = self.vp.blocks();
        let mut best = f64::INFINITY;
        for &a in &blocks[i] {
            for &b in &blocks[j] {
                best = best.min(self.config.distance(a, b));
            }
        }
        best
    }

    /// True when some edge joins blocks `i` and `j`.
    pub fn are_adjacent(&self, i: usize, j: usize) -> Result<bool> {
        self.check_pair(i, j)?;
        Ok(self.adjacent_pairs().contains(&(i.min(j), i.max(j))))
    }

    /// Adjacent block pairs `(i, j)`, `i < j`, sorted.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let label = self.vp.block_of();
        let mut pairs: Vec<(usize, usize)> = self
            .graph
            .edges()
            .iter()
            .map(|&(a, b)| (label[a], label[b]))
            .filter(|(x, y)| x != y)
            .map(|(x, y)| (x.min(y), x.max(y)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// `𝓛₋`: the largest block diameter.
    pub fn intra_distance(&self) -> f64 {
        self.diameters.iter().copied().fold(0.0, f64::max)
    }

    /// `𝓛₊`: the smallest distance between adjacent blocks.
    pub fn inter_distance(&self) -> Result<f64> {
        self.adjacent_pairs()
            .into_iter()
            .map(|(i, j)| self.raw_distance(i, j))
            .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))))
            .ok_or(Error::NoAdjacentPairs)
    }

    fn violates(&self, i: usize, j: usize, l: f64) -> bool {
        let d = self.raw_distance(i, j);
        !(d > l && self.diameters[i].max(self.diameters[j]) < d)
    }

    pub fn is_dilute(&self, l: f64) -> bool {
        let connected = self.vp.blocks().iter().all(|b| self.graph.is_connected_subset(b));
        connected && self.adjacent_pairs().iter().all(|&(i, j)| !self.violates(i, j, l))
    }

    fn merge(&self, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let m = self.block_count();
        let mut uf = UnionFind::new(m);
        for (i, j) in pairs {
            uf.union(i, j);
        }
        let block_label: Vec<usize> = (0..m).map(|b| uf.find(b)).collect();
        let vertex_label: Vec<usize> = self.vp.block_of().iter().map(|&b| block_label[b]).collect();
        Self::new(&self.graph, &self.config, VertexPartition::from_labels(&vertex_label))
    }

    /// Merges adjacent blocks within `threshold` of each other, transitively.
    pub fn coarsen(&self, threshold: f64) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = self
            .adjacent_pairs()
            .into_iter()
            .filter(|&(i, j)| self.raw_distance(i, j) <= threshold)
            .collect();
        self.merge(pairs)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// The smaller root becomes the representative.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

fn check_framework(g: &Graph, p: &Configuration) -> Result<()> {
    check_in_configuration_space(g, p)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// Connected components of the subgraph keeping only edges of length `≤ l`.
pub fn threshold_components(g: &Graph, p: &Configuration, l: f64) -> Result<FrameworkPartition> {
    check_in_configuration_space(g, p)?;
    let mut uf = UnionFind::new(g.vertex_count());
    for &(i, j) in g.edges() {
        if p.distance(i, j) <= l {
            uf.union(i, j);
        }
    }
    let labels: Vec<usize> = (0..g.vertex_count()).map(|v| uf.find(v)).collect();
    FrameworkPartition::new(g, p, VertexPartition::from_labels(&labels))
}

/// One link of the threshold chain: the partition and the threshold that
/// produced it.
#[derive(Clone, Debug)]
pub struct ChainStep {
    pub threshold: f64,
    pub partition: FrameworkPartition,
}

/// The geometric coarsening chain: components at `l`, then repeated
/// coarsening with thresholds `(N-1) l` and afterwards `(2m-1)` times the
/// previous one, `m` being the block count before that coarsening. Each
/// threshold bounds the block diameters going into it. Only steps that lower
/// the block count are recorded; the last step is the trivial partition.
pub fn threshold_chain(g: &Graph, p: &Configuration, l: f64) -> Result<Vec<ChainStep>> {
    check_framework(g, p)?;
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold {l} must be positive")));
    }
    let n = g.vertex_count();
    let mut current = threshold_components(g, p, l)?;
    let mut chain = vec![ChainStep {
        threshold: l,
        partition: current.clone(),
    }];
    let mut threshold = ((n.max(2) - 1) as f64) * l;
    while !current.is_trivial() {
        let m = current.block_count() as f64;
        let next = current.coarsen(threshold)?;
        if next.block_count() < current.block_count() {
            chain.push(ChainStep {
                threshold,
                partition: next.clone(),
            });
        }
        current = next;
        threshold *= 2.0 * m - 1.0;
        if !threshold.is_finite() {
            return Err(Error::InvalidArgument("threshold chain overflowed".into()));
        }
    }
    Ok(chain)
}

/// The finest nontrivial dilute partition with respect to `l`, or `None` when
/// only the trivial partition is dilute.
///
/// Starts from the threshold components and repeatedly merges every adjacent
/// pair of blocks that breaks the separation condition. Each merge is forced:
/// blocks contained in distinct clusters of a dilute partition can never
/// break it, so the working partition refines every dilute partition and the
/// first dilute one reached is the finest.
pub fn find_nontrivial_dilute(g: &Graph, p: &Configuration, l: f64) -> Result<Option<FrameworkPartition>> {
    check_framework(g, p)?;
    if g.vertex_count() < 2 {
        return Err(Error::InvalidArgument("at least two agents are required".into()));
    }
    let mut current = threshold_components(g, p, l)?;
    loop {
        if current.is_trivial() {
            return Ok(None);
        }
        let bad: Vec<(usize, usize)> = current
            .adjacent_pairs()
            .into_iter()
            .filter(|&(i, j)| current.violates(i, j, l))
            .collect();
        if bad.is_empty() {
            debug_assert!(current.is_dilute(l));
            return Ok(Some(current));
        }
        current = current.merge(bad)?;
    }
}

/// Every dilute partition of a small framework, in canonical order.
pub fn enumerate_dilute(g: &Graph, p: &Configuration, l: f64) -> Result<Vec<FrameworkPartition>> {
    let n = g.vertex_count();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLargeForEnumeration(n, ENUMERATION_LIMIT));
    }
    check_framework(g, p)?;
    let mut out = Vec::new();
    for vp in set_partitions(n) {
        let fp = FrameworkPartition::new(g, p, vp)?;
        if fp.is_dilute(l) {
            out.push(fp);
        }
    }
    out.sort_by(|a, b| a.vp.cmp(&b.vp));
    Ok(out)
}

/// Snapshots sharing one nontrivial dilute vertex partition.
#[derive(Clone, Debug, PartialEq)]
pub struct DilutingWitness {
    pub indices: Vec<usize>,
    pub partition: VertexPartition,
    /// Largest intra-cluster distance across the group.
    pub l0: f64,
}

/// Groups snapshots by the partition found at threshold `ls[i]` and returns
/// the largest group (ties go to the smaller partition in canonical order).
pub fn diluting_subsequence(g: &Graph, snapshots: &[Configuration], ls: &[f64]) -> Result<Option<DilutingWitness>> {
    if snapshots.len() != ls.len() {
        return Err(Error::InvalidArgument(format!(
            "{} snapshots but {} thresholds",
            snapshots.len(),
            ls.len()
        )));
    }
    if ls.windows(2).any(|w| !(w[1] > w[0])) || ls.first().is_some_and(|&l| !(l > 0.0)) {
        return Err(Error::InvalidArgument(
            "thresholds must be positive and strictly increasing".into(),
        ));
    }
    let mut groups: BTreeMap<VertexPartition, (Vec<usize>, f64)> = BTreeMap::new();
    for (i, (p, &l)) in snapshots.iter().zip(ls).enumerate() {
        if let Some(fp) = find_nontrivial_dilute(g, p, l)? {
            let intra = fp.intra_distance();
            let entry = groups.entry(fp.into_vertex_partition()).or_default();
            entry.0.push(i);
            entry.1 = entry.1.max(intra);
        }
    }
    let mut best: Option<(VertexPartition, Vec<usize>, f64)> = None;
    for (vp, (indices, l0)) in groups {
        if best.as_ref().is_none_or(|b| indices.len() > b.1.len()) {
            best = Some((vp, indices, l0));
        }
    }
    Ok(best.map(|(partition, indices, l0)| DilutingWitness { indices, partition, l0 }))
}

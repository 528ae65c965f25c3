//! Cluster tracking along trajectories: the `Π(k)` centroid hierarchy and
//! self-clustering detection.

use itertools::Itertools;
use serde::Serialize;

use crate::dynamics::{Configuration, Trajectory};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexPartition};
use crate::numeric::norm;
use crate::partition::FrameworkPartition;

/// Tolerance for "the running maximum is attained now".
pub const RUNNING_MAX_TOL: f64 = 1e-9;

fn block_centroids(p: &Configuration, vp: &VertexPartition) -> Result<Vec<(f64, Vec<f64>)>> {
    if vp.vertex_count() != p.agent_count() {
        return Err(Error::MismatchedVertexSets);
    }
    let centered = p.centered();
    Ok(vp
        .blocks()
        .iter()
        .map(|b| {
            let mut c = vec![0.0; p.dim()];
            for &v in b {
                for (acc, x) in c.iter_mut().zip(centered.point(v)) {
                    *acc += x;
                }
            }
            (b.len() as f64, c)
        })
        .collect())
}

/// `Π(k)` for `k = 1..=m`. Sums `Σ |V_i| c_i` are kept unnormalized until the
/// union's size is known.
pub fn pi_table(p: &Configuration, vp: &VertexPartition) -> Result<Vec<f64>> {
    let blocks = block_centroids(p, vp)?;
    let m = blocks.len();
    Ok((1..=m).map(|k| pi_from_blocks(&blocks, k)).collect())
}

fn pi_from_blocks(blocks: &[(f64, Vec<f64>)], k: usize) -> f64 {
    let dim = blocks[0].1.len();
    let mut best: f64 = 0.0;
    for subset in (0..blocks.len()).combinations(k) {
        let mut sum = vec![0.0; dim];
        let mut size = 0.0;
        for &i in &subset {
            size += blocks[i].0;
            for (acc, x) in sum.iter_mut().zip(&blocks[i].1) {
                *acc += x;
            }
        }
        best = best.max(norm(&sum) / size);
    }
    best
}

/// Largest centroid norm over unions of `k` blocks, after centering `p`.
pub fn pi_hierarchy(p: &Configuration, vp: &VertexPartition, k: usize) -> Result<f64> {
    let blocks = block_centroids(p, vp)?;
    let m = blocks.len();
    if k == 0 || k > m {
        return Err(Error::IndexOutOfRange { k, max: m });
    }
    Ok(pi_from_blocks(&blocks, k))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SelfClustering {
    /// Both cluster conditions hold from snapshot `index` (time `t0`) onward.
    SelfClustering {
        index: usize,
        t0: f64,
    },
    NotSelfClustering,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterDiagnostics {
    pub partition: VertexPartition,
    pub times: Vec<f64>,
    /// `𝓛₋` per snapshot.
    pub intra: Vec<f64>,
    /// `𝓛₊` per snapshot.
    pub inter: Vec<f64>,
    /// `Π(k)` per snapshot, `k = 1..=m`.
    pub pi: Vec<Vec<f64>>,
    pub verdict: SelfClustering,
}

fn require_nontrivial(vp: &VertexPartition) -> Result<()> {
    if vp.is_trivial() {
        Err(Error::TrivialPartition)
    } else {
        Ok(())
    }
}

/// Per-snapshot cluster distances and `Π` tables for a fixed partition, with
/// the self-clustering verdict for `(l0, l1)`.
pub fn cluster_diagnostics(
    g: &Graph,
    traj: &Trajectory,
    vp: &VertexPartition,
    l0: f64,
    l1: f64,
) -> Result<ClusterDiagnostics> {
    require_nontrivial(vp)?;
    let mut d = ClusterDiagnostics {
        partition: vp.clone(),
        times: Vec::new(),
        intra: Vec::new(),
        inter: Vec::new(),
        pi: Vec::new(),
        verdict: SelfClustering::NotSelfClustering,
    };
    for s in &traj.snapshots {
        let fp = FrameworkPartition::new(g, &s.p, vp.clone())?;
        d.times.push(s.t);
        d.intra.push(fp.intra_distance());
        d.inter.push(fp.inter_distance()?);
        d.pi.push(pi_table(&s.p, vp)?);
    }
    let holds = |i: usize| d.intra[i] < l0 && d.inter[i] > l1;
    let n = d.times.len();
    let mut start = n;
    while start > 0 && holds(start - 1) {
        start -= 1;
    }
    if start < n {
        d.verdict = SelfClustering::SelfClustering {
            index: start,
            t0: d.times[start],
        };
    }
    Ok(d)
}

/// Earliest snapshot from which clusters stay tighter than `l0` and adjacent
/// clusters farther apart than `l1`.
pub fn self_clustering_detect(
    g: &Graph,
    traj: &Trajectory,
    vp: &VertexPartition,
    l0: f64,
    l1: f64,
) -> Result<SelfClustering> {
    cluster_diagnostics(g, traj, vp, l0, l1).map(|d| d.verdict)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthCheck {
    pub index: usize,
    pub t: f64,
    pub k: usize,
    /// `None` when the hypotheses do not hold at this snapshot.
    pub passed: Option<bool>,
    /// `Π(k+1)`.
    pub lhs: f64,
    /// `r - N (r - Π(k)) - 2 l0`, with `r` the running max of `Π(1)`.
    pub rhs: f64,
    pub slack: f64,
}

impl GrowthCheck {
    pub fn applicable(&self) -> bool {
        self.passed.is_some()
    }
}

/// Checks `Π(k+1) ≥ r - N (r - Π(k)) - 2 l0` at snapshots after the first
/// where `Π(k)` sits at its running maximum and clusters are tighter than
/// `l0`. Other instants are reported with `passed = None`.
pub fn lemma4_check(traj: &Trajectory, vp: &VertexPartition, l0: f64) -> Result<Vec<GrowthCheck>> {
    require_nontrivial(vp)?;
    let m = vp.block_count();
    let n = vp.vertex_count() as f64;
    let mut running = vec![f64::NEG_INFINITY; m];
    let mut out = Vec::new();
    for (index, s) in traj.snapshots.iter().enumerate() {
        let pi = pi_table(&s.p, vp)?;
        let prev = running.clone();
        for (r, v) in running.iter_mut().zip(&pi) {
            *r = r.max(*v);
        }
        let r = running[0];
        let tight = vp.blocks().iter().all(|b| s.p.diameter_of(b) < l0);
        for k in 1..m {
            let at_max = pi[k - 1] >= prev[k - 1] - RUNNING_MAX_TOL;
            let lhs = pi[k];
            let rhs = r - n * (r - pi[k - 1]) - 2.0 * l0;
            let applicable = index > 0 && at_max && tight;
            out.push(GrowthCheck {
                index,
                t: s.t,
                k,
                passed: applicable.then_some(lhs >= rhs),
                lhs,
                rhs,
                slack: lhs - rhs,
            });
        }
    }
    Ok(out)
}

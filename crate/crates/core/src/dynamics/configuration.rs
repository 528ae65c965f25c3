use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// `N` points in `ℝⁿ`, stored as one flat coordinate vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    dim: usize,
    coords: Vec<f64>,
}

impl Configuration {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("dimension must be at least 1".into()));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::EmptyVertexSet)?;
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch("points of differing dimension".into()));
        }
        Self::new(dim, points.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn agent_count(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.coords.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(self.point(i), self.point(j))
    }

    pub fn centroid(&self) -> Vec<f64> {
        centroid_of(self, 0..self.agent_count())
    }

    /// Copy translated so the centroid sits at the origin.
    pub fn centered(&self) -> Self {
        let c = self.centroid();
        let coords = self
            .coords
            .chunks(self.dim)
            .flat_map(|x| x.iter().zip(&c).map(|(a, b)| a - b))
            .collect();
        Self { dim: self.dim, coords }
    }

    /// Positions of `subset`, in subset order.
    pub fn sub_configuration(&self, subset: &[usize]) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        let n = self.agent_count();
        let mut coords = Vec::with_capacity(subset.len() * self.dim);
        for &v in subset {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, count: n });
            }
            coords.extend_from_slice(self.point(v));
        }
        Ok(Self { dim: self.dim, coords })
    }

    /// Largest distance between any two of `subset`.
    pub fn diameter_of(&self, subset: &[usize]) -> f64 {
        let mut best: f64 = 0.0;
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }

    /// Uniform placement in a cube of side `2 N^(1/n) α₊`, redrawn until every
    /// edge is at least `α₋ / 2` long.
    pub fn random<R: Rng + ?Sized>(
        graph: &Graph,
        dim: usize,
        alpha_minus: f64,
        alpha_plus: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("dimension must be at least 1".into()));
        }
        let n = graph.vertex_count();
        let side = 2.0 * (n as f64).powf(1.0 / dim as f64) * alpha_plus;
        for _ in 0..100_000 {
            let coords: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(0.0..side)).collect();
            let p = Self { dim, coords };
            if graph
                .edges()
                .iter()
                .all(|&(i, j)| p.distance(i, j) >= 0.5 * alpha_minus)
            {
                return Ok(p);
            }
        }
        Err(Error::InvalidArgument(
            "random placement failed to separate neighbors".into(),
        ))
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn centroid_of(p: &Configuration, members: impl IntoIterator<Item = usize>) -> Vec<f64> {
    let mut c = vec![0.0; p.dim()];
    let mut count = 0usize;
    for v in members {
        for (acc, x) in c.iter_mut().zip(p.point(v)) {
            *acc += x;
        }
        count += 1;
    }
    for acc in &mut c {
        *acc /= count as f64;
    }
    c
}

/// Edge-length extremes, overall diameter and centroid of a framework.
#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub d_minus: f64,
    pub d_plus: f64,
    pub phi: f64,
    pub centroid: Vec<f64>,
}

pub(crate) fn check_sizes(g: &Graph, p: &Configuration) -> Result<()> {
    if g.vertex_count() != p.agent_count() {
        return Err(Error::DimensionMismatch(format!(
            "graph has {} vertices but configuration has {} agents",
            g.vertex_count(),
            p.agent_count()
        )));
    }
    Ok(())
}

/// `d₋`/`d₊` range over edges only; `φ` ranges over all pairs.
pub fn metrics(p: &Configuration, g: &Graph) -> Result<Metrics> {
    check_sizes(g, p)?;
    let (mut d_minus, mut d_plus) = (f64::INFINITY, 0.0f64);
    for &(i, j) in g.edges() {
        let d = p.distance(i, j);
        d_minus = d_minus.min(d);
        d_plus = d_plus.max(d);
    }
    if g.edge_count() == 0 {
        d_minus = 0.0;
    }
    let all: Vec<usize> = (0..p.agent_count()).collect();
    Ok(Metrics {
        d_minus,
        d_plus,
        phi: p.diameter_of(&all),
        centroid: p.centroid(),
    })
}

/// Errors unless every pair of neighbors is at positive distance.
pub fn check_in_configuration_space(g: &Graph, p: &Configuration) -> Result<()> {
    check_sizes(g, p)?;
    for &(i, j) in g.edges() {
        if !(p.distance(i, j) > 0.0) {
            return Err(Error::OutsideConfigurationSpace(i, j));
        }
    }
    Ok(())
}

//! Configurations with a pinned edge length: exact distances between such
//! sets, and sampled estimates of the smallest field norm on them.

use rand::Rng;
use serde::Serialize;

use crate::dynamics::{field_jacobian_apply, metrics, vector_field, Configuration};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::interaction::InteractionMap;
use crate::numeric::norm;

const DESCENT_ITERATIONS: usize = 200;
const DESCENT_STEP: f64 = 1e-2;
const BACKTRACK_LIMIT: usize = 40;

/// Exact distance between the sets where edge `(i, j)` has length `d1` and
/// `d2`, with a pair of configurations attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct PinnedDistance {
    pub exact: f64,
    pub witness: (Configuration, Configuration),
}

/// `|d1 - d2| / √2`. Witnesses put `x_i = -x_j` on the first axis and share
/// every other agent.
pub fn lemma8_distance(g: &Graph, edge: (usize, usize), d1: f64, d2: f64, dim: usize) -> Result<PinnedDistance> {
    let (i, j) = edge;
    if g.edge_index(i, j).is_none() {
        return Err(Error::InvalidEdge(i, j, "not an edge of the graph"));
    }
    for d in [d1, d2] {
        if !(d > 0.0) {
            return Err(Error::NonpositiveDistance(d));
        }
    }
    if dim == 0 {
        return Err(Error::DimensionMismatch("dimension must be at least 1".into()));
    }
    let n = g.vertex_count();
    let far = d1.max(d2) + 1.0;
    let build = |d: f64| {
        let mut coords = vec![0.0; n * dim];
        coords[i * dim] = -d / 2.0;
        coords[j * dim] = d / 2.0;
        let mut rank = 0.0;
        for v in (0..n).filter(|&v| v != i && v != j) {
            coords[v * dim] = far + rank;
            rank += 1.0;
        }
        Configuration::new(dim, coords)
    };
    Ok(PinnedDistance {
        exact: (d1 - d2).abs() / std::f64::consts::SQRT_2,
        witness: (build(d1)?, build(d2)?),
    })
}

/// Moves `x_i` and `x_j` symmetrically about their midpoint so the edge has
/// length `d`. Coincident endpoints are split along a random direction.
pub fn pin_edge<R: Rng + ?Sized>(
    p: &Configuration,
    edge: (usize, usize),
    d: f64,
    rng: &mut R,
) -> Result<Configuration> {
    pin_edge_with(p, edge, d, || (0..p.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn pin_edge_with(
    p: &Configuration,
    edge: (usize, usize),
    d: f64,
    mut direction: impl FnMut() -> Vec<f64>,
) -> Result<Configuration> {
    let dim = p.dim();
    let (i, j) = edge;
    let (xi, xj) = (p.point(i).to_vec(), p.point(j).to_vec());
    let mut u: Vec<f64> = xj.iter().zip(&xi).map(|(b, a)| b - a).collect();
    let mut len = norm(&u);
    while !(len > 0.0) {
        u = direction();
        len = norm(&u);
    }
    let mut coords = p.coords().to_vec();
    for c in 0..dim {
        let mid = 0.5 * (xi[c] + xj[c]);
        let half = 0.5 * d * u[c] / len;
        coords[i * dim + c] = mid - half;
        coords[j * dim + c] = mid + half;
    }
    Configuration::new(dim, coords)
}

/// Scales `p` about its centroid so the shortest edge has length `d`.
fn pin_shortest_edge(g: &Graph, p: &Configuration, d: f64) -> Result<Configuration> {
    let mt = metrics(p, g)?;
    if !(mt.d_minus > 0.0) {
        return Err(Error::OutsideConfigurationSpace(0, 0));
    }
    let s = d / mt.d_minus;
    let c = &mt.centroid;
    let coords = p
        .coords()
        .chunks(p.dim())
        .flat_map(|x| x.iter().zip(c).map(move |(a, b)| b + s * (a - b)))
        .collect();
    Configuration::new(p.dim(), coords)
}

fn field_norm_sq(g: &Graph, m: &InteractionMap, p: &Configuration) -> Option<f64> {
    vector_field(g, m, p).ok().map(|f| f.iter().map(|x| x * x).sum())
}

/// Projected gradient descent on `‖f‖²`; the gradient is `2 Df f` because
/// `Df` is symmetric.
fn descend(
    g: &Graph,
    m: &InteractionMap,
    mut p: Configuration,
    project: impl Fn(&Configuration) -> Result<Configuration>,
) -> Result<(f64, Configuration)> {
    let mut value = field_norm_sq(g, m, &p).ok_or(Error::OutsideConfigurationSpace(0, 0))?;
    for _ in 0..DESCENT_ITERATIONS {
        let f = vector_field(g, m, &p)?;
        let grad: Vec<f64> = field_jacobian_apply(g, m, &p, &f)?.iter().map(|v| 2.0 * v).collect();
        let mut step = DESCENT_STEP;
        let mut improved = false;
        for _ in 0..BACKTRACK_LIMIT {
            let trial: Vec<f64> = p.coords().iter().zip(&grad).map(|(x, gr)| x - step * gr).collect();
            let cand = Configuration::new(p.dim(), trial).and_then(|c| project(&c));
            if let Ok(cand) = cand {
                if let Some(v) = field_norm_sq(g, m, &cand) {
                    if v < value {
                        p = cand;
                        value = v;
                        improved = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((value.sqrt(), p))
}

/// Sampled upper estimate of an infimum of `‖f‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldNormEstimate {
    pub value: f64,
    pub minimizer: Configuration,
}

/// Upper estimate of `inf ‖f(p)‖` over configurations with some edge of
/// length `d`. Each of the `budget` starts pins one edge (cycling through the
/// edges) and is refined by projected descent.
pub fn mu_estimate<R: Rng + ?Sized>(
    g: &Graph,
    m: &InteractionMap,
    d: f64,
    dim: usize,
    budget: usize,
    rng: &mut R,
) -> Result<FieldNormEstimate> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    if !(d > 0.0) {
        return Err(Error::NonpositiveDistance(d));
    }
    let mut best: Option<FieldNormEstimate> = None;
    for s in 0..budget {
        let edge = g.edges()[s % g.edge_count()];
        let start = Configuration::random(g, dim, m.alpha_minus(), m.alpha_plus(), rng)?;
        let start = pin_edge(&start, edge, d, rng)?;
        let axis = || (0..dim).map(|c| if c == 0 { 1.0 } else { 0.0 }).collect();
        let (value, p) = descend(g, m, start, |c| pin_edge_with(c, edge, d, axis))?;
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(FieldNormEstimate { value, minimizer: p });
        }
    }
    Ok(best.expect("budget is positive"))
}

/// Upper estimate of `inf ‖f(p)‖` over configurations whose shortest edge
/// has length `d`.
pub fn shortest_edge_estimate<R: Rng + ?Sized>(
    g: &Graph,
    m: &InteractionMap,
    d: f64,
    dim: usize,
    budget: usize,
    rng: &mut R,
) -> Result<FieldNormEstimate> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    if !(d > 0.0) {
        return Err(Error::NonpositiveDistance(d));
    }
    let mut best: Option<FieldNormEstimate> = None;
    for _ in 0..budget {
        let start = Configuration::random(g, dim, m.alpha_minus(), m.alpha_plus(), rng)?;
        let start = pin_shortest_edge(g, &start, d)?;
        let (value, p) = descend(g, m, start, |c| pin_shortest_edge(g, c, d))?;
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(FieldNormEstimate { value, minimizer: p });
        }
    }
    Ok(best.expect("budget is positive"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupReport {
    pub ds: Vec<f64>,
    pub estimates: Vec<f64>,
    /// Estimates strictly increase as `d` decreases.
    pub increasing: bool,
    /// False when some `d` is not below `α₋`, where no blow-up is expected.
    pub applicable: bool,
    pub note: String,
}

/// Shortest-edge estimates along decreasing `ds`, checking that they grow.
pub fn small_d_blowup_check<R: Rng + ?Sized>(
    g: &Graph,
    m: &InteractionMap,
    ds: &[f64],
    dim: usize,
    budget: usize,
    rng: &mut R,
) -> Result<BlowupReport> {
    if ds.is_empty() || ds.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "distances must be nonempty and strictly decreasing".into(),
        ));
    }
    let applicable = ds[0] < m.alpha_minus();
    let mut estimates = Vec::with_capacity(ds.len());
    for &d in ds {
        estimates.push(shortest_edge_estimate(g, m, d, dim, budget, rng)?.value);
    }
    let increasing = estimates.windows(2).all(|w| w[1] > w[0]);
    let note = if !applicable {
        format!(
            "regime not applicable: distances reach alpha_minus = {}",
            m.alpha_minus()
        )
    } else if increasing {
        "estimates grow as d decreases".to_string()
    } else {
        "estimates do not grow monotonically".to_string()
    };
    Ok(BlowupReport {
        ds: ds.to_vec(),
        estimates,
        increasing,
        applicable,
        note,
    })
}

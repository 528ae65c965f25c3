//! The gradient vector field `f = -∇Ψ` and its potential.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::interaction::InteractionMap;

use super::configuration::{check_sizes, distance, Configuration};

fn edge_length(coords: &[f64], dim: usize, i: usize, j: usize) -> Result<f64> {
    let d = distance(&coords[i * dim..(i + 1) * dim], &coords[j * dim..(j + 1) * dim]);
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::OutsideConfigurationSpace(i, j))
    }
}

/// Accumulates the field of the selected edges into `out` (overwritten).
pub(crate) fn field_raw(
    g: &Graph,
    m: &InteractionMap,
    dim: usize,
    coords: &[f64],
    keep: impl Fn(usize, usize) -> bool,
    out: &mut [f64],
) -> Result<()> {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        if !keep(i, j) {
            continue;
        }
        let d = edge_length(coords, dim, i, j)?;
        let w = m.law(k).eval_g(d)?;
        for c in 0..dim {
            let f = w * (coords[j * dim + c] - coords[i * dim + c]);
            out[i * dim + c] += f;
            out[j * dim + c] -= f;
        }
    }
    Ok(())
}

fn check(g: &Graph, m: &InteractionMap, p: &Configuration) -> Result<()> {
    check_sizes(g, p)?;
    if m.laws().len() != g.edge_count() {
        return Err(Error::InvalidArgument(format!(
            "interaction map has {} laws for {} edges",
            m.laws().len(),
            g.edge_count()
        )));
    }
    Ok(())
}

/// Stacked `f(p)`; entry `i` is `Σ_{j ∈ V_i} g_ij(d_ij)(x_j - x_i)`.
pub fn vector_field(g: &Graph, m: &InteractionMap, p: &Configuration) -> Result<Vec<f64>> {
    check(g, m, p)?;
    let mut out = vec![0.0; p.coords().len()];
    field_raw(g, m, p.dim(), p.coords(), |_, _| true, &mut out)?;
    Ok(out)
}

fn gather(v: &[f64], dim: usize, subset: &[usize], n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(subset.len() * dim);
    for &s in subset {
        if s >= n {
            return Err(Error::VertexOutOfRange { vertex: s, count: n });
        }
        out.extend_from_slice(&v[s * dim..(s + 1) * dim]);
    }
    Ok(out)
}

/// Entries of `f(p)` for `subset`; forces from outside the subset count.
pub fn restricted_field(g: &Graph, m: &InteractionMap, p: &Configuration, subset: &[usize]) -> Result<Vec<f64>> {
    let f = vector_field(g, m, p)?;
    gather(&f, p.dim(), subset, p.agent_count())
}

/// Field of the sub-system induced by `subset`: only edges inside it act.
pub fn subsystem_field(g: &Graph, m: &InteractionMap, p: &Configuration, subset: &[usize]) -> Result<Vec<f64>> {
    check(g, m, p)?;
    if subset.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    let n = p.agent_count();
    let mut member = vec![false; n];
    for &s in subset {
        if s >= n {
            return Err(Error::VertexOutOfRange { vertex: s, count: n });
        }
        member[s] = true;
    }
    let mut out = vec![0.0; p.coords().len()];
    field_raw(g, m, p.dim(), p.coords(), |i, j| member[i] && member[j], &mut out)?;
    gather(&out, p.dim(), subset, n)
}

pub(crate) fn potential_raw(g: &Graph, m: &InteractionMap, dim: usize, coords: &[f64]) -> Result<f64> {
    let mut psi = 0.0;
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        psi += m.law(k).pair_potential(edge_length(coords, dim, i, j)?)?;
    }
    Ok(psi)
}

/// `Ψ(p) = Σ_edges ∫₁^{d_ij} s g_ij(s) ds`.
pub fn potential(g: &Graph, m: &InteractionMap, p: &Configuration) -> Result<f64> {
    check(g, m, p)?;
    potential_raw(g, m, p.dim(), p.coords())
}

/// Central-difference gradient of `Ψ`.
pub fn finite_difference_gradient(g: &Graph, m: &InteractionMap, p: &Configuration, h: f64) -> Result<Vec<f64>> {
    check(g, m, p)?;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    let mut x = p.coords().to_vec();
    let mut grad = vec![0.0; x.len()];
    for k in 0..x.len() {
        let orig = x[k];
        x[k] = orig + h;
        let plus = potential_raw(g, m, p.dim(), &x)?;
        x[k] = orig - h;
        let minus = potential_raw(g, m, p.dim(), &x)?;
        x[k] = orig;
        grad[k] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// `Df(p) v`, the Jacobian of the field applied to `v`. `Df` is symmetric.
pub fn field_jacobian_apply(g: &Graph, m: &InteractionMap, p: &Configuration, v: &[f64]) -> Result<Vec<f64>> {
    check(g, m, p)?;
    let dim = p.dim();
    let x = p.coords();
    if v.len() != x.len() {
        return Err(Error::DimensionMismatch("direction length".into()));
    }
    let mut out = vec![0.0; x.len()];
    let mut u = vec![0.0; dim];
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        let d = edge_length(x, dim, i, j)?;
        let law = m.law(k);
        let (gv, dgv) = (law.eval_g(d)?, law.eval_dg(d)?);
        let mut u_dot_w = 0.0;
        for c in 0..dim {
            u[c] = x[j * dim + c] - x[i * dim + c];
            u_dot_w += u[c] * (v[j * dim + c] - v[i * dim + c]);
        }
        for c in 0..dim {
            let w = v[j * dim + c] - v[i * dim + c];
            let t = gv * w + dgv * u[c] * u_dot_w / d;
            out[i * dim + c] += t;
            out[j * dim + c] -= t;
        }
    }
    Ok(out)
}

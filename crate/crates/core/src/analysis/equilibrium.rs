use serde::Serialize;

use crate::dynamics::{metrics, vector_field, Configuration};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::interaction::InteractionMap;
use crate::numeric::norm;

/// Slack allowed when comparing `d₊` against `D₊`.
pub const BOUND_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub is_equilibrium: bool,
    pub residual: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    /// `D₊ = (N - 1) α₊`, the largest edge length any equilibrium can have.
    pub d_plus_bound: f64,
    pub bound_satisfied: bool,
}

pub fn is_equilibrium(g: &Graph, m: &InteractionMap, p: &Configuration, eps: f64) -> Result<EquilibriumReport> {
    let residual = norm(&vector_field(g, m, p)?);
    let mt = metrics(p, g)?;
    let d_plus_bound = (g.vertex_count() as f64 - 1.0) * m.alpha_plus();
    Ok(EquilibriumReport {
        is_equilibrium: residual < eps,
        residual,
        d_minus: mt.d_minus,
        d_plus: mt.d_plus,
        d_plus_bound,
        bound_satisfied: mt.d_plus <= d_plus_bound + BOUND_TOLERANCE,
    })
}

/// Floor on every edge length along a trajectory starting at potential
/// `psi_initial`.
pub fn collision_bound(g: &Graph, m: &InteractionMap, psi_initial: f64) -> Result<f64> {
    if m.laws().len() != g.edge_count() {
        return Err(Error::InvalidArgument("interaction map does not match graph".into()));
    }
    m.collision_bound(psi_initial)
}

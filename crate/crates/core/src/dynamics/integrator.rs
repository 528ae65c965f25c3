//! Dormand–Prince 5(4) with FSAL and PI step-size control.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::interaction::InteractionMap;
use crate::numeric::norm;

use super::configuration::{check_in_configuration_space, metrics, Configuration};
use super::field::{field_raw, potential_raw};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MIN_STEP: f64 = 1e-14;
const COLLISION_SAFETY: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorParams {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Final time `T`.
    pub horizon: f64,
    /// Stop once `‖f(p)‖` drops below this.
    pub eq_threshold: f64,
    /// Time between emitted snapshots.
    pub snapshot_interval: f64,
    pub max_steps: u64,
}

impl Default for IntegratorParams {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-15,
            initial_step: 1e-3,
            max_step: 10.0,
            horizon: 100.0,
            eq_threshold: 1e-9,
            snapshot_interval: 1.0,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
            ("horizon", self.horizon),
            ("snapshot_interval", self.snapshot_interval),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.eq_threshold >= 0.0) {
            return Err(Error::InvalidParams("eq_threshold must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub p: Configuration,
    pub psi: f64,
    pub f_norm: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub phi: f64,
}

impl Snapshot {
    pub fn evaluate(g: &Graph, m: &InteractionMap, t: f64, p: Configuration) -> Result<Self> {
        let mut f = vec![0.0; p.coords().len()];
        field_raw(g, m, p.dim(), p.coords(), |_, _| true, &mut f)?;
        let psi = potential_raw(g, m, p.dim(), p.coords())?;
        let mt = metrics(&p, g)?;
        Ok(Self {
            t,
            psi,
            f_norm: norm(&f),
            d_minus: mt.d_minus,
            d_plus: mt.d_plus,
            phi: mt.phi,
            p,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub steps: u64,
    pub rejections: u64,
    /// Rejections caused by the collision guard alone.
    pub collision_rejections: u64,
    pub field_evaluations: u64,
    /// Smallest edge length seen at any accepted step.
    pub min_d_minus: f64,
    /// Largest `‖f‖` seen at any accepted step.
    pub max_f_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    Horizon,
    Incomplete,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub stats: IntegratorStats,
    pub stop: StopReason,
    /// Guaranteed floor on edge lengths, from the initial potential.
    pub collision_bound: f64,
}

impl Trajectory {
    /// Wraps externally produced snapshots (e.g. read back from disk).
    pub fn from_snapshots(snapshots: Vec<Snapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::InvalidArgument("trajectory has no snapshots".into()));
        }
        if snapshots.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidArgument("snapshot times must increase strictly".into()));
        }
        let stats = IntegratorStats {
            min_d_minus: snapshots.iter().map(|s| s.d_minus).fold(f64::INFINITY, f64::min),
            max_f_norm: snapshots.iter().map(|s| s.f_norm).fold(0.0, f64::max),
            ..Default::default()
        };
        Ok(Self {
            snapshots,
            stats,
            stop: StopReason::Incomplete,
            collision_bound: 0.0,
        })
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("nonempty trajectory")
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }
}

struct Rhs<'a> {
    g: &'a Graph,
    m: &'a InteractionMap,
    dim: usize,
    evals: u64,
}

impl Rhs<'_> {
    fn eval(&mut self, y: &[f64], out: &mut [f64]) -> Result<()> {
        self.evals += 1;
        field_raw(self.g, self.m, self.dim, y, |_, _| true, out)
    }
}

fn min_edge(g: &Graph, dim: usize, y: &[f64]) -> f64 {
    g.edges()
        .iter()
        .map(|&(i, j)| super::configuration::distance(&y[i * dim..(i + 1) * dim], &y[j * dim..(j + 1) * dim]))
        .fold(f64::INFINITY, f64::min)
}

/// A stage hit a singular or undefined point; shrink the step and retry.
fn recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::OutsideConfigurationSpace(..) | Error::NonpositiveDistance(_) | Error::OutsideTabulatedRange { .. }
    )
}

/// Integrates `ẋ = f(x)` from `p0` until the horizon or until `‖f‖` drops
/// below the equilibrium threshold. Snapshots are emitted at multiples of the
/// snapshot interval, plus the initial and final states.
pub fn simulate(g: &Graph, m: &InteractionMap, p0: &Configuration, params: &IntegratorParams) -> Result<Trajectory> {
    params.validate()?;
    check_in_configuration_space(g, p0)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let dim = p0.dim();
    let len = p0.coords().len();
    let mut rhs = Rhs { g, m, dim, evals: 0 };

    let first = Snapshot::evaluate(g, m, 0.0, p0.clone())?;
    let collision_bound = m.collision_bound(first.psi)?;
    let guard = COLLISION_SAFETY * collision_bound;

    let mut traj = Trajectory {
        stats: IntegratorStats {
            min_d_minus: first.d_minus,
            max_f_norm: first.f_norm,
            ..Default::default()
        },
        snapshots: vec![first],
        stop: StopReason::Horizon,
        collision_bound,
    };

    let mut y = p0.coords().to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; len]; 7];
    rhs.eval(&y, &mut k[0])?;
    let mut f_norm = norm(&k[0]);
    if f_norm < params.eq_threshold {
        traj.stop = StopReason::Converged;
        traj.stats.field_evaluations = rhs.evals;
        return Ok(traj);
    }

    let mut t = 0.0;
    let mut h = params.initial_step.min(params.max_step);
    let mut err_prev: f64 = 1e-4;
    let mut next_out = params.snapshot_interval.min(params.horizon);
    let mut stage = vec![0.0; len];
    let mut y_new = vec![0.0; len];

    loop {
        if traj.stats.steps >= params.max_steps {
            return Err(Error::InvalidParams(format!(
                "step budget of {} exhausted at t = {t}",
                params.max_steps
            )));
        }
        if h < MIN_STEP {
            traj.stats.field_evaluations = rhs.evals;
            traj.stop = StopReason::Incomplete;
            return Err(Error::StiffnessFailure {
                t,
                step: h,
                partial: Box::new(traj),
            });
        }
        let target = next_out;
        let clamped = t + h >= target;
        let h_used = if clamped { target - t } else { h };

        // stages 2..7; stage 7 is the new point's derivative (FSAL)
        let mut failed = None;
        for s in 1..7 {
            for c in 0..len {
                let mut acc = 0.0;
                for (r, kr) in k.iter().enumerate().take(s) {
                    acc += A[s][r] * kr[c];
                }
                stage[c] = y[c] + h_used * acc;
            }
            if let Err(e) = rhs.eval(&stage, &mut k[s]) {
                failed = Some(e);
                break;
            }
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
        }
        if let Some(e) = failed {
            if !recoverable(&e) {
                return Err(e);
            }
            traj.stats.rejections += 1;
            h = 0.5 * h_used;
            continue;
        }

        let mut err_sq = 0.0;
        for c in 0..len {
            let mut e = 0.0;
            for (r, kr) in k.iter().enumerate() {
                e += E[r] * kr[c];
            }
            let scale = params.atol + params.rtol * y[c].abs().max(y_new[c].abs());
            err_sq += (h_used * e / scale).powi(2);
        }
        let err = (err_sq / len as f64).sqrt();

        if !(err <= 1.0) {
            traj.stats.rejections += 1;
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            h = h_used * fac;
            continue;
        }
        let d_min = min_edge(g, dim, &y_new);
        if d_min < guard {
            traj.stats.rejections += 1;
            traj.stats.collision_rejections += 1;
            h = 0.5 * h_used;
            continue;
        }

        // accepted
        traj.stats.steps += 1;
        t = if clamped { target } else { t + h_used };
        std::mem::swap(&mut y, &mut y_new);
        k.swap(0, 6);
        f_norm = norm(&k[0]);
        traj.stats.min_d_minus = traj.stats.min_d_minus.min(d_min);
        traj.stats.max_f_norm = traj.stats.max_f_norm.max(f_norm);

        let err_c = err.max(1e-10);
        let fac = (0.9 * err_c.powf(-0.17) * err_prev.powf(0.04)).clamp(0.2, 10.0);
        err_prev = err_c;
        let proposal = (h_used * fac).min(params.max_step);
        h = if clamped { proposal.max(h) } else { proposal };

        let converged = f_norm < params.eq_threshold;
        let at_output = clamped;
        let at_end = clamped && target >= params.horizon;
        if at_output || converged {
            let snap = Snapshot::evaluate(g, m, t, Configuration::new(dim, y.clone())?)?;
            traj.snapshots.push(snap);
        }
        if converged {
            traj.stop = StopReason::Converged;
            break;
        }
        if at_end {
            traj.stop = StopReason::Horizon;
            break;
        }
        if at_output {
            let n = (t / params.snapshot_interval).round() + 1.0;
            next_out = (n * params.snapshot_interval).min(params.horizon);
            if next_out <= t {
                next_out = params.horizon;
            }
        }
    }
    traj.stats.field_evaluations = rhs.evals;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::InteractionFunction;

    fn lj() -> InteractionFunction {
        InteractionFunction::lennard_jones(1.0, 1.0, 4, 3).unwrap()
    }

    #[test]
    fn equilibrium_start_stops_immediately() {
        let g = Graph::path(2);
        let m = InteractionMap::uniform(&g, lj()).unwrap();
        let p = Configuration::new(2, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let tr = simulate(&g, &m, &p, &IntegratorParams::default()).unwrap();
        assert_eq!(tr.snapshots.len(), 1);
        assert!(tr.converged());
        assert_eq!(tr.last().f_norm, 0.0);
    }

    #[test]
    fn two_body_converges_to_root() {
        let g = Graph::path(2);
        let m = InteractionMap::uniform(&g, lj()).unwrap();
        let p = Configuration::new(2, vec![0.0, 0.0, 3.0, 0.0]).unwrap();
        let params = IntegratorParams {
            horizon: 1e4,
            ..Default::default()
        };
        let tr = simulate(&g, &m, &p, &params).unwrap();
        assert!(tr.converged());
        assert!((tr.last().d_minus - 1.0).abs() < 1e-6);
        for w in tr.snapshots.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!(w[1].psi <= w[0].psi + 1e-8);
        }
        let c = tr.last().p.centroid();
        assert!((c[0] - 1.5).abs() < 1e-8 * params.horizon && c[1].abs() < 1e-12);
        assert!(tr.stats.min_d_minus > tr.collision_bound);
    }

    #[test]
    fn horizon_stop_hits_exact_time() {
        let g = Graph::path(3);
        let m = InteractionMap::uniform(&g, lj()).unwrap();
        let p = Configuration::new(1, vec![0.0, 4.0, 9.0]).unwrap();
        let params = IntegratorParams {
            horizon: 2.5,
            snapshot_interval: 1.0,
            ..Default::default()
        };
        let tr = simulate(&g, &m, &p, &params).unwrap();
        assert_eq!(tr.stop, StopReason::Horizon);
        let times: Vec<f64> = tr.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 1.0, 2.0, 2.5]);
    }

    #[test]
    fn rejects_bad_params_and_inputs() {
        let g = Graph::path(2);
        let m = InteractionMap::uniform(&g, lj()).unwrap();
        let p = Configuration::new(1, vec![0.0, 3.0]).unwrap();
        let bad = IntegratorParams {
            rtol: 0.0,
            ..Default::default()
        };
        assert!(matches!(simulate(&g, &m, &p, &bad), Err(Error::InvalidParams(_))));
        let q = Configuration::new(1, vec![2.0, 2.0]).unwrap();
        assert!(simulate(&g, &m, &q, &IntegratorParams::default()).is_err());
    }
}

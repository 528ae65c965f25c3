//! Attraction/repulsion interaction laws.
//!
//! An interaction law `g(d)` acts on an edge of length `d`; the force on agent
//! `i` from neighbor `j` is `g(d_ij) (x_j - x_i)`. The scaled law
//! `bar_g(d) = d g(d)` is the signed force magnitude and the pair potential is
//! `∫₁ᵈ s g(s) ds`.
//!
//! A valid law has strong repulsion (`d g(d) → -∞` and a divergent potential as
//! `d → 0+`) and fading attraction (`g > 0` beyond some `α₊` and `d g(d) → 0`).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::{bisect, golden_section_min, integrate};

/// Multiplicative margin around the sign-change root used for `α₋`/`α₊`.
pub const DEFAULT_ROOT_MARGIN: f64 = 1e-6;

const QUADRATURE_TOL: f64 = 1e-10;
const PSI_ZERO_TOL: f64 = 1e-10;
const LEVEL_SET_TOL: f64 = 1e-12;

/// `g(d) = -σ₁/d^n₁ + σ₂/d^n₂` with integer exponents `n₁ > n₂ > 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LennardJones {
    pub sigma1: f64,
    pub sigma2: f64,
    pub n1: u32,
    pub n2: u32,
}

impl LennardJones {
    pub fn new(sigma1: f64, sigma2: f64, n1: u32, n2: u32) -> Result<Self> {
        let lj = Self { sigma1, sigma2, n1, n2 };
        lj.check()?;
        Ok(lj)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if !(self.sigma1 > 0.0 && self.sigma1.is_finite()) || !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidInteraction(format!(
                "sigma1 and sigma2 must be positive and finite (got {}, {})",
                self.sigma1, self.sigma2
            )));
        }
        if !(self.n1 > self.n2 && self.n2 > 2) {
            return Err(Error::InvalidInteraction(format!(
                "exponents must satisfy n1 > n2 > 2 (got n1 = {}, n2 = {})",
                self.n1, self.n2
            )));
        }
        Ok(())
    }

    fn g(&self, d: f64) -> f64 {
        -self.sigma1 / d.powi(self.n1 as i32) + self.sigma2 / d.powi(self.n2 as i32)
    }

    fn dg(&self, d: f64) -> f64 {
        self.sigma1 * self.n1 as f64 / d.powi(self.n1 as i32 + 1)
            - self.sigma2 * self.n2 as f64 / d.powi(self.n2 as i32 + 1)
    }

    fn bar_g(&self, d: f64) -> f64 {
        -self.sigma1 * d.powi(1 - self.n1 as i32) + self.sigma2 * d.powi(1 - self.n2 as i32)
    }

    /// Closed form of `∫₁ᵈ s g(s) ds`.
    fn potential(&self, d: f64) -> f64 {
        let (k1, k2) = (self.n1 as f64 - 2.0, self.n2 as f64 - 2.0);
        self.sigma1 * (d.powi(2 - self.n1 as i32) - 1.0) / k1 - self.sigma2 * (d.powi(2 - self.n2 as i32) - 1.0) / k2
    }

    /// `∫₁^∞ s g(s) ds`, finite because `n₂ > 2`.
    pub fn potential_tail(&self) -> f64 {
        -self.sigma1 / (self.n1 as f64 - 2.0) + self.sigma2 / (self.n2 as f64 - 2.0)
    }

    /// The unique zero of `g`.
    pub fn root(&self) -> f64 {
        (self.sigma1 / self.sigma2).powf(1.0 / (self.n1 - self.n2) as f64)
    }

    /// Where `bar_g` peaks on the attractive side.
    fn bar_g_peak(&self) -> f64 {
        let ratio = self.sigma1 * (self.n1 - 1) as f64 / (self.sigma2 * (self.n2 - 1) as f64);
        ratio.powf(1.0 / (self.n1 - self.n2) as f64)
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied law, known through an evaluator and a sample grid.
///
/// Positivity on the unbounded tail cannot be checked from samples, so the
/// caller supplies `α₊`; validation only confirms it on the grid.
#[derive(Clone)]
pub struct TabulatedFunction {
    grid: Vec<f64>,
    alpha_plus: f64,
    evaluator: Evaluator,
    domain: Option<(f64, f64)>,
}

impl fmt::Debug for TabulatedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TabulatedFunction")
            .field("grid_len", &self.grid.len())
            .field("grid_range", &(self.grid.first(), self.grid.last()))
            .field("alpha_plus", &self.alpha_plus)
            .field("domain", &self.domain)
            .finish()
    }
}

impl TabulatedFunction {
    /// Wraps an arbitrary evaluator; `grid` is used for validation and for
    /// locating `α₋`.
    pub fn from_fn<F>(evaluator: F, mut grid: Vec<f64>, alpha_plus: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        Self::check_grid(&grid, alpha_plus)?;
        Ok(Self {
            grid,
            alpha_plus,
            evaluator: Arc::new(evaluator),
            domain: None,
        })
    }

    /// Builds the law from `(d, g(d))` samples. Between samples `d g(d)` is
    /// interpolated linearly in `ln d`; outside the sampled range the law is
    /// undefined. The range must contain the reference distance 1.
    pub fn from_samples(samples: &[(f64, f64)], alpha_plus: f64) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = samples.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidInteraction("duplicate sample distance".into()));
        }
        if pts.iter().any(|&(d, g)| !(d > 0.0) || !d.is_finite() || !g.is_finite()) {
            return Err(Error::InvalidInteraction(
                "samples must have positive finite distances and finite values".into(),
            ));
        }
        let grid: Vec<f64> = pts.iter().map(|p| p.0).collect();
        Self::check_grid(&grid, alpha_plus)?;
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        if !(lo <= 1.0 && 1.0 <= hi) {
            return Err(Error::InvalidInteraction(format!(
                "sample range [{lo}, {hi}] must contain the reference distance 1"
            )));
        }
        let log_d: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
        let bar: Vec<f64> = pts.iter().map(|p| p.0 * p.1).collect();
        let evaluator = move |d: f64| {
            let x = d.ln();
            let k = match log_d.binary_search_by(|v| v.total_cmp(&x)) {
                Ok(k) => return bar[k] / d,
                Err(k) => k.clamp(1, log_d.len() - 1),
            };
            let t = (x - log_d[k - 1]) / (log_d[k] - log_d[k - 1]);
            (bar[k - 1] + t * (bar[k] - bar[k - 1])) / d
        };
        Ok(Self {
            grid,
            alpha_plus,
            evaluator: Arc::new(evaluator),
            domain: Some((lo, hi)),
        })
    }

    fn check_grid(grid: &[f64], alpha_plus: f64) -> Result<()> {
        if grid.len() < 3 {
            return Err(Error::InvalidInteraction("grid needs at least 3 points".into()));
        }
        if grid.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidInteraction("grid distances must be positive".into()));
        }
        if !(alpha_plus > 0.0 && alpha_plus.is_finite()) {
            return Err(Error::InvalidInteraction("alpha_plus must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn alpha_plus_certificate(&self) -> f64 {
        self.alpha_plus
    }

    fn in_domain(&self, d: f64) -> Result<()> {
        match self.domain {
            Some((lo, hi)) if d < lo || d > hi => Err(Error::OutsideTabulatedRange { distance: d, lo, hi }),
            _ => Ok(()),
        }
    }

    fn g(&self, d: f64) -> Result<f64> {
        self.in_domain(d)?;
        Ok((self.evaluator)(d))
    }

    fn dg(&self, d: f64) -> Result<f64> {
        let mut h = 1e-6 * d;
        if let Some((lo, hi)) = self.domain {
            h = h.min(d - lo).min(hi - d);
        }
        if h <= 0.0 {
            let h = 1e-6 * d;
            return if self.in_domain(d + h).is_ok() {
                Ok(((self.g(d + h)?) - self.g(d)?) / h)
            } else {
                Ok((self.g(d)? - self.g(d - h)?) / h)
            };
        }
        Ok((self.g(d + h)? - self.g(d - h)?) / (2.0 * h))
    }
}

#[derive(Clone, Debug)]
pub enum InteractionFunction {
    LennardJones(LennardJones),
    Tabulated(TabulatedFunction),
}

/// One of the two defining conditions of an attraction/repulsion law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    StrongRepulsion,
    FadingAttraction,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::StrongRepulsion => "strong repulsion",
            Condition::FadingAttraction => "fading attraction",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn positive(d: f64) -> Result<()> {
    if d > 0.0 {
        Ok(())
    } else {
        Err(Error::NonpositiveDistance(d))
    }
}

impl InteractionFunction {
    pub fn lennard_jones(sigma1: f64, sigma2: f64, n1: u32, n2: u32) -> Result<Self> {
        LennardJones::new(sigma1, sigma2, n1, n2).map(Self::LennardJones)
    }

    pub fn eval_g(&self, d: f64) -> Result<f64> {
        positive(d)?;
        match self {
            Self::LennardJones(lj) => Ok(lj.g(d)),
            Self::Tabulated(t) => t.g(d),
        }
    }

    /// `d g(d)`, the signed magnitude of the pairwise force.
    pub fn eval_bar_g(&self, d: f64) -> Result<f64> {
        positive(d)?;
        match self {
            Self::LennardJones(lj) => Ok(lj.bar_g(d)),
            Self::Tabulated(t) => Ok(d * t.g(d)?),
        }
    }

    /// `g'(d)`; analytic for Lennard-Jones, central differences otherwise.
    pub fn eval_dg(&self, d: f64) -> Result<f64> {
        positive(d)?;
        match self {
            Self::LennardJones(lj) => Ok(lj.dg(d)),
            Self::Tabulated(t) => t.dg(d),
        }
    }

    /// `∫₁ᵈ s g(s) ds`.
    pub fn pair_potential(&self, d: f64) -> Result<f64> {
        positive(d)?;
        match self {
            Self::LennardJones(lj) => Ok(lj.potential(d)),
            Self::Tabulated(t) => {
                t.in_domain(d)?;
                Ok(integrate(|s| s * (t.evaluator)(s), 1.0, d, QUADRATURE_TOL))
            }
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let checks = match self {
            Self::LennardJones(lj) => vec![
                ConditionCheck {
                    condition: Condition::StrongRepulsion,
                    passed: lj.n1 > 2,
                    detail: format!(
                        "d g(d) ~ -sigma1 d^(1-n1) and the potential ~ d^(2-n1) diverge as d -> 0 iff n1 > 2 (n1 = {})",
                        lj.n1
                    ),
                },
                ConditionCheck {
                    condition: Condition::FadingAttraction,
                    passed: lj.n2 > 1 && lj.n1 > lj.n2,
                    detail: format!(
                        "g > 0 beyond the root {:.6} and d g(d) ~ sigma2 d^(1-n2) -> 0 iff n2 > 1 (n2 = {})",
                        lj.root(),
                        lj.n2
                    ),
                },
            ],
            Self::Tabulated(t) => validate_tabulated(t),
        };
        ValidationReport { checks }
    }

    /// `(α₋, α₊)`: `g < 0` on `(0, α₋]` and `g > 0` on `[α₊, ∞)`.
    pub fn alpha_bounds(&self, margin: f64) -> Result<(f64, f64)> {
        match self {
            Self::LennardJones(lj) => {
                let d0 = lj.root();
                Ok((d0 * (1.0 - margin), d0 * (1.0 + margin)))
            }
            Self::Tabulated(t) => {
                let values: Vec<f64> = t.grid.iter().map(|&d| (t.evaluator)(d)).collect();
                let alpha_minus = t
                    .grid
                    .iter()
                    .zip(&values)
                    .take_while(|(_, &g)| g < 0.0)
                    .map(|(&d, _)| d)
                    .last()
                    .ok_or_else(|| Error::NotAttractionRepulsion("no repulsive region on the sample grid".into()))?;
                let tail: Vec<f64> = t
                    .grid
                    .iter()
                    .zip(&values)
                    .filter(|(&d, _)| d >= t.alpha_plus)
                    .map(|(_, &g)| g)
                    .collect();
                if tail.is_empty() || tail.iter().any(|&g| g <= 0.0) {
                    return Err(Error::NotAttractionRepulsion(format!(
                        "g is not positive on the grid beyond the certified alpha_plus = {}",
                        t.alpha_plus
                    )));
                }
                if alpha_minus >= t.alpha_plus {
                    return Err(Error::NotAttractionRepulsion(format!(
                        "repulsive region extends to {alpha_minus}, beyond alpha_plus = {}",
                        t.alpha_plus
                    )));
                }
                Ok((alpha_minus, t.alpha_plus))
            }
        }
    }

    /// `sup{|d g(d)| : d ≥ α₊}`.
    fn attractive_tail_sup(&self, alpha_plus: f64) -> Result<f64> {
        match self {
            Self::LennardJones(lj) => Ok(lj.bar_g(lj.bar_g_peak().max(alpha_plus)).abs()),
            Self::Tabulated(t) => {
                let mut best = self.eval_bar_g(alpha_plus)?.abs();
                for &d in t.grid.iter().filter(|&&d| d >= alpha_plus) {
                    best = best.max(self.eval_bar_g(d)?.abs());
                }
                Ok(best)
            }
        }
    }

    /// Largest `d` with `|d g(d)| = eta`. Requires `eta` above the attractive
    /// tail's supremum so the level set stays inside `(0, α₊)`.
    pub fn bar_g_level_supremum(&self, eta: f64, margin: f64) -> Result<f64> {
        let (_, alpha_plus) = self.alpha_bounds(margin)?;
        let threshold = self.attractive_tail_sup(alpha_plus)?;
        if !(eta > threshold) {
            return Err(Error::LevelSetNotConfined { eta, threshold });
        }
        let excess = |d: f64| self.eval_bar_g(d).map(|v| v.abs() - eta);
        let mut hi = alpha_plus;
        if excess(hi)? >= 0.0 {
            return Ok(hi);
        }
        for _ in 0..20_000 {
            let lo = hi * 0.99;
            if excess(lo)? >= 0.0 {
                let f = |d: f64| excess(d).unwrap_or(f64::NAN);
                return bisect(f, lo, hi, LEVEL_SET_TOL * hi)
                    .ok_or_else(|| Error::NotAttractionRepulsion("level set bracket lost".into()));
            }
            hi = lo;
        }
        Err(Error::NotAttractionRepulsion(format!(
            "|d g(d)| never reaches {eta} as d -> 0"
        )))
    }

    pub fn root(&self) -> Option<f64> {
        match self {
            Self::LennardJones(lj) => Some(lj.root()),
            Self::Tabulated(_) => None,
        }
    }
}

/// Largest log-log slope of `|d g(d)|` on the lowest grid points accepted as
/// evidence of a divergent potential; `-1` is the integrability boundary.
const DIVERGENCE_EXPONENT: f64 = -0.99;

fn validate_tabulated(t: &TabulatedFunction) -> Vec<ConditionCheck> {
    let grid = &t.grid;
    let k = (grid.len() / 10).max(3).min(grid.len());
    let bar: Vec<f64> = grid.iter().map(|&d| d * (t.evaluator)(d)).collect();

    let low = &bar[..k];
    let repulsive = low.iter().all(|&v| v < 0.0);
    let steepening = low.windows(2).all(|w| w[0] < w[1]);
    // The potential diverges only if |d g(d)| grows at least like 1/d.
    let exponent = (bar[0].abs() / bar[k - 1].abs()).ln() / (grid[0] / grid[k - 1]).ln();
    let diverging = exponent <= DIVERGENCE_EXPONENT;
    let strong = ConditionCheck {
        condition: Condition::StrongRepulsion,
        passed: repulsive && steepening && diverging,
        detail: if !repulsive {
            format!(
                "d g(d) is not negative on the lowest {k} grid points (d g({}) = {})",
                grid[0], bar[0]
            )
        } else if !steepening {
            format!("d g(d) does not decrease toward d -> 0 on the lowest {k} grid points")
        } else if !diverging {
            format!(
                "|d g(d)| grows like d^{exponent:.3} near {}, too slowly for the potential to diverge",
                grid[0]
            )
        } else {
            format!("d g(d) decreases to {} at d = {}", bar[0], grid[0])
        },
    };

    let tail_ok = grid
        .iter()
        .zip(&bar)
        .filter(|(&d, _)| d >= t.alpha_plus)
        .all(|(_, &v)| v > 0.0);
    let has_tail = grid.iter().any(|&d| d >= t.alpha_plus);
    let high = &bar[bar.len() - k..];
    let fading = high.windows(2).all(|w| w[0].abs() > w[1].abs());
    let fade = ConditionCheck {
        condition: Condition::FadingAttraction,
        passed: has_tail && tail_ok && fading,
        detail: if !has_tail {
            format!("no grid point beyond alpha_plus = {}", t.alpha_plus)
        } else if !tail_ok {
            format!("g is not positive on the grid beyond alpha_plus = {}", t.alpha_plus)
        } else if !fading {
            format!("|d g(d)| does not decay on the highest {k} grid points")
        } else {
            format!(
                "|d g(d)| decays to {} at d = {}",
                bar[bar.len() - 1].abs(),
                grid[grid.len() - 1]
            )
        },
    };
    vec![strong, fade]
}

/// One interaction law per edge, plus the thresholds shared by all edges.
#[derive(Clone, Debug)]
pub struct InteractionMap {
    laws: Vec<InteractionFunction>,
    alpha_minus: f64,
    alpha_plus: f64,
    margin: f64,
    psi_zero: f64,
}

impl InteractionMap {
    /// `laws[k]` applies to `graph.edges()[k]`.
    pub fn new(graph: &Graph, laws: Vec<InteractionFunction>, margin: f64) -> Result<Self> {
        if laws.len() != graph.edge_count() {
            return Err(Error::InvalidArgument(format!(
                "{} laws for {} edges",
                laws.len(),
                graph.edge_count()
            )));
        }
        if laws.is_empty() {
            return Err(Error::InvalidArgument("graph has no edges".into()));
        }
        let mut alpha_minus = f64::INFINITY;
        let mut alpha_plus: f64 = 0.0;
        for law in &laws {
            let (lo, hi) = law.alpha_bounds(margin)?;
            alpha_minus = alpha_minus.min(lo);
            alpha_plus = alpha_plus.max(hi);
        }
        let mut map = Self {
            laws,
            alpha_minus,
            alpha_plus,
            margin,
            psi_zero: 0.0,
        };
        map.psi_zero = map.compute_psi_zero()?;
        Ok(map)
    }

    pub fn uniform(graph: &Graph, law: InteractionFunction) -> Result<Self> {
        Self::new(graph, vec![law; graph.edge_count()], DEFAULT_ROOT_MARGIN)
    }

    pub fn laws(&self) -> &[InteractionFunction] {
        &self.laws
    }

    pub fn law(&self, edge: usize) -> &InteractionFunction {
        &self.laws[edge]
    }

    pub fn alpha_minus(&self) -> f64 {
        self.alpha_minus
    }

    /// The single `α₊` valid for every edge.
    pub fn alpha_plus(&self) -> f64 {
        self.alpha_plus
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Worst per-edge minimum of the pair potential over `[α₋, α₊]`; the
    /// potential is bounded below by `|E| ψ₀`.
    pub fn psi_zero(&self) -> f64 {
        self.psi_zero
    }

    fn compute_psi_zero(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for law in &self.laws {
            // the interval check makes the closure infallible below
            law.pair_potential(self.alpha_minus)?;
            law.pair_potential(self.alpha_plus)?;
            let (_, min) = golden_section_min(
                |d| law.pair_potential(d).unwrap_or(f64::INFINITY),
                self.alpha_minus,
                self.alpha_plus,
                PSI_ZERO_TOL,
            );
            best = best.min(min);
        }
        Ok(best)
    }

    /// Distance below which no edge can shrink along a trajectory whose initial
    /// potential is `psi_initial`: the largest `d ≤ α₋` with
    /// `pair_potential(d) + (|E| - 1) ψ₀ > psi_initial` for every edge law.
    pub fn collision_bound(&self, psi_initial: f64) -> Result<f64> {
        let edges = self.laws.len() as f64;
        let floor = edges * self.psi_zero;
        if psi_initial < floor - 1e-12 * floor.abs().max(1.0) {
            return Err(Error::PotentialBelowLowerBound {
                psi: psi_initial,
                bound: floor,
            });
        }
        let offset = (edges - 1.0) * self.psi_zero - psi_initial;
        let mut bound = f64::INFINITY;
        for law in &self.laws {
            let excess = |d: f64| law.pair_potential(d).map(|v| v + offset);
            let top = self.alpha_minus;
            let d = if excess(top)? > 0.0 {
                top
            } else {
                let mut lo = top;
                let mut found = false;
                for _ in 0..2000 {
                    lo *= 0.5;
                    if excess(lo)? > 0.0 {
                        found = true;
                        break;
                    }
                }
                if !found {
                    return Err(Error::NotAttractionRepulsion(
                        "pair potential does not diverge as d -> 0".into(),
                    ));
                }
                let (mut a, mut b) = (lo, top);
                while b - a > 1e-15 * b {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if excess(mid)? > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                a
            };
            bound = bound.min(d);
        }
        Ok(bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lj(s1: f64, s2: f64, n1: u32, n2: u32) -> InteractionFunction {
        InteractionFunction::lennard_jones(s1, s2, n1, n2).unwrap()
    }

    #[test]
    fn construction_enforces_exponent_order() {
        assert!(LennardJones::new(1.0, 1.0, 3, 1).is_err());
        assert!(LennardJones::new(16.0, 1.0, 6, 2).is_err());
        assert!(LennardJones::new(1.0, 1.0, 4, 4).is_err());
        assert!(LennardJones::new(-1.0, 1.0, 4, 3).is_err());
        assert!(LennardJones::new(1.0, 1.0, 4, 3).is_ok());
    }

    #[test]
    fn eval_examples() {
        let f = lj(1.0, 1.0, 4, 3);
        assert_eq!(f.eval_g(1.0).unwrap(), 0.0);
        assert_eq!(f.eval_g(2.0).unwrap(), 1.0 / 16.0);
        assert_eq!(f.eval_g(0.5).unwrap(), -8.0);
        assert!(matches!(f.eval_g(0.0), Err(Error::NonpositiveDistance(_))));
        assert!(f.eval_g(-1.0).is_err());

        assert_eq!(f.eval_bar_g(1.0).unwrap(), 0.0);
        assert_eq!(f.eval_bar_g(2.0).unwrap(), 1.0 / 8.0);
        assert!(f.eval_bar_g(0.0).is_err());
    }

    #[test]
    fn bar_g_fades() {
        let f = lj(1.0, 1.0, 6, 4);
        let v: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&d| f.eval_bar_g(d).unwrap())
            .collect();
        assert!(v[0] > v[1] && v[1] > v[2] && v[2] > 0.0);
        assert!(v[2] < 1e-8);
    }

    #[test]
    fn pair_potential_examples() {
        let f = lj(1.0, 1.0, 4, 3);
        assert_eq!(f.pair_potential(1.0).unwrap(), 0.0);
        assert!((f.pair_potential(2.0).unwrap() - 0.125).abs() < 1e-15);
        assert!(f.pair_potential(0.0).is_err());
        let tail = lj(1.0, 1.0, 6, 4);
        assert!((tail.pair_potential(1e6).unwrap() - 0.25).abs() < 1e-6);
        if let InteractionFunction::LennardJones(p) = tail {
            assert_eq!(p.potential_tail(), 0.25);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = lj(2.0, 1.5, 7, 3);
        for &d in &[0.3, 0.9, 1.7, 5.0] {
            let h = 1e-6 * d;
            let fd = (f.eval_g(d + h).unwrap() - f.eval_g(d - h).unwrap()) / (2.0 * h);
            let an = f.eval_dg(d).unwrap();
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "{d}: {fd} vs {an}");
        }
    }

    #[test]
    fn validation_of_lennard_jones() {
        assert!(lj(1.0, 1.0, 4, 3).validate().all_passed());
    }

    #[test]
    fn pure_attraction_fails_strong_repulsion() {
        let grid: Vec<f64> = (0..60).map(|k| 10f64.powf(-3.0 + 0.1 * k as f64)).collect();
        let f = InteractionFunction::Tabulated(TabulatedFunction::from_fn(|d| 1.0 / d, grid, 1e-3).unwrap());
        let report = f.validate();
        let strong = report
            .checks
            .iter()
            .find(|c| c.condition == Condition::StrongRepulsion)
            .unwrap();
        assert!(!strong.passed);
        assert!(!report.all_passed());
    }

    #[test]
    fn bounded_repulsion_is_not_strong() {
        // d g(d) = d - 1 tends to -1, so the potential stays finite at 0
        let grid: Vec<f64> = (1..=400).map(|k| 0.01 * k as f64).collect();
        let f = InteractionFunction::Tabulated(TabulatedFunction::from_fn(|d: f64| 1.0 - 1.0 / d, grid, 1.5).unwrap());
        let report = f.validate();
        let strong = &report.checks[0];
        assert_eq!(strong.condition, Condition::StrongRepulsion);
        assert!(
            !strong.passed && strong.detail.contains("too slowly"),
            "{}",
            strong.detail
        );
    }

    #[test]
    fn tabulated_lennard_jones_passes() {
        let grid: Vec<f64> = (0..80).map(|k| 10f64.powf(-2.0 + 0.05 * k as f64)).collect();
        let f = InteractionFunction::Tabulated(
            TabulatedFunction::from_fn(|d: f64| -1.0 / d.powi(4) + 1.0 / d.powi(3), grid, 1.01).unwrap(),
        );
        assert!(f.validate().all_passed());
        let (lo, hi) = f.alpha_bounds(DEFAULT_ROOT_MARGIN).unwrap();
        assert!(lo < 1.0 && hi == 1.01);
        // quadrature agrees with the closed form
        let exact = lj(1.0, 1.0, 4, 3);
        for &d in &[0.2, 0.7, 3.0] {
            let a = f.pair_potential(d).unwrap();
            let b = exact.pair_potential(d).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn sampled_function_interpolates_and_limits_domain() {
        let samples: Vec<(f64, f64)> = (0..41)
            .map(|k| {
                let d = 10f64.powf(-1.0 + 0.05 * k as f64);
                (d, -1.0 / d.powi(4) + 1.0 / d.powi(3))
            })
            .collect();
        let t = TabulatedFunction::from_samples(&samples, 1.05).unwrap();
        let f = InteractionFunction::Tabulated(t);
        assert!(f.validate().all_passed());
        assert!((f.eval_g(samples[7].0).unwrap() - samples[7].1).abs() < 1e-12);
        assert!(matches!(f.eval_g(20.0), Err(Error::OutsideTabulatedRange { .. })));
        assert!(TabulatedFunction::from_samples(&samples[25..], 2.0).is_err());
    }

    #[test]
    fn alpha_bounds_examples() {
        let (lo, hi) = lj(1.0, 1.0, 4, 3).alpha_bounds(1e-6).unwrap();
        assert!((lo - (1.0 - 1e-6)).abs() < 1e-15);
        assert!((hi - (1.0 + 1e-6)).abs() < 1e-15);
        let (lo, hi) = lj(8.0, 1.0, 6, 3).alpha_bounds(1e-6).unwrap();
        assert!((lo / (1.0 - 1e-6) - 2.0).abs() < 1e-12);
        assert!((hi / (1.0 + 1e-6) - 2.0).abs() < 1e-12);

        let grid: Vec<f64> = (1..50).map(|k| 0.1 * k as f64).collect();
        let positive =
            InteractionFunction::Tabulated(TabulatedFunction::from_fn(|d: f64| 1.0 / (d * d), grid, 0.1).unwrap());
        assert!(matches!(
            positive.alpha_bounds(1e-6),
            Err(Error::NotAttractionRepulsion(_))
        ));
    }

    #[test]
    fn psi_zero_examples() {
        let g = Graph::path(3);
        let m = InteractionMap::uniform(&g, lj(1.0, 1.0, 4, 3)).unwrap();
        assert!(m.psi_zero().abs() < 1e-12);

        let single = Graph::path(2);
        let m = InteractionMap::uniform(&single, lj(4.0, 1.0, 5, 3)).unwrap();
        // minimum of 4/(3d³) - 1/d - 1/3 sits at the root d = 2
        assert!((m.psi_zero() + 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn psi_zero_mixed_edges_matches_grid_oracle() {
        let g = Graph::path(3);
        let laws = vec![lj(1.0, 1.0, 4, 3), lj(4.0, 1.0, 5, 3)];
        let m = InteractionMap::new(&g, laws.clone(), DEFAULT_ROOT_MARGIN).unwrap();
        // brute-force grid minimum of each pair potential on (0.05, 50)
        let oracle = laws
            .iter()
            .map(|law| {
                (0..200_000)
                    .map(|k| 0.05 + k as f64 * (50.0 - 0.05) / 200_000.0)
                    .map(|d| law.pair_potential(d).unwrap())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((m.psi_zero() - oracle).abs() < 1e-6);
        assert!(m.psi_zero() <= oracle + 1e-12);
    }

    #[test]
    fn level_supremum_examples() {
        let f = lj(1.0, 1.0, 4, 3);
        // independent bisection of (1 - d)/d³ = 8 on (0.1, 0.99)
        let (mut a, mut b) = (0.1f64, 0.99f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (1.0 - m) / m.powi(3) > 8.0 {
                a = m
            } else {
                b = m
            }
        }
        let d8 = f.bar_g_level_supremum(8.0, 1e-6).unwrap();
        assert!((d8 - a).abs() < 1e-10, "{d8} vs {a}");
        assert!((d8 - 0.417_561_174_240_683).abs() < 1e-10);

        let d10 = f.bar_g_level_supremum(10.0, 1e-6).unwrap();
        let d100 = f.bar_g_level_supremum(100.0, 1e-6).unwrap();
        assert!(d100 < d10);
        assert!(f.bar_g_level_supremum(1e6, 1e-6).unwrap() < 0.1);
    }

    #[test]
    fn level_supremum_rejects_small_eta() {
        let f = lj(1.0, 1.0, 4, 3);
        // the attractive tail peaks at d = 1.5 with d g(d) = 4/27
        assert!(matches!(
            f.bar_g_level_supremum(0.1, 1e-6),
            Err(Error::LevelSetNotConfined { .. })
        ));
        assert!(f.bar_g_level_supremum(0.15, 1e-6).is_ok());
    }

    #[test]
    fn collision_bound_examples() {
        let g = Graph::path(2);
        let m = InteractionMap::uniform(&g, lj(1.0, 1.0, 4, 3)).unwrap();
        // 1/2 - 1/d + 1/(2d²) = 1/8 has roots 2/3 and 2
        let b = m.collision_bound(0.125).unwrap();
        assert!((b - 2.0 / 3.0).abs() < 1e-9, "{b}");

        let near = m.collision_bound(m.psi_zero() + 1e-12).unwrap();
        assert!(near < m.alpha_minus() && near > 0.99 * m.alpha_minus());

        assert!(matches!(
            m.collision_bound(-1.0),
            Err(Error::PotentialBelowLowerBound { .. })
        ));
    }
}

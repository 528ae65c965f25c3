use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    cluster_diagnostics, is_equilibrium, lemma4_check, mu_estimate, EquilibriumReport, GrowthCheck, SelfClustering,
};
use crate::dynamics::{potential, simulate, IntegratorStats, StopReason, Trajectory};
use crate::error::Error;
use crate::graph::VertexPartition;
use crate::partition::{diluting_subsequence, find_nontrivial_dilute};

use super::config::{validation_reports, Model, RunConfig};
use super::snapshot::{read_snapshots, write_snapshots, write_timeseries};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_HORIZON: i32 = 2;

/// Environment variable capping ensemble parallelism.
pub const THREADS_ENV: &str = "FADING_FLOCK_THREADS";

pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const REPORT_FILE: &str = "report.json";

#[derive(Clone, Debug, Serialize)]
struct FinalState {
    t: f64,
    psi: f64,
    f_norm: f64,
    d_minus: f64,
    d_plus: f64,
    phi: f64,
}

#[derive(Clone, Debug, Serialize)]
struct RunSummary {
    seed: u64,
    stop: StopReason,
    snapshots: usize,
    stats: IntegratorStats,
    alpha_minus: f64,
    alpha_plus: f64,
    psi_zero: f64,
    d_plus_bound: f64,
    collision_bound: f64,
    #[serde(rename = "final")]
    final_state: FinalState,
}

fn write_pretty<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_run(dir: &Path, config_text: &str, model: &Model, traj: &Trajectory, seed: u64) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join(CONFIG_FILE), config_text)?;
    write_snapshots(BufWriter::new(File::create(dir.join(SNAPSHOTS_FILE))?), &traj.snapshots)?;
    write_timeseries(
        BufWriter::new(File::create(dir.join(TIMESERIES_FILE))?),
        &traj.snapshots,
    )?;
    let last = traj.last();
    let summary = RunSummary {
        seed,
        stop: traj.stop,
        snapshots: traj.snapshots.len(),
        stats: traj.stats,
        alpha_minus: model.laws.alpha_minus(),
        alpha_plus: model.laws.alpha_plus(),
        psi_zero: model.laws.psi_zero(),
        d_plus_bound: (model.graph.vertex_count() as f64 - 1.0) * model.laws.alpha_plus(),
        collision_bound: traj.collision_bound,
        final_state: FinalState {
            t: last.t,
            psi: last.psi,
            f_norm: last.f_norm,
            d_minus: last.d_minus,
            d_plus: last.d_plus,
            phi: last.phi,
        },
    };
    write_pretty(&dir.join(SUMMARY_FILE), &summary)
}

/// One simulation; returns the exit code for its stop reason.
fn run_one(cfg: &RunConfig, config_text: &str, model: &Model, seed: u64, dir: &Path) -> anyhow::Result<i32> {
    let p0 = model.initial(cfg, seed)?;
    match simulate(&model.graph, &model.laws, &p0, &cfg.integrator) {
        Ok(traj) => {
            write_run(dir, config_text, model, &traj, seed)?;
            Ok(match traj.stop {
                StopReason::Converged => EXIT_CONVERGED,
                _ => EXIT_HORIZON,
            })
        }
        Err(Error::StiffnessFailure { t, step, partial }) => {
            write_run(dir, config_text, model, &partial, seed)?;
            bail!("stiffness failure at t = {t}: step size {step} underflowed (partial output written)")
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Debug)]
pub struct SimulateOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub ensemble: Option<usize>,
}

pub fn cmd_simulate(opts: &SimulateOptions) -> anyhow::Result<i32> {
    let text = fs::read_to_string(&opts.config).with_context(|| format!("reading {}", opts.config.display()))?;
    let cfg = RunConfig::from_json(&text)?;
    let model = Model::build(&cfg)?;
    let master = opts.seed.unwrap_or(cfg.seed);
    let Some(k) = opts.ensemble else {
        return run_one(&cfg, &text, &model, master, &opts.out);
    };
    if k == 0 {
        bail!("ensemble size must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    let seeds: Vec<u64> = (0..k).map(|_| rng.next_u64()).collect();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .with_context(|| format!("{THREADS_ENV}={v} is not a thread count"))?;
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool.build()?;
    let results: Vec<anyhow::Result<i32>> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, &seed)| run_one(&cfg, &text, &model, seed, &opts.out.join(format!("run_{i:04}"))))
            .collect()
    });
    let mut code = EXIT_CONVERGED;
    let mut failures = 0;
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(c) => code = code.max(*c),
            Err(e) => {
                eprintln!("run {i} (seed {}): {e:#}", seeds[i]);
                failures += 1;
            }
        }
    }
    if failures > 0 {
        bail!("{failures} of {k} ensemble runs failed");
    }
    Ok(code)
}

/// 12 significant digits in plain decimal notation.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding may have carried into a new leading digit
    let digits = s.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if digits > 12 && decimals > 0 {
        format!("{:.*}", decimals - 1, x)
    } else {
        s
    }
}

pub fn cmd_validate(config: &Path, out: &mut dyn Write) -> anyhow::Result<i32> {
    let cfg = RunConfig::load(config)?;
    let reports = validation_reports(&cfg)?;
    let mut ok = true;
    for (a, b, report) in &reports {
        for c in &report.checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            writeln!(out, "edge ({a}, {b}): {}: {verdict} ({})", c.condition, c.detail)?;
            if !c.passed {
                ok = false;
                writeln!(out, "edge ({a}, {b}): {} violated", c.condition)?;
            }
        }
    }
    if !ok {
        return Ok(EXIT_ERROR);
    }
    let model = Model::build(&cfg)?;
    let p0 = model.initial(&cfg, cfg.seed)?;
    let psi = potential(&model.graph, &model.laws, &p0)?;
    let n = model.graph.vertex_count() as f64;
    writeln!(out, "alpha_minus = {}", format_sig12(model.laws.alpha_minus()))?;
    writeln!(out, "alpha_plus = {}", format_sig12(model.laws.alpha_plus()))?;
    writeln!(out, "psi_zero = {}", format_sig12(model.laws.psi_zero()))?;
    writeln!(out, "D_plus = {}", format_sig12((n - 1.0) * model.laws.alpha_plus()))?;
    writeln!(out, "initial_potential = {}", format_sig12(psi))?;
    writeln!(
        out,
        "collision_bound = {}",
        format_sig12(model.laws.collision_bound(psi)?)
    )?;
    Ok(EXIT_CONVERGED)
}

#[derive(Debug, Serialize)]
struct DiluteEntry {
    index: usize,
    t: f64,
    threshold: f64,
    partition: Option<Vec<Vec<String>>>,
    intra: Option<f64>,
    inter: Option<f64>,
}

#[derive(Debug, Serialize)]
struct WitnessEntry {
    indices: Vec<usize>,
    partition: Vec<Vec<String>>,
    l0: f64,
}

#[derive(Debug, Serialize)]
struct GrowthSummary {
    applicable: usize,
    passed: usize,
    failed: usize,
    min_slack: Option<f64>,
    failures: Vec<GrowthCheck>,
}

#[derive(Debug, Serialize)]
struct ClusteringEntry {
    l0: f64,
    l1: f64,
    verdict: SelfClustering,
    intra: Vec<f64>,
    inter: Vec<f64>,
    max_phi: f64,
    /// Snapshots where `φ < 2 (Π(1) + l0)` fails.
    phi_bound_violations: Vec<usize>,
    growth: GrowthSummary,
}

#[derive(Debug, Serialize)]
struct MuEntry {
    d: f64,
    estimate: f64,
}

#[derive(Debug, Serialize)]
struct AnalysisReport {
    snapshots: usize,
    dilute: Vec<DiluteEntry>,
    diluting_subsequence: Option<WitnessEntry>,
    tracked_partition: Option<Vec<Vec<String>>>,
    pi: Vec<Vec<f64>>,
    clustering: Vec<ClusteringEntry>,
    equilibrium: EquilibriumReport,
    mu: Vec<MuEntry>,
}

fn labelled(model: &Model, vp: &VertexPartition) -> Vec<Vec<String>> {
    vp.blocks()
        .iter()
        .map(|b| b.iter().map(|&v| model.labels[v].clone()).collect())
        .collect()
}

pub fn cmd_analyze(snapshots: &Path, config: Option<&Path>) -> anyhow::Result<PathBuf> {
    let dir = snapshots.parent().map(Path::to_path_buf).unwrap_or_default();
    let config = config.map(Path::to_path_buf).unwrap_or_else(|| dir.join(CONFIG_FILE));
    let cfg = RunConfig::load(&config)?;
    let model = Model::build(&cfg)?;
    let file = File::open(snapshots).with_context(|| format!("opening {}", snapshots.display()))?;
    let snaps = read_snapshots(BufReader::new(file))?;
    if snaps[0].p.agent_count() != model.graph.vertex_count() {
        bail!(
            "snapshots hold {} agents but the graph has {} vertices",
            snaps[0].p.agent_count(),
            model.graph.vertex_count()
        );
    }
    let traj = Trajectory::from_snapshots(snaps)?;
    let g = &model.graph;

    let base = cfg.analysis.dilute_base.unwrap_or(model.laws.alpha_plus());
    let ls: Vec<f64> = (0..traj.snapshots.len()).map(|i| base * (i + 1) as f64).collect();
    let mut dilute = Vec::new();
    for (i, s) in traj.snapshots.iter().enumerate() {
        let found = find_nontrivial_dilute(g, &s.p, ls[i])?;
        dilute.push(DiluteEntry {
            index: i,
            t: s.t,
            threshold: ls[i],
            partition: found.as_ref().map(|fp| labelled(&model, fp.vertex_partition())),
            intra: found.as_ref().map(|fp| fp.intra_distance()),
            inter: found.as_ref().map(|fp| fp.inter_distance()).transpose()?,
        });
    }
    let configs: Vec<_> = traj.snapshots.iter().map(|s| s.p.clone()).collect();
    let witness = diluting_subsequence(g, &configs, &ls)?;

    let tracked = match &cfg.analysis.partition {
        Some(blocks) => Some(model.partition(blocks)?),
        None => witness.as_ref().map(|w| w.partition.clone()),
    };

    let mut pi = Vec::new();
    let mut clustering = Vec::new();
    if let Some(vp) = tracked.as_ref().filter(|vp| !vp.is_trivial()) {
        let depth = cfg.analysis.pi_depth.unwrap_or(vp.block_count()).min(vp.block_count());
        for s in &traj.snapshots {
            let mut row = crate::analysis::pi_table(&s.p, vp)?;
            row.truncate(depth);
            pi.push(row);
        }
        for &(l0, l1) in &cfg.analysis.clustering {
            let diag = cluster_diagnostics(g, &traj, vp, l0, l1)?;
            let checks = lemma4_check(&traj, vp, l0)?;
            let applicable: Vec<&GrowthCheck> = checks.iter().filter(|c| c.applicable()).collect();
            let failures: Vec<GrowthCheck> = applicable
                .iter()
                .filter(|c| c.passed == Some(false))
                .map(|c| (*c).clone())
                .collect();
            let phi_bound_violations = traj
                .snapshots
                .iter()
                .zip(&diag.pi)
                .enumerate()
                .filter(|(_, (s, row))| !(s.phi < 2.0 * (row[0] + l0)))
                .map(|(i, _)| i)
                .collect();
            clustering.push(ClusteringEntry {
                l0,
                l1,
                verdict: diag.verdict,
                intra: diag.intra,
                inter: diag.inter,
                max_phi: traj.snapshots.iter().map(|s| s.phi).fold(0.0, f64::max),
                phi_bound_violations,
                growth: GrowthSummary {
                    applicable: applicable.len(),
                    passed: applicable.len() - failures.len(),
                    failed: failures.len(),
                    min_slack: applicable.iter().map(|c| c.slack).reduce(f64::min),
                    failures,
                },
            });
        }
    }

    let last = traj.last();
    let equilibrium = is_equilibrium(g, &model.laws, &last.p, cfg.integrator.eq_threshold)?;

    let mut mu = Vec::new();
    if let Some(spec) = &cfg.analysis.mu {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for &d in &spec.distances {
            let est = mu_estimate(g, &model.laws, d, last.p.dim(), spec.budget, &mut rng)?;
            mu.push(MuEntry { d, estimate: est.value });
        }
    }

    let report = AnalysisReport {
        snapshots: traj.snapshots.len(),
        dilute,
        diluting_subsequence: witness.as_ref().map(|w| WitnessEntry {
            indices: w.indices.clone(),
            partition: labelled(&model, &w.partition),
            l0: w.l0,
        }),
        tracked_partition: tracked.as_ref().map(|vp| labelled(&model, vp)),
        pi,
        clustering,
        equilibrium,
        mu,
    };
    let path = dir.join(REPORT_FILE);
    write_pretty(&path, &report)?;
    Ok(path)
}

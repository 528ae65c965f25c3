//! Acceptance criteria. Runs as a plain binary and prints one PASS/FAIL line
//! per criterion; exits nonzero if any fails.

use std::time::{Duration, Instant};

use fading_flock::analysis::{
    is_equilibrium, lemma4_check, lemma8_distance, mu_estimate, pi_hierarchy, pin_edge, self_clustering_detect,
    small_d_blowup_check, SelfClustering,
};
use fading_flock::cli::{cmd_simulate, SimulateOptions, SNAPSHOTS_FILE, SUMMARY_FILE};
use fading_flock::dynamics::{
    finite_difference_gradient, potential, simulate, vector_field, Configuration, IntegratorParams,
};
use fading_flock::graph::{set_partitions, Graph, VertexPartition};
use fading_flock::interaction::{InteractionFunction, InteractionMap, DEFAULT_ROOT_MARGIN};
use fading_flock::partition::{enumerate_dilute, find_nontrivial_dilute};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &Configuration, b: &Configuration) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Relative resolution of the bisection behind the collision bound.
const COLLISION_TIE_TOL: f64 = 1e-12;

const EXPONENTS: [(u32, u32); 4] = [(4, 3), (5, 3), (6, 4), (7, 5)];

fn random_law(rng: &mut ChaCha8Rng) -> InteractionFunction {
    let (n1, n2) = EXPONENTS[rng.gen_range(0..EXPONENTS.len())];
    InteractionFunction::lennard_jones(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), n1, n2).unwrap()
}

/// Random connected graph with independently drawn Lennard-Jones edges.
fn random_system(rng: &mut ChaCha8Rng, max_n: usize) -> (Graph, InteractionMap) {
    let n = rng.gen_range(2..=max_n);
    let g = Graph::random_connected(n, 0.4, rng);
    let laws = (0..g.edge_count()).map(|_| random_law(rng)).collect();
    let m = InteractionMap::new(&g, laws, DEFAULT_ROOT_MARGIN).unwrap();
    (g, m)
}

fn gradient_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (g, m) = random_system(&mut rng, 6);
        let dim = rng.gen_range(1..=3);
        let p = Configuration::random(&g, dim, m.alpha_minus(), m.alpha_plus(), &mut rng).unwrap();
        let f = vector_field(&g, &m, &p).unwrap();
        let grad = finite_difference_gradient(&g, &m, &p, 1e-5).unwrap();
        let diff: Vec<f64> = f.iter().zip(&grad).map(|(a, b)| a + b).collect();
        worst = worst.max(norm(&diff) / norm(&f).max(1e-12));
    }
    Outcome {
        passed: worst < 1e-5,
        detail: format!("worst relative error {worst:.3e} over 200 instances"),
    }
}

struct RunStats {
    converged: usize,
    bound_violations: usize,
    collision_violations: usize,
    collision_ties: usize,
    worst_ratio: f64,
    worst_margin: f64,
}

fn equilibrium_runs() -> RunStats {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = IntegratorParams {
        horizon: 1e4,
        snapshot_interval: 1e3,
        eq_threshold: 1e-9,
        ..Default::default()
    };
    let mut s = RunStats {
        converged: 0,
        bound_violations: 0,
        collision_violations: 0,
        collision_ties: 0,
        worst_ratio: 0.0,
        worst_margin: f64::INFINITY,
    };
    for _ in 0..500 {
        let (g, m) = random_system(&mut rng, 6);
        let dim = rng.gen_range(1..=3);
        let p0 = Configuration::random(&g, dim, m.alpha_minus(), m.alpha_plus(), &mut rng).unwrap();
        let bound = m.collision_bound(potential(&g, &m, &p0).unwrap()).unwrap();
        let traj = match simulate(&g, &m, &p0, &params) {
            Ok(t) => t,
            Err(_) => {
                s.collision_violations += 1;
                continue;
            }
        };
        // The minimum covers every accepted step and the initial state. When
        // the initial shortest edge already sits on the bound's level set the
        // two agree up to bisection resolution; such ties are counted apart.
        let min = traj.stats.min_d_minus;
        if min <= bound {
            if min >= bound * (1.0 - COLLISION_TIE_TOL) {
                s.collision_ties += 1;
            } else {
                s.collision_violations += 1;
            }
        }
        s.worst_margin = s.worst_margin.min(traj.stats.min_d_minus / bound);
        if traj.converged() {
            s.converged += 1;
            let r = is_equilibrium(&g, &m, &traj.last().p, 1e-9).unwrap();
            let n = g.vertex_count() as f64;
            if r.d_plus.is_nan() || r.d_plus > (n - 1.0) * m.alpha_plus() + 1e-6 {
                s.bound_violations += 1;
            }
            s.worst_ratio = s.worst_ratio.max(r.d_plus / ((n - 1.0) * m.alpha_plus()));
        }
    }
    s
}

fn pinned_distance_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_witness: f64 = 0.0;
    let mut worst_sample = f64::INFINITY;
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let g = Graph::random_connected(n, 0.3, &mut rng);
        let edge = *g.edges().choose(&mut rng).unwrap();
        let dim = rng.gen_range(1..=3);
        let (d1, d2) = (rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0));
        let r = lemma8_distance(&g, edge, d1, d2, dim).unwrap();
        let exact = (d1 - d2).abs() / 2f64.sqrt();
        worst_witness = worst_witness.max((dist(&r.witness.0, &r.witness.1) - exact).abs());
        for k in 0..500 {
            let base = Configuration::random(&g, dim, 0.5, 1.0, &mut rng).unwrap();
            let p1 = pin_edge(&base, edge, d1, &mut rng).unwrap();
            let other = if k % 2 == 0 {
                Configuration::random(&g, dim, 0.5, 1.0, &mut rng).unwrap()
            } else {
                let scale = 10f64.powf(rng.gen_range(-4.0..0.0));
                let c = p1
                    .coords()
                    .iter()
                    .map(|x| x + scale * rng.gen_range(-1.0..1.0))
                    .collect();
                Configuration::new(dim, c).unwrap()
            };
            let p2 = pin_edge(&other, edge, d2, &mut rng).unwrap();
            worst_sample = worst_sample.min(dist(&p1, &p2) - r.exact);
        }
    }
    Outcome {
        passed: worst_witness <= 1e-12 && worst_sample >= -1e-12,
        detail: format!(
            "witness error {worst_witness:.1e}; smallest sampled excess {worst_sample:.3e} over 50000 pairs"
        ),
    }
}

fn dilute_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut mismatches, mut not_dilute, mut found) = (0, 0, 0);
    for _ in 0..200 {
        let n = rng.gen_range(2..=7);
        let g = Graph::random_connected(n, 0.3, &mut rng);
        let dim = rng.gen_range(1..=2);
        // a few random cluster centers make nontrivial answers common
        let centers: Vec<Vec<f64>> = (0..rng.gen_range(1..=3))
            .map(|_| (0..dim).map(|_| rng.gen_range(0.0..20.0)).collect())
            .collect();
        let spread = rng.gen_range(0.2..3.0);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let c = centers.choose(&mut rng).unwrap();
                c.iter().map(|x| x + rng.gen_range(-spread..spread)).collect()
            })
            .collect();
        let p = Configuration::from_points(&pts).unwrap();
        let l = rng.gen_range(0.1..5.0);
        let fast = find_nontrivial_dilute(&g, &p, l).unwrap();
        let all = enumerate_dilute(&g, &p, l).unwrap();
        let oracle = all.iter().any(|fp| !fp.is_trivial());
        if fast.is_some() != oracle {
            mismatches += 1;
        }
        if let Some(fp) = &fast {
            found += 1;
            if fp.is_trivial() || !fp.is_dilute(l) {
                not_dilute += 1;
            }
        }
    }
    Outcome {
        passed: mismatches == 0 && not_dilute == 0,
        detail: format!("{mismatches} disagreements, {not_dilute} invalid outputs, {found}/200 nontrivial"),
    }
}

fn pi_monotone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut violations, mut worst_last) = (0, 0.0f64);
    for _ in 0..1000 {
        let m = rng.gen_range(1..=6);
        let n = rng.gen_range(m..=m + 4);
        let dim = rng.gen_range(1..=3);
        // every block gets at least one vertex
        let mut labels: Vec<usize> = (0..m).chain((m..n).map(|_| rng.gen_range(0..m))).collect();
        labels.shuffle(&mut rng);
        let vp = VertexPartition::from_labels(&labels);
        let coords = (0..n * dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let p = Configuration::new(dim, coords).unwrap().centered();
        let pis: Vec<f64> = (1..=m).map(|k| pi_hierarchy(&p, &vp, k).unwrap()).collect();
        if pis.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-15) {
            violations += 1;
        }
        worst_last = worst_last.max(pis[m - 1]);
    }
    Outcome {
        passed: violations == 0 && worst_last < 1e-12,
        detail: format!("{violations} order violations; largest Pi(m) = {worst_last:.1e}"),
    }
}

fn two_cluster_corroboration() -> Outcome {
    let h = 3f64.sqrt() / 2.0;
    let tri = [[0.0, 0.0], [1.0, 0.0], [0.5, h]];
    let sep = 100.0;
    let pts: Vec<Vec<f64>> = tri
        .iter()
        .map(|c| c.to_vec())
        .chain(tri.iter().map(|c| vec![c[0] + sep, c[1]]))
        .collect();
    let p0 = Configuration::from_points(&pts).unwrap();
    let g = Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (1, 3)]).unwrap();
    let m = InteractionMap::uniform(&g, InteractionFunction::lennard_jones(1.0, 1.0, 4, 3).unwrap()).unwrap();
    let params = IntegratorParams {
        horizon: 1e4,
        snapshot_interval: 100.0,
        ..Default::default()
    };
    let traj = simulate(&g, &m, &p0, &params).unwrap();
    let vp = VertexPartition::new(vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
    let (l0, l1) = (2.0, 50.0);
    let verdict = self_clustering_detect(&g, &traj, &vp, l0, l1).unwrap();
    let mut phi_ok = true;
    let mut max_phi: f64 = 0.0;
    for s in &traj.snapshots {
        let pi1 = pi_hierarchy(&s.p, &vp, 1).unwrap();
        phi_ok &= s.phi < 2.0 * (pi1 + l0);
        max_phi = max_phi.max(s.phi);
    }
    let growth = lemma4_check(&traj, &vp, l0).unwrap();
    let applicable = growth.iter().filter(|c| c.applicable()).count();
    let growth_ok = growth.iter().all(|c| c.passed != Some(false));
    let clustered = matches!(verdict, SelfClustering::SelfClustering { .. });
    let bounded = max_phi.is_finite() && max_phi <= traj.snapshots[0].phi + 1.0;
    Outcome {
        passed: clustered && phi_ok && bounded && growth_ok && l1 > m.alpha_plus(),
        detail: format!(
            "verdict {verdict:?}; max phi {max_phi:.6} over t = {}; phi bound held at {} snapshots; growth inequality held at {applicable} applicable instants",
            traj.last().t,
            traj.snapshots.len()
        ),
    }
}

fn mu_closed_form() -> Outcome {
    let g = Graph::path(2);
    let m = InteractionMap::uniform(&g, InteractionFunction::lennard_jones(1.0, 1.0, 4, 3).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let d = 0.2 * 1.2f64.powi(k);
        let est = mu_estimate(&g, &m, d, 2, 2, &mut rng).unwrap();
        let exact = 2f64.sqrt() * m.law(0).eval_bar_g(d).unwrap().abs();
        worst = worst.max((est.value - exact).abs());
    }
    let blowup = small_d_blowup_check(&g, &m, &[0.5, 0.2, 0.05], 2, 2, &mut rng).unwrap();
    Outcome {
        passed: worst < 1e-8 && blowup.increasing && blowup.applicable,
        detail: format!(
            "worst deviation {worst:.1e} over 20 distances; shortest-edge estimates {:?}",
            blowup.estimates
        ),
    }
}

fn potential_tail() -> Outcome {
    let f = InteractionFunction::lennard_jones(1.0, 1.0, 6, 4).unwrap();
    let v = f.pair_potential(1e6).unwrap();
    let tail = -1.0 / 4.0 + 1.0 / 2.0;
    Outcome {
        passed: (v - tail).abs() < 1e-6,
        detail: format!("pair potential at 1e6 = {v:.12}, tail = {tail}"),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{
  "version": 1,
  "graph": {"vertices": ["a", "b", "c", "d", "e"],
            "edges": [["a", "b"], ["b", "c"], ["c", "d"], ["d", "e"], ["e", "a"], ["a", "c"]]},
  "interaction": {"default": {"kind": "lennard_jones", "sigma1": 1, "sigma2": 1, "n1": 4, "n2": 3}},
  "initial": {"random": {}},
  "dimension": 3,
  "integrator": {"horizon": 200, "snapshot_interval": 5},
  "seed": 99
}"#,
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let code = cmd_simulate(&SimulateOptions {
            config: config.clone(),
            out: out.clone(),
            seed: Some(12345),
            ensemble: None,
        })
        .unwrap();
        (
            code,
            std::fs::read(out.join(SNAPSHOTS_FILE)).unwrap(),
            std::fs::read(out.join(SUMMARY_FILE)).unwrap(),
        )
    };
    let (c1, s1, m1) = run("one");
    let (c2, s2, m2) = run("two");
    Outcome {
        passed: c1 == c2 && s1 == s2 && m1 == m2 && !s1.is_empty(),
        detail: format!(
            "exit codes {c1}/{c2}; snapshot files {} bytes, identical = {}",
            s1.len(),
            s1 == s2
        ),
    }
}

fn report(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let ok = out.passed && in_time;
    println!(
        "criterion {id:>2} [{}] {name}: {} ({:.2?}{})",
        if ok { "PASS" } else { "FAIL" },
        out.detail,
        elapsed,
        if in_time {
            String::new()
        } else {
            format!(", over budget {budget:?}")
        }
    );
    ok
}

fn main() {
    // sanity: enumeration agrees with the Bell numbers used by the oracle
    assert_eq!(set_partitions(7).len(), 877);

    let mut all = true;
    all &= report(1, "gradient identity", Duration::from_secs(10), gradient_identity);

    let start = Instant::now();
    let runs = equilibrium_runs();
    let elapsed = start.elapsed();
    let ok2 = runs.converged > 0 && runs.bound_violations == 0 && elapsed <= Duration::from_secs(300);
    println!(
        "criterion  2 [{}] equilibrium upper bound: {} of 500 runs converged, {} exceed (N-1) alpha_plus, largest d_plus / D_plus = {:.6} ({elapsed:.2?})",
        if ok2 { "PASS" } else { "FAIL" },
        runs.converged,
        runs.bound_violations,
        runs.worst_ratio
    );
    let ok3 = runs.collision_violations == 0;
    println!(
        "criterion  3 [{}] collision bound: {} violations, {} ties at t = 0 within {COLLISION_TIE_TOL:e}, smallest min d_minus / bound = {:.4}",
        if ok3 { "PASS" } else { "FAIL" },
        runs.collision_violations,
        runs.collision_ties,
        runs.worst_margin
    );
    all &= ok2 && ok3;

    all &= report(4, "pinned-edge distance", Duration::from_secs(30), pinned_distance_exactness);
    all &= report(5, "dilute partition oracle", Duration::from_secs(120), dilute_oracle);
    all &= report(6, "Pi hierarchy", Duration::from_secs(60), pi_monotone);
    all &= report(
        7,
        "two-cluster corroboration",
        Duration::from_secs(60),
        two_cluster_corroboration,
    );
    all &= report(8, "field-norm closed form", Duration::from_secs(60), mu_closed_form);
    all &= report(9, "potential tail", Duration::from_secs(1), potential_tail);
    all &= report(10, "determinism", Duration::from_secs(60), determinism);

    if !all {
        std::process::exit(1);
    }
}

//! End-to-end acceptance checks. Runs as a plain binary so that every check
//! prints its verdict line even when it passes.

use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use mobgraph::analysis::{chernoff_poisson, connector_bracket};
use mobgraph::dynamics::{EdgeOracle, Motion, Snapshot, TailRadius};
use mobgraph::geometry::Domain;
use mobgraph::graph::{components_exact, components_fast};
use mobgraph::kernels::{connection_prob, lower_bound_prob, KernelParams, Variant};
use mobgraph::pointprocess::{sample_ppp, subcube_counts, PointCloud, Vertex};
use mobgraph::stats::{chi_square_poisson, chi_square_two_sample, lag1_autocorrelation};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Poisson};

type Verdict = Result<String, String>;

fn check(cond: bool, msg: String) -> Verdict {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

const VARIANTS: [Variant; 3] = [Variant::Generic, Variant::SoftBoolean, Variant::AgeRcm];

fn kernel(variant: Variant, dim: usize) -> KernelParams {
    KernelParams::new(variant, 0.8, 1.5, dim).with_alpha(0.6).with_kappa1(1.3).with_beta(0.7)
}

/// Kernels written out from their definitions.
fn oracle_prob(r: f64, u: f64, v: f64, kp: &KernelParams) -> f64 {
    let d = kp.dim as f64;
    let (lo, hi) = (u.min(v), u.max(v));
    match kp.variant {
        Variant::Generic => kp.alpha * (kp.kappa1 * lo.powf(-kp.delta * kp.gamma) * r.powf(-kp.delta * d)).min(1.0),
        Variant::SoftBoolean => {
            let radii = u.powf(-kp.gamma / d) + v.powf(-kp.gamma / d);
            (r / radii).powf(-kp.delta * d).min(1.0)
        }
        Variant::AgeRcm => {
            let s = lo.powf(kp.gamma) * hi.powf(1.0 - kp.gamma) * r.powf(d) / kp.beta;
            s.powf(-kp.delta).min(1.0)
        }
    }
}

/// Two vertices at distance `r` on a circle of length 200.
fn pair_oracle(kp: KernelParams, r: f64, u: f64, v: f64, seed: u64, tail: TailRadius) -> (EdgeOracle, Vec<f64>) {
    let dom = Domain::torus(1, 200.0).unwrap();
    let vs = vec![
        Vertex { id: 0, pos: vec![0.0].into(), mark: u },
        Vertex { id: 1, pos: vec![r].into(), mark: v },
    ];
    let cloud = PointCloud::from_vertices(dom, 1.0, false, vs).unwrap();
    (EdgeOracle::new(seed, kp, Arc::new(cloud), tail).unwrap(), vec![0.0, r])
}

/// Edge indicators of the fixed pair over `epochs` consecutive epochs.
fn edge_series(orc: &EdgeOracle, pos: &[f64], epochs: u32) -> Vec<bool> {
    (0..epochs)
        .map(|e| {
            let snap = Snapshot::with_positions(orc.cloud.clone(), f64::from(e), pos.to_vec()).unwrap();
            orc.has_edge(&snap, 0, 1).unwrap()
        })
        .collect()
}

fn kernel_marginals() -> Verdict {
    const EPOCHS: u32 = 100_000;
    let rs = [0.3, 1.0, 3.0, 10.0, 30.0];
    let marks = [(0.05, 0.5), (0.3, 0.3), (0.7, 0.1), (0.9, 0.95)];
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut cases = 0;
    for variant in VARIANTS {
        let kp = kernel(variant, 1);
        for (k, (&r, &(u, v))) in rs.iter().flat_map(|r| marks.iter().map(move |m| (r, m))).enumerate() {
            let p = connection_prob(r, u, v, &kp);
            let want = oracle_prob(r, u, v, &kp);
            if (p - want).abs() > 1e-12 * want.max(1e-300) {
                failures.push(format!("{variant:?} r={r} u={u} v={v}: p={p} but definition gives {want}"));
            }
            // alternate between the near path and the skip-sampled tail
            let tail = if k % 2 == 0 { TailRadius::Diameter } else { TailRadius::Fixed(r / 2.0) };
            let (orc, pos) = pair_oracle(kp, r, u, v, 1000 + k as u64, tail);
            let hits = edge_series(&orc, &pos, EPOCHS).iter().filter(|&&b| b).count();
            let freq = hits as f64 / f64::from(EPOCHS);
            let se = (p * (1.0 - p) / f64::from(EPOCHS)).sqrt();
            let z = if se > 0.0 { (freq - p).abs() / se } else if freq == p { 0.0 } else { f64::INFINITY };
            worst = worst.max(z);
            if z > 3.0 {
                failures.push(format!("{variant:?} r={r} u={u} v={v}: freq {freq} vs p {p} ({z:.2} se)"));
            }
            cases += 1;
        }
    }
    check(
        failures.is_empty(),
        format!("{cases} tuples x {EPOCHS} epochs, worst deviation {worst:.2} se {failures:?}"),
    )
}

fn lower_bound_domination() -> Verdict {
    let mut runner = TestRunner::new(PropConfig {
        cases: 10_000,
        failure_persistence: None,
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        ..PropConfig::default()
    });
    let strategy = (
        0usize..3,
        1usize..4,
        0.51f64..0.99,
        1.05f64..4.0,
        0.01f64..1.0,
        0.1f64..5.0,
        0.1f64..5.0,
        1e-3f64..200.0,
        1e-6f64..1.0,
        1e-6f64..1.0,
    );
    let result = runner.run(&strategy, |(vi, dim, gamma, delta, alpha, kappa1, beta, r, u, v)| {
        let kp = KernelParams::new(VARIANTS[vi], gamma, delta, dim)
            .with_alpha(alpha)
            .with_kappa1(kappa1)
            .with_beta(beta);
        // the variant's own constant, derived from the definitions
        let k1 = match kp.variant {
            Variant::Generic => kappa1,
            Variant::SoftBoolean => 1.0,
            Variant::AgeRcm => beta.powf(delta),
        };
        let lo = u.min(v);
        let bound = alpha * (k1 * lo.powf(-delta * gamma) * r.powf(-delta * dim as f64)).min(1.0);
        let lib_bound = lower_bound_prob(r, u, v, &kp);
        prop_assert!((lib_bound - bound).abs() <= 1e-12 * bound.max(1e-300), "bound {lib_bound} vs {bound}");
        let p = connection_prob(r, u, v, &kp);
        prop_assert!(p >= lib_bound, "p={p} < bound={lib_bound}");
        prop_assert!(p <= 1.0);
        Ok(())
    });
    match result {
        Ok(()) => Ok("10000 random (variant, parameters, r, u, v), p >= bound exactly".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn stationarity() -> Verdict {
    const REPLICAS: u64 = 200;
    let dom = Domain::torus(2, 400.0).unwrap();
    let (lambda, cells) = (1.0, 4);
    let mean = lambda * dom.volume() / (cells * cells) as f64;
    let (mut c0, mut c10) = (Vec::new(), Vec::new());
    for s in 0..REPLICAS {
        let cloud = Arc::new(sample_ppp(&dom, lambda, false, 7000 + s).unwrap());
        let mut m = Motion::new(cloud.clone(), 7000 + s);
        for (t, out) in [(0.0, &mut c0), (10.0, &mut c10)] {
            let snap = m.snapshot(t).unwrap();
            out.extend(subcube_counts((0..snap.len()).map(|i| snap.pos(i)), &dom, cells));
        }
    }
    let g0 = chi_square_poisson(&c0, mean).unwrap();
    let g10 = chi_square_poisson(&c10, mean).unwrap();
    let per_cell = |c: &[u64]| {
        let mut tot = vec![0u64; cells * cells];
        for (k, &x) in c.iter().enumerate() {
            tot[k % (cells * cells)] += x;
        }
        tot
    };
    let two = chi_square_two_sample(&per_cell(&c0), &per_cell(&c10)).unwrap();
    check(
        !g0.rejects(0.01) && !g10.rejects(0.01) && !two.rejects(0.01),
        format!(
            "{REPLICAS} replicas, 16 cells: Poisson fit p={:.3} (t=0), p={:.3} (t=10); t=0 vs t=10 p={:.3}",
            g0.p_value, g10.p_value, two.p_value
        ),
    )
}

/// Lag-1 sample autocorrelation, computed directly.
fn autocorr(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    let cov: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    cov / var
}

fn epoch_independence() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for (variant, r, tail) in [
        (Variant::Generic, 2.0, TailRadius::Diameter),
        (Variant::SoftBoolean, 6.0, TailRadius::Fixed(1.0)),
        (Variant::AgeRcm, 10.0, TailRadius::Diameter),
    ] {
        let kp = kernel(variant, 1);
        let p = connection_prob(r, 0.2, 0.4, &kp);
        let (orc, pos) = pair_oracle(kp, r, 0.2, 0.4, 77, tail);
        let xs: Vec<f64> = edge_series(&orc, &pos, 100_000).into_iter().map(f64::from).collect();
        let rho = lag1_autocorrelation(&xs);
        let direct = autocorr(&xs);
        ok &= p > 0.05 && p < 0.95 && rho.abs() < 0.02 && (rho - direct).abs() < 1e-9;
        lines.push(format!("{variant:?} r={r} p={p:.3}: rho={rho:.4}"));
    }
    check(ok, format!("100000 epochs; {}", lines.join(", ")))
}

/// Components by breadth-first search over all pairs.
fn bfs_roots(snap: &Snapshot, orc: &EdgeOracle) -> Vec<u32> {
    let n = snap.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if orc.has_edge(snap, i, j).unwrap() {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut root = vec![u32::MAX; n];
    for s in 0..n {
        if root[s] != u32::MAX {
            continue;
        }
        root[s] = s as u32;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if root[y] == u32::MAX {
                    root[y] = s as u32;
                    queue.push_back(y);
                }
            }
        }
    }
    root
}

fn component_equivalence() -> Verdict {
    let mut rng = StdRng::seed_from_u64(5);
    let mut max_n = 0;
    for inst in 0..100u64 {
        let dim = 1 + (inst % 2) as usize;
        let dom = if inst % 3 == 0 {
            Domain::cube(dim, if dim == 1 { 150.0 } else { 15.0 }).unwrap()
        } else {
            Domain::torus(dim, if dim == 1 { 150.0 } else { 225.0 }).unwrap()
        };
        let lambda = rng.random_range(0.3..2.0);
        let kp = KernelParams::new(VARIANTS[(inst % 3) as usize], rng.random_range(0.55..0.95), rng.random_range(1.1..3.0), dim)
            .with_alpha(rng.random_range(0.05..1.0))
            .with_beta(rng.random_range(0.2..2.0));
        let tail = match inst % 4 {
            0 => TailRadius::Auto,
            1 => TailRadius::Diameter,
            _ => TailRadius::Fixed(rng.random_range(0.5..8.0)),
        };
        let cloud = sample_ppp(&dom, lambda, inst % 2 == 0, inst).unwrap();
        if cloud.len() > 500 {
            return Err(format!("instance {inst} has {} vertices", cloud.len()));
        }
        max_n = max_n.max(cloud.len());
        let cloud = Arc::new(cloud);
        let orc = EdgeOracle::new(inst, kp, cloud.clone(), tail).unwrap();
        let snap = Motion::new(cloud, inst).snapshot(rng.random_range(0.0..5.0)).unwrap();
        let fast = components_fast(&snap, &orc, None).unwrap().labels;
        let exact = components_exact(&snap, &orc, 500).unwrap();
        let bfs = bfs_roots(&snap, &orc);
        if fast.root != exact.root || exact.root != bfs {
            return Err(format!("instance {inst}: partitions differ"));
        }
    }
    Ok(format!("100 instances up to N={max_n}: fast = exact = BFS"))
}

fn chernoff_tails() -> Verdict {
    const DRAWS: usize = 1_000_000;
    let mut rng = StdRng::seed_from_u64(11);
    let mut lines = Vec::new();
    let mut ok = true;
    for lambda in [10.0, 100.0] {
        let pois = Poisson::new(lambda).unwrap();
        let draws: Vec<f64> = (0..DRAWS).map(|_| pois.sample(&mut rng)).collect();
        for eps in [0.1, 0.3, 0.5] {
            let (lo_b, hi_b) = chernoff_poisson(lambda, eps).unwrap();
            ok &= (lo_b - (-lambda * eps * eps / 2.0f64).exp()).abs() < 1e-15;
            ok &= (hi_b - (-lambda * eps * eps / 4.0f64).exp()).abs() < 1e-15;
            let below = draws.iter().filter(|&&x| x < (1.0 - eps) * lambda).count() as f64 / DRAWS as f64;
            let above = draws.iter().filter(|&&x| x > (1.0 + eps) * lambda).count() as f64 / DRAWS as f64;
            ok &= below <= lo_b && above <= hi_b;
            lines.push(format!("l={lambda} e={eps}: {below:.2e}<={lo_b:.2e}, {above:.2e}<={hi_b:.2e}"));
        }
    }
    check(ok, format!("{DRAWS} draws; {}", lines.join("; ")))
}

// -- checks that go through the binary --

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mobgraph"));
    c.env_remove("MOBGRAPH_OUT").env("RUST_LOG", "warn");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run_bin(args: &[&str], out: &Path) -> Result<(), String> {
    let status = bin()
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("mobgraph {args:?} exited with {status}"))
    }
}

type Row = BTreeMap<String, String>;

fn read_csv(path: &Path) -> Vec<Row> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    r.deserialize().map(|x| x.unwrap()).collect()
}

fn num(row: &Row, key: &str) -> f64 {
    let s = &row[key];
    if s.is_empty() {
        return f64::INFINITY;
    }
    s.parse().unwrap_or_else(|_| panic!("{key}={s}"))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn connector_counts() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    run_bin(&["diagnose", "--config", config("connectors.toml").to_str().unwrap()], dir.path())?;
    let rows = read_csv(&dir.path().join("connectors.csv"));
    let fit = read_csv(&dir.path().join("connectors_fit.csv"));
    let c = num(&fit[0], "c");
    let mut ok = rows.len() == 27 && c > 0.0;
    let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
    for r in &rows {
        let (u, v, dist) = (num(r, "u"), num(r, "v"), num(r, "r"));
        let want = u.powf(-0.8) * (v.powf(-1.2) * (dist + u.powf(-0.8)).powf(-1.5)).min(1.0);
        let bracket = num(r, "bracket");
        let disp = num(r, "dispersion");
        dmin = dmin.min(disp);
        dmax = dmax.max(disp);
        ok &= (bracket - want).abs() < 1e-9 * want
            && (bracket - connector_bracket(0.8, 1.5, 1, u, v, dist)).abs() < 1e-12
            && num(r, "replicas") >= 1000.0
            && (0.9..=1.1).contains(&disp)
            && num(r, "mean") >= c * bracket;
    }
    check(
        ok,
        format!(
            "{} configurations x {} replicas, dispersion in [{dmin:.3}, {dmax:.3}], fitted C={c:.3}",
            rows.len(),
            rows.first().map_or(0.0, |r| num(r, "replicas"))
        ),
    )
}

fn broadcast_trend() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    run_bin(&["broadcast-scaling", "--config", config("broadcast.toml").to_str().unwrap()], dir.path())?;
    let summary = read_csv(&dir.path().join("broadcast_summary.csv"));
    let replicas = read_csv(&dir.path().join("broadcast_replicas.csv"));
    let mut ok = summary.len() == 7;
    let mut meds = Vec::new();
    for s in &summary {
        let n = num(s, "volume");
        let times: Vec<f64> = replicas.iter().filter(|r| num(r, "volume") == n).map(|r| num(r, "T_bc")).collect();
        let med = median(times.clone());
        ok &= times.len() >= 50 && med == num(s, "median_t_bc");
        let norm = med / (n.ln() * n.ln().ln().sqrt());
        ok &= (norm - num(s, "normalized")).abs() < 1e-9;
        meds.push((n, med, norm, med / n.powf(0.2)));
    }
    let top: Vec<f64> = meds.iter().rev().take(3).map(|m| m.2).collect();
    let spread = top.iter().cloned().fold(0.0, f64::max) / top.iter().cloned().fold(f64::INFINITY, f64::min);
    // the raw trend is judged on the top three volumes like the normalized one;
    // the full sweep is reported alongside
    let decreasing = meds[meds.len().saturating_sub(3)..].windows(2).all(|w| w[1].3 < w[0].3);
    let decreasing_all = meds.windows(2).all(|w| w[1].3 < w[0].3);
    ok &= spread <= 2.0 && decreasing;
    let table: Vec<String> = meds.iter().map(|m| format!("n={} T={} T/n^0.2={:.3}", m.0, m.1, m.3)).collect();
    check(
        ok,
        format!(
            "normalized max/min over top three volumes {spread:.3}, raw ratio strictly decreasing over top three: {decreasing} (all volumes: {decreasing_all}); {}",
            table.join(", ")
        ),
    )
}

fn percolation_tail() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    run_bin(&["perc-tail", "--config", config("perc.toml").to_str().unwrap()], dir.path())?;
    let surv = read_csv(&dir.path().join("perc_survival.csv"));
    let traces = read_csv(&dir.path().join("perc_traces.csv"));
    let fits = read_csv(&dir.path().join("perc_fits.csv"));
    let slope = read_csv(&dir.path().join("perc_loglog.csv"));
    // survival recomputed from the per-replica times
    let mut t_perc: BTreeMap<u64, f64> = BTreeMap::new();
    for r in &traces {
        t_perc.insert(num(r, "replica") as u64, num(r, "T_perc_proxy"));
    }
    let mut ok = t_perc.len() == 200;
    let ps: Vec<f64> = surv.iter().map(|r| num(r, "survival")).collect();
    for (r, &p) in surv.iter().zip(&ps) {
        let t = num(r, "time");
        let alive = t_perc.values().filter(|&&x| x > t).count() as f64 / t_perc.len() as f64;
        ok &= (alive - p).abs() < 1e-12;
    }
    let monotone = ps.windows(2).all(|w| w[1] <= w[0]);
    let res = |m: &str| fits.iter().find(|r| r["model"] == m).map(|r| num(r, "residual"));
    let (se, pl) = (res("stretched_exponential"), res("power_law"));
    let k = slope.first().map(|r| num(r, "loglog_slope"));
    ok &= monotone && matches!((se, pl), (Some(a), Some(b)) if a < b) && k.is_some_and(|k| k > 0.0);
    check(
        ok,
        format!("200 replicas, survival non-increasing: {monotone}, residuals stretched {se:?} vs power {pl:?}, loglog slope {k:?}"),
    )
}

fn spread_trend() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    run_bin(&["diagnose", "--config", config("spread.toml").to_str().unwrap()], dir.path())?;
    let rows = read_csv(&dir.path().join("spread.csv"));
    let summary = read_csv(&dir.path().join("spread_summary.csv"));
    let mut fractions = Vec::new();
    let mut ok = summary.len() == 3;
    for s in &summary {
        let k = num(s, "K");
        let these: Vec<&Row> = rows.iter().filter(|r| num(r, "K") == k).collect();
        let succ = these.iter().filter(|r| r["success"] == "true").count();
        ok &= these.len() == 100 && these.iter().all(|r| r["verified"] == "true");
        ok &= succ as f64 == num(s, "successes");
        fractions.push((k, succ as f64 / these.len() as f64));
    }
    let nondecreasing = fractions.windows(2).all(|w| w[1].1 >= w[0].1);
    ok &= nondecreasing;
    check(ok, format!("success fractions {fractions:?}, all subgraphs verified, non-decreasing: {nondecreasing}"))
}

const DETERMINISM_CONFIG: &str = r#"
replicas = 3
t_max = 12.0
[domain]
volume = 200.0
[broadcast]
volumes = [64.0, 128.0]
[convergence]
dts = [1.0, 0.5]
[diagnose]
density_steps = 8
density_replicas = 2
k0 = 64.0
spread_replicas = 4
connector_u = [0.1]
connector_v = [0.2]
connector_r = [2.0, 5.0]
connector_replicas = 50
membership_k = [64.0]
membership_replicas = 4
"#;

fn files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Verdict {
    let work = tempfile::tempdir().unwrap();
    let torus = work.path().join("torus.toml");
    std::fs::write(&torus, DETERMINISM_CONFIG).unwrap();
    let boxed = work.path().join("box.toml");
    std::fs::write(&boxed, format!("{DETERMINISM_CONFIG}\n").replace("volume = 200.0", "kind = \"box\"\nside = 200.0")).unwrap();
    let mut compared = 0;
    for (cmd, cfg) in [
        ("sample", &torus),
        ("evolve", &torus),
        ("broadcast-scaling", &torus),
        ("perc-tail", &boxed),
        ("diagnose", &torus),
        ("convergence", &torus),
    ] {
        let mut outs = Vec::new();
        for workers in ["1", "3"] {
            let out = work.path().join(format!("{cmd}-{workers}"));
            run_bin(&[cmd, "--config", cfg.to_str().unwrap(), "--seed", "42", "--workers", workers], &out)?;
            outs.push(files(&out));
        }
        if outs[0].is_empty() || outs[0] != outs[1] {
            return Err(format!("{cmd}: outputs differ between 1 and 3 workers"));
        }
        compared += outs[0].len();
    }
    Ok(format!("six subcommands, {compared} files byte-identical across 1 and 3 workers"))
}

type Check = (&'static str, fn() -> Verdict);

fn main() {
    let checks: [Check; 11] = [
        ("kernel marginal frequencies", kernel_marginals),
        ("kernel lower-bound domination", lower_bound_domination),
        ("stationarity of subcube counts", stationarity),
        ("cross-epoch independence", epoch_independence),
        ("component search equivalence", component_equivalence),
        ("two-connector counts", connector_counts),
        ("Poisson Chernoff tails", chernoff_tails),
        ("broadcast time scaling", broadcast_trend),
        ("percolation time tail", percolation_tail),
        ("spread subgraph success trend", spread_trend),
        ("determinism across worker counts", determinism),
    ];
    // `cargo test -- <filter>` runs the checks whose name contains the filter
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, f)) in checks.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(msg) => println!("[{:>2}] PASS {name} ({secs:.1}s): {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("[{:>2}] FAIL {name} ({secs:.1}s): {msg}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}

//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line;
//! the process exits non-zero if any of them fails.

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use hexplore::bench::{run_suite, AggregateResult, SuiteConfig};
use hexplore::hexgrid::{neighbor, Direction, HexCoord, Maze};
use hexplore::neural::layers::{relu_backward, relu_inplace, Conv2d, Dense, Init, MaxPool};
use hexplore::neural::{load_checkpoint, save_checkpoint, NetInput, Network, Parameters, QFunction, Tensor, ACTIONS};
use hexplore::pathfind::astar;
use hexplore::rl::{reward_immediate, reward_surrounding, total_reward, ProgressRule, RewardParams};
use hexplore::rng::{self, Rng, Stream};
use hexplore::sim::{random_starts, run_episode, EpisodeConfig, Method, Termination};
use hexplore::worldmap::{CellStatus, ExplorationGraph};
use hexplore::generate_maze;
use rand::Rng as _;

const CLASSICAL: [Method; 4] = [Method::Dfs, Method::Bfs, Method::CollabDfs, Method::CollabBfs];

/// Flags of the training run checked by the trainability criterion.
const TRAIN_FLAGS: &[&str] = &[
    "--size", "10", "--episodes", "300", "--seed", "0", "--gamma", "0.9", "--reward-scale", "0.01",
    "--updates-per-episode", "4", "--image-lr-scale", "0.01",
];

type Verdict = (bool, String);

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hexplore")
}

fn hexplore(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("hexplore {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn classical_suite(dir: &Path, size: usize) -> hexplore::Result<AggregateResult> {
    let mut cfg = SuiteConfig::new(vec![size], CLASSICAL.to_vec(), dir);
    cfg.mazes_per_size = 100;
    cfg.seed = 0;
    Ok(run_suite(&cfg)?.aggregate)
}

fn steps(agg: &AggregateResult, m: Method, size: usize) -> f64 {
    agg.get(m, size).map_or(f64::NAN, |r| r.steps_mean)
}

fn backtracks(agg: &AggregateResult, m: Method, size: usize) -> f64 {
    agg.get(m, size).map_or(f64::NAN, |r| r.backtracks_mean)
}

fn ranking(g10: &AggregateResult, elapsed: Duration) -> Verdict {
    let (d, b, cd, cb) = (
        steps(g10, Method::Dfs, 10),
        steps(g10, Method::Bfs, 10),
        steps(g10, Method::CollabDfs, 10),
        steps(g10, Method::CollabBfs, 10),
    );
    let ok = cd < d && d < b && cb < b && elapsed < Duration::from_secs(120);
    (ok, format!("cdfs={cd:.1} dfs={d:.1} bfs={b:.1} cbfs={cb:.1} in {:.1}s", elapsed.as_secs_f64()))
}

fn magnitude_bands(g10: &AggregateResult) -> Verdict {
    let bands = [
        (Method::Dfs, 75.0, 300.0),
        (Method::CollabDfs, 30.0, 130.0),
        (Method::Bfs, 150.0, 600.0),
        (Method::CollabBfs, 90.0, 450.0),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (m, lo, hi) in bands {
        let v = steps(g10, m, 10);
        ok &= (lo..=hi).contains(&v);
        detail.push(format!("{}={v:.1} in [{lo}, {hi}]", m.name()));
    }
    (ok, detail.join(" "))
}

fn backtrack_ordering(g10: &AggregateResult, g20: &AggregateResult) -> Verdict {
    let mut ok = true;
    let mut detail = Vec::new();
    for (agg, size) in [(g10, 10), (g20, 20)] {
        for (collab, plain) in [(Method::CollabDfs, Method::Dfs), (Method::CollabBfs, Method::Bfs)] {
            let (c, p) = (backtracks(agg, collab, size), backtracks(agg, plain, size));
            ok &= c < p;
            detail.push(format!("G{size} {}={c:.1}<{}={p:.1}", collab.name(), plain.name()));
        }
    }
    (ok, detail.join(" "))
}

fn completeness() -> hexplore::Result<Verdict> {
    let net = Network::<f32>::init(&mut rng::from_seed(4));
    let mut failures = 0;
    let mut worst = 0;
    for i in 0..50u64 {
        let maze = generate_maze(10, rng::derive_seed(4, Stream::EvalMaze, i))?;
        maze.validate()?;
        let starts = random_starts(10, 4, &mut rng::stream(4, Stream::Starts, i));
        for m in Method::ALL {
            let cfg = EpisodeConfig::new(m, 10, starts.clone());
            let out = run_episode(cfg, &maze, (m == Method::Bamax).then_some(&net))?;
            worst = worst.max(out.metrics.simulation_steps);
            if out.metrics.termination != Termination::FullyExplored || out.metrics.simulation_steps > 1000 {
                failures += 1;
            }
        }
    }
    Ok((failures == 0, format!("{failures} failures over 250 episodes, longest {worst} steps, cap 1000")))
}

/// Hop count by breadth-first search over passages with at least one visited end.
fn bfs_hops(maze: &Maze, g: &ExplorationGraph, from: HexCoord, to: HexCoord) -> Option<usize> {
    let size = maze.size();
    let mut dist = vec![usize::MAX; size * size];
    dist[from.index(size)] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(c) = queue.pop_front() {
        if c == to {
            return Some(dist[c.index(size)]);
        }
        for d in Direction::ALL {
            let Some(n) = maze.step(c, d) else { continue };
            if g.status(n) == CellStatus::Unknown || !(g.is_visited(c) || g.is_visited(n)) {
                continue;
            }
            if dist[n.index(size)] == usize::MAX {
                dist[n.index(size)] = dist[c.index(size)] + 1;
                queue.push_back(n);
            }
        }
    }
    None
}

fn astar_oracle() -> hexplore::Result<Verdict> {
    let mut rng = rng::from_seed(5);
    let mut queries = 0;
    let mut mismatches = 0;
    let mut graph = 0u64;
    while queries < 200 {
        let maze = generate_maze(10, rng::derive_seed(5, Stream::EvalMaze, graph))?;
        graph += 1;
        let mut g = ExplorationGraph::new(10);
        let mut at = HexCoord::new(rng.random_range(0..10), rng.random_range(0..10));
        g.observe_and_visit(&maze, at)?;
        let walk = rng.random_range(10..200);
        for _ in 0..walk {
            let open = maze.open_sides(at)?;
            at = maze.step(at, open[rng.random_range(0..open.len())]).expect("open side");
            g.observe_and_visit(&maze, at)?;
        }
        let known: Vec<HexCoord> = (0..100)
            .map(|i| HexCoord::from_index(i, 10))
            .filter(|&c| g.status(c) != CellStatus::Unknown)
            .collect();
        for _ in 0..10 {
            let a = known[rng.random_range(0..known.len())];
            let b = known[rng.random_range(0..known.len())];
            let expected = bfs_hops(&maze, &g, a, b);
            let got = astar(&g, a, b).ok().map(|p| p.hops());
            if expected.is_none() || got != expected {
                mismatches += 1;
            }
            queries += 1;
        }
    }
    Ok((mismatches == 0, format!("{mismatches} mismatches in {queries} queries over {graph} graphs")))
}

/// Central-difference step for f64 probes.
const H: f64 = 1e-6;

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale < 1e-7 {
        (analytic - numeric).abs()
    } else {
        (analytic - numeric).abs() / scale
    }
}

fn random_tensor(rng: &mut Rng, shape: &[usize]) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("shape")
}

fn dot(a: &Tensor<f64>, b: &Tensor<f64>) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

fn numeric<S>(state: &mut S, slot: impl Fn(&mut S) -> &mut f64, loss: impl Fn(&S) -> f64) -> f64 {
    let orig = *slot(state);
    *slot(state) = orig + H;
    let up = loss(state);
    *slot(state) = orig - H;
    let down = loss(state);
    *slot(state) = orig;
    (up - down) / (2.0 * H)
}

fn gradients() -> hexplore::Result<Verdict> {
    let mut rng = rng::from_seed(6);
    let mut worst: Vec<(&str, f64)> = Vec::new();

    let mut dense = Dense::<f64>::init(7, 5, Init::He, &mut rng);
    let x = random_tensor(&mut rng, &[7]);
    let proj = random_tensor(&mut rng, &[5]);
    let mut grad = Dense::zeros(7, 5);
    dense.backward(&x, &proj, &mut grad, false);
    let mut w: f64 = 0.0;
    for _ in 0..20 {
        let i = rng.random_range(0..35);
        let n = numeric(&mut dense, |s| &mut s.weight.data_mut()[i], |s| dot(&s.forward(&x, "d").unwrap(), &proj));
        w = w.max(relative_error(grad.weight.data()[i], n));
    }
    worst.push(("dense", w));

    let mut conv = Conv2d::<f64>::init(2, 3, 3, Init::He, &mut rng);
    let mut x = random_tensor(&mut rng, &[2, 7, 7]);
    let proj = random_tensor(&mut rng, &[3, 5, 5]);
    let mut grad = Conv2d::zeros(2, 3, 3);
    let dx = conv.backward(&x, &proj, &mut grad, true).expect("input gradient");
    let mut w: f64 = 0.0;
    for k in 0..20 {
        if k % 2 == 0 {
            let i = rng.random_range(0..conv.weight.len());
            let n = numeric(&mut conv, |s| &mut s.weight.data_mut()[i], |s| dot(&s.forward(&x, "c").unwrap(), &proj));
            w = w.max(relative_error(grad.weight.data()[i], n));
        } else {
            let i = rng.random_range(0..x.len());
            let n = numeric(&mut x, |s| &mut s.data_mut()[i], |s| dot(&conv.forward(s, "c").unwrap(), &proj));
            w = w.max(relative_error(dx.data()[i], n));
        }
    }
    worst.push(("conv", w));

    for (name, size) in [("maxpool2", 2), ("maxpool4", 4)] {
        let pool = MaxPool { size };
        let mut x = random_tensor(&mut rng, &[3, 9, 9]);
        let proj = random_tensor(&mut rng, &pool.output_shape(x.shape()));
        let (_, argmax) = pool.forward(&x);
        let dx = pool.backward(&proj, &argmax, x.shape());
        let mut w: f64 = 0.0;
        for _ in 0..20 {
            let i = rng.random_range(0..x.len());
            let n = numeric(&mut x, |s| &mut s.data_mut()[i], |s| dot(&pool.forward(s).0, &proj));
            w = w.max(relative_error(dx.data()[i], n));
        }
        worst.push((name, w));
    }

    let mut x = random_tensor(&mut rng, &[20]);
    let proj = random_tensor(&mut rng, &[20]);
    let relu = |t: &Tensor<f64>| {
        let mut y = t.clone();
        relu_inplace(&mut y);
        y
    };
    let mut dx = proj.clone();
    relu_backward(&mut dx, &relu(&x));
    let mut w: f64 = 0.0;
    for i in 0..20 {
        let n = numeric(&mut x, |s| &mut s.data_mut()[i], |s| dot(&relu(s), &proj));
        w = w.max(relative_error(dx.data()[i], n));
    }
    worst.push(("relu", w));

    let mut net = Network::<f64>::init(&mut rng);
    let input = NetInput {
        maps: std::array::from_fn(|_| random_tensor(&mut rng, &[1, 32, 32])),
        walls: random_tensor(&mut rng, &[1, 64, 64]),
        local: random_tensor(&mut rng, &[18]),
    };
    let proj = random_tensor(&mut rng, &[ACTIONS]);
    let (_, cache) = net.forward(&input)?;
    let mut grads = net.zeros_like();
    net.backward(&cache, &proj, &mut grads)?;
    let analytic: Vec<Vec<f64>> = grads.params().iter().map(|t| t.data().to_vec()).collect();
    let mut w: f64 = 0.0;
    for (t, values) in analytic.iter().enumerate() {
        let i = rng.random_range(0..values.len());
        let n = numeric(
            &mut net,
            |s| &mut Tensor::data_mut(s.params_mut().swap_remove(t))[i],
            |s| dot(&s.forward(&input).unwrap().0, &proj),
        );
        w = w.max(relative_error(values[i], n));
    }
    worst.push(("network", w));

    let ok = worst.iter().all(|&(_, e)| e < 1e-3);
    let detail = worst.iter().map(|(n, e)| format!("{n}={e:.1e}")).collect::<Vec<_>>().join(" ");
    Ok((ok, format!("max relative error per layer: {detail}")))
}

fn open_maze(size: usize) -> hexplore::Result<Maze> {
    let walls = (0..size * size)
        .map(|i| {
            let c = HexCoord::from_index(i, size);
            Direction::ALL
                .into_iter()
                .filter(|&d| neighbor(c, d, size).is_none())
                .fold(0u8, |m, d| m | d.bit())
        })
        .collect();
    Maze::from_walls(size, 0, walls)
}

fn reward_table() -> hexplore::Result<Verdict> {
    let mut failures = Vec::new();
    // (valid, explored, unexplored, max rule, min rule)
    let immediate = [
        (true, 0, 100, 50.0, -100.0),
        (true, 10, 90, 50.0, -80.0),
        (true, 60, 40, 50.0, 20.0),
        (true, 75, 25, 50.0, 50.0),
        (true, 76, 24, 52.0, 50.0),
        (true, 80, 20, 60.0, 50.0),
        (true, 100, 0, 100.0, 50.0),
        (true, 1800, 1800, 50.0, 0.0),
        (false, 10, 90, -20.0, -20.0),
        (false, 100, 0, -20.0, -20.0),
    ];
    let min = RewardParams { rule: ProgressRule::Min, ..RewardParams::default() };
    for (valid, e, u, max_rule, min_rule) in immediate {
        let got = reward_immediate(valid, e, u);
        if got.to_bits() != f64::to_bits(max_rule) {
            failures.push(format!("max({valid},{e},{u})={got}"));
        }
        let got = min.immediate(valid, e, u);
        if got.to_bits() != f64::to_bits(min_rule) {
            failures.push(format!("min({valid},{e},{u})={got}"));
        }
    }
    for e in 0..=100usize {
        let expected = if 2.0 * e as f64 - 100.0 > 50.0 { 2.0 * e as f64 - 100.0 } else { 50.0 };
        if reward_immediate(true, e, 100 - e).to_bits() != f64::to_bits(expected) {
            failures.push(format!("sweep explored={e}"));
        }
    }

    // Every visited/unvisited pattern of the six neighbors of an interior cell.
    let maze = open_maze(3)?;
    let center = HexCoord::new(1, 1);
    let ring: Vec<HexCoord> = Direction::ALL.into_iter().filter_map(|d| neighbor(center, d, 3)).collect();
    let mut cases = 0;
    for mask in 0u32..64 {
        let mut g = ExplorationGraph::new(3);
        g.observe_and_visit(&maze, center)?;
        for (k, &n) in ring.iter().enumerate() {
            if mask >> k & 1 == 1 {
                g.observe_and_visit(&maze, n)?;
            }
        }
        let expected = f64::from(6 - mask.count_ones());
        if reward_surrounding(&g, center).to_bits() != expected.to_bits() {
            failures.push(format!("surrounding mask {mask:06b}"));
        }
        for (r, valid) in [(50.0, true), (-20.0, false)] {
            let total = total_reward(r, reward_surrounding(&g, center));
            if total.to_bits() != (r + expected).to_bits() || (valid && total < 50.0) {
                failures.push(format!("total mask {mask:06b}"));
            }
        }
        cases += 1;
    }
    let mut corner = ExplorationGraph::new(3);
    corner.observe_and_visit(&maze, HexCoord::new(0, 0))?;
    if reward_surrounding(&corner, HexCoord::new(0, 0)) != 2.0 {
        failures.push("corner".into());
    }

    let detail = if failures.is_empty() {
        format!("{} immediate rows, 101-step sweep, {cases} neighbor patterns, corner cell", immediate.len())
    } else {
        failures.join(", ")
    };
    Ok((failures.is_empty(), detail))
}

struct Trained {
    checkpoint: PathBuf,
    verdict: Verdict,
}

fn trainability(dir: &Path) -> Result<Trained, String> {
    let checkpoint = dir.join("g10.ckpt");
    let log = dir.join("train.csv");
    let mut args: Vec<&str> = vec!["train"];
    args.extend_from_slice(TRAIN_FLAGS);
    let (ckpt, log_s) = (checkpoint.to_string_lossy().into_owned(), log.to_string_lossy().into_owned());
    args.extend_from_slice(&["--out", &ckpt, "--log", &log_s]);
    let start = Instant::now();
    hexplore(&args)?;
    let elapsed = start.elapsed();

    let text = fs::read_to_string(&log).map_err(|e| e.to_string())?;
    let steps: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).and_then(|s| s.parse().ok()).ok_or_else(|| format!("bad log line {l}")))
        .collect::<Result<_, _>>()?;
    if steps.len() != 300 {
        return Err(format!("{} episodes logged", steps.len()));
    }
    let first = steps[..50].iter().sum::<f64>() / 50.0;
    let last = steps[250..].iter().sum::<f64>() / 50.0;

    let net = load_checkpoint(&checkpoint).map_err(|e| e.to_string())?;
    let (mut learned, mut dfs, mut complete) = (0.0, 0.0, 0);
    for i in 0..20u64 {
        let maze = generate_maze(10, rng::derive_seed(8, Stream::EvalMaze, i)).map_err(|e| e.to_string())?;
        let starts = random_starts(10, 4, &mut rng::stream(8, Stream::Starts, i));
        let b = run_episode(EpisodeConfig::new(Method::Bamax, 10, starts.clone()), &maze, Some(&net))
            .map_err(|e| e.to_string())?;
        let d = run_episode(EpisodeConfig::new(Method::Dfs, 10, starts), &maze, None).map_err(|e| e.to_string())?;
        complete += usize::from(b.metrics.termination == Termination::FullyExplored);
        learned += b.metrics.simulation_steps as f64 / 20.0;
        dfs += d.metrics.simulation_steps as f64 / 20.0;
    }
    let ok = last < first && complete == 20 && learned <= dfs && elapsed < Duration::from_secs(30 * 60);
    let detail = format!(
        "training first50={first:.1} last50={last:.1} in {:.0}s; held-out greedy={learned:.1} dfs={dfs:.1} complete={complete}/20",
        elapsed.as_secs_f64()
    );
    Ok(Trained { checkpoint, verdict: (ok, detail) })
}

fn scale_transfer(checkpoint: &Path) -> hexplore::Result<Verdict> {
    let net = load_checkpoint(checkpoint)?;
    let mut detail = Vec::new();
    let mut ok = true;
    for size in [20, 40] {
        let mut complete = 0;
        let mut longest = 0;
        for i in 0..5u64 {
            let maze = generate_maze(size, rng::derive_seed(9, Stream::EvalMaze, (size as u64) << 32 | i))?;
            let starts = random_starts(size, 4, &mut rng::stream(9, Stream::Starts, i));
            let out = run_episode(EpisodeConfig::new(Method::Bamax, size, starts), &maze, Some(&net))?;
            complete += usize::from(out.metrics.termination == Termination::FullyExplored);
            longest = longest.max(out.metrics.simulation_steps);
        }
        ok &= complete == 5;
        detail.push(format!("G{size} complete={complete}/5 longest={longest}"));
    }
    Ok((ok, detail.join(" ")))
}

fn files_under(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = entry.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap_or(&p).to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap_or_default()));
            }
        }
    }
    out.sort();
    out
}

fn determinism(dir: &Path) -> Result<Verdict, String> {
    let s = |p: &Path| p.to_string_lossy().into_owned();
    let ckpt = dir.join("random.ckpt");
    save_checkpoint(&Network::<f32>::init(&mut rng::from_seed(10)), &ckpt).map_err(|e| e.to_string())?;
    let maze = dir.join("maze.txt");
    hexplore(&["gen", "--size", "12", "--seed", "10", "--out", &s(&maze)])?;
    let first_maze = fs::read(&maze).map_err(|e| e.to_string())?;
    hexplore(&["gen", "--size", "12", "--seed", "10", "--out", &s(&maze)])?;
    let mut differing = Vec::new();
    if fs::read(&maze).map_err(|e| e.to_string())? != first_maze {
        differing.push("gen".to_string());
    }

    let starts = "0,0;11,11;0,11;11,0";
    for m in Method::ALL {
        let mut runs = Vec::new();
        for k in 0..2 {
            let trace = dir.join(format!("{}-{k}.trace", m.name()));
            let stdout = hexplore(&[
                "explore", "--method", m.name(), "--maze", &s(&maze), "--starts", starts, "--trace", &s(&trace),
                "--ckpt", &s(&ckpt),
            ])?;
            runs.push((stdout, fs::read(&trace).map_err(|e| e.to_string())?));
        }
        if runs[0] != runs[1] {
            differing.push(format!("explore {}", m.name()));
        }
    }

    let mut benches = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("bench-{k}"));
        let stdout = hexplore(&[
            "bench", "--sizes", "8,10", "--mazes", "3", "--methods", "dfs,bfs,cdfs,cbfs,bamax", "--ckpt", &s(&ckpt),
            "--seed", "10", "--out", &s(&out),
        ])?;
        hexplore(&["curves", "--in", &s(&out), "--out", &s(&out.join("curves"))])?;
        benches.push((stdout, files_under(&out)));
    }
    if benches[0] != benches[1] {
        differing.push("bench".to_string());
    }
    let files = benches[0].1.len();
    let detail = if differing.is_empty() {
        format!("gen, 5 explore runs with traces, bench with {files} output files all repeat byte for byte")
    } else {
        format!("outputs differ: {}", differing.join(", "))
    };
    Ok((differing.is_empty(), detail))
}

fn report(results: &mut Vec<bool>, n: usize, title: &str, verdict: Result<Verdict, String>) {
    let (ok, detail) = verdict.unwrap_or_else(|e| (false, format!("error: {e}")));
    println!("{} criterion {n:>2} {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    results.push(ok);
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut results = Vec::new();
    let lib = |r: hexplore::Result<Verdict>| r.map_err(|e| e.to_string());

    let start = Instant::now();
    let g10 = classical_suite(&dir.path().join("g10"), 10);
    let elapsed = start.elapsed();
    let g20 = classical_suite(&dir.path().join("g20"), 20);
    match (&g10, &g20) {
        (Ok(g10), Ok(g20)) => {
            report(&mut results, 1, "classical ranking", Ok(ranking(g10, elapsed)));
            report(&mut results, 2, "magnitude bands", Ok(magnitude_bands(g10)));
            report(&mut results, 3, "backtrack ordering", Ok(backtrack_ordering(g10, g20)));
        }
        _ => {
            let e = g10.as_ref().err().or(g20.as_ref().err()).map(|e| e.to_string()).unwrap_or_default();
            for (n, title) in [(1, "classical ranking"), (2, "magnitude bands"), (3, "backtrack ordering")] {
                report(&mut results, n, title, Err(e.clone()));
            }
        }
    }
    report(&mut results, 4, "completeness", lib(completeness()));
    report(&mut results, 5, "A* oracle equivalence", lib(astar_oracle()));
    report(&mut results, 6, "gradient correctness", lib(gradients()));
    report(&mut results, 7, "reward exactness", lib(reward_table()));
    match trainability(dir.path()) {
        Ok(t) => {
            report(&mut results, 8, "trainability", Ok(t.verdict));
            report(&mut results, 9, "scale transfer", lib(scale_transfer(&t.checkpoint)));
        }
        Err(e) => {
            report(&mut results, 8, "trainability", Err(e.clone()));
            report(&mut results, 9, "scale transfer", Err(format!("no checkpoint: {e}")));
        }
    }
    report(&mut results, 10, "determinism", determinism(dir.path()));

    let passed = results.iter().filter(|&&ok| ok).count();
    println!("{passed}/{} acceptance criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

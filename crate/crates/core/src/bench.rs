//! Benchmark harness: seeded maze suites run across methods with identical
//! mazes and start cells, per-episode CSV output, aggregation, coverage curves
//! and comparison tables.
//!
//! Output directory layout:
//!
//! ```text
//! episodes.csv    method,size,maze_index,maze_seed,starts,sim_steps,backtrack_count,terminated
//! coverage.csv    method,size,maze_index,step,coverage
//! aggregate.csv   one row per (method, size)
//! table.txt       text comparison table
//! ```
//!
//! Rows are appended as episodes finish, so an interrupted run can be resumed:
//! episodes already present in `episodes.csv` are skipped. Both data files are
//! rewritten in key order at the end, which makes the output independent of
//! scheduling and of whether the run was resumed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexgrid::{generate_maze, HexCoord, Maze};
use crate::neural::{load_checkpoint, Network};
use crate::rng::{self, Stream};
use crate::sim::trace::{format_starts, parse_starts};
use crate::sim::{default_cap, random_starts, run_episode, EpisodeConfig, Method, Termination, DEFAULT_AGENTS};

pub const EPISODES_FILE: &str = "episodes.csv";
pub const COVERAGE_FILE: &str = "coverage.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const TABLE_FILE: &str = "table.txt";

const FULL: &str = "full";
const CAP: &str = "cap";

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub sizes: Vec<usize>,
    pub mazes_per_size: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub agents: usize,
    /// Required when `methods` contains the learned policy.
    pub checkpoint: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Worker threads; all available cores when `None`.
    pub threads: Option<usize>,
}

impl SuiteConfig {
    pub fn new(sizes: Vec<usize>, methods: Vec<Method>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            sizes,
            mazes_per_size: 100,
            methods,
            seed: 0,
            agents: DEFAULT_AGENTS,
            checkpoint: None,
            out_dir: out_dir.into(),
            threads: None,
        }
    }
}

fn suite_index(size: usize, maze_index: usize) -> u64 {
    ((size as u64) << 32) | maze_index as u64
}

/// Seed of maze `maze_index` at `size`; shared by every method.
pub fn suite_maze_seed(master: u64, size: usize, maze_index: usize) -> u64 {
    rng::derive_seed(master, Stream::EvalMaze, suite_index(size, maze_index))
}

/// Start cells of maze `maze_index` at `size`; shared by every method.
pub fn suite_starts(master: u64, size: usize, maze_index: usize, agents: usize) -> Vec<HexCoord> {
    random_starts(
        size,
        agents,
        &mut rng::stream(master, Stream::Starts, suite_index(size, maze_index)),
    )
}

/// One line of `episodes.csv`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub method: String,
    pub size: usize,
    pub maze_index: usize,
    pub maze_seed: u64,
    pub starts: String,
    pub sim_steps: usize,
    pub backtrack_count: usize,
    /// `full` when every cell was visited, `cap` when the timestep cap ended it.
    pub terminated: String,
}

impl EpisodeRow {
    pub fn completed(&self) -> bool {
        self.terminated == FULL
    }

    fn key(&self) -> Result<Key> {
        Ok((self.size, self.method.parse()?, self.maze_index))
    }
}

/// One line of `coverage.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub method: String,
    pub size: usize,
    pub maze_index: usize,
    pub step: usize,
    pub coverage: f64,
}

type Key = (usize, Method, usize);

struct EpisodeResult {
    row: EpisodeRow,
    curve: Vec<(usize, f64)>,
}

fn run_one(cfg: &SuiteConfig, key: Key, maze: &Maze, net: Option<&Network<f32>>) -> Result<EpisodeResult> {
    let (size, method, maze_index) = key;
    let starts = suite_starts(cfg.seed, size, maze_index, cfg.agents);
    let outcome = run_episode(EpisodeConfig::new(method, size, starts.clone()), maze, net)?;
    let m = outcome.metrics;
    Ok(EpisodeResult {
        row: EpisodeRow {
            method: method.name().to_string(),
            size,
            maze_index,
            maze_seed: maze.seed(),
            starts: format_starts(&starts),
            sim_steps: m.simulation_steps,
            backtrack_count: m.backtrack_count,
            terminated: match m.termination {
                Termination::FullyExplored => FULL,
                Termination::TimestepCap => CAP,
            }
            .to_string(),
        },
        curve: m.coverage_curve,
    })
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut reader = csv::Reader::from_path(path)?;
    // A run killed mid-write can leave a truncated last line; it is dropped.
    Ok(reader.deserialize().filter_map(|r| r.ok()).collect())
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = csv::Writer::from_path(&tmp)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn appender(path: &Path, header: &str) -> Result<fs::File> {
    let fresh = !path.exists();
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{header}")?;
    }
    Ok(f)
}

fn csv_line<T: Serialize>(row: &T) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.serialize(row)?;
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Everything a finished suite produced.
#[derive(Clone, Debug)]
pub struct SuiteOutput {
    pub rows: Vec<EpisodeRow>,
    pub aggregate: AggregateResult,
}

/// Runs every (method, size, maze) episode not already recorded in the output
/// directory, then writes the sorted data files, the aggregate CSV and the
/// text table.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    if cfg.methods.is_empty() || cfg.sizes.is_empty() {
        return Err(Error::Config("a suite needs at least one method and one size".into()));
    }
    let net = if cfg.methods.contains(&Method::Bamax) {
        let path = cfg
            .checkpoint
            .as_ref()
            .ok_or_else(|| Error::Config("the bamax method needs a checkpoint".into()))?;
        Some(load_checkpoint(path)?)
    } else {
        None
    };
    fs::create_dir_all(&cfg.out_dir)?;
    let episodes_path = cfg.out_dir.join(EPISODES_FILE);
    let coverage_path = cfg.out_dir.join(COVERAGE_FILE);

    let mut wanted = BTreeSet::new();
    for &size in &cfg.sizes {
        for &method in &cfg.methods {
            for i in 0..cfg.mazes_per_size {
                wanted.insert((size, method, i));
            }
        }
    }

    // Resume: keep rows that belong to this suite and whose curve is complete.
    let mut rows: BTreeMap<Key, EpisodeRow> = BTreeMap::new();
    for row in read_rows::<EpisodeRow>(&episodes_path)? {
        let Ok(key) = row.key() else { continue };
        if wanted.contains(&key) && row.maze_seed == suite_maze_seed(cfg.seed, key.0, key.2) {
            rows.insert(key, row);
        }
    }
    let mut curves: BTreeMap<Key, Vec<CoverageRow>> = BTreeMap::new();
    for c in read_rows::<CoverageRow>(&coverage_path)? {
        let Ok(method) = c.method.parse::<Method>() else { continue };
        curves.entry((c.size, method, c.maze_index)).or_default().push(c);
    }
    rows.retain(|k, r| curves.get(k).is_some_and(|c| c.last().is_some_and(|l| l.step == r.sim_steps)));
    curves.retain(|k, _| rows.contains_key(k));
    write_rows(&episodes_path, &rows.values().cloned().collect::<Vec<_>>())?;
    write_rows(&coverage_path, &curves.values().flatten().cloned().collect::<Vec<_>>())?;

    let todo: Vec<Key> = wanted.iter().filter(|k| !rows.contains_key(k)).copied().collect();
    let writers = Mutex::new((
        appender(&episodes_path, "method,size,maze_index,maze_seed,starts,sim_steps,backtrack_count,terminated")?,
        appender(&coverage_path, "method,size,maze_index,step,coverage")?,
    ));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results: Vec<Result<(Key, EpisodeResult)>> = pool.install(|| {
        todo.par_iter()
            .map(|&key| {
                let maze = generate_maze(key.0, suite_maze_seed(cfg.seed, key.0, key.2))?;
                let res = run_one(cfg, key, &maze, net.as_ref())?;
                let mut cov = Vec::new();
                for &(step, coverage) in &res.curve {
                    cov.extend(csv_line(&CoverageRow {
                        method: res.row.method.clone(),
                        size: key.0,
                        maze_index: key.2,
                        step,
                        coverage,
                    })?);
                }
                let line = csv_line(&res.row)?;
                let mut w = writers.lock().expect("writer lock");
                // Coverage first: an episode row on disk implies its whole curve is there.
                w.1.write_all(&cov)?;
                w.1.flush()?;
                w.0.write_all(&line)?;
                w.0.flush()?;
                Ok((key, res))
            })
            .collect()
    });
    drop(writers);
    for r in results {
        let (key, res) = r?;
        curves.insert(
            key,
            res.curve
                .iter()
                .map(|&(step, coverage)| CoverageRow {
                    method: res.row.method.clone(),
                    size: key.0,
                    maze_index: key.2,
                    step,
                    coverage,
                })
                .collect(),
        );
        rows.insert(key, res.row);
    }

    let rows: Vec<EpisodeRow> = rows.into_values().collect();
    write_rows(&episodes_path, &rows)?;
    write_rows(&coverage_path, &curves.into_values().flatten().collect::<Vec<_>>())?;
    let aggregate = aggregate(&rows)?;
    write_aggregate(&aggregate, &cfg.out_dir.join(AGGREGATE_FILE))?;
    fs::write(cfg.out_dir.join(TABLE_FILE), compare_table(&aggregate).text)?;
    Ok(SuiteOutput { rows, aggregate })
}

/// Mean, median and sample standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        let stddev = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary { mean, median, stddev }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: String,
    pub size: usize,
    pub episodes: usize,
    pub steps_mean: f64,
    pub steps_median: f64,
    pub steps_stddev: f64,
    pub backtracks_mean: f64,
    pub backtracks_median: f64,
    pub backtracks_stddev: f64,
    pub completion_rate: f64,
    pub cap: usize,
}

impl AggregateRow {
    /// A method that missed full coverage on some maze has a censored mean.
    pub fn censored(&self) -> bool {
        self.completion_rate < 1.0
    }
}

/// Per (method, size) aggregates in size-then-method order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AggregateResult {
    pub rows: Vec<AggregateRow>,
}

impl AggregateResult {
    pub fn get(&self, method: Method, size: usize) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.method == method.name() && r.size == size)
    }

    /// Groups that did not reach full coverage on every maze.
    pub fn flagged(&self) -> Vec<&AggregateRow> {
        self.rows.iter().filter(|r| r.censored()).collect()
    }
}

/// Aggregates per-episode rows; identical rows always give identical output.
pub fn aggregate(rows: &[EpisodeRow]) -> Result<AggregateResult> {
    let mut groups: BTreeMap<(usize, Method), Vec<&EpisodeRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.size, r.method.parse()?)).or_default().push(r);
    }
    let rows = groups
        .into_iter()
        .map(|((size, method), group)| {
            let steps: Vec<f64> = group.iter().map(|r| r.sim_steps as f64).collect();
            let backs: Vec<f64> = group.iter().map(|r| r.backtrack_count as f64).collect();
            let s = Summary::of(&steps);
            let b = Summary::of(&backs);
            let done = group.iter().filter(|r| r.completed()).count();
            AggregateRow {
                method: method.name().to_string(),
                size,
                episodes: group.len(),
                steps_mean: s.mean,
                steps_median: s.median,
                steps_stddev: s.stddev,
                backtracks_mean: b.mean,
                backtracks_median: b.median,
                backtracks_stddev: b.stddev,
                completion_rate: done as f64 / group.len() as f64,
                cap: default_cap(size),
            }
        })
        .collect();
    Ok(AggregateResult { rows })
}

pub fn write_aggregate(agg: &AggregateResult, path: &Path) -> Result<()> {
    write_rows(path, &agg.rows)
}

pub fn read_episodes(path: &Path) -> Result<Vec<EpisodeRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    Ok(reader.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn read_aggregate(path: &Path) -> Result<AggregateResult> {
    let mut reader = csv::Reader::from_path(path)?;
    Ok(AggregateResult {
        rows: reader.deserialize().collect::<std::result::Result<_, _>>()?,
    })
}

/// Start cells recorded in an episode row.
pub fn row_starts(row: &EpisodeRow) -> Result<Vec<HexCoord>> {
    parse_starts(&row.starts)
}

/// Mean coverage per step over a set of curves. A curve that ends early is
/// extended with its final value, which is 1.0 for every completed episode.
pub fn mean_curve(curves: &[Vec<(usize, f64)>]) -> Result<Vec<(usize, f64)>> {
    if curves.is_empty() || curves.iter().any(|c| c.is_empty()) {
        return Err(Error::Config("no coverage curves to average".into()));
    }
    let len = curves.iter().map(Vec::len).max().expect("non-empty");
    Ok((0..len)
        .map(|step| {
            let sum: f64 = curves.iter().map(|c| c.get(step).unwrap_or(c.last().expect("non-empty")).1).sum();
            (step, sum / curves.len() as f64)
        })
        .collect())
}

/// File name of the curve for one (method, size) group.
pub fn curve_file_name(method: Method, size: usize) -> String {
    format!("curve_{}_g{size}.csv", method.name())
}

/// Reads `coverage.csv` from `in_dir` and writes one mean-coverage curve per
/// (method, size) to `out_dir`. Returns the written paths in key order.
/// Per (size, method): coverage points of each episode, keyed by maze index.
type CurveGroups = BTreeMap<(usize, Method), BTreeMap<usize, Vec<(usize, f64)>>>;

pub fn emit_curves(in_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let path = in_dir.join(COVERAGE_FILE);
    if !path.exists() {
        return Err(Error::Config(format!("{} not found", path.display())));
    }
    let mut reader = csv::Reader::from_path(&path)?;
    let mut groups = CurveGroups::new();
    for row in reader.deserialize::<CoverageRow>() {
        let row = row?;
        groups
            .entry((row.size, row.method.parse()?))
            .or_default()
            .entry(row.maze_index)
            .or_default()
            .push((row.step, row.coverage));
    }
    if groups.is_empty() {
        return Err(Error::Config(format!("{} holds no coverage rows", path.display())));
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for ((size, method), episodes) in groups {
        let curves: Vec<Vec<(usize, f64)>> = episodes.into_values().collect();
        let mean = mean_curve(&curves)?;
        let file = out_dir.join(curve_file_name(method, size));
        let mut w = csv::Writer::from_path(&file)?;
        w.write_record(["step", "mean_coverage"])?;
        for (step, c) in mean {
            w.write_record([step.to_string(), format!("{c:.6}")])?;
        }
        w.flush()?;
        written.push(file);
    }
    Ok(written)
}

/// Text and CSV renderings of the same comparison grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub text: String,
    pub csv: String,
}

/// How a mean appears in both renderings: one decimal, or `>CAP` when some
/// episode hit the timestep cap.
pub fn cell_value(row: &AggregateRow, backtracks: bool) -> String {
    if row.censored() {
        format!(">{}", row.cap)
    } else if backtracks {
        format!("{:.1}", row.backtracks_mean)
    } else {
        format!("{:.1}", row.steps_mean)
    }
}

/// Methods by sizes grid with a simulation-steps and a backtrack-count column
/// group. In the text rendering the smallest uncensored value of each column
/// is marked with `*` when more than one method is compared.
pub fn compare_table(agg: &AggregateResult) -> Table {
    let sizes: Vec<usize> = agg.rows.iter().map(|r| r.size).collect::<BTreeSet<_>>().into_iter().collect();
    let methods: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| agg.rows.iter().any(|r| r.method == m.name()))
        .collect();
    let compare = methods.len() > 1;

    let mut columns: Vec<(bool, usize)> = Vec::new();
    for backtracks in [false, true] {
        for &s in &sizes {
            columns.push((backtracks, s));
        }
    }
    let best: Vec<Option<f64>> = columns
        .iter()
        .map(|&(backtracks, size)| {
            methods
                .iter()
                .filter_map(|&m| agg.get(m, size))
                .filter(|r| !r.censored())
                .map(|r| if backtracks { r.backtracks_mean } else { r.steps_mean })
                .min_by(f64::total_cmp)
        })
        .collect();

    let mut csv = String::from("method");
    for &(backtracks, size) in &columns {
        let group = if backtracks { "backtracks" } else { "steps" };
        let _ = write!(csv, ",{group}_g{size}");
    }
    csv.push('\n');

    let label_width = methods.iter().map(|m| m.label().len()).max().unwrap_or(6).max(6);
    let steps_title = "Simulation Steps";
    let width = 10.max(steps_title.len().div_ceil(sizes.len().max(1)));
    let group_width = (width + 1) * sizes.len() - 1;
    let mut text = format!(
        "{:label_width$} | {:<group_width$} | {}\n",
        "",
        steps_title,
        "Backtrack Count"
    );
    let mut header = format!("{:label_width$} |", "Method");
    for (i, &(_, size)) in columns.iter().enumerate() {
        if i == sizes.len() {
            header.push_str(" |");
        }
        let _ = write!(header, " {:>width$}", format!("G{size}"));
    }
    text.push_str(&header);
    text.push('\n');
    text.push_str(&"-".repeat(header.len()));
    text.push('\n');

    for &m in &methods {
        let _ = write!(csv, "{}", m.name());
        let mut line = format!("{:label_width$} |", m.label());
        for (i, &(backtracks, size)) in columns.iter().enumerate() {
            if i == sizes.len() {
                line.push_str(" |");
            }
            let (shown, mark) = match agg.get(m, size) {
                Some(r) => {
                    let v = if backtracks { r.backtracks_mean } else { r.steps_mean };
                    let is_best = compare && !r.censored() && best[i] == Some(v);
                    (cell_value(r, backtracks), if is_best { "*" } else { "" })
                }
                None => ("-".to_string(), ""),
            };
            let _ = write!(csv, ",{shown}");
            let _ = write!(line, " {:>width$}", format!("{shown}{mark}"));
        }
        csv.push('\n');
        text.push_str(line.trim_end());
        text.push('\n');
    }
    if compare {
        text.push_str("* smallest value in the column\n");
    }
    Table { text, csv }
}

//! Line-oriented episode traces.
//!
//! ```text
//! # hexplore trace v1 size=10 starts=3,4;0,0;9,2;5,5
//! 1 0 3 4 4 4 E
//! 1 1 0 0 0 0 C
//! ```
//!
//! One record per agent per simulation step:
//! `step agent from_col from_row to_col to_row mode`, where mode is `E`
//! (exploring or network-controlled move, or idle), `T` (travel through
//! visited cells, counted as a backtrack) or `C` (collision).

use std::fmt;
use std::io::{BufRead, Write};

use super::{EpisodeMetrics, Termination};
use crate::error::{Error, Result};
use crate::hexgrid::HexCoord;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    Explore,
    Travel,
    Collision,
}

impl TraceMode {
    pub fn code(self) -> char {
        match self {
            TraceMode::Explore => 'E',
            TraceMode::Travel => 'T',
            TraceMode::Collision => 'C',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub step: usize,
    pub agent: usize,
    pub from: HexCoord,
    pub to: HexCoord,
    pub mode: TraceMode,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {} {}",
            self.step,
            self.agent,
            self.from.col,
            self.from.row,
            self.to.col,
            self.to.row,
            self.mode.code()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub size: usize,
    pub starts: Vec<HexCoord>,
    pub max_timesteps: usize,
    pub records: Vec<TraceRecord>,
}

pub fn format_starts(starts: &[HexCoord]) -> String {
    starts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

pub fn parse_starts(s: &str) -> Result<Vec<HexCoord>> {
    s.split(';')
        .map(|pair| {
            let (c, r) = pair
                .trim()
                .split_once(',')
                .ok_or_else(|| Error::InvalidStarts(format!("`{pair}` is not `col,row`")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidStarts(format!("`{pair}` is not `col,row`")))
            };
            Ok(HexCoord::new(parse(c)?, parse(r)?))
        })
        .collect()
}

impl Trace {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# hexplore trace v1 size={} cap={} starts={}",
            self.size,
            self.max_timesteps,
            format_starts(&self.starts)
        )?;
        for r in &self.records {
            writeln!(out, "{r}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Trace> {
        let bad = |m: String| Error::Config(format!("invalid trace: {m}"));
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| bad("empty".into()))??;
        let fields: Vec<&str> = header
            .strip_prefix("# hexplore trace v1 ")
            .ok_or_else(|| bad(format!("bad header `{header}`")))?
            .split(' ')
            .collect();
        let field = |key: &str| {
            fields
                .iter()
                .find_map(|f| f.strip_prefix(key))
                .ok_or_else(|| bad(format!("header lacks `{key}`")))
        };
        let size = field("size=")?.parse().map_err(|_| bad("size".into()))?;
        let max_timesteps = field("cap=")?.parse().map_err(|_| bad("cap".into()))?;
        let starts = parse_starts(field("starts=")?)?;
        let mut records = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let t: Vec<&str> = line.split(' ').collect();
            if t.len() != 7 {
                return Err(bad(format!("record `{line}`")));
            }
            let n = |i: usize| t[i].parse::<usize>().map_err(|_| bad(format!("record `{line}`")));
            let mode = match t[6] {
                "E" => TraceMode::Explore,
                "T" => TraceMode::Travel,
                "C" => TraceMode::Collision,
                _ => return Err(bad(format!("mode in `{line}`"))),
            };
            records.push(TraceRecord {
                step: n(0)?,
                agent: n(1)?,
                from: HexCoord::new(n(2)?, n(3)?),
                to: HexCoord::new(n(4)?, n(5)?),
                mode,
            });
        }
        Ok(Trace {
            size,
            starts,
            max_timesteps,
            records,
        })
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ASCII")
    }

    /// Rebuilds the episode metrics from the trace alone.
    pub fn metrics(&self) -> EpisodeMetrics {
        let total = self.size * self.size;
        let mut visited = vec![false; total];
        let mut count = 0;
        let mut mark = |c: HexCoord, count: &mut usize| {
            let i = c.index(self.size);
            if !visited[i] {
                visited[i] = true;
                *count += 1;
            }
        };
        for &s in &self.starts {
            mark(s, &mut count);
        }
        let mut curve = vec![(0, count as f64 / total as f64)];
        let steps = self.records.last().map_or(0, |r| r.step);
        let mut backtracks = 0;
        let mut i = 0;
        for step in 1..=steps {
            while i < self.records.len() && self.records[i].step == step {
                let r = &self.records[i];
                mark(r.to, &mut count);
                if r.mode == TraceMode::Travel {
                    backtracks += 1;
                }
                i += 1;
            }
            curve.push((step, count as f64 / total as f64));
        }
        let termination = if count == total {
            Termination::FullyExplored
        } else {
            Termination::TimestepCap
        };
        EpisodeMetrics {
            simulation_steps: steps,
            backtrack_count: backtracks,
            coverage_curve: curve,
            termination,
        }
    }
}

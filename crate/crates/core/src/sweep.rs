//! Multi-run parameter sweeps with derived seeds, and summary statistics.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Result, SimError};
use crate::fmt::g17;
use crate::metrics::{CsvError, Series};
use crate::models;
use crate::rng::run_seed;
use crate::sim::{run_headless, StopRule};
use crate::world::WorldConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub model: String,
    /// Values tried for each varied parameter.
    pub grid: BTreeMap<String, Vec<f64>>,
    pub repetitions: u32,
    pub base_seed: u64,
    pub stop: StopRule,
    #[serde(default)]
    pub world: WorldConfig,
    /// Parameters held fixed across the sweep.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let model = models::lookup(&self.model)?;
        if self.grid.is_empty() {
            return Err(SimError::Config("sweep grid is empty".into()));
        }
        if self.repetitions == 0 {
            return Err(SimError::Config("repetitions must be at least 1".into()));
        }
        for (name, values) in &self.grid {
            if values.is_empty() {
                return Err(SimError::Config(format!("no values for {name}")));
            }
            let spec = model.param(name)?;
            values.iter().try_for_each(|&v| spec.check(v))?;
        }
        model.resolve(&self.params)?;
        self.world.validate()
    }

    /// Grid points in lexicographic order, last parameter varying fastest.
    pub fn points(&self) -> Vec<BTreeMap<String, f64>> {
        let mut points = vec![BTreeMap::new()];
        for (name, values) in &self.grid {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.insert(name.clone(), v);
                        q
                    })
                })
                .collect();
        }
        points
    }

    pub fn run_count(&self) -> usize {
        self.grid.values().map(Vec::len).product::<usize>() * self.repetitions as usize
    }

    /// Configuration of run `index`: grid point `index / repetitions`,
    /// seed `run_seed(base_seed, index)`.
    pub fn run_config(&self, index: usize) -> (SimConfig, BTreeMap<String, f64>) {
        let point = self.points().swap_remove(index / self.repetitions as usize);
        let mut params = self.params.clone();
        params.extend(point.clone());
        let mut world = self.world.clone();
        world.seed = run_seed(self.base_seed, index as u64);
        (
            SimConfig {
                world,
                model: self.model.clone(),
                params,
            },
            point,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_index: usize,
    pub seed: u64,
    /// Values of the varied parameters.
    pub params: BTreeMap<String, f64>,
    /// Final reporter values in registration order.
    pub metrics: Vec<(String, f64)>,
    pub ticks: u64,
    pub wall_time: f64,
    pub error: Option<String>,
}

impl RunRecord {
    /// Equality ignoring wall-clock time.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        let bits = |m: &[(String, f64)]| m.iter().map(|(k, v)| (k.clone(), v.to_bits())).collect::<Vec<_>>();
        self.run_index == other.run_index
            && self.seed == other.seed
            && self.params == other.params
            && bits(&self.metrics) == bits(&other.metrics)
            && self.ticks == other.ticks
            && self.error == other.error
    }
}

pub struct SweepResult {
    pub records: Vec<RunRecord>,
    /// Recorded series per run (empty for failed runs).
    pub series: Vec<Series>,
}

fn execute_run(spec: &SweepSpec, index: usize) -> (RunRecord, Series) {
    let (config, point) = spec.run_config(index);
    let started = Instant::now();
    let outcome = run_headless(&config, &spec.stop);
    let wall_time = started.elapsed().as_secs_f64();
    let mut record = RunRecord {
        run_index: index,
        seed: config.world.seed,
        params: point,
        metrics: Vec::new(),
        ticks: 0,
        wall_time,
        error: None,
    };
    match outcome {
        Ok(sim) => {
            let state = sim.state();
            record.ticks = state.tick;
            record.metrics = state
                .reporters()
                .iter()
                .map(|r| r.name.clone())
                .zip(state.sample_reporters())
                .collect();
            let series = state.series().clone();
            (record, series)
        }
        Err(e) => {
            record.error = Some(e.to_string());
            (record, Series::default())
        }
    }
}

/// Runs every grid point `repetitions` times on up to `parallelism`
/// threads. Records come back in run-index order whatever the thread count.
/// A failing run is recorded with its error and the sweep carries on.
pub fn run_experiment(spec: &SweepSpec, parallelism: usize) -> Result<SweepResult> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| SimError::Other(e.to_string()))?;
    let runs: Vec<(RunRecord, Series)> =
        pool.install(|| (0..spec.run_count()).into_par_iter().map(|i| execute_run(spec, i)).collect());
    let (records, series) = runs.into_iter().unzip();
    Ok(SweepResult { records, series })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 when `n == 1`.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Set when `n == 1` and `std` is therefore not defined.
    pub single: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub key: Vec<(String, f64)>,
    pub metrics: Vec<MetricSummary>,
}

/// Mean, sample std, min and max of every metric per group of equal
/// `group_by` values. Failed runs are left out. Groups are ordered by their
/// parameter values.
pub fn summarize(records: &[RunRecord], group_by: &[&str]) -> Result<Vec<GroupSummary>> {
    let ok: Vec<&RunRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    if ok.is_empty() {
        return Err(SimError::EmptySet);
    }
    let mut groups: Vec<(Vec<f64>, Vec<&RunRecord>)> = Vec::new();
    for r in ok {
        let key = group_by
            .iter()
            .map(|g| r.params.get(*g).copied().ok_or_else(|| SimError::UnknownParam(g.to_string())))
            .collect::<Result<Vec<f64>>>()?;
        match groups.iter_mut().find(|(k, _)| k.iter().zip(&key).all(|(a, b)| a.to_bits() == b.to_bits())) {
            Some((_, members)) => members.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(groups
        .into_iter()
        .map(|(key, members)| {
            let names: Vec<&String> = members[0].metrics.iter().map(|(n, _)| n).collect();
            let metrics = names
                .into_iter()
                .map(|name| {
                    let xs: Vec<f64> = members
                        .iter()
                        .filter_map(|r| r.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v))
                        .collect();
                    describe(name, &xs)
                })
                .collect();
            GroupSummary {
                key: group_by.iter().map(|g| g.to_string()).zip(key).collect(),
                metrics,
            }
        })
        .collect())
}

fn describe(name: &str, xs: &[f64]) -> MetricSummary {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    MetricSummary {
        metric: name.to_string(),
        n,
        mean,
        std,
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        single: n == 1,
    }
}

/// `run_index,seed,<params>,ticks,wall_time,error,<metrics>`
pub fn write_runs_csv<W: Write>(mut out: W, records: &[RunRecord]) -> std::io::Result<()> {
    let params: Vec<&String> = records.first().map(|r| r.params.keys().collect()).unwrap_or_default();
    let metrics: Vec<&String> = records
        .iter()
        .find(|r| r.error.is_none())
        .map(|r| r.metrics.iter().map(|(n, _)| n).collect())
        .unwrap_or_default();
    let mut header = vec!["run_index".to_string(), "seed".into()];
    header.extend(params.iter().map(|p| p.to_string()));
    header.extend(["ticks".into(), "wall_time".into(), "error".into()]);
    header.extend(metrics.iter().map(|m| m.to_string()));
    writeln!(out, "{}", header.join(","))?;
    for r in records {
        let mut row = vec![r.run_index.to_string(), r.seed.to_string()];
        row.extend(params.iter().map(|p| r.params.get(*p).map_or(String::new(), |v| g17(*v))));
        row.push(r.ticks.to_string());
        row.push(g17(r.wall_time));
        row.push(r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"));
        row.extend(metrics.iter().map(|m| {
            r.metrics
                .iter()
                .find(|(n, _)| n == *m)
                .map_or(String::new(), |(_, v)| g17(*v))
        }));
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

/// Writes `runs.csv` and `series/run_<i>.csv` under `dir`.
pub fn write_outputs(dir: impl AsRef<Path>, result: &SweepResult) -> Result<(), CsvError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir.join("series"))?;
    let f = std::fs::File::create(dir.join("runs.csv"))?;
    write_runs_csv(std::io::BufWriter::new(f), &result.records)?;
    for (r, s) in result.records.iter().zip(&result.series) {
        if r.error.is_none() {
            crate::metrics::export_csv(s, dir.join("series").join(format!("run_{}.csv", r.run_index)))?;
        }
    }
    Ok(())
}

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ivote_core::datagen::ProblemInstance;
use ivote_core::voting::{OperationCounts, Tolerance, VoteResult};
use ivote_core::ModelTag;

use crate::config::Algo;
use crate::BenchError;

/// One algorithm run on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub sweep_value: f64,
    pub algo: Algo,
    pub model: ModelTag,
    pub repeat: usize,
    pub seed: u64,
    pub eps_min: f64,
    /// Winning point in physical units.
    pub params: Vec<f64>,
    /// Winning point in the normalized voting cube.
    pub point: Vec<f64>,
    pub count: usize,
    pub inlier_ids: Vec<u32>,
    pub ops: OperationCounts,
    pub wall_ms: f64,
    pub truncated: bool,
}

impl RunRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        inst: &ProblemInstance<f64>,
        algo: Algo,
        sweep_value: f64,
        repeat: usize,
        seed: u64,
        tol: &Tolerance<f64>,
        r: VoteResult<f64>,
        wall_ms: f64,
    ) -> Self {
        Self {
            sweep_value,
            algo,
            model: inst.model_tag,
            repeat,
            seed,
            eps_min: tol.min_eps(),
            params: inst.space_map.point_from_unit(&r.point),
            point: r.point,
            count: r.count,
            inlier_ids: r.inlier_ids,
            ops: r.ops_counter,
            wall_ms,
            truncated: r.truncated,
        }
    }

    pub fn dominant_ops(&self) -> u64 {
        self.algo.dominant_ops(&self.ops)
    }
}

/// Median and quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    /// Linear interpolation between order statistics.
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            if v.is_empty() {
                return f64::NAN;
            }
            let pos = q * (v.len() - 1) as f64;
            let (i, frac) = (pos.floor() as usize, pos.fract());
            let next = v[(i + 1).min(v.len() - 1)];
            v[i] + (next - v[i]) * frac
        };
        Self {
            q1: at(0.25),
            median: at(0.5),
            q3: at(0.75),
        }
    }
}

/// Repeats of one algorithm at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sweep_value: f64,
    pub algo: Algo,
    pub runs: usize,
    pub count: Quartiles,
    pub dominant_ops: Quartiles,
    pub wall_ms: Quartiles,
}

pub fn aggregate(runs: &[RunRecord]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(u64, Algo), Vec<&RunRecord>> = BTreeMap::new();
    for r in runs {
        groups.entry((r.sweep_value.to_bits(), r.algo)).or_default().push(r);
    }
    let mut out: Vec<Aggregate> = groups
        .into_iter()
        .map(|((v, algo), rs)| Aggregate {
            sweep_value: f64::from_bits(v),
            algo,
            runs: rs.len(),
            count: Quartiles::of(&rs.iter().map(|r| r.count as f64).collect::<Vec<_>>()),
            dominant_ops: Quartiles::of(&rs.iter().map(|r| r.dominant_ops() as f64).collect::<Vec<_>>()),
            wall_ms: Quartiles::of(&rs.iter().map(|r| r.wall_ms).collect::<Vec<_>>()),
        })
        .collect();
    out.sort_by(|a, b| a.sweep_value.total_cmp(&b.sweep_value).then(a.algo.cmp(&b.algo)));
    out
}

/// Fixed CSV schema, one row per run.
pub const CSV_HEADER: [&str; 10] = [
    "sweep_value",
    "algo",
    "model",
    "eps_min",
    "count",
    "box_intersection_calls",
    "surface_evaluations",
    "cells_touched",
    "wall_ms",
    "truncated",
];

#[derive(Debug, Serialize, Deserialize)]
pub struct CsvRow {
    pub sweep_value: f64,
    pub algo: Algo,
    pub model: ModelTag,
    pub eps_min: f64,
    pub count: usize,
    pub box_intersection_calls: u64,
    pub surface_evaluations: u64,
    pub cells_touched: u64,
    pub wall_ms: f64,
    pub truncated: bool,
}

impl From<&RunRecord> for CsvRow {
    fn from(r: &RunRecord) -> Self {
        Self {
            sweep_value: r.sweep_value,
            algo: r.algo,
            model: r.model,
            eps_min: r.eps_min,
            count: r.count,
            box_intersection_calls: r.ops.box_intersection_calls,
            surface_evaluations: r.ops.surface_evaluations,
            cells_touched: r.ops.cells_touched,
            wall_ms: r.wall_ms,
            truncated: r.truncated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: ModelTag,
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl RunReport {
    pub fn csv_string(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.runs {
            w.serialize(CsvRow::from(r))?;
        }
        if self.runs.is_empty() {
            w.write_record(CSV_HEADER)?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Runtime(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), BenchError> {
        std::fs::write(path, self.csv_string()?)?;
        Ok(())
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<(), BenchError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub fn read_csv(text: &str) -> Result<Vec<CsvRow>, BenchError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(BenchError::Runtime(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(BenchError::from)).collect()
}

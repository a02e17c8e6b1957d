use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use ivote_core::ModelTag;

use crate::config::Algo;
use crate::report::{Aggregate, RunReport};
use crate::BenchError;

/// Where recursive voting's median dominant-operation count first drops
/// below a baseline's and stays below for the rest of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub baseline: Algo,
    pub measured: Option<f64>,
    /// `1/ε^(l + d - 2k)`: where `n + 1/ε^(l+d-k)` falls below `n/ε^k`.
    pub predicted_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub model: ModelTag,
    pub sweep_values: Vec<f64>,
    pub crossovers: Vec<Crossover>,
    pub table: String,
}

/// Exponent of `1/ε` in the size beyond which recursive voting beats grid
/// voting.
pub fn predicted_exponent(model: ModelTag, ambient: usize) -> i32 {
    let dims = model.expected_dims(ambient);
    dims.l as i32 + dims.d as i32 - 2 * dims.k as i32
}

fn medians(aggs: &[Aggregate], algo: Algo) -> Vec<(f64, f64)> {
    aggs.iter()
        .filter(|a| a.algo == algo)
        .map(|a| (a.sweep_value, a.dominant_ops.median))
        .collect()
}

/// Crossover table of `gv` against every other algorithm in the reports.
/// All reports must share the model and the sweep values.
pub fn compare_algorithms(reports: &[RunReport]) -> Result<Comparison, BenchError> {
    let first = reports
        .first()
        .ok_or_else(|| BenchError::Usage("no reports to compare".into()))?;
    let model = first.model;
    let sweep = |r: &RunReport| -> Vec<u64> {
        r.runs.iter().map(|x| x.sweep_value.to_bits()).collect::<BTreeSet<_>>().into_iter().collect()
    };
    let values = sweep(first);
    for r in reports {
        if r.model != model {
            return Err(BenchError::Usage(format!("reports mix {} and {}", model, r.model)));
        }
        if sweep(r) != values {
            return Err(BenchError::Usage("reports cover different sweep values".into()));
        }
    }
    let mut aggs: Vec<Aggregate> = reports.iter().flat_map(|r| r.aggregates.iter().cloned()).collect();
    aggs.sort_by(|a, b| a.sweep_value.total_cmp(&b.sweep_value).then(a.algo.cmp(&b.algo)));
    let values: Vec<f64> = values.into_iter().map(f64::from_bits).collect();

    let eps_min = reports
        .iter()
        .flat_map(|r| r.runs.iter().map(|x| x.eps_min))
        .fold(f64::INFINITY, f64::min);
    let ambient = first.runs.first().map(|r| r.params.len()).unwrap_or(0);
    let predicted_n = (1.0 / eps_min).powi(predicted_exponent(model, ambient));

    let algos: BTreeSet<Algo> = aggs.iter().map(|a| a.algo).collect();
    let gv = medians(&aggs, Algo::Gv);
    let mut crossovers = Vec::new();
    if !gv.is_empty() {
        for &b in algos.iter().filter(|&&a| a != Algo::Gv) {
            let base = medians(&aggs, b);
            let below: Vec<(f64, bool)> = gv
                .iter()
                .filter_map(|&(v, g)| base.iter().find(|x| x.0 == v).map(|x| (v, g < x.1)))
                .collect();
            let measured = (0..below.len())
                .find(|&i| below[i..].iter().all(|x| x.1))
                .map(|i| below[i].0);
            crossovers.push(Crossover { baseline: b, measured, predicted_n });
        }
    }

    let mut table = String::new();
    let _ = write!(table, "{:>12}", "sweep");
    for a in &algos {
        let _ = write!(table, " {:>14}", a.as_str());
    }
    table.push('\n');
    for &v in &values {
        let _ = write!(table, "{v:>12}");
        for &a in &algos {
            match aggs.iter().find(|x| x.algo == a && x.sweep_value == v) {
                Some(x) => {
                    let _ = write!(table, " {:>14.0}", x.dominant_ops.median);
                }
                None => {
                    let _ = write!(table, " {:>14}", "-");
                }
            }
        }
        table.push('\n');
    }
    for c in &crossovers {
        let measured = c.measured.map_or("none".to_string(), |v| format!("{v}"));
        let _ = writeln!(
            table,
            "gv below {}: from {measured} (predicted n > {:.3e})",
            c.baseline, c.predicted_n
        );
    }
    Ok(Comparison {
        model,
        sweep_values: values,
        crossovers,
        table,
    })
}

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use ivote_core::voting::OperationCounts;
use ivote_core::ModelTag;

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Naive,
    Gv,
    Bnb,
    Ransac,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::Naive, Algo::Gv, Algo::Bnb, Algo::Ransac];

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Naive => "naive",
            Algo::Gv => "gv",
            Algo::Bnb => "bnb",
            Algo::Ransac => "ransac",
        }
    }

    /// The counter that dominates the algorithm's running time: grid cells
    /// for naive voting, box tests for the recursions, and surface
    /// evaluations (hypothesis scoring) for RANSAC.
    pub fn dominant_ops(self, ops: &OperationCounts) -> u64 {
        match self {
            Algo::Naive => ops.cells_touched,
            Algo::Gv | Algo::Bnb => ops.box_intersection_calls,
            Algo::Ransac => ops.surface_evaluations,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Algo::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| BenchError::Usage(format!("unknown algorithm `{s}` (naive, gv, bnb, ransac)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    N,
    InlierFrac,
    Eps,
}

impl FromStr for SweepAxis {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "n" => Ok(SweepAxis::N),
            "inlier-frac" | "inlier_frac" => Ok(SweepAxis::InlierFrac),
            "eps" => Ok(SweepAxis::Eps),
            _ => Err(BenchError::Usage(format!("unknown sweep axis `{s}` (n, inlier-frac, eps)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Parameters of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    /// Items for fitting models; scene points for pose models.
    pub n: usize,
    pub inlier_frac: f64,
    /// Dependent-coordinate noise for fitting models, degrees for pose models.
    pub noise: f64,
    /// Ambient dimension of hyperplane instances.
    pub dim: usize,
    /// Candidate matches per scene point (pose models).
    pub matches_per_point: usize,
    /// Correspondence-free pose instances pair every point with each of this
    /// many bearings, and voting counts one-to-one matches.
    pub bearings: Option<usize>,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n: 1000,
            inlier_frac: 0.1,
            noise: 0.001,
            dim: 3,
            matches_per_point: 7,
            bearings: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InstanceSource {
    File(PathBuf),
    Generate(GenParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RansacSettings {
    /// Inlier bound `b`; `None` takes the planted (or generated) fraction.
    pub inlier_bound: Option<f64>,
    pub confidence: f64,
    pub max_iterations: u64,
}

impl Default for RansacSettings {
    fn default() -> Self {
        Self {
            inlier_bound: None,
            confidence: 0.99,
            max_iterations: ivote_core::baselines::DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelTag,
    pub algos: Vec<Algo>,
    /// One ε per voting coordinate, or a single value for all of them.
    pub eps: Vec<f64>,
    pub instance: InstanceSource,
    pub sweep: Option<Sweep>,
    pub repeat: usize,
    pub seed: u64,
    /// CSV output; a JSON report is written next to it.
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub ransac: RansacSettings,
    /// Depth of parallel exploration in the recursions.
    pub parallel_depth: u32,
}

impl ExperimentConfig {
    pub fn new(model: ModelTag, algos: Vec<Algo>, eps: Vec<f64>, instance: InstanceSource) -> Self {
        Self {
            model,
            algos,
            eps,
            instance,
            sweep: None,
            repeat: 1,
            seed: 0,
            out: None,
            threads: None,
            ransac: RansacSettings::default(),
            parallel_depth: 1,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.algos.is_empty() {
            return Err(BenchError::Usage("no algorithm given".into()));
        }
        if self.repeat == 0 {
            return Err(BenchError::Usage("repeat must be at least 1".into()));
        }
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(BenchError::Usage(format!("ε values {:?} must lie in (0, 1]", self.eps)));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() || s.values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(BenchError::Usage(format!("sweep values {:?} must be positive", s.values)));
            }
            if matches!(self.instance, InstanceSource::File(_)) && s.axis != SweepAxis::Eps {
                return Err(BenchError::Usage("only ε can be swept over a fixed instance file".into()));
            }
        }
        if let InstanceSource::Generate(g) = &self.instance {
            if !(0.0..=1.0).contains(&g.inlier_frac) {
                return Err(BenchError::Usage(format!("inlier fraction {} outside [0, 1]", g.inlier_frac)));
            }
        }
        if let Some(out) = &self.out {
            if out.extension().is_some_and(|e| e == "json") {
                return Err(BenchError::Usage(format!(
                    "{} would be overwritten by the JSON report; give a .csv path",
                    out.display()
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(BenchError::Usage("thread count must be positive".into()));
        }
        Ok(())
    }
}

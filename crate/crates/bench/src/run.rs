use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use ivote_core::baselines::{branch_and_bound_with, ransac_fit, RansacConfig};
use ivote_core::datagen::{
    gen_alignment_instance, gen_correspondence_free_instance, gen_hyperplane_instance,
    gen_line_instance, gen_pose_instance, gen_ray_instance, load_instance, AlignmentBracket,
    ProblemInstance,
};
use ivote_core::voting::{generalized_vote, naive_vote, GvConfig, MatchLabels, Tolerance, VoteResult};
use ivote_core::{with_model, AaBox, ModelTag};

use crate::config::{Algo, ExperimentConfig, GenParams, InstanceSource, SweepAxis};
use crate::report::{aggregate, RunRecord, RunReport};
use crate::BenchError;

/// Generates an instance of `tag`. Pose noise is in degrees.
pub fn generate(tag: ModelTag, g: &GenParams, seed: u64) -> Result<ProblemInstance<f64>, BenchError> {
    let planted = (g.n as f64 * g.inlier_frac).round() as usize;
    Ok(match tag {
        ModelTag::Line2 => gen_line_instance(g.n, g.inlier_frac, g.noise, seed)?,
        ModelTag::Hyperplane => gen_hyperplane_instance(g.dim, g.n, g.inlier_frac, g.noise, seed)?,
        ModelTag::Ray3 => gen_ray_instance(g.n, planted, seed)?,
        ModelTag::Sim2 => gen_alignment_instance(g.n, g.inlier_frac, AlignmentBracket::default(), seed)?,
        pose => match g.bearings {
            Some(b) => gen_correspondence_free_instance(pose, g.n, b, g.inlier_frac, g.noise, seed)?,
            None => gen_pose_instance(pose, g.n, g.matches_per_point, g.inlier_frac, g.noise, seed)?,
        },
    })
}

/// Per-coordinate tolerance for a `d`-dimensional model; one value is
/// broadcast.
pub fn tolerance(eps: &[f64], d: usize) -> Result<Tolerance<f64>, BenchError> {
    let v = match eps.len() {
        1 => vec![eps[0]; d],
        n if n == d => eps.to_vec(),
        n => return Err(BenchError::Usage(format!("{n} ε values for a {d}-dimensional model"))),
    };
    Ok(Tolerance::new(v, 1.0)?)
}

/// Knobs of a single run beyond the algorithm and tolerance.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub matching: Option<Arc<MatchLabels>>,
    pub parallel_depth: Option<u32>,
    pub ransac_inlier_bound: Option<f64>,
    pub ransac_confidence: Option<f64>,
    pub ransac_max_iterations: Option<u64>,
}

/// Runs one algorithm on one instance. Returns the vote result (normalized
/// coordinates) and the wall time in milliseconds.
pub fn run_algorithm(
    inst: &ProblemInstance<f64>,
    algo: Algo,
    tol: &Tolerance<f64>,
    opts: &RunOptions,
) -> Result<(VoteResult<f64>, f64), BenchError> {
    let model = inst.model()?;
    let surfaces = inst.surfaces(&model)?;
    let bx = AaBox::unit(inst.dim());
    let gv = GvConfig {
        matching: opts.matching.clone(),
        parallel_depth: opts.parallel_depth.unwrap_or(GvConfig::default().parallel_depth),
        ..GvConfig::default()
    };
    let start = Instant::now();
    let result = match algo {
        Algo::Naive => with_model!(&model, m => naive_vote(m, &surfaces, &bx, tol))?,
        Algo::Gv => with_model!(&model, m => generalized_vote(m, &surfaces, &bx, tol, &gv))?,
        Algo::Bnb => with_model!(&model, m => branch_and_bound_with(m, &surfaces, &bx, tol, &gv))?,
        Algo::Ransac => {
            let b = opts
                .ransac_inlier_bound
                .or_else(|| planted_fraction(inst))
                .ok_or_else(|| BenchError::Usage("RANSAC needs an inlier bound".into()))?;
            let mut cfg = RansacConfig::new(b, opts.ransac_confidence.unwrap_or(0.99), tol.clone(), opts.seed);
            if let Some(cap) = opts.ransac_max_iterations {
                cfg.max_iterations = cap;
            }
            ransac_fit(inst, inst.model_tag, &cfg)?
        }
    };
    Ok((result, start.elapsed().as_secs_f64() * 1e3))
}

/// Planted inlier fraction, floored so that RANSAC stays finite on
/// instances without planted inliers.
fn planted_fraction(inst: &ProblemInstance<f64>) -> Option<f64> {
    let gt = inst.ground_truth.as_ref()?;
    let n = inst.len().max(1) as f64;
    Some((gt.inlier_ids.len() as f64 / n).clamp(1.0 / n, 1.0))
}

struct Job {
    sweep_value: f64,
    repeat: usize,
    seed: u64,
    params: Option<GenParams>,
    eps: Vec<f64>,
}

fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let base = match &cfg.instance {
        InstanceSource::Generate(g) => Some(g.clone()),
        InstanceSource::File(_) => None,
    };
    let points: Vec<(f64, Option<GenParams>, Vec<f64>)> = match &cfg.sweep {
        None => vec![(0.0, base.clone(), cfg.eps.clone())],
        Some(s) => s
            .values
            .iter()
            .map(|&v| {
                let mut g = base.clone();
                let mut eps = cfg.eps.clone();
                match s.axis {
                    SweepAxis::N => {
                        if let Some(g) = &mut g {
                            g.n = v.round() as usize;
                        }
                    }
                    SweepAxis::InlierFrac => {
                        if let Some(g) = &mut g {
                            g.inlier_frac = v;
                        }
                    }
                    SweepAxis::Eps => eps = vec![v],
                }
                (v, g, eps)
            })
            .collect(),
    };
    let mut out = Vec::new();
    for (v, g, eps) in points {
        for r in 0..cfg.repeat {
            out.push(Job {
                sweep_value: v,
                repeat: r,
                seed: cfg.seed.wrapping_add(r as u64),
                params: g.clone(),
                eps: eps.clone(),
            });
        }
    }
    out
}

fn run_job(cfg: &ExperimentConfig, job: &Job, file: Option<&ProblemInstance<f64>>) -> Result<Vec<RunRecord>, BenchError> {
    let generated;
    let inst = match (&job.params, file) {
        (Some(g), _) => {
            generated = generate(cfg.model, g, job.seed)?;
            &generated
        }
        (None, Some(f)) => f,
        (None, None) => unreachable!("instance source resolved before running"),
    };
    if inst.model_tag != cfg.model {
        return Err(BenchError::Usage(format!(
            "instance holds {} data, not {}",
            inst.model_tag, cfg.model
        )));
    }
    let tol = tolerance(&job.eps, inst.dim())?;
    let matching = job
        .params
        .as_ref()
        .and_then(|g| g.bearings.map(|b| Arc::new(MatchLabels::grid(g.n, b))));
    let opts = RunOptions {
        seed: job.seed,
        matching,
        parallel_depth: Some(cfg.parallel_depth),
        ransac_inlier_bound: cfg.ransac.inlier_bound,
        ransac_confidence: Some(cfg.ransac.confidence),
        ransac_max_iterations: Some(cfg.ransac.max_iterations),
    };
    cfg.algos
        .iter()
        .map(|&algo| {
            let (r, wall_ms) = run_algorithm(inst, algo, &tol, &opts)?;
            Ok(RunRecord::new(inst, algo, job.sweep_value, job.repeat, job.seed, &tol, r, wall_ms))
        })
        .collect()
}

/// Runs every sweep point, repeat and algorithm of `cfg`. Sweep points run
/// concurrently; records come back in sweep order. When `cfg.out` is set the
/// CSV and JSON reports are written there.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport, BenchError> {
    cfg.validate()?;
    let file = match &cfg.instance {
        InstanceSource::File(p) => Some(load_instance::<f64>(p)?),
        InstanceSource::Generate(_) => None,
    };
    let body = || -> Result<RunReport, BenchError> {
        let jobs = jobs(cfg);
        let runs: Vec<Vec<RunRecord>> = jobs
            .par_iter()
            .map(|j| run_job(cfg, j, file.as_ref()))
            .collect::<Result<_, _>>()?;
        let runs: Vec<RunRecord> = runs.into_iter().flatten().collect();
        for r in runs.iter().filter(|r| r.truncated) {
            log::warn!("{} at sweep value {} hit its depth or iteration limit", r.algo, r.sweep_value);
        }
        Ok(RunReport {
            model: cfg.model,
            aggregates: aggregate(&runs),
            runs,
        })
    };
    let report = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| BenchError::Runtime(e.to_string()))?
            .install(body)?,
        None => body()?,
    };
    if let Some(out) = &cfg.out {
        report.write_csv(out)?;
        report.write_json(out.with_extension("json"))?;
    }
    Ok(report)
}

use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ivote_bench::{
    compare_algorithms, generate, run_experiment, thread_count, verify_inliers, Algo, BenchError,
    ExperimentConfig, GenParams, InstanceSource, RansacSettings, RunReport, Sweep, SweepAxis,
};
use ivote_core::datagen::{load_instance, save_instance};
use ivote_core::ModelTag;

#[derive(Parser)]
#[command(name = "ivote", version, about = "Voting-based robust model fitting benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance file.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run algorithms on one instance (generated or loaded).
    Run(RunArgs),
    /// Run algorithms over a sweep of n, inlier fraction or ε.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_parser = parse_axis)]
        sweep_axis: SweepAxis,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Filter the inliers of a pose report by angular reprojection error.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Angular threshold in radians.
        #[arg(long, default_value_t = 0.1)]
        threshold: f64,
        /// Where to write the filtered JSON report; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Crossover table of generalized voting against the baselines.
    Compare {
        /// JSON reports over a common sweep.
        #[arg(long = "report", required = true)]
        reports: Vec<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long, value_parser = parse_model)]
    model: ModelTag,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    inlier_frac: f64,
    /// Noise sigma; degrees for pose models.
    #[arg(long, default_value_t = 0.001)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ambient dimension of hyperplane instances.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Candidate matches per scene point (pose models).
    #[arg(long, default_value_t = 7)]
    matches: usize,
    /// Correspondence-free pose instance with this many bearings.
    #[arg(long)]
    bearings: Option<usize>,
}

impl GenArgs {
    fn params(&self) -> GenParams {
        GenParams {
            n: self.n,
            inlier_frac: self.inlier_frac,
            noise: self.noise,
            dim: self.dim,
            matches_per_point: self.matches,
            bearings: self.bearings,
        }
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    gen: GenArgs,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', value_parser = parse_algo, default_value = "gv")]
    algo: Vec<Algo>,
    /// Comma-separated ε per coordinate, or one value for all.
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    eps: Vec<f64>,
    /// Load this instance instead of generating one.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    /// CSV output path; the JSON report goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "IVOTE_THREADS")]
    threads: Option<usize>,
    /// RANSAC inlier bound; defaults to the planted fraction.
    #[arg(long)]
    ransac_b: Option<f64>,
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// Recursion levels explored in parallel.
    #[arg(long, default_value_t = 1)]
    parallel_depth: u32,
}

impl RunArgs {
    fn config(&self, sweep: Option<Sweep>) -> Result<ExperimentConfig, BenchError> {
        let source = match &self.instance {
            Some(p) => InstanceSource::File(p.clone()),
            None => InstanceSource::Generate(self.gen.params()),
        };
        let mut cfg = ExperimentConfig::new(self.gen.model, self.algo.clone(), self.eps.clone(), source);
        cfg.sweep = sweep;
        cfg.repeat = self.repeat;
        cfg.seed = self.gen.seed;
        cfg.out = self.out.clone();
        cfg.threads = thread_count(self.threads)?;
        cfg.ransac = RansacSettings {
            inlier_bound: self.ransac_b,
            confidence: self.confidence,
            ..RansacSettings::default()
        };
        cfg.parallel_depth = self.parallel_depth;
        Ok(cfg)
    }
}

fn parse_model(s: &str) -> Result<ModelTag, String> {
    s.parse::<ModelTag>().map_err(|e| e.to_string())
}

fn parse_algo(s: &str) -> Result<Algo, String> {
    s.parse::<Algo>().map_err(|e| e.to_string())
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse::<SweepAxis>().map_err(|e| e.to_string())
}

/// Writes to stdout; a closed pipe (`ivote ... | head`) is not an error.
fn emit(text: &str) -> Result<(), BenchError> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(BenchError::Runtime(e.to_string())),
        _ => Ok(()),
    }
}

fn print_runs(report: &RunReport) -> Result<(), BenchError> {
    let mut text = String::new();
    for r in &report.runs {
        let params: Vec<String> = r.params.iter().map(|v| format!("{v:.6}")).collect();
        text += &format!(
            "{} {} sweep={} repeat={} count={} ops={} wall_ms={:.1}{} params=[{}]\n",
            r.model,
            r.algo,
            r.sweep_value,
            r.repeat,
            r.count,
            r.dominant_ops(),
            r.wall_ms,
            if r.truncated { " truncated" } else { "" },
            params.join(", ")
        );
    }
    emit(&text)
}

fn execute(cmd: Command) -> Result<(), BenchError> {
    match cmd {
        Command::Gen { gen, out } => {
            let inst = generate(gen.model, &gen.params(), gen.seed)?;
            save_instance(&inst, &out)?;
            emit(&format!("wrote {} items to {}\n", inst.len(), out.display()))?;
        }
        Command::Run(args) => {
            let report = run_experiment(&args.config(None)?)?;
            print_runs(&report)?;
        }
        Command::Sweep { run, sweep_axis, values } => {
            let sweep = Sweep { axis: sweep_axis, values };
            let report = run_experiment(&run.config(Some(sweep))?)?;
            print_runs(&report)?;
        }
        Command::Verify { instance, report, threshold, out } => {
            let inst = load_instance::<f64>(&instance)?;
            let verified = verify_inliers(&RunReport::read_json(&report)?, &inst, threshold)?;
            match out {
                Some(p) => verified.write_json(p)?,
                None => emit(&(serde_json::to_string_pretty(&verified)? + "\n"))?,
            }
        }
        Command::Compare { reports } => {
            let reports = reports
                .iter()
                .map(RunReport::read_json)
                .collect::<Result<Vec<_>, _>>()?;
            emit(&compare_algorithms(&reports)?.table)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use regret_gls::bench::{
    self, profile, profile_csv, reference_optima, run_fixed_time, run_unfixed, time_grid, GuideSource, RunOptions,
    SolverConfig,
};
use regret_gls::data::{export_dataset, read_dataset, split_dataset};
use regret_gls::features::parse_channels;
use regret_gls::gls::{self, Guide, SolveParams};
use regret_gls::instance::{
    format_instance_line, random_set, read_instances, read_tsplib, render_tsplib, write_instances, Instance,
};
use regret_gls::regret::{load_regret_for, oracle, save_regret};
use regret_gls::tour::format_tour_line;
use regret_gls::{Error, Result};

/// Regret-guided local search for the TSP.
#[derive(Parser)]
#[command(name = "rgls", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random uniform instances.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute exact regret files (n <= 20).
    Regret {
        #[command(flatten)]
        set: SetArgs,
        /// Directory receiving `<name>.csv` per instance.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Export a line-graph training dataset (JSON Lines).
    Dataset {
        #[command(flatten)]
        set: SetArgs,
        /// `all` or a comma-separated channel list.
        #[arg(long, default_value = "all")]
        channels: String,
        #[arg(long)]
        out: PathBuf,
        /// Move a shuffled share of the records to this file.
        #[arg(long, requires = "val_fraction")]
        val_out: Option<PathBuf>,
        #[arg(long)]
        val_fraction: Option<f64>,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
    },
    /// Solve one instance with guided local search.
    Solve {
        #[command(flatten)]
        one: OneArgs,
        /// `weight`, `oracle` or `regret:<file>`.
        #[arg(long, default_value = "weight")]
        guide: String,
        #[command(flatten)]
        gls: GlsArgs,
        /// Tour file to write (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Convergence trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Benchmark a solver over a problem set.
    Bench {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, value_enum, default_value = "gls")]
        solver: SolverKind,
        /// GLS guide: `weight`, `oracle` or `regret-dir:<dir>`.
        #[arg(long, default_value = "weight")]
        guide: String,
        #[arg(long, value_enum, default_value = "fixed")]
        mode: Mode,
        #[command(flatten)]
        gls: GlsArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Grid steps for the convergence profile (fixed mode).
        #[arg(long, default_value_t = 100)]
        profile_steps: usize,
        /// Stop each GLS run once it reaches the reference optimum.
        #[arg(long)]
        stop_at_optimum: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Convert between TSPLIB and the native instance format.
    Tsplib {
        #[command(subcommand)]
        action: TsplibAction,
    },
}

#[derive(Subcommand)]
enum TsplibAction {
    /// TSPLIB `.tsp` files to one native instance file.
    Import {
        files: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Native instance file to one `.tsp` per instance.
    Export {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Nn,
    Fi,
    Ni,
    Ls,
    Gls,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Unfixed,
    Fixed,
}

/// A problem set: an instance file, TSPLIB files, or a random set.
#[derive(Args)]
struct SetArgs {
    #[arg(long, conflicts_with_all = ["n", "tsp"])]
    instances: Option<PathBuf>,
    #[arg(long, conflicts_with = "n")]
    tsp: Vec<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SetArgs {
    fn load(&self) -> Result<Vec<Instance>> {
        if let Some(path) = &self.instances {
            return read_instances(path);
        }
        if !self.tsp.is_empty() {
            return self.tsp.iter().map(read_tsplib).collect();
        }
        match self.n {
            Some(n) => random_set(n, self.count, self.seed),
            None => Err(Error::InvalidArgument(
                "no problem set: pass --instances, --tsp or --n".into(),
            )),
        }
    }
}

/// A single instance: one entry of an instance file, a TSPLIB file, or a
/// random instance.
#[derive(Args)]
struct OneArgs {
    #[arg(long, conflicts_with_all = ["n", "tsp"])]
    instances: Option<PathBuf>,
    /// Entry of `--instances` to solve.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, conflicts_with = "n")]
    tsp: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl OneArgs {
    fn load(&self) -> Result<Instance> {
        if let Some(path) = &self.instances {
            let mut all = read_instances(path)?;
            if self.index >= all.len() {
                return Err(Error::InvalidArgument(format!(
                    "--index {} out of range: {} holds {} instance(s)",
                    self.index,
                    path.display(),
                    all.len()
                )));
            }
            return Ok(all.swap_remove(self.index));
        }
        if let Some(path) = &self.tsp {
            return read_tsplib(path);
        }
        match self.n {
            Some(n) => Instance::random(n, self.seed),
            None => Err(Error::InvalidArgument(
                "no instance: pass --instances, --tsp or --n".into(),
            )),
        }
    }
}

#[derive(Args)]
struct GlsArgs {
    /// Time budget in seconds.
    #[arg(long, default_value_t = 10.0)]
    budget: f64,
    /// Penalty weight factor: lambda = alpha * g(first local optimum) / n.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Moves per perturbation phase.
    #[arg(long, default_value_t = 20)]
    k: usize,
}

impl GlsArgs {
    fn params(&self) -> Result<SolveParams> {
        if !(self.budget.is_finite() && self.budget >= 0.0) {
            return Err(Error::InvalidArgument(format!("bad --budget {}", self.budget)));
        }
        Ok(SolveParams {
            k: self.k,
            lambda_alpha: self.alpha,
            time_budget: Duration::from_secs_f64(self.budget),
            ..SolveParams::default()
        })
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::File {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::File {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { n, count, seed, out } => {
            write_instances(&out, &random_set(n, count, seed)?)?;
        }
        Command::Regret { set, out_dir } => {
            create_dir(&out_dir)?;
            for inst in set.load()? {
                let sol = oracle(&inst.distance_matrix())?;
                save_regret(&sol.regret, out_dir.join(format!("{}.csv", inst.name)))?;
                println!("{}", format_tour_line(&inst.name, sol.cost, &sol.tour));
            }
        }
        Command::Dataset {
            set,
            channels,
            out,
            val_out,
            val_fraction,
            split_seed,
        } => {
            let channels = parse_channels(&channels)?;
            let summary = export_dataset(&set.load()?, &channels, &out)?;
            if let (Some(val_out), Some(f)) = (val_out, val_fraction) {
                let (train, val) = split_dataset(read_dataset(&out)?, (1.0 - f, f), split_seed)?;
                for (path, recs) in [(&out, &train), (&val_out, &val)] {
                    let mut body = String::new();
                    for r in recs {
                        body.push_str(&serde_json::to_string(r)?);
                        body.push('\n');
                    }
                    write_file(path, &body)?;
                }
                println!("train={} val={}", train.len(), val.len());
            }
            println!("written={} skipped={}", summary.written, summary.skipped.len());
        }
        Command::Solve {
            one,
            guide,
            gls,
            out,
            trace,
        } => {
            let inst = one.load()?;
            let params = gls.params()?;
            let clock = std::time::Instant::now();
            let dm = inst.distance_matrix();
            let guide = match guide.as_str() {
                "weight" => Guide::Weight,
                "oracle" => Guide::Regret(oracle(&dm)?.regret),
                g => match g.strip_prefix("regret:") {
                    Some(path) => Guide::Regret(load_regret_for(path, inst.n())?.matrix),
                    None => {
                        return Err(Error::InvalidArgument(format!(
                            "unknown guide `{g}` (expected weight, oracle or regret:<file>)"
                        )))
                    }
                },
            };
            let outcome = gls::guided_local_search(&dm, &guide, &params, clock, clock + params.time_budget)?;
            let line = format_tour_line(&inst.name, outcome.cost, &outcome.tour);
            match out {
                Some(path) => write_file(&path, &format!("{line}\n"))?,
                None => println!("{line}"),
            }
            if let Some(path) = trace {
                outcome.trace.write_csv(path)?;
            }
        }
        Command::Bench {
            set,
            solver,
            guide,
            mode,
            gls,
            workers,
            profile_steps,
            stop_at_optimum,
            out_dir,
        } => {
            let instances = set.load()?;
            let refs = reference_optima(&instances)?;
            let params = gls.params()?;
            let config = match solver {
                SolverKind::Nn => SolverConfig::NearestNeighbor,
                SolverKind::Fi => SolverConfig::FarthestInsertion,
                SolverKind::Ni => SolverConfig::NearestInsertion,
                SolverKind::Ls => SolverConfig::LocalSearch,
                SolverKind::Gls => SolverConfig::Gls {
                    guide: parse_guide_source(&guide)?,
                    params: params.clone(),
                },
            };
            let opts = RunOptions {
                workers: bench::effective_workers(workers),
                stop_at_reference: stop_at_optimum,
            };
            create_dir(&out_dir)?;
            let report = match mode {
                Mode::Unfixed => run_unfixed(&instances, &refs, &config, &opts)?,
                Mode::Fixed => {
                    let (report, traces) = run_fixed_time(&instances, &refs, &config, params.time_budget, &opts)?;
                    let grid = time_grid(params.time_budget.as_secs_f64(), profile_steps);
                    write_file(
                        &out_dir.join("profile.csv"),
                        &profile_csv(&profile(&traces, &refs, &grid)?),
                    )?;
                    let trace_dir = out_dir.join("traces");
                    create_dir(&trace_dir)?;
                    for (inst, t) in instances.iter().zip(&traces) {
                        t.write_csv(trace_dir.join(format!("{}.csv", inst.name)))?;
                    }
                    report
                }
            };
            report.write_to(&out_dir)?;
            let s = report.summary;
            println!(
                "{}: gap {:.3}±{:.3}% optimal {:.1}% time {:.3}±{:.3}s ({} scored, {} excluded)",
                report.solver, s.mean_gap, s.std_gap, s.pct_optimal, s.mean_time, s.std_time, s.count, s.excluded
            );
        }
        Command::Tsplib { action } => match action {
            TsplibAction::Import { files, out } => {
                let instances = files.iter().map(read_tsplib).collect::<Result<Vec<_>>>()?;
                for inst in &instances {
                    println!("{} n={} metric={}", inst.name, inst.n(), inst.metric.as_str());
                }
                write_instances(&out, &instances)?;
            }
            TsplibAction::Export { instances, out_dir } => {
                create_dir(&out_dir)?;
                for inst in read_instances(&instances)? {
                    write_file(&out_dir.join(format!("{}.tsp", inst.name)), &render_tsplib(&inst))?;
                    log::debug!("{}", format_instance_line(&inst));
                }
            }
        },
    }
    Ok(())
}

fn parse_guide_source(s: &str) -> Result<GuideSource> {
    match s {
        "weight" => Ok(GuideSource::Weight),
        "oracle" => Ok(GuideSource::Oracle),
        _ => match s.strip_prefix("regret-dir:") {
            Some(dir) => Ok(GuideSource::RegretDir(dir.into())),
            None => Err(Error::InvalidArgument(format!(
                "unknown guide `{s}` (expected weight, oracle or regret-dir:<dir>)"
            ))),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    // one solve per core: library-level parallelism stays off in the CLI
    let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

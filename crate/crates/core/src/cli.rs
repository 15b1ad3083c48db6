//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for runtime and IO failures, 2 for usage
//! errors (bad flags or flag values that violate a precondition).

use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, Execution, Summary};
use crate::error::Error;
use crate::instance::{self, CaseTag, KnapsackInstance, Solution};
use crate::solver::{self, Algorithm, SolverConfig, DEFAULT_MAX_ITER, DEFAULT_POPULATION};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Parser)]
#[command(
    name = "aeqts",
    version,
    about = "Quantum-inspired tabu search for 0/1 knapsack"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a benchmark instance file
    Gen(GenArgs),
    /// Run a single trial
    Run(RunArgs),
    /// Run many trials and write curve CSV plus summary JSON
    Bench(BenchArgs),
    /// Percentage of improvement between two bench summaries
    Compare(CompareArgs),
    /// Exact optimum by dynamic programming
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
    #[value(name = "III")]
    III,
}

impl From<CaseArg> for CaseTag {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::I => CaseTag::I,
            CaseArg::II => CaseTag::II,
            CaseArg::III => CaseTag::III,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    #[value(name = "ae-qts")]
    AeQts,
    #[value(name = "qts")]
    Qts,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::AeQts => Algorithm::AeQts,
            AlgoArg::Qts => Algorithm::Qts,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long = "case", value_enum)]
    pub case: CaseArg,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "ae-qts")]
    pub algo: AlgoArg,
    /// Population size
    #[arg(long, default_value_t = DEFAULT_POPULATION)]
    pub n: usize,
    #[arg(long = "max-iter", default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Base rotation angle: radians, or a multiple of pi such as `0.01pi`
    #[arg(long, default_value = "0.01pi", value_parser = parse_theta)]
    pub theta: f64,
    /// Best/worst pairs per update (default: n/2 for ae-qts, 1 for qts)
    #[arg(long = "pair-count")]
    pub pair_count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Per-iteration CSV `t,best_so_far,iter_best,iter_worst`
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Final register as CSV `qubit_index,alpha,beta`
    #[arg(long = "dump-register")]
    pub dump_register: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long = "master-seed", default_value_t = DEFAULT_SEED)]
    pub master_seed: u64,
    /// Output directory for curve.csv and summary.json
    #[arg(long)]
    pub out: PathBuf,
    /// Run trials on the current thread only
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub baseline: PathBuf,
    pub improved: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub instance: PathBuf,
}

/// Accepts radians (`0.0314`) or a multiple of pi (`0.01pi`, `pi`).
pub fn parse_theta(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let stripped = s.strip_suffix("pi").or_else(|| s.strip_suffix('π'));
    let value = match stripped {
        Some("") => PI,
        Some(m) => m
            .trim_end_matches('*')
            .parse::<f64>()
            .map(|m| m * PI)
            .map_err(|e| format!("bad multiple of pi `{s}`: {e}"))?,
        None => s
            .parse::<f64>()
            .map_err(|e| format!("bad angle `{s}`: {e}"))?,
    };
    if !value.is_finite() {
        return Err(format!("angle `{s}` is not finite"));
    }
    Ok(value)
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(Error::io("<stdout>", e))
    }
}

type CliResult = Result<(), CliError>;

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Run(a) => cmd_run(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Compare(a) => cmd_compare(&a, out),
        Command::Oracle(a) => cmd_oracle(&a, out),
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> CliResult {
    let inst = instance::generate_instance(a.case.into(), a.k, a.seed).map_err(usage)?;
    inst.save(&a.out)?;
    writeln!(out, "wrote {}", a.out.display())?;
    writeln!(out, "case: {}", inst.case())?;
    writeln!(out, "k: {}", inst.len())?;
    match inst.gen_seed() {
        Some(s) => writeln!(out, "seed: {s}")?,
        None => writeln!(out, "seed: none (deterministic case)")?,
    }
    writeln!(out, "capacity: {}", inst.capacity())?;
    Ok(())
}

fn solver_config(a: &SolverArgs, seed: u64) -> Result<SolverConfig, CliError> {
    let algo: Algorithm = a.algo.into();
    let pair_count = match (algo, a.pair_count) {
        (Algorithm::Qts, Some(p)) if p != 1 => {
            return Err(CliError::Usage(format!(
                "qts always uses one pair, got --pair-count {p}"
            )))
        }
        (_, Some(p)) => p,
        (algo, None) => algo.default_pair_count(a.n),
    };
    let cfg = SolverConfig {
        population_size: a.n,
        max_iter: a.max_iter,
        theta: a.theta,
        pair_count,
        seed,
    };
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn load_instance(path: &Path) -> Result<KnapsackInstance, CliError> {
    Ok(KnapsackInstance::load(path)?)
}

fn write_config(out: &mut dyn Write, cfg: &SolverConfig) -> std::io::Result<()> {
    writeln!(
        out,
        "algorithm: {} (pair_count {})",
        cfg.algorithm(),
        cfg.pair_count
    )?;
    writeln!(out, "n: {}", cfg.population_size)?;
    writeln!(out, "max_iter: {}", cfg.max_iter)?;
    writeln!(
        out,
        "theta: {} rad ({}pi)",
        cfg.theta,
        fmt_pi_multiple(cfg.theta)
    )
}

fn fmt_pi_multiple(theta: f64) -> String {
    let m = format!("{:.6}", theta / PI);
    m.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

pub fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> CliResult {
    let cfg = solver_config(&a.solver, a.seed)?;
    let inst = load_instance(&a.instance)?;

    let mut trace = a.trace.as_deref().map(create).transpose()?;
    let mut trace_err = None;
    if let Some(w) = trace.as_mut() {
        if let Err(e) = writeln!(w, "t,best_so_far,iter_best,iter_worst") {
            trace_err = Some(e);
        }
    }
    let mut final_register = None;
    let result = solver::run_with(&cfg, &inst, |r, state| {
        if let (Some(w), None) = (trace.as_mut(), trace_err.as_ref()) {
            if let Err(e) = writeln!(
                w,
                "{},{},{},{}",
                r.t, r.best_so_far, r.iter_best, r.iter_worst
            ) {
                trace_err = Some(e);
            }
        }
        if a.dump_register.is_some() && r.t == cfg.max_iter {
            final_register = Some(state.register().clone());
        }
    })?;
    if let (Some(path), Some(e)) = (a.trace.as_ref(), trace_err) {
        return Err(Error::io(path, e).into());
    }
    if let (Some(path), Some(mut w)) = (a.trace.as_ref(), trace) {
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    if let Some(path) = &a.dump_register {
        let reg = match final_register {
            Some(reg) => reg,
            None => crate::qreg::QubitRegister::uniform(inst.len())?,
        };
        let mut w = create(path)?;
        reg.write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))?;
    }

    let best = Solution::evaluate(result.best_bits.clone(), &inst)?;
    writeln!(
        out,
        "instance: {} (k {}, capacity {})",
        a.instance.display(),
        inst.len(),
        inst.capacity()
    )?;
    write_config(out, &cfg)?;
    writeln!(out, "seed: {}", cfg.seed)?;
    writeln!(out, "best_profit: {}", result.best_profit)?;
    writeln!(out, "best_weight: {}", best.weight())?;
    writeln!(out, "last_update_iter: {}", result.last_update_iter)?;
    writeln!(
        out,
        "feasible: {}",
        if best.is_feasible(&inst) && best.profit() == result.best_profit {
            "yes"
        } else {
            "NO"
        }
    )?;
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> CliResult {
    let cfg = solver_config(&a.solver, a.master_seed)?;
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let inst = load_instance(&a.instance)?;
    let exec = if a.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };
    let results = bench::run_trial_set(&cfg, &inst, a.trials, a.master_seed, exec)?;
    let stats = bench::AggregateStats::from_trials(
        &cfg,
        &results,
        a.master_seed,
        a.instance.display().to_string(),
    )?;
    let (curve, summary) = bench::export_stats(&stats, &a.out)?;

    let s = &stats.summary;
    writeln!(out, "instance: {}", a.instance.display())?;
    write_config(out, &cfg)?;
    writeln!(out, "trials: {}", s.trials)?;
    writeln!(out, "master_seed: {}", s.master_seed)?;
    writeln!(
        out,
        "mean_final_profit: {:.3} (std {:.3})",
        s.mean_final_profit, s.std_final_profit
    )?;
    writeln!(out, "mean_last_update: {:.2}", s.mean_last_update)?;
    writeln!(out, "wrote {}", curve.display())?;
    writeln!(out, "wrote {}", summary.display())?;
    Ok(())
}

pub fn cmd_compare(a: &CompareArgs, out: &mut dyn Write) -> CliResult {
    let baseline = Summary::load(&a.baseline)?;
    let improved = Summary::load(&a.improved)?;
    let report = bench::poi(&baseline, &improved)?;
    report.save(&a.out)?;
    writeln!(
        out,
        "baseline: {} mean_last_update {:.2}",
        baseline.algorithm, baseline.mean_last_update
    )?;
    writeln!(
        out,
        "improved: {} mean_last_update {:.2}",
        improved.algorithm, improved.mean_last_update
    )?;
    writeln!(out, "poi_percent: {:.2}", report.poi_percent)?;
    writeln!(out, "wrote {}", a.out.display())?;
    Ok(())
}

pub fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> CliResult {
    let inst = load_instance(&a.instance)?;
    let (best, bits) = instance::dp_optimal_selection(&inst)?;
    let weight = instance::total_weight(&bits, &inst)?;
    writeln!(out, "optimum: {best}")?;
    writeln!(out, "weight: {weight} (capacity {})", inst.capacity())?;
    let selection: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
    writeln!(out, "selection: {selection}")?;
    Ok(())
}

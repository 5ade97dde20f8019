use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use cfsched::bounds::{self, BoundParams};
use cfsched::coeff_search;
use cfsched::experiments::{self, stream_key, trial_rng, ExperimentConfig, Manifest, Policy, Table};
use cfsched::rate::{self, ChannelVector, CoeffVector, Power};
use cfsched::scheduler;
use cfsched::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "cfsched", version, about = "Compute-and-forward user scheduling and rate tools")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Computation rate, MMSE scaling and angle of one channel/coefficient pair.
    Rate(RateArgs),
    /// Integer coefficient vector maximising the rate (or the sum of rates).
    CoeffOpt(CoeffOptArgs),
    /// Sorted-window scheduler: pick k of L users with +-1 coefficients.
    Schedule(ScheduleArgs),
    /// Exhaustive scheduler over every k-subset.
    Oracle(OracleArgs),
    /// For a fixed coefficient vector, the k users with the smallest angle to it.
    MinAngle(MinAngleArgs),
    /// Lower and upper bounds on the expected sum-rate.
    Bounds(BoundsArgs),
    /// Bounds normalised by their log log L growth over a grid of L.
    Scaling(ScalingArgs),
    /// Mean sum-rate of the scheduler and the oracle versus L, with bounds.
    Fig1(ExpArgs),
    /// Rate of every (subset, small coefficient vector) pair for one channel draw.
    Fig2(ExpArgs),
    /// Sum-rate of every subset at its optimal coefficient vector.
    Fig3(ExpArgs),
    /// Fixed coefficient vectors: min-angle vs best vs random subset, versus P.
    Fig4(ExpArgs),
    /// Squared cosine to a fixed direction against its Beta law.
    BetaCheck(ExpArgs),
    /// Transmission phases until the collected coefficient rows reach rank L.
    CompletionTime(ExpArgs),
}

#[derive(Args, Debug)]
struct RateArgs {
    /// Channel gains, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    h: Vec<f64>,
    /// Integer coefficients, comma separated; same length as --h.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a: Vec<i64>,
    /// Transmit power; enters the rate as the SNR weight on |h|^2 and on the
    /// misalignment term |h|^2|a|^2 - (h.a)^2.
    #[arg(long = "P")]
    p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Objective {
    /// Maximise the computation rate.
    Rate,
    /// Maximise (number of non-zero coefficients) x rate.
    Sum,
}

#[derive(Args, Debug)]
struct CoeffOptArgs {
    /// Channel gains, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    h: Vec<f64>,
    /// Transmit power; bounds the search to |a|^2 <= 1 + P|h|^2.
    #[arg(long = "P")]
    p: f64,
    #[arg(long, value_enum, default_value_t = Objective::Rate)]
    objective: Objective,
}

#[derive(Args, Debug)]
struct ChannelArgs {
    /// Number of users; a Gaussian channel of this size is drawn from --seed.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Explicit channel gains instead of a random draw.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    h: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl ChannelArgs {
    fn channel(&self, tag: &str) -> Result<ChannelVector> {
        match (&self.h, self.l) {
            (Some(h), None) => ChannelVector::new(h.clone()),
            (Some(h), Some(l)) if h.len() == l => ChannelVector::new(h.clone()),
            (Some(_), Some(_)) => Err(Error::Usage("--L disagrees with the length of --h".into())),
            (None, Some(l)) if l >= 1 => Ok(experiments::sample_channel(
                l,
                &mut trial_rng(self.seed, stream_key(tag, l as u64), 0),
            )),
            _ => Err(Error::Usage("give --L (random channel) or --h".into())),
        }
    }
}

#[derive(Args, Debug)]
struct ScheduleArgs {
    #[command(flatten)]
    ch: ChannelArgs,
    /// Users to schedule.
    #[arg(long)]
    k: usize,
    /// Transmit power used to score each window.
    #[arg(long = "P")]
    p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleMode {
    /// Every subset with all +-1 coefficients.
    Allones,
    /// Every subset with its sum-rate optimal integer coefficients.
    Full,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    ch: ChannelArgs,
    #[arg(long)]
    k: usize,
    #[arg(long = "P")]
    p: f64,
    #[arg(long, value_enum, default_value_t = OracleMode::Full)]
    mode: OracleMode,
}

#[derive(Args, Debug)]
struct MinAngleArgs {
    #[command(flatten)]
    ch: ChannelArgs,
    /// Fixed coefficient vector; its length is the number of users scheduled.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a: Vec<i64>,
    /// Transmit power for the reported rate; omitted means the high-SNR limit
    /// -1/2 log2(|a|^2 sin^2 theta).
    #[arg(long = "P")]
    p: Option<f64>,
    /// Report the subset maximising the rate at --P instead of the smallest angle.
    #[arg(long)]
    best: bool,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long = "L")]
    l: u64,
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Transmit power; scales the extreme-value term in both bounds.
    #[arg(long = "P", default_value_t = 100.0)]
    p: f64,
    /// Width of the magnitude band [u, u + delta] used by the lower bound.
    #[arg(long, default_value_t = 0.005)]
    delta: f64,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    /// Values of L, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10000,1000000,1000000000,1000000000000")]
    grid: Vec<u64>,
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(long = "P", default_value_t = 100.0)]
    p: f64,
    #[arg(long, default_value_t = 0.005)]
    delta: f64,
}

#[derive(Args, Debug, Default)]
struct ExpArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo trials per grid point.
    #[arg(long)]
    trials: Option<usize>,
    /// Values of L, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Single L; shorthand for a one-point --grid.
    #[arg(long = "L", conflicts_with = "grid")]
    l: Option<usize>,
    /// Users per schedule (or the dimension for beta-check).
    #[arg(long)]
    k: Option<usize>,
    /// Use k = ceil(log2 L) at every grid point (completion-time).
    #[arg(long)]
    k_log2: bool,
    /// Transmit power.
    #[arg(long = "P")]
    p: Option<f64>,
    /// Power grid for fig4, comma separated.
    #[arg(long = "P-grid", value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// Band width of the lower bound (fig1).
    #[arg(long)]
    delta: Option<f64>,
    /// Fixed coefficient vector (fig4); repeat for several.
    #[arg(long, allow_hyphen_values = true)]
    a: Vec<String>,
    /// Phase policy (completion-time).
    #[arg(long, value_enum)]
    policy: Option<Policy>,
    /// Largest L for which the exhaustive oracle runs (fig1).
    #[arg(long = "oracle-max-L")]
    oracle_max_l: Option<usize>,
    /// Largest |a|^2 of the coefficient vectors in the scatter (fig2).
    #[arg(long)]
    norm_max: Option<i64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Write the CSV here plus a `.manifest.json` sidecar; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExpArgs {
    fn resolve(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(x) = self.seed {
            cfg.seed = x;
        }
        if let Some(x) = self.trials {
            cfg.trials = x;
        }
        if let Some(x) = &self.grid {
            cfg.l_grid = x.clone();
        }
        if let Some(x) = self.l {
            cfg.l_grid = vec![x];
        }
        if let Some(x) = self.k {
            cfg.k = x;
        }
        cfg.k_log2 |= self.k_log2;
        if let Some(x) = self.p {
            cfg.power = x;
        }
        if let Some(x) = &self.p_grid {
            cfg.p_grid = x.clone();
        }
        if let Some(x) = self.delta {
            cfg.delta = x;
        }
        if !self.a.is_empty() {
            cfg.coeffs = self.a.iter().map(|s| parse_ints(s)).collect::<std::result::Result<_, _>>().map_err(Error::Usage)?;
        }
        if let Some(x) = self.policy {
            cfg.policy = x;
        }
        if let Some(x) = self.oracle_max_l {
            cfg.oracle_max_l = x;
        }
        if let Some(x) = self.norm_max {
            cfg.norm_max = x;
        }
        cfg.threads = self.threads.or(cfg.threads);
        cfg.output_path = self.out.as_ref().map(|p| p.display().to_string());
        Ok(cfg)
    }
}

fn split<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(|t| t.parse::<T>().map_err(|_| format!("cannot parse `{t}` in `{s}`")))
        .collect()
}

fn parse_ints(s: &str) -> std::result::Result<Vec<i64>, String> {
    split(s)
}

fn echo_config<T: Serialize>(cfg: &T) {
    eprintln!("config: {}", serde_json::to_string(cfg).unwrap_or_default());
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{s}")?;
    Ok(())
}

fn emit_table(cfg: &ExperimentConfig, table: &Table) -> Result<()> {
    match &cfg.output_path {
        Some(path) => {
            let path = PathBuf::from(path);
            experiments::table::write_with_manifest(table, &path, &Manifest::new(cfg, table))?;
            print_json(&json!({
                "csv": path.display().to_string(),
                "manifest": experiments::table::manifest_path(&path).display().to_string(),
                "rows": table.rows.len(),
            }))
        }
        None => table.write(std::io::stdout().lock()),
    }
}

fn run_experiment<T>(
    args: &ExpArgs,
    defaults: ExperimentConfig,
    f: fn(&ExperimentConfig) -> Result<(T, Table)>,
) -> Result<()> {
    let cfg = args.resolve(defaults)?;
    echo_config(&cfg);
    let (_, table) = f(&cfg)?;
    emit_table(&cfg, &table)
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Rate(a) => {
            echo_config(&json!({"h": a.h, "a": a.a, "P": a.p}));
            let h = ChannelVector::new(a.h)?;
            let c = CoeffVector::new(a.a)?;
            let r = rate::computation_rate(&h, &c, Power::new(a.p)?)?;
            print_json(&r)
        }
        Command::CoeffOpt(a) => {
            echo_config(&json!({"h": a.h, "P": a.p, "objective": format!("{:?}", a.objective).to_lowercase()}));
            let h = ChannelVector::new(a.h)?;
            let p = Power::new(a.p)?;
            let (c, r) = match a.objective {
                Objective::Rate => coeff_search::optimal_coeff(&h, p)?,
                Objective::Sum => coeff_search::optimal_sum_rate_coeff(&h, p)?,
            };
            print_json(&json!({"a": c, "result": r}))
        }
        Command::Schedule(a) => {
            let h = a.ch.channel("schedule")?;
            echo_config(&json!({"L": h.len(), "k": a.k, "P": a.p, "seed": a.ch.seed, "explicit_h": a.ch.h.is_some()}));
            let s = scheduler::algorithm1(&h, a.k, Power::new(a.p)?)?;
            print_json(&s)
        }
        Command::Oracle(a) => {
            let h = a.ch.channel("schedule")?;
            echo_config(&json!({"L": h.len(), "k": a.k, "P": a.p, "seed": a.ch.seed, "mode": format!("{:?}", a.mode).to_lowercase()}));
            let p = Power::new(a.p)?;
            let s = match a.mode {
                OracleMode::Allones => scheduler::oracle_allones(&h, a.k, p)?,
                OracleMode::Full => scheduler::oracle_full(&h, a.k, p)?,
            };
            print_json(&s)
        }
        Command::MinAngle(a) => {
            let h = a.ch.channel("schedule")?;
            echo_config(&json!({"L": h.len(), "a": a.a, "P": a.p, "seed": a.ch.seed, "best": a.best}));
            let c = CoeffVector::new(a.a)?;
            let p = a.p.map(Power::new).transpose()?;
            let s = if a.best {
                let p = p.ok_or_else(|| Error::Usage("--best needs --P".into()))?;
                scheduler::best_schedule_for_coeff(&h, &c, p)?
            } else {
                scheduler::min_angle_schedule(&h, &c, p)?
            };
            print_json(&s)
        }
        Command::Bounds(a) => {
            echo_config(&json!({"L": a.l, "k": a.k, "P": a.p, "delta": a.delta}));
            let p = Power::new(a.p)?;
            let bp = BoundParams::new(a.l, a.k, p, a.delta)?;
            print_json(&json!({
                "lb": bounds::lower_bound_sumrate(&bp)?,
                "lb_asymptotic": bounds::asymptotic_lower_bound_sumrate(&bp)?,
                "ub": bounds::upper_bound_sumrate(a.l, a.k, p)?,
                "u": bp.u()?,
                "p_band": bp.p_success()?,
                "chernoff_valid": bp.chernoff_valid()?,
                "k_constraint": bp.satisfies_k_constraint(),
            }))
        }
        Command::Scaling(a) => {
            echo_config(&json!({"grid": a.grid, "k": a.k, "P": a.p, "delta": a.delta}));
            let p = Power::new(a.p)?;
            let rows = a
                .grid
                .iter()
                .map(|&l| {
                    let bp = BoundParams::new(l, a.k, p, a.delta)?;
                    Ok(json!({
                        "L": l,
                        "lower_ratio": bounds::lower_scaling_ratio(&bp)?,
                        "upper_ratio": bounds::upper_scaling_ratio(l, a.k, p)?,
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            print_json(&rows)
        }
        Command::Fig1(a) => run_experiment(&a, ExperimentConfig::sumrate_vs_l(), experiments::run_sumrate_vs_l),
        Command::Fig2(a) => run_experiment(&a, ExperimentConfig::rate_scatter(), experiments::run_rate_scatter),
        Command::Fig3(a) => run_experiment(&a, ExperimentConfig::sumrate_scatter(), experiments::run_sumrate_scatter),
        Command::Fig4(a) => run_experiment(&a, ExperimentConfig::fixed_a_comparison(), experiments::run_fixed_a_comparison),
        Command::BetaCheck(a) => run_experiment(&a, ExperimentConfig::beta_check(), experiments::run_beta_angle_check),
        Command::CompletionTime(a) => {
            run_experiment(&a, ExperimentConfig::completion_time(), experiments::run_completion_time)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Usage(_)) { 2 } else { 1 })
        }
    }
}

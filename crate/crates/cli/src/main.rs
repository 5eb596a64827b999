//! `pass-sense`: BCRB evaluation and pinching-antenna placement/power
//! optimization from the command line.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pass_sensing_cli::config::{ExperimentConfig, OutputFormat, ProblemChoice, ProtocolChoice};
use pass_sensing_cli::record::{record_csv_row, RunRecord, RECORD_CSV_HEADER};
use pass_sensing_cli::runner::{
    self, BaselineMethod, SweepParam, SweepPoint,
};

#[derive(Parser)]
#[command(name = "pass-sense")]
#[command(about = "Bayesian Cramér-Rao bound simulator for pinching-antenna localization")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Ps,
    Pm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemArg {
    PowerMin,
    MinMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Experiment config (JSON). Defaults mirror the standard indoor setup
    /// when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the sampler seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Target scheduling protocol.
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,

    /// Optimization problem (pre-set by the power-min and min-max
    /// subcommands; selects the solver for baseline and sweep runs).
    #[arg(long, value_enum)]
    problem: Option<ProblemArg>,

    /// BCRB threshold for power minimization, m^2.
    #[arg(long)]
    gamma_sen: Option<f64>,

    /// Total power budget for min-max, dBm.
    #[arg(long)]
    pmax_dbm: Option<f64>,

    /// Use the high-SNR closed-form power allocation (min-max only).
    #[arg(long)]
    high_snr: bool,

    /// Placement search grid step, meters.
    #[arg(long)]
    step: Option<f64>,

    /// Gauss-Hermite order per axis.
    #[arg(long)]
    gh_order: Option<usize>,

    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    /// Include per-iteration traces in emitted records.
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand, Debug)]
enum Commands {
    /// Per-target BCRB of a fixed layout at the configured power.
    EvalBcrb {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated PA x-coordinates (defaults to the uniform layout).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        layout: Option<Vec<f64>>,
    },
    /// Element-wise BCRB minimization for one target.
    OptimizeSingle {
        #[command(flatten)]
        common: CommonArgs,
        /// Target index within the configured priors.
        #[arg(long, default_value_t = 0)]
        target: usize,
    },
    /// Total power minimization under a BCRB threshold.
    PowerMin {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Min-max BCRB under a total power budget.
    MinMax {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Benchmark placements: uniform, centered, or the fixed array with
    /// phase tuning.
    Baseline {
        #[command(flatten)]
        common: CommonArgs,
        /// uniform | centered | fpa
        #[arg(long)]
        method: String,
        /// Phase grid points for the fixed-array coordinate descent.
        #[arg(long, default_value_t = 64)]
        phase_grid: usize,
    },
    /// Run the configured solver over a range of one parameter.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// gamma-sen | pmax-dbm | num-pas | x-max | num-targets | step
        #[arg(long)]
        param: String,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Repetitions per value with consecutive seeds.
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Worker threads (0 = one per CPU).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Validate the Gauss-Hermite rules against closed forms and moments.
    GhSelftest {
        /// Highest order to check (capped at 60).
        #[arg(long, default_value_t = 60)]
        max_order: usize,
    },
}

fn load_config(common: &CommonArgs, problem: Option<ProblemChoice>) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = common.problem {
        cfg.solver.problem = match p {
            ProblemArg::PowerMin => ProblemChoice::PowerMin,
            ProblemArg::MinMax => ProblemChoice::MinMax,
        };
    }
    if let Some(problem) = problem {
        // the power-min / min-max subcommands pin the problem
        cfg.solver.problem = problem;
    }
    if let Some(seed) = common.seed {
        match cfg.prior.sampler.as_mut() {
            Some(s) => s.seed = seed,
            None => anyhow::bail!("--seed applies only to sampled priors"),
        }
    }
    if let Some(p) = common.protocol {
        cfg.solver.protocol = match p {
            ProtocolArg::Ps => ProtocolChoice::Ps,
            ProtocolArg::Pm => ProtocolChoice::Pm,
        };
    }
    if let Some(g) = common.gamma_sen {
        cfg.solver.gamma_sen_m2 = Some(g);
    }
    if let Some(p) = common.pmax_dbm {
        cfg.solver.pmax_dbm = Some(p);
    }
    if common.high_snr {
        cfg.solver.high_snr = true;
    }
    if let Some(s) = common.step {
        cfg.solver.step_m = s;
    }
    if let Some(n) = common.gh_order {
        cfg.solver.gh_order = n;
    }
    if let Some(f) = common.format {
        cfg.output.format = match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    if let Some(path) = &common.out {
        cfg.output.path = Some(path.display().to_string());
    }
    if common.trace {
        cfg.output.trace = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_output(cfg: &ExperimentConfig, text: &str) -> Result<()> {
    match &cfg.output.path {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("cannot write {path}"))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn emit_records(cfg: &ExperimentConfig, records: &[RunRecord]) -> Result<()> {
    let text = match cfg.output.format {
        OutputFormat::Csv => {
            let mut s = String::from(RECORD_CSV_HEADER);
            s.push('\n');
            for r in records {
                s.push_str(&record_csv_row(r));
                s.push('\n');
            }
            s
        }
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(records)?;
            s.push('\n');
            s
        }
    };
    write_output(cfg, &text)
}

fn emit_sweep(cfg: &ExperimentConfig, param: SweepParam, points: &[SweepPoint]) -> Result<()> {
    match cfg.output.format {
        OutputFormat::Csv => {
            let mut s = format!("sweep_param,sweep_value,trial,{RECORD_CSV_HEADER}\n");
            for p in points {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    param.as_str(),
                    p.value,
                    p.trial,
                    record_csv_row(&p.record)
                ));
            }
            write_output(cfg, &s)?;
        }
        OutputFormat::Json => {
            #[derive(serde::Serialize)]
            struct JsonPoint<'a> {
                sweep_param: &'a str,
                sweep_value: f64,
                trial: usize,
                record: &'a RunRecord,
            }
            let items: Vec<JsonPoint> = points
                .iter()
                .map(|p| JsonPoint {
                    sweep_param: param.as_str(),
                    sweep_value: p.value,
                    trial: p.trial,
                    record: &p.record,
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&items)?;
            s.push('\n');
            write_output(cfg, &s)?;
        }
    }
    // aggregate summary on stderr so it never mixes with piped output
    for s in runner::summarize(points) {
        eprintln!(
            "{} = {:<12} trials = {:<3} objective = {:.6e} ± {:.2e}",
            param.as_str(),
            s.value,
            s.trials,
            s.objective_mean,
            s.objective_stderr
        );
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Commands::EvalBcrb { common, layout } => {
            let cfg = load_config(&common, None)?;
            let rows = runner::eval_bcrb(&cfg, layout)?;
            let mut s = String::from("target,power_w,bcrb_m2,root_bcrb_m\n");
            for r in rows {
                s.push_str(&format!(
                    "{},{:.17e},{:.17e},{:.17e}\n",
                    r.target,
                    r.power_w,
                    r.bcrb_m2,
                    r.bcrb_m2.sqrt()
                ));
            }
            write_output(&cfg, &s)
        }
        Commands::OptimizeSingle { common, target } => {
            let cfg = load_config(&common, None)?;
            let record = runner::optimize_single(&cfg, target)?;
            emit_records(&cfg, &[record])
        }
        Commands::PowerMin { common } => {
            let cfg = load_config(&common, Some(ProblemChoice::PowerMin))?;
            let record = runner::run(&cfg)?;
            emit_records(&cfg, &[record])
        }
        Commands::MinMax { common } => {
            let cfg = load_config(&common, Some(ProblemChoice::MinMax))?;
            let record = runner::run(&cfg)?;
            emit_records(&cfg, &[record])
        }
        Commands::Baseline {
            common,
            method,
            phase_grid,
        } => {
            let cfg = load_config(&common, None)?;
            let method = BaselineMethod::parse(&method)?;
            let record = runner::run_baseline(&cfg, method, phase_grid)?;
            emit_records(&cfg, &[record])
        }
        Commands::Sweep {
            common,
            param,
            values,
            trials,
            threads,
        } => {
            let cfg = load_config(&common, None)?;
            let param = SweepParam::parse(&param)?;
            let points = runner::sweep(&cfg, param, &values, trials, threads)?;
            emit_sweep(&cfg, param, &points)
        }
        Commands::GhSelftest { max_order } => {
            let lines = runner::gh_selftest(max_order)?;
            let mut all_ok = true;
            for l in &lines {
                println!(
                    "order {:>3}: max moment rel err {:.3e}  [{}]",
                    l.order,
                    l.max_moment_rel_err,
                    if l.ok { "ok" } else { "FAIL" }
                );
                all_ok &= l.ok;
            }
            if !all_ok {
                anyhow::bail!(pass_sensing::Error::NumericalDomain(
                    "Gauss-Hermite self-test failed".into()
                ));
            }
            println!("all {} orders ok", lines.len());
            Ok(())
        }
    }
}

/// Exit codes: 0 ok, 2 configuration error, 3 infeasible problem,
/// 4 numerical failure.
fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<pass_sensing::Error>() {
        Some(pass_sensing::Error::Infeasible { .. }) => 3,
        Some(pass_sensing::Error::InvalidArgument(_)) => 2,
        Some(_) => 4,
        None => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = execute(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use adhocsim::analysis::{compute_metrics, compute_metrics_script_compat, MetricsReport};
use adhocsim::config::{load_config, ScenarioConfig};
use adhocsim::runner::{read_results_csv, render_tables, run_scenario, run_sweep, tables_from_rows, SweepGrid};
use adhocsim::trace::read_trace;
use adhocsim::TrafficKind;
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "adhocsim",
    version,
    about = "Ad hoc network simulator: AODV vs DSR under CBR and TCP traffic"
)]
struct Cli {
    /// Override the scenario seed (for `sweep`, the first seed of each cell).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Print only errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write its trace and motion schedule.
    Run { config: PathBuf },
    /// Compute delivery, loss and delay from an existing trace.
    Analyze {
        trace: PathBuf,
        #[arg(long = "type", value_enum)]
        data_type: DataType,
        /// Reproduce the quirks of the classic awk scripts.
        #[arg(long)]
        script_compat: bool,
    },
    /// Run a parameter sweep and write results.csv plus decision tables.
    Sweep { grid: PathBuf },
    /// Render decision tables from a sweep's results.csv.
    Table { csv: PathBuf },
    /// Print the default scenario configuration.
    Defaults,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum DataType {
    Cbr,
    Tcp,
}

impl From<DataType> for TrafficKind {
    fn from(d: DataType) -> Self {
        match d {
            DataType::Cbr => TrafficKind::Cbr,
            DataType::Tcp => TrafficKind::Tcp,
        }
    }
}

fn print_report(r: &MetricsReport) {
    println!("n_sent {}", r.n_sent);
    println!("n_received {}", r.n_received);
    println!("pdr {}", r.pdr);
    println!("lpr {}", r.lpr);
    println!("avg_e2e_ms {}", r.avg_e2e_ms);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let out = run_scenario(&cfg, &cli.out)?;
            if !cli.quiet {
                println!("trace {}", out.trace_path.display());
                println!("schedule {}", out.schedule_path.display());
                print_report(&out.report);
            }
        }
        Command::Analyze {
            trace,
            data_type,
            script_compat,
        } => {
            let file = File::open(&trace).with_context(|| format!("cannot open {}", trace.display()))?;
            let records = read_trace(BufReader::new(file)).with_context(|| format!("{}", trace.display()))?;
            let report = if script_compat {
                compute_metrics_script_compat(&records, data_type.into())?
            } else {
                compute_metrics(&records, data_type.into())?
            };
            if !cli.quiet {
                print_report(&report);
            }
        }
        Command::Sweep { grid } => {
            let mut grid = SweepGrid::load(&grid)?;
            if let Some(seed) = cli.seed {
                let k = grid.seeds.len() as u64;
                grid.seeds = (0..k).map(|i| seed.wrapping_add(i)).collect();
            }
            let summary = run_sweep(&grid, &cli.out)?;
            if !cli.quiet {
                print!("{}", render_tables(&summary.tables));
                println!("results {}", cli.out.join("results.csv").display());
            }
            if !summary.failures.is_empty() {
                for f in &summary.failures {
                    eprintln!("failed: {} seed {}: {}", f.scenario, f.seed, f.error);
                }
                bail!(adhocsim::RunError::SweepFailures {
                    failed: summary.failures.len(),
                    total: summary.total_runs,
                });
            }
        }
        Command::Table { csv } => {
            let file = File::open(&csv).with_context(|| format!("cannot open {}", csv.display()))?;
            let rows = read_results_csv(BufReader::new(file))?;
            let tables = tables_from_rows(&rows);
            if tables.is_empty() {
                bail!("{} has no median rows", csv.display());
            }
            print!("{}", render_tables(&tables));
            if let Some(Err(e)) = tables.iter().find(|t| t.is_err()) {
                bail!("{e}");
            }
        }
        Command::Defaults => print!("{}", ScenarioConfig::default().to_config_string()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already embed their cause in the message
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let cause = cause.to_string();
                if !msg.contains(&cause) {
                    msg = format!("{msg}: {cause}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

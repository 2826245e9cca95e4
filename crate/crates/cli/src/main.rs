use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vecc_core::harness::{self, CampaignSummary, CompareSummary};
use vecc_core::oracle::DEFAULT_ELIGIBILITY_BOUND;
use vecc_core::scenario::SUPPORTED_BANDWIDTHS_MHZ;
use vecc_core::{default_table1_config, Error, ScenarioConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;

#[derive(Parser)]
#[command(name = "vecc", version, about = "Vehicular edge cloud offloading simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one traced simulation and write per-slot data files.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Run many seeded trials per bandwidth setting.
    Campaign {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Bandwidth in MHz, or `all` for 10, 15 and 20. Defaults to the config's setting.
        #[arg(long)]
        bandwidth: Option<Bandwidth>,
    },
    /// Compare the allocation protocol against the exact optimum.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        bandwidth: Option<Bandwidth>,
        /// Largest user count accepted by the exact solver.
        #[arg(long, default_value_t = DEFAULT_ELIGIBILITY_BOUND)]
        oracle_bound: usize,
    },
    /// Parse and check a scenario file.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(clap::Args)]
struct Common {
    /// Scenario JSON (table units). Defaults to the 20 MHz table setup.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed; overrides the config's seed. For campaigns this is the base seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Bandwidth {
    #[value(name = "10")]
    Mhz10,
    #[value(name = "15")]
    Mhz15,
    #[value(name = "20")]
    Mhz20,
    All,
}

impl Bandwidth {
    fn settings(self) -> Vec<u32> {
        match self {
            Bandwidth::Mhz10 => vec![10],
            Bandwidth::Mhz15 => vec![15],
            Bandwidth::Mhz20 => vec![20],
            Bandwidth::All => SUPPORTED_BANDWIDTHS_MHZ.to_vec(),
        }
    }
}

fn load(config: Option<&Path>) -> vecc_core::Result<ScenarioConfig> {
    match config {
        Some(p) => ScenarioConfig::load(p),
        None => default_table1_config(20),
    }
}

fn configs_for(base: &ScenarioConfig, bandwidth: Option<Bandwidth>) -> vecc_core::Result<Vec<ScenarioConfig>> {
    match bandwidth {
        None => Ok(vec![base.clone()]),
        Some(b) => b.settings().into_iter().map(|mhz| base.with_bandwidth(mhz)).collect(),
    }
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn execute(cli: Cli) -> vecc_core::Result<()> {
    match cli.command {
        Command::Run { common } => {
            let config = load(common.config.as_deref())?;
            let seed = common.seed.unwrap_or(config.seed);
            let run = harness::run_single(&config, seed)?;
            let m = &run.metrics;
            println!(
                "seed {seed}: {} of {} users offload using {} of {} RBs; overhead {} -> {} ({}%)",
                m.offloader_count,
                run.users.len(),
                m.rb_used,
                config.rb_capacity,
                harness::fmt_sig6(m.total_overhead_baseline),
                harness::fmt_sig6(m.total_overhead_final),
                harness::fmt_sig6(m.reduction_total_pct),
            );
            report_files(&harness::write_run(&common.out, &run)?);
        }
        Command::Campaign {
            common,
            trials,
            bandwidth,
        } => {
            let base = load(common.config.as_deref())?;
            let seed = common.seed.unwrap_or(base.seed);
            let reports = configs_for(&base, bandwidth)?
                .iter()
                .map(|c| harness::run_campaign(c, trials, seed))
                .collect::<vecc_core::Result<Vec<_>>>()?;
            for s in CampaignSummary::from_reports(&reports).settings {
                let mean = |name: &str| s.fields.iter().find(|f| f.name == name).map_or(f64::NAN, |f| f.mean);
                println!(
                    "{} RBs: mean offloaders {}, reductions total {}% time {}% energy {}%",
                    s.rb_capacity,
                    harness::fmt_sig6(mean("offloader_count")),
                    harness::fmt_sig6(mean("reduction_total_pct")),
                    harness::fmt_sig6(mean("reduction_time_pct")),
                    harness::fmt_sig6(mean("reduction_energy_pct")),
                );
            }
            report_files(&harness::write_campaign(&common.out, &reports)?);
        }
        Command::Compare {
            common,
            trials,
            bandwidth,
            oracle_bound,
        } => {
            let base = load(common.config.as_deref())?;
            let seed = common.seed.unwrap_or(base.seed);
            let configs = configs_for(&base, bandwidth)?;
            for config in &configs {
                let report = harness::run_oracle_compare(config, trials, seed, oracle_bound)?;
                let s = CompareSummary::from_report(&report);
                println!(
                    "{} RBs: mean count gap {}, mean overhead gap {}, lexicographic violations {}",
                    s.rb_capacity,
                    harness::fmt_sig6(s.mean_count_gap),
                    harness::fmt_sig6(s.mean_overhead_gap),
                    s.lexicographic_violations
                );
                let dir = if configs.len() > 1 {
                    common.out.join(format!("{}rb", config.rb_capacity))
                } else {
                    common.out.clone()
                };
                report_files(&harness::write_compare(&dir, &report)?);
            }
        }
        Command::ValidateConfig { config } => {
            let c = ScenarioConfig::load(&config)?;
            println!(
                "ok: {} users, {} RBs, {} task kinds, {} weight choices",
                c.user_count,
                c.rb_capacity,
                c.task_catalog.len(),
                c.weight_choices.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Precondition(_) => ExitCode::from(EXIT_PRECONDITION),
                e if e.is_config() => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

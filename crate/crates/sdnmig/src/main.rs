use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sdnmig::commands::{self, CliError};
use sdnmig::config::{ExperimentConfig, ModeKind, PolicyKind};

/// Plan and evaluate gradual IP-to-SDN migration.
///
/// Exit codes: 0 success, 1 I/O error, 2 configuration error, 3 topology
/// parse error, 4 infeasible constraints, 5 exact search hit its limit.
#[derive(Parser)]
#[command(name = "sdnmig", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the alternative-path catalog and write it as JSON.
    Paths(Common),
    /// Compute a migration schedule and its availability curve.
    Schedule(Common),
    /// Simulate capacity savings along a schedule, averaged over repetitions.
    Simulate(Common),
    /// Time greedy and exact scheduling on random graphs.
    Bench(Common),
    /// Write the migration program in LP format.
    IlpExport(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// SNDlib native network file.
    #[arg(long, conflicts_with = "fixture")]
    file: Option<PathBuf>,
    /// Built-in network (`fig2`).
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of time-steps.
    #[arg(long = "T", short = 'T')]
    steps: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeKind>,
    /// Count mode: nodes per step instead of ceil(N/T).
    #[arg(long)]
    per_step: Option<usize>,
    #[arg(long, value_enum)]
    policy: Option<PolicyKind>,
    /// Migration cost per unit of node degree.
    #[arg(long)]
    unit_cost: Option<f64>,
    /// JSON array of path priorities, in alternative-path id order.
    #[arg(long)]
    priorities: Option<PathBuf>,
    /// Repetitions for `simulate`.
    #[arg(long)]
    reps: Option<usize>,
    /// Output directory [default: $SDNMIG_OUT or ./sdnmig-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated network sizes for `bench`.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    sizes: Option<Vec<usize>>,
    /// Exact search effort cap, in generated candidate states.
    #[arg(long)]
    search_limit: Option<u64>,
}

impl Common {
    fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(f) = self.file {
            cfg.file = Some(f);
        }
        if let Some(f) = self.fixture {
            cfg.file = None;
            cfg.fixture = f;
        }
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$target = v; })*
            };
        }
        set!(seed => seed, steps => steps, mode => mode, policy => policy,
             unit_cost => unit_cost, reps => reps, sizes => sizes,
             search_limit => search_limit);
        if self.per_step.is_some() {
            cfg.per_step = self.per_step;
        }
        if self.priorities.is_some() {
            cfg.priorities = self.priorities;
        }
        if self.out.is_some() {
            cfg.out = self.out;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Paths(c) => commands::cmd_paths(&c.resolve()?),
        Command::Schedule(c) => commands::cmd_schedule(&c.resolve()?),
        Command::Simulate(c) => commands::cmd_simulate(&c.resolve()?),
        Command::Bench(c) => commands::cmd_bench(&c.resolve()?),
        Command::IlpExport(c) => commands::cmd_ilp_export(&c.resolve()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sdnmig: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

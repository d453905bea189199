use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mmlink::config::parse_seed;
use mmlink_cli::{cmd_pilots, cmd_plot, cmd_run, cmd_validate, parse_override, CliResult, SpecSource};

#[derive(Parser)]
#[command(name = "mmlink", version, about = "Dual-band MIMO-OFDM link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArgs {
    /// TOML config, optionally with a [sweep] table.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fig2a, fig2b, fig3a, fig3b or table1-smoke.
    #[arg(long)]
    preset: Option<String>,
    /// Override a config key or collapse a sweep axis (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, String)>,
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
}

impl SpecArgs {
    fn source(self) -> SpecSource {
        SpecSource {
            config: self.config,
            preset: self.preset,
            overrides: self.overrides,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write the results CSV.
    Run {
        #[command(flatten)]
        spec: SpecArgs,
        /// Worker threads; 0 picks the machine default.
        #[arg(long, env = "MMLINK_WORKERS", default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config or preset without running it.
    Validate {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Render a results CSV as an SVG line chart.
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// Column for the x axis (default: the first varying sweep column).
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pilot layouts.
    Pilots {
        #[command(subcommand)]
        command: PilotsCommand,
    },
}

#[derive(Subcommand)]
enum PilotsCommand {
    /// Print the pilot grid as CSV.
    Dump {
        #[arg(long, default_value_t = 8)]
        m_tx: usize,
        /// Receive antennas (default: m_tx).
        #[arg(long)]
        m_rx: Option<usize>,
        #[arg(long)]
        k_p: usize,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 0, value_parser = parse_seed)]
        seed: u64,
    },
}

fn dispatch(cli: Cli) -> CliResult<Option<String>> {
    match cli.command {
        Command::Run { spec, workers, out } => cmd_run(&spec.source(), workers, out.as_deref()),
        Command::Validate { spec } => cmd_validate(&spec.source()).map(|s| Some(s + "\n")),
        Command::Plot { input, x, out } => cmd_plot(&input, x.as_deref(), out.as_deref()),
        Command::Pilots {
            command: PilotsCommand::Dump { m_tx, m_rx, k_p, n, seed },
        } => cmd_pilots(m_tx, m_rx, k_p, n, seed).map(Some),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(Some(text)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

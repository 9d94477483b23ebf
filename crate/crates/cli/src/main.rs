use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relcharge::commands::{self, Overrides};

#[derive(Parser)]
#[command(name = "relcharge", version, about = "Charged-particle orbits, symmetries and conserved quantities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory; writes trajectory.csv and summary.json.
    Simulate(Common),
    /// Poincaré symmetry scan; writes scan.json.
    Scan(Common),
    /// Closed-form orbit vs integrator; writes compare.json.
    Compare(Common),
    /// Parameter sweep on a worker pool; writes sweep.json.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's output_dir, else ".").
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, c) = match cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Scan(c) => ("scan", c),
        Command::Compare(c) => ("compare", c),
        Command::Sweep(c) => ("sweep", c),
    };
    let o = Overrides {
        out: c.out,
        threads: c.threads,
        seed: c.seed,
    };
    let result = match cmd {
        "simulate" => commands::simulate(&c.config, &o).map(|r| format!("simulate: {} samples, {} steps", r.samples, r.steps)),
        "scan" => commands::scan(&c.config, &o).map(|r| format!("scan: {} dimension {}", r.system, r.dimension)),
        "compare" => commands::compare(&c.config, &o)
            .map(|r| format!("compare: max deviation {:e} (tolerance {:e})", r.max_state_deviation, r.tolerance)),
        _ => commands::sweep(&c.config, &o).map(|r| format!("sweep: {} points, {} failures", r.points, r.failures)),
    };
    match result {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("relcharge {cmd}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

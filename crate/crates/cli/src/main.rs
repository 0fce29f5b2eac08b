use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dpq_cli::{parse_problem, run, CliError, Command, Overrides, EXIT_INPUT_ERROR};

#[derive(Debug, Parser)]
#[command(name = "dpq", version, about = "Quantization of (-1)-shifted derived Poisson manifolds")]
struct Cli {
    /// One `key<TAB>value` fact per line.
    #[arg(long, global = true)]
    machine: bool,
    #[arg(long, global = true)]
    weight_max: Option<u32>,
    #[arg(long = "base-deg-max", global = true)]
    base_deg_max: Option<u32>,
    #[arg(long = "poly-deg-max", global = true)]
    poly_deg_max: Option<u32>,
    #[arg(long, global = true)]
    hbar_max: Option<u32>,
    #[command(subcommand)]
    command: Command,
    /// Problem file.
    #[arg(global = true)]
    problem: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let over = Overrides {
        weight_max: cli.weight_max,
        base_degree_max: cli.base_deg_max,
        poly_degree_max: cli.poly_deg_max,
        hbar_max: cli.hbar_max,
        k_max: match &cli.command {
            Command::Quantize { k_max } => *k_max,
            _ => None,
        },
    };
    let result = (|| {
        let path = cli.problem.as_ref().ok_or_else(|| CliError::Usage("missing problem file".into()))?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let problem = parse_problem(&text, &over)?;
        run(&cli.command, &problem)
    })();
    match result {
        Ok(report) => {
            let out = if cli.machine { report.machine() } else { report.text() };
            print!("{out}");
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT_ERROR as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use debond::cli::{cmd_oracle1d, cmd_run, cmd_sweep, cmd_verify, Overrides};

#[derive(Parser)]
#[command(name = "debond", version, about = "Quasistatic membrane debonding by minimizing movements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the evolution and audit it.
    Run(Common),
    /// Closed-form 1D trajectory with its stability and balance checks.
    Oracle1d(Common),
    /// Run a 1D configuration and compare with the closed form.
    Verify(Common),
    /// Step-refinement study of the energy balance residual.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dump_every: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides { out: self.out.clone(), steps: self.steps, seed: self.seed, dump_every: self.dump_every }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run(c) => cmd_run(&c.config, &c.overrides()),
        Command::Oracle1d(c) => cmd_oracle1d(&c.config, &c.overrides()),
        Command::Verify(c) => cmd_verify(&c.config, &c.overrides()),
        Command::Sweep(c) => cmd_sweep(&c.config, &c.overrides()),
    };
    ExitCode::from(code as u8)
}

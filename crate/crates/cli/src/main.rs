use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vsg_cli::{execute, Command, Overrides};

#[derive(Debug, Parser)]
#[command(name = "vsg", version, about = "Splitting simulator and verification suites for vector-valued Schrodinger semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Evolve to the horizon, write norms and snapshots, run enabled suites.
    Run(Common),
    /// Convergence study over `scheme.n_list`.
    Study(Common),
    /// Validators and enabled suites only.
    Verify(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `out_dir` from the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Cmd::Run(a) => (Command::Run, a),
        Cmd::Study(a) => (Command::Study, a),
        Cmd::Verify(a) => (Command::Verify, a),
    };
    let ov = Overrides {
        out_dir: args.out_dir,
        seed: args.seed,
        threads: args.threads,
    };
    match execute(cmd, &args.config, &ov) {
        Ok(out) => {
            for v in out.report.validators.iter().flat_map(|v| [&v.ellipticity, &v.accretivity]) {
                if !v.pass {
                    eprintln!("FAIL {} at point {:?}", v.name, v.location.as_ref().map(|l| (l.point, &l.coords)));
                }
            }
            for s in &out.report.suites {
                println!("{} {}", if s.pass { "PASS" } else { "FAIL" }, s.name);
            }
            if let Some(e) = &out.report.error {
                eprintln!("{e}");
            }
            println!("report: {}", out.out_dir.join(vsg_cli::runner::REPORT_FILE).display());
            ExitCode::from(out.status.code() as u8)
        }
        Err(e) => {
            eprintln!("vsg: {e}");
            ExitCode::from(e.exit_status().code() as u8)
        }
    }
}

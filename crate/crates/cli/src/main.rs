use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_swipt_cli::presets::run_preset;
use ris_swipt_cli::{run, CliError, ExperimentSpec, Mode, Overrides};

#[derive(Parser)]
#[command(name = "ris-swipt", version, about = "Closed forms, Monte Carlo checks and energy optimization for RIS-assisted SWIPT")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Overrides the spec seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the Monte Carlo trial count.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment spec in the mode it names.
    Run { spec: PathBuf },
    /// Run an experiment spec in verify mode.
    Verify { spec: PathBuf },
    /// Regenerate the data behind one figure.
    Preset {
        #[arg(value_parser = ["fig2", "fig3", "fig4", "fig5"])]
        fig: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exec(cli: Cli) -> Result<ExitCode, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let ov = Overrides { seed: cli.seed, trials: cli.trials };
    match cli.cmd {
        Cmd::Run { spec } => run_spec(&spec, &ov, None),
        Cmd::Verify { spec } => run_spec(&spec, &ov, Some(Mode::Verify)),
        Cmd::Preset { fig, out } => {
            for f in run_preset(&fig, &out, &ov)? {
                println!("wrote {}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_spec(path: &PathBuf, ov: &Overrides, mode: Option<Mode>) -> Result<ExitCode, CliError> {
    let mut spec = ExperimentSpec::load(path)?;
    ov.apply(&mut spec);
    if let Some(m) = mode {
        spec.mode = m;
    }
    let outcome = run(&spec)?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    if let Some(r) = &outcome.report {
        let failed = r.checks.iter().filter(|c| !c.pass).count();
        println!("{} checks, {failed} failed", r.checks.len());
    }
    Ok(if outcome.verification_failed() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are configuration errors; help and version are not errors
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match exec(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

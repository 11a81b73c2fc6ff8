use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use qmeter::cli::{run, Command, Flags, ToleranceProfile};
use qmeter::scenario::{parse_scenario, ScenarioError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    /// Check every invariant of the scenario file
    Validate,
    /// Outcome probabilities P(m)
    Probs,
    /// Squared measurement error for the scenario's assignment
    Error,
    /// Error-minimizing value assignment (real weak values)
    Optimize,
    /// Zero-error residuals and the determinism verdict
    Certify,
    /// Operator decomposition A = B + M
    Decompose,
    /// Joint quasiprobability table and negativity
    Quasiprob,
    /// Weak-coupling meter shift sweep over the phi grid
    Weakmeas,
    /// Monte Carlo outcome sampling
    Sample,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Validate => Command::Validate,
            CommandArg::Probs => Command::Probs,
            CommandArg::Error => Command::Error,
            CommandArg::Optimize => Command::Optimize,
            CommandArg::Certify => Command::Certify,
            CommandArg::Decompose => Command::Decompose,
            CommandArg::Quasiprob => Command::Quasiprob,
            CommandArg::Weakmeas => Command::Weakmeas,
            CommandArg::Sample => Command::Sample,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    Default,
    Strict,
}

/// Quantitative analysis of quantum measurement scenarios.
#[derive(Parser)]
#[command(name = "qmeter", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandArg,
    /// Path to a scenario file (JSON, schema version 1)
    scenario: PathBuf,
    /// Write a machine-readable report to this path
    #[arg(long)]
    json: Option<PathBuf>,
    /// Number of Monte Carlo trials (sample)
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    /// PRNG seed (sample)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated coupling strengths (weakmeas)
    #[arg(long, value_delimiter = ',')]
    phi_grid: Option<Vec<f64>>,
    /// Override the scenario's B_psi offset (decompose)
    #[arg(long)]
    b_psi: Option<f64>,
    #[arg(long, value_enum, default_value_t = ProfileArg::Default)]
    tolerance_profile: ProfileArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let text = match fs::read_to_string(&cli.scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("qmeter: cannot read {}: {e}", cli.scenario.display());
            return ExitCode::from(2);
        }
    };
    let scenario = match parse_scenario(&text) {
        Ok(s) => s,
        Err(e @ ScenarioError::Syntax(_)) => {
            eprintln!("qmeter: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("qmeter: {e}");
            return ExitCode::from(1);
        }
    };

    let flags = Flags {
        n: cli.n,
        seed: cli.seed,
        phi_grid: cli.phi_grid.unwrap_or_else(|| vec![0.2, 0.1, 0.05]),
        b_psi: cli.b_psi,
        profile: match cli.tolerance_profile {
            ProfileArg::Default => ToleranceProfile::Default,
            ProfileArg::Strict => ToleranceProfile::Strict,
        },
        color: std::env::var_os("QMETER_NO_COLOR").is_none(),
    };

    match run(cli.command.into(), &scenario, &flags) {
        Ok(output) => {
            print!("{}", output.human);
            if let Some(path) = cli.json {
                let text = serde_json::to_string_pretty(&output.json).expect("report json");
                if let Err(e) = fs::write(&path, text) {
                    eprintln!("qmeter: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qmeter: {e}");
            ExitCode::from(1)
        }
    }
}

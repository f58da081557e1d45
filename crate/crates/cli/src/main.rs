use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use manycopy::discrimination::DiscriminationMode;
use manycopy_cli::commands::{self, Example, PairState, Settings};
use manycopy_cli::report::{Report, EXIT_ERROR};

/// Witnesses for many-copy PPT indistinguishability and strongly
/// PPT-unextendible subspaces.
#[derive(Parser)]
#[command(name = "manycopy", version)]
struct Cli {
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Eigenvalue tolerance for validation and support extraction.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_eig: f64,
    /// Interior-point stopping tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_sdp: f64,
    /// Largest total Hilbert-space dimension accepted.
    #[arg(long, global = true, default_value_t = 4096)]
    max_dim: usize,
    /// Number of copies (tmax, discriminate).
    #[arg(long, global = true, default_value_t = 1)]
    copies: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Witness value T of the subspace carried by an operator file.
    Tmax { path: PathBuf },
    /// Many-copy PPT indistinguishability of a state set, or strong
    /// unextendibility of a single operator's subspace.
    Witness { path: PathBuf },
    /// Build the minimal strongly unextendible subspace S_mn of m⊗n.
    Subspace {
        m: usize,
        n: usize,
        /// Also write the basis as a subspace file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate example state sets.
    Examples {
        #[command(subcommand)]
        example: ExampleCommand,
    },
    /// Search for a PPT measurement discriminating a state set.
    Discriminate {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Unambiguous)]
        mode: Mode,
    },
}

#[derive(Subcommand)]
enum ExampleCommand {
    /// A pure state and the normalized projector onto its complement.
    EntangledPair {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, value_enum, default_value_t = StateChoice::Bell)]
        state: StateChoice,
        /// Squared Schmidt coefficients for --state schmidt, e.g. 0.9,0.1.
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        /// Seed for --state random.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// A mixture of m maximally entangled states plus k-1 further ones.
    MeFamily {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// {|00⟩, |11⟩}, distinguishable by local measurements.
    ClassicalPair {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StateChoice {
    Bell,
    Schmidt,
    Product,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Perfect,
    Unambiguous,
}

fn run(cli: &Cli) -> Result<Report> {
    let settings = Settings { tol_eig: cli.tol_eig, tol_sdp: cli.tol_sdp, max_dim: cli.max_dim, copies: cli.copies };
    anyhow::ensure!(settings.copies >= 1, "--copies must be at least 1");
    anyhow::ensure!(settings.tol_eig > 0.0 && settings.tol_sdp > 0.0, "tolerances must be positive");
    match &cli.command {
        Command::Tmax { path } => commands::tmax(path, &settings),
        Command::Witness { path } => commands::witness(path, &settings),
        Command::Subspace { m, n, out } => commands::subspace(*m, *n, out.as_deref(), &settings),
        Command::Examples { example } => {
            let (ex, out) = match example {
                ExampleCommand::EntangledPair { d, state, weights, seed, out } => {
                    let state = match state {
                        StateChoice::Bell => PairState::Bell,
                        StateChoice::Schmidt => PairState::Schmidt(weights.clone()),
                        StateChoice::Product => PairState::Product,
                        StateChoice::Random => PairState::Random(*seed),
                    };
                    (Example::EntangledPair { d: *d, state }, out)
                }
                ExampleCommand::MeFamily { d, m, k, out } => (Example::MeFamily { d: *d, m: *m, k: *k }, out),
                ExampleCommand::ClassicalPair { out } => (Example::ClassicalPair, out),
            };
            commands::examples(&ex, out, &settings)
        }
        Command::Discriminate { path, mode } => {
            let mode = match mode {
                Mode::Perfect => DiscriminationMode::Perfect,
                Mode::Unambiguous => DiscriminationMode::Unambiguous,
            };
            commands::discriminate(path, mode, &settings)
        }
    }
}

fn emit(cli: &Cli, report: &Report) -> Result<()> {
    match &cli.report {
        Some(path) => manycopy_cli::files::write_json(path, report),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{}", serde_json::to_string_pretty(report)?) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => Ok(other?),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|report| emit(&cli, &report).map(|_| report.verdict.exit_code));
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

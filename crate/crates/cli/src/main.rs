//! `qpolis`: build, check and play with finite renderings of quasi-Polish
//! spaces. JSON goes to stdout, diagnostics to stderr.
//!
//! Exit codes: 0 pass, 1 a check failed, 2 usage or schema error.

mod convert;
mod demo;
mod game;
mod io;
mod oracle;
mod point;
mod posite;
mod powerspace;
mod space;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use io::CliError;

#[derive(Parser)]
#[command(name = "qpolis", version, about = "Quasi-Polish spaces as finite syntactic data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Brute-force checks on finite spaces and maps.
    Oracle(oracle::OracleArgs),
    /// Build copresentations.
    #[command(subcommand)]
    Space(space::SpaceCmd),
    /// Point streams: checking, separation, limits.
    #[command(subcommand)]
    Point(point::PointCmd),
    /// Posites: axioms, derived spaces, generic prime filters.
    #[command(subcommand)]
    Posite(posite::PositeCmd),
    /// Lower powerspaces and open surjections.
    #[command(subcommand)]
    Powerspace(powerspace::PowerspaceCmd),
    /// Convergent strong Choquet games.
    #[command(subcommand)]
    Game(game::GameCmd),
    /// Run a batch suite.
    Verify(VerifyArgs),
    /// Convert between finite-space, copresentation and posite files.
    Convert(convert::ConvertArgs),
    /// Canned walkthroughs.
    Demo {
        /// dedekind, generic-filter, powerspace or choquet
        name: String,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// oracle, posite, powerspace, baire, game, reals or completion
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest space or posite size (suite default when omitted).
    #[arg(long)]
    max_size: Option<usize>,
    /// Number of random instances (suite default when omitted).
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    fuel: Option<u64>,
    #[arg(long)]
    rounds: Option<usize>,
}

fn verify(a: &VerifyArgs) -> Result<bool, CliError> {
    let params = qpolis::verify::SuiteParams {
        seed: a.seed,
        max_size: a.max_size,
        instances: a.instances,
        fuel: a.fuel,
        rounds: a.rounds,
    };
    let report = qpolis::verify::run_suite(&a.suite, &params)?;
    io::emit(&report.to_json());
    for x in report.assertions.iter().filter(|x| !x.passed) {
        eprintln!("failed: {}", x.name);
    }
    Ok(report.passed())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Oracle(a) => oracle::run(&a),
        Command::Space(c) => space::run(&c),
        Command::Point(c) => point::run(&c),
        Command::Posite(c) => posite::run(&c),
        Command::Powerspace(c) => powerspace::run(&c),
        Command::Game(c) => game::run(&c),
        Command::Verify(a) => verify(&a),
        Command::Convert(a) => convert::run(&a),
        Command::Demo { name } => demo::run(&name),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}

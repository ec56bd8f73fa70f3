use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flipsim::harness::{self, ConfigFile, ExperimentConfig, SweepOutput};
use flipsim::Error;

#[derive(Parser)]
#[command(
    name = "flipsim",
    version,
    about = "Symbol-flipping attack simulator for DSSS RAKE links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coded BER versus SNR for one scenario.
    BerSweep(Common),
    /// Miss and false-alarm probabilities, closed form and Monte Carlo.
    DetectSweep(Common),
    /// Input-output mutual information of a single tap.
    MutualInfo(Common),
    /// Closed-form miss and false-alarm probabilities only.
    PmissPfalse(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn load(args: &Common) -> Result<ExperimentConfig, Error> {
    let mut file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(seed) = args.seed {
        file.seed = seed;
    }
    ExperimentConfig::from_file(&file)
}

fn emit(rows: &[harness::ResultRow], out: &Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            harness::write_csv(rows, &mut w)?;
            w.flush()?;
        }
        None => harness::write_csv(rows, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&Common, fn(&ExperimentConfig) -> flipsim::Result<SweepOutput>) = match &cli.command {
        Command::BerSweep(a) => (a, harness::run_ber_sweep),
        Command::DetectSweep(a) => (a, harness::run_detection_sweep),
        Command::MutualInfo(a) => (a, harness::run_mutual_info),
        Command::PmissPfalse(a) => (a, harness::run_pmiss_pfalse),
    };
    let cfg = match load(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("flipsim: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = run(&cfg).and_then(|out| emit(&out.rows, &args.out).map(|()| out.budget_exhausted));
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("flipsim: bit budget exhausted before the minimum error count at one or more SNR points");
            ExitCode::from(EXIT_BUDGET)
        }
        Err(e) => {
            eprintln!("flipsim: {e}");
            match e {
                Error::Config(_) | Error::Parameter(_) | Error::Scenario { .. } => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

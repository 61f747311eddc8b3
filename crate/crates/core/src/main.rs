use clap::{Args, Parser, Subcommand};
use scatterforge::construction::ConstructionParams;
use scatterforge::report::{self, Certificate};
use scatterforge::{Error, Result, DEFAULT_BUDGET};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "scatterforge",
    version,
    about = "Scattered subspace families over small field towers: construction \
             certificates, line spectra, rank-metric code reports, parameter scans, \
             and equivalence witnesses."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct FamilyArgs {
    /// Field characteristic (prime)
    #[arg(short, required_unless_present = "replay")]
    p: Option<u32>,
    /// Base extension degree: q = p^e
    #[arg(short, required_unless_present = "replay")]
    e: Option<u32>,
    /// Top extension degree over F_q
    #[arg(short, required_unless_present = "replay")]
    m: Option<u32>,
    /// Frobenius shift, coprime to m
    #[arg(short, required_unless_present = "replay")]
    s: Option<u32>,
    /// Operation budget for exhaustive enumerations
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Write the JSON certificate here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Re-run a stored certificate and require byte-identical results
    #[arg(long, value_name = "FILE")]
    replay: Option<PathBuf>,
}

impl FamilyArgs {
    fn params(&self) -> Result<ConstructionParams> {
        ConstructionParams::new(
            self.p.expect("required by clap"),
            self.e.expect("required by clap"),
            self.m.expect("required by clap"),
            self.s.expect("required by clap"),
        )
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the subspace family and certify the scatteredness criteria
    Construct(FamilyArgs),
    /// Line weight spectrum with closed-form and incidence identity checks
    Spectrum {
        #[command(flatten)]
        family: FamilyArgs,
        /// Also write the spectrum as weight,count rows
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Rank-metric code report: distribution, minimality, dual, saturation
    CodeReport {
        #[command(flatten)]
        family: FamilyArgs,
        /// Also write the generator matrix as digit-vector CSV
        #[arg(long, value_name = "FILE")]
        gen_csv: Option<PathBuf>,
    },
    /// Evaluate the criteria over a parameter grid, one row per (p,e,m,s)
    Scan {
        /// Grid such as "p=2,3;e=1;m=5,7;s=all"
        #[arg(long, required_unless_present = "replay")]
        grid: Option<String>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        replay: Option<PathBuf>,
    },
    /// Decide family equivalence for a target shift and verify the witness
    Equivalence {
        #[command(flatten)]
        family: FamilyArgs,
        /// Target shift to compare against
        #[arg(short, long, required_unless_present = "replay")]
        target: Option<u32>,
    },
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SCATTERFORGE_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::params(format!("SCATTERFORGE_THREADS = {v:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|err| Error::params(format!("thread pool: {err}")))?;
    }
    Ok(())
}

fn emit(cert: &Certificate, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            cert.write_to(path)?;
            println!("wrote {}", path.display());
        }
        None => print!("{}", cert.to_json()),
    }
    Ok(())
}

fn replayed(path: &PathBuf, command: &str) -> Result<()> {
    report::replay(path, Some(command))?;
    println!("replay verified: results are byte-identical");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.command {
        Cmd::Construct(family) => {
            if let Some(path) = &family.replay {
                return replayed(path, "construct");
            }
            emit(&report::run_construct(&family.params()?, family.budget)?, family.out.as_ref())
        }
        Cmd::Spectrum { family, csv } => {
            if let Some(path) = &family.replay {
                return replayed(path, "spectrum");
            }
            let (cert, table) = report::run_spectrum(&family.params()?, family.budget)?;
            emit(&cert, family.out.as_ref())?;
            if let Some(path) = csv {
                std::fs::write(&path, table)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Cmd::CodeReport { family, gen_csv } => {
            if let Some(path) = &family.replay {
                return replayed(path, "code-report");
            }
            let (cert, gen) = report::run_code_report(&family.params()?, family.budget)?;
            emit(&cert, family.out.as_ref())?;
            if let Some(path) = gen_csv {
                std::fs::write(&path, gen)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Cmd::Scan { grid, budget, out, replay } => {
            if let Some(path) = &replay {
                return replayed(path, "scan");
            }
            emit(&report::run_scan(&grid.expect("required by clap"), budget)?, out.as_ref())
        }
        Cmd::Equivalence { family, target } => {
            if let Some(path) = &family.replay {
                return replayed(path, "equivalence");
            }
            let cert = report::run_equivalence(
                &family.params()?,
                target.expect("required by clap"),
                family.budget,
            )?;
            emit(&cert, family.out.as_ref())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

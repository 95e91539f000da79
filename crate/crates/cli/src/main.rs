use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rtrb::full_order::{Accelerator, SasiConfig};
use rtrb::harness::QuadratureSpec;
use rtrb::model::ExampleId;
use rtrb::rbm::GreedyConfig;
use rtrb::Error;

mod commands;

/// Discrete-ordinates transport solves and angular reduced basis models.
#[derive(Parser, Debug)]
#[command(name = "rtrb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Directory for all written files.
    #[arg(short, long, global = true, default_value = "rtrb-out")]
    output_dir: PathBuf,

    /// Relative sup-norm tolerance of the source iteration.
    #[arg(long, global = true)]
    error_tol: Option<f64>,

    /// Maximum number of source iterations.
    #[arg(long, global = true)]
    iter_tol: Option<usize>,

    /// Synthetic acceleration: none, s2sa or dsa.
    #[arg(long, global = true)]
    accelerator: Option<Accelerator>,

    /// Cells per axis, e.g. `80` or `40,40`.
    #[arg(long, global = true, value_delimiter = ',')]
    cells: Option<Vec<usize>>,

    /// Training (or full-order) quadrature, `gl:N` or `circle:N`.
    #[arg(long, global = true)]
    training: Option<QuadratureSpec>,

    /// Test quadrature, `gl:N` or `circle:N`.
    #[arg(long, global = true)]
    test: Option<QuadratureSpec>,

    /// Greedy stopping tolerance on the spectral ratio.
    #[arg(long, global = true)]
    r_tol: Option<f64>,

    /// Maximum number of greedy iterations.
    #[arg(long, global = true)]
    m_tol: Option<usize>,

    /// Size of the initial direction set.
    #[arg(long, global = true)]
    n0: Option<usize>,
}

impl Global {
    pub fn sasi(&self, mut base: SasiConfig) -> SasiConfig {
        if let Some(t) = self.error_tol {
            base.error_tol = t;
        }
        if let Some(n) = self.iter_tol {
            base.iter_tol = n;
        }
        if let Some(a) = self.accelerator {
            base.accelerator = a;
        }
        base
    }

    pub fn greedy(&self, mut base: GreedyConfig) -> GreedyConfig {
        if let Some(n) = self.n0 {
            base.n0 = n;
        }
        if let Some(r) = self.r_tol {
            base.r_tol = r;
        }
        if let Some(m) = self.m_tol {
            base.m_tol = m;
        }
        base.sasi = self.sasi(base.sasi);
        base
    }
}

/// A catalog tag or a problem file.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct ProblemArgs {
    /// Catalog problem: 1d-1 ... 1d-5, 2d-1 ... 2d-4.
    #[arg(long)]
    example: Option<ExampleId>,

    /// Problem definition in the key-value format.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full-order source iteration on one quadrature.
    SolveFull {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Also write one CSV per direction.
        #[arg(long)]
        fields: bool,
    },
    /// Greedy training; writes a model file and the basis.
    TrainRb {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Reduced solves for a test quadrature from a model file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Also write one CSV per direction.
        #[arg(long)]
        fields: bool,
        /// Compare against a full-order solve on the test quadrature.
        #[arg(long)]
        reference: bool,
    },
    /// Reference solve, training and error metrics for one problem.
    Benchmark {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Scattering-strength sweep of the slab robustness family.
    Sweep {
        /// Values of C, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
        c: Vec<f64>,
    },
}

/// Outcome of a command that ran to the end.
pub enum Outcome {
    Done,
    NotConverged,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotConverged(_) => 2,
        Error::Config(_)
        | Error::UnknownExample(_)
        | Error::Parse(_)
        | Error::OutsideDomain { .. }
        | Error::TooLarge { .. }
        | Error::TrainingExhausted => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let g = &cli.global;
    let result = match cli.command {
        Command::SolveFull { problem, fields } => commands::solve_full(g, &problem, fields),
        Command::TrainRb { problem } => commands::train_rb(g, &problem),
        Command::Predict { model, fields, reference } => commands::predict(g, &model, fields, reference),
        Command::Benchmark { problem } => commands::benchmark(g, &problem),
        Command::Sweep { c } => commands::sweep(g, &c),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

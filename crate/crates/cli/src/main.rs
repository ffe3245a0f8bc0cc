use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use corrlink::analysis::{
    theory_additive, theory_max, theory_pareto, theory_threshold, theory_xvec, theory_yvec,
    TheoryReport,
};
use corrlink::harness::{csv_string, emit_csv, run_sweep_threads, selftest, ExperimentConfig};
use corrlink::linalg::CorrelationMatrix;
use corrlink::protocol::allocate_bits_xvec;
use corrlink::sources::{JointModel, MarginalLaw};
use corrlink::Error;

#[derive(Parser)]
#[command(name = "corrlink", version, about = "Correlation estimation under a bit budget")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo sweep described by a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: CORRLINK_THREADS or all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// CSV destination; overrides `output` in the config, stdout if neither.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print closed-form theory for one scheme.
    Theory {
        /// max, threshold, yvec, xvec, additive or pareto
        scheme: String,
        #[arg(long)]
        k: f64,
        /// One value, or comma-separated for vector schemes.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rho: Vec<f64>,
        #[arg(long, default_value_t = 4.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.3)]
        b0: f64,
        /// X law for the additive scheme.
        #[arg(long, default_value = "laplace")]
        law: String,
        /// Off-diagonal of an equicorrelated Σ_X.
        #[arg(long, default_value_t = 0.0)]
        sigma_x: f64,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::FailureRate { .. } => 2,
        Error::Io { .. } => 3,
        _ => 1,
    }
}

fn theory(
    scheme: &str,
    k: f64,
    rho: &[f64],
    alpha: f64,
    b0: f64,
    law: &str,
    sigma_x: f64,
) -> corrlink::Result<TheoryReport> {
    let first = || {
        rho.first()
            .copied()
            .ok_or_else(|| Error::Config("--rho is required".into()))
    };
    match scheme {
        "threshold" => theory_threshold(first()?, k),
        "max" => {
            if k.fract() != 0.0 || k < 1.0 {
                return Err(Error::Config("max scheme needs an integer k >= 1".into()));
            }
            theory_max(first()?, k as u32)
        }
        "yvec" => match JointModel::yvec_independent_noise(rho)? {
            JointModel::GaussianYVec { rho, sigma_y } => theory_yvec(&rho, &sigma_y, k),
            _ => unreachable!(),
        },
        "xvec" => {
            let sx = CorrelationMatrix::equicorrelated(rho.len(), sigma_x)?;
            let params = allocate_bits_xvec(k, rho.len(), b0)?;
            theory_xvec(rho, &sx, &params)
        }
        "additive" => theory_additive(law.parse::<MarginalLaw>()?, first()?, k),
        "pareto" => theory_pareto(alpha, first()?, k),
        other => Err(Error::Config(format!("unknown scheme '{other}'"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            threads,
            out,
        } => (|| {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let rows = run_sweep_threads(&cfg, threads)?;
            match out.or(cfg.output.clone()) {
                Some(p) => emit_csv(&rows, &p),
                None => {
                    print!("{}", csv_string(&rows));
                    Ok(())
                }
            }
        })(),
        Command::Theory {
            scheme,
            k,
            rho,
            alpha,
            b0,
            law,
            sigma_x,
        } => theory(&scheme, k, &rho, alpha, b0, &law, sigma_x).map(|r| print!("{r}")),
        Command::Selftest => {
            let checks = selftest();
            let mut failed = 0;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                Err(Error::Contract(format!("{failed} self-checks failed")))
            } else {
                Ok(())
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

mod checks;
mod commands;
mod fuzz;
mod io;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "abelia", version, about = "Heights, Siegel reduction and endomorphism bounds on abelian varieties")]
struct Cli {
    /// JSON input file; stdin when omitted.
    #[arg(long = "in", global = true, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Working precision in bits.
    #[arg(long, global = true, env = "ABELIA_PREC", default_value_t = 128)]
    prec: u32,
    /// Tolerance. Defaults to 1e-9 for structural checks, 1e-6 for heights.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,
    /// Expected dimension of tau.
    #[arg(long, global = true)]
    g: Option<usize>,
    /// Polarization type, e.g. `1,2`. A single value d stands for (d, ..., d).
    #[arg(long = "type", global = true, value_delimiter = ',')]
    ptype: Option<Vec<u64>>,
    /// Candidate budget for the d-height search.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget: u64,
    /// Canonical height method.
    #[arg(long, global = true, default_value = "auto", value_parser = ["auto", "doubling", "local"])]
    method: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Affine and entry-wise heights of a rational matrix.
    HeightsMatrix,
    /// d-height of a rational or algebraic number.
    HeightsHd,
    /// Reduce tau into the fundamental domain.
    SiegelReduce,
    /// Check fundamental domain membership.
    SiegelCheck,
    AvValidate,
    AvRosati,
    AvAlphas,
    AvChi,
    AvClassify,
    AvNormBounds,
    /// Canonical height of a rational point.
    EcHeight,
    /// Rational 2-isogeny and images of points.
    EcIsogeny,
    /// Height scaling of (P1, P2) -> (P1, 2 P2) on E x E.
    #[command(name = "verify-thm12")]
    VerifyThm12,
    VerifyIsogenyIdentity,
    /// Run a seeded invariant suite.
    Fuzz {
        #[arg(value_enum)]
        suite: fuzz::Suite,
    },
}

pub struct RunConfig {
    pub prec: u32,
    pub tol: Option<f64>,
    pub seed: u64,
    pub trials: usize,
    pub g: Option<usize>,
    pub ptype: Option<Vec<u64>>,
    pub budget: u64,
}

impl RunConfig {
    pub fn structural_tol(&self) -> f64 {
        self.tol.unwrap_or(1e-9)
    }

    pub fn height_tol(&self) -> f64 {
        self.tol.unwrap_or(1e-6)
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<Value, Failure> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Malformed(format!("{}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Malformed(e.to_string()))?;
            s
        }
    };
    serde_json::from_str(&text).map_err(|e| Failure::Malformed(format!("invalid JSON: {e}")))
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<Value, Failure> {
    let input = read_input(&cli.input)?;
    match &cli.cmd {
        Cmd::HeightsMatrix => commands::heights_matrix(&input),
        Cmd::HeightsHd => commands::heights_hd(&input, cfg, cfg.budget),
        Cmd::SiegelReduce => commands::siegel_reduce(&input, cfg),
        Cmd::SiegelCheck => commands::siegel_check(&input, cfg),
        Cmd::AvValidate => commands::av_validate(&input, cfg),
        Cmd::AvRosati => commands::av_rosati(&input, cfg),
        Cmd::AvAlphas => commands::av_alphas(&input, cfg),
        Cmd::AvChi => commands::av_chi(&input, cfg),
        Cmd::AvClassify => commands::av_classify(&input, cfg),
        Cmd::AvNormBounds => commands::av_norm_bounds(&input, cfg),
        Cmd::EcHeight => commands::ec_height(&input, cfg, &cli.method),
        Cmd::EcIsogeny => commands::ec_isogeny(&input),
        Cmd::VerifyThm12 => commands::verify_scaling(&input, cfg),
        Cmd::VerifyIsogenyIdentity => commands::verify_isogeny(&input, cfg),
        Cmd::Fuzz { .. } => unreachable!("handled before reading input"),
    }
}

fn emit(mut doc: Value, status: &str, prec: u32) {
    if let Value::Object(m) = &mut doc {
        m.insert("status".into(), json!(status));
        m.insert("precision_bits".into(), json!(prec));
    }
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = RunConfig {
        prec: cli.prec,
        tol: cli.tol,
        seed: cli.seed,
        trials: cli.trials,
        g: cli.g,
        ptype: cli.ptype.clone(),
        budget: cli.budget,
    };
    let bad_config = if cfg.prec < 64 {
        Some(format!("precision must be at least 64 bits, got {}", cfg.prec))
    } else if cfg.tol.is_some_and(|t| t.is_nan() || t <= 0.0) {
        Some("tolerance must be positive".to_string())
    } else if cfg.ptype.as_ref().is_some_and(|t| t.is_empty() || t.contains(&0)) {
        Some("type entries must be positive".to_string())
    } else {
        None
    };
    if let Some(msg) = bad_config {
        eprintln!("error: {msg}");
        emit(json!({}), "malformed_input", cfg.prec);
        return ExitCode::from(2);
    }

    if let Cmd::Fuzz { suite } = cli.cmd {
        let (doc, ok) = fuzz::run(suite, &cfg);
        if !ok {
            eprintln!("fuzz: violations found, see \"reproduction\"");
        }
        emit(doc, if ok { "ok" } else { "violation" }, cfg.prec);
        return ExitCode::from(if ok { 0 } else { 1 });
    }

    match dispatch(&cli, &cfg) {
        Ok(doc) => {
            emit(doc, "ok", cfg.prec);
            ExitCode::SUCCESS
        }
        Err(Failure::Violation(doc)) => {
            eprintln!("verification failed");
            emit(doc, "violation", cfg.prec);
            ExitCode::from(1)
        }
        Err(Failure::Malformed(msg)) => {
            eprintln!("error: {msg}");
            emit(json!({}), "malformed_input", cfg.prec);
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            emit(json!({}), "budget_exceeded", cfg.prec);
            ExitCode::from(3)
        }
    }
}

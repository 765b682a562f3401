//! Command-line interface: ring validation, cycle censuses, minimal
//! decomposition, affine analysis and the verification suites.
//!
//! Reports go to standard output (or `--out`); logging goes to standard
//! error. Exit codes: 0 success, 1 configuration or input error, 2 analysis
//! incomplete (unresolved leaves / failed properties), 3 precision
//! exhausted.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use padic_dynamics::engine::{decompose, EngineConfig};
use padic_dynamics::io::{
    affine_json, cycles_report, to_stable_string, tree_dot, tree_json, ElementLiteral,
    MapDescriptor, RingDescriptor,
};
use padic_dynamics::verify::{run as run_verify, VerifyConfig, DEFAULT_RINGS};
use padic_dynamics::{affine, dynamics, Error};

#[derive(Parser)]
#[command(
    name = "padicdyn",
    about = "Minimal decomposition of convergent power series dynamics on the integers of a finite extension of Q_p",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a ring descriptor and print the normalized form.
    Ring {
        /// Path to the ring descriptor JSON.
        #[arg(long)]
        ring: PathBuf,
    },
    /// Cycle census of the induced map at one level.
    Cycles {
        #[arg(long)]
        ring: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// Level n of the induced map on O/pi^n.
        #[arg(long)]
        level: u32,
        /// Override the ring descriptor's working precision.
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the minimal decomposition tree.
    Decompose {
        #[arg(long)]
        ring: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// Deepest level the engine may explore.
        #[arg(long, default_value_t = 8)]
        max_level: u32,
        /// Override the ring descriptor's working precision.
        #[arg(long)]
        precision: Option<u32>,
        /// Skip the one-level verification lift of each prediction.
        #[arg(long)]
        trust_predictions: bool,
        /// Output format: json or dot.
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form analysis of the affine map alpha x + beta.
    Affine {
        #[arg(long)]
        ring: PathBuf,
        /// Element literal: integer or pi-adic coefficient array.
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value = "0")]
        beta: String,
        /// Schedule depth to report.
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded property suites.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Ring set as "p,e,f;p,e,f;..." (default: 2,1,1;3,1,1;2,2,1;2,1,2).
        #[arg(long)]
        rings: Option<String>,
        /// Inject a named fault to demonstrate counterexample output.
        #[arg(long)]
        inject_fault: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::PrecisionExhausted(_) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn table_cap() -> u64 {
    std::env::var("PADIC_MAX_TABLE")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1 << 20)
}

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Descriptor(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Error::Descriptor(format!("{}: {e}", path.display())))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Ring { ring } => {
            let desc = RingDescriptor::parse(&read(&ring)?)?;
            let spec = desc.build()?;
            let report = serde_json::json!({
                "p": spec.p(),
                "e": spec.e(),
                "f": spec.f(),
                "degree": spec.degree(),
                "residue_field_order": spec.fq().card(),
                "precision": spec.precision(),
                "descriptor": serde_json::to_value(&desc).unwrap(),
            });
            println!("{}", to_stable_string(&report));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Cycles { ring, map, level, precision, out } => {
            let desc = RingDescriptor::parse(&read(&ring)?)?;
            let spec = match precision {
                Some(n) => desc.build_with_precision(n)?,
                None => desc.build()?,
            };
            let needed = dynamics::required_precision(&spec, level);
            if spec.precision() < needed {
                return Err(Error::PrecisionTooSmall { given: spec.precision(), needed });
            }
            let phi = MapDescriptor::parse(&read(&map)?)?.build(&spec)?;
            let report = cycles_report(&spec, &phi, level, table_cap())?;
            emit(&out, &to_stable_string(&report))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Decompose { ring, map, max_level, precision, trust_predictions, format, out } => {
            let desc = RingDescriptor::parse(&read(&ring)?)?;
            let spec = match precision {
                Some(n) => desc.build_with_precision(n)?,
                None => desc.build()?,
            };
            let needed = dynamics::required_precision(&spec, max_level);
            if spec.precision() < needed {
                return Err(Error::PrecisionTooSmall { given: spec.precision(), needed });
            }
            let phi = MapDescriptor::parse(&read(&map)?)?.build(&spec)?;
            let cfg = EngineConfig { max_level, table_cap: table_cap(), trust_predictions };
            eprintln!(
                "decomposing over p={} e={} f={} up to level {max_level}",
                spec.p(),
                spec.e(),
                spec.f()
            );
            let tree = decompose(&spec, &phi, &cfg)?;
            let text = match format.as_str() {
                "json" => to_stable_string(&tree_json(&spec, &tree)),
                "dot" => tree_dot(&tree),
                other => return Err(Error::Descriptor(format!("unknown format {other:?}"))),
            };
            emit(&out, &text)?;
            if tree.unresolved_count() == 0 {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("{} unresolved leaves at the level cap", tree.unresolved_count());
                Ok(ExitCode::from(2))
            }
        }
        Cmd::Affine { ring, alpha, beta, depth, format, out } => {
            let desc = RingDescriptor::parse(&read(&ring)?)?;
            let spec = desc.build()?;
            let alpha_lit = ElementLiteral::parse(&alpha)?;
            let beta_lit = ElementLiteral::parse(&beta)?;
            let a = alpha_lit.build(&spec)?;
            let b = beta_lit.build(&spec)?;
            let report = affine::affine_classify(&spec, &a, &b, depth, alpha_lit.as_int())?;
            if format != "json" {
                return Err(Error::Descriptor(format!("unknown format {format:?}")));
            }
            emit(&out, &to_stable_string(&affine_json(&spec, &report)))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { seed, rings, inject_fault, out } => {
            let ring_list = match rings {
                None => DEFAULT_RINGS.to_vec(),
                Some(text) => parse_ring_list(&text)?,
            };
            let cfg = VerifyConfig { seed, rings: ring_list, inject_fault };
            eprintln!("running property suites with seed {seed}");
            let report = run_verify(&cfg)?;
            emit(&out, &to_stable_string(&report.to_json()))?;
            if report.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("some properties failed");
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn parse_ring_list(text: &str) -> Result<Vec<(u64, usize, usize)>, Error> {
    text.split(';')
        .map(|chunk| {
            let parts: Vec<&str> = chunk.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Descriptor(format!("bad ring triple {chunk:?}")));
            }
            let p = parts[0].trim().parse().map_err(|_| Error::Descriptor(chunk.into()))?;
            let e = parts[1].trim().parse().map_err(|_| Error::Descriptor(chunk.into()))?;
            let f = parts[2].trim().parse().map_err(|_| Error::Descriptor(chunk.into()))?;
            Ok((p, e, f))
        })
        .collect()
}

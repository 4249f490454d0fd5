//! Command-line front end: parses a run configuration, drives the library,
//! and prints text or structured output. Structured output is byte-identical
//! across repeated identical runs. Exit codes: 0 success, 2 domain or
//! validation failure, 3 solver failure, 4 parse failure.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use toripot::error::Error;
use toripot::matcher::{f2_problem, solve_correction};
use toripot::novikov::ScalarMode;
use toripot::potential::{parse_model, ToricModel, Var, REGISTRY_NAMES};
use toripot::rat::{parse_rat, rati, Rat};
use toripot::report;
use toripot::solver::{bulk_profile, critical_profile, find_balanced, sweep_family, RhoSpec};
use toripot::Result;

/// Exact computations with toric superpotentials over the truncated Novikov
/// field: potentials, critical-point profiles, balanced fibers, bulk
/// deformations, and correction matching.
#[derive(Parser)]
#[command(name = "toripot", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a model's potential, symbolic or specialized at a fiber point
    Po {
        #[command(flatten)]
        model: ModelArgs,
        /// Fiber point "u1,u2"; omitted keeps energies symbolic
        #[arg(long)]
        u: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Profile the critical points and families at a fiber point
    Crit {
        #[command(flatten)]
        model: ModelArgs,
        /// Fiber point "u1,u2" in the polytope interior
        #[arg(long)]
        u: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Locate the balanced fiber points and open segments
    Balanced {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Determine the unknown correction series by critical-value matching
    Match {
        /// Model carrying the unknown correction slot
        #[arg(long)]
        unknown: String,
        /// Reference model whose critical values are to be reproduced
        #[arg(long)]
        reference: String,
        /// Shared model parameter, as an exact rational
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Profile the critical points after a bulk deformation
    Bulk {
        #[command(flatten)]
        model: ModelArgs,
        /// Fiber point "u1,u2" in the polytope interior
        #[arg(long)]
        u: String,
        /// Divisor class driving the deformation
        #[arg(long, default_value = "S2van")]
        divisor: String,
        /// Deformation weight: "auto" for (u2 - u1)/2, or an exact rational
        #[arg(long, default_value = "auto")]
        rho: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sweep critical profiles along a segment of fiber points
    Family {
        #[command(flatten)]
        model: ModelArgs,
        /// First sample point "u1,u2"
        #[arg(long)]
        start: String,
        /// Last sample point "u1,u2"
        #[arg(long)]
        end: String,
        /// Number of evenly spaced samples, endpoints included
        #[arg(long, default_value_t = 5)]
        steps: usize,
        /// Apply a bulk deformation by this divisor at every sample
        #[arg(long)]
        divisor: Option<String>,
        /// Deformation weight for --divisor: "auto" or an exact rational
        #[arg(long, default_value = "auto")]
        rho: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Registry name (F2, S2xS2, F2hat, square) or a model file path
    #[arg(long)]
    model: String,
    /// Binds the model parameter alpha, as an exact rational
    #[arg(long)]
    alpha: Option<String>,
}

impl ModelArgs {
    fn load(&self) -> Result<ToricModel> {
        let mut params = BTreeMap::new();
        if let Some(a) = &self.alpha {
            params.insert(Var::Alpha, parse_rat(a)?);
        }
        if REGISTRY_NAMES.contains(&self.model.as_str()) {
            ToricModel::registry(&self.model, &params)
        } else {
            let text = std::fs::read_to_string(&self.model).map_err(|err| {
                Error::Model(format!("cannot read model file {}: {}", self.model, err))
            })?;
            parse_model(&text, &params)
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Cutoff exponent: series are computed modulo T^E
    #[arg(long = "E", env = "TORIPOT_E", default_value = "4", value_name = "RAT")]
    e: String,
    /// Scalar arithmetic backend
    #[arg(long, env = "TORIPOT_MODE", value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Comparison threshold for float mode
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl RunArgs {
    fn cutoff(&self) -> Result<Rat> {
        let e = parse_rat(&self.e)?;
        if e <= rati(0) {
            return Err(Error::Domain("the cutoff E must be positive".to_string()));
        }
        Ok(e)
    }

    fn scalar_mode(&self) -> Result<ScalarMode> {
        match self.mode {
            ModeArg::Exact => {
                if self.eps.is_some() {
                    return Err(Error::Domain(
                        "--eps only applies to --mode float".to_string(),
                    ));
                }
                Ok(ScalarMode::Exact)
            }
            ModeArg::Float => {
                let eps = self.eps.unwrap_or(ScalarMode::DEFAULT_EPS);
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(Error::Domain("--eps must be a positive float".to_string()));
                }
                Ok(ScalarMode::Float { eps })
            }
        }
    }
}

fn parse_point(text: &str) -> Result<Vec<Rat>> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        // A fiber point is two comma-separated rationals, so anything else
        // reads as one malformed rational.
        return Err(Error::MalformedRational(text.to_string()));
    }
    parts.iter().map(|p| parse_rat(p.trim())).collect()
}

fn parse_rho(text: &str) -> Result<RhoSpec> {
    if text == "auto" {
        Ok(RhoSpec::Auto)
    } else {
        Ok(RhoSpec::Fixed(parse_rat(text)?))
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|err| Error::Model(format!("serialization failed: {err}")))?;
    s.push('\n');
    Ok(s)
}

fn run(command: Command) -> Result<String> {
    match command {
        Command::Po { model, u, out } => {
            let m = model.load()?;
            let full = m.full_potential();
            let (u, potential) = match u {
                Some(text) => {
                    let u = parse_point(&text)?;
                    m.check_interior(&u)?;
                    let specialized = full.specialize(&u, None)?.collapse_classes();
                    (Some(u), specialized)
                }
                None => (None, full.collapse_classes()),
            };
            match out.format {
                Format::Text => Ok(report::potential_text(&m.name, u.as_deref(), &potential)),
                Format::Json => json(&report::PotentialRepr::new(&m.name, u.as_deref(), &potential)),
            }
        }
        Command::Crit { model, u, run } => {
            let m = model.load()?;
            let u = parse_point(&u)?;
            let profile = critical_profile(&m, &u, &run.cutoff()?, run.scalar_mode()?)?;
            match run.out.format {
                Format::Text => Ok(report::profile_text(&profile)),
                Format::Json => json(&report::ProfileRepr::new(&profile)),
            }
        }
        Command::Balanced { model, run } => {
            let m = model.load()?;
            let balanced = find_balanced(&m, run.scalar_mode()?)?;
            match run.out.format {
                Format::Text => Ok(report::balanced_text(&m.name, &balanced)),
                Format::Json => json(&report::BalancedRepr::new(&m.name, &balanced)),
            }
        }
        Command::Match { unknown, reference, alpha, run } => {
            if unknown != "F2" || reference != "S2xS2" {
                return Err(Error::Unsupported(format!(
                    "matching is implemented for --unknown F2 against --reference S2xS2, \
                     got {unknown} against {reference}"
                )));
            }
            let problem = f2_problem(&parse_rat(&alpha)?)?;
            let outcome = solve_correction(&problem, &run.cutoff()?, run.scalar_mode()?)?;
            match run.out.format {
                Format::Text => Ok(report::match_text(&outcome)),
                Format::Json => json(&report::MatchRepr::new(&outcome)),
            }
        }
        Command::Bulk { model, u, divisor, rho, run } => {
            let m = model.load()?;
            let u = parse_point(&u)?;
            let spec = parse_rho(&rho)?;
            let profile = bulk_profile(&m, &divisor, &spec, &u, &run.cutoff()?, run.scalar_mode()?)?;
            let rho_value = spec.resolve(&u)?;
            match run.out.format {
                Format::Text => Ok(report::bulk_text(&divisor, &rho_value, &profile)),
                Format::Json => json(&report::BulkRepr::new(&divisor, &rho_value, &profile)),
            }
        }
        Command::Family { model, start, end, steps, divisor, rho, run } => {
            let m = model.load()?;
            let start = parse_point(&start)?;
            let end = parse_point(&end)?;
            let spec = parse_rho(&rho)?;
            let bulk = divisor.as_deref().map(|d| (d, &spec));
            let samples =
                sweep_family(&m, &start, &end, steps, &run.cutoff()?, run.scalar_mode()?, bulk)?;
            match run.out.format {
                Format::Text => Ok(report::sweep_text(&samples)),
                Format::Json => json(&report::SweepRepr::new(&samples)),
            }
        }
    }
}

/// Buckets every library error into the documented exit codes.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::MalformedRational(_) => 4,
        Error::Domain(_)
        | Error::Model(_)
        | Error::NonUnitCoordinate { .. }
        | Error::IncompleteBulkData { .. } => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

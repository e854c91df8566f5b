//! Command-line surface: argument parsing and dispatch to the library.
//!
//! [`dispatch`] never touches the process; it returns the exit code and the
//! text destined for stdout and stderr, so the binary and the tests share it.

use std::collections::BTreeMap;
use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::compose::{compose, group_inverse, Uniformiser};
use crate::error::{Error, Result};
use crate::field::{is_prime, least_prime_other_than, Field};
use crate::formulas::{
    emit_beta_with_prime, emit_gamma_with_prime, eval_formula, substitute_o, Formula, Lang, Node,
};
use crate::hensel::{solve, HenselData};
use crate::orbit::{nearly_open_bound, orbit_member, sample_orbit, Membership};
use crate::series::Series;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Config {
    /// Characteristic: a prime, or 0 for the rationals
    #[arg(long, global = true, default_value_t = 2)]
    pub p: u64,
    /// Precision appended to series given without an `O(t^P)` term
    #[arg(long, global = true, value_parser = clap::value_parser!(i64).range(2..))]
    pub prec: Option<i64>,
    /// Seed for every random choice
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Robinson prime; defaults to the least prime different from p
    #[arg(long, global = true)]
    pub l: Option<u64>,
    /// Cap on searched coefficients
    #[arg(long, global = true, default_value_t = 24, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    #[arg(long = "format", global = true, value_enum, default_value_t = Format::Text)]
    pub output: Format,
}

#[derive(Debug, Parser)]
#[command(name = "orbits", version, about = "Truncated Laurent series, substitution orbits and their defining formulas")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// f ∘ s
    Compose { f: String, s: String },
    /// Multiplicative inverse 1/x
    Invert { x: String },
    /// Compositional inverse of a uniformiser
    Reverse { s: String },
    /// Solve f(y) = b with y ∈ t + M^n
    Solve {
        #[arg(long, default_value_t = 1)]
        n: i64,
        f: String,
        b: String,
    },
    /// Orbit bounds, samples and membership
    #[command(subcommand)]
    Orbit(OrbitCommand),
    /// Evaluate a formula at series values given as NAME=SERIES
    Eval {
        formula: String,
        bindings: Vec<String>,
    },
    /// The orbit formula β(x; t), or γ(x) with --gamma
    Emit {
        #[arg(long, default_value_t = 1)]
        n: i64,
        #[arg(long)]
        gamma: bool,
        a: String,
    },
    /// Replace O-atoms of a valued-field formula by Ax's definition (exponent --l)
    SubstituteO { formula: String },
}

#[derive(Debug, Subcommand)]
enum OrbitCommand {
    /// Radii of the nearly-open balls as JSON
    Bound {
        #[arg(long, default_value_t = 1)]
        n: i64,
        b: String,
    },
    /// Random elements a ∘ s of Orb_n(a)
    Sample {
        #[arg(long, default_value_t = 1)]
        n: i64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        a: String,
    },
    /// Decide b ∈ Orb_n(a) on the common precision window
    Member {
        #[arg(long, default_value_t = 1)]
        n: i64,
        a: String,
        b: String,
    },
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }
}

/// Runs one command line; `argv[0]` is the program name.
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = Cli::try_parse_from(argv).and_then(|cli| match (&cli.command, cli.config.seed) {
        (Command::Orbit(OrbitCommand::Sample { .. }), None) => Err(Cli::command().error(
            ErrorKind::MissingRequiredArgument,
            "orbit sample needs --seed",
        )),
        _ => Ok(cli),
    });
    let cli = match parsed {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome::ok(text)
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match run(&cli) {
        Ok(mut out) => {
            if !out.ends_with('\n') {
                out.push('\n');
            }
            Outcome::ok(out)
        }
        Err(e) => Outcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("{}: {e}\n", e.code()),
        },
    }
}

struct Ctx<'a> {
    config: &'a Config,
    field: Field,
}

impl Ctx<'_> {
    /// Reads a series in the text grammar, or in JSON when it starts with `{`.
    fn series(&self, text: &str) -> Result<Series> {
        let x = if text.trim_start().starts_with('{') {
            Series::from_json_str(text)?
        } else {
            match (Series::parse(text, self.field), self.config.prec) {
                (Err(Error::MissingPrecision), Some(prec)) => {
                    Series::parse(&format!("{text} + O(t^{prec})"), self.field)?
                }
                (r, _) => r?,
            }
        };
        if x.characteristic() != self.field.characteristic() {
            return Err(Error::CharacteristicMismatch(
                self.field.characteristic(),
                x.characteristic(),
            ));
        }
        Ok(x)
    }

    fn show(&self, x: &Series) -> String {
        match self.config.output {
            Format::Text => x.to_string(),
            Format::Json => x.to_json_string(),
        }
    }

    fn robinson_prime(&self) -> Result<u64> {
        let p = self.field.characteristic();
        let l = self.config.l.unwrap_or(least_prime_other_than(p));
        if !is_prime(l) || l == p {
            return Err(Error::BadParams(format!("l = {l} must be a prime different from p = {p}")));
        }
        Ok(l)
    }

    fn formula(&self, f: &Formula) -> String {
        match self.config.output {
            Format::Text => f.to_string(),
            Format::Json => json!({
                "lang": f.lang.to_string(),
                "free": f.free,
                "formula": f.to_string(),
            })
            .to_string(),
        }
    }
}

fn run(cli: &Cli) -> Result<String> {
    let config = &cli.config;
    let field = if config.p == 0 {
        Field::rationals()
    } else {
        Field::new(config.p)?
    };
    let ctx = Ctx { config, field };
    match &cli.command {
        Command::Compose { f, s } => Ok(ctx.show(&compose(&ctx.series(f)?, &ctx.series(s)?)?)),
        Command::Invert { x } => Ok(ctx.show(&ctx.series(x)?.invert()?)),
        Command::Reverse { s } => {
            let s = Uniformiser::new(ctx.series(s)?)?;
            Ok(ctx.show(group_inverse(&s).as_series()))
        }
        Command::Solve { n, f, b } => {
            let f = ctx.series(f)?;
            let y = solve(&f, *n, &ctx.series(b)?)?;
            Ok(match config.output {
                Format::Text => y.to_string(),
                Format::Json => json!({
                    "solver": HenselData::new(&f, *n)?,
                    "y": y.to_json(),
                })
                .to_string(),
            })
        }
        Command::Orbit(cmd) => orbit(&ctx, cmd),
        Command::Eval { formula, bindings } => {
            let node = Node::parse(formula, field)?;
            let mut env = BTreeMap::new();
            for binding in bindings {
                let (name, value) = binding.split_once('=').ok_or_else(|| {
                    Error::BadParams(format!("binding '{binding}' is not of the form NAME=SERIES"))
                })?;
                env.insert(name.trim().to_string(), ctx.series(value)?);
            }
            if let Some(v) = node.free_vars().into_iter().find(|v| !env.contains_key(v)) {
                return Err(Error::NotEvaluable(format!("free variable {v} has no value")));
            }
            if env.is_empty() {
                // only the field is read from the environment of a closed formula
                env.insert(String::new(), Series::t(field, config.prec.unwrap_or(2)));
            }
            let r = eval_formula(&node, &env, config.depth as usize)?;
            Ok(match config.output {
                Format::Text => r.to_string(),
                Format::Json => json!({ "result": r.to_string() }).to_string(),
            })
        }
        Command::Emit { n, gamma, a } => {
            let a = ctx.series(a)?;
            let l = ctx.robinson_prime()?;
            let f = if *gamma {
                emit_gamma_with_prime(&a, *n, l)?
            } else {
                emit_beta_with_prime(&a, *n, l)?
            };
            Ok(ctx.formula(&f))
        }
        Command::SubstituteO { formula } => {
            let f = Formula::parse(formula, Lang::ValuedField, field)?;
            Ok(ctx.formula(&substitute_o(&f, ctx.robinson_prime()?)?))
        }
    }
}

fn orbit(ctx: &Ctx<'_>, cmd: &OrbitCommand) -> Result<String> {
    let config = ctx.config;
    match cmd {
        OrbitCommand::Bound { n, b } => {
            let bound = nearly_open_bound(&ctx.series(b)?, *n)?;
            Ok(serde_json::to_string(&bound).expect("bound json"))
        }
        OrbitCommand::Sample { n, count, a } => {
            let seed = config.seed.expect("checked by dispatch");
            let xs = sample_orbit(&ctx.series(a)?, *n, seed, *count)?;
            Ok(match config.output {
                Format::Text => xs.iter().map(Series::to_string).collect::<Vec<_>>().join("\n"),
                Format::Json => {
                    Value::Array(xs.iter().map(|x| json!(x.to_json())).collect()).to_string()
                }
            })
        }
        OrbitCommand::Member { n, a, b } => {
            let m = orbit_member(&ctx.series(a)?, &ctx.series(b)?, *n, config.depth as usize)?;
            Ok(match (&m, config.output) {
                (Membership::Witness(w), Format::Text) => {
                    format!("witness s = {} (verified below t^{})", w.s.as_series(), w.verified_to)
                }
                (Membership::Witness(w), Format::Json) => json!({
                    "result": "witness",
                    "s": w.s.as_series().to_json(),
                    "verified_to": w.verified_to,
                })
                .to_string(),
                (Membership::NotInOrbit, Format::Text) => "not in orbit".into(),
                (Membership::Unknown, Format::Text) => "unknown".into(),
                (Membership::NotInOrbit, Format::Json) => json!({ "result": "not_in_orbit" }).to_string(),
                (Membership::Unknown, Format::Json) => json!({ "result": "unknown" }).to_string(),
            })
        }
    }
}

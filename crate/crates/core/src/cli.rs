//! The `hardy` command line.
//!
//! Exit codes: 0 success, 1 a FAIL row in the result table, 2 usage, 3 unreadable or
//! invalid spec, 4 divergent `B` under `--strict`, 5 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checks::run_checks;
use crate::constants::{bound_report, k_literature, k_sharp, BConfig, Exponents, LowerBound};
use crate::error::Error;
use crate::measure::Measure;
use crate::report::{Factors, Inputs, Report, Row, Trial};
use crate::reproduce::{reflect_spec, reproduce, ReproduceOptions, SCENARIOS};
use crate::spec::MeasureSpec;
use crate::variational::{
    bliss_composed_trial, bliss_trial, default_partition, optimize_quotient, rayleigh, TestFunction,
};

pub const EXIT_FAIL_ROW: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_DIVERGENT: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "hardy",
    version,
    about = "Bounds for the optimal constant of two-measure Hardy inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the sharp factor k_{q,p} and the earlier factors.
    Kqp {
        #[command(flatten)]
        exp: ExpArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compute B, the upper bound k_{q,p} B and optionally a certified lower bound.
    Bound {
        #[command(flatten)]
        exp: ExpArgs,
        #[command(flatten)]
        measures: MeasureArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Also search for a lower bound A_lower by coordinate ascent.
        #[arg(long)]
        certify: bool,
        /// Reflect both measures first (the dual operator).
        #[arg(long)]
        dual: bool,
        /// Exit with code 4 when B diverges.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Evaluate the Rayleigh quotient of one trial function.
    Rayleigh {
        #[command(flatten)]
        exp: ExpArgs,
        #[command(flatten)]
        measures: MeasureArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Trial function as JSON, e.g. {"family":"step","x0":1,"height":1}.
        #[arg(long, value_name = "FILE", conflicts_with = "family")]
        trial: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Family::Optimize)]
        family: Family,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// Coordinate-ascent sweeps for --family optimize.
        #[arg(long, default_value_t = 200)]
        iters: usize,
        /// Partition cells for --family optimize.
        #[arg(long, default_value_t = 64)]
        cells: usize,
        /// Reflect both measures first.
        #[arg(long)]
        dual: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a named scenario and print expected against computed values.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SCENARIOS))]
        name: String,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the randomized property suites.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug)]
struct ExpArgs {
    /// Exponent on the nu side, 1 < p < inf.
    #[arg(long)]
    p: f64,
    /// Exponent on the mu side, p <= q < inf.
    #[arg(long)]
    q: f64,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// Spec file of nu, the measure of the L^p side.
    #[arg(long, value_name = "FILE")]
    nu: PathBuf,
    /// Spec file of mu, the measure of the L^q side.
    #[arg(long, value_name = "FILE")]
    mu: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Triadic depth of the Cantor candidates.
    #[arg(long)]
    depth: Option<u32>,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Write the output here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record wall-clock time in the report (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Family {
    Bliss,
    BlissComposed,
    Step,
    PowerTail,
    Optimize,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidExponents(_) | Error::InvalidArgument(_) => EXIT_USAGE,
            Error::Spec { .. } | Error::InvalidMeasure(_) => EXIT_PARSE,
            _ => EXIT_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs the command line `args` (program name first); returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read_spec(path: &Path) -> Result<MeasureSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    MeasureSpec::from_json(&text).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("{}: {e}", path.display()),
    })
}

fn load(
    m: &MeasureArgs,
    dual: bool,
) -> Result<(MeasureSpec, MeasureSpec, Measure, Measure), Failure> {
    let (nu, mu) = (read_spec(&m.nu)?, read_spec(&m.mu)?);
    let (nu_used, mu_used) = if dual {
        (reflect_spec(nu.clone()), reflect_spec(mu.clone()))
    } else {
        (nu.clone(), mu.clone())
    };
    let built = |s: &MeasureSpec, path: &Path| {
        s.build().map_err(|e| Failure {
            code: EXIT_PARSE,
            message: format!("{}: {e}", path.display()),
        })
    };
    let nu_m = built(&nu_used, &m.nu)?;
    let mu_m = built(&mu_used, &m.mu)?;
    Ok((nu, mu, nu_m, mu_m))
}

fn config(run: &RunArgs) -> Result<BConfig, Failure> {
    if !(run.tol > 0.0 && run.tol < 1.0) {
        return Err(
            Error::InvalidArgument(format!("--tol must lie in (0, 1), got {}", run.tol)).into(),
        );
    }
    let mut cfg = BConfig {
        mass_tol: run.tol,
        ..BConfig::default()
    };
    if let Some(d) = run.depth {
        cfg.depth = d;
    }
    Ok(cfg)
}

fn inputs(exp: &ExpArgs, run: &RunArgs, cfg: &BConfig) -> Inputs {
    Inputs {
        p: Some(exp.p),
        q: Some(exp.q),
        seed: run.seed,
        tol: run.tol,
        depth: cfg.depth,
        ..Inputs::default()
    }
}

fn emit(
    report: &mut Report,
    o: &OutArgs,
    started: Instant,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    if o.timing {
        report.metadata.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
    }
    let text = match o.format {
        Format::Json => report.to_json(),
        Format::Csv => report.table_csv()?,
    };
    let io = |e: std::io::Error| Failure {
        code: EXIT_FAIL_ROW,
        message: format!("cannot write output: {e}"),
    };
    match &o.out {
        Some(path) => std::fs::write(path, text).map_err(io),
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

fn verdict(report: &Report) -> i32 {
    if report.all_pass() {
        0
    } else {
        EXIT_FAIL_ROW
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let started = Instant::now();
    match command {
        Command::Kqp { exp, out: o } => {
            let e = Exponents::new(exp.p, exp.q)?;
            let cfg = BConfig::default();
            let mut r = Report::new(
                "kqp",
                Inputs {
                    p: Some(e.p),
                    q: Some(e.q),
                    tol: cfg.mass_tol,
                    depth: cfg.depth,
                    ..Inputs::default()
                },
                &cfg,
            );
            let k = k_sharp(&e);
            let lit = k_literature(&e);
            for (name, v) in &lit {
                r.table.push(Row::new(
                    "kqp",
                    &format!("k_sharp <= {name}"),
                    format!("<= {v}"),
                    k,
                    "abs 1e-12",
                    k <= v + 1e-12,
                ));
            }
            r.exponents = Some(e);
            r.factors = Some(Factors {
                k_sharp: k,
                k_literature: lit,
            });
            emit(&mut r, &o, started, out)?;
            Ok(verdict(&r))
        }
        Command::Bound {
            exp,
            measures,
            run,
            certify,
            dual,
            strict,
            out: o,
        } => {
            let e = Exponents::new(exp.p, exp.q)?;
            let cfg = config(&run)?;
            let (nu, mu, nu_m, mu_m) = load(&measures, dual)?;
            let lower = if certify {
                LowerBound::Optimize {
                    iters: 200,
                    seed: run.seed,
                    cells: 64,
                }
            } else {
                LowerBound::None
            };
            let bound = bound_report(&nu_m, &mu_m, &e, &cfg, &lower)?;
            let ins = Inputs {
                nu: Some(nu),
                mu: Some(mu),
                dual,
                certify,
                ..inputs(&exp, &run, &cfg)
            };
            let mut r = Report::new("bound", ins, &cfg).with_bound(bound);
            let b = r.bound.as_ref().unwrap();
            let divergent = b.b_divergent;
            if let Some(a) = b.a_lower {
                r.table.push(Row::new(
                    "bound",
                    "A_lower <= k_sharp * B",
                    format!("<= {}", b.upper),
                    a,
                    "rel 1e-5",
                    b.sandwich_ok,
                ));
            }
            emit(&mut r, &o, started, out)?;
            if divergent && strict {
                let _ = writeln!(err, "B diverges");
                return Ok(EXIT_DIVERGENT);
            }
            Ok(verdict(&r))
        }
        Command::Rayleigh {
            exp,
            measures,
            run,
            trial,
            family,
            gamma,
            delta,
            x0,
            eps,
            iters,
            cells,
            dual,
            out: o,
        } => {
            let e = Exponents::new(exp.p, exp.q)?;
            let cfg = config(&run)?;
            let (nu, mu, nu_m, mu_m) = load(&measures, dual)?;
            let (f, res) = match (&trial, family) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Failure {
                        code: EXIT_PARSE,
                        message: format!("cannot read {}: {e}", path.display()),
                    })?;
                    let f: TestFunction = serde_json::from_str(&text).map_err(|e| Failure {
                        code: EXIT_PARSE,
                        message: format!(
                            "{}: line {}, column {}: {e}",
                            path.display(),
                            e.line(),
                            e.column()
                        ),
                    })?;
                    f.validate(&e).map_err(|e| Failure {
                        code: EXIT_PARSE,
                        message: format!("{}: {e}", path.display()),
                    })?;
                    let res = rayleigh(&f, &nu_m, &mu_m, &e, run.tol)?;
                    (f, res)
                }
                (None, Family::Optimize) => {
                    let partition = default_partition(&nu_m, &mu_m, cells, cfg.truncation)?;
                    optimize_quotient(&nu_m, &mu_m, &e, &partition, iters, run.seed)?
                }
                (None, fam) => {
                    let f = match fam {
                        Family::Bliss => bliss_trial(&e, gamma, delta)?,
                        Family::BlissComposed => bliss_composed_trial(&e, gamma, delta)?,
                        Family::Step => TestFunction::step(x0),
                        _ => TestFunction::power_tail(&e, eps)?,
                    };
                    let res = rayleigh(&f, &nu_m, &mu_m, &e, run.tol)?;
                    (f, res)
                }
            };
            let ins = Inputs {
                nu: Some(nu),
                mu: Some(mu),
                dual,
                ..inputs(&exp, &run, &cfg)
            };
            let mut r = Report::new("rayleigh", ins, &cfg);
            r.exponents = Some(e);
            r.trials.push(Trial {
                family: f.family().into(),
                function: f,
                result: res,
            });
            emit(&mut r, &o, started, out)?;
            Ok(0)
        }
        Command::Reproduce {
            name,
            p,
            q,
            run,
            out: o,
        } => {
            let opts = ReproduceOptions {
                p,
                q,
                seed: run.seed,
                tol: run.tol,
                depth: run.depth,
                ..ReproduceOptions::default()
            };
            let mut r = reproduce(&name, &opts)?;
            let _ = write!(err, "{}", r.table_text());
            emit(&mut r, &o, started, out)?;
            Ok(verdict(&r))
        }
        Command::Check { seed, out: o } => {
            let cfg = BConfig::default();
            let mut r = Report::new(
                "check",
                Inputs {
                    seed,
                    tol: cfg.mass_tol,
                    depth: cfg.depth,
                    ..Inputs::default()
                },
                &cfg,
            );
            for c in run_checks(seed)? {
                let expected = format!(
                    "all {} cases within tolerance ({} failing)",
                    c.cases, c.failures
                );
                r.table.push(Row::new(
                    "check",
                    &c.name,
                    expected,
                    c.worst,
                    format!("{:e}", c.tolerance),
                    c.pass,
                ));
            }
            let _ = write!(err, "{}", r.table_text());
            emit(&mut r, &o, started, out)?;
            Ok(verdict(&r))
        }
    }
}

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use per1_core::algebra::Lambda;
use per1_core::dynamics::Sign;
use per1_core::measure::{Resolution, Window};

use crate::config::{CapacityChoice, Check, OutputFormat, RenderKind, RunConfig, SignChoice, Task};
use crate::error::CliError;

/// Dynamics of f(z) = lambda z / (z^2 + t z + 1): bifurcation images,
/// postcritically finite parameters, local and global heights.
///
/// Multipliers given as integers or `p/q` (optionally `a+bi` with rational
/// parts) take the exact paths; decimals take the floating paths.
#[derive(Debug, Parser)]
#[command(name = "per1", version)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "PER1_THREADS")]
    pub threads: Option<usize>,
    /// Seed for the sampled checks.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Target accuracy of computed potentials and series.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output stem; extensions are appended.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Image of the bifurcation locus in the t-plane.
    Render {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// re_min:re_max:im_min:im_max
        #[arg(long, allow_hyphen_values = true, default_value = "-5:5:-5:5")]
        window: String,
        /// N or NxM samples.
        #[arg(long, default_value = "512")]
        res: String,
        /// +, - or both.
        #[arg(long, allow_hyphen_values = true, default_value = "+")]
        sign: String,
        #[arg(long, value_enum, default_value = "locus")]
        kind: RenderKind,
    },
    /// Parameters where f_t^n(c) = f_t^m(c) for the critical point c.
    Pcf {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        m: u32,
        #[arg(long, allow_hyphen_values = true, default_value = "+")]
        sign: String,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Run the consistency checks.
    Verify {
        /// Checks to run (default: all).
        #[arg(long = "check", value_enum, value_delimiter = ',')]
        checks: Vec<Check>,
        /// Multiplier for the checks that take one.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Canonical height of the critical point with its local decomposition.
    Heights {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, allow_hyphen_values = true, default_value = "+")]
        sign: String,
        /// Terms of the global gamma sum.
        #[arg(long, default_value_t = 60)]
        terms: usize,
    },
    /// Local gamma values and the global sum.
    Gamma {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Comma-separated primes and `inf`.
        #[arg(long, value_delimiter = ',')]
        places: Vec<String>,
        #[arg(long, default_value_t = 60)]
        terms: usize,
    },
    /// Homogeneous capacity by the closed form and the resultant limit.
    Capacity {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, value_enum, default_value = "both")]
        mode: CapacityChoice,
        #[arg(long, default_value_t = 12)]
        n: u32,
        /// Largest n accepted for the exact resultant.
        #[arg(long, default_value_t = 14)]
        n_max: u32,
    },
    /// Re-run a configuration emitted by an earlier run.
    Replay { config: PathBuf },
}

pub fn parse_lambda(s: &str) -> Result<Lambda, CliError> {
    s.parse().map_err(|e: per1_core::Error| CliError::usage(format!("--lambda: {e}")))
}

pub fn parse_sign(s: &str) -> Result<Sign, CliError> {
    s.parse().map_err(|_| CliError::usage(format!("sign must be + or -, got {s:?}")))
}

pub fn parse_sign_choice(s: &str) -> Result<SignChoice, CliError> {
    match s {
        "both" => Ok(SignChoice::Both),
        _ => parse_sign(s).map(|x| match x {
            Sign::Plus => SignChoice::Plus,
            Sign::Minus => SignChoice::Minus,
        }),
    }
}

pub fn parse_window(s: &str) -> Result<Window, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::usage(format!("window must be re_min:re_max:im_min:im_max, got {s:?}"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Window::from_bounds(v[0], v[1], v[2], v[3]).map_err(|e| CliError::usage(format!("window {s:?}: {e}")))
}

pub fn parse_resolution(s: &str) -> Result<Resolution, CliError> {
    let bad = || CliError::usage(format!("resolution must be N or NxM, got {s:?}"));
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
    let r = match s.split_once('x') {
        Some((a, b)) => Resolution::new(num(a)?, num(b)?),
        None => Resolution::square(num(s)?),
    };
    r.map_err(|e| CliError::usage(format!("resolution {s:?}: {e}")))
}

fn default_tol(task: &Task) -> f64 {
    match task {
        Task::Render { .. } => 1e-6,
        _ => 1e-12,
    }
}

impl Cli {
    /// Resolve the arguments into a configuration; `Replay` reads it from disk.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let task = match self.command {
            Command::Replay { config } => {
                let text = std::fs::read_to_string(&config)
                    .map_err(|e| CliError::usage(format!("{}: {e}", config.display())))?;
                return RunConfig::from_json(&text).map_err(|e| CliError::usage(format!("{}: {e}", config.display())));
            }
            Command::Render { lambda, window, res, sign, kind } => Task::Render {
                lambda: parse_lambda(&lambda)?,
                window: parse_window(&window)?,
                resolution: parse_resolution(&res)?,
                sign: parse_sign_choice(&sign)?,
                kind,
            },
            Command::Pcf { lambda, n, m, sign, format } => {
                if m >= n {
                    return Err(CliError::usage(format!("need m < n, got n = {n}, m = {m}")));
                }
                Task::Pcf { lambda: parse_lambda(&lambda)?, n, m, sign: parse_sign(&sign)?, format }
            }
            Command::Verify { checks, lambda, inject_fault } => {
                let mut checks = if checks.is_empty() { Check::ALL.to_vec() } else { checks };
                checks.sort();
                checks.dedup();
                Task::Verify { checks, lambda: lambda.as_deref().map(parse_lambda).transpose()?, inject_fault }
            }
            Command::Heights { lambda, t, sign, terms } => Task::Heights {
                lambda: parse_lambda(&lambda)?,
                t: t.parse().map_err(|e: per1_core::Error| CliError::usage(format!("--t: {e}")))?,
                sign: parse_sign(&sign)?,
                terms,
            },
            Command::Gamma { lambda, places, terms } => Task::Gamma { lambda: parse_lambda(&lambda)?, places, terms },
            Command::Capacity { lambda, mode, n, n_max } => {
                if n == 0 {
                    return Err(CliError::usage("capacity needs n >= 1"));
                }
                Task::Capacity { lambda: parse_lambda(&lambda)?, mode, n, n_max }
            }
        };
        let tol = self.tol.unwrap_or_else(|| default_tol(&task));
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::usage("--tol must be positive"));
        }
        let threads = match self.threads {
            Some(0) => return Err(CliError::usage("--threads must be at least 1")),
            Some(k) => k,
            None => rayon::current_num_threads(),
        };
        let out = match (&task, self.out) {
            (Task::Render { .. }, None) => Some(PathBuf::from("per1-render")),
            (_, out) => out,
        };
        Ok(RunConfig { task, tol, out, threads, seed: self.seed })
    }
}

//! Command-line surface: JSON in, JSON out, suitable for scripting and
//! golden-file testing.
//!
//! Exit codes: 0 on success, 1 on domain errors (reported as
//! `{"error": kind, "detail": ...}` on standard error), 2 on usage errors.
//! Numbers are rendered in shortest round-trip form, uniformly.

use std::io::Read;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::calculus::{monomial_h, QuadratureSettings};
use crate::error::Error;
use crate::expr::Expr;
use crate::ostrowski::{
    closed_form_bound, error_bound, evaluate_rule, make_rule, make_rule_snapped,
    montgomery_residual, sup_delta_derivative, RuleSpec, SnapAdjustment,
};
use crate::timescale::{ScaleSpec, TimeScale};
use crate::verify::{run_verification, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "tsquad",
    version,
    about = "Quadrature rules with sharp error bounds on bounded time scales"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct QuadratureFlags {
    /// Absolute tolerance for quadrature over continuous segments
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
    /// Relative tolerance for quadrature over continuous segments
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Subdivision budget for adaptive quadrature
    #[arg(long, default_value_t = 10_000)]
    max_subdivisions: u32,
}

impl QuadratureFlags {
    fn settings(&self) -> QuadratureSettings {
        QuadratureSettings {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

#[derive(Args)]
struct InputFlags {
    /// Scale spec JSON, e.g. '{"kind":"continuous","a":0,"b":1}'
    #[arg(long)]
    scale: Option<String>,
    /// Rule spec JSON, e.g. '{"rule":"trapezoid"}'
    #[arg(long)]
    rule: Option<String>,
    /// Integrand expression in t, e.g. 't^2 + sin(t)'
    #[arg(long)]
    f: Option<String>,
    /// Read a JSON object {"scale":..., "rule":..., "f":...} from standard
    /// input to fill in any inputs not given as flags
    #[arg(long)]
    stdin: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a rule: quadrature value, reference integral, error, bound
    Quad {
        #[command(flatten)]
        input: InputFlags,
        /// Relocate required rule points to the nearest scale point,
        /// reporting every adjustment
        #[arg(long)]
        snap: bool,
        #[command(flatten)]
        quadrature: QuadratureFlags,
    },
    /// Compute the sharp error bound for a rule (given M or an integrand)
    Bound {
        #[command(flatten)]
        input: InputFlags,
        /// Derivative bound M; computed from --f when omitted
        #[arg(long, conflicts_with = "f")]
        m: Option<f64>,
        #[command(flatten)]
        quadrature: QuadratureFlags,
    },
    /// Evaluate the Montgomery identity residual for a rule and integrand
    Identity {
        #[command(flatten)]
        input: InputFlags,
        #[command(flatten)]
        quadrature: QuadratureFlags,
    },
    /// Evaluate the generalized monomial h_k(t, s)
    Monomial {
        /// Scale spec JSON
        #[arg(long)]
        scale: String,
        /// Monomial order (0..=4)
        #[arg(long)]
        k: u32,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
        #[command(flatten)]
        quadrature: QuadratureFlags,
    },
    /// Run the randomized verification harness
    Verify {
        /// RNG seed (mandatory, for reproducibility)
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(1..))]
        trials: u32,
        #[arg(long, default_value_t = 6)]
        max_segments: u32,
        #[arg(long, default_value_t = 5)]
        max_k: u32,
        #[arg(long, default_value_t = 6)]
        max_poly_degree: u32,
        #[arg(long, default_value_t = 1e-9)]
        identity_tol: f64,
        #[arg(long, default_value_t = 1e-9)]
        inequality_tol: f64,
        /// Mix transcendental integrands into the corpus
        #[arg(long)]
        transcendental: bool,
        /// Write the report to this file instead of standard output
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// List the named rules and their partition expansions on a scale
    Rules {
        /// Scale spec JSON
        #[arg(long)]
        scale: String,
        /// Range start (defaults to the scale minimum)
        #[arg(long)]
        a: Option<f64>,
        /// Range end (defaults to the scale maximum)
        #[arg(long)]
        b: Option<f64>,
    },
}

/// A command failure: what to print and which exit code to use.
struct Failure {
    kind: String,
    detail: String,
    usage: bool,
}

impl Failure {
    fn usage(detail: impl Into<String>) -> Failure {
        Failure {
            kind: "UsageError".into(),
            detail: detail.into(),
            usage: true,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure {
            kind: e.kind().to_string(),
            detail: e.to_string(),
            usage: false,
        }
    }
}

#[derive(Serialize)]
struct ErrorOutput<'a> {
    error: &'a str,
    detail: &'a str,
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parse arguments from the process environment and execute; returns the
/// process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                ClapErrorKind::DisplayHelp
                    | ClapErrorKind::DisplayVersion
                    | ClapErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) =>
        {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            report(&Failure::usage(e.to_string()));
            return 2;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            report(&f);
            if f.usage {
                2
            } else {
                1
            }
        }
    }
}

fn report(f: &Failure) {
    let out = ErrorOutput {
        error: &f.kind,
        detail: &f.detail,
    };
    eprintln!("{}", serde_json::to_string(&out).expect("error output serializes"));
}

fn emit<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("output serializes"));
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StdinInput {
    scale: Option<serde_json::Value>,
    rule: Option<serde_json::Value>,
    f: Option<String>,
}

struct Inputs {
    scale: Option<ScaleSpec>,
    rule: Option<RuleSpec>,
    f: Option<String>,
}

fn gather(input: &InputFlags) -> CliResult<Inputs> {
    let stdin: StdinInput = if input.stdin {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::usage(format!("reading standard input: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("standard input JSON: {e}")))?
    } else {
        StdinInput::default()
    };
    let scale = match (&input.scale, stdin.scale) {
        (Some(text), _) => Some(parse_scale_spec(text)?),
        (None, Some(v)) => Some(
            serde_json::from_value(v).map_err(|e| Failure::usage(format!("scale spec: {e}")))?,
        ),
        (None, None) => None,
    };
    let rule = match (&input.rule, stdin.rule) {
        (Some(text), _) => Some(parse_rule_spec(text)?),
        (None, Some(v)) => Some(
            serde_json::from_value(v).map_err(|e| Failure::usage(format!("rule spec: {e}")))?,
        ),
        (None, None) => None,
    };
    let f = input.f.clone().or(stdin.f);
    Ok(Inputs { scale, rule, f })
}

fn parse_scale_spec(text: &str) -> CliResult<ScaleSpec> {
    serde_json::from_str(text).map_err(|e| Failure::usage(format!("scale spec: {e}")))
}

fn parse_rule_spec(text: &str) -> CliResult<RuleSpec> {
    serde_json::from_str(text).map_err(|e| Failure::usage(format!("rule spec: {e}")))
}

fn need<T>(v: Option<T>, what: &str) -> CliResult<T> {
    v.ok_or_else(|| Failure::usage(format!("missing {what} (flag or --stdin field)")))
}

fn build_scale(spec: &ScaleSpec) -> CliResult<TimeScale> {
    Ok(TimeScale::from_spec(spec)?)
}

fn parse_integrand(text: &str) -> CliResult<Expr> {
    Ok(Expr::parse(text)?)
}

#[derive(Serialize)]
struct QuadOutput<'a> {
    q_value: f64,
    integral_sigma: f64,
    abs_error: f64,
    bound: f64,
    m_used: f64,
    tightness: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    snapped: Option<&'a [SnapAdjustment]>,
}

#[derive(Serialize)]
struct BoundOutput {
    m_used: f64,
    bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<f64>,
}

#[derive(Serialize)]
struct IdentityOutput {
    q_value: f64,
    integral_sigma: f64,
    kernel_integral: f64,
    residual: f64,
}

#[derive(Serialize)]
struct RuleRow {
    rule: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    xs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Quad {
            input,
            snap,
            quadrature,
        } => {
            let inputs = gather(&input)?;
            let scale = build_scale(&need(inputs.scale, "--scale")?)?;
            let rule = need(inputs.rule, "--rule")?;
            let f = parse_integrand(&need(inputs.f, "--f")?)?;
            let settings = quadrature.settings();
            let (partition, snaps) = if snap {
                make_rule_snapped(&scale, scale.min(), scale.max(), &rule)?
            } else {
                (make_rule(&scale, scale.min(), scale.max(), &rule)?, Vec::new())
            };
            let report = evaluate_rule(&partition, &f, &settings)?;
            emit(&QuadOutput {
                q_value: report.q_value,
                integral_sigma: report.integral_sigma,
                abs_error: report.abs_error,
                bound: report.bound,
                m_used: report.m_used,
                tightness: report.tightness,
                snapped: if snaps.is_empty() { None } else { Some(&snaps) },
            });
            Ok(())
        }
        Command::Bound {
            input,
            m,
            quadrature,
        } => {
            let inputs = gather(&input)?;
            let scale = build_scale(&need(inputs.scale, "--scale")?)?;
            let rule = need(inputs.rule, "--rule")?;
            let settings = quadrature.settings();
            let partition = make_rule(&scale, scale.min(), scale.max(), &rule)?;
            let m_used = match (m, inputs.f) {
                (Some(m), _) => m,
                (None, Some(text)) => {
                    let f = parse_integrand(&text)?;
                    sup_delta_derivative(&scale, &f, scale.min(), scale.max())?
                }
                (None, None) => return Err(Failure::usage("bound needs --m or --f")),
            };
            let bound = error_bound(&partition, m_used, &settings)?;
            let closed_form = closed_form_bound(&partition, m_used).ok();
            emit(&BoundOutput {
                m_used,
                bound,
                closed_form,
            });
            Ok(())
        }
        Command::Identity { input, quadrature } => {
            let inputs = gather(&input)?;
            let scale = build_scale(&need(inputs.scale, "--scale")?)?;
            let rule = need(inputs.rule, "--rule")?;
            let f = parse_integrand(&need(inputs.f, "--f")?)?;
            let settings = quadrature.settings();
            let partition = make_rule(&scale, scale.min(), scale.max(), &rule)?;
            let residual = montgomery_residual(&partition, &f, &settings)?;
            let q_value = crate::ostrowski::quadrature(&partition, &f)?;
            let integral_sigma = crate::calculus::delta_integral_sigma(
                &scale,
                &f,
                partition.a(),
                partition.b(),
                &settings,
            )?;
            emit(&IdentityOutput {
                q_value,
                integral_sigma,
                kernel_integral: q_value - integral_sigma - residual,
                residual,
            });
            Ok(())
        }
        Command::Monomial {
            scale,
            k,
            t,
            s,
            quadrature,
        } => {
            let scale = build_scale(&parse_scale_spec(&scale)?)?;
            let value = monomial_h(&scale, k, t, s, &quadrature.settings())?;
            emit(&value);
            Ok(())
        }
        Command::Verify {
            seed,
            trials,
            max_segments,
            max_k,
            max_poly_degree,
            identity_tol,
            inequality_tol,
            transcendental,
            out,
        } => {
            let config = VerifyConfig {
                seed,
                trials,
                max_segments,
                max_k,
                max_poly_degree,
                identity_tol,
                inequality_tol,
                transcendental,
            };
            let report = run_verification(&config);
            let json = serde_json::to_string(&report).expect("report serializes");
            match out {
                Some(path) => std::fs::write(&path, format!("{json}\n")).map_err(|e| {
                    Failure::usage(format!("writing {}: {e}", path.display()))
                })?,
                None => println!("{json}"),
            }
            Ok(())
        }
        Command::Rules { scale, a, b } => {
            let scale = build_scale(&parse_scale_spec(&scale)?)?;
            let a = a.unwrap_or_else(|| scale.min());
            let b = b.unwrap_or_else(|| scale.max());
            let named: [(&'static str, RuleSpec); 6] = [
                ("left_rectangle", RuleSpec::LeftRectangle),
                ("right_rectangle", RuleSpec::RightRectangle),
                ("trapezoid", RuleSpec::Trapezoid),
                ("midpoint", RuleSpec::Midpoint),
                ("simpson", RuleSpec::Simpson { x: None }),
                ("avg_mid_trap", RuleSpec::AvgMidTrap),
            ];
            let rows: Vec<RuleRow> = named
                .into_iter()
                .map(|(name, rule)| match make_rule(&scale, a, b, &rule) {
                    Ok(p) => RuleRow {
                        rule: name,
                        xs: Some(p.xs().to_vec()),
                        alphas: Some(p.alphas().to_vec()),
                        weights: Some(p.weights()),
                        error: None,
                        detail: None,
                    },
                    Err(e) => RuleRow {
                        rule: name,
                        xs: None,
                        alphas: None,
                        weights: None,
                        error: Some(e.kind().to_string()),
                        detail: Some(e.to_string()),
                    },
                })
                .collect();
            emit(&rows);
            Ok(())
        }
    }
}

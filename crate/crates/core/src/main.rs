// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wand_gibbs::boundary::{tisgm_set_with, SolverConfig, DEFAULT_RESIDUAL_TOL};
use wand_gibbs::chain::ks_thresholds;
use wand_gibbs::extremality::{extremality_thresholds, DEFAULT_P0};
use wand_gibbs::model::ModelParams;
use wand_gibbs::scan::{
    infer_k, parse_csv, render_svg, scan, solve_report, theta_grid, to_csv, Scale, ScanDocument,
    SCAN_JSON_SCHEMA, SOLVE_JSON_SCHEMA,
};
use wand_gibbs::tree_oracle::verify_theta;
use wand_gibbs::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_VERIFY: u8 = 5;

/// Residual acceptance override for exploration.
const TOL_ENV: &str = "WAND_GIBBS_TOL";

/// Gibbs measures of the HC-Blume-Capel model on the wand graph over Cayley trees.
///
/// Exit codes: 0 success, 2 usage, 3 solver, 4 I/O, 5 verification failure.
/// The residual acceptance (default 1e-12) can be overridden through the
/// WAND_GIBBS_TOL environment variable.
#[derive(Parser, Debug)]
#[command(name = "wand-gibbs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScaleArg {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Criterion {
    Ks,
    Msw,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for all translation-invariant measures at one activity
    #[command(after_long_help = SOLVE_JSON_SCHEMA)]
    Solve {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        theta: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a θ grid and classify every point
    #[command(after_long_help = SCAN_JSON_SCHEMA)]
    Scan {
        #[arg(long)]
        k: u32,
        #[arg(long = "theta-min")]
        theta_min: f64,
        #[arg(long = "theta-max")]
        theta_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value = "linear")]
        scale: ScaleArg,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate the Kesten-Stigum and/or κγ thresholds around θ = 1
    Thresholds {
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value = "both")]
        criterion: Criterion,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check the fixed points against exact enumeration on finite trees
    Verify {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.7,1.0,1.5,2.0")]
        thetas: Vec<f64>,
    },
    /// Render a scan CSV as an SVG of k·s1² − 1 and k·s2² − 1
    Plot {
        /// Scan CSV produced by `scan`
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Tree order; inferred from the scan when omitted
        #[arg(long)]
        k: Option<u32>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParams(_) | Error::SizeGuard { .. } => EXIT_USAGE,
            _ => EXIT_SOLVER,
        };
        Failure::new(code, e.to_string())
    }
}

fn solver_config() -> Result<SolverConfig, Failure> {
    match std::env::var(TOL_ENV) {
        Ok(v) => {
            let tol: f64 = v
                .parse()
                .map_err(|_| Failure::new(EXIT_USAGE, format!("{TOL_ENV}={v} is not a number")))?;
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Failure::new(
                    EXIT_USAGE,
                    format!("{TOL_ENV}={v} must be positive"),
                ));
            }
            Ok(SolverConfig { residual_tol: tol })
        }
        Err(_) => Ok(SolverConfig {
            residual_tol: DEFAULT_RESIDUAL_TOL,
        }),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = solver_config()?;
    match cli.command {
        Command::Solve {
            k,
            theta,
            format,
            out,
        } => {
            let params = ModelParams::new(k, theta)?;
            let set = tisgm_set_with(&params, &cfg)?;
            let report = solve_report(&set)?;
            let text = match format {
                Format::Json => to_json(&report),
                Format::Csv => {
                    let row = wand_gibbs::scan::compute_row(k, theta, &cfg)?;
                    to_csv(&[row])
                }
                Format::Text => {
                    let mut s = format!(
                        "k = {}  theta = {}  theta_cr = {:.12}\nTISGM count: {}\nclassification: {}\n",
                        report.k,
                        report.theta,
                        report.theta_cr,
                        report.tisgm_count,
                        report.classification.as_str()
                    );
                    if report.near_critical {
                        s.push_str("warning: theta within 1e-4 of theta_cr, asymmetric roots nearly merged\n");
                    }
                    if report.extra_roots {
                        s.push_str("warning: more than one asymmetric swap pair certified\n");
                    }
                    for l in &report.laws {
                        s.push_str(&format!(
                            "{:<10} z1 = {:.15e}  z2 = {:.15e}  residual = {:.2e}\n           s1 = {:.12}  s2 = {:.12}  lambda2 = {:.12}  ks = {:.12}{}\n",
                            l.role,
                            l.law.z1,
                            l.law.z2,
                            l.law.residual,
                            l.spectrum.s1,
                            l.spectrum.s2,
                            l.spectrum.lambda2,
                            l.spectrum.ks_value,
                            if l.role == "asymmetric" { "  (no claim)" } else { "" }
                        ));
                        if let Some(e) = &l.extremality {
                            s.push_str(&format!(
                                "           kappa = {:.12}  gamma <= {:.12}  k*kappa*gamma = {:.12}{}\n",
                                e.kappa,
                                e.gamma_bound,
                                e.product,
                                if e.exploratory { "  (exploratory)" } else { "" }
                            ));
                        }
                    }
                    s
                }
            };
            emit(&text, out.as_deref())
        }
        Command::Scan {
            k,
            theta_min,
            theta_max,
            steps,
            scale,
            format,
            out,
        } => {
            ModelParams::new(k, theta_min)?;
            let scale = match scale {
                ScaleArg::Linear => Scale::Linear,
                ScaleArg::Log => Scale::Log,
            };
            let grid = theta_grid(theta_min, theta_max, steps, scale)?;
            let rows = scan(k, &grid, &cfg)?;
            let text = match format {
                Format::Json => to_json(&ScanDocument { k, rows }),
                Format::Csv | Format::Text => to_csv(&rows),
            };
            emit(&text, out.as_deref())
        }
        Command::Thresholds {
            k,
            criterion,
            format,
        } => {
            ModelParams::new(k, 1.0)?;
            let ks = matches!(criterion, Criterion::Ks | Criterion::Both)
                .then(|| ks_thresholds(k))
                .transpose()?;
            let msw = matches!(criterion, Criterion::Msw | Criterion::Both)
                .then(|| extremality_thresholds(k, DEFAULT_P0))
                .transpose()?;
            let reference = matches!(k, 2 | 3);
            match format {
                Format::Json => {
                    let doc = serde_json::json!({
                        "k": k,
                        "ks": ks.map(|(a, b)| [a, b]),
                        "msw": msw.map(|(a, b)| [a, b]),
                        "p0": DEFAULT_P0,
                        "exploratory": !reference,
                    });
                    emit(&to_json(&doc), None)
                }
                Format::Csv => {
                    let mut s = String::from("criterion,lower,upper\n");
                    for (name, pair) in [("ks", ks), ("msw", msw)] {
                        if let Some((a, b)) = pair {
                            s.push_str(&format!("{name},{a:.16e},{b:.16e}\n"));
                        }
                    }
                    emit(&s, None)
                }
                Format::Text => {
                    let mut s = String::new();
                    if let Some((a, b)) = ks {
                        s.push_str(&format!("ks  lower = {a:.10}  upper = {b:.10}\n"));
                    }
                    if let Some((a, b)) = msw {
                        s.push_str(&format!(
                            "msw lower = {a:.10}  upper = {b:.10}  (p0 = {DEFAULT_P0})\n"
                        ));
                    }
                    if let (Some(a), Some(b)) = (ks, msw) {
                        s.push_str(&format!(
                            "max |ks - msw| = {:.3e}\n",
                            (a.0 - b.0).abs().max((a.1 - b.1).abs())
                        ));
                    }
                    if !reference {
                        s.push_str("note: exploratory output for this k\n");
                    }
                    emit(&s, None)
                }
            }
        }
        Command::Verify { k, depth, thetas } => {
            if depth > 2 {
                return Err(Failure::new(
                    EXIT_USAGE,
                    format!("depth {depth} exceeds the exhaustive-enumeration limit of 2"),
                ));
            }
            ModelParams::new(k, 1.0)?;
            if thetas.is_empty() {
                return Err(Failure::new(EXIT_USAGE, "no activities given"));
            }
            let mut failed = 0;
            for theta in thetas {
                for case in verify_theta(k, depth, theta, &cfg)? {
                    println!(
                        "{} theta={} {:<12} z=({:.6e}, {:.6e}) defect={:.3e}",
                        if case.passed { "PASS" } else { "FAIL" },
                        theta,
                        case.label,
                        case.law.z1,
                        case.law.z2,
                        case.defect
                    );
                    if !case.passed {
                        failed += 1;
                    }
                }
            }
            if failed > 0 {
                Err(Failure::new(
                    EXIT_VERIFY,
                    format!("{failed} consistency check(s) failed"),
                ))
            } else {
                Ok(())
            }
        }
        Command::Plot { input, out, k } => {
            let text = fs::read_to_string(&input).map_err(|e| {
                Failure::new(EXIT_IO, format!("cannot read {}: {e}", input.display()))
            })?;
            let rows = parse_csv(&text)
                .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", input.display())))?;
            let k = k
                .or_else(|| infer_k(&rows))
                .ok_or_else(|| Failure::new(EXIT_IO, "cannot infer k from the scan"))?;
            emit(&render_svg(&rows, k), Some(&out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

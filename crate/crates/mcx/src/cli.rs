//! The `mcx` command line.
//!
//! Exit codes: 0 success, 1 usage or IO error, 2 a verdict or property
//! failed, 3 invalid ensemble specification.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcx_core::Ensemble;

use crate::format::Json;
use crate::spec_json::{load_ensemble, spec_json};
use crate::verify::properties::property_suite;
use crate::verify::{statistics, verify_bounds, MethodChoice, PsiChoice, SimulationConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_INVALID_SPEC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mcx", version, about = "Matrix concentration bounds checked against exact and simulated ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute every applicable bound and check it; prints the report as JSON.
    Bound(SpecArgs),
    /// Tail curve P(lambda_max >= t) as CSV.
    Simulate(SpecArgs),
    /// Run the property suite.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: u64,
    },
    /// Bounds, simulation and verdicts as a text summary; full JSON with --out.
    Report(SpecArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Exact,
    Mc,
}

#[derive(Debug, Args)]
struct SpecArgs {
    /// Ensemble specification (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Thresholds as start:stop:step (inclusive) or a comma-separated list.
    #[arg(long, default_value = "0:10:1", allow_hyphen_values = true)]
    t_grid: String,
    /// Trace-mgf parameters, same syntax as --t-grid.
    #[arg(long, default_value = "-1:1:0.25", allow_hyphen_values = true)]
    theta_grid: String,
    /// Number of Monte Carlo samples.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// psi for the refined bound: a positive number, inv_R2 or inv_8R2.
    #[arg(long)]
    psi: Option<String>,
    /// Comma-separated moment orders.
    #[arg(long, default_value = "1,1.5,2")]
    p: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
}

/// Parses `start:stop:step` (both ends inclusive when the step divides the
/// range) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let num = |x: &str| -> Result<f64, String> {
        let v: f64 = x.trim().parse().map_err(|_| format!("bad number {x:?} in grid {s:?}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite number in grid {s:?}"))
        }
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) {
                return Err(format!("grid step must be positive in {s:?}"));
            }
            if stop < start {
                return Err(format!("grid stop below start in {s:?}"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as u64;
            if count > 1_000_000 {
                return Err(format!("grid {s:?} has too many points"));
            }
            Ok((0..=count).map(|i| start + i as f64 * step).collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(format!("grid must be start:stop:step or a list, got {s:?}")),
    }
}

enum Failure {
    Usage(String),
    Spec(String),
}

impl SpecArgs {
    fn load(&self) -> Result<(Ensemble, SimulationConfig), Failure> {
        let text = fs::read_to_string(&self.config)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", self.config.display())))?;
        let ensemble = load_ensemble(&text).map_err(|e| Failure::Spec(e.to_string()))?;
        let p_list = self
            .p
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad moment order {x:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let config = SimulationConfig {
            samples: self.samples,
            seed: self.seed,
            t_grid: parse_grid(&self.t_grid).map_err(Failure::Usage)?,
            theta_grid: parse_grid(&self.theta_grid).map_err(Failure::Usage)?,
            psi: self.psi.as_deref().map(PsiChoice::parse).transpose().map_err(Failure::Usage)?,
            workers: self.workers,
            method: match self.method {
                MethodArg::Auto => MethodChoice::Auto,
                MethodArg::Exact => MethodChoice::Exact,
                MethodArg::Mc => MethodChoice::MonteCarlo,
            },
            p_list,
        };
        config.validate().map_err(Failure::Usage)?;
        Ok((ensemble, config))
    }
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Usage(format!("cannot write output: {e}"))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn config_json(c: &SimulationConfig) -> Json {
    Json::obj()
        .int("samples", c.samples as i128)
        .int("seed", c.seed as i128)
        .int("workers", c.workers as i128)
        .field("t_grid", Json::nums(&c.t_grid))
        .field("theta_grid", Json::nums(&c.theta_grid))
        .field("p", Json::nums(&c.p_list))
        .field("psi", c.psi.map_or(Json::Null, |p| Json::str(p.label())))
        .build()
}

/// Runs the tool with `args` (program name first), writing to the given
/// streams, and returns the exit code.
pub fn run_with<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Spec(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INVALID_SPEC
        }
    }
}

pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<S> = args.into_iter().collect();
    std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        let stdout = std::io::stdout();
        let stderr = std::io::stderr();
        run_with(args, &mut stdout.lock(), &mut stderr.lock())
    }))
    .unwrap_or(EXIT_USAGE)
}

fn verdict_code(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure::Usage(format!("cannot write output: {e}"));
    match command {
        Command::Check { seed, cases } => {
            if cases == 0 {
                return Err(Failure::Usage("--cases must be at least 1".into()));
            }
            let report = property_suite(seed, cases);
            stdout.write_all(report.render().as_bytes()).map_err(io)?;
            Ok(verdict_code(report.pass()))
        }
        Command::Bound(args) => {
            let (ensemble, config) = args.load()?;
            let report = verify_bounds(&ensemble, &config).map_err(|e| Failure::Usage(e.to_string()))?;
            emit(&args.out, &report.to_json().render(), stdout)?;
            Ok(verdict_code(report.pass()))
        }
        Command::Simulate(args) => {
            let (ensemble, config) = args.load()?;
            let stats = statistics(&ensemble, &config).map_err(|e| Failure::Usage(e.to_string()))?;
            let csv = stats.tail.to_csv();
            let unit = match stats.method {
                crate::verify::Method::Exact => "states",
                crate::verify::Method::MonteCarlo => "samples",
            };
            let summary = format!(
                "simulate: {} rows, method {}, {} {unit}, d = {}\n",
                stats.tail.points.len(),
                stats.method.name(),
                stats.count,
                ensemble.dim()
            );
            match &args.out {
                Some(path) => {
                    write_file(path, &csv)?;
                    stdout.write_all(summary.as_bytes()).map_err(io)?;
                }
                None => {
                    stdout.write_all(csv.as_bytes()).map_err(io)?;
                    stderr.write_all(summary.as_bytes()).map_err(io)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Report(args) => {
            let (ensemble, config) = args.load()?;
            let report = verify_bounds(&ensemble, &config).map_err(|e| Failure::Usage(e.to_string()))?;
            let mut text = format!(
                "{} (d = {}, n = {}), method {}\n",
                ensemble.family().name(),
                ensemble.dim(),
                ensemble.coordinates(),
                report.method.name()
            );
            text.push_str("t,p_hat,half_width,best_bound,best_name\n");
            for (i, point) in report.tail.points.iter().enumerate() {
                let best = report
                    .bounds
                    .iter()
                    .filter_map(|b| match b {
                        crate::verify::BoundEntry::Checked { name, points, .. } => Some((*name, points[i].bound)),
                        crate::verify::BoundEntry::Skipped { .. } => None,
                    })
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                let (name, bound) = best.map_or(("none", f64::INFINITY), |(n, b)| (n, b));
                text.push_str(&format!(
                    "{},{},{},{},{name}\n",
                    crate::format::g12(point.t),
                    crate::format::g12(point.p_hat),
                    crate::format::g12(point.half_width),
                    crate::format::g12(bound.min(1.0))
                ));
            }
            for b in &report.bounds {
                let line = match b {
                    crate::verify::BoundEntry::Checked { name, points, .. } => {
                        let held = points.iter().filter(|p| p.pass).count();
                        let mut line = format!(
                            "{} {name}: {held}/{} points dominated",
                            if b.pass() { "PASS" } else { "FAIL" },
                            points.len()
                        );
                        // Tightest point: largest statistic-to-bound ratio.
                        if let Some(p) = points
                            .iter()
                            .filter(|p| p.bound > 0.0 && p.bound < 1.0)
                            .max_by(|a, b| (a.statistic / a.bound).total_cmp(&(b.statistic / b.bound)))
                        {
                            line.push_str(&format!(
                                ", tightest at t={}: {} vs {}",
                                crate::format::g12(p.t),
                                crate::format::g12(p.statistic),
                                crate::format::g12(p.bound)
                            ));
                        }
                        line.push('\n');
                        line
                    }
                    crate::verify::BoundEntry::Skipped { name, reason } => format!("SKIP {name}: {reason}\n"),
                };
                text.push_str(&line);
            }
            for m in &report.moments {
                match m {
                    crate::verify::MomentCheck::Checked { name, p, statistic, bound, pass } => text.push_str(&format!(
                        "{} {name} p={}: {} <= {}\n",
                        if *pass { "PASS" } else { "FAIL" },
                        crate::format::g12(*p),
                        crate::format::g12(*statistic),
                        crate::format::g12(*bound)
                    )),
                    crate::verify::MomentCheck::Skipped { name, p, reason } => {
                        text.push_str(&format!("SKIP {name} p={}: {reason}\n", crate::format::g12(*p)))
                    }
                }
            }
            let mgf_total: usize = report.mgf.iter().map(|m| m.bounds.len()).sum();
            let mgf_held: usize = report.mgf.iter().map(|m| m.bounds.iter().filter(|b| b.2).count()).sum();
            text.push_str(&format!(
                "{} trace_mgf: {mgf_held}/{mgf_total} log-mgf bounds hold over {} theta values\n",
                if mgf_held == mgf_total { "PASS" } else { "FAIL" },
                report.mgf.len()
            ));
            for p in &report.parameters {
                text.push_str(&format!(
                    "{} {}: {} <= {}\n",
                    if p.pass { "PASS" } else { "FAIL" },
                    p.name,
                    crate::format::g12(p.value),
                    crate::format::g12(p.limit)
                ));
            }
            if report.method == crate::verify::Method::MonteCarlo {
                text.push_str("note: Monte Carlo verdicts are statistical: bound >= p_hat - 3 * half_width\n");
            }
            text.push_str(&format!("verdict: {}\n", if report.pass() { "PASS" } else { "FAIL" }));
            stdout.write_all(text.as_bytes()).map_err(io)?;
            if let Some(path) = &args.out {
                let full = Json::obj()
                    .field("spec", spec_json(ensemble.spec()))
                    .field("config", config_json(&config))
                    .field("report", report.to_json())
                    .build();
                write_file(path, &full.render())?;
            }
            Ok(verdict_code(report.pass()))
        }
    }
}

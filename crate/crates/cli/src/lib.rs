//! Command-line front end for `narratables`.
//!
//! [`run`] parses arguments, executes one command and returns the process
//! exit code; stdout and stderr are passed in so tests can capture them.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_traits::One;

use narratables::algebra::{
    boost_nontriviality_check, boost_nontriviality_residual, bracket_residuals, same_history_check, solve_w,
    SplitSystem,
};
use narratables::clusterkit::{analyze, canonicalize};
use narratables::geometry::Rational;
use narratables::narrative::{evolve, narratability_report, History, DEFAULT_TOL};
use narratables::quantum::overlap;

pub mod demo;
pub mod error;
pub mod files;
pub mod render;

pub use error::CliError;
use error::{EXIT_CLUSTER_VIOLATION, EXIT_NON_CONSERVING, EXIT_USAGE};
use files::{LoadedScenario, ScenarioFile};
use render::Style;

pub const COLOR_ENV: &str = "NARRATABLES_COLOR";

#[derive(Debug, Parser)]
#[command(name = "narratables", version, about = "Narratability of spin histories across foliations")]
struct Cli {
    /// Comparison tolerance on |overlap| − 1.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tolerance: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the built-in four-particle scenario (free vs flip).
    DemoPaper {
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evolve one scenario under one rule and foliation.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        rule: String,
        /// Index into the file's foliation list.
        #[arg(long, default_value_t = 0)]
        foliation: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Number of τ samples written to the CSV.
        #[arg(long, default_value_t = 101)]
        tau_grid: usize,
    },
    /// Compare two rules across every foliation in a scenario file.
    CompareFrames {
        scenario: PathBuf,
        #[arg(long)]
        rule1: String,
        #[arg(long)]
        rule2: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check a momentum kernel against cluster decomposition.
    ClusterCheck { kernel: PathBuf },
    /// Matrix checks for the split Hamiltonian and boost generators.
    #[command(subcommand)]
    Algebra(AlgebraCommand),
}

#[derive(Debug, Subcommand)]
enum AlgebraCommand {
    /// Poincaré bracket residuals for a generator file.
    Residuals {
        #[arg(long)]
        gens: PathBuf,
    },
    /// Solve [K0, V] = −[W, H] for W.
    SolveW {
        #[arg(long)]
        h0: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        k0: PathBuf,
        /// Boost axis, 1 to 3.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        axis: u8,
        /// Write W as a matrix file.
        #[arg(long)]
        w_out: Option<PathBuf>,
    },
    /// Compare evolutions under H0 + Va and H0 + Vb.
    SameHistory {
        #[arg(long)]
        h0: PathBuf,
        #[arg(long)]
        va: PathBuf,
        #[arg(long)]
        vb: PathBuf,
        #[arg(long)]
        psi: PathBuf,
        /// Comma-separated sample times.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        times: Vec<f64>,
    },
    /// Whether W acts on ψ other than by a multiple.
    BoostCheck {
        #[arg(long)]
        w: PathBuf,
        #[arg(long)]
        psi: PathBuf,
    },
}

/// Styling from the `NARRATABLES_COLOR` value and whether stdout is a tty.
pub fn style_for(setting: Option<&str>, is_tty: bool) -> Result<Style, CliError> {
    match setting.unwrap_or("auto") {
        "auto" => Ok(Style { enabled: is_tty }),
        "never" => Ok(Style { enabled: false }),
        "always" => Ok(Style { enabled: true }),
        other => Err(CliError::Usage(format!(
            "{COLOR_ENV}={other:?}; expected auto, never or always"
        ))),
    }
}

/// Output of a successful command.
struct Outcome {
    stdout: String,
    stderr: String,
    code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            stderr: String::new(),
            code: 0,
        }
    }
}

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I, color: Option<&str>, is_tty: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
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
    let result = style_for(color, is_tty).and_then(|style| {
        if !(cli.tolerance.is_finite() && cli.tolerance > 0.0) {
            return Err(CliError::Usage(format!("--tolerance must be positive, got {}", cli.tolerance)));
        }
        execute(&cli.command, cli.tolerance, style)
    });
    match result {
        Ok(o) => {
            let _ = write!(err, "{}", o.stderr);
            let _ = write!(out, "{}", o.stdout);
            let _ = out.flush();
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn warnings_text(warnings: &[String]) -> String {
    warnings.iter().map(|w| format!("warning: {w}\n")).collect()
}

/// A CSV row: foliation index, τ, overlap magnitude.
pub type CsvRow = (usize, f64, f64);

pub fn csv_text(rows: &[CsvRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::io("csv", std::io::Error::other(e));
    w.write_record(["foliation_id", "tau", "overlap_magnitude"]).map_err(io)?;
    for (id, tau, mag) in rows {
        w.write_record([id.to_string(), format!("{:.16e}", tau + 0.0), format!("{mag:.16e}")])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io("csv", std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<(), CliError> {
    std::fs::write(path, csv_text(rows)?).map_err(|e| CliError::io(path.display().to_string(), e))
}

/// Evenly spaced ordering keys from one leaf before the first breakpoint to
/// one after the last.
pub fn key_grid(history: &History, n: usize) -> Vec<Rational> {
    let keys = history.breakpoint_keys();
    let one = Rational::one();
    let (lo, hi) = match (keys.first(), keys.last()) {
        (Some(a), Some(b)) => (a - &one, b + &one),
        _ => (-one.clone(), one),
    };
    let steps = Rational::from_integer(((n.max(2) - 1) as i64).into());
    (0..n)
        .map(|i| &lo + (&hi - &lo) * Rational::from_integer((i as i64).into()) / &steps)
        .collect()
}

/// Overlap of a history with its initial state on the τ grid.
pub fn history_rows(history: &History, foliation_id: usize, n: usize) -> Result<Vec<CsvRow>, CliError> {
    let initial = &history.segments()[0];
    key_grid(history, n)
        .iter()
        .map(|k| {
            let mag = overlap(history.state_at(k), initial)?.norm();
            Ok((foliation_id, history.foliation().leaf_from_key(k).to_f64(), mag))
        })
        .collect()
}

fn compare(loaded: &LoadedScenario, rule1: &str, rule2: &str, tol: f64, csv: Option<&Path>, style: Style) -> Result<Outcome, CliError> {
    let (r1, r2) = (loaded.rule(rule1)?, loaded.rule(rule2)?);
    let report = narratability_report(&loaded.scenario, r1, r2, &loaded.foliations, tol)?;
    if let Some(path) = csv {
        let rows: Vec<CsvRow> = report
            .verdicts
            .iter()
            .enumerate()
            .flat_map(|(i, v)| v.comparison.samples.iter().map(move |s| (i, s.tau.to_f64(), s.overlap_magnitude)))
            .collect();
        write_csv(path, &rows)?;
    }
    let mut o = Outcome::ok(render::narratability(&report, &loaded.scenario, tol, style));
    o.stderr = warnings_text(&loaded.warnings);
    Ok(o)
}

fn execute(command: &Command, tol: f64, style: Style) -> Result<Outcome, CliError> {
    match command {
        Command::DemoPaper { csv } => compare(&demo::loaded(), "free", "flip", tol, csv.as_deref(), style),
        Command::CompareFrames {
            scenario,
            rule1,
            rule2,
            csv,
        } => compare(&files::load_scenario(scenario)?, rule1, rule2, tol, csv.as_deref(), style),
        Command::Simulate {
            scenario,
            rule,
            foliation,
            csv,
            tau_grid,
        } => {
            if *tau_grid < 2 {
                return Err(CliError::Usage("--tau-grid needs at least 2 points".into()));
            }
            let loaded = files::load_scenario(scenario)?;
            let r = loaded.rule(rule)?;
            let f = loaded.foliation(*foliation)?;
            let history = evolve(&loaded.scenario, f, r)?;
            if let Some(path) = csv {
                write_csv(path, &history_rows(&history, *foliation, *tau_grid)?)?;
            }
            let mut o = Outcome::ok(render::history(&history, &loaded.scenario, rule, *foliation, style));
            o.stderr = warnings_text(&loaded.warnings);
            Ok(o)
        }
        Command::ClusterCheck { kernel } => {
            let loaded = files::load_kernel(kernel)?;
            let verdict = analyze(&loaded.kernel);
            let canonical = canonicalize(&loaded.kernel).ok();
            let mut o = Outcome::ok(render::cluster(&loaded.kernel, &verdict, canonical.as_ref(), style));
            o.stderr = warnings_text(&loaded.warnings);
            o.code = if verdict.compliant {
                0
            } else if verdict.conserves_momentum {
                EXIT_CLUSTER_VIOLATION
            } else {
                EXIT_NON_CONSERVING
            };
            Ok(o)
        }
        Command::Algebra(op) => algebra(op, style),
    }
}

fn algebra(op: &AlgebraCommand, style: Style) -> Result<Outcome, CliError> {
    match op {
        AlgebraCommand::Residuals { gens } => {
            let g = files::load_generators(gens)?;
            let table = bracket_residuals(&g)?;
            Ok(Outcome::ok(render::residual_table(&table, &g.hermiticity_report(), style)))
        }
        AlgebraCommand::SolveW { h0, v, k0, axis, w_out } => {
            let axis = usize::from(*axis) - 1;
            let mut k = [None, None, None];
            k[axis] = Some(files::load_matrix(k0)?);
            let sys = SplitSystem::new(files::load_matrix(h0)?, files::load_matrix(v)?, k)?;
            let sol = solve_w(&sys, axis)?;
            if let Some(path) = w_out {
                let text = serde_json::to_string(&files::matrix_to_json(&sol.w)).expect("serializable");
                std::fs::write(path, text + "\n").map_err(|e| CliError::io(path.display().to_string(), e))?;
            }
            Ok(Outcome::ok(render::w_solution(&sol, axis + 1, style)))
        }
        AlgebraCommand::SameHistory { h0, va, vb, psi, times } => {
            let r = same_history_check(
                &files::load_matrix(h0)?,
                &files::load_matrix(va)?,
                &files::load_matrix(vb)?,
                &files::load_vector(psi)?,
                times,
            )?;
            Ok(Outcome::ok(render::same_history(&r, style)))
        }
        AlgebraCommand::BoostCheck { w, psi } => {
            let (w, psi) = (files::load_matrix(w)?, files::load_vector(psi)?);
            let residual = boost_nontriviality_residual(&w, &psi)?;
            let nontrivial = boost_nontriviality_check(&w, &psi)?;
            Ok(Outcome::ok(render::boost_check(residual, nontrivial, style)))
        }
    }
}

/// Serializes a loaded scenario back to JSON.
pub fn scenario_json(loaded: &LoadedScenario) -> String {
    let file: ScenarioFile = loaded.to_file();
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

//! Command-line surface, spec documents and result emission.
//!
//! Exit codes: 0 success, 1 validation failure (bad flags, bad documents),
//! 2 internal-consistency failure (a computed state broke a density
//! invariant or a verification check failed).

pub mod landscape;
pub mod report;
pub mod spec;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::market::{find_extrema, scan_landscape, ProjectivePoint, ScanConfig};
use crate::newcomb::{
    payoff_formula, pure_strategy_table, run_meyer_protocol, run_meyer_protocol_sampled,
    verify_restoration, ProtocolParams,
};

pub use landscape::emit_landscape_csv;
pub use report::{execute_spec, Execution, RunReport};
pub use spec::{parse_game_spec, GameSpecDoc};

#[derive(Debug, Parser)]
#[command(name = "qnewcomb", version, about = "Quantum Newcomb game simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The Newcomb game under the Hadamard sandwich protocol.
    #[command(subcommand)]
    Newcomb(NewcombCommand),
    /// The market variant over projective strategy coordinates.
    #[command(subcommand)]
    Market(MarketCommand),
    /// Execute a JSON game-spec document.
    Run(RunArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Print the machine-readable JSON report on standard output.
    #[arg(long)]
    json: bool,
    /// Write the machine-readable report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum NewcombCommand {
    /// Run the protocol for one (v, w) pair.
    Run {
        /// Probability of the female (both boxes) initial strategy.
        #[arg(long)]
        v: f64,
        /// Probability of the negation tactic in step 2.
        #[arg(long)]
        w: f64,
        /// Include every protocol stage in the report.
        #[arg(long)]
        trace: bool,
        /// Sample the step-2 branch this many times instead of averaging.
        #[arg(long)]
        samples: Option<usize>,
        /// Seed for --samples.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Payoffs of the four pure (strategy, tactic) runs.
    Table {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check that the final state equals the initial one on a (v, w) grid.
    Verify {
        #[arg(long, default_value_t = 51)]
        grid: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
enum MarketCommand {
    /// Sample the payoff landscape and write it as CSV.
    Scan {
        #[arg(long, default_value_t = 401)]
        grid: usize,
        #[arg(long, default_value_t = 4.0)]
        radius: f64,
        /// Also sample the chart u = 1/z around infinity.
        #[arg(long)]
        inverse_chart: bool,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (defaults to all cores); output does not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Locate the maximum and minimum of the payoff landscape.
    Extrema {
        #[arg(long, default_value_t = 401)]
        grid: usize,
        #[arg(long, default_value_t = 30)]
        refine: usize,
        #[arg(long, default_value_t = 4.0)]
        radius: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, renaming only once everything is on disk.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn check_unit_interval(flag: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(format!("--{flag} must be in [0, 1], got {x}")))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "--radius must be a positive number, got {r}"
        )))
    }
}

struct Emitted {
    summary: String,
    json: String,
}

fn emit(out: &mut dyn Write, output: &OutputArgs, emitted: Emitted) -> Result<()> {
    if let Some(path) = &output.out {
        write_atomic(path, emitted.json.as_bytes())?;
    }
    if output.json {
        out.write_all(emitted.json.as_bytes())?;
    } else {
        out.write_all(emitted.summary.as_bytes())?;
    }
    Ok(())
}

fn describe_point(p: &ProjectivePoint) -> String {
    match p.z() {
        Some(z) => format!("z = {:+.9} {:+.9}i", z.re, z.im),
        None => "z = inf".to_string(),
    }
}

fn newcomb(cmd: NewcombCommand, out: &mut dyn Write) -> Result<()> {
    match cmd {
        NewcombCommand::Run {
            v,
            w,
            trace,
            samples,
            seed,
            output,
        } => {
            check_unit_interval("v", v)?;
            check_unit_interval("w", w)?;
            let params = ProtocolParams::new(v, w)?;
            let run = run_meyer_protocol(params)?;
            let mut rep = report::ProtocolReport::new(&run, trace)?;
            let mut summary = format!(
                "v = {v}, w = {w}\npayoff_usd = {}\nrestoration deviation = {:e}\nformula payoff_usd = {}\n",
                report::format_dollars(run.payoff),
                run.restoration_deviation(),
                report::format_dollars(payoff_formula(v)?),
            );
            if let Some(shots) = samples {
                if shots == 0 {
                    return Err(invalid("--samples must be positive"));
                }
                let sampled = run_meyer_protocol_sampled(params, shots, seed)?;
                summary.push_str(&format!(
                    "sampled: {} of {} shots negated, mean payoff_usd = {}\n",
                    sampled.negations,
                    sampled.shots,
                    report::format_dollars(sampled.mean_payoff)
                ));
                rep.payoff_usd = report::Dollars(sampled.mean_payoff);
            }
            if trace {
                for st in &run.trace {
                    let m = &st.human_reduced;
                    summary.push_str(&format!(
                        "  {:<36} human = [[{:.6}, {:.6}], [{:.6}, {:.6}]]\n",
                        st.label,
                        m.get(0, 0).re,
                        m.get(0, 1).re,
                        m.get(1, 0).re,
                        m.get(1, 1).re
                    ));
                }
            }
            if !rep.checks.restored {
                emit(
                    out,
                    &output,
                    Emitted {
                        summary,
                        json: report::to_json_string(&rep),
                    },
                )?;
                return Err(Error::Consistency(
                    "final state differs from the initial state".into(),
                ));
            }
            emit(
                out,
                &output,
                Emitted {
                    summary,
                    json: report::to_json_string(&rep),
                },
            )
        }
        NewcombCommand::Table { output } => {
            let rows = pure_strategy_table()?;
            let mut summary = format!("{:<8} {:<9} {:>16}\n", "strategy", "tactic", "payoff_usd");
            for r in &rows {
                summary.push_str(&format!(
                    "{:<8} {:<9} {:>16}\n",
                    r.strategy,
                    r.tactic,
                    report::format_dollars(r.payoff)
                ));
            }
            summary.push_str(
                "\nNote: every run ends in its initial state, so the payoff is fixed by the\n\
                 initial strategy alone. Changing one's mind (negation) neither gains nor\n\
                 loses: there is no $0 or $1001000 outcome under this protocol.\n",
            );
            let rep = report::TableReport::new(&rows);
            emit(
                out,
                &output,
                Emitted {
                    summary,
                    json: report::to_json_string(&rep),
                },
            )
        }
        NewcombCommand::Verify { grid, tol, output } => {
            if grid < 2 {
                return Err(invalid(format!("--grid must be >= 2, got {grid}")));
            }
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(invalid(format!(
                    "--tol must be a non-negative number, got {tol}"
                )));
            }
            let r = verify_restoration(grid, tol)?;
            let summary = format!(
                "grid {g}x{g}, tol {tol:e}\nmax deviation = {:e} at (v, w) = ({}, {})\n\
                 max payoff spread over w = {} usd\nmax gap to closed form = {} usd\n{}\n",
                r.max_deviation,
                r.worst.0,
                r.worst.1,
                report::format_dollars(r.max_payoff_spread),
                report::format_dollars(r.max_formula_gap),
                if r.passed { "PASS" } else { "FAIL" },
                g = grid,
            );
            emit(
                out,
                &output,
                Emitted {
                    summary,
                    json: report::to_json_string(&report::VerifyReport::new(&r)),
                },
            )?;
            if r.passed {
                Ok(())
            } else {
                Err(Error::Consistency(format!(
                    "restoration deviation {:e} exceeds {tol:e}",
                    r.max_deviation
                )))
            }
        }
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(invalid("--threads must be >= 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Consistency(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn market(cmd: MarketCommand, out: &mut dyn Write) -> Result<()> {
    match cmd {
        MarketCommand::Scan {
            grid,
            radius,
            inverse_chart,
            out: path,
            threads,
        } => {
            if grid < 3 {
                return Err(invalid(format!("--grid must be >= 3, got {grid}")));
            }
            check_radius(radius)?;
            let cfg = ScanConfig {
                grid_n: grid,
                radius,
                inverse_chart,
                ..ScanConfig::default()
            };
            let samples = with_threads(threads, || scan_landscape(&cfg))??;
            let csv = emit_landscape_csv(&samples);
            write_atomic(&path, csv.as_bytes())?;
            let (lo, hi) = samples
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    (lo.min(s.payoff), hi.max(s.payoff))
                });
            writeln!(
                out,
                "wrote {} samples to {}\npayoff range [{}, {}] usd",
                samples.len(),
                path.display(),
                report::format_dollars(lo),
                report::format_dollars(hi)
            )?;
            Ok(())
        }
        MarketCommand::Extrema {
            grid,
            refine,
            radius,
            output,
        } => {
            if grid < 3 {
                return Err(invalid(format!("--grid must be >= 3, got {grid}")));
            }
            if refine > 200 {
                return Err(invalid(format!("--refine must be <= 200, got {refine}")));
            }
            check_radius(radius)?;
            let cfg = ScanConfig {
                grid_n: grid,
                radius,
                inverse_chart: true,
                refinement: refine,
            };
            let e = find_extrema(&cfg)?;
            let rep = report::ExtremaReport::new(&cfg, &e)?;
            let summary = format!(
                "max {} usd at {} (chordal distance to z = -1: {:.3e})\n\
                 min {} usd at {} (chordal distance to z = +1: {:.3e})\n\
                 reference: z = -1 -> {} usd, z = +1 -> {} usd\n",
                report::format_dollars(e.max),
                describe_point(&e.argmax),
                rep.checks.argmax_distance_to_minus_one,
                report::format_dollars(e.min),
                describe_point(&e.argmin),
                rep.checks.argmin_distance_to_plus_one,
                report::format_dollars(crate::market::market_payoff(&ProjectivePoint::from_z(
                    C64::new(-1.0, 0.0)
                )?)?),
                report::format_dollars(crate::market::market_payoff(&ProjectivePoint::from_z(
                    C64::new(1.0, 0.0)
                )?)?),
            );
            emit(
                out,
                &output,
                Emitted {
                    summary,
                    json: report::to_json_string(&rep),
                },
            )
        }
    }
}

fn run_spec(args: RunArgs, out: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&args.spec)?;
    let doc = parse_game_spec(&text)?;
    let exec = execute_spec(&doc)?;
    let mut summary = String::new();
    for st in &exec.report.trace {
        summary.push_str(&format!(
            "{:<40} purity {:.6}  diag {:?}\n",
            st.label, st.purity, st.diagonal
        ));
    }
    summary.push_str(&format!(
        "payoff_usd = {}\n",
        report::format_dollars(exec.payoff())
    ));
    emit(
        out,
        &args.output,
        Emitted {
            summary,
            json: report::to_json_string(&exec.report),
        },
    )
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn cli_dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Newcomb(cmd) => newcomb(cmd, out),
        Command::Market(cmd) => market(cmd, out),
        Command::Run(args) => run_spec(args, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

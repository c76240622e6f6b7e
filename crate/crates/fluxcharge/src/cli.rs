//! Command-line front end: `analyze`, `dualize`, `simulate` and `check`.
//!
//! Exit codes: 0 success, 1 failed check, 2 unreadable or invalid input,
//! 3 unsupported structure (nonplanar dual, nonlinear constraint).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{analyze, EmbeddedCircuit};
use crate::checks::run_all;
use crate::duality::{dual_circuit, dual_variable_choice};
use crate::dynamics::{check_kirchhoff, energy_drift, integrate, trajectory_csv, State};
use crate::io::{parse_netlist, serialize_netlist, serialize_report, AnalysisReport, NetlistDocument, ReportFormat};
use crate::reduction::{ReductionError, ReductionOptions, VariableChoice};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fluxcharge", version, about = "Flux-charge symmetric analysis of embedded LC circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Matrices, null directions, reduction and Hamiltonian of a circuit.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Netlist of the planar dual circuit.
    Dualize {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrates Hamilton's equations and writes the trajectory as CSV.
    Simulate {
        file: PathBuf,
        #[arg(long = "t-end")]
        t_end: f64,
        #[arg(long)]
        dt: f64,
        /// Initial values, e.g. `q=1,phi=0` (all pairs) or `q1=1,phi2=0.5`.
        #[arg(long, default_value = "")]
        state: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the invariant checks on a circuit.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

fn reduction_failure(e: ReductionError) -> Failure {
    let code = match e {
        ReductionError::UnsupportedConstraint { .. } => EXIT_UNSUPPORTED,
        ReductionError::InvalidVariableChoice(_) => EXIT_INVALID,
        _ => EXIT_CHECK_FAILED,
    };
    Failure::new(code, e.to_string())
}

fn load(path: &Path) -> Result<(EmbeddedCircuit, Option<VariableChoice>), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INVALID, format!("cannot read {}: {e}", path.display())))?;
    let doc = parse_netlist(&text).map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", path.display())))?;
    doc.build().map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, target: Option<&Path>, text: &str) -> Result<(), Failure> {
    match target {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::new(EXIT_INVALID, format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_INVALID, e.to_string())),
    }
}

/// Parses `q=1,phi=0`, `Q2=0.5`, `phi1=-1`: bare names set every pair,
/// numbered names (1-based) set one.
pub fn parse_state(spec: &str, n: usize) -> Result<State, String> {
    let mut s = State::zero(n);
    for item in spec.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (key, value) = item.split_once('=').ok_or_else(|| format!("`{item}` is not of the form name=value"))?;
        let value: f64 = value.trim().parse().map_err(|_| format!("`{}` is not a number", value.trim()))?;
        let key = key.trim().to_ascii_lowercase();
        let (target, index) = if let Some(rest) = key.strip_prefix("phi") {
            (&mut s.phi, rest)
        } else if let Some(rest) = key.strip_prefix('q') {
            (&mut s.q, rest)
        } else {
            return Err(format!("unknown variable `{key}`; use q, phi, qK or phiK"));
        };
        if index.is_empty() {
            target.iter_mut().for_each(|x| *x = value);
        } else {
            let k: usize = index.parse().map_err(|_| format!("unknown variable `{key}`"))?;
            if k == 0 || k > n {
                return Err(format!("`{key}` is out of range; the circuit has {n} pairs"));
            }
            target[k - 1] = value;
        }
    }
    Ok(s)
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Analyze { file, out: target, format } => {
            let (ec, choice) = load(&file)?;
            let an = analyze(ec, &ReductionOptions { variable_choice: choice, ..Default::default() })
                .map_err(reduction_failure)?;
            let format = match format {
                Format::Json => ReportFormat::Json,
                Format::Text => ReportFormat::Text,
            };
            emit(out, target.as_deref(), &serialize_report(&AnalysisReport::new(&an), format))?;
            Ok(EXIT_OK)
        }
        Command::Dualize { file, out: target } => {
            let (ec, choice) = load(&file)?;
            let (dual, dm) = dual_circuit(&ec).map_err(|e| Failure::new(EXIT_UNSUPPORTED, e.to_string()))?;
            let choice = choice.map(|c| dual_variable_choice(&c, &dm));
            emit(out, target.as_deref(), &serialize_netlist(&NetlistDocument::from_embedded(&dual, choice.as_ref())))?;
            Ok(EXIT_OK)
        }
        Command::Simulate { file, t_end, dt, state, out: target } => {
            let (ec, choice) = load(&file)?;
            let an = analyze(ec, &ReductionOptions { variable_choice: choice, ..Default::default() })
                .map_err(reduction_failure)?;
            let h = an.reduced.hamiltonian();
            let s0 = parse_state(&state, h.pair_count()).map_err(|m| Failure::new(EXIT_INVALID, m))?;
            let t = integrate(h, &s0, dt, t_end).map_err(|e| {
                let code = if matches!(e, crate::dynamics::DynamicsError::Diverged { .. }) {
                    EXIT_CHECK_FAILED
                } else {
                    EXIT_INVALID
                };
                Failure::new(code, e.to_string())
            })?;
            emit(out, target.as_deref(), &trajectory_csv(&t))?;
            let k = check_kirchhoff(&an.embedded.circuit, &an.reduced, &t);
            let _ = writeln!(
                err,
                "samples: {}\nenergy drift: {:.3e}\nKirchhoff residuals: loop {:.3e}, node {:.3e}, constitutive {:.3e}",
                t.samples.len(),
                energy_drift(&t),
                k.loop_voltage,
                k.node_current,
                k.constitutive
            );
            Ok(EXIT_OK)
        }
        Command::Check { file, seed } => {
            let (ec, choice) = load(&file)?;
            let results = run_all(&ec, &ReductionOptions { variable_choice: choice, ..Default::default() }, seed)
                .map_err(reduction_failure)?;
            let mut ok = true;
            for r in &results {
                ok &= r.passed;
                let status = if r.passed { "PASS" } else { "FAIL" };
                let detail = if r.detail.is_empty() { String::new() } else { format!(" ({})", r.detail) };
                let _ = writeln!(out, "{status} {}{detail}", r.name);
            }
            Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Runs one command; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INVALID;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_assignments() {
        let s = parse_state("q=1,phi=0", 2).unwrap();
        assert_eq!((s.q, s.phi), (vec![1.0, 1.0], vec![0.0, 0.0]));
        let s = parse_state("Q2=0.5, PHI1=-1", 2).unwrap();
        assert_eq!((s.q, s.phi), (vec![0.0, 0.5], vec![-1.0, 0.0]));
        assert!(parse_state("q3=1", 2).unwrap_err().contains("out of range"));
        assert!(parse_state("x=1", 2).is_err());
        assert!(parse_state("q=abc", 2).is_err());
    }
}

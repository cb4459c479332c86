//! The `mlad` front end: expand sequences, verify the opcode table, run
//! cooling ensembles.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::angle::parse_ratio;
use crate::cooling::{
    run_ensemble, run_ensemble_with_threads, CycleHistogram, DecayModel, EnsembleConfig,
};
use crate::gate::{verify_all, verify_named, GateError, VerificationReport};
use crate::sequence::{builtin_table, expand, format_primitive, parse_with, ParseOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Column header of the simulation CSV.
pub const CSV_HEADER: [&str; 3] = ["cycle", "bin_center", "probability_density"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Simulation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Simulation(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    fn io(path: &Path, source: impl Into<std::io::Error>) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source: source.into(),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Flat primitive list, one per line in application order.
///
/// `arg` is tried as a table name or alias, then as a file, then as inline
/// program text.
pub fn cmd_expand(arg: &str, omega_tau: Rational64) -> Result<String, CliError> {
    let table = builtin_table();
    let source = if table.resolve(arg.trim()).is_some() && !arg.trim().is_empty() {
        arg.trim().to_string()
    } else if !arg.is_empty() && Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| CliError::io(Path::new(arg), e))?
    } else {
        arg.to_string()
    };
    let prog = parse_with(&source, ParseOptions { omega_tau }).map_err(usage)?;
    let prims = expand(&prog, &table).map_err(usage)?;
    Ok(prims.iter().map(|p| format_primitive(p) + "\n").collect())
}

pub struct VerifyOutcome {
    pub text: String,
    pub reports: Vec<VerificationReport>,
    pub all_passed: bool,
}

pub fn cmd_verify(name: Option<&str>, all: bool, json: bool) -> Result<VerifyOutcome, CliError> {
    let table = builtin_table();
    let reports = match (name, all) {
        (_, true) => verify_all(&table),
        (Some(n), false) => verify_named(n, &table).map(|r| vec![r]),
        (None, false) => return Err(usage("verify needs an opcode name or --all")),
    }
    .map_err(|e| match e {
        GateError::UnknownGate(n) => usage(format!("unknown opcode `{n}`")),
        other => CliError::Simulation(other.to_string()),
    })?;
    let all_passed = reports.iter().all(|r| r.passed);
    let text = if json {
        serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n"
    } else {
        reports.iter().map(|r| r.summary_line() + "\n").collect()
    };
    Ok(VerifyOutcome {
        text,
        reports,
        all_passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub cycle: usize,
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
    pub iqr: f64,
}

/// Everything needed to reproduce a run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: EnsembleConfig,
    pub seed: u64,
    pub recorded_cycles: Vec<usize>,
    pub threads: Option<usize>,
    pub artifact_version: String,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
    pub summary: Vec<CycleSummary>,
}

/// `cooling.csv` → `cooling.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// CSV text of the given histograms.
pub fn histograms_csv(hists: &[CycleHistogram]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for h in hists {
        let cycle = h.cycle.to_string();
        for &(c, d) in &h.histogram {
            w.write_record([cycle.as_str(), &c.to_string(), &d.to_string()])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

pub struct SimulateOutcome {
    pub summary: String,
    pub manifest: RunManifest,
    pub histograms: Vec<CycleHistogram>,
}

/// Runs the ensemble, writes the CSV to `out` and the manifest beside it.
/// `record` selects cycles for the CSV (default: all, including 0).
pub fn cmd_simulate(
    cfg: &EnsembleConfig,
    out: &Path,
    record: Option<&[usize]>,
    threads: Option<usize>,
) -> Result<SimulateOutcome, CliError> {
    let start = Instant::now();
    let hists = match threads {
        Some(t) => run_ensemble_with_threads(cfg, t),
        None => run_ensemble(cfg),
    }
    .map_err(|e| CliError::Simulation(e.to_string()))?;
    let recorded: Vec<usize> = match record {
        Some(r) => {
            if let Some(bad) = r.iter().find(|&&c| c > cfg.cycles) {
                return Err(usage(format!(
                    "cannot record cycle {bad} of a {}-cycle run",
                    cfg.cycles
                )));
            }
            let mut r = r.to_vec();
            r.sort_unstable();
            r.dedup();
            r
        }
        None => (0..=cfg.cycles).collect(),
    };
    let selected: Vec<CycleHistogram> = hists
        .iter()
        .filter(|h| recorded.contains(&h.cycle))
        .cloned()
        .collect();

    std::fs::write(out, histograms_csv(&selected)).map_err(|e| CliError::io(out, e))?;
    let summary: Vec<CycleSummary> = hists
        .iter()
        .map(|h| CycleSummary {
            cycle: h.cycle,
            mean: h.summary.mean,
            std: h.summary.std,
            std_error: h.summary.std_error,
            iqr: h.summary.iqr,
        })
        .collect();
    let mpath = manifest_path(out);
    let manifest = RunManifest {
        command: "simulate".into(),
        config: cfg.clone(),
        seed: cfg.seed,
        recorded_cycles: recorded,
        threads,
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        outputs: vec![out.to_path_buf(), mpath.clone()],
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        summary,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(&mpath, json).map_err(|e| CliError::io(&mpath, e))?;

    let mut text = String::from("cycle     mean      std       se      iqr\n");
    for s in &manifest.summary {
        text += &format!(
            "{:>5} {:>8.4} {:>8.4} {:>8.4} {:>8.4}\n",
            s.cycle, s.mean, s.std, s.std_error, s.iqr
        );
    }
    if let Some(last) = manifest.summary.last() {
        text += &format!(
            "final std {:.4} hbar k after {} cycles\n",
            last.std, last.cycle
        );
    }
    Ok(SimulateOutcome {
        summary: text,
        manifest,
        histograms: hists,
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "mlad",
    version,
    about = "Momentum-ladder pulse sequences: expand, verify, simulate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the flat primitive list of an opcode, file or inline program.
    Expand {
        /// Opcode name, path to a program file, or program text.
        target: String,
        /// ωτ for one-argument FG terms.
        #[arg(long, default_value = "1", value_parser = parse_rational)]
        omega_tau: Rational64,
    },
    /// Compare composed opcodes with their ideal gates.
    Verify {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        all: bool,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo cooling ensemble; writes CSV plus a manifest.
    Simulate {
        #[arg(long, default_value_t = 10_000)]
        atoms: usize,
        #[arg(long, default_value_t = 8)]
        cycles: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Initial flat span `LO:HI` in ħk.
        #[arg(long, default_value = "0:8", value_parser = parse_span, allow_hyphen_values = true)]
        span: (f64, f64),
        #[arg(long, default_value = "uniform")]
        decay: DecayModel,
        #[arg(long, default_value_t = 0.125)]
        bin: f64,
        /// Ladder index window `LO:HI`.
        #[arg(long, default_value = "-48:55", value_parser = parse_window, allow_hyphen_values = true)]
        window: (i64, i64),
        #[arg(long, default_value = "1", value_parser = parse_rational)]
        omega_tau: Rational64,
        /// Cycles to write, comma separated (default: all).
        #[arg(long, value_delimiter = ',')]
        record: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_rational(s: &str) -> Result<Rational64, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

fn split_pair(s: &str) -> Result<(&str, &str), String> {
    s.split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got `{s}`"))
}

fn parse_span(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = split_pair(s)?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    Ok((lo, hi))
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = split_pair(s)?;
    let lo: i64 = a.trim().parse().map_err(|_| format!("bad index `{a}`"))?;
    let hi: i64 = b.trim().parse().map_err(|_| format!("bad index `{b}`"))?;
    Ok((lo, hi))
}

/// Thread cap from `MLAD_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("MLAD_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!(
                "MLAD_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let out_err = |e: std::io::Error| CliError::io(Path::new("<stdout>"), e);
    match cli.command {
        Command::Expand { target, omega_tau } => {
            stdout
                .write_all(cmd_expand(&target, omega_tau)?.as_bytes())
                .map_err(out_err)?;
            Ok(EXIT_OK)
        }
        Command::Verify { name, all, json } => {
            let o = cmd_verify(name.as_deref(), all, json)?;
            stdout.write_all(o.text.as_bytes()).map_err(out_err)?;
            Ok(if o.all_passed {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            })
        }
        Command::Simulate {
            atoms,
            cycles,
            seed,
            span,
            decay,
            bin,
            window,
            omega_tau,
            record,
            out,
        } => {
            let cfg = EnsembleConfig {
                atom_count: atoms,
                cycles,
                seed,
                initial_span: span,
                decay_model: decay,
                window,
                bin_width: bin,
                omega_tau,
            };
            let threads = threads_from_env()?;
            let o = cmd_simulate(&cfg, &out, record.as_deref(), threads)?;
            stdout.write_all(o.summary.as_bytes()).map_err(out_err)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs one command,
/// returning the exit code. Errors go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "mlad: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::DEFAULT_OMEGA_TAU;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("mlad").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn expand_not0() {
        let (code, out, _) = run_capture(&["expand", "NOT0"]);
        assert_eq!(code, 0);
        assert_eq!(out, "F(1/2)\nW+(1/2,0)\nF(1/2)\n");
        assert_eq!(cmd_expand("NOT(0)", DEFAULT_OMEGA_TAU).unwrap(), out);
    }

    #[test]
    fn expand_empty_and_inline() {
        assert_eq!(cmd_expand("", DEFAULT_OMEGA_TAU).unwrap(), "");
        assert_eq!(
            cmd_expand("G(1/8) . FG(1/4)", Rational64::new(3, 1)).unwrap(),
            "FG(1/4,3)\nG(1/8)\n"
        );
        let (code, _, err) = run_capture(&["expand", "W+(1/3,"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("1:8"), "{err}");
    }

    #[test]
    fn verify_codes() {
        assert_eq!(run_capture(&["verify", "NOT0"]).0, 0);
        assert!(run_capture(&["verify", "NOT0"]).1.starts_with("PASS NOT0"));
        assert_eq!(run_capture(&["verify", "BOGUS"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["verify"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["verify", "HAD0"]).0, EXIT_VERIFY_FAILED);
    }

    #[test]
    fn span_and_window_parsing() {
        assert_eq!(parse_span("-2.5:6").unwrap(), (-2.5, 6.0));
        assert!(parse_span("3").is_err());
        assert_eq!(parse_window("-48:55").unwrap(), (-48, 55));
    }

    #[test]
    fn csv_shape() {
        let cfg = EnsembleConfig {
            atom_count: 1,
            cycles: 0,
            ..Default::default()
        };
        let hists = run_ensemble(&cfg).unwrap();
        let text = histograms_csv(&hists);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("cycle,bin_center,probability_density"));
        assert!(lines.any(|l| l == "0,0.0625,0.125"));
        assert!(!text.contains('\r'));
    }
}

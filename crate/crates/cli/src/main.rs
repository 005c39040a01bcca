#![allow(clippy::neg_cmp_op_on_partial_ord)]
mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use hsflow_core::diagnostics::{
    check_blowup_records, check_energy_identity, DiagnosticsRecord, BLOWUP_PRODUCT_THRESHOLD, ENERGY_IDENTITY_TOL,
};
use hsflow_core::flows::{run_flow, RunOutcome};
use hsflow_core::g2::{phi0, G2Constants};
use hsflow_core::grid::snapshot::write_snapshot;
use hsflow_core::init::build;
use hsflow_core::selftest::{run_selftest, DEFAULT_SEED};
use hsflow_core::{Error, FlowState, GridSpec};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "hsflow", version, about = "Harmonic section flows on flat tori", arg_required_else_help = true)]
struct Cli {
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Only print the final outcome line.
    #[arg(long, global = true)]
    quiet: bool,
    /// RNG seed (overrides init.seed and the self-test seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Randomized identity checks of the algebra kernel.
    Selftest {
        /// Mutation hook: negate φ₀.
        #[arg(long, hide = true)]
        flip_phi_sign: bool,
    },
    /// Run a flow from a TOML configuration.
    Run { config: PathBuf },
    /// Check a diagnostics.jsonl series.
    Check { series: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let code = match &cli.cmd {
        Cmd::Selftest { flip_phi_sign } => selftest(&cli, *flip_phi_sign),
        Cmd::Run { config } => run(&cli, config),
        Cmd::Check { series } => check(series),
    };
    ExitCode::from(code)
}

fn selftest(cli: &Cli, flip: bool) -> u8 {
    let constants = if flip { G2Constants::from_phi(phi0().scale(-1.0)) } else { G2Constants::standard() };
    let report = run_selftest(&constants, cli.seed.unwrap_or(DEFAULT_SEED));
    println!("{:<28} {:>6} {:>22} {:>10} {:>10}", "check", "result", "value", "expected", "max_error");
    for r in &report.rows {
        println!(
            "{:<28} {:>6} {:>22.12} {:>10} {:>10.1e}",
            r.name,
            if r.pass { "pass" } else { "FAIL" },
            r.value,
            r.expected,
            r.max_error
        );
    }
    let failed = report.rows.iter().filter(|r| !r.pass).count();
    println!("{} of {} checks passed", report.rows.len() - failed, report.rows.len());
    if report.pass() {
        0
    } else {
        EXIT_RUNTIME
    }
}

fn usage_error(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn run(cli: &Cli, path: &Path) -> u8 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("{}: {e}", path.display())),
    };
    let plan = match RunConfig::parse(&text).and_then(|c| c.plan(cli.seed, cli.out_dir.clone())) {
        Ok(p) => p,
        Err(e) => return usage_error(&format!("{}: {e}", path.display())),
    };
    match execute(cli, &plan) {
        Ok(outcome) => {
            println!("outcome: {}", outcome.label());
            match outcome {
                RunOutcome::Error(_) => EXIT_RUNTIME,
                _ => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("outcome: error");
            EXIT_RUNTIME
        }
    }
}

fn execute(cli: &Cli, plan: &config::Plan) -> Result<RunOutcome, Error> {
    let grid = plan.grid.clone().unwrap_or_else(|| GridSpec::new(vec![], vec![]).expect("empty grid"));
    let structure = build(plan.kind, &grid, &plan.init)?;
    let initial = FlowState::new(0.0, structure)?;
    fs::create_dir_all(&plan.out_dir)?;
    let mut jsonl = BufWriter::new(File::create(plan.out_dir.join("diagnostics.jsonl"))?);
    let mut csv = BufWriter::new(File::create(plan.out_dir.join("summary.csv"))?);
    writeln!(csv, "t,E,K,eps_max,drift")?;
    let mut io_error: Option<std::io::Error> = None;
    let mut last_snapshot = None;
    let mut observer = |n: usize, s: &FlowState, rec: Option<&DiagnosticsRecord>| {
        if io_error.is_some() {
            return;
        }
        let mut write = || -> Result<(), Error> {
            if let Some(r) = rec {
                let line = serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?;
                writeln!(jsonl, "{line}")?;
                let cols = [r.t, r.energy, r.kinetic, r.eps_max, r.constraint_drift].map(number);
                writeln!(csv, "{}", cols.join(","))?;
                if !cli.quiet {
                    println!(
                        "step {n:>7} t {:.6e} E {:.6e} K {:.6e} eps_max {:.6e}",
                        r.t, r.energy, r.kinetic, r.eps_max
                    );
                }
            }
            if plan.snapshot_interval > 0 && n.is_multiple_of(plan.snapshot_interval) && last_snapshot != Some(n) {
                if let Some(f) = s.structure.field() {
                    let file = File::create(plan.out_dir.join(format!("snapshot_{n:07}.bin")))?;
                    write_snapshot(BufWriter::new(file), f, s.structure.label(), s.t)?;
                    last_snapshot = Some(n);
                }
            }
            Ok(())
        };
        if let Err(e) = write() {
            io_error = Some(std::io::Error::other(e.to_string()));
        }
    };
    let result = run_flow(initial, &plan.stepper, &plan.record, &mut observer)?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    jsonl.flush()?;
    csv.flush()?;
    if let RunOutcome::Error(e) = &result.outcome {
        eprintln!("error: {e}");
    }
    if !cli.quiet {
        println!("steps {} dt {:e}", result.steps, result.dt);
    }
    if plan.blowup_fit {
        let b = check_blowup_records(&result.records, BLOWUP_PRODUCT_THRESHOLD)?;
        println!("{}", serde_json::to_string(&b).map_err(|e| Error::Io(e.to_string()))?);
    }
    Ok(result.outcome)
}

/// Shortest round-trip decimal form.
fn number(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}

fn check(path: &Path) -> u8 {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) => return usage_error(&format!("{}: {e}", path.display())),
    };
    let mut series = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = match line {
            Ok(l) => l,
            Err(e) => return usage_error(&format!("{}: {e}", path.display())),
        };
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<DiagnosticsRecord>(&line) {
            Ok(r) => series.push(r),
            Err(e) => return usage_error(&format!("{}:{}: {e}", path.display(), i + 1)),
        }
    }
    let identity = match check_energy_identity(&series, ENERGY_IDENTITY_TOL) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let bound = match check_blowup_records(&series, BLOWUP_PRODUCT_THRESHOLD) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    println!("energy_identity {}", serde_json::to_string(&identity).expect("plain struct"));
    println!("blowup_bound {}", serde_json::to_string(&bound).expect("plain struct"));
    let pass = identity.pass && bound.pass;
    println!("check: {}", if pass { "pass" } else { "fail" });
    if pass {
        0
    } else {
        EXIT_RUNTIME
    }
}

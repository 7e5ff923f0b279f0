use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use azulift_core::lift::{self, LiftError, LiftScenario};
use azulift_core::symbols::{self, SymbolError, SymbolPair};
use azulift_core::Q;
use clap::{Parser, Subcommand};

use crate::format::{self, FormatError};

#[derive(Debug, Parser)]
#[command(
    name = "azulift",
    version,
    about = "Exact Azumaya lifts of degree-8 order-2 algebras over K[ε]/(ε^N)"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Hilbert symbols, ramification and split verdict of (a, b) over ℚ.
    Symbols {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// validate → witnesses → construct → verify; writes a certificate.
    Lift {
        /// Scenario file (JSON).
        #[arg(required_unless_present = "batch")]
        scenario: Option<PathBuf>,
        /// Certificate path; with --batch, the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the truncation order N.
        #[arg(long)]
        trunc: Option<usize>,
        /// Overrides rng_seed.
        #[arg(long, env = "AZULIFT_SEED")]
        seed: Option<u64>,
        /// Lift every scenario file in a directory.
        #[arg(long, conflicts_with = "scenario")]
        batch: Option<PathBuf>,
    },
    /// Re-checks a certificate file on its own.
    Verify { certificate: PathBuf },
    /// Solves u² − n v² = b over ℚ.
    SolveNorm {
        #[arg(allow_hyphen_values = true)]
        n: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// y with (y, n2) ≅ (a2, n2) and (y, n3) ≅ (a3, n3).
    FindSlot {
        #[arg(allow_hyphen_values = true)]
        a2: String,
        #[arg(allow_hyphen_values = true)]
        n2: String,
        #[arg(allow_hyphen_values = true)]
        a3: String,
        #[arg(allow_hyphen_values = true)]
        n3: String,
    },
    /// Checks a scenario file without lifting.
    Validate { scenario: PathBuf },
}

/// Exit codes: 0 ok, 1 semantic failure, 2 parse, 3 search exhausted.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Exhausted(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Exhausted(_) => 3,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<LiftError> for CliError {
    fn from(e: LiftError) -> Self {
        if e.is_search_exhausted() {
            CliError::Exhausted(e.to_string())
        } else {
            CliError::Failed(e.to_string())
        }
    }
}

impl From<SymbolError> for CliError {
    fn from(e: SymbolError) -> Self {
        match e {
            SymbolError::SearchExhausted(..) => CliError::Exhausted(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<i32, CliError> {
    match cmd {
        Cmd::Symbols { a, b } => cmd_symbols(&a, &b),
        Cmd::Lift {
            scenario,
            out,
            trunc,
            seed,
            batch,
        } => match batch {
            Some(dir) => cmd_batch(&dir, out.as_deref(), trunc, seed),
            None => {
                let path = scenario.expect("clap enforces a scenario");
                let out = out.unwrap_or_else(|| default_out(&path));
                cmd_lift(&path, &out, trunc, seed)
            }
        },
        Cmd::Verify { certificate } => cmd_verify(&certificate),
        Cmd::SolveNorm { n, b } => cmd_solve_norm(&n, &b),
        Cmd::FindSlot { a2, n2, a3, n3 } => cmd_find_slot(&a2, &n2, &a3, &n3),
        Cmd::Validate { scenario } => cmd_validate(&scenario),
    }
}

fn rational(s: &str) -> Result<Q, CliError> {
    s.parse()
        .map_err(|_| CliError::Parse(format!("`{s}` is not a rational number")))
}

fn nonzero(s: &str) -> Result<Q, CliError> {
    let x = rational(s)?;
    if x.is_zero() {
        return Err(CliError::Parse(format!("`{s}` must be nonzero")));
    }
    Ok(x)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

pub fn cmd_symbols(a: &str, b: &str) -> Result<i32, CliError> {
    let (a, b) = (nonzero(a)?, nonzero(b)?);
    let p = SymbolPair::new(&a, &b).map_err(|e| CliError::Parse(e.to_string()))?;
    println!("symbol ({a}, {b}), square classes {p}");
    println!("{:<8} symbol", "place");
    for v in p.relevant_places() {
        println!("{:<8} {:+}", v.to_string(), p.symbol_at(v));
    }
    let ram = p.ramification_set();
    println!("ramified {}", symbols::places_string(&ram));
    println!("{}", if ram.is_empty() { "split" } else { "non-split" });
    Ok(0)
}

pub fn cmd_solve_norm(n: &str, b: &str) -> Result<i32, CliError> {
    let (n, b) = (nonzero(n)?, nonzero(b)?);
    match symbols::solve_norm(&n, &b)? {
        Some((u, v)) => {
            println!("u = {u}");
            println!("v = {v}");
            Ok(0)
        }
        None => {
            println!("no solution: ({n}, {b}) is non-split");
            Ok(1)
        }
    }
}

pub fn cmd_find_slot(a2: &str, n2: &str, a3: &str, n3: &str) -> Result<i32, CliError> {
    let v = [nonzero(a2)?, nonzero(n2)?, nonzero(a3)?, nonzero(n3)?];
    let y = symbols::find_common_slot(&v[0], &v[1], &v[2], &v[3])?;
    println!("y = {y}");
    Ok(0)
}

fn load_scenario(path: &Path) -> Result<LiftScenario, CliError> {
    Ok(format::parse_scenario(&read(path)?)?)
}

pub fn cmd_validate(path: &Path) -> Result<i32, CliError> {
    let sc = load_scenario(path)?;
    let v = lift::validate_scenario(&sc);
    print!("{}", v.report);
    match v.failure {
        None => Ok(0),
        Some(f) => {
            println!("invalid: {f}");
            Ok(1)
        }
    }
}

fn default_out(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    path.with_file_name(format!("{stem}.cert.json"))
}

/// Lifts one scenario and writes its certificate. The certificate is
/// written whenever construction succeeds, even if a check fails.
pub fn lift_to_file(sc: &LiftScenario, out: &Path) -> Result<i32, CliError> {
    let v = lift::validate_scenario(sc);
    if let Some(f) = v.failure {
        print!("{}", v.report);
        return Err(CliError::Failed(format!("invalid scenario: {f}")));
    }
    let w = lift::derive_witnesses(sc)?;
    let mut cert = lift::construct_unverified(sc, &w)?;
    cert.report = lift::verify_certificate(&cert);
    write(out, &format::write_certificate(&cert))?;
    print!("{}", cert.report);
    eprintln!("wrote {}", out.display());
    if cert.report.all_pass() {
        Ok(0)
    } else {
        let names: Vec<String> = cert
            .report
            .failures()
            .iter()
            .map(|c| c.name.clone())
            .collect();
        Err(CliError::Failed(format!(
            "failed checks: {}",
            names.join(", ")
        )))
    }
}

fn with_overrides(
    mut sc: LiftScenario,
    trunc: Option<usize>,
    seed: Option<u64>,
) -> Result<LiftScenario, CliError> {
    if let Some(n) = trunc {
        if n == 0 {
            return Err(CliError::Parse("--trunc must be at least 1".into()));
        }
        sc.trunc = n;
    }
    if let Some(s) = seed {
        sc.rng_seed = s;
    }
    Ok(sc)
}

pub fn cmd_lift(
    path: &Path,
    out: &Path,
    trunc: Option<usize>,
    seed: Option<u64>,
) -> Result<i32, CliError> {
    let sc = with_overrides(load_scenario(path)?, trunc, seed)?;
    lift_to_file(&sc, out)
}

/// Lifts every `*.json` scenario of a directory (certificates excluded);
/// the exit code is the most severe one.
pub fn cmd_batch(
    dir: &Path,
    out: Option<&Path>,
    trunc: Option<usize>,
    seed: Option<u64>,
) -> Result<i32, CliError> {
    let entries =
        fs::read_dir(dir).map_err(|e| CliError::Parse(format!("{}: {e}", dir.display())))?;
    let mut inputs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            name.ends_with(".json") && !name.ends_with(".cert.json")
        })
        .collect();
    inputs.sort();
    let out_dir = out.unwrap_or(dir);
    if out.is_some() {
        fs::create_dir_all(out_dir)
            .map_err(|e| CliError::Failed(format!("{}: {e}", out_dir.display())))?;
    }
    let mut worst = 0;
    for input in inputs {
        println!("== {}", input.display());
        let target = out_dir.join(default_out(&input).file_name().expect("file name"));
        let code = match cmd_lift(&input, &target, trunc, seed) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {}: {e}", input.display());
                e.code()
            }
        };
        worst = worst.max(code);
    }
    Ok(worst)
}

pub fn cmd_verify(path: &Path) -> Result<i32, CliError> {
    let cert = format::parse_certificate(&read(path)?)?;
    let rep = lift::verify_certificate(&cert);
    print!("{rep}");
    if rep.all_pass() {
        println!("certificate verified");
        Ok(0)
    } else {
        let names: Vec<String> = rep.failures().iter().map(|c| c.name.clone()).collect();
        Err(CliError::Failed(format!(
            "failed checks: {}",
            names.join(", ")
        )))
    }
}

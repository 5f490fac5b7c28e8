//! `fvspectra` command-line front end.
//!
//! Exit codes: 0 on success (stable and marginal verdicts included), 2 on an
//! unstable verdict or a blown-up run, 1 on bad arguments or numerical
//! failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fvspectra::analysis::{exactness_report, lambda0_taylor, stability_verdict, SmoothFn, StabilityOptions, Verdict};
use fvspectra::block::BlockSymbol;
use fvspectra::linalg::eigenvalues;
use fvspectra::mesh::{MeshSpec, MeshStructure, PeriodicMesh};
use fvspectra::scheme::Scheme;
use fvspectra::sim::{convergence_study, RunParams};
use fvspectra::{Complex64, Error};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "fvspectra",
    version,
    about = "Stability and accuracy analysis of schemes on periodic non-uniform meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stability verdict from the block symbol.
    Stability(StabilityArgs),
    /// Taylor coefficients of the physical eigenvalue branch.
    Expansion(ExpansionArgs),
    /// Error table on alternating meshes against the exact solution.
    Convergence(ConvergenceArgs),
    /// Polynomial exactness before and after the mapping correction.
    Exactness(ExactnessArgs),
    /// Eigenvalues of the symbol over a frequency grid.
    Symbol(SymbolArgs),
}

#[derive(Args, Debug)]
struct MeshArgs {
    /// Scheme name: fv0, fv2, fv4, ..., r3, r5.
    #[arg(long)]
    scheme: String,
    /// Alternating-mesh parameter, `h = h_av (1 ± ξ)`.
    #[arg(long, conflicts_with = "mesh", allow_hyphen_values = true)]
    xi: Option<f64>,
    /// JSON mesh file `{"steps": [...], "offset": 0}`.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    #[arg(long, default_value_t = 512)]
    phi_grid: usize,
    #[arg(long, default_value_t = 64)]
    nu_grid: usize,
}

#[derive(Args, Debug)]
struct ExpansionArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    /// Highest power of φ, at most 5.
    #[arg(long, default_value_t = 4)]
    order: usize,
}

#[derive(Args, Debug)]
struct ExactnessArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    /// Highest monomial degree tested; defaults to the uniform order plus one.
    #[arg(long)]
    max_degree: Option<usize>,
}

#[derive(Args, Debug)]
struct SymbolArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    /// Number of φ samples on `[0, 2π/m)`.
    #[arg(long, default_value_t = 64)]
    phi_grid: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    #[arg(long)]
    scheme: String,
    /// Step ratios `h_max/h_min`.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    ratios: Vec<f64>,
    /// Mesh sizes, increasing and even.
    #[arg(long = "N", value_delimiter = ',', default_value = "20,40,80,160,320")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// `τ = courant · h_min`.
    #[arg(long, default_value_t = 0.1)]
    courant: f64,
    #[arg(long, default_value_t = 7)]
    rk_order: usize,
    /// Initial data: sin, cos, sinK, cosK.
    #[arg(long, default_value = "sin")]
    initial: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct RunManifest {
    command: String,
    parameters: BTreeMap<String, String>,
    version: String,
    timestamp: String,
}

impl RunManifest {
    fn new(command: &str, parameters: &[(&str, String)]) -> Self {
        Self {
            command: command.into(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    fn csv_header(&self) -> Vec<String> {
        let mut lines = vec![
            format!("command: {}", self.command),
            format!("version: {}", self.version),
            format!("timestamp: {}", self.timestamp),
        ];
        lines.extend(self.parameters.iter().map(|(k, v)| format!("{k}: {v}")));
        lines
    }
}

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    manifest: &'a RunManifest,
    report: &'a T,
}

/// Failure carrying the exit code.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnstableBlowup { .. } => Failure(2, e.to_string()),
            _ => Failure(1, e.to_string()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn emit(out: &Option<PathBuf>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|e| Failure(1, format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, manifest: &RunManifest, report: &T) -> Result<(), Failure> {
    let mut body =
        serde_json::to_string_pretty(&Artifact { manifest, report }).map_err(|e| Failure(1, e.to_string()))?;
    body.push('\n');
    emit(out, &body)
}

fn csv_with_manifest(manifest: &RunManifest, table: &str) -> String {
    let mut body = String::new();
    for line in manifest.csv_header() {
        let _ = writeln!(body, "# {line}");
    }
    body.push_str(table);
    body
}

/// Scheme, structure and manifest parameters shared by the mesh-based commands.
fn resolve(args: &MeshArgs) -> Result<(Scheme, MeshStructure, Vec<(&'static str, String)>), Failure> {
    let scheme = Scheme::by_name(&args.scheme)?;
    let mut params = vec![("scheme", scheme.name())];
    let gamma = match (&args.xi, &args.mesh) {
        (Some(xi), None) => {
            params.push(("xi", format!("{xi:?}")));
            MeshStructure::alternating(*xi)?
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure(1, format!("{}: {e}", path.display())))?;
            let spec: MeshSpec =
                serde_json::from_str(&text).map_err(|e| Failure(1, format!("{}: {e}", path.display())))?;
            let mesh = PeriodicMesh::from_spec(&spec)?;
            if mesh.was_rescaled() {
                eprintln!("warning: mesh steps rescaled to sum to 2π");
            }
            params.push(("mesh", path.display().to_string()));
            mesh.structure()
        }
        _ => return Err(Failure(1, "exactly one of --xi or --mesh is required".into())),
    };
    Ok((scheme, gamma, params))
}

fn cmd_stability(args: &StabilityArgs) -> CmdResult {
    let (scheme, gamma, mut params) = resolve(&args.mesh)?;
    params.push(("phi_grid", args.phi_grid.to_string()));
    params.push(("nu_grid", args.nu_grid.to_string()));
    let opts = StabilityOptions {
        phi_grid: args.phi_grid,
        nu_grid: args.nu_grid,
    };
    let report = stability_verdict(&scheme, &gamma, &opts)?;
    emit_json(&args.mesh.out, &RunManifest::new("stability", &params), &report)?;
    eprintln!("verdict: {:?}", report.verdict);
    Ok(if report.verdict == Verdict::Unstable { 2 } else { 0 })
}

fn cmd_expansion(args: &ExpansionArgs) -> CmdResult {
    if !(1..=5).contains(&args.order) {
        return Err(Failure(1, format!("order {} outside 1..=5", args.order)));
    }
    let (scheme, gamma, mut params) = resolve(&args.mesh)?;
    params.push(("order", args.order.to_string()));
    let fit = lambda0_taylor(&BlockSymbol::new(&scheme, &gamma)?, args.order)?;
    let mut table = String::from("n,re,im,fit_residual\n");
    for (n, c) in fit.coefficients.iter().enumerate() {
        let _ = writeln!(table, "{},{:?},{:?},{:?}", n + 1, c.re, c.im, fit.residual);
    }
    emit(
        &args.mesh.out,
        &csv_with_manifest(&RunManifest::new("expansion", &params), &table),
    )?;
    Ok(0)
}

fn cmd_convergence(args: &ConvergenceArgs) -> CmdResult {
    let scheme = Scheme::by_name(&args.scheme)?;
    let initial = SmoothFn::by_name(&args.initial)
        .ok_or_else(|| Failure(1, format!("unknown initial function {}", args.initial)))?;
    let join = |v: &[String]| v.join(",");
    let params = vec![
        ("scheme", scheme.name()),
        (
            "ratios",
            join(&args.ratios.iter().map(|r| format!("{r:?}")).collect::<Vec<_>>()),
        ),
        ("N", join(&args.n.iter().map(usize::to_string).collect::<Vec<_>>())),
        ("t_end", format!("{:?}", args.t_end)),
        ("courant", format!("{:?}", args.courant)),
        ("rk_order", args.rk_order.to_string()),
        ("initial", args.initial.clone()),
    ];
    let run = RunParams {
        initial,
        t_end: args.t_end,
        courant: args.courant,
        rk_order: args.rk_order,
    };
    let table = convergence_study(&scheme, &args.ratios, &args.n, &run)?;
    let manifest = RunManifest::new("convergence", &params);
    match args.format {
        Format::Csv => emit(&args.out, &table.to_csv(&manifest.csv_header()))?,
        Format::Json => emit_json(&args.out, &manifest, &table)?,
    }
    Ok(0)
}

fn cmd_exactness(args: &ExactnessArgs) -> CmdResult {
    let (scheme, gamma, mut params) = resolve(&args.mesh)?;
    let max_degree = args.max_degree.unwrap_or(scheme.uniform_order() + 1);
    params.push(("max_degree", max_degree.to_string()));
    let report = exactness_report(&scheme, &gamma, max_degree)?;
    emit_json(&args.mesh.out, &RunManifest::new("exactness", &params), &report)?;
    Ok(0)
}

fn cmd_symbol(args: &SymbolArgs) -> CmdResult {
    if args.phi_grid == 0 {
        return Err(Failure(1, "phi grid must be positive".into()));
    }
    let (scheme, gamma, mut params) = resolve(&args.mesh)?;
    params.push(("phi_grid", args.phi_grid.to_string()));
    let bs = BlockSymbol::new(&scheme, &gamma)?;
    let m = bs.period();
    let mut table = String::from("phi");
    for l in 0..m {
        let _ = write!(table, ",re_{l},im_{l}");
    }
    table.push('\n');
    for k in 0..args.phi_grid {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / (m * args.phi_grid) as f64;
        // Nearest to iφ first, so column 0 follows the physical branch.
        let target = Complex64::new(0.0, phi);
        let mut ev = eigenvalues(&bs.symbol(phi))?.eigenvalues;
        ev.sort_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()));
        let _ = write!(table, "{phi:?}");
        for z in ev {
            let _ = write!(table, ",{:?},{:?}", z.re, z.im);
        }
        table.push('\n');
    }
    emit(
        &args.mesh.out,
        &csv_with_manifest(&RunManifest::new("symbol", &params), &table),
    )?;
    Ok(0)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("FVSPECTRA_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure(1, format!("FVSPECTRA_THREADS={value} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure(1, e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Stability(a) => cmd_stability(a),
        Command::Expansion(a) => cmd_expansion(a),
        Command::Convergence(a) => cmd_convergence(a),
        Command::Exactness(a) => cmd_exactness(a),
        Command::Symbol(a) => cmd_symbol(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

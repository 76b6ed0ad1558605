//! Command-line front end.
//!
//! Five subcommands drive the library: `spectrum` (Galerkin solve and mode
//! matching), `series` (the eigenvalue predictor for one mode), `classify`
//! (figure-data grid scans), `measure` (Monte Carlo non-resonance fraction)
//! and `verify` (the acceptance suite). Every output file embeds the
//! effective configuration; reruns with the same config and seed are
//! byte-identical.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 computation error, 4 series request for a resonance mode.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fracspec::galerkin::{assemble, build_basis, match_eigenvalue, solve, DEFAULT_MODE_CAP};
use fracspec::lattice::LatticeVector;
use fracspec::perturbation::f_sequence;
use fracspec::resonance::{
    classify_point, nonresonance_fraction, scan_slice, GridSpec, DEFAULT_CELL_CAP,
};
use fracspec::verify;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "fracspec",
    version,
    about = "Spectra of the fractional Neumann Schrodinger operator on a box"
)]
struct Cli {
    /// Path of the JSON run configuration.
    #[arg(long, global = true, default_value = "fracspec.json")]
    config: String,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured exponent override.
    #[arg(long, global = true, value_name = "REAL")]
    override_alpha: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble and diagonalize the truncated operator; write the spectrum
    /// and the matched eigenpairs of every interior mode.
    Spectrum,
    /// Evaluate the iteration series and the eigenvalue predictor for one
    /// non-resonance mode.
    Series(SeriesArgs),
    /// Scan a 2-D window and emit per-cell resonance data as CSV.
    Classify(ClassifyArgs),
    /// Estimate the non-resonance fraction of the sampling shell.
    Measure,
    /// Run the acceptance suite and report each criterion.
    Verify,
}

#[derive(Args)]
struct SeriesArgs {
    /// Mode index, comma-separated integers, e.g. "2,1".
    #[arg(long)]
    beta: String,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Window origin, e.g. "-4.0,3.0".
    #[arg(long)]
    origin: String,
    /// Cell spacing, e.g. "0.1,0.1".
    #[arg(long)]
    spacing: String,
    /// Cell counts, e.g. "161,41".
    #[arg(long)]
    counts: String,
    /// Witness modes, semicolon-separated indices, e.g. "2,0;0,2".
    #[arg(long)]
    betas: String,
}

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_COMPUTATION: u8 = 3;
const EXIT_RESONANT: u8 = 4;

#[derive(Debug)]
struct CliError {
    kind: String,
    message: String,
    code: u8,
}

impl CliError {
    fn config(msg: impl std::fmt::Display) -> Self {
        CliError {
            kind: "ConfigError".into(),
            message: msg.to_string(),
            code: EXIT_CONFIG,
        }
    }

    fn computation(kind: impl Into<String>, msg: impl std::fmt::Display) -> Self {
        CliError {
            kind: kind.into(),
            message: msg.to_string(),
            code: EXIT_COMPUTATION,
        }
    }

    fn from_core(e: fracspec::Error) -> Self {
        let kind = match &e {
            fracspec::Error::BasisTooLarge { .. } => "BasisTooLarge",
            fracspec::Error::GridTooLarge { .. } => "GridTooLarge",
            fracspec::Error::EmptyTestSet { .. } => "EmptyTestSet",
            fracspec::Error::VanishingDenominator { .. } => "VanishingDenominator",
            fracspec::Error::DepthOutOfRange { .. } => "DepthOutOfRange",
            fracspec::Error::NoEigenvalueInWindow { .. } => "NoEigenvalueInWindow",
            fracspec::Error::NoMatchedEigenpair => "NoMatchedEigenpair",
            fracspec::Error::ConvergenceFailure(_) => "ConvergenceFailure",
            _ => "ComputationError",
        };
        CliError::computation(kind, e)
    }
}

#[derive(Serialize)]
struct ErrorPayload<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: &'a str,
}

fn emit_error(err: &CliError) {
    let payload = ErrorPayload {
        error: ErrorBody {
            kind: &err.kind,
            message: &err.message,
        },
    };
    eprintln!("{}", serde_json::to_string(&payload).unwrap());
}

#[derive(Serialize)]
struct Meta<'a> {
    config: &'a RunConfig,
    override_active: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            emit_error(&e);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let mut cfg = RunConfig::load(&cli.config).map_err(CliError::config)?;
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(alpha) = cli.override_alpha {
        cfg.override_alpha = Some(alpha);
    }
    cfg.validate().map_err(CliError::config)?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::config(format!("cannot create out_dir: {e}")))?;

    match cli.command {
        Command::Spectrum => cmd_spectrum(&cfg),
        Command::Series(args) => cmd_series(&cfg, &args),
        Command::Classify(args) => cmd_classify(&cfg, &args),
        Command::Measure => cmd_measure(&cfg),
        Command::Verify => cmd_verify(&cfg),
    }
}

fn write_out(cfg: &RunConfig, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let path = Path::new(&cfg.out_dir).join(name);
    std::fs::write(&path, bytes).map_err(|e| {
        CliError::computation("IoError", format!("writing {}: {e}", path.display()))
    })?;
    Ok(path)
}

fn write_json<T: Serialize>(cfg: &RunConfig, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::computation("SerializeError", e))?;
    text.push('\n');
    write_out(cfg, name, text.as_bytes())
}

#[derive(Serialize)]
struct SpectrumOutput<'a> {
    meta: Meta<'a>,
    #[serde(rename = "box")]
    box_sides: &'a [f64],
    ell: f64,
    cutoff: f64,
    eigenvalues: Vec<f64>,
    matches: Vec<MatchRecord>,
}

#[derive(Serialize)]
struct MatchRecord {
    beta: Vec<i64>,
    n: usize,
    xi: f64,
    h: f64,
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<u8, CliError> {
    let domain = cfg.domain().map_err(CliError::config)?;
    let params = cfg.params().map_err(CliError::config)?;
    let q = cfg.load_potential().map_err(CliError::config)?;
    let basis = build_basis(&domain, cfg.cutoff, DEFAULT_MODE_CAP).map_err(CliError::from_core)?;
    let matrix = assemble(&basis, &q, cfg.ell).map_err(CliError::from_core)?;
    let solution = solve(&basis, &matrix).map_err(CliError::from_core)?;

    let margin = q.support_radius(&domain);
    let mut matches = Vec::new();
    for mode in basis.modes() {
        if mode.is_zero() || !solution.is_interior(mode, margin) {
            continue;
        }
        if let Ok(m) = match_eigenvalue(&solution, mode, &params) {
            matches.push(MatchRecord {
                beta: mode.index().to_vec(),
                n: m.n,
                xi: m.xi,
                h: m.h,
            });
        }
    }

    let out = SpectrumOutput {
        meta: Meta {
            config: cfg,
            override_active: cfg.override_active(),
        },
        box_sides: &cfg.sides,
        ell: cfg.ell,
        cutoff: cfg.cutoff,
        eigenvalues: solution.eigenvalues.clone(),
        matches,
    };
    write_json(cfg, "spectrum.json", &out)?;

    let mut csv = String::from("n,eigenvalue\n");
    for (n, xi) in solution.eigenvalues.iter().enumerate() {
        csv.push_str(&format!("{},{:.16e}\n", n, xi));
    }
    write_out(cfg, "spectrum.csv", csv.as_bytes())?;
    println!(
        "spectrum: {} modes, eigenvalues in [{:.6}, {:.6}], {} matches",
        solution.len(),
        solution.eigenvalues.first().copied().unwrap_or(f64::NAN),
        solution.eigenvalues.last().copied().unwrap_or(f64::NAN),
        out.matches.len()
    );
    Ok(0)
}

fn parse_index_list(text: &str, d: usize) -> Result<LatticeVector, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != d {
        return Err(CliError::config(format!(
            "mode index needs {d} comma-separated integers, got {text:?}"
        )));
    }
    let mut idx = Vec::with_capacity(d);
    for p in parts {
        idx.push(
            p.trim()
                .parse::<i64>()
                .map_err(|e| CliError::config(format!("bad index component {p:?}: {e}")))?,
        );
    }
    Ok(LatticeVector::new(idx))
}

#[derive(Serialize)]
struct SeriesOutput<'a> {
    meta: Meta<'a>,
    beta: Vec<i64>,
    ell: f64,
    r: f64,
    #[serde(rename = "S")]
    s: Vec<f64>,
    #[serde(rename = "F")]
    f: Vec<f64>,
    predicted: f64,
    predicted_per_k: Vec<f64>,
    min_denominator: f64,
    iteration_ok: bool,
    admissible_range_exceeded: bool,
}

fn cmd_series(cfg: &RunConfig, args: &SeriesArgs) -> Result<u8, CliError> {
    let domain = cfg.domain().map_err(CliError::config)?;
    let params = cfg.params().map_err(CliError::config)?;
    let q = cfg.load_potential().map_err(CliError::config)?;
    let beta = parse_index_list(&args.beta, cfg.sides.len())?;

    // the prediction is only defined on the non-resonance domain
    let x = domain.components(&beta);
    let label = classify_point(&domain, &x, &params).map_err(CliError::from_core)?;
    if label.is_resonance() {
        let witnesses: Vec<Vec<i64>> = label.witnesses.iter().map(|w| w.index().to_vec()).collect();
        return Err(CliError {
            kind: "ResonanceMode".into(),
            message: format!(
                "mode {:?} lies in the resonance set (witnesses {:?})",
                beta.index(),
                witnesses
            ),
            code: EXIT_RESONANT,
        });
    }

    let result = f_sequence(cfg.kmax, &beta, &q, &params, &domain).map_err(CliError::from_core)?;
    let lambda = domain
        .frac_norm(&beta, cfg.ell)
        .map_err(CliError::from_core)?;
    let predicted_per_k: Vec<f64> = (1..=cfg.kmax)
        .map(|k| lambda + result.f_sequence[k as usize - 1])
        .collect();

    let out = SeriesOutput {
        meta: Meta {
            config: cfg,
            override_active: cfg.override_active(),
        },
        beta: beta.index().to_vec(),
        ell: cfg.ell,
        r: cfg.r,
        s: result.s_terms.clone(),
        f: result.f_sequence.clone(),
        predicted: result.predicted,
        predicted_per_k,
        min_denominator: result.min_denominator,
        iteration_ok: result.iteration_ok,
        admissible_range_exceeded: result.admissible_range_exceeded,
    };
    write_json(cfg, "series.json", &out)?;
    println!(
        "series: beta {:?}, predicted {:.12}, F = {:?}",
        beta.index(),
        out.predicted,
        out.f
    );
    Ok(0)
}

fn parse_pair(text: &str, what: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::config(format!(
            "{what} needs two comma-separated values"
        )));
    }
    let a = parts[0]
        .trim()
        .parse::<f64>()
        .map_err(|e| CliError::config(format!("bad {what}: {e}")))?;
    let b = parts[1]
        .trim()
        .parse::<f64>()
        .map_err(|e| CliError::config(format!("bad {what}: {e}")))?;
    Ok([a, b])
}

#[derive(Serialize)]
struct ClassifyMeta<'a> {
    meta: Meta<'a>,
    origin: [f64; 2],
    spacing: [f64; 2],
    counts: [usize; 2],
    betas: Vec<Vec<i64>>,
    threshold: f64,
}

fn cmd_classify(cfg: &RunConfig, args: &ClassifyArgs) -> Result<u8, CliError> {
    let domain = cfg.domain().map_err(CliError::config)?;
    if cfg.sides.len() != 2 {
        return Err(CliError::config("classify requires a 2-D box"));
    }
    let params = cfg.params().map_err(CliError::config)?;
    let origin = parse_pair(&args.origin, "origin")?;
    let spacing = parse_pair(&args.spacing, "spacing")?;
    let counts_f = parse_pair(&args.counts, "counts")?;
    let grid = GridSpec {
        origin,
        spacing,
        counts: [counts_f[0] as usize, counts_f[1] as usize],
    };
    let mut betas = Vec::new();
    for item in args.betas.split(';') {
        betas.push(parse_index_list(item, 2)?);
    }
    let scan = scan_slice(&domain, &params, &grid, &betas, DEFAULT_CELL_CAP)
        .map_err(CliError::from_core)?;
    write_out(cfg, "classify.csv", scan.to_csv().as_bytes())?;
    let meta = ClassifyMeta {
        meta: Meta {
            config: cfg,
            override_active: cfg.override_active(),
        },
        origin: grid.origin,
        spacing: grid.spacing,
        counts: grid.counts,
        betas: betas.iter().map(|b| b.index().to_vec()).collect(),
        threshold: params.threshold,
    };
    write_json(cfg, "classify.meta.json", &meta)?;
    println!(
        "classify: {} cells, threshold {:.6}, {} witness modes",
        grid.counts[0] * grid.counts[1],
        params.threshold,
        betas.len()
    );
    Ok(0)
}

#[derive(Serialize)]
struct MeasureOutput<'a> {
    meta: Meta<'a>,
    r: f64,
    samples: u64,
    seed: u64,
    fraction: f64,
    stderr: f64,
}

fn cmd_measure(cfg: &RunConfig) -> Result<u8, CliError> {
    let domain = cfg.domain().map_err(CliError::config)?;
    let params = cfg.params().map_err(CliError::config)?;
    let (fraction, stderr) = nonresonance_fraction(&domain, &params, cfg.samples, cfg.seed)
        .map_err(CliError::from_core)?;
    let out = MeasureOutput {
        meta: Meta {
            config: cfg,
            override_active: cfg.override_active(),
        },
        r: cfg.r,
        samples: cfg.samples,
        seed: cfg.seed,
        fraction,
        stderr,
    };
    write_json(cfg, "measure.json", &out)?;
    println!("measure: fraction {fraction:.6} +- {stderr:.6}");
    Ok(0)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    meta: Meta<'a>,
    all_passed: bool,
    reports: Vec<ReportRecord>,
}

#[derive(Serialize)]
struct ReportRecord {
    id: u32,
    name: String,
    passed: bool,
    details: String,
    seconds: f64,
}

fn cmd_verify(cfg: &RunConfig) -> Result<u8, CliError> {
    let q = cfg.load_potential().map_err(CliError::config)?;
    let scale = cfg.tolerance_scale.unwrap_or(1.0);
    let base = if cfg.potential.is_some() {
        Some(&q)
    } else {
        None
    };
    let reports = verify::run_all(scale, base);
    for r in &reports {
        println!("{}", r.line());
    }
    let all_passed = reports.iter().all(|r| r.passed);
    let out = VerifyOutput {
        meta: Meta {
            config: cfg,
            override_active: cfg.override_active(),
        },
        all_passed,
        reports: reports
            .into_iter()
            .map(|r| ReportRecord {
                id: r.id,
                name: r.name.to_string(),
                passed: r.passed,
                details: r.details,
                seconds: r.seconds,
            })
            .collect(),
    };
    write_json(cfg, "verify.json", &out)?;
    Ok(if all_passed { 0 } else { EXIT_VERIFY_FAILED })
}

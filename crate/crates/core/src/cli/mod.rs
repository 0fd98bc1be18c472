//! The `abmetric` command line: config parsing, dispatch and reports.

pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::classifier::{
    classify, s_e_equivalence, sample_set, scaled_branch_check, ClassificationReport, EquivalenceCheck,
    ScaledBranchReport, Verdict,
};
use crate::classifier::residuals::upsilon_branch;
use crate::classifier::sampling::unit_alpha_directions;
use crate::curvature::{CurvatureReport, PointCurvature};
use crate::error::{Error, Result};
use crate::fixture::Fixture;
use crate::scalar::{cone_grid, xi_profile, ScalarPack};
use crate::tolerances::TolProfile;
use crate::verify::{verify_fixture, Check};

pub use config::{parse_config, Config, FixtureConfig, ScalarsConfig};
pub use report::{format_float, to_json, SCHEMA_VERSION};

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARSE: u8 = 1;
pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_VERIFICATION: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Scalar tables (Q, Δ, Φ, Ψ, Ω, Θ, Ξ, Υ) on an s-grid
    Scalars,
    /// Closed-form and oracle curvature at each probe point
    Analyze,
    /// Oracle comparisons and identity checks; fails on any violation
    Verify,
    /// Isotropy fits and branch flags
    Classify,
    /// Agreement of S- and E-isotropy verdicts
    Equivalence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Profile {
    #[default]
    Strict,
    Fd,
}

impl From<Profile> for TolProfile {
    fn from(p: Profile) -> Self {
        match p {
            Profile::Strict => TolProfile::Strict,
            Profile::Fd => TolProfile::Fd,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "abmetric", version, about = "Curvature of (alpha, beta)-Finsler metrics")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Fixture configuration (TOML)
    #[arg(long)]
    pub config: PathBuf,
    /// Probe point replacing the configured ones, e.g. "0.1,-0.2"
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Points per s-grid
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_enum, default_value = "strict")]
    pub tol_profile: Profile,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Exit code, report text, and diagnostics for stderr.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: u8,
    pub output: String,
    pub diagnostics: Vec<String>,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Validation { .. } => EXIT_PARSE,
        _ => EXIT_PRECONDITION,
    }
}

fn failure(e: Error) -> Outcome {
    Outcome { code: exit_code(&e), output: String::new(), diagnostics: vec![format!("error: {e}")] }
}

fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::validation("--point", format!("`{t}` is not a finite number")))
        })
        .collect()
}

/// Loads the config and applies the command-line overrides.
pub fn load(cli: &Cli) -> Result<Config> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::validation("--config", format!("{}: {e}", cli.config.display())))?;
    let mut config = parse_config(&text)?;
    let point = cli.point.as_deref().map(parse_point).transpose()?;
    for fc in &mut config.fixtures {
        let f = &mut fc.fixture;
        if let Some(p) = &point {
            if p.len() != f.n {
                return Err(Error::validation("--point", format!("{} has n = {}, point has {} coordinates", f.name, f.n, p.len())));
            }
            f.check_point(p).map_err(|e| match e {
                Error::Validation { message, .. } => Error::validation("--point", message),
                other => Error::validation("--point", other.to_string()),
            })?;
            f.points = vec![p.clone()];
        }
        if let Some(g) = cli.grid {
            if g < 3 {
                return Err(Error::validation("--grid", "need at least 3 points"));
            }
            f.grid = g;
        }
    }
    Ok(config)
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    schema_version: &'static str,
    command: Command,
    tol_profile: &'static str,
    seed: u64,
    status: &'static str,
    fixtures: Vec<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failures: Option<Vec<Check>>,
}

/// Runs one command end to end. Writes nothing; the caller prints or saves
/// `output`.
pub fn execute(cli: &Cli) -> Outcome {
    let config = match load(cli) {
        Ok(c) => c,
        Err(e) => return failure(e),
    };
    if cli.format == Format::Csv && cli.command != Command::Scalars {
        return failure(Error::validation("--format", "csv output is only available for `scalars`"));
    }
    let profile: TolProfile = cli.tol_profile.into();
    let result = match cli.command {
        Command::Scalars => scalars(&config).map(|t| {
            if cli.format == Format::Csv {
                (scalars_csv(&t), true, None)
            } else {
                (envelope(cli, profile, t, true, None), true, None)
            }
        }),
        Command::Analyze => analyze(&config, cli.seed).map(|t| (envelope(cli, profile, t, true, None), true, None)),
        Command::Verify => verify(&config, cli.seed).map(|(t, failed)| {
            let ok = failed.is_empty();
            let lines = failed
                .iter()
                .map(|c| {
                    let dir = c.direction.map_or(String::new(), |d| format!(" direction {d}"));
                    format!(
                        "FAIL {} point {}{dir}: {} residual {} > {}",
                        c.fixture,
                        c.point,
                        c.name,
                        format_float(c.residual),
                        format_float(c.tolerance)
                    )
                })
                .collect::<Vec<_>>();
            (envelope(cli, profile, t, ok, Some(failed)), ok, Some(lines))
        }),
        Command::Classify => classify_all(&config, profile, cli.seed).map(|t| {
            let ok = t.iter().flat_map(|f| &f.points).all(|p| p.classification.equivalence_verdict != Verdict::Violation);
            (envelope(cli, profile, t, ok, None), ok, None)
        }),
        Command::Equivalence => equivalence(&config, profile, cli.seed).map(|t| {
            let ok = t.iter().flat_map(|f| &f.points).all(|p| p.check.verdict != Verdict::Violation);
            (envelope(cli, profile, t, ok, None), ok, None)
        }),
    };
    match result {
        Ok((output, ok, lines)) => Outcome {
            code: if ok { EXIT_OK } else { EXIT_VERIFICATION },
            output,
            diagnostics: lines.unwrap_or_default(),
        },
        Err(e) => failure(e),
    }
}

fn envelope<T: Serialize>(cli: &Cli, profile: TolProfile, fixtures: Vec<T>, ok: bool, failures: Option<Vec<Check>>) -> String {
    to_json(&Envelope {
        schema_version: SCHEMA_VERSION,
        command: cli.command,
        tol_profile: profile.name(),
        seed: cli.seed,
        status: if ok { "ok" } else { "failed" },
        fixtures,
        failures,
    })
}

pub fn parse_args<I, T>(args: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Parses arguments, runs, and writes the report. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = execute(&cli);
    for line in &outcome.diagnostics {
        eprintln!("{line}");
    }
    if !outcome.output.is_empty() {
        match &cli.report {
            Some(path) => {
                if let Err(e) = std::fs::write(path, &outcome.output) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return EXIT_PRECONDITION;
                }
            }
            None => {
                use std::io::Write;
                // a closed pipe (`| head`) is not an error worth reporting
                let _ = std::io::stdout().write_all(outcome.output.as_bytes());
            }
        }
    }
    outcome.code
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarRow {
    pub s: f64,
    pub phi: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    #[serde(rename = "Phi")]
    pub big_phi: f64,
    #[serde(rename = "Psi")]
    pub psi: f64,
    #[serde(rename = "Omega")]
    pub omega: f64,
    #[serde(rename = "Theta")]
    pub theta: f64,
    #[serde(rename = "Xi")]
    pub xi: f64,
    pub branch_term: f64,
    #[serde(rename = "Upsilon")]
    pub upsilon: f64,
}

impl ScalarRow {
    pub fn new(p: &ScalarPack) -> Self {
        Self {
            s: p.s,
            phi: p.phi.value(),
            q: p.q.value(),
            delta: p.delta.value(),
            big_phi: p.big_phi.value(),
            psi: p.psi.value(),
            omega: p.omega.value(),
            theta: p.theta.value(),
            xi: p.xi.value(),
            branch_term: p.branch_term.value(),
            upsilon: p.upsilon.value(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarTable {
    /// Probe point index, absent when `b²` comes from the config.
    pub point: Option<usize>,
    pub b2: f64,
    pub xi_constant: bool,
    pub xi_variation: f64,
    pub upsilon_zero: bool,
    pub advisory: Option<String>,
    pub rows: Vec<ScalarRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarsFixture {
    pub fixture: String,
    pub n: usize,
    pub phi: String,
    pub tables: Vec<ScalarTable>,
}

pub fn scalar_table(fc: &FixtureConfig, point: Option<usize>, b2: f64) -> Result<ScalarTable> {
    let f = &fc.fixture;
    let tol = f.tolerances.constancy;
    let grid = match &fc.scalars.s {
        Some(s) => s.clone(),
        None if b2 > 0.0 => cone_grid(b2, f.grid),
        None => vec![0.0],
    };
    let rows = grid.iter().map(|&s| ScalarPack::new(&f.phi, s, b2, f.n).map(|p| ScalarRow::new(&p))).collect::<Result<Vec<_>>>()?;
    let xi = xi_profile(&f.phi, b2, f.n, &grid)?;
    let up = upsilon_branch(&f.phi, b2, f.n, &grid, tol)?;
    Ok(ScalarTable {
        point,
        b2,
        xi_constant: xi.constant,
        xi_variation: xi.variation,
        upsilon_zero: up.upsilon_zero,
        advisory: up.advisory,
        rows,
    })
}

pub fn scalars(config: &Config) -> Result<Vec<ScalarsFixture>> {
    config
        .fixtures
        .iter()
        .map(|fc| {
            let f = &fc.fixture;
            let tables = match fc.scalars.b2 {
                Some(b2) => vec![scalar_table(fc, None, b2)?],
                None => f
                    .points
                    .iter()
                    .enumerate()
                    .map(|(i, x)| scalar_table(fc, Some(i), f.geometry(x)?.b2))
                    .collect::<Result<_>>()?,
            };
            Ok(ScalarsFixture { fixture: f.name.clone(), n: f.n, phi: f.phi.label(), tables })
        })
        .collect()
}

pub fn scalars_csv(fixtures: &[ScalarsFixture]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "fixture", "point", "b2", "s", "phi", "Q", "Delta", "Phi", "Psi", "Omega", "Theta", "Xi", "branch_term", "Upsilon",
    ])
    .expect("in-memory write");
    for f in fixtures {
        for t in &f.tables {
            for r in &t.rows {
                let mut rec = vec![f.fixture.clone(), t.point.map_or(String::new(), |p| p.to_string())];
                rec.extend(
                    [t.b2, r.s, r.phi, r.q, r.delta, r.big_phi, r.psi, r.omega, r.theta, r.xi, r.branch_term, r.upsilon]
                        .map(format_float),
                );
                w.write_record(&rec).expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("flushed")).expect("utf-8")
}

#[derive(Debug, Clone, Serialize)]
pub struct Deltas {
    pub spray: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeEntry {
    pub point: usize,
    pub direction: usize,
    pub curvature: CurvatureReport,
    /// Closed form minus oracle, each relative to `1 + ‖oracle‖`.
    pub deltas: Deltas,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeFixture {
    pub fixture: String,
    pub entries: Vec<AnalyzeEntry>,
}

fn delta_vec(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let n: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / (1.0 + n)
}

pub fn analyze(config: &Config, seed: u64) -> Result<Vec<AnalyzeFixture>> {
    config
        .fixtures
        .iter()
        .map(|fc| {
            let f = &fc.fixture;
            let mut entries = Vec::new();
            for (ip, x) in f.points.iter().enumerate() {
                let pc = PointCurvature::new(f, x)?;
                for (iy, y) in unit_alpha_directions(&pc.geometry, f.directions, seed)?.iter().enumerate() {
                    let r = pc.report(y, true)?;
                    let spray_o = r.spray_oracle.as_deref().unwrap_or_default();
                    let s_o = r.s_oracle.unwrap_or(f64::NAN);
                    let e_c: Vec<f64> = r.e_closed.concat();
                    let e_o: Vec<f64> = r.e_oracle.as_ref().map(|m| m.concat()).unwrap_or_default();
                    let e_max = e_c.iter().zip(&e_o).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                    let e_norm = e_o.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let deltas = Deltas {
                        spray: delta_vec(&r.spray_closed, spray_o),
                        s: (r.s_closed - s_o).abs() / (1.0 + s_o.abs()),
                        e: e_max / (1.0 + e_norm),
                    };
                    entries.push(AnalyzeEntry { point: ip, direction: iy, curvature: r, deltas });
                }
            }
            Ok(AnalyzeFixture { fixture: f.name.clone(), entries })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyFixture {
    pub fixture: String,
    pub checks: Vec<Check>,
}

/// All checks, and the failing ones.
pub fn verify(config: &Config, seed: u64) -> Result<(Vec<VerifyFixture>, Vec<Check>)> {
    let mut failed = Vec::new();
    let mut out = Vec::new();
    for fc in &config.fixtures {
        let checks = verify_fixture(&fc.fixture, seed)?;
        failed.extend(checks.iter().filter(|c| !c.pass).cloned());
        out.push(VerifyFixture { fixture: fc.fixture.name.clone(), checks });
    }
    Ok((out, failed))
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyPoint {
    pub point: usize,
    pub classification: ClassificationReport,
    pub scaled_branch: Option<ScaledBranchReport>,
    /// Why `scaled_branch` is absent.
    pub scaled_branch_note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyFixture {
    pub fixture: String,
    pub points: Vec<ClassifyPoint>,
}

pub fn classify_all(config: &Config, profile: TolProfile, seed: u64) -> Result<Vec<ClassifyFixture>> {
    config
        .fixtures
        .iter()
        .map(|fc| {
            let f = &fc.fixture;
            let points = f
                .points
                .iter()
                .enumerate()
                .map(|(ip, x)| {
                    let classification = classify(f, x, profile, seed)?;
                    let (scaled_branch, scaled_branch_note) = match scaled_branch_check(f, x, profile, seed) {
                        Ok(r) => (Some(r), None),
                        Err(e @ (Error::PreconditionNotMet(_) | Error::RankDeficient)) => (None, Some(e.to_string())),
                        Err(e) => return Err(e),
                    };
                    Ok(ClassifyPoint { point: ip, classification, scaled_branch, scaled_branch_note })
                })
                .collect::<Result<_>>()?;
            Ok(ClassifyFixture { fixture: f.name.clone(), points })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalencePoint {
    pub point: usize,
    pub check: EquivalenceCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceFixture {
    pub fixture: String,
    pub points: Vec<EquivalencePoint>,
}

pub fn equivalence(config: &Config, profile: TolProfile, seed: u64) -> Result<Vec<EquivalenceFixture>> {
    config
        .fixtures
        .iter()
        .map(|fc| {
            let f = &fc.fixture;
            let points = f
                .points
                .iter()
                .enumerate()
                .map(|(ip, x)| {
                    let pc = PointCurvature::new(f, x)?;
                    let set = sample_set(&pc, profile, seed)?;
                    Ok(EquivalencePoint { point: ip, check: s_e_equivalence(f, &set)? })
                })
                .collect::<Result<_>>()?;
            Ok(EquivalenceFixture { fixture: f.name.clone(), points })
        })
        .collect()
}

/// A config containing every built-in fixture, for tests and smoke runs.
pub fn catalog_config() -> Config {
    Config {
        fixtures: Fixture::catalog()
            .into_iter()
            .map(|fixture| FixtureConfig { fixture, scalars: ScalarsConfig::default() })
            .collect(),
    }
}

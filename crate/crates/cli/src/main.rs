#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use fbms_core::discretize::{assemble_tri, mesh_geodesic_disk, RadialProblem};
use fbms_core::functionals::{
    bound_checks, degeneration_experiment, BoundCheck, BoundConfig, Degeneration, DegenerationConfig, BOUND_REL_TOL,
    HALVING_BAND, NORMALIZATION_TOL, RESONANCE_TOL,
};
use fbms_core::index_forms::{
    catenoid_index_report, extremality_certificate, radial_spectrum, CertifiedSurface, NULL_TOL, SPECTRAL_TIE_TOL,
};
use fbms_core::robin_solver::{steklov_alpha_spectrum, SpectralResult};
use fbms_core::suites::{self, OdeTarget};
use fbms_core::surfaces::{find_critical_catenoid, BallChart};
use fbms_core::{Error, ErrorClass, Kind};

mod defaults;

const VERSION: &str = concat!("fbms ", env!("CARGO_PKG_VERSION"));

#[derive(Parser)]
#[command(
    name = "fbms",
    version,
    about = "Steklov/Robin spectra and indices of free boundary minimal surfaces in space-form balls"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// σ table of a geodesic k-ball in 𝔹ⁿ(r).
    BallSpectrum(BallArgs),
    /// Critical catenoids in 𝔹³(r).
    #[command(subcommand)]
    Catenoid(CatenoidCmd),
    /// Conformal-degeneration ladders and bound checks.
    #[command(subcommand)]
    Sweep(SweepCmd),
    /// Certificates and self-checks.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Space {
    Spherical,
    Hyperbolic,
}

impl From<Space> for Kind {
    fn from(s: Space) -> Kind {
        match s {
            Space::Spherical => Kind::Spherical,
            Space::Hyperbolic => Kind::Hyperbolic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Serialize)]
struct BallArgs {
    #[arg(long, value_enum, default_value = "spherical")]
    space: Space,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = defaults::BALL_ELEMENTS)]
    elements: usize,
    #[arg(long, default_value_t = defaults::MMAX)]
    mmax: usize,
    #[arg(long, default_value_t = defaults::PER_MODE)]
    per_mode: usize,
    /// Separated radial modes, or P1 triangles in stereographic coordinates (k = 2 only).
    #[arg(long, value_enum, default_value = "radial")]
    route: Route,
    /// Triangle refinement for the mesh route.
    #[arg(long, default_value_t = defaults::TRI_LEVEL)]
    level: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Route {
    Radial,
    Mesh,
}

#[derive(Subcommand)]
enum CatenoidCmd {
    /// Critical catenoid meeting ∂𝔹³(r) orthogonally.
    Find(CatenoidFindArgs),
    /// Merged σ table at frequency ∓2.
    Spectrum(CatenoidSpectrumArgs),
    /// Morse, spectral and energy indices.
    Index(CatenoidIndexArgs),
}

#[derive(Args, Serialize)]
struct CatenoidFindArgs {
    #[arg(long, value_enum)]
    space: Space,
    #[arg(long)]
    r: f64,
}

#[derive(Args, Serialize)]
struct CatenoidSpectrumArgs {
    #[arg(long, value_enum)]
    space: Space,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = defaults::CATENOID_ELEMENTS)]
    elements: usize,
    #[arg(long, default_value_t = defaults::MMAX)]
    mmax: usize,
    #[arg(long, default_value_t = defaults::PER_MODE)]
    per_mode: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Serialize)]
struct CatenoidIndexArgs {
    #[arg(long, value_enum)]
    space: Space,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = defaults::MMAX)]
    mmax: usize,
    #[arg(long, default_value_t = defaults::INDEX_ELEMENTS)]
    elements: usize,
}

#[derive(Subcommand)]
enum SweepCmd {
    /// Θ with interior factor λ^D_k/2 and collar width ε; the ladder holds ε.
    ThetaBelow(SweepArgs),
    /// Ω with interior factor 1/(2ε²) and a fixed collar δ.
    OmegaAbove(SweepArgs),
    /// Interior factor ε with collar ε; compares against the Steklov spectrum.
    SteklovLimit(SweepArgs),
    /// Thin annuli; the ladder holds widths δ.
    OmegaFloor(SweepArgs),
    /// Upper and lower bounds on caps, disks and random annulus metrics.
    Bounds(BoundArgs),
}

#[derive(Args, Serialize)]
struct SweepArgs {
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, alias = "deltas", value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Collar width (omega-above).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    hmax: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum BoundSurface {
    Cap,
    Disk,
    Annulus,
    Random,
    All,
}

impl BoundSurface {
    fn keeps(self, check: &BoundCheck) -> bool {
        let prefix = match self {
            BoundSurface::All => return true,
            BoundSurface::Cap => "cap",
            BoundSurface::Disk => "disk",
            BoundSurface::Annulus => "annulus",
            BoundSurface::Random => "random",
        };
        check.name.starts_with(prefix)
    }
}

#[derive(Args, Serialize)]
struct BoundArgs {
    #[arg(long, value_enum, default_value = "all")]
    surface: BoundSurface,
    /// Radius for the Θ bounds.
    #[arg(long)]
    r: Option<f64>,
    /// Radius for the random Ω metrics.
    #[arg(long)]
    r_omega: Option<f64>,
    #[arg(long, default_value_t = defaults::BOUND_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = defaults::SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Coordinate functions as Robin eigenfunctions realizing the extremal identities.
    Extremality(ExtremalityArgs),
    /// First-solution residuals, pole rates, μ and ₂F₁ identities.
    Ode(OdeArgs),
    /// Robin property suite, ODE suite, or both.
    Invariants(InvariantArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CertSurface {
    Ball,
    Catenoid,
}

#[derive(Args, Serialize)]
struct ExtremalityArgs {
    #[arg(long, value_enum)]
    surface: CertSurface,
    #[arg(long, value_enum)]
    space: Space,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = defaults::CERT_LEVEL)]
    level: usize,
    #[arg(long, default_value_t = defaults::CERT_TOL)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OdeKindArg {
    BallSpherical,
    BallHyperbolic,
    CatenoidSpherical,
    CatenoidHyperbolic,
}

#[derive(Args, Serialize)]
struct OdeArgs {
    /// Omit to run the full suite.
    #[arg(long, value_enum)]
    kind: Option<OdeKindArg>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Suite {
    Robin,
    Ode,
    All,
}

#[derive(Args, Serialize)]
struct InvariantArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = defaults::ROBIN_LEVEL)]
    level: usize,
    #[arg(long, default_value_t = defaults::SEED)]
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

type Run = Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

#[derive(Serialize)]
struct Tolerances {
    null_tol: f64,
    spectral_tie_tol: f64,
    bound_rel_tol: f64,
    normalization_tol: f64,
    resonance_tol: f64,
    halving_band: (f64, f64),
    ode_residual_tol: f64,
    mu_spectrum_tol: f64,
    identity_tol: f64,
    orthogonality_tol: f64,
}

const TOLERANCES: Tolerances = Tolerances {
    null_tol: NULL_TOL,
    spectral_tie_tol: SPECTRAL_TIE_TOL,
    bound_rel_tol: BOUND_REL_TOL,
    normalization_tol: NORMALIZATION_TOL,
    resonance_tol: RESONANCE_TOL,
    halving_band: HALVING_BAND,
    ode_residual_tol: suites::RESIDUAL_TOL,
    mu_spectrum_tol: suites::MU_SPECTRUM_TOL,
    identity_tol: suites::IDENTITY_TOL,
    orthogonality_tol: suites::ORTHOGONALITY_TOL,
};

fn emit_json<C: Serialize, R: Serialize>(command: &str, config: &C, result: &R) -> Run {
    let doc = json!({
        "program": VERSION,
        "command": command,
        "config": config,
        "tolerances": TOLERANCES,
        "result": result,
    });
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Failure::Core(Error::Io(e.into())))?;
    writeln!(out)?;
    Ok(())
}

/// `#`-prefixed provenance lines ahead of a CSV table.
fn csv_header<C: Serialize>(out: &mut impl Write, command: &str, config: &C) -> io::Result<()> {
    let cfg = serde_json::to_string(config).map_err(io::Error::from)?;
    let tol = serde_json::to_string(&TOLERANCES).map_err(io::Error::from)?;
    writeln!(out, "# program: {VERSION}")?;
    writeln!(out, "# command: {command}")?;
    writeln!(out, "# config: {cfg}")?;
    writeln!(out, "# tolerances: {tol}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct SpectrumRow {
    index: usize,
    sigma: f64,
    mode: Option<usize>,
}

#[derive(Serialize)]
struct SpectrumOut {
    /// Closed forms for σ₀ and σ₁ at this radius.
    reference: [f64; 2],
    rows: Vec<SpectrumRow>,
    residual: f64,
    warnings: Vec<String>,
}

fn spectrum_out(kind: Kind, r: f64, spec: SpectralResult) -> SpectrumOut {
    let tags = spec.mode_tags.clone().unwrap_or_default();
    let rows = spec
        .sigmas
        .iter()
        .enumerate()
        .map(|(i, &sigma)| SpectrumRow { index: i, sigma, mode: tags.get(i).copied() })
        .collect();
    let coef = kind.boundary_coefficient(r);
    SpectrumOut { reference: [-kind.curvature() / coef, coef], rows, residual: spec.residual, warnings: spec.warnings }
}

fn write_spectrum<C: Serialize>(command: &str, config: &C, format: Format, out: SpectrumOut) -> Run {
    if format == Format::Json {
        return emit_json(command, config, &out);
    }
    let mut w = io::stdout().lock();
    csv_header(&mut w, command, config)?;
    writeln!(w, "# reference: sigma0={} sigma1={}", out.reference[0], out.reference[1])?;
    writeln!(w, "index,sigma,mode")?;
    for row in &out.rows {
        let mode = row.mode.map(|m| m.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{mode}", row.index, row.sigma)?;
    }
    Ok(())
}

fn check_resolution(elements: usize, mmax: usize, per_mode: usize) -> Run {
    if elements < fbms_core::discretize::MIN_RADIAL_NODES {
        return Err(invalid(format!("elements = {elements} is below {}", fbms_core::discretize::MIN_RADIAL_NODES)));
    }
    if mmax == 0 || per_mode == 0 {
        return Err(invalid("mmax and per-mode must be positive"));
    }
    Ok(())
}

fn run_ball_spectrum(a: &BallArgs) -> Run {
    if a.k < 2 || a.n <= a.k {
        return Err(invalid(format!("need 2 <= k < n, got k = {}, n = {}", a.k, a.n)));
    }
    check_resolution(a.elements, a.mmax, a.per_mode)?;
    let kind = Kind::from(a.space);
    let chart = BallChart::new(kind, a.k, a.n, a.r)?;
    let spec = match a.route {
        Route::Radial => {
            let p = RadialProblem::ball(&chart, a.elements);
            radial_spectrum(&p, kind.frequency(a.k), a.mmax, a.per_mode)?
        }
        Route::Mesh => {
            if a.k != 2 {
                return Err(invalid("the mesh route handles k = 2 only"));
            }
            let forms = assemble_tri(&mesh_geodesic_disk(kind, a.r, a.level)?)?;
            steklov_alpha_spectrum(&forms, kind.frequency(2), 2 * a.mmax + 1)?
        }
    }
    .without_vectors();
    write_spectrum("ball-spectrum", a, a.format, spectrum_out(kind, a.r, spec))
}

fn run_catenoid(cmd: &CatenoidCmd) -> Run {
    match cmd {
        CatenoidCmd::Find(a) => {
            let sol = find_critical_catenoid(a.space.into(), a.r)?;
            emit_json("catenoid find", a, &sol)
        }
        CatenoidCmd::Spectrum(a) => {
            check_resolution(a.elements, a.mmax, a.per_mode)?;
            let kind = Kind::from(a.space);
            let sol = find_critical_catenoid(kind, a.r)?;
            let p = RadialProblem::catenoid(&sol, a.elements);
            let spec = radial_spectrum(&p, kind.frequency(2), a.mmax, a.per_mode)?.without_vectors();
            write_spectrum("catenoid spectrum", a, a.format, spectrum_out(kind, a.r, spec))
        }
        CatenoidCmd::Index(a) => {
            check_resolution(a.elements, a.mmax, 1)?;
            let sol = find_critical_catenoid(a.space.into(), a.r)?;
            let report = catenoid_index_report(&sol, a.mmax, a.elements)?;
            emit_json("catenoid index", a, &report)
        }
    }
}

fn run_degeneration(name: &str, kind: Degeneration, a: &SweepArgs) -> Run {
    let mut cfg = DegenerationConfig::new(kind);
    if let Some(r) = a.r {
        cfg.r = r;
    }
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if let Some(l) = &a.epsilons {
        cfg.ladder = l.clone();
    }
    if let Some(d) = a.delta {
        cfg.delta = d;
    }
    if let Some(h) = a.hmax {
        cfg.hmax = h;
    }
    if cfg.ladder.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(invalid("ladder values must be finite and nonnegative"));
    }
    if !(cfg.hmax > 0.0) {
        return Err(invalid("hmax must be positive"));
    }
    let table = degeneration_experiment(&cfg)?;
    let command = format!("sweep {name}");
    if a.format == Format::Json {
        return emit_json(&command, &cfg, &table);
    }
    let mut w = io::stdout().lock();
    csv_header(&mut w, &command, &cfg)?;
    writeln!(w, "# functional: {:?}", table.functional)?;
    writeln!(w, "# trend: {} ({})", table.trend.holds, table.trend.detail)?;
    table.write_csv(&mut w)?;
    Ok(())
}

fn run_bounds(a: &BoundArgs) -> Run {
    let mut cfg = BoundConfig { samples: a.samples, seed: a.seed, ..BoundConfig::default() };
    if let Some(r) = a.r {
        cfg.r_theta = r;
    }
    if let Some(r) = a.r_omega {
        cfg.r_omega = r;
    }
    let mut report = bound_checks(&cfg)?;
    report.checks.retain(|c| a.surface.keeps(c));
    let config = json!({ "surface": a.surface, "bounds": cfg });
    if a.format == Format::Json {
        return emit_json("sweep bounds", &config, &report);
    }
    let mut w = io::stdout().lock();
    csv_header(&mut w, "sweep bounds", &config)?;
    writeln!(w, "name,lhs,rhs,slack,holds")?;
    for c in &report.checks {
        writeln!(w, "{},{:e},{:e},{:e},{}", csv_field(&c.name), c.lhs, c.rhs, c.slack, c.holds)?;
    }
    Ok(())
}

fn run_sweep(cmd: &SweepCmd) -> Run {
    match cmd {
        SweepCmd::ThetaBelow(a) => run_degeneration("theta-below", Degeneration::ThetaBelow, a),
        SweepCmd::OmegaAbove(a) => run_degeneration("omega-above", Degeneration::OmegaAbove, a),
        SweepCmd::SteklovLimit(a) => run_degeneration("steklov-limit", Degeneration::SteklovLimit, a),
        SweepCmd::OmegaFloor(a) => run_degeneration("omega-floor", Degeneration::OmegaFloor, a),
        SweepCmd::Bounds(a) => run_bounds(a),
    }
}

fn run_verify(cmd: &VerifyCmd) -> Run {
    match cmd {
        VerifyCmd::Extremality(a) => {
            if !(a.tol > 0.0) {
                return Err(invalid("tol must be positive"));
            }
            let kind = Kind::from(a.space);
            let surface = match a.surface {
                CertSurface::Ball => CertifiedSurface::Ball { kind, r: a.r },
                CertSurface::Catenoid => CertifiedSurface::Catenoid(find_critical_catenoid(kind, a.r)?),
            };
            let report = extremality_certificate(surface, a.level, a.tol)?;
            emit_json("verify extremality", a, &report)
        }
        VerifyCmd::Ode(a) => {
            let Some(kind) = a.kind else {
                return emit_json("verify ode", a, &suites::ode_suite()?);
            };
            let target = match kind {
                OdeKindArg::BallSpherical | OdeKindArg::BallHyperbolic => {
                    if a.k < 2 {
                        return Err(invalid(format!("ball dimension k = {} < 2", a.k)));
                    }
                    let space =
                        if matches!(kind, OdeKindArg::BallSpherical) { Kind::Spherical } else { Kind::Hyperbolic };
                    OdeTarget::Ball { space, k: a.k, r: a.r.unwrap_or(defaults::BALL_R) }
                }
                OdeKindArg::CatenoidSpherical => {
                    OdeTarget::Catenoid { space: Kind::Spherical, r: a.r.unwrap_or(defaults::CATENOID_R_SPHERICAL) }
                }
                OdeKindArg::CatenoidHyperbolic => {
                    OdeTarget::Catenoid { space: Kind::Hyperbolic, r: a.r.unwrap_or(defaults::CATENOID_R_HYPERBOLIC) }
                }
            };
            emit_json("verify ode", &target, &suites::ode_report(target)?)
        }
        VerifyCmd::Invariants(a) => {
            let robin = match a.suite {
                Suite::Robin | Suite::All => Some(suites::robin_suite(a.level, a.seed)?),
                Suite::Ode => None,
            };
            let ode = match a.suite {
                Suite::Ode | Suite::All => Some(suites::ode_suite()?),
                Suite::Robin => None,
            };
            let pass = robin.as_ref().is_none_or(|s| s.pass) && ode.as_ref().is_none_or(|s| s.pass);
            emit_json("verify invariants", a, &json!({ "pass": pass, "robin": robin, "ode": ode }))
        }
    }
}

fn report_failure(f: &Failure) -> u8 {
    let (code, class, message, extra) = match f {
        Failure::Usage(m) => (2, "validation", m.clone(), None),
        Failure::Core(e) => {
            let (code, class) = match e.class() {
                ErrorClass::Validation => (2, "validation"),
                ErrorClass::NoSolution => (3, "no-solution"),
                ErrorClass::Internal => (1, "internal"),
            };
            let extra = match e {
                Error::NoSolution { lo, hi, .. } => Some(json!([lo, hi])),
                _ => None,
            };
            (code, class, e.to_string(), extra)
        }
    };
    let mut doc = json!({ "error": message, "class": class, "exit_code": code });
    if let Some(range) = extra {
        doc["attainable_range"] = range;
    }
    eprintln!("{doc}");
    code
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // help and version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return ExitCode::from(report_failure(&Failure::Usage(e.to_string().trim_end().to_string()))),
    };
    let result = match &cli.command {
        Command::BallSpectrum(a) => run_ball_spectrum(a),
        Command::Catenoid(c) => run_catenoid(c),
        Command::Sweep(c) => run_sweep(c),
        Command::Verify(c) => run_verify(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => ExitCode::from(report_failure(&f)),
    }
}

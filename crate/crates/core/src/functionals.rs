//! Eigenvalue functionals Θ and Ω, conformal collar degenerations, bound
//! checks and first variations along metric paths.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discretize::{
    assemble_radial, assemble_tri, graded_nodes, AssembledForms, End, Latitude, Profile, RadialProblem, Topology,
    TriMesh,
};
use crate::error::{Error, Result};
use crate::index_forms::radial_spectrum;
use crate::quadrature::gauss3;
use crate::robin_solver::{dirichlet_spectrum, mesh_edges, steklov_alpha_spectrum, SpectralResult};
use crate::spaceform::Kind;
use crate::surfaces::{BallChart, CatenoidFamily, CatenoidSolution};

/// Relative slack allowed on the near-equality bounds.
pub const BOUND_REL_TOL: f64 = 1e-5;
/// Unit boundary norm required of eigenfunctions fed to the first variation.
pub const NORMALIZATION_TOL: f64 = 1e-8;
/// Relative distance to a Dirichlet eigenvalue treated as a hit.
pub const RESONANCE_TOL: f64 = 1e-9;
/// Accepted band for error ratios under halving of a parameter.
pub const HALVING_BAND: (f64, f64) = (1.5, 2.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalKind {
    Theta,
    Omega,
}

impl FunctionalKind {
    /// Frequency at which the spectra enter.
    pub fn alpha(self) -> f64 {
        match self {
            FunctionalKind::Theta => 2.0,
            FunctionalKind::Omega => -2.0,
        }
    }

    /// Coefficients of σ₀ and σ_k.
    pub fn weights(self, r: f64) -> (f64, f64) {
        match self {
            FunctionalKind::Theta => (r.cos().powi(2), r.sin().powi(2)),
            FunctionalKind::Omega => (-r.cosh().powi(2), r.sinh().powi(2)),
        }
    }

    pub fn check_radius(self, r: f64) -> Result<()> {
        let ok = match self {
            FunctionalKind::Theta => r > 0.0 && r < PI / 2.0,
            FunctionalKind::Omega => r > 0.0 && r.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("radius {r} outside the range of the {self:?} functional")))
        }
    }

    pub fn space(self) -> Kind {
        match self {
            FunctionalKind::Theta => Kind::Spherical,
            FunctionalKind::Omega => Kind::Hyperbolic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalParts {
    pub sigma0: f64,
    pub sigmak: f64,
    pub boundary_length: f64,
    pub area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub kind: FunctionalKind,
    pub r: f64,
    pub k: usize,
    pub value: f64,
    pub parts: FunctionalParts,
}

fn evaluate(kind: FunctionalKind, r: f64, p: &FunctionalParts) -> f64 {
    let (w0, wk) = kind.weights(r);
    (w0 * p.sigma0 + wk * p.sigmak) * p.boundary_length + 2.0 * p.area
}

impl FunctionalValue {
    pub fn new(kind: FunctionalKind, r: f64, k: usize, parts: FunctionalParts) -> Result<Self> {
        kind.check_radius(r)?;
        if k == 0 {
            return Err(Error::Invalid("functional index k must be at least 1".into()));
        }
        Ok(FunctionalValue { kind, r, k, value: evaluate(kind, r, &parts), parts })
    }

    /// The defining formula applied to the stored parts.
    pub fn reconstruct(&self) -> f64 {
        evaluate(self.kind, self.r, &self.parts)
    }

    /// Coefficient of |∂Σ| in the value.
    pub fn boundary_coefficient(&self) -> f64 {
        let (w0, wk) = self.kind.weights(self.r);
        w0 * self.parts.sigma0 + wk * self.parts.sigmak
    }
}

/// Functional of a discrete geometry from a spectrum at the matching frequency.
pub fn functional(
    kind: FunctionalKind,
    forms: &AssembledForms,
    spec: &SpectralResult,
    r: f64,
    k: usize,
) -> Result<FunctionalValue> {
    if spec.alpha != kind.alpha() {
        return Err(Error::Precondition(format!(
            "{kind:?} needs the spectrum at frequency {}, got {}",
            kind.alpha(),
            spec.alpha
        )));
    }
    if spec.sigmas.len() <= k {
        return Err(Error::SpectrumTooShort(format!("need σ_{k}, have {} eigenvalues", spec.sigmas.len())));
    }
    let parts = FunctionalParts {
        sigma0: spec.sigmas[0],
        sigmak: spec.sigmas[k],
        boundary_length: forms.boundary_length,
        area: forms.area,
    };
    FunctionalValue::new(kind, r, k, parts)
}

pub fn theta(forms: &AssembledForms, spec: &SpectralResult, r: f64, k: usize) -> Result<FunctionalValue> {
    functional(FunctionalKind::Theta, forms, spec, r, k)
}

pub fn omega(forms: &AssembledForms, spec: &SpectralResult, r: f64, k: usize) -> Result<FunctionalValue> {
    functional(FunctionalKind::Omega, forms, spec, r, k)
}

/// Functional of a rotationally symmetric geometry through its Fourier modes.
pub fn radial_functional(kind: FunctionalKind, p: &RadialProblem, r: f64, k: usize) -> Result<FunctionalValue> {
    let spec = radial_spectrum(p, kind.alpha(), k + 2, k + 2)?.without_vectors();
    functional(kind, &assemble_radial(p, 0)?, &spec, r, k)
}

/// Functional on a triangle mesh.
pub fn mesh_functional(kind: FunctionalKind, mesh: &TriMesh, r: f64, k: usize) -> Result<FunctionalValue> {
    let forms = assemble_tri(mesh)?;
    let spec = steklov_alpha_spectrum(&forms, kind.alpha(), k + 1)?.without_vectors();
    functional(kind, &forms, &spec, r, k)
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Collar factor at distance d from the boundary: 1 up to ε/2, C beyond ε.
pub fn collar_factor(c: f64, eps: f64, d: f64) -> f64 {
    if d <= 0.5 * eps {
        1.0
    } else if d >= eps {
        c
    } else {
        1.0 + (c - 1.0) * smoothstep((d - 0.5 * eps) / (0.5 * eps))
    }
}

fn check_collar(c: f64, eps: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Invalid(format!("collar constant must be positive, got {c}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Invalid(format!("collar width must be positive, got {eps}")));
    }
    Ok(())
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let s = if len2 > 0.0 { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    ((p[0] - a[0] - s * d[0]).powi(2) + (p[1] - a[1] - s * d[1]).powi(2)).sqrt()
}

/// Conformal collar deformation of a mesh. Distances to the boundary are
/// measured in the parameter plane; the factor multiplies any existing one.
pub fn collar_family(mesh: &TriMesh, c: f64, eps: f64) -> Result<TriMesh> {
    check_collar(c, eps)?;
    let h = mesh.max_edge();
    if eps < 2.0 * h {
        let levels = (2.0 * h / eps).log2().ceil() as usize;
        return Err(Error::Precondition(format!(
            "collar width {eps} is below two mesh layers (max edge {h:.4}); refine by at least {levels} level(s)"
        )));
    }
    let mut out = mesh.clone();
    let base = mesh.conformal.clone().unwrap_or_else(|| vec![1.0; mesh.vertices.len()]);
    let factors = mesh
        .vertices
        .iter()
        .zip(base)
        .map(|(&p, b)| {
            let d = mesh
                .boundary_edges
                .iter()
                .map(|e| segment_distance(p, mesh.vertices[e[0]], mesh.vertices[e[1]]))
                .fold(f64::INFINITY, f64::min);
            b * collar_factor(c, eps, d)
        })
        .collect();
    out.conformal = Some(factors);
    Ok(out)
}

fn boundary_ends(p: &RadialProblem) -> Vec<f64> {
    let mut e = vec![];
    if p.left == End::Boundary {
        e.push(p.nodes[0]);
    }
    if p.right == End::Boundary {
        e.push(*p.nodes.last().unwrap());
    }
    e
}

/// Collar deformation of a radial problem. The parameter must be arclength
/// in the normal direction to the boundary.
pub fn radial_collar(p: &RadialProblem, c: f64, eps: f64) -> Result<RadialProblem> {
    check_collar(c, eps)?;
    let ends = boundary_ends(p);
    if ends.is_empty() {
        return Err(Error::Precondition("problem has no boundary end".into()));
    }
    let dist = {
        let ends = ends.clone();
        move |t: f64| ends.iter().map(|e| (t - e).abs()).fold(f64::INFINITY, f64::min)
    };
    // the transition band needs at least two elements
    for w in p.nodes.windows(2) {
        let (d0, d1) = (dist(w[0]), dist(w[1]));
        let (lo, hi) = (d0.min(d1), d0.max(d1));
        if hi > 0.5 * eps && lo < eps && w[1] - w[0] > 0.25 * eps {
            return Err(Error::Precondition(format!(
                "collar width {eps} not resolved: element [{}, {}] in the transition band; use element size ≤ {}",
                w[0],
                w[1],
                0.25 * eps
            )));
        }
    }
    let base = p.conformal.clone();
    let f: Profile = Arc::new(move |t| base.as_ref().map_or(1.0, |b| b(t)) * collar_factor(c, eps, dist(t)));
    Ok(p.clone().with_conformal(f))
}

/// Parameter-space breakpoints of collars of widths `eps` next to the given ends.
fn collar_breaks(ends: &[f64], lo: f64, hi: f64, eps: &[f64]) -> Vec<f64> {
    let mut b = vec![lo, hi];
    for &e in eps.iter().filter(|&&e| e > 0.0) {
        for &x in ends {
            for d in [0.5 * e, e] {
                for y in [x - d, x + d] {
                    if y > lo && y < hi {
                        b.push(y);
                    }
                }
            }
        }
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Domain {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl Domain {
    pub fn topology(self) -> Topology {
        match self {
            Domain::Disk { .. } => Topology::DISK,
            Domain::Annulus { .. } => Topology::ANNULUS,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Domain::Disk { radius } if radius > 0.0 => Ok(()),
            Domain::Annulus { inner, outer } if inner > 0.0 && outer > inner => Ok(()),
            _ => Err(Error::Invalid(format!("bad domain {self:?}"))),
        }
    }

    fn span(self) -> (f64, f64, Vec<f64>) {
        match self {
            Domain::Disk { radius } => (0.0, radius, vec![radius]),
            Domain::Annulus { inner, outer } => (inner, outer, vec![inner, outer]),
        }
    }

    /// Flat polar problem on a grid containing every collar breakpoint.
    pub fn radial(self, eps: &[f64], hmax: f64) -> Result<RadialProblem> {
        self.validate()?;
        let (lo, hi, ends) = self.span();
        let nodes = graded_nodes(&collar_breaks(&ends, lo, hi, eps), hmax, 4);
        Ok(match self {
            Domain::Disk { .. } => {
                let mut p = RadialProblem::flat_disk(hi, 16);
                p.nodes = nodes;
                p
            }
            Domain::Annulus { .. } => RadialProblem::flat_annulus(nodes),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degeneration {
    /// C = λ^D_k/2 with collar ε; Θ diverges downward.
    ThetaBelow,
    /// C = 1/(2ε²) with collar δ; Ω grows without bound.
    OmegaAbove,
    /// C = ε with collar ε; spectra approach the Steklov spectrum.
    SteklovLimit,
    /// Thin annuli [1 − δ, 1] with the Steklov-limit collar at ε = δ/8; Ω tends to 0.
    OmegaFloor,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegenerationConfig {
    pub kind: Degeneration,
    pub r: f64,
    pub k: usize,
    pub domain: Domain,
    /// ε values, or δ values for `OmegaFloor`.
    pub ladder: Vec<f64>,
    /// Collar width for `OmegaAbove`.
    pub delta: f64,
    pub hmax: f64,
}

impl DegenerationConfig {
    pub fn new(kind: Degeneration) -> Self {
        let annulus = Domain::Annulus { inner: 0.5, outer: 1.0 };
        let (r, domain, ladder) = match kind {
            Degeneration::ThetaBelow => (0.7, annulus, vec![0.16, 0.08, 0.04, 0.02, 0.01, 0.0]),
            Degeneration::OmegaAbove => (1.0, annulus, vec![1.0, 0.5, 0.25, 0.125, 0.0625]),
            Degeneration::SteklovLimit => (0.7, Domain::Disk { radius: 1.0 }, vec![0.2, 0.1, 0.05, 0.025]),
            Degeneration::OmegaFloor => (1.0, annulus, vec![0.4, 0.2, 0.1, 0.05]),
        };
        DegenerationConfig { kind, r, k: 1, domain, ladder, delta: 0.02, hmax: 1.25e-3 }
    }

    pub fn functional(&self) -> FunctionalKind {
        match self.kind {
            Degeneration::ThetaBelow | Degeneration::SteklovLimit => FunctionalKind::Theta,
            Degeneration::OmegaAbove | Degeneration::OmegaFloor => FunctionalKind::Omega,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DegenerationRow {
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub sigma0: Option<f64>,
    pub sigmak: Option<f64>,
    pub value: Option<f64>,
    pub area: Option<f64>,
    pub boundary_length: Option<f64>,
    pub flag: String,
}

impl DegenerationRow {
    fn from_value(epsilon: f64, delta: Option<f64>, v: &FunctionalValue, flag: &str) -> Self {
        DegenerationRow {
            epsilon,
            delta,
            sigma0: Some(v.parts.sigma0),
            sigmak: Some(v.parts.sigmak),
            value: Some(v.value),
            area: Some(v.parts.area),
            boundary_length: Some(v.parts.boundary_length),
            flag: flag.into(),
        }
    }

    fn failed(epsilon: f64, delta: Option<f64>, flag: String) -> Self {
        DegenerationRow {
            epsilon,
            delta,
            sigma0: None,
            sigmak: None,
            value: None,
            area: None,
            boundary_length: None,
            flag,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trend {
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegenerationTable {
    pub config: DegenerationConfig,
    pub functional: FunctionalKind,
    /// Collar constant when it does not depend on the row.
    pub constant: Option<f64>,
    /// Steklov eigenvalues σ^S_0, σ^S_k of the base geometry on the same grid.
    pub steklov_reference: Option<[f64; 2]>,
    pub rows: Vec<DegenerationRow>,
    pub trend: Trend,
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.12e}"))
}

impl DegenerationTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epsilon,delta,sigma0,sigmak,value,flag")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.6e},{},{},{},{},{}",
                r.epsilon,
                opt(r.delta),
                opt(r.sigma0),
                opt(r.sigmak),
                opt(r.value),
                r.flag
            )?;
        }
        Ok(())
    }

    fn finite_values(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.value).collect()
    }
}

fn lowest_dirichlet(p: &RadialProblem, k: usize) -> Result<f64> {
    let mut all = vec![];
    for m in 0..=k + 2 {
        let f = assemble_radial(p, m)?;
        for v in dirichlet_spectrum(&f, k + 1)? {
            for _ in 0..p.mode_multiplicity(m) {
                all.push(v);
            }
        }
    }
    all.sort_by(f64::total_cmp);
    Ok(all[k - 1])
}

/// Spectrum of the limit problem: the frequency scaled by C on the base geometry.
fn substituted_row(cfg: &DegenerationConfig, p: &RadialProblem, c: f64, eps: f64) -> Result<DegenerationRow> {
    let kind = cfg.functional();
    let alpha = kind.alpha() * c;
    if alpha > 0.0 {
        // an exact hit can survive the factorization on roundoff
        for j in 1..=cfg.k + 1 {
            let lam = lowest_dirichlet(p, j)?;
            if (alpha - lam).abs() <= RESONANCE_TOL * lam {
                return Ok(DegenerationRow::failed(
                    eps,
                    None,
                    format!("frequency-hits-dirichlet(alpha={alpha:.6e};lambda={lam:.6e})"),
                ));
            }
        }
    }
    match radial_spectrum(p, alpha, cfg.k + 2, cfg.k + 2) {
        Ok(spec) => {
            let f0 = assemble_radial(p, 0)?;
            let parts = FunctionalParts {
                sigma0: spec.sigmas[0],
                sigmak: spec.sigmas[cfg.k],
                boundary_length: f0.boundary_length,
                area: c * f0.area,
            };
            let v = FunctionalValue::new(kind, cfg.r, cfg.k, parts)?;
            Ok(DegenerationRow::from_value(eps, None, &v, "limit"))
        }
        Err(Error::FrequencyHitsDirichlet { alpha, dirichlet }) => Ok(DegenerationRow::failed(
            eps,
            None,
            format!("frequency-hits-dirichlet(alpha={alpha:.6e};lambda={dirichlet:.6e})"),
        )),
        Err(e) => Err(e),
    }
}

fn collar_row(
    cfg: &DegenerationConfig,
    p: &RadialProblem,
    c: f64,
    width: f64,
    eps: f64,
    delta: Option<f64>,
) -> Result<DegenerationRow> {
    let q = radial_collar(p, c, width)?;
    match radial_functional(cfg.functional(), &q, cfg.r, cfg.k) {
        Ok(v) => Ok(DegenerationRow::from_value(eps, delta, &v, "ok")),
        Err(Error::FrequencyHitsDirichlet { alpha, dirichlet }) => Ok(DegenerationRow::failed(
            eps,
            delta,
            format!("frequency-hits-dirichlet(alpha={alpha:.6e};lambda={dirichlet:.6e})"),
        )),
        Err(e) => Err(e),
    }
}

fn join(v: &[f64], f: impl Fn(f64) -> String) -> String {
    v.iter().map(|&x| f(x)).collect::<Vec<_>>().join(" ")
}

fn strictly(vals: &[f64], increasing: bool) -> bool {
    vals.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

/// Runs one conformal degeneration ladder on the radial route.
pub fn degeneration_experiment(cfg: &DegenerationConfig) -> Result<DegenerationTable> {
    let kind = cfg.functional();
    kind.check_radius(cfg.r)?;
    if cfg.k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    if cfg.ladder.is_empty() {
        return Err(Error::Invalid("empty ladder".into()));
    }
    if cfg.ladder.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
        return Err(Error::Invalid("ladder values must be finite and nonnegative".into()));
    }
    let mut constant = None;
    let mut reference = None;
    let mut rows = vec![];
    match cfg.kind {
        Degeneration::ThetaBelow => {
            let p = cfg.domain.radial(&cfg.ladder, cfg.hmax)?;
            let c = 0.5 * lowest_dirichlet(&p, cfg.k)?;
            constant = Some(c);
            for &eps in &cfg.ladder {
                rows.push(if eps == 0.0 {
                    substituted_row(cfg, &p, c, eps)?
                } else {
                    collar_row(cfg, &p, c, eps, eps, None)?
                });
            }
        }
        Degeneration::OmegaAbove => {
            if cfg.ladder.contains(&0.0) {
                return Err(Error::Invalid("OmegaAbove needs ε > 0".into()));
            }
            let p = cfg.domain.radial(&[cfg.delta], cfg.hmax)?;
            for &eps in &cfg.ladder {
                rows.push(collar_row(cfg, &p, 0.5 / (eps * eps), cfg.delta, eps, Some(cfg.delta))?);
            }
        }
        Degeneration::SteklovLimit => {
            let p = cfg.domain.radial(&cfg.ladder, cfg.hmax)?;
            let s = radial_spectrum(&p, 0.0, cfg.k + 2, cfg.k + 2)?;
            reference = Some([s.sigmas[0], s.sigmas[cfg.k]]);
            for &eps in &cfg.ladder {
                rows.push(if eps == 0.0 {
                    substituted_row(cfg, &p, 0.0, eps)?
                } else {
                    collar_row(cfg, &p, eps, eps, eps, None)?
                });
            }
        }
        Degeneration::OmegaFloor => {
            let outer = match cfg.domain {
                Domain::Annulus { outer, .. } => outer,
                Domain::Disk { .. } => return Err(Error::Invalid("OmegaFloor runs on annuli".into())),
            };
            for &delta in &cfg.ladder {
                if !(delta > 0.0 && delta < outer) {
                    return Err(Error::Invalid(format!("thin-annulus width {delta} outside (0, {outer})")));
                }
                let eps = delta / 8.0;
                let dom = Domain::Annulus { inner: outer - delta, outer };
                let p = dom.radial(&[eps], cfg.hmax.min(eps / 8.0))?;
                rows.push(collar_row(cfg, &p, eps, eps, eps, Some(delta))?);
            }
        }
    }
    let mut table = DegenerationTable {
        config: cfg.clone(),
        functional: kind,
        constant,
        steklov_reference: reference,
        rows,
        trend: Trend { holds: false, detail: String::new() },
    };
    table.trend = trend(&table);
    Ok(table)
}

fn trend(t: &DegenerationTable) -> Trend {
    let v = t.finite_values();
    match t.config.kind {
        Degeneration::ThetaBelow => {
            if v.len() < 5 {
                return Trend { holds: false, detail: format!("only {} finite rows", v.len()) };
            }
            let spread = (v[1] - v[0]).abs();
            let drop = v[0] - v[v.len() - 1];
            let dec = strictly(&v, false);
            Trend {
                holds: dec && drop >= 10.0 * spread,
                detail: format!(
                    "strictly decreasing: {dec}; final drop {drop:.6e} vs 10 x initial spread {:.6e}",
                    10.0 * spread
                ),
            }
        }
        Degeneration::OmegaAbove => {
            let inc = strictly(&v, true);
            Trend { holds: inc && v.len() >= 2, detail: format!("strictly increasing: {inc} over {} rows", v.len()) }
        }
        Degeneration::SteklovLimit => {
            let Some([_, sk]) = t.steklov_reference else {
                return Trend { holds: false, detail: "no reference".into() };
            };
            let errs: Vec<f64> =
                t.rows.iter().filter(|r| r.epsilon > 0.0).filter_map(|r| r.sigmak).map(|s| (s - sk).abs()).collect();
            let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
            let ok = ratios.len() >= 3 && ratios.iter().all(|&q| q >= HALVING_BAND.0 && q <= HALVING_BAND.1);
            Trend {
                holds: ok,
                detail: format!(
                    "|σ_k − σ^S_k| = {}; ratios {}",
                    join(&errs, |x| format!("{x:.3e}")),
                    join(&ratios, |x| format!("{x:.3}"))
                ),
            }
        }
        Degeneration::OmegaFloor => {
            let nonneg = v.iter().all(|&x| x >= 0.0);
            let dec = strictly(&v, false);
            let shrink = v.len() >= 2 && v[v.len() - 1] <= 0.25 * v[0];
            Trend {
                holds: nonneg && dec && shrink,
                detail: format!(
                    "nonnegative: {nonneg}; strictly decreasing: {dec}; last/first = {:.4}",
                    v[v.len() - 1] / v[0]
                ),
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs
    pub slack: f64,
    pub holds: bool,
}

impl BoundCheck {
    fn le(name: &str, lhs: f64, rhs: f64) -> Self {
        BoundCheck {
            name: name.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            holds: lhs <= rhs + BOUND_REL_TOL * rhs.abs().max(1.0),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundConfig {
    pub r_theta: f64,
    pub r_omega: f64,
    pub samples: usize,
    pub seed: u64,
    /// Refinement of the random-metric annulus mesh.
    pub mesh_level: usize,
    pub radial_elements: usize,
    pub kmax: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig { r_theta: 0.7, r_omega: 1.0, samples: 100, seed: 7, mesh_level: 1, radial_elements: 2000, kmax: 3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub config: BoundConfig,
    pub checks: Vec<BoundCheck>,
    pub omega_samples: usize,
    pub omega_violations: usize,
    pub omega_min: f64,
    /// Largest Θ_{r,k} seen over the random metrics, k = 1..=kmax.
    pub theta_envelope: Vec<f64>,
    /// Largest (σ_k(g,2)|∂Σ| + 2|Σ|)/k over the random metrics.
    pub constant_envelope: Vec<f64>,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.omega_violations == 0 && self.checks.iter().all(|c| c.holds)
    }
}

/// Random log-conformal factors: uniform in [−1, 1] per vertex, then two
/// passes of neighbour averaging.
pub fn random_log_factor(mesh: &TriMesh, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = mesh.vertices.len();
    let mut nb: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for (a, b) in mesh_edges(mesh) {
        nb[a].push(b);
        nb[b].push(a);
    }
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    for _ in 0..2 {
        x = nb.iter().map(|l| l.iter().map(|&j| x[j]).sum::<f64>() / l.len() as f64).collect();
    }
    x
}

pub fn bound_checks(cfg: &BoundConfig) -> Result<BoundReport> {
    FunctionalKind::Theta.check_radius(cfg.r_theta)?;
    FunctionalKind::Omega.check_radius(cfg.r_omega)?;
    let r = cfg.r_theta;
    let mut checks = vec![];

    let cap = RadialProblem::ball(&BallChart::new(Kind::Spherical, 2, 3, r)?, cfg.radial_elements);
    let th = radial_functional(FunctionalKind::Theta, &cap, r, 1)?;
    checks.push(BoundCheck::le(
        "cap: Theta_{r,1} <= 4 pi (1 - cos r)(genus + l)",
        th.value,
        4.0 * PI * (1.0 - r.cos()) * Topology::DISK.weight(),
    ));

    let disk = RadialProblem::flat_disk(1.0, cfg.radial_elements);
    let sd = radial_spectrum(&disk, 0.0, 3, 3)?;
    let ld = assemble_radial(&disk, 0)?.boundary_length;
    checks.push(BoundCheck::le(
        "disk: sigma^S_1 |dD| <= 2 pi (genus + l)",
        sd.sigmas[1] * ld,
        2.0 * PI * Topology::DISK.weight(),
    ));

    let ann = RadialProblem::flat_annulus(graded_nodes(&[0.5, 1.0], 0.5 / cfg.radial_elements as f64, 1));
    let sa = radial_spectrum(&ann, 0.0, 3, 3)?;
    let la = assemble_radial(&ann, 0)?.boundary_length;
    checks.push(BoundCheck::le(
        "annulus: sigma^S_1 sin^2 r |dS| <= 4 pi (1 - cos r)(genus + l)",
        sa.sigmas[1] * r.sin().powi(2) * la,
        4.0 * PI * (1.0 - r.cos()) * Topology::ANNULUS.weight(),
    ));

    let mesh = crate::discretize::mesh_annulus(0.5, 1.0, cfg.mesh_level)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut violations = 0;
    let mut omin = f64::INFINITY;
    let mut theta_env = vec![f64::NEG_INFINITY; cfg.kmax];
    let mut const_env = vec![f64::NEG_INFINITY; cfg.kmax];
    let mut chain_ok = true;
    for _ in 0..cfg.samples {
        let psi = random_log_factor(&mesh, &mut rng);
        let mut m = mesh.clone();
        m.conformal = Some(psi.iter().map(|x| x.exp()).collect());
        let forms = assemble_tri(&m)?;
        let so = steklov_alpha_spectrum(&forms, -2.0, cfg.kmax + 1)?.without_vectors();
        let st = steklov_alpha_spectrum(&forms, 2.0, cfg.kmax + 1)?.without_vectors();
        for k in 1..=cfg.kmax {
            let o = omega(&forms, &so, cfg.r_omega, k)?;
            if !(o.value >= 0.0) {
                violations += 1;
            }
            omin = omin.min(o.value);
            // Ω > −σ₀|∂Σ| + 2|Σ| ≥ 0
            let floor = -o.parts.sigma0 * o.parts.boundary_length + 2.0 * o.parts.area;
            chain_ok &= o.value >= floor && floor >= -1e-12 * o.parts.area;
            let t = theta(&forms, &st, r, k)?;
            theta_env[k - 1] = theta_env[k - 1].max(t.value);
            const_env[k - 1] =
                const_env[k - 1].max((t.parts.sigmak * t.parts.boundary_length + 2.0 * t.parts.area) / k as f64);
        }
    }
    checks.push(BoundCheck {
        name: "random annulus metrics: Omega >= -sigma_0 |dS| + 2|S| >= 0".into(),
        lhs: 0.0,
        rhs: omin,
        slack: omin,
        holds: chain_ok,
    });
    Ok(BoundReport {
        config: cfg.clone(),
        checks,
        omega_samples: cfg.samples * cfg.kmax,
        omega_violations: violations,
        omega_min: omin,
        theta_envelope: theta_env,
        constant_envelope: const_env,
    })
}

/// Ratios |σ_j(t+δ) − σ_j(t)| / |σ_j(t+δ/2) − σ_j(t)| for j < count along the
/// vertex-factor path c(t) = exp(t ψ).
pub fn conformal_path_ratios(
    mesh: &TriMesh,
    psi: &[f64],
    alpha: f64,
    t: f64,
    delta: f64,
    count: usize,
) -> Result<Vec<f64>> {
    if psi.len() != mesh.vertices.len() {
        return Err(Error::Dimension { expected: mesh.vertices.len(), got: psi.len() });
    }
    let at = |s: f64| -> Result<Vec<f64>> {
        let mut m = mesh.clone();
        let base = mesh.conformal.clone().unwrap_or_else(|| vec![1.0; psi.len()]);
        m.conformal = Some(base.iter().zip(psi).map(|(b, p)| b * (s * p).exp()).collect());
        Ok(steklov_alpha_spectrum(&assemble_tri(&m)?, alpha, count)?.sigmas)
    };
    let (s0, s1, s2) = (at(t)?, at(t + delta)?, at(t + 0.5 * delta)?);
    Ok((0..count).map(|j| (s1[j] - s0[j]).abs() / (s2[j] - s0[j]).abs()).collect())
}

/// Rotationally symmetric metric A(s) ds² + B(s) dθ².
#[derive(Clone)]
pub struct RotationalMetric {
    pub nodes: Vec<f64>,
    pub a: Profile,
    pub b: Profile,
    pub left: End,
    pub right: End,
}

impl std::fmt::Debug for RotationalMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RotationalMetric")
            .field("nodes", &self.nodes.len())
            .field("left", &self.left)
            .field("right", &self.right)
            .finish()
    }
}

/// Diagonal rotationally symmetric perturbation h = h_ss ds² + h_θθ dθ².
#[derive(Clone)]
pub struct RotationalPerturbation {
    pub h_ss: Profile,
    pub h_tt: Profile,
}

impl RotationalPerturbation {
    pub fn zero() -> Self {
        RotationalPerturbation { h_ss: Arc::new(|_| 0.0), h_tt: Arc::new(|_| 0.0) }
    }

    /// h = w g
    pub fn conformal(metric: &RotationalMetric, w: Profile) -> Self {
        let (a, b, w2) = (metric.a.clone(), metric.b.clone(), w.clone());
        RotationalPerturbation { h_ss: Arc::new(move |s| w(s) * a(s)), h_tt: Arc::new(move |s| w2(s) * b(s)) }
    }

    /// x·self + y·other
    pub fn combine(&self, x: f64, other: &Self, y: f64) -> Self {
        let (p, q, u, v) = (self.h_ss.clone(), other.h_ss.clone(), self.h_tt.clone(), other.h_tt.clone());
        RotationalPerturbation {
            h_ss: Arc::new(move |s| x * p(s) + y * q(s)),
            h_tt: Arc::new(move |s| x * u(s) + y * v(s)),
        }
    }
}

impl RotationalMetric {
    pub fn disk(radius: f64, elements: usize) -> Self {
        RotationalMetric {
            nodes: crate::discretize::uniform_nodes(0.0, radius, elements),
            a: Arc::new(|_| 1.0),
            b: Arc::new(|t| t * t),
            left: End::Pole,
            right: End::Boundary,
        }
    }

    pub fn annulus(inner: f64, outer: f64, elements: usize) -> Self {
        RotationalMetric {
            nodes: crate::discretize::uniform_nodes(inner, outer, elements),
            a: Arc::new(|_| 1.0),
            b: Arc::new(|t| t * t),
            left: End::Boundary,
            right: End::Boundary,
        }
    }

    /// Induced metric ds² + f(s)² dθ² of a critical catenoid.
    pub fn catenoid(sol: &CatenoidSolution, elements: usize) -> Self {
        let fam = CatenoidFamily { kind: sol.kind, a: sol.a };
        RotationalMetric {
            nodes: crate::discretize::uniform_nodes(-sol.s0, sol.s0, elements),
            a: Arc::new(|_| 1.0),
            b: Arc::new(move |s| fam.angular2(s).v),
            left: End::Boundary,
            right: End::Boundary,
        }
    }

    /// g + t h
    pub fn perturbed(&self, h: &RotationalPerturbation, t: f64) -> Self {
        let (a, b, p, q) = (self.a.clone(), self.b.clone(), h.h_ss.clone(), h.h_tt.clone());
        RotationalMetric {
            nodes: self.nodes.clone(),
            a: Arc::new(move |s| a(s) + t * p(s)),
            b: Arc::new(move |s| b(s) + t * q(s)),
            left: self.left,
            right: self.right,
        }
    }

    /// Separated problem: weight and latitude √(B/A), conformal factor A.
    pub fn problem(&self) -> RadialProblem {
        let (a, b) = (self.a.clone(), self.b.clone());
        let rho: Profile = Arc::new(move |s| (b(s) / a(s)).sqrt());
        RadialProblem {
            nodes: self.nodes.clone(),
            weight: rho.clone(),
            latitude: Some(Latitude { radius: rho, sphere_dim: 1 }),
            conformal: Some(self.a.clone()),
            left: self.left,
            right: self.right,
            orbit_measure: 2.0 * PI,
        }
    }

    fn boundary_nodes(&self) -> Vec<usize> {
        let mut v = vec![];
        if self.left == End::Boundary {
            v.push(0);
        }
        if self.right == End::Boundary {
            v.push(self.nodes.len() - 1);
        }
        v
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_nodes().iter().map(|&i| 2.0 * PI * (self.b)(self.nodes[i]).sqrt()).sum()
    }
}

/// u(s, θ) = a(s)·Y(θ) with Y of degree `mode` and mean square 1 on the circle.
#[derive(Debug, Clone, Serialize)]
pub struct ModeFunction {
    pub mode: usize,
    pub values: Vec<f64>,
}

/// Eigen-data entering the first variation of a functional.
#[derive(Debug, Clone, Serialize)]
pub struct VariationData {
    pub kind: FunctionalKind,
    pub r: f64,
    pub sigma0: f64,
    pub sigmak: f64,
    pub u0: ModeFunction,
    pub uk: ModeFunction,
}

/// σ₀ and σ_k eigenfunctions of a rotational metric, unit boundary norm.
/// Within a multiple eigenvalue the lowest Fourier mode is taken.
pub fn variation_data(kind: FunctionalKind, metric: &RotationalMetric, r: f64, k: usize) -> Result<VariationData> {
    kind.check_radius(r)?;
    let p = metric.problem();
    let mut entries: Vec<(f64, usize, Vec<f64>)> = vec![];
    for m in 0..=k + 2 {
        let f = assemble_radial(&p, m)?;
        let s = steklov_alpha_spectrum(&f, kind.alpha(), k + 2)?;
        for (j, sig) in s.sigmas.iter().enumerate() {
            let nodal = f.expand(&s.vectors()[j]);
            for _ in 0..p.mode_multiplicity(m) {
                entries.push((*sig, m, nodal.clone()));
            }
        }
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if entries.len() <= k {
        return Err(Error::SpectrumTooShort(format!("need σ_{k}")));
    }
    let (s0, m0, v0) = entries[0].clone();
    let (sk, mk, vk) = entries[k].clone();
    Ok(VariationData {
        kind,
        r,
        sigma0: s0,
        sigmak: sk,
        u0: ModeFunction { mode: m0, values: v0 },
        uk: ModeFunction { mode: mk, values: vk },
    })
}

/// σ_j eigenfunction of a given Fourier mode (j counts within the mode).
pub fn mode_eigenfunction(
    kind: FunctionalKind,
    metric: &RotationalMetric,
    mode: usize,
    j: usize,
) -> Result<(f64, ModeFunction)> {
    let f = assemble_radial(&metric.problem(), mode)?;
    let s = steklov_alpha_spectrum(&f, kind.alpha(), j + 1)?;
    Ok((s.sigmas[j], ModeFunction { mode, values: f.expand(&s.vectors()[j]) }))
}

fn check_data(metric: &RotationalMetric, d: &VariationData) -> Result<()> {
    d.kind.check_radius(d.r)?;
    let n = metric.nodes.len();
    for u in [&d.u0, &d.uk] {
        if u.values.len() != n {
            return Err(Error::Dimension { expected: n, got: u.values.len() });
        }
        let norm: f64 = metric
            .boundary_nodes()
            .iter()
            .map(|&i| 2.0 * PI * (metric.b)(metric.nodes[i]).sqrt() * u.values[i].powi(2))
            .sum();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(format!("boundary norm² {norm} for mode {}", u.mode)));
        }
    }
    if d.u0.mode != 0 || d.u0.values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NotNormalized("the σ₀ eigenfunction must be the positive rotation-invariant one".into()));
    }
    Ok(())
}

/// Bulk density paired with h at one point: coefficient-weighted τ terms plus g.
/// `grad2` is |∇u|², `dd` is ⟨du⊗du, h⟩, `u2` is u².
fn tau_density(w: f64, l: f64, alpha: f64, grad2: f64, u2: f64, dd: f64, trh: f64) -> f64 {
    w * l * (0.5 * (grad2 - alpha * u2) * trh - dd)
}

/// Boundary density F multiplying h(T,T).
fn boundary_f(d: &VariationData, l: f64, a0: f64, ak: f64) -> f64 {
    let (w0, wk) = d.kind.weights(d.r);
    0.5 * (w0 * d.sigma0 + wk * d.sigmak) - 0.5 * l * (w0 * d.sigma0 * a0 * a0 + wk * d.sigmak * ak * ak)
}

/// First variation of the functional along g + t h, at t = 0.
pub fn perturbation_derivative(
    metric: &RotationalMetric,
    d: &VariationData,
    h: &RotationalPerturbation,
) -> Result<f64> {
    check_data(metric, d)?;
    let (w0, wk) = d.kind.weights(d.r);
    let alpha = d.kind.alpha();
    let l = metric.boundary_length();
    let (gx, gw) = gauss3();
    let mut bulk = 0.0;
    for e in 0..metric.nodes.len() - 1 {
        let (t0, t1) = (metric.nodes[e], metric.nodes[e + 1]);
        let len = t1 - t0;
        for q in 0..3 {
            let s = 0.5 * (t0 + t1) + 0.5 * len * gx[q];
            let jw = 0.5 * len * gw[q] * 2.0 * PI;
            let (a, b, hs, ht) = ((metric.a)(s), (metric.b)(s), (h.h_ss)(s), (h.h_tt)(s));
            let sq = (a * b).sqrt();
            let trh = hs / a + ht / b;
            let mut dens = trh;
            for (w, u) in [(w0, &d.u0), (wk, &d.uk)] {
                let phi = [(t1 - s) / len, (s - t0) / len];
                let val = phi[0] * u.values[e] + phi[1] * u.values[e + 1];
                let der = (u.values[e + 1] - u.values[e]) / len;
                let m2 = (u.mode * u.mode) as f64;
                let grad2 = der * der / a + m2 * val * val / b;
                let dd = der * der * hs / (a * a) + m2 * val * val * ht / (b * b);
                dens += tau_density(w, l, alpha, grad2, val * val, dd, trh);
            }
            bulk += dens * sq * jw;
        }
    }
    let mut bnd = 0.0;
    for i in metric.boundary_nodes() {
        let s = metric.nodes[i];
        let b = (metric.b)(s);
        let htt = (h.h_tt)(s) / b;
        bnd += boundary_f(d, l, d.u0.values[i], d.uk.values[i]) * htt * 2.0 * PI * b.sqrt();
    }
    Ok(bulk + bnd)
}

/// First variation along the conformal path (1 + t w) g.
pub fn conformal_derivative(metric: &RotationalMetric, d: &VariationData, w: &Profile) -> Result<f64> {
    check_data(metric, d)?;
    let (w0, wk) = d.kind.weights(d.r);
    let alpha = d.kind.alpha();
    let l = metric.boundary_length();
    let (gx, gw) = gauss3();
    let mut bulk = 0.0;
    for e in 0..metric.nodes.len() - 1 {
        let (t0, t1) = (metric.nodes[e], metric.nodes[e + 1]);
        let len = t1 - t0;
        for q in 0..3 {
            let s = 0.5 * (t0 + t1) + 0.5 * len * gx[q];
            let jw = 0.5 * len * gw[q] * 2.0 * PI;
            let phi = [(t1 - s) / len, (s - t0) / len];
            let a0 = phi[0] * d.u0.values[e] + phi[1] * d.u0.values[e + 1];
            let ak = phi[0] * d.uk.values[e] + phi[1] * d.uk.values[e + 1];
            let sq = ((metric.a)(s) * (metric.b)(s)).sqrt();
            bulk += (-alpha * l * (w0 * a0 * a0 + wk * ak * ak) + 2.0) * w(s) * sq * jw;
        }
    }
    let mut bnd = 0.0;
    for i in metric.boundary_nodes() {
        let s = metric.nodes[i];
        bnd += boundary_f(d, l, d.u0.values[i], d.uk.values[i]) * w(s) * 2.0 * PI * (metric.b)(s).sqrt();
    }
    Ok(bulk + bnd)
}

/// Functional value of a rotational metric.
pub fn rotational_functional(
    kind: FunctionalKind,
    metric: &RotationalMetric,
    r: f64,
    k: usize,
) -> Result<FunctionalValue> {
    radial_functional(kind, &metric.problem(), r, k)
}

/// Central difference (F(g + t h) − F(g − t h)) / 2t of the functional.
pub fn finite_difference(
    kind: FunctionalKind,
    metric: &RotationalMetric,
    h: &RotationalPerturbation,
    r: f64,
    k: usize,
    t: f64,
) -> Result<f64> {
    let plus = rotational_functional(kind, &metric.perturbed(h, t), r, k)?.value;
    let minus = rotational_functional(kind, &metric.perturbed(h, -t), r, k)?.value;
    Ok((plus - minus) / (2.0 * t))
}

/// The weighted sum Σ t_j Q_h(u_j) over the coordinate eigenfunctions of a
/// critical catenoid, with weights t_j = ∫_∂ v_j² / (|∂Σ| sinh² r).
#[derive(Debug, Clone, Serialize)]
pub struct CatenoidVariation {
    pub weights: [f64; 2],
    pub q_axial: f64,
    pub q_rotational: f64,
    pub sum: f64,
}

pub fn catenoid_weighted_variation(
    sol: &CatenoidSolution,
    elements: usize,
    h: &RotationalPerturbation,
) -> Result<CatenoidVariation> {
    if sol.kind != Kind::Hyperbolic {
        return Err(Error::Precondition("the Ω variation identity needs a hyperbolic catenoid".into()));
    }
    let metric = RotationalMetric::catenoid(sol, elements);
    let kind = FunctionalKind::Omega;
    let fam = CatenoidFamily { kind: sol.kind, a: sol.a };
    let (s0, u0) = mode_eigenfunction(kind, &metric, 0, 0)?;
    let (sa, ua) = mode_eigenfunction(kind, &metric, 0, 1)?;
    let (sr, ur) = mode_eigenfunction(kind, &metric, 1, 0)?;
    let f2 = fam.angular2(sol.s0).v;
    let sh2 = sol.r.sinh().powi(2);
    let t_rot = f2 / sh2;
    let weights = [1.0 - t_rot, t_rot];
    let q = |sk: f64, uk: ModeFunction| {
        perturbation_derivative(
            &metric,
            &VariationData { kind, r: sol.r, sigma0: s0, sigmak: sk, u0: u0.clone(), uk },
            h,
        )
    };
    let qa = q(sa, ua)?;
    let qr = q(sr, ur)?;
    Ok(CatenoidVariation { weights, q_axial: qa, q_rotational: qr, sum: weights[0] * qa + weights[1] * qr })
}

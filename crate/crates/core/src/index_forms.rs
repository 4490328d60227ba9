//! Second-variation forms of area and energy, their inertia, spectral
//! indices and the eigenfunction-immersion certificate.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::discretize::{assemble_radial, assemble_radial_potential, uniform_nodes, Profile, RadialProblem};
use crate::error::{Error, Result};
use crate::linalg::{inertia, Csr, Triplets};
use crate::quadrature::gauss3;
use crate::robin_solver::{merge_modes, steklov_alpha_spectrum, ModeSpectrum, SpectralResult};
use crate::spaceform::Kind;
use crate::surfaces::{sample, BallChart, CatenoidFamily, CatenoidSolution};

/// Generalized eigenvalues (with respect to the L² mass) within this of zero count as null.
pub const NULL_TOL: f64 = 1e-3;
pub const SPECTRAL_TIE_TOL: f64 = 1e-4;
pub const DEFAULT_MMAX: usize = 6;
pub const DEFAULT_INDEX_ELEMENTS: usize = 400;

/// A symmetric form over a discrete variation space with a reference mass.
#[derive(Debug, Clone)]
pub struct IndexForm {
    pub a: Csr,
    pub mass: Csr,
    pub label: String,
    pub mode: usize,
    pub multiplicity: usize,
    pub constraints: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseResult {
    pub label: String,
    pub mode: usize,
    pub multiplicity: usize,
    pub index: usize,
    pub nullity_estimate: usize,
    pub gap_tol: f64,
    /// Negative generalized eigenvalues (with respect to the mass), ascending.
    pub negatives: Vec<f64>,
    /// Generalized eigenvalues on either side of zero.
    pub below_zero: Option<f64>,
    pub above_zero: f64,
    pub lowest: f64,
    pub warning: Option<String>,
}

fn count_below(form: &IndexForm, lambda: f64) -> usize {
    inertia(&form.a.lin_comb(1.0, &form.mass, -lambda), 0.0).negative
}

/// j-th (0-based) generalized eigenvalue of (A, mass) by Sturm bisection.
pub fn sturm_eigenvalue(form: &IndexForm, j: usize) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0);
    while count_below(form, lo) > j {
        lo *= 2.0;
    }
    while count_below(form, hi) <= j {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-13 * (1.0 + mid.abs()) {
            break;
        }
        if count_below(form, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Negative count of (A, mass) by Sylvester inertia; near-null directions reported separately.
pub fn morse_index(form: &IndexForm) -> Result<MorseResult> {
    if !form.a.is_symmetric(1e-10 * form.a.max_abs().max(1.0)) {
        return Err(Error::Invalid(format!("form {} is not symmetric", form.label)));
    }
    let gap = NULL_TOL;
    let below_gap = count_below(form, -gap);
    let below_zero = count_below(form, 0.0);
    let above_gap = count_below(form, gap);
    let index = below_gap;
    let nullity = above_gap - below_gap;
    let warning = (below_zero != below_gap).then(|| {
        format!(
            "{}: {} eigenvalue(s) in (-gap, 0); index {} excluding them, {} including",
            form.label,
            below_zero - below_gap,
            below_gap,
            below_zero
        )
    });
    let negatives: Vec<f64> = (0..index).map(|j| sturm_eigenvalue(form, j)).collect();
    Ok(MorseResult {
        label: form.label.clone(),
        mode: form.mode,
        multiplicity: form.multiplicity,
        index,
        nullity_estimate: nullity,
        gap_tol: gap,
        below_zero: negatives.last().copied(),
        above_zero: sturm_eigenvalue(form, index),
        lowest: sturm_eigenvalue(form, 0),
        negatives,
        warning,
    })
}

/// Linear interpolation of nodal values.
fn nodal_profile(nodes: Vec<f64>, values: Vec<f64>) -> impl Fn(f64) -> f64 {
    move |t| {
        let i = match nodes.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return values[i],
            Err(i) => i.clamp(1, nodes.len() - 1),
        };
        let (t0, t1) = (nodes[i - 1], nodes[i]);
        let w = (t - t0) / (t1 - t0);
        values[i - 1] * (1.0 - w) + values[i] * w
    }
}

/// S = K − (2κ + |B|²)M − coef·Bd on the mode-m space of the catenoid,
/// with |B|² sampled at the nodes from the immersion.
pub fn catenoid_area_form(sol: &CatenoidSolution, m: usize, elements: usize) -> Result<IndexForm> {
    let p = RadialProblem::catenoid(sol, elements);
    let samp = sample(&sol.family(), &p.nodes, &[0.0])?;
    let b2 = samp.norm_b2_profile();
    if b2.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("|B|² samples missing".into()));
    }
    let kappa = sol.kind.curvature();
    let pot = nodal_profile(p.nodes.clone(), b2.iter().map(|b| 2.0 * kappa + b).collect());
    let f = assemble_radial(&p, m)?;
    let v = assemble_radial_potential(&p, m, &pot)?;
    let coef = sol.kind.boundary_coefficient(sol.r);
    let a = f.k.lin_comb(1.0, &v, -1.0).lin_comb(1.0, &f.bd, -coef);
    Ok(IndexForm {
        a,
        mass: f.m,
        label: format!("catenoid area m={m}"),
        mode: m,
        multiplicity: if m == 0 { 1 } else { 2 },
        constraints: "none (normal variations)".into(),
    })
}

/// Flat-normal form ∫|∇u|² − k u² − coef ∫_∂ u² of one normal direction of a geodesic k-ball.
pub fn ball_area_form(chart: &BallChart, m: usize, elements: usize) -> Result<IndexForm> {
    let p = RadialProblem::ball(chart, elements);
    let f = assemble_radial(&p, m)?;
    let coef = chart.kind.boundary_coefficient(chart.r);
    let a = f.shifted(chart.kind.frequency(chart.k)).lin_comb(1.0, &f.bd, -coef);
    Ok(IndexForm {
        a,
        mass: f.m,
        label: format!("ball normal direction m={m}"),
        mode: m,
        multiplicity: p.mode_multiplicity(m),
        constraints: "none".into(),
    })
}

/// Sum of multiplicity-weighted per-form indices.
#[derive(Debug, Clone, Serialize)]
pub struct ModeIndex {
    pub total: usize,
    pub nullity: usize,
    pub per_form: Vec<MorseResult>,
    pub warnings: Vec<String>,
}

fn total(results: Vec<MorseResult>, copies: usize) -> ModeIndex {
    let total = copies * results.iter().map(|r| r.index * r.multiplicity).sum::<usize>();
    let nullity = copies * results.iter().map(|r| r.nullity_estimate * r.multiplicity).sum::<usize>();
    let warnings = results.iter().filter_map(|r| r.warning.clone()).collect();
    ModeIndex { total, nullity, per_form: results, warnings }
}

pub fn catenoid_morse_index(sol: &CatenoidSolution, mmax: usize, elements: usize) -> Result<ModeIndex> {
    let r = (0..=mmax).map(|m| morse_index(&catenoid_area_form(sol, m, elements)?)).collect::<Result<Vec<_>>>()?;
    Ok(total(r, 1))
}

/// Morse index of the geodesic k-ball in 𝔹ⁿ(r), summed over the n−k flat normal directions.
pub fn ball_morse_index(chart: &BallChart, mmax: usize, elements: usize) -> Result<ModeIndex> {
    let r = (0..=mmax).map(|m| morse_index(&ball_area_form(chart, m, elements)?)).collect::<Result<Vec<_>>>()?;
    Ok(total(r, chart.n - chart.k))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralIndex {
    pub count: usize,
    pub threshold: f64,
    pub tie_tol: f64,
    /// Eigenvalues within the tie tolerance of the threshold, not counted.
    pub boundary_cases: Vec<f64>,
}

/// #{σ_j < threshold}, ties within `tie_tol` reported separately.
pub fn spectral_index(spectrum: &SpectralResult, threshold: f64, tie_tol: f64) -> Result<SpectralIndex> {
    let last = *spectrum.sigmas.last().ok_or_else(|| Error::SpectrumTooShort("empty spectrum".into()))?;
    if last < threshold + tie_tol {
        return Err(Error::SpectrumTooShort(format!(
            "largest computed eigenvalue {last} does not clear the threshold {threshold}; extend the spectrum"
        )));
    }
    let count = spectrum.sigmas.iter().filter(|&&s| s < threshold - tie_tol).count();
    let boundary_cases = spectrum.sigmas.iter().cloned().filter(|s| (s - threshold).abs() <= tie_tol).collect();
    Ok(SpectralIndex { count, threshold, tie_tol, boundary_cases })
}

/// Mode spectra of a radial problem at the given frequency, merged.
pub fn radial_spectrum(p: &RadialProblem, alpha: f64, mmax: usize, per_mode: usize) -> Result<SpectralResult> {
    let parts = (0..=mmax)
        .map(|m| {
            Ok(ModeSpectrum {
                mode: m,
                multiplicity: p.mode_multiplicity(m),
                result: steklov_alpha_spectrum(&assemble_radial(p, m)?, alpha, per_mode)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    merge_modes(&parts)
}

/// Energy-form variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyConstraint {
    /// Tangent to the space form everywhere, V⁰ = 0 on the boundary.
    Admissible,
    /// Additionally V⁰ ≡ 0 everywhere.
    NoTimeComponent,
}

/// Angular class of a Fourier-separated field V = (a₀, a₁, a_r, a_θ) in the
/// frame rotating with θ: class A is (cos, cos, cos, sin)·mθ, class B is the
/// rotation-invariant pure a_θ field at m = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldClass {
    A,
    B,
}

const NF: usize = 4;

/// Orthonormal complement of the row space of `rows` in ℝ⁴.
fn null_basis(rows: &[[f64; 4]]) -> Result<Vec<[f64; 4]>> {
    let mut q: Vec<[f64; 4]> = vec![];
    let dot = |a: &[f64; 4], b: &[f64; 4]| (0..4).map(|i| a[i] * b[i]).sum::<f64>();
    for r in rows {
        let mut v = *r;
        let n0 = dot(&v, &v).sqrt();
        for b in &q {
            let c = dot(&v, b);
            for i in 0..4 {
                v[i] -= c * b[i];
            }
        }
        let n = dot(&v, &v).sqrt();
        if !(n > 1e-12 * n0) {
            return Err(Error::ConstraintRank(rows.len()));
        }
        q.push(v.map(|x| x / n));
    }
    let nrows = q.len();
    let mut out = vec![];
    while q.len() < 4 {
        let mut best: Option<([f64; 4], f64)> = None;
        for e in 0..4 {
            let mut v = [0.0; 4];
            v[e] = 1.0;
            for b in &q {
                let c = dot(&v, b);
                for i in 0..4 {
                    v[i] -= c * b[i];
                }
            }
            let n = dot(&v, &v).sqrt();
            if best.is_none_or(|(_, bn)| n > bn + 1e-14) {
                best = Some((v, n));
            }
        }
        let (v, n) = best.unwrap();
        let u = v.map(|x| x / n);
        q.push(u);
        out.push(u);
    }
    debug_assert_eq!(out.len(), 4 - nrows);
    Ok(out)
}

/// S_E restricted to admissible fields of one angular class and mode.
#[derive(Debug, Clone)]
pub struct EnergyForm {
    pub form: IndexForm,
    /// Unreduced form over (a₀, a₁, a_r, a_θ) per node, and its mass.
    pub full: Csr,
    pub full_mass: Csr,
    /// Per node, the admissible basis vectors in ℝ⁴.
    pub bases: Vec<Vec<[f64; 4]>>,
    pub nodes: Vec<f64>,
}

pub fn catenoid_energy_form(
    sol: &CatenoidSolution,
    m: usize,
    class: FieldClass,
    constraint: EnergyConstraint,
    elements: usize,
) -> Result<EnergyForm> {
    if class == FieldClass::B && m != 0 {
        return Err(Error::Invalid("class B exists only for m = 0".into()));
    }
    let fam = sol.family();
    let kind = sol.kind;
    let sg0 = kind.time_sign();
    let kappa = kind.curvature();
    let kdim = 2.0;
    let coef = kind.boundary_coefficient(sol.r);
    let nodes = uniform_nodes(-sol.s0, sol.s0, elements);
    let n = nodes.len();
    let (mut ic, mut is) = if m == 0 { (2.0 * PI, 0.0) } else { (PI, PI) };
    if class == FieldClass::B {
        ic = 0.0;
        is = 2.0 * PI;
    }
    let mf = m as f64;
    let mut at = Triplets::new(NF * n);
    let mut mt = Triplets::new(NF * n);
    let (gx, gw) = gauss3();
    for e in 0..n - 1 {
        let (sa, sb) = (nodes[e], nodes[e + 1]);
        let h = sb - sa;
        for q in 0..3 {
            let s = 0.5 * (sa + sb) + 0.5 * h * gx[q];
            let f2 = fam.angular2(s).v;
            let ww = 0.5 * h * gw[q] * f2.sqrt();
            let phi = [(sb - s) / h, (s - sa) / h];
            let dphi = [-1.0 / h, 1.0 / h];
            for la in 0..2 {
                for lb in 0..2 {
                    let (pa, pb, da, db) = (phi[la], phi[lb], dphi[la], dphi[lb]);
                    let id = |l: usize, j: usize| NF * (e + l) + j;
                    let mut add = |ja: usize, jb: usize, v: f64| at.push(id(la, ja), id(lb, jb), ww * v);
                    // gradient terms
                    add(0, 0, ic * sg0 * da * db);
                    add(1, 1, ic * da * db);
                    add(2, 2, ic * da * db);
                    add(3, 3, is * da * db);
                    // angular terms: |∂θV|²/f² with u = m a_r + a_θ (sin²) and v = m a_θ + a_r (cos²)
                    let inv = 1.0 / f2;
                    add(0, 0, inv * is * sg0 * mf * mf * pa * pb);
                    add(1, 1, inv * is * mf * mf * pa * pb);
                    let uc = [(2usize, mf), (3usize, 1.0)];
                    let vc = [(3usize, mf), (2usize, 1.0)];
                    for &(ja, ca) in &uc {
                        for &(jb, cb) in &uc {
                            add(ja, jb, inv * is * ca * cb * pa * pb);
                        }
                    }
                    for &(ja, ca) in &vc {
                        for &(jb, cb) in &vc {
                            add(ja, jb, inv * ic * ca * cb * pa * pb);
                        }
                    }
                    // potential −kκ⟨V,V⟩
                    let pk = -kdim * kappa;
                    add(0, 0, pk * ic * sg0 * pa * pb);
                    add(1, 1, pk * ic * pa * pb);
                    add(2, 2, pk * ic * pa * pb);
                    add(3, 3, pk * is * pa * pb);
                    for (j, w) in [(0, ic), (1, ic), (2, ic), (3, is)] {
                        mt.push(id(la, j), id(lb, j), ww * w * pa * pb);
                    }
                }
            }
        }
    }
    for bn in [0, n - 1] {
        let fb = fam.radius(nodes[bn])?.v;
        for (j, w) in [(0, sg0 * ic), (1, ic), (2, ic), (3, is)] {
            at.push(NF * bn + j, NF * bn + j, -coef * fb * w);
        }
    }
    let full = at.into_csr();
    let full_mass = mt.into_csr();
    let mut bases = Vec::with_capacity(n);
    for (i, &s) in nodes.iter().enumerate() {
        let (x0, x1) = fam.axial_components(s)?;
        let f = fam.radius(s)?.v;
        let mut rows: Vec<[f64; 4]> = match class {
            FieldClass::B => vec![[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
            FieldClass::A => vec![[sg0 * x0.v, x1.v, f, 0.0]],
        };
        if class == FieldClass::A {
            if m == 0 {
                rows.push([0.0, 0.0, 0.0, 1.0]);
            }
            if i == 0 || i == n - 1 || constraint == EnergyConstraint::NoTimeComponent {
                rows.push([1.0, 0.0, 0.0, 0.0]);
            }
        }
        bases.push(null_basis(&rows)?);
    }
    let reduce = |a: &Csr| -> Csr {
        let mut off = vec![0usize; n + 1];
        for i in 0..n {
            off[i + 1] = off[i] + bases[i].len();
        }
        let mut t = Triplets::new(off[n]);
        for r in 0..a.dim() {
            let (ni, ja) = (r / NF, r % NF);
            for (c, v) in a.row(r) {
                let (nj, jb) = (c / NF, c % NF);
                for (p, bp) in bases[ni].iter().enumerate() {
                    if bp[ja] == 0.0 {
                        continue;
                    }
                    for (q, bq) in bases[nj].iter().enumerate() {
                        let x = bp[ja] * v * bq[jb];
                        if x != 0.0 {
                            t.push(off[ni] + p, off[nj] + q, x);
                        }
                    }
                }
            }
        }
        t.into_csr()
    };
    let form = IndexForm {
        a: reduce(&full),
        mass: reduce(&full_mass),
        label: format!("catenoid energy m={m} class {class:?}"),
        mode: m,
        multiplicity: if m == 0 { 1 } else { 2 },
        constraints: match constraint {
            EnergyConstraint::Admissible => "tangent to the space form; V0 = 0 on the boundary".into(),
            EnergyConstraint::NoTimeComponent => "tangent to the space form; V0 = 0 everywhere".into(),
        },
    };
    Ok(EnergyForm { form, full, full_mass, bases, nodes })
}

pub fn catenoid_energy_index(
    sol: &CatenoidSolution,
    constraint: EnergyConstraint,
    mmax: usize,
    elements: usize,
) -> Result<ModeIndex> {
    let mut res = vec![morse_index(&catenoid_energy_form(sol, 0, FieldClass::B, constraint, elements)?.form)?];
    for m in 0..=mmax {
        res.push(morse_index(&catenoid_energy_form(sol, m, FieldClass::A, constraint, elements)?.form)?);
    }
    Ok(total(res, 1))
}

/// S_E(Φ_θ, Φ_θ)/‖Φ_θ‖²_{L²} for the rotation field (class B, a_θ = f).
pub fn rotation_field_energy(sol: &CatenoidSolution, elements: usize) -> Result<f64> {
    let ef = catenoid_energy_form(sol, 0, FieldClass::B, EnergyConstraint::Admissible, elements)?;
    let fam = sol.family();
    let mut v = vec![0.0; ef.full.dim()];
    for (i, &s) in ef.nodes.iter().enumerate() {
        v[NF * i + 3] = fam.radius(s)?.v;
    }
    Ok(ef.full.form(&v, &v) / ef.full_mass.form(&v, &v))
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityChecks {
    pub ind_e_le_n_ind_s: bool,
    pub ind_ge_ind_s_plus_n: bool,
    pub ind_le_n_ind_s_plus_moduli: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub surface: String,
    pub kind: Kind,
    pub r: f64,
    pub n: usize,
    pub dim_moduli: usize,
    pub ind: usize,
    #[serde(rename = "ind_S")]
    pub ind_s: usize,
    #[serde(rename = "ind_E")]
    pub ind_e: Option<usize>,
    /// Energy index over fields with V⁰ ≡ 0.
    #[serde(rename = "ind_E_no_time")]
    pub ind_e_no_time: Option<usize>,
    pub nullity_estimate: usize,
    pub checks: Option<InequalityChecks>,
    pub morse: ModeIndex,
    pub energy: Option<ModeIndex>,
    pub spectral: SpectralIndex,
    pub sigmas: Vec<f64>,
    pub mode_tags: Vec<usize>,
    pub null_tol: f64,
    pub elements: usize,
    pub mmax: usize,
}

impl IndexReport {
    fn with_checks(mut self) -> Self {
        if let Some(ie) = self.ind_e {
            let n = self.n;
            self.checks = Some(InequalityChecks {
                ind_e_le_n_ind_s: ie <= n * self.ind_s,
                ind_ge_ind_s_plus_n: self.ind >= self.ind_s + n,
                ind_le_n_ind_s_plus_moduli: self.ind <= n * self.ind_s + self.dim_moduli,
            });
        }
        self
    }
}

/// All three indices of a critical catenoid in 𝔹³(r).
pub fn catenoid_index_report(sol: &CatenoidSolution, mmax: usize, elements: usize) -> Result<IndexReport> {
    let morse = catenoid_morse_index(sol, mmax, elements)?;
    let energy = catenoid_energy_index(sol, EnergyConstraint::Admissible, mmax, elements)?;
    let no_time = catenoid_energy_index(sol, EnergyConstraint::NoTimeComponent, mmax, elements)?;
    let p = RadialProblem::catenoid(sol, elements);
    let spec = radial_spectrum(&p, sol.kind.frequency(2), mmax, 2)?;
    let thr = sol.kind.boundary_coefficient(sol.r);
    let spectral = spectral_index(&spec, thr, SPECTRAL_TIE_TOL)?;
    Ok(IndexReport {
        surface: "catenoid".into(),
        kind: sol.kind,
        r: sol.r,
        n: 3,
        dim_moduli: 1,
        ind: morse.total,
        ind_s: spectral.count,
        ind_e: Some(energy.total),
        ind_e_no_time: Some(no_time.total),
        nullity_estimate: morse.nullity,
        checks: None,
        morse,
        energy: Some(energy),
        spectral,
        sigmas: spec.sigmas.clone(),
        mode_tags: spec.mode_tags.clone().unwrap_or_default(),
        null_tol: NULL_TOL,
        elements,
        mmax,
    }
    .with_checks())
}

/// Morse and spectral index of the geodesic k-ball in 𝔹ⁿ(r).
pub fn ball_index_report(chart: &BallChart, mmax: usize, elements: usize) -> Result<IndexReport> {
    let morse = ball_morse_index(chart, mmax, elements)?;
    let p = RadialProblem::ball(chart, elements);
    let spec = radial_spectrum(&p, chart.kind.frequency(chart.k), mmax, 1)?;
    let thr = chart.kind.boundary_coefficient(chart.r);
    let spectral = spectral_index(&spec, thr, SPECTRAL_TIE_TOL)?;
    Ok(IndexReport {
        surface: format!("geodesic {}-ball", chart.k),
        kind: chart.kind,
        r: chart.r,
        n: chart.n,
        dim_moduli: 0,
        ind: morse.total,
        ind_s: spectral.count,
        ind_e: None,
        ind_e_no_time: None,
        nullity_estimate: morse.nullity,
        checks: None,
        morse,
        energy: None,
        spectral,
        sigmas: spec.sigmas.clone(),
        mode_tags: spec.mode_tags.clone().unwrap_or_default(),
        null_tol: NULL_TOL,
        elements,
        mmax,
    })
}

/// Surfaces the certificate knows how to build coordinates for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CertifiedSurface {
    Ball {
        kind: Kind,
        r: f64,
    },
    Catenoid(CatenoidSolution),
    /// Ball metric and spectra, latitude coordinates sin((1+ε)t): a negative control.
    StretchedBall {
        kind: Kind,
        r: f64,
        stretch: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct CoordinateMatch {
    pub name: String,
    pub mode: usize,
    pub rayleigh: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub surface: String,
    pub elements: usize,
    pub matches: Vec<CoordinateMatch>,
    pub sigma0: f64,
    pub sigmak: f64,
    /// sup |g_ss − 1|, |g_θθ − ρ²| of −dv₀⊗dv₀ + Σ dv_j⊗dv_j (signed per space form).
    pub metric_residual: f64,
    /// sup |Σ ±v_j² − κ|.
    pub quadric_residual: f64,
    /// sup |±|∇v₀|² + Σ|∇v_j|² − 2|.
    pub gradient_residual: f64,
    /// |σ_k − (−κ coef²) σ₀|.
    pub eigenvalue_relation_residual: f64,
    /// sup over ∂Σ of |σ_k − (σ_k − σ₀) v₀²|.
    pub boundary_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

const MATCH_REL_TOL: f64 = 0.25;

/// Project the nodal profile `x` of mode `m` onto the computed eigenspace nearest its Rayleigh quotient.
fn project_profile(
    p: &RadialProblem,
    alpha: f64,
    m: usize,
    name: &str,
    x: &[f64],
) -> Result<(Vec<f64>, CoordinateMatch)> {
    let f = assemble_radial(p, m)?;
    let spec = steklov_alpha_spectrum(&f, alpha, f.boundary_dofs.len())?;
    let xd = f.restrict(x);
    let a = f.shifted(alpha);
    let rq = a.form(&xd, &xd) / f.bd.form(&xd, &xd);
    let (j, sigma) = spec
        .sigmas
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - rq).abs().total_cmp(&(b.1 - rq).abs()))
        .map(|(j, s)| (j, *s))
        .unwrap();
    if (sigma - rq).abs() > MATCH_REL_TOL * (1.0 + sigma.abs()) {
        return Err(Error::EigenspaceMatch(format!(
            "{name}: Rayleigh quotient {rq} has no computed eigenvalue nearby"
        )));
    }
    let tie = 1e-8 * (1.0 + sigma.abs());
    let mut out = vec![0.0; xd.len()];
    for (i, s) in spec.sigmas.iter().enumerate() {
        if (s - spec.sigmas[j]).abs() <= tie {
            let u = &spec.vectors()[i];
            let c = f.bd.form(u, &xd) / f.bd.form(u, u);
            for (o, ui) in out.iter_mut().zip(u) {
                *o += c * ui;
            }
        }
    }
    Ok((f.expand(&out), CoordinateMatch { name: name.into(), mode: m, rayleigh: rq, sigma }))
}

fn derivative(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                let (h1, h2) = (t[1] - t[0], t[2] - t[0]);
                // second-order one-sided
                (v[1] * h2 * h2 - v[2] * h1 * h1 - v[0] * (h2 * h2 - h1 * h1)) / (h1 * h2 * (h2 - h1))
            } else if i == n - 1 {
                let (h1, h2) = (t[n - 2] - t[n - 1], t[n - 3] - t[n - 1]);
                (v[n - 2] * h2 * h2 - v[n - 3] * h1 * h1 - v[n - 1] * (h2 * h2 - h1 * h1)) / (h1 * h2 * (h2 - h1))
            } else {
                let (hl, hr) = (t[i] - t[i - 1], t[i + 1] - t[i]);
                (v[i + 1] * hl * hl - v[i - 1] * hr * hr + v[i] * (hr * hr - hl * hl)) / (hl * hr * (hl + hr))
            }
        })
        .collect()
}

/// Check that the coordinates are eigenfunctions realizing the extremal identities.
///
/// Works on the radial grid with 250·2^level elements.
pub fn extremality_certificate(surface: CertifiedSurface, level: usize, tol: f64) -> Result<CertificateReport> {
    let elements = 250usize << level;
    let (kind, r, p, name) = match surface {
        CertifiedSurface::Ball { kind, r } | CertifiedSurface::StretchedBall { kind, r, .. } => {
            let ch = BallChart::new(kind, 2, 3, r)?;
            (kind, r, RadialProblem::ball(&ch, elements), "geodesic 2-ball".to_string())
        }
        CertifiedSurface::Catenoid(sol) => {
            (sol.kind, sol.r, RadialProblem::catenoid(&sol, elements), "catenoid".to_string())
        }
    };
    let alpha = kind.frequency(2);
    let t = p.nodes.clone();
    let sg0 = kind.time_sign();
    let kappa = kind.curvature();
    // (name, mode, profile, sign)
    let mut coords: Vec<(&str, usize, Vec<f64>, f64)> = vec![];
    match surface {
        CertifiedSurface::Ball { .. } => {
            coords.push(("v0", 0, t.iter().map(|&x| kind.c(x)).collect(), sg0));
            coords.push(("v1,v2", 1, t.iter().map(|&x| kind.s(x)).collect(), 1.0));
        }
        CertifiedSurface::StretchedBall { stretch, .. } => {
            coords.push(("v0", 0, t.iter().map(|&x| kind.c(x)).collect(), sg0));
            coords.push(("v1,v2", 1, t.iter().map(|&x| kind.s(stretch * x)).collect(), 1.0));
        }
        CertifiedSurface::Catenoid(sol) => {
            let fam = CatenoidFamily { kind, a: sol.a };
            let ax = t.iter().map(|&s| fam.axial_components(s)).collect::<Result<Vec<_>>>()?;
            coords.push(("v0", 0, ax.iter().map(|c| c.0.v).collect(), sg0));
            coords.push(("v1", 0, ax.iter().map(|c| c.1.v).collect(), 1.0));
            coords.push(("v2,v3", 1, t.iter().map(|&s| fam.radius(s).map(|j| j.v)).collect::<Result<Vec<_>>>()?, 1.0));
        }
    }
    let mut matches = vec![];
    let mut proj = vec![];
    for (name, m, x, sign) in &coords {
        let (v, cm) = project_profile(&p, alpha, *m, name, x)?;
        matches.push(cm);
        proj.push((*m, v, *sign));
    }
    let rho: Vec<f64> = t.iter().map(|&x| p.latitude.as_ref().map_or(1.0, |l| (l.radius)(x))).collect();
    let n = t.len();
    let mut gss = vec![0.0; n];
    let mut gthth = vec![0.0; n];
    let mut quad = vec![0.0; n];
    let mut grad = vec![0.0; n];
    for (m, v, sign) in &proj {
        let dv = derivative(&t, v);
        for i in 0..n {
            gss[i] += sign * dv[i] * dv[i];
            quad[i] += sign * v[i] * v[i];
            grad[i] += sign * dv[i] * dv[i];
            if *m == 1 {
                // the cos/sin pair contributes v² in θ
                gthth[i] += v[i] * v[i];
                grad[i] += v[i] * v[i] / (rho[i] * rho[i]);
            }
        }
    }
    // interior nodes only for quantities divided by the latitude (pole at the ball centre)
    let interior = |i: usize| rho[i] > 1e-12;
    let mut metric_residual: f64 = 0.0;
    let mut quadric_residual: f64 = 0.0;
    let mut gradient_residual: f64 = 0.0;
    for i in 0..n {
        metric_residual = metric_residual.max((gss[i] - 1.0).abs()).max((gthth[i] - rho[i] * rho[i]).abs());
        quadric_residual = quadric_residual.max((quad[i] - kappa).abs());
        if interior(i) {
            gradient_residual = gradient_residual.max((grad[i] - 2.0).abs());
        }
    }
    let sigma0 = matches[0].sigma;
    let sigmak = matches.last().unwrap().sigma;
    let coef = kind.boundary_coefficient(r);
    let eigenvalue_relation_residual = (sigmak - (-kappa * coef * coef) * sigma0).abs();
    let v0 = &proj[0].1;
    let mut boundary_residual: f64 = 0.0;
    for b in [0, n - 1] {
        if interior(b) {
            boundary_residual = boundary_residual.max((sigmak - (sigmak - sigma0) * v0[b] * v0[b]).abs());
        }
    }
    let pass = [metric_residual, quadric_residual, gradient_residual, eigenvalue_relation_residual, boundary_residual]
        .iter()
        .all(|&x| x <= tol);
    Ok(CertificateReport {
        surface: name,
        elements,
        matches,
        sigma0,
        sigmak,
        metric_residual,
        quadric_residual,
        gradient_residual,
        eigenvalue_relation_residual,
        boundary_residual,
        tol,
        pass,
    })
}

/// Potential profile helper for tests and diagnostics: 2κ + |B|² from the analytic radius jet.
pub fn catenoid_potential_exact(fam: CatenoidFamily) -> Profile {
    Arc::new(move |s| {
        let f = fam.radius(s).expect("inside the working interval");
        let kappa = fam.kind.curvature();
        2.0 * kappa + 2.0 * (kappa + f.d2 / f.v)
    })
}

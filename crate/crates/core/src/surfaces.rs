//! Rotational catenoid families, geodesic ball charts and their induced geometry.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Composite;
use crate::spaceform::{inner, AmbientSpace, Kind};

/// Open bound keeping the spherical search away from the Clifford member a = 0.
pub const SPHERICAL_A_GAP: f64 = 1e-6;

const PHI_ORDER: usize = 10;
const PHI_PANELS_PER_UNIT: f64 = 8.0;

fn phi_rule() -> &'static Composite {
    static RULE: OnceLock<Composite> = OnceLock::new();
    RULE.get_or_init(|| Composite::new(PHI_ORDER))
}

/// Value and first two derivatives of a scalar function of s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet1 {
    /// √P from the jet of P.
    fn sqrt(p: Jet1) -> Jet1 {
        let v = p.v.sqrt();
        Jet1 { v, d1: p.d1 / (2.0 * v), d2: p.d2 / (2.0 * v) - p.d1 * p.d1 / (4.0 * v * v * v) }
    }
}

/// Embedding and its partial derivatives at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub x: Vec<f64>,
    pub xs: Vec<f64>,
    pub xt: Vec<f64>,
    pub xss: Vec<f64>,
    pub xst: Vec<f64>,
    pub xtt: Vec<f64>,
}

/// A parametrized 2-dimensional immersion into a space form.
pub trait Immersion2 {
    fn kind(&self) -> Kind;
    fn jet(&self, s: f64, theta: f64) -> Result<Jet>;
}

/// do Carmo–Dajczer rotational minimal surfaces in 𝕊³ or ℍ³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatenoidFamily {
    pub kind: Kind,
    pub a: f64,
}

impl CatenoidFamily {
    pub fn new(kind: Kind, a: f64) -> Result<Self> {
        let ok = match kind {
            Kind::Spherical => a > -0.5 && a <= 0.0,
            Kind::Hyperbolic => a > 0.5,
        };
        if !ok || !a.is_finite() {
            return Err(Error::Invalid(format!("family parameter a = {a} outside the admissible range for {kind:?}")));
        }
        Ok(CatenoidFamily { kind, a })
    }

    /// Square of the radius in the (x₀, x₁) plane, with two derivatives.
    pub fn axial2(&self, s: f64) -> Jet1 {
        let a = self.a;
        match self.kind {
            Kind::Hyperbolic => {
                Jet1 { v: a * (2.0 * s).cosh() + 0.5, d1: 2.0 * a * (2.0 * s).sinh(), d2: 4.0 * a * (2.0 * s).cosh() }
            }
            Kind::Spherical => {
                Jet1 { v: 0.5 - a * (2.0 * s).cos(), d1: 2.0 * a * (2.0 * s).sin(), d2: 4.0 * a * (2.0 * s).cos() }
            }
        }
    }

    /// Square of the rotation radius f (the (x₂, x₃) plane).
    pub fn angular2(&self, s: f64) -> Jet1 {
        let a = self.a;
        match self.kind {
            Kind::Hyperbolic => {
                Jet1 { v: a * (2.0 * s).cosh() - 0.5, d1: 2.0 * a * (2.0 * s).sinh(), d2: 4.0 * a * (2.0 * s).cosh() }
            }
            Kind::Spherical => {
                Jet1 { v: 0.5 + a * (2.0 * s).cos(), d1: -2.0 * a * (2.0 * s).sin(), d2: -4.0 * a * (2.0 * s).cos() }
            }
        }
    }

    /// The rotation radius f(s) = √(angular2).
    pub fn radius(&self, s: f64) -> Result<Jet1> {
        let f2 = self.angular2(s);
        if !(f2.v > 0.0) {
            return Err(Error::Domain(format!("rotation radius vanishes at s = {s}")));
        }
        Ok(Jet1::sqrt(f2))
    }

    fn phi_constant(&self) -> f64 {
        let a2 = self.a * self.a;
        match self.kind {
            Kind::Hyperbolic => (a2 - 0.25).sqrt(),
            Kind::Spherical => (0.25 - a2).sqrt(),
        }
    }

    /// φ′(s), the integrand of φ.
    pub fn dphi(&self, s: f64) -> Result<f64> {
        let p = self.axial2(s).v;
        let f2 = self.angular2(s).v;
        if !(f2 > 0.0) || !(p > 0.0) {
            return Err(Error::Domain(format!("integrand of φ singular at s = {s}")));
        }
        Ok(self.phi_constant() / (p * f2.sqrt()))
    }

    /// φ(s) = ∫₀^s φ′ by composite Gauss–Legendre.
    pub fn varphi(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        // validate the whole path once at the far end; the radii are monotone in |s|
        self.dphi(s)?;
        let panels = (s.abs() * PHI_PANELS_PER_UNIT).ceil() as usize + 1;
        let c = self.phi_constant();
        Ok(phi_rule().integrate(
            |t| {
                let p = self.axial2(t).v;
                let f2 = self.angular2(t).v;
                c / (p * f2.sqrt())
            },
            0.0,
            s,
            panels,
        ))
    }

    /// Jets of φ given φ(s).
    fn phi_jet(&self, s: f64, phi: f64) -> Jet1 {
        let c = self.phi_constant();
        let p = self.axial2(s);
        let f = Jet1::sqrt(self.angular2(s));
        let den = p.v * f.v;
        let dden = p.d1 * f.v + p.v * f.d1;
        Jet1 { v: phi, d1: c / den, d2: -c * dden / (den * den) }
    }

    /// Jets of the (x₀, x₁) components.
    pub fn axial_components(&self, s: f64) -> Result<(Jet1, Jet1)> {
        let phi = self.phi_jet(s, self.varphi(s)?);
        Ok(self.axial_from_phi(s, phi))
    }

    fn axial_from_phi(&self, s: f64, phi: Jet1) -> (Jet1, Jet1) {
        let kappa = self.kind.curvature();
        let r = Jet1::sqrt(self.axial2(s));
        let (c, sn) = (self.kind.c(phi.v), self.kind.s(phi.v));
        let x0 = Jet1 {
            v: r.v * c,
            d1: r.d1 * c - kappa * r.v * phi.d1 * sn,
            d2: r.d2 * c
                - 2.0 * kappa * r.d1 * phi.d1 * sn
                - kappa * r.v * phi.d2 * sn
                - kappa * r.v * phi.d1 * phi.d1 * c,
        };
        let x1 = Jet1 {
            v: r.v * sn,
            d1: r.d1 * sn + r.v * phi.d1 * c,
            d2: r.d2 * sn + 2.0 * r.d1 * phi.d1 * c + r.v * phi.d2 * c - kappa * r.v * phi.d1 * phi.d1 * sn,
        };
        (x0, x1)
    }

    pub fn point(&self, s: f64, theta: f64) -> Result<Vec<f64>> {
        Ok(self.jet(s, theta)?.x)
    }

    /// Ball radius seen from the boundary circle at parameter s.
    pub fn radius_at(&self, s: f64) -> Result<f64> {
        let (x0, _) = self.axial_components(s)?;
        let sp = AmbientSpace { kind: self.kind, n: 3 };
        let mut x = vec![0.0; 4];
        x[0] = x0.v;
        sp.ball_distance(&x)
    }

    /// f′/f minus the boundary coefficient at the ball radius through s.
    fn orthogonality_defect(&self, s: f64) -> Result<f64> {
        let f = self.radius(s)?;
        let r = self.radius_at(s)?;
        if !(r > 0.0) {
            return Ok(-f64::INFINITY);
        }
        Ok(f.d1 / f.v - self.kind.boundary_coefficient(r))
    }
}

impl Immersion2 for CatenoidFamily {
    fn kind(&self) -> Kind {
        self.kind
    }

    fn jet(&self, s: f64, theta: f64) -> Result<Jet> {
        let f = self.radius(s)?;
        let (x0, x1) = self.axial_components(s)?;
        let (ct, st) = (theta.cos(), theta.sin());
        Ok(Jet {
            x: vec![x0.v, x1.v, f.v * ct, f.v * st],
            xs: vec![x0.d1, x1.d1, f.d1 * ct, f.d1 * st],
            xt: vec![0.0, 0.0, -f.v * st, f.v * ct],
            xss: vec![x0.d2, x1.d2, f.d2 * ct, f.d2 * st],
            xst: vec![0.0, 0.0, -f.d1 * st, f.d1 * ct],
            xtt: vec![0.0, 0.0, -f.v * ct, -f.v * st],
        })
    }
}

/// Totally geodesic k-ball of radius r through the center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallChart {
    pub kind: Kind,
    pub k: usize,
    pub n: usize,
    pub r: f64,
}

impl BallChart {
    pub fn new(kind: Kind, k: usize, n: usize, r: f64) -> Result<Self> {
        if k < 2 || k > n {
            return Err(Error::Invalid(format!("need 2 <= k <= n, got k = {k}, n = {n}")));
        }
        kind.check_radius(r)?;
        Ok(BallChart { kind, k, n, r })
    }

    /// Point at geodesic distance t along the direction given by hyperspherical angles.
    pub fn ball_point(&self, t: f64, angles: &[f64]) -> Result<Vec<f64>> {
        if angles.len() != self.k - 1 {
            return Err(Error::Dimension { expected: self.k - 1, got: angles.len() });
        }
        if t.abs() > self.r * (1.0 + 1e-14) {
            return Err(Error::Domain(format!("|t| = {} exceeds r = {}", t.abs(), self.r)));
        }
        let mut x = vec![0.0; self.n + 1];
        x[0] = self.kind.c(t);
        let st = self.kind.s(t);
        let mut prod = 1.0;
        for (i, th) in angles.iter().enumerate() {
            x[i + 1] = st * prod * th.cos();
            prod *= th.sin();
        }
        x[self.k] = st * prod;
        Ok(x)
    }

    /// Latitude radius sin t or sinh t.
    pub fn latitude(&self, t: f64) -> f64 {
        self.kind.s(t)
    }
}

impl Immersion2 for BallChart {
    fn kind(&self) -> Kind {
        self.kind
    }

    fn jet(&self, t: f64, theta: f64) -> Result<Jet> {
        StretchedDisk { chart: *self, stretch: 1.0 }.jet(t, theta)
    }
}

/// Geodesic 2-ball chart with the latitude radius evaluated at (1+ε)t.
/// Only a true space-form immersion when the stretch is 1; used as a negative control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchedDisk {
    pub chart: BallChart,
    pub stretch: f64,
}

impl Immersion2 for StretchedDisk {
    fn kind(&self) -> Kind {
        self.chart.kind
    }

    fn jet(&self, t: f64, theta: f64) -> Result<Jet> {
        let ch = &self.chart;
        if ch.k != 2 {
            return Err(Error::Invalid("surface jets need a 2-dimensional chart".into()));
        }
        let kind = ch.kind;
        let kappa = kind.curvature();
        let m = self.stretch;
        let n1 = ch.n + 1;
        let (c, s) = (kind.c(t), kind.s(t));
        let (cm, sm) = (kind.c(m * t), kind.s(m * t));
        let (ct, st) = (theta.cos(), theta.sin());
        let mut j = Jet {
            x: vec![0.0; n1],
            xs: vec![0.0; n1],
            xt: vec![0.0; n1],
            xss: vec![0.0; n1],
            xst: vec![0.0; n1],
            xtt: vec![0.0; n1],
        };
        j.x[0] = c;
        j.xs[0] = -kappa * s;
        j.xss[0] = -kappa * c;
        let (l, dl, ddl) = (sm, m * cm, -kappa * m * m * sm);
        j.x[1] = l * ct;
        j.x[2] = l * st;
        j.xs[1] = dl * ct;
        j.xs[2] = dl * st;
        j.xss[1] = ddl * ct;
        j.xss[2] = ddl * st;
        j.xt[1] = -l * st;
        j.xt[2] = l * ct;
        j.xst[1] = -dl * st;
        j.xst[2] = dl * ct;
        j.xtt[1] = -l * ct;
        j.xtt[2] = -l * st;
        Ok(j)
    }
}

pub type Metric2 = [[f64; 2]; 2];

/// g_ab = ⟨∂_aΦ, ∂_bΦ⟩ with the ambient signed form.
pub fn induced_metric(kind: Kind, jet: &Jet) -> Result<Metric2> {
    let g11 = inner(kind, &jet.xs, &jet.xs);
    let g12 = inner(kind, &jet.xs, &jet.xt);
    let g22 = inner(kind, &jet.xt, &jet.xt);
    let det = g11 * g22 - g12 * g12;
    if !(det > 0.0) || !(g11 > 0.0) {
        return Err(Error::DegenerateImmersion(format!("metric determinant {det:e}")));
    }
    Ok([[g11, g12], [g12, g22]])
}

fn inverse2(g: &Metric2) -> Metric2 {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]]
}

/// Unit normal of a surface in a 3-dimensional space form, by signed Gram–Schmidt
/// of the coordinate axes against {Φ, Φ_s, Φ_θ}.
pub fn unit_normal(kind: Kind, jet: &Jet) -> Result<Vec<f64>> {
    if jet.x.len() != 4 {
        return Err(Error::Dimension { expected: 4, got: jet.x.len() });
    }
    let g = induced_metric(kind, jet)?;
    let gi = inverse2(&g);
    let xx = inner(kind, &jet.x, &jet.x);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for axis in 0..4 {
        let mut v = vec![0.0; 4];
        v[axis] = 1.0;
        let px = inner(kind, &v, &jet.x) / xx;
        let a = [inner(kind, &v, &jet.xs), inner(kind, &v, &jet.xt)];
        let cs = gi[0][0] * a[0] + gi[0][1] * a[1];
        let ct = gi[1][0] * a[0] + gi[1][1] * a[1];
        for i in 0..4 {
            v[i] -= px * jet.x[i] + cs * jet.xs[i] + ct * jet.xt[i];
        }
        let q = inner(kind, &v, &v);
        if best.as_ref().is_none_or(|(bq, _)| q > *bq) {
            best = Some((q, v));
        }
    }
    let (q, v) = best.unwrap();
    if !(q > 1e-20) {
        return Err(Error::DegenerateImmersion("tangent frame does not admit a spacelike normal".into()));
    }
    Ok(v.into_iter().map(|c| c / q.sqrt()).collect())
}

/// (|B|², H) with B_ab = ⟨∂²_abΦ, ν⟩.
pub fn second_fundamental(kind: Kind, jet: &Jet) -> Result<(f64, f64)> {
    let nu = unit_normal(kind, jet)?;
    let g = induced_metric(kind, jet)?;
    let gi = inverse2(&g);
    let b = [
        [inner(kind, &jet.xss, &nu), inner(kind, &jet.xst, &nu)],
        [inner(kind, &jet.xst, &nu), inner(kind, &jet.xtt, &nu)],
    ];
    let mut h = 0.0;
    let mut nb = 0.0;
    for a in 0..2 {
        for c in 0..2 {
            h += gi[a][c] * b[a][c];
            for d in 0..2 {
                for e in 0..2 {
                    nb += gi[a][d] * gi[c][e] * b[a][c] * b[d][e];
                }
            }
        }
    }
    Ok((nb, h))
}

/// Sampled geometry on a tensor grid of (s, θ) parameters, s-major.
#[derive(Debug, Clone, Serialize)]
pub struct ImmersionSample {
    pub kind: Kind,
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub metric: Vec<Metric2>,
    pub norm_b2: Vec<f64>,
    pub mean_h: Vec<f64>,
}

impl ImmersionSample {
    pub fn at(&self, i: usize, j: usize) -> usize {
        i * self.theta.len() + j
    }

    pub fn max_mean_curvature(&self) -> f64 {
        self.mean_h.iter().fold(0.0, |m, h| m.max(h.abs()))
    }

    /// Nodal |B|² along s at the first θ, for rotational surfaces.
    pub fn norm_b2_profile(&self) -> Vec<f64> {
        (0..self.s.len()).map(|i| self.norm_b2[self.at(i, 0)]).collect()
    }
}

pub fn sample<I: Immersion2 + ?Sized>(imm: &I, s: &[f64], theta: &[f64]) -> Result<ImmersionSample> {
    let kind = imm.kind();
    let mut out = ImmersionSample {
        kind,
        s: s.to_vec(),
        theta: theta.to_vec(),
        points: vec![],
        metric: vec![],
        norm_b2: vec![],
        mean_h: vec![],
    };
    for &si in s {
        for &tj in theta {
            let jet = imm.jet(si, tj)?;
            out.metric.push(induced_metric(kind, &jet)?);
            let (nb, h) = if jet.x.len() == 4 { second_fundamental(kind, &jet)? } else { (f64::NAN, f64::NAN) };
            out.norm_b2.push(nb);
            out.mean_h.push(h);
            out.points.push(jet.x);
        }
    }
    Ok(out)
}

/// A critical catenoid: the family member and boundary parameter meeting ∂𝔹³(r) orthogonally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatenoidSolution {
    pub kind: Kind,
    pub a: f64,
    pub s0: f64,
    pub r: f64,
    pub residual_phi0: f64,
    pub residual_conormal: f64,
}

impl CatenoidSolution {
    pub fn family(&self) -> CatenoidFamily {
        CatenoidFamily { kind: self.kind, a: self.a }
    }
}

/// Scanned relation between the family parameter and the ball radius.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyScan {
    pub kind: Kind,
    pub a: Vec<f64>,
    pub s0: Vec<f64>,
    pub r: Vec<f64>,
}

impl FamilyScan {
    pub fn range(&self) -> (f64, f64) {
        let lo = self.r.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

const SCAN_POINTS: usize = 160;
const S_SCAN_STEPS: usize = 300;

fn s_search_max(kind: Kind) -> f64 {
    match kind {
        Kind::Hyperbolic => 3.0,
        Kind::Spherical => std::f64::consts::FRAC_PI_2 - 1e-9,
    }
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// s₀(a): first zero of the orthogonality defect on (0, s_max].
pub fn boundary_parameter(family: &CatenoidFamily) -> Result<Option<f64>> {
    let smax = s_search_max(family.kind);
    let h = smax / S_SCAN_STEPS as f64;
    let mut prev_s = 0.5 * h;
    let mut prev = family.orthogonality_defect(prev_s)?;
    for i in 1..=S_SCAN_STEPS {
        let s = i as f64 * h;
        let d = match family.orthogonality_defect(s) {
            Ok(d) => d,
            Err(_) => return Ok(None),
        };
        if prev < 0.0 && d >= 0.0 {
            let root = bisect(|x| family.orthogonality_defect(x), prev_s, s, prev)?;
            return Ok(Some(root));
        }
        prev = d;
        prev_s = s;
    }
    Ok(None)
}

fn radius_of(kind: Kind, a: f64) -> Result<Option<(f64, f64)>> {
    let fam = CatenoidFamily::new(kind, a)?;
    Ok(match boundary_parameter(&fam)? {
        Some(s0) => Some((s0, fam.radius_at(s0)?)),
        None => None,
    })
}

fn scan_grid(kind: Kind) -> Vec<f64> {
    let m = SCAN_POINTS;
    match kind {
        Kind::Hyperbolic => (0..m).map(|i| 0.5 + 1e-3 * (9.5e3f64).powf(i as f64 / (m - 1) as f64)).collect(),
        Kind::Spherical => (0..m)
            .map(|i| {
                let u = i as f64 / (m - 1) as f64;
                -0.5 + 1e-3 + u * (0.5 - 1e-3 - SPHERICAL_A_GAP)
            })
            .collect(),
    }
}

/// Measure r(a) over the search interval. Fails if r(a) is not monotone
/// on the contiguous run of parameters that admit a boundary parameter.
pub fn scan_family(kind: Kind) -> Result<FamilyScan> {
    let mut out = FamilyScan { kind, a: vec![], s0: vec![], r: vec![] };
    let mut ended = false;
    for a in scan_grid(kind) {
        match radius_of(kind, a)? {
            Some((s0, r)) => {
                if ended {
                    return Err(Error::SolverFailure(format!(
                        "boundary parameter set is not contiguous in a (gap before a = {a})"
                    )));
                }
                out.a.push(a);
                out.s0.push(s0);
                out.r.push(r);
            }
            None => {
                if !out.a.is_empty() {
                    ended = true;
                }
            }
        }
    }
    if out.a.len() < 2 {
        return Err(Error::SolverFailure("family scan found no free-boundary members".into()));
    }
    let inc = out.r.windows(2).all(|w| w[1] > w[0]);
    let dec = out.r.windows(2).all(|w| w[1] < w[0]);
    if !inc && !dec {
        return Err(Error::SolverFailure("ball radius is not monotone in the family parameter".into()));
    }
    Ok(out)
}

fn cached_scan(kind: Kind) -> Result<&'static FamilyScan> {
    static SPH: OnceLock<std::result::Result<FamilyScan, String>> = OnceLock::new();
    static HYP: OnceLock<std::result::Result<FamilyScan, String>> = OnceLock::new();
    let cell = match kind {
        Kind::Spherical => &SPH,
        Kind::Hyperbolic => &HYP,
    };
    cell.get_or_init(|| scan_family(kind).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::SolverFailure(e.clone()))
}

/// Locate (a, s₀) whose catenoid piece is free boundary in 𝔹³(r).
pub fn find_critical_catenoid(kind: Kind, r: f64) -> Result<CatenoidSolution> {
    kind.check_radius(r)?;
    let scan = cached_scan(kind)?;
    let (lo, hi) = scan.range();
    if !(r >= lo && r <= hi) {
        return Err(Error::NoSolution { target: r, lo, hi });
    }
    let inc = scan.r[1] > scan.r[0];
    let i = (0..scan.r.len() - 1)
        .find(|&i| {
            let (r0, r1) = (scan.r[i], scan.r[i + 1]);
            (r0.min(r1)..=r0.max(r1)).contains(&r)
        })
        .ok_or_else(|| Error::SolverFailure("no bracketing interval in the family scan".into()))?;
    let defect = |a: f64| -> Result<f64> {
        match radius_of(kind, a)? {
            Some((_, ra)) => Ok(if inc { ra - r } else { r - ra }),
            None => Err(Error::SolverFailure(format!("boundary parameter lost at a = {a}"))),
        }
    };
    let (a0, a1) = (scan.a[i], scan.a[i + 1]);
    let f0 = defect(a0)?;
    let a = if f0 == 0.0 { a0 } else { bisect(defect, a0, a1, f0)? };
    let fam = CatenoidFamily::new(kind, a)?;
    let s0 =
        boundary_parameter(&fam)?.ok_or_else(|| Error::SolverFailure(format!("boundary parameter lost at a = {a}")))?;
    let (x0, _) = fam.axial_components(s0)?;
    let f = fam.radius(s0)?;
    let r_out = fam.radius_at(s0)?;
    Ok(CatenoidSolution {
        kind,
        a,
        s0,
        r: r_out,
        residual_phi0: (x0.v - kind.c(r)).abs(),
        residual_conormal: (f.d1 / f.v - kind.boundary_coefficient(r)).abs(),
    })
}

/// Attainable radius range of the free-boundary family, as scanned.
pub fn attainable_range(kind: Kind) -> Result<(f64, f64)> {
    Ok(cached_scan(kind)?.range())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hyperbolic_a1_at_s0() {
        let fam = CatenoidFamily::new(Kind::Hyperbolic, 1.0).unwrap();
        let x = fam.point(0.0, 0.3).unwrap();
        let want = [1.5f64.sqrt(), 0.0, 0.5f64.sqrt() * 0.3f64.cos(), 0.5f64.sqrt() * 0.3f64.sin()];
        for i in 0..4 {
            assert!((x[i] - want[i]).abs() < 1e-15);
        }
        assert!((inner(Kind::Hyperbolic, &x, &x) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn clifford_member() {
        let fam = CatenoidFamily::new(Kind::Spherical, 0.0).unwrap();
        for s in [0.1, 0.7, 1.3] {
            let x = fam.point(s, 0.4).unwrap();
            let rad01 = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let rad23 = (x[2] * x[2] + x[3] * x[3]).sqrt();
            assert!((rad01 - 0.5f64.sqrt()).abs() < 1e-15);
            assert!((rad23 - 0.5f64.sqrt()).abs() < 1e-15);
            assert!((inner(Kind::Spherical, &x, &x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn family_ranges_enforced() {
        assert!(CatenoidFamily::new(Kind::Hyperbolic, 0.5).is_err());
        assert!(CatenoidFamily::new(Kind::Spherical, -0.5).is_err());
        assert!(CatenoidFamily::new(Kind::Spherical, 0.1).is_err());
    }

    #[test]
    fn varphi_converged_in_panels() {
        let fam = CatenoidFamily::new(Kind::Hyperbolic, 1.0).unwrap();
        let s = 1.7;
        let base = fam.varphi(s).unwrap();
        let c = fam.phi_constant();
        let doubled = Composite::new(PHI_ORDER).integrate(
            |t| c / (fam.axial2(t).v * fam.angular2(t).v.sqrt()),
            0.0,
            s,
            2 * ((s * PHI_PANELS_PER_UNIT).ceil() as usize + 1),
        );
        assert!((base - doubled).abs() < 1e-12);
        assert_eq!(fam.varphi(0.0).unwrap(), 0.0);
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let h = 1e-5;
        for fam in
            [CatenoidFamily::new(Kind::Hyperbolic, 0.8).unwrap(), CatenoidFamily::new(Kind::Spherical, -0.42).unwrap()]
        {
            let (s, th) = (0.37, 0.9);
            let j = fam.jet(s, th).unwrap();
            let jp = fam.jet(s + h, th).unwrap();
            let jm = fam.jet(s - h, th).unwrap();
            for i in 0..4 {
                assert!(((jp.x[i] - jm.x[i]) / (2.0 * h) - j.xs[i]).abs() < 1e-8);
                assert!(((jp.xs[i] - jm.xs[i]) / (2.0 * h) - j.xss[i]).abs() < 1e-7);
                assert!(((jp.x[i] - 2.0 * j.x[i] + jm.x[i]) / (h * h) - j.xss[i]).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn catenoid_metric_is_ds2_plus_f2() {
        for fam in
            [CatenoidFamily::new(Kind::Hyperbolic, 1.0).unwrap(), CatenoidFamily::new(Kind::Spherical, -0.3).unwrap()]
        {
            for s in [-0.6, -0.1, 0.0, 0.25, 0.8] {
                let j = fam.jet(s, 1.1).unwrap();
                let g = induced_metric(fam.kind, &j).unwrap();
                assert!((g[0][0] - 1.0).abs() < 1e-12, "g_ss = {}", g[0][0]);
                assert!(g[0][1].abs() < 1e-12);
                assert!((g[1][1] - fam.angular2(s).v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ball_chart_metric_and_geodesic() {
        let ch = BallChart::new(Kind::Spherical, 2, 3, 0.7).unwrap();
        for t in [0.1, 0.4, 0.69] {
            let j = ch.jet(t, 0.3).unwrap();
            let g = induced_metric(Kind::Spherical, &j).unwrap();
            assert!((g[0][0] - 1.0).abs() < 1e-14);
            assert!(g[0][1].abs() < 1e-14);
            assert!((g[1][1] - t.sin().powi(2)).abs() < 1e-14);
            let (b2, h) = second_fundamental(Kind::Spherical, &j).unwrap();
            assert!(b2.abs() < 1e-24 && h.abs() < 1e-12);
        }
        let x = ch.ball_point(0.7, &[0.0]).unwrap();
        assert!((x[0] - 0.7f64.cos()).abs() < 1e-15 && (x[1] - 0.7f64.sin()).abs() < 1e-15);
        assert_eq!(ch.ball_point(0.0, &[1.0]).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(ch.ball_point(0.8, &[0.0]).is_err());
        let h3 = BallChart::new(Kind::Hyperbolic, 3, 4, 1.1).unwrap();
        let y = h3.ball_point(0.4, &[std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        let want = [0.4f64.cosh(), 0.0, 0.4f64.sinh(), 0.0, 0.0];
        for i in 0..5 {
            assert!((y[i] - want[i]).abs() < 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn catenoid_points_on_quadric(s in -1.2f64..1.2, th in 0.0f64..6.3, hyper in any::<bool>(),
                                      u in 0.0f64..1.0) {
            let fam = if hyper {
                CatenoidFamily::new(Kind::Hyperbolic, 0.51 + 3.0 * u).unwrap()
            } else {
                CatenoidFamily::new(Kind::Spherical, -0.49 + 0.49 * u).unwrap()
            };
            let x = fam.point(s, th).unwrap();
            let q = inner(fam.kind, &x, &x);
            prop_assert!((q - fam.kind.curvature()).abs() <= 1e-9 * (1.0 + x[0] * x[0]));
        }

        #[test]
        fn catenoids_are_minimal(s in -0.9f64..0.9, hyper in any::<bool>(), u in 0.0f64..1.0) {
            let fam = if hyper {
                CatenoidFamily::new(Kind::Hyperbolic, 0.55 + 2.0 * u).unwrap()
            } else {
                CatenoidFamily::new(Kind::Spherical, -0.48 + 0.47 * u).unwrap()
            };
            let j = fam.jet(s, 0.2).unwrap();
            let (_, h) = second_fundamental(fam.kind, &j).unwrap();
            prop_assert!(h.abs() <= 1e-6);
        }

        #[test]
        fn varphi_is_odd(s in 0.0f64..1.5, a in 0.51f64..4.0) {
            let fam = CatenoidFamily::new(Kind::Hyperbolic, a).unwrap();
            prop_assert!((fam.varphi(s).unwrap() + fam.varphi(-s).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn critical_catenoid_conditions() {
        for (kind, r) in [(Kind::Hyperbolic, 1.0), (Kind::Spherical, 0.6)] {
            let sol = find_critical_catenoid(kind, r).unwrap();
            assert!(sol.residual_phi0 < 1e-9, "{sol:?}");
            assert!(sol.residual_conormal < 1e-9, "{sol:?}");
            assert!((sol.r - r).abs() < 1e-9);
            let again = find_critical_catenoid(kind, r).unwrap();
            assert_eq!(sol.a.to_bits(), again.a.to_bits());
            assert_eq!(sol.s0.to_bits(), again.s0.to_bits());
        }
    }

    #[test]
    fn unattainable_radius_reports_range() {
        match find_critical_catenoid(Kind::Hyperbolic, 40.0) {
            Err(Error::NoSolution { lo, hi, .. }) => assert!(lo < hi),
            other => panic!("{other:?}"),
        }
    }
}

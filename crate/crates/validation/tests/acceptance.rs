//! One pass/fail line per acceptance criterion. Criteria that disagree with the
//! computation are reported as failures; the run fails if any line fails.

use std::time::Instant;

use fbms_core::discretize::{assemble_tri, mesh_geodesic_disk, RadialProblem};
use fbms_core::functionals::{
    bound_checks, degeneration_experiment, radial_functional, BoundConfig, Degeneration, DegenerationConfig,
    FunctionalKind,
};
use fbms_core::index_forms::{
    ball_index_report, catenoid_index_report, radial_spectrum, rotation_field_energy, spectral_index, IndexReport,
    SPECTRAL_TIE_TOL,
};
use fbms_core::robin_solver::steklov_alpha_spectrum;
use fbms_core::suites::{ode_suite, robin_suite};
use fbms_core::surfaces::{find_critical_catenoid, BallChart, CatenoidFamily, CatenoidSolution};
use fbms_core::Kind;

const BALL_ELEMENTS: usize = 2000;
const CATENOID_ELEMENTS: usize = 2000;
const INDEX_ELEMENTS: usize = 400;
const MMAX: usize = 6;
/// S_E of the rotation field converges like h²: 2.1e-7 here against 1e-6.
const ROTATION_ELEMENTS: usize = 3200;

const CATENOIDS: [(Kind, f64); 5] = [
    (Kind::Hyperbolic, 0.8),
    (Kind::Hyperbolic, 1.0),
    (Kind::Hyperbolic, 1.2),
    (Kind::Spherical, 0.5),
    (Kind::Spherical, 0.6),
];

struct Ledger {
    lines: Vec<(String, bool)>,
}

impl Ledger {
    fn record(&mut self, id: usize, pass: bool, detail: String) {
        let line = format!("[{}] criterion {id:>2}: {detail}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((line, pass));
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn closed_forms(kind: Kind, r: f64) -> (f64, f64) {
    let coef = kind.boundary_coefficient(r);
    (-kind.curvature() / coef, coef)
}

fn crit1(l: &mut Ledger) {
    let mut pass = true;
    let mut parts = vec![];
    for (kind, k, n, r) in [(Kind::Spherical, 2, 3, 0.7), (Kind::Spherical, 2, 4, 0.7), (Kind::Hyperbolic, 3, 4, 1.1)] {
        let t = Instant::now();
        let chart = BallChart::new(kind, k, n, r).unwrap();
        let p = RadialProblem::ball(&chart, BALL_ELEMENTS);
        let spec = radial_spectrum(&p, kind.frequency(k), 2, 2).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let (s0, s1) = closed_forms(kind, r);
        let e0 = rel(spec.sigmas[0], s0);
        let block: Vec<f64> = spec.sigmas.iter().copied().filter(|s| rel(*s, s1) <= 1e-6).collect();
        let e1 = rel(spec.sigmas[1], s1);
        let ok = e0 <= 1e-6 && e1 <= 1e-6 && block.len() == k && secs < 1.0;
        pass &= ok;
        parts.push(format!("{kind:?}({k},{n},{r}) err0 {e0:.1e} err1 {e1:.1e} mult {} {secs:.2}s", block.len()));
    }
    l.record(1, pass, format!("ball spectra 1D (rel <= 1e-6, mult k, < 1 s): {}", parts.join("; ")));
}

fn crit2(l: &mut Ledger) {
    let r: f64 = 0.7;
    let p = RadialProblem::ball(&BallChart::new(Kind::Spherical, 2, 3, r).unwrap(), BALL_ELEMENTS);
    let one_d = radial_spectrum(&p, 2.0, 2, 2).unwrap();
    let mut errs = vec![];
    for level in 2..=4 {
        let f = assemble_tri(&mesh_geodesic_disk(Kind::Spherical, r, level).unwrap()).unwrap();
        let s = steklov_alpha_spectrum(&f, 2.0, 4).unwrap();
        errs.push([(s.sigmas[0] - one_d.sigmas[0]).abs(), (s.sigmas[1] - one_d.sigmas[1]).abs()]);
    }
    let orders: Vec<f64> = (0..2).flat_map(|j| errs.windows(2).map(move |w| (w[0][j] / w[1][j]).log2())).collect();
    let last = errs[2];
    let pass = last[0] <= 1e-3 && last[1] <= 1e-3 && orders.iter().all(|&o| o >= 1.8);
    l.record(
        2,
        pass,
        format!(
            "spherical cap on triangles, level 4: |d sigma0| {:.1e}, |d sigma1| {:.1e} (<= 1e-3); observed orders {:?} (>= 1.8)",
            last[0],
            last[1],
            orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    );
}

/// First s > 0 where the neck-to-boundary curve leaves the ball of radius r.
fn exit_parameter(fam: &CatenoidFamily, r: f64) -> Option<f64> {
    let target = fam.kind.c(r);
    let g = |s: f64| fam.axial_components(s).ok().map(|(x0, _)| x0.v - target);
    let smax = match fam.kind {
        Kind::Hyperbolic => 3.0,
        Kind::Spherical => 1.5,
    };
    let steps = 300;
    let mut prev = (0.0, g(0.0)?);
    for i in 1..=steps {
        let s = smax * i as f64 / steps as f64;
        let v = g(s)?;
        if (v < 0.0) != (prev.1 < 0.0) {
            let (mut lo, mut hi, flo) = (prev.0, s, prev.1);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = g(mid)?;
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev = (s, v);
    }
    None
}

/// Conormal defect at the exit point, as a function of the family parameter.
fn conormal_defect(kind: Kind, a: f64, r: f64) -> Option<(f64, f64)> {
    let fam = CatenoidFamily::new(kind, a).ok()?;
    let s = exit_parameter(&fam, r)?;
    let f = fam.radius(s).ok()?;
    Some((f.d1 / f.v - kind.boundary_coefficient(r), s))
}

/// Brute-force oracle: grid over a, exit point by the sphere condition, bisection on the conormal defect.
fn grid_oracle(kind: Kind, r: f64) -> Vec<(f64, f64)> {
    let m = 1500;
    let grid: Vec<f64> = match kind {
        Kind::Hyperbolic => (0..m).map(|i| 0.5 + 1e-3 * 1e4f64.powf(i as f64 / (m - 1) as f64)).collect(),
        Kind::Spherical => (0..m).map(|i| -0.499 + 0.998 * i as f64 / (m - 1) as f64).collect(),
    };
    let vals: Vec<Option<f64>> = grid.iter().map(|&a| conormal_defect(kind, a, r).map(|d| d.0)).collect();
    let mut roots = vec![];
    for i in 0..m - 1 {
        if let (Some(f0), Some(f1)) = (vals[i], vals[i + 1]) {
            if (f0 < 0.0) != (f1 < 0.0) {
                let (mut lo, mut hi) = (grid[i], grid[i + 1]);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    match conormal_defect(kind, mid, r) {
                        Some((fm, _)) if (fm < 0.0) == (f0 < 0.0) => lo = mid,
                        Some(_) => hi = mid,
                        None => break,
                    }
                }
                let a = 0.5 * (lo + hi);
                if let Some((_, s)) = conormal_defect(kind, a, r) {
                    roots.push((a, s));
                }
            }
        }
    }
    roots
}

fn crit3(l: &mut Ledger) -> Vec<CatenoidSolution> {
    let mut pass = true;
    let mut parts = vec![];
    let mut sols = vec![];
    for (kind, r) in CATENOIDS {
        let t = Instant::now();
        let sol = find_critical_catenoid(kind, r).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let oracle = grid_oracle(kind, r);
        let dist = oracle.iter().map(|(a, s)| (a - sol.a).abs().max((s - sol.s0).abs())).fold(f64::INFINITY, f64::min);
        let res = sol.residual_phi0.max(sol.residual_conormal);
        let ok = res <= 1e-9 && dist <= 1e-6 && oracle.len() == 1 && secs < 10.0;
        pass &= ok;
        parts.push(format!("{kind:?} {r}: residual {res:.1e}, oracle {dist:.1e} ({} roots), {secs:.2}s", oracle.len()));
        sols.push(sol);
    }
    l.record(3, pass, format!("critical catenoids (residual <= 1e-9, oracle <= 1e-6, < 10 s): {}", parts.join("; ")));
    sols
}

fn crit4(l: &mut Ledger, sols: &[CatenoidSolution]) {
    let mut pass = true;
    let mut parts = vec![];
    for sol in sols {
        let p = RadialProblem::catenoid(sol, CATENOID_ELEMENTS);
        let spec = radial_spectrum(&p, sol.kind.frequency(2), 3, 3).unwrap();
        let (s0, s1) = closed_forms(sol.kind, sol.r);
        let e0 = (spec.sigmas[0] - s0).abs();
        let mult = spec.sigmas.iter().filter(|s| (*s - s1).abs() <= 1e-4).count();
        let e1 = spec.sigmas[1..4].iter().map(|s| (s - s1).abs()).fold(0.0, f64::max);
        let ind_s = spectral_index(&spec, s1, SPECTRAL_TIE_TOL).unwrap().count;
        let ok = e0 <= 1e-4 && e1 <= 1e-4 && mult == 3 && ind_s == 1;
        pass &= ok;
        parts.push(format!("{:?} {:.1}: err0 {e0:.1e} err1 {e1:.1e} mult {mult} Ind_S {ind_s}", sol.kind, sol.r));
    }
    l.record(4, pass, format!("catenoid spectra (<= 1e-4, mult 3, Ind_S = 1): {}", parts.join("; ")));
}

fn crit5_7(l: &mut Ledger, sols: &[CatenoidSolution]) {
    let reports: Vec<IndexReport> =
        sols.iter().map(|s| catenoid_index_report(s, MMAX, INDEX_ELEMENTS).unwrap()).collect();
    let mut pass = true;
    let mut parts = vec![];
    for (sol, rep) in sols.iter().zip(&reports) {
        let high_modes_zero = rep.morse.per_form.iter().filter(|f| f.mode >= 2).all(|f| f.index == 0);
        let rot = rotation_field_energy(sol, ROTATION_ELEMENTS).unwrap();
        let ind_e = rep.ind_e.unwrap();
        let ok = rep.ind == 4 && high_modes_zero && ind_e == 3 && rep.nullity_estimate >= 1 && rot.abs() <= 1e-6;
        pass &= ok;
        parts.push(format!(
            "{:?} {:.1}: Ind {} Ind_E {} (V0=0: {}) nullity {} S_E(rot) {rot:.1e} modes>=2 clean {high_modes_zero}",
            sol.kind,
            sol.r,
            rep.ind,
            ind_e,
            rep.ind_e_no_time.unwrap(),
            rep.nullity_estimate
        ));
    }
    l.record(5, pass, format!("catenoid Morse 4, energy 3, nullity >= 1, S_E(rot) <= 1e-6: {}", parts.join("; ")));

    let mut pass = true;
    let mut parts = vec![];
    for rep in &reports {
        let c = rep.checks.as_ref().unwrap();
        let ok = c.ind_ge_ind_s_plus_n && c.ind_le_n_ind_s_plus_moduli && c.ind_e_le_n_ind_s;
        pass &= ok;
        parts.push(format!(
            "{:?} {:.1}: {}+{} <= {} <= {}*{}+{} [{} {}], Ind_E {} <= {} [{}]",
            rep.kind,
            rep.r,
            rep.ind_s,
            rep.n,
            rep.ind,
            rep.n,
            rep.ind_s,
            rep.dim_moduli,
            c.ind_ge_ind_s_plus_n,
            c.ind_le_n_ind_s_plus_moduli,
            rep.ind_e.unwrap(),
            rep.n * rep.ind_s,
            c.ind_e_le_n_ind_s
        ));
    }
    l.record(7, pass, format!("inequality chain on catenoids: {}", parts.join("; ")));
}

fn crit6(l: &mut Ledger) {
    let mut pass = true;
    let mut parts = vec![];
    for (kind, r) in [(Kind::Spherical, 0.7), (Kind::Hyperbolic, 1.0)] {
        for (k, n) in [(2, 3), (2, 4), (3, 4)] {
            let rep = ball_index_report(&BallChart::new(kind, k, n, r).unwrap(), MMAX, BALL_ELEMENTS).unwrap();
            let gap = rep
                .morse
                .per_form
                .iter()
                .flat_map(|f| f.negatives.iter().map(|v| v.abs()))
                .fold(f64::INFINITY, f64::min);
            let want = 2 * (n - k);
            let ok = rep.ind == want && gap >= 1e-6;
            pass &= ok;
            parts.push(format!("{kind:?}({k},{n}): Ind {} want {want}, gap {gap:.2e}", rep.ind));
        }
    }
    l.record(6, pass, format!("ball Morse index 2(n-k), gap >= 1e-6: {}", parts.join("; ")));
}

fn crit8(l: &mut Ledger, sols: &[CatenoidSolution]) {
    let mut worst: f64 = 0.0;
    for sol in sols.iter().filter(|s| s.kind == Kind::Hyperbolic) {
        let v = radial_functional(FunctionalKind::Omega, &RadialProblem::catenoid(sol, CATENOID_ELEMENTS), sol.r, 1)
            .unwrap();
        worst = worst.max(rel(v.value, 2.0 * v.parts.area));
    }
    let report = bound_checks(&BoundConfig::default()).unwrap();
    let pass = worst <= 1e-6 && report.config.samples == 100 && report.omega_violations == 0;
    l.record(
        8,
        pass,
        format!(
            "Omega(catenoid) = 2|S| worst rel {worst:.1e} (<= 1e-6); {} random annulus metrics ({} evaluations), {} violations, min Omega {:.3}",
            report.config.samples, report.omega_samples, report.omega_violations, report.omega_min
        ),
    );
}

fn crit9(l: &mut Ledger) {
    let mut pass = true;
    let mut parts = vec![];
    for kind in
        [Degeneration::ThetaBelow, Degeneration::OmegaAbove, Degeneration::SteklovLimit, Degeneration::OmegaFloor]
    {
        let table = degeneration_experiment(&DegenerationConfig::new(kind)).unwrap();
        pass &= table.trend.holds;
        parts.push(format!("{kind:?} {} ({})", table.trend.holds, table.trend.detail));
    }
    l.record(9, pass, format!("degeneration trends: {}", parts.join("; ")));
}

fn crit10(l: &mut Ledger) {
    let s = ode_suite().unwrap();
    let residual = s.reports.iter().flat_map(|r| r.rows.iter().map(|x| x.residual)).fold(0.0, f64::max);
    let poles = s.reports.iter().flat_map(|r| &r.poles).filter(|p| p.pass).count();
    let pole_total: usize = s.reports.iter().map(|r| r.poles.len()).sum();
    let mus: Vec<String> =
        s.reports.iter().filter_map(|r| r.mu.as_ref()).map(|m| format!("{:.3}/{:.0e}", m.mu, m.error)).collect();
    let ident = s.identities.iter().map(|i| i.error).fold(0.0, f64::max);
    l.record(
        10,
        s.pass,
        format!(
            "ODE suite: max first-solution residual {residual:.1e} (<= 1e-8); pole rates {poles}/{pole_total}; mu/err {}; 2F1 max err {ident:.1e}",
            mus.join(" ")
        ),
    );
}

fn crit11(l: &mut Ledger) {
    let t = Instant::now();
    let s = robin_suite(3, 7).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let orth = s.entries.iter().map(|e| e.checks.orthogonality).fold(0.0, f64::max);
    let passed = s.entries.iter().filter(|e| e.pass).count();
    l.record(
        11,
        s.pass && secs < 300.0,
        format!("Robin suite: {passed}/{} geometries pass, max orthogonality {orth:.1e}, {secs:.2}s", s.entries.len()),
    );
}

#[test]
fn acceptance() {
    let mut l = Ledger { lines: vec![] };
    crit1(&mut l);
    crit2(&mut l);
    let sols = crit3(&mut l);
    crit4(&mut l, &sols);
    crit5_7(&mut l, &sols);
    crit6(&mut l);
    crit8(&mut l, &sols);
    crit9(&mut l);
    crit10(&mut l);
    crit11(&mut l);
    let failed: Vec<&String> = l.lines.iter().filter(|x| !x.1).map(|x| &x.0).collect();
    println!("{} of {} criteria pass", l.lines.len() - failed.len(), l.lines.len());
    assert!(
        failed.is_empty(),
        "failing criteria:\n{}",
        failed.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("\n")
    );
}

//! Separated radial ODEs: hypergeometric closed forms, reduction of order,
//! residual checks and pole behaviour.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::Composite;
use crate::spaceform::Kind;
use crate::surfaces::{CatenoidFamily, CatenoidSolution, Jet1};

const SERIES_RTOL: f64 = 1e-16;
const SERIES_MAX_TERMS: usize = 2_000_000;

fn nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn series_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        let num = (a + nf) * (b + nf);
        if num == 0.0 {
            return Ok(sum);
        }
        if c + nf == 0.0 {
            return Err(Error::DegenerateParameter(format!(
                "2F1 with c = {c} does not terminate before c + n = 0; use the reduction-of-order route"
            )));
        }
        term *= num / ((c + nf) * (nf + 1.0)) * x;
        sum += term;
        // geometric tail bound once the term ratio has settled near x
        if n > 4 && term.abs() <= SERIES_RTOL * (1.0 - x.abs()) * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::SolverFailure(format!("2F1 series did not converge at x = {x}")))
}

/// Gauss hypergeometric ₂F₁(a, b; c; x) for |x| < 1.
///
/// Arguments below −1/2 go through the Pfaff transformation so the series
/// argument lies in (1/3, 1/2).
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::Domain(format!("2F1 needs |x| < 1, got {x}")));
    }
    let terminates = nonpositive_integer(a) || nonpositive_integer(b);
    if nonpositive_integer(c) && !terminates {
        return Err(Error::DegenerateParameter(format!(
            "2F1 with c = {c} a nonpositive integer; use the reduction-of-order route"
        )));
    }
    if x < -0.5 && !nonpositive_integer(c - b) {
        let z = x / (x - 1.0);
        return Ok((1.0 - x).powf(-a) * series_2f1(a, c - b, c, z)?);
    }
    series_2f1(a, b, c, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OdeKind {
    /// Mode m on a geodesic k-ball, frequency ±k.
    Ball { space: Kind, k: usize, m: usize },
    /// Mode m on a catenoid of the family, frequency ±2.
    Catenoid { space: Kind, a: f64, m: usize },
}

/// a″ + p a′ + q a = 0 with p = w′/w.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialOde {
    pub kind: OdeKind,
    pub lo: f64,
    pub hi: f64,
    /// Pole at t = 0 (ball charts).
    pub pole: bool,
    pub symmetric: bool,
}

pub type Candidate<'a> = Box<dyn Fn(f64) -> Result<Jet1> + 'a>;

impl RadialOde {
    pub fn ball(space: Kind, k: usize, m: usize, r: f64) -> Result<RadialOde> {
        if k < 2 {
            return Err(Error::Invalid(format!("ball dimension k = {k} < 2")));
        }
        space.check_radius(r)?;
        Ok(RadialOde { kind: OdeKind::Ball { space, k, m }, lo: 0.0, hi: r, pole: true, symmetric: false })
    }

    pub fn catenoid(sol: &CatenoidSolution, m: usize) -> RadialOde {
        RadialOde {
            kind: OdeKind::Catenoid { space: sol.kind, a: sol.a, m },
            lo: -sol.s0,
            hi: sol.s0,
            pole: false,
            symmetric: true,
        }
    }

    pub fn space(&self) -> Kind {
        match self.kind {
            OdeKind::Ball { space, .. } | OdeKind::Catenoid { space, .. } => space,
        }
    }

    fn family(&self) -> Option<CatenoidFamily> {
        match self.kind {
            OdeKind::Catenoid { space, a, .. } => Some(CatenoidFamily { kind: space, a }),
            _ => None,
        }
    }

    fn check_point(&self, t: f64) -> Result<()> {
        if self.pole && t <= 0.0 {
            return Err(Error::Domain(format!("t = {t} is at or beyond the pole")));
        }
        Ok(())
    }

    /// (w, p, q) at t.
    pub fn coefficients(&self, t: f64) -> Result<(f64, f64, f64)> {
        self.check_point(t)?;
        match self.kind {
            OdeKind::Ball { space, k, m } => {
                let (c, s) = (space.c(t), space.s(t));
                let kf = k as f64;
                let mf = m as f64;
                let lam = mf * (mf + kf - 2.0) / (s * s);
                Ok((s.powi(k as i32 - 1), (kf - 1.0) * c / s, space.frequency(k) - lam))
            }
            OdeKind::Catenoid { space, m, .. } => {
                let f = self.family().unwrap().radius(t)?;
                let mf = m as f64;
                Ok((f.v, f.d1 / f.v, space.frequency(2) - mf * mf / (f.v * f.v)))
            }
        }
    }

    /// Closed-form regular solutions with analytic derivatives.
    pub fn first_solutions(&self) -> Vec<(&'static str, Candidate<'_>)> {
        match self.kind {
            OdeKind::Ball { space, m, .. } => {
                let kap = space.curvature();
                match m {
                    0 => vec![(
                        "c(t)",
                        Box::new(move |t: f64| {
                            let (c, s) = (space.c(t), space.s(t));
                            Ok(Jet1 { v: c, d1: -kap * s, d2: -kap * c })
                        }) as Candidate,
                    )],
                    1 => vec![(
                        "s(t)",
                        Box::new(move |t: f64| {
                            let (c, s) = (space.c(t), space.s(t));
                            Ok(Jet1 { v: s, d1: c, d2: -kap * s })
                        }) as Candidate,
                    )],
                    _ => vec![],
                }
            }
            OdeKind::Catenoid { m, .. } => {
                let fam = self.family().unwrap();
                match m {
                    0 => vec![
                        ("rho c(phi)", Box::new(move |s: f64| Ok(fam.axial_components(s)?.0)) as Candidate),
                        ("rho s(phi)", Box::new(move |s: f64| Ok(fam.axial_components(s)?.1)) as Candidate),
                    ],
                    1 => vec![("f", Box::new(move |s: f64| fam.radius(s)) as Candidate)],
                    _ => vec![],
                }
            }
        }
    }

    /// Reduction-of-order reference point: the outer end for pole problems, 0 otherwise.
    pub fn reference(&self) -> f64 {
        if self.pole {
            self.hi
        } else {
            0.0
        }
    }

    /// h(t) = ∫_ref^t dτ / (w y₁²).
    fn reduction_integral(&self, y1: &Candidate<'_>, t: f64) -> Result<f64> {
        self.check_point(t)?;
        let t0 = self.reference();
        if t == t0 {
            return Ok(0.0);
        }
        let rule = Composite::new(10);
        let g = |tau: f64| -> f64 {
            let (w, _, _) = self.coefficients(tau).expect("interior point");
            let y = y1(tau).expect("interior point").v;
            1.0 / (w * y * y)
        };
        if self.pole {
            // τ = e^u resolves the pole behaviour
            let (u0, u1) = (t0.ln(), t.ln());
            let panels = (4.0 * (u1 - u0).abs()).ceil() as usize + 4;
            Ok(rule.integrate(|u| g(u.exp()) * u.exp(), u0, u1, panels))
        } else {
            let panels = (8.0 * (t - t0).abs()).ceil() as usize + 2;
            Ok(rule.integrate(g, t0, t, panels))
        }
    }

    /// y₂ = y₁ h with analytic derivatives (h′ = 1/(w y₁²), h″ = −h′(p + 2y₁′/y₁)).
    pub fn second_solution_jet(&self, t: f64) -> Result<Jet1> {
        let first = self.first_solutions();
        let Some((_, y1)) = first.first() else {
            return Err(Error::Invalid("no tabulated first solution for this mode".into()));
        };
        let h = self.reduction_integral(y1, t)?;
        let y = y1(t)?;
        let (w, p, _) = self.coefficients(t)?;
        let g = 1.0 / (w * y.v * y.v);
        let dg = -g * (p + 2.0 * y.d1 / y.v);
        Ok(Jet1 { v: y.v * h, d1: y.d1 * h + y.v * g, d2: y.d2 * h + 2.0 * y.d1 * g + y.v * dg })
    }

    pub fn second_solution(&self, t: f64) -> Result<f64> {
        Ok(self.second_solution_jet(t)?.v)
    }

    /// max |a″ + p a′ + q a| over the samples.
    pub fn ode_residual(&self, candidate: &dyn Fn(f64) -> Result<Jet1>, samples: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &t in samples {
            let (_, p, q) = self.coefficients(t)?;
            let a = candidate(t)?;
            worst = worst.max((a.d2 + p * a.d1 + q * a.v).abs());
        }
        Ok(worst)
    }

    /// Wronskian of (y₁, y₂) at t, normalized by |y₁|·|y₂|′-scale.
    pub fn normalized_wronskian(&self, t: f64) -> Result<f64> {
        let first = self.first_solutions();
        let y1 = first.first().ok_or_else(|| Error::Invalid("no first solution".into()))?.1(t)?;
        let y2 = self.second_solution_jet(t)?;
        let w = y1.v * y2.d1 - y1.d1 * y2.v;
        let n1 = y1.v.hypot(y1.d1);
        let n2 = y2.v.hypot(y2.d1);
        Ok(w / (n1 * n2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleBehaviour {
    Bounded,
    Logarithmic,
    PowerLaw,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularityReport {
    pub ode: RadialOde,
    pub t: Vec<f64>,
    pub second: Vec<f64>,
    pub first: Vec<f64>,
    /// log₁₀ growth of |y₂| per decade towards the pole.
    pub decade_growth: Vec<f64>,
    pub behaviour: PoleBehaviour,
    /// Fitted exponent e in |y₂| ~ t^e (power-law case).
    pub exponent: Option<f64>,
    pub first_bounded: bool,
}

pub const POLE_SAMPLES: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Second solution near the pole: power-law or logarithmic blow-up.
pub fn singularity_check(ode: &RadialOde) -> Result<SingularityReport> {
    if !ode.pole {
        return Err(Error::Precondition("singularity check needs a pole at t = 0".into()));
    }
    let first = ode.first_solutions();
    let y1 = &first.first().ok_or_else(|| Error::Invalid("no first solution".into()))?.1;
    let t = POLE_SAMPLES.to_vec();
    let second = t.iter().map(|&x| ode.second_solution(x)).collect::<Result<Vec<_>>>()?;
    let firstv = t.iter().map(|&x| Ok(y1(x)?.v)).collect::<Result<Vec<_>>>()?;
    let decade_growth: Vec<f64> = second.windows(2).map(|w| (w[1].abs() / w[0].abs()).log10()).collect();
    let incs: Vec<f64> = second.windows(2).map(|w| w[1].abs() - w[0].abs()).collect();
    let growing = incs.iter().all(|&d| d > 0.0);
    let (behaviour, exponent) = if !growing {
        (PoleBehaviour::Bounded, None)
    } else if decade_growth.iter().all(|&g| g > 0.5) {
        let e = -decade_growth.last().unwrap();
        (PoleBehaviour::PowerLaw, Some(e))
    } else if (incs[1] / incs[0] - 1.0).abs() < 0.1 {
        (PoleBehaviour::Logarithmic, None)
    } else {
        (PoleBehaviour::Bounded, None)
    };
    // no growth toward the pole
    let first_bounded = firstv.windows(2).all(|w| w[1].abs() <= 1.01 * w[0].abs());
    Ok(SingularityReport { ode: *ode, first_bounded, t, second, first: firstv, decade_growth, behaviour, exponent })
}

/// The ₂F₁ closed form of the m = 0 spherical-ball reduction integral,
/// z(t) = sin^{2−k}t ₂F₁(3/2, 1−k/2; 2−k/2; sin²t)/(2−k), with z′ = 1/(sin^{k−1}t cos²t).
pub fn ball_closed_form(k: usize, t: f64) -> Result<f64> {
    if k == 2 {
        return Err(Error::DegenerateParameter("k = 2 has no power-law closed form".into()));
    }
    let kf = k as f64;
    let s = t.sin();
    Ok(s.powf(2.0 - kf) * gauss_2f1(1.5, 1.0 - kf / 2.0, 2.0 - kf / 2.0, s * s)? / (2.0 - kf))
}

/// Hyperbolic k = 2 closed form 1/cosh t + log tanh(t/2).
pub fn hyperbolic_disk_closed_form(t: f64) -> f64 {
    1.0 / t.cosh() + (0.5 * t).tanh().ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuReport {
    pub mu: f64,
    /// Robin eigenvalue of the odd m = 1 mode: boundary coefficient + μ.
    pub eigenvalue: f64,
    pub ratio_plus: f64,
    pub ratio_minus: f64,
}

/// μ = 1/(f(s₀)³ ∫₀^{s₀} f⁻³) for the odd m = 1 second solution.
pub fn mu_value(sol: &CatenoidSolution) -> Result<MuReport> {
    let ode = RadialOde::catenoid(sol, 1);
    let fam = sol.family();
    let f0 = fam.radius(sol.s0)?.v;
    let h = ode.second_solution(sol.s0)? / f0;
    let mu = 1.0 / (f0.powi(3) * h);
    let plus = ode.second_solution_jet(sol.s0)?;
    let minus = ode.second_solution_jet(-sol.s0)?;
    Ok(MuReport {
        mu,
        eigenvalue: sol.kind.boundary_coefficient(sol.r) + mu,
        ratio_plus: plus.d1 / plus.v,
        ratio_minus: -minus.d1 / minus.v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::find_critical_catenoid;
    use proptest::prelude::*;

    #[test]
    fn hypergeometric_identities() {
        assert_eq!(gauss_2f1(0.3, 0.7, 1.1, 0.0).unwrap(), 1.0);
        assert!((gauss_2f1(1.0, 1.0, 2.0, 0.5).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((gauss_2f1(0.5, 0.8, 0.8, 0.3).unwrap() - 0.7f64.powf(-0.5)).abs() < 1e-14);
        // −ln(1−x)/x on both sides of the Pfaff switch and near 1
        for x in [-0.9, -0.6, -0.2, 0.7, 0.95] {
            let want = -(1.0f64 - x).ln() / x;
            assert!((gauss_2f1(1.0, 1.0, 2.0, x).unwrap() - want).abs() < 1e-13, "x = {x}");
        }
        assert!(matches!(gauss_2f1(1.5, 0.5, -1.0, 0.3), Err(Error::DegenerateParameter(_))));
        // terminating numerator rescues a nonpositive c beyond the cut
        assert!(gauss_2f1(-1.0, 1.0, -2.0, 0.3).is_ok());
        assert!(gauss_2f1(1.0, 1.0, 2.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn contiguous_relation(a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.3f64..3.0, x in -0.9f64..0.9) {
            let f = |a, b, c| gauss_2f1(a, b, c, x).unwrap();
            let lhs = c * (1.0 - x) * f(a, b, c) - c * f(a - 1.0, b, c) + (c - b) * x * f(a, b, c + 1.0);
            let scale = 1.0 + (c * f(a, b, c)).abs() + (c * f(a - 1.0, b, c)).abs();
            prop_assert!(lhs.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn ball_first_solutions() {
        for (space, k, r) in [(Kind::Spherical, 2, 0.7), (Kind::Spherical, 3, 1.2), (Kind::Hyperbolic, 3, 1.1)] {
            for m in 0..2 {
                let ode = RadialOde::ball(space, k, m, r).unwrap();
                let samples: Vec<f64> = (1..=20).map(|i| r * i as f64 / 20.0).collect();
                for (_, y) in ode.first_solutions() {
                    assert!(ode.ode_residual(&*y, &samples).unwrap() <= 1e-12);
                }
                assert!(ode.second_solution(0.0).is_err());
            }
        }
    }

    #[test]
    fn catenoid_m1_second_solution() {
        let fam = CatenoidFamily::new(Kind::Hyperbolic, 1.0).unwrap();
        let sol = CatenoidSolution {
            kind: Kind::Hyperbolic,
            a: 1.0,
            s0: 0.9,
            r: 1.0,
            residual_phi0: 0.0,
            residual_conormal: 0.0,
        };
        let ode = RadialOde::catenoid(&sol, 1);
        let samples: Vec<f64> = (0..40).map(|i| 0.05 + 0.85 * i as f64 / 39.0).collect();
        let y2 = |s: f64| ode.second_solution_jet(s);
        assert!(ode.ode_residual(&y2, &samples).unwrap() <= 1e-8);
        // h against an independent fine trapezoid
        let s = 0.6;
        let n = 200_000;
        let hq: f64 = (0..n)
            .map(|i| {
                let t = s * (i as f64 + 0.5) / n as f64;
                (1.0 * (2.0 * t).cosh() - 0.5).powf(-1.5)
            })
            .sum::<f64>()
            * s
            / n as f64;
        assert!((ode.second_solution(s).unwrap() / fam.radius(s).unwrap().v - hq).abs() < 1e-9);
        assert!(ode.normalized_wronskian(0.3).unwrap().abs() > 1e-10);
    }

    #[test]
    fn hyperbolic_disk_matches_closed_form_up_to_affine_terms() {
        let ode = RadialOde::ball(Kind::Hyperbolic, 2, 0, 1.5).unwrap();
        let consts: Vec<f64> = [0.2, 0.7, 1.3]
            .iter()
            .map(|&t| ode.second_solution(t).unwrap() / t.cosh() - hyperbolic_disk_closed_form(t))
            .collect();
        assert!((consts[0] - consts[1]).abs() < 1e-10 && (consts[1] - consts[2]).abs() < 1e-10);
    }

    #[test]
    fn quadrature_and_hypergeometric_routes_agree() {
        for k in [3usize, 5] {
            let r = 1.2;
            let ode = RadialOde::ball(Kind::Spherical, k, 0, r).unwrap();
            let zr = ball_closed_form(k, r).unwrap();
            for t in [0.05, 0.3, 0.9, 1.1] {
                let z = ode.second_solution(t).unwrap() / t.cos();
                let want = ball_closed_form(k, t).unwrap() - zr;
                assert!((z - want).abs() <= 1e-8 * (1.0 + want.abs()), "k={k} t={t}: {z} vs {want}");
            }
        }
        assert!(matches!(ball_closed_form(4, 0.3), Err(Error::DegenerateParameter(_))));
    }

    #[test]
    fn pole_behaviour() {
        let rep = singularity_check(&RadialOde::ball(Kind::Spherical, 3, 0, 0.8).unwrap()).unwrap();
        assert_eq!(rep.behaviour, PoleBehaviour::PowerLaw);
        assert!((rep.exponent.unwrap() + 1.0).abs() < 0.01);
        assert!(rep.first_bounded);
        let rep = singularity_check(&RadialOde::ball(Kind::Hyperbolic, 2, 0, 1.0).unwrap()).unwrap();
        assert_eq!(rep.behaviour, PoleBehaviour::Logarithmic);
        assert!(rep.second.iter().all(|v| *v < 0.0));
    }

    #[test]
    fn mu_positive_and_symmetric() {
        for (kind, r) in [(Kind::Hyperbolic, 1.0), (Kind::Spherical, 0.6)] {
            let sol = find_critical_catenoid(kind, r).unwrap();
            let m = mu_value(&sol).unwrap();
            assert!(m.mu > 0.0);
            assert!((m.ratio_plus - m.ratio_minus).abs() < 1e-12);
            assert!((m.ratio_plus - m.eigenvalue).abs() < 1e-9);
        }
        let sol = find_critical_catenoid(Kind::Hyperbolic, 1.0).unwrap();
        let ode = RadialOde::catenoid(&sol, 0);
        let samples: Vec<f64> = (0..21).map(|i| -sol.s0 + 2.0 * sol.s0 * i as f64 / 20.0).collect();
        for (_, y) in ode.first_solutions() {
            assert!(ode.ode_residual(&*y, &samples).unwrap() <= 1e-8);
        }
    }
}

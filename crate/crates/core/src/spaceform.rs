//! Space forms 𝕊ⁿ₊ and ℍⁿ as quadrics in ℝ^{n+1}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for points built from closed-form expressions.
pub const ANALYTIC_TOL: f64 = 1e-10;
/// Tolerance for points produced through quadrature.
pub const QUADRATURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Spherical,
    Hyperbolic,
}

impl Kind {
    /// Value of ⟨x,x⟩ on the model: +1 or −1.
    pub fn curvature(self) -> f64 {
        match self {
            Kind::Spherical => 1.0,
            Kind::Hyperbolic => -1.0,
        }
    }

    /// Sign of the 0-th coordinate in the bilinear form.
    pub fn time_sign(self) -> f64 {
        self.curvature()
    }

    /// Boundary coefficient |∇_η Φ|: cot r or coth r.
    pub fn boundary_coefficient(self, r: f64) -> f64 {
        match self {
            Kind::Spherical => 1.0 / r.tan(),
            Kind::Hyperbolic => 1.0 / r.tanh(),
        }
    }

    /// The frequency ±k at which k-dimensional minimal submanifolds are α-harmonic.
    pub fn frequency(self, k: usize) -> f64 {
        self.curvature() * k as f64
    }

    /// cos/cosh
    pub fn c(self, t: f64) -> f64 {
        match self {
            Kind::Spherical => t.cos(),
            Kind::Hyperbolic => t.cosh(),
        }
    }

    /// sin/sinh
    pub fn s(self, t: f64) -> f64 {
        match self {
            Kind::Spherical => t.sin(),
            Kind::Hyperbolic => t.sinh(),
        }
    }

    pub fn check_radius(self, r: f64) -> Result<()> {
        let ok = match self {
            Kind::Spherical => r > 0.0 && r < std::f64::consts::FRAC_PI_2,
            Kind::Hyperbolic => r > 0.0 && r.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("radius out of range: r = {r} for {self:?}")))
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Spherical => "spherical",
            Kind::Hyperbolic => "hyperbolic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbientSpace {
    pub kind: Kind,
    pub n: usize,
}

impl AmbientSpace {
    pub fn new(kind: Kind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid(format!("ambient dimension must be at least 2, got {n}")));
        }
        Ok(AmbientSpace { kind, n })
    }

    pub fn center(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n + 1];
        x[0] = 1.0;
        x
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n + 1 {
            return Err(Error::Dimension { expected: self.n + 1, got: x.len() });
        }
        Ok(())
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(inner(self.kind, x, y))
    }

    /// |⟨x,x⟩ − c|
    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        Ok((self.inner(x, x)? - self.kind.curvature()).abs())
    }

    pub fn is_valid(&self, x: &[f64], tol: f64) -> bool {
        match self.residual(x) {
            Ok(res) => {
                res <= tol
                    && match self.kind {
                        Kind::Spherical => x[0] >= -tol,
                        Kind::Hyperbolic => x[0] >= 1.0 - tol,
                    }
            }
            Err(_) => false,
        }
    }

    /// Rescale a drifted point back onto the quadric.
    pub fn renormalize(&self, x: &[f64]) -> Result<Vec<f64>> {
        let q = self.inner(x, x)?;
        let s = match self.kind {
            Kind::Spherical if q > 0.0 => q.sqrt(),
            Kind::Hyperbolic if q < 0.0 => (-q).sqrt(),
            _ => return Err(Error::Domain(format!("cannot renormalize point with ⟨x,x⟩ = {q}"))),
        };
        Ok(x.iter().map(|v| v / s).collect())
    }

    /// Geodesic distance to the center (1,0,…,0).
    pub fn ball_distance(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        let x0 = x[0];
        match self.kind {
            Kind::Spherical => {
                if x0.abs() > 1.0 + ANALYTIC_TOL {
                    return Err(Error::Domain(format!("x0 = {x0} outside [-1, 1]")));
                }
                Ok(x0.clamp(-1.0, 1.0).acos())
            }
            Kind::Hyperbolic => {
                if x0 < 1.0 - ANALYTIC_TOL {
                    return Err(Error::Domain(format!("x0 = {x0} below 1")));
                }
                Ok(x0.max(1.0).acosh())
            }
        }
    }

    /// Outward unit normal to ∂𝔹ⁿ(r) at a boundary point x.
    pub fn ball_boundary_normal(&self, r: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.kind.check_radius(r)?;
        let d = self.ball_distance(x)?;
        if (d - r).abs() > 1e-8 {
            return Err(Error::Precondition(format!("point at distance {d} is not on the sphere of radius {r}")));
        }
        let (c, s) = (self.kind.c(r), self.kind.s(r));
        let mut nrm: Vec<f64> = x.iter().map(|v| v * c).collect();
        nrm[0] -= 1.0;
        Ok(nrm.into_iter().map(|v| v / s).collect())
    }
}

/// Signed bilinear form without length checks.
pub fn inner(kind: Kind, x: &[f64], y: &[f64]) -> f64 {
    let rest: f64 = x[1..].iter().zip(&y[1..]).map(|(a, b)| a * b).sum();
    kind.time_sign() * x[0] * y[0] + rest
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n + 1];
        v[i] = 1.0;
        v
    }

    #[test]
    fn signature() {
        let h = AmbientSpace::new(Kind::Hyperbolic, 3).unwrap();
        let s = AmbientSpace::new(Kind::Spherical, 3).unwrap();
        assert_eq!(h.inner(&e(3, 0), &e(3, 0)).unwrap(), -1.0);
        assert_eq!(h.inner(&e(3, 0), &e(3, 1)).unwrap(), 0.0);
        assert_eq!(s.inner(&e(3, 0), &e(3, 0)).unwrap(), 1.0);
        assert!(matches!(s.inner(&[1.0, 0.0], &e(3, 0)), Err(Error::Dimension { .. })));
        assert!(AmbientSpace::new(Kind::Spherical, 1).is_err());
    }

    #[test]
    fn distances() {
        let h = AmbientSpace::new(Kind::Hyperbolic, 3).unwrap();
        let s = AmbientSpace::new(Kind::Spherical, 3).unwrap();
        assert_eq!(h.ball_distance(&h.center()).unwrap(), 0.0);
        assert_eq!(s.ball_distance(&s.center()).unwrap(), 0.0);
        let x = [1f64.cosh(), 1f64.sinh(), 0.0, 0.0];
        assert!((h.ball_distance(&x).unwrap() - 1.0).abs() < 1e-12);
        let y = [0.7f64.cos(), 0.7f64.sin(), 0.0, 0.0];
        assert!((s.ball_distance(&y).unwrap() - 0.7).abs() < 1e-12);
        assert!(h.ball_distance(&[0.5, 0.0, 0.0, 0.0]).is_err());
        assert!(s.ball_distance(&[1.5, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn boundary_normals() {
        let s = AmbientSpace::new(Kind::Spherical, 3).unwrap();
        let r = 0.7f64;
        let x = [r.cos(), r.sin(), 0.0, 0.0];
        let nrm = s.ball_boundary_normal(r, &x).unwrap();
        // symbolic value (−sin r, cos r, 0, 0)
        let want = [-r.sin(), r.cos(), 0.0, 0.0];
        for i in 0..4 {
            assert!((nrm[i] - want[i]).abs() < 1e-14);
        }
        let h = AmbientSpace::new(Kind::Hyperbolic, 3).unwrap();
        let x = [1f64.cosh(), 1f64.sinh(), 0.0, 0.0];
        let nrm = h.ball_boundary_normal(1.0, &x).unwrap();
        let want = [1f64.sinh(), 1f64.cosh(), 0.0, 0.0];
        for i in 0..4 {
            assert!((nrm[i] - want[i]).abs() < 1e-13);
        }
        assert!(h.ball_boundary_normal(0.5, &x).is_err());
    }

    fn boundary_point(kind: Kind, r: f64, dir: &[f64]) -> Vec<f64> {
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut x = vec![kind.c(r)];
        x.extend(dir.iter().map(|v| kind.s(r) * v / norm));
        x
    }

    proptest! {
        #[test]
        fn normal_is_unit_and_tangent(r in 0.05f64..1.5, hyper in any::<bool>(),
                                      d in prop::collection::vec(-1.0f64..1.0, 3)) {
            prop_assume!(d.iter().map(|v| v * v).sum::<f64>() > 1e-3);
            let kind = if hyper { Kind::Hyperbolic } else { Kind::Spherical };
            let sp = AmbientSpace::new(kind, 3).unwrap();
            let x = boundary_point(kind, r, &d);
            let nrm = sp.ball_boundary_normal(r, &x).unwrap();
            let scale = if hyper { r.cosh().powi(2) } else { 1.0 };
            prop_assert!((sp.inner(&nrm, &nrm).unwrap() - 1.0).abs() <= 1e-12 * scale);
            prop_assert!(sp.inner(&nrm, &x).unwrap().abs() <= 1e-12 * scale);
        }

        #[test]
        fn inner_symmetric_bilinear(x in prop::collection::vec(-2.0f64..2.0, 4),
                                    y in prop::collection::vec(-2.0f64..2.0, 4),
                                    z in prop::collection::vec(-2.0f64..2.0, 4),
                                    a in -3.0f64..3.0, hyper in any::<bool>()) {
            let kind = if hyper { Kind::Hyperbolic } else { Kind::Spherical };
            let sp = AmbientSpace::new(kind, 3).unwrap();
            prop_assert!((sp.inner(&x, &y).unwrap() - sp.inner(&y, &x).unwrap()).abs() < 1e-14);
            let ax_z: Vec<f64> = x.iter().zip(&z).map(|(u, v)| a * u + v).collect();
            let lhs = sp.inner(&ax_z, &y).unwrap();
            let rhs = a * sp.inner(&x, &y).unwrap() + sp.inner(&z, &y).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}

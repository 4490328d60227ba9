use std::f64::consts::PI;
use std::sync::Arc;

use super::forms::AssembledForms;
use crate::error::{Error, Result};
use crate::linalg::{Csr, Triplets};
use crate::quadrature::gauss3;
use crate::spaceform::Kind;
use crate::surfaces::{BallChart, CatenoidFamily, CatenoidSolution};

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const MIN_RADIAL_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    /// Carries boundary mass.
    Boundary,
    /// Coordinate pole: natural condition for m = 0, a(pole) = 0 otherwise.
    Pole,
}

/// Radius profile of the orbit sphere S^dim through each parameter value.
#[derive(Clone)]
pub struct Latitude {
    pub radius: Profile,
    pub sphere_dim: usize,
}

/// Weak form of a separated Sturm–Liouville problem on an interval.
#[derive(Clone)]
pub struct RadialProblem {
    pub nodes: Vec<f64>,
    pub weight: Profile,
    pub latitude: Option<Latitude>,
    pub conformal: Option<Profile>,
    pub left: End,
    pub right: End,
    pub orbit_measure: f64,
}

impl std::fmt::Debug for RadialProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialProblem")
            .field("nodes", &self.nodes.len())
            .field("interval", &(self.nodes.first(), self.nodes.last()))
            .field("left", &self.left)
            .field("right", &self.right)
            .field("orbit_measure", &self.orbit_measure)
            .finish()
    }
}

/// |S^d|
pub fn sphere_measure(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 1.0) * sphere_measure(d - 2),
    }
}

fn binom(n: i64, k: i64) -> usize {
    if n < k || k < 0 {
        return 0;
    }
    let mut v: u128 = 1;
    for i in 0..k {
        v = v * (n - i) as u128 / (i + 1) as u128;
    }
    v as usize
}

/// Dimension of degree-m spherical harmonics on S^d.
pub fn spherical_harmonic_multiplicity(d: usize, m: usize) -> usize {
    if d == 0 {
        return if m <= 1 { 1 } else { 0 };
    }
    let (m, d) = (m as i64, d as i64);
    binom(m + d, d) - binom(m + d - 2, d)
}

pub fn uniform_nodes(a: f64, b: f64, elements: usize) -> Vec<f64> {
    (0..=elements).map(|i| a + (b - a) * i as f64 / elements as f64).collect()
}

/// Nodes containing every breakpoint, with element size at most `hmax`
/// and at least `min_per_segment` elements per segment.
pub fn graded_nodes(breaks: &[f64], hmax: f64, min_per_segment: usize) -> Vec<f64> {
    let mut b = breaks.to_vec();
    b.sort_by(f64::total_cmp);
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut out = vec![b[0]];
    for w in b.windows(2) {
        let n = (((w[1] - w[0]) / hmax).ceil() as usize).max(min_per_segment).max(1);
        for i in 1..=n {
            out.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
        }
    }
    out
}

impl RadialProblem {
    pub fn angular_eigenvalue(&self, m: usize, t: f64) -> f64 {
        match &self.latitude {
            None => 0.0,
            Some(l) => {
                let mm = m as f64;
                let rho = (l.radius)(t);
                mm * (mm + l.sphere_dim as f64 - 1.0) / (rho * rho)
            }
        }
    }

    pub fn mode_multiplicity(&self, m: usize) -> usize {
        match &self.latitude {
            None => usize::from(m == 0),
            Some(l) => spherical_harmonic_multiplicity(l.sphere_dim, m),
        }
    }

    fn factor(&self, t: f64) -> f64 {
        self.conformal.as_ref().map_or(1.0, |c| c(t))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n < MIN_RADIAL_NODES {
            return Err(Error::Invalid(format!("radial grid needs at least {MIN_RADIAL_NODES} nodes, got {n}")));
        }
        if !self.nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Invalid("radial nodes must be strictly increasing".into()));
        }
        for (i, &t) in self.nodes.iter().enumerate() {
            let end = if i == 0 {
                Some(self.left)
            } else if i == n - 1 {
                Some(self.right)
            } else {
                None
            };
            let w = (self.weight)(t);
            match end {
                Some(End::Pole) => {
                    if !(w >= 0.0) {
                        return Err(Error::Assembly(format!("negative weight at pole t = {t}")));
                    }
                }
                _ => {
                    if !(w > 0.0) {
                        return Err(Error::Assembly(format!(
                            "weight vanishes at t = {t} inside the interval; split the interval at the pole and mark that end as a pole (even/odd mode separation)"
                        )));
                    }
                }
            }
            if let Some(c) = &self.conformal {
                if !(c(t) > 0.0) {
                    return Err(Error::Assembly(format!("conformal factor not positive at t = {t}")));
                }
            }
        }
        Ok(())
    }

    /// Geodesic k-ball chart on [0, r] with a pole at t = 0.
    pub fn ball(chart: &BallChart, elements: usize) -> RadialProblem {
        let kind = chart.kind;
        let d = chart.k - 1;
        let weight: Profile = Arc::new(move |t| kind.s(t).powi(d as i32));
        RadialProblem {
            nodes: uniform_nodes(0.0, chart.r, elements),
            weight,
            latitude: Some(Latitude { radius: Arc::new(move |t| kind.s(t)), sphere_dim: d }),
            conformal: None,
            left: End::Pole,
            right: End::Boundary,
            orbit_measure: sphere_measure(d),
        }
    }

    /// Catenoid piece [−s₀, s₀] × 𝕊¹ with weight f(s).
    pub fn catenoid(sol: &CatenoidSolution, elements: usize) -> RadialProblem {
        let fam = CatenoidFamily { kind: sol.kind, a: sol.a };
        let radius: Profile = Arc::new(move |s| fam.angular2(s).v.sqrt());
        RadialProblem {
            nodes: uniform_nodes(-sol.s0, sol.s0, elements),
            weight: radius.clone(),
            latitude: Some(Latitude { radius, sphere_dim: 1 }),
            conformal: None,
            left: End::Boundary,
            right: End::Boundary,
            orbit_measure: 2.0 * PI,
        }
    }

    /// Flat annulus inner < ρ < outer in polar coordinates.
    pub fn flat_annulus(nodes: Vec<f64>) -> RadialProblem {
        let radius: Profile = Arc::new(|t| t);
        RadialProblem {
            nodes,
            weight: radius.clone(),
            latitude: Some(Latitude { radius, sphere_dim: 1 }),
            conformal: None,
            left: End::Boundary,
            right: End::Boundary,
            orbit_measure: 2.0 * PI,
        }
    }

    /// Flat disk of radius ρ₀ in polar coordinates.
    pub fn flat_disk(radius: f64, elements: usize) -> RadialProblem {
        let lat: Profile = Arc::new(|t| t);
        RadialProblem {
            nodes: uniform_nodes(0.0, radius, elements),
            weight: lat.clone(),
            latitude: Some(Latitude { radius: lat, sphere_dim: 1 }),
            conformal: None,
            left: End::Pole,
            right: End::Boundary,
            orbit_measure: 2.0 * PI,
        }
    }

    pub fn with_conformal(mut self, c: Profile) -> Self {
        self.conformal = Some(c);
        self
    }

    /// Space-form kind cannot be read back from a problem; helper for callers
    /// that build ball problems from a kind and dimension directly.
    pub fn ball_from(kind: Kind, k: usize, r: f64, elements: usize) -> Result<RadialProblem> {
        let chart = BallChart::new(kind, k, k.max(2), r)?;
        Ok(RadialProblem::ball(&chart, elements))
    }

    fn dof_map(&self, m: usize) -> Vec<Option<usize>> {
        let n = self.nodes.len();
        let mut next = 0;
        (0..n)
            .map(|i| {
                let pole = (i == 0 && self.left == End::Pole) || (i == n - 1 && self.right == End::Pole);
                if pole && m > 0 {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    }
}

/// P1 assembly of mode m: K = ∫(φ′φ′ + λ_m φφ)w, M = ∫φφ·C·w, Bd at boundary ends.
pub fn assemble_radial(p: &RadialProblem, m: usize) -> Result<AssembledForms> {
    p.validate()?;
    let map = p.dof_map(m);
    let nd = map.iter().flatten().count();
    let mut kt = Triplets::new(nd);
    let mut mt = Triplets::new(nd);
    let mut area = 0.0;
    let (gx, gw) = gauss3();
    for e in 0..p.nodes.len() - 1 {
        let (t0, t1) = (p.nodes[e], p.nodes[e + 1]);
        let h = t1 - t0;
        let ids = [map[e], map[e + 1]];
        for q in 0..3 {
            let t = 0.5 * (t0 + t1) + 0.5 * h * gx[q];
            let jw = 0.5 * h * gw[q] * (p.weight)(t) * p.orbit_measure;
            let lam = p.angular_eigenvalue(m, t);
            let c = p.factor(t);
            area += jw * c;
            let phi = [(t1 - t) / h, (t - t0) / h];
            let dphi = [-1.0 / h, 1.0 / h];
            for a in 0..2 {
                let Some(ia) = ids[a] else { continue };
                for b in 0..2 {
                    let Some(ib) = ids[b] else { continue };
                    kt.push(ia, ib, jw * (dphi[a] * dphi[b] + lam * phi[a] * phi[b]));
                    mt.push(ia, ib, jw * c * phi[a] * phi[b]);
                }
            }
        }
    }
    let mut bt = Triplets::new(nd);
    let mut boundary_dofs = vec![];
    let mut boundary_length = 0.0;
    let last = p.nodes.len() - 1;
    for (node, end) in [(0, p.left), (last, p.right)] {
        if end == End::Boundary {
            let t = p.nodes[node];
            let len = p.factor(t).sqrt() * (p.weight)(t) * p.orbit_measure;
            let dof = map[node].expect("boundary nodes are always dofs");
            bt.push(dof, dof, len);
            boundary_dofs.push(dof);
            boundary_length += len;
        }
    }
    let dof_nodes = (0..p.nodes.len()).filter(|&i| map[i].is_some()).collect();
    Ok(AssembledForms {
        k: kt.into_csr(),
        m: mt.into_csr(),
        bd: bt.into_csr(),
        boundary_dofs,
        area,
        boundary_length,
        dof_nodes,
        node_count: p.nodes.len(),
    })
}

/// ∫ V φ_i φ_j w over the mode-m dofs (no conformal factor).
pub fn assemble_radial_potential(p: &RadialProblem, m: usize, potential: &dyn Fn(f64) -> f64) -> Result<Csr> {
    p.validate()?;
    let map = p.dof_map(m);
    let nd = map.iter().flatten().count();
    let mut t = Triplets::new(nd);
    let (gx, gw) = gauss3();
    for e in 0..p.nodes.len() - 1 {
        let (t0, t1) = (p.nodes[e], p.nodes[e + 1]);
        let h = t1 - t0;
        let ids = [map[e], map[e + 1]];
        for q in 0..3 {
            let s = 0.5 * (t0 + t1) + 0.5 * h * gx[q];
            let jw = 0.5 * h * gw[q] * (p.weight)(s) * p.orbit_measure * potential(s);
            let phi = [(t1 - s) / h, (s - t0) / h];
            for a in 0..2 {
                let Some(ia) = ids[a] else { continue };
                for b in 0..2 {
                    let Some(ib) = ids[b] else { continue };
                    t.push(ia, ib, jw * phi[a] * phi[b]);
                }
            }
        }
    }
    Ok(t.into_csr())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize) -> RadialProblem {
        RadialProblem {
            nodes: uniform_nodes(0.0, 1.0, n),
            weight: Arc::new(|_| 1.0),
            latitude: None,
            conformal: None,
            left: End::Boundary,
            right: End::Boundary,
            orbit_measure: 1.0,
        }
    }

    #[test]
    fn flat_weight_gives_textbook_matrices() {
        let n = 20;
        let h = 1.0 / n as f64;
        let f = assemble_radial(&flat(n), 0).unwrap();
        for i in 1..n {
            assert!((f.k.get(i, i) - 2.0 / h).abs() < 1e-10);
            assert!((f.k.get(i, i + 1) + 1.0 / h).abs() < 1e-10);
            assert!((f.m.get(i, i) - 2.0 * h / 3.0).abs() < 1e-14);
            assert!((f.m.get(i, i + 1) - h / 6.0).abs() < 1e-14);
        }
        assert_eq!(f.boundary_dofs, vec![0, n]);
        assert!((f.area - 1.0).abs() < 1e-14);
        assert!((f.boundary_length - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constants_in_kernel_for_mode_zero() {
        let ch = BallChart::new(Kind::Spherical, 2, 3, 0.7).unwrap();
        let f = assemble_radial(&RadialProblem::ball(&ch, 64), 0).unwrap();
        let ones = vec![1.0; f.dofs()];
        let ku = f.k.mul_vec(&ones);
        assert!(ku.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn pole_dirichlet_drops_node_for_higher_modes() {
        let ch = BallChart::new(Kind::Hyperbolic, 3, 4, 1.1).unwrap();
        let p = RadialProblem::ball(&ch, 40);
        assert_eq!(assemble_radial(&p, 0).unwrap().dofs(), 41);
        let f1 = assemble_radial(&p, 1).unwrap();
        assert_eq!(f1.dofs(), 40);
        assert_eq!(f1.dof_nodes[0], 1);
        assert_eq!(f1.boundary_dofs, vec![39]);
    }

    #[test]
    fn weight_vanishing_inside_is_rejected() {
        let ch = BallChart::new(Kind::Spherical, 3, 3, 0.7).unwrap();
        let mut p = RadialProblem::ball(&ch, 40);
        p.nodes = uniform_nodes(-0.7, 0.7, 40);
        p.left = End::Boundary;
        assert!(matches!(assemble_radial(&p, 0), Err(Error::Assembly(_))));
    }

    #[test]
    fn harmonic_multiplicities() {
        assert_eq!(spherical_harmonic_multiplicity(1, 0), 1);
        assert_eq!(spherical_harmonic_multiplicity(1, 3), 2);
        assert_eq!(spherical_harmonic_multiplicity(2, 1), 3);
        assert_eq!(spherical_harmonic_multiplicity(2, 2), 5);
        assert_eq!(spherical_harmonic_multiplicity(3, 1), 4);
        assert!((sphere_measure(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_measure(3) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn shifted_form_on_cos_interpolant_converges_at_order_two() {
        // (K − 2M) I_h cos t tested against interior hats equals −σ₀·Bd-term only at the boundary;
        // interior residual entries shrink like h².
        let ch = BallChart::new(Kind::Spherical, 2, 3, 0.7).unwrap();
        let mut errs = vec![];
        for n in [50, 100, 200] {
            let p = RadialProblem::ball(&ch, n);
            let f = assemble_radial(&p, 0).unwrap();
            let u: Vec<f64> = p.nodes.iter().map(|t| t.cos()).collect();
            let r = f.shifted(2.0).mul_vec(&u);
            let h = 0.7 / n as f64;
            // scale by 1/h to compare with the strong residual
            let worst = (1..n).map(|i| (r[i] / h).abs()).fold(0.0, f64::max);
            errs.push(worst);
        }
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
    }
}

//! Steklov problems with frequency: (K − αM)u = σ·Bd·u through the discrete
//! Dirichlet-to-Neumann map, Dirichlet spectra and nodal domains.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discretize::{AssembledForms, TriMesh};
use crate::error::{Error, Result};
use crate::linalg::{generalized_eigen, lowest_pencil_eigen, Ldlt};

pub const NODAL_EPS: f64 = 1e-9;
pub const DIRICHLET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub alpha: f64,
    pub sigmas: Vec<f64>,
    /// Eigenvectors over the degrees of freedom of the forms they came from.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_traces: Option<Vec<Vec<f64>>>,
    pub mode_tags: Option<Vec<usize>>,
    /// max ‖(K − αM)u − σ·Bd·u‖∞ / ‖K − αM‖∞ over the returned pairs.
    pub residual: f64,
    pub warnings: Vec<String>,
}

impl SpectralResult {
    pub fn vectors(&self) -> &[Vec<f64>] {
        self.eigenvectors.as_deref().unwrap_or(&[])
    }

    pub fn without_vectors(mut self) -> Self {
        self.eigenvectors = None;
        self.boundary_traces = None;
        self
    }

    /// Gap between σ₁ and σ₀.
    pub fn simple_gap(&self) -> Option<f64> {
        (self.sigmas.len() > 1).then(|| self.sigmas[1] - self.sigmas[0])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,mode,sigma")?;
        for (i, s) in self.sigmas.iter().enumerate() {
            let mode = self.mode_tags.as_ref().map_or(String::new(), |t| t[i].to_string());
            writeln!(w, "{i},{mode},{s:.12e}")?;
        }
        Ok(())
    }
}

fn normalize_sign(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    let flip = if s.abs() > 1e-12 * v.iter().map(|x| x.abs()).sum::<f64>() {
        s < 0.0
    } else {
        v.iter().find(|x| x.abs() > 0.0).is_some_and(|x| *x < 0.0)
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Lowest Dirichlet eigenvalues of (K, M) on the interior dofs.
pub fn dirichlet_spectrum(forms: &AssembledForms, count: usize) -> Result<Vec<f64>> {
    let interior = forms.interior_dofs();
    if interior.is_empty() {
        return Err(Error::Precondition("no interior degrees of freedom".into()));
    }
    let k = forms.k.principal(&interior);
    let m = forms.m.principal(&interior);
    Ok(lowest_pencil_eigen(&k, &m, count, DIRICHLET_TOL)?.values)
}

/// Lowest `count` eigenpairs of (K − αM)u = σ·Bd·u by Schur complement onto the boundary.
pub fn steklov_alpha_spectrum(forms: &AssembledForms, alpha: f64, count: usize) -> Result<SpectralResult> {
    if count == 0 {
        return Err(Error::Invalid("count must be at least 1".into()));
    }
    let a = forms.shifted(alpha);
    let interior = forms.interior_dofs();
    let boundary = forms.boundary_dofs.clone();
    let nb = boundary.len();
    if nb == 0 {
        return Err(Error::Precondition("forms have no boundary degrees of freedom".into()));
    }
    let mut warnings = vec![];
    let count = if count > nb {
        warnings.push(format!("requested {count} eigenvalues but only {nb} boundary dofs; truncated"));
        nb
    } else {
        count
    };
    let aii = a.principal(&interior);
    let mut d = a.block_dense(&boundary, &boundary);
    let mut x = DMatrix::zeros(interior.len(), nb);
    if !interior.is_empty() {
        let fac = match Ldlt::cholesky(&aii) {
            Ok(f) => f,
            Err(_) => {
                let lam = dirichlet_spectrum(forms, 1).map(|v| v[0]).unwrap_or(f64::NAN);
                return Err(Error::FrequencyHitsDirichlet { alpha, dirichlet: lam });
            }
        };
        let aib = a.block_dense(&interior, &boundary);
        for c in 0..nb {
            let col = fac.solve(aib.column(c).as_slice());
            x.set_column(c, &DVector::from_vec(col));
        }
        d -= aib.transpose() * &x;
    }
    let bbb = forms.bd.block_dense(&boundary, &boundary);
    let e = generalized_eigen(&d, &bbb)?;
    let n = forms.dofs();
    let mut vecs = Vec::with_capacity(count);
    let mut traces = Vec::with_capacity(count);
    for j in 0..count {
        let y = e.vectors.column(j);
        let ui = -(&x * y);
        let mut u = vec![0.0; n];
        for (p, &b) in boundary.iter().enumerate() {
            u[b] = y[p];
        }
        for (p, &i) in interior.iter().enumerate() {
            u[i] = ui[p];
        }
        normalize_sign(&mut u);
        traces.push(boundary.iter().map(|&b| u[b]).collect::<Vec<_>>());
        vecs.push(u);
    }
    let sigmas = e.values[..count].to_vec();
    let scale = a.norm_inf().max(1e-300);
    let mut residual: f64 = 0.0;
    for (s, u) in sigmas.iter().zip(&vecs) {
        let au = a.mul_vec(u);
        let bu = forms.bd.mul_vec(u);
        let un = u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for i in 0..n {
            residual = residual.max((au[i] - s * bu[i]).abs() / (scale * un));
        }
    }
    Ok(SpectralResult {
        alpha,
        sigmas,
        eigenvectors: Some(vecs),
        boundary_traces: Some(traces),
        mode_tags: None,
        residual,
        warnings,
    })
}

/// One separated mode with the dimension of its angular eigenspace.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    pub mode: usize,
    pub multiplicity: usize,
    pub result: SpectralResult,
}

/// Interleave per-mode spectra into one ascending, multiplicity-expanded list.
pub fn merge_modes(parts: &[ModeSpectrum]) -> Result<SpectralResult> {
    let Some(first) = parts.first() else {
        return Err(Error::Invalid("nothing to merge".into()));
    };
    let alpha = first.result.alpha;
    if parts.iter().any(|p| p.result.alpha != alpha) {
        return Err(Error::Invalid("mode spectra have different frequencies".into()));
    }
    // (σ, mode, eigenvector, boundary trace)
    type Entry<'a> = (f64, usize, Option<&'a Vec<f64>>, Option<&'a Vec<f64>>);
    let mut entries: Vec<Entry> = vec![];
    for p in parts {
        for (j, &s) in p.result.sigmas.iter().enumerate() {
            for _ in 0..p.multiplicity {
                entries.push((
                    s,
                    p.mode,
                    p.result.eigenvectors.as_ref().map(|v| &v[j]),
                    p.result.boundary_traces.as_ref().map(|v| &v[j]),
                ));
            }
        }
    }
    entries.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then_with(|| match (a.2, b.2) {
            (Some(x), Some(y)) => {
                x.iter().zip(y).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(x.len().cmp(&y.len()))
            }
            _ => std::cmp::Ordering::Equal,
        })
    });
    let has_vecs = parts.iter().all(|p| p.result.eigenvectors.is_some());
    let mut warnings: Vec<String> = parts.iter().flat_map(|p| p.result.warnings.clone()).collect();
    warnings.dedup();
    Ok(SpectralResult {
        alpha,
        sigmas: entries.iter().map(|e| e.0).collect(),
        eigenvectors: has_vecs.then(|| entries.iter().map(|e| e.2.unwrap().clone()).collect()),
        boundary_traces: has_vecs.then(|| entries.iter().map(|e| e.3.cloned().unwrap_or_default()).collect()),
        mode_tags: Some(entries.iter().map(|e| e.1).collect()),
        residual: parts.iter().map(|p| p.result.residual).fold(0.0, f64::max),
        warnings,
    })
}

/// Edges of the P1 graph of a triangle mesh.
pub fn mesh_edges(mesh: &TriMesh) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = mesh
        .triangles
        .iter()
        .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
        .collect();
    e.sort();
    e.dedup();
    e
}

pub fn path_edges(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| (i - 1, i)).collect()
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

/// Connected sign components of a nodal vector over a graph.
/// Near-zero values (below `eps_rel`·‖u‖∞) take the majority sign of their signed neighbours.
pub fn nodal_domain_count(edges: &[(usize, usize)], u: &[f64], eps_rel: f64) -> Result<usize> {
    let n = u.len();
    let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if umax == 0.0 {
        return Err(Error::Invalid("nodal count of the zero vector".into()));
    }
    let mut sign: Vec<i8> = u
        .iter()
        .map(|&v| {
            if v.abs() < eps_rel * umax {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    let mut adj = vec![vec![]; n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    loop {
        let mut changed = false;
        let snapshot = sign.clone();
        for i in 0..n {
            if snapshot[i] == 0 {
                let vote: i32 = adj[i].iter().map(|&j| snapshot[j] as i32).sum();
                if vote != 0 {
                    sign[i] = vote.signum() as i8;
                    changed = true;
                } else if adj[i].iter().any(|&j| snapshot[j] != 0) {
                    sign[i] = 1;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    for s in &mut sign {
        if *s == 0 {
            *s = 1;
        }
    }
    let mut p: Vec<usize> = (0..n).collect();
    for &(a, b) in edges {
        if sign[a] == sign[b] {
            let (ra, rb) = (find(&mut p, a), find(&mut p, b));
            if ra != rb {
                p[ra] = rb;
            }
        }
    }
    Ok((0..n).filter(|&i| find(&mut p, i) == i).count())
}

/// Count at ε = 1e−9 and whether it changes between 1e−8 and 1e−10.
pub fn nodal_domain_sensitivity(edges: &[(usize, usize)], u: &[f64]) -> Result<(usize, bool)> {
    let c = nodal_domain_count(edges, u, NODAL_EPS)?;
    let lo = nodal_domain_count(edges, u, 1e-10)?;
    let hi = nodal_domain_count(edges, u, 1e-8)?;
    Ok((c, lo != c || hi != c))
}

/// Nodal domains of a(t)·cos(mθ) given the sign pattern of a along the grid.
pub fn separated_nodal_count(profile: &[f64], mode: usize) -> Result<usize> {
    let intervals = nodal_domain_count(&path_edges(profile.len()), profile, NODAL_EPS)?;
    Ok(if mode == 0 { intervals } else { 2 * mode * intervals })
}

/// Claim checks on a computed spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct RobinChecks {
    /// max |⟨u_i, Bd u_j⟩| over pairs with |σ_i − σ_j| > 1e−6, unit Bd-normalized.
    pub orthogonality: f64,
    /// min/max of the σ₀ eigenvector after sign normalization.
    pub ground_min_ratio: f64,
    pub rayleigh_min: f64,
    pub sigma0: f64,
    pub nodal_counts: Vec<usize>,
    pub courant_ok: bool,
}

pub fn robin_checks(
    forms: &AssembledForms,
    res: &SpectralResult,
    edges: &[(usize, usize)],
    trials: usize,
    seed: u64,
) -> Result<RobinChecks> {
    let vecs = res.vectors();
    if vecs.is_empty() {
        return Err(Error::Precondition("checks need eigenvectors".into()));
    }
    let bnorm: Vec<f64> = vecs.iter().map(|u| forms.bd.form(u, u).sqrt()).collect();
    let mut orth: f64 = 0.0;
    for i in 0..vecs.len() {
        for j in 0..i {
            if (res.sigmas[i] - res.sigmas[j]).abs() > 1e-6 {
                orth = orth.max((forms.bd.form(&vecs[i], &vecs[j]) / (bnorm[i] * bnorm[j])).abs());
            }
        }
    }
    let u0 = &vecs[0];
    let (mn, mx) = u0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let a = forms.shifted(res.alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rq = f64::INFINITY;
    for _ in 0..trials {
        let v: Vec<f64> = (0..forms.dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let den = forms.bd.form(&v, &v);
        if den > 0.0 {
            rq = rq.min(a.form(&v, &v) / den);
        }
    }
    // include perturbations of the ground state so the minimum is approached
    for s in [1e-1, 1e-2, 1e-3] {
        let v: Vec<f64> = u0.iter().map(|x| x * (1.0 + s * rng.random_range(-1.0..1.0))).collect();
        rq = rq.min(a.form(&v, &v) / forms.bd.form(&v, &v));
    }
    let mut counts = vec![];
    let mut courant = true;
    for (k, u) in vecs.iter().enumerate().take(10) {
        let c = nodal_domain_count(edges, u, NODAL_EPS)?;
        courant &= c <= k + 1;
        counts.push(c);
    }
    Ok(RobinChecks {
        orthogonality: orth,
        ground_min_ratio: mn / mx,
        rayleigh_min: rq,
        sigma0: res.sigmas[0],
        nodal_counts: counts,
        courant_ok: courant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_radial, assemble_tri, mesh_annulus, mesh_disk, RadialProblem};
    use crate::spaceform::Kind;
    use crate::surfaces::BallChart;

    #[test]
    fn disk_steklov_at_zero_frequency() {
        let mut prev: Option<Vec<f64>> = None;
        let mut diffs = vec![];
        for l in 2..=4 {
            let mesh = mesh_disk(l);
            let f = assemble_tri(&mesh).unwrap();
            let r = steklov_alpha_spectrum(&f, 0.0, 6).unwrap();
            assert!(r.sigmas[0].abs() < 1e-10);
            let u0 = &r.vectors()[0];
            assert!(u0.iter().all(|v| (v - u0[0]).abs() < 1e-8));
            if let Some(p) = prev {
                diffs.push((1..6).map(|j| (r.sigmas[j] - p[j]).abs()).fold(0.0, f64::max));
            }
            prev = Some(r.sigmas.clone());
        }
        let s = prev.unwrap();
        for (j, want) in [0.0, 1.0, 1.0, 2.0, 2.0, 3.0].iter().enumerate() {
            assert!((s[j] - want).abs() < 5e-3 * (1.0 + want), "{s:?}");
        }
        assert!(diffs[0] / diffs[1] > 3.0, "{diffs:?}");
    }

    #[test]
    fn disk_dirichlet_bessel() {
        // j₀,₁ by bisection on the J₀ series
        let j0 = |x: f64| {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..60 {
                term *= -(x * x / 4.0) / (k as f64 * k as f64);
                sum += term;
            }
            sum
        };
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if j0(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let want = lo * lo;
        let mut last = f64::INFINITY;
        for l in 2..=4 {
            let lam = dirichlet_spectrum(&assemble_tri(&mesh_disk(l)).unwrap(), 3).unwrap()[0];
            assert!(lam < last && lam > want);
            last = lam;
        }
        assert!((last - want).abs() < 1e-2 * want, "{last} vs {want}");
        let f = assemble_radial(&RadialProblem::flat_disk(1.0, 2000), 0).unwrap();
        assert!((dirichlet_spectrum(&f, 1).unwrap()[0] - want).abs() < 1e-5);
    }

    #[test]
    fn interval_dirichlet_squares() {
        let p = RadialProblem {
            nodes: crate::discretize::uniform_nodes(0.0, std::f64::consts::PI, 800),
            weight: std::sync::Arc::new(|_| 1.0),
            latitude: None,
            conformal: None,
            left: crate::discretize::End::Boundary,
            right: crate::discretize::End::Boundary,
            orbit_measure: 1.0,
        };
        let l = dirichlet_spectrum(&assemble_radial(&p, 0).unwrap(), 3).unwrap();
        for j in 0..3 {
            let want = ((j + 1) * (j + 1)) as f64;
            assert!((l[j] - want).abs() < 1e-4 * want);
        }
    }

    #[test]
    fn ball_frequency_spectra() {
        for (kind, r) in [(Kind::Spherical, 0.7), (Kind::Hyperbolic, 1.1)] {
            let ch = BallChart::new(kind, 2, 3, r).unwrap();
            let p = RadialProblem::ball(&ch, 2000);
            let alpha = kind.frequency(2);
            let parts: Vec<ModeSpectrum> = (0..3)
                .map(|m| ModeSpectrum {
                    mode: m,
                    multiplicity: p.mode_multiplicity(m),
                    result: steklov_alpha_spectrum(&assemble_radial(&p, m).unwrap(), alpha, 1).unwrap(),
                })
                .collect();
            let merged = merge_modes(&parts).unwrap();
            let (s0, s1) = match kind {
                Kind::Spherical => (-r.tan(), 1.0 / r.tan()),
                Kind::Hyperbolic => (r.tanh(), 1.0 / r.tanh()),
            };
            assert!((merged.sigmas[0] - s0).abs() < 1e-6 * s0.abs());
            assert!((merged.sigmas[1] - s1).abs() < 1e-6 * s1);
            assert_eq!(merged.sigmas[1], merged.sigmas[2]);
            assert_eq!(merged.mode_tags.as_ref().unwrap()[..3], [0, 1, 1]);
        }
    }

    #[test]
    fn frequency_at_dirichlet_is_rejected() {
        let f = assemble_tri(&mesh_disk(2)).unwrap();
        let lam = dirichlet_spectrum(&f, 1).unwrap()[0];
        match steklov_alpha_spectrum(&f, lam + 0.5, 3) {
            Err(Error::FrequencyHitsDirichlet { dirichlet, .. }) => assert!((dirichlet - lam).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn merging_single_result_is_identity() {
        let f = assemble_tri(&mesh_disk(1)).unwrap();
        let r = steklov_alpha_spectrum(&f, 1.0, 5).unwrap();
        let m = merge_modes(&[ModeSpectrum { mode: 0, multiplicity: 1, result: r.clone() }]).unwrap();
        assert_eq!(m.sigmas, r.sigmas);
        assert_eq!(m.vectors(), r.vectors());
        let mut other = r.clone();
        other.alpha = 2.0;
        assert!(merge_modes(&[
            ModeSpectrum { mode: 0, multiplicity: 1, result: r },
            ModeSpectrum { mode: 1, multiplicity: 2, result: other }
        ])
        .is_err());
    }

    #[test]
    fn truncation_warns() {
        let f = assemble_tri(&mesh_disk(0)).unwrap();
        let r = steklov_alpha_spectrum(&f, 0.0, 100).unwrap();
        assert_eq!(r.sigmas.len(), 16);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn nodal_counts() {
        let mesh = mesh_annulus(0.5, 1.0, 1).unwrap();
        let edges = mesh_edges(&mesh);
        let ones = vec![1.0; mesh.vertices.len()];
        assert_eq!(nodal_domain_count(&edges, &ones, NODAL_EPS).unwrap(), 1);
        let sin: Vec<f64> = mesh.vertices.iter().map(|p| p[1].atan2(p[0]).sin()).collect();
        assert_eq!(nodal_domain_count(&edges, &sin, NODAL_EPS).unwrap(), 2);
        assert!(nodal_domain_count(&edges, &vec![0.0; ones.len()], NODAL_EPS).is_err());
        assert_eq!(separated_nodal_count(&[1.0, 0.5, -0.2], 2).unwrap(), 8);
    }

    #[test]
    fn claims_on_disk_and_annulus() {
        for (mesh, alpha) in [(mesh_disk(3), 2.0), (mesh_annulus(0.4, 1.0, 1).unwrap(), -2.0)] {
            let f = assemble_tri(&mesh).unwrap();
            let r = steklov_alpha_spectrum(&f, alpha, 10).unwrap();
            let c = robin_checks(&f, &r, &mesh_edges(&mesh), 200, 7).unwrap();
            assert!(c.orthogonality < 1e-8, "{c:?}");
            assert!(c.ground_min_ratio > 0.0);
            assert!(c.rayleigh_min >= c.sigma0 - 1e-10);
            assert!(c.courant_ok, "{c:?}");
            assert_eq!(c.nodal_counts[1], 2);
            assert!(r.residual < 1e-10);
        }
    }
}

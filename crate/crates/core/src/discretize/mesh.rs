use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Genus and number of boundary components of a generated domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Topology {
    pub genus: usize,
    pub boundary_components: usize,
}

impl Topology {
    pub const DISK: Topology = Topology { genus: 0, boundary_components: 1 };
    pub const ANNULUS: Topology = Topology { genus: 0, boundary_components: 2 };

    /// γ + l
    pub fn weight(self) -> f64 {
        (self.genus + self.boundary_components) as f64
    }
}

/// Triangle mesh of a planar parameter domain with a metric and an optional
/// conformal factor sampled per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<[usize; 2]>,
    /// (g₁₁, g₁₂, g₂₂) per vertex.
    pub metric: Vec<[f64; 3]>,
    pub conformal: Option<Vec<f64>>,
}

impl TriMesh {
    pub fn new(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, boundary_edges: Vec<[usize; 2]>) -> Result<Self> {
        let metric = vec![[1.0, 0.0, 1.0]; vertices.len()];
        let m = TriMesh { vertices, triangles, boundary_edges, metric, conformal: None };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        for t in &self.triangles {
            if t.iter().any(|&i| i >= nv) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Format(format!("bad triangle {t:?}")));
            }
        }
        for e in &self.boundary_edges {
            if e.iter().any(|&i| i >= nv) || e[0] == e[1] {
                return Err(Error::Format(format!("bad boundary edge {e:?}")));
            }
        }
        if self.metric.len() != nv {
            return Err(Error::Dimension { expected: nv, got: self.metric.len() });
        }
        if let Some(c) = &self.conformal {
            if c.len() != nv {
                return Err(Error::Dimension { expected: nv, got: c.len() });
            }
        }
        Ok(())
    }

    /// Edges bounding exactly one triangle, as oriented in that triangle.
    pub fn topological_boundary(&self) -> Vec<[usize; 2]> {
        let mut count: HashMap<(usize, usize), ([usize; 2], usize)> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let e = count.entry((a.min(b), a.max(b))).or_insert(([a, b], 0));
                e.1 += 1;
            }
        }
        let mut out: Vec<_> = count.into_values().filter(|(_, c)| *c == 1).map(|(e, _)| e).collect();
        out.sort();
        out
    }

    pub fn edge_count(&self) -> usize {
        let mut set = std::collections::HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                set.insert((a.min(b), a.max(b)));
            }
        }
        set.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Number of closed boundary loops.
    pub fn boundary_components(&self) -> usize {
        let edges = self.topological_boundary();
        let mut parent: HashMap<usize, usize> = HashMap::new();
        fn find(p: &mut HashMap<usize, usize>, x: usize) -> usize {
            let mut r = x;
            while let Some(&q) = p.get(&r) {
                if q == r {
                    break;
                }
                r = q;
            }
            p.insert(x, r);
            r
        }
        for e in &edges {
            parent.entry(e[0]).or_insert(e[0]);
            parent.entry(e[1]).or_insert(e[1]);
            let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
            if a != b {
                parent.insert(a, b);
            }
        }
        let keys: Vec<usize> = parent.keys().cloned().collect();
        let mut roots: Vec<usize> = keys.into_iter().map(|k| find(&mut parent, k)).collect();
        roots.sort();
        roots.dedup();
        roots.len()
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_edges.iter().flatten().cloned().collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for v in &mut self.vertices {
            v[0] *= factor;
            v[1] *= factor;
        }
        self
    }

    /// Conformal metric g = λ(x) δ per vertex.
    pub fn with_conformal_metric<F: Fn([f64; 2]) -> f64>(mut self, lambda: F) -> Self {
        self.metric = self
            .vertices
            .iter()
            .map(|&p| {
                let l = lambda(p);
                [l, 0.0, l]
            })
            .collect();
        self
    }

    pub fn with_factor<F: Fn([f64; 2]) -> f64>(mut self, c: F) -> Self {
        self.conformal = Some(self.vertices.iter().map(|&p| c(p)).collect());
        self
    }

    pub fn max_edge(&self) -> f64 {
        let mut h: f64 = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (self.vertices[t[k]], self.vertices[t[(k + 1) % 3]]);
                h = h.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        h
    }

    /// Text form: `V E F`, then V vertex lines `x y [c]`, F triangle lines, E boundary-edge lines.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        if let Some(i) = self.metric.iter().position(|g| *g != [1.0, 0.0, 1.0]) {
            return Err(Error::Format(format!(
                "vertex {i} carries a non-flat metric; the text format stores only a conformal factor"
            )));
        }
        writeln!(w, "{} {} {}", self.vertices.len(), self.boundary_edges.len(), self.triangles.len())?;
        for (i, v) in self.vertices.iter().enumerate() {
            match &self.conformal {
                Some(c) => writeln!(w, "{:e} {:e} {:e}", v[0], v[1], c[i])?,
                None => writeln!(w, "{:e} {:e}", v[0], v[1])?,
            }
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        for e in &self.boundary_edges {
            writeln!(w, "{} {}", e[0], e[1])?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<TriMesh> {
        let mut lines = r.lines().filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let mut next = |what: &str| -> Result<Vec<String>> {
            match lines.next() {
                Some(l) => Ok(l?.split_whitespace().map(str::to_owned).collect()),
                None => Err(Error::Format(format!("unexpected end of mesh file reading {what}"))),
            }
        };
        fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
            s.parse().map_err(|_| Error::Format(format!("bad number '{s}'")))
        }
        let head = next("header")?;
        if head.len() != 3 {
            return Err(Error::Format("header must be 'V E F'".into()));
        }
        let (nv, ne, nf): (usize, usize, usize) = (num(&head[0])?, num(&head[1])?, num(&head[2])?);
        let mut vertices = Vec::with_capacity(nv);
        let mut conf = vec![];
        for _ in 0..nv {
            let f = next("vertex")?;
            if f.len() != 2 && f.len() != 3 {
                return Err(Error::Format("vertex line must be 'x y [c]'".into()));
            }
            vertices.push([num(&f[0])?, num(&f[1])?]);
            if f.len() == 3 {
                conf.push(num::<f64>(&f[2])?);
            }
        }
        if !conf.is_empty() && conf.len() != nv {
            return Err(Error::Format("conformal factor given for some vertices only".into()));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let f = next("triangle")?;
            if f.len() != 3 {
                return Err(Error::Format("triangle line must have 3 indices".into()));
            }
            triangles.push([num(&f[0])?, num(&f[1])?, num(&f[2])?]);
        }
        let mut edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let f = next("boundary edge")?;
            if f.len() != 2 {
                return Err(Error::Format("boundary edge line must have 2 indices".into()));
            }
            edges.push([num(&f[0])?, num(&f[1])?]);
        }
        let mut m = TriMesh::new(vertices, triangles, edges)?;
        if !conf.is_empty() {
            m.conformal = Some(conf);
        }
        Ok(m)
    }
}

/// Uniform red refinement; new boundary edges follow the old ones.
fn refine(m: &TriMesh) -> TriMesh {
    let mut verts = m.vertices.clone();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 2]>| -> usize {
        *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (p, q) = (verts[a], verts[b]);
            verts.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            verts.len() - 1
        })
    };
    let mut tris = Vec::with_capacity(4 * m.triangles.len());
    for t in &m.triangles {
        let ab = midpoint(t[0], t[1], &mut verts);
        let bc = midpoint(t[1], t[2], &mut verts);
        let ca = midpoint(t[2], t[0], &mut verts);
        tris.push([t[0], ab, ca]);
        tris.push([ab, t[1], bc]);
        tris.push([ca, bc, t[2]]);
        tris.push([ab, bc, ca]);
    }
    let mut edges = Vec::with_capacity(2 * m.boundary_edges.len());
    for e in &m.boundary_edges {
        let c = midpoint(e[0], e[1], &mut verts);
        edges.push([e[0], c]);
        edges.push([c, e[1]]);
    }
    let n = verts.len();
    TriMesh {
        vertices: verts,
        triangles: tris,
        boundary_edges: edges,
        metric: vec![[1.0, 0.0, 1.0]; n],
        conformal: None,
    }
}

/// Unit disk: a regular 16-gon fan with an inner 8-gon ring, refined
/// dyadically, then mapped radially so the polygon lands on the circle.
pub fn mesh_disk(refinement: usize) -> TriMesh {
    let outer = 16usize;
    let inner = 8usize;
    let r_in = 0.5;
    let mut v = vec![[0.0, 0.0]];
    for i in 0..inner {
        let a = 2.0 * PI * i as f64 / inner as f64;
        v.push([r_in * a.cos(), r_in * a.sin()]);
    }
    for i in 0..outer {
        let a = 2.0 * PI * i as f64 / outer as f64;
        v.push([a.cos(), a.sin()]);
    }
    let ci = |i: usize| 1 + i % inner;
    let co = |i: usize| 1 + inner + i % outer;
    let mut t = vec![];
    for i in 0..inner {
        t.push([0, ci(i), ci(i + 1)]);
        // two outer vertices per inner edge
        t.push([ci(i), co(2 * i), co(2 * i + 1)]);
        t.push([ci(i), co(2 * i + 1), ci(i + 1)]);
        t.push([ci(i + 1), co(2 * i + 1), co(2 * i + 2)]);
    }
    let e: Vec<[usize; 2]> = (0..outer).map(|i| [co(i), co(i + 1)]).collect();
    let mut m = TriMesh {
        metric: vec![[1.0, 0.0, 1.0]; v.len()],
        vertices: v,
        triangles: t,
        boundary_edges: e,
        conformal: None,
    };
    for _ in 0..refinement {
        m = refine(&m);
    }
    // piecewise-linear radial map: polygon with circumradius R_k → circle of radius R_k
    let apothem = |n: usize, r: f64, ang: f64| -> f64 {
        let sector = 2.0 * PI / n as f64;
        let local = ang.rem_euclid(sector) - 0.5 * sector;
        r * (0.5 * sector).cos() / local.cos()
    };
    for p in &mut m.vertices {
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if rho == 0.0 {
            continue;
        }
        let ang = p[1].atan2(p[0]);
        let pin = apothem(inner, r_in, ang);
        let pout = apothem(outer, 1.0, ang);
        let new = if rho <= pin { rho / pin * r_in } else { r_in + (rho - pin) / (pout - pin) * (1.0 - r_in) };
        p[0] *= new / rho;
        p[1] *= new / rho;
    }
    m
}

/// Geodesic disk of radius r in the space form, in stereographic coordinates
/// (conformal factor 4/(1 ± |x|²)² on the disk of radius tan(r/2) or tanh(r/2)).
pub fn mesh_geodesic_disk(kind: crate::spaceform::Kind, r: f64, refinement: usize) -> Result<TriMesh> {
    use crate::spaceform::Kind;
    kind.check_radius(r)?;
    let (radius, sign) = match kind {
        Kind::Spherical => ((0.5 * r).tan(), 1.0),
        Kind::Hyperbolic => ((0.5 * r).tanh(), -1.0),
    };
    // in 2D a conformal metric acts only through the mass factor
    Ok(mesh_disk(refinement).scaled(radius).with_factor(|p| {
        let q = 1.0 + sign * (p[0] * p[0] + p[1] * p[1]);
        4.0 / (q * q)
    }))
}

/// Flat annulus inner < |x| < outer on a polar grid, 16·2^refinement
/// angular cells, radial layers chosen for near-square cells.
pub fn mesh_annulus(inner: f64, outer: f64, refinement: usize) -> Result<TriMesh> {
    if !(inner > 0.0 && outer > inner) {
        return Err(Error::Invalid(format!("annulus needs 0 < inner < outer, got {inner}, {outer}")));
    }
    let nt = 16usize << refinement;
    let mean = 0.5 * (inner + outer);
    let nr = ((outer - inner) / (2.0 * PI * mean / nt as f64)).ceil().max(1.0) as usize;
    let mut v = vec![];
    for i in 0..=nr {
        let rho = inner + (outer - inner) * i as f64 / nr as f64;
        for j in 0..nt {
            let a = 2.0 * PI * j as f64 / nt as f64;
            v.push([rho * a.cos(), rho * a.sin()]);
        }
    }
    let id = |i: usize, j: usize| i * nt + j % nt;
    let mut t = vec![];
    for i in 0..nr {
        for j in 0..nt {
            if (i + j) % 2 == 0 {
                t.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                t.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            } else {
                t.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
                t.push([id(i, j + 1), id(i + 1, j), id(i + 1, j + 1)]);
            }
        }
    }
    let mut e = vec![];
    for j in 0..nt {
        e.push([id(nr, j), id(nr, j + 1)]);
        e.push([id(0, j + 1), id(0, j)]);
    }
    TriMesh::new(v, t, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_topology_and_boundary() {
        for l in 0..4 {
            let m = mesh_disk(l);
            assert_eq!(m.euler_characteristic(), 1);
            assert_eq!(m.boundary_components(), 1);
            assert_eq!(m.boundary_edges.len(), 16 << l);
            let mut tb = m.topological_boundary();
            let mut be = m.boundary_edges.clone();
            tb.sort();
            be.sort();
            assert_eq!(tb, be);
            for &i in &m.boundary_vertices() {
                let p = m.vertices[i];
                assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-14);
            }
        }
        assert!(mesh_disk(3).max_edge() < 0.55 * mesh_disk(2).max_edge());
    }

    #[test]
    fn disk_is_nested() {
        let a = mesh_disk(1);
        let b = mesh_disk(2);
        for i in 0..a.vertices.len() {
            assert!((a.vertices[i][0] - b.vertices[i][0]).abs() < 1e-15);
        }
    }

    #[test]
    fn annulus_topology() {
        let m = mesh_annulus(0.3, 1.0, 1).unwrap();
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.boundary_components(), 2);
        assert_eq!(m.boundary_edges.len(), 64);
        assert!(mesh_annulus(1.0, 0.5, 0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = mesh_annulus(0.5, 1.0, 0).unwrap().with_factor(|p| 1.0 + p[0] * p[0]);
        let mut buf = vec![];
        m.write_text(&mut buf).unwrap();
        let back = TriMesh::read_text(&buf[..]).unwrap();
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.boundary_edges, m.boundary_edges);
        let c0 = m.conformal.as_ref().unwrap();
        let c1 = back.conformal.as_ref().unwrap();
        for i in 0..c0.len() {
            assert!((c0[i] - c1[i]).abs() <= 1e-15 * c0[i].abs());
            assert!((m.vertices[i][1] - back.vertices[i][1]).abs() <= 1e-15);
        }
        assert!(matches!(TriMesh::read_text(&b"3 0 1\n0 0\n1 0\n"[..]), Err(Error::Format(_))));
        assert!(matches!(TriMesh::read_text(&b"3 0 1\n0 0\n1 0\n0 1\n0 1 7\n"[..]), Err(Error::Format(_))));
        let curved = mesh_disk(0).with_conformal_metric(|p| 2.0 + p[0]);
        assert!(matches!(curved.write_text(&mut vec![]), Err(Error::Format(_))));
    }
}

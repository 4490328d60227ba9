use super::forms::AssembledForms;
use super::mesh::TriMesh;
use crate::error::{Error, Result};
use crate::linalg::Triplets;

// degree-2 exact rule on the reference triangle (edge midpoints)
const TRI_Q: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];
const TRI_W: f64 = 1.0 / 3.0;

fn lerp3(vals: [[f64; 3]; 3], bary: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for c in 0..3 {
            out[c] += bary[i] * vals[i][c];
        }
    }
    out
}

/// P1 stiffness, interior and boundary mass on a triangulated parameter domain.
/// The metric and conformal factor are interpolated linearly from the vertices.
pub fn assemble_tri(mesh: &TriMesh) -> Result<AssembledForms> {
    mesh.validate()?;
    let n = mesh.vertices.len();
    let factor = |i: usize| mesh.conformal.as_ref().map_or(1.0, |c| c[i]);
    if let Some(c) = &mesh.conformal {
        if let Some(i) = c.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Assembly(format!("conformal factor not positive at vertex {i}")));
        }
    }
    let mut kt = Triplets::new(n);
    let mut mt = Triplets::new(n);
    let mut area = 0.0;
    for (ti, t) in mesh.triangles.iter().enumerate() {
        let p: Vec<[f64; 2]> = t.iter().map(|&i| mesh.vertices[i]).collect();
        let j = [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det > 0.0) {
            return Err(Error::Assembly(format!("triangle {ti} is degenerate or clockwise (det {det:e})")));
        }
        let area_ref = 0.5 * det;
        // parameter gradients of barycentric coordinates
        let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
        let g1 = [inv[0][0], inv[0][1]];
        let g2 = [inv[1][0], inv[1][1]];
        let grads = [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2];
        let metrics = [mesh.metric[t[0]], mesh.metric[t[1]], mesh.metric[t[2]]];
        let cs = [factor(t[0]), factor(t[1]), factor(t[2])];
        for bary in &TRI_Q {
            let g = lerp3(metrics, bary);
            let gdet = g[0] * g[2] - g[1] * g[1];
            if !(gdet > 0.0) {
                return Err(Error::Assembly(format!("metric not positive definite in triangle {ti}")));
            }
            let sq = gdet.sqrt();
            let gi = [g[2] / gdet, -g[1] / gdet, g[0] / gdet];
            let c: f64 = (0..3).map(|i| bary[i] * cs[i]).sum();
            let w = TRI_W * area_ref * sq;
            area += w * c;
            for a in 0..3 {
                for b in 0..3 {
                    let ga = grads[a];
                    let gb = grads[b];
                    let kab = ga[0] * (gi[0] * gb[0] + gi[1] * gb[1]) + ga[1] * (gi[1] * gb[0] + gi[2] * gb[1]);
                    kt.push(t[a], t[b], w * kab);
                    mt.push(t[a], t[b], w * c * bary[a] * bary[b]);
                }
            }
        }
    }
    let mut bt = Triplets::new(n);
    let mut boundary_length = 0.0;
    let (gx, gw) = ([-(1.0f64 / 3.0).sqrt(), (1.0f64 / 3.0).sqrt()], [1.0, 1.0]);
    for e in &mesh.boundary_edges {
        let (pa, pb) = (mesh.vertices[e[0]], mesh.vertices[e[1]]);
        let d = [pb[0] - pa[0], pb[1] - pa[1]];
        for q in 0..2 {
            let tau = 0.5 * (1.0 + gx[q]);
            let phi = [1.0 - tau, tau];
            let g: Vec<f64> = (0..3).map(|c| phi[0] * mesh.metric[e[0]][c] + phi[1] * mesh.metric[e[1]][c]).collect();
            let len = (g[0] * d[0] * d[0] + 2.0 * g[1] * d[0] * d[1] + g[2] * d[1] * d[1]).sqrt();
            let c = phi[0] * factor(e[0]) + phi[1] * factor(e[1]);
            let w = 0.5 * gw[q] * len * c.sqrt();
            boundary_length += w;
            for a in 0..2 {
                for b in 0..2 {
                    bt.push(e[a], e[b], w * phi[a] * phi[b]);
                }
            }
        }
    }
    Ok(AssembledForms {
        k: kt.into_csr(),
        m: mt.into_csr(),
        bd: bt.into_csr(),
        boundary_dofs: mesh.boundary_vertices(),
        area,
        boundary_length,
        dof_nodes: (0..n).collect(),
        node_count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::mesh::{mesh_annulus, mesh_disk};

    #[test]
    fn flat_disk_forms() {
        let m = mesh_disk(3);
        let f = assemble_tri(&m).unwrap();
        assert!(f.k.is_symmetric(1e-12) && f.m.is_symmetric(1e-14) && f.bd.is_symmetric(1e-14));
        let ones = vec![1.0; f.dofs()];
        assert!(f.k.mul_vec(&ones).iter().all(|v| v.abs() < 1e-11));
        // polygon inscribed in the unit circle
        assert!((f.area - std::f64::consts::PI).abs() < 5e-3);
        assert!((f.boundary_length - 2.0 * std::f64::consts::PI).abs() < 5e-3);
        // linear functions reproduce ∫|∇x|² = area
        let x: Vec<f64> = m.vertices.iter().map(|p| p[0]).collect();
        assert!((f.k.form(&x, &x) - f.area).abs() < 1e-12);
    }

    #[test]
    fn constant_factor_scales_masses_exactly() {
        let m = mesh_annulus(0.4, 1.0, 1).unwrap();
        let f1 = assemble_tri(&m).unwrap();
        let f3 = assemble_tri(&m.clone().with_factor(|_| 3.0)).unwrap();
        let u: Vec<f64> = m.vertices.iter().map(|p| p[0] * p[1] + 0.3).collect();
        assert!((f3.m.form(&u, &u) - 3.0 * f1.m.form(&u, &u)).abs() < 1e-12);
        assert!((f3.bd.form(&u, &u) - 3f64.sqrt() * f1.bd.form(&u, &u)).abs() < 1e-12);
        assert!((f3.k.form(&u, &u) - f1.k.form(&u, &u)).abs() < 1e-12);
    }

    #[test]
    fn clockwise_triangle_rejected() {
        let mut m = mesh_disk(0);
        m.triangles[0].swap(1, 2);
        assert!(matches!(assemble_tri(&m), Err(Error::Assembly(_))));
    }
}

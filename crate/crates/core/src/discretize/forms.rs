use crate::linalg::Csr;

/// Stiffness, interior mass and boundary mass of one discrete problem.
///
/// Degrees of freedom may be a subset of the geometric nodes (a pole node
/// carrying a Dirichlet condition is dropped); `dof_nodes` maps back.
#[derive(Debug, Clone)]
pub struct AssembledForms {
    pub k: Csr,
    pub m: Csr,
    pub bd: Csr,
    pub boundary_dofs: Vec<usize>,
    pub area: f64,
    pub boundary_length: f64,
    pub dof_nodes: Vec<usize>,
    pub node_count: usize,
}

impl AssembledForms {
    pub fn dofs(&self) -> usize {
        self.k.dim()
    }

    pub fn interior_dofs(&self) -> Vec<usize> {
        let mut is_b = vec![false; self.dofs()];
        for &b in &self.boundary_dofs {
            is_b[b] = true;
        }
        (0..self.dofs()).filter(|&i| !is_b[i]).collect()
    }

    /// Nodal vector from a dof vector; eliminated nodes get 0.
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.node_count];
        for (d, &n) in self.dof_nodes.iter().enumerate() {
            out[n] = u[d];
        }
        out
    }

    /// Dof vector from a nodal vector.
    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        self.dof_nodes.iter().map(|&n| nodal[n]).collect()
    }

    /// K − αM
    pub fn shifted(&self, alpha: f64) -> Csr {
        self.k.lin_comb(1.0, &self.m, -alpha)
    }
}

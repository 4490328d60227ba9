//! Finite element discretization: radial Fourier reduction and P1 triangles.

mod forms;
mod mesh;
mod radial;
mod tri;

pub use forms::AssembledForms;
pub use mesh::{mesh_annulus, mesh_disk, mesh_geodesic_disk, Topology, TriMesh};
pub use radial::{
    assemble_radial, assemble_radial_potential, graded_nodes, sphere_measure, spherical_harmonic_multiplicity,
    uniform_nodes, End, Latitude, Profile, RadialProblem, MIN_RADIAL_NODES,
};
pub use tri::assemble_tri;

use fbms_core::discretize::{assemble_radial, assemble_tri, mesh_disk, mesh_geodesic_disk, RadialProblem, TriMesh};
use fbms_core::index_forms::{catenoid_index_report, radial_spectrum};
use fbms_core::robin_solver::steklov_alpha_spectrum;
use fbms_core::surfaces::{find_critical_catenoid, BallChart};
use fbms_core::Kind;
use proptest::prelude::*;

#[test]
fn mesh_text_round_trip_keeps_the_spectrum() {
    let mesh = mesh_geodesic_disk(Kind::Hyperbolic, 0.8, 2).unwrap();
    let mut buf = vec![];
    mesh.write_text(&mut buf).unwrap();
    let back = TriMesh::read_text(&buf[..]).unwrap();
    let a = steklov_alpha_spectrum(&assemble_tri(&mesh).unwrap(), -2.0, 4).unwrap();
    let b = steklov_alpha_spectrum(&assemble_tri(&back).unwrap(), -2.0, 4).unwrap();
    for (x, y) in a.sigmas.iter().zip(&b.sigmas) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn triangle_and_radial_routes_agree_on_hyperbolic_disk() {
    let r: f64 = 1.0;
    let tri =
        steklov_alpha_spectrum(&assemble_tri(&mesh_geodesic_disk(Kind::Hyperbolic, r, 3).unwrap()).unwrap(), -2.0, 3)
            .unwrap();
    let p = RadialProblem::ball(&BallChart::new(Kind::Hyperbolic, 2, 3, r).unwrap(), 1000);
    let rad = radial_spectrum(&p, -2.0, 2, 2).unwrap();
    for j in 0..3 {
        assert!((tri.sigmas[j] - rad.sigmas[j]).abs() < 2e-3, "{j}: {} vs {}", tri.sigmas[j], rad.sigmas[j]);
    }
    assert!((rad.sigmas[0] - r.tanh()).abs() < 1e-6);
}

#[test]
fn catenoid_report_serializes_with_index_keys() {
    let sol = find_critical_catenoid(Kind::Spherical, 0.6).unwrap();
    let rep = catenoid_index_report(&sol, 3, 200).unwrap();
    let v = serde_json::to_value(&rep).unwrap();
    assert_eq!(v["ind"], 4);
    assert_eq!(v["ind_S"], 1);
    assert!(v.get("ind_s").is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // K − αM decreases in α, so every Robin eigenvalue does too.
    #[test]
    fn robin_eigenvalues_decrease_in_alpha(a in -4.0f64..4.0, d in 0.05f64..1.0) {
        let f = assemble_tri(&mesh_disk(1)).unwrap();
        let lo = steklov_alpha_spectrum(&f, a, 5).unwrap();
        let hi = steklov_alpha_spectrum(&f, a + d, 5).unwrap();
        for (x, y) in lo.sigmas.iter().zip(&hi.sigmas) {
            prop_assert!(y < x);
        }
    }

    #[test]
    fn radial_mode_zero_matches_merged_ground_state(r in 0.2f64..1.4) {
        let p = RadialProblem::ball(&BallChart::new(Kind::Spherical, 2, 3, r).unwrap(), 200);
        let single = steklov_alpha_spectrum(&assemble_radial(&p, 0).unwrap(), 2.0, 1).unwrap();
        let merged = radial_spectrum(&p, 2.0, 3, 1).unwrap();
        prop_assert!((single.sigmas[0] - merged.sigmas[0]).abs() < 1e-12);
    }
}

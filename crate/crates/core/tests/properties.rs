use csl_core::csl::{dephasing_matrix, superposition_dephasing_rate};
use csl_core::tensors::{axial_rotational_strength, rotational_surface_tensor, surface_tensor};
use csl_core::units::{parse_quantity, Dimension};
use csl_core::{build_shape, rel_diff, CslParams, ShapeSpec, SymTensor3, TriangleMesh, Vec3};
use nalgebra::{Rotation3, Unit};
use proptest::prelude::*;

fn unit_vector() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let s = (1.0 - z * z).sqrt();
        Vec3::new(s * phi.cos(), s * phi.sin(), z)
    })
}

fn sym_tensor() -> impl Strategy<Value = SymTensor3> {
    prop::array::uniform6(-10.0..10.0f64).prop_map(|[xx, yy, zz, xy, xz, yz]| SymTensor3 { xx, yy, zz, xy, xz, yz })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn quadratic_form_agrees_with_axial_strength(r in 0.5..2.0f64, l in 1.0..6.0f64, a in unit_vector()) {
        let body = build_shape(&ShapeSpec::cylinder(r, l)).unwrap();
        let patches = body.quadrature(12).unwrap();
        let s_rot = rotational_surface_tensor(&patches, &Vec3::zeros());
        let direct = axial_rotational_strength(&patches, &Vec3::zeros(), &a).unwrap();
        prop_assert!(rel_diff(s_rot.quadratic_form(&a), direct) < 1e-10);
    }

    #[test]
    fn dephasing_rate_is_non_negative_and_even(r in 0.2..3.0f64, d in unit_vector(), scale in 0.0..0.2f64) {
        let p = CslParams { sigma: 1.0, ..CslParams::default() };
        let s = surface_tensor(&build_shape(&ShapeSpec::cuboid(r, 1.0, 2.0)).unwrap().quadrature(4).unwrap());
        let lambda = dephasing_matrix(&s, 1000.0, &p);
        let a = superposition_dephasing_rate(&lambda, &(d * scale));
        let b = superposition_dephasing_rate(&lambda, &(-d * scale));
        prop_assert!(a >= 0.0);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rotation_preserves_spectrum(t in sym_tensor(), axis in unit_vector(), angle in 0.0..6.3f64) {
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        let (a, b) = (t.eigenvalues(), t.rotated(&rot).eigenvalues());
        let scale = t.frobenius_norm().max(1e-300);
        for i in 0..3 {
            prop_assert!((a[i] - b[i]).abs() < 1e-10 * scale);
        }
        prop_assert!((t.trace() - t.rotated(&rot).trace()).abs() < 1e-12 * scale);
    }

    #[test]
    fn clamping_removes_round_off_only(a in unit_vector(), b in unit_vector(), w in 0.1..10.0f64, eps in 0.0..1e-11f64) {
        // rank-2 Gram tensor nudged slightly indefinite
        let t = SymTensor3::outer(&a, 1.0) + SymTensor3::outer(&b, w) - SymTensor3::isotropic(eps * (1.0 + w));
        let c = t.clamp_psd();
        prop_assert!(c.is_psd());
        prop_assert!(c.rel_diff(&t) < 1e-10);
    }

    #[test]
    fn clamping_leaves_indefinite_tensors(t in sym_tensor()) {
        if !t.is_psd() {
            prop_assert_eq!(t.clamp_psd(), t);
        }
    }

    #[test]
    fn tensor_json_round_trip(t in sym_tensor()) {
        let text = serde_json::to_string(&t).unwrap();
        let back: SymTensor3 = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(t, back);
    }

    #[test]
    fn mesh_volume_is_rigid_invariant(a in 0.2..2.0f64, b in 0.2..2.0f64, c in 0.2..2.0f64,
                                      axis in unit_vector(), angle in 0.0..6.3f64,
                                      shift in prop::array::uniform3(-3.0..3.0f64)) {
        let mesh = TriangleMesh::cuboid(Vec3::new(a, b, c));
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        let moved = mesh.transformed(&rot, &Vec3::from(shift));
        prop_assert!(rel_diff(moved.signed_volume(), a * b * c) < 1e-12);
        prop_assert!(rel_diff(moved.divergence_volume(), a * b * c) < 1e-10);
    }

    #[test]
    fn lengths_parse_in_any_unit(v in 1e-3..1e3f64) {
        let m = parse_quantity(&format!("{v} m"), Dimension::Length).unwrap();
        let nm = parse_quantity(&format!("{} nm", v * 1e9), Dimension::Length).unwrap();
        let um = parse_quantity(&format!("{} um", v * 1e6), Dimension::Length).unwrap();
        prop_assert!(rel_diff(m, nm) < 1e-14 && rel_diff(m, um) < 1e-14);
    }
}

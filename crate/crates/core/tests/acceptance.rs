//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints its own PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use csl_core::csl::{com_heating_rate, dephasing_matrix, superposition_dephasing_rate, total_heating_rate};
use csl_core::oracle::{
    edge_layer_factor, gradient_outer_integral, kspace_outer_integral, rasterize_smoothed_density,
    surface_formula_outer_integral, DecoherenceEvaluator, EdgeProfile, GridOptions,
};
use csl_core::tensors::{axial_rotational_strength, rotational_surface_tensor, surface_tensor};
use csl_core::{build_shape, rel_diff, CslParams, Shape, ShapeSpec, SymTensor3, TriangleMesh, Vec3};
use nalgebra::{Rotation3, Unit};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const SIGMA: f64 = 1e-7;
const RHO: f64 = 2200.0;
const RES: usize = 16;

type Outcome = Result<String, String>;

fn shape(spec: ShapeSpec) -> Shape {
    build_shape(&spec).expect("valid shape")
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn s_of(sh: &Shape) -> SymTensor3 {
    surface_tensor(&sh.quadrature(RES).unwrap())
}

fn sphere_surface_tensor() -> Outcome {
    let r = 1e-6;
    let want = 4.0 * PI * r * r / 3.0;
    let deviation = |s: &SymTensor3| {
        (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| (s.get(i, j) - if i == j { want } else { 0.0 }).abs() / want)
            .fold(0.0, f64::max)
    };
    let analytic = shape(ShapeSpec::sphere(r));
    let patches = analytic.quadrature(RES).unwrap();
    let s_analytic = surface_tensor(&patches);
    let s_rot = rotational_surface_tensor(&patches, &Vec3::zeros());
    let rot_norm = s_rot.frobenius_norm() / r.powi(4);

    let mesh = TriangleMesh::icosphere(r, 5);
    let triangles = mesh.triangles().len();
    let s_mesh = s_of(&shape(ShapeSpec::mesh(&mesh)));

    let (da, dm) = (deviation(&s_analytic), deviation(&s_mesh));
    check(
        da < 5e-3 && dm < 5e-3 && rot_norm < 1e-10 && triangles >= 20_000,
        format!("analytic dev {da:.2e}, mesh ({triangles} triangles) dev {dm:.2e}, |S_rot|/R⁴ {rot_norm:.1e}"),
    )
}

fn cylinder_length_independence() -> Outcome {
    let r = 1e-6;
    let p = CslParams::default();
    let delta = Vec3::new(0.05 * SIGMA, 0.0, 0.0);
    let want = p.prefactor(RHO) * 2.0 * PI * r * r * delta.norm_squared();
    let mut worst: f64 = 0.0;
    let mut rates = Vec::new();
    for l in [2.0 * r, 10.0 * r, 50.0 * r] {
        let s = s_of(&shape(ShapeSpec::cylinder(r, l)));
        let rate = superposition_dephasing_rate(&dephasing_matrix(&s, RHO, &p), &delta);
        worst = worst.max(rel_diff(rate, want));
        rates.push(rate);
    }
    check(worst < 5e-3, format!("rates {:?} 1/s, worst deviation from 2πR² form {worst:.2e}", rates.iter().map(|r| format!("{r:.4e}")).collect::<Vec<_>>()))
}

fn gap_enhancement() -> Outcome {
    let (r, l, w) = (1e-6, 20e-6, 0.5e-6);
    let base = s_of(&shape(ShapeSpec::gapped_cylinder(r, l, 0, w))).xx;
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let s = s_of(&shape(ShapeSpec::gapped_cylinder(r, l, n, w))).xx;
        worst = worst.max(rel_diff(s / base, (n + 1) as f64));
    }
    check(worst < 1e-10, format!("worst |S_xx(N)/S_xx(0) − (N+1)| relative {worst:.1e}"))
}

fn cone_suppression() -> Outcome {
    let (r, l) = (1e-6, 10e-6);
    let flat = s_of(&shape(ShapeSpec::cylinder(r, l))).xx;
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for deg in [30.0f64, 60.0, 90.0, 120.0] {
        let theta = deg.to_radians();
        let coned = s_of(&shape(ShapeSpec::cone_capped_cylinder(r, l, theta))).xx;
        let ratio = coned / flat;
        ratios.push(ratio);
        worst = worst.max(rel_diff(ratio, (0.5 * theta).sin()));
    }
    check(worst < 1e-2, format!("ratios {ratios:.5?}, worst deviation from sin(θ/2) {worst:.2e}"))
}

fn rod_rotation() -> Outcome {
    let r = 1e-7;
    let l = 40.0 * r;
    let rod = shape(ShapeSpec::cylinder(r, l));
    let centroid = rod.mass_properties(RHO).unwrap().centroid;
    let got = axial_rotational_strength(&rod.quadrature(RES).unwrap(), &centroid, &Vec3::y()).unwrap();
    let want = PI * r * l.powi(3) / 12.0;
    let d = rel_diff(got, want);
    check(d < 2e-2, format!("strength {got:.6e} m⁴ vs πRL³/12 = {want:.6e}, deviation {d:.2e}"))
}

fn elliptic_cylinder() -> Outcome {
    // The closed form is dimensionally a volume; it matches at R = 1.
    let (a, l) = (1.0, 1.0);
    let mut devs = Vec::new();
    for e2 in [0.04, 0.01] {
        let b = a * (1.0f64 - e2).sqrt();
        let body = shape(ShapeSpec::elliptic_cylinder(a, b, l));
        let patches = body.quadrature(64).unwrap();
        let got = axial_rotational_strength(&patches, &Vec3::zeros(), &Vec3::x()).unwrap();
        let want = e2 * e2 / 4.0 * PI * a * a * l;
        devs.push(rel_diff(got, want));
    }
    check(
        devs[1] < 0.1 && devs[1] < devs[0],
        format!("deviation {:.3e} at e² = 0.04, {:.3e} at e² = 0.01", devs[0], devs[1]),
    )
}

fn sphere_heating_ratio() -> Outcome {
    let p = CslParams::default();
    let mut worst: f64 = 0.0;
    for r_over_sigma in [3.0, 10.0, 100.0, 1e4] {
        let r = r_over_sigma * SIGMA;
        let mass = RHO * 4.0 / 3.0 * PI * r.powi(3);
        let ratio = com_heating_rate(4.0 * PI * r * r, mass, RHO, &p) / total_heating_rate(mass, &p);
        worst = worst.max(rel_diff(ratio, 3.0 * (SIGMA / r).powi(4)));
    }
    check(worst < 1e-12, format!("worst relative deviation from 3(σ/R)⁴ {worst:.1e}"))
}

fn parseval_cross_validation() -> Outcome {
    let opts = GridOptions {
        padding: 5.0 * SIGMA,
        ..GridOptions::for_sigma(SIGMA)
    };
    let cases = [
        ("sphere", ShapeSpec::sphere(10.0 * SIGMA)),
        ("box", ShapeSpec::cuboid(10.0 * SIGMA, 14.0 * SIGMA, 20.0 * SIGMA)),
        ("cylinder", ShapeSpec::cylinder(8.0 * SIGMA, 20.0 * SIGMA)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, spec) in cases {
        let body = shape(spec);
        let grid = rasterize_smoothed_density(&body, RHO, SIGMA, &opts, &EdgeProfile::Step).unwrap();
        let gradient = gradient_outer_integral(&grid);
        let kspace = kspace_outer_integral(&body, RHO, SIGMA).unwrap();
        let d = gradient.rel_diff(&kspace);
        ok &= d < 5e-3;
        parts.push(format!("{name} {d:.2e}"));
    }
    check(ok, format!("gradient vs k-space: {}", parts.join(", ")))
}

fn surface_effect_convergence() -> Outcome {
    let opts = GridOptions {
        padding: 5.0 * SIGMA,
        ..GridOptions::for_sigma(SIGMA)
    };
    let mut devs = Vec::new();
    for k in [10.0, 30.0, 100.0] {
        let body = shape(ShapeSpec::sphere(k * SIGMA));
        let surface = surface_formula_outer_integral(&s_of(&body), RHO, SIGMA);
        let grid = rasterize_smoothed_density(&body, RHO, SIGMA, &opts, &EdgeProfile::Step).unwrap();
        devs.push(surface.rel_diff(&gradient_outer_integral(&grid)));
    }
    check(
        devs[2] < 1e-2 && devs[0] > devs[1] && devs[1] > devs[2],
        format!("surface vs gradient at R = 10σ, 30σ, 100σ: {:.2e}, {:.2e}, {:.2e}", devs[0], devs[1], devs[2]),
    )
}

fn quadratic_regime() -> Outcome {
    let p = CslParams::default();
    let opts = GridOptions::for_sigma(SIGMA);
    // A plate keeps edge corrections (relative size σ/side) out of the
    // comparison with the surface form.
    let cases = [
        ("sphere", ShapeSpec::sphere(30.0 * SIGMA), Vec3::new(0.6, -0.48, 0.64)),
        ("box", ShapeSpec::cuboid(10.0 * SIGMA, 200.0 * SIGMA, 200.0 * SIGMA), Vec3::x()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, spec, dir) in cases {
        let body = shape(spec);
        let delta = dir.normalize() * (0.1 * SIGMA);
        let lambda = dephasing_matrix(&s_of(&body), RHO, &p);
        let quadratic = superposition_dephasing_rate(&lambda, &delta);
        let grid = rasterize_smoothed_density(&body, RHO, SIGMA, &opts, &EdgeProfile::Step).unwrap();
        let f = DecoherenceEvaluator::new(&grid).eval(&delta, &p).unwrap();
        let d = rel_diff(f, quadratic);
        ok &= d < 2e-2;
        parts.push(format!("{name} F {f:.4e} vs Δ·Λ·Δ {quadratic:.4e} ({d:.2e})"));
    }
    check(ok, parts.join("; "))
}

fn unsharp_edge() -> Outcome {
    let step = edge_layer_factor(&EdgeProfile::Step, SIGMA).unwrap();
    let exact = 1.0 / (2.0 * PI.sqrt() * SIGMA);
    let d_step = rel_diff(step, exact);
    let widths = [1.0, 0.3, 0.1, 0.01];
    let ramps: Vec<f64> = widths
        .iter()
        .map(|w| edge_layer_factor(&EdgeProfile::linear_ramp(w * SIGMA), SIGMA).unwrap())
        .collect();
    let below = ramps.iter().all(|&r| r < step);
    let increasing = ramps.windows(2).all(|w| w[0] < w[1]);
    let d_thin = rel_diff(ramps[3], step);
    check(
        d_step < 1e-10 && below && increasing && d_thin < 1e-3,
        format!("step deviation {d_step:.1e}; ramp/step at w = σ, 0.3σ, 0.1σ, 0.01σ: {:.6?}", ramps.iter().map(|r| r / step).collect::<Vec<_>>()),
    )
}

fn any_spec() -> impl Strategy<Value = ShapeSpec> {
    let len = 0.5..3.0f64;
    prop_oneof![
        len.clone().prop_map(ShapeSpec::sphere),
        (len.clone(), len.clone()).prop_map(|(r, l)| ShapeSpec::cylinder(r, l)),
        (len.clone(), len.clone(), len.clone()).prop_map(|(a, b, c)| ShapeSpec::cuboid(a, b, c)),
        (len.clone(), len.clone(), 0.3..2.8f64).prop_map(|(r, l, t)| ShapeSpec::cone_capped_cylinder(r, l, t)),
        (len.clone(), 0.2..1.0f64, len.clone()).prop_map(|(a, f, l)| ShapeSpec::elliptic_cylinder(a, a * f, l)),
        (len.clone(), 4.0..8.0f64, 0usize..4).prop_map(|(r, l, n)| ShapeSpec::gapped_cylinder(r, l, n, 0.2)),
        (0.5..2.0f64, 0u32..3).prop_map(|(r, k)| ShapeSpec::mesh(&TriangleMesh::icosphere(r, k))),
        (len.clone(), len.clone(), len).prop_map(|(a, b, c)| ShapeSpec::mesh(&TriangleMesh::cuboid(Vec3::new(a, b, c)))),
    ]
}

fn unit_vector() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let s = (1.0 - z * z).sqrt();
        Vec3::new(s * phi.cos(), s * phi.sin(), z)
    })
}

fn invariance_suite() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 96,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (any_spec(), unit_vector(), 0.0..std::f64::consts::TAU, prop::array::uniform3(-5.0..5.0f64));
    let result = runner.run(&strategy, |(spec, axis, angle, shift)| {
        let body = build_shape(&spec).unwrap();
        let patches = body.quadrature(8).unwrap();
        let origin = body.mass_properties(1.0).unwrap().centroid;
        let s = surface_tensor(&patches);
        let s_rot = rotational_surface_tensor(&patches, &origin);

        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        let t = Vec3::from(shift);
        let moved = patches.transformed(&rot, &t);
        let s_moved = surface_tensor(&moved);
        let s_rot_moved = rotational_surface_tensor(&moved, &(rot * origin + t));
        prop_assert!(s.rotated(&rot).rel_diff(&s_moved) < 1e-10);
        // S_rot vanishes for spheres, so its error is measured against
        // ∮|r − o|² dS, which bounds its trace.
        let rot_scale: f64 = patches.patches.iter().map(|p| p.weight * (p.point - origin).norm_squared()).sum();
        let rot_err = (s_rot.rotated(&rot) - s_rot_moved).frobenius_norm() / rot_scale;
        prop_assert!(rot_err < 1e-10, "S_rot error {rot_err:e}");

        let shifted = surface_tensor(&patches.transformed(&Rotation3::identity(), &t));
        prop_assert!(s.rel_diff(&shifted) < 1e-12);

        // The same motion applied through the shape's own frame.
        let placed = build_shape(&spec.clone().with_axis(axis).with_center(t)).unwrap();
        let frame_rot = placed.frame().rotation;
        prop_assert!(s.rotated(&frame_rot).rel_diff(&s_of_res(&placed, 8)) < 1e-10);

        prop_assert!(rel_diff(s.trace(), patches.total_area) < 1e-12);
        for tensor in [s, s_rot, s_moved, s_rot_moved] {
            prop_assert!(tensor.is_psd(), "not PSD: {:?}", tensor.eigenvalues());
        }
        Ok(())
    });
    match result {
        Ok(()) => Ok("96 random bodies and rigid motions: covariance, translation invariance, trace and PSD hold".into()),
        Err(e) => Err(format!("{e}")),
    }
}

fn s_of_res(sh: &Shape, res: usize) -> SymTensor3 {
    surface_tensor(&sh.quadrature(res).unwrap())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("sphere surface tensor", sphere_surface_tensor),
        ("cylinder longitudinal dephasing independent of length", cylinder_length_independence),
        ("gap enhancement N+1", gap_enhancement),
        ("cone suppression sin(θ/2)", cone_suppression),
        ("rod rotation πRL³/12", rod_rotation),
        ("elliptic cylinder e⁴/4", elliptic_cylinder),
        ("sphere heating ratio 3(σ/R)⁴", sphere_heating_ratio),
        ("gradient vs k-space cross-validation", parseval_cross_validation),
        ("surface-effect convergence", surface_effect_convergence),
        ("quadratic-regime consistency", quadratic_regime),
        ("unsharp edge layer factor", unsharp_edge),
        ("invariance suite", invariance_suite),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s]: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s]: {detail}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

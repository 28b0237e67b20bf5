//! Error norms and mass bookkeeping checked against exactly known data.

use evosurf::diagnostics::*;
use evosurf::driver::{simulate, MarchOptions};
use evosurf::geometry::*;
use evosurf::mesh::*;
use evosurf::problems::*;

fn point(mesh: &TetMesh<f64>, tet: usize, lam: &[f64; 4]) -> [f64; 3] {
    std::array::from_fn(|d| (0..4).map(|i| mesh.vertices[mesh.tets[tet][i]][d] * lam[i]).sum())
}

#[test]
fn exact_field_has_zero_error() {
    let p = builtin_shrinking_sphere::<f64>();
    let stm = SpaceTimeMesh::new(p.default_box, 0.5, TimeGrid::new(1.0, 1.0).unwrap()).unwrap();
    let t = 1.0;
    let cross = reconstruct_cross_section(&stm, &p, t).unwrap();
    let mesh = &stm.coarse;
    let step = FD_STEP * mesh.h;
    let exact = FieldFn(|tet: usize, lam: &[f64; 4]| {
        let x = point(mesh, tet, lam);
        (p.extended_solution(&x, t).unwrap(), extension_gradient(&p, &x, t, step).unwrap())
    });
    let s = section_norms(mesh, &cross, &exact, &p).unwrap();
    assert!(s.l2_sq.sqrt() < 1e-12);
    assert!(s.h1_sq.sqrt() < 1e-8);
}

#[test]
fn interpolation_errors_converge_at_expected_rates() {
    // nodal interpolation of u^e: second order in L2, first order in H1
    let p = builtin_shrinking_sphere::<f64>();
    let t = 0.0;
    let mut l2 = Vec::new();
    let mut h1 = Vec::new();
    for h in [0.5, 0.25, 0.125] {
        let stm = SpaceTimeMesh::new(p.default_box, h, TimeGrid::new(1.0, 1.0).unwrap()).unwrap();
        let cross = reconstruct_cross_section(&stm, &p, t).unwrap();
        let s = section_norms(&stm.coarse, &cross, &InitialInterpolant(&p), &p).unwrap();
        l2.push(s.l2_sq.sqrt());
        h1.push(s.h1_sq.sqrt());
    }
    for o in observed_order(&l2) {
        assert!((1.7..2.3).contains(&o), "L2 orders {:?}", observed_order(&l2));
    }
    for o in observed_order(&h1) {
        assert!((0.9..1.2).contains(&o), "H1 orders {:?}", observed_order(&h1));
    }
}

#[test]
fn unit_solution_on_static_sphere_keeps_the_discrete_area() {
    let p = static_sphere::<f64>(1.0);
    let sim = simulate(&p, p.default_box, 0.5, TimeGrid::new(1.0, 0.25).unwrap(), &MarchOptions::default(), |_, _, _| Ok(())).unwrap();
    let stm = &sim.stm;
    let area = reconstruct_cross_section(stm, &p, 0.0).unwrap().area();
    let r = &sim.report;
    assert_eq!(r.mass.len(), 4);
    for (_, m) in &r.mass {
        assert!((m - area).abs() < 1e-12 * area, "{m} vs {area}");
    }
    assert!((r.mass_initial - area).abs() < 1e-12 * area);
    assert!(r.mass_abs_err < 1e-11);
    assert!(r.err_l2_final.unwrap() < 1e-9);
    assert!(r.err_l2h1.unwrap() < 1e-7);
}

#[test]
fn missing_exact_solution_is_a_config_error() {
    let p = builtin_dziuk_moving::<f64>();
    let sim = simulate(&p, p.default_box, 0.5, TimeGrid::new(0.2, 0.1).unwrap(), &MarchOptions { keep_solutions: true, ..Default::default() }, |_, _, _| Ok(())).unwrap();
    assert!(sim.report.err_l2_final.is_none() && sim.report.err_l2h1.is_none());
    let last = sim.solutions.last().unwrap();
    assert_eq!(l2_error_final(&sim.stm, last, &p).unwrap_err().class(), "ConfigError");
    assert_eq!(l2h1_error(&sim.stm, &sim.solutions, &p).unwrap_err().class(), "ConfigError");
    assert_eq!(sim.report.mass.len(), 2);
}

#[test]
fn standalone_norms_match_the_marching_accumulator() {
    let p = builtin_shrinking_sphere::<f64>();
    let opts = MarchOptions { keep_solutions: true, ..Default::default() };
    let sim = simulate(&p, p.default_box, 0.5, TimeGrid::new(1.0, 0.5).unwrap(), &opts, |_, _, _| Ok(())).unwrap();
    let l2 = l2_error_final(&sim.stm, sim.solutions.last().unwrap(), &p).unwrap();
    let h1 = l2h1_error(&sim.stm, &sim.solutions, &p).unwrap();
    assert_eq!(l2, sim.report.err_l2_final.unwrap());
    assert_eq!(h1, sim.report.err_l2h1.unwrap());
    assert_eq!(evaluate(&sim.stm, &sim.solutions, &p).unwrap(), sim.report);
}

//! Configuration handling, CSV and VTK outputs, and the command line binary.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::process::Command;

use evosurf::cli::*;
use evosurf::geometry::*;
use evosurf::mesh::*;
use evosurf::problems::*;

fn config(dir: &Path, problem: &str, h: f64, dt: f64) -> RunConfig {
    let mut c = RunConfig::new(problem, h, dt).unwrap();
    c.outputs = dir.to_path_buf();
    c
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn smoke_run_writes_summary_and_mass() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config(dir.path(), "shrinking_sphere", 0.5, 0.5)).unwrap();
    assert!(out.report.err_l2_final.unwrap().is_finite());
    assert!(out.report.err_l2h1.unwrap().is_finite());
    let summary = csv_rows(&dir.path().join("run_summary.csv"));
    assert_eq!(summary[0].join(","), RUN_SUMMARY_HEADER);
    assert_eq!(summary.len(), 2);
    assert_eq!(summary[1][0], "shrinking_sphere");
    let mass = csv_rows(&dir.path().join("mass.csv"));
    assert_eq!(mass[0], vec!["t", "M_h"]);
    assert_eq!(mass.len(), 3);
}

#[test]
fn identical_configs_give_identical_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let mut c = config(d.path(), "shrinking_sphere", 0.5, 0.25);
        c.dump_surfaces = true;
        run(&c).unwrap();
    }
    for f in ["mass.csv", "surface_0001.vtk", "surface_0004.vtk"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    // every column except the wall clock time
    let (ra, rb) = (csv_rows(&a.path().join("run_summary.csv")), csv_rows(&b.path().join("run_summary.csv")));
    assert_eq!(ra[1][..8], rb[1][..8]);
}

#[test]
fn dziuk_mass_file_has_one_row_per_slab() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "dziuk_moving", 0.25, 0.1);
    assert_eq!(c.t_end, 8.0);
    run(&c).unwrap();
    let mass = csv_rows(&dir.path().join("mass.csv"));
    assert_eq!(mass.len(), 81);
    assert!(mass[1..].iter().all(|r| r[1].parse::<f64>().unwrap() > 13.0));
}

/// Parses a legacy VTK poly data file into points, triangles and point scalars.
fn parse_vtk(text: &str) -> (Vec<[f64; 3]>, Vec<[usize; 3]>, Vec<f64>) {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# vtk DataFile"));
    lines.next();
    assert_eq!(lines.next(), Some("ASCII"));
    assert_eq!(lines.next(), Some("DATASET POLYDATA"));
    let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(header[0], "POINTS");
    let np: usize = header[1].parse().unwrap();
    let pts: Vec<[f64; 3]> = (0..np)
        .map(|_| {
            let v: Vec<f64> = lines.next().unwrap().split_whitespace().map(|s| s.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(header[0], "POLYGONS");
    let nt: usize = header[1].parse().unwrap();
    assert_eq!(header[2].parse::<usize>().unwrap(), 4 * nt);
    let tris: Vec<[usize; 3]> = (0..nt)
        .map(|_| {
            let v: Vec<usize> = lines.next().unwrap().split_whitespace().map(|s| s.parse().unwrap()).collect();
            assert_eq!(v[0], 3);
            [v[1], v[2], v[3]]
        })
        .collect();
    assert_eq!(lines.next(), Some(format!("POINT_DATA {np}").as_str()));
    assert_eq!(lines.next(), Some("SCALARS u double 1"));
    assert_eq!(lines.next(), Some("LOOKUP_TABLE default"));
    let vals: Vec<f64> = (0..np).map(|_| lines.next().unwrap().trim().parse().unwrap()).collect();
    (pts, tris, vals)
}

#[test]
fn static_sphere_dump_is_a_closed_surface() {
    let dir = tempfile::tempdir().unwrap();
    let p = static_sphere::<f64>(1.0);
    let stm = SpaceTimeMesh::new(p.default_box, 0.5, TimeGrid::new(1.0, 1.0).unwrap()).unwrap();
    let cross = reconstruct_cross_section(&stm, &p, 0.0).unwrap();
    let path = dir.path().join("sphere.vtk");
    dump_cross_section(&stm.coarse, &cross, |_, _| 1.0, &path).unwrap();
    let (pts, tris, vals) = parse_vtk(&fs::read_to_string(&path).unwrap());
    let mut edges = HashSet::new();
    for t in &tris {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let chi = pts.len() as i64 - edges.len() as i64 + tris.len() as i64;
    assert_eq!(chi, 2);
    assert!(vals.iter().all(|&v| v == 1.0));
    for x in &pts {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        assert!((r - 1.0).abs() < 0.1);
    }
    // empty cross sections are refused
    let empty = CrossSection { time: 0.0, elements: Vec::new() };
    let err = dump_cross_section(&stm.coarse, &empty, |_, _| 0.0, &dir.path().join("e.vtk")).unwrap_err();
    assert_eq!(err.class(), "GeometryError");
    // unwritable target
    let err = dump_cross_section(&stm.coarse, &cross, |_, _| 0.0, &dir.path().join("missing/e.vtk")).unwrap_err();
    assert_eq!(err.class(), "IoError");
}

#[test]
fn convergence_study_writes_orders() {
    let dir = tempfile::tempdir().unwrap();
    let base = config(dir.path(), "shrinking_sphere", 1.0, 0.5);
    let out = convergence_study(&base, Axis::Space, 3).unwrap();
    assert_eq!(out.len(), 3);
    let rows = csv_rows(&dir.path().join("convergence.csv"));
    assert_eq!(rows[0].join(","), CONVERGENCE_HEADER);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1][6], "");
    for r in &rows[2..] {
        assert!(r[6].parse::<f64>().unwrap().is_finite());
        assert!(r[7].parse::<f64>().unwrap().is_finite());
    }
    assert!(dir.path().join("level_2/run_summary.csv").exists());
}

#[test]
fn failed_study_keeps_partial_table_with_sentinel() {
    let dir = tempfile::tempdir().unwrap();
    let mut base = config(dir.path(), "shrinking_sphere", 1.0, 0.5);
    base.solver_tol = 1e-300;
    let err = mass_study(&base, Axis::Time, 2).unwrap_err();
    assert_eq!(err.class(), "SolverFailure");
    let rows = csv_rows(&dir.path().join("mass_study.csv"));
    assert_eq!(rows[0].join(","), MASS_STUDY_HEADER);
    assert_eq!(rows.last().unwrap()[0], "FAILED");
}

#[test]
fn binary_reports_error_class_and_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "problem = shrinking_sphere\nh = 0.5\ndt = 0.3\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_evosurf")).arg("run").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("ConfigError"));

    let good = dir.path().join("good.cfg");
    fs::write(
        &good,
        format!("problem = shrinking_sphere\nh = 1\ndt = 1/2\noutputs = {}\n", dir.path().join("out").display()),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_evosurf"))
        .env(THREADS_ENV, "1")
        .arg("run")
        .arg(&good)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/run_summary.csv").exists());

    let out = Command::new(env!("CARGO_BIN_EXE_evosurf"))
        .args(["convergence", good.to_str().unwrap(), "--axis", "sideways"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

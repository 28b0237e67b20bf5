//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::HashMap;

use evosurf::assembly::{basis_eval, CoarsePrism, SlabSystem, BOTTOM};
use evosurf::geometry::{CrossSection, SlabSurface, SpaceTimeMesh};
use evosurf::linsolve::SlabSolution;
use evosurf::problems::ProblemDefinition;
use evosurf::vecmath::simplex_measure;

type Key = (u32, u32);

fn level(k: &Key) -> Option<u32> {
    (k.0 % 4 == k.1 % 4).then_some(k.0 % 4)
}

/// Outcome of a successful watertightness check.
#[derive(Clone, Copy, Debug)]
pub struct Closure {
    /// Summed area of the facets in the bottom time plane.
    pub bottom: f64,
    /// Summed area of the facets in the top time plane.
    pub top: f64,
    pub dropped: usize,
    pub dropped_measure: f64,
}

/// Checks that every triangular facet of the slab surface, slivers removed by
/// the reconstruction included, is shared by two simplices, except facets in
/// the bottom or top time plane.
pub fn check_watertight(surface: &SlabSurface<f64>) -> Result<Closure, String> {
    let mut faces: HashMap<[Key; 3], (usize, f64, Option<u32>)> = HashMap::new();
    let mut add = |keys: &[Key; 4], area_of: &dyn Fn(&[usize]) -> f64| {
        for skip in 0..4 {
            let mut f: Vec<usize> = (0..4).filter(|&i| i != skip).collect();
            f.sort_by_key(|&i| keys[i]);
            let key = [keys[f[0]], keys[f[1]], keys[f[2]]];
            let lv = level(&key[0]).filter(|l| key.iter().all(|k| level(k) == Some(*l)));
            let entry = faces.entry(key).or_insert((0, area_of(&f), lv));
            entry.0 += 1;
        }
    };
    for e in &surface.elements {
        add(&e.keys, &|f| {
            let pts: Vec<[f64; 4]> = f.iter().map(|&i| e.vertices[i]).collect();
            simplex_measure(&pts)
        });
    }
    for d in &surface.dropped {
        add(&d.keys, &|_| 0.0);
    }
    let (mut bottom, mut top) = (0.0, 0.0);
    for (key, (count, area, lv)) in &faces {
        match (count, lv) {
            (2, _) => {}
            (1, Some(0)) => bottom += area,
            (1, Some(2)) => top += area,
            _ => {
                return Err(format!(
                    "slab {}: facet {key:?} used {count} times (time level {lv:?})",
                    surface.slab
                ))
            }
        }
    }
    Ok(Closure {
        bottom,
        top,
        dropped: surface.dropped.len(),
        dropped_measure: surface.dropped.iter().map(|d| d.m3).sum(),
    })
}

/// Dense matrix and right-hand side assembled by a plain loop over elements,
/// quadrature points and all pairs of basis functions of the owning prism.
pub fn dense_assembly(
    stm: &SpaceTimeMesh<f64>,
    surface: &SlabSurface<f64>,
    bottom: &CrossSection<f64>,
    prev_value: impl Fn(&[f64; 3]) -> f64,
    p: &ProblemDefinition<f64>,
    sys: &SlabSystem<f64>,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mesh = &stm.coarse;
    let n = sys.dofs.len();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for e in &surface.elements {
        let prism = CoarsePrism { tet: e.parent as usize, t0: surface.t0, t1: surface.t1 };
        let nodes = mesh.tets[prism.tet];
        for (pt, w) in e.quadrature() {
            let x = [pt[0], pt[1], pt[2]];
            let t = pt[3];
            let c = p.surface_coefficients(&x, t, &e.n).unwrap();
            let f = p.source_value(&x, t, c.alpha);
            let ww = w * e.beta_geom;
            for (i, &ni) in nodes.iter().enumerate() {
                for li in 0..2 {
                    let (vi, gi, _) = basis_eval(mesh, &prism, i, li, &x, t).unwrap();
                    let row = sys.dofs.dof(ni, li).unwrap();
                    b[row] += ww * f * vi;
                    for (j, &nj) in nodes.iter().enumerate() {
                        for lj in 0..2 {
                            let (vj, gj, dtj) = basis_eval(mesh, &prism, j, lj, &x, t).unwrap();
                            let col = sys.dofs.dof(nj, lj).unwrap();
                            let mut pgi = gi;
                            let mut pgj = gj;
                            let gin: f64 = (0..3).map(|k| gi[k] * e.n[k]).sum();
                            let gjn: f64 = (0..3).map(|k| gj[k] * e.n[k]).sum();
                            for k in 0..3 {
                                pgi[k] -= gin * e.n[k];
                                pgj[k] -= gjn * e.n[k];
                            }
                            let wgj: f64 = (0..3).map(|k| c.velocity[k] * gj[k]).sum();
                            let diff: f64 = (0..3).map(|k| pgi[k] * pgj[k]).sum();
                            a[row][col] += ww * ((dtj + wgj) * vi + p.nu_d * diff + c.alpha * vj * vi);
                        }
                    }
                }
            }
        }
    }
    for e in &bottom.elements {
        let prism = CoarsePrism { tet: e.parent as usize, t0: surface.t0, t1: surface.t1 };
        let nodes = mesh.tets[prism.tet];
        for (x, w) in e.quadrature() {
            let um = prev_value(&x);
            for (i, &ni) in nodes.iter().enumerate() {
                let (vi, _, _) = basis_eval(mesh, &prism, i, BOTTOM, &x, surface.t0).unwrap();
                let row = sys.dofs.dof(ni, BOTTOM).unwrap();
                b[row] += w * um * vi;
                for (j, &nj) in nodes.iter().enumerate() {
                    let (vj, _, _) = basis_eval(mesh, &prism, j, BOTTOM, &x, surface.t0).unwrap();
                    a[row][sys.dofs.dof(nj, BOTTOM).unwrap()] += w * vj * vi;
                }
            }
        }
    }
    (a, b)
}

/// Values of a slab solution at all quadrature points of its surface elements.
pub fn trace_values(stm: &SpaceTimeMesh<f64>, surface: &SlabSurface<f64>, sol: &SlabSolution<f64>) -> Vec<f64> {
    let mesh = &stm.coarse;
    let mut out = Vec::new();
    for e in &surface.elements {
        let tet = e.parent as usize;
        let grads = mesh.barycentric_gradients(tet);
        for (pt, _) in e.quadrature() {
            let lam = mesh.barycentric(tet, &[pt[0], pt[1], pt[2]]);
            let dt = sol.t1 - sol.t0;
            let theta = [(sol.t1 - pt[3]) / dt, (pt[3] - sol.t0) / dt];
            out.push(sol.eval_with_gradient(mesh, tet, &lam, &grads, theta).0);
        }
    }
    out
}

/// `max |a - b| / max |a|`
pub fn relative_max_difference(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Relative residual `|A x - b| / |b|` computed with a plain dense loop.
pub fn dense_residual(a: &[Vec<f64>], x: &[f64], b: &[f64]) -> f64 {
    let r: f64 = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let ax: f64 = row.iter().zip(x).map(|(v, xi)| v * xi).sum();
            (ax - bi) * (ax - bi)
        })
        .sum::<f64>()
        .sqrt();
    r / b.iter().map(|v| v * v).sum::<f64>().sqrt()
}

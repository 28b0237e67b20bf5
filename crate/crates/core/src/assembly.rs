//! Per-slab assembly of the trace finite element system.
//!
//! Unknowns are the coefficients of the bulk space-time functions
//! `lambda_i(x) theta_l(t)` (P1 in space, endpoint-linear in time) on coarse
//! prisms touched by the discrete surface. Their traces on the surface span the
//! trial and test space. Space-time integrals are evaluated on the
//! reconstructed 3-simplices with the factor `beta_geom`, which converts the
//! surface measure into `ds dt`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{CrossSection, CrossSectionElement, SlabSurface, SpaceTimeMesh, SurfaceElement};
use crate::linalg::CsrMatrix;
use crate::linsolve::SlabSolution;
use crate::mesh::TetMesh;
use crate::problems::ProblemDefinition;
use crate::scalar::Real;
use crate::vecmath::{dot, Vec3};

/// Tolerance for basis evaluation outside the owning prism.
const INSIDE_TOL: f64 = 1e-10;

pub const BOTTOM: usize = 0;
pub const TOP: usize = 1;

/// Active spatial nodes of a slab and their two temporal layers.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceDofMap {
    pub active_nodes: Vec<usize>,
    index: Vec<u32>,
}

impl TraceDofMap {
    /// Dof map over the sorted, deduplicated `nodes` of a mesh with `node_count` nodes.
    pub fn new(mut nodes: Vec<usize>, node_count: usize) -> Self {
        nodes.sort_unstable();
        nodes.dedup();
        let mut index = vec![u32::MAX; node_count];
        for (r, &n) in nodes.iter().enumerate() {
            index[n] = r as u32;
        }
        Self {
            active_nodes: nodes,
            index,
        }
    }

    pub fn len(&self) -> usize {
        2 * self.active_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active_nodes.is_empty()
    }

    pub fn dof(&self, node: usize, layer: usize) -> Option<usize> {
        match self.index.get(node) {
            Some(&r) if r != u32::MAX => Some(2 * r as usize + layer),
            _ => None,
        }
    }

    /// `(node, layer)` of a dof index.
    pub fn node_layer(&self, dof: usize) -> (usize, usize) {
        (self.active_nodes[dof / 2], dof % 2)
    }
}

/// Sparse slab system `A c = b`.
#[derive(Clone, Debug)]
pub struct SlabSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    pub dofs: TraceDofMap,
    pub slab: usize,
    pub t0: T,
    pub t1: T,
}

/// Coarse space-time prism `tet x [t0, t1]`.
#[derive(Clone, Copy, Debug)]
pub struct CoarsePrism<T> {
    pub tet: usize,
    pub t0: T,
    pub t1: T,
}

/// Endpoint basis in time: `theta_0 = (t1 - t) / dt`, `theta_1 = (t - t0) / dt`.
#[inline]
pub fn temporal_basis<T: Real>(t: T, t0: T, t1: T) -> ([T; 2], [T; 2]) {
    let dt = t1 - t0;
    ([(t1 - t) / dt, (t - t0) / dt], [-T::one() / dt, T::one() / dt])
}

/// Value, spatial gradient and time derivative of the basis function attached to
/// local node `node` (0..4) and `layer` of `prism` at `(x, t)`.
pub fn basis_eval<T: Real>(
    mesh: &TetMesh<T>,
    prism: &CoarsePrism<T>,
    node: usize,
    layer: usize,
    x: &Vec3<T>,
    t: T,
) -> Result<(T, Vec3<T>, T)> {
    let lam = mesh.barycentric(prism.tet, x);
    let tol = T::lit(INSIDE_TOL);
    let dt = prism.t1 - prism.t0;
    if lam.iter().any(|&l| l < -tol) || t < prism.t0 - tol * dt || t > prism.t1 + tol * dt {
        return Err(Error::Internal(format!(
            "basis evaluated outside its prism (tet {}, t = {t})",
            prism.tet
        )));
    }
    let grads = mesh.barycentric_gradients(prism.tet);
    let (theta, dtheta) = temporal_basis(t, prism.t0, prism.t1);
    Ok((
        lam[node] * theta[layer],
        grads[node].map(|g| g * theta[layer]),
        lam[node] * dtheta[layer],
    ))
}

/// Bulk function whose trace at `t_{n-1}` enters the jump term.
pub enum PreviousTrace<'a, T> {
    /// Nodal interpolant of the problem's initial value.
    Initial(&'a ProblemDefinition<T>),
    /// Previous slab's solution at its upper end.
    Slab(&'a SlabSolution<T>),
    Zero,
}

impl<T: Real> PreviousTrace<'_, T> {
    /// Value at a point of coarse tet `tet` with barycentric coordinates `lam`.
    fn value(&self, mesh: &TetMesh<T>, tet: usize, lam: &[T; 4]) -> Result<T> {
        match self {
            PreviousTrace::Zero => Ok(T::zero()),
            PreviousTrace::Initial(p) => Ok(mesh.tets[tet]
                .iter()
                .zip(lam)
                .map(|(&v, &l)| (p.initial_value)(&mesh.vertices[v]) * l)
                .sum()),
            PreviousTrace::Slab(sol) => sol.eval_layer(mesh, tet, lam, TOP).ok_or_else(|| {
                Error::Internal(format!(
                    "previous slab has no active node in coarse tet {tet}"
                ))
            }),
        }
    }
}

type LocalMatrix<T> = [[T; 8]; 8];

/// Local dof numbering inside a coarse prism: `2 * local_node + layer`.
fn local_triplets<T: Real>(
    dofs: &TraceDofMap,
    nodes: &[usize; 4],
    a: &LocalMatrix<T>,
    out: &mut Vec<(usize, usize, T)>,
) {
    let global: [usize; 8] = std::array::from_fn(|k| {
        dofs.dof(nodes[k / 2], k % 2)
            .expect("nodes of an owning tet are active")
    });
    for r in 0..8 {
        for c in 0..8 {
            if a[r][c] != T::zero() {
                out.push((global[r], global[c], a[r][c]));
            }
        }
    }
}

/// Contributions of the surface elements of one coarse prism.
fn prism_contribution<T: Real>(
    stm: &SpaceTimeMesh<T>,
    elems: &[SurfaceElement<T>],
    t0: T,
    t1: T,
    p: &ProblemDefinition<T>,
) -> Result<(LocalMatrix<T>, [T; 8])> {
    let mesh = &stm.coarse;
    let tet = elems[0].parent as usize;
    let grads = mesh.barycentric_gradients(tet);
    let mut a = [[T::zero(); 8]; 8];
    let mut b = [T::zero(); 8];
    for e in elems {
        let n = e.n;
        for (pt, wq) in e.quadrature() {
            let x = [pt[0], pt[1], pt[2]];
            let t = pt[3];
            let lam = mesh.barycentric(tet, &x);
            let (theta, dtheta) = temporal_basis(t, t0, t1);
            let c = p.surface_coefficients(&x, t, &n)?;
            let f = p.source_value(&x, t, c.alpha);
            let w = wq * e.beta_geom;
            let mut val = [T::zero(); 8];
            let mut mat = [T::zero(); 8];
            let mut pg = [[T::zero(); 3]; 8];
            for i in 0..4 {
                let gn = dot(&grads[i], &n);
                let tangential = std::array::from_fn::<T, 3, _>(|d| grads[i][d] - gn * n[d]);
                let wg = dot(&c.velocity, &grads[i]);
                for l in 0..2 {
                    let k = 2 * i + l;
                    val[k] = lam[i] * theta[l];
                    mat[k] = lam[i] * dtheta[l] + wg * theta[l];
                    pg[k] = tangential.map(|g| g * theta[l]);
                }
            }
            for r in 0..8 {
                let vr = w * val[r];
                b[r] += vr * f;
                for s in 0..8 {
                    a[r][s] += vr * (mat[s] + c.alpha * val[s]) + w * p.nu_d * dot(&pg[s], &pg[r]);
                }
            }
        }
    }
    Ok((a, b))
}

/// Jump-term contributions `(u_+, v_+)` and `(u_-, v_+)` on the bottom cross section.
fn cross_contribution<T: Real>(
    mesh: &TetMesh<T>,
    elems: &[CrossSectionElement<T>],
    prev: &PreviousTrace<'_, T>,
) -> Result<(LocalMatrix<T>, [T; 8])> {
    let tet = elems[0].parent as usize;
    let mut a = [[T::zero(); 8]; 8];
    let mut b = [T::zero(); 8];
    for e in elems {
        for (x, w) in e.quadrature() {
            // the quadrature point lies in the parent tet, so the previous
            // bulk function is evaluated there directly
            let lam = mesh.barycentric(tet, &x);
            let u_prev = prev.value(mesh, tet, &lam)?;
            for i in 0..4 {
                b[2 * i + BOTTOM] += w * u_prev * lam[i];
                for j in 0..4 {
                    a[2 * i + BOTTOM][2 * j + BOTTOM] += w * lam[i] * lam[j];
                }
            }
        }
    }
    Ok((a, b))
}

fn group_ranges<E>(elems: &[E], parent: impl Fn(&E) -> u32) -> Vec<(usize, usize)> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for i in 1..=elems.len() {
        if i == elems.len() || parent(&elems[i]) != parent(&elems[start]) {
            ranges.push((start, i));
            start = i;
        }
    }
    ranges
}

/// Assembles the system of slab `surface.slab` given the bottom cross section
/// `Gamma_h(t_{n-1})` and the trace carried over from the previous slab.
pub fn assemble_slab<T: Real>(
    stm: &SpaceTimeMesh<T>,
    surface: &SlabSurface<T>,
    bottom: &CrossSection<T>,
    prev: &PreviousTrace<'_, T>,
    p: &ProblemDefinition<T>,
) -> Result<SlabSystem<T>> {
    if surface.is_empty() {
        return Err(Error::Geometry(format!(
            "empty surface reconstruction on slab {} (surface vanished or left the domain)",
            surface.slab
        )));
    }
    let mesh = &stm.coarse;
    let mut bottom_elems = bottom.elements.clone();
    bottom_elems.sort_by_key(|e| e.parent);

    let nodes: Vec<usize> = surface
        .elements
        .iter()
        .map(|e| e.parent)
        .chain(bottom_elems.iter().map(|e| e.parent))
        .flat_map(|t| mesh.tets[t as usize])
        .collect();
    let dofs = TraceDofMap::new(nodes, mesh.node_count());

    let (t0, t1) = (surface.t0, surface.t1);
    let surf_groups = group_ranges(&surface.elements, |e| e.parent);
    let surf_parts: Vec<Result<(usize, LocalMatrix<T>, [T; 8])>> = surf_groups
        .par_iter()
        .map(|&(s, e)| {
            let (a, b) = prism_contribution(stm, &surface.elements[s..e], t0, t1, p)
                .map_err(|err| err.context(format!("slab {} element group {s}..{e}", surface.slab)))?;
            Ok((surface.elements[s].parent as usize, a, b))
        })
        .collect();
    let cross_groups = group_ranges(&bottom_elems, |e| e.parent);
    let cross_parts: Vec<Result<(usize, LocalMatrix<T>, [T; 8])>> = cross_groups
        .par_iter()
        .map(|&(s, e)| {
            let (a, b) = cross_contribution(mesh, &bottom_elems[s..e], prev)?;
            Ok((bottom_elems[s].parent as usize, a, b))
        })
        .collect();

    let mut triplets = Vec::with_capacity(64 * (surf_parts.len() + cross_parts.len()));
    let mut rhs = vec![T::zero(); dofs.len()];
    for part in surf_parts.into_iter().chain(cross_parts) {
        let (tet, a, b) = part?;
        let nodes = mesh.tets[tet];
        local_triplets(&dofs, &nodes, &a, &mut triplets);
        for k in 0..8 {
            rhs[dofs.dof(nodes[k / 2], k % 2).unwrap()] += b[k];
        }
    }
    let matrix = CsrMatrix::from_triplets(dofs.len(), dofs.len(), triplets);
    Ok(SlabSystem {
        matrix,
        rhs,
        dofs,
        slab: surface.slab,
        t0,
        t1,
    })
}

/// Two sides of the discrete ellipticity inequality for a sequence of slab functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport<T> {
    /// `<u', u>_b + a(u, u) + d(u, u)`
    pub energy: T,
    /// `min(1, c0) (nu |u|_H^2 + |u_-^N|^2 / 2 + sum |[u]^{n-1}|^2 / 2)`
    pub bound: T,
    pub c0: T,
}

impl<T: Real> EnergyReport<T> {
    /// `energy - bound`; non-negative up to round-off when the inequality holds.
    pub fn margin(&self) -> T {
        self.energy - self.bound
    }
}

/// Evaluates both sides of the ellipticity estimate for coefficient vectors
/// `sols` (one per slab, slabs `1..=sols.len()`) on the reconstructed surface.
///
/// Requires `f = 0` and `alpha - div_Gamma w / 2 >= c0 > 0` at every quadrature point.
pub fn energy_check<T: Real>(
    stm: &SpaceTimeMesh<T>,
    p: &ProblemDefinition<T>,
    sols: &[SlabSolution<T>],
) -> Result<EnergyReport<T>> {
    if !p.has_zero_source() {
        return Err(Error::Config("energy check requires a zero source term".into()));
    }
    let mesh = &stm.coarse;
    let half = T::lit(0.5);
    let mut energy = T::zero();
    let mut h_norm = T::zero();
    let mut jumps = T::zero();
    let mut final_norm = T::zero();
    let mut c0 = T::infinity();
    for (k, sol) in sols.iter().enumerate() {
        let n = k + 1;
        let surface = crate::geometry::reconstruct_slab(stm, n, p)?;
        let bottom = crate::geometry::reconstruct_cross_section(stm, p, stm.grid.time(n - 1))?;
        let prev = if k == 0 {
            PreviousTrace::Zero
        } else {
            PreviousTrace::Slab(&sols[k - 1])
        };
        // the slab form without the source: c^T (A c - b_prev)
        let sys = assemble_slab(stm, &surface, &bottom, &prev, p)?;
        let c = sol.coefficients_on(&sys.dofs);
        let ac = sys.matrix.mul_vec(&c);
        energy += c
            .iter()
            .zip(ac.iter().zip(&sys.rhs))
            .map(|(&ci, (&a, &b))| ci * (a - b))
            .sum::<T>();

        for e in &surface.elements {
            let tet = e.parent as usize;
            let grads = mesh.barycentric_gradients(tet);
            for (pt, wq) in e.quadrature() {
                let x = [pt[0], pt[1], pt[2]];
                let coef = p.surface_coefficients(&x, pt[3], &e.n)?;
                c0 = c0.min(coef.alpha - half * coef.div_gamma_w);
                let lam = mesh.barycentric(tet, &x);
                let (theta, _) = temporal_basis(pt[3], sys.t0, sys.t1);
                let (v, g) = sol.eval_with_gradient(mesh, tet, &lam, &grads, theta);
                let gn = dot(&g, &e.n);
                let tg: T = (0..3).map(|d| (g[d] - gn * e.n[d]).powi(2)).sum();
                h_norm += wq * e.beta_geom * (v * v + tg);
            }
        }
        for e in &bottom.elements {
            let tet = e.parent as usize;
            for (x, w) in e.quadrature() {
                let lam = mesh.barycentric(tet, &x);
                let up = sol.eval_layer(mesh, tet, &lam, BOTTOM).unwrap_or(T::zero());
                let um = prev.value(mesh, tet, &lam)?;
                jumps += w * (up - um) * (up - um);
            }
        }
        if n == sols.len() {
            let top = crate::geometry::reconstruct_cross_section(stm, p, stm.grid.time(n))?;
            for e in &top.elements {
                let tet = e.parent as usize;
                for (x, w) in e.quadrature() {
                    let lam = mesh.barycentric(tet, &x);
                    let u = sol.eval_layer(mesh, tet, &lam, TOP).unwrap_or(T::zero());
                    final_norm += w * u * u;
                }
            }
        }
    }
    if sols.is_empty() {
        return Ok(EnergyReport {
            energy: T::zero(),
            bound: T::zero(),
            c0: T::zero(),
        });
    }
    if !(c0 > T::zero()) {
        return Err(Error::Config(format!(
            "energy check requires alpha - div_Gamma(w)/2 >= c0 > 0, found minimum {c0}"
        )));
    }
    let bound = T::one().min(c0) * (p.nu_d * h_norm + half * final_norm + half * jumps);
    Ok(EnergyReport { energy, bound, c0 })
}

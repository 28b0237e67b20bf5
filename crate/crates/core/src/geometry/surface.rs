//! Piecewise planar reconstruction of the space-time surface per time slab and
//! of its spatial cross sections at slab endpoints.
//!
//! The level set is interpolated on the once-refined space-time mesh: the fine
//! spatial mesh has spacing `h / 2` and every slab is split into two fine time
//! intervals. Each fine prism is cut into pentatopes, on which the interpolant
//! is affine.

use rayon::prelude::*;

use super::marching::{
    keys_distinct, march_pentatope, march_tet, subdivide_prism, PointKey, Prism4D, SurfaceSimplex,
};
use super::quadrature;
use crate::error::{Error, Result};
use crate::mesh::{build_box_mesh, BoxDomain, TetMesh, TimeGrid};
use crate::problems::ProblemDefinition;
use crate::scalar::Real;
use crate::vecmath::{self, Vec3, Vec4};

/// Relative 3-measure below which a surface simplex is discarded.
pub const SLIVER_TOL: f64 = 1e-14;

/// Coarse mesh, its regular refinement and the time grid.
#[derive(Clone, Debug)]
pub struct SpaceTimeMesh<T> {
    pub coarse: TetMesh<T>,
    pub fine: TetMesh<T>,
    pub grid: TimeGrid<T>,
}

impl<T: Real> SpaceTimeMesh<T> {
    pub fn new(domain: BoxDomain<T>, h: T, grid: TimeGrid<T>) -> Result<Self> {
        let coarse = build_box_mesh(domain, h)?;
        let fine = build_box_mesh(domain, h / T::lit(2.0))?;
        Ok(Self { coarse, fine, grid })
    }

    /// Coarse tetrahedron containing the fine tetrahedron `fine_tet`.
    pub fn fine_parent(&self, fine_tet: usize) -> usize {
        let v = self.fine.tet_vertices(fine_tet);
        let quarter = T::lit(0.25);
        let mut c = [T::zero(); 3];
        for p in &v {
            for a in 0..3 {
                c[a] += quarter * p[a];
            }
        }
        self.coarse
            .locate_point(&c)
            .map(|(t, _)| t)
            .expect("fine tetrahedra nest inside the coarse mesh")
    }

    /// Level-set values at all fine nodes at time `t`.
    pub fn sample_phi(&self, p: &ProblemDefinition<T>, t: T) -> Vec<T> {
        self.fine.vertices.par_iter().map(|x| (p.phi)(x, t)).collect()
    }

    fn check_inside(&self, phi: &[T], t: T) -> Result<()> {
        let mut sign = None;
        for (id, &v) in phi.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Geometry(format!("non-finite level-set value at t = {t}")));
            }
            if self.fine.is_boundary_node(id) {
                let s = v < T::zero();
                match sign {
                    None => sign = Some(s),
                    Some(prev) if prev != s => {
                        return Err(Error::Geometry(format!(
                            "surface touches the box boundary at t = {t}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// One flat 3-simplex of the discrete space-time surface.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceElement<T> {
    pub vertices: [Vec4<T>; 4],
    pub keys: [PointKey; 4],
    /// Coarse tetrahedron (and thereby coarse prism of the slab) containing the element.
    pub parent: u32,
    pub m3: T,
    /// Unit space-time normal, pointing towards increasing level-set values.
    pub nu: Vec4<T>,
    /// Unit spatial normal.
    pub n: Vec3<T>,
    /// `|grad_x phi_h| / |grad_(x,t) phi_h|`; converts `d sigma` into `ds dt`.
    pub beta_geom: T,
}

impl<T: Real> SurfaceElement<T> {
    /// Degree-2 rule; weights sum to `m3` (not scaled by `beta_geom`).
    pub fn quadrature(&self) -> [(Vec4<T>, T); 4] {
        quadrature::tetrahedron(&self.vertices, self.m3)
    }
}

/// One flat triangle of a spatial cross section `Gamma_h(t)`.
#[derive(Clone, Copy, Debug)]
pub struct CrossSectionElement<T> {
    pub vertices: [Vec3<T>; 3],
    pub keys: [PointKey; 3],
    pub parent: u32,
    pub area: T,
    pub normal: Vec3<T>,
}

impl<T: Real> CrossSectionElement<T> {
    pub fn quadrature(&self) -> [(Vec3<T>, T); 3] {
        quadrature::triangle(&self.vertices, self.area)
    }
}

/// A non-collapsed piece of the zero level that was not kept as an element:
/// a sliver below the measure threshold or a piece lying in a time plane.
#[derive(Clone, Copy, Debug)]
pub struct DroppedSimplex<T> {
    pub keys: [PointKey; 4],
    pub m3: T,
}

/// Reconstruction of the space-time surface on one slab, grouped by coarse parent.
#[derive(Clone, Debug)]
pub struct SlabSurface<T> {
    pub slab: usize,
    pub t0: T,
    pub t1: T,
    pub elements: Vec<SurfaceElement<T>>,
    /// Pieces removed from `elements`; together with them the surface is closed.
    pub dropped: Vec<DroppedSimplex<T>>,
}

impl<T: Real> SlabSurface<T> {
    /// `sum m3 * beta_geom`, the discrete `int int_{Gamma_h(t)} ds dt`.
    pub fn space_time_area(&self) -> T {
        self.elements.iter().map(|e| e.m3 * e.beta_geom).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Cross section `Gamma_h(t)` of the reconstruction at a slab endpoint.
#[derive(Clone, Debug)]
pub struct CrossSection<T> {
    pub time: T,
    pub elements: Vec<CrossSectionElement<T>>,
}

impl<T: Real> CrossSection<T> {
    pub fn area(&self) -> T {
        self.elements.iter().map(|e| e.area).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Affine gradient of the interpolant on a simplex with `K + 1` vertices in `R^K`.
fn affine_gradient<T: Real, const K: usize>(v: &[[T; K]], phi: &[T]) -> Option<[T; K]> {
    let mut m = [[T::zero(); K]; K];
    let mut rhs = [T::zero(); K];
    for i in 0..K {
        m[i] = vecmath::sub(&v[i + 1], &v[0]);
        rhs[i] = phi[i + 1] - phi[0];
    }
    vecmath::solve(m, rhs)
}

/// Marches one pentatope and converts the pieces into surface elements.
///
/// Pieces that are not kept (slivers, pieces in a time plane) go to `dropped`.
pub fn pentatope_elements<T: Real>(
    pent: &super::marching::Pentatope<T>,
    phi: &[T; 5],
    parent: u32,
    dropped: &mut Vec<DroppedSimplex<T>>,
) -> Vec<SurfaceElement<T>> {
    let pieces: Vec<_> = march_pentatope(pent, phi)
        .into_iter()
        .filter(|s| keys_distinct(&s.keys))
        .map(|s| (s, vecmath::simplex_measure(&s.vertices)))
        .collect();
    if pieces.is_empty() {
        return Vec::new();
    }
    let mut drop_all = |pieces: Vec<(SurfaceSimplex<T>, T)>| {
        dropped.extend(pieces.into_iter().map(|(s, m3)| DroppedSimplex { keys: s.keys, m3 }));
        Vec::new()
    };
    let Some(grad) = affine_gradient(&pent.vertices, phi) else {
        return drop_all(pieces);
    };
    let g_norm = vecmath::norm(&grad);
    let gx = [grad[0], grad[1], grad[2]];
    let gx_norm = vecmath::norm(&gx);
    if gx_norm == T::zero() {
        return drop_all(pieces);
    }
    let diam = vecmath::diameter(&pent.vertices);
    let min_measure = T::lit(SLIVER_TOL) * diam * diam * diam;
    let mut kept = Vec::with_capacity(pieces.len());
    for (s, m3) in pieces {
        if m3 >= min_measure && m3 > T::zero() {
            kept.push(SurfaceElement {
                vertices: s.vertices,
                keys: s.keys,
                parent,
                m3,
                nu: grad.map(|c| c / g_norm),
                n: gx.map(|c| c / gx_norm),
                beta_geom: gx_norm / g_norm,
            });
        } else {
            dropped.push(DroppedSimplex { keys: s.keys, m3 });
        }
    }
    kept
}

/// Marches one fine tetrahedron at fixed time.
pub fn tet_elements<T: Real>(
    points: &[Vec3<T>; 4],
    keys: &[u32; 4],
    phi: &[T; 4],
    parent: u32,
) -> Vec<CrossSectionElement<T>> {
    let tris = march_tet(points, keys, phi);
    if tris.is_empty() {
        return Vec::new();
    }
    let Some(g) = affine_gradient(points, phi) else {
        return Vec::new();
    };
    let gn = vecmath::norm(&g);
    let diam = vecmath::diameter(points);
    let min_area = T::lit(SLIVER_TOL) * diam * diam;
    tris.into_iter()
        .filter(|t| keys_distinct(&t.keys))
        .filter_map(|t| {
            let area = vecmath::simplex_measure(&t.vertices);
            (area >= min_area && area > T::zero()).then(|| CrossSectionElement {
                vertices: t.vertices,
                keys: t.keys,
                parent,
                area,
                normal: g.map(|c| c / gn),
            })
        })
        .collect()
}

fn mixed_signs<T: Real>(vals: impl IntoIterator<Item = T>) -> bool {
    let (mut neg, mut pos) = (false, false);
    for v in vals {
        if v < T::zero() {
            neg = true;
        } else {
            pos = true;
        }
    }
    neg && pos
}

/// Reconstructs the discrete space-time surface on slab `n` (1-based).
pub fn reconstruct_slab<T: Real>(
    stm: &SpaceTimeMesh<T>,
    n: usize,
    p: &ProblemDefinition<T>,
) -> Result<SlabSurface<T>> {
    if n == 0 || n > stm.grid.n_slabs {
        return Err(Error::Config(format!(
            "slab index {n} outside 1..={}",
            stm.grid.n_slabs
        )));
    }
    let (t0, t1) = stm.grid.slab(n);
    let times = [t0, (t0 + t1) / T::lit(2.0), t1];
    let phi: Vec<Vec<T>> = times.iter().map(|&t| stm.sample_phi(p, t)).collect();
    for (vals, &t) in phi.iter().zip(&times) {
        stm.check_inside(vals, t)?;
    }
    let phi = &phi;
    let fine = &stm.fine;
    let pieces: Vec<(Vec<SurfaceElement<T>>, Vec<DroppedSimplex<T>>)> = (0..fine.cube_count())
        .into_par_iter()
        .map(|cube| {
            let corners = fine.cube_corners(cube);
            let mut out = Vec::new();
            let mut dropped = Vec::new();
            for sub in 0..2 {
                let lv = [sub, sub + 1];
                if !mixed_signs(lv.iter().flat_map(|&l| corners.iter().map(move |&c| phi[l][c]))) {
                    continue;
                }
                for ft in cube * 6..cube * 6 + 6 {
                    let nodes = fine.tets[ft];
                    if !mixed_signs(lv.iter().flat_map(|&l| nodes.iter().map(move |&v| phi[l][v]))) {
                        continue;
                    }
                    let parent = stm.fine_parent(ft) as u32;
                    let prism = Prism4D {
                        tet: ft,
                        slab: n,
                        nodes,
                        points: fine.tet_vertices(ft),
                        times: [times[lv[0]], times[lv[1]]],
                        levels: [lv[0] as u32, lv[1] as u32],
                    };
                    for pent in subdivide_prism(&prism) {
                        let vals = pent.local.map(|(i, l)| phi[lv[l]][nodes[i]]);
                        if mixed_signs(vals) {
                            out.extend(pentatope_elements(&pent, &vals, parent, &mut dropped));
                        }
                    }
                }
            }
            (out, dropped)
        })
        .collect();
    let (mut elements, mut dropped) = (Vec::new(), Vec::new());
    for (e, d) in pieces {
        elements.extend(e);
        dropped.extend(d);
    }
    elements.sort_by_key(|e| e.parent);
    Ok(SlabSurface {
        slab: n,
        t0,
        t1,
        elements,
        dropped,
    })
}

/// Cross section `Gamma_h(t)`: zero level of the fine spatial interpolant of `phi(., t)`.
///
/// The mesh is shared by all slabs, so the interpolants of the two slabs
/// meeting at a slab endpoint coincide there.
pub fn reconstruct_cross_section<T: Real>(
    stm: &SpaceTimeMesh<T>,
    p: &ProblemDefinition<T>,
    t: T,
) -> Result<CrossSection<T>> {
    let phi = stm.sample_phi(p, t);
    stm.check_inside(&phi, t)?;
    let fine = &stm.fine;
    let elements = (0..fine.cube_count())
        .into_par_iter()
        .flat_map_iter(|cube| {
            let corners = fine.cube_corners(cube);
            let mut out = Vec::new();
            if mixed_signs(corners.iter().map(|&c| phi[c])) {
                for ft in cube * 6..cube * 6 + 6 {
                    let nodes = fine.tets[ft];
                    let vals = nodes.map(|v| phi[v]);
                    if mixed_signs(vals) {
                        let parent = stm.fine_parent(ft) as u32;
                        let keys = nodes.map(|v| v as u32);
                        out.extend(tet_elements(&fine.tet_vertices(ft), &keys, &vals, parent));
                    }
                }
            }
            out
        })
        .collect();
    Ok(CrossSection { time: t, elements })
}

//! Prism subdivision and zero-level extraction on pentatopes and tetrahedra.
//!
//! Zero nodal values count as positive. Crossing points are keyed by the edge
//! they lie on (or by the vertex when the crossing sits on a positive vertex
//! with value zero), and every ambiguous split picks the diagonal through the
//! smallest key, so neighbouring cells produce matching facets.

use crate::scalar::Real;
use crate::vecmath::{self, Vec3, Vec4};

/// Identifier of a crossing point: ordered endpoint keys of its edge, or `(k, k)`
/// for a crossing at vertex `k`.
pub type PointKey = (u32, u32);

/// Space-time prism `tet x [t0, t1]` with spatial vertices in ascending global order.
#[derive(Clone, Copy, Debug)]
pub struct Prism4D<T> {
    pub tet: usize,
    pub slab: usize,
    pub nodes: [usize; 4],
    pub points: [Vec3<T>; 4],
    pub times: [T; 2],
    /// Time-level tags used to build vertex keys `4 * node + level`.
    pub levels: [u32; 2],
}

#[derive(Clone, Copy, Debug)]
pub struct Pentatope<T> {
    pub vertices: [Vec4<T>; 5],
    pub keys: [u32; 5],
    /// `(node index 0..3, layer 0|1)` of each vertex within the parent prism.
    pub local: [(usize, usize); 5],
}

impl<T: Real> Prism4D<T> {
    pub fn vertex(&self, i: usize, layer: usize) -> Vec4<T> {
        let p = self.points[i];
        [p[0], p[1], p[2], self.times[layer]]
    }

    pub fn key(&self, i: usize, layer: usize) -> u32 {
        4 * self.nodes[i] as u32 + self.levels[layer]
    }

    pub fn volume(&self) -> T {
        let v = self.points;
        let m = [
            vecmath::sub(&v[1], &v[0]),
            vecmath::sub(&v[2], &v[0]),
            vecmath::sub(&v[3], &v[0]),
        ];
        vecmath::det3(&m).abs() / T::lit(6.0) * (self.times[1] - self.times[0])
    }
}

impl<T: Real> Pentatope<T> {
    pub fn volume(&self) -> T {
        vecmath::simplex_measure(&self.vertices)
    }
}

/// Splits a prism into the four path simplices
/// `conv{(v0,t0)..(vk,t0), (vk,t1)..(v3,t1)}`, `k = 0..3`.
pub fn subdivide_prism<T: Real>(prism: &Prism4D<T>) -> [Pentatope<T>; 4] {
    debug_assert!(prism.nodes.windows(2).all(|w| w[0] < w[1]));
    std::array::from_fn(|k| {
        let local: [(usize, usize); 5] =
            std::array::from_fn(|s| if s <= k { (s, 0) } else { (s - 1, 1) });
        Pentatope {
            vertices: local.map(|(i, l)| prism.vertex(i, l)),
            keys: local.map(|(i, l)| prism.key(i, l)),
            local,
        }
    })
}

/// A flat 3-simplex of the discrete space-time surface.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceSimplex<T> {
    pub vertices: [Vec4<T>; 4],
    pub keys: [PointKey; 4],
}

fn crossing<T: Real, const N: usize>(
    pa: &[T; N],
    ka: u32,
    fa: T,
    pb: &[T; N],
    kb: u32,
    fb: T,
) -> ([T; N], PointKey) {
    // a negative, b non-negative
    if fb == T::zero() {
        return (*pb, (kb, kb));
    }
    let s = fa / (fa - fb);
    let x = vecmath::lerp(pa, pb, s);
    (x, (ka.min(kb), ka.max(kb)))
}

/// Cuts a prism-shaped polytope `p_i -- q_i` (two triangles joined by three
/// vertical edges) into three simplices, choosing every quad diagonal through
/// the quad's smallest key.
fn split_prism<P: Copy>(p: [(P, PointKey); 3], q: [(P, PointKey); 3]) -> [[(P, PointKey); 4]; 3] {
    let all = [p[0], p[1], p[2], q[0], q[1], q[2]];
    let min_at = (0..6).min_by_key(|&i| all[i].1).unwrap();
    let (mut top, mut bot) = if min_at < 3 { (p, q) } else { (q, p) };
    let r = min_at % 3;
    top.rotate_left(r);
    bot.rotate_left(r);
    let (p0, p1, p2) = (top[0], top[1], top[2]);
    let (q0, q1, q2) = (bot[0], bot[1], bot[2]);
    let first = [p0, q0, q1, q2];
    if p1.1.min(q2.1) < p2.1.min(q1.1) {
        [first, [p0, p1, p2, q2], [p0, p1, q2, q1]]
    } else {
        [first, [p0, p1, p2, q1], [p0, p2, q2, q1]]
    }
}

/// Zero level of the affine interpolant of `phi` on a pentatope (0 to 3 simplices).
pub fn march_pentatope<T: Real>(pent: &Pentatope<T>, phi: &[T; 5]) -> Vec<SurfaceSimplex<T>> {
    let neg: Vec<usize> = (0..5).filter(|&i| phi[i] < T::zero()).collect();
    let pos: Vec<usize> = (0..5).filter(|&i| phi[i] >= T::zero()).collect();
    let v = &pent.vertices;
    let k = &pent.keys;
    let cut = |a: usize, b: usize| crossing(&v[a], k[a], phi[a], &v[b], k[b], phi[b]);
    let simplex = |pts: [(Vec4<T>, PointKey); 4]| SurfaceSimplex {
        vertices: pts.map(|p| p.0),
        keys: pts.map(|p| p.1),
    };
    match (neg.len(), pos.len()) {
        (1, 4) => {
            let a = neg[0];
            vec![simplex(std::array::from_fn(|i| cut(a, pos[i])))]
        }
        (4, 1) => {
            let b = pos[0];
            vec![simplex(std::array::from_fn(|i| cut(neg[i], b)))]
        }
        (2, 3) => {
            let p = std::array::from_fn(|i| cut(neg[0], pos[i]));
            let q = std::array::from_fn(|i| cut(neg[1], pos[i]));
            split_prism(p, q).into_iter().map(simplex).collect()
        }
        (3, 2) => {
            let p = std::array::from_fn(|i| cut(neg[i], pos[0]));
            let q = std::array::from_fn(|i| cut(neg[i], pos[1]));
            split_prism(p, q).into_iter().map(simplex).collect()
        }
        _ => Vec::new(),
    }
}

/// A flat triangle of a spatial cross section.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceTriangle<T> {
    pub vertices: [Vec3<T>; 3],
    pub keys: [PointKey; 3],
}

/// Zero level of the affine interpolant on a tetrahedron (0 to 2 triangles).
pub fn march_tet<T: Real>(points: &[Vec3<T>; 4], keys: &[u32; 4], phi: &[T; 4]) -> Vec<SurfaceTriangle<T>> {
    let neg: Vec<usize> = (0..4).filter(|&i| phi[i] < T::zero()).collect();
    let pos: Vec<usize> = (0..4).filter(|&i| phi[i] >= T::zero()).collect();
    let cut = |a: usize, b: usize| crossing(&points[a], keys[a], phi[a], &points[b], keys[b], phi[b]);
    let tri = |pts: [(Vec3<T>, PointKey); 3]| SurfaceTriangle {
        vertices: pts.map(|p| p.0),
        keys: pts.map(|p| p.1),
    };
    match (neg.len(), pos.len()) {
        (1, 3) => vec![tri(std::array::from_fn(|i| cut(neg[0], pos[i])))],
        (3, 1) => vec![tri(std::array::from_fn(|i| cut(neg[i], pos[0])))],
        (2, 2) => {
            // quad a-c, a-d, b-d, b-c in cyclic order
            let quad = [
                cut(neg[0], pos[0]),
                cut(neg[0], pos[1]),
                cut(neg[1], pos[1]),
                cut(neg[1], pos[0]),
            ];
            let m = (0..4).min_by_key(|&i| quad[i].1).unwrap();
            let (a, b, c, d) = (quad[m], quad[(m + 1) % 4], quad[(m + 2) % 4], quad[(m + 3) % 4]);
            vec![tri([a, b, c]), tri([a, c, d])]
        }
        _ => Vec::new(),
    }
}

/// Whether all keys are distinct (a repeated key means a collapsed simplex).
pub fn keys_distinct(keys: &[PointKey]) -> bool {
    (0..keys.len()).all(|i| (i + 1..keys.len()).all(|j| keys[i] != keys[j]))
}
